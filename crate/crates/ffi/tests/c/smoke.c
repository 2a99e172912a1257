/* Loads a bundle, classifies one paragraph and exercises the helpers. */
#include <stdio.h>
#include <string.h>

#include "riskdomain.h"

static int check(enum RdStatus s, const char *what) {
  if (s != RD_STATUS_OK) {
    fprintf(stderr, "%s failed (%d): %s\n", what, (int)s, rd_last_error_message());
    return 1;
  }
  return 0;
}

int main(int argc, char **argv) {
  if (argc != 3) {
    fprintf(stderr, "usage: smoke BUNDLE TEXT\n");
    return 2;
  }
  RdPipeline *p = NULL;
  if (check(rd_pipeline_load(argv[1], &p), "load")) return 1;

  double scores[RD_NUM_DOMAINS];
  uint32_t labels[RD_MAX_LABELS];
  size_t n = 0;
  if (check(rd_pipeline_classify(p, argv[2], scores, labels, &n), "classify")) return 1;
  printf("labels");
  for (size_t i = 0; i < n; i++) printf(" %s", rd_domain_name(labels[i]));
  printf("\nscores");
  for (int i = 0; i < RD_NUM_DOMAINS; i++) printf(" %.17g", scores[i]);
  printf("\n");
  rd_pipeline_free(p);

  int32_t table[] = {0, 0, 1, 1, 1, 1, 0, 1, 0};
  double k = 0;
  if (check(rd_fleiss_kappa(table, 3, 3, &k), "fleiss")) return 1;
  printf("fleiss %.17g\n", k);

  char *stem = NULL;
  if (check(rd_porter_stem("hopefulness", &stem), "stem")) return 1;
  printf("stem %s\n", stem);
  rd_string_free(stem);

  RdPipeline *missing = NULL;
  enum RdStatus s = rd_pipeline_load("/nonexistent/bundle", &missing);
  printf("missing %d %s\n", (int)s, missing == NULL ? "null" : "set");
  printf("version %s\n", rd_version());
  return 0;
}
