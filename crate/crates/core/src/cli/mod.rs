//! Command-line front end: `synth`, `train`, `classify`, `evaluate`,
//! `agreement` and `project-lda`.
//!
//! Every subcommand accepts `--config FILE` (JSON, see [`PipelineConfig`]),
//! `--seed` and `--out`. Flags override config values. Relative paths in a
//! config file are resolved against the directory containing it.

mod svg;

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::Error as _;
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::bundle::{load_bundle, save_bundle};
use crate::classification::{fit_pipeline, DomainScores, PipelineParams};
use crate::corpus::io::{
    read_annotations, read_gold, read_jsonl, read_lexicon, read_paragraphs, write_jsonl, write_lexicon,
};
use crate::corpus::synth::{generate_noise_paragraphs, generate_synthetic_corpus, SynthConfig};
use crate::corpus::{weak_label, Domain, Paragraph, NUM_DOMAINS};
use crate::error::{Error, Result};
use crate::evaluation::{align_records, iaa_report, metrics_report};
use crate::vector_space::{lda_2d, DocVector};

pub use svg::lda_svg;

#[derive(Debug, Parser)]
#[command(
    name = "riskdomain",
    version,
    about = "Risk-factor domain classification of clinical paragraphs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// JSON config file; flags take precedence over its values.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Seed for every random stream; overrides the config file.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file or directory (see each subcommand).
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic corpus, gold standard, lexicon and annotations to
    /// the `--out` directory.
    Synth(SynthArgs),
    /// Fit a pipeline and write a model bundle to the `--out` directory.
    Train(TrainArgs),
    /// Classify a corpus; JSON lines to `--out` or standard output.
    Classify(ClassifyArgs),
    /// Score predictions against a gold standard.
    Evaluate(EvaluateArgs),
    /// Inter-annotator agreement of a three-annotator file.
    Agreement(AgreementArgs),
    /// Two-component LDA of a corpus as CSV and SVG.
    ProjectLda(ProjectLdaArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[command(flatten)]
    pub common: Common,
    /// Paragraphs per domain (overrides every pool count).
    #[arg(long)]
    pub count: Option<usize>,
    /// Also write this many pure-noise paragraphs to `noise.jsonl`.
    #[arg(long)]
    pub noise: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_name = "FILE")]
    pub corpus: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub lexicon: Option<PathBuf>,
    /// cosine, mlp or rbf.
    #[arg(long)]
    pub kind: Option<String>,
    /// Threshold multiplier on the per-domain standard deviation (default
    /// depends on the kind).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Dimensions kept by the truncated SVD.
    #[arg(long)]
    pub svd_k: Option<usize>,
    /// Training epochs for mlp or rbf.
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Disable multiword-expression fusion and keyphrase weak labeling.
    #[arg(long)]
    pub no_mwe: bool,
    /// Use fewer RBF prototypes for domains with too few vectors instead of
    /// failing.
    #[arg(long)]
    pub clamp_prototypes: bool,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_name = "DIR")]
    pub bundle: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub corpus: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_name = "FILE")]
    pub predictions: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub gold: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AgreementArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_name = "FILE")]
    pub annotations: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub gold: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ProjectLdaArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_name = "DIR")]
    pub bundle: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub corpus: Option<PathBuf>,
    /// Label points by their first gold label instead of weak labels.
    #[arg(long, value_name = "FILE")]
    pub gold: Option<PathBuf>,
}

/// Contents of a `--config` file. Every field is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub corpus: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub gold: Option<PathBuf>,
    pub annotations: Option<PathBuf>,
    pub predictions: Option<PathBuf>,
    pub bundle: Option<PathBuf>,
    pub out: Option<PathBuf>,
    /// Global seed; overrides `model.seed`.
    pub seed: Option<u64>,
    pub model: PipelineParams,
    pub synth: SynthConfig,
    /// Pure-noise paragraphs written by `synth`.
    pub noise_paragraphs: usize,
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: PipelineConfig = serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            message: e.to_string(),
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [
            &mut cfg.corpus,
            &mut cfg.lexicon,
            &mut cfg.gold,
            &mut cfg.annotations,
            &mut cfg.predictions,
            &mut cfg.bundle,
            &mut cfg.out,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }
}

/// Config merged with the common flags.
struct Resolved {
    cfg: PipelineConfig,
    seed: u64,
    out: Option<PathBuf>,
}

fn resolve(common: &Common) -> Result<Resolved> {
    let cfg = match &common.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    let seed = common.seed.or(cfg.seed).unwrap_or(cfg.model.seed);
    let out = common.out.clone().or_else(|| cfg.out.clone());
    Ok(Resolved { cfg, seed, out })
}

fn need(flag: &Option<PathBuf>, cfg: &Option<PathBuf>, name: &str) -> Result<PathBuf> {
    flag.clone()
        .or_else(|| cfg.clone())
        .ok_or_else(|| Error::config(format!("missing --{name} (or `{name}` in the config file)")))
}

fn need_out(r: &Resolved) -> Result<PathBuf> {
    r.out
        .clone()
        .ok_or_else(|| Error::config("missing --out (or `out` in the config file)"))
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value)
        .map(|s| s + "\n")
        .map_err(|e| Error::data(e.to_string()))
}

/// Scores keyed by domain name, in output order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreMap(pub DomainScores);

impl Serialize for ScoreMap {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(NUM_DOMAINS))?;
        for d in Domain::RISK_FACTORS {
            map.serialize_entry(d.name(), &self.0 .0[d.index()])?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for ScoreMap {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw: BTreeMap<Domain, f64> = BTreeMap::deserialize(d)?;
        let mut out = [0.0; NUM_DOMAINS];
        for dom in Domain::RISK_FACTORS {
            out[dom.index()] = *raw
                .get(&dom)
                .ok_or_else(|| D::Error::custom(format!("missing score for {dom}")))?;
        }
        if raw.len() != NUM_DOMAINS {
            return Err(D::Error::custom(
                "scores must name exactly the seven risk-factor domains",
            ));
        }
        Ok(ScoreMap(DomainScores(out)))
    }
}

/// One line of `classify` output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionLine {
    pub id: String,
    pub labels: Vec<Domain>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scores: Option<ScoreMap>,
}

/// Runs one parsed command.
pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth(a) => cmd_synth(&a),
        Command::Train(a) => cmd_train(&a),
        Command::Classify(a) => cmd_classify(&a),
        Command::Evaluate(a) => cmd_evaluate(&a),
        Command::Agreement(a) => cmd_agreement(&a),
        Command::ProjectLda(a) => cmd_project_lda(&a),
    }
}

pub fn cmd_synth(a: &SynthArgs) -> Result<()> {
    let r = resolve(&a.common)?;
    let out = need_out(&r)?;
    let mut config = r.cfg.synth.clone();
    if let Some(n) = a.count {
        config = config.with_counts(n);
    }
    let corpus = generate_synthetic_corpus(&config, r.seed)?;
    create_dir(&out)?;
    write_jsonl(&out.join("corpus.jsonl"), &corpus.paragraphs)?;
    write_jsonl(&out.join("gold.jsonl"), &corpus.gold_records())?;
    write_jsonl(&out.join("annotations.jsonl"), &corpus.annotations)?;
    write_lexicon(&out.join("lexicon.json"), &corpus.lexicon)?;
    let n_noise = a.noise.unwrap_or(r.cfg.noise_paragraphs);
    if n_noise > 0 {
        let noise = generate_noise_paragraphs(&config, n_noise, r.seed.wrapping_add(1))?;
        write_jsonl(&out.join("noise.jsonl"), &noise)?;
    }
    log::info!(
        "wrote {} paragraphs (seed {}) to {}",
        corpus.paragraphs.len(),
        r.seed,
        out.display()
    );
    Ok(())
}

pub fn cmd_train(a: &TrainArgs) -> Result<()> {
    let r = resolve(&a.common)?;
    let out = need_out(&r)?;
    let corpus_path = need(&a.corpus, &r.cfg.corpus, "corpus")?;
    let lexicon_path = need(&a.lexicon, &r.cfg.lexicon, "lexicon")?;
    let mut params = r.cfg.model.clone();
    params.seed = r.seed;
    if let Some(k) = &a.kind {
        params.kind = k.parse()?;
    }
    if let Some(alpha) = a.alpha {
        params.alpha = Some(alpha);
    }
    if let Some(k) = a.svd_k {
        params.svd_k = k;
    }
    if a.no_mwe {
        params.use_mwe = false;
    }
    if a.clamp_prototypes {
        params.clamp_prototypes = true;
    }
    if let Some(e) = a.epochs {
        params.train.epochs = Some(e);
    }
    params.validate()?;
    let lexicon = read_lexicon(&lexicon_path)?;
    let paragraphs = read_paragraphs(&corpus_path)?;
    log::info!(
        "training {} on {} paragraphs (svd_k {}, alpha {}, mwe {}, seed {})",
        params.kind.name(),
        paragraphs.len(),
        params.svd_k,
        params.alpha(),
        params.use_mwe,
        params.seed
    );
    let (pipeline, report) = fit_pipeline(&paragraphs, &lexicon, &params)?;
    save_bundle(&out, &pipeline, &params, Some(&report))?;
    log::info!(
        "bundle written to {} ({} training paragraphs, vocabulary {}, {} calibration paragraphs)",
        out.display(),
        report.n_training,
        report.vocabulary_size,
        report.n_calibration
    );
    Ok(())
}

pub fn cmd_classify(a: &ClassifyArgs) -> Result<()> {
    let r = resolve(&a.common)?;
    let bundle = need(&a.bundle, &r.cfg.bundle, "bundle")?;
    let corpus_path = need(&a.corpus, &r.cfg.corpus, "corpus")?;
    let (pipeline, _) = load_bundle(&bundle)?;
    let paragraphs = read_paragraphs(&corpus_path)?;
    let lines = paragraphs
        .iter()
        .map(|p| {
            let c = pipeline.classify(&p.text)?;
            Ok(PredictionLine {
                id: p.id.clone(),
                labels: c.labels,
                scores: Some(ScoreMap(c.scores)),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    match &r.out {
        Some(path) => write_jsonl(path, &lines)?,
        None => {
            let write_all = || -> io::Result<()> {
                let mut w = BufWriter::new(io::stdout().lock());
                for l in &lines {
                    serde_json::to_writer(&mut w, l)?;
                    w.write_all(b"\n")?;
                }
                w.flush()
            };
            match write_all() {
                // A closed pipe (e.g. `| head`) is not an error.
                Err(e) if e.kind() == io::ErrorKind::BrokenPipe => return Ok(()),
                r => r.map_err(|e| Error::io("<stdout>", e))?,
            }
        }
    }
    log::info!("classified {} paragraphs", lines.len());
    Ok(())
}

pub fn cmd_evaluate(a: &EvaluateArgs) -> Result<()> {
    let r = resolve(&a.common)?;
    let pred_path = need(&a.predictions, &r.cfg.predictions, "predictions")?;
    let gold_path = need(&a.gold, &r.cfg.gold, "gold")?;
    let preds: Vec<PredictionLine> = read_jsonl(&pred_path)?;
    let gold = read_gold(&gold_path)?;
    let pairs: Vec<(String, Vec<Domain>)> = preds.into_iter().map(|p| (p.id, p.labels)).collect();
    let report = metrics_report(&align_records(&pairs, &gold)?)?;
    let table = report.to_table();
    if let Some(out) = &r.out {
        create_dir(out)?;
        write_text(&out.join("metrics.json"), &to_json(&report)?)?;
        write_text(&out.join("metrics.txt"), &table)?;
    }
    print!("{table}");
    Ok(())
}

pub fn cmd_agreement(a: &AgreementArgs) -> Result<()> {
    let r = resolve(&a.common)?;
    let ann_path = need(&a.annotations, &r.cfg.annotations, "annotations")?;
    let gold_path = need(&a.gold, &r.cfg.gold, "gold")?;
    let report = iaa_report(&read_annotations(&ann_path)?, &read_gold(&gold_path)?)?;
    let table = report.to_table();
    if let Some(out) = &r.out {
        create_dir(out)?;
        write_text(&out.join("agreement.json"), &to_json(&report)?)?;
        write_text(&out.join("agreement.txt"), &table)?;
    }
    print!("{table}");
    Ok(())
}

/// One labeled point of the LDA projection.
#[derive(Debug, Clone, PartialEq)]
pub struct LdaPoint {
    pub id: String,
    pub domain: Domain,
    pub xy: [f64; 2],
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn lda_csv(points: &[LdaPoint]) -> String {
    let mut out = String::from("id,domain,x,y\n");
    for p in points {
        out.push_str(&format!(
            "{},{},{},{}\n",
            csv_field(&p.id),
            p.domain.name(),
            p.xy[0],
            p.xy[1]
        ));
    }
    out
}

pub fn cmd_project_lda(a: &ProjectLdaArgs) -> Result<()> {
    let r = resolve(&a.common)?;
    let out = need_out(&r)?;
    let bundle = need(&a.bundle, &r.cfg.bundle, "bundle")?;
    let corpus_path = need(&a.corpus, &r.cfg.corpus, "corpus")?;
    let (pipeline, _) = load_bundle(&bundle)?;
    let paragraphs = read_paragraphs(&corpus_path)?;
    let labeled: Vec<(Paragraph, Domain)> = match a.gold.clone().or_else(|| r.cfg.gold.clone()) {
        Some(gold_path) => {
            let gold: BTreeMap<String, Domain> = read_gold(&gold_path)?
                .into_iter()
                .map(|g| (g.id, g.labels[0]))
                .collect();
            paragraphs
                .into_iter()
                .filter_map(|p| gold.get(&p.id).map(|d| (p.clone(), *d)))
                .collect()
        }
        None => {
            let lexicon = pipeline.lexicon().expect("loaded bundle has a lexicon");
            weak_label(&paragraphs, lexicon)?.entries
        }
    };
    let k = pipeline.svd().map(|s| s.k()).unwrap_or(0);
    let vectors: Vec<DocVector> = labeled
        .iter()
        .map(|(p, _)| Ok(pipeline.embed(&p.text)?.unwrap_or_else(|| DocVector::zeros(k))))
        .collect::<Result<_>>()?;
    let labels: Vec<Domain> = labeled.iter().map(|(_, d)| *d).collect();
    let coords = lda_2d(&vectors, &labels)?;
    let points: Vec<LdaPoint> = labeled
        .iter()
        .zip(coords)
        .map(|((p, d), xy)| LdaPoint {
            id: p.id.clone(),
            domain: *d,
            xy,
        })
        .collect();
    create_dir(&out)?;
    write_text(&out.join("lda.csv"), &lda_csv(&points))?;
    write_text(&out.join("lda.svg"), &lda_svg(&points))?;
    log::info!("projected {} paragraphs to {}", points.len(), out.display());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classification::ModelKind;

    #[test]
    fn score_map_round_trips_by_name() {
        let m = ScoreMap(DomainScores([0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7]));
        let json = serde_json::to_string(&m).unwrap();
        assert!(json.starts_with("{\"Appearance\":0.1,\"ThoughtContent\":0.2"), "{json}");
        assert_eq!(serde_json::from_str::<ScoreMap>(&json).unwrap(), m);
        assert!(serde_json::from_str::<ScoreMap>("{\"Mood\":1.0}").is_err());
    }

    #[test]
    fn prediction_line_scores_are_optional() {
        let p: PredictionLine = serde_json::from_str(r#"{"id":"a","labels":["Mood","Thought Content"]}"#).unwrap();
        assert_eq!(p.labels, vec![Domain::Mood, Domain::ThoughtContent]);
        assert!(p.scores.is_none());
    }

    #[test]
    fn csv_quotes_awkward_ids() {
        let pts = [LdaPoint {
            id: "a,\"b\"".into(),
            domain: Domain::Mood,
            xy: [1.5, -2.0],
        }];
        assert_eq!(lda_csv(&pts), "id,domain,x,y\n\"a,\"\"b\"\"\",Mood,1.5,-2\n");
    }

    #[test]
    fn config_paths_resolve_against_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        fs::write(
            &path,
            r#"{"corpus": "data/c.jsonl", "seed": 5, "model": {"kind": "rbf", "svd_k": 50}}"#,
        )
        .unwrap();
        let cfg = PipelineConfig::load(&path).unwrap();
        assert_eq!(cfg.corpus.unwrap(), dir.path().join("data/c.jsonl"));
        assert_eq!(cfg.model.kind, ModelKind::Rbf);
        assert_eq!(cfg.model.svd_k, 50);
        assert_eq!(cfg.synth, SynthConfig::standard());
        fs::write(&path, r#"{"model": {"svd": 3}}"#).unwrap();
        assert!(PipelineConfig::load(&path).is_err());
    }

    #[test]
    fn flags_beat_config_seed() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        fs::write(&path, r#"{"seed": 5, "model": {"seed": 9}}"#).unwrap();
        let mut common = Common {
            config: Some(path.clone()),
            ..Default::default()
        };
        assert_eq!(resolve(&common).unwrap().seed, 5);
        common.seed = Some(11);
        assert_eq!(resolve(&common).unwrap().seed, 11);
        fs::write(&path, r#"{"model": {"seed": 9}}"#).unwrap();
        common.seed = None;
        assert_eq!(resolve(&common).unwrap().seed, 9);
    }
}
