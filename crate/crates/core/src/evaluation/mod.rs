//! Precision/recall/F1 against a gold standard and inter-annotator agreement.

mod agreement;
mod report;

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::corpus::io::GoldRecord;
use crate::corpus::{validate_labels, Domain};
use crate::error::{Error, Result};

pub use agreement::{
    agreement_stats, annotator_accuracy, fleiss_kappa, landis_koch, multi_kappa, multilabel_items, AccuracyReport,
    AgreementStats,
};
pub use report::{iaa_report, metrics_report, IaaReport, IaaRow, MetricsReport};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub id: String,
    pub predicted: Vec<Domain>,
    pub gold: Vec<Domain>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Prf {
    /// F1 is 0 when `precision + recall = 0`.
    pub fn new(precision: f64, recall: f64) -> Self {
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Prf { precision, recall, f1 }
    }
}

/// One-vs-rest counts and scores for one domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainRow {
    pub domain: Domain,
    pub prf: Prf,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    /// Never predicted: precision is undefined and reported as 0.
    pub no_predictions: bool,
    /// Never in the gold standard: recall is undefined and reported as 0.
    pub no_gold: bool,
}

impl DomainRow {
    pub fn degenerate(&self) -> bool {
        self.no_predictions || self.no_gold
    }

    pub fn support(&self) -> usize {
        self.tp + self.fn_
    }
}

fn check_records(records: &[PredictionRecord]) -> Result<()> {
    if records.is_empty() {
        return Err(Error::data("no prediction records"));
    }
    for r in records {
        validate_labels(&r.predicted).map_err(|e| Error::data(format!("{}: predicted: {e}", r.id)))?;
        validate_labels(&r.gold).map_err(|e| Error::data(format!("{}: gold: {e}", r.id)))?;
    }
    Ok(())
}

/// Per-paragraph set precision/recall/F1, averaged with equal weight.
pub fn example_prf(records: &[PredictionRecord]) -> Result<Prf> {
    check_records(records)?;
    let (mut p, mut r, mut f) = (0.0, 0.0, 0.0);
    for rec in records {
        let pred: BTreeSet<Domain> = rec.predicted.iter().copied().collect();
        let gold: BTreeSet<Domain> = rec.gold.iter().copied().collect();
        let hit = pred.intersection(&gold).count() as f64;
        let one = Prf::new(hit / pred.len() as f64, hit / gold.len() as f64);
        p += one.precision;
        r += one.recall;
        f += one.f1;
    }
    let n = records.len() as f64;
    Ok(Prf {
        precision: p / n,
        recall: r / n,
        f1: f / n,
    })
}

/// One-vs-rest binary scores for all eight labels.
pub fn per_domain_prf(records: &[PredictionRecord]) -> Result<Vec<DomainRow>> {
    check_records(records)?;
    Ok(Domain::ALL
        .iter()
        .map(|&d| {
            let (mut tp, mut fp, mut fn_) = (0, 0, 0);
            for r in records {
                match (r.predicted.contains(&d), r.gold.contains(&d)) {
                    (true, true) => tp += 1,
                    (true, false) => fp += 1,
                    (false, true) => fn_ += 1,
                    (false, false) => {}
                }
            }
            let no_predictions = tp + fp == 0;
            let no_gold = tp + fn_ == 0;
            let precision = if no_predictions {
                0.0
            } else {
                tp as f64 / (tp + fp) as f64
            };
            let recall = if no_gold { 0.0 } else { tp as f64 / (tp + fn_) as f64 };
            DomainRow {
                domain: d,
                prf: Prf::new(precision, recall),
                tp,
                fp,
                fn_,
                no_predictions,
                no_gold,
            }
        })
        .collect())
}

/// Pairs predictions with gold labels by id, keeping prediction order.
/// Errors list up to ten ids missing on either side.
pub fn align_records(predictions: &[(String, Vec<Domain>)], gold: &[GoldRecord]) -> Result<Vec<PredictionRecord>> {
    let gold_by_id: HashMap<&str, &GoldRecord> = gold.iter().map(|g| (g.id.as_str(), g)).collect();
    let pred_ids: BTreeSet<&str> = predictions.iter().map(|(id, _)| id.as_str()).collect();
    if pred_ids.len() != predictions.len() {
        return Err(Error::data("duplicate ids in predictions"));
    }
    let mut offenders: Vec<String> = predictions
        .iter()
        .filter(|(id, _)| !gold_by_id.contains_key(id.as_str()))
        .map(|(id, _)| format!("{id} (no gold)"))
        .collect();
    offenders.extend(
        gold.iter()
            .filter(|g| !pred_ids.contains(g.id.as_str()))
            .map(|g| format!("{} (no prediction)", g.id)),
    );
    if !offenders.is_empty() {
        let shown: Vec<&str> = offenders.iter().take(10).map(String::as_str).collect();
        return Err(Error::data(format!(
            "{} id mismatches between predictions and gold: {}",
            offenders.len(),
            shown.join(", ")
        )));
    }
    Ok(predictions
        .iter()
        .map(|(id, labels)| PredictionRecord {
            id: id.clone(),
            predicted: labels.clone(),
            gold: gold_by_id[id.as_str()].labels.clone(),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use Domain::*;

    fn rec(pred: &[Domain], gold: &[Domain]) -> PredictionRecord {
        PredictionRecord {
            id: "p".into(),
            predicted: pred.to_vec(),
            gold: gold.to_vec(),
        }
    }

    #[test]
    fn example_prf_examples() {
        assert_eq!(example_prf(&[rec(&[Mood], &[Mood])]).unwrap(), Prf::new(1.0, 1.0));
        let m = example_prf(&[rec(&[Mood], &[Mood, Substance])]).unwrap();
        assert_eq!((m.precision, m.recall), (1.0, 0.5));
        assert!((m.f1 - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(example_prf(&[rec(&[Other], &[Mood])]).unwrap(), Prf::default());
        assert!(example_prf(&[]).is_err());
    }

    #[test]
    fn per_domain_examples() {
        let rows = per_domain_prf(&[rec(&[Mood], &[Mood]), rec(&[Mood], &[Substance])]).unwrap();
        assert_eq!(rows.len(), 8);
        let mood = &rows[Mood.index()];
        assert_eq!((mood.prf.precision, mood.prf.recall), (0.5, 1.0));
        assert!((mood.prf.f1 - 2.0 / 3.0).abs() < 1e-15);
        let sub = &rows[Substance.index()];
        assert!(sub.no_predictions && !sub.no_gold);
        assert_eq!(sub.prf.recall, 0.0);
        let app = &rows[Appearance.index()];
        assert!(app.no_predictions && app.no_gold && app.degenerate());
        assert_eq!(app.prf.recall, 0.0);
    }

    #[test]
    fn alignment_reports_offenders() {
        let gold = vec![
            GoldRecord {
                id: "a".into(),
                labels: vec![Mood],
            },
            GoldRecord {
                id: "b".into(),
                labels: vec![Other],
            },
        ];
        let preds = vec![("b".to_string(), vec![Other]), ("a".to_string(), vec![Substance])];
        let recs = align_records(&preds, &gold).unwrap();
        assert_eq!(recs[0].id, "b");
        assert_eq!(recs[1].gold, vec![Mood]);
        let err = align_records(&[("z".to_string(), vec![Mood])], &gold)
            .unwrap_err()
            .to_string();
        assert!(
            err.contains("z (no gold)") && err.contains("a (no prediction)"),
            "{err}"
        );
    }

    fn labels() -> impl Strategy<Value = Vec<Domain>> {
        prop_oneof![
            Just(vec![Other]),
            proptest::sample::subsequence(Domain::RISK_FACTORS.to_vec(), 1..4).prop_shuffle(),
        ]
    }

    proptest! {
        #[test]
        fn perfect_iff_equal_sets(pairs in proptest::collection::vec((labels(), labels()), 1..20)) {
            let records: Vec<PredictionRecord> = pairs.iter().map(|(p, g)| rec(p, g)).collect();
            let all_equal = pairs.iter().all(|(p, g)| {
                p.iter().collect::<BTreeSet<_>>() == g.iter().collect::<BTreeSet<_>>()
            });
            let m = example_prf(&records).unwrap();
            prop_assert_eq!(all_equal, m.f1 == 1.0);
            prop_assert_eq!(all_equal, m.precision == 1.0 && m.recall == 1.0);
            for row in per_domain_prf(&records).unwrap() {
                let gold_count = records.iter().filter(|r| r.gold.contains(&row.domain)).count();
                prop_assert_eq!(row.tp + row.fn_, gold_count);
                for v in [row.prf.precision, row.prf.recall, row.prf.f1] {
                    prop_assert!((0.0..=1.0).contains(&v));
                }
            }
        }
    }
}
