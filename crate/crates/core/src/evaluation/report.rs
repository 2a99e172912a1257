use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::agreement::{check_annotations, multilabel_items};
use super::{
    agreement_stats, annotator_accuracy, example_prf, fleiss_kappa, landis_koch, multi_kappa, per_domain_prf,
    AccuracyReport, AgreementStats, DomainRow, PredictionRecord, Prf,
};
use crate::corpus::io::{AnnotationRecord, GoldRecord};
use crate::error::Result;

/// Overall and per-domain scores of one prediction set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub n_records: usize,
    pub overall: Prf,
    pub domains: Vec<DomainRow>,
}

pub fn metrics_report(records: &[PredictionRecord]) -> Result<MetricsReport> {
    Ok(MetricsReport {
        n_records: records.len(),
        overall: example_prf(records)?,
        domains: per_domain_prf(records)?,
    })
}

impl MetricsReport {
    /// Aligned table: one row for the overall scores, then one per label.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<16} {:>9} {:>9} {:>9} {:>8}",
            "", "Precision", "Recall", "F1", "Support"
        );
        let _ = writeln!(
            out,
            "{:<16} {:>9.3} {:>9.3} {:>9.3} {:>8}",
            "Overall", self.overall.precision, self.overall.recall, self.overall.f1, self.n_records
        );
        for row in &self.domains {
            let flag = match (row.no_predictions, row.no_gold) {
                (true, true) => "  (never predicted, not in gold)",
                (true, false) => "  (never predicted)",
                (false, true) => "  (not in gold)",
                _ => "",
            };
            let _ = writeln!(
                out,
                "{:<16} {:>9.3} {:>9.3} {:>9.3} {:>8}{flag}",
                row.domain.display_name(),
                row.prf.precision,
                row.prf.recall,
                row.prf.f1,
                row.support()
            );
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IaaRow {
    pub fleiss_kappa: f64,
    pub fleiss_band: String,
    pub multi_kappa: f64,
    pub multi_band: String,
    pub mean_accuracy: f64,
    pub accuracy: Vec<f64>,
    pub definition: String,
}

/// Inter-annotator agreement in two views: all labels and first labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IaaReport {
    pub n_items: usize,
    pub overall: IaaRow,
    pub first_domain_only: IaaRow,
    pub agreement: AgreementStats,
}

fn row(fleiss: f64, multi: f64, accuracy: Vec<f64>, mean: f64, definition: &str) -> IaaRow {
    IaaRow {
        fleiss_kappa: fleiss,
        fleiss_band: landis_koch(fleiss).to_string(),
        multi_kappa: multi,
        multi_band: landis_koch(multi).to_string(),
        mean_accuracy: mean,
        accuracy,
        definition: definition.to_string(),
    }
}

/// Requires exactly three annotators per paragraph.
pub fn iaa_report(annotations: &[AnnotationRecord], gold: &[GoldRecord]) -> Result<IaaReport> {
    check_annotations(annotations, 3)?;
    let binary = multilabel_items(annotations);
    let first: Vec<Vec<_>> = annotations
        .iter()
        .map(|a| a.annotations.iter().map(|l| l[0]).collect())
        .collect();
    let AccuracyReport {
        exact,
        exact_mean,
        first_domain,
        first_domain_mean,
    } = annotator_accuracy(annotations, gold)?;
    Ok(IaaReport {
        n_items: annotations.len(),
        overall: row(
            fleiss_kappa(&binary)?,
            multi_kappa(&binary)?,
            exact,
            exact_mean,
            "kappa over binary (paragraph, label) items, 8 per paragraph; accuracy = label set equals gold set",
        ),
        first_domain_only: row(
            fleiss_kappa(&first)?,
            multi_kappa(&first)?,
            first_domain,
            first_domain_mean,
            "kappa over each annotator's first label; accuracy = first label equals gold first label",
        ),
        agreement: agreement_stats(annotations)?,
    })
}

impl IaaReport {
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<18} {:>13} {:>13} {:>13}",
            "", "Fleiss kappa", "Multi-kappa", "Mean accuracy"
        );
        for (name, r) in [
            ("Overall", &self.overall),
            ("First Domain Only", &self.first_domain_only),
        ] {
            let _ = writeln!(
                out,
                "{:<18} {:>13.3} {:>13.3} {:>13.3}",
                name, r.fleiss_kappa, r.multi_kappa, r.mean_accuracy
            );
        }
        let _ = writeln!(out);
        for (name, r) in [
            ("Overall", &self.overall),
            ("First Domain Only", &self.first_domain_only),
        ] {
            let acc: Vec<String> = r.accuracy.iter().map(|a| format!("{a:.3}")).collect();
            let _ = writeln!(
                out,
                "{name}: Fleiss {} / multi {}; per-annotator accuracy [{}]; {}",
                r.fleiss_band,
                r.multi_band,
                acc.join(", "),
                r.definition
            );
        }
        let a = &self.agreement;
        let _ = writeln!(
            out,
            "\nparagraphs {}: total agreement {}, total disagreement {}, partial {}; single-label share of total agreement {:.3}",
            self.n_items, a.total_agreement, a.total_disagreement, a.partial, a.single_domain_share
        );
        out
    }
}
