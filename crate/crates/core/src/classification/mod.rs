//! Per-domain scoring, threshold calibration and open-world multilabel
//! assignment.

mod pipeline;

use serde::{Deserialize, Serialize};

use crate::corpus::{Domain, NUM_DOMAINS};
use crate::error::{Error, Result};
use crate::networks::{mlp_forward, rbf_forward, MlpModel, Mode, RbfModel};
use crate::vector_space::{cosine, DocVector};

pub use pipeline::{
    fit_pipeline, Classification, FitReport, Pipeline, PipelineParams, TrainOverrides, RBF_WIDTH_SCALE,
};

/// One score per risk-factor domain, in [`Domain::RISK_FACTORS`] order.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DomainScores(pub [f64; NUM_DOMAINS]);

impl DomainScores {
    pub fn get(&self, domain: Domain) -> Option<f64> {
        (!domain.is_other()).then(|| self.0[domain.index()])
    }

    pub fn from_slice(values: &[f64]) -> Result<Self> {
        let arr: [f64; NUM_DOMAINS] = values.try_into().map_err(|_| Error::DimensionMismatch {
            expected: NUM_DOMAINS,
            actual: values.len(),
        })?;
        if arr.iter().any(|v| !v.is_finite()) {
            return Err(Error::numerical(format!("non-finite domain scores {arr:?}")));
        }
        Ok(DomainScores(arr))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Cosine,
    Mlp,
    Rbf,
}

impl ModelKind {
    pub fn default_alpha(self) -> f64 {
        match self {
            ModelKind::Cosine => 1.0,
            ModelKind::Mlp => 0.78,
            ModelKind::Rbf => 1.2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Cosine => "cosine",
            ModelKind::Mlp => "mlp",
            ModelKind::Rbf => "rbf",
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cosine" => Ok(ModelKind::Cosine),
            "mlp" => Ok(ModelKind::Mlp),
            "rbf" => Ok(ModelKind::Rbf),
            _ => Err(Error::config(format!(
                "unknown model kind `{s}` (expected cosine, mlp or rbf)"
            ))),
        }
    }
}

/// `score_d = cosine(doc, megadoc_d)` for each domain.
pub fn cosine_baseline_scores(doc: &DocVector, megadocs: &[DocVector]) -> Result<DomainScores> {
    if megadocs.len() != NUM_DOMAINS {
        return Err(Error::DimensionMismatch {
            expected: NUM_DOMAINS,
            actual: megadocs.len(),
        });
    }
    let mut out = [0.0; NUM_DOMAINS];
    for (o, m) in out.iter_mut().zip(megadocs) {
        *o = cosine(doc, m)?;
    }
    Ok(DomainScores(out))
}

/// Fitted scorer producing [`DomainScores`] from a reduced document vector.
#[derive(Debug, Clone, PartialEq)]
pub enum Scorer {
    Cosine { megadocs: Vec<DocVector> },
    Mlp(MlpModel),
    Rbf(RbfModel),
}

impl Scorer {
    pub fn kind(&self) -> ModelKind {
        match self {
            Scorer::Cosine { .. } => ModelKind::Cosine,
            Scorer::Mlp(_) => ModelKind::Mlp,
            Scorer::Rbf(_) => ModelKind::Rbf,
        }
    }

    pub fn score(&self, doc: &DocVector) -> Result<DomainScores> {
        match self {
            Scorer::Cosine { megadocs } => cosine_baseline_scores(doc, megadocs),
            Scorer::Mlp(m) => DomainScores::from_slice(&mlp_forward(m, doc, Mode::Infer)?),
            Scorer::Rbf(m) => DomainScores::from_slice(&rbf_forward(m, doc)?),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainThreshold {
    pub mean: f64,
    pub std: f64,
    pub threshold: f64,
}

/// Per-domain cutoffs `mean_d + alpha * sigma_d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSet {
    pub alpha: f64,
    pub domains: [DomainThreshold; NUM_DOMAINS],
}

impl ThresholdSet {
    pub fn threshold(&self, domain: Domain) -> Option<f64> {
        (!domain.is_other()).then(|| self.domains[domain.index()].threshold)
    }

    /// Rebuilds from stored means and deviations, recomputing thresholds.
    pub fn from_stats(alpha: f64, stats: &[(f64, f64)]) -> Result<Self> {
        if stats.len() != NUM_DOMAINS {
            return Err(Error::DimensionMismatch {
                expected: NUM_DOMAINS,
                actual: stats.len(),
            });
        }
        if !alpha.is_finite() {
            return Err(Error::config(format!("alpha must be finite, got {alpha}")));
        }
        let mut domains = [DomainThreshold {
            mean: 0.0,
            std: 0.0,
            threshold: 0.0,
        }; NUM_DOMAINS];
        for (d, &(mean, std)) in domains.iter_mut().zip(stats) {
            if !mean.is_finite() || !(std >= 0.0 && std.is_finite()) {
                return Err(Error::numerical(format!(
                    "invalid threshold statistics mean={mean} std={std}"
                )));
            }
            *d = DomainThreshold {
                mean,
                std,
                threshold: mean + alpha * std,
            };
        }
        Ok(ThresholdSet { alpha, domains })
    }

    /// Same statistics under a different alpha.
    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        let stats: Vec<(f64, f64)> = self.domains.iter().map(|d| (d.mean, d.std)).collect();
        Self::from_stats(alpha, &stats)
    }
}

/// Mean and population standard deviation of each domain's scores, then
/// `threshold_d = mean_d + alpha * sigma_d`.
pub fn calibrate(scores_per_domain: &[Vec<f64>], alpha: f64) -> Result<ThresholdSet> {
    if scores_per_domain.len() != NUM_DOMAINS {
        return Err(Error::DimensionMismatch {
            expected: NUM_DOMAINS,
            actual: scores_per_domain.len(),
        });
    }
    let mut stats = Vec::with_capacity(NUM_DOMAINS);
    for (i, scores) in scores_per_domain.iter().enumerate() {
        if scores.is_empty() {
            let d = Domain::from_index(i).expect("domain index");
            return Err(Error::data(format!("no calibration scores for domain {}", d.name())));
        }
        let n = scores.len() as f64;
        let mean = scores.iter().sum::<f64>() / n;
        let var = scores.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / n;
        stats.push((mean, var.sqrt()));
    }
    ThresholdSet::from_stats(alpha, &stats)
}

/// Calibrates from whole score vectors, one per calibration paragraph.
pub fn calibrate_scores(scores: &[DomainScores], alpha: f64) -> Result<ThresholdSet> {
    let per_domain: Vec<Vec<f64>> = (0..NUM_DOMAINS)
        .map(|d| scores.iter().map(|s| s.0[d]).collect())
        .collect();
    calibrate(&per_domain, alpha)
}

/// Domains with `score >= threshold`, by descending margin (ties by domain
/// order); `[Other]` when none qualify.
pub fn assign(scores: &DomainScores, thresholds: &ThresholdSet) -> Vec<Domain> {
    let mut hits: Vec<(usize, f64)> = (0..NUM_DOMAINS)
        .filter(|&d| scores.0[d] >= thresholds.domains[d].threshold)
        .map(|d| (d, scores.0[d] - thresholds.domains[d].threshold))
        .collect();
    if hits.is_empty() {
        return vec![Domain::Other];
    }
    hits.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    hits.into_iter()
        .map(|(d, _)| Domain::from_index(d).expect("domain index"))
        .collect()
}
