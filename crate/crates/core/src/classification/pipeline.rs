use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{assign, calibrate_scores, DomainScores, ModelKind, Scorer, ThresholdSet};
use crate::corpus::{build_megadocuments, weak_label, Domain, KeywordLexicon, Paragraph, NUM_DOMAINS};
use crate::error::{Error, Result, StageExt};
use crate::networks::{
    build_rbf_prototypes, compute_rbf_width, train_mlp, train_rbf, Dataset, LossKind, TrainConfig, TrainReport,
    RBF_PER_DOMAIN,
};
use crate::text::{paragraph_terms, MweMatcher, TermBag};
use crate::vector_space::{fit_svd, fit_tfidf, DocVector, SparseMatrix, SvdProjection, TfidfModel};

pub const RBF_WIDTH_SCALE: f64 = 10.0;

/// Training settings that replace single fields of the model kind's
/// default [`TrainConfig`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainOverrides {
    pub epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub loss: Option<LossKind>,
    pub learning_rate: Option<f64>,
    pub beta1: Option<f64>,
    pub beta2: Option<f64>,
    pub epsilon: Option<f64>,
}

impl TrainOverrides {
    pub fn apply(&self, mut base: TrainConfig) -> TrainConfig {
        base.epochs = self.epochs.unwrap_or(base.epochs);
        base.batch_size = self.batch_size.unwrap_or(base.batch_size);
        base.loss = self.loss.unwrap_or(base.loss);
        let adam = &mut base.adam;
        adam.learning_rate = self.learning_rate.unwrap_or(adam.learning_rate);
        adam.beta1 = self.beta1.unwrap_or(adam.beta1);
        adam.beta2 = self.beta2.unwrap_or(adam.beta2);
        adam.epsilon = self.epsilon.unwrap_or(adam.epsilon);
        base
    }
}

/// Everything needed to fit a pipeline besides the data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineParams {
    pub kind: ModelKind,
    pub svd_k: usize,
    /// Threshold constant; `None` uses the model kind's default.
    pub alpha: Option<f64>,
    /// Fuse multiword expressions and use keyphrases for weak labeling.
    pub use_mwe: bool,
    /// Changes to the model kind's default training settings.
    pub train: TrainOverrides,
    pub rbf_per_domain: usize,
    /// Allow domains with fewer than `rbf_per_domain` training vectors.
    pub clamp_prototypes: bool,
    /// Multiplier on [`compute_rbf_width`]. At scale 1 the Gaussians are far
    /// narrower than typical paragraph-to-prototype distances in 100
    /// dimensions and nearly every hidden unit is silent.
    pub rbf_width_scale: f64,
    /// Share of input paragraphs held out from fitting and used only to
    /// calibrate thresholds. Zero calibrates on the training paragraphs.
    pub calibration_fraction: f64,
    pub seed: u64,
}

impl Default for PipelineParams {
    fn default() -> Self {
        PipelineParams {
            kind: ModelKind::Mlp,
            svd_k: 100,
            alpha: None,
            use_mwe: true,
            train: TrainOverrides::default(),
            rbf_per_domain: RBF_PER_DOMAIN,
            clamp_prototypes: false,
            rbf_width_scale: RBF_WIDTH_SCALE,
            calibration_fraction: 0.2,
            seed: 0,
        }
    }
}

impl PipelineParams {
    pub fn for_kind(kind: ModelKind) -> Self {
        PipelineParams {
            kind,
            ..Default::default()
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(self.kind.default_alpha())
    }

    pub fn train_config(&self) -> TrainConfig {
        self.train.apply(match self.kind {
            ModelKind::Rbf => TrainConfig::rbf_default(),
            _ => TrainConfig::mlp_default(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.svd_k == 0 {
            return Err(Error::config("svd_k must be at least 1"));
        }
        if !self.alpha().is_finite() {
            return Err(Error::config("alpha must be finite"));
        }
        if !(0.0..1.0).contains(&self.calibration_fraction) {
            return Err(Error::config("calibration_fraction must be in [0, 1)"));
        }
        if !(self.rbf_width_scale.is_finite() && self.rbf_width_scale > 0.0) {
            return Err(Error::config("rbf_width_scale must be positive"));
        }
        if self.rbf_per_domain == 0 {
            return Err(Error::config("rbf_per_domain must be at least 1"));
        }
        if self.kind != ModelKind::Cosine {
            self.train_config().validate()?;
        }
        Ok(())
    }
}

/// Labels and raw scores for one paragraph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub labels: Vec<Domain>,
    pub scores: DomainScores,
}

/// Summary of a [`fit_pipeline`] run.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FitReport {
    pub n_input: usize,
    pub n_training: usize,
    pub n_calibration: usize,
    pub per_domain: [usize; NUM_DOMAINS],
    pub vocabulary_size: usize,
    pub svd_k: usize,
    pub epoch_losses: Vec<f64>,
}

/// The composed classifier: lexicon, TF-IDF, SVD, scorer and thresholds.
/// Stages may be missing while a pipeline is assembled; classification
/// reports the first missing one.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Pipeline {
    lexicon: Option<KeywordLexicon>,
    matcher: Option<MweMatcher>,
    use_mwe: bool,
    tfidf: Option<TfidfModel>,
    svd: Option<SvdProjection>,
    scorer: Option<Scorer>,
    thresholds: Option<ThresholdSet>,
}

fn missing(stage: &'static str) -> Error {
    Error::config(format!("pipeline stage `{stage}` is not fitted"))
}

impl Pipeline {
    pub fn new() -> Self {
        Self::default()
    }

    /// Sets the lexicon used for weak labeling and, when `use_mwe`, for
    /// multiword-expression fusion.
    pub fn set_lexicon(&mut self, lexicon: KeywordLexicon, use_mwe: bool) {
        self.matcher = use_mwe.then(|| lexicon.matcher());
        self.use_mwe = use_mwe;
        self.lexicon = Some(lexicon);
    }

    pub fn set_tfidf(&mut self, tfidf: TfidfModel) {
        self.tfidf = Some(tfidf);
    }

    pub fn set_svd(&mut self, svd: SvdProjection) {
        self.svd = Some(svd);
    }

    pub fn set_scorer(&mut self, scorer: Scorer) {
        self.scorer = Some(scorer);
    }

    pub fn set_thresholds(&mut self, thresholds: ThresholdSet) {
        self.thresholds = Some(thresholds);
    }

    pub fn lexicon(&self) -> Option<&KeywordLexicon> {
        self.lexicon.as_ref()
    }

    pub fn use_mwe(&self) -> bool {
        self.use_mwe
    }

    pub fn tfidf(&self) -> Option<&TfidfModel> {
        self.tfidf.as_ref()
    }

    pub fn svd(&self) -> Option<&SvdProjection> {
        self.svd.as_ref()
    }

    pub fn scorer(&self) -> Option<&Scorer> {
        self.scorer.as_ref()
    }

    pub fn thresholds(&self) -> Option<&ThresholdSet> {
        self.thresholds.as_ref()
    }

    pub fn terms(&self, text: &str) -> Result<TermBag> {
        if self.lexicon.is_none() {
            return Err(missing("lexicon"));
        }
        Ok(paragraph_terms(text, self.matcher.as_ref()))
    }

    /// Reduced vector of a text, or `None` when no term is in the vocabulary
    /// or the projection is zero.
    pub fn embed(&self, text: &str) -> Result<Option<DocVector>> {
        let terms = self.terms(text)?;
        let tfidf = self.tfidf.as_ref().ok_or_else(|| missing("tfidf"))?;
        let svd = self.svd.as_ref().ok_or_else(|| missing("svd"))?;
        let v = tfidf.vectorize(&terms);
        if v.all_unknown {
            return Ok(None);
        }
        let doc = svd.project(&v.vector)?;
        Ok((!doc.is_zero()).then_some(doc))
    }

    /// Scores of a text; all zero for a text with no known term.
    pub fn score(&self, text: &str) -> Result<Option<DomainScores>> {
        let doc = self.embed(text)?;
        let scorer = self.scorer.as_ref().ok_or_else(|| missing("scorer"))?;
        doc.map(|d| scorer.score(&d)).transpose()
    }

    /// tokenize, fuse, extract terms, TF-IDF, project, score, assign.
    pub fn classify(&self, text: &str) -> Result<Classification> {
        let scores = self.score(text)?;
        let thresholds = self.thresholds.as_ref().ok_or_else(|| missing("thresholds"))?;
        Ok(match scores {
            Some(scores) => Classification {
                labels: assign(&scores, thresholds),
                scores,
            },
            None => Classification {
                labels: vec![Domain::Other],
                scores: DomainScores::default(),
            },
        })
    }
}

/// Fits every stage: weak labeling, megadocuments, TF-IDF, SVD, the chosen
/// scorer and threshold calibration on the weakly-labeled paragraphs.
pub fn fit_pipeline(
    paragraphs: &[Paragraph],
    lexicon: &KeywordLexicon,
    params: &PipelineParams,
) -> Result<(Pipeline, FitReport)> {
    params.validate()?;
    lexicon.check_complete().stage("lexicon")?;
    let lexicon = if params.use_mwe {
        lexicon.clone()
    } else {
        lexicon.keywords_only()
    };
    let mut pipeline = Pipeline::new();
    pipeline.set_lexicon(lexicon, params.use_mwe);
    let lexicon = pipeline.lexicon().expect("lexicon set");

    let (fit_part, calibration_part) = split_calibration(paragraphs, params.calibration_fraction, params.seed);
    let corpus = weak_label(&fit_part, lexicon).stage("weak_label")?;
    let mut report = FitReport {
        n_input: paragraphs.len(),
        n_training: corpus.len(),
        ..Default::default()
    };
    for d in Domain::RISK_FACTORS {
        report.per_domain[d.index()] = corpus.count(d);
    }
    log::info!(
        "weak labeling kept {} of {} paragraphs {:?}",
        corpus.len(),
        paragraphs.len(),
        report.per_domain
    );
    let megadocs = build_megadocuments(&corpus, pipeline.matcher.as_ref()).stage("megadocuments")?;

    let bags: Vec<TermBag> = corpus
        .entries
        .iter()
        .map(|(p, _)| pipeline.terms(&p.text))
        .collect::<Result<_>>()?;
    let tfidf = fit_tfidf(&bags).stage("tfidf")?;
    report.vocabulary_size = tfidf.dim();
    let rows = bags.iter().map(|b| tfidf.vectorize(b).vector).collect();
    let matrix = SparseMatrix::new(tfidf.dim(), rows).stage("tfidf")?;
    let svd = fit_svd(&matrix, params.svd_k, params.seed).stage("svd")?;
    report.svd_k = svd.k();
    let vectors: Vec<DocVector> = matrix
        .rows
        .iter()
        .map(|r| svd.project(r))
        .collect::<Result<_>>()
        .stage("svd")?;
    let labels: Vec<Domain> = corpus.entries.iter().map(|(_, d)| *d).collect();

    let config = params.train_config();
    let scorer = match params.kind {
        ModelKind::Cosine => {
            let megadocs = megadocs
                .iter()
                .map(|m| {
                    let v = tfidf.vectorize(&m.terms);
                    let doc = svd.project(&v.vector)?;
                    if doc.is_zero() {
                        return Err(Error::numerical(format!(
                            "megadocument of {} projects to zero",
                            m.domain.name()
                        )));
                    }
                    Ok(doc)
                })
                .collect::<Result<Vec<_>>>()
                .stage("cosine")?;
            Scorer::Cosine { megadocs }
        }
        ModelKind::Mlp => {
            let data = Dataset::from_labeled(&vectors, &labels).stage("mlp")?;
            let (model, TrainReport { epoch_losses, .. }) = train_mlp(&data, &config, params.seed).stage("mlp")?;
            report.epoch_losses = epoch_losses;
            Scorer::Mlp(model)
        }
        ModelKind::Rbf => {
            let mut groups: Vec<Vec<DocVector>> = vec![Vec::new(); NUM_DOMAINS];
            for (v, d) in vectors.iter().zip(&labels) {
                groups[d.index()].push(v.clone());
            }
            let prototypes = build_rbf_prototypes(&groups, params.rbf_per_domain, params.seed, params.clamp_prototypes)
                .stage("rbf_prototypes")?;
            let width = compute_rbf_width(&prototypes).stage("rbf_prototypes")? * params.rbf_width_scale;
            log::info!("rbf: {} prototypes, width {width:.6}", prototypes.ncols());
            let data = Dataset::from_labeled(&vectors, &labels).stage("rbf")?;
            let (model, TrainReport { epoch_losses, .. }) =
                train_rbf(prototypes, width, &data, &config, params.seed).stage("rbf")?;
            report.epoch_losses = epoch_losses;
            Scorer::Rbf(model)
        }
    };

    pipeline.set_svd(svd);
    pipeline.set_tfidf(tfidf);
    pipeline.set_scorer(scorer);
    let scores: Vec<DomainScores> = if calibration_part.is_empty() {
        let scorer = pipeline.scorer().expect("scorer set");
        vectors
            .iter()
            .filter(|v| !v.is_zero())
            .map(|v| scorer.score(v))
            .collect::<Result<_>>()
    } else {
        calibration_part
            .iter()
            .filter_map(|p| pipeline.score(&p.text).transpose())
            .collect::<Result<_>>()
    }
    .stage("calibrate")?;
    report.n_calibration = scores.len();
    if scores.is_empty() {
        return Err(Error::data("no calibration paragraph has a known term").in_stage("calibrate"));
    }
    let thresholds = calibrate_scores(&scores, params.alpha()).stage("calibrate")?;
    pipeline.set_thresholds(thresholds);
    Ok((pipeline, report))
}

/// Seeded split into (fit, calibration) parts, each in input order.
fn split_calibration(paragraphs: &[Paragraph], fraction: f64, seed: u64) -> (Vec<Paragraph>, Vec<Paragraph>) {
    let n_cal = (fraction * paragraphs.len() as f64).round() as usize;
    if n_cal == 0 {
        return (paragraphs.to_vec(), Vec::new());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(20);
    let mut idx: Vec<usize> = (0..paragraphs.len()).collect();
    idx.shuffle(&mut rng);
    let mut held = vec![false; paragraphs.len()];
    for &i in &idx[..n_cal] {
        held[i] = true;
    }
    let (cal, fit): (Vec<_>, Vec<_>) = paragraphs.iter().cloned().zip(held).partition(|(_, h)| *h);
    (
        fit.into_iter().map(|(p, _)| p).collect(),
        cal.into_iter().map(|(p, _)| p).collect(),
    )
}
