//! Risk-factor domain topic extraction for psychiatric clinical paragraphs.
//!
//! The pipeline weakly labels a training corpus with a clinician lexicon,
//! fuses multiword expressions into single terms, builds a TF-IDF space over
//! stemmed uni/bi/trigrams reduced by truncated SVD, and scores paragraphs
//! against seven risk-factor domains with a cosine baseline, a multilayer
//! perceptron or an RBF network. Per-domain thresholds calibrated as
//! `mean + alpha * std` give open-world multilabel assignment, with `Other`
//! for paragraphs that meet no threshold.

pub mod bundle;
pub mod classification;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod evaluation;
pub mod networks;
pub mod text;
pub mod vector_space;

pub use error::{Error, Result};
