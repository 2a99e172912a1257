//! On-disk model bundle.
//!
//! A bundle is a directory holding `manifest.json`, `vocab.txt` (one
//! `term<TAB>df` line per vocabulary entry, in column order), `lexicon.json`
//! and one file of raw little-endian `f64` values per array, stored
//! row-major with the shape recorded in the manifest.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::classification::{FitReport, ModelKind, Pipeline, PipelineParams, Scorer, ThresholdSet};
use crate::corpus::io::{read_lexicon, write_lexicon};
use crate::corpus::{Domain, NUM_DOMAINS};
use crate::error::{Error, Result};
use crate::networks::{Dense, MlpModel, RbfModel};
use crate::vector_space::{DocVector, SvdProjection, TfidfModel};

pub const FORMAT_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";
const VOCAB_FILE: &str = "vocab.txt";
const LEXICON_FILE: &str = "lexicon.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArrayShape {
    pub rows: usize,
    pub cols: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub format_version: u32,
    pub kind: ModelKind,
    /// Output order of every score vector.
    pub domains: Vec<Domain>,
    pub params: PipelineParams,
    pub use_mwe: bool,
    pub n_docs: usize,
    pub vocabulary_size: usize,
    pub svd_k: usize,
    /// RBF Gaussian width, or MLP dropout rates, when applicable.
    pub rbf_width: Option<f64>,
    pub dropout: Vec<f64>,
    pub thresholds: Option<ThresholdSet>,
    pub fit: Option<FitReport>,
    /// Array name to shape; the file is `<name>.f64`.
    pub arrays: BTreeMap<String, ArrayShape>,
}

fn array_file(name: &str) -> String {
    format!("{name}.f64")
}

fn to_bytes(m: &DMatrix<f64>) -> Vec<u8> {
    let mut out = Vec::with_capacity(m.len() * 8);
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            out.extend_from_slice(&m[(r, c)].to_le_bytes());
        }
    }
    out
}

fn row(v: &[f64]) -> DMatrix<f64> {
    DMatrix::from_row_slice(1, v.len(), v)
}

fn dense_arrays(prefix: &str, layer: &Dense, out: &mut Vec<(String, DMatrix<f64>)>) {
    out.push((format!("{prefix}_weights"), layer.weights.clone()));
    out.push((format!("{prefix}_bias"), row(layer.bias.as_slice())));
}

type NamedArrays = Vec<(String, DMatrix<f64>)>;

/// Serializable view of a fitted pipeline.
fn collect(pipeline: &Pipeline, params: &PipelineParams, fit: Option<&FitReport>) -> Result<(Manifest, NamedArrays)> {
    let missing = |s: &str| Error::config(format!("cannot save: pipeline stage `{s}` is not fitted"));
    pipeline.lexicon().ok_or_else(|| missing("lexicon"))?;
    let tfidf = pipeline.tfidf().ok_or_else(|| missing("tfidf"))?;
    let svd = pipeline.svd().ok_or_else(|| missing("svd"))?;
    let scorer = pipeline.scorer().ok_or_else(|| missing("scorer"))?;

    let mut arrays = vec![
        ("idf".to_string(), row(&tfidf.idf)),
        ("svd_components".to_string(), svd.components.clone()),
        ("svd_singular_values".to_string(), row(&svd.singular_values)),
    ];
    let mut rbf_width = None;
    let mut dropout = Vec::new();
    match scorer {
        Scorer::Cosine { megadocs } => {
            let k = svd.k();
            let m = DMatrix::from_fn(megadocs.len(), k, |r, c| megadocs[r].0[c]);
            arrays.push(("megadocs".to_string(), m));
        }
        Scorer::Mlp(m) => {
            for (i, layer) in m.layers.iter().enumerate() {
                dense_arrays(&format!("mlp_layer{i}"), layer, &mut arrays);
            }
            dropout = m.dropout.to_vec();
        }
        Scorer::Rbf(m) => {
            arrays.push(("rbf_prototypes".to_string(), m.prototypes.transpose()));
            dense_arrays("rbf_output", &m.output, &mut arrays);
            rbf_width = Some(m.width);
            dropout = vec![m.input_dropout];
        }
    }
    let manifest = Manifest {
        format_version: FORMAT_VERSION,
        kind: scorer.kind(),
        domains: Domain::RISK_FACTORS.to_vec(),
        params: params.clone(),
        use_mwe: pipeline.use_mwe(),
        n_docs: tfidf.n_docs,
        vocabulary_size: tfidf.dim(),
        svd_k: svd.k(),
        rbf_width,
        dropout,
        thresholds: pipeline.thresholds().cloned(),
        fit: fit.cloned(),
        arrays: arrays
            .iter()
            .map(|(n, m)| {
                (
                    n.clone(),
                    ArrayShape {
                        rows: m.nrows(),
                        cols: m.ncols(),
                    },
                )
            })
            .collect(),
    };
    Ok((manifest, arrays))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(bytes).map_err(|e| Error::io(path, e))
}

fn partial_path(dir: &Path) -> PathBuf {
    let mut name = dir
        .file_name()
        .map(|n| n.to_os_string())
        .unwrap_or_else(|| "bundle".into());
    name.push(".partial");
    dir.with_file_name(name)
}

/// Writes a bundle to `dir`. Files are written to a sibling `.partial`
/// directory which replaces `dir` only once complete; an existing `dir` must
/// itself be a bundle.
pub fn save_bundle(dir: &Path, pipeline: &Pipeline, params: &PipelineParams, fit: Option<&FitReport>) -> Result<()> {
    let (manifest, arrays) = collect(pipeline, params, fit)?;
    if dir.exists() && !dir.join(MANIFEST_FILE).is_file() {
        return Err(Error::config(format!(
            "{} exists and is not a model bundle; refusing to overwrite",
            dir.display()
        )));
    }
    let tmp = partial_path(dir);
    if tmp.exists() {
        fs::remove_dir_all(&tmp).map_err(|e| Error::io(&tmp, e))?;
    }
    let written = (|| -> Result<()> {
        fs::create_dir_all(&tmp).map_err(|e| Error::io(&tmp, e))?;
        for (name, m) in &arrays {
            write_file(&tmp.join(array_file(name)), &to_bytes(m))?;
        }
        let tfidf = pipeline.tfidf().expect("checked");
        let mut vocab = String::new();
        for (t, df) in tfidf.vocabulary.terms().iter().zip(tfidf.vocabulary.df()) {
            vocab.push_str(t);
            vocab.push('\t');
            vocab.push_str(&df.to_string());
            vocab.push('\n');
        }
        write_file(&tmp.join(VOCAB_FILE), vocab.as_bytes())?;
        write_lexicon(&tmp.join(LEXICON_FILE), pipeline.lexicon().expect("checked"))?;
        let json = serde_json::to_string_pretty(&manifest).map_err(|e| Error::data(e.to_string()))?;
        write_file(&tmp.join(MANIFEST_FILE), format!("{json}\n").as_bytes())
    })();
    if let Err(e) = written {
        let _ = fs::remove_dir_all(&tmp);
        return Err(e);
    }
    if dir.exists() {
        fs::remove_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::rename(&tmp, dir).map_err(|e| Error::io(dir, e))
}

struct Reader<'a> {
    dir: &'a Path,
    manifest: &'a Manifest,
}

impl Reader<'_> {
    fn array(&self, name: &str) -> Result<DMatrix<f64>> {
        let shape = self
            .manifest
            .arrays
            .get(name)
            .ok_or_else(|| Error::data(format!("bundle manifest lists no array `{name}`")))?;
        let path = self.dir.join(array_file(name));
        let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
        let expected = shape.rows * shape.cols * 8;
        if bytes.len() != expected {
            return Err(Error::data(format!(
                "{}: {} bytes, manifest shape {}x{} needs {expected}",
                path.display(),
                bytes.len(),
                shape.rows,
                shape.cols
            )));
        }
        let values: Vec<f64> = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        Ok(DMatrix::from_row_slice(shape.rows, shape.cols, &values))
    }

    fn shaped(&self, name: &str, rows: usize, cols: usize) -> Result<DMatrix<f64>> {
        let m = self.array(name)?;
        if (m.nrows(), m.ncols()) != (rows, cols) {
            return Err(Error::data(format!(
                "array `{name}` is {}x{}, expected {rows}x{cols}",
                m.nrows(),
                m.ncols()
            )));
        }
        Ok(m)
    }

    fn dense(&self, prefix: &str) -> Result<Dense> {
        let weights = self.array(&format!("{prefix}_weights"))?;
        let bias = self.shaped(&format!("{prefix}_bias"), 1, weights.nrows())?;
        Ok(Dense {
            weights,
            bias: DVector::from_iterator(bias.ncols(), bias.iter().copied()),
        })
    }
}

fn read_vocab(path: &Path) -> Result<(Vec<String>, Vec<u32>)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut terms = Vec::new();
    let mut df = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message,
        };
        let (t, d) = line
            .split_once('\t')
            .ok_or_else(|| parse_err("expected `term<TAB>df`".into()))?;
        terms.push(t.to_string());
        df.push(d.parse().map_err(|e| parse_err(format!("bad df: {e}")))?);
    }
    Ok((terms, df))
}

pub fn read_manifest(dir: &Path) -> Result<Manifest> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    // Check the version before the full schema so old bundles get a clear message.
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.clone(),
        line: e.line(),
        message: e.to_string(),
    })?;
    match value.get("format_version").and_then(|v| v.as_u64()) {
        Some(v) if v == u64::from(FORMAT_VERSION) => {}
        Some(v) => {
            return Err(Error::data(format!(
                "{}: bundle format version {v}, this build reads version {FORMAT_VERSION}",
                path.display()
            )))
        }
        None => return Err(Error::data(format!("{}: missing format_version", path.display()))),
    }
    serde_json::from_value(value).map_err(|e| Error::Parse {
        path,
        line: 0,
        message: e.to_string(),
    })
}

/// Loads a bundle written by [`save_bundle`], validating every shape.
pub fn load_bundle(dir: &Path) -> Result<(Pipeline, Manifest)> {
    let manifest = read_manifest(dir)?;
    if manifest.domains != Domain::RISK_FACTORS {
        return Err(Error::data("bundle domain order differs from this build"));
    }
    let r = Reader {
        dir,
        manifest: &manifest,
    };
    let (terms, df) = read_vocab(&dir.join(VOCAB_FILE))?;
    if terms.len() != manifest.vocabulary_size {
        return Err(Error::data(format!(
            "vocab.txt has {} terms, manifest says {}",
            terms.len(),
            manifest.vocabulary_size
        )));
    }
    let v = terms.len();
    let tfidf = TfidfModel::from_parts(terms, df, manifest.n_docs)?;
    let idf = r.shaped("idf", 1, v)?;
    if idf.iter().zip(&tfidf.idf).any(|(a, b)| a.to_bits() != b.to_bits()) {
        return Err(Error::data(
            "stored idf does not match the vocabulary document frequencies",
        ));
    }
    let k = manifest.svd_k;
    let svd = SvdProjection {
        components: r.shaped("svd_components", k, v)?,
        singular_values: r.shaped("svd_singular_values", 1, k)?.iter().copied().collect(),
    };
    let scorer = match manifest.kind {
        ModelKind::Cosine => {
            let m = r.shaped("megadocs", NUM_DOMAINS, k)?;
            Scorer::Cosine {
                megadocs: m
                    .row_iter()
                    .map(|row| DocVector(row.iter().copied().collect()))
                    .collect(),
            }
        }
        ModelKind::Mlp => {
            let layers = [r.dense("mlp_layer0")?, r.dense("mlp_layer1")?, r.dense("mlp_layer2")?];
            let dropout: [f64; 2] = manifest
                .dropout
                .as_slice()
                .try_into()
                .map_err(|_| Error::data("MLP bundle needs two dropout rates"))?;
            let m = MlpModel::from_layers(layers, dropout)?;
            if m.input_dim() != k || m.output_dim() != NUM_DOMAINS {
                return Err(Error::data(format!(
                    "MLP maps {} -> {}, expected {k} -> {NUM_DOMAINS}",
                    m.input_dim(),
                    m.output_dim()
                )));
            }
            Scorer::Mlp(m)
        }
        ModelKind::Rbf => {
            let prototypes = r.array("rbf_prototypes")?.transpose();
            if prototypes.nrows() != k {
                return Err(Error::data(format!(
                    "RBF prototypes have dimension {}, expected {k}",
                    prototypes.nrows()
                )));
            }
            let output = r.dense("rbf_output")?;
            if output.n_in() != prototypes.ncols() || output.n_out() != NUM_DOMAINS {
                return Err(Error::data("RBF output layer shape does not match the prototypes"));
            }
            let width = manifest
                .rbf_width
                .ok_or_else(|| Error::data("RBF bundle has no width"))?;
            let dropout = *manifest
                .dropout
                .first()
                .ok_or_else(|| Error::data("RBF bundle has no dropout rate"))?;
            Scorer::Rbf(RbfModel::new(prototypes, width, output, dropout)?)
        }
    };

    let mut pipeline = Pipeline::new();
    pipeline.set_lexicon(read_lexicon(&dir.join(LEXICON_FILE))?, manifest.use_mwe);
    pipeline.set_tfidf(tfidf);
    pipeline.set_svd(svd);
    pipeline.set_scorer(scorer);
    if let Some(t) = &manifest.thresholds {
        pipeline.set_thresholds(t.clone());
    }
    Ok((pipeline, manifest))
}
