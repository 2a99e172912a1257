use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::text::TermBag;

/// Dense term indices with document frequencies. Terms are indexed in
/// lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    terms: Vec<String>,
    df: Vec<u32>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    pub fn from_terms(terms: Vec<String>, df: Vec<u32>) -> Result<Self> {
        if terms.len() != df.len() {
            return Err(Error::DimensionMismatch {
                expected: terms.len(),
                actual: df.len(),
            });
        }
        let mut index = HashMap::with_capacity(terms.len());
        for (i, t) in terms.iter().enumerate() {
            if index.insert(t.clone(), i).is_some() {
                return Err(Error::data(format!("duplicate vocabulary term `{t}`")));
            }
        }
        if df.contains(&0) {
            return Err(Error::data("document frequency must be at least 1"));
        }
        Ok(Vocabulary { terms, df, index })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn get(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn df(&self) -> &[u32] {
        &self.df
    }
}

/// Sparse vector with strictly increasing indices.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseVector {
    pub dim: usize,
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl SparseVector {
    pub fn zeros(dim: usize) -> Self {
        SparseVector {
            dim,
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Builds from `(index, value)` pairs; indices must be sorted and unique.
    pub fn from_pairs(dim: usize, pairs: impl IntoIterator<Item = (usize, f64)>) -> Self {
        let (indices, values) = pairs.into_iter().unzip();
        SparseVector { dim, indices, values }
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (i, v) in self.iter() {
            out[i] = v;
        }
        out
    }
}

/// Result of vectorizing one document.
#[derive(Debug, Clone, PartialEq)]
pub struct Vectorized {
    pub vector: SparseVector,
    /// Set when no term of the document is in the vocabulary.
    pub all_unknown: bool,
}

/// Smoothed TF-IDF: `idf(t) = ln((1 + N) / (1 + df(t))) + 1`, raw counts as
/// term frequency, L2-normalized documents.
#[derive(Debug, Clone, PartialEq)]
pub struct TfidfModel {
    pub vocabulary: Vocabulary,
    pub idf: Vec<f64>,
    pub n_docs: usize,
}

pub fn smoothed_idf(n_docs: usize, df: u32) -> f64 {
    ((1.0 + n_docs as f64) / (1.0 + df as f64)).ln() + 1.0
}

impl TfidfModel {
    pub fn fit(docs: &[TermBag]) -> Result<Self> {
        if docs.is_empty() {
            return Err(Error::data("cannot fit TF-IDF on zero documents"));
        }
        let mut df: BTreeMap<&str, u32> = BTreeMap::new();
        for doc in docs {
            for (term, &count) in doc {
                if count > 0 {
                    *df.entry(term.as_str()).or_insert(0) += 1;
                }
            }
        }
        if df.is_empty() {
            return Err(Error::data("cannot fit TF-IDF: no document contains a term"));
        }
        let (terms, dfs): (Vec<String>, Vec<u32>) = df.into_iter().map(|(t, d)| (t.to_string(), d)).unzip();
        Self::from_parts(terms, dfs, docs.len())
    }

    /// Rebuilds a model from stored vocabulary, document frequencies and N.
    pub fn from_parts(terms: Vec<String>, df: Vec<u32>, n_docs: usize) -> Result<Self> {
        let idf = df.iter().map(|&d| smoothed_idf(n_docs, d)).collect();
        Ok(TfidfModel {
            vocabulary: Vocabulary::from_terms(terms, df)?,
            idf,
            n_docs,
        })
    }

    pub fn dim(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn vectorize(&self, terms: &TermBag) -> Vectorized {
        let mut pairs: Vec<(usize, f64)> = terms
            .iter()
            .filter(|(_, &c)| c > 0)
            .filter_map(|(t, &c)| self.vocabulary.get(t).map(|i| (i, c as f64 * self.idf[i])))
            .collect();
        pairs.sort_unstable_by_key(|(i, _)| *i);
        let norm = pairs.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Vectorized {
                vector: SparseVector::zeros(self.dim()),
                all_unknown: true,
            };
        }
        for (_, w) in &mut pairs {
            *w /= norm;
        }
        Vectorized {
            vector: SparseVector::from_pairs(self.dim(), pairs),
            all_unknown: false,
        }
    }
}

pub fn fit_tfidf(docs: &[TermBag]) -> Result<TfidfModel> {
    TfidfModel::fit(docs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bag(items: &[(&str, u32)]) -> TermBag {
        items.iter().map(|(t, c)| (t.to_string(), *c)).collect()
    }

    #[test]
    fn idf_two_document_example() {
        let model = fit_tfidf(&[
            bag(&[("patient", 1), ("anxious", 1)]),
            bag(&[("patient", 1), ("calm", 1)]),
        ])
        .unwrap();
        let idf = |t: &str| model.idf[model.vocabulary.get(t).unwrap()];
        assert!((idf("patient") - 1.0).abs() < 1e-15);
        assert!((idf("anxious") - 1.405465).abs() < 1e-6);
        assert!((idf("anxious") - (1.5f64.ln() + 1.0)).abs() < 1e-15);
        assert_eq!(model.vocabulary.terms(), &["anxious", "calm", "patient"]);
    }

    #[test]
    fn single_document_idf_is_one() {
        let model = fit_tfidf(&[bag(&[("a", 3), ("b", 1)])]).unwrap();
        assert!(model.idf.iter().all(|&w| (w - 1.0).abs() < 1e-15));
    }

    #[test]
    fn empty_corpus_errors() {
        assert!(fit_tfidf(&[]).is_err());
        assert!(fit_tfidf(&[TermBag::new()]).is_err());
    }

    #[test]
    fn vectorize_example() {
        let model = fit_tfidf(&[
            bag(&[("patient", 1), ("anxious", 1)]),
            bag(&[("patient", 1), ("calm", 1)]),
        ])
        .unwrap();
        let v = model.vectorize(&bag(&[("patient", 2), ("anxious", 1)]));
        assert!(!v.all_unknown);
        let w_anx = 1.5f64.ln() + 1.0;
        let norm = (4.0 + w_anx * w_anx).sqrt();
        let dense = v.vector.to_dense();
        assert!((dense[2] - 2.0 / norm).abs() < 1e-12);
        assert!((dense[0] - w_anx / norm).abs() < 1e-12);
        assert!((dense[2] - 0.818180).abs() < 1e-6);
        assert!((dense[0] - 0.574962).abs() < 1e-6);
    }

    #[test]
    fn unknown_terms_give_flagged_zero_vector() {
        let model = fit_tfidf(&[bag(&[("a", 1)])]).unwrap();
        let v = model.vectorize(&bag(&[("zzz", 4)]));
        assert!(v.all_unknown);
        assert_eq!(v.vector.nnz(), 0);
        assert_eq!(v.vector.dim, 1);
    }

    proptest! {
        #[test]
        fn known_documents_have_unit_norm(
            docs in proptest::collection::vec(proptest::collection::btree_map("[a-e]{1,2}", 1u32..4, 1..6), 1..6),
        ) {
            let model = fit_tfidf(&docs).unwrap();
            for d in &docs {
                let v = model.vectorize(d);
                prop_assert!(!v.all_unknown);
                prop_assert!((v.vector.norm() - 1.0).abs() < 1e-12);
                prop_assert!(v.vector.indices.windows(2).all(|w| w[0] < w[1]));
            }
        }
    }
}
