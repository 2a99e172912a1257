use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::corpus::io::{AnnotationRecord, GoldRecord};
use crate::corpus::Domain;
use crate::error::{Error, Result};

/// Chance agreement this close to 1 leaves kappa undefined.
const DEGENERATE_CHANCE: f64 = 1e-12;

fn check_table<T>(items: &[Vec<T>]) -> Result<usize> {
    if items.len() < 2 {
        return Err(Error::data(format!(
            "kappa needs at least 2 items, got {}",
            items.len()
        )));
    }
    let raters = items[0].len();
    if raters < 2 {
        return Err(Error::data("kappa needs at least 2 raters per item"));
    }
    if let Some(i) = items.iter().position(|r| r.len() != raters) {
        return Err(Error::data(format!(
            "item {i} has {} ratings, expected {raters}",
            items[i].len()
        )));
    }
    Ok(raters)
}

/// Mean over items of the share of agreeing ordered rater pairs.
fn observed_agreement<T: Ord + Copy>(items: &[Vec<T>], raters: usize) -> f64 {
    let m = raters as f64;
    let total: f64 = items
        .iter()
        .map(|ratings| {
            let mut counts: BTreeMap<T, usize> = BTreeMap::new();
            for r in ratings {
                *counts.entry(*r).or_insert(0) += 1;
            }
            let same: usize = counts.values().map(|c| c * c).sum();
            (same as f64 - m) / (m * (m - 1.0))
        })
        .sum();
    total / items.len() as f64
}

fn kappa(observed: f64, chance: f64) -> Result<f64> {
    if 1.0 - chance < DEGENERATE_CHANCE {
        return Err(Error::numerical(
            "kappa is undefined: chance agreement is 1 (every rating is the same category)",
        ));
    }
    Ok((observed - chance) / (1.0 - chance))
}

/// Fleiss's kappa with category proportions pooled over all ratings.
/// `items[i][r]` is rater `r`'s category for item `i`.
pub fn fleiss_kappa<T: Ord + Copy>(items: &[Vec<T>]) -> Result<f64> {
    let raters = check_table(items)?;
    let mut pooled: BTreeMap<T, usize> = BTreeMap::new();
    for r in items.iter().flatten() {
        *pooled.entry(*r).or_insert(0) += 1;
    }
    let total = (items.len() * raters) as f64;
    let chance: f64 = pooled.values().map(|&c| (c as f64 / total).powi(2)).sum();
    kappa(observed_agreement(items, raters), chance)
}

/// Multi-rater kappa whose chance agreement averages, over rater pairs, the
/// agreement expected from each pair's own marginal distributions. With two
/// raters this is Cohen's kappa.
pub fn multi_kappa<T: Ord + Copy>(items: &[Vec<T>]) -> Result<f64> {
    let raters = check_table(items)?;
    let n = items.len() as f64;
    let marginals: Vec<BTreeMap<T, f64>> = (0..raters)
        .map(|r| {
            let mut m: BTreeMap<T, f64> = BTreeMap::new();
            for item in items {
                *m.entry(item[r]).or_insert(0.0) += 1.0 / n;
            }
            m
        })
        .collect();
    let mut chance = 0.0;
    let mut pairs = 0.0;
    for a in 0..raters {
        for b in (a + 1)..raters {
            chance += marginals[a]
                .iter()
                .map(|(cat, pa)| pa * marginals[b].get(cat).copied().unwrap_or(0.0))
                .sum::<f64>();
            pairs += 1.0;
        }
    }
    kappa(observed_agreement(items, raters), chance / pairs)
}

/// Qualitative band for a kappa value.
pub fn landis_koch(kappa: f64) -> &'static str {
    match kappa {
        k if k < 0.0 => "poor",
        k if k <= 0.20 => "slight",
        k if k <= 0.40 => "fair",
        k if k <= 0.60 => "moderate",
        k if k <= 0.80 => "substantial",
        _ => "almost perfect",
    }
}

/// Binary rating items for multilabel annotations: one item per
/// (paragraph, label) pair, rated `true` by an annotator whose set contains
/// the label.
pub fn multilabel_items(annotations: &[AnnotationRecord]) -> Vec<Vec<bool>> {
    annotations
        .iter()
        .flat_map(|a| {
            Domain::ALL
                .iter()
                .map(move |d| a.annotations.iter().map(|labels| labels.contains(d)).collect())
        })
        .collect()
}

pub(crate) fn check_annotations(annotations: &[AnnotationRecord], expected: usize) -> Result<()> {
    if annotations.is_empty() {
        return Err(Error::data("no annotations"));
    }
    for a in annotations {
        if a.annotations.len() != expected {
            return Err(Error::data(format!(
                "{}: expected {expected} annotators, got {}",
                a.id,
                a.annotations.len()
            )));
        }
        if let Some(i) = a.annotations.iter().position(|l| l.is_empty()) {
            return Err(Error::data(format!("{}: annotator {} gave no labels", a.id, i + 1)));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgreementStats {
    /// All label sets identical.
    pub total_agreement: usize,
    /// Empty common intersection.
    pub total_disagreement: usize,
    pub partial: usize,
    /// Share of total-agreement items whose common set has one label.
    pub single_domain_share: f64,
}

pub fn agreement_stats(annotations: &[AnnotationRecord]) -> Result<AgreementStats> {
    if annotations.is_empty() {
        return Err(Error::data("no annotations"));
    }
    let (mut agree, mut disagree, mut partial, mut single) = (0, 0, 0, 0);
    for a in annotations {
        let sets: Vec<BTreeSet<Domain>> = a.annotations.iter().map(|l| l.iter().copied().collect()).collect();
        let Some(first) = sets.first() else {
            return Err(Error::data(format!("{}: no annotators", a.id)));
        };
        if sets.iter().all(|s| s == first) {
            agree += 1;
            if first.len() == 1 {
                single += 1;
            }
        } else if first.iter().all(|d| !sets.iter().all(|s| s.contains(d))) {
            disagree += 1;
        } else {
            partial += 1;
        }
    }
    Ok(AgreementStats {
        total_agreement: agree,
        total_disagreement: disagree,
        partial,
        single_domain_share: if agree == 0 { 0.0 } else { single as f64 / agree as f64 },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    /// Per annotator: label set equals the gold set.
    pub exact: Vec<f64>,
    pub exact_mean: f64,
    /// Per annotator: first label equals the gold first label.
    pub first_domain: Vec<f64>,
    pub first_domain_mean: f64,
}

/// Accuracy of every annotator against the gold standard.
pub fn annotator_accuracy(annotations: &[AnnotationRecord], gold: &[GoldRecord]) -> Result<AccuracyReport> {
    if annotations.is_empty() {
        return Err(Error::data("no annotations"));
    }
    let raters = annotations[0].annotations.len();
    check_annotations(annotations, raters)?;
    let gold_by_id: HashMap<&str, &GoldRecord> = gold.iter().map(|g| (g.id.as_str(), g)).collect();
    let mut exact = vec![0usize; raters];
    let mut first = vec![0usize; raters];
    for a in annotations {
        let g = gold_by_id
            .get(a.id.as_str())
            .ok_or_else(|| Error::data(format!("no gold entry for annotated paragraph `{}`", a.id)))?;
        let gold_set: BTreeSet<Domain> = g.labels.iter().copied().collect();
        for (r, labels) in a.annotations.iter().enumerate() {
            if labels.iter().copied().collect::<BTreeSet<_>>() == gold_set {
                exact[r] += 1;
            }
            if labels.first() == g.labels.first() {
                first[r] += 1;
            }
        }
    }
    let n = annotations.len() as f64;
    let rates = |v: Vec<usize>| -> (Vec<f64>, f64) {
        let r: Vec<f64> = v.into_iter().map(|c| c as f64 / n).collect();
        let mean = r.iter().sum::<f64>() / r.len() as f64;
        (r, mean)
    };
    let (exact, exact_mean) = rates(exact);
    let (first_domain, first_domain_mean) = rates(first);
    Ok(AccuracyReport {
        exact,
        exact_mean,
        first_domain,
        first_domain_mean,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use Domain::*;

    /// Fleiss by enumerating ordered rater pairs within items and ordered
    /// pairs of ratings drawn from the pooled set.
    fn fleiss_brute(items: &[Vec<u8>]) -> f64 {
        let m = items[0].len();
        let mut agree = 0.0;
        for it in items {
            let mut same = 0;
            for a in 0..m {
                for b in 0..m {
                    if a != b && it[a] == it[b] {
                        same += 1;
                    }
                }
            }
            agree += same as f64 / (m * (m - 1)) as f64;
        }
        let po = agree / items.len() as f64;
        let pooled: Vec<u8> = items.iter().flatten().copied().collect();
        let mut same = 0usize;
        for x in &pooled {
            for y in &pooled {
                same += (x == y) as usize;
            }
        }
        let pe = same as f64 / (pooled.len() * pooled.len()) as f64;
        (po - pe) / (1.0 - pe)
    }

    /// Multi-kappa by enumerating, for every rater pair, all pairs of items.
    fn multi_brute(items: &[Vec<u8>]) -> f64 {
        let m = items[0].len();
        let n = items.len();
        let (mut po, mut pe, mut pairs) = (0.0, 0.0, 0.0);
        for a in 0..m {
            for b in (a + 1)..m {
                let obs = items.iter().filter(|it| it[a] == it[b]).count() as f64 / n as f64;
                let mut same = 0usize;
                for i in items {
                    for j in items {
                        same += (i[a] == j[b]) as usize;
                    }
                }
                po += obs;
                pe += same as f64 / (n * n) as f64;
                pairs += 1.0;
            }
        }
        let (po, pe) = (po / pairs, pe / pairs);
        (po - pe) / (1.0 - pe)
    }

    #[test]
    fn perfect_agreement_is_one() {
        let items = vec![vec![Mood; 3], vec![Substance; 3]];
        assert_eq!(fleiss_kappa(&items).unwrap(), 1.0);
        assert_eq!(multi_kappa(&items).unwrap(), 1.0);
    }

    #[test]
    fn single_category_is_undefined() {
        let items = vec![vec![Mood; 3]; 4];
        assert!(matches!(fleiss_kappa(&items), Err(Error::Numerical(_))));
        assert!(matches!(multi_kappa(&items), Err(Error::Numerical(_))));
        assert!(fleiss_kappa(&[vec![Mood; 3]]).is_err());
    }

    #[test]
    fn two_raters_is_cohen() {
        // 2x2 table: yes/yes 20, yes/no 5, no/yes 10, no/no 15.
        let mut items = Vec::new();
        items.extend(std::iter::repeat_n(vec![1u8, 1], 20));
        items.extend(std::iter::repeat_n(vec![1u8, 0], 5));
        items.extend(std::iter::repeat_n(vec![0u8, 1], 10));
        items.extend(std::iter::repeat_n(vec![0u8, 0], 15));
        // po = 0.7, pe = 0.5*0.6 + 0.5*0.4 = 0.5.
        assert!((multi_kappa(&items).unwrap() - 0.4).abs() < 1e-12);
    }

    #[test]
    fn mixed_table_matches_oracles() {
        let items = vec![vec![0u8, 0, 1], vec![1, 1, 1], vec![2, 0, 2]];
        let f = fleiss_kappa(&items).unwrap();
        let m = multi_kappa(&items).unwrap();
        assert!((f - fleiss_brute(&items)).abs() < 1e-12);
        assert!((m - multi_brute(&items)).abs() < 1e-12);
        assert!(f != m);
    }

    #[test]
    fn agreement_examples() {
        let rec = |a: Vec<Vec<Domain>>| AnnotationRecord {
            id: "x".into(),
            annotations: a,
        };
        let s = agreement_stats(&[
            rec(vec![vec![Mood], vec![Mood], vec![Mood]]),
            rec(vec![vec![Mood], vec![Substance], vec![Appearance]]),
            rec(vec![vec![Mood, Substance], vec![Mood], vec![Mood]]),
            rec(vec![
                vec![Mood, Substance],
                vec![Substance, Mood],
                vec![Mood, Substance],
            ]),
        ])
        .unwrap();
        assert_eq!((s.total_agreement, s.total_disagreement, s.partial), (2, 1, 1));
        assert_eq!(s.single_domain_share, 0.5);
        assert!(agreement_stats(&[]).is_err());
    }

    #[test]
    fn accuracy_variants() {
        let ann = vec![
            AnnotationRecord {
                id: "a".into(),
                annotations: vec![vec![Mood], vec![Mood, Substance], vec![Substance]],
            },
            AnnotationRecord {
                id: "b".into(),
                annotations: vec![vec![Other], vec![Other], vec![Other]],
            },
        ];
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
        let r = annotator_accuracy(&ann, &gold).unwrap();
        assert_eq!(r.exact, vec![1.0, 0.5, 0.5]);
        assert_eq!(r.first_domain, vec![1.0, 1.0, 0.5]);
        assert!(r.first_domain_mean >= r.exact_mean);
        let err = annotator_accuracy(&ann, &gold[..1]).unwrap_err().to_string();
        assert!(err.contains("`b`"));
    }

    #[test]
    fn bands() {
        assert_eq!(landis_koch(-0.1), "poor");
        assert_eq!(landis_koch(0.575), "moderate");
        assert_eq!(landis_koch(0.7), "substantial");
        assert_eq!(landis_koch(1.0), "almost perfect");
    }

    fn table() -> impl Strategy<Value = Vec<Vec<u8>>> {
        (2usize..5).prop_flat_map(|m| proptest::collection::vec(proptest::collection::vec(0u8..4, m), 2..15))
    }

    proptest! {
        #[test]
        fn kappas_match_brute_force(items in table()) {
            let distinct: BTreeSet<u8> = items.iter().flatten().copied().collect();
            prop_assume!(distinct.len() > 1);
            let f = fleiss_kappa(&items).unwrap();
            prop_assert!((f - fleiss_brute(&items)).abs() < 1e-12);
            prop_assert!(f <= 1.0 + 1e-15);
            if let Ok(m) = multi_kappa(&items) {
                prop_assert!((m - multi_brute(&items)).abs() < 1e-12);
                prop_assert!(m <= 1.0 + 1e-15);
            }
        }

        #[test]
        fn fleiss_invariant_to_relabeling(items in table(), perm in Just([3u8, 0, 2, 1])) {
            let distinct: BTreeSet<u8> = items.iter().flatten().copied().collect();
            prop_assume!(distinct.len() > 1);
            let relabeled: Vec<Vec<u8>> = items.iter().map(|r| r.iter().map(|c| perm[*c as usize]).collect()).collect();
            prop_assert!((fleiss_kappa(&items).unwrap() - fleiss_kappa(&relabeled).unwrap()).abs() < 1e-12);
        }
    }
}
