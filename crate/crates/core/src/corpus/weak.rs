use std::collections::{HashMap, HashSet};

use super::{Domain, KeywordLexicon, Paragraph, NUM_DOMAINS};
use crate::error::{Error, Result};
use crate::text::{paragraph_terms, porter_stem, tokenize, MweMatcher, TermBag};

/// Weakly-labeled training paragraphs, each carrying exactly one domain.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingCorpus {
    pub entries: Vec<(Paragraph, Domain)>,
}

impl TrainingCorpus {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn count(&self, domain: Domain) -> usize {
        self.entries.iter().filter(|(_, d)| *d == domain).count()
    }
}

/// Aggregate of every training paragraph of one domain.
#[derive(Debug, Clone, PartialEq)]
pub struct Megadocument {
    pub domain: Domain,
    pub paragraph_ids: Vec<String>,
    pub terms: TermBag,
}

/// Precomputed lookup tables for hit counting.
struct HitCounter {
    keyword_stems: HashMap<String, Vec<Domain>>,
    phrase_domains: HashMap<Vec<String>, Vec<Domain>>,
    matcher: MweMatcher,
}

impl HitCounter {
    fn new(lexicon: &KeywordLexicon) -> Self {
        let mut keyword_stems: HashMap<String, Vec<Domain>> = HashMap::new();
        let mut phrase_domains: HashMap<Vec<String>, Vec<Domain>> = HashMap::new();
        for (domain, entry) in lexicon.entries() {
            for k in &entry.keywords {
                let owners = keyword_stems.entry(porter_stem(k)).or_default();
                if !owners.contains(domain) {
                    owners.push(*domain);
                }
            }
        }
        let phrases = lexicon.phrases();
        for p in &phrases {
            let owners = phrase_domains.entry(p.words.clone()).or_default();
            if !owners.contains(&p.domain) {
                owners.push(p.domain);
            }
        }
        HitCounter {
            keyword_stems,
            phrase_domains,
            matcher: MweMatcher::new(&phrases),
        }
    }

    /// Keyphrases are matched on unstemmed words (longest match first);
    /// words consumed by a keyphrase do not also count as keywords.
    /// Keywords match on Porter stems.
    fn count(&self, text: &str) -> [usize; NUM_DOMAINS] {
        let words = tokenize(text);
        let mut hits = [0usize; NUM_DOMAINS];
        let mut consumed = vec![false; words.len()];
        for (start, len) in self.matcher.find_all(&words) {
            if let Some(owners) = self.phrase_domains.get(&words[start..start + len]) {
                for d in owners {
                    hits[d.index()] += 1;
                }
            }
            consumed[start..start + len].iter_mut().for_each(|c| *c = true);
        }
        for (w, _) in words.iter().zip(&consumed).filter(|(_, c)| !**c) {
            if let Some(owners) = self.keyword_stems.get(&porter_stem(w)) {
                for d in owners {
                    hits[d.index()] += 1;
                }
            }
        }
        hits
    }
}

/// Per-domain lexicon hit counts for one paragraph text.
pub fn lexicon_hits(text: &str, lexicon: &KeywordLexicon) -> [usize; NUM_DOMAINS] {
    HitCounter::new(lexicon).count(text)
}

/// Assigns each paragraph the unique domain with the most lexicon hits.
/// Paragraphs with no hits or a tied maximum are left out.
pub fn weak_label(paragraphs: &[Paragraph], lexicon: &KeywordLexicon) -> Result<TrainingCorpus> {
    lexicon.check_complete()?;
    let counter = HitCounter::new(lexicon);
    let entries = paragraphs
        .iter()
        .filter_map(|p| {
            let hits = counter.count(&p.text);
            let max = *hits.iter().max()?;
            if max == 0 || hits.iter().filter(|&&h| h == max).count() > 1 {
                return None;
            }
            let best = hits.iter().position(|&h| h == max)?;
            Some((p.clone(), Domain::RISK_FACTORS[best]))
        })
        .collect();
    Ok(TrainingCorpus { entries })
}

/// One megadocument per risk-factor domain, in output order.
pub fn build_megadocuments(corpus: &TrainingCorpus, matcher: Option<&MweMatcher>) -> Result<Vec<Megadocument>> {
    let mut docs: Vec<Megadocument> = Domain::RISK_FACTORS
        .iter()
        .map(|&domain| Megadocument {
            domain,
            paragraph_ids: Vec::new(),
            terms: TermBag::new(),
        })
        .collect();
    let mut seen = HashSet::new();
    for (p, d) in &corpus.entries {
        if d.is_other() {
            return Err(Error::data(format!("paragraph {} carries the Other label", p.id)));
        }
        if !seen.insert(p.id.as_str()) {
            return Err(Error::data(format!("duplicate paragraph id {}", p.id)));
        }
        let doc = &mut docs[d.index()];
        doc.paragraph_ids.push(p.id.clone());
        for (term, count) in paragraph_terms(&p.text, matcher) {
            *doc.terms.entry(term).or_insert(0) += count;
        }
    }
    if let Some(empty) = docs.iter().find(|d| d.paragraph_ids.is_empty()) {
        return Err(Error::data(format!(
            "no training paragraphs for domain {}",
            empty.domain
        )));
    }
    Ok(docs)
}
