//! Deterministic synthetic corpora standing in for restricted clinical notes.
//!
//! Every domain owns a pool of words split into lexicon keywords and
//! non-lexicon vocabulary, plus multiword phrases built entirely from words
//! of the shared noise pool. A paragraph is written in one of two styles:
//!
//! * keyword style: one or two domain keywords, occasionally a domain phrase;
//! * phrase style: one non-lexicon vocabulary word and one or two domain
//!   phrases, with no keywords at all.
//!
//! Phrase-style paragraphs are only recoverable through their multiword
//! expressions, whose constituent words are individually uninformative.
//! Some paragraphs carry a second, less prevalent domain. Three simulated
//! annotators perturb the gold labels to exercise agreement tooling.

use std::collections::{BTreeMap, HashMap, HashSet};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::io::{AnnotationRecord, GoldRecord};
use super::{AnnotatedParagraph, Domain, DomainEntry, KeywordLexicon, Paragraph, Source};
use crate::error::{Error, Result};
use crate::text::porter_stem;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainPool {
    pub domain: Domain,
    /// Lexicon keywords (single words).
    pub keywords: Vec<String>,
    /// Domain words absent from the lexicon.
    pub vocabulary: Vec<String>,
    /// Space-separated multiword phrases; these become lexicon keyphrases.
    pub phrases: Vec<String>,
    /// Number of paragraphs whose first gold label is this domain.
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub domains: Vec<DomainPool>,
    pub noise: Vec<String>,
    /// Paragraphs drawn purely from the noise pool, gold-labeled `Other`.
    pub other_count: usize,
    pub noise_words_min: usize,
    pub noise_words_max: usize,
    /// Exponent of the rank-frequency law for noise words; 0 is uniform.
    pub noise_zipf: f64,
    pub phrase_style_rate: f64,
    pub multilabel_rate: f64,
    /// Chance a keyword-style paragraph also contains one domain phrase.
    pub stray_phrase_rate: f64,
    /// Per-annotator chance of deviating from the gold labels.
    pub annotator_error_rate: f64,
}

/// Output of [`generate_synthetic_corpus`].
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCorpus {
    pub paragraphs: Vec<Paragraph>,
    pub gold: Vec<AnnotatedParagraph>,
    pub lexicon: KeywordLexicon,
    pub annotations: Vec<AnnotationRecord>,
}

impl SyntheticCorpus {
    pub fn gold_records(&self) -> Vec<GoldRecord> {
        self.gold
            .iter()
            .map(|g| GoldRecord {
                id: g.paragraph.id.clone(),
                labels: g.labels.clone(),
            })
            .collect()
    }
}

fn words(s: &str) -> Vec<String> {
    s.split_whitespace().map(String::from).collect()
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig::standard()
    }
}

impl SynthConfig {
    /// The standard desk-scale configuration: 7 domains x 200 paragraphs.
    pub fn standard() -> Self {
        let table: [(Domain, &str, &str, &[&str]); 7] = [
            (
                Domain::Appearance,
                "disheveled clothing groomed wearing clean hygiene",
                "unkempt tattoo makeup posture gait eyeglasses beard tremor attire piercing",
                &["eye contact", "stated age", "well appearing", "body image", "motor activity"],
            ),
            (
                Domain::ThoughtContent,
                "obsession delusion grandiose ideation suicidal paranoid",
                "hallucinations persecutory homicidal compulsions phobia rumination intrusive nihilistic somatic erotomanic",
                &["ideas of reference", "harm to self", "thought insertion", "mind reading", "special powers"],
            ),
            (
                Domain::Interpersonal,
                "boyfriend relationship peers family parents social",
                "girlfriend sibling roommate friendship estranged custody marriage divorce cousin mentor",
                &["lives with mother", "close friends", "conflict at home", "romantic interest", "support system"],
            ),
            (
                Domain::Mood,
                "anxious calm depressed labile confused cooperative",
                "irritable euphoric tearful dysphoric hopeless elated worried numb sad moody",
                &["panic attack", "really great", "low energy", "feeling down", "mood swings"],
            ),
            (
                Domain::Occupation,
                "boss employed job school class homework",
                "internship semester coworker tuition unemployment career exams professor paycheck resume",
                &["left college", "part time", "lost income", "good grades", "day program"],
            ),
            (
                Domain::ThoughtProcess,
                "linear tangential prosody blocking perseverant circumstantial",
                "disorganized derailment incoherent concrete logical racing illogical paucity neologisms loose",
                &["flight of ideas", "short attention span", "goal directed", "word salad", "hard to follow"],
            ),
            (
                Domain::Substance,
                "cocaine marijuana etoh addiction narcotic alcohol",
                "cannabis opioid heroin withdrawal sober intoxicated overdose benzodiazepine methamphetamine relapse",
                &["smoked daily", "drinking heavily", "used once", "positive screen", "binge drinking"],
            ),
        ];
        let domains: Vec<DomainPool> = table
            .iter()
            .map(|(domain, kw, vocab, phrases)| DomainPool {
                domain: *domain,
                keywords: words(kw),
                vocabulary: words(vocab),
                phrases: phrases.iter().map(|p| p.to_string()).collect(),
                count: 200,
            })
            .collect();

        let filler = "patient reports today history noted denies states visit plan follow week \
            continue medication dose discussed appointment reviewed since last during after before \
            morning evening night days months year recently currently again also without further \
            describes overall remains appears seen by team staff nurse doctor clinic unit admission \
            discharge note per request will return next scheduled call phone update details \
            presented initial brief general routine labs vitals stable change current prior \
            recommended agreed understanding questions answered consent";
        // Phrase words are interleaved with the filler from rank 4 on, so
        // they occur on their own at moderate frequency.
        let mut phrase_words: Vec<String> = Vec::new();
        for pool in &domains {
            for p in &pool.phrases {
                for w in p.split_whitespace() {
                    if !phrase_words.iter().any(|n| n == w) {
                        phrase_words.push(w.to_string());
                    }
                }
            }
        }
        let filler = words(filler);
        phrase_words.retain(|w| !filler.contains(w));
        let mut noise: Vec<String> = filler[..3].to_vec();
        let mut rest = phrase_words.into_iter();
        for w in &filler[3..] {
            noise.push(w.clone());
            noise.extend(rest.next());
        }
        noise.extend(rest);

        SynthConfig {
            domains,
            noise,
            other_count: 0,
            noise_words_min: 5,
            noise_words_max: 10,
            noise_zipf: 1.0,
            phrase_style_rate: 0.4,
            multilabel_rate: 0.2,
            stray_phrase_rate: 0.15,
            annotator_error_rate: 0.2,
        }
    }

    /// Same pools, with `count` paragraphs for every domain.
    pub fn with_counts(mut self, count: usize) -> Self {
        for d in &mut self.domains {
            d.count = count;
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        let present: HashSet<Domain> = self.domains.iter().map(|d| d.domain).collect();
        if present.len() != self.domains.len() || Domain::RISK_FACTORS.iter().any(|d| !present.contains(d)) {
            return Err(Error::config(
                "synthetic config needs exactly one pool per risk-factor domain",
            ));
        }
        if self.noise.is_empty() {
            return Err(Error::config("noise pool is empty"));
        }
        if self.noise_words_min > self.noise_words_max {
            return Err(Error::config("noise_words_min exceeds noise_words_max"));
        }
        if !(self.noise_zipf.is_finite() && self.noise_zipf >= 0.0) {
            return Err(Error::config("noise_zipf must be finite and non-negative"));
        }
        for rate in [
            self.phrase_style_rate,
            self.multilabel_rate,
            self.stray_phrase_rate,
            self.annotator_error_rate,
        ] {
            if !(0.0..=1.0).contains(&rate) {
                return Err(Error::config("rates must lie in [0, 1]"));
            }
        }
        let mut owner: HashMap<String, Domain> = HashMap::new();
        for pool in &self.domains {
            if pool.domain.is_other() {
                return Err(Error::config("Other cannot own a vocabulary pool"));
            }
            if pool.keywords.is_empty() || pool.vocabulary.is_empty() || pool.phrases.is_empty() {
                return Err(Error::config(format!(
                    "{}: keyword, vocabulary and phrase pools must be non-empty",
                    pool.domain
                )));
            }
            if pool.count == 0 {
                return Err(Error::config(format!("{}: count must be at least 1", pool.domain)));
            }
            if let Some(p) = pool.phrases.iter().find(|p| p.split_whitespace().count() < 2) {
                return Err(Error::config(format!(
                    "{}: phrase `{p}` needs two or more words",
                    pool.domain
                )));
            }
            for w in pool.keywords.iter().chain(&pool.vocabulary) {
                if let Some(prev) = owner.insert(porter_stem(w), pool.domain) {
                    if prev != pool.domain {
                        return Err(Error::config(format!(
                            "word `{w}` shared by pools {prev} and {}",
                            pool.domain
                        )));
                    }
                }
            }
        }
        for w in &self.noise {
            if let Some(d) = owner.get(&porter_stem(w)) {
                return Err(Error::config(format!("noise word `{w}` collides with the {d} pool")));
            }
        }
        Ok(())
    }

    pub fn lexicon(&self) -> Result<KeywordLexicon> {
        let entries: BTreeMap<Domain, DomainEntry> = self
            .domains
            .iter()
            .map(|p| {
                (
                    p.domain,
                    DomainEntry {
                        keywords: p.keywords.clone(),
                        keyphrases: p.phrases.clone(),
                    },
                )
            })
            .collect();
        KeywordLexicon::new(entries)
    }

    fn pool(&self, domain: Domain) -> &DomainPool {
        self.domains
            .iter()
            .find(|p| p.domain == domain)
            .expect("validated pool")
    }
}

/// A paragraph is assembled from chunks; a chunk is one word or a phrase.
fn render(chunks: &[String], rng: &mut ChaCha8Rng) -> String {
    let mut text = String::new();
    let mut in_sentence = 0usize;
    let mut sentence_len = rng.random_range(4..=8);
    for chunk in chunks {
        if in_sentence == 0 {
            if !text.is_empty() {
                text.push(' ');
            }
            let mut cs = chunk.chars();
            if let Some(first) = cs.next() {
                text.extend(first.to_uppercase());
                text.push_str(cs.as_str());
            }
        } else {
            text.push(' ');
            text.push_str(chunk);
        }
        in_sentence += 1;
        if in_sentence == sentence_len {
            text.push('.');
            in_sentence = 0;
            sentence_len = rng.random_range(4..=8);
        }
    }
    if in_sentence != 0 {
        text.push('.');
    }
    text
}

fn pick(pool: &[String], rng: &mut ChaCha8Rng) -> String {
    pool.choose(rng).expect("non-empty pool").clone()
}

fn noise_chunks(config: &SynthConfig, rng: &mut ChaCha8Rng) -> Vec<String> {
    let n = rng.random_range(config.noise_words_min..=config.noise_words_max);
    let weights = (1..=config.noise.len()).map(|r| (r as f64).powf(-config.noise_zipf));
    let dist = WeightedIndex::new(weights).expect("validated noise pool");
    (0..n).map(|_| config.noise[dist.sample(rng)].clone()).collect()
}

fn domain_chunks(pool: &DomainPool, primary: bool, config: &SynthConfig, rng: &mut ChaCha8Rng) -> Vec<String> {
    let mut chunks = Vec::new();
    if !primary {
        let all: Vec<String> = pool.keywords.iter().chain(&pool.vocabulary).cloned().collect();
        chunks.push(pick(&all, rng));
        return chunks;
    }
    if rng.random_bool(config.phrase_style_rate) {
        chunks.push(pick(&pool.vocabulary, rng));
        let n = rng.random_range(1..=2);
        chunks.extend((0..n).map(|_| pick(&pool.phrases, rng)));
    } else {
        let n = rng.random_range(1..=2);
        chunks.extend((0..n).map(|_| pick(&pool.keywords, rng)));
        if rng.random_bool(config.stray_phrase_rate) {
            chunks.push(pick(&pool.phrases, rng));
        }
    }
    chunks
}

fn perturb_labels(gold: &[Domain], rate: f64, rng: &mut ChaCha8Rng) -> Vec<Domain> {
    if !rng.random_bool(rate) {
        return gold.to_vec();
    }
    match rng.random_range(0..4) {
        // Drop or add a secondary domain.
        0 if gold.len() > 1 => gold[..1].to_vec(),
        0 => {
            let extra = *Domain::RISK_FACTORS.choose(rng).expect("domains");
            if gold.contains(&extra) || gold[0].is_other() {
                gold.to_vec()
            } else {
                vec![gold[0], extra]
            }
        }
        // Swap prevalence order.
        1 if gold.len() > 1 => vec![gold[1], gold[0]],
        // Replace the first domain.
        2 | 1 => {
            let first = *Domain::ALL.choose(rng).expect("domains");
            let mut out = vec![first];
            if !first.is_other() {
                out.extend(gold[1..].iter().filter(|d| **d != first));
            }
            out
        }
        _ => vec![Domain::Other],
    }
}

/// Generates a corpus, its gold standard, the matching lexicon and three
/// simulated annotations per paragraph. Deterministic in `(config, seed)`.
pub fn generate_synthetic_corpus(config: &SynthConfig, seed: u64) -> Result<SyntheticCorpus> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut plan: Vec<Domain> = Vec::new();
    for d in Domain::RISK_FACTORS {
        plan.extend(std::iter::repeat_n(d, config.pool(d).count));
    }
    plan.extend(std::iter::repeat_n(Domain::Other, config.other_count));
    plan.shuffle(&mut rng);

    let mut paragraphs = Vec::with_capacity(plan.len());
    let mut gold = Vec::with_capacity(plan.len());
    let mut annotations = Vec::with_capacity(plan.len());
    for (i, primary) in plan.into_iter().enumerate() {
        let mut chunks = noise_chunks(config, &mut rng);
        let mut labels = vec![primary];
        if !primary.is_other() {
            chunks.extend(domain_chunks(config.pool(primary), true, config, &mut rng));
            if rng.random_bool(config.multilabel_rate) {
                let others: Vec<Domain> = Domain::RISK_FACTORS.into_iter().filter(|d| *d != primary).collect();
                let second = *others.choose(&mut rng).expect("six domains");
                chunks.extend(domain_chunks(config.pool(second), false, config, &mut rng));
                labels.push(second);
            }
        }
        chunks.shuffle(&mut rng);
        let paragraph = Paragraph {
            id: format!("syn{seed}-{i:05}"),
            text: render(&chunks, &mut rng),
            source: Source::Synthetic,
        };
        let per_annotator = (0..3)
            .map(|_| perturb_labels(&labels, config.annotator_error_rate, &mut rng))
            .collect();
        annotations.push(AnnotationRecord {
            id: paragraph.id.clone(),
            annotations: per_annotator,
        });
        paragraphs.push(paragraph.clone());
        gold.push(AnnotatedParagraph { paragraph, labels });
    }

    Ok(SyntheticCorpus {
        paragraphs,
        gold,
        lexicon: config.lexicon()?,
        annotations,
    })
}

/// Paragraphs drawn purely from the noise pool.
pub fn generate_noise_paragraphs(config: &SynthConfig, n: usize, seed: u64) -> Result<Vec<Paragraph>> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n)
        .map(|i| {
            let chunks = noise_chunks(config, &mut rng);
            Paragraph {
                id: format!("noise{seed}-{i:05}"),
                text: render(&chunks, &mut rng),
                source: Source::Synthetic,
            }
        })
        .collect())
}
