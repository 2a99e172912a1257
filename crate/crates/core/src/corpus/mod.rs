//! Paragraphs, risk-factor domains, the clinician lexicon, weak labeling and
//! per-domain megadocuments.

pub mod io;
pub mod synth;
mod weak;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::{MweMatcher, MwePhrase};

pub use weak::{build_megadocuments, lexicon_hits, weak_label, Megadocument, TrainingCorpus};

/// The seven risk-factor domains plus the open-world `Other` label.
///
/// The first seven variants index classifier outputs `0..7` in declaration
/// order. Serialized names are the variant names (`"ThoughtContent"` etc.);
/// the spaced forms (`"Thought Content"`) are also accepted on input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Domain {
    Appearance,
    ThoughtContent,
    Interpersonal,
    Mood,
    Occupation,
    ThoughtProcess,
    Substance,
    Other,
}

/// Number of trainable (non-`Other`) domains.
pub const NUM_DOMAINS: usize = 7;

impl Domain {
    pub const ALL: [Domain; 8] = [
        Domain::Appearance,
        Domain::ThoughtContent,
        Domain::Interpersonal,
        Domain::Mood,
        Domain::Occupation,
        Domain::ThoughtProcess,
        Domain::Substance,
        Domain::Other,
    ];

    /// The seven classifier domains in output order.
    pub const RISK_FACTORS: [Domain; NUM_DOMAINS] = [
        Domain::Appearance,
        Domain::ThoughtContent,
        Domain::Interpersonal,
        Domain::Mood,
        Domain::Occupation,
        Domain::ThoughtProcess,
        Domain::Substance,
    ];

    /// Position in `ALL`; for non-`Other` domains this is the output index.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Domain> {
        Domain::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Domain::Appearance => "Appearance",
            Domain::ThoughtContent => "ThoughtContent",
            Domain::Interpersonal => "Interpersonal",
            Domain::Mood => "Mood",
            Domain::Occupation => "Occupation",
            Domain::ThoughtProcess => "ThoughtProcess",
            Domain::Substance => "Substance",
            Domain::Other => "Other",
        }
    }

    /// Human-readable name used in report tables.
    pub fn display_name(self) -> &'static str {
        match self {
            Domain::ThoughtContent => "Thought Content",
            Domain::ThoughtProcess => "Thought Process",
            d => d.name(),
        }
    }

    pub fn is_other(self) -> bool {
        self == Domain::Other
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Domain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace() && *c != '_').collect();
        Domain::ALL
            .into_iter()
            .find(|d| d.name().eq_ignore_ascii_case(&compact))
            .ok_or_else(|| Error::data(format!("unknown domain name `{s}`")))
    }
}

impl TryFrom<String> for Domain {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Domain> for String {
    fn from(d: Domain) -> String {
        d.name().to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Training,
    Target,
    Synthetic,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Paragraph {
    pub id: String,
    pub text: String,
    pub source: Source,
}

/// A paragraph with ordered domain labels (most prevalent first).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedParagraph {
    pub paragraph: Paragraph,
    pub labels: Vec<Domain>,
}

/// Checks an ordered label list: non-empty, duplicate-free, and `Other` only
/// as the sole label.
pub fn validate_labels(labels: &[Domain]) -> Result<()> {
    if labels.is_empty() {
        return Err(Error::data("empty label list"));
    }
    for (i, d) in labels.iter().enumerate() {
        if labels[..i].contains(d) {
            return Err(Error::data(format!("duplicate label {d}")));
        }
    }
    if labels.len() > 1 && labels.contains(&Domain::Other) {
        return Err(Error::data("Other must be the sole label"));
    }
    Ok(())
}

/// Lexicon entry for one domain.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainEntry {
    #[serde(default)]
    pub keywords: Vec<String>,
    /// Space-separated multi-word phrases.
    #[serde(default)]
    pub keyphrases: Vec<String>,
}

/// Per-domain keywords and keyphrases driving weak labeling and MWE fusion.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KeywordLexicon {
    entries: BTreeMap<Domain, DomainEntry>,
}

impl KeywordLexicon {
    /// Builds a lexicon, lowercasing and deduplicating entries. `Other` is
    /// rejected; a keyphrase must have at least two words.
    pub fn new(entries: BTreeMap<Domain, DomainEntry>) -> Result<Self> {
        let mut clean = BTreeMap::new();
        for (domain, entry) in entries {
            if domain.is_other() {
                return Err(Error::config("lexicon may not contain the Other domain"));
            }
            let mut keywords: Vec<String> = Vec::new();
            for k in entry.keywords {
                let k = k.trim().to_lowercase();
                if k.is_empty() || k.contains(char::is_whitespace) {
                    return Err(Error::config(format!("{domain}: keyword `{k}` must be a single word")));
                }
                if !keywords.contains(&k) {
                    keywords.push(k);
                }
            }
            let mut keyphrases: Vec<String> = Vec::new();
            for p in entry.keyphrases {
                let p = p.split_whitespace().map(str::to_lowercase).collect::<Vec<_>>();
                if p.len() < 2 {
                    return Err(Error::config(format!(
                        "{domain}: keyphrase `{}` needs at least two words",
                        p.join(" ")
                    )));
                }
                let p = p.join(" ");
                if !keyphrases.contains(&p) {
                    keyphrases.push(p);
                }
            }
            clean.insert(domain, DomainEntry { keywords, keyphrases });
        }
        Ok(KeywordLexicon { entries: clean })
    }

    pub fn entry(&self, domain: Domain) -> Option<&DomainEntry> {
        self.entries.get(&domain)
    }

    pub fn entries(&self) -> &BTreeMap<Domain, DomainEntry> {
        &self.entries
    }

    /// All keyphrases as MWE phrases, in domain order.
    pub fn phrases(&self) -> Vec<MwePhrase> {
        self.entries
            .iter()
            .flat_map(|(d, e)| e.keyphrases.iter().filter_map(move |p| MwePhrase::parse(p, *d)))
            .collect()
    }

    pub fn matcher(&self) -> MweMatcher {
        MweMatcher::new(&self.phrases())
    }

    /// Copy of the lexicon with every keyphrase removed.
    pub fn keywords_only(&self) -> Self {
        let entries = self
            .entries
            .iter()
            .map(|(d, e)| {
                (
                    *d,
                    DomainEntry {
                        keywords: e.keywords.clone(),
                        keyphrases: Vec::new(),
                    },
                )
            })
            .collect();
        KeywordLexicon { entries }
    }

    /// Every non-`Other` domain needs at least one keyword or keyphrase.
    pub fn check_complete(&self) -> Result<()> {
        for d in Domain::RISK_FACTORS {
            match self.entries.get(&d) {
                Some(e) if !e.keywords.is_empty() || !e.keyphrases.is_empty() => {}
                _ => return Err(Error::config(format!("lexicon has no entries for domain {d}"))),
            }
        }
        Ok(())
    }

    pub fn num_keywords(&self) -> usize {
        self.entries.values().map(|e| e.keywords.len()).sum()
    }

    pub fn num_keyphrases(&self) -> usize {
        self.entries.values().map(|e| e.keyphrases.len()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn domain_indices_follow_declaration_order() {
        for (i, d) in Domain::ALL.iter().enumerate() {
            assert_eq!(d.index(), i);
            assert_eq!(Domain::from_index(i), Some(*d));
        }
        assert_eq!(Domain::Other.index(), 7);
        assert!(!Domain::RISK_FACTORS.contains(&Domain::Other));
    }

    #[test]
    fn domain_names_round_trip() {
        for d in Domain::ALL {
            assert_eq!(d.name().parse::<Domain>().unwrap(), d);
            assert_eq!(d.display_name().parse::<Domain>().unwrap(), d);
        }
        assert_eq!("thought_process".parse::<Domain>().unwrap(), Domain::ThoughtProcess);
        assert!("Mania".parse::<Domain>().is_err());
        let json = serde_json::to_string(&Domain::ThoughtContent).unwrap();
        assert_eq!(json, "\"ThoughtContent\"");
    }

    #[test]
    fn label_validation() {
        assert!(validate_labels(&[Domain::Mood, Domain::Substance]).is_ok());
        assert!(validate_labels(&[]).is_err());
        assert!(validate_labels(&[Domain::Mood, Domain::Mood]).is_err());
        assert!(validate_labels(&[Domain::Mood, Domain::Other]).is_err());
        assert!(validate_labels(&[Domain::Other]).is_ok());
    }

    #[test]
    fn lexicon_normalizes_and_validates() {
        let mut m = BTreeMap::new();
        m.insert(
            Domain::Substance,
            DomainEntry {
                keywords: vec!["Cocaine".into(), "cocaine".into()],
                keyphrases: vec!["Alcohol  Use".into()],
            },
        );
        let lex = KeywordLexicon::new(m.clone()).unwrap();
        let e = lex.entry(Domain::Substance).unwrap();
        assert_eq!(e.keywords, vec!["cocaine"]);
        assert_eq!(e.keyphrases, vec!["alcohol use"]);
        assert!(lex.check_complete().is_err());

        m.insert(
            Domain::Mood,
            DomainEntry {
                keywords: vec![],
                keyphrases: vec!["panic".into()],
            },
        );
        assert!(KeywordLexicon::new(m.clone()).is_err());
        m.clear();
        m.insert(Domain::Other, DomainEntry::default());
        assert!(KeywordLexicon::new(m).is_err());
    }
}
