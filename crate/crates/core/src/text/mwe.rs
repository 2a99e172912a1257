use std::collections::HashSet;

use super::Token;
use crate::corpus::Domain;

/// Joins the words of a fused multiword expression.
pub const MWE_SEPARATOR: &str = "_";

/// A fixed multi-word phrase owned by one risk-factor domain.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MwePhrase {
    pub words: Vec<String>,
    pub domain: Domain,
}

impl MwePhrase {
    /// Parses a space-separated phrase. Returns `None` for fewer than two words.
    pub fn parse(phrase: &str, domain: Domain) -> Option<Self> {
        let words: Vec<String> = phrase.split_whitespace().map(str::to_lowercase).collect();
        (words.len() >= 2).then_some(MwePhrase { words, domain })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Longest-match, left-to-right, non-overlapping phrase matcher over
/// unstemmed lowercase words.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MweMatcher {
    phrases: HashSet<Vec<String>>,
    max_len: usize,
}

impl MweMatcher {
    pub fn new<'a>(phrases: impl IntoIterator<Item = &'a MwePhrase>) -> Self {
        let mut matcher = MweMatcher::default();
        for p in phrases {
            if p.words.len() >= 2 {
                matcher.max_len = matcher.max_len.max(p.words.len());
                matcher.phrases.insert(p.words.clone());
            }
        }
        matcher
    }

    pub fn is_empty(&self) -> bool {
        self.phrases.is_empty()
    }

    /// Length of the longest phrase starting at `words[start]`, if any.
    pub fn longest_match_at(&self, words: &[String], start: usize) -> Option<usize> {
        let remaining = words.len() - start;
        (2..=self.max_len.min(remaining))
            .rev()
            .find(|&n| self.phrases.contains(&words[start..start + n]))
    }

    /// Every match in a left-to-right scan, as `(start, len)` pairs.
    pub fn find_all(&self, words: &[String]) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut i = 0;
        while i < words.len() {
            match self.longest_match_at(words, i) {
                Some(n) => {
                    out.push((i, n));
                    i += n;
                }
                None => i += 1,
            }
        }
        out
    }

    pub fn fuse(&self, words: &[String]) -> Vec<Token> {
        let mut tokens = Vec::with_capacity(words.len());
        let mut i = 0;
        while i < words.len() {
            match self.longest_match_at(words, i) {
                Some(n) => {
                    tokens.push(Token::mwe(&words[i..i + n]));
                    i += n;
                }
                None => {
                    tokens.push(Token::word(&words[i]));
                    i += 1;
                }
            }
        }
        tokens
    }
}

/// Replaces each matched phrase with one unstemmed fused token; all other
/// words become stemmed tokens.
pub fn fuse_mwes(words: &[String], phrases: &[MwePhrase]) -> Vec<Token> {
    MweMatcher::new(phrases).fuse(words)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn words(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    fn phrase(s: &str) -> MwePhrase {
        MwePhrase::parse(s, Domain::Mood).unwrap()
    }

    #[test]
    fn fuses_panic_attack() {
        let out = fuse_mwes(&words("panic attack"), &[phrase("panic attack")]);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].surface, "panic_attack");
        assert_eq!(out[0].stem, "panic_attack");
        assert!(out[0].is_mwe);
    }

    #[test]
    fn no_match_is_identity() {
        let out = fuse_mwes(&words("calm patient"), &[phrase("panic attack")]);
        assert_eq!(out, vec![Token::word("calm"), Token::word("patient")]);
        assert_eq!(out[1].stem, "patient");
    }

    #[test]
    fn longest_match_wins() {
        let phrases = [phrase("attention span"), phrase("short attention span")];
        let out = fuse_mwes(&words("short attention span"), &phrases);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].surface, "short_attention_span");
    }

    #[test]
    fn left_to_right_non_overlapping() {
        let phrases = [phrase("a b"), phrase("b c")];
        let out = fuse_mwes(&words("a b c"), &phrases);
        let surfaces: Vec<_> = out.iter().map(|t| t.surface.as_str()).collect();
        assert_eq!(surfaces, vec!["a_b", "c"]);
    }

    #[test]
    fn single_word_phrases_rejected() {
        assert!(MwePhrase::parse("panic", Domain::Mood).is_none());
        assert!(MweMatcher::new(&[MwePhrase {
            words: words("x"),
            domain: Domain::Mood
        }])
        .is_empty());
    }

    proptest! {
        #[test]
        fn fusion_shrinks_and_is_idempotent(
            input in proptest::collection::vec(prop_oneof!["a", "b", "c", "d"], 0..20),
        ) {
            let phrases = [phrase("a b"), phrase("b c d"), phrase("c c"), phrase("a b c")];
            let input: Vec<String> = input.into_iter().collect();
            let matcher = MweMatcher::new(&phrases);
            let out = matcher.fuse(&input);
            prop_assert!(out.len() <= input.len());
            let any_mwe = out.iter().any(|t| t.is_mwe);
            prop_assert_eq!(out.len() == input.len(), !any_mwe);

            let surfaces: Vec<String> = out.iter().map(|t| t.surface.clone()).collect();
            let again = matcher.fuse(&surfaces);
            let again_surfaces: Vec<String> = again.iter().map(|t| t.surface.clone()).collect();
            prop_assert_eq!(again_surfaces, surfaces);
        }
    }
}
