//! Text normalization: tokenizing, Porter stemming, multiword-expression
//! fusion and n-gram term extraction.

mod mwe;
mod porter;

use std::collections::BTreeMap;

pub use mwe::{fuse_mwes, MweMatcher, MwePhrase, MWE_SEPARATOR};
pub use porter::porter_stem;

/// A normalized token. Fused multiword expressions keep their surface form
/// as their stem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub surface: String,
    pub stem: String,
    pub is_mwe: bool,
}

impl Token {
    pub fn word(surface: &str) -> Self {
        Token {
            surface: surface.to_string(),
            stem: porter_stem(surface),
            is_mwe: false,
        }
    }

    pub fn mwe(words: &[String]) -> Self {
        let surface = words.join(MWE_SEPARATOR);
        Token {
            stem: surface.clone(),
            surface,
            is_mwe: true,
        }
    }
}

/// Splits text into maximal runs of alphabetic characters, lowercased.
/// Digits, punctuation and whitespace are all separators.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphabetic())
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Term multiset with deterministic iteration order.
pub type TermBag = BTreeMap<String, u32>;

/// Unigrams, bigrams and trigrams over the token stems, space-joined.
pub fn extract_terms(tokens: &[Token]) -> TermBag {
    let mut bag = TermBag::new();
    for n in 1..=3 {
        for window in tokens.windows(n) {
            let term = window.iter().map(|t| t.stem.as_str()).collect::<Vec<_>>().join(" ");
            *bag.entry(term).or_insert(0) += 1;
        }
    }
    bag
}

/// Full normalization of one paragraph: tokenize, optionally fuse MWEs,
/// stem, extract n-gram terms.
pub fn paragraph_terms(text: &str, matcher: Option<&MweMatcher>) -> TermBag {
    let words = tokenize(text);
    let tokens = match matcher {
        Some(m) => m.fuse(&words),
        None => words.iter().map(|w| Token::word(w)).collect(),
    };
    extract_terms(&tokens)
}

/// Total number of occurrences in a bag.
pub fn bag_size(bag: &TermBag) -> usize {
    bag.values().map(|&c| c as usize).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn tokenize_examples() {
        assert_eq!(tokenize("Pt. reports SI."), vec!["pt", "reports", "si"]);
        assert!(tokenize("").is_empty());
        assert!(tokenize("   \t\n").is_empty());
        assert_eq!(
            tokenize("feeling 'really great and excited'"),
            vec!["feeling", "really", "great", "and", "excited"]
        );
        assert_eq!(tokenize("ETOH x3 daily"), vec!["etoh", "x", "daily"]);
    }

    #[test]
    fn extract_terms_linear_thinking() {
        let tokens: Vec<Token> = tokenize("linear thinking").iter().map(|w| Token::word(w)).collect();
        let bag = extract_terms(&tokens);
        let expected: TermBag = [("linear", 1), ("think", 1), ("linear think", 1)]
            .into_iter()
            .map(|(t, c)| (t.to_string(), c))
            .collect();
        assert_eq!(bag, expected);
    }

    #[test]
    fn extract_terms_single_token() {
        let bag = extract_terms(&[Token::word("anxious")]);
        assert_eq!(bag.len(), 1);
        assert_eq!(bag["anxiou"], 1);
    }

    #[test]
    fn extract_terms_after_fusion() {
        let tokens = vec![
            Token::mwe(&["panic".to_string(), "attack".to_string()]),
            Token::word("today"),
        ];
        let bag = extract_terms(&tokens);
        let keys: Vec<_> = bag.keys().cloned().collect();
        assert_eq!(keys, vec!["panic_attack", "panic_attack todai", "todai"]);
    }

    proptest! {
        #[test]
        fn term_multiset_size(words in proptest::collection::vec("[a-z]{1,8}", 0..30)) {
            let tokens: Vec<Token> = words.iter().map(|w| Token::word(w)).collect();
            let u = tokens.len();
            let expected = u + u.saturating_sub(1) + u.saturating_sub(2);
            prop_assert_eq!(bag_size(&extract_terms(&tokens)), expected);
        }

        #[test]
        fn tokens_are_lowercase_alphabetic(text in "[ -~]{0,60}") {
            for t in tokenize(&text) {
                prop_assert!(!t.is_empty());
                prop_assert!(t.chars().all(|c| c.is_alphabetic()));
                prop_assert_eq!(t.to_lowercase(), t.clone());
            }
        }
    }
}
