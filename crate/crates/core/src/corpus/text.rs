use std::collections::HashSet;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

pub const MAX_NGRAM_ORDER: usize = 3;

const BUILTIN_STOP_WORDS: &str = include_str!("stop_words_en.txt");

/// Splits text into lowercase maximal runs of Unicode alphanumerics,
/// dropping runs shorter than two characters.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|run| run.chars().nth(1).is_some())
        .map(str::to_lowercase)
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StopWords {
    words: HashSet<String>,
}

impl StopWords {
    /// The bundled 318-term English list.
    pub fn builtin() -> Self {
        Self::parse(BUILTIN_STOP_WORDS)
    }

    pub fn none() -> Self {
        Self::default()
    }

    /// One term per line; blank lines and lines starting with `#` are ignored.
    pub fn parse(list: &str) -> Self {
        let words = list
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_lowercase)
            .collect();
        StopWords { words }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let raw = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::parse(&raw))
    }

    pub fn contains(&self, token: &str) -> bool {
        self.words.contains(token)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NGramStream {
    pub doc_id: String,
    /// Space-joined grams, all unigrams first, then bigrams, then trigrams.
    pub grams: Vec<String>,
}

/// Removes stop words, then slides windows of length `1..=n_max` over the
/// surviving tokens. Duplicates are kept.
pub fn extract_ngrams(doc_id: &str, tokens: &[String], n_max: usize, stop_words: &StopWords) -> Result<NGramStream> {
    if !(1..=MAX_NGRAM_ORDER).contains(&n_max) {
        return Err(Error::NgramOrder(n_max));
    }
    let kept: Vec<&str> = tokens
        .iter()
        .map(String::as_str)
        .filter(|t| !stop_words.contains(t))
        .collect();

    let mut grams = Vec::new();
    for n in 1..=n_max {
        grams.extend(kept.windows(n).map(|w| w.join(" ")));
    }
    Ok(NGramStream {
        doc_id: doc_id.to_owned(),
        grams,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toks(words: &[&str]) -> Vec<String> {
        words.iter().map(|w| w.to_string()).collect()
    }

    #[test]
    fn tokenize_examples() {
        assert_eq!(tokenize("The quick brown fox"), toks(&["the", "quick", "brown", "fox"]));
        assert_eq!(tokenize("C3I systems, 2014!"), toks(&["c3i", "systems", "2014"]));
        assert!(tokenize("a b").is_empty());
        assert!(tokenize("").is_empty());
    }

    #[test]
    fn tokenize_unicode() {
        assert_eq!(tokenize("Économie—Ölçüm x"), toks(&["économie", "ölçüm"]));
    }

    #[test]
    fn builtin_list_has_sentence_stop_words() {
        let sw = StopWords::builtin();
        assert_eq!(sw.len(), 318);
        assert!(sw.contains("the") && sw.contains("over"));
        assert!(!sw.contains("fox"));
    }

    #[test]
    fn parse_override_skips_comments() {
        let sw = StopWords::parse("# header\nFoo\n\n  bar  \n#baz\n");
        assert_eq!(sw.len(), 2);
        assert!(sw.contains("foo") && sw.contains("bar") && !sw.contains("#baz"));
    }

    #[test]
    fn quick_brown_fox_bigrams() {
        let tokens = tokenize("The quick brown fox jumped over the lazy dog");
        let s = extract_ngrams("d", &tokens, 2, &StopWords::builtin()).unwrap();
        let (uni, bi): (Vec<String>, Vec<String>) = s.grams.into_iter().partition(|g| !g.contains(' '));
        assert_eq!(uni.len(), 6);
        assert_eq!(
            bi,
            toks(&["quick brown", "brown fox", "fox jumped", "jumped lazy", "lazy dog"])
        );
    }

    #[test]
    fn single_token_and_all_stop() {
        let s = extract_ngrams("d", &toks(&["alpha"]), 3, &StopWords::none()).unwrap();
        assert_eq!(s.grams, toks(&["alpha"]));
        let s = extract_ngrams("d", &toks(&["the", "over", "and"]), 3, &StopWords::builtin()).unwrap();
        assert!(s.grams.is_empty());
    }

    #[test]
    fn rejects_bad_order() {
        assert!(matches!(
            extract_ngrams("d", &[], 0, &StopWords::none()),
            Err(Error::NgramOrder(0))
        ));
        assert!(extract_ngrams("d", &[], 4, &StopWords::none()).is_err());
    }

    proptest! {
        #[test]
        fn gram_count_and_exclusion(
            words in prop::collection::vec(prop::sample::select(vec!["the", "over", "radar", "optics", "laser", "and", "quantum", "lab"]), 0..40),
            n_max in 1usize..=3,
        ) {
            let tokens = toks(&words);
            let sw = StopWords::parse("the\nover\nand");
            let s = extract_ngrams("d", &tokens, n_max, &sw).unwrap();
            let l = tokens.iter().filter(|t| !sw.contains(t)).count();
            let expected: usize = (1..=n_max).map(|n| (l + 1).saturating_sub(n)).sum();
            prop_assert_eq!(s.grams.len(), expected);
            for g in &s.grams {
                let parts: Vec<&str> = g.split(' ').collect();
                prop_assert!((1..=n_max).contains(&parts.len()));
                prop_assert!(parts.iter().all(|p| !sw.contains(p)));
            }
            let again = extract_ngrams("d", &tokens, n_max, &sw).unwrap();
            prop_assert_eq!(s, again);
        }
    }
}
