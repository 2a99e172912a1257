//! JSON-lines corpus, gold-standard and annotation files, and the JSON
//! lexicon file.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{validate_labels, Domain, DomainEntry, KeywordLexicon, Paragraph};
use crate::error::{Error, Result};

/// One gold-standard line: `{"id": ..., "labels": [...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldRecord {
    pub id: String,
    pub labels: Vec<Domain>,
}

/// One annotation line: `{"id": ..., "annotations": [[...], [...], [...]]}`,
/// one ordered label list per annotator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub id: String,
    pub annotations: Vec<Vec<Domain>>,
}

/// Reads a JSON-lines file, skipping blank lines.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let value = serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(value);
    }
    Ok(out)
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for item in items {
        let line = serde_json::to_string(item).map_err(|e| Error::data(e.to_string()))?;
        writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn check_unique_ids<'a>(path: &Path, ids: impl Iterator<Item = &'a str>) -> Result<()> {
    let mut seen = HashSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(Error::data(format!("{}: duplicate id `{id}`", path.display())));
        }
    }
    Ok(())
}

pub fn read_paragraphs(path: &Path) -> Result<Vec<Paragraph>> {
    let paragraphs: Vec<Paragraph> = read_jsonl(path)?;
    check_unique_ids(path, paragraphs.iter().map(|p| p.id.as_str()))?;
    if let Some(p) = paragraphs.iter().find(|p| p.text.is_empty()) {
        return Err(Error::data(format!(
            "{}: paragraph `{}` has empty text",
            path.display(),
            p.id
        )));
    }
    Ok(paragraphs)
}

pub fn read_gold(path: &Path) -> Result<Vec<GoldRecord>> {
    let gold: Vec<GoldRecord> = read_jsonl(path)?;
    check_unique_ids(path, gold.iter().map(|g| g.id.as_str()))?;
    for g in &gold {
        validate_labels(&g.labels).map_err(|e| Error::data(format!("{}: record `{}`: {e}", path.display(), g.id)))?;
    }
    Ok(gold)
}

pub fn read_annotations(path: &Path) -> Result<Vec<AnnotationRecord>> {
    let records: Vec<AnnotationRecord> = read_jsonl(path)?;
    check_unique_ids(path, records.iter().map(|r| r.id.as_str()))?;
    Ok(records)
}

pub fn read_lexicon(path: &Path) -> Result<KeywordLexicon> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let raw: BTreeMap<Domain, DomainEntry> = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        message: e.to_string(),
    })?;
    KeywordLexicon::new(raw)
}

pub fn write_lexicon(path: &Path, lexicon: &KeywordLexicon) -> Result<()> {
    let text = serde_json::to_string_pretty(lexicon.entries()).map_err(|e| Error::data(e.to_string()))?;
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Source;

    #[test]
    fn paragraph_lines_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.jsonl");
        let ps = vec![Paragraph {
            id: "a".into(),
            text: "Pt. calm.".into(),
            source: Source::Target,
        }];
        write_jsonl(&path, &ps).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "{\"id\":\"a\",\"text\":\"Pt. calm.\",\"source\":\"target\"}\n");
        assert_eq!(read_paragraphs(&path).unwrap(), ps);
    }

    #[test]
    fn bad_lines_report_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.jsonl");
        std::fs::write(
            &path,
            "{\"id\":\"a\",\"labels\":[\"Mood\"]}\n\n{\"id\":\"b\",\"labels\":[\"Mania\"]}\n",
        )
        .unwrap();
        let err = read_gold(&path).unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }

    #[test]
    fn gold_validates_labels_and_ids() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.jsonl");
        std::fs::write(&path, "{\"id\":\"a\",\"labels\":[\"Mood\",\"Other\"]}\n").unwrap();
        assert!(read_gold(&path).is_err());
        std::fs::write(
            &path,
            "{\"id\":\"a\",\"labels\":[\"Mood\"]}\n{\"id\":\"a\",\"labels\":[\"Mood\"]}\n",
        )
        .unwrap();
        assert!(read_gold(&path).is_err());
        std::fs::write(&path, "{\"id\":\"a\",\"labels\":[\"Thought Process\",\"Mood\"]}\n").unwrap();
        assert_eq!(
            read_gold(&path).unwrap()[0].labels,
            vec![Domain::ThoughtProcess, Domain::Mood]
        );
    }

    #[test]
    fn lexicon_file_format() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("lex.json");
        std::fs::write(
            &path,
            r#"{"Substance": {"keywords": ["cocaine"], "keyphrases": ["alcohol use"]},
                "Thought Content": {"keywords": ["delusion"]}}"#,
        )
        .unwrap();
        let lex = read_lexicon(&path).unwrap();
        assert_eq!(lex.entry(Domain::ThoughtContent).unwrap().keywords, vec!["delusion"]);
        write_lexicon(&path, &lex).unwrap();
        assert_eq!(read_lexicon(&path).unwrap(), lex);
    }

    #[test]
    fn missing_file_names_path() {
        let err = read_paragraphs(Path::new("/nonexistent/corpus.jsonl")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/corpus.jsonl"));
    }
}
