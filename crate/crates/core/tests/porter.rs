use riskdomain::text::porter_stem;

/// Reference stems for the frozen vocabulary, one `word<TAB>stem` per line.
const VOCABULARY: &str = include_str!("data/porter_vocabulary.tsv");

#[test]
fn reference_vocabulary_agrees_fully() {
    let mut total = 0;
    let mut wrong = Vec::new();
    for line in VOCABULARY.lines() {
        let (word, stem) = line.split_once('\t').expect("word<TAB>stem");
        total += 1;
        let got = porter_stem(word);
        if got != stem {
            wrong.push(format!("{word}: expected {stem}, got {got}"));
        }
    }
    assert!(total > 8000, "vocabulary has {total} entries");
    assert!(
        wrong.is_empty(),
        "{} of {total} differ:\n{}",
        wrong.len(),
        wrong.join("\n")
    );
}
