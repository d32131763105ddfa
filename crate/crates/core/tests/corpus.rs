use std::io::Write;

use syneval::corpus::{corpus_from_lines, read_corpus, tokenize, CorpusStream, Vocab, EOS, UNK, UNK_ID};
use syneval::grammar::Grammar;

const SAMPLE: &str = include_str!("../data/sample_corpus.txt");

#[test]
fn file_and_memory_readers_agree() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    write!(
        file,
        "The Author laughs .\n\n   \nno  authors have ever been famous .\r\n"
    )
    .unwrap();
    let from_file = read_corpus(file.path()).unwrap();
    let from_lines = corpus_from_lines(["The Author laughs .", "", "   ", "no  authors have ever been famous ."]);
    assert_eq!(from_file, from_lines);
    assert_eq!(from_file[0], ["the", "author", "laughs", "."]);
    assert_eq!(from_file.len(), 2);
    assert!(read_corpus(file.path().with_extension("missing")).is_err());
}

#[test]
fn stream_is_lazy_over_readers() {
    let mut stream = CorpusStream::from_reader(SAMPLE.as_bytes());
    let first = stream.next().unwrap().unwrap();
    assert_eq!(first, tokenize(SAMPLE.lines().find(|l| !l.trim().is_empty()).unwrap()));
    assert_eq!(stream.count() + 1, corpus_from_lines(SAMPLE.lines()).len());
}

#[test]
fn vocabulary_order_and_counts() {
    let corpus = corpus_from_lines(["b a a .", "c a .", "b ."]);
    let v = Vocab::build(&corpus, 1).unwrap();
    let order: Vec<&str> = v.ids().map(|id| v.token(id)).collect();
    assert_eq!(order, ["<unk>", "<s>", "</s>", ".", "a", "b", "c"]);
    assert_eq!(v.count(v.id("a")), 3);
    assert_eq!(v.count(v.id(EOS)), 3);
    let v2 = Vocab::build(&corpus, 3).unwrap();
    assert!(!v2.contains("b"));
    assert_eq!(v2.count(UNK_ID), 3);
    assert_eq!(v2.encode(&tokenize("a b zz")), [v2.id("a"), UNK_ID, UNK_ID]);
    assert_eq!(v2.token(UNK_ID), UNK);
}

#[test]
fn sample_corpus_coverage_of_the_lexicon() {
    let g = Grammar::bundled("full.grammar").unwrap();
    let lexicon = g.lexicon.tokens();
    let v = Vocab::build(corpus_from_lines(SAMPLE.lines()), 1).unwrap();
    let missing = v.missing(&lexicon);
    assert!(missing.len() < lexicon.len());
    assert!(missing.contains("ever"));
    for word in ["the", "author", "laughs", "no", "himself"] {
        assert!(v.contains(word), "{word} missing from sample corpus");
    }
    for word in &missing {
        assert!(lexicon.contains(word));
        assert!(!v.contains(word));
    }
    let covered = lexicon.len() - missing.len();
    assert_eq!(covered, lexicon.iter().filter(|t| v.contains(t)).count());
}
