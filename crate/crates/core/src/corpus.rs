//! Line-oriented corpus reading and vocabulary construction.

use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

pub const UNK: &str = "<unk>";
pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";

pub const UNK_ID: u32 = 0;
pub const BOS_ID: u32 = 1;
pub const EOS_ID: u32 = 2;

/// Whitespace split plus lowercasing. The corpus is assumed pre-tokenized.
pub fn tokenize(line: &str) -> Vec<String> {
    line.split_whitespace().map(|t| t.to_lowercase()).collect()
}

/// Token/id bijection with dense ids. Ids 0..3 are `<unk>`, `<s>`, `</s>`.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocab {
    tokens: Vec<String>,
    ids: HashMap<String, u32>,
    counts: Vec<u64>,
}

impl Default for Vocab {
    fn default() -> Self {
        Self::new()
    }
}

impl Vocab {
    /// Vocabulary holding only the reserved markers.
    pub fn new() -> Self {
        let mut v = Vocab {
            tokens: Vec::new(),
            ids: HashMap::new(),
            counts: Vec::new(),
        };
        for t in [UNK, BOS, EOS] {
            v.insert(t, 0);
        }
        v
    }

    fn insert(&mut self, token: &str, count: u64) -> u32 {
        if let Some(&id) = self.ids.get(token) {
            self.counts[id as usize] += count;
            return id;
        }
        let id = self.tokens.len() as u32;
        self.tokens.push(token.to_string());
        self.ids.insert(token.to_string(), id);
        self.counts.push(count);
        id
    }

    /// Builds from token lists, most frequent first, ties broken by token.
    /// Tokens seen fewer than `min_count` times fold into `<unk>`.
    pub fn build<I, S>(sentences: I, min_count: u64) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[String]>,
    {
        if min_count < 1 {
            return Err(Error::InvalidArgument("min_count must be at least 1".into()));
        }
        let mut freq: HashMap<String, u64> = HashMap::new();
        let mut sentences_seen = 0usize;
        for s in sentences {
            let s = s.as_ref();
            if s.is_empty() {
                continue;
            }
            sentences_seen += 1;
            for t in s {
                *freq.entry(t.clone()).or_default() += 1;
            }
        }
        if sentences_seen == 0 {
            return Err(Error::EmptyCorpus);
        }
        let mut sorted: Vec<(String, u64)> = freq.into_iter().collect();
        sorted.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));

        let mut vocab = Vocab::new();
        for (token, count) in sorted {
            if [UNK, BOS, EOS].contains(&token.as_str()) {
                continue;
            }
            if count >= min_count {
                vocab.insert(&token, count);
            } else {
                vocab.counts[UNK_ID as usize] += count;
            }
        }
        vocab.counts[EOS_ID as usize] = sentences_seen as u64;
        Ok(vocab)
    }

    /// Vocabulary over an explicit token list (e.g. an ARPA unigram section).
    pub fn from_tokens<'a>(tokens: impl IntoIterator<Item = &'a str>) -> Self {
        let mut v = Vocab::new();
        for t in tokens {
            v.insert(t, 0);
        }
        v
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.ids.contains_key(token)
    }

    pub fn get(&self, token: &str) -> Option<u32> {
        self.ids.get(token).copied()
    }

    /// Id of `token`, or `<unk>` for out-of-vocabulary tokens.
    pub fn id(&self, token: &str) -> u32 {
        self.get(token).unwrap_or(UNK_ID)
    }

    pub fn token(&self, id: u32) -> &str {
        &self.tokens[id as usize]
    }

    /// Training frequency (for `<unk>`, the total of folded tokens).
    pub fn count(&self, id: u32) -> u64 {
        self.counts[id as usize]
    }

    pub fn ids(&self) -> impl Iterator<Item = u32> {
        0..self.tokens.len() as u32
    }

    pub fn encode(&self, tokens: &[String]) -> Vec<u32> {
        tokens.iter().map(|t| self.id(t)).collect()
    }

    /// Tokens of `wanted` that this vocabulary does not contain.
    pub fn missing<'a>(&self, wanted: impl IntoIterator<Item = &'a String>) -> BTreeSet<String> {
        wanted.into_iter().filter(|t| !self.contains(t)).cloned().collect()
    }
}

/// Lazily reads a one-sentence-per-line corpus. Blank lines are skipped.
pub struct CorpusStream<R> {
    lines: std::io::Lines<R>,
    path: PathBuf,
}

impl CorpusStream<BufReader<File>> {
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let file = File::open(&path).map_err(|e| Error::io(&path, e))?;
        Ok(CorpusStream {
            lines: BufReader::new(file).lines(),
            path,
        })
    }
}

impl<R: BufRead> CorpusStream<R> {
    pub fn from_reader(reader: R) -> Self {
        CorpusStream {
            lines: reader.lines(),
            path: PathBuf::from("<reader>"),
        }
    }
}

impl<R: BufRead> Iterator for CorpusStream<R> {
    type Item = Result<Vec<String>>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            match self.lines.next()? {
                Ok(line) => {
                    let tokens = tokenize(&line);
                    if !tokens.is_empty() {
                        return Some(Ok(tokens));
                    }
                }
                Err(e) => return Some(Err(Error::io(&self.path, e))),
            }
        }
    }
}

/// Reads a whole corpus file into memory.
pub fn read_corpus(path: impl AsRef<Path>) -> Result<Vec<Vec<String>>> {
    CorpusStream::open(path)?.collect()
}

/// Splits in-memory lines the same way the file stream does.
pub fn corpus_from_lines<'a>(lines: impl IntoIterator<Item = &'a str>) -> Vec<Vec<String>> {
    lines.into_iter().map(tokenize).filter(|t| !t.is_empty()).collect()
}
