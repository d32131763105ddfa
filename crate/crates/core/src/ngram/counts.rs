use std::collections::HashMap;

use crate::corpus::{Vocab, BOS_ID, EOS_ID};
use crate::error::{Error, Result};

pub type Ngram = Box<[u32]>;

/// Raw n-gram counts for every order up to `order`. `tables[k - 1]` holds the
/// k-grams.
#[derive(Debug, Clone)]
pub struct CountTable {
    pub order: usize,
    pub vocab: Vocab,
    pub tables: Vec<HashMap<Ngram, u64>>,
}

impl CountTable {
    pub fn get(&self, ngram: &[u32]) -> u64 {
        if ngram.is_empty() || ngram.len() > self.order {
            return 0;
        }
        self.tables[ngram.len() - 1].get(ngram).copied().unwrap_or(0)
    }

    /// Looks an n-gram up by its tokens.
    pub fn get_tokens(&self, tokens: &[&str]) -> u64 {
        let ids: Vec<u32> = tokens.iter().map(|t| self.vocab.id(t)).collect();
        self.get(&ids)
    }

    /// Number of k-grams seen exactly r times, for r = 1..=4.
    pub fn counts_of_counts(&self, k: usize) -> [u64; 4] {
        let mut n = [0u64; 4];
        for &c in self.tables[k - 1].values() {
            if (1..=4).contains(&c) {
                n[c as usize - 1] += 1;
            }
        }
        n
    }
}

/// Encodes `tokens` with start padding and the end marker.
pub(crate) fn padded(vocab: &Vocab, tokens: &[String], order: usize) -> Vec<u32> {
    let mut seq = vec![BOS_ID; order.saturating_sub(1)];
    seq.extend(tokens.iter().map(|t| vocab.id(t)));
    seq.push(EOS_ID);
    seq
}

pub fn count_ngrams<I, S>(sentences: I, vocab: &Vocab, order: usize) -> Result<CountTable>
where
    I: IntoIterator<Item = S>,
    S: AsRef<[String]>,
{
    if order < 1 {
        return Err(Error::InvalidArgument("order must be at least 1".into()));
    }
    let mut tables: Vec<HashMap<Ngram, u64>> = vec![HashMap::new(); order];
    for sentence in sentences {
        let sentence = sentence.as_ref();
        if sentence.is_empty() {
            continue;
        }
        let seq = padded(vocab, sentence, order);
        for end in order - 1..seq.len() {
            for k in 1..=order {
                let gram = &seq[end + 1 - k..=end];
                *tables[k - 1].entry(gram.into()).or_default() += 1;
            }
        }
    }
    Ok(CountTable {
        order,
        vocab: vocab.clone(),
        tables,
    })
}
