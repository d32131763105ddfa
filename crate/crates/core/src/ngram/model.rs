use std::collections::HashMap;

use super::counts::Ngram;
use super::estimate::Discounts;
use crate::corpus::{Vocab, BOS_ID, EOS_ID, UNK_ID};
use crate::error::{Error, Result};

/// One stored n-gram: its conditional log10 probability and, if it is also a
/// context, the log10 backoff weight applied to lower-order estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entry {
    pub log10_prob: f64,
    pub log10_backoff: f64,
}

impl Entry {
    pub fn new(log10_prob: f64, log10_backoff: f64) -> Self {
        Entry {
            log10_prob,
            log10_backoff,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NGramModel {
    order: usize,
    vocab: Vocab,
    /// `tables[k - 1]` holds k-grams.
    tables: Vec<HashMap<Ngram, Entry>>,
    /// Empty for models read from ARPA.
    discounts: Vec<Discounts>,
}

impl NGramModel {
    /// Conventional floor for events the model cannot predict.
    pub const NO_PROB: f64 = -99.0;

    pub(crate) fn from_parts(
        order: usize,
        vocab: Vocab,
        tables: Vec<HashMap<Ngram, Entry>>,
        discounts: Vec<Discounts>,
    ) -> Self {
        NGramModel {
            order,
            vocab,
            tables,
            discounts,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    pub fn discounts(&self) -> &[Discounts] {
        &self.discounts
    }

    pub(crate) fn tables(&self) -> &[HashMap<Ngram, Entry>] {
        &self.tables
    }

    pub fn entry(&self, ngram: &[u32]) -> Option<&Entry> {
        if ngram.is_empty() || ngram.len() > self.order {
            return None;
        }
        self.tables[ngram.len() - 1].get(ngram)
    }

    pub fn ngram_count(&self, k: usize) -> usize {
        self.tables.get(k.wrapping_sub(1)).map_or(0, HashMap::len)
    }

    /// Every history the model has a distribution for: the empty context
    /// plus each proper prefix of a stored n-gram, shortest first.
    pub fn contexts(&self) -> Vec<Vec<u32>> {
        let mut out = vec![Vec::new()];
        for table in &self.tables[1..] {
            let mut level: Vec<Vec<u32>> = table
                .keys()
                .map(|g| g[..g.len() - 1].to_vec())
                .collect::<std::collections::BTreeSet<_>>()
                .into_iter()
                .collect();
            out.append(&mut level);
        }
        out
    }

    /// log10 P(w | context) with standard backoff. Only the final
    /// `order - 1` ids of `context` are used.
    pub fn log10_cond_ids(&self, context: &[u32], w: u32) -> f64 {
        let keep = context.len().min(self.order - 1);
        let ctx = &context[context.len() - keep..];
        let mut key: Vec<u32> = Vec::with_capacity(ctx.len() + 1);
        let mut backoff = 0.0;
        for start in 0..=ctx.len() {
            let h = &ctx[start..];
            key.clear();
            key.extend_from_slice(h);
            key.push(w);
            if let Some(e) = self.tables[key.len() - 1].get(key.as_slice()) {
                return backoff + e.log10_prob;
            }
            if !h.is_empty() {
                backoff += self.tables[h.len() - 1].get(h).map_or(0.0, |e| e.log10_backoff);
            }
        }
        Self::NO_PROB
    }

    /// P(word | context) for string tokens; unknown tokens map to `<unk>`.
    pub fn cond_prob(&self, context: &[&str], word: &str) -> f64 {
        let ids: Vec<u32> = context.iter().map(|t| self.vocab.id(t)).collect();
        10f64.powf(self.log10_cond_ids(&ids, self.vocab.id(word)))
    }

    /// log10 probability of each token and of the end marker, in order.
    pub fn token_log10probs(&self, tokens: &[String]) -> Vec<f64> {
        let mut history = vec![BOS_ID; self.order - 1];
        let mut out = Vec::with_capacity(tokens.len() + 1);
        for id in tokens.iter().map(|t| self.vocab.id(t)).chain([EOS_ID]) {
            out.push(self.log10_cond_ids(&history, id));
            history.push(id);
        }
        out
    }

    /// Total log10 probability including the end marker.
    pub fn sentence_logprob(&self, tokens: &[String]) -> f64 {
        self.token_log10probs(tokens).iter().sum()
    }

    /// Tokens of `tokens` mapped to `<unk>`.
    pub fn oov_tokens(&self, tokens: &[String]) -> Vec<String> {
        tokens
            .iter()
            .filter(|t| self.vocab.get(t).is_none_or(|id| id == UNK_ID))
            .cloned()
            .collect()
    }

    /// 10^(-L/N) over all predicted tokens, end markers included.
    pub fn perplexity<S: AsRef<[String]>>(&self, sentences: &[S]) -> Result<f64> {
        let mut total = 0.0;
        let mut n = 0usize;
        for s in sentences {
            let lp = self.token_log10probs(s.as_ref());
            n += lp.len();
            total += lp.iter().sum::<f64>();
        }
        if n == 0 {
            return Err(Error::EmptyCorpus);
        }
        Ok(10f64.powf(-total / n as f64))
    }
}
