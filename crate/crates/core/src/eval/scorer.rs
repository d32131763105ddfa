use std::f64::consts::LN_10;

use crate::error::{Error, Result};
use crate::ngram::NGramModel;

#[derive(Debug, Clone, PartialEq)]
pub struct SentenceScore {
    /// Natural-log probability of the whole sentence.
    pub logprob: f64,
    /// One entry per token plus a final end-of-sentence entry, if available.
    pub token_logprobs: Option<Vec<f64>>,
}

pub trait Scorer: Send + Sync {
    fn score(&self, tokens: &[String]) -> SentenceScore;

    /// Tokens the scorer cannot represent and scores as unknown.
    fn oov_tokens(&self, _tokens: &[String]) -> Vec<String> {
        Vec::new()
    }
}

impl Scorer for NGramModel {
    fn score(&self, tokens: &[String]) -> SentenceScore {
        let per_token: Vec<f64> = self.token_log10probs(tokens).into_iter().map(|lp| lp * LN_10).collect();
        SentenceScore {
            logprob: per_token.iter().sum(),
            token_logprobs: Some(per_token),
        }
    }

    fn oov_tokens(&self, tokens: &[String]) -> Vec<String> {
        NGramModel::oov_tokens(self, tokens)
    }
}

impl<S: Scorer + ?Sized> Scorer for &S {
    fn score(&self, tokens: &[String]) -> SentenceScore {
        (**self).score(tokens)
    }

    fn oov_tokens(&self, tokens: &[String]) -> Vec<String> {
        (**self).oov_tokens(tokens)
    }
}

fn unigram_terms(unigram: &dyn Scorer, tokens: &[String]) -> Result<Vec<f64>> {
    let per_token = unigram
        .score(tokens)
        .token_logprobs
        .ok_or_else(|| Error::InvalidArgument("unigram scorer must report per-token log-probabilities".into()))?;
    Ok(per_token[..tokens.len()].to_vec())
}

/// `logprob(tokens) - Σ_w unigram logprob(w)`, summing over the words only
/// (the end-of-sentence term is not subtracted).
pub fn normalized_score(scorer: &dyn Scorer, unigram: &dyn Scorer, tokens: &[String]) -> Result<f64> {
    let uni: f64 = unigram_terms(unigram, tokens)?.iter().sum();
    Ok(scorer.score(tokens).logprob - uni)
}

/// A scorer whose score is [`normalized_score`]. Per-token entries are the
/// main scorer's terms minus the unigram terms, so they still sum to the
/// total.
pub struct NormalizedScorer<A, B> {
    pub main: A,
    pub unigram: B,
}

impl<A: Scorer, B: Scorer> Scorer for NormalizedScorer<A, B> {
    fn score(&self, tokens: &[String]) -> SentenceScore {
        let main = self.main.score(tokens);
        let uni = self
            .unigram
            .score(tokens)
            .token_logprobs
            .expect("unigram scorer reports per-token log-probabilities");
        let uni_sum: f64 = uni[..tokens.len()].iter().sum();
        let token_logprobs = main.token_logprobs.map(|m| {
            m.iter()
                .enumerate()
                .map(|(i, lp)| if i < tokens.len() { lp - uni[i] } else { *lp })
                .collect()
        });
        SentenceScore {
            logprob: main.logprob - uni_sum,
            token_logprobs,
        }
    }

    fn oov_tokens(&self, tokens: &[String]) -> Vec<String> {
        self.main.oov_tokens(tokens)
    }
}

/// Per-token natural-log probabilities, one per token plus the end entry.
pub fn word_trace(scorer: &dyn Scorer, tokens: &[String]) -> Result<Vec<f64>> {
    scorer
        .score(tokens)
        .token_logprobs
        .ok_or_else(|| Error::InvalidArgument("scorer does not report per-token log-probabilities".into()))
}
