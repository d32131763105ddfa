//! Order-n backoff language models with interpolated modified Kneser-Ney
//! smoothing and ARPA serialization.
//!
//! Sentences are padded with `order - 1` start markers and terminated with an
//! end marker, so every predicted token has a full-length history. Lower-order
//! distributions use continuation counts (distinct left extensions), except for
//! n-grams beginning with the start marker, whose left context is always
//! padding and which therefore keep their raw counts.

mod arpa;
mod counts;
mod estimate;
mod model;

pub use counts::{count_ngrams, CountTable, Ngram};
pub use estimate::{discounts_from_counts_of_counts, estimate, Discounts, FALLBACK_DISCOUNT};
pub use model::{Entry, NGramModel};

use crate::corpus::Vocab;
use crate::error::Result;

/// Trains a model directly from tokenized sentences.
pub fn train(sentences: &[Vec<String>], order: usize, min_count: u64) -> Result<NGramModel> {
    let vocab = Vocab::build(sentences, min_count)?;
    let counts = count_ngrams(sentences, &vocab, order)?;
    estimate(&counts)
}
