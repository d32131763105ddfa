//! Targeted syntactic evaluation of language models with grammar-generated
//! minimal pairs. Models are compared by which member of each pair they
//! score higher; the `judge` module collects the same choice from people.

pub mod corpus;
pub mod error;
pub mod eval;
pub mod grammar;
pub mod jsonl;
pub mod judge;
pub mod ngram;
pub mod report;

pub use error::{Error, Result};
