//! Forced-choice evaluation: a pair is correct iff its grammatical member
//! scores strictly higher. Scores are natural-log probabilities throughout
//! this module; the n-gram model's log10 values are converted at the
//! [`Scorer`] boundary.

mod aggregate;
mod results;
mod scorer;
mod scores;

pub use aggregate::{aggregate, AccuracyRow, AccuracyTable, Grouping, ABSENT};
pub use results::{evaluate, score_pairs, EvalRun, MemberScores, MissingScore, PairResult};
pub use scorer::{normalized_score, word_trace, NormalizedScorer, Scorer, SentenceScore};
pub use scores::{
    ingest_scores, load_scores, sentence_id, IngestReport, Member, RejectedRecord, ScoreRecord, ScoreSet,
};
