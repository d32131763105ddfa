//! Human forced-choice experiment. Sessions walk a fixed trial list and
//! every judgment goes to an append-only log, from which results are
//! aggregated after attention-based exclusion.

mod http;
mod lists;
mod service;
mod store;

pub use http::{router, serve};
pub use lists::{build_lists, ListConfig, Trial, TrialList};
pub use service::{
    Ack, Choice, ExclusionReport, JudgeService, ResultsReport, ServiceError, SessionExclusion, SessionInfo, TrialView,
    MAX_ATTENTION_ERRORS,
};
pub use store::{Event, Judgment, JudgmentStore, Session};
