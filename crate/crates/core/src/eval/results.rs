use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::scorer::Scorer;
use super::scores::{Member, ScoreSet};
use crate::grammar::MinimalPair;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairResult {
    pub pair_id: String,
    pub score_grammatical: f64,
    pub score_ungrammatical: f64,
    /// `score_grammatical > score_ungrammatical`, strictly.
    pub correct: bool,
    pub tie: bool,
    pub condition: String,
    pub subcondition: String,
    pub features: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub oov_tokens: Vec<String>,
}

impl PairResult {
    pub fn new(pair: &MinimalPair, score_grammatical: f64, score_ungrammatical: f64) -> Self {
        PairResult {
            pair_id: pair.pair_id.clone(),
            score_grammatical,
            score_ungrammatical,
            correct: score_grammatical > score_ungrammatical,
            tie: score_grammatical == score_ungrammatical,
            condition: pair.condition.clone(),
            subcondition: pair.subcondition.clone(),
            features: pair.features.clone(),
            oov_tokens: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissingScore {
    pub pair_id: String,
    pub condition: String,
    pub subcondition: String,
    pub members: Vec<Member>,
}

#[derive(Debug, Clone, Default)]
pub struct EvalRun {
    pub pairs_input: usize,
    pub results: Vec<PairResult>,
    pub missing: Vec<MissingScore>,
}

impl EvalRun {
    pub fn pairs_scored(&self) -> usize {
        self.results.len()
    }

    pub fn pairs_missing(&self) -> usize {
        self.missing.len()
    }

    pub fn ties(&self) -> usize {
        self.results.iter().filter(|r| r.tie).count()
    }

    pub fn correct(&self) -> usize {
        self.results.iter().filter(|r| r.correct).count()
    }
}

/// Anything that can supply a score for each member of a pair.
pub trait MemberScores: Sync {
    fn member_score(&self, pair: &MinimalPair, member: Member) -> Option<f64>;

    fn oov_tokens(&self, _pair: &MinimalPair) -> Vec<String> {
        Vec::new()
    }
}

fn member_tokens(pair: &MinimalPair, member: Member) -> &[String] {
    match member {
        Member::Grammatical => &pair.grammatical,
        Member::Ungrammatical => &pair.ungrammatical,
    }
}

impl<S: Scorer> MemberScores for S {
    fn member_score(&self, pair: &MinimalPair, member: Member) -> Option<f64> {
        Some(self.score(member_tokens(pair, member)).logprob)
    }

    fn oov_tokens(&self, pair: &MinimalPair) -> Vec<String> {
        let mut out = Scorer::oov_tokens(self, &pair.grammatical);
        for t in Scorer::oov_tokens(self, &pair.ungrammatical) {
            if !out.contains(&t) {
                out.push(t);
            }
        }
        out
    }
}

impl MemberScores for ScoreSet {
    fn member_score(&self, pair: &MinimalPair, member: Member) -> Option<f64> {
        self.member(&pair.pair_id, member).map(|r| r.logprob)
    }
}

/// Scores every pair; pairs lacking a member score are listed in
/// [`EvalRun::missing`] instead of being dropped. Work is spread over the
/// rayon pool and output order follows input order.
pub fn evaluate<M: MemberScores + ?Sized>(source: &M, pairs: &[MinimalPair]) -> EvalRun {
    let outcomes: Vec<Result<PairResult, MissingScore>> = pairs
        .par_iter()
        .map(|pair| {
            let g = source.member_score(pair, Member::Grammatical);
            let u = source.member_score(pair, Member::Ungrammatical);
            match (g, u) {
                (Some(g), Some(u)) => {
                    let mut r = PairResult::new(pair, g, u);
                    r.oov_tokens = source.oov_tokens(pair);
                    Ok(r)
                }
                _ => Err(MissingScore {
                    pair_id: pair.pair_id.clone(),
                    condition: pair.condition.clone(),
                    subcondition: pair.subcondition.clone(),
                    members: [(Member::Grammatical, g), (Member::Ungrammatical, u)]
                        .into_iter()
                        .filter(|(_, s)| s.is_none())
                        .map(|(m, _)| m)
                        .collect(),
                }),
            }
        })
        .collect();
    let mut run = EvalRun {
        pairs_input: pairs.len(),
        ..EvalRun::default()
    };
    for o in outcomes {
        match o {
            Ok(r) => run.results.push(r),
            Err(m) => run.missing.push(m),
        }
    }
    run
}

/// Scores pairs with a model scorer, which never has missing members.
pub fn score_pairs<S: Scorer>(scorer: &S, pairs: &[MinimalPair]) -> Vec<PairResult> {
    evaluate(scorer, pairs).results
}
