use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::Member;
use crate::grammar::{Grammar, MinimalPair};
use crate::report::display_pair_member;

/// Which condition screens participants and how many of its items each list
/// carries. The attention condition's own subconditions are not sampled
/// separately: its items are spread evenly over them instead, and the first
/// one doubles as the condition's representative.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ListConfig {
    pub n_lists: usize,
    pub seed: u64,
    pub attention_condition: String,
    pub attention_items: usize,
}

impl Default for ListConfig {
    fn default() -> Self {
        ListConfig {
            n_lists: 10,
            seed: 0,
            attention_condition: "simple_agrmt".into(),
            attention_items: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trial {
    /// 1-based position in the list.
    pub trial_id: u32,
    pub pair_id: String,
    pub condition: String,
    pub subcondition: String,
    pub features: BTreeMap<String, String>,
    pub top: Member,
    pub attention: bool,
    pub grammatical: String,
    pub ungrammatical: String,
}

impl Trial {
    pub fn sentence_top(&self) -> &str {
        match self.top {
            Member::Grammatical => &self.grammatical,
            Member::Ungrammatical => &self.ungrammatical,
        }
    }

    pub fn sentence_bottom(&self) -> &str {
        match self.top {
            Member::Grammatical => &self.ungrammatical,
            Member::Ungrammatical => &self.grammatical,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialList {
    /// 1-based.
    pub list_id: u32,
    pub seed: u64,
    pub trials: Vec<Trial>,
}

impl TrialList {
    pub fn grammatical_on_top(&self) -> usize {
        self.trials.iter().filter(|t| t.top == Member::Grammatical).count()
    }
}

/// Builds `config.n_lists` lists. Every non-attention subcondition
/// contributes one pair per list, drawn from a seeded shuffle of its pool so
/// that lists share no pair while the pool lasts. Trial order and top/bottom
/// placement are shuffled per list, with the grammatical member on top in
/// exactly half the trials (rounded down).
pub fn build_lists(grammar: &Grammar, pairs: &[MinimalPair], config: &ListConfig) -> Result<Vec<TrialList>> {
    if config.n_lists == 0 {
        return Err(Error::InvalidArgument("n_lists must be at least 1".into()));
    }
    let mut pools: BTreeMap<(&str, &str), Vec<&MinimalPair>> = BTreeMap::new();
    for p in pairs {
        pools.entry((&p.condition, &p.subcondition)).or_default().push(p);
    }
    let subconditions = grammar.enumerate_conditions();
    for (c, s) in &subconditions {
        if !pools.contains_key(&(c.as_str(), s.as_str())) {
            return Err(Error::InvalidArgument(format!("subcondition {c}/{s} has no pairs")));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut shuffled: Vec<((String, String), Vec<&MinimalPair>)> = Vec::new();
    for key in &subconditions {
        let mut pool = pools[&(key.0.as_str(), key.1.as_str())].clone();
        pool.shuffle(&mut rng);
        shuffled.push((key.clone(), pool));
    }
    let attention_pools: Vec<&Vec<&MinimalPair>> = shuffled
        .iter()
        .filter(|((c, _), _)| *c == config.attention_condition)
        .map(|(_, pool)| pool)
        .collect();
    if config.attention_items > 0 && attention_pools.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "attention condition {:?} has no subconditions",
            config.attention_condition
        )));
    }

    let mut lists = Vec::with_capacity(config.n_lists);
    for i in 0..config.n_lists {
        let mut chosen: Vec<(&MinimalPair, bool)> = Vec::new();
        for ((c, _), pool) in &shuffled {
            if *c != config.attention_condition {
                chosen.push((pool[i % pool.len()], false));
            }
        }
        let strata = attention_pools.len().max(1);
        for j in 0..config.attention_items {
            let pool = attention_pools[j % strata];
            let draw = i * config.attention_items.div_ceil(strata) + j / strata;
            chosen.push((pool[draw % pool.len()], true));
        }
        chosen.shuffle(&mut rng);

        let mut on_top: Vec<bool> = (0..chosen.len()).map(|k| k < chosen.len() / 2).collect();
        on_top.shuffle(&mut rng);

        let trials = chosen
            .into_iter()
            .zip(on_top)
            .enumerate()
            .map(|(k, ((p, attention), top))| Trial {
                trial_id: k as u32 + 1,
                pair_id: p.pair_id.clone(),
                condition: p.condition.clone(),
                subcondition: p.subcondition.clone(),
                features: p.features.clone(),
                top: if top {
                    Member::Grammatical
                } else {
                    Member::Ungrammatical
                },
                attention,
                grammatical: display_pair_member(p, Member::Grammatical),
                ungrammatical: display_pair_member(p, Member::Ungrammatical),
            })
            .collect();
        lists.push(TrialList {
            list_id: i as u32 + 1,
            seed: config.seed,
            trials,
        });
    }
    Ok(lists)
}
