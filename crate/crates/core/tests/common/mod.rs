//! Test-only reference implementations. Nothing here calls into the
//! estimator; counts are re-derived from raw padded text.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";
pub const UNK: &str = "<unk>";

pub fn sentences(lines: &[&str]) -> Vec<Vec<String>> {
    lines
        .iter()
        .map(|l| l.split_whitespace().map(str::to_string).collect::<Vec<_>>())
        .filter(|s: &Vec<String>| !s.is_empty())
        .collect()
}

/// Brute-force interpolated modified Kneser-Ney over a corpus with every
/// token in vocabulary.
pub struct KnOracle {
    pub order: usize,
    /// Prediction space: every type except the start marker.
    pub vocab: Vec<String>,
    raw: HashMap<Vec<String>, u64>,
    discounts: Vec<(f64, f64, f64, bool)>,
}

impl KnOracle {
    pub fn new(corpus: &[Vec<String>], order: usize) -> Self {
        let mut types: BTreeSet<String> = corpus.iter().flatten().cloned().collect();
        types.insert(EOS.into());
        types.insert(UNK.into());
        let mut raw = HashMap::new();
        for s in corpus {
            let mut seq: Vec<String> = vec![BOS.to_string(); order - 1];
            seq.extend(s.iter().cloned());
            seq.push(EOS.into());
            for end in (order - 1)..seq.len() {
                for k in 1..=order {
                    *raw.entry(seq[end + 1 - k..=end].to_vec()).or_insert(0) += 1;
                }
            }
        }
        let mut oracle = KnOracle {
            order,
            vocab: types.into_iter().collect(),
            raw,
            discounts: Vec::new(),
        };
        oracle.discounts = (1..=order).map(|k| oracle.closed_form_discounts(k)).collect();
        oracle
    }

    pub fn raw(&self, gram: &[String]) -> u64 {
        self.raw.get(gram).copied().unwrap_or(0)
    }

    fn left_vocab(&self) -> impl Iterator<Item = String> + '_ {
        self.vocab.iter().cloned().chain(std::iter::once(BOS.to_string()))
    }

    /// Raw counts at the top order and for grams starting with the start
    /// marker; number of distinct left neighbours otherwise.
    pub fn adjusted(&self, gram: &[String]) -> u64 {
        if gram.len() == self.order || gram[0] == BOS {
            return self.raw(gram);
        }
        self.left_vocab()
            .filter(|x| {
                let mut ext = vec![x.clone()];
                ext.extend_from_slice(gram);
                self.raw(&ext) > 0
            })
            .count() as u64
    }

    pub fn grams(&self, k: usize) -> Vec<Vec<String>> {
        let mut v: Vec<Vec<String>> = self.raw.keys().filter(|g| g.len() == k).cloned().collect();
        v.sort();
        v
    }

    /// (D1, D2, D3+, fell back) for order k.
    pub fn discounts(&self, k: usize) -> (f64, f64, f64, bool) {
        self.discounts[k - 1]
    }

    fn closed_form_discounts(&self, k: usize) -> (f64, f64, f64, bool) {
        let mut n = [0f64; 5];
        for g in self.grams(k) {
            let c = self.adjusted(&g);
            if (1..=4).contains(&c) {
                n[c as usize] += 1.0;
            }
        }
        let fallback = (0.75, 0.75, 0.75, true);
        if n[1] == 0.0 || n[2] == 0.0 || n[3] == 0.0 {
            return fallback;
        }
        let y = n[1] / (n[1] + 2.0 * n[2]);
        let d1 = 1.0 - 2.0 * y * n[2] / n[1];
        let d2 = 2.0 - 3.0 * y * n[3] / n[2];
        let d3 = 3.0 - 4.0 * y * n[4] / n[3];
        let ok = d1 > 0.0 && d1 <= 1.0 && d2 > 0.0 && d2 <= 2.0 && d3 > 0.0 && d3 <= 3.0;
        if ok {
            (d1, d2, d3, false)
        } else {
            fallback
        }
    }

    fn discount(&self, k: usize, c: u64) -> f64 {
        let (d1, d2, d3, _) = self.discounts(k);
        match c {
            0 => 0.0,
            1 => d1,
            2 => d2,
            _ => d3,
        }
    }

    /// P(w | h) at order |h| + 1.
    fn p(&self, h: &[String], w: &str) -> f64 {
        let k = h.len() + 1;
        let lower = if h.is_empty() {
            1.0 / self.vocab.len() as f64
        } else {
            self.p(&h[1..], w)
        };
        let gram = |v: &str| {
            let mut g = h.to_vec();
            g.push(v.to_string());
            g
        };
        let counts: Vec<u64> = self.vocab.iter().map(|v| self.adjusted(&gram(v))).collect();
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return lower;
        }
        let freed: f64 = counts.iter().map(|&c| self.discount(k, c)).sum();
        let c = self.adjusted(&gram(w));
        ((c as f64 - self.discount(k, c)).max(0.0) + freed * lower) / total as f64
    }

    /// P(w | history) using the last `order - 1` history tokens.
    pub fn prob(&self, history: &[String], w: &str) -> f64 {
        let keep = history.len().min(self.order - 1);
        self.p(&history[history.len() - keep..], w)
    }

    pub fn sentence_log10(&self, tokens: &[String]) -> f64 {
        let mut hist: Vec<String> = vec![BOS.to_string(); self.order - 1];
        let mut total = 0.0;
        for t in tokens.iter().map(String::as_str).chain([EOS]) {
            total += self.prob(&hist, t).log10();
            hist.push(t.to_string());
        }
        total
    }

    /// Every history of length `order - 1` over the vocabulary and the start
    /// marker.
    pub fn all_histories(&self) -> Vec<Vec<String>> {
        let alphabet: Vec<String> = self.left_vocab().collect();
        let mut out: Vec<Vec<String>> = vec![Vec::new()];
        for _ in 0..self.order - 1 {
            out = out
                .into_iter()
                .flat_map(|h| {
                    alphabet.iter().map(move |a| {
                        let mut n = h.clone();
                        n.push(a.clone());
                        n
                    })
                })
                .collect();
        }
        out
    }
}

/// Every multiset of up to three sentences of length 1..=3 over {a, b}.
pub fn exhaustive_toy_corpora() -> Vec<Vec<Vec<String>>> {
    let mut sents: Vec<Vec<String>> = Vec::new();
    for len in 1..=3 {
        for bits in 0..(1u32 << len) {
            sents.push(
                (0..len)
                    .map(|i| {
                        if bits >> i & 1 == 1 {
                            "b".to_string()
                        } else {
                            "a".to_string()
                        }
                    })
                    .collect(),
            );
        }
    }
    let n = sents.len();
    let mut out = Vec::new();
    for i in 0..n {
        out.push(vec![sents[i].clone()]);
        for j in i..n {
            out.push(vec![sents[i].clone(), sents[j].clone()]);
            for k in j..n {
                out.push(vec![sents[i].clone(), sents[j].clone(), sents[k].clone()]);
            }
        }
    }
    out
}

/// Seeded corpora over at most five word types with at most 50 tokens
/// (end markers included).
pub fn random_toy_corpora(count: usize, seed: u64) -> Vec<Vec<Vec<String>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let words = ["a", "b", "c", "d", "e"];
    (0..count)
        .map(|_| {
            let types = rng.random_range(1..=5);
            let budget = rng.random_range(2..=50);
            let mut corpus = Vec::new();
            let mut used = 0;
            loop {
                let len = rng.random_range(1..=8);
                if used + len + 1 > budget {
                    break;
                }
                used += len + 1;
                corpus.push(
                    (0..len)
                        .map(|_| words[rng.random_range(0..types)].to_string())
                        .collect(),
                );
            }
            if corpus.is_empty() {
                corpus.push(vec![words[0].to_string()]);
            }
            corpus
        })
        .collect()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Minimal pairs read from JSON Lines text.
pub fn tokens(s: &str) -> Vec<String> {
    s.split_whitespace().map(str::to_string).collect()
}

#[derive(Debug, Default)]
pub struct KnSweep {
    pub corpora: usize,
    pub probabilities: usize,
    pub contexts: usize,
    pub max_rel_err: f64,
    pub max_norm_err: f64,
    pub fallback_levels: usize,
    pub closed_form_levels: usize,
    pub discount_mismatches: usize,
}

/// Compares every conditional probability over every full-length history
/// against the oracle, and checks normalization of every stored context.
pub fn kn_sweep(corpora: &[Vec<Vec<String>>], orders: &[usize]) -> KnSweep {
    let mut out = KnSweep::default();
    for corpus in corpora {
        for &order in orders {
            let model = syneval::ngram::train(corpus, order, 1).expect("train");
            let oracle = KnOracle::new(corpus, order);
            out.corpora += 1;

            for (k, d) in model.discounts().iter().enumerate() {
                let (d1, d2, d3, fb) = oracle.discounts(k + 1);
                if fb {
                    out.fallback_levels += 1;
                } else {
                    out.closed_form_levels += 1;
                }
                if fb != d.fallback
                    || rel_err(d.d1, d1) > 1e-12
                    || rel_err(d.d2, d2) > 1e-12
                    || rel_err(d.d3, d3) > 1e-12
                {
                    out.discount_mismatches += 1;
                }
            }

            for h in oracle.all_histories() {
                let ctx: Vec<&str> = h.iter().map(String::as_str).collect();
                for w in &oracle.vocab {
                    let expected = oracle.prob(&h, w);
                    let got = model.cond_prob(&ctx, w);
                    out.max_rel_err = out.max_rel_err.max(rel_err(got, expected));
                    out.probabilities += 1;
                }
            }

            let vocab = model.vocab();
            let bos = vocab.id(BOS);
            for ctx in model.contexts() {
                let total: f64 = vocab
                    .ids()
                    .filter(|&id| id != bos)
                    .map(|id| 10f64.powf(model.log10_cond_ids(&ctx, id)))
                    .sum();
                out.max_norm_err = out.max_norm_err.max((total - 1.0).abs());
                out.contexts += 1;
            }
        }
    }
    out
}

/// The full bundled suite, generated once per test binary.
pub fn full_suite() -> &'static (syneval::grammar::Grammar, Vec<syneval::grammar::MinimalPair>) {
    static SUITE: std::sync::OnceLock<(syneval::grammar::Grammar, Vec<syneval::grammar::MinimalPair>)> =
        std::sync::OnceLock::new();
    SUITE.get_or_init(|| {
        let g = syneval::grammar::Grammar::bundled("full.grammar").expect("bundled grammar");
        let pairs = g.generate_pairs_parallel(None).expect("generation");
        (g, pairs)
    })
}

/// Toy corpus in which every plural subject noun follows "most", "many" and
/// "the" far more often than "no".
pub fn npi_toy_corpus(g: &syneval::grammar::Grammar) -> Vec<Vec<String>> {
    let mut nouns: Vec<String> = Vec::new();
    for class in ["noun_anim", "noun_inanim"] {
        for e in &g.lexicon.class(class).expect("noun class").entries {
            for f in &e.forms {
                if f.features.get("number").map(String::as_str) == Some("pl") {
                    nouns.push(f.tokens.join(" "));
                }
            }
        }
    }
    let mut lines = Vec::new();
    for n in &nouns {
        for q in ["most", "many", "the"] {
            for _ in 0..5 {
                for tail in ["have been here .", "will be there .", "have left .", "will stay ."] {
                    lines.push(format!("{q} {n} {tail}"));
                }
            }
        }
        lines.push(format!("no {n} came ."));
    }
    for _ in 0..5 {
        lines.push("nobody has ever been here .".to_string());
    }
    lines.iter().map(|l| tokens(l)).collect()
}

/// Scorer with fixed per-token natural-log probabilities; unknown tokens get
/// `default`, the end marker gets `end`.
pub struct TableScorer {
    pub table: HashMap<String, f64>,
    pub default: f64,
    pub end: f64,
}

impl TableScorer {
    pub fn new(entries: &[(&str, f64)], default: f64, end: f64) -> Self {
        TableScorer {
            table: entries.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            default,
            end,
        }
    }
}

impl syneval::eval::Scorer for TableScorer {
    fn score(&self, tokens: &[String]) -> syneval::eval::SentenceScore {
        let mut per: Vec<f64> = tokens
            .iter()
            .map(|t| self.table.get(t).copied().unwrap_or(self.default))
            .collect();
        per.push(self.end);
        syneval::eval::SentenceScore {
            logprob: per.iter().sum(),
            token_logprobs: Some(per),
        }
    }
}

/// Reference per-subcondition accuracy tuples (single-task, multi-task),
/// keyed by condition and subcondition id. "(0.47, 0.37)" restores a
/// dropped leading "0.".
pub const REFERENCE_TUPLES: &[(&str, &str, &str)] = &[
    ("simple_agrmt", "sg", "(0.93, 1.0)"),
    ("simple_agrmt", "pl", "(0.96, 1.0)"),
    ("sent_comp", "pl_sg", "(0.98, 0.86)"),
    ("sent_comp", "sg_sg", "(0.98, 0.87)"),
    ("sent_comp", "pl_pl", "(1.0, 1.0)"),
    ("sent_comp", "sg_pl", "(1.0, 1.0)"),
    ("short_vp_coord", "pl", "(0.87, 0.91)"),
    ("short_vp_coord", "sg", "(0.94, 0.88)"),
    ("long_vp_coord", "sg", "(0.56, 0.82)"),
    ("long_vp_coord", "pl", "(0.66, 0.80)"),
    ("prep", "sg_anim_pl", "(0.08, 0.37)"),
    ("prep", "sg_inanim_pl", "(0.12, 0.41)"),
    ("prep", "pl_anim_sg", "(0.33, 0.48)"),
    ("prep", "pl_inanim_sg", "(0.46, 0.57)"),
    ("prep", "sg_inanim_sg", "(0.84, 0.86)"),
    ("prep", "sg_anim_sg", "(0.85, 0.91)"),
    ("prep", "pl_anim_pl", "(0.98, 1.0)"),
    ("prep", "pl_inanim_pl", "(1.0, 1.0)"),
    ("subj_rel", "sg_pl", "(0.05, 0.50)"),
    ("subj_rel", "pl_sg", "(0.30, 0.52)"),
    ("subj_rel", "sg_sg", "(0.89, 0.95)"),
    ("subj_rel", "pl_pl", "(1.0, 1.0)"),
    ("obj_rel_across", "pl_anim_sg", "(0.18, 0.36)"),
    ("obj_rel_across", "pl_inanim_sg", "(0.25, 0.53)"),
    ("obj_rel_across", "sg_inanim_pl", "(0.47, 0.37)"),
    ("obj_rel_across", "pl_anim_pl", "(0.50, 0.73)"),
    ("obj_rel_across", "sg_anim_pl", "(0.51, 0.30)"),
    ("obj_rel_across", "pl_inanim_pl", "(0.54, 0.74)"),
    ("obj_rel_across", "sg_inanim_sg", "(0.73, 0.78)"),
    ("obj_rel_across", "sg_anim_sg", "(0.83, 0.77)"),
    ("obj_rel_no_comp_across", "pl_inanim_sg", "(0.30, 0.42)"),
    ("obj_rel_no_comp_across", "pl_anim_sg", "(0.33, 0.43)"),
    ("obj_rel_no_comp_across", "pl_anim_pl", "(0.41, 0.52)"),
    ("obj_rel_no_comp_across", "pl_inanim_pl", "(0.45, 0.50)"),
    ("obj_rel_no_comp_across", "sg_inanim_pl", "(0.58, 0.59)"),
    ("obj_rel_no_comp_across", "sg_anim_pl", "(0.60, 0.54)"),
    ("obj_rel_no_comp_across", "sg_inanim_sg", "(0.71, 0.60)"),
    ("obj_rel_no_comp_across", "sg_anim_sg", "(0.75, 0.60)"),
    ("obj_rel_within", "sg_inanim_sg", "(0.69, 0.88)"),
    ("obj_rel_within", "sg_anim_sg", "(0.74, 0.92)"),
    ("obj_rel_within", "pl_inanim_sg", "(0.79, 0.94)"),
    ("obj_rel_within", "pl_anim_sg", "(0.81, 0.97)"),
    ("obj_rel_within", "pl_anim_pl", "(0.87, 0.84)"),
    ("obj_rel_within", "sg_anim_pl", "(0.91, 0.81)"),
    ("obj_rel_within", "pl_inanim_pl", "(0.92, 0.88)"),
    ("obj_rel_within", "sg_inanim_pl", "(0.96, 0.90)"),
    ("obj_rel_no_comp_within", "sg_inanim_sg", "(0.42, 0.65)"),
    ("obj_rel_no_comp_within", "pl_anim_sg", "(0.48, 0.89)"),
    ("obj_rel_no_comp_within", "sg_anim_sg", "(0.50, 0.67)"),
    ("obj_rel_no_comp_within", "pl_inanim_sg", "(0.51, 0.89)"),
    ("obj_rel_no_comp_within", "pl_anim_pl", "(0.91, 0.86)"),
    ("obj_rel_no_comp_within", "sg_anim_pl", "(0.94, 0.84)"),
    ("obj_rel_no_comp_within", "pl_inanim_pl", "(0.97, 0.88)"),
    ("obj_rel_no_comp_within", "sg_inanim_pl", "(0.98, 0.92)"),
    ("simple_reflexive", "sg", "(0.67, 0.73)"),
    ("simple_reflexive", "pl", "(0.99, 1.0)"),
    ("reflexive_sent_comp", "pl_sg", "(0.71, 0.60)"),
    ("reflexive_sent_comp", "sg_sg", "(0.80, 0.78)"),
    ("reflexive_sent_comp", "sg_pl", "(0.93, 0.96)"),
    ("reflexive_sent_comp", "pl_pl", "(1.0, 1.0)"),
    ("reflexive_across", "sg_pl", "(0.10, 0.09)"),
    ("reflexive_across", "pl_sg", "(0.33, 0.45)"),
    ("reflexive_across", "sg_sg", "(0.82, 0.75)"),
    ("reflexive_across", "pl_pl", "(0.93, 0.94)"),
    ("simple_npi", "past", "(0.35, 0.42)"),
    ("simple_npi", "future", "(0.45, 0.55)"),
    ("npi_across", "past", "(0.37, 0.73)"),
    ("npi_across", "future", "(0.44, 0.75)"),
];

/// Both accuracies of a tuple such as "(0.93, 1.0)".
pub fn parse_tuple(t: &str) -> (f64, f64) {
    let inner = t.trim_start_matches('(').trim_end_matches(')');
    let (a, b) = inner.split_once(", ").expect("two values");
    (a.parse().expect("number"), b.parse().expect("number"))
}

/// `per_key` results per (condition, subcondition) for one tuple column,
/// with the first round(accuracy * per_key) marked correct.
pub fn synthetic_results(column: usize, per_key: usize) -> Vec<syneval::eval::PairResult> {
    let mut out = Vec::new();
    for (cond, sub, tuple) in REFERENCE_TUPLES {
        let (a, b) = parse_tuple(tuple);
        let acc = if column == 0 { a } else { b };
        let n_correct = (acc * per_key as f64).round() as usize;
        for i in 0..per_key {
            let correct = i < n_correct;
            out.push(syneval::eval::PairResult {
                pair_id: format!("{cond}/{sub}/{i}"),
                score_grammatical: if correct { -1.0 } else { -3.0 },
                score_ungrammatical: -2.0,
                correct,
                tie: false,
                condition: cond.to_string(),
                subcondition: sub.to_string(),
                features: Default::default(),
                oov_tokens: Vec::new(),
            });
        }
    }
    out
}

/// Results over real pairs: within each subcondition, the first
/// round(accuracy * count) pairs in generation order are correct.
pub fn results_over_pairs(
    pairs: &[syneval::grammar::MinimalPair],
    column: usize,
    conditions: &[&str],
) -> Vec<syneval::eval::PairResult> {
    let mut totals: HashMap<(&str, &str), usize> = HashMap::new();
    for p in pairs.iter().filter(|p| conditions.contains(&p.condition.as_str())) {
        *totals.entry((&p.condition, &p.subcondition)).or_default() += 1;
    }
    let mut seen: HashMap<(&str, &str), usize> = HashMap::new();
    let mut out = Vec::new();
    for p in pairs.iter().filter(|p| conditions.contains(&p.condition.as_str())) {
        let key = (p.condition.as_str(), p.subcondition.as_str());
        let (_, _, tuple) = REFERENCE_TUPLES
            .iter()
            .find(|(c, s, _)| (*c, *s) == key)
            .expect("reference tuple");
        let (a, b) = parse_tuple(tuple);
        let acc = if column == 0 { a } else { b };
        let i = seen.entry(key).or_default();
        let correct = (*i as f64) < (acc * totals[&key] as f64).round();
        *i += 1;
        let (g, u) = if correct { (-1.0, -2.0) } else { (-2.0, -1.0) };
        out.push(syneval::eval::PairResult::new(p, g, u));
    }
    out
}

#[derive(Debug, Clone, Copy)]
pub enum Shape {
    Identity,
    Cube,
    Exp,
    Atan,
    Sinh,
}

/// `outer_a * shape(x / scale) + outer_b`: strictly increasing and, for
/// scores in [-1000, 0], free of overflow and saturation.
#[derive(Debug, Clone, Copy)]
pub struct Transform {
    pub scale: f64,
    pub shape: Shape,
    pub a: f64,
    pub b: f64,
}

impl Transform {
    pub fn random(rng: &mut ChaCha8Rng) -> Self {
        let shape = match rng.random_range(0..5) {
            0 => Shape::Identity,
            1 => Shape::Cube,
            2 => Shape::Exp,
            3 => Shape::Atan,
            _ => Shape::Sinh,
        };
        Transform {
            scale: rng.random_range(10.0..100.0),
            shape,
            a: rng.random_range(0.1..10.0),
            b: rng.random_range(-100.0..100.0),
        }
    }

    pub fn apply(&self, x: f64) -> f64 {
        let y = x / self.scale;
        let z = match self.shape {
            Shape::Identity => y,
            Shape::Cube => y * y * y,
            Shape::Exp => y.exp(),
            Shape::Atan => y.atan(),
            Shape::Sinh => y.sinh(),
        };
        self.a * z + self.b
    }
}
