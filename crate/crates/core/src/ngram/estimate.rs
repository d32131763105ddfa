use std::collections::HashMap;

use super::counts::{CountTable, Ngram};
use super::model::{Entry, NGramModel};
use crate::corpus::BOS_ID;
use crate::error::{Error, Result};

/// Discount used at every count level when counts-of-counts cannot support
/// the closed-form estimate.
pub const FALLBACK_DISCOUNT: f64 = 0.75;

/// Per-order absolute discounts for counts 1, 2 and 3+.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discounts {
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    pub fallback: bool,
}

impl Discounts {
    pub fn for_count(&self, c: u64) -> f64 {
        match c {
            0 => 0.0,
            1 => self.d1,
            2 => self.d2,
            _ => self.d3,
        }
    }
}

/// Closed-form discounts from counts-of-counts `n = [n1, n2, n3, n4]`.
/// Falls back to [`FALLBACK_DISCOUNT`] if n1, n2 or n3 is zero, or if any
/// discount leaves `(0, r]` for its count level r.
pub fn discounts_from_counts_of_counts(n: [u64; 4]) -> Discounts {
    let fallback = Discounts {
        d1: FALLBACK_DISCOUNT,
        d2: FALLBACK_DISCOUNT,
        d3: FALLBACK_DISCOUNT,
        fallback: true,
    };
    let [n1, n2, n3, n4] = n.map(|x| x as f64);
    if n1 == 0.0 || n2 == 0.0 || n3 == 0.0 {
        return fallback;
    }
    let y = n1 / (n1 + 2.0 * n2);
    let d = [
        1.0 - 2.0 * y * n2 / n1,
        2.0 - 3.0 * y * n3 / n2,
        3.0 - 4.0 * y * n4 / n3,
    ];
    if d.iter().enumerate().any(|(i, &di)| !(di > 0.0 && di <= (i + 1) as f64)) {
        return fallback;
    }
    Discounts {
        d1: d[0],
        d2: d[1],
        d3: d[2],
        fallback: false,
    }
}

/// Counts the estimator works on: raw at the top order and for n-grams that
/// begin with the start marker, continuation counts elsewhere.
fn adjusted_counts(counts: &CountTable) -> Vec<HashMap<Ngram, u64>> {
    let n = counts.order;
    let mut adjusted: Vec<HashMap<Ngram, u64>> = vec![HashMap::new(); n];
    adjusted[n - 1] = counts.tables[n - 1].clone();
    for k in (1..n).rev() {
        let mut table: HashMap<Ngram, u64> = HashMap::new();
        for gram in counts.tables[k].keys() {
            let suffix = &gram[1..];
            if suffix[0] != BOS_ID {
                *table.entry(suffix.into()).or_default() += 1;
            }
        }
        for (gram, &c) in &counts.tables[k - 1] {
            if gram[0] == BOS_ID {
                table.insert(gram.clone(), c);
            }
        }
        adjusted[k - 1] = table;
    }
    adjusted
}

struct ContextStats {
    total: u64,
    /// Context-level mass freed by discounting.
    freed: f64,
}

fn context_stats(table: &HashMap<Ngram, u64>, d: &Discounts) -> HashMap<Ngram, ContextStats> {
    let mut out: HashMap<Ngram, ContextStats> = HashMap::new();
    for (gram, &c) in table {
        let s = out
            .entry(gram[..gram.len() - 1].into())
            .or_insert(ContextStats { total: 0, freed: 0.0 });
        s.total += c;
        s.freed += d.for_count(c);
    }
    out
}

/// Interpolated modified Kneser-Ney estimation into a backoff model.
pub fn estimate(counts: &CountTable) -> Result<NGramModel> {
    let n = counts.order;
    if counts.tables[0].is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let vocab = &counts.vocab;
    let adjusted = adjusted_counts(counts);

    let mut discounts = Vec::with_capacity(n);
    for (k, table) in adjusted.iter().enumerate() {
        let mut coc = [0u64; 4];
        for &c in table.values() {
            if (1..=4).contains(&c) {
                coc[c as usize - 1] += 1;
            }
        }
        let d = discounts_from_counts_of_counts(coc);
        if d.fallback {
            log::warn!(
                "order {}: counts-of-counts {:?} do not support closed-form discounts, using {}",
                k + 1,
                coc,
                FALLBACK_DISCOUNT
            );
        }
        discounts.push(d);
    }

    // Uniform base excludes the start marker, which is never predicted.
    let uniform = 1.0 / (vocab.len() - 1) as f64;
    let mut probs: Vec<HashMap<Ngram, f64>> = Vec::with_capacity(n);
    let mut gammas: Vec<HashMap<Ngram, f64>> = Vec::with_capacity(n);

    for k in 1..=n {
        let d = &discounts[k - 1];
        let stats = context_stats(&adjusted[k - 1], d);
        let gamma: HashMap<Ngram, f64> = stats
            .iter()
            .map(|(ctx, s)| (ctx.clone(), s.freed / s.total as f64))
            .collect();
        let lower = |gram: &[u32]| -> f64 {
            if k == 1 {
                uniform
            } else {
                probs[k - 2][&gram[1..]]
            }
        };
        let mut table: HashMap<Ngram, f64> = HashMap::new();
        if k == 1 {
            let s = &stats[&[][..]];
            for id in vocab.ids().filter(|&id| id != BOS_ID) {
                let c = adjusted[0].get(&[id][..]).copied().unwrap_or(0);
                let p = (c as f64 - d.for_count(c)).max(0.0) / s.total as f64 + gamma[&[][..]] * uniform;
                table.insert([id].into(), p);
            }
        } else {
            for (gram, &c) in &adjusted[k - 1] {
                let ctx = &gram[..k - 1];
                let s = &stats[ctx];
                let p = (c as f64 - d.for_count(c)).max(0.0) / s.total as f64 + gamma[ctx] * lower(gram);
                table.insert(gram.clone(), p);
            }
        }
        probs.push(table);
        gammas.push(gamma);
    }

    let mut tables: Vec<HashMap<Ngram, Entry>> = probs
        .into_iter()
        .map(|t| t.into_iter().map(|(g, p)| (g, Entry::new(p.log10(), 0.0))).collect())
        .collect();

    // Backoff weight of context h (length k) is the interpolation weight at
    // order k + 1. Contexts without a probability of their own (padding
    // sequences) are stored with the floor probability.
    for k in 1..n {
        for (ctx, &g) in &gammas[k] {
            let entry = tables[k - 1]
                .entry(ctx.clone())
                .or_insert_with(|| Entry::new(NGramModel::NO_PROB, 0.0));
            entry.log10_backoff = g.log10();
        }
    }
    tables[0]
        .entry([BOS_ID].into())
        .or_insert_with(|| Entry::new(NGramModel::NO_PROB, 0.0));

    Ok(NGramModel::from_parts(n, vocab.clone(), tables, discounts))
}
