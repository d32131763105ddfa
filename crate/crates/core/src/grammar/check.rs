//! Independent re-analysis of generated sentences against their template.
//!
//! The checker does not reuse expansion state: it re-parses the token sequence
//! slot by slot against the lexicon, recovers each slot's feature bundle and
//! evaluates every constraint of the template on what it finds.

use std::collections::BTreeMap;

use super::pair::PERIOD;
use super::{ContrastRule, FeatureBundle, Grammar, MinimalPair, SlotValue, Template};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Constraint {
    /// All listed slots must share one value of `feature`.
    Agreement {
        variable: String,
        feature: String,
        slots: Vec<usize>,
    },
    /// The slot must carry `feature = value`.
    Licensing {
        slot: usize,
        feature: String,
        value: String,
    },
}

impl Template {
    pub fn constraints(&self) -> Vec<Constraint> {
        let mut groups: BTreeMap<String, (String, Vec<usize>)> = BTreeMap::new();
        for (i, slot) in self.slots.iter().enumerate() {
            for (feature, value) in &slot.constraints {
                if let SlotValue::Var(var) = value {
                    groups
                        .entry(var.clone())
                        .or_insert_with(|| (feature.clone(), Vec::new()))
                        .1
                        .push(i);
                }
            }
        }
        let mut out: Vec<Constraint> = groups
            .into_iter()
            .filter(|(_, (_, slots))| slots.len() > 1)
            .map(|(variable, (feature, slots))| Constraint::Agreement {
                variable,
                feature,
                slots,
            })
            .collect();
        out.extend(self.licensing.iter().map(|l| Constraint::Licensing {
            slot: l.slot,
            feature: l.feature.clone(),
            value: l.value.clone(),
        }));
        out
    }

    /// The constraint the contrast rule is meant to break.
    pub fn targeted_constraint(&self) -> Option<Constraint> {
        let constraints = self.constraints();
        match &self.contrast {
            ContrastRule::InflectionSwap { slot, feature } | ContrastRule::AnaphorSwap { slot, feature } => {
                constraints.into_iter().find(|c| {
                    matches!(c, Constraint::Agreement { feature: f, slots, .. } if f == feature && slots.contains(slot))
                })
            }
            ContrastRule::QuantifierSwap { slot, .. }
            | ContrastRule::LicensorPositionSwap { licensor: slot, .. } => constraints
                .into_iter()
                .find(|c| matches!(c, Constraint::Licensing { slot: s, .. } if s == slot)),
        }
    }

    /// Splits `tokens` (without the final period) into slot fillers and
    /// returns each filler's feature bundle. Slot classes are tried first,
    /// then any lexicon form, since an ungrammatical member may hold a word
    /// from outside the slot's class.
    pub fn analyze(&self, grammar: &Grammar, tokens: &[String]) -> Option<Vec<FeatureBundle>> {
        let mut out = Vec::with_capacity(self.slots.len());
        if self.parse_from(grammar, tokens, 0, &mut out) {
            Some(out)
        } else {
            None
        }
    }

    fn parse_from(&self, grammar: &Grammar, tokens: &[String], slot: usize, out: &mut Vec<FeatureBundle>) -> bool {
        if slot == self.slots.len() {
            return tokens.is_empty();
        }
        let Some(first) = tokens.first() else {
            return false;
        };
        let own = &grammar.lexicon.classes[self.slots[slot].class];
        let candidates = own
            .entries
            .iter()
            .flat_map(|e| &e.forms)
            .chain(grammar.lexicon.forms_starting_with(first));
        for form in candidates {
            if tokens.starts_with(&form.tokens) {
                out.push(form.features.clone());
                if self.parse_from(grammar, &tokens[form.tokens.len()..], slot + 1, out) {
                    return true;
                }
                out.pop();
            }
        }
        false
    }

    pub fn violations(&self, bundles: &[FeatureBundle]) -> Vec<Constraint> {
        self.constraints()
            .into_iter()
            .filter(|c| match c {
                Constraint::Agreement { feature, slots, .. } => {
                    let first = bundles[slots[0]].get(feature);
                    first.is_none() || slots.iter().any(|&s| bundles[s].get(feature) != first)
                }
                Constraint::Licensing { slot, feature, value } => bundles[*slot].get(feature) != Some(value),
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct PairCheck {
    pub template: usize,
    pub equal_length: bool,
    pub positions_match: bool,
    pub grammatical_violations: Vec<Constraint>,
    pub ungrammatical_violations: Vec<Constraint>,
    pub targeted: Option<Constraint>,
}

impl PairCheck {
    /// Minimal and violating exactly the targeted constraint.
    pub fn passes(&self) -> bool {
        self.equal_length
            && self.positions_match
            && self.grammatical_violations.is_empty()
            && self.targeted.is_some()
            && self.ungrammatical_violations.len() == 1
            && self.ungrammatical_violations.first() == self.targeted.as_ref()
    }
}

fn strip_period(tokens: &[String]) -> Option<&[String]> {
    match tokens.split_last() {
        Some((last, rest)) if last == PERIOD => Some(rest),
        _ => None,
    }
}

/// Checks one pair against the templates of its condition. Returns `None` if
/// no template of the condition parses the grammatical member cleanly.
pub fn check_pair(grammar: &Grammar, pair: &MinimalPair) -> Option<PairCheck> {
    let gram = strip_period(&pair.grammatical)?;
    let ungram = strip_period(&pair.ungrammatical)?;
    for (index, template) in grammar.templates.iter().enumerate() {
        if template.condition != pair.condition {
            continue;
        }
        let Some(g_bundles) = template.analyze(grammar, gram) else {
            continue;
        };
        let grammatical_violations = template.violations(&g_bundles);
        if !grammatical_violations.is_empty() {
            continue;
        }
        let ungrammatical_violations = match template.analyze(grammar, ungram) {
            Some(b) => template.violations(&b),
            None => continue,
        };
        return Some(PairCheck {
            template: index,
            equal_length: pair.grammatical.len() == pair.ungrammatical.len(),
            positions_match: pair.differing_positions() == pair.contrast_positions,
            grammatical_violations,
            ungrammatical_violations,
            targeted: template.targeted_constraint(),
        });
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tampered_pair_with_two_errors_fails() {
        let g = Grammar::bundled("agreement.grammar").unwrap();
        let mut pair = g.generate_pairs(Some("obj_rel_within")).next().unwrap().unwrap();
        let ok = check_pair(&g, &pair).unwrap();
        assert!(ok.passes(), "{ok:?}");

        // "the author that the security guard like laughs ." -> also break the main verb
        let last = pair.ungrammatical.len() - 2;
        pair.ungrammatical[last] = "laugh".into();
        pair.contrast_positions.push(last);
        let bad = check_pair(&g, &pair).unwrap();
        assert_eq!(bad.ungrammatical_violations.len(), 2);
        assert!(!bad.passes());
    }

    #[test]
    fn npi_swap_breaks_only_licensing() {
        let g = Grammar::bundled("npi.grammar").unwrap();
        for pair in g.generate_pairs(None).take(50) {
            let pair = pair.unwrap();
            let check = check_pair(&g, &pair).unwrap();
            assert!(check.passes(), "{pair:?} {check:?}");
            assert!(matches!(check.targeted, Some(Constraint::Licensing { .. })));
        }
    }
}
