use std::collections::BTreeMap;
use std::ops::Range;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{ContrastRule, Grammar, Realization, Template};
use crate::error::{Error, Result};

/// Sentence-final token appended to every rendered sentence.
pub const PERIOD: &str = ".";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MinimalPair {
    pub pair_id: String,
    pub condition: String,
    pub subcondition: String,
    pub features: BTreeMap<String, String>,
    pub grammatical: Vec<String>,
    pub ungrammatical: Vec<String>,
    pub contrast_positions: Vec<usize>,
}

impl MinimalPair {
    /// Positions where the two members differ, computed from the tokens.
    pub fn differing_positions(&self) -> Vec<usize> {
        self.grammatical
            .iter()
            .zip(&self.ungrammatical)
            .enumerate()
            .filter(|(_, (a, b))| a != b)
            .map(|(i, _)| i)
            .collect()
    }

    /// Slash rendering, e.g. `the author laughs/*laugh .`
    pub fn slash_notation(&self) -> String {
        self.grammatical
            .iter()
            .zip(&self.ungrammatical)
            .map(|(g, u)| if g == u { g.clone() } else { format!("{g}/*{u}") })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Content-derived identifier. Both members enter the hash: a grammatical
/// sentence can head several pairs (one per contrast alternative).
pub fn pair_id(condition: &str, subcondition: &str, grammatical: &[String], ungrammatical: &[String]) -> String {
    let mut hasher = Sha256::new();
    for part in [
        condition,
        subcondition,
        &grammatical.join(" "),
        &ungrammatical.join(" "),
    ] {
        hasher.update(part.as_bytes());
        hasher.update([0x1f]);
    }
    hex::encode(&hasher.finalize()[..8])
}

fn splice(tokens: &[String], span: &Range<usize>, with: &[String]) -> Option<Vec<String>> {
    if with.len() != span.len() {
        return None;
    }
    let mut out = tokens.to_vec();
    out[span.clone()].clone_from_slice(with);
    Some(out)
}

fn alternatives(
    grammar: &Grammar,
    template: &Template,
    realization: &Realization,
    tokens: &[String],
    spans: &[Range<usize>],
) -> Result<Vec<Vec<String>>> {
    let length_error = |slot: usize| {
        Error::grammar(
            template.location.clone(),
            format!("contrast in slot {} changes the sentence length", slot + 1),
        )
    };
    let mut out = Vec::new();
    match &template.contrast {
        ContrastRule::InflectionSwap { slot, feature } => {
            let class = &grammar.lexicon.classes[template.slots[*slot].class];
            let fill = realization.fills[*slot];
            let entry = &class.entries[fill.entry];
            let current = &entry.forms[fill.form].features;
            for form in &entry.forms {
                let same_elsewhere = form
                    .features
                    .iter()
                    .all(|(k, v)| k == feature || current.get(k) == Some(v));
                if same_elsewhere && form.features.get(feature) != current.get(feature) {
                    let t = splice(tokens, &spans[*slot], &form.tokens).ok_or_else(|| length_error(*slot))?;
                    out.push(t);
                }
            }
        }
        ContrastRule::AnaphorSwap { slot, feature } => {
            let class = &grammar.lexicon.classes[template.slots[*slot].class];
            let current = &class.entries[realization.fills[*slot].entry].features;
            for entry in &class.entries {
                if entry.features.get(feature) != current.get(feature) {
                    let t = splice(tokens, &spans[*slot], &entry.forms[0].tokens).ok_or_else(|| length_error(*slot))?;
                    out.push(t);
                }
            }
        }
        ContrastRule::QuantifierSwap { slot, replacements } => {
            for r in replacements {
                let t = splice(tokens, &spans[*slot], r).ok_or_else(|| length_error(*slot))?;
                out.push(t);
            }
        }
        ContrastRule::LicensorPositionSwap {
            licensor,
            target,
            replacements,
        } => {
            let licensor_tokens = tokens[spans[*licensor].clone()].to_vec();
            for r in replacements {
                let moved = splice(tokens, &spans[*target], &licensor_tokens).ok_or_else(|| length_error(*target))?;
                let t = splice(&moved, &spans[*licensor], r).ok_or_else(|| length_error(*licensor))?;
                out.push(t);
            }
        }
    }
    Ok(out)
}

pub(super) fn pairs_for_template(grammar: &Grammar, template: &Template) -> Result<Vec<MinimalPair>> {
    let mut out = Vec::new();
    for realization in grammar.expand_template(template) {
        let (tokens, spans) = realization.tokens(grammar, template);
        let subcondition = template.subcondition.render(&realization.bindings);

        let mut features = BTreeMap::new();
        for (key, pattern) in &template.features {
            features.insert(key.clone(), pattern.render(&realization.bindings));
        }
        for (slot, span) in template.slots.iter().zip(&spans) {
            if let Some(name) = &slot.name {
                features.insert(name.clone(), tokens[span.clone()].join(" "));
            }
        }

        let mut grammatical = tokens.clone();
        grammatical.push(PERIOD.to_string());

        for mut ungrammatical in alternatives(grammar, template, &realization, &tokens, &spans)? {
            ungrammatical.push(PERIOD.to_string());
            let positions: Vec<usize> = (0..grammatical.len())
                .filter(|&i| grammatical[i] != ungrammatical[i])
                .collect();
            if positions.is_empty() {
                return Err(Error::IdenticalContrast {
                    location: template.location.clone(),
                    sentence: grammatical.join(" "),
                });
            }
            if positions.len() != template.contrast.touched_positions() {
                return Err(Error::grammar(
                    template.location.clone(),
                    format!(
                        "{} changed {} positions in {:?}, expected {}",
                        template.contrast.kind(),
                        positions.len(),
                        grammatical.join(" "),
                        template.contrast.touched_positions()
                    ),
                ));
            }
            out.push(MinimalPair {
                pair_id: pair_id(&template.condition, &subcondition, &grammatical, &ungrammatical),
                condition: template.condition.clone(),
                subcondition: subcondition.clone(),
                features: features.clone(),
                grammatical: grammatical.clone(),
                ungrammatical,
                contrast_positions: positions,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn full() -> Grammar {
        Grammar::bundled("full.grammar").unwrap()
    }

    fn sentence(s: &str) -> Vec<String> {
        s.split(' ').map(str::to_string).collect()
    }

    #[test]
    fn simple_agreement_first_pair() {
        let g = full();
        let first = g.generate_pairs(Some("simple_agrmt")).next().unwrap().unwrap();
        assert_eq!(first.grammatical, sentence("the author laughs ."));
        assert_eq!(first.ungrammatical, sentence("the author laugh ."));
        assert_eq!(first.contrast_positions, vec![2]);
        assert_eq!(first.subcondition, "sg");
    }

    #[test]
    fn npi_across_relative_clause_pair() {
        let g = full();
        let want_g = sentence("no authors that the security guards like have ever been famous .");
        let want_u = sentence("the authors that no security guards like have ever been famous .");
        let pair = g
            .generate_pairs(Some("npi_across"))
            .map(Result::unwrap)
            .find(|p| p.grammatical == want_g && p.ungrammatical == want_u)
            .expect("pair present");
        assert_eq!(pair.contrast_positions, vec![0, 3]);
        assert_eq!(pair.subcondition, "past");
    }

    #[test]
    fn reflexive_singular_yields_himself_and_herself() {
        let g = full();
        let pairs: Vec<MinimalPair> = g
            .generate_pairs(Some("simple_reflexive"))
            .map(Result::unwrap)
            .take(2)
            .collect();
        assert_eq!(pairs[0].slash_notation(), "the author hurt himself/*themselves .");
        assert_eq!(pairs[1].slash_notation(), "the author hurt herself/*themselves .");
    }

    #[test]
    fn identical_contrast_aborts() {
        let g = Grammar::from_str_with_name(
            "same.grammar",
            r#"
[features]
number = ["sg", "pl"]
[lexicon.noun]
inflect = "number"
entries = [["sheep", "sheep"]]
[lexicon.verb]
inflect = "number"
entries = [["hit", "hit"]]
[[conditions]]
id = "c"
[[templates]]
condition = "c"
subcondition = "{n}"
slots = [
  { class = "noun", bind = { number = "n" } },
  { class = "verb", bind = { number = "n" }, name = "v" },
]
contrast = { kind = "inflection_swap", slot = "v", feature = "number" }
"#,
        )
        .unwrap();
        let err = g.generate_pairs(None).next().unwrap().unwrap_err();
        assert!(matches!(err, Error::IdenticalContrast { .. }), "{err}");
    }

    #[test]
    fn pair_id_depends_on_both_members() {
        let g = sentence("no authors have ever been famous .");
        let a = pair_id(
            "simple_npi",
            "past",
            &g,
            &sentence("most authors have ever been famous ."),
        );
        let b = pair_id(
            "simple_npi",
            "past",
            &g,
            &sentence("many authors have ever been famous ."),
        );
        assert_ne!(a, b);
        assert_eq!(a.len(), 16);
    }
}
