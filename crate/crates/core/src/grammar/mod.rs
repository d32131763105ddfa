//! Declarative template grammars and their exhaustive expansion into minimal
//! pairs.
//!
//! A grammar is a featured lexicon plus a flat list of templates. Each template
//! is a sequence of slots; a slot draws from one lexicon class and may pin
//! feature values (`fix`) or bind them to template variables (`bind`). Slots
//! sharing a variable must agree on that feature. Every template carries one
//! contrast rule that turns a grammatical realization into its ungrammatical
//! counterpart(s).

mod check;
mod expand;
mod load;
mod pair;
mod schema;

use std::collections::BTreeMap;

pub use check::{check_pair, Constraint, PairCheck};
pub use expand::{Fill, Realization};
pub use load::{BundledSource, DirSource, GrammarSource};
pub use pair::{pair_id, MinimalPair};

use crate::error::{Error, Result};

pub type FeatureBundle = BTreeMap<String, String>;

/// The bundled grammar files, keyed by file name.
pub const BUNDLED: &[(&str, &str)] = &[
    ("lexicon.grammar", include_str!("../../data/lexicon.grammar")),
    ("agreement.grammar", include_str!("../../data/agreement.grammar")),
    ("reflexive.grammar", include_str!("../../data/reflexive.grammar")),
    ("npi.grammar", include_str!("../../data/npi.grammar")),
    ("full.grammar", include_str!("../../data/full.grammar")),
];

#[derive(Debug, Clone)]
pub struct Grammar {
    /// Declared feature domains, in declaration order of their values.
    pub features: BTreeMap<String, Vec<String>>,
    pub lexicon: Lexicon,
    pub conditions: Vec<Condition>,
    pub templates: Vec<Template>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Condition {
    pub id: String,
    pub label: String,
    pub section: String,
}

#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    pub classes: Vec<LexClass>,
}

#[derive(Debug, Clone)]
pub struct LexClass {
    pub name: String,
    pub inflect: Option<String>,
    pub entries: Vec<LexEntry>,
}

#[derive(Debug, Clone)]
pub struct LexEntry {
    pub features: FeatureBundle,
    pub forms: Vec<Form>,
}

/// One surface realization of an entry. `features` is the full bundle: the
/// entry's static features plus the inflectional value, if any.
#[derive(Debug, Clone)]
pub struct Form {
    pub features: FeatureBundle,
    pub tokens: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SlotValue {
    Fixed(String),
    Var(String),
}

#[derive(Debug, Clone)]
pub struct Slot {
    pub class: usize,
    pub name: Option<String>,
    /// Restricts the class to entries having this surface form.
    pub word: Option<Vec<String>>,
    pub constraints: Vec<(String, SlotValue)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ContrastRule {
    /// Flip the inflectional `feature` of the slot's filler.
    InflectionSwap { slot: usize, feature: String },
    /// Replace the filler with every class entry whose static `feature` differs.
    AnaphorSwap { slot: usize, feature: String },
    /// Replace the filler with each replacement word.
    QuantifierSwap {
        slot: usize,
        replacements: Vec<Vec<String>>,
    },
    /// Move the licensor's word to `target` and put each replacement where the
    /// licensor was.
    LicensorPositionSwap {
        licensor: usize,
        target: usize,
        replacements: Vec<Vec<String>>,
    },
}

impl ContrastRule {
    pub fn kind(&self) -> &'static str {
        match self {
            ContrastRule::InflectionSwap { .. } => "inflection_swap",
            ContrastRule::AnaphorSwap { .. } => "anaphor_swap",
            ContrastRule::QuantifierSwap { .. } => "quantifier_swap",
            ContrastRule::LicensorPositionSwap { .. } => "licensor_position_swap",
        }
    }

    /// Number of token positions a single application changes.
    pub fn touched_positions(&self) -> usize {
        match self {
            ContrastRule::LicensorPositionSwap { .. } => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Licensing {
    pub slot: usize,
    pub feature: String,
    pub value: String,
}

/// A string with `{var}` placeholders.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pattern(pub String);

impl Pattern {
    pub fn variables(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut rest = self.0.as_str();
        while let Some(start) = rest.find('{') {
            let Some(len) = rest[start..].find('}') else {
                break;
            };
            let var = &rest[start + 1..start + len];
            if !out.iter().any(|v| v == var) {
                out.push(var.to_string());
            }
            rest = &rest[start + len + 1..];
        }
        out
    }

    pub fn render(&self, bindings: &[(String, String)]) -> String {
        let mut out = self.0.clone();
        for (var, value) in bindings {
            out = out.replace(&format!("{{{var}}}"), value);
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct Template {
    pub condition: String,
    pub subcondition: Pattern,
    pub slots: Vec<Slot>,
    pub features: Vec<(String, Pattern)>,
    pub distinct: Vec<(usize, usize)>,
    pub licensing: Vec<Licensing>,
    pub contrast: ContrastRule,
    /// Human-readable origin, used in error messages.
    pub location: String,
}

impl Template {
    pub fn slot_by_name(&self, name: &str) -> Option<usize> {
        self.slots.iter().position(|s| s.name.as_deref() == Some(name))
    }

    /// Variables in first-binding order, each with the feature it binds.
    pub fn variables(&self) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = Vec::new();
        for slot in &self.slots {
            for (feature, value) in &slot.constraints {
                if let SlotValue::Var(var) = value {
                    if !out.iter().any(|(v, _)| v == var) {
                        out.push((var.clone(), feature.clone()));
                    }
                }
            }
        }
        out
    }
}

impl Lexicon {
    pub fn class_index(&self, name: &str) -> Option<usize> {
        self.classes.iter().position(|c| c.name == name)
    }

    pub fn class(&self, name: &str) -> Option<&LexClass> {
        self.classes.iter().find(|c| c.name == name)
    }

    /// Every distinct token appearing in any surface form.
    pub fn tokens(&self) -> std::collections::BTreeSet<String> {
        self.classes
            .iter()
            .flat_map(|c| &c.entries)
            .flat_map(|e| &e.forms)
            .flat_map(|f| f.tokens.iter().cloned())
            .collect()
    }

    /// Every form whose first token is `token`, in lexicon order.
    pub(crate) fn forms_starting_with<'a>(&'a self, token: &'a str) -> impl Iterator<Item = &'a Form> + 'a {
        self.classes
            .iter()
            .flat_map(|c| &c.entries)
            .flat_map(|e| &e.forms)
            .filter(move |f| f.tokens[0] == token)
    }

    /// First form in the lexicon whose tokens equal `tokens`.
    pub(crate) fn lookup_any(&self, tokens: &[String]) -> Option<&Form> {
        self.classes
            .iter()
            .flat_map(|c| &c.entries)
            .flat_map(|e| &e.forms)
            .find(|f| f.tokens == tokens)
    }
}

impl Grammar {
    pub fn empty() -> Self {
        Grammar {
            features: BTreeMap::new(),
            lexicon: Lexicon::default(),
            conditions: Vec::new(),
            templates: Vec::new(),
        }
    }

    /// Loads a bundled grammar by file name (e.g. `full.grammar`).
    pub fn bundled(name: &str) -> Result<Self> {
        load::load(name, &BundledSource)
    }

    pub fn from_file(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let dir = path.parent().map(|p| p.to_path_buf()).unwrap_or_else(|| ".".into());
        let name = path
            .file_name()
            .and_then(|n| n.to_str())
            .ok_or_else(|| Error::InvalidArgument(format!("bad grammar path {}", path.display())))?;
        load::load(name, &DirSource::new(dir))
    }

    /// Parses a single self-contained document; includes resolve against the
    /// bundled files.
    pub fn from_str_with_name(name: &str, text: &str) -> Result<Self> {
        load::load_text(name, text, &BundledSource)
    }

    pub fn condition(&self, id: &str) -> Option<&Condition> {
        self.conditions.iter().find(|c| c.id == id)
    }

    /// Ordered, de-duplicated (condition, subcondition) ids.
    pub fn enumerate_conditions(&self) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = Vec::new();
        for template in &self.templates {
            for sub in self.subconditions_of(template) {
                let key = (template.condition.clone(), sub);
                if !out.contains(&key) {
                    out.push(key);
                }
            }
        }
        out
    }

    fn subconditions_of(&self, template: &Template) -> Vec<String> {
        let vars = template.subcondition.variables();
        let feature_of: BTreeMap<String, String> = template.variables().into_iter().collect();
        let mut combos: Vec<Vec<(String, String)>> = vec![Vec::new()];
        for var in &vars {
            let domain = feature_of
                .get(var)
                .and_then(|f| self.features.get(f))
                .cloned()
                .unwrap_or_default();
            combos = combos
                .into_iter()
                .flat_map(|prefix| {
                    domain.iter().map(move |value| {
                        let mut next = prefix.clone();
                        next.push((var.clone(), value.clone()));
                        next
                    })
                })
                .collect();
        }
        combos
            .iter()
            .map(|bindings| template.subcondition.render(bindings))
            .collect()
    }

    /// All grammatical realizations of one template, in lexicographic order.
    pub fn expand_template(&self, template: &Template) -> Vec<Realization> {
        expand::expand(self, template)
    }

    /// Minimal pairs of one template.
    pub fn template_pairs(&self, template: &Template) -> Result<Vec<MinimalPair>> {
        pair::pairs_for_template(self, template)
    }

    /// The full deterministic pair stream, optionally restricted to one
    /// condition id.
    pub fn generate_pairs<'a>(&'a self, condition: Option<&'a str>) -> impl Iterator<Item = Result<MinimalPair>> + 'a {
        self.templates
            .iter()
            .filter(move |t| condition.is_none_or(|c| t.condition == c))
            .flat_map(move |t| match self.template_pairs(t) {
                Ok(pairs) => pairs.into_iter().map(Ok).collect::<Vec<_>>(),
                Err(e) => vec![Err(e)],
            })
    }

    /// Same stream as [`Grammar::generate_pairs`], but templates are expanded
    /// on the rayon pool. Output order is identical.
    pub fn generate_pairs_parallel(&self, condition: Option<&str>) -> Result<Vec<MinimalPair>> {
        use rayon::prelude::*;
        let chunks: Vec<Result<Vec<MinimalPair>>> = self
            .templates
            .par_iter()
            .filter(|t| condition.is_none_or(|c| t.condition == c))
            .map(|t| self.template_pairs(t))
            .collect();
        let mut out = Vec::new();
        for chunk in chunks {
            out.extend(chunk?);
        }
        Ok(out)
    }
}
