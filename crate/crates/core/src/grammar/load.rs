use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use super::schema::{ClassDoc, ContrastDoc, EntryDoc, GrammarDoc, TemplateDoc};
use super::{
    Condition, ContrastRule, FeatureBundle, Form, Grammar, LexClass, LexEntry, Licensing, Pattern, Slot, SlotValue,
    Template, BUNDLED,
};
use crate::error::{Error, Result};

/// Resolves grammar document names (top-level and `include`d) to text.
pub trait GrammarSource {
    fn read(&self, name: &str) -> Result<String>;
}

/// Documents compiled into the binary.
pub struct BundledSource;

impl GrammarSource for BundledSource {
    fn read(&self, name: &str) -> Result<String> {
        BUNDLED
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, text)| text.to_string())
            .ok_or_else(|| Error::grammar(name, "no such bundled grammar"))
    }
}

/// Documents in a directory on disk.
pub struct DirSource {
    root: PathBuf,
}

impl DirSource {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        DirSource { root: root.into() }
    }
}

impl GrammarSource for DirSource {
    fn read(&self, name: &str) -> Result<String> {
        let path = self.root.join(name);
        std::fs::read_to_string(&path).map_err(|e| Error::io(path, e))
    }
}

pub(crate) fn load(name: &str, source: &dyn GrammarSource) -> Result<Grammar> {
    let text = source.read(name)?;
    load_text(name, &text, source)
}

pub(crate) fn load_text(name: &str, text: &str, source: &dyn GrammarSource) -> Result<Grammar> {
    let mut docs = Vec::new();
    let mut seen = BTreeSet::new();
    collect(name, text.to_string(), source, &mut seen, &mut docs)?;
    compile(docs)
}

/// Depth-first, includes before the including document; each name once.
fn collect(
    name: &str,
    text: String,
    source: &dyn GrammarSource,
    seen: &mut BTreeSet<String>,
    out: &mut Vec<(String, GrammarDoc)>,
) -> Result<()> {
    if !seen.insert(name.to_string()) {
        return Ok(());
    }
    let doc: GrammarDoc = toml::from_str(&text).map_err(|e| Error::grammar(name, e.to_string().trim().to_string()))?;
    for inc in &doc.include {
        let inc_text = source.read(inc)?;
        collect(inc, inc_text, source, seen, out)?;
    }
    out.push((name.to_string(), doc));
    Ok(())
}

fn compile(docs: Vec<(String, GrammarDoc)>) -> Result<Grammar> {
    let mut grammar = Grammar::empty();
    let mut class_origin: BTreeMap<String, String> = BTreeMap::new();
    let mut condition_origin: BTreeMap<String, String> = BTreeMap::new();

    for (name, doc) in &docs {
        for (feature, values) in &doc.features {
            if values.is_empty() {
                return Err(Error::grammar(name, format!("feature {feature:?} has no values")));
            }
            match grammar.features.get(feature) {
                Some(existing) if existing != values => {
                    return Err(Error::grammar(
                        name,
                        format!("feature {feature:?} redeclared with different values"),
                    ))
                }
                _ => {
                    grammar.features.insert(feature.clone(), values.clone());
                }
            }
        }
    }

    for (name, doc) in &docs {
        for (class_name, class_doc) in &doc.lexicon {
            if let Some(prev) = class_origin.get(class_name) {
                return Err(Error::grammar(
                    name,
                    format!("class {class_name:?} already defined in {prev}"),
                ));
            }
            class_origin.insert(class_name.clone(), name.clone());
            let class = compile_class(name, class_name, class_doc, &grammar.features)?;
            grammar.lexicon.classes.push(class);
        }
    }

    for (name, doc) in &docs {
        for cond in &doc.conditions {
            if let Some(prev) = condition_origin.get(&cond.id) {
                return Err(Error::grammar(
                    name,
                    format!("duplicate condition id {:?} (first declared in {prev})", cond.id),
                ));
            }
            condition_origin.insert(cond.id.clone(), name.clone());
            grammar.conditions.push(Condition {
                id: cond.id.clone(),
                label: cond.label.clone().unwrap_or_else(|| cond.id.clone()),
                section: cond.section.clone().unwrap_or_default(),
            });
        }
    }

    for (name, doc) in &docs {
        for (i, tdoc) in doc.templates.iter().enumerate() {
            let location = format!(
                "{name}: template #{} (condition {}, subcondition {})",
                i + 1,
                tdoc.condition,
                tdoc.subcondition
            );
            let template = compile_template(&grammar, location, tdoc)?;
            grammar.templates.push(template);
        }
    }
    Ok(grammar)
}

fn split_tokens(location: &str, text: &str) -> Result<Vec<String>> {
    let tokens: Vec<String> = text.split_whitespace().map(str::to_string).collect();
    if tokens.is_empty() {
        return Err(Error::grammar(location, "empty surface form"));
    }
    if tokens.iter().any(|t| *t != t.to_lowercase()) {
        return Err(Error::grammar(
            location,
            format!("surface form {text:?} is not lowercase"),
        ));
    }
    Ok(tokens)
}

fn compile_class(
    doc_name: &str,
    class_name: &str,
    doc: &ClassDoc,
    features: &BTreeMap<String, Vec<String>>,
) -> Result<LexClass> {
    let inflect_values = match &doc.inflect {
        Some(feature) => Some(features.get(feature).ok_or_else(|| {
            Error::grammar(
                format!("{doc_name}: class {class_name}"),
                format!("inflects on undeclared feature {feature:?}"),
            )
        })?),
        None => None,
    };

    let mut entries = Vec::with_capacity(doc.entries.len());
    for (i, entry) in doc.entries.iter().enumerate() {
        let location = format!("{doc_name}: class {class_name}, entry #{}", i + 1);
        let (surfaces, own): (Vec<String>, FeatureBundle) = match entry {
            EntryDoc::Word(w) => (vec![w.clone()], FeatureBundle::new()),
            EntryDoc::Forms(f) => (f.clone(), FeatureBundle::new()),
            EntryDoc::Table(t) => {
                let surfaces = match (&t.form, &t.forms) {
                    (Some(f), None) => vec![f.clone()],
                    (None, Some(fs)) => fs.clone(),
                    _ => return Err(Error::grammar(location, "needs exactly one of `form` or `forms`")),
                };
                (surfaces, t.features.clone())
            }
        };
        let mut static_features = doc.features.clone();
        static_features.extend(own);

        let forms = match (&doc.inflect, inflect_values) {
            (Some(feature), Some(values)) => {
                if static_features.contains_key(feature) {
                    return Err(Error::grammar(
                        location,
                        format!("static feature {feature:?} collides with the inflectional feature"),
                    ));
                }
                if surfaces.len() != values.len() {
                    return Err(Error::grammar(
                        location,
                        format!(
                            "missing surface form: {} form(s) given, class inflects on {feature} = {}",
                            surfaces.len(),
                            values.join(", ")
                        ),
                    ));
                }
                surfaces
                    .iter()
                    .zip(values)
                    .map(|(s, v)| {
                        let mut bundle = static_features.clone();
                        bundle.insert(feature.clone(), v.clone());
                        Ok(Form {
                            features: bundle,
                            tokens: split_tokens(&location, s)?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?
            }
            _ => {
                if surfaces.len() != 1 {
                    return Err(Error::grammar(
                        location,
                        "non-inflecting class entries take exactly one form",
                    ));
                }
                vec![Form {
                    features: static_features.clone(),
                    tokens: split_tokens(&location, &surfaces[0])?,
                }]
            }
        };
        entries.push(LexEntry {
            features: static_features,
            forms,
        });
    }
    Ok(LexClass {
        name: class_name.to_string(),
        inflect: doc.inflect.clone(),
        entries,
    })
}

fn compile_template(grammar: &Grammar, location: String, doc: &TemplateDoc) -> Result<Template> {
    let err = |msg: String| Error::grammar(location.clone(), msg);

    if grammar.condition(&doc.condition).is_none() {
        return Err(err(format!("undeclared condition {:?}", doc.condition)));
    }
    if doc.slots.is_empty() {
        return Err(err("template has no slots".into()));
    }

    let mut slots = Vec::with_capacity(doc.slots.len());
    let mut var_feature: BTreeMap<String, String> = BTreeMap::new();
    for (i, sdoc) in doc.slots.iter().enumerate() {
        let class_idx = grammar
            .lexicon
            .class_index(&sdoc.class)
            .ok_or_else(|| err(format!("unknown class {:?} in slot {}", sdoc.class, i + 1)))?;
        let class = &grammar.lexicon.classes[class_idx];
        if let Some(name) = &sdoc.name {
            if slots.iter().any(|s: &Slot| s.name.as_ref() == Some(name)) {
                return Err(err(format!("duplicate slot name {name:?}")));
            }
        }
        let word = match &sdoc.word {
            Some(w) => {
                let tokens = split_tokens(&location, w)?;
                if !class.entries.iter().any(|e| e.forms.iter().any(|f| f.tokens == tokens)) {
                    return Err(err(format!("class {:?} has no entry {w:?}", sdoc.class)));
                }
                Some(tokens)
            }
            None => None,
        };

        let mut constraints = Vec::new();
        for (feature, value) in &sdoc.fix {
            let domain = grammar
                .features
                .get(feature)
                .ok_or_else(|| err(format!("slot {}: undeclared feature {feature:?}", i + 1)))?;
            if !domain.contains(value) {
                return Err(err(format!("slot {}: {feature} has no value {value:?}", i + 1)));
            }
            constraints.push((feature.clone(), SlotValue::Fixed(value.clone())));
        }
        for (feature, var) in &sdoc.bind {
            if !grammar.features.contains_key(feature) {
                return Err(err(format!("slot {}: undeclared feature {feature:?}", i + 1)));
            }
            match var_feature.get(var) {
                Some(f) if f != feature => {
                    return Err(err(format!("variable {var:?} binds both {f:?} and {feature:?}")))
                }
                _ => {
                    var_feature.insert(var.clone(), feature.clone());
                }
            }
            constraints.push((feature.clone(), SlotValue::Var(var.clone())));
        }

        // Every requested feature value must be realizable by the class.
        for (feature, value) in &constraints {
            let values: Vec<&String> = match value {
                SlotValue::Fixed(v) => vec![v],
                SlotValue::Var(_) => grammar.features[feature].iter().collect(),
            };
            for v in values {
                let available = class.entries.iter().any(|e| {
                    e.forms
                        .iter()
                        .any(|f| f.features.get(feature) == Some(v) && word.as_ref().is_none_or(|w| *w == f.tokens))
                });
                if !available {
                    return Err(err(format!(
                        "missing surface form: class {:?} provides no form with {feature} = {v}",
                        sdoc.class
                    )));
                }
            }
        }

        slots.push(Slot {
            class: class_idx,
            name: sdoc.name.clone(),
            word,
            constraints,
        });
    }

    let slot_named = |name: &str| -> Result<usize> {
        slots
            .iter()
            .position(|s| s.name.as_deref() == Some(name))
            .ok_or_else(|| err(format!("no slot named {name:?}")))
    };
    let replacement_tokens = |words: &[String]| -> Result<Vec<Vec<String>>> {
        if words.is_empty() {
            return Err(err("contrast rule has no replacements".into()));
        }
        words
            .iter()
            .map(|w| {
                let tokens = split_tokens(&location, w)?;
                if grammar.lexicon.lookup_any(&tokens).is_none() {
                    return Err(err(format!("replacement {w:?} is not in the lexicon")));
                }
                Ok(tokens)
            })
            .collect()
    };

    let contrast = match &doc.contrast {
        ContrastDoc::InflectionSwap { slot, feature } => {
            let idx = slot_named(slot)?;
            let class = &grammar.lexicon.classes[slots[idx].class];
            if class.inflect.as_deref() != Some(feature.as_str()) {
                return Err(err(format!(
                    "inflection_swap: class {:?} does not inflect on {feature:?}",
                    class.name
                )));
            }
            if !slots[idx].constraints.iter().any(|(f, _)| f == feature) {
                return Err(err(format!(
                    "inflection_swap: slot {slot:?} neither binds nor fixes {feature:?}"
                )));
            }
            ContrastRule::InflectionSwap {
                slot: idx,
                feature: feature.clone(),
            }
        }
        ContrastDoc::AnaphorSwap { slot, feature } => {
            let idx = slot_named(slot)?;
            let class = &grammar.lexicon.classes[slots[idx].class];
            if class.inflect.is_some() || class.entries.iter().any(|e| !e.features.contains_key(feature)) {
                return Err(err(format!(
                    "anaphor_swap: every entry of {:?} needs a static {feature:?} feature",
                    class.name
                )));
            }
            ContrastRule::AnaphorSwap {
                slot: idx,
                feature: feature.clone(),
            }
        }
        ContrastDoc::QuantifierSwap { slot, replacements } => ContrastRule::QuantifierSwap {
            slot: slot_named(slot)?,
            replacements: replacement_tokens(replacements)?,
        },
        ContrastDoc::LicensorPositionSwap {
            licensor,
            target,
            replacements,
        } => {
            let l = slot_named(licensor)?;
            let t = slot_named(target)?;
            if l == t {
                return Err(err("licensor and target must be different slots".into()));
            }
            ContrastRule::LicensorPositionSwap {
                licensor: l,
                target: t,
                replacements: replacement_tokens(replacements)?,
            }
        }
    };

    let mut distinct = Vec::new();
    for group in &doc.distinct {
        if group.len() != 2 {
            return Err(err("distinct constraints name exactly two slots".into()));
        }
        let (a, b) = (slot_named(&group[0])?, slot_named(&group[1])?);
        if slots[a].class != slots[b].class {
            return Err(err("distinct slots must draw from the same class".into()));
        }
        distinct.push((a, b));
    }

    let mut licensing = Vec::new();
    for l in &doc.licensing {
        licensing.push(Licensing {
            slot: slot_named(&l.slot)?,
            feature: l.feature.clone(),
            value: l.value.clone(),
        });
    }

    let subcondition = Pattern(doc.subcondition.clone());
    let mut features = Vec::new();
    for var in subcondition.variables() {
        if !var_feature.contains_key(&var) {
            return Err(err(format!("subcondition uses unbound variable {var:?}")));
        }
    }
    for (key, value) in &doc.features {
        if slots.iter().any(|s| s.name.as_deref() == Some(key.as_str())) {
            return Err(err(format!("feature key {key:?} collides with a slot name")));
        }
        let pattern = Pattern(value.clone());
        for var in pattern.variables() {
            if !var_feature.contains_key(&var) {
                return Err(err(format!("feature {key:?} uses unbound variable {var:?}")));
            }
        }
        features.push((key.clone(), pattern));
    }

    Ok(Template {
        condition: doc.condition.clone(),
        subcondition,
        slots,
        features,
        distinct,
        licensing,
        contrast,
        location,
    })
}
