//! On-disk grammar document layout (TOML).

use std::collections::BTreeMap;

use serde::Deserialize;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct GrammarDoc {
    #[serde(default)]
    pub include: Vec<String>,
    #[serde(default)]
    pub features: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub lexicon: BTreeMap<String, ClassDoc>,
    #[serde(default)]
    pub conditions: Vec<ConditionDoc>,
    #[serde(default)]
    pub templates: Vec<TemplateDoc>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct ClassDoc {
    pub inflect: Option<String>,
    #[serde(default)]
    pub features: BTreeMap<String, String>,
    pub entries: Vec<EntryDoc>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub(crate) enum EntryDoc {
    Word(String),
    Forms(Vec<String>),
    Table(EntryTable),
}

#[derive(Debug, Deserialize)]
pub(crate) struct EntryTable {
    pub form: Option<String>,
    pub forms: Option<Vec<String>>,
    #[serde(flatten)]
    pub features: BTreeMap<String, String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct ConditionDoc {
    pub id: String,
    pub label: Option<String>,
    pub section: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct TemplateDoc {
    pub condition: String,
    pub subcondition: String,
    #[serde(default)]
    pub features: BTreeMap<String, String>,
    pub slots: Vec<SlotDoc>,
    pub contrast: ContrastDoc,
    #[serde(default)]
    pub distinct: Vec<Vec<String>>,
    #[serde(default)]
    pub licensing: Vec<LicensingDoc>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct SlotDoc {
    pub class: String,
    pub name: Option<String>,
    pub word: Option<String>,
    #[serde(default)]
    pub bind: BTreeMap<String, String>,
    #[serde(default)]
    pub fix: BTreeMap<String, String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct LicensingDoc {
    pub slot: String,
    pub feature: String,
    pub value: String,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
#[allow(clippy::enum_variant_names)]
pub(crate) enum ContrastDoc {
    InflectionSwap {
        slot: String,
        feature: String,
    },
    AnaphorSwap {
        slot: String,
        feature: String,
    },
    QuantifierSwap {
        slot: String,
        replacements: Vec<String>,
    },
    LicensorPositionSwap {
        licensor: String,
        target: String,
        replacements: Vec<String>,
    },
}
