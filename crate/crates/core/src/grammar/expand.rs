use std::ops::Range;

use super::{Form, Grammar, SlotValue, Template};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fill {
    pub entry: usize,
    pub form: usize,
}

/// One grammatical realization of a template.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Realization {
    pub fills: Vec<Fill>,
    /// Variable bindings in first-binding order.
    pub bindings: Vec<(String, String)>,
}

impl Realization {
    pub fn form<'g>(&self, grammar: &'g Grammar, template: &Template, slot: usize) -> &'g Form {
        let class = &grammar.lexicon.classes[template.slots[slot].class];
        let fill = self.fills[slot];
        &class.entries[fill.entry].forms[fill.form]
    }

    /// Tokens without the sentence-final period, plus each slot's span.
    pub fn tokens(&self, grammar: &Grammar, template: &Template) -> (Vec<String>, Vec<Range<usize>>) {
        let mut tokens = Vec::new();
        let mut spans = Vec::with_capacity(self.fills.len());
        for slot in 0..self.fills.len() {
            let start = tokens.len();
            tokens.extend(self.form(grammar, template, slot).tokens.iter().cloned());
            spans.push(start..tokens.len());
        }
        (tokens, spans)
    }
}

pub(super) fn expand(grammar: &Grammar, template: &Template) -> Vec<Realization> {
    let mut out = Vec::new();
    let mut fills = Vec::with_capacity(template.slots.len());
    let mut bindings = Vec::new();
    descend(grammar, template, &mut fills, &mut bindings, &mut out);
    out
}

fn descend(
    grammar: &Grammar,
    template: &Template,
    fills: &mut Vec<Fill>,
    bindings: &mut Vec<(String, String)>,
    out: &mut Vec<Realization>,
) {
    let depth = fills.len();
    if depth == template.slots.len() {
        out.push(Realization {
            fills: fills.clone(),
            bindings: bindings.clone(),
        });
        return;
    }
    let slot = &template.slots[depth];
    let class = &grammar.lexicon.classes[slot.class];

    for (entry_idx, entry) in class.entries.iter().enumerate() {
        if template.distinct.iter().any(|&(a, b)| {
            (b == depth && a < depth && fills[a].entry == entry_idx)
                || (a == depth && b < depth && fills[b].entry == entry_idx)
        }) {
            continue;
        }
        for (form_idx, form) in entry.forms.iter().enumerate() {
            if slot.word.as_ref().is_some_and(|w| *w != form.tokens) {
                continue;
            }
            let mark = bindings.len();
            let ok = slot.constraints.iter().all(|(feature, value)| {
                let Some(have) = form.features.get(feature) else {
                    return false;
                };
                match value {
                    SlotValue::Fixed(v) => have == v,
                    SlotValue::Var(var) => match bindings.iter().find(|(b, _)| b == var) {
                        Some((_, bound)) => have == bound,
                        None => {
                            bindings.push((var.clone(), have.clone()));
                            true
                        }
                    },
                }
            });
            if ok {
                fills.push(Fill {
                    entry: entry_idx,
                    form: form_idx,
                });
                descend(grammar, template, fills, bindings, out);
                fills.pop();
            }
            bindings.truncate(mark);
        }
    }
}
