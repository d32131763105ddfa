mod common;

use std::collections::BTreeMap;

use syneval::eval::{aggregate, Grouping, Member};
use syneval::grammar::MinimalPair;
use syneval::ngram::train;
use syneval::report::{
    display_pair, emit_crosstab, emit_overall, emit_subconditions, emit_traces, format_tuple_value, write_traces_csv,
    Column, ResultColumn, END_TOKEN,
};

use common::*;

fn pair_counts(pairs: &[MinimalPair]) -> BTreeMap<String, u64> {
    let mut out = BTreeMap::new();
    for p in pairs {
        *out.entry(p.condition.clone()).or_default() += 1;
    }
    out
}

fn subcondition_listing() -> String {
    let (g, pairs) = full_suite();
    let single = aggregate(&synthetic_results(0, 100), &Grouping::Subcondition);
    let multi = aggregate(&synthetic_results(1, 100), &Grouping::Subcondition);
    let columns = [
        Column {
            name: "single".into(),
            table: &single,
        },
        Column {
            name: "multi".into(),
            table: &multi,
        },
    ];
    emit_subconditions(g, pairs, &columns).unwrap()
}

#[test]
fn reference_tuples_render_exactly() {
    let (g, _) = full_suite();
    let text = subcondition_listing();
    let lines: Vec<&str> = text.lines().filter(|l| l.starts_with("    ")).collect();
    let subs = g.enumerate_conditions();
    assert_eq!(lines.len(), subs.len());
    assert_eq!(subs.len(), REFERENCE_TUPLES.len());
    for ((cond, sub), line) in subs.iter().zip(&lines) {
        let (_, _, expected) = REFERENCE_TUPLES.iter().find(|(c, s, _)| c == cond && s == sub).unwrap();
        let rendered = line.rsplit(" : ").next().unwrap();
        assert_eq!(rendered, *expected, "{cond} {sub}: {line}");
        assert!(line.trim_start().starts_with(&format!("{sub}: ")), "{line}");
    }
    assert!(
        text.contains("    sg: the author laughs/*laugh. : (0.93, 1.0)\n"),
        "{text}"
    );
    assert!(text.starts_with("SUBJECT-VERB AGREEMENT\n  Simple:\n"), "{text}");
    assert!(text.contains("NEGATIVE POLARITY ITEMS\n"));
}

#[test]
fn tuple_value_formatting() {
    assert_eq!(format_tuple_value(1.0), "1.0");
    assert_eq!(format_tuple_value(0.8), "0.80");
    assert_eq!(format_tuple_value(0.05), "0.05");
    assert_eq!(format_tuple_value(0.999), "1.00");
}

fn orc_crosstab() -> syneval::report::ReportDocument {
    let (g, pairs) = full_suite();
    let conds = ["obj_rel_across", "obj_rel_within"];
    let single = results_over_pairs(pairs, 0, &conds);
    let multi = results_over_pairs(pairs, 1, &conds);
    emit_crosstab(
        g,
        pairs,
        &[
            ResultColumn {
                name: "single".into(),
                results: &single,
            },
            ResultColumn {
                name: "multi".into(),
                results: &multi,
            },
        ],
        &conds,
        &["main_number", "embedded_number"],
        &[("animacy", "animate")],
    )
    .unwrap()
}

#[test]
fn object_relative_crosstab_has_eight_rows() {
    let doc = orc_crosstab();
    assert_eq!(
        doc.columns,
        ["main_number", "embedded_number", "single", "multi", "pairs", "example"]
    );
    assert_eq!(doc.rows.len(), 8);
    let sections: Vec<&str> = doc.rows.iter().map(|r| r.section.as_str()).collect();
    assert_eq!(&sections[..4], ["Across an object relative clause"; 4]);
    assert_eq!(&sections[4..], ["In an object relative clause"; 4]);
    let text = doc.to_text();
    let configs = [("sg", "sg"), ("sg", "pl"), ("pl", "sg"), ("pl", "pl")];
    let across = [(0.83, 0.77), (0.51, 0.30), (0.18, 0.36), (0.50, 0.73)];
    let within = [(0.74, 0.92), (0.91, 0.81), (0.81, 0.97), (0.87, 0.84)];
    for (block, values) in [(0, across), (4, within)] {
        for (i, ((m, e), (s, t))) in configs.iter().zip(values).enumerate() {
            let row = &doc.rows[block + i];
            let cells: Vec<String> = row
                .cells
                .iter()
                .map(|c| match c {
                    syneval::report::Cell::Text(s) => s.clone(),
                    syneval::report::Cell::Accuracy(Some(a)) => format!("{a:.2}"),
                    syneval::report::Cell::Accuracy(None) => "-".into(),
                    syneval::report::Cell::Count(n) => n.to_string(),
                })
                .collect();
            assert_eq!(
                &cells[..4],
                [m.to_string(), e.to_string(), format!("{s:.2}"), format!("{t:.2}")]
            );
            assert_eq!(cells[4], "2800");
        }
    }
    let example = |i: usize| match doc.rows[i].cells.last().unwrap() {
        syneval::report::Cell::Text(s) => s.clone(),
        other => panic!("{other:?}"),
    };
    let across_sg = example(0);
    assert!(
        across_sg.starts_with("The author that the ") && across_sg.ends_with(" likes laughs/*laugh."),
        "{across_sg}"
    );
    let across_pl = example(1);
    assert!(across_pl.starts_with("The author that the ") && across_pl.ends_with(" like laughs/*laugh."));
    let within_sg = example(4);
    assert!(
        within_sg.starts_with("The author that the ") && within_sg.ends_with(" likes/*like laughs."),
        "{within_sg}"
    );
    assert!(text.contains("Across an object relative clause:\n"));
}

#[test]
fn degenerate_crosstab_has_one_row() {
    let (g, pairs) = full_suite();
    let results = results_over_pairs(pairs, 0, &["simple_agrmt"]);
    let doc = emit_crosstab(
        g,
        pairs,
        &[ResultColumn {
            name: "x".into(),
            results: &results,
        }],
        &["simple_agrmt"],
        &["main_number"],
        &[("main_number", "sg")],
    )
    .unwrap();
    assert_eq!(doc.rows.len(), 1);
    let bad = emit_crosstab(
        g,
        pairs,
        &[],
        &["simple_agrmt"],
        &["main_number"],
        &[("main_number", "dual")],
    );
    assert!(bad.is_err());
}

#[test]
fn overall_table_follows_suite_order_with_counts() {
    let (g, pairs) = full_suite();
    let all_correct: Vec<_> = pairs
        .iter()
        .map(|p| syneval::eval::PairResult::new(p, -1.0, -2.0))
        .collect();
    let table = aggregate(&all_correct, &Grouping::Condition);
    let doc = emit_overall(
        g,
        &[Column {
            name: "oracle".into(),
            table: &table,
        }],
        &pair_counts(pairs),
    )
    .unwrap();
    assert_eq!(doc.rows.len(), 15);
    let text = doc.to_text();
    for line in text.lines().skip(2) {
        if line.ends_with(':') {
            continue;
        }
        assert!(line.contains(" 1.00 "), "{line}");
    }
    assert!(text.contains("Subject-verb agreement:\nSimple "));
    let lines: Vec<&str> = text.lines().collect();
    let simple = lines.iter().find(|l| l.starts_with("Simple ")).unwrap();
    assert!(simple.trim_end().ends_with(" 280"), "{simple}");
    let srel = lines
        .iter()
        .find(|l| l.starts_with("Across a subject relative clause"))
        .unwrap();
    assert!(srel.trim_end().ends_with(" 22400"), "{srel}");

    let csv = doc.to_csv();
    let mut reader = csv::Reader::from_reader(csv.as_bytes());
    assert_eq!(
        reader.headers().unwrap().iter().collect::<Vec<_>>(),
        ["section", "condition", "oracle", "sentences"]
    );
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 15);
    assert_eq!(&rows[0][0], "Subject-verb agreement");
    assert_eq!(&rows[14][0], "Negative polarity items");
    assert_eq!(&rows[13][3], "792");

    let sub = aggregate(&all_correct, &Grouping::Subcondition);
    assert!(emit_overall(
        g,
        &[Column {
            name: "x".into(),
            table: &sub
        }],
        &pair_counts(pairs)
    )
    .is_err());
}

#[test]
fn machine_output_keeps_full_precision() {
    let (g, pairs) = full_suite();
    let results: Vec<_> = pairs
        .iter()
        .filter(|p| p.condition == "simple_agrmt")
        .enumerate()
        .map(|(i, p)| syneval::eval::PairResult::new(p, -1.0, if i % 3 == 0 { 0.0 } else { -2.0 }))
        .collect();
    let table = aggregate(&results, &Grouping::Condition);
    let doc = emit_overall(
        g,
        &[Column {
            name: "m".into(),
            table: &table,
        }],
        &pair_counts(pairs),
    )
    .unwrap();
    let acc = table.row(&["simple_agrmt"]).unwrap();
    assert_eq!(acc.accuracy, acc.correct as f64 / acc.count as f64);
    assert!(doc.to_csv().contains(&acc.accuracy.to_string()));
    assert!(doc.to_text().contains(&format!("{:.2}", acc.accuracy)));
}

#[test]
fn report_regeneration_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let results = synthetic_results(0, 100);
    let path = dir.path().join("results.jsonl");
    syneval::jsonl::save(&results, &path).unwrap();
    let render = || {
        let (g, pairs) = full_suite();
        let loaded: Vec<syneval::eval::PairResult> = syneval::jsonl::load(&path).unwrap();
        let table = aggregate(&loaded, &Grouping::Subcondition);
        emit_subconditions(
            g,
            pairs,
            &[Column {
                name: "a".into(),
                table: &table,
            }],
        )
        .unwrap()
    };
    assert_eq!(render(), render());
    assert_eq!(orc_crosstab().to_csv(), orc_crosstab().to_csv());
    assert_eq!(subcondition_listing(), subcondition_listing());
}

#[test]
fn traces_have_the_documented_shape() {
    let (g, pairs) = full_suite();
    let model = train(&npi_toy_corpus(g), 3, 1).unwrap();
    let npi: Vec<MinimalPair> = pairs
        .iter()
        .filter(|p| p.condition == "simple_npi")
        .take(2)
        .cloned()
        .collect();
    let rows = emit_traces(&model, &npi).unwrap();
    let expected: usize = npi.iter().map(|p| 2 * (p.grammatical.len() + 1)).sum();
    assert_eq!(rows.len(), expected);

    let mut buf = Vec::new();
    write_traces_csv(&rows, &mut buf).unwrap();
    let mut reader = csv::Reader::from_reader(buf.as_slice());
    assert_eq!(
        reader.headers().unwrap().iter().collect::<Vec<_>>(),
        ["pair_id", "member", "position", "token", "logprob"]
    );
    let mut sums: BTreeMap<(String, String), f64> = BTreeMap::new();
    let mut last_tokens = Vec::new();
    for rec in reader.records() {
        let rec = rec.unwrap();
        assert!(["grammatical", "ungrammatical"].contains(&&rec[1]));
        *sums.entry((rec[0].to_string(), rec[1].to_string())).or_default() += rec[4].parse::<f64>().unwrap();
        last_tokens.push(rec[3].to_string());
    }
    assert_eq!(last_tokens.last().map(String::as_str), Some(END_TOKEN));
    for p in &npi {
        for (m, toks) in [
            (Member::Grammatical, &p.grammatical),
            (Member::Ungrammatical, &p.ungrammatical),
        ] {
            let total = syneval::eval::Scorer::score(&model, toks).logprob;
            let got = sums[&(p.pair_id.clone(), m.to_string())];
            assert!((got - total).abs() <= 1e-6, "{got} vs {total}");
        }
    }
}

#[test]
fn display_forms() {
    let (_, pairs) = full_suite();
    assert_eq!(display_pair(&pairs[0]), "The author laughs/*laugh.");
    assert_eq!(
        syneval::report::display_pair_member(&pairs[0], Member::Ungrammatical),
        "The author laugh."
    );
}
