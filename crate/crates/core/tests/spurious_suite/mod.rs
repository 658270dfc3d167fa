//! Engineered tables and samples whose answers are reachable through more
//! than one program, with annotations that single out the intended one.
//!
//! Four patterns, 50 samples total:
//! - duplicate-cell selection: the answer value sits under the same header
//!   name in two periods, so year-less selections stay consistent;
//! - omitted-total sums: the printed total equals the sum of its details,
//!   so aggregating the details is a consistent detour;
//! - coarse-region superlatives: the section maximum is also the global
//!   maximum, so dropping the section filter stays consistent;
//! - difference vs literal: a later-period cell happens to equal the asked
//!   difference, so selecting it is a consistent detour.

use std::collections::BTreeMap;

use hiertable::ingest::{table_from_doc, AnswerValue, CellFormat, QuantityLink, Sample, TableDoc};
use hiertable::table::HierTable;
use hiertable::text::render_number;

pub struct Case {
    pub table: HierTable,
    pub sample: Sample,
    pub gold_program: String,
}

fn formats_for(
    cells: &[Vec<String>],
    indents: &[(usize, u32)],
    bolds: &[usize],
) -> Vec<Vec<CellFormat>> {
    cells
        .iter()
        .enumerate()
        .map(|(r, row)| {
            row.iter()
                .enumerate()
                .map(|(c, _)| CellFormat {
                    bold: c == 0 && bolds.contains(&r),
                    indent: if c == 0 {
                        indents
                            .iter()
                            .find(|(row, _)| *row == r)
                            .map(|(_, i)| *i)
                            .unwrap_or(0)
                    } else {
                        0
                    },
                })
                .collect()
        })
        .collect()
}

fn build_table(
    id: String,
    cells: Vec<Vec<String>>,
    indents: &[(usize, u32)],
    bolds: &[usize],
) -> HierTable {
    let formats = formats_for(&cells, indents, bolds);
    table_from_doc(
        &TableDoc {
            table_id: id,
            cells,
            merged: vec![],
            formats: Some(formats),
            top_header_rows: 1,
            left_header_cols: 1,
            top_tree: None,
            left_tree: None,
        },
        true,
    )
    .expect("suite tables are valid")
}

fn s(x: &str) -> String {
    x.to_string()
}

fn n(x: f64) -> String {
    render_number(x)
}

/// Duplicate-cell selection: v appears at item a in both periods.
fn duplicate_selection(i: usize) -> Case {
    let v = 10.0 + i as f64;
    let cells = vec![
        vec![s(""), s("metric"), s("share")],
        vec![s("2019"), s(""), s("")],
        vec![s("cobalt"), n(v), n(100.0 + i as f64)],
        vec![s("zinc"), n(200.0 + i as f64), n(210.0 + i as f64)],
        vec![s("2020"), s(""), s("")],
        vec![s("cobalt"), n(v), n(300.0 + i as f64)],
        vec![s("zinc"), n(400.0 + i as f64), n(410.0 + i as f64)],
    ];
    let indents = [(2, 1), (3, 1), (5, 1), (6, 1)];
    let table = build_table(format!("dup-{i}"), cells, &indents, &[]);
    let mut sample = Sample {
        sample_id: format!("dup-{i}"),
        table_id: format!("dup-{i}"),
        question: "What is the metric of cobalt in 2019?".into(),
        answers: vec![AnswerValue::Number(v)],
        formula: Some("=B3".into()),
        ..Default::default()
    };
    sample.entity_links.insert("cobalt".into(), (2, 0));
    sample.entity_links.insert("2019".into(), (1, 0));
    sample
        .quantity_links
        .insert("metric of cobalt".into(), QuantityLink::Cell((2, 1)));
    Case {
        table,
        sample,
        gold_program: "(filter_tree 2019) (filter_tree cobalt) (filter_level LEFT_2) \
                       (filter_tree metric) (filter_level TOP_1)"
            .into(),
    }
}

/// Omitted-total sum: the section's printed total equals the sum of its
/// detail rows.
fn omitted_total(i: usize) -> Case {
    let x = 20.0 + i as f64;
    let y = 30.0 + i as f64;
    let v = x + y;
    let cells = vec![
        vec![s(""), s("output")],
        vec![s("wheat products"), n(v)],
        vec![s("flour"), n(x)],
        vec![s("bread"), n(y)],
        vec![s("dairy products"), n(500.0 + i as f64)],
        vec![s("cheese"), n(500.0 + i as f64)],
    ];
    let indents = [(2, 1), (3, 1), (5, 1)];
    let table = build_table(format!("tot-{i}"), cells, &indents, &[1, 4]);
    let mut sample = Sample {
        sample_id: format!("tot-{i}"),
        table_id: format!("tot-{i}"),
        question: "What is the total output of wheat products?".into(),
        answers: vec![AnswerValue::Number(v)],
        formula: Some("=B2".into()),
        ..Default::default()
    };
    sample.entity_links.insert("wheat products".into(), (1, 0));
    sample
        .quantity_links
        .insert("total output".into(), QuantityLink::Cell((1, 1)));
    Case {
        table,
        sample,
        gold_program: "(filter_tree \"wheat products\") (filter_level LEFT_1) \
                       (filter_tree output) (filter_level TOP_1)"
            .into(),
    }
}

/// Coarse-region superlative: the section maximum is the global maximum.
fn coarse_superlative(i: usize) -> Case {
    let best = 90.0 + i as f64;
    let cells = vec![
        vec![s(""), s("score")],
        vec![s("heavy industry"), n(130.0 + 2.0 * i as f64)],
        vec![s("turbines"), n(best)],
        vec![s("engines"), n(40.0 + i as f64)],
        vec![s("others"), n(110.0 + 2.0 * i as f64)],
        vec![s("pumps"), n(50.0 + i as f64)],
        vec![s("motors"), n(60.0 + i as f64)],
    ];
    let indents = [(2, 1), (3, 1), (5, 1), (6, 1)];
    let table = build_table(format!("sup-{i}"), cells, &indents, &[1, 4]);
    let mut sample = Sample {
        sample_id: format!("sup-{i}"),
        table_id: format!("sup-{i}"),
        question: "Which product had the highest score in heavy industry?".into(),
        answers: vec![AnswerValue::Text("turbines".into())],
        formula: Some("=XLOOKUP(LARGE(B3:B4, 1), B3:B4, A3:A4)".into()),
        ..Default::default()
    };
    sample.entity_links.insert("heavy industry".into(), (1, 0));
    sample.quantity_links.insert(
        "highest score".into(),
        QuantityLink::Formula("=XLOOKUP(LARGE(B3:B4, 1), B3:B4, A3:A4)".into()),
    );
    Case {
        table,
        sample,
        gold_program: "(filter_tree \"heavy industry\") (filter_level LEFT_2) \
                       (filter_tree score) (filter_level TOP_1) (argmax 1)"
            .into(),
    }
}

/// Difference vs literal: a 2020 cell holds exactly the 2019 difference.
fn difference_literal(i: usize) -> Case {
    let x = 11.0 + i as f64;
    let y = 25.0 + 2.0 * i as f64;
    let v = y - x;
    let cells = vec![
        vec![s(""), s("output")],
        vec![s("2019"), s("")],
        vec![s("steel"), n(x)],
        vec![s("aluminum"), n(y)],
        vec![s("2020"), s("")],
        vec![s("steel"), n(v)],
        vec![s("aluminum"), n(500.0 + i as f64)],
    ];
    let indents = [(2, 1), (3, 1), (5, 1), (6, 1)];
    let table = build_table(format!("diff-{i}"), cells, &indents, &[]);
    let mut sample = Sample {
        sample_id: format!("diff-{i}"),
        table_id: format!("diff-{i}"),
        question: "How much more output does aluminum have than steel in 2019?".into(),
        answers: vec![AnswerValue::Number(v)],
        formula: Some("=B4-B3".into()),
        ..Default::default()
    };
    sample.entity_links.insert("2019".into(), (1, 0));
    sample.quantity_links.insert(
        "output does aluminum".into(),
        QuantityLink::Formula("=B4-B3".into()),
    );
    Case {
        table,
        sample,
        gold_program: "(filter_tree 2019) (filter_tree aluminum steel) \
                       (filter_level LEFT_2) (filter_tree output) (filter_level TOP_1) \
                       (difference)"
            .into(),
    }
}

/// The 50-sample suite: 10 duplicate-selection, 15 omitted-total, 10
/// coarse-superlative, 15 difference-literal cases.
pub fn build() -> Vec<Case> {
    let mut out = Vec::with_capacity(50);
    for i in 0..10 {
        out.push(duplicate_selection(i));
    }
    for i in 0..15 {
        out.push(omitted_total(i));
    }
    for i in 0..10 {
        out.push(coarse_superlative(i));
    }
    for i in 0..15 {
        out.push(difference_literal(i));
    }
    let ids: BTreeMap<&str, usize> = out
        .iter()
        .map(|c| (c.sample.sample_id.as_str(), 1))
        .collect();
    assert_eq!(ids.len(), out.len(), "sample ids must be unique");
    out
}
