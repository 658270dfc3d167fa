//! Acceptance suite. Each criterion prints one PASS/FAIL/SKIP line; run with
//! `cargo test -p hiertable --test acceptance -- --nocapture` to see them.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use hiertable::eval::{execution_accuracy, spurious_rate, EvalDataset, Prediction};
use hiertable::formula::{eval_formula, parse_formula};
use hiertable::ingest::{
    load_samples, load_table, save_table, table_from_doc, AnswerValue, Sample, TableDoc,
};
use hiertable::interp::{execute, execute_bound};
use hiertable::linearize::{
    flatten_for_export, linearize_table, select_subtable, serialize_for_nlg,
};
use hiertable::program::parse_program;
use hiertable::search::{random_search, SearchConfig, SearchMode};
use hiertable::synth::{random_bound_program, random_table, TableOpts};
use hiertable::table::{CellValue, HierTable};

mod oracle;
mod spurious_suite;

fn fixture_path(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(rel)
}

fn load_fixture_table(rel: &str) -> HierTable {
    let bytes = std::fs::read(fixture_path(rel)).expect("fixture exists");
    load_table(&bytes).expect("fixture is valid")
}

fn gate(criterion: &str, ok: bool, detail: &str) {
    let verdict = if ok { "PASS" } else { "FAIL" };
    println!("acceptance criterion {criterion}: {verdict} — {detail}");
    assert!(ok, "criterion {criterion} failed: {detail}");
}

/// Criterion 1: over 10,000 randomized cases the interpreter agrees exactly
/// with the independent brute-force evaluator, in under 60 seconds.
#[test]
fn criterion_1_oracle_equivalence() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x0AC1);
    let opts = TableOpts {
        max_data_rows: 8,
        max_data_cols: 8,
        max_depth: 3,
        ..Default::default()
    };
    // ORACLE_CASES scales the sweep up for longer runs
    let target: usize = std::env::var("ORACLE_CASES")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(10_000);
    let mut cases = 0usize;
    let mut mismatches = Vec::new();
    while cases < target {
        let table = random_table(&mut rng, &opts);
        for _ in 0..5 {
            let bound = random_bound_program(&mut rng, &table, 6);
            let fast = execute_bound(&bound, &table);
            let slow = oracle::run(&bound, &table);
            if !oracle::agree(&fast, &slow) {
                mismatches.push(format!(
                    "table {} program {:?}: interp {:?} vs oracle {:?}",
                    table.table_id, bound, fast, slow
                ));
            }
            cases += 1;
        }
    }
    let elapsed = started.elapsed();
    let ok = mismatches.is_empty() && elapsed.as_secs() < 60;
    gate(
        "1 (oracle equivalence)",
        ok,
        &format!(
            "{cases} cases, {} mismatches, {:.1}s{}",
            mismatches.len(),
            elapsed.as_secs_f64(),
            mismatches
                .first()
                .map(|m| format!("; first: {m}"))
                .unwrap_or_default()
        ),
    );
}

/// Criterion 2: the three reference programs parse, validate, and execute on
/// the bundled fixture to 8.5, ["u.s."], and 7.2.
#[test]
fn criterion_2_reference_programs() {
    let table = load_fixture_table("tables/f1.json");
    let programs = [
        "(filter_tree 2012) (filter_tree china) (filter_level LEFT_2) (filter_tree gdp) (filter_level TOP_1)",
        "(filter_tree 2012) (filter_level LEFT_2) (filter_tree gdp) (filter_level TOP_1) (argmax 1)",
        "(filter_tree u.s. china) (filter_level LEFT_2) (filter_tree gdp) (filter_level TOP_1) (difference)",
    ];
    let mut results = Vec::new();
    for text in &programs {
        let program = parse_program(text).expect("reference programs parse");
        let value = execute(&program, &table).expect("reference programs execute");
        results.push(value.answer_values(&table));
    }
    let ok = results[0] == vec![CellValue::number(8.5)]
        && results[1] == vec![CellValue::text("u.s.")]
        && match &results[2][..] {
            [CellValue::Number { value }] => (value - 7.2).abs() < 1e-12,
            _ => false,
        };
    gate(
        "2 (reference program reproduction)",
        ok,
        &format!("results = {results:?}"),
    );
}

/// Criterion 3: every annotation formula template evaluates on a 3x4 grid to
/// the value an independent brute-force computation gives.
#[test]
fn criterion_3_formula_oracle() {
    // A1:D3 with labels in column A and numbers elsewhere
    let labels = ["x", "y", "z"];
    let b = [7.0, 4.0, 9.0];
    let c = [3.5, 2.0, 1.5];
    let d = [5.0, 2.0, 9.0];
    let doc = TableDoc {
        table_id: "grid3x4".into(),
        cells: (0..3)
            .map(|r| {
                vec![
                    labels[r].to_string(),
                    hiertable::text::render_number(b[r]),
                    hiertable::text::render_number(c[r]),
                    hiertable::text::render_number(d[r]),
                ]
            })
            .collect(),
        merged: vec![],
        formats: None,
        top_header_rows: 1,
        left_header_cols: 1,
        top_tree: None,
        left_tree: None,
    };
    let table = table_from_doc(&doc, true).unwrap();

    // brute-force expectations computed with plain loops over the arrays
    let sum: f64 = d.iter().sum();
    let avg = sum / d.len() as f64;
    let max = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = d.iter().copied().fold(f64::INFINITY, f64::min);
    let count = d.len() as f64;
    let mut sorted = d;
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let small1 = sorted[0];
    let small2 = sorted[1];
    let lookup = |needle: f64| labels[d.iter().position(|&x| x == needle).unwrap()];

    let numeric_cases: Vec<(&str, f64)> = vec![
        ("=SUM(D1:D3)", sum),     // frozen: 16
        ("=AVERAGE(D1:D3)", avg), // frozen: 16/3
        ("=MAX(D1:D3)", max),     // frozen: 9
        ("=MIN(D1:D3)", min),     // frozen: 2
        ("=COUNT(D1:D3)", count), // frozen: 3
        ("=-B2", -b[1]),          // frozen: -4
        ("=B2%", b[1] / 100.0),   // frozen: 0.04
        ("=D1-D2", d[0] - d[1]),  // frozen: 3
        ("=D1/D2", d[0] / d[1]),  // frozen: 2.5
    ];
    let frozen = [16.0, 16.0 / 3.0, 9.0, 2.0, 3.0, -4.0, 0.04, 3.0, 2.5];
    let text_cases: Vec<(&str, &str)> = vec![
        ("=XLOOKUP(SMALL(D1:D3, 1), D1:D3, A1:A3)", lookup(small1)), // frozen: y
        ("=XLOOKUP(SMALL(D1:D3, 2), D1:D3, A1:A3)", lookup(small2)), // frozen: x
        (
            "=IF(B1>B2, A1, A2)",
            if b[0] > b[1] { labels[0] } else { labels[1] },
        ), // frozen: x
        (
            "=IF(B1<B2, A1, A2)",
            if b[0] < b[1] { labels[0] } else { labels[1] },
        ), // frozen: y
    ];
    let frozen_text = ["y", "x", "x", "y"];

    let mut failures = Vec::new();
    for (i, (formula, expected)) in numeric_cases.iter().enumerate() {
        assert_eq!(*expected, frozen[i], "oracle drifted from frozen value");
        match parse_formula(formula).and_then(|ast| eval_formula(&ast, &table)) {
            Ok(CellValue::Number { value }) if (value - expected).abs() < 1e-12 => {}
            other => failures.push(format!("{formula} -> {other:?}, want {expected}")),
        }
    }
    for (i, (formula, expected)) in text_cases.iter().enumerate() {
        assert_eq!(
            *expected, frozen_text[i],
            "oracle drifted from frozen value"
        );
        match parse_formula(formula).and_then(|ast| eval_formula(&ast, &table)) {
            Ok(CellValue::Text { value }) if value == *expected => {}
            other => failures.push(format!("{formula} -> {other:?}, want {expected}")),
        }
    }
    gate(
        "3 (formula oracle)",
        failures.is_empty(),
        &format!(
            "{} templates checked{}",
            numeric_cases.len() + text_cases.len(),
            failures
                .first()
                .map(|f| format!("; first failure: {f}"))
                .unwrap_or_default()
        ),
    );
}

/// Criterion 4: on the engineered 50-sample suite, partial supervision finds
/// strictly fewer consistent programs than weak supervision, every partial
/// program satisfies at least two constraints, and the top-1 partial
/// programs are never spurious. Budget 15,000 per sample, under 5 minutes.
#[test]
fn criterion_4_constraint_pruning() {
    let started = Instant::now();
    let suite = spurious_suite::build();
    let base = SearchConfig {
        max_samples_per_item: 15_000,
        seed: 99,
        ..Default::default()
    };
    let weak = SearchConfig {
        mode: SearchMode::Weak,
        ..base.clone()
    };
    let partial = SearchConfig {
        mode: SearchMode::Partial,
        ..base
    };

    let mut weak_total = 0usize;
    let mut partial_total = 0usize;
    let mut under_constrained = 0usize;
    let mut missing_top1 = Vec::new();
    let mut predictions = Vec::new();
    for case in &suite {
        let weak_hits = random_search(&case.sample, &case.table, &weak);
        let partial_hits = random_search(&case.sample, &case.table, &partial);
        weak_total += weak_hits.len();
        partial_total += partial_hits.len();
        under_constrained += partial_hits
            .iter()
            .filter(|h| h.report.satisfied_count < 2)
            .count();
        match partial_hits.first() {
            Some(top1) => predictions.push(Prediction {
                sample_id: case.sample.sample_id.clone(),
                program: Some(top1.text.clone()),
                answer: None,
            }),
            None => missing_top1.push(case.sample.sample_id.clone()),
        }
    }

    let samples: Vec<Sample> = suite.iter().map(|c| c.sample.clone()).collect();
    let tables: BTreeMap<String, HierTable> = suite
        .iter()
        .map(|c| (c.table.table_id.clone(), c.table.clone()))
        .collect();
    let gold_programs: BTreeMap<String, String> = suite
        .iter()
        .map(|c| (c.sample.sample_id.clone(), c.gold_program.clone()))
        .collect();
    let dataset = EvalDataset {
        samples: &samples,
        tables: &tables,
    };
    let rate = spurious_rate(&predictions, &gold_programs, &dataset).unwrap();
    let elapsed = started.elapsed();

    let weak_mean = weak_total as f64 / suite.len() as f64;
    let partial_mean = partial_total as f64 / suite.len() as f64;
    let ok = partial_mean < weak_mean
        && under_constrained == 0
        && missing_top1.is_empty()
        && rate == 0.0
        && elapsed.as_secs() < 300;
    gate(
        "4 (constraint pruning)",
        ok,
        &format!(
            "{} samples: weak mean {weak_mean:.2}, partial mean {partial_mean:.2}, \
             {under_constrained} under-constrained, spurious rate {rate:.3}, {:.1}s{}",
            suite.len(),
            elapsed.as_secs_f64(),
            if missing_top1.is_empty() {
                String::new()
            } else {
                format!("; no partial program for {missing_top1:?}")
            }
        ),
    );
}

/// Criterion 5: dataset-scale reproductions, run only when a dataset in the
/// canonical format is supplied via HIERTABLE_DATA (a directory holding
/// tables/*.json and samples.jsonl).
#[test]
fn criterion_5_dataset_reproductions() {
    let Some(dir) = std::env::var_os("HIERTABLE_DATA") else {
        println!(
            "acceptance criterion 5 (dataset reproductions): SKIP — no dataset supplied; \
             set HIERTABLE_DATA to a directory with tables/*.json and samples.jsonl"
        );
        return;
    };
    let dir = PathBuf::from(dir);
    let mut tables: BTreeMap<String, HierTable> = BTreeMap::new();
    for entry in std::fs::read_dir(dir.join("tables")).expect("tables dir") {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            let table = load_table(&std::fs::read(&path).unwrap()).unwrap();
            tables.insert(table.table_id.clone(), table);
        }
    }
    let samples =
        load_samples(&std::fs::read_to_string(dir.join("samples.jsonl")).unwrap()).unwrap();
    let qa: Vec<&Sample> = samples
        .iter()
        .filter(|s| !s.answers.is_empty() && tables.contains_key(&s.table_id))
        .collect();

    // (a) mean consistent programs per sample, weak vs partial
    let weak = SearchConfig {
        max_samples_per_item: 15_000,
        seed: 1,
        ..Default::default()
    };
    let partial = SearchConfig {
        mode: SearchMode::Partial,
        ..weak.clone()
    };
    let mut weak_total = 0usize;
    let mut partial_total = 0usize;
    // (b) coverage within 300 draws
    let probe = SearchConfig {
        max_samples_per_item: 300,
        ..weak.clone()
    };
    let mut covered = 0usize;
    for s in &qa {
        let t = &tables[&s.table_id];
        weak_total += random_search(s, t, &weak).len();
        partial_total += random_search(s, t, &partial).len();
        if !random_search(s, t, &probe).is_empty() {
            covered += 1;
        }
    }
    let n = qa.len() as f64;
    let weak_mean = weak_total as f64 / n;
    let partial_mean = partial_total as f64 / n;
    let coverage = covered as f64 / n;

    // (c) stored formulas reproduce stored answers
    let mut formula_total = 0usize;
    let mut formula_ok = 0usize;
    for s in &qa {
        let Some(text) = &s.formula else { continue };
        if !text.starts_with('=') {
            continue;
        }
        let t = &tables[&s.table_id];
        formula_total += 1;
        if let Ok(value) = parse_formula(text).and_then(|ast| eval_formula(&ast, t)) {
            let gold: Vec<CellValue> = s.answers.iter().map(AnswerValue::to_cell_value).collect();
            if hiertable::eval::match_answer(&[value], &gold) {
                formula_ok += 1;
            }
        }
    }
    let formula_rate = if formula_total == 0 {
        1.0
    } else {
        formula_ok as f64 / formula_total as f64
    };

    let ok_a =
        (weak_mean - 6.12).abs() <= 6.12 * 0.25 && (partial_mean - 2.13).abs() <= 2.13 * 0.25;
    let ok_b = (coverage - 0.783).abs() <= 0.05;
    let ok_c = formula_rate >= 0.99;
    gate(
        "5 (dataset reproductions)",
        ok_a && ok_b && ok_c,
        &format!(
            "weak mean {weak_mean:.2} (target 6.12±25%), partial mean {partial_mean:.2} \
             (target 2.13±25%), coverage@300 {coverage:.3} (target 0.783±0.05), \
             formula reproduction {formula_rate:.3} (target ≥0.99)"
        ),
    );
}

/// Criterion 6: extraction recovers the hand-labeled trees on at least 19 of
/// the 20 corpus tables.
#[test]
fn criterion_6_hierarchy_extraction() {
    let mut matched = 0usize;
    let mut misses = Vec::new();
    for i in 1..=20 {
        let rel = format!("hierarchy/t{i:02}.json");
        let bytes = std::fs::read(fixture_path(&rel)).expect("corpus fixture exists");
        let doc: TableDoc = serde_json::from_slice(&bytes).unwrap();
        let gold_left = doc
            .left_tree
            .clone()
            .expect("corpus tables carry gold trees");
        let gold_top = doc
            .top_tree
            .clone()
            .expect("corpus tables carry gold trees");
        match table_from_doc(&doc, false) {
            Ok(extracted) => {
                let got = save_table(&extracted);
                if got.left_tree.as_ref() == Some(&gold_left)
                    && got.top_tree.as_ref() == Some(&gold_top)
                {
                    matched += 1;
                } else {
                    misses.push(doc.table_id.clone());
                }
            }
            Err(e) => misses.push(format!("{} (error: {e})", doc.table_id)),
        }
    }
    gate(
        "6 (hierarchy extraction)",
        matched >= 19,
        &format!(
            "{matched}/20 trees match gold{}",
            if misses.is_empty() {
                String::new()
            } else {
                format!("; misses: {misses:?}")
            }
        ),
    );
}

const GOLDEN_TABLES: [&str; 10] = [
    "tables/f1.json",
    "hierarchy/t02.json",
    "hierarchy/t05.json",
    "hierarchy/t07.json",
    "hierarchy/t08.json",
    "hierarchy/t11.json",
    "hierarchy/t12.json",
    "hierarchy/t15.json",
    "hierarchy/t17.json",
    "hierarchy/t19.json",
];

fn golden_outputs(table: &HierTable) -> [(String, String); 4] {
    let first = (table.top_header_rows, table.left_header_cols);
    let last = (table.n_rows - 1, table.n_cols - 1);
    let highlights = [first, last];
    let subtable: Vec<(usize, usize)> = select_subtable(table, &highlights)
        .unwrap()
        .into_iter()
        .collect();
    [
        ("linearize.txt".into(), linearize_table(table)),
        (
            "flatten.json".into(),
            serde_json::to_string_pretty(&flatten_for_export(table)).unwrap(),
        ),
        (
            "subtable.json".into(),
            serde_json::to_string(&subtable).unwrap(),
        ),
        (
            "nlg.txt".into(),
            serialize_for_nlg(table, &highlights, &["diff".to_string()], &[1.5]).unwrap(),
        ),
    ]
}

/// Criterion 7: the four serialization surfaces are byte-identical to the
/// committed goldens (regenerate with UPDATE_GOLDENS=1).
#[test]
fn criterion_7_golden_files() {
    let update = std::env::var_os("UPDATE_GOLDENS").is_some();
    let mut failures = Vec::new();
    for rel in GOLDEN_TABLES {
        let table = load_fixture_table(rel);
        for (suffix, produced) in golden_outputs(&table) {
            let golden_rel = format!("goldens/{}.{suffix}", table.table_id);
            let path = fixture_path(&golden_rel);
            if update {
                std::fs::create_dir_all(path.parent().unwrap()).unwrap();
                std::fs::write(&path, &produced).unwrap();
                continue;
            }
            match std::fs::read_to_string(&path) {
                Ok(expected) if expected == produced => {}
                Ok(_) => failures.push(golden_rel),
                Err(e) => failures.push(format!("{golden_rel} ({e})")),
            }
        }
        // determinism within a run
        let again = golden_outputs(&table);
        assert_eq!(again, golden_outputs(&table), "outputs must be stable");
    }
    if update {
        println!("acceptance criterion 7 (golden files): regenerated goldens");
        return;
    }
    gate(
        "7 (golden files)",
        failures.is_empty(),
        &format!(
            "{} outputs over {} fixtures byte-checked{}",
            4 * GOLDEN_TABLES.len(),
            GOLDEN_TABLES.len(),
            failures
                .first()
                .map(|f| format!("; first mismatch: {f}"))
                .unwrap_or_default()
        ),
    );
}

/// Criterion 8: neural-model figures are out of scope at desk scale; the
/// property suites above stand in for them.
#[test]
fn criterion_8_exclusions() {
    println!(
        "acceptance criterion 8 (exclusions): PASS — end-to-end neural accuracy, generation \
         metrics, level-wise and cross-domain figures require trained models and are excluded; \
         criteria 1-7 cover the symbolic engine"
    );
}

/// The bundled sample files evaluate end to end: gold programs score 1.0
/// accuracy and zero spurious rate.
#[test]
fn bundled_sample_files_evaluate() {
    let table = load_fixture_table("tables/f1.json");
    let samples =
        load_samples(&std::fs::read_to_string(fixture_path("samples/f1_samples.jsonl")).unwrap())
            .unwrap();
    let qa: Vec<Sample> = samples
        .into_iter()
        .filter(|s| !s.answers.is_empty())
        .collect();
    let mut tables = BTreeMap::new();
    tables.insert(table.table_id.clone(), table);
    let dataset = EvalDataset {
        samples: &qa,
        tables: &tables,
    };

    let predictions: Vec<Prediction> =
        std::fs::read_to_string(fixture_path("samples/f1_predictions.jsonl"))
            .unwrap()
            .lines()
            .map(|l| serde_json::from_str(l).unwrap())
            .collect();
    assert_eq!(execution_accuracy(&predictions, &dataset).unwrap(), 1.0);

    let gold_programs: BTreeMap<String, String> =
        std::fs::read_to_string(fixture_path("samples/f1_gold_programs.jsonl"))
            .unwrap()
            .lines()
            .map(|l| {
                let v: serde_json::Value = serde_json::from_str(l).unwrap();
                (
                    v["sample_id"].as_str().unwrap().to_string(),
                    v["program"].as_str().unwrap().to_string(),
                )
            })
            .collect();
    let with_programs: Vec<Prediction> = predictions
        .into_iter()
        .filter(|p| p.program.is_some())
        .collect();
    assert_eq!(
        spurious_rate(&with_programs, &gold_programs, &dataset).unwrap(),
        0.0
    );
}

/// Stored formulas reproduce stored answers on the bundled samples.
#[test]
fn bundled_formulas_reproduce_answers() {
    let table = load_fixture_table("tables/f1.json");
    let samples =
        load_samples(&std::fs::read_to_string(fixture_path("samples/f1_samples.jsonl")).unwrap())
            .unwrap();
    for sample in samples.iter().filter(|s| !s.answers.is_empty()) {
        let Some(text) = sample.formula.as_deref().filter(|t| t.starts_with('=')) else {
            continue;
        };
        let value = parse_formula(text)
            .and_then(|ast| eval_formula(&ast, &table))
            .unwrap_or_else(|e| panic!("{}: {e}", sample.sample_id));
        let gold: Vec<CellValue> = sample
            .answers
            .iter()
            .map(AnswerValue::to_cell_value)
            .collect();
        assert!(
            hiertable::eval::match_answer(&[value], &gold),
            "formula of {} does not reproduce its answer",
            sample.sample_id
        );
    }
}

/// Search reproduces the reference programs from the bundled samples.
#[test]
fn bundled_samples_are_searchable() {
    let table = load_fixture_table("tables/f1.json");
    let samples =
        load_samples(&std::fs::read_to_string(fixture_path("samples/f1_samples.jsonl")).unwrap())
            .unwrap();
    let config = SearchConfig {
        max_samples_per_item: 8000,
        seed: 5,
        ..Default::default()
    };
    for sample in samples.iter().filter(|s| !s.answers.is_empty()) {
        let hits = random_search(sample, &table, &config);
        assert!(
            !hits.is_empty(),
            "no consistent program found for {}",
            sample.sample_id
        );
        let gold: Vec<CellValue> = sample
            .answers
            .iter()
            .map(AnswerValue::to_cell_value)
            .collect();
        for hit in &hits {
            let value = execute(&hit.program, &table).unwrap();
            assert!(hiertable::eval::match_answer(
                &value.answer_values(&table),
                &gold
            ));
        }
    }
}
