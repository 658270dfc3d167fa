//! Answer matching and the evaluation metrics.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::Sample;
use crate::interp::{execute_traced, BoundProgram, ExecOutcome, ExecValue};
use crate::program::parse_program;
use crate::table::{CellValue, HierTable, Region};
use crate::text::{answer_eq, normalize_header};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("prediction references unknown sample id '{0}'")]
    UnknownSampleId(String),
    #[error("no gold program for sample '{0}'")]
    MissingGoldProgram(String),
    #[error("table '{0}' not found")]
    UnknownTableId(String),
}

/// Compares a predicted value list against gold answers as multisets.
/// Numbers match within 1e-6 relative tolerance (1e-9 absolute near zero);
/// strings match after normalization; numeric strings coerce to numbers.
pub fn match_answer(predicted: &[CellValue], gold: &[CellValue]) -> bool {
    if predicted.len() != gold.len() {
        return false;
    }
    // greedy multiset matching; answer lists are small
    let mut used = vec![false; gold.len()];
    for p in predicted {
        let mut found = false;
        for (i, g) in gold.iter().enumerate() {
            if !used[i] && values_match(p, g) {
                used[i] = true;
                found = true;
                break;
            }
        }
        if !found {
            return false;
        }
    }
    true
}

/// Convenience for matching an execution result against gold answers.
pub fn match_exec_answer(value: &ExecValue, table: &HierTable, gold: &[CellValue]) -> bool {
    match_answer(&value.answer_values(table), gold)
}

fn values_match(a: &CellValue, b: &CellValue) -> bool {
    match (numeric_view(a), numeric_view(b)) {
        (Some(x), Some(y)) => answer_eq(x, y),
        (None, None) => text_view(a) == text_view(b),
        _ => false,
    }
}

fn numeric_view(v: &CellValue) -> Option<f64> {
    match v {
        CellValue::Number { value } => Some(*value),
        CellValue::Text { value } => match crate::ingest::normalize_quantity(value) {
            CellValue::Number { value } => Some(value),
            _ => None,
        },
        _ => None,
    }
}

fn text_view(v: &CellValue) -> String {
    match v {
        CellValue::Text { value } | CellValue::Datetime { value } => normalize_header(value),
        CellValue::Number { value } => crate::text::render_number(*value),
        CellValue::Empty => String::new(),
    }
}

/// One prediction record: either a program to execute or a literal answer.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Prediction {
    pub sample_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub program: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub answer: Option<serde_json::Value>,
}

fn answer_values_from_json(value: &serde_json::Value) -> Vec<CellValue> {
    let scalar = |v: &serde_json::Value| match v {
        serde_json::Value::Number(n) => CellValue::number(n.as_f64().unwrap_or(f64::NAN)),
        serde_json::Value::String(s) => CellValue::text(s.clone()),
        serde_json::Value::Bool(b) => CellValue::text(b.to_string()),
        serde_json::Value::Null => CellValue::Empty,
        other => CellValue::text(other.to_string()),
    };
    match value {
        serde_json::Value::Array(items) => items.iter().map(scalar).collect(),
        other => vec![scalar(other)],
    }
}

/// A dataset to evaluate against: samples plus their tables keyed by id.
pub struct EvalDataset<'a> {
    pub samples: &'a [Sample],
    pub tables: &'a BTreeMap<String, HierTable>,
}

impl<'a> EvalDataset<'a> {
    fn table_for(&self, sample: &Sample) -> Result<&'a HierTable, EvalError> {
        self.tables
            .get(&sample.table_id)
            .ok_or_else(|| EvalError::UnknownTableId(sample.table_id.clone()))
    }
}

/// Whether one prediction is correct for its sample.
fn prediction_correct(prediction: &Prediction, sample: &Sample, table: &HierTable) -> bool {
    let gold: Vec<CellValue> = sample.answers.iter().map(|a| a.to_cell_value()).collect();
    if let Some(text) = &prediction.program {
        let Ok(program) = parse_program(text) else {
            return false;
        };
        let Ok(value) = crate::interp::execute(&program, table) else {
            return false;
        };
        return match_exec_answer(&value, table, &gold);
    }
    if let Some(answer) = &prediction.answer {
        return match_answer(&answer_values_from_json(answer), &gold);
    }
    false
}

/// Fraction of samples whose executed prediction matches gold. Samples
/// without a prediction count as wrong; predictions for unknown samples are
/// an error.
pub fn execution_accuracy(
    predictions: &[Prediction],
    dataset: &EvalDataset,
) -> Result<f64, EvalError> {
    let by_id: BTreeMap<&str, &Sample> = dataset
        .samples
        .iter()
        .map(|s| (s.sample_id.as_str(), s))
        .collect();
    for p in predictions {
        if !by_id.contains_key(p.sample_id.as_str()) {
            return Err(EvalError::UnknownSampleId(p.sample_id.clone()));
        }
    }
    if dataset.samples.is_empty() {
        return Ok(0.0);
    }
    let by_pred: BTreeMap<&str, &Prediction> = predictions
        .iter()
        .map(|p| (p.sample_id.as_str(), p))
        .collect();
    let mut correct = 0usize;
    for sample in dataset.samples {
        let Some(prediction) = by_pred.get(sample.sample_id.as_str()) else {
            continue;
        };
        let table = dataset.table_for(sample)?;
        if prediction_correct(prediction, sample, table) {
            correct += 1;
        }
    }
    Ok(correct as f64 / dataset.samples.len() as f64)
}

/// Semantic identity of two executions: same bound rendering, or same
/// selected region, operator kind, and result.
fn semantically_equal(
    table: &HierTable,
    a: &(BoundProgram, ExecOutcome),
    b: &(BoundProgram, ExecOutcome),
) -> bool {
    if a.0.canonical_text(table) == b.0.canonical_text(table) {
        return true;
    }
    let kind = |p: &BoundProgram| p.operator().map(|o| o.kind());
    let region_eq = |x: &Region, y: &Region| x.rows == y.rows && x.cols == y.cols;
    kind(&a.0) == kind(&b.0)
        && region_eq(&a.1.pre_operator_region, &b.1.pre_operator_region)
        && a.1.value.answer_values(table) == b.1.value.answer_values(table)
}

/// Among samples answered correctly by a program prediction, the fraction
/// whose program is not semantically equal to the gold program.
pub fn spurious_rate(
    predictions: &[Prediction],
    gold_programs: &BTreeMap<String, String>,
    dataset: &EvalDataset,
) -> Result<f64, EvalError> {
    let by_id: BTreeMap<&str, &Sample> = dataset
        .samples
        .iter()
        .map(|s| (s.sample_id.as_str(), s))
        .collect();
    let mut correct = 0usize;
    let mut spurious = 0usize;
    for prediction in predictions {
        let sample = by_id
            .get(prediction.sample_id.as_str())
            .ok_or_else(|| EvalError::UnknownSampleId(prediction.sample_id.clone()))?;
        let Some(text) = &prediction.program else {
            continue;
        };
        let table = dataset.table_for(sample)?;
        if !prediction_correct(prediction, sample, table) {
            continue;
        }
        correct += 1;
        let gold_text = gold_programs
            .get(&prediction.sample_id)
            .ok_or_else(|| EvalError::MissingGoldProgram(prediction.sample_id.clone()))?;
        let predicted = parse_program(text)
            .ok()
            .and_then(|p| execute_traced(&p, table).ok());
        let gold = parse_program(gold_text)
            .ok()
            .and_then(|p| execute_traced(&p, table).ok());
        match (predicted, gold) {
            (Some(p), Some(g)) if semantically_equal(table, &p, &g) => {}
            _ => spurious += 1,
        }
    }
    if correct == 0 {
        return Ok(0.0);
    }
    Ok(spurious as f64 / correct as f64)
}
