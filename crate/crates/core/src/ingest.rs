//! File ingestion: the canonical table/sample schemas, quantity
//! normalization, and the dataset admission filters.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::table::{
    build_table, fill_spans, CellValue, HeaderNode, HeaderTree, HierTable, MergeRect, RawCell,
    Side, TableError,
};
use crate::text::normalize_header;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("malformed json: {0}")]
    MalformedJson(#[from] serde_json::Error),
    #[error("schema violation: {0}")]
    SchemaViolation(String),
    #[error(transparent)]
    Table(#[from] TableError),
}

// ---------------------------------------------------------------------------
// quantity normalization
// ---------------------------------------------------------------------------

const CURRENCY: &[char] = &['$', '€', '£', '¥'];

/// Parses a raw cell string into a [`CellValue`].
///
/// Numeric parsing strips internal commas, a leading currency symbol, a
/// single trailing `%` (dividing by 100), whitespace-set-off footnote
/// markers, and `(...)` negative notation. ISO dates become datetimes.
/// Everything else falls back to text; never fails.
pub fn normalize_quantity(raw: &str) -> CellValue {
    let trimmed = raw.trim();
    if trimmed.is_empty() {
        return CellValue::Empty;
    }
    if is_iso_datetime(trimmed) {
        return CellValue::Datetime {
            value: trimmed.to_string(),
        };
    }
    match parse_number(trimmed) {
        Some(x) if x.is_finite() => CellValue::Number { value: x },
        _ => CellValue::Text {
            value: trimmed.to_string(),
        },
    }
}

fn parse_number(s: &str) -> Option<f64> {
    let mut tokens: Vec<&str> = s.split_whitespace().collect();
    // strip at most one footnote marker from each end, but only when more
    // than one token remains; a lone marker-looking token is data
    if tokens.len() > 1 && crate::text::is_footnote_marker(tokens[tokens.len() - 1]) {
        tokens.pop();
    }
    if tokens.len() > 1 && crate::text::is_footnote_marker(tokens[0]) {
        tokens.remove(0);
    }
    let joined = tokens.join("");
    let mut body = joined.as_str();

    let mut negative = false;
    if body.starts_with('(') && body.ends_with(')') && body.len() > 2 {
        negative = true;
        body = &body[1..body.len() - 1];
    }
    let mut body = body.trim().to_string();
    if let Some(rest) = body.strip_prefix(CURRENCY) {
        body = rest.trim().to_string();
    }
    let mut percent = false;
    if let Some(rest) = body.strip_suffix('%') {
        percent = true;
        body = rest.trim().to_string();
    }
    body.retain(|c| c != ',');
    if body.is_empty() {
        return None;
    }
    let mut value: f64 = body.parse().ok()?;
    if percent {
        value /= 100.0;
    }
    if negative {
        value = -value;
    }
    Some(value)
}

fn is_iso_datetime(s: &str) -> bool {
    let date = s.split('T').next().unwrap_or(s);
    let parts: Vec<&str> = date.split('-').collect();
    if parts.len() != 3 {
        return false;
    }
    let ok_len = parts[0].len() == 4 && parts[1].len() == 2 && parts[2].len() == 2;
    if !ok_len || !parts.iter().all(|p| p.chars().all(|c| c.is_ascii_digit())) {
        return false;
    }
    let month: u32 = parts[1].parse().unwrap_or(0);
    let day: u32 = parts[2].parse().unwrap_or(0);
    (1..=12).contains(&month) && (1..=31).contains(&day)
}

/// Renders a value back to cell text. `normalize_quantity` is idempotent on
/// this rendering.
pub fn render_value(value: &CellValue) -> String {
    match value {
        CellValue::Number { value } => crate::text::render_number(*value),
        CellValue::Text { value } | CellValue::Datetime { value } => value.clone(),
        CellValue::Empty => String::new(),
    }
}

// ---------------------------------------------------------------------------
// canonical table schema
// ---------------------------------------------------------------------------

/// On-disk table document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableDoc {
    pub table_id: String,
    pub cells: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub merged: Vec<MergeRect>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub formats: Option<Vec<Vec<CellFormat>>>,
    pub top_header_rows: usize,
    pub left_header_cols: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub top_tree: Option<TreeDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub left_tree: Option<TreeDoc>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct CellFormat {
    #[serde(default)]
    pub bold: bool,
    #[serde(default)]
    pub indent: u32,
}

/// On-disk explicit tree node: grid cell, directly-owned data-axis indices,
/// and children.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeDoc {
    pub cell: Option<(usize, usize)>,
    #[serde(default)]
    pub own: Vec<usize>,
    #[serde(default)]
    pub children: Vec<TreeDoc>,
}

impl TreeDoc {
    fn into_tree(self, side: Side, grid: &[Vec<String>]) -> Result<HeaderTree, IngestError> {
        let mut tree = HeaderTree {
            side,
            nodes: vec![],
        };
        build_nodes(&self, 0, None, &mut tree, grid)?;
        fill_spans(&mut tree);
        return Ok(tree);

        fn build_nodes(
            doc: &TreeDoc,
            depth: usize,
            parent: Option<usize>,
            tree: &mut HeaderTree,
            grid: &[Vec<String>],
        ) -> Result<(), IngestError> {
            let index = tree.nodes.len();
            let text = match doc.cell {
                Some((r, c)) => {
                    let row = grid.get(r).ok_or_else(|| {
                        IngestError::SchemaViolation(format!("tree cell row {r} out of bounds"))
                    })?;
                    let raw = row.get(c).ok_or_else(|| {
                        IngestError::SchemaViolation(format!("tree cell col {c} out of bounds"))
                    })?;
                    normalize_header(raw)
                }
                None if depth == 0 => String::new(),
                None => {
                    return Err(IngestError::SchemaViolation(
                        "non-root tree node without a cell".into(),
                    ))
                }
            };
            tree.nodes.push(HeaderNode {
                index,
                cell: doc.cell,
                text,
                depth,
                children: vec![],
                own_indices: doc.own.clone(),
                span: None,
            });
            if let Some(p) = parent {
                tree.nodes[p].children.push(index);
            }
            for child in &doc.children {
                build_nodes(child, depth + 1, Some(index), tree, grid)?;
            }
            Ok(())
        }
    }

    fn from_tree(tree: &HeaderTree, index: usize) -> TreeDoc {
        let node = tree.node(index);
        TreeDoc {
            cell: node.cell,
            own: node.own_indices.clone(),
            children: node
                .children
                .iter()
                .map(|&c| TreeDoc::from_tree(tree, c))
                .collect(),
        }
    }
}

/// Parses and validates a canonical table document.
pub fn load_table(bytes: &[u8]) -> Result<HierTable, IngestError> {
    let doc: TableDoc = serde_json::from_slice(bytes)?;
    table_from_doc(&doc, true)
}

/// Builds a table from a parsed document. With `use_explicit_trees = false`
/// any embedded trees are ignored and extraction runs instead, which lets
/// hand-labeled trees serve as extraction gold.
pub fn table_from_doc(doc: &TableDoc, use_explicit_trees: bool) -> Result<HierTable, IngestError> {
    if doc.cells.is_empty() {
        return Err(IngestError::SchemaViolation(
            "cells must be non-empty".into(),
        ));
    }
    let n_cols = doc.cells[0].len();
    if doc.cells.iter().any(|r| r.len() != n_cols) {
        return Err(IngestError::SchemaViolation(
            "cells must be rectangular".into(),
        ));
    }
    if let Some(f) = &doc.formats {
        if f.len() != doc.cells.len() || f.iter().any(|r| r.len() != n_cols) {
            return Err(IngestError::SchemaViolation(
                "formats shape must match cells".into(),
            ));
        }
    }
    let grid: Vec<Vec<RawCell>> = doc
        .cells
        .iter()
        .enumerate()
        .map(|(r, row)| {
            row.iter()
                .enumerate()
                .map(|(c, text)| {
                    let fmt = doc
                        .formats
                        .as_ref()
                        .map(|f| f[r][c].clone())
                        .unwrap_or_default();
                    RawCell {
                        text: text.clone(),
                        bold: fmt.bold,
                        indent: fmt.indent,
                    }
                })
                .collect()
        })
        .collect();

    let trees = if use_explicit_trees {
        match (&doc.left_tree, &doc.top_tree) {
            (Some(l), Some(t)) => Some((
                l.clone().into_tree(Side::Left, &doc.cells)?,
                t.clone().into_tree(Side::Top, &doc.cells)?,
            )),
            (None, None) => None,
            _ => {
                return Err(IngestError::SchemaViolation(
                    "explicit trees must be given for both sides or neither".into(),
                ))
            }
        }
    } else {
        None
    };

    Ok(build_table(
        doc.table_id.clone(),
        grid,
        doc.merged.clone(),
        doc.top_header_rows,
        doc.left_header_cols,
        trees,
    )?)
}

/// Writes a table back to the canonical schema (debug writer; inverse of
/// [`load_table`] on canonical documents).
pub fn save_table(table: &HierTable) -> TableDoc {
    let has_formats = table.grid.iter().flatten().any(|c| c.bold || c.indent > 0);
    TableDoc {
        table_id: table.table_id.clone(),
        cells: table
            .grid
            .iter()
            .map(|row| row.iter().map(|c| c.raw_text.clone()).collect())
            .collect(),
        merged: table.merges.clone(),
        formats: has_formats.then(|| {
            table
                .grid
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|c| CellFormat {
                            bold: c.bold,
                            indent: c.indent,
                        })
                        .collect()
                })
                .collect()
        }),
        top_header_rows: table.top_header_rows,
        left_header_cols: table.left_header_cols,
        top_tree: Some(TreeDoc::from_tree(&table.top_tree, 0)),
        left_tree: Some(TreeDoc::from_tree(&table.left_tree, 0)),
    }
}

// ---------------------------------------------------------------------------
// admission filters
// ---------------------------------------------------------------------------

/// Why a table was rejected by [`admit_table`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    TooFewRows,
    TooManyRows,
    TooFewCols,
    TooManyCols,
    CellTooManyNonAscii { row: usize, col: usize },
    CellTooManyTokens { row: usize, col: usize },
    TooDeep { side: Side },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "decision")]
pub enum AdmitDecision {
    Admit,
    Reject { reason: RejectReason },
}

impl AdmitDecision {
    pub fn is_admit(&self) -> bool {
        matches!(self, AdmitDecision::Admit)
    }
}

/// Applies the dataset filters: row/column counts strictly between 2 and 64,
/// at most one non-ASCII character and 20 whitespace tokens per cell, and
/// tree depth at most 4 per side.
pub fn admit_table(table: &HierTable) -> AdmitDecision {
    use AdmitDecision::Reject;
    if table.n_rows <= 2 {
        return Reject {
            reason: RejectReason::TooFewRows,
        };
    }
    if table.n_rows >= 64 {
        return Reject {
            reason: RejectReason::TooManyRows,
        };
    }
    if table.n_cols <= 2 {
        return Reject {
            reason: RejectReason::TooFewCols,
        };
    }
    if table.n_cols >= 64 {
        return Reject {
            reason: RejectReason::TooManyCols,
        };
    }
    for row in &table.grid {
        for cell in row {
            let non_ascii = cell.raw_text.chars().filter(|c| !c.is_ascii()).count();
            if non_ascii > 1 {
                return Reject {
                    reason: RejectReason::CellTooManyNonAscii {
                        row: cell.row,
                        col: cell.col,
                    },
                };
            }
            if cell.raw_text.split_whitespace().count() > 20 {
                return Reject {
                    reason: RejectReason::CellTooManyTokens {
                        row: cell.row,
                        col: cell.col,
                    },
                };
            }
        }
    }
    for side in [Side::Left, Side::Top] {
        if table.tree(side).max_depth() > 4 {
            return Reject {
                reason: RejectReason::TooDeep { side },
            };
        }
    }
    AdmitDecision::Admit
}

// ---------------------------------------------------------------------------
// samples
// ---------------------------------------------------------------------------

/// A QA/NLG annotation record. QA samples carry answers; NLG samples carry a
/// target text; a record may serve both tasks.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Sample {
    pub sample_id: String,
    pub table_id: String,
    pub question: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub answers: Vec<AnswerValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub formula: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub entity_links: BTreeMap<String, (usize, usize)>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub quantity_links: BTreeMap<String, QuantityLink>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub highlighted_cells: Option<Vec<(usize, usize)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operators: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_text: Option<String>,
}

/// A gold answer as stored on disk: a bare number or a string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AnswerValue {
    Number(f64),
    Text(String),
}

impl AnswerValue {
    pub fn to_cell_value(&self) -> CellValue {
        match self {
            AnswerValue::Number(x) => CellValue::Number { value: *x },
            AnswerValue::Text(s) => CellValue::Text { value: s.clone() },
        }
    }
}

/// A quantity alignment target: either a spreadsheet formula or a grid cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum QuantityLink {
    Cell((usize, usize)),
    Formula(String),
}

/// Parses one sample per JSONL line.
pub fn load_samples(text: &str) -> Result<Vec<Sample>, IngestError> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(|l| Ok(serde_json::from_str(l)?))
        .collect()
}

/// Validates a sample against its table: some task payload must exist and
/// all coordinates must be in bounds.
pub fn validate_sample(sample: &Sample, table: &HierTable) -> Result<(), IngestError> {
    if sample.answers.is_empty() && sample.target_text.is_none() {
        return Err(IngestError::SchemaViolation(format!(
            "sample {} has neither answers nor target_text",
            sample.sample_id
        )));
    }
    let mut coords: Vec<(usize, usize)> = sample.entity_links.values().copied().collect();
    for link in sample.quantity_links.values() {
        if let QuantityLink::Cell(rc) = link {
            coords.push(*rc);
        }
    }
    coords.extend(sample.highlighted_cells.iter().flatten().copied());
    for (r, c) in coords {
        if !table.in_bounds(r, c) {
            return Err(IngestError::SchemaViolation(format!(
                "sample {} references out-of-bounds cell ({r}, {c})",
                sample.sample_id
            )));
        }
    }
    Ok(())
}
