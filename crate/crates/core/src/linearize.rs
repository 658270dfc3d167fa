//! Flat text encodings of hierarchical tables.
//!
//! `linearize_table` produces the level-ordered header sequence consumed by
//! QA encoders, `flatten_for_export` unmerges cells for flat-table models,
//! and `select_subtable`/`serialize_for_nlg` build the conditioned input for
//! generation. Token spellings are a fixed contract: `[LEVEL]`, `[SEP]`,
//! `[OP]`, `[RES]`.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::table::{CellValue, HeaderTree, HierTable, NodeId, Side};
use crate::text::{render_number, round_sig};

#[derive(Debug, Error, PartialEq)]
pub enum LinearizeError {
    #[error("highlighted cell ({0}, {1}) out of bounds")]
    CellOutOfBounds(usize, usize),
    #[error("{operators} operators but {results} results")]
    LengthMismatch { operators: usize, results: usize },
}

/// Entity type of a header string: ISO dates and four-digit years are
/// datetimes, numeric strings are numbers, everything else is a string.
fn header_type(text: &str) -> &'static str {
    if let Ok(year) = text.parse::<u32>() {
        if (1000..=2999).contains(&year) && text.len() == 4 {
            return "datetime";
        }
    }
    match crate::ingest::normalize_quantity(text) {
        CellValue::Datetime { .. } => "datetime",
        CellValue::Number { .. } => "number",
        _ => "string",
    }
}

/// Emits headers in level order, left tree then top tree, each level led by
/// a `[LEVEL]` token. The first token stands for level zero of the left
/// tree; duplicate names within a level are emitted once.
pub fn linearize_table(table: &HierTable) -> String {
    let mut tokens: Vec<String> = Vec::new();
    let mut emit_levels = |tree: &HeaderTree, from_depth: usize| {
        let order = tree.document_order();
        for depth in from_depth..=tree.max_depth() {
            tokens.push("[LEVEL]".to_string());
            let mut seen: BTreeSet<&str> = BTreeSet::new();
            for &index in &order {
                let node = tree.node(index);
                if node.depth == depth && seen.insert(node.text.as_str()) {
                    tokens.push(format!("{} | {}", node.text, header_type(&node.text)));
                }
            }
        }
    };
    emit_levels(&table.left_tree, 0);
    emit_levels(&table.top_tree, 1);
    tokens.join(" ")
}

/// Number of `[LEVEL]` tokens `linearize_table` emits.
pub fn level_token_count(table: &HierTable) -> usize {
    table.left_tree.max_depth() + table.top_tree.max_depth() + 1
}

/// Unmerges every merged cell, duplicating its content into all covered
/// positions. The first top header row serves as column names for flat
/// consumers; data values are untouched.
pub fn flatten_for_export(table: &HierTable) -> Vec<Vec<String>> {
    (0..table.n_rows)
        .map(|r| {
            (0..table.n_cols)
                .map(|c| table.effective_text(r, c).to_string())
                .collect()
        })
        .collect()
}

fn node_at_cell(table: &HierTable, cell: (usize, usize)) -> Option<NodeId> {
    let anchor = table.grid[cell.0][cell.1].merge_anchor.unwrap_or(cell);
    for side in [Side::Left, Side::Top] {
        let tree = table.tree(side);
        for index in tree.document_order() {
            if tree.node(index).cell == Some(anchor) {
                return Some(NodeId::new(side, index));
            }
        }
    }
    None
}

/// Grows a highlighted cell set into a coherent sub-table: highlighted
/// headers pull in the data cells they index, data cells pull in their
/// owning headers on both axes, and every header pulls in its ancestors.
/// Returns grid coordinates.
pub fn select_subtable(
    table: &HierTable,
    highlighted: &[(usize, usize)],
) -> Result<BTreeSet<(usize, usize)>, LinearizeError> {
    let mut data: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut headers: BTreeSet<NodeId> = BTreeSet::new();
    let mut extra: BTreeSet<(usize, usize)> = BTreeSet::new();

    for &(r, c) in highlighted {
        if !table.in_bounds(r, c) {
            return Err(LinearizeError::CellOutOfBounds(r, c));
        }
        let in_data = r >= table.top_header_rows && c >= table.left_header_cols;
        if in_data {
            data.insert((r, c));
        } else if let Some(node) = node_at_cell(table, (r, c)) {
            headers.insert(node);
            // a highlighted header pulls in every data cell it indexes
            let covered = table.tree(node.side).subtree_indices(node.index);
            match node.side {
                Side::Top => {
                    for col in covered {
                        for row in 0..table.n_data_rows() {
                            data.insert((
                                table.top_header_rows + row,
                                table.left_header_cols + col,
                            ));
                        }
                    }
                }
                Side::Left => {
                    for row in covered {
                        for col in 0..table.n_data_cols() {
                            data.insert((
                                table.top_header_rows + row,
                                table.left_header_cols + col,
                            ));
                        }
                    }
                }
            }
        } else {
            extra.insert((r, c));
        }
    }

    // data cells pull their owning headers on both axes
    for &(r, c) in &data {
        let data_row = r - table.top_header_rows;
        let data_col = c - table.left_header_cols;
        if let Some(owner) = table.left_tree.owner_of(data_row) {
            headers.insert(NodeId::new(Side::Left, owner));
        }
        if let Some(owner) = table.top_tree.owner_of(data_col) {
            headers.insert(NodeId::new(Side::Top, owner));
        }
    }

    // close headers under ancestors
    let mut frontier: Vec<NodeId> = headers.iter().copied().collect();
    while let Some(id) = frontier.pop() {
        if let Some(parent) = table.tree(id.side).parent_of(id.index) {
            if parent != 0 {
                let pid = NodeId::new(id.side, parent);
                if headers.insert(pid) {
                    frontier.push(pid);
                }
            }
        }
    }

    let mut out = extra;
    out.extend(data);
    out.extend(headers.iter().filter_map(|&id| table.node(id).cell));
    Ok(out)
}

fn cell_string(table: &HierTable, r: usize, c: usize) -> String {
    let anchor = table.grid[r][c].merge_anchor.unwrap_or((r, c));
    let cell = &table.grid[anchor.0][anchor.1];
    match &cell.value {
        CellValue::Number { value } => render_number(*value),
        _ => cell.raw_text.trim().to_string(),
    }
}

/// Serializes the sub-table selected by the highlighted cells: cell strings
/// in row-turn order joined by `[SEP]`, then operator tokens and their
/// precomputed results.
pub fn serialize_for_nlg(
    table: &HierTable,
    highlighted: &[(usize, usize)],
    operators: &[String],
    results: &[f64],
) -> Result<String, LinearizeError> {
    if operators.len() != results.len() {
        return Err(LinearizeError::LengthMismatch {
            operators: operators.len(),
            results: results.len(),
        });
    }
    let cells = select_subtable(table, highlighted)?;
    let parts: Vec<String> = cells
        .iter()
        .map(|&(r, c)| cell_string(table, r, c))
        .collect();
    let mut out = parts.join(" [SEP] ");
    if !operators.is_empty() {
        out.push_str(" [SEP]");
        for (op, res) in operators.iter().zip(results) {
            out.push_str(&format!(
                " [OP] {} [RES] {}",
                op,
                render_number(round_sig(*res, 4))
            ));
        }
    }
    Ok(out)
}
