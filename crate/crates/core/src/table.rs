//! The hierarchical table model.
//!
//! A [`HierTable`] is an immutable cell grid plus two header trees. The left
//! tree indexes data rows, the top tree indexes data columns, and every data
//! index is owned by exactly one node of its tree (the partition invariant).
//! All query operations run over [`Region`]s, rectangular row-set x column-set
//! selections of the data area.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text::normalize_header;

/// A parsed cell value. Exactly one variant per cell; numbers are finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CellValue {
    Number { value: f64 },
    Text { value: String },
    Datetime { value: String },
    Empty,
}

impl CellValue {
    pub fn number(x: f64) -> Self {
        debug_assert!(x.is_finite());
        CellValue::Number { value: x }
    }

    pub fn text(s: impl Into<String>) -> Self {
        CellValue::Text { value: s.into() }
    }

    pub fn as_number(&self) -> Option<f64> {
        match self {
            CellValue::Number { value } => Some(*value),
            _ => None,
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, CellValue::Empty)
    }
}

/// One grid cell: the raw text as stored plus the parsed value, with the
/// format signals hierarchy extraction relies on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub row: usize,
    pub col: usize,
    pub raw_text: String,
    pub value: CellValue,
    pub bold: bool,
    pub indent: u32,
    /// Top-left corner of the merged region covering this cell, if any.
    pub merge_anchor: Option<(usize, usize)>,
}

/// Which header tree a node or level belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Top,
}

impl Side {
    pub fn token(self) -> &'static str {
        match self {
            Side::Left => "LEFT",
            Side::Top => "TOP",
        }
    }
}

/// Identifies a header node: the tree it lives in plus its arena index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId {
    pub side: Side,
    pub index: usize,
}

impl NodeId {
    pub fn new(side: Side, index: usize) -> Self {
        NodeId { side, index }
    }
}

/// One header-tree node. `own_indices` are the data-axis indices this node
/// indexes directly (data rows for the left tree, data columns for the top
/// tree); `span` additionally covers all descendants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeaderNode {
    pub index: usize,
    /// Grid coordinates of the header cell; `None` only for the virtual root.
    pub cell: Option<(usize, usize)>,
    /// Normalized text (see [`crate::text::normalize_header`]).
    pub text: String,
    /// Distance from the virtual root; the root is 0.
    pub depth: usize,
    pub children: Vec<usize>,
    pub own_indices: Vec<usize>,
    /// Inclusive data-axis range covering `own_indices` and all descendants.
    /// `None` only for an (invalid) subtree with no indices; validation
    /// rejects such trees everywhere except transiently during construction.
    pub span: Option<(usize, usize)>,
}

/// An ordered header tree stored as an arena; index 0 is the virtual root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeaderTree {
    pub side: Side,
    pub nodes: Vec<HeaderNode>,
}

impl HeaderTree {
    pub fn root(&self) -> &HeaderNode {
        &self.nodes[0]
    }

    pub fn node(&self, index: usize) -> &HeaderNode {
        &self.nodes[index]
    }

    /// Maximum node depth (0 for a bare root).
    pub fn max_depth(&self) -> usize {
        self.nodes.iter().map(|n| n.depth).max().unwrap_or(0)
    }

    /// Node indices in document order (pre-order), excluding the root.
    pub fn document_order(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.nodes.len().saturating_sub(1));
        let mut stack: Vec<usize> = self.root().children.iter().rev().copied().collect();
        while let Some(i) = stack.pop() {
            out.push(i);
            stack.extend(self.nodes[i].children.iter().rev());
        }
        out
    }

    /// Data-axis indices covered by the subtree rooted at `index`
    /// (own indices of the node and of every descendant).
    pub fn subtree_indices(&self, index: usize) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        let mut stack = vec![index];
        while let Some(i) = stack.pop() {
            out.extend(self.nodes[i].own_indices.iter().copied());
            stack.extend(self.nodes[i].children.iter().copied());
        }
        out
    }

    /// The unique node owning a data-axis index, if any.
    pub fn owner_of(&self, axis_index: usize) -> Option<usize> {
        self.nodes
            .iter()
            .position(|n| n.own_indices.contains(&axis_index))
    }

    /// Walks ancestor-or-self from `index` to the node at `depth`.
    /// Returns `None` when the node is shallower than `depth`.
    pub fn ancestor_at_depth(&self, index: usize, depth: usize) -> Option<usize> {
        let mut cur = index;
        loop {
            let node = &self.nodes[cur];
            if node.depth == depth {
                return Some(cur);
            }
            if node.depth < depth {
                return None;
            }
            cur = self.parent_of(cur)?;
        }
    }

    pub fn parent_of(&self, index: usize) -> Option<usize> {
        if index == 0 {
            return None;
        }
        self.nodes.iter().position(|n| n.children.contains(&index))
    }

    fn recompute_span(&self, index: usize) -> Option<(usize, usize)> {
        let covered = self.subtree_indices(index);
        match (covered.first(), covered.last()) {
            (Some(lo), Some(hi)) => Some((*lo, *hi)),
            _ => None,
        }
    }
}

/// Errors raised while building or validating a table.
#[derive(Debug, Error, PartialEq)]
pub enum TableError {
    #[error("merged regions overlap at ({0}, {1})")]
    OverlappingMerge(usize, usize),
    #[error("merge rectangle out of bounds")]
    MergeOutOfBounds,
    #[error("table has no data region")]
    EmptyDataRegion,
    #[error("{side:?} tree coverage gap: {detail}")]
    TreeCoverageGap { side: Side, detail: String },
    #[error("invalid {side:?} tree: {detail}")]
    InvalidTree { side: Side, detail: String },
    #[error("grid is not rectangular")]
    RaggedGrid,
}

/// Raw cell input for [`build_table`]: text plus format signals.
#[derive(Debug, Clone, Default)]
pub struct RawCell {
    pub text: String,
    pub bold: bool,
    pub indent: u32,
}

impl RawCell {
    pub fn text(s: impl Into<String>) -> Self {
        RawCell {
            text: s.into(),
            ..Default::default()
        }
    }
}

/// Inclusive merged rectangle, `(r0, c0)` top-left to `(r1, c1)` bottom-right.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergeRect {
    pub r0: usize,
    pub c0: usize,
    pub r1: usize,
    pub c1: usize,
}

impl MergeRect {
    pub fn contains(&self, r: usize, c: usize) -> bool {
        r >= self.r0 && r <= self.r1 && c >= self.c0 && c <= self.c1
    }
}

/// An immutable hierarchical table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierTable {
    pub table_id: String,
    pub n_rows: usize,
    pub n_cols: usize,
    pub grid: Vec<Vec<Cell>>,
    pub merges: Vec<MergeRect>,
    pub top_header_rows: usize,
    pub left_header_cols: usize,
    pub left_tree: HeaderTree,
    pub top_tree: HeaderTree,
}

impl HierTable {
    pub fn n_data_rows(&self) -> usize {
        self.n_rows - self.top_header_rows
    }

    pub fn n_data_cols(&self) -> usize {
        self.n_cols - self.left_header_cols
    }

    /// Grid cell at a data-axis coordinate.
    pub fn data_cell(&self, data_row: usize, data_col: usize) -> &Cell {
        &self.grid[self.top_header_rows + data_row][self.left_header_cols + data_col]
    }

    pub fn cell(&self, row: usize, col: usize) -> &Cell {
        &self.grid[row][col]
    }

    pub fn in_bounds(&self, row: usize, col: usize) -> bool {
        row < self.n_rows && col < self.n_cols
    }

    pub fn tree(&self, side: Side) -> &HeaderTree {
        match side {
            Side::Left => &self.left_tree,
            Side::Top => &self.top_tree,
        }
    }

    pub fn node(&self, id: NodeId) -> &HeaderNode {
        self.tree(id.side).node(id.index)
    }

    /// Effective text at a grid position, following merge anchors.
    pub fn effective_text(&self, row: usize, col: usize) -> &str {
        let cell = &self.grid[row][col];
        match cell.merge_anchor {
            Some((ar, ac)) if (ar, ac) != (row, col) => &self.grid[ar][ac].raw_text,
            _ => &cell.raw_text,
        }
    }

    /// All nodes whose normalized text equals the normalized query, in
    /// document order. `side = None` searches the left tree then the top tree.
    pub fn lookup_nodes(&self, text: &str, side: Option<Side>) -> Vec<NodeId> {
        let query = normalize_header(text);
        let mut out = Vec::new();
        let sides: &[Side] = match side {
            Some(Side::Left) => &[Side::Left],
            Some(Side::Top) => &[Side::Top],
            None => &[Side::Left, Side::Top],
        };
        for &s in sides {
            let tree = self.tree(s);
            for index in tree.document_order() {
                if tree.node(index).text == query {
                    out.push(NodeId::new(s, index));
                }
            }
        }
        out
    }

    /// The region covering the whole data area.
    pub fn full_region(&self) -> Region {
        Region {
            rows: (0..self.n_data_rows()).collect(),
            cols: (0..self.n_data_cols()).collect(),
            last_filter_order: Vec::new(),
        }
    }

    /// Checks every structural invariant; used by the builder and available
    /// to fuzz tests.
    pub fn validate(&self) -> Result<(), TableError> {
        if self.top_header_rows >= self.n_rows || self.left_header_cols >= self.n_cols {
            return Err(TableError::EmptyDataRegion);
        }
        validate_tree(&self.left_tree, self.n_data_rows())?;
        validate_tree(&self.top_tree, self.n_data_cols())?;
        Ok(())
    }
}

/// A rectangular selection of data coordinates: the cell set is exactly
/// `rows x cols`. `last_filter_order` carries operand ordering from the most
/// recent multi-header filter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub rows: BTreeSet<usize>,
    pub cols: BTreeSet<usize>,
    pub last_filter_order: Vec<NodeId>,
}

impl Region {
    pub fn cell_count(&self) -> usize {
        self.rows.len() * self.cols.len()
    }

    /// Cells in row-major order as data-axis coordinates.
    pub fn cells(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.cell_count());
        for &r in &self.rows {
            for &c in &self.cols {
                out.push((r, c));
            }
        }
        out
    }

    pub fn contains(&self, data_row: usize, data_col: usize) -> bool {
        self.rows.contains(&data_row) && self.cols.contains(&data_col)
    }
}

fn validate_tree(tree: &HeaderTree, axis_len: usize) -> Result<(), TableError> {
    let side = tree.side;
    let err = |detail: String| TableError::InvalidTree { side, detail };
    if tree.nodes.is_empty() {
        return Err(err("missing root".into()));
    }
    let root = tree.root();
    if root.depth != 0 || root.cell.is_some() || !root.own_indices.is_empty() {
        return Err(err(
            "root must have depth 0, no cell, and no own indices".into()
        ));
    }

    // ownership partition: every data index owned by exactly one node
    let mut owner = vec![usize::MAX; axis_len];
    for node in &tree.nodes {
        if node.index != 0 && node.cell.is_none() {
            return Err(err(format!("node {} has no cell", node.index)));
        }
        for &i in &node.own_indices {
            if i >= axis_len {
                return Err(err(format!("own index {i} out of bounds")));
            }
            if owner[i] != usize::MAX {
                return Err(TableError::TreeCoverageGap {
                    side,
                    detail: format!("index {i} owned by two nodes"),
                });
            }
            owner[i] = node.index;
        }
    }
    if let Some(i) = owner.iter().position(|&o| o == usize::MAX) {
        return Err(TableError::TreeCoverageGap {
            side,
            detail: format!("index {i} owned by no node"),
        });
    }

    // structural checks: child depths, leaf ownership, spans
    let mut seen = vec![false; tree.nodes.len()];
    let mut stack = vec![0usize];
    while let Some(i) = stack.pop() {
        if seen[i] {
            return Err(err("node reachable twice".into()));
        }
        seen[i] = true;
        let node = &tree.nodes[i];
        for &c in &node.children {
            if c >= tree.nodes.len() {
                return Err(err(format!("child index {c} out of range")));
            }
            if tree.nodes[c].depth != node.depth + 1 {
                return Err(err(format!("node {c} depth is not parent depth + 1")));
            }
            stack.push(c);
        }
        if i != 0 && node.children.is_empty() && node.own_indices.is_empty() {
            return Err(err(format!("leaf node {i} owns no indices")));
        }
        let recomputed = tree.recompute_span(i);
        if i == 0 {
            if recomputed.is_none() {
                return Err(TableError::TreeCoverageGap {
                    side,
                    detail: "tree covers no indices".into(),
                });
            }
        } else if node.span != recomputed || recomputed.is_none() {
            return Err(err(format!("node {i} span is stale")));
        }
        // contiguity: the subtree's indices fill its span with no holes
        if let Some((lo, hi)) = recomputed {
            let covered = tree.subtree_indices(i);
            if covered.len() != hi - lo + 1 {
                return Err(err(format!("node {i} span {lo}..={hi} has holes")));
            }
        }
        // sibling spans disjoint and ordered
        let child_spans: Vec<(usize, usize)> = node
            .children
            .iter()
            .filter_map(|&c| tree.nodes[c].span)
            .collect();
        for pair in child_spans.windows(2) {
            if pair[0].1 >= pair[1].0 {
                return Err(err(format!(
                    "sibling spans {pair:?} overlap or are unordered"
                )));
            }
        }
    }
    if let Some(unreached) = seen.iter().position(|&s| !s) {
        return Err(err(format!("node {unreached} unreachable from root")));
    }
    Ok(())
}

/// Recomputes `span` bottom-up for a tree under construction.
pub(crate) fn fill_spans(tree: &mut HeaderTree) {
    for i in (0..tree.nodes.len()).rev() {
        tree.nodes[i].span = tree.recompute_span(i);
    }
}

/// Builds a validated table. When `trees` is `None` the header trees are
/// inferred from merges and cell formats (see [`crate::extract`]).
pub fn build_table(
    table_id: impl Into<String>,
    grid: Vec<Vec<RawCell>>,
    merges: Vec<MergeRect>,
    top_header_rows: usize,
    left_header_cols: usize,
    trees: Option<(HeaderTree, HeaderTree)>,
) -> Result<HierTable, TableError> {
    let n_rows = grid.len();
    let n_cols = grid.first().map_or(0, |r| r.len());
    if n_rows == 0 || n_cols == 0 || grid.iter().any(|r| r.len() != n_cols) {
        return Err(TableError::RaggedGrid);
    }
    if top_header_rows >= n_rows || left_header_cols >= n_cols {
        return Err(TableError::EmptyDataRegion);
    }

    // merge map before cell parsing so covered cells resolve their anchor
    let mut anchor: Vec<Vec<Option<(usize, usize)>>> = vec![vec![None; n_cols]; n_rows];
    for m in &merges {
        if m.r1 >= n_rows || m.c1 >= n_cols || m.r0 > m.r1 || m.c0 > m.c1 {
            return Err(TableError::MergeOutOfBounds);
        }
        for r in m.r0..=m.r1 {
            for c in m.c0..=m.c1 {
                if anchor[r][c].is_some() {
                    return Err(TableError::OverlappingMerge(r, c));
                }
                anchor[r][c] = Some((m.r0, m.c0));
            }
        }
    }

    let cells: Vec<Vec<Cell>> = grid
        .iter()
        .enumerate()
        .map(|(r, row)| {
            row.iter()
                .enumerate()
                .map(|(c, raw)| Cell {
                    row: r,
                    col: c,
                    raw_text: raw.text.clone(),
                    value: crate::ingest::normalize_quantity(&raw.text),
                    bold: raw.bold,
                    indent: raw.indent,
                    merge_anchor: anchor[r][c],
                })
                .collect()
        })
        .collect();

    let mut table = HierTable {
        table_id: table_id.into(),
        n_rows,
        n_cols,
        grid: cells,
        merges,
        top_header_rows,
        left_header_cols,
        left_tree: HeaderTree {
            side: Side::Left,
            nodes: vec![],
        },
        top_tree: HeaderTree {
            side: Side::Top,
            nodes: vec![],
        },
    };

    let (left, top) = match trees {
        Some((left, top)) => (left, top),
        None => (
            crate::extract::extract_left_tree(&table)?,
            crate::extract::extract_top_tree(&table)?,
        ),
    };
    table.left_tree = left;
    table.top_tree = top;
    table.validate()?;
    Ok(table)
}
