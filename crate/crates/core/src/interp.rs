//! Program execution over hierarchical tables.
//!
//! Execution runs in two phases: region selection (tree and level filters
//! narrow the full data region) and one region operation. Surface programs
//! carry header strings; [`bind_program`] enumerates every node binding and
//! [`execute`] returns the last binding that executes successfully, which
//! keeps ambiguous duplicate headers deterministic.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::program::{Func, Level, Operator, Program};
use crate::table::{CellValue, HierTable, NodeId, Region, Side};
use crate::text::approx_eq;

#[derive(Debug, Error, PartialEq)]
pub enum ExecError {
    #[error("selection became empty")]
    EmptySelection,
    #[error("filter headers are on mixed sides")]
    MixedSides,
    #[error("region has the wrong shape: {0}")]
    ShapeError(String),
    #[error("rank {0} out of range")]
    RankOutOfRange(u32),
    #[error("region has no numeric data")]
    NoNumericData,
    #[error("aggregate group has no numeric cell")]
    EmptyAggregate,
    #[error("no node at the requested level indexes the region")]
    LevelUnreachable,
    #[error("division by zero")]
    DivisionByZero,
    #[error("header '{0}' does not resolve on this table")]
    UnresolvedHeader(String),
}

/// The result of executing a program.
#[derive(Debug, Clone, PartialEq)]
pub enum ExecValue {
    Region(Region),
    Number(f64),
    /// Non-empty; ties produce multiple entries.
    Headers(Vec<NodeId>),
    /// Group string -> aggregated value, in document order; keys unique.
    Grouped(Vec<(String, f64)>),
}

impl ExecValue {
    /// Flattens to answer values: region cells row-major, header strings,
    /// grouped values in key order.
    pub fn answer_values(&self, table: &HierTable) -> Vec<CellValue> {
        match self {
            ExecValue::Region(region) => region
                .cells()
                .iter()
                .map(|&(r, c)| table.data_cell(r, c).value.clone())
                .collect(),
            ExecValue::Number(x) => vec![CellValue::number(*x)],
            ExecValue::Headers(nodes) => nodes
                .iter()
                .map(|&id| CellValue::text(table.node(id).text.clone()))
                .collect(),
            ExecValue::Grouped(groups) => {
                groups.iter().map(|(_, v)| CellValue::number(*v)).collect()
            }
        }
    }

    pub fn to_json(&self, table: &HierTable) -> serde_json::Value {
        use serde_json::json;
        match self {
            ExecValue::Region(region) => json!({
                "kind": "region",
                "rows": region.rows.iter().collect::<Vec<_>>(),
                "cols": region.cols.iter().collect::<Vec<_>>(),
                "values": region.cells().iter()
                    .map(|&(r, c)| crate::ingest::render_value(&table.data_cell(r, c).value))
                    .collect::<Vec<_>>(),
            }),
            ExecValue::Number(x) => json!({ "kind": "number", "value": x }),
            ExecValue::Headers(nodes) => json!({
                "kind": "headers",
                "values": nodes.iter().map(|&id| table.node(id).text.clone()).collect::<Vec<_>>(),
            }),
            ExecValue::Grouped(groups) => json!({
                "kind": "grouped",
                "groups": groups.iter().map(|(k, v)| json!([k, v])).collect::<Vec<_>>(),
            }),
        }
    }
}

/// A program with every header bound to a concrete node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundProgram {
    pub funcs: Vec<BoundFunc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BoundFunc {
    FilterTree(Vec<NodeId>),
    FilterLevel(Level),
    Operator(Operator),
}

impl BoundProgram {
    /// Every node used by a tree filter, in pipeline order.
    pub fn used_nodes(&self) -> Vec<NodeId> {
        self.funcs
            .iter()
            .filter_map(|f| match f {
                BoundFunc::FilterTree(nodes) => Some(nodes.iter().copied()),
                _ => None,
            })
            .flatten()
            .collect()
    }

    pub fn operator(&self) -> Option<&Operator> {
        match self.funcs.last() {
            Some(BoundFunc::Operator(op)) => Some(op),
            _ => None,
        }
    }

    /// Canonical rendering with node indices attached to headers, used for
    /// binding-sensitive program identity.
    pub fn canonical_text(&self, table: &HierTable) -> String {
        let mut out = String::new();
        for (i, func) in self.funcs.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            match func {
                BoundFunc::FilterTree(nodes) => {
                    out.push_str("(filter_tree");
                    for id in nodes {
                        out.push_str(&format!(
                            " {}#{}{}",
                            table.node(*id).text,
                            match id.side {
                                Side::Left => "L",
                                Side::Top => "T",
                            },
                            id.index
                        ));
                    }
                    out.push(')');
                }
                BoundFunc::FilterLevel(level) => {
                    out.push_str(&format!("(filter_level {})", level.token()));
                }
                BoundFunc::Operator(op) => {
                    let p = Program::new(vec![Func::Operator(op.clone())]).expect("bare operator");
                    out.push_str(&crate::program::render_program(&p));
                }
            }
        }
        out
    }
}

/// Enumerates all bindings of a surface program against a table, in document
/// order per header. Fails when some header resolves to no node.
pub fn bind_program(program: &Program, table: &HierTable) -> Result<Vec<BoundProgram>, ExecError> {
    let mut bindings: Vec<Vec<BoundFunc>> = vec![vec![]];
    for func in program.funcs() {
        match func {
            Func::FilterTree { headers, side } => {
                let choices: Vec<Vec<NodeId>> = headers
                    .iter()
                    .map(|h| {
                        let nodes = table.lookup_nodes(h, Some(*side));
                        if nodes.is_empty() {
                            Err(ExecError::UnresolvedHeader(h.clone()))
                        } else {
                            Ok(nodes)
                        }
                    })
                    .collect::<Result<_, _>>()?;
                let mut combos: Vec<Vec<NodeId>> = vec![vec![]];
                for nodes in &choices {
                    combos = combos
                        .iter()
                        .flat_map(|prefix| {
                            nodes.iter().map(move |&n| {
                                let mut next = prefix.clone();
                                next.push(n);
                                next
                            })
                        })
                        .collect();
                }
                bindings = bindings
                    .iter()
                    .flat_map(|prefix| {
                        combos.iter().map(move |combo| {
                            let mut next = prefix.clone();
                            next.push(BoundFunc::FilterTree(combo.clone()));
                            next
                        })
                    })
                    .collect();
            }
            Func::FilterLevel(level) => {
                for b in &mut bindings {
                    b.push(BoundFunc::FilterLevel(*level));
                }
            }
            Func::Operator(op) => {
                for b in &mut bindings {
                    b.push(BoundFunc::Operator(op.clone()));
                }
            }
        }
    }
    Ok(bindings
        .into_iter()
        .map(|funcs| BoundProgram { funcs })
        .collect())
}

/// What execution saw: the region feeding the operator (or the final region
/// for selection programs) and the result.
#[derive(Debug, Clone, PartialEq)]
pub struct ExecOutcome {
    pub value: ExecValue,
    pub pre_operator_region: Region,
}

/// Executes a bound program from the full data region.
pub fn execute_bound(bound: &BoundProgram, table: &HierTable) -> Result<ExecOutcome, ExecError> {
    let mut region = table.full_region();
    for func in &bound.funcs {
        match func {
            BoundFunc::FilterTree(nodes) => {
                region = exec_filter_tree(table, &region, nodes)?;
            }
            BoundFunc::FilterLevel(level) => {
                region = exec_filter_level(table, &region, *level)?;
            }
            BoundFunc::Operator(op) => {
                let value = apply_operator(table, &region, op)?;
                return Ok(ExecOutcome {
                    value,
                    pre_operator_region: region,
                });
            }
        }
    }
    Ok(ExecOutcome {
        value: ExecValue::Region(region.clone()),
        pre_operator_region: region,
    })
}

/// Executes a surface program: all bindings are tried in document order and
/// the last successful one wins. With no successful binding the first error
/// is returned.
pub fn execute(program: &Program, table: &HierTable) -> Result<ExecValue, ExecError> {
    execute_traced(program, table).map(|(_, outcome)| outcome.value)
}

/// Like [`execute`] but also returns the winning binding and its trace.
pub fn execute_traced(
    program: &Program,
    table: &HierTable,
) -> Result<(BoundProgram, ExecOutcome), ExecError> {
    let bindings = bind_program(program, table)?;
    let mut last_ok = None;
    let mut first_err = None;
    for bound in bindings {
        match execute_bound(&bound, table) {
            Ok(outcome) => last_ok = Some((bound, outcome)),
            Err(e) => {
                if first_err.is_none() {
                    first_err = Some(e);
                }
            }
        }
    }
    match last_ok {
        Some(hit) => Ok(hit),
        None => Err(first_err.expect("no bindings implies an unresolved header")),
    }
}

// ---------------------------------------------------------------------------
// region selection
// ---------------------------------------------------------------------------

/// Keeps the axis indices covered by the given headers' subtrees (unioned
/// across headers). One or two headers, all on the same side.
pub fn exec_filter_tree(
    table: &HierTable,
    region: &Region,
    headers: &[NodeId],
) -> Result<Region, ExecError> {
    let side = headers
        .first()
        .map(|h| h.side)
        .ok_or(ExecError::MixedSides)?;
    if headers.iter().any(|h| h.side != side) {
        return Err(ExecError::MixedSides);
    }
    let tree = table.tree(side);
    let mut covered = BTreeSet::new();
    for h in headers {
        covered.extend(tree.subtree_indices(h.index));
    }
    let mut next = region.clone();
    let axis = match side {
        Side::Left => &mut next.rows,
        Side::Top => &mut next.cols,
    };
    *axis = axis.intersection(&covered).copied().collect();
    if axis.is_empty() {
        return Err(ExecError::EmptySelection);
    }
    if headers.len() >= 2 {
        next.last_filter_order = headers.to_vec();
    }
    Ok(next)
}

/// Keeps exactly the axis indices owned by nodes at the given depth. This is
/// what separates aggregate rows from detail rows.
pub fn exec_filter_level(
    table: &HierTable,
    region: &Region,
    level: Level,
) -> Result<Region, ExecError> {
    let tree = table.tree(level.side);
    let owned: BTreeSet<usize> = tree
        .nodes
        .iter()
        .filter(|n| n.depth == level.depth)
        .flat_map(|n| n.own_indices.iter().copied())
        .collect();
    let mut next = region.clone();
    let axis = match level.side {
        Side::Left => &mut next.rows,
        Side::Top => &mut next.cols,
    };
    *axis = axis.intersection(&owned).copied().collect();
    if axis.is_empty() {
        return Err(ExecError::EmptySelection);
    }
    Ok(next)
}

// ---------------------------------------------------------------------------
// region operations
// ---------------------------------------------------------------------------

fn apply_operator(
    table: &HierTable,
    region: &Region,
    op: &Operator,
) -> Result<ExecValue, ExecError> {
    match op {
        Operator::Argmax(k) => exec_superlative(table, region, true, *k).map(ExecValue::Headers),
        Operator::Argmin(k) => exec_superlative(table, region, false, *k).map(ExecValue::Headers),
        Operator::Max(l) => exec_aggregate(table, region, AggKind::Max, *l).map(ExecValue::Grouped),
        Operator::Min(l) => exec_aggregate(table, region, AggKind::Min, *l).map(ExecValue::Grouped),
        Operator::Sum(l) => exec_aggregate(table, region, AggKind::Sum, *l).map(ExecValue::Grouped),
        Operator::Average(l) => {
            exec_aggregate(table, region, AggKind::Average, *l).map(ExecValue::Grouped)
        }
        Operator::Count(l) => exec_count(table, region, *l).map(ExecValue::Number),
        Operator::Difference
        | Operator::Proportion
        | Operator::ProportionRev
        | Operator::DifferenceRate
        | Operator::DifferenceRateRev => exec_pairwise(table, region, op).map(ExecValue::Number),
        Operator::GreaterThan(n) => {
            exec_order_filter(table, region, OrderRel::Gt, *n).map(ExecValue::Headers)
        }
        Operator::GreaterEqThan(n) => {
            exec_order_filter(table, region, OrderRel::Ge, *n).map(ExecValue::Headers)
        }
        Operator::LessThan(n) => {
            exec_order_filter(table, region, OrderRel::Lt, *n).map(ExecValue::Headers)
        }
        Operator::LessEqThan(n) => {
            exec_order_filter(table, region, OrderRel::Le, *n).map(ExecValue::Headers)
        }
        Operator::Eq(n) => {
            exec_order_filter(table, region, OrderRel::Eq, *n).map(ExecValue::Headers)
        }
        Operator::NotEq(n) => {
            exec_order_filter(table, region, OrderRel::Neq, *n).map(ExecValue::Headers)
        }
        Operator::Opposite => exec_opposite(table, region).map(ExecValue::Number),
    }
}

/// The varying axis of a single-row or single-column region. A 1x1 region
/// varies along rows, so its header is the left one.
fn varying_axis(region: &Region) -> Result<Side, ExecError> {
    match (region.rows.len(), region.cols.len()) {
        (_, 1) => Ok(Side::Left),
        (1, _) => Ok(Side::Top),
        (r, c) => Err(ExecError::ShapeError(format!(
            "expected one row or one column of data, got {r}x{c}"
        ))),
    }
}

/// Numeric cells along the varying axis as (axis index, value).
fn vector_values(table: &HierTable, region: &Region, axis: Side) -> Vec<(usize, f64)> {
    let (varying, fixed): (Vec<usize>, usize) = match axis {
        Side::Left => (
            region.rows.iter().copied().collect(),
            *region.cols.first().unwrap(),
        ),
        Side::Top => (
            region.cols.iter().copied().collect(),
            *region.rows.first().unwrap(),
        ),
    };
    varying
        .into_iter()
        .filter_map(|i| {
            let cell = match axis {
                Side::Left => table.data_cell(i, fixed),
                Side::Top => table.data_cell(fixed, i),
            };
            cell.value.as_number().map(|x| (i, x))
        })
        .collect()
}

fn owner_node(table: &HierTable, axis: Side, index: usize) -> NodeId {
    let tree = table.tree(axis);
    NodeId::new(
        axis,
        tree.owner_of(index)
            .expect("valid tables own every data index"),
    )
}

/// Headers of the cells holding the k-th largest (or smallest) value; ties
/// at rank k return every tied header.
pub fn exec_superlative(
    table: &HierTable,
    region: &Region,
    largest: bool,
    k: u32,
) -> Result<Vec<NodeId>, ExecError> {
    let axis = varying_axis(region)?;
    let mut values = vector_values(table, region, axis);
    if values.is_empty() {
        return Err(ExecError::NoNumericData);
    }
    if k == 0 || k as usize > values.len() {
        return Err(ExecError::RankOutOfRange(k));
    }
    values.sort_by(|a, b| {
        let ord = a.1.partial_cmp(&b.1).unwrap();
        if largest {
            ord.reverse()
        } else {
            ord
        }
    });
    let threshold = values[k as usize - 1].1;
    let mut out: Vec<NodeId> = Vec::new();
    let mut tied: Vec<usize> = values
        .iter()
        .filter(|(_, v)| approx_eq(*v, threshold))
        .map(|(i, _)| *i)
        .collect();
    tied.sort_unstable();
    for i in tied {
        let node = owner_node(table, axis, i);
        if !out.contains(&node) {
            out.push(node);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum AggKind {
    Max,
    Min,
    Sum,
    Average,
}

/// Aggregates the region grouped by the header strings at the given level.
/// The axis opposite the level must be a single index; every varying index
/// must reach the level through its owner's ancestors.
fn exec_aggregate(
    table: &HierTable,
    region: &Region,
    kind: AggKind,
    level: Level,
) -> Result<Vec<(String, f64)>, ExecError> {
    let (varying, fixed): (Vec<usize>, usize) = match level.side {
        Side::Left => {
            if region.cols.len() != 1 {
                return Err(ExecError::ShapeError(format!(
                    "aggregate by a left level needs one column, got {}",
                    region.cols.len()
                )));
            }
            (
                region.rows.iter().copied().collect(),
                *region.cols.first().unwrap(),
            )
        }
        Side::Top => {
            if region.rows.len() != 1 {
                return Err(ExecError::ShapeError(format!(
                    "aggregate by a top level needs one row, got {}",
                    region.rows.len()
                )));
            }
            (
                region.cols.iter().copied().collect(),
                *region.rows.first().unwrap(),
            )
        }
    };
    let tree = table.tree(level.side);
    // group key -> numeric values, keyed in first-occurrence order
    let mut order: Vec<String> = Vec::new();
    let mut groups: Vec<Vec<f64>> = Vec::new();
    for i in varying {
        let owner = tree.owner_of(i).expect("valid tables own every data index");
        let ancestor = tree
            .ancestor_at_depth(owner, level.depth)
            .ok_or(ExecError::LevelUnreachable)?;
        let key = tree.node(ancestor).text.clone();
        let slot = match order.iter().position(|k| *k == key) {
            Some(p) => p,
            None => {
                order.push(key);
                groups.push(Vec::new());
                order.len() - 1
            }
        };
        let cell = match level.side {
            Side::Left => table.data_cell(i, fixed),
            Side::Top => table.data_cell(fixed, i),
        };
        if let Some(x) = cell.value.as_number() {
            groups[slot].push(x);
        }
    }
    order
        .into_iter()
        .zip(groups)
        .map(|(key, values)| {
            if values.is_empty() {
                return Err(ExecError::EmptyAggregate);
            }
            let out = match kind {
                AggKind::Sum => values.iter().sum(),
                AggKind::Average => values.iter().sum::<f64>() / values.len() as f64,
                AggKind::Max => values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                AggKind::Min => values.iter().copied().fold(f64::INFINITY, f64::min),
            };
            Ok((key, out))
        })
        .collect()
}

/// Counts the distinct nodes at the given depth indexing the region along the
/// level's side. Indices whose owners sit above the level are not counted.
pub fn exec_count(table: &HierTable, region: &Region, level: Level) -> Result<f64, ExecError> {
    let tree = table.tree(level.side);
    let axis: Vec<usize> = match level.side {
        Side::Left => region.rows.iter().copied().collect(),
        Side::Top => region.cols.iter().copied().collect(),
    };
    let mut seen = BTreeSet::new();
    for i in axis {
        let owner = tree.owner_of(i).expect("valid tables own every data index");
        if let Some(node) = tree.ancestor_at_depth(owner, level.depth) {
            seen.insert(node);
        }
    }
    if seen.is_empty() {
        return Err(ExecError::LevelUnreachable);
    }
    Ok(seen.len() as f64)
}

/// Binary operations over a region of exactly two cells. Operand `a` is the
/// cell indexed by the first header of the most recent two-header filter,
/// falling back to row-major order.
fn exec_pairwise(table: &HierTable, region: &Region, op: &Operator) -> Result<f64, ExecError> {
    if region.cell_count() != 2 {
        return Err(ExecError::ShapeError(format!(
            "expected exactly two cells, got {}",
            region.cell_count()
        )));
    }
    let cells = region.cells();
    let (first, second) = (cells[0], cells[1]);
    let (ca, cb) = order_operands(table, region, first, second);
    let a = table
        .data_cell(ca.0, ca.1)
        .value
        .as_number()
        .ok_or(ExecError::NoNumericData)?;
    let b = table
        .data_cell(cb.0, cb.1)
        .value
        .as_number()
        .ok_or(ExecError::NoNumericData)?;
    let div = |num: f64, den: f64| {
        if den == 0.0 {
            Err(ExecError::DivisionByZero)
        } else {
            Ok(num / den)
        }
    };
    match op {
        Operator::Difference => Ok((a - b).abs()),
        Operator::Proportion => div(b, a),
        Operator::ProportionRev => div(a, b),
        Operator::DifferenceRate => div(a - b, b),
        Operator::DifferenceRateRev => div(b - a, a),
        _ => unreachable!("pairwise dispatch"),
    }
}

fn order_operands(
    table: &HierTable,
    region: &Region,
    first: (usize, usize),
    second: (usize, usize),
) -> ((usize, usize), (usize, usize)) {
    if region.last_filter_order.len() >= 2 {
        let side = region.last_filter_order[0].side;
        let tree = table.tree(side);
        let covered: Vec<BTreeSet<usize>> = region
            .last_filter_order
            .iter()
            .map(|id| tree.subtree_indices(id.index))
            .collect();
        let coord = |cell: (usize, usize)| match side {
            Side::Left => cell.0,
            Side::Top => cell.1,
        };
        let in_first = |cell| covered[0].contains(&coord(cell));
        let in_second = |cell| covered[1].contains(&coord(cell));
        if in_first(first) && in_second(second) && !in_first(second) {
            return (first, second);
        }
        if in_first(second) && in_second(first) && !in_first(first) {
            return (second, first);
        }
    }
    (first, second)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum OrderRel {
    Gt,
    Ge,
    Lt,
    Le,
    Eq,
    Neq,
}

/// Headers of the cells satisfying an order relation against `n`. An empty
/// result is an error so silent empty answers cannot score.
fn exec_order_filter(
    table: &HierTable,
    region: &Region,
    rel: OrderRel,
    n: f64,
) -> Result<Vec<NodeId>, ExecError> {
    let axis = varying_axis(region)?;
    let values = vector_values(table, region, axis);
    if values.is_empty() {
        return Err(ExecError::NoNumericData);
    }
    let mut out = Vec::new();
    for (i, v) in values {
        let keep = match rel {
            OrderRel::Gt => v > n && !approx_eq(v, n),
            OrderRel::Ge => v > n || approx_eq(v, n),
            OrderRel::Lt => v < n && !approx_eq(v, n),
            OrderRel::Le => v < n || approx_eq(v, n),
            OrderRel::Eq => approx_eq(v, n),
            OrderRel::Neq => !approx_eq(v, n),
        };
        if keep {
            let node = owner_node(table, axis, i);
            if !out.contains(&node) {
                out.push(node);
            }
        }
    }
    if out.is_empty() {
        return Err(ExecError::EmptySelection);
    }
    Ok(out)
}

/// Negates the single numeric cell of the region.
pub fn exec_opposite(table: &HierTable, region: &Region) -> Result<f64, ExecError> {
    if region.cell_count() != 1 {
        return Err(ExecError::ShapeError(format!(
            "expected exactly one cell, got {}",
            region.cell_count()
        )));
    }
    let (r, c) = region.cells()[0];
    table
        .data_cell(r, c)
        .value
        .as_number()
        .map(|x| -x)
        .ok_or(ExecError::NoNumericData)
}
