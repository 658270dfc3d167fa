//! Independent brute-force evaluator used by the equivalence suite.
//!
//! This module re-implements the documented execution contract from scratch:
//! it materializes the selected cell set explicitly at every step and walks
//! the header trees with its own recursions. It shares the data model with
//! the interpreter but none of its logic, so agreement between the two is
//! meaningful evidence.

use std::collections::BTreeSet;

use hiertable::interp::{BoundFunc, BoundProgram, ExecError, ExecOutcome, ExecValue};
use hiertable::program::{Level, Operator};
use hiertable::table::{HeaderTree, HierTable, NodeId, Side};

#[derive(Debug, Clone, PartialEq)]
pub enum OValue {
    /// Explicit data-coordinate cells, row-major.
    Cells(Vec<(usize, usize)>),
    Number(f64),
    Headers(Vec<NodeId>),
    Grouped(Vec<(String, f64)>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OError {
    EmptySelection,
    MixedSides,
    Shape,
    Rank,
    NoNumeric,
    EmptyAggregate,
    LevelUnreachable,
    DivZero,
}

fn oracle_error_name(e: &OError) -> &'static str {
    match e {
        OError::EmptySelection => "empty-selection",
        OError::MixedSides => "mixed-sides",
        OError::Shape => "shape",
        OError::Rank => "rank",
        OError::NoNumeric => "no-numeric",
        OError::EmptyAggregate => "empty-aggregate",
        OError::LevelUnreachable => "level-unreachable",
        OError::DivZero => "div-zero",
    }
}

pub fn interp_error_name(e: &ExecError) -> &'static str {
    match e {
        ExecError::EmptySelection => "empty-selection",
        ExecError::MixedSides => "mixed-sides",
        ExecError::ShapeError(_) => "shape",
        ExecError::RankOutOfRange(_) => "rank",
        ExecError::NoNumericData => "no-numeric",
        ExecError::EmptyAggregate => "empty-aggregate",
        ExecError::LevelUnreachable => "level-unreachable",
        ExecError::DivisionByZero => "div-zero",
        ExecError::UnresolvedHeader(_) => "unresolved-header",
    }
}

/// Own indices of a node and all its descendants, by fresh recursion.
fn subtree_axis(tree: &HeaderTree, index: usize) -> BTreeSet<usize> {
    let mut out = BTreeSet::new();
    fn walk(tree: &HeaderTree, index: usize, out: &mut BTreeSet<usize>) {
        for &i in &tree.nodes[index].own_indices {
            out.insert(i);
        }
        for &child in &tree.nodes[index].children {
            walk(tree, child, out);
        }
    }
    walk(tree, index, &mut out);
    out
}

/// The node owning an axis index, by linear scan.
fn owner(tree: &HeaderTree, axis_index: usize) -> usize {
    for node in &tree.nodes {
        if node.own_indices.contains(&axis_index) {
            return node.index;
        }
    }
    unreachable!("valid tables own every axis index")
}

/// Parent array built from the children lists.
fn parents(tree: &HeaderTree) -> Vec<usize> {
    let mut parent = vec![0usize; tree.nodes.len()];
    for node in &tree.nodes {
        for &child in &node.children {
            parent[child] = node.index;
        }
    }
    parent
}

/// Ancestor-or-self of `index` at exactly `depth`, or None when the node is
/// shallower than the requested depth.
fn ancestor_at(tree: &HeaderTree, parent: &[usize], index: usize, depth: usize) -> Option<usize> {
    let mut cur = index;
    while tree.nodes[cur].depth > depth {
        cur = parent[cur];
    }
    (tree.nodes[cur].depth == depth).then_some(cur)
}

fn value_at(table: &HierTable, r: usize, c: usize) -> Option<f64> {
    table.data_cell(r, c).value.as_number()
}

pub fn run(bound: &BoundProgram, table: &HierTable) -> Result<OValue, OError> {
    let mut cells: Vec<(usize, usize)> = Vec::new();
    for r in 0..table.n_data_rows() {
        for c in 0..table.n_data_cols() {
            cells.push((r, c));
        }
    }
    let mut pair_order: Vec<NodeId> = Vec::new();

    for func in &bound.funcs {
        match func {
            BoundFunc::FilterTree(nodes) => {
                let side = nodes[0].side;
                if nodes.iter().any(|n| n.side != side) {
                    return Err(OError::MixedSides);
                }
                let mut allowed: BTreeSet<usize> = BTreeSet::new();
                for node in nodes {
                    allowed.extend(subtree_axis(table.tree(side), node.index));
                }
                cells.retain(|&(r, c)| {
                    allowed.contains(&match side {
                        Side::Left => r,
                        Side::Top => c,
                    })
                });
                if cells.is_empty() {
                    return Err(OError::EmptySelection);
                }
                if nodes.len() >= 2 {
                    pair_order = nodes.clone();
                }
            }
            BoundFunc::FilterLevel(level) => {
                let tree = table.tree(level.side);
                let mut owned: BTreeSet<usize> = BTreeSet::new();
                for node in &tree.nodes {
                    if node.depth == level.depth {
                        owned.extend(node.own_indices.iter().copied());
                    }
                }
                cells.retain(|&(r, c)| {
                    owned.contains(&match level.side {
                        Side::Left => r,
                        Side::Top => c,
                    })
                });
                if cells.is_empty() {
                    return Err(OError::EmptySelection);
                }
            }
            BoundFunc::Operator(op) => {
                return apply(op, &cells, &pair_order, table);
            }
        }
    }
    Ok(OValue::Cells(cells))
}

fn distinct_rows(cells: &[(usize, usize)]) -> Vec<usize> {
    let set: BTreeSet<usize> = cells.iter().map(|&(r, _)| r).collect();
    set.into_iter().collect()
}

fn distinct_cols(cells: &[(usize, usize)]) -> Vec<usize> {
    let set: BTreeSet<usize> = cells.iter().map(|&(_, c)| c).collect();
    set.into_iter().collect()
}

/// The axis a single-row or single-column selection varies along; 1x1
/// selections vary along rows.
fn vector_axis(cells: &[(usize, usize)]) -> Result<Side, OError> {
    let rows = distinct_rows(cells);
    let cols = distinct_cols(cells);
    match (rows.len(), cols.len()) {
        (_, 1) => Ok(Side::Left),
        (1, _) => Ok(Side::Top),
        _ => Err(OError::Shape),
    }
}

/// (axis index, numeric value) pairs in ascending axis order.
fn vector(table: &HierTable, cells: &[(usize, usize)], axis: Side) -> Vec<(usize, f64)> {
    let mut sorted = cells.to_vec();
    sorted.sort_unstable();
    sorted
        .iter()
        .filter_map(|&(r, c)| {
            let i = match axis {
                Side::Left => r,
                Side::Top => c,
            };
            value_at(table, r, c).map(|v| (i, v))
        })
        .collect()
}

fn apply(
    op: &Operator,
    cells: &[(usize, usize)],
    pair_order: &[NodeId],
    table: &HierTable,
) -> Result<OValue, OError> {
    match op {
        Operator::Argmax(k) => superlative(table, cells, true, *k),
        Operator::Argmin(k) => superlative(table, cells, false, *k),
        Operator::Max(l) => aggregate(table, cells, *l, |v| {
            v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        }),
        Operator::Min(l) => aggregate(table, cells, *l, |v| {
            v.iter().copied().fold(f64::INFINITY, f64::min)
        }),
        Operator::Sum(l) => aggregate(table, cells, *l, |v| v.iter().sum()),
        Operator::Average(l) => {
            aggregate(table, cells, *l, |v| v.iter().sum::<f64>() / v.len() as f64)
        }
        Operator::Count(l) => count(table, cells, *l),
        Operator::Difference
        | Operator::Proportion
        | Operator::ProportionRev
        | Operator::DifferenceRate
        | Operator::DifferenceRateRev => pairwise(table, cells, pair_order, op),
        Operator::GreaterThan(n) => order(table, cells, *n, |v, n| v > n && (v - n).abs() > 1e-9),
        Operator::GreaterEqThan(n) => {
            order(table, cells, *n, |v, n| v > n || (v - n).abs() <= 1e-9)
        }
        Operator::LessThan(n) => order(table, cells, *n, |v, n| v < n && (v - n).abs() > 1e-9),
        Operator::LessEqThan(n) => order(table, cells, *n, |v, n| v < n || (v - n).abs() <= 1e-9),
        Operator::Eq(n) => order(table, cells, *n, |v, n| (v - n).abs() <= 1e-9),
        Operator::NotEq(n) => order(table, cells, *n, |v, n| (v - n).abs() > 1e-9),
        Operator::Opposite => {
            if cells.len() != 1 {
                return Err(OError::Shape);
            }
            let (r, c) = cells[0];
            value_at(table, r, c)
                .map(|v| OValue::Number(-v))
                .ok_or(OError::NoNumeric)
        }
    }
}

fn superlative(
    table: &HierTable,
    cells: &[(usize, usize)],
    largest: bool,
    k: u32,
) -> Result<OValue, OError> {
    let axis = vector_axis(cells)?;
    let values = vector(table, cells, axis);
    if values.is_empty() {
        return Err(OError::NoNumeric);
    }
    if k == 0 || k as usize > values.len() {
        return Err(OError::Rank);
    }
    let mut sorted: Vec<f64> = values.iter().map(|&(_, v)| v).collect();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if largest {
        sorted.reverse();
    }
    let threshold = sorted[k as usize - 1];
    let tree = table.tree(axis);
    let mut out: Vec<NodeId> = Vec::new();
    for &(i, v) in &values {
        if (v - threshold).abs() <= 1e-9 {
            let id = NodeId::new(axis, owner(tree, i));
            if !out.contains(&id) {
                out.push(id);
            }
        }
    }
    Ok(OValue::Headers(out))
}

fn aggregate(
    table: &HierTable,
    cells: &[(usize, usize)],
    level: Level,
    fold: impl Fn(&[f64]) -> f64,
) -> Result<OValue, OError> {
    let rows = distinct_rows(cells);
    let cols = distinct_cols(cells);
    let varying = match level.side {
        Side::Left => {
            if cols.len() != 1 {
                return Err(OError::Shape);
            }
            rows
        }
        Side::Top => {
            if rows.len() != 1 {
                return Err(OError::Shape);
            }
            cols
        }
    };
    let tree = table.tree(level.side);
    let parent = parents(tree);
    let mut keys: Vec<String> = Vec::new();
    let mut groups: Vec<Vec<f64>> = Vec::new();
    for i in varying {
        let own = owner(tree, i);
        let Some(anc) = ancestor_at(tree, &parent, own, level.depth) else {
            return Err(OError::LevelUnreachable);
        };
        let key = tree.nodes[anc].text.clone();
        let slot = match keys.iter().position(|k| *k == key) {
            Some(p) => p,
            None => {
                keys.push(key);
                groups.push(Vec::new());
                keys.len() - 1
            }
        };
        for &(r, c) in cells {
            let matches = match level.side {
                Side::Left => r == i,
                Side::Top => c == i,
            };
            if matches {
                if let Some(v) = value_at(table, r, c) {
                    groups[slot].push(v);
                }
            }
        }
    }
    let mut out = Vec::with_capacity(keys.len());
    for (key, values) in keys.into_iter().zip(groups) {
        if values.is_empty() {
            return Err(OError::EmptyAggregate);
        }
        out.push((key, fold(&values)));
    }
    Ok(OValue::Grouped(out))
}

fn count(table: &HierTable, cells: &[(usize, usize)], level: Level) -> Result<OValue, OError> {
    let axis = match level.side {
        Side::Left => distinct_rows(cells),
        Side::Top => distinct_cols(cells),
    };
    let tree = table.tree(level.side);
    let parent = parents(tree);
    let mut seen: BTreeSet<usize> = BTreeSet::new();
    for i in axis {
        if let Some(anc) = ancestor_at(tree, &parent, owner(tree, i), level.depth) {
            seen.insert(anc);
        }
    }
    if seen.is_empty() {
        return Err(OError::LevelUnreachable);
    }
    Ok(OValue::Number(seen.len() as f64))
}

fn pairwise(
    table: &HierTable,
    cells: &[(usize, usize)],
    pair_order: &[NodeId],
    op: &Operator,
) -> Result<OValue, OError> {
    if cells.len() != 2 {
        return Err(OError::Shape);
    }
    let mut sorted = cells.to_vec();
    sorted.sort_unstable();
    let (mut first, mut second) = (sorted[0], sorted[1]);
    if pair_order.len() >= 2 {
        let side = pair_order[0].side;
        let tree = table.tree(side);
        let covered: Vec<BTreeSet<usize>> = pair_order
            .iter()
            .map(|id| subtree_axis(tree, id.index))
            .collect();
        let coord = |cell: (usize, usize)| match side {
            Side::Left => cell.0,
            Side::Top => cell.1,
        };
        let swap = covered[0].contains(&coord(second))
            && covered[1].contains(&coord(first))
            && !covered[0].contains(&coord(first));
        if swap {
            std::mem::swap(&mut first, &mut second);
        }
    }
    let a = value_at(table, first.0, first.1).ok_or(OError::NoNumeric)?;
    let b = value_at(table, second.0, second.1).ok_or(OError::NoNumeric)?;
    let div = |num: f64, den: f64| {
        if den == 0.0 {
            Err(OError::DivZero)
        } else {
            Ok(num / den)
        }
    };
    let out = match op {
        Operator::Difference => (a - b).abs(),
        Operator::Proportion => div(b, a)?,
        Operator::ProportionRev => div(a, b)?,
        Operator::DifferenceRate => div(a - b, b)?,
        Operator::DifferenceRateRev => div(b - a, a)?,
        _ => unreachable!(),
    };
    Ok(OValue::Number(out))
}

fn order(
    table: &HierTable,
    cells: &[(usize, usize)],
    n: f64,
    keep: impl Fn(f64, f64) -> bool,
) -> Result<OValue, OError> {
    let axis = vector_axis(cells)?;
    let values = vector(table, cells, axis);
    if values.is_empty() {
        return Err(OError::NoNumeric);
    }
    let tree = table.tree(axis);
    let mut out: Vec<NodeId> = Vec::new();
    for (i, v) in values {
        if keep(v, n) {
            let id = NodeId::new(axis, owner(tree, i));
            if !out.contains(&id) {
                out.push(id);
            }
        }
    }
    if out.is_empty() {
        return Err(OError::EmptySelection);
    }
    Ok(OValue::Headers(out))
}

/// Compares interpreter and oracle outcomes: equal values within 1e-9, or
/// errors of the same kind.
pub fn agree(fast: &Result<ExecOutcome, ExecError>, slow: &Result<OValue, OError>) -> bool {
    match (fast, slow) {
        (Ok(outcome), Ok(expected)) => match (&outcome.value, expected) {
            (ExecValue::Region(region), OValue::Cells(cells)) => &region.cells() == cells,
            (ExecValue::Number(a), OValue::Number(b)) => (a - b).abs() <= 1e-9,
            (ExecValue::Headers(a), OValue::Headers(b)) => a == b,
            (ExecValue::Grouped(a), OValue::Grouped(b)) => {
                a.len() == b.len()
                    && a.iter()
                        .zip(b)
                        .all(|((ka, va), (kb, vb))| ka == kb && (va - vb).abs() <= 1e-9)
            }
            _ => false,
        },
        (Err(e), Err(o)) => interp_error_name(e) == oracle_error_name(o),
        _ => false,
    }
}
