//! Synthetic tables and programs for fuzzing and benchmarks.
//!
//! Trees are generated by the same indent-stack construction the extractor
//! uses, which guarantees the ownership partition and contiguous sibling
//! spans by construction. Header texts occasionally repeat so duplicate
//! -name binding and string-keyed grouping get exercised.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::interp::{BoundFunc, BoundProgram};
use crate::program::{Level, Operator};
use crate::table::{
    build_table, fill_spans, HeaderNode, HeaderTree, HierTable, NodeId, RawCell, Side,
};

#[derive(Debug, Clone)]
pub struct TableOpts {
    pub max_data_rows: usize,
    pub max_data_cols: usize,
    pub max_depth: usize,
    /// Probability that a data cell holds text instead of a number.
    pub text_cell_prob: f64,
    pub empty_cell_prob: f64,
    /// Probability that a header reuses an earlier name on its side.
    pub duplicate_name_prob: f64,
}

impl Default for TableOpts {
    fn default() -> Self {
        TableOpts {
            max_data_rows: 8,
            max_data_cols: 8,
            max_depth: 3,
            text_cell_prob: 0.1,
            empty_cell_prob: 0.1,
            duplicate_name_prob: 0.2,
        }
    }
}

/// Random depth sequence for an indent-stack tree: starts at depth 1, moves
/// at most one level deeper per step.
fn random_depths(rng: &mut ChaCha8Rng, len: usize, max_depth: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(len);
    let mut prev = 1usize;
    for i in 0..len {
        let depth = if i == 0 {
            1
        } else {
            let ceiling = (prev + 1).min(max_depth);
            rng.random_range(1..=ceiling)
        };
        out.push(depth);
        prev = depth;
    }
    out
}

fn tree_from_depths(
    side: Side,
    depths: &[usize],
    cells: &[(usize, usize)],
    names: &[String],
) -> HeaderTree {
    let mut tree = HeaderTree {
        side,
        nodes: vec![HeaderNode {
            index: 0,
            cell: None,
            text: String::new(),
            depth: 0,
            children: vec![],
            own_indices: vec![],
            span: None,
        }],
    };
    let mut stack: Vec<(usize, usize)> = Vec::new(); // (depth, node index)
    for (axis_index, &depth) in depths.iter().enumerate() {
        while stack.last().is_some_and(|&(d, _)| d >= depth) {
            stack.pop();
        }
        let parent = stack.last().map_or(0, |&(_, i)| i);
        let parent_depth = tree.nodes[parent].depth;
        // depth jumps are clamped so children sit one below their parent
        let depth = depth.min(parent_depth + 1);
        let index = tree.nodes.len();
        tree.nodes.push(HeaderNode {
            index,
            cell: Some(cells[axis_index]),
            text: names[axis_index].clone(),
            depth,
            children: vec![],
            own_indices: vec![axis_index],
            span: None,
        });
        tree.nodes[parent].children.push(index);
        stack.push((depth, index));
    }
    fill_spans(&mut tree);
    tree
}

fn random_names(rng: &mut ChaCha8Rng, len: usize, prefix: &str, dup_prob: f64) -> Vec<String> {
    let mut out: Vec<String> = Vec::with_capacity(len);
    for i in 0..len {
        if i > 0 && rng.random_bool(dup_prob) {
            let pick = rng.random_range(0..out.len());
            out.push(out[pick].clone());
        } else {
            out.push(format!("{prefix}{i}"));
        }
    }
    out
}

/// Generates a random valid table. Every data row and column is owned by
/// exactly one node; depths stay within `opts.max_depth`.
pub fn random_table(rng: &mut ChaCha8Rng, opts: &TableOpts) -> HierTable {
    let n_data_rows = rng.random_range(1..=opts.max_data_rows);
    let n_data_cols = rng.random_range(1..=opts.max_data_cols);
    let top_header_rows = 1;
    let left_header_cols = 1;

    let row_depths = random_depths(rng, n_data_rows, opts.max_depth);
    let col_depths = random_depths(rng, n_data_cols, opts.max_depth);
    let row_names = random_names(rng, n_data_rows, "r", opts.duplicate_name_prob);
    let col_names = random_names(rng, n_data_cols, "c", opts.duplicate_name_prob);

    let n_rows = top_header_rows + n_data_rows;
    let n_cols = left_header_cols + n_data_cols;
    let mut grid: Vec<Vec<RawCell>> = vec![vec![RawCell::default(); n_cols]; n_rows];
    for (c, name) in col_names.iter().enumerate() {
        grid[0][left_header_cols + c] = RawCell::text(name.clone());
    }
    for (r, name) in row_names.iter().enumerate() {
        grid[top_header_rows + r] = {
            let mut row = vec![RawCell::text(name.clone())];
            for _ in 0..n_data_cols {
                let cell = if rng.random_bool(opts.empty_cell_prob) {
                    RawCell::default()
                } else if rng.random_bool(opts.text_cell_prob) {
                    RawCell::text(format!("t{}", rng.random_range(0..5)))
                } else {
                    // one decimal place keeps arithmetic well-conditioned
                    let v = rng.random_range(-500i64..=500) as f64 / 10.0;
                    RawCell::text(crate::text::render_number(v))
                };
                row.push(cell);
            }
            row
        };
    }

    let left_cells: Vec<(usize, usize)> =
        (0..n_data_rows).map(|r| (top_header_rows + r, 0)).collect();
    let top_cells: Vec<(usize, usize)> = (0..n_data_cols)
        .map(|c| (0, left_header_cols + c))
        .collect();
    let left = tree_from_depths(Side::Left, &row_depths, &left_cells, &row_names);
    let top = tree_from_depths(Side::Top, &col_depths, &top_cells, &col_names);

    build_table(
        format!("synth-{}", rng.random_range(0..u32::MAX)),
        grid,
        vec![],
        top_header_rows,
        left_header_cols,
        Some((left, top)),
    )
    .expect("synthetic tables satisfy the invariants by construction")
}

/// Draws a random grammar-valid bound program over all nodes of the table,
/// covering every operator kind.
pub fn random_bound_program(
    rng: &mut ChaCha8Rng,
    table: &HierTable,
    max_funcs: usize,
) -> BoundProgram {
    let pick_node = |rng: &mut ChaCha8Rng, side: Side| -> Option<NodeId> {
        let tree = table.tree(side);
        if tree.nodes.len() <= 1 {
            return None;
        }
        Some(NodeId::new(side, rng.random_range(1..tree.nodes.len())))
    };
    let mut numeric: Vec<f64> = Vec::new();
    for r in 0..table.n_data_rows() {
        for c in 0..table.n_data_cols() {
            if let Some(x) = table.data_cell(r, c).value.as_number() {
                numeric.push(x);
            }
        }
    }

    loop {
        let n_left = rng.random_range(0..=2usize);
        let left_level = n_left > 0 || rng.random_bool(0.5);
        let n_top = rng.random_range(0..=2usize);
        let top_level = n_top > 0 || rng.random_bool(0.5);
        let use_op = rng.random_bool(0.6);
        let total =
            n_left + usize::from(left_level) + n_top + usize::from(top_level) + usize::from(use_op);
        if total == 0 || total > max_funcs {
            continue;
        }

        let mut funcs = Vec::with_capacity(total);
        let mut ok = true;
        for _ in 0..n_left {
            match pick_node(rng, Side::Left) {
                Some(first) => {
                    let mut nodes = vec![first];
                    if rng.random_bool(0.3) {
                        if let Some(second) = pick_node(rng, Side::Left) {
                            if second != first {
                                nodes.push(second);
                            }
                        }
                    }
                    funcs.push(BoundFunc::FilterTree(nodes));
                }
                None => ok = false,
            }
        }
        if left_level {
            let depth = table.left_tree.max_depth();
            funcs.push(BoundFunc::FilterLevel(Level::new(
                Side::Left,
                rng.random_range(1..=depth.max(1)),
            )));
        }
        for _ in 0..n_top {
            match pick_node(rng, Side::Top) {
                Some(first) => {
                    let mut nodes = vec![first];
                    if rng.random_bool(0.3) {
                        if let Some(second) = pick_node(rng, Side::Top) {
                            if second != first {
                                nodes.push(second);
                            }
                        }
                    }
                    funcs.push(BoundFunc::FilterTree(nodes));
                }
                None => ok = false,
            }
        }
        if top_level {
            let depth = table.top_tree.max_depth();
            funcs.push(BoundFunc::FilterLevel(Level::new(
                Side::Top,
                rng.random_range(1..=depth.max(1)),
            )));
        }
        if use_op {
            funcs.push(BoundFunc::Operator(random_operator(rng, table, &numeric)));
        }
        if ok {
            return BoundProgram { funcs };
        }
    }
}

fn random_operator(rng: &mut ChaCha8Rng, table: &HierTable, numeric: &[f64]) -> Operator {
    let level = |rng: &mut ChaCha8Rng| {
        let side = if rng.random_bool(0.5) {
            Side::Left
        } else {
            Side::Top
        };
        let depth = table.tree(side).max_depth().max(1);
        Level::new(side, rng.random_range(1..=depth))
    };
    let number = |rng: &mut ChaCha8Rng| {
        if numeric.is_empty() || rng.random_bool(0.3) {
            rng.random_range(-50i64..=50) as f64
        } else {
            numeric[rng.random_range(0..numeric.len())]
        }
    };
    match rng.random_range(0..19) {
        0 => Operator::Argmax(rng.random_range(1..=3)),
        1 => Operator::Argmin(rng.random_range(1..=3)),
        2 => Operator::Max(level(rng)),
        3 => Operator::Min(level(rng)),
        4 => Operator::Sum(level(rng)),
        5 => Operator::Average(level(rng)),
        6 => Operator::Count(level(rng)),
        7 => Operator::Difference,
        8 => Operator::Proportion,
        9 => Operator::ProportionRev,
        10 => Operator::DifferenceRate,
        11 => Operator::DifferenceRateRev,
        12 => Operator::GreaterThan(number(rng)),
        13 => Operator::GreaterEqThan(number(rng)),
        14 => Operator::LessThan(number(rng)),
        15 => Operator::LessEqThan(number(rng)),
        16 => Operator::Eq(number(rng)),
        17 => Operator::NotEq(number(rng)),
        _ => Operator::Opposite,
    }
}
