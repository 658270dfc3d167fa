//! Header-tree extraction from cell formats.
//!
//! When a table file carries no explicit trees, the top tree is inferred from
//! merged header cells and the left tree from a rank over (column, indent,
//! bold). Extraction is deterministic: identical grids and formats yield
//! identical trees.

use crate::table::{fill_spans, HeaderNode, HeaderTree, HierTable, Side, TableError};
use crate::text::normalize_header;

/// Extracts the top tree: header row `i` contributes depth-`i+1` nodes, a
/// merged cell spanning columns parents the header cells beneath it, and
/// every data column is owned by the deepest non-empty header above it.
pub fn extract_top_tree(table: &HierTable) -> Result<HeaderTree, TableError> {
    let side = Side::Top;
    if table.top_header_rows == 0 {
        return Err(TableError::TreeCoverageGap {
            side,
            detail: "no top header rows".into(),
        });
    }
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

    // per data column, the chain of node indices from shallow to deep
    let n_data_cols = table.n_data_cols();
    let mut column_chain: Vec<Vec<usize>> = vec![vec![0]; n_data_cols];

    for row in 0..table.top_header_rows {
        let mut col = table.left_header_cols;
        while col < table.n_cols {
            let merge = table
                .cell(row, col)
                .merge_anchor
                .and_then(|_| table.merges.iter().find(|m| m.contains(row, col)));
            let (extent_end, is_anchor_row, cell_pos) = match merge {
                Some(m) => (m.c1, m.r0 == row, (m.r0, m.c0)),
                None => (col, true, (row, col)),
            };
            let text = normalize_header(table.effective_text(row, col));
            if is_anchor_row && !text.is_empty() {
                let data_lo = col - table.left_header_cols;
                let data_hi = extent_end - table.left_header_cols;
                // parent: deepest node so far on the leftmost covered column
                let parent = *column_chain[data_lo].last().unwrap();
                let depth = tree.nodes[parent].depth + 1;
                let index = tree.nodes.len();
                tree.nodes.push(HeaderNode {
                    index,
                    cell: Some(cell_pos),
                    text,
                    depth,
                    children: vec![],
                    own_indices: vec![],
                    span: None,
                });
                tree.nodes[parent].children.push(index);
                for chain in column_chain.iter_mut().take(data_hi + 1).skip(data_lo) {
                    chain.push(index);
                }
            }
            col = extent_end + 1;
        }
    }

    // ownership: the deepest node over each column owns it
    for (data_col, chain) in column_chain.iter().enumerate() {
        let deepest = *chain.last().unwrap();
        if deepest == 0 {
            return Err(TableError::TreeCoverageGap {
                side,
                detail: format!("data column {data_col} has no header"),
            });
        }
        tree.nodes[deepest].own_indices.push(data_col);
    }
    fill_spans(&mut tree);
    Ok(tree)
}

/// Extracts the left tree. Each data row's label cell (leftmost non-empty
/// header cell, following merge anchors) is ranked by (column, indent,
/// bold-before-plain); a row becomes the child of the nearest preceding row
/// with a strictly smaller rank, and every node owns its own row. Ties break
/// toward siblings.
pub fn extract_left_tree(table: &HierTable) -> Result<HeaderTree, TableError> {
    let side = Side::Left;
    if table.left_header_cols == 0 {
        return Err(TableError::TreeCoverageGap {
            side,
            detail: "no left header columns".into(),
        });
    }
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

    // stack of (rank, node index)
    let mut stack: Vec<((usize, u32, u8), usize)> = Vec::new();
    for data_row in 0..table.n_data_rows() {
        let row = table.top_header_rows + data_row;
        let mut label: Option<(usize, &crate::table::Cell, String)> = None;
        for col in 0..table.left_header_cols {
            let text = normalize_header(table.effective_text(row, col));
            // only the merge anchor row carries a vertically merged label
            let is_continuation = match table.cell(row, col).merge_anchor {
                Some((ar, _)) => ar != row,
                None => false,
            };
            if !text.is_empty() && !is_continuation {
                label = Some((col, table.cell(row, col), text));
                break;
            }
        }
        let Some((col, cell, text)) = label else {
            return Err(TableError::TreeCoverageGap {
                side,
                detail: format!("data row {data_row} has no left header label"),
            });
        };
        let rank = (col, cell.indent, if cell.bold { 0u8 } else { 1u8 });
        while let Some(&(top_rank, _)) = stack.last() {
            if top_rank >= rank {
                stack.pop();
            } else {
                break;
            }
        }
        let parent = stack.last().map_or(0, |&(_, i)| i);
        let depth = tree.nodes[parent].depth + 1;
        let index = tree.nodes.len();
        tree.nodes.push(HeaderNode {
            index,
            cell: Some((row, col)),
            text,
            depth,
            children: vec![],
            own_indices: vec![data_row],
            span: None,
        });
        tree.nodes[parent].children.push(index);
        stack.push((rank, index));
    }
    fill_spans(&mut tree);
    Ok(tree)
}
