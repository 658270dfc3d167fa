//! Hand-constructed tables shared by unit tests.

use crate::table::{build_table, HierTable, RawCell};

fn cell(text: &str, indent: u32) -> RawCell {
    RawCell {
        text: text.into(),
        indent,
        ..Default::default()
    }
}

/// Two years each holding a country pair, with gdp/population columns.
///
/// Left tree: root -> { 2012 (owns data row 0, empty data) -> { china (r1),
/// u.s. (r2) }, 2013 (owns r3) -> { china (r4), u.s. (r5) } }.
/// Top tree: root -> { gdp (col 0), population (col 1) }.
pub fn f1() -> HierTable {
    let grid = vec![
        vec![cell("", 0), cell("gdp", 0), cell("population", 0)],
        vec![cell("2012", 0), cell("", 0), cell("", 0)],
        vec![cell("china", 1), cell("8.5", 0), cell("1351", 0)],
        vec![cell("u.s.", 1), cell("16.2", 0), cell("314", 0)],
        vec![cell("2013", 0), cell("", 0), cell("", 0)],
        vec![cell("china", 1), cell("9.6", 0), cell("1357", 0)],
        vec![cell("u.s.", 1), cell("16.8", 0), cell("316", 0)],
    ];
    build_table("f1", grid, vec![], 1, 1, None).expect("f1 builds")
}

/// A chain table whose left tree has exactly `depth` levels.
pub fn deep_left_table(depth: u32) -> HierTable {
    let mut grid = vec![vec![cell("", 0), cell("v", 0), cell("w", 0)]];
    for d in 0..depth {
        grid.push(vec![
            cell(&format!("lvl{d}"), d),
            cell("1", 0),
            cell("2", 0),
        ]);
    }
    build_table("deep", grid, vec![], 1, 1, None).expect("chain builds")
}
