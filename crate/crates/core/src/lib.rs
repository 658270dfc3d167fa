//! Reasoning engine for hierarchical tables.
//!
//! Tables whose top and left headers form multi-level trees are modeled as a
//! cell grid plus two header trees ([`table`]). Queries against them are
//! expressed in a small region-based language ([`program`]) executed by the
//! [`interp`] module, searched for under weak or partial supervision by
//! [`search`], and scored by [`eval`]. The [`formula`] module evaluates the
//! spreadsheet-formula subset used in annotations, and [`linearize`] emits
//! the flat text encodings consumed by sequence models.

pub mod eval;
pub mod extract;
pub mod formula;
pub mod ingest;
pub mod interp;
pub mod linearize;
pub mod program;
pub mod search;
pub mod synth;
pub mod table;
pub mod text;

#[cfg(test)]
pub(crate) mod fixtures;

pub use eval::{execution_accuracy, match_answer, spurious_rate};
pub use ingest::{admit_table, load_table, normalize_quantity, Sample};
pub use interp::{execute, ExecValue};
pub use program::{parse_program, render_program, Program};
pub use search::{random_search, SearchConfig};
pub use table::{build_table, HeaderTree, HierTable, NodeId, Region, Side};
