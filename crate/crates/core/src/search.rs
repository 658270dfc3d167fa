//! Denotation-guided program search under weak and partial supervision.
//!
//! Search draws grammar-valid programs built from question-matched headers
//! and trigger-gated operators, executes each, and keeps the ones whose
//! result equals the gold answer. Partial mode additionally requires at
//! least two satisfied alignment constraints. Everything is deterministic
//! given the seed; per-sample RNGs are derived from `hash(seed, sample_id)`
//! so results do not depend on run order.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::eval::match_answer;
use crate::formula::{extract_alignment, parse_formula, OpLabel};
use crate::ingest::{QuantityLink, Sample};
use crate::interp::{execute_bound, execute_traced, BoundFunc, BoundProgram, ExecOutcome};
use crate::program::{Func, Level, Operator, OperatorKind, Program};
use crate::table::{CellValue, HierTable, NodeId, Side};
use crate::text::{is_stop_word, match_tokens, shared_ngram_len, stable_hash};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchMode {
    Weak,
    Partial,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Programs drawn per sample before giving up.
    pub max_samples_per_item: usize,
    pub max_funcs: usize,
    pub seed: u64,
    pub deactivate_order_relations: bool,
    pub deactivate_k_gt_1: bool,
    pub mode: SearchMode,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            max_samples_per_item: 15_000,
            max_funcs: 6,
            seed: 0,
            deactivate_order_relations: true,
            deactivate_k_gt_1: true,
            mode: SearchMode::Weak,
        }
    }
}

/// Alignment-constraint outcome for one executed program.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintReport {
    pub entity_ok: bool,
    pub quantity_ok: bool,
    pub operator_ok: bool,
    pub satisfied_count: u8,
    pub reward: f64,
    pub answer_correct: bool,
}

impl ConstraintReport {
    /// Programs with reward at least 1.4 qualify for a training buffer:
    /// a correct answer plus two satisfied constraints.
    pub fn buffer_eligible(&self) -> bool {
        self.answer_correct && self.satisfied_count >= 2
    }

    pub fn satisfied_names(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.entity_ok {
            out.push("entity");
        }
        if self.quantity_ok {
            out.push("quantity");
        }
        if self.operator_ok {
            out.push("operator");
        }
        out
    }
}

// ---------------------------------------------------------------------------
// candidate headers
// ---------------------------------------------------------------------------

/// Nodes sharing an n-gram (n in 1..=3, stop words excluded for unigrams)
/// with the question, ranked by longest shared n-gram then document order.
/// Returns (node, shared length) pairs.
pub fn candidate_headers(question: &str, table: &HierTable) -> Vec<(NodeId, usize)> {
    let q = match_tokens(question);
    let mut out: Vec<(NodeId, usize)> = Vec::new();
    for side in [Side::Left, Side::Top] {
        let tree = table.tree(side);
        for index in tree.document_order() {
            let tokens = match_tokens(&tree.node(index).text);
            let len = shared_ngram_len(&q, &tokens);
            if len > 0 {
                out.push((NodeId::new(side, index), len));
            }
        }
    }
    // stable sort keeps document order within equal match lengths
    out.sort_by(|a, b| b.1.cmp(&a.1));
    out
}

// ---------------------------------------------------------------------------
// trigger words
// ---------------------------------------------------------------------------

fn comparative_cue(token: &str) -> bool {
    matches!(token, "more" | "less" | "fewer")
        || (token.len() >= 4 && token.ends_with("er") && !is_stop_word(token))
}

fn superlative_cue(token: &str) -> bool {
    matches!(token, "most" | "least" | "fewest")
        || (token.len() >= 4 && token.ends_with("est") && !is_stop_word(token))
}

fn has_trigger(tokens: &[String], triggers: &[&str]) -> bool {
    tokens.iter().any(|t| {
        triggers
            .iter()
            .any(|trig| t == trig || (trig.len() >= 4 && t.starts_with(trig)))
    })
}

/// Operator kinds whose trigger words appear in the question. Filters are
/// always legal and are not gated here. Order relations carry no triggers
/// and are admitted only when explicitly activated; the rank argument k > 1
/// likewise requires activation.
pub fn allowed_operators(question: &str, config: &SearchConfig) -> BTreeSet<OperatorKind> {
    let tokens = match_tokens(question);
    let comparative = tokens.iter().any(|t| comparative_cue(t));
    let superlative = tokens.iter().any(|t| superlative_cue(t));
    let mut out = BTreeSet::new();

    if comparative || superlative || has_trigger(&tokens, &["top", "first", "bottom", "last"]) {
        out.insert(OperatorKind::Argmax);
        out.insert(OperatorKind::Argmin);
    }
    if superlative {
        out.insert(OperatorKind::Max);
        out.insert(OperatorKind::Min);
    }
    if has_trigger(&tokens, &["average", "mean"]) {
        out.insert(OperatorKind::Average);
    }
    if has_trigger(&tokens, &["all", "combine", "total", "sum"]) {
        out.insert(OperatorKind::Sum);
    }
    if has_trigger(&tokens, &["how", "many", "total", "number"]) {
        out.insert(OperatorKind::Count);
    }
    if comparative
        || has_trigger(
            &tokens,
            &["difference", "more", "than", "change", "compare"],
        )
    {
        out.insert(OperatorKind::Difference);
        out.insert(OperatorKind::DifferenceRate);
        out.insert(OperatorKind::DifferenceRateRev);
    }
    if has_trigger(&tokens, &["times", "percent", "percentage", "fraction"]) {
        out.insert(OperatorKind::Proportion);
        out.insert(OperatorKind::ProportionRev);
    }
    if !config.deactivate_order_relations {
        out.insert(OperatorKind::GreaterThan);
        out.insert(OperatorKind::GreaterEqThan);
        out.insert(OperatorKind::LessThan);
        out.insert(OperatorKind::LessEqThan);
        out.insert(OperatorKind::Eq);
        out.insert(OperatorKind::NotEq);
    }
    out
}

// ---------------------------------------------------------------------------
// program sampling
// ---------------------------------------------------------------------------

struct SamplerContext {
    left: Vec<(NodeId, usize)>,
    top: Vec<(NodeId, usize)>,
    ops: Vec<OperatorKind>,
    numeric_values: Vec<f64>,
    left_depth: usize,
    top_depth: usize,
}

impl SamplerContext {
    fn new(question: &str, table: &HierTable, config: &SearchConfig) -> Self {
        let cands = candidate_headers(question, table);
        let (left, top): (Vec<_>, Vec<_>) =
            cands.into_iter().partition(|(id, _)| id.side == Side::Left);
        let mut numeric_values: Vec<f64> = Vec::new();
        for r in 0..table.n_data_rows() {
            for c in 0..table.n_data_cols() {
                if let Some(x) = table.data_cell(r, c).value.as_number() {
                    numeric_values.push(x);
                }
            }
        }
        SamplerContext {
            left,
            top,
            ops: allowed_operators(question, config).into_iter().collect(),
            numeric_values,
            left_depth: table.left_tree.max_depth(),
            top_depth: table.top_tree.max_depth(),
        }
    }

    /// Weighted pick by shared n-gram length.
    fn pick_header(&self, rng: &mut ChaCha8Rng, side: Side) -> Option<NodeId> {
        let pool = match side {
            Side::Left => &self.left,
            Side::Top => &self.top,
        };
        let total: usize = pool.iter().map(|(_, w)| *w).sum();
        if total == 0 {
            return None;
        }
        let mut ticket = rng.random_range(0..total);
        for (id, w) in pool {
            if ticket < *w {
                return Some(*id);
            }
            ticket -= w;
        }
        None
    }

    fn pick_headers(
        &self,
        rng: &mut ChaCha8Rng,
        side: Side,
        want_two: bool,
    ) -> Option<Vec<NodeId>> {
        let first = self.pick_header(rng, side)?;
        if !want_two {
            return Some(vec![first]);
        }
        for _ in 0..8 {
            let second = self.pick_header(rng, side)?;
            if second != first {
                return Some(vec![first, second]);
            }
        }
        Some(vec![first])
    }

    fn instantiate_operator(
        &self,
        rng: &mut ChaCha8Rng,
        kind: OperatorKind,
        config: &SearchConfig,
    ) -> Option<Operator> {
        let k = if config.deactivate_k_gt_1 {
            1
        } else {
            rng.random_range(1..=3)
        };
        let level = |rng: &mut ChaCha8Rng| {
            let sides: Vec<(Side, usize)> =
                [(Side::Left, self.left_depth), (Side::Top, self.top_depth)]
                    .into_iter()
                    .filter(|(_, d)| *d >= 1)
                    .collect();
            let (side, depth) = sides[rng.random_range(0..sides.len())];
            Level::new(side, rng.random_range(1..=depth))
        };
        let number = |rng: &mut ChaCha8Rng| -> Option<f64> {
            if self.numeric_values.is_empty() {
                None
            } else {
                Some(self.numeric_values[rng.random_range(0..self.numeric_values.len())])
            }
        };
        Some(match kind {
            OperatorKind::Argmax => Operator::Argmax(k),
            OperatorKind::Argmin => Operator::Argmin(k),
            OperatorKind::Max => Operator::Max(level(rng)),
            OperatorKind::Min => Operator::Min(level(rng)),
            OperatorKind::Sum => Operator::Sum(level(rng)),
            OperatorKind::Average => Operator::Average(level(rng)),
            OperatorKind::Count => Operator::Count(level(rng)),
            OperatorKind::Difference => Operator::Difference,
            OperatorKind::Proportion => Operator::Proportion,
            OperatorKind::ProportionRev => Operator::ProportionRev,
            OperatorKind::DifferenceRate => Operator::DifferenceRate,
            OperatorKind::DifferenceRateRev => Operator::DifferenceRateRev,
            OperatorKind::GreaterThan => Operator::GreaterThan(number(rng)?),
            OperatorKind::GreaterEqThan => Operator::GreaterEqThan(number(rng)?),
            OperatorKind::LessThan => Operator::LessThan(number(rng)?),
            OperatorKind::LessEqThan => Operator::LessEqThan(number(rng)?),
            OperatorKind::Eq => Operator::Eq(number(rng)?),
            OperatorKind::NotEq => Operator::NotEq(number(rng)?),
            OperatorKind::Opposite => Operator::Opposite,
        })
    }

    /// Draws one grammar-valid bound program, or `None` when the draw does
    /// not fit the budget or the table offers no material for it.
    fn sample(&self, rng: &mut ChaCha8Rng, config: &SearchConfig) -> Option<BoundProgram> {
        let n_left = if self.left.is_empty() {
            0
        } else {
            rng.random_range(0..=2usize.min(self.left.len()))
        };
        let left_level = n_left > 0 || rng.random_bool(0.5);
        let n_top = if self.top.is_empty() {
            0
        } else {
            rng.random_range(0..=2usize.min(self.top.len()))
        };
        let top_level = n_top > 0 || rng.random_bool(0.5);
        let use_op = !self.ops.is_empty() && rng.random_bool(0.5);

        let total =
            n_left + usize::from(left_level) + n_top + usize::from(top_level) + usize::from(use_op);
        if total == 0 || total > config.max_funcs {
            return None;
        }

        let mut funcs = Vec::with_capacity(total);
        for _ in 0..n_left {
            let want_two = rng.random_bool(0.25);
            funcs.push(BoundFunc::FilterTree(self.pick_headers(
                rng,
                Side::Left,
                want_two,
            )?));
        }
        if left_level {
            funcs.push(BoundFunc::FilterLevel(Level::new(
                Side::Left,
                rng.random_range(1..=self.left_depth.max(1)),
            )));
        }
        for _ in 0..n_top {
            let want_two = rng.random_bool(0.25);
            funcs.push(BoundFunc::FilterTree(self.pick_headers(
                rng,
                Side::Top,
                want_two,
            )?));
        }
        if top_level {
            funcs.push(BoundFunc::FilterLevel(Level::new(
                Side::Top,
                rng.random_range(1..=self.top_depth.max(1)),
            )));
        }
        if use_op {
            let kind = self.ops[rng.random_range(0..self.ops.len())];
            funcs.push(BoundFunc::Operator(
                self.instantiate_operator(rng, kind, config)?,
            ));
        }
        Some(BoundProgram { funcs })
    }
}

/// Recovers the surface program of a bound one.
pub fn surface_program(bound: &BoundProgram, table: &HierTable) -> Program {
    let funcs = bound
        .funcs
        .iter()
        .map(|f| match f {
            BoundFunc::FilterTree(nodes) => Func::FilterTree {
                headers: nodes
                    .iter()
                    .map(|&id| table.node(id).text.clone())
                    .collect(),
                side: nodes[0].side,
            },
            BoundFunc::FilterLevel(level) => Func::FilterLevel(*level),
            BoundFunc::Operator(op) => Func::Operator(op.clone()),
        })
        .collect();
    Program::new(funcs).expect("bound programs are grammar-valid by construction")
}

// ---------------------------------------------------------------------------
// constraint scoring
// ---------------------------------------------------------------------------

fn mention_in_question(question_tokens: &[String], mention: &str) -> bool {
    let m = match_tokens(mention);
    !m.is_empty() && question_tokens.windows(m.len()).any(|w| w == m)
}

fn anchor_of(table: &HierTable, cell: (usize, usize)) -> (usize, usize) {
    table
        .grid
        .get(cell.0)
        .and_then(|row| row.get(cell.1))
        .and_then(|c| c.merge_anchor)
        .unwrap_or(cell)
}

fn is_data_cell(table: &HierTable, cell: (usize, usize)) -> bool {
    cell.0 >= table.top_header_rows && cell.1 >= table.left_header_cols
}

/// Labels a region operator for comparison against annotation formulas.
/// Superlatives accept either formula template; order relations have no
/// formula counterpart.
fn operator_label_sets(op: Option<&Operator>) -> Option<Vec<BTreeSet<OpLabel>>> {
    let single = |l: OpLabel| Some(vec![BTreeSet::from([l])]);
    match op.map(Operator::kind) {
        None => Some(vec![BTreeSet::new()]),
        Some(OperatorKind::Argmax) => Some(vec![
            BTreeSet::from([OpLabel::KthArgmax]),
            BTreeSet::from([OpLabel::PairArgmax]),
        ]),
        Some(OperatorKind::Argmin) => Some(vec![
            BTreeSet::from([OpLabel::KthArgmin]),
            BTreeSet::from([OpLabel::PairArgmin]),
        ]),
        Some(OperatorKind::Max) => single(OpLabel::Max),
        Some(OperatorKind::Min) => single(OpLabel::Min),
        Some(OperatorKind::Sum) => single(OpLabel::Sum),
        Some(OperatorKind::Average) => single(OpLabel::Average),
        Some(OperatorKind::Count) => single(OpLabel::Count),
        Some(OperatorKind::Difference) => single(OpLabel::Diff),
        Some(OperatorKind::Proportion) | Some(OperatorKind::ProportionRev) => single(OpLabel::Div),
        Some(OperatorKind::DifferenceRate) | Some(OperatorKind::DifferenceRateRev) => {
            Some(vec![BTreeSet::from([OpLabel::Diff, OpLabel::Div])])
        }
        Some(OperatorKind::Opposite) => single(OpLabel::Opposite),
        Some(k) if k.is_order_relation() => None,
        Some(_) => None,
    }
}

/// Labels stored in a sample's formula annotation: a real formula parses to
/// labels; a bare cell reference list means plain selection.
pub fn formula_labels(sample: &Sample) -> Option<BTreeSet<OpLabel>> {
    let text = sample.formula.as_deref()?.trim();
    if text.starts_with('=') {
        let ast = parse_formula(text).ok()?;
        return Some(extract_alignment(&ast).0.into_iter().collect());
    }
    // answer cell reference(s) like "B7" or "B7, C9"
    if parse_ref_list(text).is_some() {
        return Some(BTreeSet::new());
    }
    None
}

fn parse_ref_list(text: &str) -> Option<Vec<(usize, usize)>> {
    let mut out = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        let split = part.find(|c: char| c.is_ascii_digit())?;
        let (letters, digits) = part.split_at(split);
        if letters.is_empty() || !letters.chars().all(|c| c.is_ascii_alphabetic()) {
            return None;
        }
        let row: usize = digits.parse().ok()?;
        if row == 0 {
            return None;
        }
        let mut col = 0usize;
        for ch in letters.chars() {
            col = col * 26 + (ch.to_ascii_uppercase() as usize - 'A' as usize + 1);
        }
        out.push((row - 1, col - 1));
    }
    (!out.is_empty()).then_some(out)
}

/// Scores the three partial-supervision constraints for one executed
/// program. Links whose mention does not occur in the question are ignored;
/// a missing annotation makes its constraint unsatisfiable.
pub fn score_constraints(
    bound: &BoundProgram,
    outcome: &ExecOutcome,
    sample: &Sample,
    table: &HierTable,
) -> ConstraintReport {
    let gold: Vec<CellValue> = sample.answers.iter().map(|a| a.to_cell_value()).collect();
    let answer_correct =
        !gold.is_empty() && match_answer(&outcome.value.answer_values(table), &gold);
    let q_tokens = match_tokens(&sample.question);

    // entity: every question-linked header cell must be used by a filter
    let used_cells: BTreeSet<(usize, usize)> = bound
        .used_nodes()
        .iter()
        .filter_map(|&id| table.node(id).cell)
        .collect();
    let entity_cells: Vec<(usize, usize)> = sample
        .entity_links
        .iter()
        .filter(|(mention, _)| mention_in_question(&q_tokens, mention))
        .map(|(_, &cell)| anchor_of(table, cell))
        .collect();
    let entity_ok = !entity_cells.is_empty()
        && entity_cells
            .iter()
            .filter(|cell| !is_data_cell(table, **cell))
            .all(|cell| used_cells.contains(cell));

    // quantity: every question-linked data cell must sit in the final
    // pre-operator region
    let mut quantity_cells: Vec<(usize, usize)> = Vec::new();
    for (mention, link) in &sample.quantity_links {
        if !mention_in_question(&q_tokens, mention) {
            continue;
        }
        match link {
            QuantityLink::Cell(cell) => quantity_cells.push(*cell),
            QuantityLink::Formula(text) => {
                if let Ok(ast) = parse_formula(text) {
                    quantity_cells.extend(extract_alignment(&ast).1);
                }
            }
        }
    }
    let quantity_data: Vec<(usize, usize)> = quantity_cells
        .into_iter()
        .filter(|cell| is_data_cell(table, *cell))
        .collect();
    let quantity_ok = !quantity_data.is_empty()
        && quantity_data.iter().all(|&(r, c)| {
            outcome
                .pre_operator_region
                .contains(r - table.top_header_rows, c - table.left_header_cols)
        });

    // operator: the program's operator must match the formula labels
    let operator_ok = match (
        operator_label_sets(bound.operator()),
        formula_labels(sample),
    ) {
        (Some(candidates), Some(labels)) => candidates.contains(&labels),
        _ => false,
    };

    let satisfied_count = u8::from(entity_ok) + u8::from(quantity_ok) + u8::from(operator_ok);
    ConstraintReport {
        entity_ok,
        quantity_ok,
        operator_ok,
        satisfied_count,
        reward: f64::from(answer_correct) + 0.2 * f64::from(satisfied_count),
        answer_correct,
    }
}

// ---------------------------------------------------------------------------
// random search
// ---------------------------------------------------------------------------

/// One consistent program found by search.
#[derive(Debug, Clone)]
pub struct SearchHit {
    pub program: Program,
    pub text: String,
    pub report: ConstraintReport,
}

/// Per-sample search output in the JSONL schema.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleSearchRecord {
    pub sample_id: String,
    pub programs: Vec<FoundProgram>,
    pub stats: SampleStats,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FoundProgram {
    pub text: String,
    pub reward: f64,
    pub satisfied: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleStats {
    pub drawn: usize,
    pub consistent: usize,
}

/// Searches one sample for denotation-consistent programs. Candidates are
/// deduplicated by canonical rendering, then each surviving program is
/// re-executed under the public binding semantics: it must still produce the
/// gold answer, and its constraint report describes that execution (a draw
/// whose lucky binding hit the answer does not get credit the deterministic
/// binding cannot reproduce). Results are ordered by descending reward then
/// text.
pub fn random_search(sample: &Sample, table: &HierTable, config: &SearchConfig) -> Vec<SearchHit> {
    let gold: Vec<CellValue> = sample.answers.iter().map(|a| a.to_cell_value()).collect();
    if gold.is_empty() {
        return Vec::new();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(stable_hash(config.seed, &sample.sample_id));
    let ctx = SamplerContext::new(&sample.question, table, config);
    let mut consistent: BTreeMap<String, Program> = BTreeMap::new();

    for _ in 0..config.max_samples_per_item {
        let Some(bound) = ctx.sample(&mut rng, config) else {
            continue;
        };
        let Ok(outcome) = execute_bound(&bound, table) else {
            continue;
        };
        if !match_answer(&outcome.value.answer_values(table), &gold) {
            continue;
        }
        let program = surface_program(&bound, table);
        let text = crate::program::render_program(&program);
        consistent.entry(text).or_insert(program);
    }

    let mut hits: Vec<SearchHit> = consistent
        .into_iter()
        .filter_map(|(text, program)| {
            let (bound, outcome) = execute_traced(&program, table).ok()?;
            if !match_answer(&outcome.value.answer_values(table), &gold) {
                return None;
            }
            let report = score_constraints(&bound, &outcome, sample, table);
            if config.mode == SearchMode::Partial && report.satisfied_count < 2 {
                return None;
            }
            Some(SearchHit {
                program,
                text,
                report,
            })
        })
        .collect();
    hits.sort_by(|a, b| {
        b.report
            .reward
            .partial_cmp(&a.report.reward)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.text.cmp(&b.text))
    });
    hits
}

/// Runs search and wraps the result in the serializable record form.
pub fn search_sample_record(
    sample: &Sample,
    table: &HierTable,
    config: &SearchConfig,
) -> SampleSearchRecord {
    let hits = random_search(sample, table, config);
    SampleSearchRecord {
        sample_id: sample.sample_id.clone(),
        programs: hits
            .iter()
            .map(|h| FoundProgram {
                text: h.text.clone(),
                reward: h.report.reward,
                satisfied: h
                    .report
                    .satisfied_names()
                    .into_iter()
                    .map(String::from)
                    .collect(),
            })
            .collect(),
        stats: SampleStats {
            drawn: config.max_samples_per_item,
            consistent: hits.len(),
        },
    }
}

// ---------------------------------------------------------------------------
// statistics
// ---------------------------------------------------------------------------

/// Aggregate search statistics over a sample set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchReport {
    pub n_samples: usize,
    pub mean_consistent: f64,
    /// Fraction of samples with at least one consistent program.
    pub coverage: f64,
    pub by_length: BTreeMap<usize, usize>,
    pub by_operator: BTreeMap<String, usize>,
}

pub fn search_stats(records: &[SampleSearchRecord]) -> SearchReport {
    let n = records.len();
    let mut by_length: BTreeMap<usize, usize> = BTreeMap::new();
    let mut by_operator: BTreeMap<String, usize> = BTreeMap::new();
    let mut total = 0usize;
    let mut covered = 0usize;
    for record in records {
        total += record.programs.len();
        if !record.programs.is_empty() {
            covered += 1;
        }
        for found in &record.programs {
            if let Ok(program) = crate::program::parse_program(&found.text) {
                *by_length.entry(program.funcs().len()).or_default() += 1;
                let op = program
                    .operator()
                    .map(|o| o.kind().name().to_string())
                    .unwrap_or_else(|| "none".to_string());
                *by_operator.entry(op).or_default() += 1;
            }
        }
    }
    SearchReport {
        n_samples: n,
        mean_consistent: if n == 0 { 0.0 } else { total as f64 / n as f64 },
        coverage: if n == 0 {
            0.0
        } else {
            covered as f64 / n as f64
        },
        by_length,
        by_operator,
    }
}
