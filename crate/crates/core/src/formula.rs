//! The spreadsheet-formula subset used in annotations.
//!
//! Formulas use A1 references over raw grid coordinates (headers included).
//! The evaluator implements numeric semantics only as far as the annotation
//! templates need: aggregates skip non-numeric cells, lookups compare with a
//! small tolerance, and division by zero is an error rather than a sentinel.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::table::{CellValue, HierTable};
use crate::text::{approx_eq, normalize_header};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CmpOp {
    Gt,
    Lt,
    Ge,
    Le,
    Eq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum FuncName {
    Sum,
    Average,
    Max,
    Min,
    Count,
    Small,
    Large,
    Xlookup,
    If,
}

impl FuncName {
    fn parse(name: &str) -> Option<FuncName> {
        match name.to_ascii_uppercase().as_str() {
            "SUM" => Some(FuncName::Sum),
            "AVERAGE" => Some(FuncName::Average),
            "MAX" => Some(FuncName::Max),
            "MIN" => Some(FuncName::Min),
            "COUNT" => Some(FuncName::Count),
            "SMALL" => Some(FuncName::Small),
            "LARGE" => Some(FuncName::Large),
            "XLOOKUP" => Some(FuncName::Xlookup),
            "IF" => Some(FuncName::If),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FormulaAst {
    Number(f64),
    /// Grid coordinates, 0-based (`B3` is row 2, col 1).
    CellRef(usize, usize),
    /// Inclusive rectangle in grid coordinates.
    Range((usize, usize), (usize, usize)),
    UnaryNeg(Box<FormulaAst>),
    Percent(Box<FormulaAst>),
    BinOp(char, Box<FormulaAst>, Box<FormulaAst>),
    Compare(CmpOp, Box<FormulaAst>, Box<FormulaAst>),
    Call(FuncName, Vec<FormulaAst>),
}

#[derive(Debug, Error, PartialEq)]
pub enum FormulaError {
    #[error("parse error at byte {position}: expected {expected}")]
    ParseError { position: usize, expected: String },
    #[error("reference ({0}, {1}) out of bounds")]
    RefOutOfBounds(usize, usize),
    #[error("division by zero")]
    DivisionByZero,
    #[error("lookup value not found")]
    LookupMiss,
    #[error("aggregate over no numeric cells")]
    EmptyAggregate,
    #[error("rank {0} out of range")]
    RankOutOfRange(usize),
    #[error("operand is not numeric")]
    TypeError,
}

// ---------------------------------------------------------------------------
// parsing
// ---------------------------------------------------------------------------

/// Parses a formula beginning with `=`.
pub fn parse_formula(text: &str) -> Result<FormulaAst, FormulaError> {
    let body = text.strip_prefix('=').ok_or(FormulaError::ParseError {
        position: 0,
        expected: "'='".into(),
    })?;
    let mut parser = Parser {
        bytes: body.as_bytes(),
        pos: 0,
        offset: 1,
    };
    let ast = parser.comparison()?;
    parser.skip_ws();
    if parser.pos < parser.bytes.len() {
        return Err(parser.err("end of formula"));
    }
    check_ast(&ast)?;
    Ok(ast)
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
    offset: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, expected: &str) -> FormulaError {
        FormulaError::ParseError {
            position: self.pos + self.offset,
            expected: expected.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn comparison(&mut self) -> Result<FormulaAst, FormulaError> {
        let left = self.additive()?;
        let op = match self.peek() {
            Some(b'>') => {
                self.pos += 1;
                if self.bytes.get(self.pos) == Some(&b'=') {
                    self.pos += 1;
                    CmpOp::Ge
                } else {
                    CmpOp::Gt
                }
            }
            Some(b'<') => {
                self.pos += 1;
                if self.bytes.get(self.pos) == Some(&b'=') {
                    self.pos += 1;
                    CmpOp::Le
                } else {
                    CmpOp::Lt
                }
            }
            Some(b'=') => {
                self.pos += 1;
                CmpOp::Eq
            }
            _ => return Ok(left),
        };
        let right = self.additive()?;
        // chained comparisons are rejected
        if matches!(self.peek(), Some(b'>') | Some(b'<') | Some(b'=')) {
            return Err(self.err("a single comparison"));
        }
        Ok(FormulaAst::Compare(op, Box::new(left), Box::new(right)))
    }

    fn additive(&mut self) -> Result<FormulaAst, FormulaError> {
        let mut node = self.multiplicative()?;
        while let Some(op @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.multiplicative()?;
            node = FormulaAst::BinOp(op as char, Box::new(node), Box::new(rhs));
        }
        Ok(node)
    }

    fn multiplicative(&mut self) -> Result<FormulaAst, FormulaError> {
        let mut node = self.percent()?;
        while let Some(op @ (b'*' | b'/')) = self.peek() {
            self.pos += 1;
            let rhs = self.percent()?;
            node = FormulaAst::BinOp(op as char, Box::new(node), Box::new(rhs));
        }
        Ok(node)
    }

    fn percent(&mut self) -> Result<FormulaAst, FormulaError> {
        let mut node = self.unary()?;
        while self.peek() == Some(b'%') {
            self.pos += 1;
            node = FormulaAst::Percent(Box::new(node));
        }
        Ok(node)
    }

    fn unary(&mut self) -> Result<FormulaAst, FormulaError> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(FormulaAst::UnaryNeg(Box::new(self.unary()?)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<FormulaAst, FormulaError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.comparison()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("')'"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'$' => self.ref_or_call(),
            _ => Err(self.err("a number, reference, or function call")),
        }
    }

    fn number(&mut self) -> Result<FormulaAst, FormulaError> {
        let start = self.pos;
        while self
            .bytes
            .get(self.pos)
            .is_some_and(|c| c.is_ascii_digit() || *c == b'.')
        {
            self.pos += 1;
        }
        let text = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
        text.parse()
            .map(FormulaAst::Number)
            .map_err(|_| self.err("a number"))
    }

    fn ref_or_call(&mut self) -> Result<FormulaAst, FormulaError> {
        let start = self.pos;
        if let Some(cell) = self.try_cell_ref() {
            // a range when followed by ':'
            if self.bytes.get(self.pos) == Some(&b':') {
                self.pos += 1;
                let other = self
                    .try_cell_ref()
                    .ok_or_else(|| self.err("a cell reference after ':'"))?;
                let (r0, r1) = (cell.0.min(other.0), cell.0.max(other.0));
                let (c0, c1) = (cell.1.min(other.1), cell.1.max(other.1));
                return Ok(FormulaAst::Range((r0, c0), (r1, c1)));
            }
            return Ok(FormulaAst::CellRef(cell.0, cell.1));
        }
        self.pos = start;
        let name_start = self.pos;
        while self
            .bytes
            .get(self.pos)
            .is_some_and(|c| c.is_ascii_alphabetic())
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.bytes[name_start..self.pos]).unwrap();
        let func = FuncName::parse(name).ok_or_else(|| self.err("a known function name"))?;
        if self.peek() != Some(b'(') {
            return Err(self.err("'('"));
        }
        self.pos += 1;
        let mut args = Vec::new();
        if self.peek() != Some(b')') {
            loop {
                args.push(self.comparison()?);
                match self.peek() {
                    Some(b',') => {
                        self.pos += 1;
                    }
                    Some(b')') => break,
                    _ => return Err(self.err("',' or ')'")),
                }
            }
        }
        self.pos += 1;
        Ok(FormulaAst::Call(func, args))
    }

    /// `$A$12`-style reference; returns 0-based (row, col) or backtracks.
    fn try_cell_ref(&mut self) -> Option<(usize, usize)> {
        let start = self.pos;
        if self.bytes.get(self.pos) == Some(&b'$') {
            self.pos += 1;
        }
        let col_start = self.pos;
        while self
            .bytes
            .get(self.pos)
            .is_some_and(|c| c.is_ascii_uppercase() || c.is_ascii_lowercase())
        {
            self.pos += 1;
        }
        if self.pos == col_start || self.pos - col_start > 3 {
            self.pos = start;
            return None;
        }
        let col_text = &self.bytes[col_start..self.pos];
        if self.bytes.get(self.pos) == Some(&b'$') {
            self.pos += 1;
        }
        let row_start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if self.pos == row_start {
            self.pos = start;
            return None;
        }
        let row: usize = std::str::from_utf8(&self.bytes[row_start..self.pos])
            .unwrap()
            .parse()
            .ok()?;
        if row == 0 {
            self.pos = start;
            return None;
        }
        let mut col = 0usize;
        for &b in col_text {
            col = col * 26 + (b.to_ascii_uppercase() - b'A' + 1) as usize;
        }
        Some((row - 1, col - 1))
    }
}

/// Structural invariants beyond the grammar: SMALL/LARGE rank arguments are
/// positive integers, XLOOKUP lookup/result ranges have equal length, and
/// IF's condition is a comparison.
fn check_ast(ast: &FormulaAst) -> Result<(), FormulaError> {
    let invalid = |expected: &str| FormulaError::ParseError {
        position: 0,
        expected: expected.to_string(),
    };
    match ast {
        FormulaAst::Call(func, args) => {
            for a in args {
                check_ast(a)?;
            }
            match func {
                FuncName::Small | FuncName::Large => {
                    if args.len() != 2 {
                        return Err(invalid("a range and a rank"));
                    }
                    match &args[1] {
                        FormulaAst::Number(k) if *k >= 1.0 && k.fract() == 0.0 => {}
                        _ => return Err(invalid("a positive integer rank")),
                    }
                }
                FuncName::Xlookup => {
                    if args.len() != 3 {
                        return Err(invalid("three XLOOKUP arguments"));
                    }
                    match (&args[1], &args[2]) {
                        (FormulaAst::Range(a0, a1), FormulaAst::Range(b0, b1)) => {
                            let len = |p: &(usize, usize), q: &(usize, usize)| {
                                (q.0 - p.0 + 1) * (q.1 - p.1 + 1)
                            };
                            if len(a0, a1) != len(b0, b1) {
                                return Err(invalid("lookup and result ranges of equal length"));
                            }
                        }
                        _ => return Err(invalid("range arguments to XLOOKUP")),
                    }
                }
                FuncName::If => {
                    if args.len() != 3 || !matches!(args[0], FormulaAst::Compare(..)) {
                        return Err(invalid("IF(comparison, a, b)"));
                    }
                }
                _ => {
                    if args.is_empty() {
                        return Err(invalid("at least one argument"));
                    }
                }
            }
        }
        FormulaAst::UnaryNeg(a) | FormulaAst::Percent(a) => check_ast(a)?,
        FormulaAst::BinOp(_, a, b) | FormulaAst::Compare(_, a, b) => {
            check_ast(a)?;
            check_ast(b)?;
        }
        _ => {}
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// evaluation
// ---------------------------------------------------------------------------

/// Evaluates a formula against a table.
pub fn eval_formula(ast: &FormulaAst, table: &HierTable) -> Result<CellValue, FormulaError> {
    Ok(eval(ast, table)?.into_cell_value())
}

enum Evaluated {
    Value(CellValue),
    Bool(bool),
}

impl Evaluated {
    fn into_cell_value(self) -> CellValue {
        match self {
            Evaluated::Value(v) => v,
            Evaluated::Bool(b) => CellValue::text(if b { "true" } else { "false" }),
        }
    }
}

fn eval(ast: &FormulaAst, table: &HierTable) -> Result<Evaluated, FormulaError> {
    let value = |v: CellValue| Ok(Evaluated::Value(v));
    match ast {
        FormulaAst::Number(x) => value(CellValue::number(*x)),
        FormulaAst::CellRef(r, c) => value(cell_at(table, *r, *c)?),
        FormulaAst::Range(..) => Err(FormulaError::TypeError),
        FormulaAst::UnaryNeg(a) => value(CellValue::number(-numeric(a, table)?)),
        FormulaAst::Percent(a) => value(CellValue::number(numeric(a, table)? / 100.0)),
        FormulaAst::BinOp(op, a, b) => {
            let (x, y) = (numeric(a, table)?, numeric(b, table)?);
            let out = match op {
                '+' => x + y,
                '-' => x - y,
                '*' => x * y,
                '/' => {
                    if y == 0.0 {
                        return Err(FormulaError::DivisionByZero);
                    }
                    x / y
                }
                _ => unreachable!("parser only emits + - * /"),
            };
            value(CellValue::number(out))
        }
        FormulaAst::Compare(op, a, b) => {
            let truth = match op {
                CmpOp::Eq => values_equal(
                    &eval(a, table)?.into_cell_value(),
                    &eval(b, table)?.into_cell_value(),
                ),
                CmpOp::Gt => numeric(a, table)? > numeric(b, table)?,
                CmpOp::Lt => numeric(a, table)? < numeric(b, table)?,
                CmpOp::Ge => numeric(a, table)? >= numeric(b, table)?,
                CmpOp::Le => numeric(a, table)? <= numeric(b, table)?,
            };
            Ok(Evaluated::Bool(truth))
        }
        FormulaAst::Call(func, args) => value(eval_call(*func, args, table)?),
    }
}

fn eval_call(
    func: FuncName,
    args: &[FormulaAst],
    table: &HierTable,
) -> Result<CellValue, FormulaError> {
    match func {
        FuncName::Sum | FuncName::Average | FuncName::Max | FuncName::Min | FuncName::Count => {
            let mut numbers = Vec::new();
            for arg in args {
                numbers.extend(numeric_items(arg, table)?);
            }
            if func == FuncName::Count {
                return Ok(CellValue::number(numbers.len() as f64));
            }
            if numbers.is_empty() {
                return Err(FormulaError::EmptyAggregate);
            }
            let out = match func {
                FuncName::Sum => numbers.iter().sum(),
                FuncName::Average => numbers.iter().sum::<f64>() / numbers.len() as f64,
                FuncName::Max => numbers.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                FuncName::Min => numbers.iter().copied().fold(f64::INFINITY, f64::min),
                _ => unreachable!(),
            };
            Ok(CellValue::number(out))
        }
        FuncName::Small | FuncName::Large => {
            let mut numbers = numeric_items(&args[0], table)?;
            let k = match &args[1] {
                FormulaAst::Number(k) => *k as usize,
                _ => return Err(FormulaError::TypeError),
            };
            if k == 0 || k > numbers.len() {
                return Err(FormulaError::RankOutOfRange(k));
            }
            numbers.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let picked = match func {
                FuncName::Small => numbers[k - 1],
                FuncName::Large => numbers[numbers.len() - k],
                _ => unreachable!(),
            };
            Ok(CellValue::number(picked))
        }
        FuncName::Xlookup => {
            let needle = eval(&args[0], table)?.into_cell_value();
            let lookup = range_cells(&args[1])?;
            let result = range_cells(&args[2])?;
            for (i, (r, c)) in lookup.iter().enumerate() {
                let candidate = cell_at(table, *r, *c)?;
                if values_equal(&needle, &candidate) {
                    let (rr, rc) = result[i];
                    return cell_at(table, rr, rc);
                }
            }
            Err(FormulaError::LookupMiss)
        }
        FuncName::If => {
            let truth = match eval(&args[0], table)? {
                Evaluated::Bool(b) => b,
                Evaluated::Value(_) => return Err(FormulaError::TypeError),
            };
            let branch = if truth { &args[1] } else { &args[2] };
            Ok(eval(branch, table)?.into_cell_value())
        }
    }
}

fn cell_at(table: &HierTable, r: usize, c: usize) -> Result<CellValue, FormulaError> {
    if !table.in_bounds(r, c) {
        return Err(FormulaError::RefOutOfBounds(r, c));
    }
    Ok(table.cell(r, c).value.clone())
}

fn numeric(ast: &FormulaAst, table: &HierTable) -> Result<f64, FormulaError> {
    match eval(ast, table)? {
        Evaluated::Value(CellValue::Number { value }) => Ok(value),
        Evaluated::Value(_) | Evaluated::Bool(_) => Err(FormulaError::TypeError),
    }
}

/// Numeric values of an argument: a range contributes its numeric cells
/// (non-numeric cells are skipped), anything else must evaluate to a number.
fn numeric_items(ast: &FormulaAst, table: &HierTable) -> Result<Vec<f64>, FormulaError> {
    if let FormulaAst::Range(..) = ast {
        let mut out = Vec::new();
        for (r, c) in range_cells(ast)? {
            if let Some(x) = cell_at(table, r, c)?.as_number() {
                out.push(x);
            }
        }
        return Ok(out);
    }
    Ok(vec![numeric(ast, table)?])
}

fn range_cells(ast: &FormulaAst) -> Result<Vec<(usize, usize)>, FormulaError> {
    match ast {
        FormulaAst::Range((r0, c0), (r1, c1)) => {
            let mut out = Vec::new();
            for r in *r0..=*r1 {
                for c in *c0..=*c1 {
                    out.push((r, c));
                }
            }
            Ok(out)
        }
        FormulaAst::CellRef(r, c) => Ok(vec![(*r, *c)]),
        _ => Err(FormulaError::TypeError),
    }
}

fn values_equal(a: &CellValue, b: &CellValue) -> bool {
    match (a, b) {
        (CellValue::Number { value: x }, CellValue::Number { value: y }) => approx_eq(*x, *y),
        (CellValue::Empty, CellValue::Empty) => true,
        (CellValue::Number { .. }, _) | (_, CellValue::Number { .. }) => false,
        _ => {
            let text = |v: &CellValue| match v {
                CellValue::Text { value } | CellValue::Datetime { value } => {
                    normalize_header(value)
                }
                _ => String::new(),
            };
            text(a) == text(b)
        }
    }
}

// ---------------------------------------------------------------------------
// operator alignment
// ---------------------------------------------------------------------------

/// Operator labels recognized in annotation formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OpLabel {
    Opposite,
    Percent,
    Sum,
    Average,
    Max,
    Min,
    Count,
    Diff,
    Div,
    KthArgmin,
    KthArgmax,
    PairArgmax,
    PairArgmin,
}

impl OpLabel {
    pub fn name(self) -> &'static str {
        match self {
            OpLabel::Opposite => "opposite",
            OpLabel::Percent => "percent",
            OpLabel::Sum => "sum",
            OpLabel::Average => "average",
            OpLabel::Max => "max",
            OpLabel::Min => "min",
            OpLabel::Count => "count",
            OpLabel::Diff => "diff",
            OpLabel::Div => "div",
            OpLabel::KthArgmin => "kth-argmin",
            OpLabel::KthArgmax => "kth-argmax",
            OpLabel::PairArgmax => "pair-argmax",
            OpLabel::PairArgmin => "pair-argmin",
        }
    }

    pub fn parse(name: &str) -> Option<OpLabel> {
        let canonical = name.trim().to_lowercase().replace('_', "-");
        [
            OpLabel::Opposite,
            OpLabel::Percent,
            OpLabel::Sum,
            OpLabel::Average,
            OpLabel::Max,
            OpLabel::Min,
            OpLabel::Count,
            OpLabel::Diff,
            OpLabel::Div,
            OpLabel::KthArgmin,
            OpLabel::KthArgmax,
            OpLabel::PairArgmax,
            OpLabel::PairArgmin,
        ]
        .into_iter()
        .find(|l| l.name() == canonical)
    }
}

/// Extracts (operator labels, referenced cells) from a parsed formula. A bare
/// reference yields no labels: it is a plain cell selection.
pub fn extract_alignment(ast: &FormulaAst) -> (Vec<OpLabel>, Vec<(usize, usize)>) {
    let mut labels = Vec::new();
    let mut cells = Vec::new();
    walk(ast, &mut labels, &mut cells);
    return (labels, cells);

    fn push_label(labels: &mut Vec<OpLabel>, label: OpLabel) {
        if !labels.contains(&label) {
            labels.push(label);
        }
    }

    fn push_cells(cells: &mut Vec<(usize, usize)>, ast: &FormulaAst) {
        if let Ok(list) = range_cells(ast) {
            for rc in list {
                if !cells.contains(&rc) {
                    cells.push(rc);
                }
            }
        }
    }

    fn walk(ast: &FormulaAst, labels: &mut Vec<OpLabel>, cells: &mut Vec<(usize, usize)>) {
        match ast {
            FormulaAst::Number(_) => {}
            FormulaAst::CellRef(..) | FormulaAst::Range(..) => push_cells(cells, ast),
            FormulaAst::UnaryNeg(a) => {
                push_label(labels, OpLabel::Opposite);
                walk(a, labels, cells);
            }
            FormulaAst::Percent(a) => {
                push_label(labels, OpLabel::Percent);
                walk(a, labels, cells);
            }
            FormulaAst::BinOp(op, a, b) => {
                match op {
                    '-' => push_label(labels, OpLabel::Diff),
                    '/' => push_label(labels, OpLabel::Div),
                    '+' => push_label(labels, OpLabel::Sum),
                    _ => {}
                }
                walk(a, labels, cells);
                walk(b, labels, cells);
            }
            FormulaAst::Compare(_, a, b) => {
                walk(a, labels, cells);
                walk(b, labels, cells);
            }
            FormulaAst::Call(FuncName::Xlookup, args) => {
                match &args[0] {
                    FormulaAst::Call(FuncName::Small, inner) => {
                        push_label(labels, OpLabel::KthArgmin);
                        walk(&inner[0], labels, cells);
                    }
                    FormulaAst::Call(FuncName::Large, inner) => {
                        push_label(labels, OpLabel::KthArgmax);
                        walk(&inner[0], labels, cells);
                    }
                    other => walk(other, labels, cells),
                }
                push_cells(cells, &args[1]);
                push_cells(cells, &args[2]);
            }
            FormulaAst::Call(FuncName::If, args) => {
                if let FormulaAst::Compare(op, ..) = &args[0] {
                    let label = match op {
                        CmpOp::Gt | CmpOp::Ge => Some(OpLabel::PairArgmax),
                        CmpOp::Lt | CmpOp::Le => Some(OpLabel::PairArgmin),
                        CmpOp::Eq => None,
                    };
                    if let Some(l) = label {
                        push_label(labels, l);
                    }
                }
                for a in args {
                    walk(a, labels, cells);
                }
            }
            FormulaAst::Call(func, args) => {
                let label = match func {
                    FuncName::Sum => Some(OpLabel::Sum),
                    FuncName::Average => Some(OpLabel::Average),
                    FuncName::Max => Some(OpLabel::Max),
                    FuncName::Min => Some(OpLabel::Min),
                    FuncName::Count => Some(OpLabel::Count),
                    FuncName::Small => Some(OpLabel::KthArgmin),
                    FuncName::Large => Some(OpLabel::KthArgmax),
                    _ => None,
                };
                if let Some(l) = label {
                    push_label(labels, l);
                }
                for a in args {
                    walk(a, labels, cells);
                }
            }
        }
    }
}

/// Renders an AST back to `=`-prefixed text; `parse_formula` inverts it on
/// canonical ASTs.
pub fn render_formula(ast: &FormulaAst) -> String {
    fn a1(r: usize, c: usize) -> String {
        let mut col = String::new();
        let mut n = c + 1;
        while n > 0 {
            let rem = (n - 1) % 26;
            col.insert(0, (b'A' + rem as u8) as char);
            n = (n - 1) / 26;
        }
        format!("{}{}", col, r + 1)
    }
    fn go(ast: &FormulaAst, out: &mut String) {
        match ast {
            FormulaAst::Number(x) => out.push_str(&crate::text::render_number(*x)),
            FormulaAst::CellRef(r, c) => out.push_str(&a1(*r, *c)),
            FormulaAst::Range(p, q) => {
                out.push_str(&a1(p.0, p.1));
                out.push(':');
                out.push_str(&a1(q.0, q.1));
            }
            FormulaAst::UnaryNeg(a) => {
                out.push('-');
                go(a, out);
            }
            FormulaAst::Percent(a) => {
                go(a, out);
                out.push('%');
            }
            FormulaAst::BinOp(op, a, b) => {
                go(a, out);
                out.push(*op);
                go(b, out);
            }
            FormulaAst::Compare(op, a, b) => {
                go(a, out);
                out.push_str(match op {
                    CmpOp::Gt => ">",
                    CmpOp::Lt => "<",
                    CmpOp::Ge => ">=",
                    CmpOp::Le => "<=",
                    CmpOp::Eq => "=",
                });
                go(b, out);
            }
            FormulaAst::Call(func, args) => {
                out.push_str(match func {
                    FuncName::Sum => "SUM",
                    FuncName::Average => "AVERAGE",
                    FuncName::Max => "MAX",
                    FuncName::Min => "MIN",
                    FuncName::Count => "COUNT",
                    FuncName::Small => "SMALL",
                    FuncName::Large => "LARGE",
                    FuncName::Xlookup => "XLOOKUP",
                    FuncName::If => "IF",
                });
                out.push('(');
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    go(a, out);
                }
                out.push(')');
            }
        }
    }
    let mut out = String::from("=");
    go(ast, &mut out);
    out
}
