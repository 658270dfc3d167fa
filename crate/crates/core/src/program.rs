//! The hierarchy-aware query language: AST, s-expression syntax, and grammar.
//!
//! A program is a flat pipeline: left-side tree filters, one left level
//! filter, top-side tree filters, one top level filter, then at most one
//! region operator. Header arguments stay as surface strings; binding to
//! concrete nodes happens at execution time.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::table::Side;
use crate::text::render_number;

/// A level address: all nodes at `depth` on one side. Depth 1 is the first
/// level below the virtual root.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Level {
    pub side: Side,
    pub depth: usize,
}

impl Level {
    pub fn new(side: Side, depth: usize) -> Self {
        Level { side, depth }
    }

    pub fn token(&self) -> String {
        format!("{}_{}", self.side.token(), self.depth)
    }
}

/// The region operators. There are exactly nineteen kinds beyond the two
/// filters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Operator {
    Argmax(u32),
    Argmin(u32),
    Max(Level),
    Min(Level),
    Sum(Level),
    Average(Level),
    Count(Level),
    Difference,
    Proportion,
    ProportionRev,
    DifferenceRate,
    DifferenceRateRev,
    GreaterThan(f64),
    GreaterEqThan(f64),
    LessThan(f64),
    LessEqThan(f64),
    Eq(f64),
    NotEq(f64),
    Opposite,
}

/// Operator kind without arguments, used for trigger gating and statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    Argmax,
    Argmin,
    Max,
    Min,
    Sum,
    Average,
    Count,
    Difference,
    Proportion,
    ProportionRev,
    DifferenceRate,
    DifferenceRateRev,
    GreaterThan,
    GreaterEqThan,
    LessThan,
    LessEqThan,
    Eq,
    NotEq,
    Opposite,
}

impl OperatorKind {
    pub const ALL: [OperatorKind; 19] = [
        OperatorKind::Argmax,
        OperatorKind::Argmin,
        OperatorKind::Max,
        OperatorKind::Min,
        OperatorKind::Sum,
        OperatorKind::Average,
        OperatorKind::Count,
        OperatorKind::Difference,
        OperatorKind::Proportion,
        OperatorKind::ProportionRev,
        OperatorKind::DifferenceRate,
        OperatorKind::DifferenceRateRev,
        OperatorKind::GreaterThan,
        OperatorKind::GreaterEqThan,
        OperatorKind::LessThan,
        OperatorKind::LessEqThan,
        OperatorKind::Eq,
        OperatorKind::NotEq,
        OperatorKind::Opposite,
    ];

    pub fn is_order_relation(self) -> bool {
        matches!(
            self,
            OperatorKind::GreaterThan
                | OperatorKind::GreaterEqThan
                | OperatorKind::LessThan
                | OperatorKind::LessEqThan
                | OperatorKind::Eq
                | OperatorKind::NotEq
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            OperatorKind::Argmax => "argmax",
            OperatorKind::Argmin => "argmin",
            OperatorKind::Max => "max",
            OperatorKind::Min => "min",
            OperatorKind::Sum => "sum",
            OperatorKind::Average => "average",
            OperatorKind::Count => "count",
            OperatorKind::Difference => "difference",
            OperatorKind::Proportion => "proportion",
            OperatorKind::ProportionRev => "proportion_rev",
            OperatorKind::DifferenceRate => "difference_rate",
            OperatorKind::DifferenceRateRev => "difference_rate_rev",
            OperatorKind::GreaterThan => "greater_than",
            OperatorKind::GreaterEqThan => "greater_eq_than",
            OperatorKind::LessThan => "less_than",
            OperatorKind::LessEqThan => "less_eq_than",
            OperatorKind::Eq => "eq",
            OperatorKind::NotEq => "not_eq",
            OperatorKind::Opposite => "opposite",
        }
    }
}

impl Operator {
    pub fn kind(&self) -> OperatorKind {
        match self {
            Operator::Argmax(_) => OperatorKind::Argmax,
            Operator::Argmin(_) => OperatorKind::Argmin,
            Operator::Max(_) => OperatorKind::Max,
            Operator::Min(_) => OperatorKind::Min,
            Operator::Sum(_) => OperatorKind::Sum,
            Operator::Average(_) => OperatorKind::Average,
            Operator::Count(_) => OperatorKind::Count,
            Operator::Difference => OperatorKind::Difference,
            Operator::Proportion => OperatorKind::Proportion,
            Operator::ProportionRev => OperatorKind::ProportionRev,
            Operator::DifferenceRate => OperatorKind::DifferenceRate,
            Operator::DifferenceRateRev => OperatorKind::DifferenceRateRev,
            Operator::GreaterThan(_) => OperatorKind::GreaterThan,
            Operator::GreaterEqThan(_) => OperatorKind::GreaterEqThan,
            Operator::LessThan(_) => OperatorKind::LessThan,
            Operator::LessEqThan(_) => OperatorKind::LessEqThan,
            Operator::Eq(_) => OperatorKind::Eq,
            Operator::NotEq(_) => OperatorKind::NotEq,
            Operator::Opposite => OperatorKind::Opposite,
        }
    }
}

/// One pipeline step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Func {
    /// Keeps the rows/columns indexed by one or two headers and their
    /// subtrees. The side is inferred during grammar validation from the
    /// level filter that closes the phase.
    FilterTree {
        headers: Vec<String>,
        side: Side,
    },
    FilterLevel(Level),
    Operator(Operator),
}

/// A validated program.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Program {
    funcs: Vec<Func>,
}

impl Program {
    /// Validates the pipeline shape and stamps filter sides.
    pub fn new(funcs: Vec<Func>) -> Result<Program, ProgramError> {
        let raw = funcs
            .into_iter()
            .map(|f| match f {
                Func::FilterTree { headers, .. } => RawFunc::FilterTree(headers),
                Func::FilterLevel(l) => RawFunc::FilterLevel(l),
                Func::Operator(op) => RawFunc::Operator(op),
            })
            .collect();
        validate_shape(raw)
    }

    pub fn funcs(&self) -> &[Func] {
        &self.funcs
    }

    pub fn is_empty(&self) -> bool {
        self.funcs.is_empty()
    }

    /// Header strings of every tree filter, in pipeline order.
    pub fn header_args(&self) -> Vec<&str> {
        self.funcs
            .iter()
            .filter_map(|f| match f {
                Func::FilterTree { headers, .. } => Some(headers.iter().map(String::as_str)),
                _ => None,
            })
            .flatten()
            .collect()
    }

    /// The region operator, when present (always the last step).
    pub fn operator(&self) -> Option<&Operator> {
        match self.funcs.last() {
            Some(Func::Operator(op)) => Some(op),
            _ => None,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ProgramError {
    #[error("syntax error at byte {position}: expected {expected}")]
    SyntaxError { position: usize, expected: String },
    #[error("unknown function '{0}'")]
    UnknownFunction(String),
    #[error("grammar violation: {0}")]
    GrammarViolation(String),
}

// ---------------------------------------------------------------------------
// grammar validation
// ---------------------------------------------------------------------------

enum RawFunc {
    FilterTree(Vec<String>),
    FilterLevel(Level),
    Operator(Operator),
}

/// Enforces the pipeline shape: left tree filters closed by one LEFT level
/// filter, then top tree filters closed by one TOP level filter, then at
/// most one operator. Tree filters take one or two headers and every run of
/// them must be closed by a level filter on its side.
fn validate_shape(raw: Vec<RawFunc>) -> Result<Program, ProgramError> {
    let violation = |msg: &str| ProgramError::GrammarViolation(msg.to_string());
    let mut funcs = Vec::with_capacity(raw.len());
    let mut pending: Vec<Vec<String>> = Vec::new();
    let mut seen_left = false;
    let mut seen_top = false;
    let mut done_filtering = false;

    for f in raw {
        if done_filtering {
            return Err(violation("the region operator must be the last function"));
        }
        match f {
            RawFunc::FilterTree(headers) => {
                if !(1..=2).contains(&headers.len()) {
                    return Err(violation("filter_tree takes one or two headers"));
                }
                pending.push(headers);
            }
            RawFunc::FilterLevel(level) => {
                if level.depth == 0 {
                    return Err(violation("level depth must be at least 1"));
                }
                match level.side {
                    Side::Left => {
                        if seen_left {
                            return Err(violation("at most one filter_level per side"));
                        }
                        if seen_top {
                            return Err(violation("left filters must precede top filters"));
                        }
                        seen_left = true;
                    }
                    Side::Top => {
                        if seen_top {
                            return Err(violation("at most one filter_level per side"));
                        }
                        seen_top = true;
                    }
                }
                for headers in pending.drain(..) {
                    funcs.push(Func::FilterTree {
                        headers,
                        side: level.side,
                    });
                }
                funcs.push(Func::FilterLevel(level));
            }
            RawFunc::Operator(op) => {
                if !pending.is_empty() {
                    return Err(violation(
                        "filter_tree must be followed by a filter_level on its side",
                    ));
                }
                funcs.push(Func::Operator(op));
                done_filtering = true;
            }
        }
    }
    if !pending.is_empty() {
        return Err(violation(
            "filter_tree must be followed by a filter_level on its side",
        ));
    }

    // Tree filters end up adjacent to the level filter that closes them, so
    // the funcs vector is already in canonical pipeline order.
    Ok(Program { funcs })
}

// ---------------------------------------------------------------------------
// s-expression parsing
// ---------------------------------------------------------------------------

/// Parses a sequence of s-expressions like
/// `(filter_tree 2012) (filter_tree china) (filter_level LEFT_2)` into a
/// validated [`Program`]. Multi-word headers are written with double quotes.
pub fn parse_program(text: &str) -> Result<Program, ProgramError> {
    let mut raw = Vec::new();
    let bytes = text.as_bytes();
    let mut pos = 0;
    loop {
        skip_ws(bytes, &mut pos);
        if pos >= bytes.len() {
            break;
        }
        if bytes[pos] != b'(' {
            return Err(ProgramError::SyntaxError {
                position: pos,
                expected: "'('".into(),
            });
        }
        pos += 1;
        let name = read_token(bytes, &mut pos)?;
        let mut args = Vec::new();
        loop {
            skip_ws(bytes, &mut pos);
            if pos >= bytes.len() {
                return Err(ProgramError::SyntaxError {
                    position: pos,
                    expected: "')'".into(),
                });
            }
            if bytes[pos] == b')' {
                pos += 1;
                break;
            }
            args.push(read_token(bytes, &mut pos)?);
        }
        raw.push(build_func(&name, args, pos)?);
    }
    validate_shape(raw)
}

fn skip_ws(bytes: &[u8], pos: &mut usize) {
    while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
}

fn read_token(bytes: &[u8], pos: &mut usize) -> Result<String, ProgramError> {
    skip_ws(bytes, pos);
    if *pos >= bytes.len() {
        return Err(ProgramError::SyntaxError {
            position: *pos,
            expected: "token".into(),
        });
    }
    if bytes[*pos] == b'"' {
        let start = *pos + 1;
        let mut end = start;
        while end < bytes.len() && bytes[end] != b'"' {
            end += 1;
        }
        if end >= bytes.len() {
            return Err(ProgramError::SyntaxError {
                position: *pos,
                expected: "closing '\"'".into(),
            });
        }
        *pos = end + 1;
        return Ok(String::from_utf8_lossy(&bytes[start..end]).into_owned());
    }
    let start = *pos;
    while *pos < bytes.len()
        && !bytes[*pos].is_ascii_whitespace()
        && bytes[*pos] != b'('
        && bytes[*pos] != b')'
        && bytes[*pos] != b'"'
    {
        *pos += 1;
    }
    if *pos == start {
        return Err(ProgramError::SyntaxError {
            position: *pos,
            expected: "token".into(),
        });
    }
    Ok(String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
}

fn build_func(name: &str, args: Vec<String>, pos: usize) -> Result<RawFunc, ProgramError> {
    let syntax = |expected: &str| ProgramError::SyntaxError {
        position: pos,
        expected: expected.to_string(),
    };
    let one_level = |args: &[String]| -> Result<Level, ProgramError> {
        if args.len() != 1 {
            return Err(syntax("one level argument"));
        }
        parse_level(&args[0]).ok_or_else(|| syntax("LEFT_k or TOP_k"))
    };
    let one_number = |args: &[String]| -> Result<f64, ProgramError> {
        if args.len() != 1 {
            return Err(syntax("one numeric argument"));
        }
        args[0].parse().map_err(|_| syntax("a number"))
    };
    let no_args = |args: &[String]| -> Result<(), ProgramError> {
        if args.is_empty() {
            Ok(())
        } else {
            Err(syntax("no arguments"))
        }
    };
    let op = |o: Operator| Ok(RawFunc::Operator(o));
    match name {
        "filter_tree" => {
            if args.is_empty() {
                return Err(syntax("at least one header"));
            }
            Ok(RawFunc::FilterTree(args))
        }
        "filter_level" => Ok(RawFunc::FilterLevel(one_level(&args)?)),
        "argmax" | "argmin" => {
            if args.len() != 1 {
                return Err(syntax("one rank argument"));
            }
            let k: u32 = args[0].parse().map_err(|_| syntax("a positive integer"))?;
            if k == 0 {
                return Err(syntax("a positive integer"));
            }
            op(if name == "argmax" {
                Operator::Argmax(k)
            } else {
                Operator::Argmin(k)
            })
        }
        "max" => op(Operator::Max(one_level(&args)?)),
        "min" => op(Operator::Min(one_level(&args)?)),
        "sum" => op(Operator::Sum(one_level(&args)?)),
        "average" => op(Operator::Average(one_level(&args)?)),
        "count" => op(Operator::Count(one_level(&args)?)),
        "difference" => no_args(&args).and_then(|_| op(Operator::Difference)),
        "proportion" => no_args(&args).and_then(|_| op(Operator::Proportion)),
        "proportion_rev" => no_args(&args).and_then(|_| op(Operator::ProportionRev)),
        "difference_rate" => no_args(&args).and_then(|_| op(Operator::DifferenceRate)),
        "difference_rate_rev" => no_args(&args).and_then(|_| op(Operator::DifferenceRateRev)),
        "greater_than" => op(Operator::GreaterThan(one_number(&args)?)),
        "greater_eq_than" => op(Operator::GreaterEqThan(one_number(&args)?)),
        "less_than" => op(Operator::LessThan(one_number(&args)?)),
        "less_eq_than" => op(Operator::LessEqThan(one_number(&args)?)),
        "eq" => op(Operator::Eq(one_number(&args)?)),
        "not_eq" => op(Operator::NotEq(one_number(&args)?)),
        "opposite" => no_args(&args).and_then(|_| op(Operator::Opposite)),
        other => Err(ProgramError::UnknownFunction(other.to_string())),
    }
}

fn parse_level(token: &str) -> Option<Level> {
    let (side, rest) = match (token.strip_prefix("LEFT_"), token.strip_prefix("TOP_")) {
        (Some(rest), _) => (Side::Left, rest),
        (_, Some(rest)) => (Side::Top, rest),
        _ => return None,
    };
    let depth: usize = rest.parse().ok()?;
    if depth == 0 {
        return None;
    }
    Some(Level { side, depth })
}

// ---------------------------------------------------------------------------
// rendering
// ---------------------------------------------------------------------------

/// Canonical s-expression rendering; `parse_program` inverts it.
pub fn render_program(program: &Program) -> String {
    let mut out = String::new();
    for (i, func) in program.funcs.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        match func {
            Func::FilterTree { headers, .. } => {
                out.push_str("(filter_tree");
                for h in headers {
                    out.push(' ');
                    render_header(&mut out, h);
                }
                out.push(')');
            }
            Func::FilterLevel(level) => {
                let _ = write!(out, "(filter_level {})", level.token());
            }
            Func::Operator(op) => render_operator(&mut out, op),
        }
    }
    out
}

fn render_header(out: &mut String, header: &str) {
    let needs_quotes = header.is_empty()
        || header
            .chars()
            .any(|c| c.is_whitespace() || c == '(' || c == ')' || c == '"');
    if needs_quotes {
        out.push('"');
        out.push_str(header);
        out.push('"');
    } else {
        out.push_str(header);
    }
}

fn render_operator(out: &mut String, op: &Operator) {
    let _ = match op {
        Operator::Argmax(k) => write!(out, "(argmax {k})"),
        Operator::Argmin(k) => write!(out, "(argmin {k})"),
        Operator::Max(l) => write!(out, "(max {})", l.token()),
        Operator::Min(l) => write!(out, "(min {})", l.token()),
        Operator::Sum(l) => write!(out, "(sum {})", l.token()),
        Operator::Average(l) => write!(out, "(average {})", l.token()),
        Operator::Count(l) => write!(out, "(count {})", l.token()),
        Operator::Difference => write!(out, "(difference)"),
        Operator::Proportion => write!(out, "(proportion)"),
        Operator::ProportionRev => write!(out, "(proportion_rev)"),
        Operator::DifferenceRate => write!(out, "(difference_rate)"),
        Operator::DifferenceRateRev => write!(out, "(difference_rate_rev)"),
        Operator::GreaterThan(n) => write!(out, "(greater_than {})", render_number(*n)),
        Operator::GreaterEqThan(n) => write!(out, "(greater_eq_than {})", render_number(*n)),
        Operator::LessThan(n) => write!(out, "(less_than {})", render_number(*n)),
        Operator::LessEqThan(n) => write!(out, "(less_eq_than {})", render_number(*n)),
        Operator::Eq(n) => write!(out, "(eq {})", render_number(*n)),
        Operator::NotEq(n) => write!(out, "(not_eq {})", render_number(*n)),
        Operator::Opposite => write!(out, "(opposite)"),
    };
}
