//! A small pipeline language: a source term followed by transform stages.
//!
//! ```text
//! pipeline := term ("|" term)*
//! term     := IDENT ("(" args ")")?
//! args     := arg ("," arg)*
//! arg      := NUMBER | tuple
//! tuple    := "(" NUMBER ("," NUMBER)* ")"
//! ```
//!
//! `uniform(3, 42) | swap2 | seven` draws uniform ternary digits, swaps
//! pairs, then applies the seven-replacement. Whitespace is insignificant.

mod parser;
mod resolve;

use std::fmt;

pub use parser::{parse, parse_bytes, ParseError};
pub use resolve::{resolve, resolve_parts, ResolveError, SOURCE_NAMES, STAGE_NAMES};

use crate::stream::DigitStream;

/// A numeric literal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Number {
    Int(i64),
    Decimal(f64),
}

impl Number {
    pub fn as_f64(self) -> f64 {
        match self {
            Number::Int(i) => i as f64,
            Number::Decimal(x) => x,
        }
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Number::Int(i) => write!(f, "{i}"),
            Number::Decimal(x) => {
                let text = x.to_string();
                if text.contains('.') {
                    f.write_str(&text)
                } else {
                    write!(f, "{text}.0")
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Arg {
    Number(Number),
    Tuple(Vec<Number>),
}

impl fmt::Display for Arg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Arg::Number(n) => write!(f, "{n}"),
            Arg::Tuple(items) => {
                f.write_str("(")?;
                write_list(f, items)?;
                f.write_str(")")
            }
        }
    }
}

fn write_list<T: fmt::Display>(f: &mut fmt::Formatter<'_>, items: &[T]) -> fmt::Result {
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{item}")?;
    }
    Ok(())
}

/// A name with positional arguments. `offset` is the byte position of the
/// name in the source text and does not take part in equality.
#[derive(Debug, Clone)]
pub struct Term {
    pub name: String,
    pub args: Vec<Arg>,
    pub offset: usize,
}

impl Term {
    pub fn new(name: impl Into<String>, args: Vec<Arg>) -> Self {
        Term { name: name.into(), args, offset: 0 }
    }
}

impl PartialEq for Term {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.args == other.args
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            write_list(f, &self.args)?;
            f.write_str(")")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineExpr {
    pub source: Term,
    pub stages: Vec<Term>,
}

impl PipelineExpr {
    /// Replaces the seed of a pseudorandom source (`uniform`, `iid`);
    /// other sources are returned unchanged.
    pub fn with_seed(mut self, seed: u64) -> Self {
        let base_arity = match self.source.name.as_str() {
            "uniform" | "iid" => 1,
            _ => return self,
        };
        let seed = Arg::Number(Number::Int(seed as i64));
        self.source.args.truncate(base_arity);
        if self.source.args.len() == base_arity {
            self.source.args.push(seed);
        }
        self
    }
}

/// Canonical text: `name(a, b) | stage | …`.
impl fmt::Display for PipelineExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.source)?;
        for stage in &self.stages {
            write!(f, " | {stage}")?;
        }
        Ok(())
    }
}

/// Pretty-printed canonical form of `expr`.
pub fn roundtrip(expr: &PipelineExpr) -> String {
    expr.to_string()
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Resolve(#[from] ResolveError),
}

/// Parses and resolves `text` in one step.
pub fn build(text: &str) -> Result<DigitStream, PipelineError> {
    Ok(resolve(&parse(text)?)?)
}
