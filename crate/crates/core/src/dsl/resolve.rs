use crate::digits::{Alphabet, Rational};
use crate::error::Error;
use crate::freq::FrequencyVector;
use crate::generators::{
    beta_stream, canonical_be_point, iid_stream, oscillating_stream, uniform_stream, Seed, WeightKind,
};
use crate::stream::{constant_stream, expand_rational, DigitStream};
use crate::transforms::{self, Transform};

use super::{Arg, Number, PipelineExpr, Term};

/// Source names, in documentation order.
pub const SOURCE_NAMES: &[&str] = &["const", "rational", "uniform", "iid", "canonicalpt", "osc", "beta"];

/// Stage names, in documentation order.
pub const STAGE_NAMES: &[&str] =
    &["id", "swap2", "rev3", "shift", "prepend", "transpose", "invert", "inc", "seven", "canonical", "estimate"];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ResolveError {
    #[error("unknown {role} `{name}` at byte {offset}")]
    UnknownName { name: String, offset: usize, role: &'static str },

    #[error("`{name}` at byte {offset} is a {actual}, but a {expected} is required here")]
    Misplaced { name: String, offset: usize, expected: &'static str, actual: &'static str },

    #[error("`{name}` at byte {offset} takes {expected}, got {found} argument(s)")]
    Arity { name: String, offset: usize, expected: &'static str, found: usize },

    #[error("bad argument to `{name}` at byte {offset}: {message}")]
    BadArgument { name: String, offset: usize, message: String },

    #[error("stage `{name}` at byte {offset}: {source}")]
    Stage { name: String, offset: usize, source: Error },
}

struct Args<'a> {
    term: &'a Term,
}

impl<'a> Args<'a> {
    fn arity(&self, allowed: std::ops::RangeInclusive<usize>, expected: &'static str) -> Result<(), ResolveError> {
        if allowed.contains(&self.term.args.len()) {
            Ok(())
        } else {
            Err(ResolveError::Arity {
                name: self.term.name.clone(),
                offset: self.term.offset,
                expected,
                found: self.term.args.len(),
            })
        }
    }

    fn bad(&self, message: impl Into<String>) -> ResolveError {
        ResolveError::BadArgument { name: self.term.name.clone(), offset: self.term.offset, message: message.into() }
    }

    fn number(&self, i: usize) -> Result<Number, ResolveError> {
        match &self.term.args[i] {
            Arg::Number(n) => Ok(*n),
            Arg::Tuple(_) => Err(self.bad(format!("argument {} must be a number, not a tuple", i + 1))),
        }
    }

    fn int(&self, i: usize) -> Result<i64, ResolveError> {
        match self.number(i)? {
            Number::Int(v) => Ok(v),
            Number::Decimal(x) => Err(self.bad(format!("argument {} must be an integer, got {x}", i + 1))),
        }
    }

    fn uint(&self, i: usize) -> Result<u64, ResolveError> {
        let v = self.int(i)?;
        u64::try_from(v).map_err(|_| self.bad(format!("argument {} must be nonnegative, got {v}", i + 1)))
    }

    fn real(&self, i: usize) -> Result<f64, ResolveError> {
        Ok(self.number(i)?.as_f64())
    }

    fn tuple(&self, i: usize) -> Result<Vec<f64>, ResolveError> {
        match &self.term.args[i] {
            Arg::Tuple(items) => Ok(items.iter().map(|n| n.as_f64()).collect()),
            Arg::Number(_) => Err(self.bad(format!("argument {} must be a tuple", i + 1))),
        }
    }

    fn alphabet(&self, i: usize) -> Result<Alphabet, ResolveError> {
        let s = self.uint(i)?;
        u32::try_from(s).ok().and_then(|s| Alphabet::new(s).ok()).ok_or_else(|| self.bad(format!("invalid radix {s}")))
    }

    fn frequencies(&self, i: usize) -> Result<FrequencyVector, ResolveError> {
        FrequencyVector::new(self.tuple(i)?).map_err(|e| self.bad(e.to_string()))
    }

    fn lift<T>(&self, r: Result<T, Error>) -> Result<T, ResolveError> {
        r.map_err(|e| self.bad(e.to_string()))
    }
}

fn resolve_source(term: &Term) -> Result<DigitStream, ResolveError> {
    let a = Args { term };
    let stream = match term.name.as_str() {
        "const" => {
            a.arity(1..=2, "a digit and optional radix")?;
            let alphabet = if term.args.len() == 2 { a.alphabet(1)? } else { Alphabet::TERNARY };
            let digit = a.lift(alphabet.digit(a.int(0)?))?;
            constant_stream(alphabet, digit)
        }
        "rational" => {
            a.arity(2..=3, "numerator, denominator and optional radix")?;
            let alphabet = if term.args.len() == 3 { a.alphabet(2)? } else { Alphabet::TERNARY };
            let x = a.lift(Rational::new(a.uint(0)?, a.uint(1)?))?;
            expand_rational(x, alphabet)
        }
        "uniform" => {
            a.arity(1..=2, "a radix and optional seed")?;
            let seed = if term.args.len() == 2 { a.uint(1)? } else { 0 };
            uniform_stream(a.alphabet(0)?, Seed(seed))
        }
        "iid" => {
            a.arity(1..=2, "a frequency tuple and optional seed")?;
            let seed = if term.args.len() == 2 { a.uint(1)? } else { 0 };
            a.lift(iid_stream(&a.frequencies(0)?, Seed(seed)))?
        }
        "canonicalpt" => {
            a.arity(1..=2, "a frequency tuple and optional power exponent")?;
            let weight = if term.args.len() == 2 { WeightKind::Power(a.real(1)?) } else { WeightKind::Linear };
            a.lift(canonical_be_point(&a.frequencies(0)?, weight))?
        }
        "osc" => {
            a.arity(0..=1, "an optional power exponent")?;
            let p = if term.args.len() == 1 { a.real(0)? } else { 1.0 };
            a.lift(oscillating_stream(p))?
        }
        "beta" => {
            a.arity(0..=0, "no arguments")?;
            beta_stream()
        }
        name if STAGE_NAMES.contains(&name) => {
            return Err(ResolveError::Misplaced {
                name: name.into(),
                offset: term.offset,
                expected: "source",
                actual: "stage",
            })
        }
        name => return Err(ResolveError::UnknownName { name: name.into(), offset: term.offset, role: "source" }),
    };
    Ok(stream.with_label(term.to_string()))
}

/// Builds the transform named by `term`, bound to `alphabet` where needed.
fn resolve_stage(term: &Term, alphabet: Alphabet) -> Result<Transform, ResolveError> {
    let a = Args { term };
    let nullary = |t: Transform| -> Result<Transform, ResolveError> {
        a.arity(0..=0, "no arguments")?;
        Ok(t)
    };
    match term.name.as_str() {
        "id" => nullary(transforms::identity()),
        "swap2" => nullary(transforms::pair_swap()),
        "rev3" => nullary(transforms::triple_reverse()),
        "shift" => nullary(transforms::shift()),
        "invert" => nullary(transforms::inverter(alphabet)),
        "seven" => nullary(transforms::seven_replacement()),
        "prepend" => {
            a.arity(1..=1, "one digit")?;
            let digit = a.lift(alphabet.digit(a.int(0)?))?;
            a.lift(transforms::prepend(digit, alphabet))
        }
        "transpose" => {
            a.arity(1..=1, "one position")?;
            a.lift(transforms::transpose_at(a.uint(0)?))
        }
        "inc" => {
            a.arity(1..=1, "one integer")?;
            Ok(transforms::mod_increment(a.int(0)?, alphabet))
        }
        "canonical" => {
            a.arity(0..=1, "an optional power exponent")?;
            let weight = if term.args.len() == 1 { WeightKind::Power(a.real(0)?) } else { WeightKind::Linear };
            a.lift(transforms::be_canonicalizer(weight))
        }
        "estimate" => {
            a.arity(1..=1, "a sample size")?;
            a.lift(transforms::estimate(a.uint(0)?))
        }
        name if SOURCE_NAMES.contains(&name) => Err(ResolveError::Misplaced {
            name: name.into(),
            offset: term.offset,
            expected: "stage",
            actual: "source",
        }),
        name => Err(ResolveError::UnknownName { name: name.into(), offset: term.offset, role: "stage" }),
    }
}

/// The source stream and the transforms of each stage, unapplied.
pub fn resolve_parts(expr: &PipelineExpr) -> Result<(DigitStream, Vec<Transform>), ResolveError> {
    let source = resolve_source(&expr.source)?;
    let stages = expr
        .stages
        .iter()
        .map(|t| resolve_stage(t, source.alphabet()))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((source, stages))
}

/// The stream produced by running every stage, left to right, on the source.
pub fn resolve(expr: &PipelineExpr) -> Result<DigitStream, ResolveError> {
    let (source, stages) = resolve_parts(expr)?;
    let mut stream = source;
    for (term, stage) in expr.stages.iter().zip(&stages) {
        stream = stage.apply(&stream).map_err(|source| ResolveError::Stage {
            name: term.name.clone(),
            offset: term.offset,
            source,
        })?;
    }
    Ok(stream.with_label(expr.to_string()))
}
