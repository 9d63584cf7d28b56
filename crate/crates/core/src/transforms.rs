//! Digit-stream transformations and their composition algebra.
//!
//! Periodic window permutations (pair swap, triple reversal and anything
//! composed from them), single transpositions, the inverter and the cyclic
//! increments are invertible. The shift, prepend, seven-replacement,
//! canonicalizing and estimating maps are not.

use std::fmt;

use crate::digits::{Alphabet, Digit};
use crate::error::{Error, Result};
use crate::freq::FrequencyVector;
use crate::generators::{canonical_be_point, WeightKind};
use crate::stream::{Cursor, DigitStream, Frequencies, StreamMeta};

/// A bijection applied independently to every window of `len()` consecutive
/// digits: output position `i` of a window takes input position `map[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WindowPermutation {
    map: Vec<usize>,
}

impl WindowPermutation {
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; map.len()];
        for &m in &map {
            if m >= map.len() || std::mem::replace(&mut seen[m], true) {
                return Err(Error::Domain(format!("{map:?} is not a permutation")));
            }
        }
        if map.is_empty() {
            return Err(Error::Domain("empty window".into()));
        }
        Ok(WindowPermutation { map })
    }

    pub fn window(&self) -> usize {
        self.map.len()
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &m)| i == m)
    }

    pub fn inverse(&self) -> WindowPermutation {
        let mut inv = vec![0; self.map.len()];
        for (i, &m) in self.map.iter().enumerate() {
            inv[m] = i;
        }
        WindowPermutation { map: inv }
    }

    /// Input offset feeding output position `i`, for any `i >= 0`.
    fn source(&self, i: usize) -> usize {
        let w = self.map.len();
        (i / w) * w + self.map[i % w]
    }

    /// `self` applied after `first`, as a single permutation of window
    /// `lcm(first.window(), self.window())`.
    pub fn after(&self, first: &WindowPermutation) -> WindowPermutation {
        let (a, b) = (self.window(), first.window());
        let lcm = a / gcd(a, b) * b;
        let map = (0..lcm).map(|i| first.source(self.source(i))).collect();
        WindowPermutation { map }
    }
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// A digit-stream transformation.
#[derive(Debug, Clone, PartialEq)]
pub enum Transform {
    Identity,
    /// Periodic window permutation; `[1, 0]` swaps pairs, `[2, 1, 0]` reverses triples.
    Window(WindowPermutation),
    /// Drops the first digit.
    Shift,
    /// Inserts a digit in front.
    Prepend { digit: Digit, alphabet: Alphabet },
    /// Swaps the digits at 1-based positions `j` and `j + 1`.
    TransposeAt(u64),
    /// `α ↦ s - 1 - α`.
    Invert(Alphabet),
    /// `α ↦ α + m (mod s)`, with `m` reduced into `0..s`.
    Increment { m: u32, alphabet: Alphabet },
    /// Among the occurrences of digit 1, numbered `k = 1, 2, …`, rewrites
    /// `k ≡ 0 (mod 7)` to 0 and `k ≡ 1 (mod 7)`, `k > 1`, to 2.
    SevenReplacement,
    /// Replaces a stream by the block point built from its declared frequencies.
    Canonicalize(WeightKind),
    /// Declares the empirical frequencies of the first `n` digits.
    Estimate(u64),
    /// Applied left to right.
    Composed(Vec<Transform>),
}

pub fn identity() -> Transform {
    Transform::Identity
}

pub fn pair_swap() -> Transform {
    Transform::Window(WindowPermutation { map: vec![1, 0] })
}

pub fn triple_reverse() -> Transform {
    Transform::Window(WindowPermutation { map: vec![2, 1, 0] })
}

pub fn shift() -> Transform {
    Transform::Shift
}

pub fn prepend(digit: Digit, alphabet: Alphabet) -> Result<Transform> {
    if !alphabet.contains(digit) {
        return Err(Error::InvalidDigit { digit: i64::from(digit.0), radix: alphabet.radix() });
    }
    Ok(Transform::Prepend { digit, alphabet })
}

pub fn transpose_at(j: u64) -> Result<Transform> {
    if j < 1 {
        return Err(Error::Domain("transposition position must be at least 1".into()));
    }
    Ok(Transform::TransposeAt(j))
}

pub fn inverter(alphabet: Alphabet) -> Transform {
    Transform::Invert(alphabet)
}

pub fn mod_increment(m: i64, alphabet: Alphabet) -> Transform {
    let m = m.rem_euclid(i64::from(alphabet.radix())) as u32;
    if m == 0 {
        return Transform::Identity;
    }
    Transform::Increment { m, alphabet }
}

pub fn seven_replacement() -> Transform {
    Transform::SevenReplacement
}

pub fn be_canonicalizer(weight: WeightKind) -> Result<Transform> {
    Ok(Transform::Canonicalize(weight.validate()?))
}

pub fn estimate(sample: u64) -> Result<Transform> {
    if sample == 0 {
        return Err(Error::Domain("estimation sample must be positive".into()));
    }
    Ok(Transform::Estimate(sample))
}

/// `g ∘ f`: apply `f`, then `g`.
pub fn compose(g: &Transform, f: &Transform) -> Result<Transform> {
    if let (Some(a), Some(b)) = (f.alphabet(), g.alphabet()) {
        if a != b {
            return Err(Error::AlphabetMismatch { expected: a, found: b });
        }
    }
    let mut steps = Vec::new();
    for t in [f, g] {
        match t {
            Transform::Composed(inner) => steps.extend(inner.iter().cloned()),
            other => steps.push(other.clone()),
        }
    }
    Ok(simplify(steps))
}

/// The inverse of `f`, or an error for many-to-one maps.
pub fn invert_transform(f: &Transform) -> Result<Transform> {
    f.inverse()
}

fn simplify(steps: Vec<Transform>) -> Transform {
    let mut out: Vec<Transform> = Vec::with_capacity(steps.len());
    for step in steps {
        if step == Transform::Identity {
            continue;
        }
        let merged = match (out.last(), &step) {
            (Some(Transform::Window(first)), Transform::Window(second)) => {
                Some(Transform::Window(second.after(first)))
            }
            (Some(Transform::Invert(a)), Transform::Invert(b)) if a == b => Some(Transform::Identity),
            (Some(Transform::Increment { m: m1, alphabet: a }), Transform::Increment { m: m2, alphabet: b })
                if a == b =>
            {
                Some(mod_increment(i64::from(m1 + m2), *a))
            }
            (Some(Transform::TransposeAt(i)), Transform::TransposeAt(j)) if i == j => Some(Transform::Identity),
            _ => None,
        };
        match merged {
            Some(t) => {
                out.pop();
                match t {
                    Transform::Window(w) if w.is_identity() => {}
                    Transform::Identity => {}
                    t => out.push(t),
                }
            }
            None => out.push(step),
        }
    }
    match out.len() {
        0 => Transform::Identity,
        1 => out.pop().unwrap(),
        _ => Transform::Composed(out),
    }
}

impl Transform {
    /// DSL name of the transform.
    pub fn name(&self) -> &'static str {
        match self {
            Transform::Identity => "id",
            Transform::Window(w) if w.map == [1, 0] => "swap2",
            Transform::Window(w) if w.map == [2, 1, 0] => "rev3",
            Transform::Window(_) => "window",
            Transform::Shift => "shift",
            Transform::Prepend { .. } => "prepend",
            Transform::TransposeAt(_) => "transpose",
            Transform::Invert(_) => "invert",
            Transform::Increment { .. } => "inc",
            Transform::SevenReplacement => "seven",
            Transform::Canonicalize(_) => "canonical",
            Transform::Estimate(_) => "estimate",
            Transform::Composed(_) => "composed",
        }
    }

    /// The alphabet this transform is bound to, if any.
    pub fn alphabet(&self) -> Option<Alphabet> {
        match self {
            Transform::Prepend { alphabet, .. } | Transform::Increment { alphabet, .. } => Some(*alphabet),
            Transform::Invert(a) => Some(*a),
            Transform::SevenReplacement | Transform::Canonicalize(_) => Some(Alphabet::TERNARY),
            Transform::Composed(steps) => steps.iter().find_map(Transform::alphabet),
            _ => None,
        }
    }

    /// Needs declared frequencies on its input.
    pub fn requires_frequencies(&self) -> bool {
        match self {
            Transform::Canonicalize(_) => true,
            Transform::Composed(steps) => steps.first().is_some_and(Transform::requires_frequencies),
            _ => false,
        }
    }

    pub fn is_invertible(&self) -> bool {
        self.inverse().is_ok()
    }

    pub fn inverse(&self) -> Result<Transform> {
        match self {
            Transform::Identity => Ok(Transform::Identity),
            Transform::Window(w) => Ok(Transform::Window(w.inverse())),
            Transform::TransposeAt(j) => Ok(Transform::TransposeAt(*j)),
            Transform::Invert(a) => Ok(Transform::Invert(*a)),
            Transform::Increment { m, alphabet } => Ok(mod_increment(-i64::from(*m), *alphabet)),
            Transform::Composed(steps) => {
                let inv = steps.iter().rev().map(Transform::inverse).collect::<Result<Vec<_>>>()?;
                Ok(simplify(inv))
            }
            other => Err(Error::NotInvertible(other.to_string())),
        }
    }

    /// The image of `stream`.
    pub fn apply(&self, stream: &DigitStream) -> Result<DigitStream> {
        if let Some(a) = self.alphabet() {
            if a != stream.alphabet() {
                return Err(Error::AlphabetMismatch { expected: a, found: stream.alphabet() });
            }
        }
        let label = format!("{} | {}", stream.label(), self);
        match self {
            Transform::Identity => Ok(stream.clone()),
            Transform::Composed(steps) => {
                steps.iter().try_fold(stream.clone(), |s, t| t.apply(&s)).map(|s| s.with_label(label))
            }
            Transform::Canonicalize(weight) => match &stream.meta().frequencies {
                Frequencies::Declared(tau) => Ok(canonical_be_point(tau, *weight)?.with_label(label)),
                Frequencies::NonExistent => Ok(stream.clone().with_label(label)),
                Frequencies::Unknown => Err(Error::FrequenciesUnknown),
            },
            Transform::Estimate(n) => {
                let counts = stream.prefix(*n as usize).counts();
                let tau = FrequencyVector::from_counts(&counts)?;
                Ok(stream.clone().with_meta(StreamMeta::declared(tau)).with_label(label))
            }
            _ => {
                let meta = self.map_meta(stream.meta(), stream.alphabet());
                let inner = stream.clone();
                let this = self.clone();
                let alphabet = stream.alphabet();
                Ok(DigitStream::new(alphabet, meta, label, move || this.wrap(inner.cursor(), alphabet)))
            }
        }
    }

    /// Declared statistics of the image, given those of the input.
    fn map_meta(&self, meta: &StreamMeta, alphabet: Alphabet) -> StreamMeta {
        let s = alphabet.len();
        let remap = |f: &dyn Fn(&[f64]) -> Vec<f64>| match &meta.frequencies {
            Frequencies::Declared(tau) => {
                StreamMeta::declared(FrequencyVector::new(f(tau.as_slice())).expect("permuted frequencies"))
            }
            Frequencies::NonExistent => StreamMeta { frequencies: Frequencies::NonExistent, mean: None },
            Frequencies::Unknown => StreamMeta::unknown(),
        };
        match self {
            Transform::Invert(_) => {
                let mut out = remap(&|t| t.iter().rev().copied().collect());
                if out.mean.is_none() {
                    out.mean = meta.mean.map(|r| (s - 1) as f64 - r);
                }
                out
            }
            Transform::Increment { m, .. } => remap(&|t| {
                let mut out = vec![0.0; s];
                for (i, &ti) in t.iter().enumerate() {
                    out[(i + *m as usize) % s] = ti;
                }
                out
            }),
            Transform::SevenReplacement => {
                // A seventh of the ones become zeros and another seventh twos;
                // the digit sum changes by at most one, so the mean is kept.
                let mut out = match &meta.frequencies {
                    Frequencies::Declared(tau) => {
                        let t = tau.as_slice();
                        StreamMeta::declared(
                            FrequencyVector::new(vec![t[0] + t[1] / 7.0, t[1] * 5.0 / 7.0, t[2] + t[1] / 7.0])
                                .expect("redistributed frequencies"),
                        )
                    }
                    _ => StreamMeta::unknown(),
                };
                out.mean = meta.mean;
                out
            }
            _ => meta.clone(),
        }
    }

    /// Cursor over the image of the digits yielded by `input`.
    fn wrap(&self, input: Cursor, alphabet: Alphabet) -> Cursor {
        match self {
            Transform::Identity | Transform::Canonicalize(_) | Transform::Estimate(_) => input,
            Transform::Window(w) => Box::new(WindowCursor::new(input, w.clone())),
            Transform::Shift => Box::new(input.skip(1)),
            Transform::Prepend { digit, .. } => Box::new(std::iter::once(*digit).chain(input)),
            Transform::TransposeAt(j) => Box::new(TransposeCursor { input, j: *j, pos: 0, held: None }),
            Transform::Invert(_) => {
                let top = alphabet.max_digit().0;
                Box::new(input.map(move |d| Digit(top - d.0)))
            }
            Transform::Increment { m, .. } => {
                let (m, s) = (*m as u16, alphabet.radix() as u16);
                Box::new(input.map(move |d| Digit(((u16::from(d.0) + m) % s) as u8)))
            }
            Transform::SevenReplacement => Box::new(SevenCursor { input, phase: 0, started: false }),
            Transform::Composed(steps) => steps.iter().fold(input, |c, t| t.wrap(c, alphabet)),
        }
    }
}

impl fmt::Display for Transform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Transform::Window(w) if self.name() == "window" => write!(f, "window{:?}", w.map),
            Transform::Prepend { digit, .. } => write!(f, "prepend({digit})"),
            Transform::TransposeAt(j) => write!(f, "transpose({j})"),
            Transform::Increment { m, .. } => write!(f, "inc({m})"),
            Transform::Canonicalize(WeightKind::Power(p)) => write!(f, "canonical({p})"),
            Transform::Estimate(n) => write!(f, "estimate({n})"),
            Transform::Composed(steps) => {
                for (i, t) in steps.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" | ")?;
                    }
                    write!(f, "{t}")?;
                }
                Ok(())
            }
            other => f.write_str(other.name()),
        }
    }
}

/// Buffers one window at a time.
struct WindowCursor {
    input: Cursor,
    perm: WindowPermutation,
    buf: Vec<Digit>,
    pos: usize,
}

impl WindowCursor {
    fn new(input: Cursor, perm: WindowPermutation) -> Self {
        let w = perm.window();
        WindowCursor { input, perm, buf: Vec::with_capacity(w), pos: w }
    }
}

impl Iterator for WindowCursor {
    type Item = Digit;

    #[inline]
    fn next(&mut self) -> Option<Digit> {
        let w = self.perm.window();
        if self.pos >= self.buf.len() {
            self.buf.clear();
            self.buf.extend(self.input.by_ref().take(w));
            self.pos = 0;
            if self.buf.is_empty() {
                return None;
            }
        }
        let i = self.pos;
        self.pos += 1;
        if self.buf.len() < w {
            // A finite input ending mid-window is passed through unchanged.
            return Some(self.buf[i]);
        }
        Some(self.buf[self.perm.map[i]])
    }
}

struct TransposeCursor {
    input: Cursor,
    j: u64,
    pos: u64,
    held: Option<Digit>,
}

impl Iterator for TransposeCursor {
    type Item = Digit;

    fn next(&mut self) -> Option<Digit> {
        self.pos += 1;
        if self.pos == self.j {
            let first = self.input.next()?;
            match self.input.next() {
                Some(second) => {
                    self.held = Some(first);
                    Some(second)
                }
                None => Some(first),
            }
        } else if self.pos == self.j + 1 && self.held.is_some() {
            self.held.take()
        } else {
            self.input.next()
        }
    }
}

/// Occurrence counter of digit 1, kept modulo 7.
struct SevenCursor {
    input: Cursor,
    phase: u8,
    started: bool,
}

impl Iterator for SevenCursor {
    type Item = Digit;

    #[inline]
    fn next(&mut self) -> Option<Digit> {
        let d = self.input.next()?;
        if d.0 != 1 {
            return Some(d);
        }
        // phase = k mod 7 for the k-th occurrence
        self.phase = (self.phase + 1) % 7;
        let out = match self.phase {
            0 => Digit(0),
            1 if self.started => Digit(2),
            _ => d,
        };
        self.started = true;
        Some(out)
    }
}
