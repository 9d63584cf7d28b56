//! Digit streams: immutable, shareable definitions of an infinite digit
//! sequence, from which any number of independent cursors can be drawn.

use std::fmt;
use std::sync::Arc;

use crate::digits::{Alphabet, Digit, DigitWord, Rational};
use crate::freq::FrequencyVector;

/// A live, single-consumer position in a stream.
pub type Cursor = Box<dyn Iterator<Item = Digit> + Send>;

/// What is known about the digit frequencies of a stream.
#[derive(Debug, Clone, PartialEq)]
pub enum Frequencies {
    /// Nothing is declared.
    Unknown,
    /// Every frequency exists and equals the given vector.
    Declared(FrequencyVector),
    /// The stream is known to lack digit frequencies.
    NonExistent,
}

/// Declared limiting statistics carried alongside a stream definition.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamMeta {
    pub frequencies: Frequencies,
    /// Declared asymptotic mean of digits, when known.
    pub mean: Option<f64>,
}

impl StreamMeta {
    pub fn unknown() -> Self {
        StreamMeta { frequencies: Frequencies::Unknown, mean: None }
    }

    pub fn declared(tau: FrequencyVector) -> Self {
        let mean = crate::stats::mean_from_frequencies(&tau);
        StreamMeta { frequencies: Frequencies::Declared(tau), mean: Some(mean) }
    }

    pub fn declared_frequencies(&self) -> Option<&FrequencyVector> {
        match &self.frequencies {
            Frequencies::Declared(tau) => Some(tau),
            _ => None,
        }
    }
}

type CursorFactory = dyn Fn() -> Cursor + Send + Sync;

/// An s-adic expansion given by a rule. Cloning is cheap; each call to
/// [`DigitStream::cursor`] restarts from the first digit.
#[derive(Clone)]
pub struct DigitStream {
    alphabet: Alphabet,
    meta: StreamMeta,
    label: String,
    factory: Arc<CursorFactory>,
}

impl DigitStream {
    pub fn new<F>(alphabet: Alphabet, meta: StreamMeta, label: impl Into<String>, factory: F) -> Self
    where
        F: Fn() -> Cursor + Send + Sync + 'static,
    {
        DigitStream { alphabet, meta, label: label.into(), factory: Arc::new(factory) }
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn meta(&self) -> &StreamMeta {
        &self.meta
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn cursor(&self) -> Cursor {
        (self.factory)()
    }

    pub fn with_meta(mut self, meta: StreamMeta) -> Self {
        self.meta = meta;
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// The first `n` digits, read from a fresh cursor.
    pub fn prefix(&self, n: usize) -> DigitWord {
        DigitWord::from_trusted(self.alphabet, self.cursor().take(n).collect())
    }
}

impl fmt::Debug for DigitStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DigitStream")
            .field("label", &self.label)
            .field("alphabet", &self.alphabet)
            .field("meta", &self.meta)
            .finish()
    }
}

/// Free-function form of [`DigitStream::prefix`].
pub fn prefix(stream: &DigitStream, n: usize) -> DigitWord {
    stream.prefix(n)
}

/// Long-division cursor over `num/den` in base `s`.
struct LongDivision {
    rem: u64,
    den: u64,
    s: u32,
}

impl Iterator for LongDivision {
    type Item = Digit;

    #[inline]
    fn next(&mut self) -> Option<Digit> {
        let (d, r) = Rational::long_division_step(self.rem, self.den, self.s);
        self.rem = r;
        Some(d)
    }
}

/// Base-`s` expansion of a rational in `[0, 1)` by exact long division.
///
/// Terminating expansions continue with zeros, so the period `(s-1)` never
/// appears. The declared frequencies are those of the period.
pub fn expand_rational(x: Rational, alphabet: Alphabet) -> DigitStream {
    let form = x.periodic_form(alphabet);
    let mut counts = vec![0u64; alphabet.len()];
    for d in &form.period {
        counts[d.index()] += 1;
    }
    let tau = FrequencyVector::from_counts(&counts).expect("period is nonempty");
    let (num, den, s) = (x.numerator(), x.denominator(), alphabet.radix());
    DigitStream::new(alphabet, StreamMeta::declared(tau), format!("rational({num}, {den}, {s})"), move || {
        Box::new(LongDivision { rem: num, den, s })
    })
}

/// The constant expansion `Δ^s_{(d)}`.
pub fn constant_stream(alphabet: Alphabet, digit: Digit) -> DigitStream {
    DigitStream::new(
        alphabet,
        StreamMeta::declared(FrequencyVector::point(alphabet, digit)),
        format!("const({digit}, {alphabet})"),
        move || Box::new(std::iter::repeat(digit)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(p: u64, q: u64) -> Rational {
        Rational::new(p, q).unwrap()
    }

    #[test]
    fn expand_examples() {
        let t = Alphabet::TERNARY;
        assert_eq!(expand_rational(rat(1, 3), t).prefix(4).values(), vec![1, 0, 0, 0]);
        assert_eq!(expand_rational(Rational::zero(), t).prefix(5).values(), vec![0; 5]);
        assert_eq!(expand_rational(rat(1, 2), t).prefix(5).values(), vec![1; 5]);
        assert!(expand_rational(rat(1, 3), t).prefix(0).is_empty());
    }

    #[test]
    fn expand_declares_period_frequencies() {
        let s = expand_rational(rat(1, 2), Alphabet::TERNARY);
        assert_eq!(s.meta().declared_frequencies().unwrap().as_slice(), &[0.0, 1.0, 0.0]);
        assert_eq!(s.meta().mean, Some(1.0));
    }

    #[test]
    fn prefixes_do_not_disturb_fresh_cursors() {
        let s = expand_rational(rat(5, 7), Alphabet::TERNARY);
        let first = s.prefix(20);
        let mut c = s.cursor();
        for _ in 0..7 {
            c.next();
        }
        assert_eq!(s.prefix(20), first);
    }

    #[test]
    fn constant_stream_repeats() {
        let s = constant_stream(Alphabet::TERNARY, Digit(2));
        assert_eq!(s.prefix(3).values(), vec![2, 2, 2]);
        assert_eq!(s.meta().mean, Some(2.0));
    }
}
