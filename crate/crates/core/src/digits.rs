//! Alphabets, digits, finite words and eventually periodic representations.
//!
//! A point of `[0, 1)` is written `Δ^s_{α1 α2 ...}`, meaning `Σ α_k s^{-k}`.
//! Points with a terminating expansion have a second representation ending in
//! an infinite run of `s - 1`; throughout this crate only the representation
//! ending in zeros is ever produced.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Radix of an s-adic representation. Digits are `0..s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Alphabet(u32);

impl Alphabet {
    /// Largest supported radix; digits are stored in a byte.
    pub const MAX_RADIX: u32 = 256;
    pub const TERNARY: Alphabet = Alphabet(3);
    pub const BINARY: Alphabet = Alphabet(2);

    pub fn new(s: u32) -> Result<Self> {
        if !(2..=Self::MAX_RADIX).contains(&s) {
            return Err(Error::InvalidRadix(s));
        }
        Ok(Alphabet(s))
    }

    #[inline]
    pub fn radix(self) -> u32 {
        self.0
    }

    #[inline]
    #[allow(clippy::len_without_is_empty)]
    pub fn len(self) -> usize {
        self.0 as usize
    }

    /// Largest digit, `s - 1`.
    #[inline]
    pub fn max_digit(self) -> Digit {
        Digit((self.0 - 1) as u8)
    }

    pub fn contains(self, d: Digit) -> bool {
        u32::from(d.0) < self.0
    }

    pub fn digit(self, value: i64) -> Result<Digit> {
        if value < 0 || value >= i64::from(self.0) {
            return Err(Error::InvalidDigit { digit: value, radix: self.0 });
        }
        Ok(Digit(value as u8))
    }

    pub fn digits(self) -> impl Iterator<Item = Digit> {
        (0..self.0).map(|d| Digit(d as u8))
    }
}

impl Default for Alphabet {
    fn default() -> Self {
        Alphabet::TERNARY
    }
}

impl TryFrom<u32> for Alphabet {
    type Error = Error;

    fn try_from(s: u32) -> Result<Self> {
        Alphabet::new(s)
    }
}

impl From<Alphabet> for u32 {
    fn from(a: Alphabet) -> u32 {
        a.0
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A single digit. Validity is relative to an [`Alphabet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[repr(transparent)]
pub struct Digit(pub u8);

impl Digit {
    #[inline]
    pub fn value(self) -> u8 {
        self.0
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for Digit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A finite digit sequence over a fixed alphabet.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DigitWord {
    alphabet: Alphabet,
    digits: Vec<Digit>,
}

impl DigitWord {
    pub fn new(alphabet: Alphabet, digits: Vec<Digit>) -> Result<Self> {
        if let Some(bad) = digits.iter().find(|d| !alphabet.contains(**d)) {
            return Err(Error::InvalidDigit { digit: i64::from(bad.0), radix: alphabet.radix() });
        }
        Ok(DigitWord { alphabet, digits })
    }

    pub fn empty(alphabet: Alphabet) -> Self {
        DigitWord { alphabet, digits: Vec::new() }
    }

    pub fn from_values(alphabet: Alphabet, values: &[u8]) -> Result<Self> {
        DigitWord::new(alphabet, values.iter().map(|&v| Digit(v)).collect())
    }

    /// Caller guarantees every digit is valid for `alphabet`.
    pub(crate) fn from_trusted(alphabet: Alphabet, digits: Vec<Digit>) -> Self {
        DigitWord { alphabet, digits }
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn digits(&self) -> &[Digit] {
        &self.digits
    }

    pub fn values(&self) -> Vec<u8> {
        self.digits.iter().map(|d| d.0).collect()
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    /// `N_i` for every digit `i` of the alphabet.
    pub fn counts(&self) -> Vec<u64> {
        let mut counts = vec![0u64; self.alphabet.len()];
        for d in &self.digits {
            counts[d.index()] += 1;
        }
        counts
    }
}

impl fmt::Display for DigitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.digits {
            write_digit(f, *d)?;
        }
        Ok(())
    }
}

fn write_digit(f: &mut fmt::Formatter<'_>, d: Digit) -> fmt::Result {
    match char::from_digit(u32::from(d.0), 36) {
        Some(c) => write!(f, "{c}"),
        None => write!(f, "[{}]", d.0),
    }
}

/// A rational number `p/q` in `[0, 1)`, kept in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rational {
    num: u64,
    den: u64,
}

impl Rational {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if den == 0 {
            return Err(Error::Domain("rational with zero denominator".into()));
        }
        if num >= den {
            return Err(Error::OutOfUnitInterval(format!("{num}/{den}")));
        }
        let g = gcd(num, den);
        Ok(Rational { num: num / g, den: den / g })
    }

    pub fn zero() -> Self {
        Rational { num: 0, den: 1 }
    }

    pub fn numerator(self) -> u64 {
        self.num
    }

    pub fn denominator(self) -> u64 {
        self.den
    }

    /// Next digit and remainder of long division in base `s`.
    #[inline]
    pub(crate) fn long_division_step(rem: u64, den: u64, s: u32) -> (Digit, u64) {
        let scaled = u128::from(rem) * u128::from(s);
        let den = u128::from(den);
        (Digit((scaled / den) as u8), (scaled % den) as u64)
    }

    /// The eventually periodic base-`s` expansion, split into pre-period and period.
    /// Always uses the representation with period `(0)` for s-adic rationals.
    pub fn periodic_form(self, alphabet: Alphabet) -> PeriodicWord {
        let s = alphabet.radix();
        let mut seen = std::collections::HashMap::new();
        let mut digits = Vec::new();
        let mut rem = self.num;
        loop {
            if let Some(&start) = seen.get(&rem) {
                let period = digits.split_off(start);
                return PeriodicWord { alphabet, prefix: digits, period };
            }
            seen.insert(rem, digits.len());
            let (d, r) = Rational::long_division_step(rem, self.den, s);
            digits.push(d);
            rem = r;
        }
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

pub(crate) fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// An eventually periodic representation `c_1 ... c_k (p_1 ... p_m)`.
///
/// Text form is the digits of the pre-period followed by the period in
/// parentheses, e.g. `12(0)` or `0(2)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PeriodicWord {
    pub alphabet: Alphabet,
    pub prefix: Vec<Digit>,
    pub period: Vec<Digit>,
}

impl PeriodicWord {
    pub fn new(alphabet: Alphabet, prefix: Vec<Digit>, period: Vec<Digit>) -> Result<Self> {
        if period.is_empty() {
            return Err(Error::Domain("period must contain at least one digit".into()));
        }
        for d in prefix.iter().chain(&period) {
            if !alphabet.contains(*d) {
                return Err(Error::InvalidDigit { digit: i64::from(d.0), radix: alphabet.radix() });
            }
        }
        Ok(PeriodicWord { alphabet, prefix, period })
    }

    pub fn parse(alphabet: Alphabet, text: &str) -> Result<Self> {
        let text = text.trim();
        let bad = || Error::Domain(format!("malformed periodic word `{text}`, expected e.g. `12(0)`"));
        let open = text.find('(').ok_or_else(bad)?;
        let close = text.strip_suffix(')').ok_or_else(bad)?;
        let parse_digits = |s: &str| -> Result<Vec<Digit>> {
            s.chars()
                .map(|c| {
                    let v = c.to_digit(36).ok_or_else(bad)?;
                    alphabet.digit(i64::from(v))
                })
                .collect()
        };
        let prefix = parse_digits(&text[..open])?;
        let period = parse_digits(&close[open + 1..])?;
        PeriodicWord::new(alphabet, prefix, period)
    }

    /// Digit at 1-based position `k`.
    pub fn digit_at(&self, k: u64) -> Digit {
        let k = (k - 1) as usize;
        if k < self.prefix.len() {
            self.prefix[k]
        } else {
            self.period[(k - self.prefix.len()) % self.period.len()]
        }
    }

    /// True when the period consists only of the digit `s - 1`.
    pub fn has_max_period(&self) -> bool {
        let top = self.alphabet.max_digit();
        self.period.iter().all(|&d| d == top)
    }

    /// Rewrites a representation ending in period `(s-1)` into the equivalent
    /// one ending in period `(0)`; any other word is returned unchanged.
    ///
    /// The pre-period keeps its length: trailing `s-1` digits of the
    /// pre-period become `0` and the last smaller digit is incremented.
    /// Fails only when the word denotes `1`, which has no representation
    /// inside `[0, 1)`.
    pub fn canonicalize(&self) -> Result<PeriodicWord> {
        if !self.has_max_period() {
            return Ok(self.clone());
        }
        let top = self.alphabet.max_digit();
        let mut prefix = self.prefix.clone();
        let pos = prefix
            .iter()
            .rposition(|&d| d != top)
            .ok_or_else(|| Error::OutOfUnitInterval(format!("{self} (equals 1)")))?;
        prefix[pos] = Digit(prefix[pos].0 + 1);
        for d in &mut prefix[pos + 1..] {
            *d = Digit(0);
        }
        Ok(PeriodicWord { alphabet: self.alphabet, prefix, period: vec![Digit(0)] })
    }
}

impl fmt::Display for PeriodicWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.prefix {
            write_digit(f, *d)?;
        }
        f.write_str("(")?;
        for d in &self.period {
            write_digit(f, *d)?;
        }
        f.write_str(")")
    }
}

impl FromStr for PeriodicWord {
    type Err = Error;

    /// Parses in the default ternary alphabet.
    fn from_str(s: &str) -> Result<Self> {
        PeriodicWord::parse(Alphabet::TERNARY, s)
    }
}
