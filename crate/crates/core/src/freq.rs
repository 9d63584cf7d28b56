use std::fmt;

use serde::{Deserialize, Serialize};

use crate::digits::{Alphabet, Digit};
use crate::error::{Error, Result};

/// Tolerance on `Σ τ_i = 1`.
pub const SUM_TOLERANCE: f64 = 1e-12;

/// Digit frequencies `(τ_0, ..., τ_{s-1})`: nonnegative, summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct FrequencyVector(Vec<f64>);

impl FrequencyVector {
    pub fn new(tau: Vec<f64>) -> Result<Self> {
        if tau.len() < 2 || tau.len() > Alphabet::MAX_RADIX as usize {
            return Err(Error::InvalidFrequencies(format!(
                "need between 2 and {} entries, got {}",
                Alphabet::MAX_RADIX,
                tau.len()
            )));
        }
        if let Some(bad) = tau.iter().find(|t| !t.is_finite() || **t < 0.0) {
            return Err(Error::InvalidFrequencies(format!("entry {bad} is not a nonnegative number")));
        }
        let sum: f64 = tau.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidFrequencies(format!("entries sum to {sum}, not 1")));
        }
        Ok(FrequencyVector(tau))
    }

    pub fn uniform(alphabet: Alphabet) -> Self {
        let s = alphabet.len();
        FrequencyVector(vec![1.0 / s as f64; s])
    }

    /// All mass on a single digit.
    pub fn point(alphabet: Alphabet, digit: Digit) -> Self {
        let mut tau = vec![0.0; alphabet.len()];
        tau[digit.index()] = 1.0;
        FrequencyVector(tau)
    }

    /// Relative frequencies of exact integer counts.
    pub fn from_counts(counts: &[u64]) -> Result<Self> {
        let n: u64 = counts.iter().sum();
        if n == 0 {
            return Err(Error::InvalidFrequencies("no digits counted".into()));
        }
        FrequencyVector::new(counts.iter().map(|&c| c as f64 / n as f64).collect())
    }

    pub fn alphabet(&self) -> Alphabet {
        Alphabet::new(self.0.len() as u32).expect("length validated on construction")
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }

    /// True when one entry equals 1.
    pub fn is_degenerate(&self) -> bool {
        self.0.contains(&1.0)
    }
}

impl TryFrom<Vec<f64>> for FrequencyVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        FrequencyVector::new(v)
    }
}

impl From<FrequencyVector> for Vec<f64> {
    fn from(f: FrequencyVector) -> Vec<f64> {
        f.0
    }
}

impl fmt::Display for FrequencyVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, t) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{t}")?;
        }
        f.write_str(")")
    }
}

/// Exact decimal value of the shortest round-trip representation of `x`,
/// as `(numerator, denominator)` with a power-of-ten denominator.
/// `None` when it does not fit in `u128`.
pub(crate) fn decimal_ratio(x: f64) -> Option<(u128, u128)> {
    if !x.is_finite() || x < 0.0 {
        return None;
    }
    let text = format!("{x}");
    let (int, frac) = text.split_once('.').unwrap_or((&text, ""));
    let den = 10u128.checked_pow(u32::try_from(frac.len()).ok()?)?;
    let digits = format!("{int}{frac}");
    let num = digits.parse::<u128>().ok()?;
    Some((num, den))
}

/// `⌊x · w⌋` for an integer weight, reading `x` as the decimal it prints as.
///
/// Treating `0.3` as exactly `3/10` keeps block lengths such as
/// `⌊0.3 · 10⌋ = 3` independent of binary rounding.
pub fn floor_scaled(x: f64, w: u64) -> u64 {
    if let Some((num, den)) = decimal_ratio(x) {
        if let Some(prod) = num.checked_mul(u128::from(w)) {
            return u64::try_from(prod / den).unwrap_or(u64::MAX);
        }
    }
    (x * w as f64).floor() as u64
}
