//! Digit counts, relative frequencies and running digit means along a
//! stream, with convergence proxies over checkpointed traces, plus the
//! closed-form quantities attached to frequency vectors.

use serde::Serialize;
use serde_json::json;

use crate::digits::{Alphabet, Digit};
use crate::error::{Error, Result};
use crate::freq::FrequencyVector;
use crate::stream::DigitStream;

/// Exact tallies after reading `n` digits: `N_i(x, n)` and `Σ_{k≤n} α_k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunningCounts {
    pub n: u64,
    pub counts: Vec<u64>,
    pub digit_sum: u64,
}

impl RunningCounts {
    pub fn new(alphabet: Alphabet) -> Self {
        RunningCounts { n: 0, counts: vec![0; alphabet.len()], digit_sum: 0 }
    }

    #[inline]
    pub fn push(&mut self, d: Digit) {
        self.n += 1;
        self.counts[d.index()] += 1;
        self.digit_sum += u64::from(d.0);
    }

    /// `v_i^{(n)} = N_i / n`.
    pub fn frequency(&self, i: usize) -> f64 {
        self.counts[i] as f64 / self.n as f64
    }

    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.counts.len()).map(|i| self.frequency(i)).collect()
    }

    /// `r_n = (1/n) Σ_{k≤n} α_k`.
    pub fn mean(&self) -> f64 {
        self.digit_sum as f64 / self.n as f64
    }

    /// `Σ N_i = n` and `digit_sum = Σ i·N_i`.
    pub fn is_consistent(&self) -> bool {
        let total: u64 = self.counts.iter().sum();
        let weighted: u128 = self.counts.iter().enumerate().map(|(i, &c)| i as u128 * u128::from(c)).sum();
        total == self.n && weighted == u128::from(self.digit_sum)
    }

    /// The inequalities behind "mean 0 forces frequency of 0 to be 1, mean
    /// `s-1` forces frequency of `s-1` to be 1", checked in integers:
    /// `r_n ≥ v_i` for every `i ≥ 1`, and `v_{s-1} ≥ r_n - (s-2)`.
    /// For ternary digits the second reads `v_2 ≥ r_n - 1`.
    pub fn satisfies_mean_bounds(&self) -> bool {
        let sum = u128::from(self.digit_sum);
        let s = self.counts.len() as u128;
        let top = u128::from(*self.counts.last().expect("alphabet has at least two digits"));
        let mean_dominates = self.counts.iter().skip(1).all(|&c| sum >= u128::from(c));
        let top_bound = top + (s - 2) * u128::from(self.n) >= sum;
        mean_dominates && top_bound
    }
}

/// Rows of [`RunningCounts`] taken at strictly increasing positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StatsTrace {
    alphabet: Alphabet,
    rows: Vec<RunningCounts>,
}

impl StatsTrace {
    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn rows(&self) -> &[RunningCounts] {
        &self.rows
    }

    pub fn last(&self) -> &RunningCounts {
        self.rows.last().expect("traces are nonempty")
    }

    pub fn positions(&self) -> Vec<u64> {
        self.rows.iter().map(|r| r.n).collect()
    }

    pub fn means(&self) -> Vec<f64> {
        self.rows.iter().map(RunningCounts::mean).collect()
    }

    pub fn frequency_series(&self, i: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r.frequency(i)).collect()
    }

    pub fn csv_header(&self, include_counts: bool) -> String {
        let s = self.alphabet.len();
        let mut cols = vec!["n".to_string()];
        cols.extend((0..s).map(|i| format!("v{i}")));
        cols.push("r".into());
        if include_counts {
            cols.extend((0..s).map(|i| format!("N{i}")));
            cols.push("digit_sum".into());
        }
        cols.join(",")
    }

    /// CSV text: header `n,v0,…,v{s-1},r`, then one row per checkpoint.
    /// Floats use the shortest representation that round-trips.
    pub fn to_csv(&self, include_counts: bool) -> String {
        let mut out = self.csv_header(include_counts);
        out.push('\n');
        for row in &self.rows {
            let mut cells = vec![row.n.to_string()];
            cells.extend(row.frequencies().iter().map(|v| v.to_string()));
            cells.push(row.mean().to_string());
            if include_counts {
                cells.extend(row.counts.iter().map(u64::to_string));
                cells.push(row.digit_sum.to_string());
            }
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self, include_counts: bool) -> serde_json::Value {
        let rows: Vec<_> = self
            .rows
            .iter()
            .map(|row| {
                let mut v = json!({ "n": row.n, "v": row.frequencies(), "r": row.mean() });
                if include_counts {
                    v["counts"] = json!(row.counts);
                    v["digit_sum"] = json!(row.digit_sum);
                }
                v
            })
            .collect();
        json!({ "radix": self.alphabet.radix(), "rows": rows })
    }
}

/// Reads `stream` once, recording exact counts at each checkpoint.
pub fn run_stats(stream: &DigitStream, checkpoints: &[u64]) -> Result<StatsTrace> {
    if checkpoints.is_empty() {
        return Err(Error::TooFewCheckpoints { needed: 1, got: 0 });
    }
    let mut prev = 0;
    for &c in checkpoints {
        if c <= prev {
            return Err(Error::CheckpointOrder(c));
        }
        prev = c;
    }
    let alphabet = stream.alphabet();
    let s = alphabet.len();
    let mut cursor = stream.cursor();
    let mut counts = vec![0u64; s];
    let mut n = 0u64;
    let mut rows = Vec::with_capacity(checkpoints.len());
    for &target in checkpoints {
        while n < target {
            match cursor.next() {
                Some(d) => counts[d.index()] += 1,
                None => return Err(Error::StreamExhausted { needed: target, got: n }),
            }
            n += 1;
        }
        let digit_sum = counts
            .iter()
            .enumerate()
            .try_fold(0u64, |acc, (i, &c)| acc.checked_add((i as u64).checked_mul(c)?))
            .ok_or(Error::Overflow("digit sum"))?;
        rows.push(RunningCounts { n, counts: counts.clone(), digit_sum });
    }
    Ok(StatsTrace { alphabet, rows })
}

/// Checkpoints `⌈10^{k/8}⌉` for `k = 0, 1, …` up to `max_n`, with `max_n`
/// itself always last.
pub fn geometric_checkpoints(max_n: u64) -> Vec<u64> {
    let mut out: Vec<u64> = Vec::new();
    for k in 0.. {
        let v = 10f64.powf(k as f64 / 8.0);
        let c = if (v - v.round()).abs() < 1e-9 { v.round() } else { v.ceil() } as u64;
        if c >= max_n {
            break;
        }
        if out.last() != Some(&c) {
            out.push(c);
        }
    }
    if max_n > 0 {
        out.push(max_n);
    }
    out
}

/// Finite-sample stand-in for "the limit exists": the spread of a series
/// over the last half of its checkpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitVerdict {
    pub converged: bool,
    /// Value at the last checkpoint.
    pub estimate: f64,
    /// Minimum over the tail.
    pub low: f64,
    /// Maximum over the tail.
    pub high: f64,
}

impl LimitVerdict {
    pub fn spread(&self) -> f64 {
        self.high - self.low
    }
}

/// Minimum number of checkpoints for a verdict.
pub const MIN_VERDICT_CHECKPOINTS: usize = 4;

fn verdict(series: &[f64], tol: f64) -> Result<LimitVerdict> {
    if series.len() < MIN_VERDICT_CHECKPOINTS {
        return Err(Error::TooFewCheckpoints { needed: MIN_VERDICT_CHECKPOINTS, got: series.len() });
    }
    let tail = &series[series.len() / 2..];
    let low = tail.iter().copied().fold(f64::INFINITY, f64::min);
    let high = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(LimitVerdict { converged: high - low <= tol, estimate: *series.last().unwrap(), low, high })
}

pub fn asymptotic_mean_verdict(trace: &StatsTrace, tol: f64) -> Result<LimitVerdict> {
    verdict(&trace.means(), tol)
}

pub fn frequency_verdicts(trace: &StatsTrace, tol: f64) -> Result<Vec<LimitVerdict>> {
    (0..trace.alphabet.len()).map(|i| verdict(&trace.frequency_series(i), tol)).collect()
}

/// `r = Σ i·τ_i`.
pub fn mean_from_frequencies(tau: &FrequencyVector) -> f64 {
    tau.as_slice().iter().enumerate().map(|(i, t)| i as f64 * t).sum()
}

/// Hausdorff dimension of `E[τ_0, …, τ_{s-1}]`: `-Σ τ_i ln τ_i / ln s`,
/// with `0 · ln 0 = 0`.
pub fn be_dimension(tau: &FrequencyVector, alphabet: Alphabet) -> Result<f64> {
    if tau.alphabet() != alphabet {
        return Err(Error::InvalidFrequencies(format!(
            "{} entries for base {alphabet}",
            tau.as_slice().len()
        )));
    }
    let entropy: f64 = tau.as_slice().iter().filter(|&&t| t > 0.0).map(|&t| t * t.ln()).sum();
    if entropy == 0.0 {
        return Ok(0.0);
    }
    Ok(-entropy / f64::from(alphabet.radix()).ln())
}

/// `#({1, …, n} ∩ {7k : k ≥ 1}) = ⌊n/7⌋`.
pub fn cardinality_7k(n: u64) -> u64 {
    n / 7
}

/// `#({1, …, n} ∩ {7k + 1 : k ≥ 1}) = ⌊(n-1)/7⌋`.
pub fn cardinality_7k1(n: u64) -> u64 {
    n.saturating_sub(1) / 7
}

/// `((n+1)^{1+α} / S_n, n^{2+α} / S_n)` with `S_n = Σ_{i≤n} i^{1+α}`.
///
/// Terms are scaled by `n^{1+α}` before summing, so nothing overflows for
/// any `n`, and the sum is compensated (Neumaier).
pub fn power_sum_ratios(alpha: f64, n: u64) -> Result<(f64, f64)> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::Domain(format!("exponent must be positive, got {alpha}")));
    }
    if n == 0 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    let e = 1.0 + alpha;
    let nf = n as f64;
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for i in 1..=n {
        let term = (i as f64 / nf).powf(e);
        let t = sum + term;
        comp += if sum.abs() >= term.abs() { (sum - t) + term } else { (term - t) + sum };
        sum = t;
    }
    let scaled = sum + comp;
    let ratio1 = ((nf + 1.0) / nf).powf(e) / scaled;
    let ratio2 = nf / scaled;
    Ok((ratio1, ratio2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digits::Rational;
    use crate::stream::{constant_stream, expand_rational};

    const T: Alphabet = Alphabet::TERNARY;

    fn tau(v: &[f64]) -> FrequencyVector {
        FrequencyVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn constant_streams() {
        let t = run_stats(&constant_stream(T, Digit(0)), &[10, 100]).unwrap();
        for row in t.rows() {
            assert_eq!(row.frequency(0), 1.0);
            assert_eq!(row.mean(), 0.0);
        }
        let t = run_stats(&constant_stream(T, Digit(2)), &[1, 7, 1000]).unwrap();
        assert!(t.means().iter().all(|&r| r == 2.0));
        let half = expand_rational(Rational::new(1, 2).unwrap(), T);
        let row = run_stats(&half, &[64]).unwrap().last().clone();
        assert_eq!((row.frequency(1), row.mean()), (1.0, 1.0));
    }

    #[test]
    fn checkpoint_validation() {
        let s = constant_stream(T, Digit(1));
        assert_eq!(run_stats(&s, &[]).unwrap_err(), Error::TooFewCheckpoints { needed: 1, got: 0 });
        assert_eq!(run_stats(&s, &[5, 5]).unwrap_err(), Error::CheckpointOrder(5));
        assert_eq!(run_stats(&s, &[0]).unwrap_err(), Error::CheckpointOrder(0));
    }

    #[test]
    fn geometric_schedule() {
        let c = geometric_checkpoints(100);
        assert_eq!(c.first(), Some(&1));
        assert_eq!(c.last(), Some(&100));
        assert!(c.windows(2).all(|w| w[0] < w[1]));
        assert!(c.contains(&10));
        assert_eq!(geometric_checkpoints(1), vec![1]);
    }

    #[test]
    fn verdicts() {
        let s = constant_stream(T, Digit(1));
        let trace = run_stats(&s, &geometric_checkpoints(1000)).unwrap();
        let v = asymptotic_mean_verdict(&trace, 1e-12).unwrap();
        assert!(v.converged);
        assert_eq!(v.estimate, 1.0);
        let short = run_stats(&s, &[1, 2, 3]).unwrap();
        assert!(asymptotic_mean_verdict(&short, 0.1).is_err());
    }

    #[test]
    fn mean_from_frequency_examples() {
        assert!((mean_from_frequencies(&FrequencyVector::uniform(T)) - 1.0).abs() < 1e-15);
        assert_eq!(mean_from_frequencies(&tau(&[1.0, 0.0, 0.0])), 0.0);
        assert!((mean_from_frequencies(&tau(&[0.4, 0.2, 0.4])) - 1.0).abs() < 1e-15);
        assert!((mean_from_frequencies(&tau(&[0.3, 0.4, 0.3])) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn dimension_examples() {
        assert!((be_dimension(&FrequencyVector::uniform(T), T).unwrap() - 1.0).abs() < 1e-12);
        let zero = be_dimension(&tau(&[1.0, 0.0, 0.0]), T).unwrap();
        assert_eq!(zero.to_bits(), 0.0f64.to_bits());
        let d = be_dimension(&tau(&[0.2, 0.3, 0.5]), T).unwrap();
        assert!((d - 0.937_230_563_216_129_5).abs() < 1e-12);
        assert!(be_dimension(&tau(&[0.5, 0.5]), T).is_err());
    }

    #[test]
    fn seven_multiple_counts() {
        assert_eq!((cardinality_7k(7), cardinality_7k1(7)), (1, 0));
        assert_eq!((cardinality_7k(8), cardinality_7k1(8)), (1, 1));
        assert_eq!((cardinality_7k(1), cardinality_7k1(1)), (0, 0));
    }

    #[test]
    fn power_sums_small_cases() {
        assert_eq!(power_sum_ratios(1.0, 1).unwrap(), (4.0, 1.0));
        // S_2 = 1 + 4 = 5 for α = 1
        let (r1, r2) = power_sum_ratios(1.0, 2).unwrap();
        assert!((r1 - 9.0 / 5.0).abs() < 1e-15 && (r2 - 8.0 / 5.0).abs() < 1e-15);
        assert!(power_sum_ratios(0.0, 10).is_err());
        assert!(power_sum_ratios(1.0, 0).is_err());
    }

    #[test]
    fn mean_bounds_hold_on_extremes() {
        let row = RunningCounts { n: 4, counts: vec![0, 0, 4], digit_sum: 8 };
        assert!(row.is_consistent() && row.satisfies_mean_bounds());
        let bad = RunningCounts { n: 4, counts: vec![0, 0, 4], digit_sum: 9 };
        assert!(!bad.satisfies_mean_bounds());
    }

    #[test]
    fn csv_and_json_shapes() {
        let trace = run_stats(&constant_stream(T, Digit(2)), &[2, 4]).unwrap();
        assert_eq!(trace.to_csv(false), "n,v0,v1,v2,r\n2,0,0,1,2\n4,0,0,1,2\n");
        assert_eq!(trace.to_csv(true).lines().next().unwrap(), "n,v0,v1,v2,r,N0,N1,N2,digit_sum");
        let j = trace.to_json(true);
        assert_eq!(j["radix"], 3);
        assert_eq!(j["rows"][1]["counts"], json!([0, 0, 4]));
    }
}
