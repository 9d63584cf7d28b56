//! Digit-stream sources: pseudorandom surrogates for normal and
//! Besicovitch-Eggleston points, the block-structured point with prescribed
//! frequencies, and the factorial-switched oscillating construction.
//!
//! All pseudorandom sources use ChaCha8 (`rand_chacha`) seeded through
//! `SeedableRng::seed_from_u64`; digits are drawn with `Rng::gen_range` for
//! uniform streams and `WeightedIndex` for i.i.d. streams. The versions are
//! pinned by the lockfile, so traces are bit-reproducible.

use std::fmt;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::digits::{Alphabet, Digit};
use crate::error::{Error, Result};
use crate::freq::{floor_scaled, FrequencyVector};
use crate::stream::{DigitStream, Frequencies, StreamMeta};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Seed(pub u64);

impl Seed {
    fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

impl fmt::Display for Seed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// I.i.d. uniform digits: a pseudorandom stand-in for a normal number.
pub fn uniform_stream(alphabet: Alphabet, seed: Seed) -> DigitStream {
    let s = alphabet.radix() as u8;
    DigitStream::new(
        alphabet,
        StreamMeta::declared(FrequencyVector::uniform(alphabet)),
        format!("uniform({alphabet}, {seed})"),
        move || {
            let mut rng = seed.rng();
            // s == 256 does not fit in u8; the full byte range is the same distribution.
            if alphabet.radix() == 256 {
                Box::new(std::iter::repeat_with(move || Digit(rng.gen::<u8>())))
            } else {
                Box::new(std::iter::repeat_with(move || Digit(rng.gen_range(0..s))))
            }
        },
    )
}

/// I.i.d. digits with `P(digit = i) = τ_i`: a pseudorandom point of `E[τ]`.
pub fn iid_stream(tau: &FrequencyVector, seed: Seed) -> Result<DigitStream> {
    let alphabet = tau.alphabet();
    let dist = WeightedIndex::new(tau.as_slice()).map_err(|e| Error::InvalidFrequencies(e.to_string()))?;
    Ok(DigitStream::new(
        alphabet,
        StreamMeta::declared(tau.clone()),
        format!("iid({tau}, {seed})"),
        move || {
            let mut rng = seed.rng();
            let dist = dist.clone();
            Box::new(std::iter::repeat_with(move || Digit(dist.sample(&mut rng) as u8)))
        },
    ))
}

/// Growth of block `j` in the block constructions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "p", rename_all = "lowercase")]
pub enum WeightKind {
    /// `w(j) = j`.
    Linear,
    /// `w(j) = j^(1+p)`, `p > 0`.
    Power(f64),
}

impl WeightKind {
    pub fn validate(self) -> Result<Self> {
        match self {
            WeightKind::Power(p) if !(p.is_finite() && p > 0.0) => {
                Err(Error::Domain(format!("power exponent must be positive, got {p}")))
            }
            _ => Ok(self),
        }
    }

    fn exponent(self) -> f64 {
        match self {
            WeightKind::Linear => 1.0,
            WeightKind::Power(p) => 1.0 + p,
        }
    }

    /// `w(j)` when it is an integer, else `None`.
    fn exact(self, j: u64) -> Option<u64> {
        let e = self.exponent();
        if e.fract() != 0.0 || e > 64.0 {
            return None;
        }
        j.checked_pow(e as u32)
    }

    fn real(self, j: u64) -> f64 {
        (j as f64).powf(self.exponent())
    }

    /// `⌊τ · w(j)⌋`.
    pub fn floor_share(self, tau: f64, j: u64) -> u64 {
        match self.exact(j) {
            Some(w) => floor_scaled(tau, w),
            None => (tau * self.real(j)).floor() as u64,
        }
    }

    /// `⌈w(j)⌉` as an integer.
    pub fn ceil_weight(self, j: u64) -> u64 {
        self.exact(j).unwrap_or_else(|| self.real(j).ceil() as u64)
    }
}

impl fmt::Display for WeightKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightKind::Linear => f.write_str("linear"),
            WeightKind::Power(p) => write!(f, "power({p})"),
        }
    }
}

/// Digit-run lengths of each block of a block-structured stream.
#[derive(Debug, Clone, PartialEq)]
pub enum BlockSchedule {
    /// Block `j` holds `⌊τ_i · W(j)⌋` copies of digit `i`, where `W` is `j`
    /// for linear weight and `⌈j^(1+p)⌉` for power weight.
    Constant { tau: FrequencyVector, weight: WeightKind },
    /// Block `j` holds `⌊τ_{ij} · j^(1+p)⌋` copies of digit `i`, with the
    /// triple `(τ_{0j}, τ_{1j}, τ_{2j})` chosen by [`beta_switch`].
    Oscillating { p: f64 },
}

/// Triples used by the oscillating construction when the switch reads 0 and 1.
pub const OSC_TRIPLES: [[f64; 3]; 2] = [[0.4, 0.2, 0.4], [0.3, 0.4, 0.3]];

impl BlockSchedule {
    pub fn alphabet(&self) -> Alphabet {
        match self {
            BlockSchedule::Constant { tau, .. } => tau.alphabet(),
            BlockSchedule::Oscillating { .. } => Alphabet::TERNARY,
        }
    }

    /// Run lengths of block `j >= 1`, one per digit, written into `out`.
    pub fn lengths_into(&self, j: u64, out: &mut Vec<u64>) {
        out.clear();
        match self {
            BlockSchedule::Constant { tau, weight } => {
                let w = weight.ceil_weight(j);
                out.extend(tau.as_slice().iter().map(|&t| floor_scaled(t, w)));
            }
            BlockSchedule::Oscillating { p } => {
                let triple = &OSC_TRIPLES[beta_switch(j).expect("j >= 1") as usize];
                let weight = WeightKind::Power(*p);
                out.extend(triple.iter().map(|&t| weight.floor_share(t, j)));
            }
        }
    }

    pub fn lengths(&self, j: u64) -> Vec<u64> {
        let mut out = Vec::with_capacity(3);
        self.lengths_into(j, &mut out);
        out
    }

    /// Cursor over the concatenated blocks; empty runs are skipped.
    fn cursor(self) -> BlockCursor {
        BlockCursor { schedule: self, block: 0, digit: 0, remaining: 0, lengths: Vec::new() }
    }
}

struct BlockCursor {
    schedule: BlockSchedule,
    block: u64,
    digit: usize,
    remaining: u64,
    lengths: Vec<u64>,
}

impl Iterator for BlockCursor {
    type Item = Digit;

    #[inline]
    fn next(&mut self) -> Option<Digit> {
        while self.remaining == 0 {
            self.digit += 1;
            if self.digit >= self.lengths.len() {
                self.block += 1;
                self.schedule.lengths_into(self.block, &mut self.lengths);
                self.digit = 0;
            }
            self.remaining = self.lengths[self.digit];
        }
        self.remaining -= 1;
        Some(Digit(self.digit as u8))
    }
}

/// The point `x'` whose block `n` is `⌊τ_0 w(n)⌋` zeros, then `⌊τ_1 w(n)⌋`
/// ones, and so on. Its digit frequencies are `τ` and it depends on
/// nothing else.
pub fn canonical_be_point(tau: &FrequencyVector, weight: WeightKind) -> Result<DigitStream> {
    let weight = weight.validate()?;
    let schedule = BlockSchedule::Constant { tau: tau.clone(), weight };
    let label = match weight {
        WeightKind::Linear => format!("canonicalpt({tau})"),
        WeightKind::Power(p) => format!("canonicalpt({tau}, {p})"),
    };
    Ok(DigitStream::new(tau.alphabet(), StreamMeta::declared(tau.clone()), label, move || {
        Box::new(schedule.clone().cursor())
    }))
}

/// Digit `n` (1-based) of `Δ^3_{0…0 1…1 0…0 …}` with runs of lengths
/// `1!, 2!, 3!, …`: 0 inside odd-indexed runs, 1 inside even-indexed runs.
pub fn beta_switch(n: u64) -> Result<u8> {
    if n == 0 {
        return Err(Error::Domain("switch index must be at least 1".into()));
    }
    let n = u128::from(n);
    let (mut run, mut fact, mut cumulative) = (1u128, 1u128, 0u128);
    loop {
        fact *= run;
        cumulative += fact;
        if n <= cumulative {
            return Ok(if run % 2 == 1 { 0 } else { 1 });
        }
        run += 1;
    }
}

/// The switch sequence itself as a ternary stream (digits 0 and 1 only).
pub fn beta_stream() -> DigitStream {
    let meta = StreamMeta { frequencies: Frequencies::NonExistent, mean: None };
    DigitStream::new(Alphabet::TERNARY, meta, "beta", || {
        let runs = (1u64..).scan(1u128, |fact, run| {
            *fact = fact.saturating_mul(u128::from(run));
            Some((Digit(((run + 1) % 2) as u8), *fact))
        });
        Box::new(runs.flat_map(|(d, len)| {
            let len = u64::try_from(len).unwrap_or(u64::MAX);
            std::iter::repeat_n(d, len as usize)
        }))
    })
}

/// Blocks of lengths `⌊τ_{in} n^(1+p)⌋` with the triple switching between
/// `(0.4, 0.2, 0.4)` and `(0.3, 0.4, 0.3)`. The running digit mean tends to
/// 1 while no digit frequency exists.
pub fn oscillating_stream(p: f64) -> Result<DigitStream> {
    WeightKind::Power(p).validate()?;
    let meta = StreamMeta { frequencies: Frequencies::NonExistent, mean: Some(1.0) };
    let schedule = BlockSchedule::Oscillating { p };
    Ok(DigitStream::new(Alphabet::TERNARY, meta, format!("osc({p})"), move || {
        Box::new(schedule.clone().cursor())
    }))
}

/// Block counts `k_n`, `k*_n` and the digit positions `l_n`, `l*_n` where
/// those blocks end, for `n = 1..=n_max`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Checkpoints {
    /// `k_n = 1! + 2! + … + (2n-1)!`
    pub k: Vec<u64>,
    /// `k*_n = 1! + 2! + … + (2n)!`
    pub k_star: Vec<u64>,
    pub l: Vec<u64>,
    pub l_star: Vec<u64>,
}

impl Checkpoints {
    /// All positive positions in increasing order, tagged with their family
    /// and index: `("l", 2)` is `l_2`.
    pub fn positions(&self) -> Vec<(&'static str, usize, u64)> {
        let mut out: Vec<_> = self
            .l
            .iter()
            .enumerate()
            .map(|(i, &n)| ("l", i + 1, n))
            .chain(self.l_star.iter().enumerate().map(|(i, &n)| ("l*", i + 1, n)))
            .filter(|&(_, _, n)| n > 0)
            .collect();
        out.sort_by_key(|&(_, _, n)| n);
        out
    }
}

/// Upper bound on blocks walked by [`checkpoints`].
pub const MAX_CHECKPOINT_BLOCKS: u64 = 100_000_000;

pub fn checkpoints(p: f64, n_max: usize) -> Result<Checkpoints> {
    WeightKind::Power(p).validate()?;
    let mut k = Vec::with_capacity(n_max);
    let mut k_star = Vec::with_capacity(n_max);
    let (mut fact, mut cumulative) = (1u64, 0u64);
    for m in 1..=(2 * n_max as u64) {
        fact = fact.checked_mul(m).ok_or(Error::Overflow("factorial block counts"))?;
        cumulative = cumulative.checked_add(fact).ok_or(Error::Overflow("factorial block counts"))?;
        if m % 2 == 1 {
            k.push(cumulative);
        } else {
            k_star.push(cumulative);
        }
    }
    let Some(&last) = k_star.last() else {
        return Ok(Checkpoints { k, k_star, l: Vec::new(), l_star: Vec::new() });
    };
    // Σ_{j≤K} j^(1+p) ≥ K^(2+p)/(2+p) bounds the final position from below.
    let lower = (last as f64).powf(2.0 + p) / (2.0 + p) * 0.3;
    if last > MAX_CHECKPOINT_BLOCKS || lower >= u64::MAX as f64 {
        return Err(Error::Overflow("checkpoint digit positions"));
    }

    let schedule = BlockSchedule::Oscillating { p };
    let mut lengths = Vec::with_capacity(3);
    let (mut l, mut l_star) = (Vec::with_capacity(n_max), Vec::with_capacity(n_max));
    let mut position = 0u64;
    for j in 1..=last {
        schedule.lengths_into(j, &mut lengths);
        for &len in &lengths {
            position = position.checked_add(len).ok_or(Error::Overflow("checkpoint digit positions"))?;
        }
        if k.get(l.len()) == Some(&j) {
            l.push(position);
        }
        if k_star.get(l_star.len()) == Some(&j) {
            l_star.push(position);
        }
    }
    Ok(Checkpoints { k, k_star, l, l_star })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tau(v: &[f64]) -> FrequencyVector {
        FrequencyVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn uniform_is_reproducible_by_seed() {
        let a = uniform_stream(Alphabet::TERNARY, Seed(9)).prefix(10_000);
        let b = uniform_stream(Alphabet::TERNARY, Seed(9)).prefix(10_000);
        let c = uniform_stream(Alphabet::TERNARY, Seed(10)).prefix(10_000);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn degenerate_iid_is_constant() {
        let s = iid_stream(&tau(&[1.0, 0.0, 0.0]), Seed(3)).unwrap();
        assert_eq!(s.prefix(1000).counts(), vec![1000, 0, 0]);
    }

    #[test]
    fn canonical_point_first_blocks() {
        let s = canonical_be_point(&tau(&[0.5, 0.5, 0.0]), WeightKind::Linear).unwrap();
        assert_eq!(s.prefix(8).values(), vec![0, 1, 0, 1, 0, 0, 1, 1]);
        let s = canonical_be_point(&tau(&[1.0, 0.0, 0.0]), WeightKind::Linear).unwrap();
        assert_eq!(s.prefix(50).counts(), vec![50, 0, 0]);
    }

    #[test]
    fn canonical_point_power_weight() {
        // w(j) = j^2: block 2 has ⌊0.5·4⌋ = 2 of each, block 3 has ⌊0.5·9⌋ = 4.
        let s = canonical_be_point(&tau(&[0.5, 0.5, 0.0]), WeightKind::Power(1.0)).unwrap();
        assert_eq!(s.prefix(12).values(), vec![0, 0, 1, 1, 0, 0, 0, 0, 1, 1, 1, 1]);
        assert!(canonical_be_point(&tau(&[0.5, 0.5, 0.0]), WeightKind::Power(0.0)).is_err());
    }

    #[test]
    fn switch_values() {
        assert_eq!(beta_switch(1).unwrap(), 0);
        assert_eq!((beta_switch(2).unwrap(), beta_switch(3).unwrap()), (1, 1));
        for n in 4..=9 {
            assert_eq!(beta_switch(n).unwrap(), 0);
        }
        assert_eq!(beta_switch(10).unwrap(), 1);
        assert_eq!(beta_switch(33).unwrap(), 1);
        assert_eq!(beta_switch(34).unwrap(), 0);
        assert!(beta_switch(0).is_err());
        // 1! + … + 20! < 2^64 - 1 < 1! + … + 21!
        assert_eq!(beta_switch(u64::MAX).unwrap(), 0);
    }

    #[test]
    fn beta_stream_matches_switch() {
        let prefix = beta_stream().prefix(200);
        for (k, d) in prefix.digits().iter().enumerate() {
            assert_eq!(d.0, beta_switch(k as u64 + 1).unwrap());
        }
    }

    #[test]
    fn oscillating_blocks() {
        let sched = BlockSchedule::Oscillating { p: 1.0 };
        assert_eq!(sched.lengths(1), vec![0, 0, 0]);
        assert_eq!(sched.lengths(2), vec![1, 1, 1]);
        assert_eq!(sched.lengths(3), vec![2, 3, 2]);
        assert_eq!(sched.lengths(4), vec![6, 3, 6]);
        let s = oscillating_stream(1.0).unwrap();
        assert_eq!(s.prefix(10).values(), vec![0, 1, 2, 0, 0, 1, 1, 1, 2, 2]);
        assert!(oscillating_stream(-1.0).is_err());
    }

    #[test]
    fn checkpoint_block_counts() {
        let c = checkpoints(1.0, 3).unwrap();
        assert_eq!(c.k, vec![1, 9, 153]);
        assert_eq!(c.k_star, vec![3, 33, 873]);
        assert_eq!(c.l[0], 0);
        assert_eq!(c.l_star[0], 10);
        assert!(checkpoints(1.0, 12).is_err());
    }
}
