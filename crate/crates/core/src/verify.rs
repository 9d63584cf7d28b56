//! The reproduction battery: eleven numbered checks with fixed tolerances,
//! runnable together or one at a time, reported as JSON.
//!
//! ```no_run
//! use sadic::verify::{run, Scale};
//!
//! let report = run(Scale::Small, &[5, 10]);
//! assert!(report.passed);
//! ```

use std::collections::BTreeSet;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::digits::{Alphabet, Digit, Rational};
use crate::dsl::{self, Arg, Number, PipelineExpr, Term, SOURCE_NAMES, STAGE_NAMES};
use crate::freq::{decimal_ratio, FrequencyVector};
use crate::generators::{canonical_be_point, checkpoints, oscillating_stream, uniform_stream, BlockSchedule, Seed, WeightKind};
use crate::stats::{
    be_dimension, cardinality_7k, cardinality_7k1, frequency_verdicts, geometric_checkpoints, power_sum_ratios,
    run_stats, StatsTrace,
};
use crate::stream::{expand_rational, DigitStream};
use crate::transforms::{compose, pair_swap, triple_reverse, Transform, WindowPermutation};

/// Seed for every pseudorandom stream in the battery.
pub const VERIFY_SEED: u64 = 42;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    /// `10^5` digits and `10^4` fuzz inputs.
    Small,
    /// `10^6` digits and `10^5` fuzz inputs.
    Full,
}

impl Scale {
    pub fn digits(self) -> u64 {
        match self {
            Scale::Small => 100_000,
            Scale::Full => 1_000_000,
        }
    }

    pub fn fuzz_inputs(self) -> usize {
        match self {
            Scale::Small => 10_000,
            Scale::Full => 100_000,
        }
    }
}

/// Criterion ids and names, in order.
pub const CRITERIA: [(u32, &str); 11] = [
    (1, "uniform digits are balanced"),
    (2, "seven-replacement frequencies (8/21, 5/21, 8/21)"),
    (3, "cardinalities of 7k and 7k+1 up to n"),
    (4, "canonical point frequencies and block brackets"),
    (5, "dimension formula"),
    (6, "power-sum ratios"),
    (7, "oscillating frequencies with convergent mean"),
    (8, "window permutations: involutions, noncommutativity, count invariance"),
    (9, "finitary mean/frequency inequalities at every checkpoint"),
    (10, "inverter maps mean 0 to mean 2"),
    (11, "pipeline parser robustness and roundtrip"),
];

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed_ms: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub scale: Scale,
    pub seed: u64,
    pub passed: bool,
    pub criteria: Vec<CriterionResult>,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }
}

type Outcome = std::result::Result<String, String>;

/// A trace together with the wall time it took to produce.
type Timed = std::result::Result<(StatsTrace, Duration), String>;

/// Shared experiment traces; criterion 9 reuses those of 1, 2, 4, 7 and 10.
pub struct Battery {
    scale: Scale,
    uniform: OnceLock<Timed>,
    seven: OnceLock<Timed>,
    canonical: OnceLock<Timed>,
    oscillating: OnceLock<Timed>,
    inverter: OnceLock<Timed>,
}

fn timed(stream: std::result::Result<DigitStream, String>, checkpoints: &[u64]) -> Timed {
    let start = Instant::now();
    let trace = run_stats(&stream?, checkpoints).map_err(|e| e.to_string())?;
    Ok((trace, start.elapsed()))
}

fn build(text: &str) -> std::result::Result<DigitStream, String> {
    dsl::build(text).map_err(|e| e.to_string())
}

impl Battery {
    pub fn new(scale: Scale) -> Self {
        Battery {
            scale,
            uniform: OnceLock::new(),
            seven: OnceLock::new(),
            canonical: OnceLock::new(),
            oscillating: OnceLock::new(),
            inverter: OnceLock::new(),
        }
    }

    fn geometric(&self) -> Vec<u64> {
        geometric_checkpoints(self.scale.digits())
    }

    fn uniform(&self) -> &Timed {
        self.uniform.get_or_init(|| timed(Ok(uniform_stream(Alphabet::TERNARY, Seed(VERIFY_SEED))), &self.geometric()))
    }

    fn seven(&self) -> &Timed {
        self.seven.get_or_init(|| timed(build(&format!("uniform(3, {VERIFY_SEED}) | seven")), &self.geometric()))
    }

    /// Checkpoints at every block boundary up to the scale, plus the scale.
    fn canonical_boundaries(&self) -> Vec<(u64, u64)> {
        let schedule = BlockSchedule::Constant { tau: canonical_tau(), weight: WeightKind::Linear };
        let mut out = Vec::new();
        let mut position = 0;
        for m in 1.. {
            position += schedule.lengths(m).iter().sum::<u64>();
            if position > self.scale.digits() {
                break;
            }
            out.push((m, position));
        }
        out
    }

    fn canonical(&self) -> &Timed {
        self.canonical.get_or_init(|| {
            let positions: BTreeSet<u64> = self
                .canonical_boundaries()
                .into_iter()
                .map(|(_, n)| n)
                .chain(self.geometric())
                .filter(|&n| n > 0)
                .collect();
            let stream = canonical_be_point(&canonical_tau(), WeightKind::Linear).map_err(|e| e.to_string());
            timed(stream, &positions.into_iter().collect::<Vec<_>>())
        })
    }

    fn oscillating(&self) -> &Timed {
        self.oscillating.get_or_init(|| {
            let c = checkpoints(1.0, 3).map_err(|e| e.to_string())?;
            let positions: Vec<u64> = c.positions().into_iter().map(|(_, _, n)| n).collect();
            timed(oscillating_stream(1.0).map_err(|e| e.to_string()), &positions)
        })
    }

    fn inverter(&self) -> &Timed {
        self.inverter.get_or_init(|| timed(build("const(0) | invert"), &self.geometric()))
    }

    pub fn run_criterion(&self, id: u32) -> Option<CriterionResult> {
        let &(_, name) = CRITERIA.iter().find(|(i, _)| *i == id)?;
        let start = Instant::now();
        let outcome = match id {
            1 => self.c1_uniform(),
            2 => self.c2_seven(),
            3 => c3_cardinalities(),
            4 => self.c4_canonical(),
            5 => c5_dimension(),
            6 => c6_power_sums(),
            7 => self.c7_oscillation(),
            8 => c8_group(),
            9 => self.c9_mean_bounds(),
            10 => self.c10_inverter(),
            11 => c11_dsl(self.scale.fuzz_inputs()),
            _ => unreachable!("ids come from CRITERIA"),
        };
        let (passed, detail) = match outcome {
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        Some(CriterionResult { id, name, passed, detail, elapsed_ms: start.elapsed().as_millis() as u64 })
    }

    fn c1_uniform(&self) -> Outcome {
        let (trace, elapsed) = self.uniform().clone()?;
        let last = trace.last();
        let v = last.frequencies();
        let r = last.mean();
        let detail = format!("n = {}, v = {v:?}, r = {r}, {} ms", last.n, elapsed.as_millis());
        let ok = v.iter().all(|x| (x - 1.0 / 3.0).abs() < 0.005) && (r - 1.0).abs() < 0.01;
        if !ok {
            return Err(detail);
        }
        if elapsed >= Duration::from_secs(1) {
            return Err(format!("too slow: {detail}"));
        }
        Ok(detail)
    }

    fn c2_seven(&self) -> Outcome {
        let (trace, _) = self.seven().clone()?;
        let last = trace.last();
        let v = last.frequencies();
        let r = last.mean();
        let target = [8.0 / 21.0, 5.0 / 21.0, 8.0 / 21.0];
        let detail = format!("n = {}, v = {v:?}, r = {r}", last.n);
        let ok = v.iter().zip(target).all(|(x, t)| (x - t).abs() < 0.01) && (r - 1.0).abs() < 0.01;
        if ok {
            Ok(detail)
        } else {
            Err(detail)
        }
    }

    fn c4_canonical(&self) -> Outcome {
        let (trace, _) = self.canonical().clone()?;
        let tau = canonical_tau();
        let n = self.scale.digits();
        let last = trace.rows().iter().rfind(|row| row.n <= n).ok_or("empty trace")?;
        let v = last.frequencies();
        let r = last.mean();
        let detail = format!("n = {}, v = {v:?}, r = {r}", last.n);
        let close = v.iter().zip(tau.as_slice()).all(|(x, t)| (x - t).abs() < 0.02) && (r - 1.3).abs() < 0.02;
        if !close {
            return Err(detail);
        }

        let ratios: Vec<(i128, i128)> = tau
            .as_slice()
            .iter()
            .map(|&t| decimal_ratio(t).map(|(a, b)| (a as i128, b as i128)).ok_or("frequency not decimal"))
            .collect::<std::result::Result<_, _>>()?;
        let boundaries = self.canonical_boundaries();
        for &(m, position) in &boundaries {
            let counts = match position {
                0 => vec![0; ratios.len()],
                _ => trace.rows().iter().find(|row| row.n == position).ok_or("missing boundary row")?.counts.clone(),
            };
            let (m, tri) = (m as i128, (m * (m + 1) / 2) as i128);
            for (i, &(num, den)) in ratios.iter().enumerate() {
                let count = counts[i] as i128 * den;
                let upper = num * tri;
                let lower = upper - m * den;
                if !(lower <= count && count <= upper) {
                    return Err(format!("bracket fails for digit {i} after block {m} (position {position})"));
                }
            }
        }
        Ok(format!("{detail}, brackets exact at {} block boundaries", boundaries.len()))
    }

    fn c7_oscillation(&self) -> Outcome {
        let (trace, elapsed) = self.oscillating().clone()?;
        let c = checkpoints(1.0, 3).map_err(|e| e.to_string())?;
        let v0_at = |n: u64| trace.rows().iter().find(|row| row.n == n).map(|row| row.frequency(0));
        let mut separations = Vec::new();
        for (&l, &l_star) in c.l.iter().zip(&c.l_star) {
            if let (Some(a), Some(b)) = (v0_at(l), v0_at(l_star)) {
                separations.push(a - b);
            }
        }
        let separation = separations.iter().copied().fold(f64::INFINITY, f64::min);
        let v0 = frequency_verdicts(&trace, 0.05).map_err(|e| e.to_string())?[0];
        let worst_r = trace.means().iter().map(|r| (r - 1.0).abs()).fold(0.0, f64::max);
        let detail = format!(
            "{} checkpoints up to n = {}, v0 separation = {separation:.5}, v0 spread = {:.5}, max |r - 1| = {worst_r}, {} ms",
            trace.rows().len(),
            trace.last().n,
            v0.spread(),
            elapsed.as_millis()
        );
        let ok = !separations.is_empty() && separation >= 0.05 && !v0.converged && worst_r < 0.03;
        if !ok {
            return Err(detail);
        }
        if elapsed >= Duration::from_secs(30) {
            return Err(format!("too slow: {detail}"));
        }
        Ok(detail)
    }

    fn c9_mean_bounds(&self) -> Outcome {
        let experiments = [
            ("uniform", self.uniform()),
            ("seven", self.seven()),
            ("canonical", self.canonical()),
            ("oscillating", self.oscillating()),
            ("inverter", self.inverter()),
        ];
        let mut rows = 0;
        for (name, timed) in experiments {
            let (trace, _) = timed.as_ref().map_err(|e| format!("{name}: {e}"))?;
            for row in trace.rows() {
                if !(row.is_consistent() && row.satisfies_mean_bounds()) {
                    return Err(format!("{name}: fails at n = {}", row.n));
                }
            }
            rows += trace.rows().len();
        }
        Ok(format!("{rows} checkpoints across 5 experiments"))
    }

    fn c10_inverter(&self) -> Outcome {
        let (trace, _) = self.inverter().clone()?;
        if let Some(row) = trace.rows().iter().find(|row| row.digit_sum != 2 * row.n) {
            return Err(format!("r = {} at n = {}", row.mean(), row.n));
        }
        let input = run_stats(&build("const(0)")?, &self.geometric()).map_err(|e| e.to_string())?;
        if let Some(row) = input.rows().iter().find(|row| row.digit_sum != 0) {
            return Err(format!("input r = {} at n = {}", row.mean(), row.n));
        }
        Ok(format!("r = 2 at all {} checkpoints, input r = 0", trace.rows().len()))
    }
}

fn canonical_tau() -> FrequencyVector {
    FrequencyVector::new(vec![0.2, 0.3, 0.5]).expect("valid frequencies")
}

fn c3_cardinalities() -> Outcome {
    for n in 1..=10_000u64 {
        let multiples = (1..=n).filter(|m| m % 7 == 0).count() as u64;
        let shifted = (1..=n).filter(|m| *m >= 8 && m % 7 == 1).count() as u64;
        if cardinality_7k(n) != multiples || cardinality_7k1(n) != shifted {
            return Err(format!("mismatch at n = {n}"));
        }
    }
    Ok("exact for n = 1..=10000".into())
}

fn c5_dimension() -> Outcome {
    let t = Alphabet::TERNARY;
    let uniform = be_dimension(&FrequencyVector::uniform(t), t).map_err(|e| e.to_string())?;
    let point = be_dimension(&FrequencyVector::point(t, Digit(0)), t).map_err(|e| e.to_string())?;
    let mixed = be_dimension(&canonical_tau(), t).map_err(|e| e.to_string())?;
    let reference = -(0.2f64.powf(0.2) * 0.3f64.powf(0.3) * 0.5f64.powf(0.5)).log(3.0);
    let detail = format!("uniform {uniform}, point {point}, (0.2, 0.3, 0.5) {mixed} vs {reference}");
    if (uniform - 1.0).abs() < 1e-12 && point == 0.0 && (mixed - reference).abs() < 1e-10 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c6_power_sums() -> Outcome {
    let mut detail = Vec::new();
    let mut ok = true;
    for alpha in [0.5, 1.0, 2.0] {
        let (r1, r2) = power_sum_ratios(alpha, 100_000).map_err(|e| e.to_string())?;
        ok &= r1 < 1e-4 * (2.0 + alpha) && (r2 - (2.0 + alpha)).abs() < 0.01 * (2.0 + alpha);
        detail.push(format!("alpha {alpha}: ({r1:.3e}, {r2:.6})"));
    }
    let detail = detail.join(", ");
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Counts of the first `n` digits at every multiple of `window`.
fn window_counts(stream: &DigitStream, window: usize, n: usize) -> Vec<Vec<u64>> {
    let mut counts = vec![0u64; stream.alphabet().len()];
    let mut out = Vec::new();
    for (k, d) in stream.cursor().take(n).enumerate() {
        counts[d.index()] += 1;
        if (k + 1) % window == 0 {
            out.push(counts.clone());
        }
    }
    out
}

fn c8_group() -> Outcome {
    const N: usize = 10_000;
    let t = Alphabet::TERNARY;
    let apply = |f: &Transform, s: &DigitStream| f.apply(s).map_err(|e| e.to_string());
    let sources: Vec<DigitStream> = (0..4).map(|k| uniform_stream(t, Seed(VERIFY_SEED + k))).collect();

    for f in [pair_swap(), triple_reverse()] {
        for x in &sources {
            if apply(&f, &apply(&f, x)?)?.prefix(N) != x.prefix(N) {
                return Err(format!("{} is not an involution on {}", f.name(), x.label()));
            }
        }
    }

    let f1 = pair_swap();
    let f2 = triple_reverse();
    let f2_f1 = compose(&f2, &f1).map_err(|e| e.to_string())?;
    let f1_f2 = compose(&f1, &f2).map_err(|e| e.to_string())?;
    // 0.(012) in base 3
    let witness = expand_rational(Rational::new(5, 26).map_err(|e| e.to_string())?, t);
    let a = apply(&f2_f1, &witness)?.prefix(6).values();
    let b = apply(&f1_f2, &witness)?.prefix(6).values();
    if a == b {
        return Err(format!("compositions agree on the witness: {a:?}"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(VERIFY_SEED);
    let mut windows = vec![f1.clone(), f2.clone(), f2_f1.clone(), f1_f2.clone()];
    for w in 2..=8usize {
        let mut map: Vec<usize> = (0..w).collect();
        for i in (1..w).rev() {
            map.swap(i, rng.gen_range(0..=i));
        }
        windows.push(Transform::Window(WindowPermutation::new(map).map_err(|e| e.to_string())?));
    }
    for f in &windows {
        let Transform::Window(p) = f else {
            return Err(format!("{f} is not a window permutation"));
        };
        for x in &sources {
            if window_counts(&apply(f, x)?, p.window(), N) != window_counts(x, p.window(), N) {
                return Err(format!("{f} changes counts on {}", x.label()));
            }
        }
    }
    Ok(format!(
        "involutions exact; witness (012)(012): {a:?} vs {b:?}; {} window permutations count-invariant",
        windows.len()
    ))
}

const FUZZ_VOCABULARY: &[&str] = &[
    "uniform", "iid", "const", "osc", "seven", "swap2", "rev3", "shift", "canonical", "x", "_", "(", "((", ")", ",",
    "|", " ", "\t", "0", "3", "42", "-", "-1", "0.5", "1.", ".", "99999999999999999999", "é", "\u{0}",
];

fn fuzz_input(rng: &mut ChaCha8Rng) -> Vec<u8> {
    let len = rng.gen_range(0..24);
    if rng.gen_bool(0.3) {
        (0..len * 2).map(|_| rng.gen()).collect()
    } else {
        let mut out = Vec::new();
        for _ in 0..len {
            out.extend_from_slice(FUZZ_VOCABULARY[rng.gen_range(0..FUZZ_VOCABULARY.len())].as_bytes());
        }
        out
    }
}

fn random_number(rng: &mut ChaCha8Rng) -> Number {
    match rng.gen_range(0..4) {
        0 => Number::Int(rng.gen_range(-5..100)),
        1 => Number::Int(rng.gen()),
        2 => Number::Decimal(rng.gen_range(0..1000) as f64 / 1000.0),
        _ => Number::Decimal(rng.gen::<f64>() * 10f64.powi(rng.gen_range(-8..8))),
    }
}

fn random_term(rng: &mut ChaCha8Rng, names: &[&str]) -> Term {
    let name = names[rng.gen_range(0..names.len())];
    let args = (0..rng.gen_range(0..4))
        .map(|_| {
            if rng.gen_bool(0.2) {
                Arg::Tuple((0..rng.gen_range(1..5)).map(|_| random_number(rng)).collect())
            } else {
                Arg::Number(random_number(rng))
            }
        })
        .collect();
    Term::new(name, args)
}

/// A pseudorandom, syntactically valid pipeline.
pub fn random_pipeline(rng: &mut ChaCha8Rng) -> PipelineExpr {
    let source = random_term(rng, SOURCE_NAMES);
    let stages = (0..rng.gen_range(0..6)).map(|_| random_term(rng, STAGE_NAMES)).collect();
    PipelineExpr { source, stages }
}

fn c11_dsl(inputs: usize) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(VERIFY_SEED);
    let (mut accepted, mut rejected) = (0, 0);
    for _ in 0..inputs {
        let bytes = fuzz_input(&mut rng);
        let result = std::panic::catch_unwind(|| dsl::parse_bytes(&bytes))
            .map_err(|_| format!("parser panicked on {bytes:?}"))?;
        match result {
            Ok(expr) => {
                accepted += 1;
                if dsl::parse(&expr.to_string()).as_ref() != Ok(&expr) {
                    return Err(format!("accepted {bytes:?} but its printed form does not reparse"));
                }
            }
            Err(e) => {
                rejected += 1;
                if e.offset > bytes.len() || e.expected.is_empty() || e.found.is_empty() {
                    return Err(format!("malformed error {e:?} for {bytes:?}"));
                }
            }
        }
    }
    const CORPUS: usize = 1_000;
    for _ in 0..CORPUS {
        let expr = random_pipeline(&mut rng);
        let text = expr.to_string();
        let reparsed = dsl::parse(&text).map_err(|e| format!("{text:?}: {e}"))?;
        if reparsed != expr || reparsed.to_string() != text {
            return Err(format!("roundtrip changes {text:?}"));
        }
    }
    Ok(format!("{inputs} fuzz inputs ({accepted} accepted, {rejected} rejected), {CORPUS} pipelines roundtrip"))
}

/// Runs the listed criteria (all of them when `ids` is empty) and reports
/// them sorted by id. The timed criteria 1 and 7 run alone first; the rest
/// run on parallel threads.
pub fn run(scale: Scale, ids: &[u32]) -> Report {
    let battery = Battery::new(scale);
    let selected: Vec<u32> =
        CRITERIA.iter().map(|&(id, _)| id).filter(|id| ids.is_empty() || ids.contains(id)).collect();
    let (timed_ids, rest): (Vec<u32>, Vec<u32>) = selected.iter().partition(|&&id| id == 1 || id == 7);
    let mut results: Vec<CriterionResult> = timed_ids.iter().filter_map(|&id| battery.run_criterion(id)).collect();
    std::thread::scope(|scope| {
        let handles: Vec<_> = rest.iter().map(|&id| scope.spawn({
            let battery = &battery;
            move || battery.run_criterion(id)
        })).collect();
        for handle in handles {
            results.extend(handle.join().expect("criterion thread panicked"));
        }
    });
    results.sort_by_key(|r| r.id);
    Report { scale, seed: VERIFY_SEED, passed: results.iter().all(|r| r.passed), criteria: results }
}
