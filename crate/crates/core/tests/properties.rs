use num_bigint::BigUint;
use proptest::prelude::*;

use sadic::dsl::{self, Arg, Number, PipelineExpr, Term, SOURCE_NAMES, STAGE_NAMES};
use sadic::generators::{iid_stream, uniform_stream, Seed};
use sadic::stats::run_stats;
use sadic::transforms::{self, compose, Transform, WindowPermutation};
use sadic::{expand_rational, Alphabet, Digit, DigitStream, FrequencyVector, PeriodicWord, Rational};

fn alphabet() -> impl Strategy<Value = Alphabet> {
    (2u32..=16).prop_map(|s| Alphabet::new(s).unwrap())
}

fn rational_below(max_q: u64) -> impl Strategy<Value = (u64, u64)> {
    (1u64..max_q).prop_flat_map(|q| (0..q, Just(q)))
}

fn rational() -> impl Strategy<Value = (u64, u64)> {
    rational_below(1_000_000)
}

/// `Σ_{k≤n} α_k s^{n-k}`, the first `n` digits read as an integer.
fn leading_integer(digits: &[u8], s: u32) -> BigUint {
    digits.iter().fold(BigUint::from(0u32), |acc, &d| acc * s + d)
}

/// Value of `prefix(period)` as a fraction `num/den`.
fn periodic_value(w: &PeriodicWord) -> (BigUint, BigUint) {
    let s = w.alphabet.radix();
    let vals = |d: &[Digit]| d.iter().map(|d| d.0).collect::<Vec<_>>();
    let p = leading_integer(&vals(&w.prefix), s);
    let r = leading_integer(&vals(&w.period), s);
    let sk = BigUint::from(s).pow(w.prefix.len() as u32);
    let sm1 = BigUint::from(s).pow(w.period.len() as u32) - 1u32;
    (p * &sm1 + r, sk * sm1)
}

fn periodic_word() -> impl Strategy<Value = PeriodicWord> {
    alphabet().prop_flat_map(|a| {
        let digit = 0..a.radix() as u8;
        (Just(a), prop::collection::vec(digit.clone(), 0..6), prop::collection::vec(digit, 1..5))
    })
    .prop_map(|(a, prefix, period)| {
        let d = |v: Vec<u8>| v.into_iter().map(Digit).collect();
        PeriodicWord::new(a, d(prefix), d(period)).unwrap()
    })
}

fn window_permutation() -> impl Strategy<Value = WindowPermutation> {
    (1usize..=6)
        .prop_flat_map(|w| Just((0..w).collect::<Vec<_>>()).prop_shuffle())
        .prop_map(|map| WindowPermutation::new(map).unwrap())
}

fn digits(stream: &DigitStream, n: usize) -> Vec<u8> {
    stream.prefix(n).values()
}

fn apply(f: &Transform, x: &DigitStream) -> DigitStream {
    f.apply(x).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn rational_prefix_sums_are_within_one_ulp((p, q) in rational(), a in alphabet(), n in 1usize..=64) {
        let x = Rational::new(p, q).unwrap();
        let head = digits(&expand_rational(x, a), n);
        // 0 ≤ p/q − Σ α_k s^{-k} < s^{-n}, multiplied through by q·s^n.
        let lhs = BigUint::from(p) * BigUint::from(a.radix()).pow(n as u32);
        let rhs = BigUint::from(q) * leading_integer(&head, a.radix());
        prop_assert!(lhs >= rhs);
        prop_assert!(lhs - rhs < BigUint::from(q));
    }

    #[test]
    fn rational_expansions_never_end_in_max_digit((p, q) in rational_below(10_000), a in alphabet()) {
        let x = Rational::new(p, q).unwrap();
        let form = x.periodic_form(a);
        prop_assert!(!form.has_max_period());
        let len = form.prefix.len() + form.period.len();
        let stream = expand_rational(x, a);
        let head = digits(&stream, len + 64);
        prop_assert!(head[len..].iter().any(|&d| d != a.max_digit().0));
        let (num, den) = periodic_value(&form);
        prop_assert_eq!(num * BigUint::from(q), den * BigUint::from(p));
    }

    #[test]
    fn canonicalize_is_idempotent_and_value_preserving(w in periodic_word()) {
        let Ok(c) = w.canonicalize() else {
            // Only a word equal to 1 has no representation in [0, 1).
            let (num, den) = periodic_value(&w);
            prop_assert_eq!(num, den);
            return Ok(());
        };
        prop_assert_eq!(c.canonicalize().unwrap(), c.clone());
        prop_assert!(!c.has_max_period());
        let (n1, d1) = periodic_value(&w);
        let (n2, d2) = periodic_value(&c);
        prop_assert_eq!(n1 * d2, n2 * d1);
    }

    #[test]
    fn run_stats_matches_a_naive_recount(
        seed in 0..=i64::MAX as u64,
        stage in prop::sample::select(vec!["", " | swap2", " | seven", " | invert", " | rev3 | shift", " | inc(2)"]),
        mut points in prop::collection::btree_set(1u64..=20_000, 1..40),
    ) {
        points.insert(20_000);
        let stream = dsl::build(&format!("uniform(3, {seed}){stage}")).unwrap();
        let checkpoints: Vec<u64> = points.into_iter().collect();
        let trace = run_stats(&stream, &checkpoints).unwrap();
        let all = digits(&stream, 20_000);
        for row in trace.rows() {
            let head = &all[..row.n as usize];
            let mut counts = vec![0u64; 3];
            for &d in head {
                counts[d as usize] += 1;
            }
            prop_assert_eq!(&row.counts, &counts);
            prop_assert_eq!(row.digit_sum, head.iter().map(|&d| u64::from(d)).sum::<u64>());
            prop_assert_eq!(row.digit_sum, row.counts[1] + 2 * row.counts[2]);
            prop_assert!(row.satisfies_mean_bounds());
        }
    }

    #[test]
    fn window_permutations_preserve_counts_at_window_multiples(p in window_permutation(), seed in 0..=i64::MAX as u64) {
        let x = uniform_stream(Alphabet::TERNARY, Seed(seed));
        let w = p.window();
        let y = apply(&Transform::Window(p), &x);
        let checkpoints: Vec<u64> = (1..=10_000 / w as u64).map(|k| k * w as u64).collect();
        let a = run_stats(&x, &checkpoints).unwrap();
        let b = run_stats(&y, &checkpoints).unwrap();
        prop_assert_eq!(a.rows(), b.rows());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn window_permutations_form_a_group(
        f in window_permutation(),
        g in window_permutation(),
        h in window_permutation(),
        seed in 0..=i64::MAX as u64,
    ) {
        let x = uniform_stream(Alphabet::TERNARY, Seed(seed));
        let (f, g, h) = (Transform::Window(f), Transform::Window(g), Transform::Window(h));
        let gf = compose(&g, &f).unwrap();
        prop_assert!(matches!(gf, Transform::Window(_) | Transform::Identity));
        let left = compose(&h, &gf).unwrap();
        let right = compose(&compose(&h, &g).unwrap(), &f).unwrap();
        let n = 10_000;
        prop_assert_eq!(digits(&apply(&left, &x), n), digits(&apply(&right, &x), n));
        prop_assert_eq!(digits(&apply(&left, &x), n), digits(&apply(&h, &apply(&g, &apply(&f, &x))), n));
        let inv = f.inverse().unwrap();
        prop_assert_eq!(compose(&inv, &f).unwrap(), Transform::Identity);
        prop_assert_eq!(digits(&apply(&inv, &apply(&f, &x)), n), digits(&x, n));
    }

    #[test]
    fn pipeline_text_matches_programmatic_composition(
        a in 0..CATALOG.len(),
        b in 0..CATALOG.len(),
        seed in 0..=i64::MAX as u64,
    ) {
        let tau = FrequencyVector::new(vec![0.2, 0.3, 0.5]).unwrap();
        let src = iid_stream(&tau, Seed(seed)).unwrap();
        let (ta, fa) = CATALOG[a];
        let (tb, fb) = CATALOG[b];
        let text = format!("iid((0.2, 0.3, 0.5), {seed}) | {ta} | {tb}");
        let built = dsl::build(&text).unwrap();
        let by_hand = fb().apply(&fa().apply(&src).unwrap()).unwrap();
        prop_assert_eq!(digits(&built, 5_000), digits(&by_hand, 5_000));
    }
}

type Make = fn() -> Transform;

const CATALOG: [(&str, Make); 12] = [
    ("id", transforms::identity),
    ("swap2", transforms::pair_swap),
    ("rev3", transforms::triple_reverse),
    ("shift", transforms::shift),
    ("prepend(1)", || transforms::prepend(Digit(1), Alphabet::TERNARY).unwrap()),
    ("transpose(4)", || transforms::transpose_at(4).unwrap()),
    ("invert", || transforms::inverter(Alphabet::TERNARY)),
    ("inc(1)", || transforms::mod_increment(1, Alphabet::TERNARY)),
    ("inc(-1)", || transforms::mod_increment(-1, Alphabet::TERNARY)),
    ("seven", transforms::seven_replacement),
    ("canonical", || transforms::be_canonicalizer(sadic::generators::WeightKind::Linear).unwrap()),
    ("estimate(500)", || transforms::estimate(500).unwrap()),
];

fn number() -> impl Strategy<Value = Number> {
    prop_oneof![
        any::<i64>().prop_map(Number::Int),
        (-5i64..100).prop_map(Number::Int),
        (0u32..10_000).prop_map(|k| Number::Decimal(f64::from(k) / 1000.0)),
        (any::<f64>()).prop_filter("finite", |x| x.is_finite()).prop_map(Number::Decimal),
    ]
}

fn term(names: &'static [&'static str]) -> impl Strategy<Value = Term> {
    let arg = prop_oneof![
        4 => number().prop_map(Arg::Number),
        1 => prop::collection::vec(number(), 1..4).prop_map(Arg::Tuple),
    ];
    (prop::sample::select(names), prop::collection::vec(arg, 0..4)).prop_map(|(name, args)| Term::new(name, args))
}

fn pipeline() -> impl Strategy<Value = PipelineExpr> {
    (term(SOURCE_NAMES), prop::collection::vec(term(STAGE_NAMES), 0..5))
        .prop_map(|(source, stages)| PipelineExpr { source, stages })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn printing_then_parsing_is_a_fixpoint(e in pipeline()) {
        let text = dsl::roundtrip(&e);
        let parsed = dsl::parse(&text).unwrap();
        prop_assert_eq!(&parsed, &e);
        prop_assert_eq!(dsl::roundtrip(&parsed), text);
    }

    #[test]
    fn parsing_is_total(bytes in prop::collection::vec(any::<u8>(), 0..64)) {
        match dsl::parse_bytes(&bytes) {
            Ok(e) => prop_assert_eq!(dsl::parse(&e.to_string()).unwrap(), e),
            Err(err) => {
                prop_assert!(err.offset <= bytes.len());
                prop_assert!(!err.expected.is_empty());
            }
        }
    }

    #[test]
    fn parsing_is_total_on_token_soup(
        parts in prop::collection::vec(
            prop::sample::select(vec!["uniform", "seven", "(", ")", ",", "|", " ", "3", "-", "0.5", "1.", "((", "x"]),
            0..24,
        )
    ) {
        let text = parts.concat();
        if let Err(err) = dsl::parse(&text) {
            prop_assert!(err.offset <= text.len());
        }
    }
}
