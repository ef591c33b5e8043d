//! Acceptance gate: one PASS/FAIL line per criterion.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use mfps::composition::{compose, d_table, g_shifted_sum, ComposeOptions};
use mfps::multiindex::{enumerate_degree, enumerate_up_to, MultiIndex};
use mfps::outer_seq::{
    cauchy_seq_product, partial_sum_verdict, CoeffSequence, ConvergenceVerdict, VerdictOptions, WitnessKind,
};
use mfps::rdl::{abel_check, counterexample_demo, rdl_verify, RdlStatus, ALTERNATING_ROOT_RULE};
use mfps::series::{factorial, Mode, Scalar, TruncatedSeries};
use num_bigint::BigUint;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        ok,
        detail: detail.into(),
    }
}

fn mi(v: &[u32]) -> MultiIndex {
    MultiIndex::new(v.to_vec()).unwrap()
}

fn rule(t: &str) -> CoeffSequence {
    CoeffSequence::parse_rule(t).unwrap()
}

fn exact_int(v: i64) -> Scalar {
    Scalar::from_i64(v, Mode::Exact)
}

fn random_exact(rng: &mut ChaCha8Rng, q: usize, k: usize, density: f64) -> TruncatedSeries {
    let terms: Vec<(MultiIndex, Scalar)> = enumerate_up_to(q, k)
        .into_iter()
        .filter_map(|c| {
            rng.gen_bool(density)
                .then(|| (c, Scalar::ratio(rng.gen_range(-9..=9), rng.gen_range(1..=5))))
        })
        .collect();
    TruncatedSeries::from_terms(q, k, Mode::Exact, terms).unwrap()
}

fn ring_laws() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut failures = Vec::new();
    let mut checked = 0;
    for q in 1..=3 {
        for k in [3, 6] {
            for i in 0..200 {
                let f = random_exact(&mut rng, q, k, 0.5);
                let g = random_exact(&mut rng, q, k, 0.5);
                let h = random_exact(&mut rng, q, k, 0.5);
                let one = TruncatedSeries::one(q, k, Mode::Exact);
                let zero = TruncatedSeries::zero(q, k, Mode::Exact);
                let fg = f.mul(&g).unwrap();
                let laws = [
                    ("commutativity", fg == g.mul(&f).unwrap()),
                    (
                        "associativity",
                        fg.mul(&h).unwrap() == f.mul(&g.mul(&h).unwrap()).unwrap(),
                    ),
                    (
                        "distributivity",
                        f.mul(&g.add(&h).unwrap()).unwrap() == fg.add(&f.mul(&h).unwrap()).unwrap(),
                    ),
                    ("identity", f.mul(&one).unwrap() == f && f.add(&zero).unwrap() == f),
                    ("annihilation", f.mul(&zero).unwrap() == zero),
                ];
                checked += 1;
                for (name, ok) in laws {
                    if !ok {
                        failures.push(format!("q={q} K={k} sample {i}: {name}"));
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed();
    let fast = elapsed < Duration::from_secs(30);
    outcome(
        failures.is_empty() && fast,
        format!(
            "{checked} triples, {} failures, {:.2?} (target < 30 s) {}",
            failures.len(),
            elapsed,
            failures.join("; ")
        ),
    )
}

fn power_paths() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut bad = Vec::new();
    let mut pairs = 0;
    for i in 0..100 {
        let q = rng.gen_range(1..=3);
        let k = rng.gen_range(0..=6);
        let f = random_exact(&mut rng, q, k, 0.6);
        for n in 0..=6 {
            pairs += 1;
            if f.pow_multinomial(n).unwrap() != f.pow_repeated(n).unwrap() {
                bad.push(format!("sample {i} n={n}"));
            }
        }
    }
    outcome(
        bad.is_empty(),
        format!("{pairs} (series, n) pairs, mismatches: {bad:?}"),
    )
}

// Every v in N^k with sum_i i v_i = k and sum_i v_i = s.
fn v_solutions(k: usize, s: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut stack = vec![(Vec::<u32>::new(), 0usize, 0usize)];
    while let Some((v, deg, parts)) = stack.pop() {
        let i = v.len() + 1;
        if i > k {
            if deg == k && parts == s {
                out.push(v);
            }
            continue;
        }
        let mut m = 0;
        while deg + m * i <= k && parts + m <= s {
            let mut w = v.clone();
            w.push(m as u32);
            stack.push((w, deg + m * i, parts + m));
            m += 1;
        }
    }
    out
}

fn brute_d(f: &TruncatedSeries, k: usize, s: usize) -> TruncatedSeries {
    let (q, kk) = (f.q(), f.max_degree());
    let mut acc = TruncatedSeries::zero(q, kk, Mode::Exact);
    for v in v_solutions(k, s) {
        let mut term = TruncatedSeries::one(q, kk, Mode::Exact);
        let mut denom = BigUint::from(1u32);
        for (i, &vi) in v.iter().enumerate() {
            for _ in 0..vi {
                term = term.mul(&f.block(i + 1).unwrap()).unwrap();
            }
            denom *= factorial(u64::from(vi));
        }
        let w = Scalar::Exact(BigRational::new(1.into(), denom.into()));
        acc = acc.add(&term.scale(&w).unwrap()).unwrap();
    }
    acc
}

fn d_table_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut cells = 0;
    let mut bad = Vec::new();
    for i in 0..40 {
        let q = rng.gen_range(1..=2);
        let k = rng.gen_range(1..=6);
        let f = random_exact(&mut rng, q, k, 0.6);
        let t = d_table(&f, k).unwrap();
        for kk in 1..=k {
            for s in 1..=kk {
                cells += 1;
                let d = t.get(kk, s);
                let degree_ok = d.terms().all(|(c, _)| c.total_degree() == kk);
                if *d != brute_d(&f, kk, s) || !degree_ok {
                    bad.push(format!("sample {i} d[{kk},{s}]"));
                }
            }
        }
    }
    // Single-block inner series.
    let mut single = 0;
    for q in 1..=2 {
        for l in 1..=3 {
            let k = 6;
            let terms: Vec<_> = enumerate_degree(q, l)
                .into_iter()
                .map(|c| (c, Scalar::ratio(rng.gen_range(1..=7), rng.gen_range(1..=4))))
                .chain([(MultiIndex::zero(q), exact_int(3))])
                .collect();
            let f = TruncatedSeries::from_terms(q, k, Mode::Exact, terms).unwrap();
            let fl = f.block(l).unwrap();
            let t = d_table(&f, k).unwrap();
            for m in 1..=k / l {
                single += 1;
                let inv = Scalar::Exact(BigRational::new(1.into(), factorial(m as u64).into()));
                if *t.get(m * l, m) != fl.pow_repeated(m as u32).unwrap().scale(&inv).unwrap() {
                    bad.push(format!("q={q} l={l}: d[ml,m] for m={m}"));
                }
                for s in m + 1..=m * l {
                    if !t.get(m * l, s).is_zero() {
                        bad.push(format!("q={q} l={l}: d[{},{s}] nonzero", m * l));
                    }
                }
            }
        }
    }
    outcome(
        bad.is_empty(),
        format!("{cells} random cells, {single} single-block identities, failures: {bad:?}"),
    )
}

fn binom(n: u64, k: u64) -> BigUint {
    factorial(n) / (factorial(k) * factorial(n - k))
}

fn composition_closed_forms() -> Outcome {
    let opts = ComposeOptions::default();
    let f = TruncatedSeries::from_terms(
        1,
        10,
        Mode::Binary64,
        [(mi(&[0]), Scalar::Float(0.5)), (mi(&[1]), Scalar::Float(1.0))],
    )
    .unwrap();
    let r = compose(&rule("1"), &f, &opts).unwrap();
    let mut worst = 0.0f64;
    let geometric_ok = match &r.result {
        Some(h) => (0..=10u32).all(|k| {
            let d = (h.coefficient(&mi(&[k])).to_f64() - 2f64.powi(k as i32 + 1)).abs();
            worst = worst.max(d);
            d <= 1e-9
        }),
        None => false,
    };
    let f2 = TruncatedSeries::from_terms(
        2,
        8,
        Mode::Exact,
        [(mi(&[1, 0]), exact_int(1)), (mi(&[0, 1]), exact_int(1))],
    )
    .unwrap();
    let r2 = compose(&rule("1"), &f2, &opts).unwrap();
    let words_ok = match &r2.result {
        Some(h) => (0..=8u32).all(|a| {
            (0..=8 - a).all(|b| {
                h.coefficient(&mi(&[a, b])) == Scalar::from_biguint(&binom(u64::from(a + b), u64::from(a)), Mode::Exact)
            })
        }),
        None => false,
    };
    outcome(
        geometric_ok && words_ok,
        format!("2^(k+1) for k<=10: max error {worst:.1e}; C(a+b,a) exact for a+b<=8: {words_ok}"),
    )
}

fn existence_verdicts() -> Outcome {
    let opts = VerdictOptions::default();
    let ones = rule("1");
    let inv_fact = rule("1/fact(n)");
    let e = std::f64::consts::E;
    let mut bad = Vec::new();
    let (mut worst_geo, mut worst_exp) = (0.0f64, 0.0f64);
    for s in 0..=8usize {
        let v = g_shifted_sum(&ones, &Scalar::Float(0.5), s, &opts).unwrap();
        match v.value() {
            Some(x) => {
                let d = (x.to_f64() - 2f64.powi(s as i32 + 1)).abs();
                worst_geo = worst_geo.max(d);
                if d > 1e-9 {
                    bad.push(format!("b0=1/2 s={s} off by {d:e}"));
                }
            }
            None => bad.push(format!("b0=1/2 s={s}: {}", v.kind())),
        }
        let v = g_shifted_sum(&ones, &Scalar::Float(1.0), s, &opts).unwrap();
        if !v.is_diverged() {
            bad.push(format!("b0=1 s={s}: {}", v.kind()));
        }
        let v = g_shifted_sum(&inv_fact, &Scalar::Float(1.0), s, &opts).unwrap();
        let expect = e / (1..=s).map(|i| i as f64).product::<f64>();
        match v.value() {
            Some(x) => {
                let d = (x.to_f64() - expect).abs();
                worst_exp = worst_exp.max(d);
                if d > 1e-9 {
                    bad.push(format!("1/n! s={s} off by {d:e}"));
                }
            }
            None => bad.push(format!("1/n! s={s}: {}", v.kind())),
        }
    }
    outcome(
        bad.is_empty(),
        format!("s<=8: 2^(s+1) max error {worst_geo:.1e}, e/s! max error {worst_exp:.1e}, b0=1 all Diverged; {bad:?}"),
    )
}

fn counterexample() -> Outcome {
    let start = Instant::now();
    let opts = ComposeOptions::default();
    let a = rule(ALTERNATING_ROOT_RULE);
    let unit = TruncatedSeries::one(1, 0, Mode::Binary64);
    let ap = compose(&a, &unit, &opts).unwrap();
    let (in_bound, ap_text) = match &ap.verdicts[0] {
        ConvergenceVerdict::Converged { value, error_bound, .. } => (
            (value.to_f64() - 0.604_899).abs() <= *error_bound,
            format!("A o P = {:.9} +/- {error_bound:.1e}", value.to_f64()),
        ),
        v => (false, format!("A o P {}", v.kind())),
    };
    let aa = compose(&cauchy_seq_product(&a, &a), &unit, &opts).unwrap();
    let aa_diverged =
        matches!(&aa.verdicts[0], ConvergenceVerdict::Diverged(w) if w.kind == WitnessKind::TermsNotVanishing);
    let demo = counterexample_demo(10_000, &opts).unwrap();
    let rhs_fails = matches!(demo.rdl.status, RdlStatus::RhsNotExists { .. });
    let elapsed = start.elapsed();
    outcome(
        in_bound && aa_diverged && demo.lower_bound_holds && rhs_fails && elapsed < Duration::from_secs(10),
        format!(
            "{ap_text}; (AA) o P {}; |c_n| >= 2(n+1)/(n+2) for n<=1e4 (min margin {:.3e}); status {}; {:.2?} (target < 10 s)",
            aa.verdicts[0].kind(),
            demo.min_margin,
            demo.rdl.status.name(),
            elapsed
        ),
    )
}

// Nonnegative outer sequences with their radii.
fn random_nonnegative_outer(rng: &mut ChaCha8Rng, exact: bool) -> (CoeffSequence, f64) {
    let ratios = [(1, 2), (1, 3), (2, 3), (1, 4), (3, 4)];
    let (p, q) = ratios[rng.gen_range(0..ratios.len())];
    match rng.gen_range(0..4) {
        0 => (rule(&format!("({p}/{q})^n")), q as f64 / p as f64),
        1 => (rule("1/fact(n)"), f64::INFINITY),
        2 => (rule(&format!("(n+1)*({p}/{q})^n")), q as f64 / p as f64),
        _ => {
            let len = rng.gen_range(1..=5);
            let coeffs = (0..len)
                .map(|_| {
                    let s = Scalar::ratio(rng.gen_range(0..=6), rng.gen_range(1..=4));
                    if exact {
                        s
                    } else {
                        s.to_mode(Mode::Binary64)
                    }
                })
                .collect();
            (CoeffSequence::list(coeffs), f64::INFINITY)
        }
    }
}

fn rdl_positive_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let opts = ComposeOptions::default();
    let mut bad = Vec::new();
    let mut worst = 0.0f64;
    let mut certified = 0;
    while certified < 50 {
        let (a, ra) = random_nonnegative_outer(&mut rng, false);
        let (b, rb) = random_nonnegative_outer(&mut rng, false);
        let q = rng.gen_range(1..=3);
        let k = rng.gen_range(1..=4);
        let b0 = rng.gen_range(0.0..0.5 * ra.min(rb).min(2.0));
        let terms: Vec<_> = enumerate_up_to(q, k)
            .into_iter()
            .map(|c| {
                let v = if c.is_zero() { b0 } else { rng.gen_range(0.0..1.0) };
                (c, Scalar::Float(v))
            })
            .collect();
        let p = TruncatedSeries::from_terms(q, k, Mode::Binary64, terms).unwrap();
        let r = rdl_verify(&a, &b, &p, &opts).unwrap();
        if r.lhs_a.exists() != Some(true) || r.lhs_b.exists() != Some(true) {
            continue;
        }
        certified += 1;
        match r.status {
            RdlStatus::Holds { max_discrepancy } if max_discrepancy <= 1e-9 => worst = worst.max(max_discrepancy),
            ref s => bad.push(format!("A={a} B={b} q={q} K={k} b0={b0:.3}: {s:?}")),
        }
    }
    let mut exact_bad = Vec::new();
    for i in 0..20 {
        let (a, _) = random_nonnegative_outer(&mut rng, true);
        let (b, _) = random_nonnegative_outer(&mut rng, true);
        let q = rng.gen_range(1..=2);
        let k = rng.gen_range(1..=4);
        let mut p = random_exact(&mut rng, q, k, 0.7);
        p = p.sub(&TruncatedSeries::constant(q, k, p.constant_term())).unwrap();
        let r = rdl_verify(&a, &b, &p, &opts).unwrap();
        let exact = r.rhs.result.as_ref().is_some_and(|h| h.mode() == Mode::Exact);
        if r.status != (RdlStatus::Holds { max_discrepancy: 0.0 }) || !exact {
            exact_bad.push(format!("exact triple {i}: {:?}", r.status));
        }
    }
    outcome(
        bad.is_empty() && exact_bad.is_empty(),
        format!(
            "50 certified nonnegative triples Holds (max discrepancy {worst:.1e}); 20 nonunit exact triples discrepancy 0; {bad:?} {exact_bad:?}"
        ),
    )
}

fn several_variable_instance() -> Outcome {
    let p = TruncatedSeries::from_terms(
        2,
        4,
        Mode::Binary64,
        [
            (mi(&[0, 0]), Scalar::Float(0.5)),
            (mi(&[1, 0]), Scalar::Float(1.0)),
            (mi(&[0, 1]), Scalar::Float(1.0)),
        ],
    )
    .unwrap();
    let r = rdl_verify(&rule("1/fact(n)"), &rule("(1/2)^n"), &p, &ComposeOptions::default()).unwrap();
    match r.status {
        RdlStatus::Holds { max_discrepancy } => outcome(
            max_discrepancy <= 1e-9,
            format!("Holds, max discrepancy {max_discrepancy:.1e}"),
        ),
        s => outcome(false, format!("{s:?}")),
    }
}

fn abel() -> Outcome {
    let h = rule("(-1)^n/(n+1)");
    let r = abel_check(&h, &h, &ComposeOptions::default()).unwrap();
    let ln2 = std::f64::consts::LN_2;
    match (r.product, r.sum_c.value(), r.combined_bound, r.sum_a.value()) {
        (Some(prod), Some(c), Some(bound), Some(a)) => {
            let c = c.to_f64();
            let diff = (prod - c).abs();
            let truth = (ln2 * ln2 - c).abs();
            let a_ok = (a.to_f64() - ln2).abs() <= r.sum_a.error_bound().unwrap();
            outcome(
                diff <= bound && truth <= bound && a_ok,
                format!(
                    "sum a = {:.9}, sum c = {c:.9}; |sum a sum b - sum c| = {diff:.1e}, |ln2^2 - sum c| = {truth:.1e}, combined bound {bound:.1e}",
                    a.to_f64()
                ),
            )
        }
        _ => outcome(
            false,
            format!(
                "precondition failed: {} {} {}",
                r.sum_a.kind(),
                r.sum_b.kind(),
                r.sum_c.kind()
            ),
        ),
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Label {
    Convergent(Option<f64>),
    Divergent,
    BorderlineConvergent,
    BorderlineDivergent,
}

fn verdict_corpus() -> Outcome {
    let zeta_half_alt = 0.604_898_643_421_630_4;
    let e = std::f64::consts::E;
    let corpus: Vec<(&str, Label)> = vec![
        ("(1/2)^n", Label::Convergent(Some(2.0))),
        ("1/fact(n)", Label::Convergent(Some(e))),
        ("(-1)^n/sqrt(n+1)", Label::Convergent(Some(zeta_half_alt))),
        ("(-1)^n/(n+1)", Label::Convergent(Some(std::f64::consts::LN_2))),
        ("n^3/2^n", Label::Convergent(Some(26.0))),
        ("(-2/3)^n", Label::Convergent(Some(0.6))),
        ("(n+1)*(1/3)^n", Label::Convergent(Some(2.25))),
        ("n*(n-1)*(n-2)/6*(9/10)^n", Label::Convergent(Some(7290.0))),
        ("1", Label::Divergent),
        ("n", Label::Divergent),
        ("2^n", Label::Divergent),
        ("(-1)^n", Label::Divergent),
        ("n*(n-1)/2", Label::Divergent),
        ("(-11/10)^n", Label::Divergent),
        ("(1/2)*(-1)^n*(n+1)/(n+2)", Label::Divergent),
        ("1/(n+1)", Label::BorderlineDivergent),
        ("1/(n+1)^2", Label::BorderlineConvergent),
        ("(-1)^n*(1+1/(n+1))", Label::BorderlineDivergent),
    ];
    let opts = VerdictOptions::default();
    let mut misses = Vec::new();
    let mut lines = Vec::new();
    for (text, label) in &corpus {
        let seq = rule(text);
        let v = partial_sum_verdict(|n| seq.coeff_f64(n), &opts).unwrap();
        let ok = match (label, &v) {
            (Label::Convergent(truth), ConvergenceVerdict::Converged { value, error_bound, .. }) => {
                truth.is_none_or(|t| (value.to_f64() - t).abs() <= *error_bound)
            }
            (Label::Divergent, ConvergenceVerdict::Diverged(_)) => true,
            (Label::BorderlineConvergent, v) => !v.is_diverged(),
            (Label::BorderlineDivergent, v) => !v.is_converged(),
            _ => false,
        };
        lines.push(format!("{text}: {}", v.kind()));
        if !ok {
            misses.push(format!("{text}: {v:?}"));
        }
    }
    let convergent = corpus.iter().filter(|(_, l)| matches!(l, Label::Convergent(_))).count();
    let divergent = corpus.iter().filter(|(_, l)| *l == Label::Divergent).count();
    outcome(
        misses.is_empty(),
        format!(
            "{convergent} convergent, {divergent} divergent, {} borderline; misclassified: {misses:?} [{}]",
            corpus.len() - convergent - divergent,
            lines.join(", ")
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("ring laws on random exact series", ring_laws),
        ("multinomial and repeated powers agree", power_paths),
        ("d-table matches brute-force enumeration", d_table_oracle),
        ("composition closed forms", composition_closed_forms),
        ("existence verdicts for shifted sums", existence_verdicts),
        ("alternating square-root counterexample", counterexample),
        ("distributive law on nonnegative inputs", rdl_positive_suite),
        ("two-variable distributive instance", several_variable_instance),
        ("Abel product of alternating harmonic series", abel),
        ("verdict soundness corpus", verdict_corpus),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        if !o.ok {
            failed += 1;
        }
        println!(
            "[{}] criterion {}: {name} -- {}",
            if o.ok { "PASS" } else { "FAIL" },
            i + 1,
            o.detail
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
