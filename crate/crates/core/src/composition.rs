//! Composition `h = g o f` of a one-variable outer series `g` with a
//! truncated q-variable inner series `f`.
//!
//! Write `b0 = f_0` and split `f = b0 + f[1] + f[2] + ...` by degree. The
//! degree-`k` part of `f^n` collects the terms of the block expansion with
//! `s` nonconstant factors, `n! / (n - s)! * b0^{n-s} * d_{k,s}`, where
//!
//! ```text
//! d_{k,s} = sum over partitions v of k into s parts of
//!           f[1]^{v_1} ... f[k]^{v_k} / (v_1! ... v_k!).
//! ```
//!
//! Summing over `n` and using `n! / (n - s)! = s! C(n, s)` regroups `h` as
//!
//! ```text
//! h_0 = G_0,   h[k] = sum_{s=1}^{k} s! G_s d_{k,s},
//! G_s = sum_{n >= s} C(n, s) g_n b0^{n-s}.
//! ```
//!
//! The composition exists iff every `G_s` converges; a truncated computation
//! can only check `s <= K` unless a radius argument covers all `s`.

use num_bigint::BigUint;
use num_rational::BigRational;
use serde::Serialize;
use thiserror::Error;

use crate::multiindex::enumerate_partitions;
use crate::outer_seq::{
    partial_sum_verdict, CoeffSequence, ConvergenceVerdict, DivergenceWitness, InconclusiveDiagnostics, Regime,
    SeqError, VerdictOptions, WitnessKind,
};
use crate::series::power::multiplicity_factorials;
use crate::series::{factorial, BlockPowers, Mode, Scalar, SeriesError, TruncatedSeries};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ComposeError {
    #[error(transparent)]
    Sequence(#[from] SeqError),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComposeOptions {
    pub verdict: VerdictOptions,
    /// Depth `d` of the direct partial sum `sum_{n <= d} g_n f^n` used as a
    /// cross-check.
    pub check_depth: usize,
    pub tolerance_consistency: f64,
}

impl Default for ComposeOptions {
    fn default() -> Self {
        Self {
            verdict: VerdictOptions::default(),
            check_depth: 512,
            tolerance_consistency: 1e-6,
        }
    }
}

/// The structural series `d_{k,s}` for `1 <= s <= k <= K`.
#[derive(Debug, Clone)]
pub struct DTable {
    cells: Vec<Vec<TruncatedSeries>>,
    zero: TruncatedSeries,
}

impl DTable {
    pub fn max_degree(&self) -> usize {
        self.cells.len() - 1
    }

    /// `d_{k,s}`; θ outside `1 <= s <= k <= K`.
    pub fn get(&self, k: usize, s: usize) -> &TruncatedSeries {
        if s == 0 || s > k {
            return &self.zero;
        }
        self.cells.get(k).and_then(|row| row.get(s)).unwrap_or(&self.zero)
    }
}

/// Builds `d_{k,s}` for `1 <= s <= k <= max_degree` from the blocks of `f`.
pub fn d_table(f: &TruncatedSeries, max_degree: usize) -> Result<DTable, SeriesError> {
    if max_degree > f.max_degree() {
        return Err(SeriesError::BlockOutOfRange {
            k: max_degree,
            max: f.max_degree(),
        });
    }
    let f = f.truncated(max_degree);
    let (q, mode) = (f.q(), f.mode());
    let zero = TruncatedSeries::zero(q, max_degree, mode);
    let mut powers = BlockPowers::new(&f);
    let mut cells = vec![vec![zero.clone()]];
    for k in 1..=max_degree {
        let mut row = vec![zero.clone()];
        for s in 1..=k {
            let mut cell = zero.clone();
            for v in enumerate_partitions(k, s) {
                let prod = powers.partition_product(&v)?;
                if prod.is_zero() {
                    continue;
                }
                let w = reciprocal(&multiplicity_factorials(&v), mode);
                cell = cell.add(&prod.scale(&w)?)?;
            }
            row.push(cell);
        }
        cells.push(row);
    }
    Ok(DTable { cells, zero })
}

fn reciprocal(n: &BigUint, mode: Mode) -> Scalar {
    let r = BigRational::new(1.into(), n.clone().into());
    Scalar::Exact(r).to_mode(mode)
}

fn binom_big(n: u64, s: usize) -> BigUint {
    let mut c = BigUint::from(1u32);
    for i in 1..=s as u64 {
        c = c * (n - s as u64 + i) / i;
    }
    c
}

/// `C(n, s)` in binary64, built so every intermediate is an integer
/// `C(n - s + i, i)`.
fn binom_f64(n: u64, s: usize) -> f64 {
    let mut c = 1.0f64;
    for i in 1..=s as u64 {
        c = c * (n - s as u64 + i) as f64 / i as f64;
    }
    c
}

/// Verdict for `G_s = sum_{n >= s} C(n, s) g_n b0^{n-s}`.
///
/// Paths, in order: `b0 = 0` gives `g_s` exactly; a sequence with finitely
/// many nonzero terms is summed directly (exactly when `g` and `b0` allow);
/// a radius hint `R` with `|b0| < R` certifies existence and partial sums
/// supply the value; `|b0| > R` is divergent; everything else goes to the
/// numeric verdict.
pub fn g_shifted_sum(
    g: &CoeffSequence,
    b0: &Scalar,
    s: usize,
    opts: &VerdictOptions,
) -> Result<ConvergenceVerdict, SeqError> {
    let mode = b0.mode();
    if b0.is_zero() {
        return Ok(ConvergenceVerdict::exact(g.coeff_at(s as u64, mode)?));
    }
    if let Some(len) = g.finite_len() {
        return finite_shifted_sum(g, b0, s, len);
    }
    let b = b0.to_f64();
    let hint = g.radius_hint();
    if let Some(h) = hint {
        if b.abs() > h.radius {
            return Ok(ConvergenceVerdict::Diverged(DivergenceWitness {
                kind: WitnessKind::OutsideRadius,
                first_index: s as u64,
                last_index: s as u64,
                magnitude: b.abs(),
                note: format!("|b0| = {} exceeds the radius of convergence {}", b.abs(), h.radius),
            }));
        }
    }
    let numeric = numeric_shifted_sum(g, b, s, opts)?;
    match hint {
        Some(h) if b.abs() < h.radius => Ok(match numeric {
            ConvergenceVerdict::Inconclusive(d) => ConvergenceVerdict::Converged {
                value: Scalar::Float(d.last_partial_sum),
                error_bound: f64::INFINITY,
                regime: Regime::Analytic,
                terms_used: d.terms_used,
            },
            // Inside the radius the terms tend to zero, so a divergence
            // witness here can only be the overflow guard tripping on a
            // large intermediate hump.
            ConvergenceVerdict::Diverged(w) => ConvergenceVerdict::Inconclusive(InconclusiveDiagnostics {
                terms_used: w.last_index + 1,
                last_partial_sum: f64::NAN,
                oscillation: f64::NAN,
                last_term: w.magnitude,
            }),
            v => v,
        }),
        _ => Ok(numeric),
    }
}

fn finite_shifted_sum(g: &CoeffSequence, b0: &Scalar, s: usize, len: usize) -> Result<ConvergenceVerdict, SeqError> {
    let exact = b0.mode() == Mode::Exact && g.supports_exact();
    let mode = if exact { Mode::Exact } else { Mode::Binary64 };
    let b0 = b0.to_mode(mode);
    let mut acc = Scalar::zero(mode);
    let mut mass = 0.0f64;
    for n in s..len.max(s) {
        let gn = g.coeff_at(n as u64, mode)?.to_mode(mode);
        if gn.is_zero() {
            continue;
        }
        let term = &(&Scalar::from_biguint(&binom_big(n as u64, s), mode) * &gn) * &b0.pow((n - s) as u32);
        mass += term.abs_f64();
        acc = &acc + &term;
    }
    if !acc.is_finite() {
        // A finite sum exists; binary64 just cannot represent it.
        return Ok(ConvergenceVerdict::Inconclusive(InconclusiveDiagnostics {
            terms_used: len.saturating_sub(s) as u64,
            last_partial_sum: acc.to_f64(),
            oscillation: f64::NAN,
            last_term: f64::NAN,
        }));
    }
    let bound = if exact {
        0.0
    } else {
        4.0 * f64::EPSILON * mass * (len.saturating_sub(s) as f64 + 1.0)
    };
    Ok(ConvergenceVerdict::Converged {
        value: acc,
        error_bound: bound,
        regime: Regime::Exact,
        terms_used: len.saturating_sub(s) as u64,
    })
}

fn numeric_shifted_sum(
    g: &CoeffSequence,
    b: f64,
    s: usize,
    opts: &VerdictOptions,
) -> Result<ConvergenceVerdict, SeqError> {
    let mut opts = *opts;
    if g.is_product() {
        opts.n_max = opts.n_max.min(opts.max_product_terms);
    }
    let mut cursor = g.cursor();
    partial_sum_verdict(
        |m| {
            let n = s as u64 + m;
            let gn = match cursor.get(n) {
                Ok(v) => v,
                // Overflowing coefficients feed the overflow witness.
                Err(SeqError::NonFinite { .. }) => return Ok(f64::INFINITY),
                Err(e) => return Err(e),
            };
            if gn == 0.0 {
                return Ok(0.0);
            }
            let m = i32::try_from(m).unwrap_or(i32::MAX);
            Ok(binom_f64(n, s) * gn * b.powi(m))
        },
        &opts,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpecialCase {
    /// `f = b I` within the truncation; only `sum g_n b^n` matters.
    ConstantInner,
    /// `b0 = 0`; every coefficient is a finite sum.
    NonunitInner,
}

/// How far the existence verdicts reach.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExistenceScope {
    /// Only `G_0 .. G_K` were examined.
    WithinTruncation,
    /// The argument covers every `s` (nonunit inner, finitely many outer
    /// terms, or `|b0|` inside the radius of convergence).
    AllDegrees,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompositionReport {
    pub q: usize,
    pub max_degree: usize,
    pub b0: Scalar,
    pub special_case: Option<SpecialCase>,
    pub scope: ExistenceScope,
    /// `G_s` for `s = 0..=K`; a single entry in the constant-inner case.
    pub verdicts: Vec<ConvergenceVerdict>,
    pub result: Option<TruncatedSeries>,
    /// Coefficientwise bound on `|result - h|` propagated from the verdict
    /// error bounds; absent when some bound is infinite.
    pub coefficient_bounds: Option<TruncatedSeries>,
    pub cross_check_residual: Option<f64>,
}

impl CompositionReport {
    /// `Some(true)` when every verdict converged, `Some(false)` on any
    /// divergence, `None` otherwise.
    pub fn exists(&self) -> Option<bool> {
        if self.verdicts.iter().any(ConvergenceVerdict::is_diverged) {
            Some(false)
        } else if self.verdicts.iter().all(ConvergenceVerdict::is_converged) {
            Some(true)
        } else {
            None
        }
    }

    /// First `s` whose verdict is not `Converged`, preferring divergent ones.
    pub fn offending(&self) -> Option<usize> {
        self.verdicts
            .iter()
            .position(ConvergenceVerdict::is_diverged)
            .or_else(|| self.verdicts.iter().position(|v| !v.is_converged()))
    }
}

/// Computes `g o f` to the truncation of `f`.
pub fn compose(
    g: &CoeffSequence,
    f: &TruncatedSeries,
    opts: &ComposeOptions,
) -> Result<CompositionReport, ComposeError> {
    build_report(g, f, opts, true)
}

/// Existence verdicts for `g o f` without assembling the result.
pub fn existence_check(
    g: &CoeffSequence,
    f: &TruncatedSeries,
    opts: &ComposeOptions,
) -> Result<CompositionReport, ComposeError> {
    build_report(g, f, opts, false)
}

fn build_report(
    g: &CoeffSequence,
    f: &TruncatedSeries,
    opts: &ComposeOptions,
    assemble: bool,
) -> Result<CompositionReport, ComposeError> {
    let (q, k_max) = (f.q(), f.max_degree());
    let b0 = f.constant_term();
    let constant = f.is_constant();
    let special_case = if constant {
        Some(SpecialCase::ConstantInner)
    } else if b0.is_zero() {
        Some(SpecialCase::NonunitInner)
    } else {
        None
    };
    let inside_radius = g.radius_hint().is_some_and(|h| b0.abs_f64() < h.radius);
    let scope = if constant {
        ExistenceScope::WithinTruncation
    } else if b0.is_zero() || g.finite_len().is_some() || inside_radius {
        ExistenceScope::AllDegrees
    } else {
        ExistenceScope::WithinTruncation
    };
    let s_max = if constant { 0 } else { k_max };
    let verdicts = (0..=s_max)
        .map(|s| g_shifted_sum(g, &b0, s, &opts.verdict))
        .collect::<Result<Vec<_>, _>>()?;
    let mut report = CompositionReport {
        q,
        max_degree: k_max,
        b0,
        special_case,
        scope,
        verdicts,
        result: None,
        coefficient_bounds: None,
        cross_check_residual: None,
    };
    if !assemble || report.exists() != Some(true) {
        return Ok(report);
    }

    let values: Vec<&Scalar> = report.verdicts.iter().filter_map(ConvergenceVerdict::value).collect();
    let exact = f.mode() == Mode::Exact && values.iter().all(|v| v.mode() == Mode::Exact);
    let mode = if exact { Mode::Exact } else { Mode::Binary64 };
    let deltas: Vec<f64> = report
        .verdicts
        .iter()
        .filter_map(ConvergenceVerdict::error_bound)
        .collect();
    let mut bounds = deltas
        .iter()
        .all(|d| d.is_finite())
        .then(|| TruncatedSeries::constant(q, k_max, Scalar::Float(deltas[0])));
    let mut h = TruncatedSeries::constant(q, k_max, values[0].to_mode(mode));
    if !constant {
        let table = d_table(f, k_max)?;
        for k in 1..=k_max {
            for (s, g_s) in values.iter().enumerate().take(k + 1).skip(1) {
                let d = table.get(k, s);
                if d.is_zero() || g_s.is_zero() {
                    continue;
                }
                let coef = &Scalar::from_biguint(&factorial(s as u64), mode) * &g_s.to_mode(mode);
                h = h.add(&d.to_mode(mode).scale(&coef)?)?;
                if let Some(e) = bounds.as_mut() {
                    if deltas[s] > 0.0 {
                        let fact = Scalar::from_biguint(&factorial(s as u64), Mode::Binary64).to_f64();
                        let w = Scalar::float(fact * deltas[s]).map_err(SeriesError::from)?;
                        *e = e.add(&abs_series(d).scale(&w)?)?;
                    }
                }
            }
        }
    }
    report.cross_check_residual = direct_partial_sum(g, f, opts.check_depth).and_then(|direct| {
        h.to_mode(Mode::Binary64)
            .max_abs_diff(&direct)
            .ok()
            .filter(|r| r.is_finite())
    });
    report.result = Some(h);
    report.coefficient_bounds = bounds;
    Ok(report)
}

/// `|f|` coefficientwise, in binary64.
pub fn abs_series(f: &TruncatedSeries) -> TruncatedSeries {
    TruncatedSeries::from_terms(
        f.q(),
        f.max_degree(),
        Mode::Binary64,
        f.terms().map(|(c, v)| (c.clone(), Scalar::Float(v.abs_f64()))),
    )
    .expect("same shape")
}

/// `sum_{n <= depth} g_n f^n` in binary64; `None` on overflow or evaluation
/// failure.
pub fn direct_partial_sum(g: &CoeffSequence, f: &TruncatedSeries, depth: usize) -> Option<TruncatedSeries> {
    let f = f.to_mode(Mode::Binary64);
    // With b0 = 0, powers beyond K vanish in the truncation.
    let depth = if f.constant_term().is_zero() {
        depth.min(f.max_degree())
    } else {
        depth
    };
    let mut cursor = g.cursor();
    let mut pow = TruncatedSeries::one(f.q(), f.max_degree(), Mode::Binary64);
    let mut acc = TruncatedSeries::zero(f.q(), f.max_degree(), Mode::Binary64);
    for n in 0..=depth {
        let gn = cursor.get(n as u64).ok()?;
        if gn != 0.0 {
            acc = acc.add(&pow.scale(&Scalar::float(gn).ok()?).ok()?).ok()?;
        }
        if n < depth {
            pow = pow.mul(&f).ok()?;
            if pow.is_zero() {
                break;
            }
        }
    }
    Some(acc)
}
