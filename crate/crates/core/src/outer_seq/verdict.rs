//! Three-valued convergence verdicts for numeric series `sum t_n`.
//!
//! Convergence of an arbitrary numeric sequence is only semi-decidable, so
//! the verdict is `Converged`, `Diverged`, or `Inconclusive`. Terms are read
//! sequentially and examined at checkpoints `N = 2W, 4W, 8W, ...` and at
//! `N_max`, where `W` is the trailing window length. At each checkpoint:
//!
//! * **ratio tail**: `rho = sup |t_{n+1} / t_n| < 1` over the window, with
//!   the ratios not rising inside the window or since the last checkpoint.
//!   Hypothesis: the ratio bound persists. Bound `|t_{N-1}| rho / (1 - rho)`.
//! * **alternating**: strictly alternating signs with non-increasing
//!   magnitudes over the window, and `|t_{N-1}|` at most 0.9 times the last
//!   term seen at a checkpoint no later than `N / 2`. Hypothesis: the
//!   magnitudes keep decreasing to zero. The limit then lies between
//!   `S_{N-1}` and `S_N`; the midpoint is reported with bound `|t_{N-1}| / 2`.
//! * **terms not vanishing**: with at least `min_divergence_terms` terms,
//!   the window minimum of `|t_n|` is positive and has not decreased over
//!   three consecutive checkpoints.
//! * **overflow**: a term or partial sum exceeds the overflow guard.
//!
//! Converged bounds also carry a floating-point summation allowance.

use std::collections::VecDeque;

use serde::Serialize;

use super::SeqError;
use crate::series::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerdictOptions {
    /// Stop as soon as the certified bound drops below this.
    pub tolerance: f64,
    pub n_max: usize,
    pub window: usize,
    pub overflow_guard: f64,
    /// Term cap for sequences involving Cauchy products, whose terms cost
    /// O(n) each.
    pub max_product_terms: usize,
    pub min_divergence_terms: usize,
}

impl Default for VerdictOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-9,
            n_max: 1 << 20,
            window: 64,
            overflow_guard: 1e100,
            max_product_terms: 1 << 14,
            min_divergence_terms: 1 << 12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Finite or closed-form exact value.
    Exact,
    Alternating,
    RatioTail,
    /// Existence from the radius of convergence; value from partial sums.
    Analytic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessKind {
    TermsNotVanishing,
    Overflow,
    OutsideRadius,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivergenceWitness {
    pub kind: WitnessKind,
    /// Index range the witness covers (inclusive).
    pub first_index: u64,
    pub last_index: u64,
    /// Smallest term magnitude over the range, the overflowing value, or
    /// `|b0|` for radius witnesses.
    pub magnitude: f64,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InconclusiveDiagnostics {
    pub terms_used: u64,
    pub last_partial_sum: f64,
    /// Spread of the partial sums over the trailing window.
    pub oscillation: f64,
    pub last_term: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConvergenceVerdict {
    Converged {
        value: Scalar,
        error_bound: f64,
        regime: Regime,
        terms_used: u64,
    },
    Diverged(DivergenceWitness),
    Inconclusive(InconclusiveDiagnostics),
}

impl ConvergenceVerdict {
    pub fn exact(value: Scalar) -> Self {
        ConvergenceVerdict::Converged {
            value,
            error_bound: 0.0,
            regime: Regime::Exact,
            terms_used: 0,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ConvergenceVerdict::Converged { .. } => "Converged",
            ConvergenceVerdict::Diverged(_) => "Diverged",
            ConvergenceVerdict::Inconclusive(_) => "Inconclusive",
        }
    }

    pub fn is_converged(&self) -> bool {
        matches!(self, ConvergenceVerdict::Converged { .. })
    }

    pub fn is_diverged(&self) -> bool {
        matches!(self, ConvergenceVerdict::Diverged(_))
    }

    pub fn value(&self) -> Option<&Scalar> {
        match self {
            ConvergenceVerdict::Converged { value, .. } => Some(value),
            _ => None,
        }
    }

    pub fn error_bound(&self) -> Option<f64> {
        match self {
            ConvergenceVerdict::Converged { error_bound, .. } => Some(*error_bound),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Checkpoint {
    n: usize,
    min_abs: f64,
    ratio_sup: f64,
    last_abs: f64,
}

fn ratio(prev: f64, next: f64) -> f64 {
    let (p, q) = (prev.abs(), next.abs());
    if p == 0.0 {
        if q == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        q / p
    }
}

/// Decides convergence of `sum_{n >= 0} t_n` from terms read in order.
///
/// `terms` is called with `n = 0, 1, 2, ...`. Evaluation errors propagate;
/// every mathematical outcome is a verdict.
pub fn partial_sum_verdict<F>(mut terms: F, opts: &VerdictOptions) -> Result<ConvergenceVerdict, SeqError>
where
    F: FnMut(u64) -> Result<f64, SeqError>,
{
    let n_max = opts.n_max.max(4);
    let w = opts.window.min(n_max / 2).max(2);
    let mut schedule = Vec::new();
    let mut cp = 2 * w;
    while cp < n_max {
        schedule.push(cp);
        cp *= 2;
    }
    schedule.push(n_max);
    let mut next_cp = schedule.iter().copied().peekable();

    let (mut sum, mut comp, mut sum_abs) = (0.0f64, 0.0f64, 0.0f64);
    let mut hist: VecDeque<f64> = VecDeque::with_capacity(w + 2);
    let mut sums: VecDeque<f64> = VecDeque::with_capacity(w + 1);
    let mut seen: Vec<Checkpoint> = Vec::new();

    for n in 0..n_max {
        let t = terms(n as u64)?;
        if !t.is_finite() || t.abs() > opts.overflow_guard {
            return Ok(ConvergenceVerdict::Diverged(DivergenceWitness {
                kind: WitnessKind::Overflow,
                first_index: n as u64,
                last_index: n as u64,
                magnitude: t.abs(),
                note: format!("term {n} exceeds the overflow guard {:e}", opts.overflow_guard),
            }));
        }
        // Neumaier compensated summation.
        let s = sum + t;
        comp += if sum.abs() >= t.abs() {
            (sum - s) + t
        } else {
            (t - s) + sum
        };
        sum = s;
        sum_abs += t.abs();
        let partial = sum + comp;
        if partial.abs() > opts.overflow_guard {
            return Ok(ConvergenceVerdict::Diverged(DivergenceWitness {
                kind: WitnessKind::Overflow,
                first_index: 0,
                last_index: n as u64,
                magnitude: partial.abs(),
                note: format!("partial sum exceeds the overflow guard {:e}", opts.overflow_guard),
            }));
        }
        hist.push_back(t);
        if hist.len() > w + 1 {
            hist.pop_front();
        }
        sums.push_back(partial);
        if sums.len() > w {
            sums.pop_front();
        }

        let big_n = n + 1;
        if next_cp.peek() != Some(&big_n) {
            continue;
        }
        next_cp.next();
        let is_final = big_n == n_max;

        let window: Vec<f64> = hist.iter().copied().collect();
        let tail = &window[window.len().saturating_sub(w)..];
        let min_abs = tail.iter().fold(f64::INFINITY, |m, x| m.min(x.abs()));
        let last = *tail.last().expect("window is nonempty");
        let last_abs = last.abs();
        let ratios: Vec<f64> = window.windows(2).map(|p| ratio(p[0], p[1])).collect();
        let half = ratios.len() / 2;
        let sup = |r: &[f64]| r.iter().fold(0.0f64, |m, &x| m.max(x));
        let ratio_sup = sup(&ratios);
        let ratio_steady = sup(&ratios[half..]) <= sup(&ratios[..half]);
        let alternating = tail.windows(2).all(|p| p[0] * p[1] < 0.0 && p[1].abs() <= p[0].abs());
        let rounding = 64.0 * f64::EPSILON * sum_abs + 2.0 * f64::EPSILON * partial.abs();

        if big_n >= opts.min_divergence_terms && seen.len() >= 2 && min_abs > 0.0 {
            let (p1, p2) = (seen[seen.len() - 1], seen[seen.len() - 2]);
            let slack = 1.0 - 1e-12;
            if min_abs >= p1.min_abs * slack && p1.min_abs >= p2.min_abs * slack {
                return Ok(ConvergenceVerdict::Diverged(DivergenceWitness {
                    kind: WitnessKind::TermsNotVanishing,
                    first_index: p2.n.saturating_sub(w) as u64,
                    last_index: n as u64,
                    magnitude: min_abs.min(p1.min_abs).min(p2.min_abs),
                    note: "term magnitudes stay bounded away from zero".into(),
                }));
            }
        }

        let ratio_ok = ratio_sup < 1.0 && ratio_steady && seen.last().is_none_or(|p| ratio_sup <= p.ratio_sup);
        if ratio_ok {
            let bound = last_abs * ratio_sup / (1.0 - ratio_sup) + rounding;
            if bound <= opts.tolerance || is_final {
                return Ok(ConvergenceVerdict::Converged {
                    value: Scalar::Float(partial),
                    error_bound: bound,
                    regime: Regime::RatioTail,
                    terms_used: big_n as u64,
                });
            }
        }

        let decayed = seen
            .iter()
            .rev()
            .find(|p| 2 * p.n <= big_n)
            .is_some_and(|p| last_abs <= 0.9 * p.last_abs);
        if alternating && decayed {
            let bound = last_abs / 2.0 + rounding;
            if bound <= opts.tolerance || is_final {
                return Ok(ConvergenceVerdict::Converged {
                    value: Scalar::Float(partial - last / 2.0),
                    error_bound: bound,
                    regime: Regime::Alternating,
                    terms_used: big_n as u64,
                });
            }
        }

        seen.push(Checkpoint {
            n: big_n,
            min_abs,
            ratio_sup,
            last_abs,
        });
        if is_final {
            let (lo, hi) = sums.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &s| {
                (lo.min(s), hi.max(s))
            });
            return Ok(ConvergenceVerdict::Inconclusive(InconclusiveDiagnostics {
                terms_used: big_n as u64,
                last_partial_sum: partial,
                oscillation: hi - lo,
                last_term: last,
            }));
        }
    }
    unreachable!("the final checkpoint always returns")
}
