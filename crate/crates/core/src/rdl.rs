//! The right distributive law `(A o P)(B o P) = (AB) o P`.
//!
//! The law holds whenever all three compositions exist. With nonnegative
//! coefficients, existence of `A o P` and `B o P` already implies existence
//! of `(AB) o P`. Without sign information the product side can fail to
//! exist: `A_n = (-1)^n / sqrt(n+1)` composed with the unit series converges,
//! while the Cauchy square has terms `|c_n| >= 2(n+1)/(n+2)`.

use serde::Serialize;

use crate::composition::{abs_series, compose, ComposeError, ComposeOptions, CompositionReport};
use crate::outer_seq::{cauchy_seq_product, CoeffSequence, ConvergenceVerdict, DivergenceWitness};
use crate::series::{Mode, TruncatedSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Factor {
    A,
    B,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RdlStatus {
    /// Every coefficient agrees within the tolerance plus the propagated
    /// verdict bounds.
    Holds {
        max_discrepancy: f64,
    },
    /// All three compositions exist but some coefficient disagrees beyond
    /// the allowance.
    Discrepant {
        max_discrepancy: f64,
    },
    LhsNotExists {
        factor: Factor,
        s: usize,
        witness: Option<DivergenceWitness>,
    },
    RhsNotExists {
        s: usize,
        witness: Option<DivergenceWitness>,
    },
    Inconclusive {
        reason: String,
    },
}

impl RdlStatus {
    pub fn name(&self) -> &'static str {
        match self {
            RdlStatus::Holds { .. } => "Holds",
            RdlStatus::Discrepant { .. } => "Discrepant",
            RdlStatus::LhsNotExists { .. } => "LhsNotExists",
            RdlStatus::RhsNotExists { .. } => "RhsNotExists",
            RdlStatus::Inconclusive { .. } => "Inconclusive",
        }
    }

    pub fn max_discrepancy(&self) -> Option<f64> {
        match self {
            RdlStatus::Holds { max_discrepancy } | RdlStatus::Discrepant { max_discrepancy } => Some(*max_discrepancy),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RdlReport {
    pub q: usize,
    pub max_degree: usize,
    pub lhs_a: CompositionReport,
    pub lhs_b: CompositionReport,
    /// `(A o P)(B o P)` when both factors exist.
    pub lhs_product: Option<TruncatedSeries>,
    pub rhs: CompositionReport,
    /// A, B and P all have nonnegative coefficients, so existence of the
    /// right side follows from the left.
    pub rhs_existence_implied: bool,
    pub status: RdlStatus,
}

fn witness_at(r: &CompositionReport, s: usize) -> Option<DivergenceWitness> {
    match &r.verdicts[s] {
        ConvergenceVerdict::Diverged(w) => Some(w.clone()),
        _ => None,
    }
}

/// Computes both sides of the law and compares them coefficientwise.
///
/// Definitive refutations take priority over inconclusive verdicts; any
/// remaining inconclusive verdict makes the whole report inconclusive.
pub fn rdl_verify(
    a: &CoeffSequence,
    b: &CoeffSequence,
    p: &TruncatedSeries,
    opts: &ComposeOptions,
) -> Result<RdlReport, ComposeError> {
    let lhs_a = compose(a, p, opts)?;
    let lhs_b = compose(b, p, opts)?;
    let rhs = compose(&cauchy_seq_product(a, b), p, opts)?;
    let implied = a.is_nonnegative() && b.is_nonnegative() && p.terms().all(|(_, v)| !v.is_negative());

    let lhs_product = match (&lhs_a.result, &lhs_b.result) {
        (Some(x), Some(y)) if x.mode() == y.mode() => Some(x.mul(y)?),
        (Some(x), Some(y)) => Some(x.to_mode(Mode::Binary64).mul(&y.to_mode(Mode::Binary64))?),
        _ => None,
    };

    let status = if lhs_a.exists() == Some(false) {
        let s = lhs_a.offending().expect("some verdict diverged");
        RdlStatus::LhsNotExists {
            factor: Factor::A,
            s,
            witness: witness_at(&lhs_a, s),
        }
    } else if lhs_b.exists() == Some(false) {
        let s = lhs_b.offending().expect("some verdict diverged");
        RdlStatus::LhsNotExists {
            factor: Factor::B,
            s,
            witness: witness_at(&lhs_b, s),
        }
    } else if rhs.exists() == Some(false) {
        let s = rhs.offending().expect("some verdict diverged");
        if implied && lhs_a.exists() == Some(true) && lhs_b.exists() == Some(true) {
            RdlStatus::Inconclusive {
                reason: format!("G_{s} of (AB) o P was refuted although nonnegativity implies it exists"),
            }
        } else {
            RdlStatus::RhsNotExists {
                s,
                witness: witness_at(&rhs, s),
            }
        }
    } else if let (Some(lhs), Some(rhs_h)) = (&lhs_product, &rhs.result) {
        compare(lhs, rhs_h, &lhs_a, &lhs_b, &rhs, opts.verdict.tolerance)?
    } else {
        let which = [("A o P", &lhs_a), ("B o P", &lhs_b), ("(AB) o P", &rhs)]
            .into_iter()
            .filter(|(_, r)| r.exists().is_none())
            .map(|(n, _)| n)
            .collect::<Vec<_>>()
            .join(", ");
        RdlStatus::Inconclusive {
            reason: format!("no definite existence verdict for {which}"),
        }
    };

    Ok(RdlReport {
        q: p.q(),
        max_degree: p.max_degree(),
        lhs_a,
        lhs_b,
        lhs_product,
        rhs,
        rhs_existence_implied: implied,
        status,
    })
}

fn compare(
    lhs: &TruncatedSeries,
    rhs: &TruncatedSeries,
    ra: &CompositionReport,
    rb: &CompositionReport,
    rr: &CompositionReport,
    tolerance: f64,
) -> Result<RdlStatus, ComposeError> {
    if lhs.mode() == Mode::Exact && rhs.mode() == Mode::Exact {
        return Ok(if lhs == rhs {
            RdlStatus::Holds { max_discrepancy: 0.0 }
        } else {
            RdlStatus::Discrepant {
                max_discrepancy: lhs.max_abs_diff(rhs)?,
            }
        });
    }
    let lhs = lhs.to_mode(Mode::Binary64);
    let rhs = rhs.to_mode(Mode::Binary64);
    let max_discrepancy = lhs.max_abs_diff(&rhs)?;
    // |x y - x' y'| <= |e_x||y'| + |x'||e_y| + |e_x||e_y|, coefficientwise.
    let allowance = match (&ra.coefficient_bounds, &rb.coefficient_bounds, &rr.coefficient_bounds) {
        (Some(ea), Some(eb), Some(er)) => {
            let xa = abs_series(ra.result.as_ref().expect("exists"));
            let xb = abs_series(rb.result.as_ref().expect("exists"));
            let prod = ea.mul(&xb)?.add(&xa.mul(eb)?)?.add(&ea.mul(eb)?)?;
            Some(prod.add(er)?)
        }
        _ => None,
    };
    let within = lhs.terms().chain(rhs.terms()).all(|(c, _)| {
        let d = (lhs.coefficient(c).to_f64() - rhs.coefficient(c).to_f64()).abs();
        let slack = allowance.as_ref().map_or(0.0, |e| e.coefficient(c).to_f64());
        d <= tolerance + slack
    });
    Ok(if within {
        RdlStatus::Holds { max_discrepancy }
    } else {
        RdlStatus::Discrepant { max_discrepancy }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PartialSumRow {
    pub n: u64,
    pub partial_sum: f64,
    /// First omitted term, which bounds the alternating remainder.
    pub bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProductTermRow {
    pub n: u64,
    pub c_n: f64,
    pub lower_bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CounterexampleReport {
    pub n_terms: u64,
    pub partial_sums: Vec<PartialSumRow>,
    pub product_terms: Vec<ProductTermRow>,
    /// `min_n (|c_n| - 2(n+1)/(n+2))` over `n <= n_terms`.
    pub min_margin: f64,
    pub lower_bound_holds: bool,
    pub rdl: RdlReport,
}

pub const ALTERNATING_ROOT_RULE: &str = "(-1)^n/sqrt(n+1)";

/// Reproduces the failure of the law for `A = B = (-1)^n / sqrt(n+1)` and
/// the unit series `P = I`.
pub fn counterexample_demo(n_terms: u64, opts: &ComposeOptions) -> Result<CounterexampleReport, ComposeError> {
    let a = CoeffSequence::parse_rule(ALTERNATING_ROOT_RULE).expect("valid rule");
    let mut marks: Vec<u64> = std::iter::successors(Some(10u64), |m| m.checked_mul(10))
        .take_while(|&m| m < n_terms)
        .collect();
    marks.push(n_terms);

    let mut partial_sums = Vec::new();
    let mut sum = 0.0;
    let mut next = marks.iter().copied().peekable();
    for n in 0..=n_terms {
        sum += a.coeff_f64(n)?;
        if next.peek() == Some(&n) {
            next.next();
            partial_sums.push(PartialSumRow {
                n,
                partial_sum: sum,
                bound: a.coeff_f64(n + 1)?.abs(),
            });
        }
    }

    let c = cauchy_seq_product(&a, &a);
    let mut cursor = c.cursor();
    let samples = [0, 1, 2, 10, 100, 200, 1000];
    let mut product_terms = Vec::new();
    let mut min_margin = f64::INFINITY;
    for n in 0..=n_terms {
        let cn = cursor.get(n)?;
        let lower = 2.0 * (n as f64 + 1.0) / (n as f64 + 2.0);
        min_margin = min_margin.min(cn.abs() - lower);
        if samples.contains(&n) || n == n_terms {
            product_terms.push(ProductTermRow {
                n,
                c_n: cn,
                lower_bound: lower,
            });
        }
    }

    let p = TruncatedSeries::one(1, 0, Mode::Binary64);
    let rdl = rdl_verify(&a, &a, &p, opts)?;
    Ok(CounterexampleReport {
        n_terms,
        partial_sums,
        product_terms,
        min_margin,
        lower_bound_holds: min_margin >= 0.0,
        rdl,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AbelReport {
    pub sum_a: ConvergenceVerdict,
    pub sum_b: ConvergenceVerdict,
    pub sum_c: ConvergenceVerdict,
    /// `(sum a)(sum b)`, when both converged.
    pub product: Option<f64>,
    /// `|(sum a)(sum b) - sum c|`.
    pub difference: Option<f64>,
    /// `|da sum b| + |sum a db| + |da db| + dc`.
    pub combined_bound: Option<f64>,
    /// `None` when a precondition verdict did not converge.
    pub consistent: Option<bool>,
    pub rdl: RdlReport,
}

/// Checks `(sum a_n)(sum b_n) = sum c_n` for the Cauchy product `c`, by way
/// of the law with `P = I`.
pub fn abel_check(a: &CoeffSequence, b: &CoeffSequence, opts: &ComposeOptions) -> Result<AbelReport, ComposeError> {
    let p = TruncatedSeries::one(1, 0, Mode::Binary64);
    let rdl = rdl_verify(a, b, &p, opts)?;
    let (va, vb, vc) = (
        rdl.lhs_a.verdicts[0].clone(),
        rdl.lhs_b.verdicts[0].clone(),
        rdl.rhs.verdicts[0].clone(),
    );
    let parts = |v: &ConvergenceVerdict| {
        v.value()
            .map(|x| (x.to_f64(), v.error_bound().unwrap_or(f64::INFINITY)))
    };
    let (product, difference, combined_bound, consistent) = match (parts(&va), parts(&vb), parts(&vc)) {
        (Some((sa, da)), Some((sb, db)), Some((sc, dc))) => {
            let product = sa * sb;
            let diff = (product - sc).abs();
            let bound = (da * sb).abs() + (sa * db).abs() + da * db + dc;
            let rounding = 4.0 * f64::EPSILON * (product.abs() + sc.abs());
            (Some(product), Some(diff), Some(bound), Some(diff <= bound + rounding))
        }
        _ => (None, None, None, None),
    };
    Ok(AbelReport {
        sum_a: va,
        sum_b: vb,
        sum_c: vc,
        product,
        difference,
        combined_bound,
        consistent,
        rdl,
    })
}
