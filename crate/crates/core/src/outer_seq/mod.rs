//! One-variable outer series `g(y) = sum g_n y^n` with unbounded index access.
//!
//! A [`CoeffSequence`] is a finite coefficient list (zero-extended), a parsed
//! closed-form rule in `n`, or the lazily evaluated Cauchy product of two
//! sequences. Each may carry a radius-of-convergence hint.

pub mod rule;
pub mod verdict;

use std::fmt;

use thiserror::Error;

use crate::series::{Mode, Scalar};
pub use rule::{EvalError, Expr, RuleParseError};
pub use verdict::{
    partial_sum_verdict, ConvergenceVerdict, DivergenceWitness, InconclusiveDiagnostics, Regime, VerdictOptions,
    WitnessKind,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SeqError {
    #[error("coefficient rule failed: {0}")]
    Eval(#[from] EvalError),
    #[error("coefficient {index} of the sequence is not finite")]
    NonFinite { index: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    UserAsserted,
    RuleDerived,
}

/// Radius of convergence of `sum g_n y^n`; `f64::INFINITY` for entire series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusHint {
    pub radius: f64,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    text: String,
    expr: Expr,
}

impl Rule {
    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Source {
    List(Vec<Scalar>),
    Rule(Rule),
    Product(Box<CoeffSequence>, Box<CoeffSequence>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoeffSequence {
    source: Source,
    radius: Option<RadiusHint>,
}

impl CoeffSequence {
    /// A zero-extended finite list. Its radius is infinite.
    pub fn list(coeffs: Vec<Scalar>) -> Self {
        Self {
            source: Source::List(coeffs),
            radius: Some(RadiusHint {
                radius: f64::INFINITY,
                provenance: Provenance::RuleDerived,
            }),
        }
    }

    /// Parses a closed-form rule; catalogued shapes get a derived radius.
    pub fn parse_rule(text: &str) -> Result<Self, RuleParseError> {
        let expr = rule::parse_expr(text)?;
        let radius = expr.derived_radius().map(|radius| RadiusHint {
            radius,
            provenance: Provenance::RuleDerived,
        });
        Ok(Self {
            source: Source::Rule(Rule {
                text: text.to_string(),
                expr,
            }),
            radius,
        })
    }

    /// Replaces the radius hint with a user assertion.
    pub fn with_radius(mut self, radius: f64) -> Self {
        self.radius = Some(RadiusHint {
            radius,
            provenance: Provenance::UserAsserted,
        });
        self
    }

    pub fn radius_hint(&self) -> Option<RadiusHint> {
        self.radius
    }

    pub fn as_rule(&self) -> Option<&Rule> {
        match &self.source {
            Source::Rule(r) => Some(r),
            _ => None,
        }
    }

    pub fn as_list(&self) -> Option<&[Scalar]> {
        match &self.source {
            Source::List(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_product(&self) -> bool {
        matches!(self.source, Source::Product(..))
    }

    /// Number of possibly-nonzero coefficients, when finite.
    pub fn finite_len(&self) -> Option<usize> {
        match &self.source {
            Source::List(v) => Some(v.len()),
            Source::Rule(_) => None,
            Source::Product(a, b) => match (a.finite_len()?, b.finite_len()?) {
                (0, _) | (_, 0) => Some(0),
                (x, y) => Some(x + y - 1),
            },
        }
    }

    /// Whether [`Self::coeff_at`] in exact mode yields exact values.
    pub fn supports_exact(&self) -> bool {
        match &self.source {
            Source::List(v) => v.iter().all(|c| c.mode() == Mode::Exact),
            Source::Rule(r) => r.expr.is_sqrt_free(),
            Source::Product(a, b) => a.supports_exact() && b.supports_exact(),
        }
    }

    /// Certificate that every coefficient is `>= 0`.
    pub fn is_nonnegative(&self) -> bool {
        match &self.source {
            Source::List(v) => v.iter().all(|c| !c.is_negative()),
            Source::Rule(r) => r.expr.is_manifestly_nonnegative(),
            Source::Product(a, b) => a.is_nonnegative() && b.is_nonnegative(),
        }
    }

    /// `g_n`. Exact mode returns an exact value when the source allows it
    /// (sqrt-free rules, exact lists) and binary64 otherwise.
    pub fn coeff_at(&self, n: u64, mode: Mode) -> Result<Scalar, SeqError> {
        match &self.source {
            Source::List(v) => Ok(match v.get(n as usize) {
                Some(c) if mode == Mode::Binary64 => c.to_mode(Mode::Binary64),
                Some(c) => c.clone(),
                None => Scalar::zero(mode),
            }),
            Source::Rule(r) => {
                if mode == Mode::Exact && r.expr.is_sqrt_free() {
                    Ok(Scalar::Exact(r.expr.eval_exact(n)?))
                } else {
                    let v = r.expr.eval_f64(n)?;
                    Scalar::float(v).map_err(|_| SeqError::NonFinite { index: n })
                }
            }
            Source::Product(a, b) => {
                let mode = if mode == Mode::Exact && self.supports_exact() {
                    Mode::Exact
                } else {
                    Mode::Binary64
                };
                let av: Vec<Scalar> = (0..=n).map(|j| a.coeff_at(j, mode)).collect::<Result<_, _>>()?;
                let bv: Vec<Scalar> = (0..=n).map(|j| b.coeff_at(j, mode)).collect::<Result<_, _>>()?;
                let mut acc = Scalar::zero(mode);
                let n = n as usize;
                for j in 0..=n / 2 {
                    let k = n - j;
                    let term = if j == k {
                        &av[j] * &bv[k]
                    } else {
                        &(&av[j] * &bv[k]) + &(&av[k] * &bv[j])
                    };
                    acc = &acc + &term;
                }
                if !acc.is_finite() {
                    return Err(SeqError::NonFinite { index: n as u64 });
                }
                Ok(acc)
            }
        }
    }

    pub fn coeff_f64(&self, n: u64) -> Result<f64, SeqError> {
        self.coeff_at(n, Mode::Binary64).map(|s| s.to_f64())
    }

    /// A sequential reader with amortized O(n) access for products.
    pub fn cursor(&self) -> SeqCursor<'_> {
        SeqCursor::new(self)
    }
}

/// Lazily evaluated Cauchy product `c_n = sum_{j <= n} a_j b_{n-j}`.
///
/// The radius hint is the smaller of the two when both are present.
pub fn cauchy_seq_product(a: &CoeffSequence, b: &CoeffSequence) -> CoeffSequence {
    let radius = match (a.radius, b.radius) {
        (Some(x), Some(y)) => Some(RadiusHint {
            radius: x.radius.min(y.radius),
            provenance: if x.provenance == Provenance::RuleDerived && y.provenance == Provenance::RuleDerived {
                Provenance::RuleDerived
            } else {
                Provenance::UserAsserted
            },
        }),
        _ => None,
    };
    CoeffSequence {
        source: Source::Product(Box::new(a.clone()), Box::new(b.clone())),
        radius,
    }
}

/// Sequential binary64 reader over a [`CoeffSequence`].
///
/// Products cache their factors' prefixes, so reading `c_0..c_N` costs
/// O(N^2) multiplications rather than O(N^3). The summation order per
/// coefficient matches [`CoeffSequence::coeff_at`] bit for bit.
pub struct SeqCursor<'a> {
    inner: CursorInner<'a>,
}

enum CursorInner<'a> {
    Direct(&'a CoeffSequence),
    Product {
        a: Box<SeqCursor<'a>>,
        b: Box<SeqCursor<'a>>,
        av: Vec<f64>,
        bv: Vec<f64>,
        cv: Vec<f64>,
    },
}

impl<'a> SeqCursor<'a> {
    fn new(seq: &'a CoeffSequence) -> Self {
        let inner = match &seq.source {
            Source::Product(a, b) => CursorInner::Product {
                a: Box::new(SeqCursor::new(a)),
                b: Box::new(SeqCursor::new(b)),
                av: Vec::new(),
                bv: Vec::new(),
                cv: Vec::new(),
            },
            _ => CursorInner::Direct(seq),
        };
        Self { inner }
    }

    pub fn get(&mut self, n: u64) -> Result<f64, SeqError> {
        match &mut self.inner {
            CursorInner::Direct(seq) => seq.coeff_f64(n),
            CursorInner::Product { a, b, av, bv, cv } => {
                let n = n as usize;
                while cv.len() <= n {
                    let m = cv.len();
                    av.push(a.get(m as u64)?);
                    bv.push(b.get(m as u64)?);
                    let mut acc = 0.0;
                    for j in 0..=m / 2 {
                        let k = m - j;
                        acc += if j == k {
                            av[j] * bv[k]
                        } else {
                            av[j] * bv[k] + av[k] * bv[j]
                        };
                    }
                    if !acc.is_finite() {
                        return Err(SeqError::NonFinite { index: m as u64 });
                    }
                    cv.push(acc);
                }
                Ok(cv[n])
            }
        }
    }
}

impl fmt::Display for CoeffSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.source {
            Source::List(v) => {
                f.write_str("[")?;
                for (i, c) in v.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{c}")?;
                }
                f.write_str("]")
            }
            Source::Rule(r) => f.write_str(&r.text),
            Source::Product(a, b) => write!(f, "({a}) * ({b})"),
        }
    }
}
