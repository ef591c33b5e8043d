//! Truncated formal power series in `q` variables.
//!
//! A [`TruncatedSeries`] keeps every coefficient of total degree at most
//! `K` and nothing above it. Storage is sparse and zero coefficients are
//! never stored, so structural equality is coefficient equality.

pub(crate) mod power;
mod scalar;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::multiindex::{MultiIndex, MultiIndexError};

pub use power::{pow_multinomial, BlockPowers};
pub use scalar::{factorial, format_f64, Mode, Scalar, ScalarError};

/// Default absolute-or-relative tolerance for binary64 comparisons.
pub const DEFAULT_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SeriesError {
    #[error("shape mismatch: left is (q={left_q}, K={left_k}), right is (q={right_q}, K={right_k})")]
    ShapeMismatch {
        left_q: usize,
        left_k: usize,
        right_q: usize,
        right_k: usize,
    },
    #[error("mode mismatch: left operand is {left}, right operand is {right}")]
    ModeMismatch { left: Mode, right: Mode },
    #[error("index {index} has total degree {degree}, above the truncation degree {max}")]
    DegreeOutOfRange {
        index: MultiIndex,
        degree: usize,
        max: usize,
    },
    #[error("block {k} requested from a series truncated at degree {max}")]
    BlockOutOfRange { k: usize, max: usize },
    #[error(transparent)]
    Index(#[from] MultiIndexError),
    #[error("index {index} has {got} variables, the series has {q}")]
    IndexDimension { index: MultiIndex, got: usize, q: usize },
    #[error("binary64 arithmetic produced a non-finite coefficient")]
    NonFinite,
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

#[derive(Clone, PartialEq)]
pub struct TruncatedSeries {
    q: usize,
    max_degree: usize,
    mode: Mode,
    terms: BTreeMap<MultiIndex, Scalar>,
}

impl std::fmt::Debug for TruncatedSeries {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Series(q={}, K={}, {}; ", self.q, self.max_degree, self.mode)?;
        f.debug_map().entries(self.terms.iter()).finish()?;
        f.write_str(")")
    }
}

impl TruncatedSeries {
    /// The zero series θ.
    pub fn zero(q: usize, max_degree: usize, mode: Mode) -> Self {
        assert!(q >= 1, "q must be positive");
        Self {
            q,
            max_degree,
            mode,
            terms: BTreeMap::new(),
        }
    }

    /// The multiplicative identity I.
    pub fn one(q: usize, max_degree: usize, mode: Mode) -> Self {
        Self::constant(q, max_degree, Scalar::one(mode))
    }

    /// `b * I`; the mode is taken from `b`.
    pub fn constant(q: usize, max_degree: usize, b: Scalar) -> Self {
        let mut s = Self::zero(q, max_degree, b.mode());
        s.put(MultiIndex::zero(q), b);
        s
    }

    /// The coordinate series `x_var` (0-based).
    pub fn variable(q: usize, max_degree: usize, var: usize, mode: Mode) -> Self {
        let mut s = Self::zero(q, max_degree, mode);
        if max_degree >= 1 {
            s.put(MultiIndex::unit(q, var), Scalar::one(mode));
        }
        s
    }

    /// Builds a series from `(index, coefficient)` pairs. Repeated indices
    /// are summed; indices above `max_degree` are rejected.
    pub fn from_terms<I>(q: usize, max_degree: usize, mode: Mode, terms: I) -> Result<Self, SeriesError>
    where
        I: IntoIterator<Item = (MultiIndex, Scalar)>,
    {
        let mut s = Self::zero(q, max_degree, mode);
        for (c, v) in terms {
            if c.q() != q {
                return Err(SeriesError::IndexDimension {
                    got: c.q(),
                    index: c,
                    q,
                });
            }
            if v.mode() != mode {
                return Err(SeriesError::ModeMismatch {
                    left: mode,
                    right: v.mode(),
                });
            }
            if !v.is_finite() {
                return Err(SeriesError::NonFinite);
            }
            let degree = c.total_degree();
            if degree > max_degree {
                return Err(SeriesError::DegreeOutOfRange {
                    index: c,
                    degree,
                    max: max_degree,
                });
            }
            let sum = match s.terms.get(&c) {
                Some(old) => old + &v,
                None => v,
            };
            s.put(c, sum);
        }
        Ok(s)
    }

    // Stores `v` at `c`, dropping zeros. Callers guarantee dims and degree.
    fn put(&mut self, c: MultiIndex, v: Scalar) {
        if v.is_zero() {
            self.terms.remove(&c);
        } else {
            self.terms.insert(c, v);
        }
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// Truncation degree `K`.
    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Nonzero terms in graded-lex order.
    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Scalar)> {
        self.terms.iter()
    }

    pub fn support_len(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, c: &MultiIndex) -> Scalar {
        self.terms.get(c).cloned().unwrap_or_else(|| Scalar::zero(self.mode))
    }

    /// `f_{(0,...,0)}`.
    pub fn constant_term(&self) -> Scalar {
        self.coefficient(&MultiIndex::zero(self.q))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// True when every stored term sits at the origin, i.e. `f = b I`
    /// within the truncation.
    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(MultiIndex::is_zero)
    }

    /// Highest degree carrying a nonzero coefficient.
    pub fn degree(&self) -> Option<usize> {
        self.terms.keys().map(MultiIndex::total_degree).max()
    }

    pub fn to_mode(&self, mode: Mode) -> Self {
        let mut out = Self::zero(self.q, self.max_degree, mode);
        for (c, v) in &self.terms {
            out.put(c.clone(), v.to_mode(mode));
        }
        out
    }

    /// Re-truncates to a new degree; raising `K` keeps the known terms.
    pub fn truncated(&self, max_degree: usize) -> Self {
        Self {
            q: self.q,
            max_degree,
            mode: self.mode,
            terms: self
                .terms
                .iter()
                .filter(|(c, _)| c.total_degree() <= max_degree)
                .map(|(c, v)| (c.clone(), v.clone()))
                .collect(),
        }
    }

    fn check_compatible(&self, other: &Self) -> Result<(), SeriesError> {
        if self.q != other.q || self.max_degree != other.max_degree {
            return Err(SeriesError::ShapeMismatch {
                left_q: self.q,
                left_k: self.max_degree,
                right_q: other.q,
                right_k: other.max_degree,
            });
        }
        if self.mode != other.mode {
            return Err(SeriesError::ModeMismatch {
                left: self.mode,
                right: other.mode,
            });
        }
        Ok(())
    }

    fn check_scalar(&self, a: &Scalar) -> Result<(), SeriesError> {
        if a.mode() != self.mode {
            return Err(SeriesError::ModeMismatch {
                left: self.mode,
                right: a.mode(),
            });
        }
        Ok(())
    }

    fn check_finite(self) -> Result<Self, SeriesError> {
        if self.terms.values().all(Scalar::is_finite) {
            Ok(self)
        } else {
            Err(SeriesError::NonFinite)
        }
    }

    /// `alpha * f + beta * g`, coefficientwise.
    pub fn linear_combine(alpha: &Scalar, f: &Self, beta: &Scalar, g: &Self) -> Result<Self, SeriesError> {
        f.check_compatible(g)?;
        f.check_scalar(alpha)?;
        f.check_scalar(beta)?;
        let mut out = Self::zero(f.q, f.max_degree, f.mode);
        let mut keys: Vec<&MultiIndex> = f.terms.keys().chain(g.terms.keys()).collect();
        keys.sort();
        keys.dedup();
        for c in keys {
            let v = &(alpha * &f.coefficient(c)) + &(beta * &g.coefficient(c));
            out.put(c.clone(), v);
        }
        out.check_finite()
    }

    pub fn add(&self, other: &Self) -> Result<Self, SeriesError> {
        let one = Scalar::one(self.mode);
        Self::linear_combine(&one, self, &one, other)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, SeriesError> {
        let one = Scalar::one(self.mode);
        Self::linear_combine(&one, self, &-&one, other)
    }

    pub fn scale(&self, a: &Scalar) -> Result<Self, SeriesError> {
        self.check_scalar(a)?;
        let mut out = Self::zero(self.q, self.max_degree, self.mode);
        for (c, v) in &self.terms {
            out.put(c.clone(), a * v);
        }
        out.check_finite()
    }

    /// Truncated Cauchy product.
    ///
    /// For each output index the contributions are accumulated in ascending
    /// graded-lex order of the smaller factor index, pairing `f_a g_b` with
    /// `f_b g_a`. The binary64 result is thus reproducible and bitwise
    /// symmetric in `f` and `g`.
    pub fn mul(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check_compatible(other)?;
        let k_max = self.max_degree;
        let mut support: Vec<&MultiIndex> = self.terms.keys().chain(other.terms.keys()).collect();
        support.sort();
        support.dedup();
        let zero = Scalar::zero(self.mode);
        let get = |s: &Self, c: &MultiIndex| -> Scalar { s.terms.get(c).cloned().unwrap_or_else(|| zero.clone()) };
        let mut acc: BTreeMap<MultiIndex, Scalar> = BTreeMap::new();
        for (i, a) in support.iter().enumerate() {
            let da = a.total_degree();
            let fa = get(self, a);
            let ga = get(other, a);
            for b in &support[i..] {
                // Support is graded, so every later index has degree >= b's.
                if da + b.total_degree() > k_max {
                    break;
                }
                let contribution = if a == b {
                    &fa * &ga
                } else {
                    &(&fa * &get(other, b)) + &(&get(self, b) * &ga)
                };
                if contribution.is_zero() {
                    continue;
                }
                let c = a.add_unchecked(b);
                match acc.get_mut(&c) {
                    Some(slot) => *slot = &*slot + &contribution,
                    None => {
                        acc.insert(c, contribution);
                    }
                }
            }
        }
        let mut out = Self::zero(self.q, k_max, self.mode);
        for (c, v) in acc {
            out.put(c, v);
        }
        out.check_finite()
    }

    /// The `k`-th block `f[k]`: only the coefficients of total degree `k`.
    pub fn block(&self, k: usize) -> Result<Self, SeriesError> {
        if k > self.max_degree {
            return Err(SeriesError::BlockOutOfRange {
                k,
                max: self.max_degree,
            });
        }
        Ok(self.block_unchecked(k))
    }

    pub(crate) fn block_unchecked(&self, k: usize) -> Self {
        Self {
            q: self.q,
            max_degree: self.max_degree,
            mode: self.mode,
            terms: self
                .terms
                .iter()
                .filter(|(c, _)| c.total_degree() == k)
                .map(|(c, v)| (c.clone(), v.clone()))
                .collect(),
        }
    }

    /// `f^n` as an `n`-fold Cauchy product; `f^0 = I`. Fails only on
    /// binary64 overflow.
    pub fn pow_repeated(&self, n: u32) -> Result<Self, SeriesError> {
        let mut out = Self::one(self.q, self.max_degree, self.mode);
        for _ in 0..n {
            out = out.mul(self)?;
        }
        Ok(out)
    }

    /// `f^n` through the block expansion; identical to [`Self::pow_repeated`]
    /// in exact mode.
    pub fn pow_multinomial(&self, n: u32) -> Result<Self, SeriesError> {
        pow_multinomial(self, n)
    }

    /// The least `l >= 1` with `f[l] != θ`, together with the
    /// lexicographically smallest index of that block carrying a nonzero
    /// coefficient. `None` when `f` is constant within the truncation.
    pub fn lowest_nonconstant_block(&self) -> Option<(usize, MultiIndex)> {
        self.terms
            .keys()
            .find(|c| !c.is_zero())
            .map(|c| (c.total_degree(), c.clone()))
    }

    /// Largest coefficientwise absolute difference, in binary64.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64, SeriesError> {
        if self.q != other.q || self.max_degree != other.max_degree {
            return Err(SeriesError::ShapeMismatch {
                left_q: self.q,
                left_k: self.max_degree,
                right_q: other.q,
                right_k: other.max_degree,
            });
        }
        let mut keys: Vec<&MultiIndex> = self.terms.keys().chain(other.terms.keys()).collect();
        keys.sort();
        keys.dedup();
        let mut worst = 0.0f64;
        for c in keys {
            let a = self.coefficient(c);
            let b = other.coefficient(c);
            let d = match (&a, &b) {
                (Scalar::Exact(x), Scalar::Exact(y)) => Scalar::Exact(x - y).abs_f64(),
                _ => (a.to_f64() - b.to_f64()).abs(),
            };
            worst = worst.max(d);
        }
        Ok(worst)
    }

    /// Equality up to `eps` (absolute or relative, per coefficient) in
    /// binary64; structural equality in exact mode.
    pub fn approx_eq(&self, other: &Self, eps: f64) -> bool {
        if self.check_compatible(other).is_err() {
            return false;
        }
        if self.mode == Mode::Exact {
            return self == other;
        }
        let mut keys: Vec<&MultiIndex> = self.terms.keys().chain(other.terms.keys()).collect();
        keys.sort();
        keys.dedup();
        keys.into_iter().all(|c| {
            let a = self.coefficient(c).to_f64();
            let b = other.coefficient(c).to_f64();
            let d = (a - b).abs();
            d <= eps || d <= eps * a.abs().max(b.abs())
        })
    }
}
