//! Block powers and the multinomial expansion of `f^n`.
//!
//! With `f = f[0] + f[1] + ...`, the degree-`k` part of `f^n` collects
//! `n! / (v_0! ... v_k!) * f[0]^{v_0} ... f[k]^{v_k}` over all `v` with
//! `v_0 + ... + v_k = n` and `v_1 + 2 v_2 + ... + k v_k = k`. Writing
//! `s = v_1 + ... + v_k`, the nonconstant multiplicities form a partition of
//! `k` into `s` parts and `v_0 = n - s`.

use std::collections::HashMap;

use num_bigint::BigUint;

use super::scalar::factorial;
use super::{Scalar, SeriesError, TruncatedSeries};
use crate::multiindex::{enumerate_partitions, PartitionVector};

/// Cache of block powers `f[i]^e`, shared by the power expansion and the
/// composition tables.
#[derive(Debug, Clone)]
pub struct BlockPowers {
    blocks: Vec<TruncatedSeries>,
    cache: HashMap<(usize, u32), TruncatedSeries>,
}

impl BlockPowers {
    pub fn new(f: &TruncatedSeries) -> Self {
        let blocks = (0..=f.max_degree()).map(|k| f.block_unchecked(k)).collect();
        Self {
            blocks,
            cache: HashMap::new(),
        }
    }

    pub fn block(&self, i: usize) -> &TruncatedSeries {
        &self.blocks[i]
    }

    /// `f[i]^e`.
    pub fn power(&mut self, i: usize, e: u32) -> Result<TruncatedSeries, SeriesError> {
        let base = &self.blocks[i];
        if e == 0 {
            return Ok(TruncatedSeries::one(base.q(), base.max_degree(), base.mode()));
        }
        if e == 1 {
            return Ok(base.clone());
        }
        if let Some(p) = self.cache.get(&(i, e)) {
            return Ok(p.clone());
        }
        let prev = self.power(i, e - 1)?;
        let p = prev.mul(&self.blocks[i])?;
        self.cache.insert((i, e), p.clone());
        Ok(p)
    }

    /// `f[1]^{v_1} ... f[k]^{v_k}` for a multiplicity vector.
    pub fn partition_product(&mut self, v: &PartitionVector) -> Result<TruncatedSeries, SeriesError> {
        let (q, k, mode) = {
            let b = &self.blocks[0];
            (b.q(), b.max_degree(), b.mode())
        };
        let mut acc = TruncatedSeries::one(q, k, mode);
        for (size, mult) in v.nonzero() {
            if self.blocks[size].is_zero() {
                return Ok(TruncatedSeries::zero(q, k, mode));
            }
            acc = acc.mul(&self.power(size, mult)?)?;
        }
        Ok(acc)
    }
}

/// `v_1! ... v_k!` for a multiplicity vector.
pub(crate) fn multiplicity_factorials(v: &PartitionVector) -> BigUint {
    v.nonzero()
        .map(|(_, m)| factorial(u64::from(m)))
        .fold(BigUint::from(1u32), |a, b| a * b)
}

/// `f^n` via the block expansion, with exact multinomial coefficients.
pub fn pow_multinomial(f: &TruncatedSeries, n: u32) -> Result<TruncatedSeries, SeriesError> {
    let (q, k_max, mode) = (f.q(), f.max_degree(), f.mode());
    let b0 = f.constant_term();
    let n_fact = factorial(u64::from(n));
    let mut powers = BlockPowers::new(f);
    let mut out = TruncatedSeries::zero(q, k_max, mode);
    for k in 0..=k_max {
        for s in 0..=(n as usize).min(k) {
            let v0 = n - s as u32;
            let b0_pow = b0.pow(v0);
            if b0_pow.is_zero() {
                continue;
            }
            for v in enumerate_partitions(k, s) {
                let denom = factorial(u64::from(v0)) * multiplicity_factorials(&v);
                let multinomial = &n_fact / denom;
                let coef = &Scalar::from_biguint(&multinomial, mode) * &b0_pow;
                let term = powers.partition_product(&v)?.scale(&coef)?;
                out = out.add(&term)?;
            }
        }
    }
    Ok(out)
}
