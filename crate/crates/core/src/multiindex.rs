//! Exponent vectors over `q` variables and the enumerations built on them.
//!
//! Multi-indices are ordered graded-lexicographically: total degree first,
//! then plain lexicographic order inside one degree slice. The `Ord` impl
//! follows that order, so a `BTreeMap<MultiIndex, _>` iterates coefficients
//! in the canonical listing order used everywhere else in the crate.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MultiIndexError {
    #[error("dimension mismatch: {left} variables vs {right} variables")]
    DimensionMismatch { left: usize, right: usize },
    #[error("a multi-index needs at least one variable")]
    Empty,
}

/// An exponent vector `(c_1, ..., c_q)`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct MultiIndex {
    exps: Vec<u32>,
}

impl MultiIndex {
    pub fn new(exps: Vec<u32>) -> Result<Self, MultiIndexError> {
        if exps.is_empty() {
            return Err(MultiIndexError::Empty);
        }
        Ok(Self { exps })
    }

    /// The index `(0, ..., 0)`.
    pub fn zero(q: usize) -> Self {
        assert!(q >= 1, "q must be positive");
        Self { exps: vec![0; q] }
    }

    /// The unit vector selecting variable `var` (0-based).
    pub fn unit(q: usize, var: usize) -> Self {
        let mut exps = vec![0; q];
        exps[var] = 1;
        Self { exps }
    }

    pub fn q(&self) -> usize {
        self.exps.len()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exps
    }

    pub fn total_degree(&self) -> usize {
        self.exps.iter().map(|&e| e as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.exps.iter().all(|&e| e == 0)
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, MultiIndexError> {
        check_dims(self, other)?;
        Ok(self.add_unchecked(other))
    }

    pub(crate) fn add_unchecked(&self, other: &Self) -> Self {
        Self {
            exps: self.exps.iter().zip(&other.exps).map(|(a, b)| a + b).collect(),
        }
    }

    /// `m * self`, componentwise.
    pub fn scaled(&self, m: u32) -> Self {
        Self {
            exps: self.exps.iter().map(|&e| e * m).collect(),
        }
    }

    /// Componentwise `self <= other`.
    pub fn divides(&self, other: &Self) -> bool {
        self.q() == other.q() && self.exps.iter().zip(&other.exps).all(|(a, b)| a <= b)
    }
}

fn check_dims(a: &MultiIndex, b: &MultiIndex) -> Result<(), MultiIndexError> {
    if a.q() != b.q() {
        return Err(MultiIndexError::DimensionMismatch {
            left: a.q(),
            right: b.q(),
        });
    }
    Ok(())
}

impl TryFrom<Vec<u32>> for MultiIndex {
    type Error = MultiIndexError;

    fn try_from(exps: Vec<u32>) -> Result<Self, Self::Error> {
        Self::new(exps)
    }
}

impl From<MultiIndex> for Vec<u32> {
    fn from(c: MultiIndex) -> Self {
        c.exps
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.exps)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, e) in self.exps.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{e}")?;
        }
        f.write_str(")")
    }
}

/// Graded-lex comparison of two indices over the same number of variables.
pub fn graded_lex_compare(a: &MultiIndex, b: &MultiIndex) -> Result<Ordering, MultiIndexError> {
    check_dims(a, b)?;
    Ok(graded_lex_unchecked(a, b))
}

fn graded_lex_unchecked(a: &MultiIndex, b: &MultiIndex) -> Ordering {
    a.total_degree()
        .cmp(&b.total_degree())
        .then_with(|| a.exps.cmp(&b.exps))
}

/// Indices of different dimension never meet inside one series; the
/// variable count is compared first only to keep the order total.
impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.q().cmp(&other.q()).then_with(|| graded_lex_unchecked(self, other))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// All `c` with `k(c) = k`, in increasing lexicographic order.
pub fn enumerate_degree(q: usize, k: usize) -> Vec<MultiIndex> {
    assert!(q >= 1, "q must be positive");
    let mut out = Vec::with_capacity(binomial_usize(q + k - 1, q - 1));
    let mut buf = vec![0u32; q];
    fill_degree(&mut buf, 0, k as u32, &mut out);
    out
}

fn fill_degree(buf: &mut [u32], pos: usize, rest: u32, out: &mut Vec<MultiIndex>) {
    if pos + 1 == buf.len() {
        buf[pos] = rest;
        out.push(MultiIndex { exps: buf.to_vec() });
        return;
    }
    for e in 0..=rest {
        buf[pos] = e;
        fill_degree(buf, pos + 1, rest - e, out);
    }
}

/// All indices of total degree at most `max_degree`, graded-lex ascending.
pub fn enumerate_up_to(q: usize, max_degree: usize) -> Vec<MultiIndex> {
    (0..=max_degree).flat_map(|k| enumerate_degree(q, k)).collect()
}

/// Number of monomials of degree `k` in `q` variables.
pub fn degree_slice_len(q: usize, k: usize) -> usize {
    binomial_usize(q + k - 1, q - 1)
}

fn binomial_usize(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Multiplicity vector `(v_1, ..., v_k)` of a partition of `k` into `s` parts:
/// `v_i` counts the parts equal to `i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PartitionVector {
    parts: Vec<u32>,
    degree: usize,
    count: usize,
}

impl PartitionVector {
    /// Builds a vector from multiplicities, checking both constraints.
    pub fn from_multiplicities(parts: Vec<u32>) -> Option<Self> {
        let degree = parts.len();
        let weighted: usize = parts.iter().enumerate().map(|(i, &v)| (i + 1) * v as usize).sum();
        if weighted != degree {
            return None;
        }
        let count = parts.iter().map(|&v| v as usize).sum();
        Some(Self { parts, degree, count })
    }

    /// `v_1, ..., v_k`; entry `i` is the multiplicity of part size `i + 1`.
    pub fn multiplicities(&self) -> &[u32] {
        &self.parts
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn part_count(&self) -> usize {
        self.count
    }

    /// Nonzero `(part size, multiplicity)` pairs, ascending by size.
    pub fn nonzero(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.parts
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > 0)
            .map(|(i, &v)| (i + 1, v))
    }
}

/// Partitions of `k` into exactly `s` parts, as multiplicity vectors.
///
/// `s > k` (or `s = 0` with `k > 0`) yields nothing. `k = s = 0` yields the
/// single empty partition, which the power expansion uses for the constant
/// block.
pub fn enumerate_partitions(k: usize, s: usize) -> Vec<PartitionVector> {
    if s > k || (s == 0 && k > 0) {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut parts = Vec::with_capacity(s);
    partitions_rec(k, s, k, &mut parts, &mut out);
    out
}

// Parts are generated in non-increasing order; `max_part` caps the next one.
fn partitions_rec(
    remaining: usize,
    slots: usize,
    max_part: usize,
    parts: &mut Vec<usize>,
    out: &mut Vec<PartitionVector>,
) {
    if slots == 0 {
        if remaining == 0 {
            let degree: usize = parts.iter().sum();
            let mut v = vec![0u32; degree];
            for &p in parts.iter() {
                v[p - 1] += 1;
            }
            out.push(PartitionVector {
                parts: v,
                degree,
                count: parts.len(),
            });
        }
        return;
    }
    // Every remaining slot needs at least 1, and no slot may exceed `max_part`.
    if remaining < slots || remaining > slots * max_part {
        return;
    }
    let hi = max_part.min(remaining - (slots - 1));
    for p in (1..=hi).rev() {
        parts.push(p);
        partitions_rec(remaining - p, slots - 1, p, parts, out);
        parts.pop();
    }
}

/// All ordered pairs `(a, b)` with `a + b = c`, sorted graded-lex by `a`.
pub fn split_pairs(c: &MultiIndex) -> Vec<(MultiIndex, MultiIndex)> {
    let mut lows = Vec::new();
    let mut buf = vec![0u32; c.q()];
    odometer(&c.exps, 0, &mut buf, &mut lows);
    lows.sort_by(graded_lex_unchecked);
    lows.into_iter()
        .map(|a| {
            let b = MultiIndex {
                exps: c.exps.iter().zip(&a.exps).map(|(ci, ai)| ci - ai).collect(),
            };
            (a, b)
        })
        .collect()
}

fn odometer(bound: &[u32], pos: usize, buf: &mut [u32], out: &mut Vec<MultiIndex>) {
    if pos == bound.len() {
        out.push(MultiIndex { exps: buf.to_vec() });
        return;
    }
    for e in 0..=bound[pos] {
        buf[pos] = e;
        odometer(bound, pos + 1, buf, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex::new(v.to_vec()).unwrap()
    }

    #[test]
    fn compare_examples() {
        assert_eq!(graded_lex_compare(&mi(&[0, 1]), &mi(&[1, 0])), Ok(Ordering::Less));
        assert_eq!(graded_lex_compare(&mi(&[0, 0]), &mi(&[0, 0])), Ok(Ordering::Equal));
        assert_eq!(graded_lex_compare(&mi(&[2, 0]), &mi(&[0, 3])), Ok(Ordering::Less));
        assert_eq!(
            graded_lex_compare(&mi(&[1]), &mi(&[1, 0])),
            Err(MultiIndexError::DimensionMismatch { left: 1, right: 2 })
        );
    }

    #[test]
    fn degree_slices() {
        assert_eq!(enumerate_degree(2, 2), vec![mi(&[0, 2]), mi(&[1, 1]), mi(&[2, 0])]);
        assert_eq!(enumerate_degree(3, 2).len(), 6);
        assert_eq!(enumerate_degree(1, 5), vec![mi(&[5])]);
        assert_eq!(enumerate_degree(4, 0), vec![MultiIndex::zero(4)]);
    }

    #[test]
    fn slice_lengths_match_binomial() {
        for q in 1..=4 {
            for k in 0..=10 {
                let slice = enumerate_degree(q, k);
                assert_eq!(slice.len(), degree_slice_len(q, k), "q={q} k={k}");
                assert!(slice.windows(2).all(|w| w[0] < w[1]));
                assert!(slice.iter().all(|c| c.total_degree() == k));
            }
        }
    }

    // Independent filter over the whole v-lattice with sum i*v_i = k.
    fn brute_partitions(k: usize, s: usize) -> Vec<Vec<u32>> {
        let mut out = Vec::new();
        let mut v = vec![0u32; k];
        fn rec(i: usize, left: usize, v: &mut Vec<u32>, s: usize, out: &mut Vec<Vec<u32>>) {
            if i == v.len() {
                if left == 0 && v.iter().map(|&x| x as usize).sum::<usize>() == s {
                    out.push(v.clone());
                }
                return;
            }
            let size = i + 1;
            for m in 0..=(left / size) {
                v[i] = m as u32;
                rec(i + 1, left - m * size, v, s, out);
            }
            v[i] = 0;
        }
        rec(0, k, &mut v, s, &mut out);
        out.sort();
        out
    }

    #[test]
    fn partition_examples() {
        let mut got: Vec<_> = enumerate_partitions(4, 2)
            .into_iter()
            .map(|p| p.multiplicities().to_vec())
            .collect();
        got.sort();
        assert_eq!(got, vec![vec![0, 2, 0, 0], vec![1, 0, 1, 0]]);
        assert_eq!(brute_partitions(4, 2), got);

        let p33: Vec<_> = enumerate_partitions(3, 3)
            .iter()
            .map(|p| p.multiplicities().to_vec())
            .collect();
        assert_eq!(p33, vec![vec![3, 0, 0]]);
        let p21: Vec<_> = enumerate_partitions(2, 1)
            .iter()
            .map(|p| p.multiplicities().to_vec())
            .collect();
        assert_eq!(p21, vec![vec![0, 1]]);
        assert!(enumerate_partitions(2, 3).is_empty());
        assert!(enumerate_partitions(3, 0).is_empty());
        let empty = enumerate_partitions(0, 0);
        assert_eq!(empty.len(), 1);
        assert_eq!(empty[0].degree(), 0);
    }

    #[test]
    fn partitions_match_brute_force() {
        for k in 1..=12 {
            for s in 1..=k {
                let mut got: Vec<_> = enumerate_partitions(k, s)
                    .into_iter()
                    .map(|p| {
                        assert_eq!(p.part_count(), s);
                        assert_eq!(p.degree(), k);
                        p.multiplicities().to_vec()
                    })
                    .collect();
                got.sort();
                assert_eq!(got, brute_partitions(k, s), "k={k} s={s}");
            }
        }
    }

    #[test]
    fn split_examples() {
        let pairs = split_pairs(&mi(&[1, 1]));
        assert_eq!(
            pairs,
            vec![
                (mi(&[0, 0]), mi(&[1, 1])),
                (mi(&[0, 1]), mi(&[1, 0])),
                (mi(&[1, 0]), mi(&[0, 1])),
                (mi(&[1, 1]), mi(&[0, 0])),
            ]
        );
        assert_eq!(split_pairs(&mi(&[0, 0])), vec![(mi(&[0, 0]), mi(&[0, 0]))]);
        assert_eq!(split_pairs(&mi(&[2])).len(), 3);
    }

    #[test]
    fn serde_is_a_plain_array() {
        let c = mi(&[1, 0, 2]);
        assert_eq!(serde_json::to_string(&c).unwrap(), "[1,0,2]");
        let back: MultiIndex = serde_json::from_str("[1,0,2]").unwrap();
        assert_eq!(back, c);
        assert!(serde_json::from_str::<MultiIndex>("[]").is_err());
    }

    fn arb_index(q: usize) -> impl Strategy<Value = MultiIndex> {
        proptest::collection::vec(0u32..5, q).prop_map(|v| MultiIndex::new(v).unwrap())
    }

    proptest! {
        #[test]
        fn order_is_total_and_transitive(
            (a, b, c) in (1usize..4).prop_flat_map(|q| (arb_index(q), arb_index(q), arb_index(q)))
        ) {
            let ab = graded_lex_compare(&a, &b).unwrap();
            let ba = graded_lex_compare(&b, &a).unwrap();
            prop_assert_eq!(ab, ba.reverse());
            prop_assert_eq!(ab == Ordering::Equal, a == b);
            let bc = graded_lex_compare(&b, &c).unwrap();
            if ab != Ordering::Greater && bc != Ordering::Greater {
                prop_assert_ne!(graded_lex_compare(&a, &c).unwrap(), Ordering::Greater);
            }
        }

        #[test]
        fn split_pairs_sum_back(c in (1usize..4).prop_flat_map(arb_index)) {
            let pairs = split_pairs(&c);
            let expected: usize = c.exponents().iter().map(|&e| e as usize + 1).product();
            prop_assert_eq!(pairs.len(), expected);
            let mut seen = std::collections::HashSet::new();
            for (a, b) in &pairs {
                prop_assert_eq!(&a.checked_add(b).unwrap(), &c);
                prop_assert!(a.divides(&c) && b.divides(&c));
                prop_assert!(seen.insert(a.clone()));
            }
        }
    }
}
