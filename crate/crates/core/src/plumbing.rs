//! H-graph plumbing matrices and the census of positive definite unimodular ones.
//!
//! Vertex layout: leaves `b1, b2` hang off the center `b3`, leaves `b5, b6`
//! hang off the center `b4`, and the two centers are joined.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_integer::Integer as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::IntMatrix;
use crate::{Integer, Matrix};

/// Edges of the H-graph, zero-based.
pub const EDGES: [(usize, usize); 5] = [(0, 2), (1, 2), (2, 3), (3, 4), (3, 5)];

/// The six vertex weights of an H-graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct HLabels(pub [i64; 6]);

impl HLabels {
    pub fn new(b: [i64; 6]) -> Result<Self> {
        if b.iter().any(|&x| x < 1) {
            return Err(Error::Invalid(format!("labels must be positive, got {b:?}")));
        }
        Ok(Self(b))
    }

    /// `b_j` with the one-based index used throughout.
    pub fn b(&self, j: usize) -> i64 {
        self.0[j - 1]
    }

    pub fn trace(&self) -> i64 {
        self.0.iter().sum()
    }

    pub fn swap_first_leaves(&self) -> Self {
        let [b1, b2, b3, b4, b5, b6] = self.0;
        Self([b2, b1, b3, b4, b5, b6])
    }

    pub fn swap_second_leaves(&self) -> Self {
        let [b1, b2, b3, b4, b5, b6] = self.0;
        Self([b1, b2, b3, b4, b6, b5])
    }

    pub fn swap_arms(&self) -> Self {
        let [b1, b2, b3, b4, b5, b6] = self.0;
        Self([b5, b6, b4, b3, b1, b2])
    }
}

impl fmt::Display for HLabels {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [b1, b2, b3, b4, b5, b6] = self.0;
        write!(f, "({b1},{b2},{b3},{b4},{b5},{b6})")
    }
}

impl FromStr for HLabels {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().trim_matches(|c| c == '(' || c == ')').split(',').collect();
        if parts.len() != 6 {
            return Err(Error::Invalid(format!("expected six comma-separated labels, got {s:?}")));
        }
        let mut b = [0i64; 6];
        for (slot, p) in b.iter_mut().zip(parts) {
            *slot = p
                .trim()
                .parse()
                .map_err(|_| Error::Invalid(format!("bad label {p:?} in {s:?}")))?;
        }
        Self::new(b)
    }
}

pub fn build_matrix(h: &HLabels) -> Matrix {
    build_matrix_generic::<Integer>(h)
}

/// The plumbing matrix over any exact integer scalar.
pub fn build_matrix_generic<T: crate::exact::ExactInt>(h: &HLabels) -> IntMatrix<T> {
    let mut data = vec![T::zero(); 36];
    for i in 0..6 {
        data[i * 6 + i] = T::from_i64(h.0[i]).expect("label fits scalar");
    }
    for &(i, j) in &EDGES {
        data[i * 6 + j] = -T::one();
        data[j * 6 + i] = -T::one();
    }
    IntMatrix::new(6, 6, data).expect("6x6 shape")
}

/// The expanded determinant polynomial.
pub fn det_closed_form(h: &HLabels) -> Integer {
    let b: Vec<Integer> = h.0.iter().map(|&x| Integer::from(x)).collect();
    let (b1, b2, b3, b4, b5, b6) = (&b[0], &b[1], &b[2], &b[3], &b[4], &b[5]);
    b1 * b2 * b3 * b4 * b5 * b6
        - b1 * b2 * b3 * b5
        - b1 * b2 * b3 * b6
        - b1 * b2 * b5 * b6
        - b1 * b4 * b5 * b6
        - b2 * b4 * b5 * b6
        + (b1 + b2) * (b5 + b6)
}

/// Determinant 1 and all leading principal minors positive.
pub fn is_pu(h: &HLabels) -> bool {
    if det_closed_form(h) != Integer::from(1) {
        return false;
    }
    // Minors fit comfortably in i128 for labels inside the search box.
    let m = build_matrix_generic::<i128>(h);
    m.leading_principal_minors().map(|ms| ms.iter().all(|x| *x > 0)).unwrap_or(false)
}

/// The search box, stated for the orientation with the unit center at `b4`.
///
/// Leaf pairs are bounded by their smaller and larger member so that both
/// leaf orders fall inside the same box.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchBox {
    pub big_arm_min: i64,
    pub big_arm_max: i64,
    pub center_lo: i64,
    pub center_hi: i64,
    pub small_arm_min: i64,
    pub small_arm_max: i64,
}

impl SearchBox {
    /// `b1 <= 23, b2 <= 133, 2 <= b3 <= 7, b4 = 1, b5 <= 13, b6 <= 97`, up to leaf order.
    pub const FINITENESS: SearchBox = SearchBox {
        big_arm_min: 23,
        big_arm_max: 133,
        center_lo: 2,
        center_hi: 7,
        small_arm_min: 13,
        small_arm_max: 97,
    };

    fn leaf_pair_ok(x: i64, y: i64, min_bound: i64, max_bound: i64) -> bool {
        x >= 2 && y >= 2 && x.min(y) <= min_bound && x.max(y) <= max_bound
    }

    /// Membership for a labeling with `b4 = 1`.
    pub fn contains_oriented(&self, h: &HLabels) -> bool {
        let [b1, b2, b3, b4, b5, b6] = h.0;
        b4 == 1
            && (self.center_lo..=self.center_hi).contains(&b3)
            && Self::leaf_pair_ok(b1, b2, self.big_arm_min, self.big_arm_max)
            && Self::leaf_pair_ok(b5, b6, self.small_arm_min, self.small_arm_max)
    }

    /// Membership in either orientation.
    pub fn contains(&self, h: &HLabels) -> bool {
        self.contains_oriented(h) || self.contains_oriented(&h.swap_arms())
    }
}

/// Outcome of the bounded search.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PuCensus {
    /// Every PU labeling found, sorted.
    pub labelings: Vec<HLabels>,
    /// Canonical representatives, one per automorphism class.
    pub classes: Vec<HLabels>,
    /// Labelings with `b4 = 1` only, the narrower reading of the count.
    pub oriented_count: usize,
}

impl PuCensus {
    fn from_labelings(mut labelings: Vec<HLabels>) -> Self {
        labelings.sort();
        labelings.dedup();
        let classes: BTreeSet<HLabels> = labelings.iter().map(canonicalize).collect();
        let oriented_count = labelings.iter().filter(|h| h.b(4) == 1).count();
        Self { labelings, classes: classes.into_iter().collect(), oriented_count }
    }

    /// Reorders `classes` to follow `order` (compared by canonical form);
    /// classes missing from `order` keep their relative order at the end.
    pub fn reorder_classes(&mut self, order: &[HLabels]) {
        let rank: BTreeMap<HLabels, usize> =
            order.iter().enumerate().map(|(i, h)| (canonicalize(h), i)).collect();
        self.classes.sort_by_key(|c| (rank.get(c).copied().unwrap_or(usize::MAX), *c));
    }

    /// One-based class index of a labeling.
    pub fn class_index(&self, h: &HLabels) -> Option<usize> {
        let c = canonicalize(h);
        self.classes.iter().position(|x| *x == c).map(|i| i + 1)
    }

    /// Census rows: labels, det, canonical labels, class index.
    pub fn write_csv<W: std::io::Write>(&self, w: W, rows: &[HLabels]) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let io = |e: csv::Error| Error::Invalid(e.to_string());
        out.write_record([
            "b1", "b2", "b3", "b4", "b5", "b6", "det", "c1", "c2", "c3", "c4", "c5", "c6",
            "class_index",
        ])
        .map_err(io)?;
        for h in rows {
            let c = canonicalize(h);
            let mut rec: Vec<String> = h.0.iter().map(i64::to_string).collect();
            rec.push(det_closed_form(h).to_string());
            rec.extend(c.0.iter().map(i64::to_string));
            rec.push(self.class_index(h).map_or_else(String::new, |i| i.to_string()));
            out.write_record(&rec).map_err(io)?;
        }
        out.flush().map_err(|e| Error::Invalid(e.to_string()))?;
        Ok(())
    }
}

/// Census over [`SearchBox::FINITENESS`].
pub fn enumerate_pu() -> PuCensus {
    enumerate_pu_in(&SearchBox::FINITENESS)
}

/// Pruned search: `D` is affine in `b2`, so for each `(b1, b3, b5, b6)` the only
/// candidate is `b2 = (1 - R) / P` where `D = P b2 + R`.
pub fn enumerate_pu_in(bx: &SearchBox) -> PuCensus {
    let oriented: Vec<HLabels> = (bx.center_lo..=bx.center_hi)
        .flat_map(|b3| (2..=bx.big_arm_max).map(move |b1| (b3, b1)))
        .collect::<Vec<_>>()
        .into_par_iter()
        .flat_map_iter(|(b3, b1)| {
            let mut found = Vec::new();
            for b5 in 2..=bx.small_arm_max {
                for b6 in 2..=bx.small_arm_max {
                    if b5.min(b6) > bx.small_arm_min {
                        continue;
                    }
                    for b2 in b2_candidates(b1, b3, b5, b6, bx.big_arm_max) {
                        let h = HLabels([b1, b2, b3, 1, b5, b6]);
                        if bx.contains_oriented(&h) && is_pu(&h) {
                            found.push(h);
                        }
                    }
                }
            }
            found
        })
        .collect();
    let mut all = oriented.clone();
    all.extend(oriented.iter().map(HLabels::swap_arms).filter(is_pu));
    PuCensus::from_labelings(all)
}

/// Values of `b2` in `2..=max` giving determinant 1 with `b4 = 1`.
fn b2_candidates(b1: i64, b3: i64, b5: i64, b6: i64, max: i64) -> Vec<i64> {
    let p = b1 * b3 * b5 * b6 - b1 * b3 * b5 - b1 * b3 * b6 - b1 * b5 * b6 - b5 * b6 + b5 + b6;
    let r = -b1 * b5 * b6 + b1 * (b5 + b6);
    if p == 0 {
        return if r == 1 { (2..=max).collect() } else { Vec::new() };
    }
    let num = 1 - r;
    if num % p != 0 {
        return Vec::new();
    }
    let b2 = num / p;
    if (2..=max).contains(&b2) && b1.gcd(&b2) == 1 {
        vec![b2]
    } else {
        Vec::new()
    }
}

/// Unpruned scan of every labeling in the box; the test oracle for the pruned search.
pub fn enumerate_pu_brute(bx: &SearchBox) -> PuCensus {
    let mut found = Vec::new();
    for b3 in bx.center_lo..=bx.center_hi {
        for b1 in 2..=bx.big_arm_max {
            for b2 in 2..=bx.big_arm_max {
                for b5 in 2..=bx.small_arm_max {
                    for b6 in 2..=bx.small_arm_max {
                        let h = HLabels([b1, b2, b3, 1, b5, b6]);
                        if !bx.contains_oriented(&h) {
                            continue;
                        }
                        let m = build_matrix_generic::<i128>(&h);
                        if m.det().unwrap() == 1
                            && m.leading_principal_minors().unwrap().iter().all(|x| *x > 0)
                        {
                            found.push(h);
                            found.push(h.swap_arms());
                        }
                    }
                }
            }
        }
    }
    PuCensus::from_labelings(found)
}

/// The orbit under the group generated by the two leaf swaps and the arm swap.
pub fn automorphism_orbit(h: &HLabels) -> BTreeSet<HLabels> {
    let mut out = BTreeSet::new();
    for arm in [false, true] {
        let base = if arm { h.swap_arms() } else { *h };
        for s1 in [false, true] {
            let x = if s1 { base.swap_first_leaves() } else { base };
            for s2 in [false, true] {
                out.insert(if s2 { x.swap_second_leaves() } else { x });
            }
        }
    }
    out
}

fn canonical_key(h: &HLabels) -> (bool, bool, bool, HLabels) {
    let [b1, b2, b3, b4, b5, b6] = h.0;
    (b4 >= b3, b1 > b2, b5 > b6, *h)
}

/// Orbit representative: smaller center in position 4, then sorted leaves,
/// ties broken on the tuple.
pub fn canonicalize(h: &HLabels) -> HLabels {
    automorphism_orbit(h)
        .into_iter()
        .min_by_key(canonical_key)
        .expect("orbit is never empty")
}
