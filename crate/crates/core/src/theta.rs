//! Closed-form q-series for H-graph plumbings.
//!
//! `Z(q)` reduces to a signed sum over sixteen shifted copies of a binary
//! quadratic lattice, weighted by `sgn*(n1) sgn*(n2)`. This module builds the
//! shifts, the quadratic form, the family parameters `(N, r, s)`, and truncated
//! expansions of `Z`, `Z-hat`, the orthant split, and general false theta sums.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use log::warn;
use num_integer::Integer as _;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::lattice::BinaryForm;
use crate::plumbing::{build_matrix, HLabels};
use crate::{Integer, Rational};

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(Integer::from(n), Integer::from(d))
}

fn int(n: i64) -> Integer {
    Integer::from(n)
}

fn to_i128(x: &Integer) -> Result<i128> {
    x.to_i128().ok_or_else(|| Error::Overflow(x.to_string()))
}

/// `Q(n) = sigma1 n1^2 + 2 sigma2 n1 n2 + sigma3 n2^2`, stored with `2 sigma2`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuadraticForm2 {
    pub sigma1: Integer,
    pub two_sigma2: Integer,
    pub sigma3: Integer,
}

impl QuadraticForm2 {
    pub fn new(sigma1: Integer, two_sigma2: Integer, sigma3: Integer) -> Result<Self> {
        let q = Self { sigma1, two_sigma2, sigma3 };
        if !q.sigma1.is_positive() || !q.disc_q().is_positive() {
            return Err(Error::NotPositiveDefinite);
        }
        Ok(q)
    }

    pub fn from_i64(s1: i64, two_s2: i64, s3: i64) -> Result<Self> {
        Self::new(int(s1), int(two_s2), int(s3))
    }

    /// `sigma1 sigma3 - sigma2^2`.
    pub fn disc_q(&self) -> Rational {
        let s2 = Rational::new(self.two_sigma2.clone(), int(2));
        Rational::from_integer(&self.sigma1 * &self.sigma3) - &s2 * &s2
    }

    pub fn eval(&self, x: &[Rational; 2]) -> Rational {
        Rational::from_integer(self.sigma1.clone()) * &x[0] * &x[0]
            + Rational::from_integer(self.two_sigma2.clone()) * &x[0] * &x[1]
            + Rational::from_integer(self.sigma3.clone()) * &x[1] * &x[1]
    }

    /// `Q*(n) = Q(-n1, n2)`.
    pub fn star(&self) -> Self {
        Self {
            sigma1: self.sigma1.clone(),
            two_sigma2: -self.two_sigma2.clone(),
            sigma3: self.sigma3.clone(),
        }
    }

    /// Integer Gram matrix of `2 mult Q`.
    fn doubled_gram(&self, mult: &Integer) -> [[Integer; 2]; 2] {
        let g11 = mult * &self.sigma1 * 2;
        let g12 = mult * &self.two_sigma2;
        let g22 = mult * &self.sigma3 * 2;
        [[g11, g12.clone()], [g12, g22]]
    }
}

impl fmt::Display for QuadraticForm2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}n1^2 + {}n1n2 + {}n2^2", self.sigma1, self.two_sigma2, self.sigma3)
    }
}

pub type Alpha = [Rational; 2];

/// Finite signed subset of `(0,1)^2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignedAlphaSet {
    entries: Vec<(Alpha, i8)>,
}

impl SignedAlphaSet {
    pub fn new(entries: Vec<(Alpha, i8)>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for (a, s) in &entries {
            if !(*s == 1 || *s == -1) {
                return Err(Error::Invalid(format!("sign must be +1 or -1, got {s}")));
            }
            if a.iter().any(|x| !x.is_positive() || *x >= Rational::one()) {
                return Err(Error::Invalid(format!("point ({}, {}) outside (0,1)^2", a[0], a[1])));
            }
            if !seen.insert(a.clone()) {
                return Err(Error::DuplicateAlpha(format!("({}, {})", a[0], a[1])));
            }
        }
        Ok(Self { entries })
    }

    pub fn empty() -> Self {
        Self { entries: Vec::new() }
    }

    pub fn entries(&self) -> &[(Alpha, i8)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn sign_of(&self, a: &Alpha) -> Option<i8> {
        self.entries.iter().find(|(x, _)| x == a).map(|(_, s)| *s)
    }

    /// Points of the given sign.
    pub fn with_sign(&self, sign: i8) -> BTreeSet<Alpha> {
        self.entries.iter().filter(|(_, s)| *s == sign).map(|(a, _)| a.clone()).collect()
    }

    pub fn as_set(&self) -> BTreeSet<(Alpha, i8)> {
        self.entries.iter().cloned().collect()
    }

    /// Smallest positive `K` with `K S` integral.
    pub fn k_min(&self) -> Integer {
        self.entries
            .iter()
            .flat_map(|(a, _)| a.iter().map(|x| x.denom().clone()))
            .fold(Integer::one(), |acc, d| acc.lcm(&d))
    }

    /// Closed under the three reflections with matching signs.
    pub fn is_closed(&self) -> bool {
        let one = Rational::one();
        self.entries.iter().all(|(a, s)| {
            let images = [
                [&one - &a[0], &one - &a[1]],
                [&one - &a[0], a[1].clone()],
                [a[0].clone(), &one - &a[1]],
            ];
            images.iter().all(|b| self.sign_of(b) == Some(*s))
        })
    }
}

/// Exact truncated q-series `q^prefactor * sum_e c_e q^(e / denom)`.
///
/// Every exponent `prefactor + e / denom` is below `cutoff`; terms at or above
/// it are unknown.
#[derive(Clone, Debug)]
pub struct QSeries {
    pub denom: Integer,
    pub prefactor: Rational,
    pub terms: BTreeMap<Integer, Rational>,
    pub cutoff: Rational,
}

impl QSeries {
    /// Builds a series from relative exponents, merging equal exponents and
    /// dropping zero coefficients and anything at or above the cutoff.
    pub fn from_terms<I>(prefactor: Rational, cutoff: Rational, terms: I) -> Self
    where
        I: IntoIterator<Item = (Rational, Rational)>,
    {
        let mut merged: BTreeMap<Rational, Rational> = BTreeMap::new();
        for (e, c) in terms {
            if &prefactor + &e < cutoff {
                *merged.entry(e).or_insert_with(Rational::zero) += c;
            }
        }
        merged.retain(|_, c| !c.is_zero());
        let denom = merged.keys().fold(Integer::one(), |acc, e| acc.lcm(e.denom()));
        let terms = merged
            .into_iter()
            .map(|(e, c)| ((e * Rational::from_integer(denom.clone())).to_integer(), c))
            .collect();
        Self { denom, prefactor, terms, cutoff }
    }

    pub fn zero(prefactor: Rational, cutoff: Rational) -> Self {
        Self::from_terms(prefactor, cutoff, std::iter::empty())
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Relative exponents paired with coefficients.
    pub fn relative_terms(&self) -> Vec<(Rational, Rational)> {
        self.terms
            .iter()
            .map(|(e, c)| (Rational::new(e.clone(), self.denom.clone()), c.clone()))
            .collect()
    }

    /// Absolute exponent to coefficient.
    pub fn absolute(&self) -> BTreeMap<Rational, Rational> {
        self.relative_terms().into_iter().map(|(e, c)| (&self.prefactor + e, c)).collect()
    }

    pub fn coefficient_at(&self, absolute_exponent: &Rational) -> Rational {
        self.absolute().get(absolute_exponent).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn scale(&self, s: &Rational) -> Self {
        Self::from_terms(
            self.prefactor.clone(),
            self.cutoff.clone(),
            self.relative_terms().into_iter().map(|(e, c)| (e, c * s)),
        )
    }

    /// Same series with the prefactor folded into the relative exponents.
    pub fn rebased(&self, prefactor: Rational) -> Self {
        let shift = &self.prefactor - &prefactor;
        Self::from_terms(
            prefactor,
            self.cutoff.clone(),
            self.relative_terms().into_iter().map(|(e, c)| (e + &shift, c)),
        )
    }

    /// Difference with the other series' terms rebased onto this prefactor;
    /// the cutoff is the smaller of the two.
    pub fn sub(&self, other: &Self) -> Self {
        let cutoff = self.cutoff.clone().min(other.cutoff.clone());
        let shift = &other.prefactor - &self.prefactor;
        let mine = self.relative_terms();
        let theirs = other.relative_terms().into_iter().map(|(e, c)| (e + &shift, -c));
        Self::from_terms(self.prefactor.clone(), cutoff, mine.into_iter().chain(theirs))
    }

    /// Substitutes `q -> q^(1/2)`.
    pub fn halve_exponents(&self) -> Self {
        let half = rat(1, 2);
        Self::from_terms(
            &self.prefactor * &half,
            &self.cutoff * &half,
            self.relative_terms().into_iter().map(|(e, c)| (e * &half, c)),
        )
    }

    /// Serialized with exact integers; values beyond `i64` become strings.
    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self
            .terms
            .iter()
            .map(|(e, c)| json!([int_json(e), int_json(c.numer()), int_json(c.denom())]))
            .collect();
        json!({
            "denom": int_json(&self.denom),
            "prefactor_exponent": [int_json(self.prefactor.numer()), int_json(self.prefactor.denom())],
            "terms": terms,
            "cutoff": [int_json(self.cutoff.numer()), int_json(self.cutoff.denom())],
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |what: &str| Error::Invalid(format!("malformed series JSON: {what}"));
        let pair = |x: &Value, what: &str| -> Result<Rational> {
            let a = x.as_array().filter(|a| a.len() == 2).ok_or_else(|| bad(what))?;
            let den = json_int(&a[1]).ok_or_else(|| bad(what))?;
            if den.is_zero() {
                return Err(bad(what));
            }
            Ok(Rational::new(json_int(&a[0]).ok_or_else(|| bad(what))?, den))
        };
        let denom = json_int(&v["denom"]).filter(|d| d.is_positive()).ok_or_else(|| bad("denom"))?;
        let prefactor = pair(&v["prefactor_exponent"], "prefactor_exponent")?;
        let cutoff = pair(&v["cutoff"], "cutoff")?;
        let mut terms = BTreeMap::new();
        for t in v["terms"].as_array().ok_or_else(|| bad("terms"))? {
            let t = t.as_array().filter(|a| a.len() == 3).ok_or_else(|| bad("term"))?;
            let e = json_int(&t[0]).ok_or_else(|| bad("term exponent"))?;
            let num = json_int(&t[1]).ok_or_else(|| bad("term numerator"))?;
            let den = json_int(&t[2]).filter(|d| !d.is_zero()).ok_or_else(|| bad("term denominator"))?;
            terms.insert(e, Rational::new(num, den));
        }
        Ok(Self { denom, prefactor, terms, cutoff })
    }
}

impl PartialEq for QSeries {
    /// Equal cutoffs and equal absolute expansions, whatever the prefactor split.
    fn eq(&self, other: &Self) -> bool {
        self.cutoff == other.cutoff && self.absolute() == other.absolute()
    }
}

fn int_json(x: &Integer) -> Value {
    match x.to_i64() {
        Some(v) => json!(v),
        None => json!(x.to_string()),
    }
}

fn json_int(v: &Value) -> Option<Integer> {
    match v {
        Value::Number(n) => n.as_i64().map(Integer::from),
        Value::String(s) => s.parse().ok(),
        _ => None,
    }
}

/// `(N1, N2, r1, s1, r2, s2)` describing the shifts `S1, S2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilyParams {
    pub n1: Integer,
    pub n2: Integer,
    pub r1: Integer,
    pub s1: Integer,
    pub r2: Integer,
    pub s2: Integer,
}

impl FamilyParams {
    pub fn from_i64(n1: i64, n2: i64, r1: i64, s1: i64, r2: i64, s2: i64) -> Self {
        Self { n1: int(n1), n2: int(n2), r1: int(r1), s1: int(s1), r2: int(r2), s2: int(s2) }
    }

    /// `L = gcd(N1, N2)`.
    pub fn l(&self) -> Integer {
        self.n1.gcd(&self.n2)
    }

    /// `R1 = N1 / L`.
    pub fn big_r1(&self) -> Integer {
        &self.n1 / self.l()
    }

    /// `R2 = N2 / L`.
    pub fn big_r2(&self) -> Integer {
        &self.n2 / self.l()
    }

    /// `L R1 R2 = lcm(N1, N2)`.
    pub fn k(&self) -> Integer {
        self.l() * self.big_r1() * self.big_r2()
    }

    fn reflections(x: &Integer, n: &Integer) -> [Rational; 2] {
        let a = Rational::new(x.clone(), n.clone());
        [a.clone(), Rational::one() - a]
    }

    /// `S1` (sign +1) followed by `S2` (sign -1); reflections that coincide are
    /// reported as duplicates.
    pub fn signed_set(&self) -> Result<SignedAlphaSet> {
        let r1 = Self::reflections(&self.r1, &self.n1);
        let s1 = Self::reflections(&self.s1, &self.n1);
        let r2 = Self::reflections(&self.r2, &self.n2);
        let s2 = Self::reflections(&self.s2, &self.n2);
        let mut entries = Vec::with_capacity(16);
        for (xs, ys, sign) in [(&r1, &r2, 1), (&s1, &s2, 1), (&r1, &s2, -1), (&s1, &r2, -1)] {
            for y in ys.iter() {
                for x in xs.iter() {
                    entries.push(([x.clone(), y.clone()], sign));
                }
            }
        }
        SignedAlphaSet::new(entries)
    }
}

fn m_inverse(h: &HLabels) -> Result<Vec<Rational>> {
    build_matrix(h).inverse_rational()
}

/// Middle `2 x 2` block of `M^{-1}` (rows and columns of the two centers).
pub fn central_block(h: &HLabels) -> Result<[[Rational; 2]; 2]> {
    let inv = m_inverse(h)?;
    let at = |i: usize, j: usize| inv[i * 6 + j].clone();
    Ok([[at(2, 2), at(2, 3)], [at(3, 2), at(3, 3)]])
}

/// Closed form of the central block, valid when `det M = 1`.
pub fn central_block_closed_form(h: &HLabels) -> [[Rational; 2]; 2] {
    let [b1, b2, _b3, b4, b5, b6] = h.0.map(int);
    let l33 = &b1 * &b2 * (&b4 * &b5 * &b6 - &b5 - &b6);
    let l34 = &b1 * &b2 * &b5 * &b6;
    let l44 = Rational::new(&b5 * &b6 * (&b1 * &b2 * &b5 * &b6 + 1), &b4 * &b5 * &b6 - &b5 - &b6);
    let l34 = Rational::from_integer(l34);
    [[Rational::from_integer(l33), l34.clone()], [l34, l44]]
}

/// `alpha(eps) = (1 + e1/b1 + e2/b2, 1 + e5/b5 + e6/b6) / 2` for the sixteen
/// sign vectors, with sign `e1 e2 e5 e6`.
pub fn alpha_set(h: &HLabels) -> Result<SignedAlphaSet> {
    let [b1, b2, _, _, b5, b6] = h.0;
    if [b1, b2, b5, b6].iter().any(|&b| b < 2) {
        return Err(Error::Invalid(format!("leaf labels of {h} must be at least 2")));
    }
    let mut entries = Vec::with_capacity(16);
    for eps in sign_vectors() {
        entries.push((alpha_of(h, eps), eps.iter().product()));
    }
    SignedAlphaSet::new(entries)
}

/// All of `{+1, -1}^4`, all-plus first.
pub fn sign_vectors() -> impl Iterator<Item = [i8; 4]> {
    (0..16u8).map(|m| {
        let s = |bit: u8| if m & (1 << bit) == 0 { 1 } else { -1 };
        [s(3), s(2), s(1), s(0)]
    })
}

fn alpha_of(h: &HLabels, eps: [i8; 4]) -> Alpha {
    let [b1, b2, _, _, b5, b6] = h.0;
    let half = rat(1, 2);
    let a1 = (Rational::one() + rat(eps[0] as i64, b1) + rat(eps[1] as i64, b2)) * &half;
    let a2 = (Rational::one() + rat(eps[2] as i64, b5) + rat(eps[3] as i64, b6)) * &half;
    [a1, a2]
}

/// `c = (1/b1 + 1/b2 + 1/b5 + 1/b6) / 2`.
pub fn shift_constant(h: &HLabels) -> Rational {
    let [b1, b2, _, _, b5, b6] = h.0;
    (rat(1, b1) + rat(1, b2) + rat(1, b5) + rat(1, b6)) * rat(1, 2)
}

/// `9 - tr(M)/2 - c`.
pub fn c_m(h: &HLabels) -> Rational {
    Rational::from_integer(int(9)) - rat(h.trace(), 2) - shift_constant(h)
}

/// Exponent shift of the closed form: `-9 + tr(M)/2 + c`.
pub fn z_prefactor(h: &HLabels) -> Rational {
    -c_m(h)
}

/// Parity of the two center coordinates of `r` in the quadratic identity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Odd,
    Even,
}

/// Both sides of `r^T M^{-1} r / 2 = (2n + 2 alpha)^T A (2n + 2 alpha) / 2 + c`,
/// with the inverse computed once.
pub struct QuadraticIdentity {
    h: HLabels,
    inv: Vec<Rational>,
    block: [[Rational; 2]; 2],
    c: Rational,
}

impl QuadraticIdentity {
    pub fn new(h: &HLabels) -> Result<Self> {
        let inv = m_inverse(h)?;
        let at = |i: usize, j: usize| inv[i * 6 + j].clone();
        let block = [[at(2, 2), at(2, 3)], [at(3, 2), at(3, 3)]];
        Ok(Self { h: *h, inv, block, c: shift_constant(h) })
    }

    pub fn lhs(&self, n: [i64; 2], eps: [i8; 4], parity: Parity) -> Rational {
        let off = if parity == Parity::Odd { 1 } else { 0 };
        let r = [
            eps[0] as i64,
            eps[1] as i64,
            2 * n[0] + off,
            2 * n[1] + off,
            eps[2] as i64,
            eps[3] as i64,
        ];
        let mut acc = Rational::zero();
        for i in 0..6 {
            for j in 0..6 {
                acc += &self.inv[i * 6 + j] * Rational::from_integer(int(r[i] * r[j]));
            }
        }
        acc * rat(1, 2)
    }

    pub fn rhs(&self, n: [i64; 2], eps: [i8; 4]) -> Rational {
        let a = alpha_of(&self.h, eps);
        let two = Rational::from_integer(int(2));
        let v = [
            (Rational::from_integer(int(n[0])) + &a[0]) * &two,
            (Rational::from_integer(int(n[1])) + &a[1]) * &two,
        ];
        let mut acc = Rational::zero();
        for i in 0..2 {
            for j in 0..2 {
                acc += &self.block[i][j] * &v[i] * &v[j];
            }
        }
        acc * rat(1, 2) + &self.c
    }

    pub fn holds(&self, n: [i64; 2], eps: [i8; 4], parity: Parity) -> bool {
        self.lhs(n, eps, parity) == self.rhs(n, eps)
    }
}

/// The identity with odd center coordinates `2n + 1`.
pub fn lemma52_check(h: &HLabels, n: [i64; 2], eps: [i8; 4]) -> Result<bool> {
    lemma52_check_with(h, n, eps, Parity::Odd)
}

pub fn lemma52_check_with(h: &HLabels, n: [i64; 2], eps: [i8; 4], parity: Parity) -> Result<bool> {
    Ok(QuadraticIdentity::new(h)?.holds(n, eps, parity))
}

/// Which `n` a shifted lattice sum runs over, and with what weight.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Region {
    /// `n in Z^2` weighted by `sgn*(n1) sgn*(n2)`.
    SignedPlane,
    /// `n in N_0^2`, weight one.
    Orthant,
}

/// `sum_{alpha in S} sign(alpha) sum_{n in region} w(n) q^((n+alpha)^T G (n+alpha) / gden)`
/// for exponents below `bound`, as (exponent, coefficient) pairs.
fn shifted_lattice_terms(
    set: &SignedAlphaSet,
    gram: &[[Integer; 2]; 2],
    gden: &Integer,
    region: Region,
    bound: &Rational,
) -> Result<Vec<(Rational, Rational)>> {
    if set.is_empty() || !bound.is_positive() {
        return Ok(Vec::new());
    }
    let d = set.k_min();
    let scale = gden * &d * &d;
    let form = BinaryForm::homogeneous(to_i128(&gram[0][0])?, to_i128(&gram[0][1])?, to_i128(&gram[1][1])?);
    if !form.is_positive_definite() {
        return Err(Error::NotPositiveDefinite);
    }
    let limit = to_i128(&(bound * Rational::from_integer(scale.clone())).ceil().to_integer())?;
    let d128 = to_i128(&d)?;
    let per_alpha: Vec<Result<Vec<(Rational, Rational)>>> = set
        .entries()
        .par_iter()
        .map(|(a, sign)| {
            let res = [
                to_i128(&(&a[0] * Rational::from_integer(d.clone())).to_integer())?,
                to_i128(&(&a[1] * Rational::from_integer(d.clone())).to_integer())?,
            ];
            let mut out = Vec::new();
            for (y, v) in form.points_below(&limit, &d128, &res) {
                let n = [(y[0] - res[0]) / d128, (y[1] - res[1]) / d128];
                let w = match region {
                    Region::SignedPlane => sgn_star(n[0]) * sgn_star(n[1]),
                    Region::Orthant => {
                        if n[0] < 0 || n[1] < 0 {
                            continue;
                        }
                        1
                    }
                };
                let e = Rational::new(Integer::from(v), scale.clone());
                out.push((e, rat((w * sign) as i64, 1)));
            }
            Ok(out)
        })
        .collect();
    let mut all = Vec::new();
    for part in per_alpha {
        all.extend(part?);
    }
    Ok(all)
}

fn sgn_star(x: i128) -> i8 {
    if x < 0 {
        -1
    } else {
        1
    }
}

fn block_gram(h: &HLabels) -> Result<[[Integer; 2]; 2]> {
    let a = central_block(h)?;
    let two = Rational::from_integer(int(2));
    let mut g: [[Integer; 2]; 2] = Default::default();
    for i in 0..2 {
        for j in 0..2 {
            let v = &a[i][j] * &two;
            if !v.is_integer() {
                return Err(Error::NotPu(h.to_string()));
            }
            g[i][j] = v.to_integer();
        }
    }
    Ok(g)
}

fn require_pu(h: &HLabels) -> Result<()> {
    if crate::plumbing::is_pu(h) {
        Ok(())
    } else {
        Err(Error::NotPu(h.to_string()))
    }
}

/// `sum_alpha sign(alpha) sum_{n in Z^2} sgn*(n1) sgn*(n2) q^(2 (n+alpha)^T A (n+alpha))`
/// below the relative cutoff, no prefactor and no factor `1/4`.
pub fn sgn_double_sum(h: &HLabels, cutoff: &Rational) -> Result<QSeries> {
    require_pu(h)?;
    let terms = shifted_lattice_terms(&alpha_set(h)?, &block_gram(h)?, &Integer::one(), Region::SignedPlane, cutoff)?;
    Ok(QSeries::from_terms(Rational::zero(), cutoff.clone(), terms))
}

/// `Z(q)` with every exponent below `cutoff`.
pub fn z_series(h: &HLabels, cutoff: &Rational) -> Result<QSeries> {
    let pre = z_prefactor(h);
    let inner = sgn_double_sum(h, &(cutoff - &pre))?;
    let quarter = rat(1, 4);
    Ok(QSeries::from_terms(
        pre,
        cutoff.clone(),
        inner.relative_terms().into_iter().map(|(e, c)| (e, c * &quarter)),
    ))
}

/// Absolute exponent of the first nonvanishing term of `Z(q)`, found by
/// doubling the relative cutoff.
pub fn leading_exponent(h: &HLabels) -> Result<Rational> {
    let mut cut = Rational::one();
    for _ in 0..40 {
        let s = sgn_double_sum(h, &cut)?;
        if let Some((e, _)) = s.relative_terms().into_iter().next() {
            return Ok(z_prefactor(h) + e);
        }
        cut = cut * Rational::from_integer(int(2));
    }
    Err(Error::Invalid(format!("{h}: no terms found")))
}

/// `Z-hat(q)`, i.e. `Z` with `q^2 -> q`; `cutoff` applies to the halved exponents.
pub fn zhat_series(h: &HLabels, cutoff: &Rational) -> Result<QSeries> {
    Ok(z_series(h, &(cutoff * Rational::from_integer(int(2))))?.halve_exponents())
}

/// The orthant sums `(Z1, Z2)` over `S1, S2` with `L Q` and `L Q*`, below the cutoff.
pub fn z_split(h: &HLabels, cutoff: &Rational) -> Result<(QSeries, QSeries)> {
    require_pu(h)?;
    let (p, q) = derive_family_params(h)?;
    let set = p.signed_set()?;
    let l = p.l();
    let two = int(2);
    let g1 = q.doubled_gram(&l);
    let g2 = q.star().doubled_gram(&l);
    let t1 = shifted_lattice_terms(&set, &g1, &two, Region::Orthant, cutoff)?;
    let t2 = shifted_lattice_terms(&set, &g2, &two, Region::Orthant, cutoff)?;
    Ok((
        QSeries::from_terms(Rational::zero(), cutoff.clone(), t1),
        QSeries::from_terms(Rational::zero(), cutoff.clone(), t2),
    ))
}

/// `F(q) = sum_{alpha in S} eps(alpha) sum_{n in N_0^2} q^(K Q(n + alpha))` below the cutoff.
pub fn false_theta_series(set: &SignedAlphaSet, q: &QuadraticForm2, k: &Integer, cutoff: &Rational) -> Result<QSeries> {
    if !q.sigma1.is_positive() || !q.disc_q().is_positive() {
        return Err(Error::NotPositiveDefinite);
    }
    let k_min = set.k_min();
    if !set.is_empty() && !k.is_multiple_of(&k_min) {
        warn!("K = {k} does not clear the denominators of S (minimal K is {k_min})");
    } else if !set.is_empty() && *k != k_min {
        warn!("K = {k} differs from the minimal K = {k_min}");
    }
    let terms = shifted_lattice_terms(set, &q.doubled_gram(k), &int(2), Region::Orthant, cutoff)?;
    Ok(QSeries::from_terms(Rational::zero(), cutoff.clone(), terms))
}

/// Family parameters and the form `Q` with `L Q(x) = 2 x^T A x`.
pub fn derive_family_params(h: &HLabels) -> Result<(FamilyParams, QuadraticForm2)> {
    let [b1, b2, _, _, b5, b6] = h.0;
    let (n1, r1, s1) = arm_params(b1, b2).ok_or_else(|| Error::OutsideFamily(h.to_string(), "first arm".into()))?;
    let (n2, r2, s2) = arm_params(b5, b6).ok_or_else(|| Error::OutsideFamily(h.to_string(), "second arm".into()))?;
    let p = FamilyParams::from_i64(n1, n2, r1, s1, r2, s2);
    let a = central_block(h)?;
    let l = Rational::from_integer(p.l());
    let need_int = |x: Rational, what: &str| -> Result<Integer> {
        if x.is_integer() {
            Ok(x.to_integer())
        } else {
            Err(Error::OutsideFamily(h.to_string(), format!("{what} = {x} is not integral")))
        }
    };
    let two = Rational::from_integer(int(2));
    let four = Rational::from_integer(int(4));
    let sigma1 = need_int(&a[0][0] * &two / &l, "sigma1")?;
    let two_sigma2 = need_int(&a[0][1] * &four / &l, "2 sigma2")?;
    let sigma3 = need_int(&a[1][1] * &two / &l, "sigma3")?;
    let q = QuadraticForm2::new(sigma1, two_sigma2, sigma3)?;
    Ok((p, q))
}

/// `(N, r, s)` for one arm: `r` from the all-minus signs, `s` the mixed value below `N/2`.
fn arm_params(x: i64, y: i64) -> Option<(i64, i64, i64)> {
    let l = x.lcm(&y);
    let n = 2 * l;
    let r = l - l / x - l / y;
    let s = [l - l / x + l / y, l + l / x - l / y].into_iter().find(|&s| 0 < s && s < l)?;
    if r <= 0 {
        return None;
    }
    Some((n, r, s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const E1: HLabels = HLabels([2, 3, 7, 1, 2, 3]);
    const E2: HLabels = HLabels([2, 7, 4, 1, 5, 2]);
    const E26: HLabels = HLabels([6, 67, 2, 1, 4, 5]);

    fn r(n: i64, d: i64) -> Rational {
        rat(n, d)
    }

    #[test]
    fn central_block_entry_one() {
        let a = central_block(&E1).unwrap();
        assert_eq!(a, [[r(6, 1), r(36, 1)], [r(36, 1), r(222, 1)]]);
        assert_eq!(central_block_closed_form(&E1), a);
    }

    #[test]
    fn alpha_set_entry_one() {
        let s = alpha_set(&E1).unwrap();
        assert_eq!(s.len(), 16);
        assert!(s.is_closed());
        let coords: BTreeSet<Rational> = s.entries().iter().flat_map(|(a, _)| a.clone()).collect();
        let expect: BTreeSet<Rational> = [1, 5, 7, 11].iter().map(|&x| r(x, 12)).collect();
        assert_eq!(coords, expect);
        let fam = FamilyParams::from_i64(12, 12, 1, 5, 1, 5).signed_set().unwrap();
        assert_eq!(s.as_set(), fam.as_set());
    }

    #[test]
    fn alpha_set_entry_two_first_coordinates() {
        let s = alpha_set(&E2).unwrap();
        let firsts: BTreeSet<Rational> = s.entries().iter().map(|(a, _)| a[0].clone()).collect();
        let expect: BTreeSet<Rational> = [5, 9, 19, 23].iter().map(|&x| r(x, 28)).collect();
        assert_eq!(firsts, expect);
    }

    #[test]
    fn alpha_set_rejects_small_leaf() {
        assert!(alpha_set(&HLabels([1, 3, 7, 1, 2, 3])).is_err());
        assert!(matches!(alpha_set(&HLabels([3, 3, 7, 1, 2, 3])), Err(Error::DuplicateAlpha(_))));
    }

    #[test]
    fn constants() {
        assert_eq!(shift_constant(&E1), r(5, 6));
        assert_eq!(shift_constant(&HLabels([7, 18, 3, 1, 2, 7])), r(53, 126));
        assert_eq!(c_m(&E1), r(-5, 6));
        // (3,4,3,1,3,4): tr = 18, c = 7/12
        assert_eq!(c_m(&HLabels([3, 4, 3, 1, 3, 4])), r(-7, 12));
        let h = HLabels([2, 11, 3, 1, 3, 4]);
        assert_eq!(c_m(&h) + shift_constant(&h) + r(h.trace(), 2), r(9, 1));
    }

    #[test]
    fn identity_parity() {
        let l = QuadraticIdentity::new(&E1).unwrap();
        assert!(l.holds([0, 0], [1, 1, 1, 1], Parity::Odd));
        assert!(!l.holds([0, 0], [1, 1, 1, 1], Parity::Even));
        assert!(lemma52_check(&E1, [2, -3], [-1, 1, -1, 1]).unwrap());
    }

    #[test]
    fn family_entry_one_and_26() {
        let (p, q) = derive_family_params(&E1).unwrap();
        assert_eq!(p, FamilyParams::from_i64(12, 12, 1, 5, 1, 5));
        assert_eq!(q, QuadraticForm2::from_i64(1, 12, 37).unwrap());
        let (p, q) = derive_family_params(&E26).unwrap();
        assert_eq!(q, QuadraticForm2::from_i64(2211, 8040, 7310).unwrap());
        assert_eq!((p.n1, p.n2), (int(804), int(40)));
    }

    #[test]
    fn empty_below_minimal_exponent() {
        let z = z_series(&E1, &r(0, 1)).unwrap();
        assert!(z.is_empty());
    }

    #[test]
    fn lowest_exponent_matches_brute_force() {
        let s = sgn_double_sum(&E1, &r(30, 1)).unwrap();
        let (p, q) = derive_family_params(&E1).unwrap();
        let l = Rational::from_integer(p.l());
        let mut best: Option<Rational> = None;
        for (a, _) in alpha_set(&E1).unwrap().entries() {
            for n1 in -2..=2 {
                for n2 in -2..=2 {
                    let x = [&a[0] + r(n1, 1), &a[1] + r(n2, 1)];
                    let v = &l * q.eval(&x);
                    if best.as_ref().map_or(true, |b| v < *b) {
                        best = Some(v);
                    }
                }
            }
        }
        let lowest = s.relative_terms()[0].0.clone();
        assert_eq!(Some(lowest), best);
    }

    #[test]
    fn zhat_halves() {
        let z = z_series(&E1, &r(30, 1)).unwrap();
        let zh = zhat_series(&E1, &r(15, 1)).unwrap();
        assert_eq!(zh, z.halve_exponents());
        let ze: Vec<Rational> = z.absolute().keys().map(|e| e * r(1, 2)).collect();
        let zhe: Vec<Rational> = zh.absolute().keys().cloned().collect();
        assert_eq!(ze, zhe);
        let zc: Vec<Rational> = z.absolute().into_values().collect();
        let zhc: Vec<Rational> = zh.absolute().into_values().collect();
        assert_eq!(zc, zhc);
    }

    #[test]
    fn single_point_false_theta() {
        let set = SignedAlphaSet::new(vec![([r(1, 2), r(1, 2)], 1)]).unwrap();
        let q = QuadraticForm2::from_i64(1, 0, 1).unwrap();
        let f = false_theta_series(&set, &q, &int(2), &r(5, 1)).unwrap();
        // direct double loop
        let mut direct: BTreeMap<Rational, Rational> = BTreeMap::new();
        for n1 in 0..10 {
            for n2 in 0..10 {
                let x = [r(2 * n1 + 1, 2), r(2 * n2 + 1, 2)];
                let e = q.eval(&x) * r(2, 1);
                if e < r(5, 1) {
                    *direct.entry(e).or_insert_with(Rational::zero) += r(1, 1);
                }
            }
        }
        assert_eq!(f.absolute(), direct);
        assert_eq!(f.coefficient_at(&r(1, 1)), r(1, 1));
        assert!(false_theta_series(&SignedAlphaSet::empty(), &q, &int(2), &r(5, 1)).unwrap().is_empty());
    }

    #[test]
    fn false_theta_matches_z1_after_rescaling() {
        let (p, q) = derive_family_params(&E1).unwrap();
        let (z1, _) = z_split(&E1, &r(40, 1)).unwrap();
        let rr = Rational::from_integer(p.big_r1() * p.big_r2());
        let f = false_theta_series(&p.signed_set().unwrap(), &q, &p.k(), &(r(40, 1) * &rr)).unwrap();
        let rescaled: BTreeMap<Rational, Rational> = f.absolute().into_iter().map(|(e, c)| (e / &rr, c)).collect();
        assert_eq!(rescaled, z1.absolute());
    }

    #[test]
    fn split_coefficients_bounded() {
        let (z1, z2) = z_split(&E1, &r(50, 1)).unwrap();
        for (_, c) in z1.relative_terms().into_iter().chain(z2.relative_terms()) {
            assert!(c.is_integer() && c.abs() <= r(8, 1));
        }
    }

    #[test]
    fn exponent_lattice() {
        let (p, _) = derive_family_params(&E1).unwrap();
        let z = z_series(&E1, &r(40, 1)).unwrap();
        let step = Rational::from_integer(p.k() * 2);
        for (e, _) in z.relative_terms() {
            assert!((e * &step).is_integer());
        }
    }

    #[test]
    fn leading_exponent_is_first_term() {
        let lead = leading_exponent(&E1).unwrap();
        let z = z_series(&E1, &(&lead + r(10, 1))).unwrap();
        assert_eq!(z.absolute().into_keys().next(), Some(lead.clone()));
        assert!(z_series(&E1, &lead).unwrap().is_empty());
    }

    #[test]
    fn json_round_trip() {
        let z = z_series(&E1, &r(20, 1)).unwrap();
        let back = QSeries::from_json(&z.to_json()).unwrap();
        assert_eq!(back, z);
        assert_eq!(back.denom, z.denom);
        assert_eq!(back.terms, z.terms);
    }

    proptest! {
        #[test]
        fn reflection_closure_for_labels(b1 in 2i64..30, b2 in 2i64..30, b5 in 2i64..30, b6 in 2i64..30) {
            prop_assume!(b1 != b2 && b5 != b6);
            let s = alpha_set(&HLabels([b1, b2, 3, 1, b5, b6])).unwrap();
            prop_assert!(s.is_closed());
            prop_assert_eq!(s.len(), 16);
        }
    }
}
