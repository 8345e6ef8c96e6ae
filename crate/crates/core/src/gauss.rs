//! Exact sums of roots of unity, quadratic Gauss sums, and the quantum-set
//! vanishing tests.

use std::ops::{Add, Mul, Neg, Sub};

use num_integer::Integer as _;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::theta::{FamilyParams, QuadraticForm2, SignedAlphaSet};
use crate::Integer;

/// `sum_t coeffs[t] * exp(2 pi i t / order)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CyclotomicSum<T> {
    order: u64,
    coeffs: Vec<T>,
}

impl<T> CyclotomicSum<T>
where
    T: Clone + Zero + PartialEq + Sub<Output = T> + Neg<Output = T>,
{
    pub fn new(order: u64) -> Result<Self> {
        if order == 0 {
            return Err(Error::NonPositiveModulus(order.to_string()));
        }
        Ok(Self { order, coeffs: vec![T::zero(); order as usize] })
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    /// Adds `c * zeta^t`; `t` is reduced modulo the order.
    pub fn add_term(&mut self, t: i128, c: T) {
        let idx = t.rem_euclid(self.order as i128) as usize;
        self.coeffs[idx] = self.coeffs[idx].clone() + c;
    }

    /// Same value written over `zeta_{order * factor}`.
    pub fn lift(&self, factor: u64) -> Self {
        let order = self.order * factor;
        let mut coeffs = vec![T::zero(); order as usize];
        for (t, c) in self.coeffs.iter().enumerate() {
            coeffs[t * factor as usize] = c.clone();
        }
        Self { order, coeffs }
    }

    pub fn scale(&self, s: &T) -> Self
    where
        T: Mul<Output = T>,
    {
        Self { order: self.order, coeffs: self.coeffs.iter().map(|c| c.clone() * s.clone()).collect() }
    }

    /// Exact zero test.
    ///
    /// Writes the value in the basis `{zeta^t}` where no prime `p | n` has
    /// top `p`-adic digit `p - 1` in `t mod p^a`, using
    /// `sum_j zeta^(t + j n/p) = 0`; the value is zero iff nothing survives.
    pub fn is_zero(&self) -> bool {
        let n = self.order;
        let mut c = self.coeffs.clone();
        for (p, a) in factorize(n) {
            let pa = p.pow(a);
            let top = pa / p;
            let step = (n / p) as usize;
            for t in 0..n as usize {
                if (t as u64 % pa) / top != p - 1 || c[t].is_zero() {
                    continue;
                }
                let v = c[t].clone();
                c[t] = T::zero();
                for j in 1..p as usize {
                    let u = (t + j * step) % n as usize;
                    c[u] = c[u].clone() - v.clone();
                }
            }
        }
        c.iter().all(Zero::is_zero)
    }

    /// Zero test by remainder modulo the cyclotomic polynomial; slower, kept as
    /// an independent check of [`Self::is_zero`].
    pub fn is_zero_by_phi(&self) -> bool
    where
        T: Mul<Output = T> + From<i64>,
    {
        let phi = cyclotomic_polynomial(self.order);
        let deg = phi.len() - 1;
        let mut r = self.coeffs.clone();
        for i in (deg..r.len()).rev() {
            let lead = r[i].clone();
            if lead.is_zero() {
                continue;
            }
            for (k, pk) in phi.iter().enumerate() {
                let idx = i - deg + k;
                r[idx] = r[idx].clone() - lead.clone() * T::from(*pk);
            }
        }
        r.iter().take(deg).all(Zero::is_zero)
    }
}

impl<T> Add for CyclotomicSum<T>
where
    T: Clone + Zero + PartialEq + Sub<Output = T> + Neg<Output = T>,
{
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        let order = self.order.lcm(&rhs.order);
        let a = self.lift(order / self.order);
        let b = rhs.lift(order / rhs.order);
        Self { order, coeffs: a.coeffs.into_iter().zip(b.coeffs).map(|(x, y)| x + y).collect() }
    }
}

impl<T> Neg for CyclotomicSum<T>
where
    T: Clone + Neg<Output = T>,
{
    type Output = Self;

    fn neg(self) -> Self {
        Self { order: self.order, coeffs: self.coeffs.into_iter().map(|c| -c).collect() }
    }
}

impl CyclotomicSum<i64> {
    /// Floating-point value, for display only.
    pub fn to_complex(&self) -> (f64, f64) {
        let mut re = 0.0;
        let mut im = 0.0;
        for (t, c) in self.coeffs.iter().enumerate() {
            let th = 2.0 * std::f64::consts::PI * t as f64 / self.order as f64;
            re += *c as f64 * th.cos();
            im += *c as f64 * th.sin();
        }
        (re, im)
    }
}

/// Prime factorization by trial division, ascending.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            let mut a = 0;
            while n % p == 0 {
                n /= p;
                a += 1;
            }
            out.push((p, a));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Coefficients of `Phi_n`, constant term first, from
/// `x^n - 1 = prod_{d | n} Phi_d`.
pub fn cyclotomic_polynomial(n: u64) -> Vec<i64> {
    let mut num = vec![0i64; n as usize + 1];
    num[0] = -1;
    num[n as usize] = 1;
    for d in 1..n {
        if n % d == 0 {
            num = poly_div_exact(&num, &cyclotomic_polynomial(d));
        }
    }
    num
}

fn poly_div_exact(num: &[i64], den: &[i64]) -> Vec<i64> {
    let dn = den.len() - 1;
    let mut r = num.to_vec();
    let mut q = vec![0i64; num.len() - dn];
    for i in (0..q.len()).rev() {
        let c = r[i + dn];
        q[i] = c;
        for (k, dk) in den.iter().enumerate() {
            r[i + k] -= c * dk;
        }
    }
    debug_assert!(r.iter().all(|&x| x == 0));
    q
}

/// `G_c(a, b) = sum_{n mod c} exp(2 pi i (a n^2 + b n) / c)`.
pub fn gauss_sum(a: i64, b: i64, c: i64) -> Result<CyclotomicSum<i64>> {
    if c <= 0 {
        return Err(Error::NonPositiveModulus(c.to_string()));
    }
    let mut s = CyclotomicSum::new(c as u64)?;
    for n in 0..c as i128 {
        s.add_term(a as i128 * n * n + b as i128 * n, 1);
    }
    Ok(s)
}

/// `gcd(a, c)` does not divide `b`, which forces `G_c(a, b) = 0`.
pub fn prop22_predicts_zero(a: i64, b: i64, c: i64) -> bool {
    b % a.gcd(&c) != 0
}

/// The phase sum `sum_{alpha in S} eps(alpha) sum_{l mod k} e(h/k * mult * Q(l + alpha))`
/// in lowest common order.
pub fn phase_sum(set: &SignedAlphaSet, q: &QuadraticForm2, mult: &Integer, h: i64, k: i64) -> Result<CyclotomicSum<i64>> {
    if k < 1 {
        return Err(Error::NonPositiveModulus(k.to_string()));
    }
    if h.gcd(&k) != 1 {
        return Err(Error::NotCoprime { h: h.to_string(), k: k.to_string() });
    }
    let phases = phase_numerators(set, q, mult, h, k, 0)?;
    let (order, nums) = reduce_phases(phases.modulus, phases.nums.iter().map(|(t, _)| *t))?;
    let mut s = CyclotomicSum::new(order)?;
    for (t, (_, sign)) in nums.into_iter().zip(&phases.nums) {
        s.add_term(t, *sign as i64);
    }
    Ok(s)
}

pub(crate) struct Phases {
    /// Common modulus `k d^2`.
    pub modulus: i128,
    /// `(numerator mod modulus, sign)` for each `(alpha, l)`, alpha-major, `l` row-major.
    pub nums: Vec<(i128, i8)>,
}

/// Numerators of the phases `h mult Q(l + alpha) / k` over the common modulus
/// `k d^2`, where `d` clears the denominators of `S`. A nonzero `offset`
/// replaces `l` by `l + offset k (1, 1)`, for periodicity checks.
pub(crate) fn phase_numerators(
    set: &SignedAlphaSet,
    q: &QuadraticForm2,
    mult: &Integer,
    h: i64,
    k: i64,
    offset: i64,
) -> Result<Phases> {
    let big = |x: &Integer| x.to_i128().ok_or_else(|| Error::Overflow(x.to_string()));
    let d = big(&set.k_min())?;
    let modulus = k as i128 * d * d;
    let (s1, s2, s3) = (big(&q.sigma1)?, big(&q.two_sigma2)?, big(&q.sigma3)?);
    let m = big(mult)?.rem_euclid(modulus);
    let hh = (h as i128).rem_euclid(modulus);
    let mut nums = Vec::with_capacity(set.len() * (k * k) as usize);
    for (a, sign) in set.entries() {
        let a1 = big(&(&a[0] * crate::Rational::from_integer(Integer::from(d))).to_integer())?;
        let a2 = big(&(&a[1] * crate::Rational::from_integer(Integer::from(d))).to_integer())?;
        for l1 in 0..k as i128 {
            for l2 in 0..k as i128 {
                let x1 = d * (l1 + offset as i128 * k as i128) + a1;
                let x2 = d * (l2 + offset as i128 * k as i128) + a2;
                let qv = (s1 * x1 % modulus * x1 + s2 * x1 % modulus * x2 + s3 * x2 % modulus * x2).rem_euclid(modulus);
                let t = hh * m % modulus * qv % modulus;
                nums.push((t, *sign));
            }
        }
    }
    Ok(Phases { modulus, nums })
}

/// Divides modulus and numerators by their common gcd.
pub(crate) fn reduce_phases(modulus: i128, nums: impl Iterator<Item = i128> + Clone) -> Result<(u64, Vec<i128>)> {
    let g = nums.clone().fold(modulus, |g, t| g.gcd(&t));
    let order = (modulus / g).to_u64().ok_or_else(|| Error::Overflow(modulus.to_string()))?;
    Ok((order, nums.map(|t| t / g).collect()))
}

/// Whether the signed phase sum vanishes exactly at `h/k`.
pub fn quantum_set_member(set: &SignedAlphaSet, q: &QuadraticForm2, mult: &Integer, h: i64, k: i64) -> Result<bool> {
    Ok(phase_sum(set, q, mult, h, k)?.is_zero())
}

/// The family sum with multiplier `L` vanishes at `h/k`.
pub fn ellsum_vanishes(p: &FamilyParams, q: &QuadraticForm2, h: i64, k: i64) -> Result<bool> {
    quantum_set_member(&p.signed_set()?, q, &p.l(), h, k)
}

/// Rows `(k, h, vanishes)` for every `h/k` with `1 <= k <= kmax`, `0 <= h < k`,
/// `gcd(h, k) = 1`.
pub fn ellsum_sweep(p: &FamilyParams, q: &QuadraticForm2, kmax: i64) -> Result<Vec<(i64, i64, bool)>> {
    use rayon::prelude::*;
    let set = p.signed_set()?;
    let l = p.l();
    let rows: Vec<Result<Vec<(i64, i64, bool)>>> = (1..=kmax)
        .into_par_iter()
        .map(|k| {
            (0..k)
                .filter(|h| h.gcd(&k) == 1)
                .map(|h| Ok((k, h, quantum_set_member(&set, q, &l, h, k)?)))
                .collect()
        })
        .collect();
    let mut out = Vec::new();
    for r in rows {
        out.extend(r?);
    }
    Ok(out)
}

/// One flag per standing assumption on `(N, r, s, Q)`, plus the witnesses.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub n_even: bool,
    pub r_coprime: bool,
    pub sigma1_factors: bool,
    pub sigma3_factors: bool,
    pub two_sigma2_is_lcm: bool,
    pub mu_gcd_one_odd_prime: bool,
    pub l_coprime_mu_gcd: bool,
    pub parity_condition: bool,
    pub residues_coprime: bool,
    pub squares_congruent: bool,
    pub l: String,
    pub big_r1: String,
    pub big_r2: String,
    pub mu1: String,
    pub mu3: String,
}

impl HypothesisReport {
    pub fn all_pass(&self) -> bool {
        self.failures().is_empty()
    }

    pub fn failures(&self) -> Vec<&'static str> {
        [
            ("N1, N2 even", self.n_even),
            ("gcd(R1, R2) = 1", self.r_coprime),
            ("sigma1 = R1 mu1, gcd(R1, mu1) = 1", self.sigma1_factors),
            ("sigma3 = R2 mu3, gcd(mu3, R2) = 1", self.sigma3_factors),
            ("2 sigma2 = L R1 R2", self.two_sigma2_is_lcm),
            ("gcd(mu1, mu3) has at most one odd prime", self.mu_gcd_one_odd_prime),
            ("gcd(L, gcd(mu1, mu3)) = 1", self.l_coprime_mu_gcd),
            ("4 | L or exactly one of R1, R2, mu3 even", self.parity_condition),
            ("gcd(r_j, N_j) = gcd(s_j, N_j) = 1", self.residues_coprime),
            ("r_j^2 = s_j^2 mod 2 N_j", self.squares_congruent),
        ]
        .into_iter()
        .filter(|(_, ok)| !ok)
        .map(|(name, _)| name)
        .collect()
    }
}

pub fn check_mainthm_hypotheses(p: &FamilyParams, q: &QuadraticForm2) -> HypothesisReport {
    let two = Integer::from(2);
    let one = Integer::one();
    let even = |x: &Integer| x.is_even();
    let l = p.l();
    let (r1, r2) = if l.is_zero() { (Integer::zero(), Integer::zero()) } else { (p.big_r1(), p.big_r2()) };
    let div = |a: &Integer, b: &Integer| !b.is_zero() && a.is_multiple_of(b);
    let sigma1_factors = div(&q.sigma1, &r1) && (&q.sigma1 / &r1).gcd(&r1) == one;
    let sigma3_factors = div(&q.sigma3, &r2) && (&q.sigma3 / &r2).gcd(&r2) == one;
    let mu1 = if r1.is_zero() { Integer::zero() } else { &q.sigma1 / &r1 };
    let mu3 = if r2.is_zero() { Integer::zero() } else { &q.sigma3 / &r2 };
    let g = mu1.gcd(&mu3);
    let odd_primes = g
        .to_u64()
        .map(|v| factorize(v).into_iter().filter(|(pr, _)| *pr != 2).count())
        .unwrap_or(usize::MAX);
    let parity_condition = l.is_multiple_of(&Integer::from(4))
        || [&r1, &r2, &mu3].iter().filter(|x| even(x)).count() == 1;
    let coprime = |x: &Integer, n: &Integer| x.gcd(n) == one;
    let sq = |r: &Integer, s: &Integer, n: &Integer| {
        let m = &two * n;
        !m.is_zero() && (r * r - s * s).mod_floor(&m).is_zero()
    };
    HypothesisReport {
        n_even: even(&p.n1) && even(&p.n2),
        r_coprime: r1.gcd(&r2) == one,
        sigma1_factors,
        sigma3_factors,
        two_sigma2_is_lcm: q.two_sigma2 == &l * &r1 * &r2,
        mu_gcd_one_odd_prime: odd_primes <= 1,
        l_coprime_mu_gcd: l.gcd(&g) == one,
        parity_condition,
        residues_coprime: coprime(&p.r1, &p.n1)
            && coprime(&p.s1, &p.n1)
            && coprime(&p.r2, &p.n2)
            && coprime(&p.s2, &p.n2),
        squares_congruent: sq(&p.r1, &p.s1, &p.n1) && sq(&p.r2, &p.s2, &p.n2),
        l: l.to_string(),
        big_r1: r1.to_string(),
        big_r2: r2.to_string(),
        mu1: mu1.to_string(),
        mu3: mu3.to_string(),
    }
}

/// `true` when the value is a sum over a balanced sign pattern, i.e. signs sum to zero.
pub fn signs_balanced(set: &SignedAlphaSet) -> bool {
    set.entries().iter().map(|(_, s)| *s as i64).sum::<i64>() == 0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theta::rat;
    use proptest::prelude::*;

    fn entry1() -> (FamilyParams, QuadraticForm2) {
        (FamilyParams::from_i64(12, 12, 1, 5, 1, 5), QuadraticForm2::from_i64(1, 12, 37).unwrap())
    }

    #[test]
    fn gauss_examples() {
        let g = gauss_sum(0, 0, 7).unwrap();
        assert_eq!(g.coeffs()[0], 7);
        assert!(!g.is_zero());
        assert!(gauss_sum(2, 1, 4).unwrap().is_zero());
        assert!(prop22_predicts_zero(2, 1, 4));
        assert!(!prop22_predicts_zero(1, 0, 3));
        let g3 = gauss_sum(1, 0, 3).unwrap();
        assert_eq!(g3.coeffs(), &[1, 2, 0]);
        let (re, im) = g3.to_complex();
        assert!(re.abs() < 1e-12 && (im - 3f64.sqrt()).abs() < 1e-12);
        assert!(gauss_sum(1, 1, 0).is_err());
    }

    #[test]
    fn zero_tests() {
        assert!(CyclotomicSum::<i64>::new(12).unwrap().is_zero());
        for n in 2..40u64 {
            let mut s = CyclotomicSum::new(n).unwrap();
            for t in 0..n {
                s.add_term(t as i128, 1i64);
            }
            assert!(s.is_zero() && s.is_zero_by_phi());
            let mut one = CyclotomicSum::new(n).unwrap();
            one.add_term(3, 1i64);
            assert!(!one.is_zero() && !one.is_zero_by_phi());
        }
        assert!(CyclotomicSum::<i64>::new(0).is_err());
    }

    #[test]
    fn cyclotomic_polynomials() {
        assert_eq!(cyclotomic_polynomial(1), vec![-1, 1]);
        assert_eq!(cyclotomic_polynomial(6), vec![1, -1, 1]);
        assert_eq!(cyclotomic_polynomial(12), vec![1, 0, -1, 0, 1]);
        assert_eq!(cyclotomic_polynomial(105).len() - 1, 48);
    }

    #[test]
    fn single_point_not_member() {
        let set = SignedAlphaSet::new(vec![([rat(1, 2), rat(1, 2)], 1)]).unwrap();
        let q = QuadraticForm2::from_i64(1, 0, 1).unwrap();
        assert!(!quantum_set_member(&set, &q, &Integer::from(2), 1, 1).unwrap());
    }

    #[test]
    fn balanced_set_at_k_one() {
        let (p, q) = entry1();
        let set = p.signed_set().unwrap();
        assert!(signs_balanced(&set));
        assert!(quantum_set_member(&set, &q, &p.k(), 0, 1).unwrap());
    }

    #[test]
    fn entry1_k_convention_small_k() {
        let (p, q) = entry1();
        let set = p.signed_set().unwrap();
        for k in 1..=12 {
            for h in 0..k {
                if h.gcd(&k) == 1 {
                    assert!(quantum_set_member(&set, &q, &p.k(), h, k).unwrap(), "h/k = {h}/{k}");
                }
            }
        }
    }

    #[test]
    fn broken_family_detected() {
        let (p, q) = entry1();
        let mut entries = p.signed_set().unwrap().entries().to_vec();
        entries.pop();
        let broken = SignedAlphaSet::new(entries).unwrap();
        assert!(!quantum_set_member(&broken, &q, &p.l(), 0, 1).unwrap());
    }

    #[test]
    fn non_coprime_rejected() {
        let (p, q) = entry1();
        assert!(matches!(ellsum_vanishes(&p, &q, 2, 4), Err(Error::NotCoprime { .. })));
    }

    #[test]
    fn hypotheses_entry1_and_mutation() {
        let (p, q) = entry1();
        assert!(check_mainthm_hypotheses(&p, &q).all_pass());
        let mut bad = p.clone();
        // every unit mod 24 squares to 1, so s1 = 7 would still pass
        bad.s1 = Integer::from(7);
        assert!(check_mainthm_hypotheses(&bad, &q).all_pass());
        bad.s1 = Integer::from(3);
        let rep = check_mainthm_hypotheses(&bad, &q);
        assert!(!rep.squares_congruent);
        assert!(!rep.residues_coprime);
        assert!(!rep.all_pass());
    }

    #[test]
    fn ellsum_periodic_in_h() {
        let (p, q) = entry1();
        for (h, k) in [(1, 5), (3, 7), (5, 8)] {
            assert_eq!(ellsum_vanishes(&p, &q, h, k).unwrap(), ellsum_vanishes(&p, &q, h + k, k).unwrap());
        }
    }

    proptest! {
        #[test]
        fn prop22_implies_zero(a in -50i64..50, b in -50i64..50, c in 1i64..=100) {
            if prop22_predicts_zero(a, b, c) {
                prop_assert!(gauss_sum(a, b, c).unwrap().is_zero());
            }
        }

        #[test]
        fn fast_zero_test_matches_phi(n in 1u64..60, terms in prop::collection::vec((0i128..200, -3i64..=3), 0..12)) {
            let mut s = CyclotomicSum::new(n).unwrap();
            for (t, c) in terms {
                s.add_term(t, c);
            }
            prop_assert_eq!(s.is_zero(), s.is_zero_by_phi());
            let neg = -s.clone();
            prop_assert!((s + neg).is_zero());
        }

        #[test]
        fn coset_relations_are_zero(n in 2u64..120, rels in prop::collection::vec((0usize..8, 0i128..500, -4i64..=4), 1..8)) {
            let primes: Vec<u64> = factorize(n).into_iter().map(|(p, _)| p).collect();
            let mut s = CyclotomicSum::new(n).unwrap();
            for (pi, t, c) in rels {
                let p = primes[pi % primes.len()];
                for j in 0..p as i128 {
                    s.add_term(t + j * (n / p) as i128, c);
                }
            }
            prop_assert!(s.is_zero());
            prop_assert!(s.is_zero_by_phi());
        }
    }
}
