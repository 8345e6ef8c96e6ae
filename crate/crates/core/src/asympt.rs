//! Radial asymptotics of the false theta function
//! `F(q) = sum_{alpha in S} eps(alpha) sum_{n in N_0^2} q^(mult Q(n + alpha))`
//! at `q = e(h/k) e^(-t)`.
//!
//! Splitting `n = k nu + l` and applying two-dimensional Euler-Maclaurin to
//! `g(x) = exp(-mult Q(x))` gives `F ~ sum_m a(m) t^m` once the `1/t` pole
//! cancels. Every `a(m)` is an exact element of `Q(zeta_n)`: the phases are
//! roots of unity, the Bernoulli weights are rational, and both the boundary
//! integrals (odd Gaussian moments) and the corner derivatives are rational.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use num_integer::Integer as _;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exact::{factorial, BernoulliTable};
use crate::gauss::CyclotomicSum;
use crate::lattice::BinaryForm;
use crate::real::{with_precision_digits, Cx, HpFloat, Real};
use crate::theta::{QuadraticForm2, SignedAlphaSet};
use crate::{Integer, Rational};

/// Largest supported truncation order.
pub const MAX_ORDER: usize = 6;

type CycQ = CyclotomicSum<Rational>;

fn ri(n: i64) -> Rational {
    Rational::from_integer(Integer::from(n))
}

fn big(x: &Integer) -> Result<i128> {
    x.to_i128().ok_or_else(|| Error::Overflow(x.to_string()))
}

/// Coefficients (in `y`) of `p_j` with `d^j/dy2^j g(y, y2) |_{y2=0} = p_j(y) g(y, 0)`,
/// where the exponent is `-(lambda y^2 + a y y2 + b y2^2)`.
fn derivative_polynomial(a: &Rational, b: &Rational, j: usize) -> Vec<Rational> {
    // p_{i+1} = -a y p_i - 2 b i p_{i-1}
    let mut prev: Vec<Rational> = Vec::new();
    let mut cur = vec![Rational::one()];
    for i in 0..j {
        let mut next = vec![Rational::zero(); cur.len() + 1];
        for (e, c) in cur.iter().enumerate() {
            next[e + 1] -= a * c;
        }
        let f = b * ri(2 * i as i64);
        for (e, c) in prev.iter().enumerate() {
            next[e] -= &f * c;
        }
        prev = cur;
        cur = next;
    }
    cur
}

/// `int_0^inf y^i exp(-lambda y^2) dy` for odd `i`: `((i-1)/2)! / (2 lambda^((i+1)/2))`.
fn odd_gaussian_moment(i: usize, lambda: &Rational) -> Rational {
    debug_assert!(i % 2 == 1);
    let h = (i - 1) / 2;
    Rational::from_integer(factorial::<Integer>(h)) / (ri(2) * num_traits::pow(lambda.clone(), h + 1))
}

/// Boundary integral of `g(x) = exp(-mult Q(x))`.
///
/// `axis = 2`: `int_0^inf d^j g / dx2^j (x, 0) dx`; `axis = 1`: the mirror
/// image `int_0^inf d^j g / dx1^j (0, x) dx`. Only odd `j` is supported, where
/// the value is rational.
pub fn gaussian_boundary_integral(q: &QuadraticForm2, mult: &Integer, deriv_order: usize, axis: usize) -> Result<Rational> {
    if deriv_order % 2 == 0 {
        return Err(Error::EvenDerivative(deriv_order));
    }
    let m = Rational::from_integer(mult.clone());
    let (along, across) = match axis {
        1 => (&q.sigma3, &q.sigma1),
        2 => (&q.sigma1, &q.sigma3),
        _ => return Err(Error::Invalid(format!("axis must be 1 or 2, got {axis}"))),
    };
    let lambda = &m * Rational::from_integer(along.clone());
    let a = &m * Rational::from_integer(q.two_sigma2.clone());
    let b = &m * Rational::from_integer(across.clone());
    Ok(derivative_polynomial(&a, &b, deriv_order)
        .iter()
        .enumerate()
        .filter(|(i, c)| i % 2 == 1 && !c.is_zero())
        .map(|(i, c)| c * odd_gaussian_moment(i, &lambda))
        .sum())
}

/// `d^(j1+j2) g / dx1^j1 dx2^j2 (0, 0)` for `g = exp(-mult Q)`.
pub fn corner_derivative(q: &QuadraticForm2, mult: &Integer, j1: usize, j2: usize) -> Rational {
    if (j1 + j2) % 2 == 1 {
        return Rational::zero();
    }
    let p = (j1 + j2) / 2;
    // [x1^j1 x2^j2] Q^p, expanding Q = s1 x1^2 + 2s2 x1 x2 + s3 x2^2
    let mut coeff = Rational::zero();
    for b in 0..=p {
        if b > j1 || (j1 - b) % 2 == 1 {
            continue;
        }
        let a = (j1 - b) / 2;
        if a + b > p {
            continue;
        }
        let c = p - a - b;
        if b + 2 * c != j2 {
            continue;
        }
        let multinom: Integer = factorial::<Integer>(p) / (factorial::<Integer>(a) * factorial::<Integer>(b) * factorial::<Integer>(c));
        let term = multinom
            * num_traits::pow(q.sigma1.clone(), a)
            * num_traits::pow(q.two_sigma2.clone(), b)
            * num_traits::pow(q.sigma3.clone(), c);
        coeff += Rational::from_integer(term);
    }
    let neg_mult = Rational::from_integer(-mult.clone());
    Rational::from_integer(factorial::<Integer>(j1) * factorial::<Integer>(j2)) * num_traits::pow(neg_mult, p)
        / Rational::from_integer(factorial::<Integer>(p))
        * coeff
}

/// One `(alpha, l)` cell of the splitting `n = k nu + l`.
#[derive(Clone, Debug)]
struct Cell {
    /// `(l + alpha) / k`.
    x: [Rational; 2],
    /// Phase numerator over [`Cells::modulus`].
    phase: i128,
    sign: i8,
}

struct Cells {
    modulus: i128,
    cells: Vec<Cell>,
}

/// Enumerates the cells and checks that the phase is periodic with period `k`
/// in each direction.
fn cells(set: &SignedAlphaSet, q: &QuadraticForm2, mult: &Integer, h: i64, k: i64) -> Result<Cells> {
    if k < 1 {
        return Err(Error::NonPositiveModulus(k.to_string()));
    }
    if h.gcd(&k) != 1 {
        return Err(Error::NotCoprime { h: h.to_string(), k: k.to_string() });
    }
    let d = big(&set.k_min())?;
    let modulus = k as i128 * d * d;
    let (s1, s2, s3) = (big(&q.sigma1)?, big(&q.two_sigma2)?, big(&q.sigma3)?);
    let hm = (h as i128).rem_euclid(modulus) * big(mult)?.rem_euclid(modulus) % modulus;
    let phase = |y1: i128, y2: i128| -> i128 {
        let (y1, y2) = (y1.rem_euclid(modulus), y2.rem_euclid(modulus));
        let qv = (s1.rem_euclid(modulus) * y1 % modulus * y1 + s2.rem_euclid(modulus) * y1 % modulus * y2
            + s3.rem_euclid(modulus) * y2 % modulus * y2)
            % modulus;
        hm * qv % modulus
    };
    let kk = Rational::from_integer(Integer::from(k));
    let mut out = Vec::with_capacity(set.len() * (k * k) as usize);
    for (a, sign) in set.entries() {
        let da = [big(&(&a[0] * ri(d as i64)).to_integer())?, big(&(&a[1] * ri(d as i64)).to_integer())?];
        for l1 in 0..k as i128 {
            for l2 in 0..k as i128 {
                let y = [d * l1 + da[0], d * l2 + da[1]];
                let p = phase(y[0], y[1]);
                if phase(y[0] + d * k as i128, y[1]) != p || phase(y[0], y[1] + d * k as i128) != p {
                    return Err(Error::NotPeriodic(k.to_string()));
                }
                let x = [(ri(l1 as i64) + &a[0]) / &kk, (ri(l2 as i64) + &a[1]) / &kk];
                out.push(Cell { x, phase: p, sign: *sign });
            }
        }
    }
    Ok(Cells { modulus, cells: out })
}

/// Coefficients of the radial expansion at `h/k`, exact in `Q(zeta_n)`.
#[derive(Clone, Debug)]
pub struct AsymptoticExpansion {
    pub h: i64,
    pub k: i64,
    pub order: usize,
    coeffs: Vec<CycQ>,
    /// Every term family agrees with its image under
    /// `(alpha, l) -> ((1,1) - alpha, (k-1)(1,1) - l)`.
    pub pairing_invariant: bool,
    /// The odd-index Bernoulli families (half-integral powers of `t`) vanish.
    pub half_integral_terms_vanish: bool,
}

impl AsymptoticExpansion {
    /// `a(m)` as an exact cyclotomic value.
    pub fn exact(&self, m: usize) -> &CycQ {
        &self.coeffs[m]
    }

    pub fn coefficients<R: Real>(&self) -> Vec<Cx<R>> {
        let mut roots: HashMap<u64, Vec<Cx<R>>> = HashMap::new();
        self.coeffs
            .iter()
            .map(|c| {
                let n = c.order();
                let table = roots.entry(n).or_insert_with(|| (0..n).map(|t| Cx::root_of_unity(t, n)).collect());
                cyclotomic_value(c, table)
            })
            .collect()
    }

    /// `sum_{m <= upto} a(m) t^m`.
    pub fn partial_sum<R: Real>(&self, coeffs: &[Cx<R>], t: &R, upto: usize) -> Cx<R> {
        let mut acc = Cx::zero();
        let mut tp = R::one();
        for c in coeffs.iter().take(upto + 1) {
            acc = acc.add(&c.scale(&tp));
            tp = tp.mul(t);
        }
        acc
    }
}

fn cyclotomic_value<R: Real>(c: &CycQ, roots: &[Cx<R>]) -> Cx<R> {
    let mut acc = Cx::zero();
    for (t, v) in c.coeffs().iter().enumerate() {
        if !v.is_zero() {
            acc = acc.add(&roots[t].scale(&R::from_rational(v)));
        }
    }
    acc
}

fn cyc_eq(a: &CycQ, b: &CycQ) -> bool {
    (a.clone() + (-b.clone())).is_zero()
}

/// Euler-Maclaurin coefficients `a(0..=order)` of `F(e(h/k) e^(-t))`.
pub fn em_expansion(
    set: &SignedAlphaSet,
    q: &QuadraticForm2,
    mult: &Integer,
    h: i64,
    k: i64,
    order: usize,
) -> Result<AsymptoticExpansion> {
    if order > MAX_ORDER {
        return Err(Error::OrderTooLarge(order, MAX_ORDER));
    }
    let Cells { modulus, cells } = cells(set, q, mult, h, k)?;
    let g = cells.iter().fold(modulus, |g, c| g.gcd(&c.phase));
    let n = (modulus / g).to_u64().ok_or_else(|| Error::Overflow(modulus.to_string()))?;
    let phases: Vec<i128> = cells.iter().map(|c| c.phase / g).collect();

    let mut main = CyclotomicSum::<Rational>::new(n)?;
    for (c, t) in cells.iter().zip(&phases) {
        main.add_term(*t, ri(c.sign as i64));
    }
    if !main.is_zero() {
        return Err(Error::NotInQuantumSet(format!("{h}/{k}")));
    }

    // Partner of each cell under the pairing, located by x -> 1 - x.
    let index: HashMap<&[Rational; 2], usize> = cells.iter().enumerate().map(|(i, c)| (&c.x, i)).collect();
    let one = Rational::one();
    let partner: Vec<Option<usize>> =
        cells.iter().map(|c| index.get(&[&one - &c.x[0], &one - &c.x[1]]).copied()).collect();

    let top = 2 * order + 2;
    let bern = BernoulliTable::<Integer>::new(top);
    let b_vals: Vec<[Vec<Rational>; 2]> = cells
        .iter()
        .map(|c| [0, 1].map(|j| (0..=top).map(|i| bern.poly(i, &c.x[j])).collect()))
        .collect();

    // sum over cells of weight * zeta^phase, where the weight of cell `i` is
    // f(i) and the root of unity and sign come from cell `from(i)`.
    let family = |f: &dyn Fn(usize) -> Rational, from: &dyn Fn(usize) -> Option<usize>| -> Result<Option<CycQ>> {
        let mut s = CyclotomicSum::<Rational>::new(n)?;
        for i in 0..cells.len() {
            let Some(src) = from(i) else { return Ok(None) };
            let w = f(i);
            if !w.is_zero() {
                s.add_term(phases[src], w * ri(cells[src].sign as i64));
            }
        }
        Ok(Some(s))
    };
    let direct = |i: usize| Some(i);
    let swapped = |i: usize| partner[i];

    let mut pairing_invariant = true;
    let mut check = |f: &dyn Fn(usize) -> Rational| -> Result<CycQ> {
        let d = family(f, &direct)?.expect("identity pairing");
        match family(f, &swapped)? {
            Some(s) if cyc_eq(&s, &d) => {}
            _ => pairing_invariant = false,
        }
        Ok(d)
    };

    let mut boundary: [Vec<CycQ>; 2] = [Vec::new(), Vec::new()];
    for (axis, fam) in boundary.iter_mut().enumerate() {
        for i in 0..=top {
            fam.push(check(&|c| b_vals[c][axis][i].clone())?);
        }
    }
    let mut corner: BTreeMap<(usize, usize), CycQ> = BTreeMap::new();
    for i1 in 1..=top {
        for i2 in 1..=top + 1 - i1 {
            corner.insert((i1, i2), check(&|c| &b_vals[c][0][i1] * &b_vals[c][1][i2])?);
        }
    }
    let half_integral_terms_vanish = boundary.iter().all(|fam| fam.iter().skip(1).step_by(2).all(CyclotomicSum::is_zero));

    let kk = Integer::from(k);
    let mut coeffs = Vec::with_capacity(order + 1);
    for m in 0..=order {
        let j = 2 * m + 1;
        let fact = Rational::from_integer(factorial::<Integer>(j + 1));
        let i_x2 = gaussian_boundary_integral(q, mult, j, 2)? / &fact;
        let i_x1 = gaussian_boundary_integral(q, mult, j, 1)? / &fact;
        let mut a = boundary[1][j + 1].scale(&-i_x2) + boundary[0][j + 1].scale(&-i_x1);
        for j1 in 0..=2 * m {
            let j2 = 2 * m - j1;
            let w = corner_derivative(q, mult, j1, j2)
                / Rational::from_integer(factorial::<Integer>(j1 + 1) * factorial::<Integer>(j2 + 1));
            if !w.is_zero() {
                a = a + corner[&(j1 + 1, j2 + 1)].scale(&w);
            }
        }
        coeffs.push(a.scale(&Rational::from_integer(num_traits::pow(kk.clone(), 2 * m))));
    }
    Ok(AsymptoticExpansion { h, k, order, coeffs, pairing_invariant, half_integral_terms_vanish })
}

/// The orthant lattice of `F`, grouped by exponent, ready for evaluation at
/// any `t` no smaller than the one it was built for.
pub struct RadialLattice {
    /// Exponents are `v * mult / (2 d^2)`.
    mult: Integer,
    two_d2: i128,
    /// `(v, summed sign)`, increasing in `v`.
    groups: Vec<(i128, i64)>,
    /// Phase of `q^(v mult / 2d^2)` at `h/k` is `e(v * phase_mult / phase_modulus)`.
    phase_mult: i128,
    phase_modulus: u64,
    digits: usize,
    t_min: Rational,
}

/// `log` of an upper bound for the number of orthant points with `mult Q(n + alpha) < y`.
fn log_count_bound(y: f64, lambda_min: f64, set_size: usize) -> f64 {
    let r = (y.max(0.0) / lambda_min).sqrt() + 1.0;
    (set_size as f64).ln() + 2.0 * r.ln()
}

/// Smallest `X` (in exponent units) such that the terms with exponent `>= X`
/// contribute less than `10^-digits` at `t`.
fn tail_cutoff(q: &QuadraticForm2, mult: &Integer, set_size: usize, t: f64, digits: usize) -> f64 {
    let s1 = q.sigma1.to_f64().unwrap_or(f64::MAX);
    let s3 = q.sigma3.to_f64().unwrap_or(f64::MAX);
    let s2 = q.two_sigma2.to_f64().unwrap_or(f64::MAX) / 2.0;
    let disc = s1 * s3 - s2 * s2;
    let lambda_max = ((s1 + s3) + ((s1 - s3).powi(2) + 4.0 * s2 * s2).sqrt()) / 2.0;
    let lambda_min = mult.to_f64().unwrap_or(f64::MAX) * disc / lambda_max;
    let target = -(digits as f64 + 1.0) * std::f64::consts::LN_10;
    let mut x = (digits as f64) * std::f64::consts::LN_10 / t;
    loop {
        // tail <= sum_j N(X + (j+1)/t) exp(-t X - j)
        let mut log_tail = f64::NEG_INFINITY;
        for j in 0..400 {
            let term = log_count_bound(x + (j + 1) as f64 / t, lambda_min, set_size) - t * x - j as f64;
            log_tail = log_add(log_tail, term);
        }
        if log_tail < target {
            return x;
        }
        x += 1.0 / t;
    }
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

impl RadialLattice {
    /// Collects every orthant point needed for `digits` correct digits at all
    /// `t >= t_min`.
    pub fn new(
        set: &SignedAlphaSet,
        q: &QuadraticForm2,
        mult: &Integer,
        h: i64,
        k: i64,
        t_min: &Rational,
        digits: usize,
    ) -> Result<Self> {
        if !t_min.is_positive() {
            return Err(Error::NonPositiveT);
        }
        if k < 1 {
            return Err(Error::NonPositiveModulus(k.to_string()));
        }
        if !mult.is_positive() {
            return Err(Error::Invalid(format!("multiplier must be positive, got {mult}")));
        }
        let d = big(&set.k_min())?;
        let two_d2 = 2 * d * d;
        let x = tail_cutoff(q, mult, set.len().max(1), t_min.to_f64().unwrap_or(0.0), digits);
        let m128 = big(mult)?;
        // mult * v / (2 d^2) < x  <=>  v < x 2 d^2 / mult
        let limit = (x * two_d2 as f64 / m128 as f64).ceil();
        if limit > 1e30 {
            return Err(Error::Overflow(format!("lattice bound {limit}")));
        }
        let limit = limit as i128 + 1;
        let form = BinaryForm::homogeneous(2 * big(&q.sigma1)?, big(&q.two_sigma2)?, 2 * big(&q.sigma3)?);
        if !form.is_positive_definite() {
            return Err(Error::NotPositiveDefinite);
        }
        let parts: Vec<Result<Vec<(i128, i64)>>> = set
            .entries()
            .par_iter()
            .map(|(a, sign)| {
                let res = [big(&(&a[0] * ri(d as i64)).to_integer())?, big(&(&a[1] * ri(d as i64)).to_integer())?];
                Ok(form
                    .points_below(&limit, &d, &res)
                    .into_iter()
                    .filter(|(y, _)| y[0] > 0 && y[1] > 0)
                    .map(|(_, v)| (v, *sign as i64))
                    .collect())
            })
            .collect();
        let mut acc: BTreeMap<i128, i64> = BTreeMap::new();
        for p in parts {
            for (v, s) in p? {
                *acc.entry(v).or_insert(0) += s;
            }
        }
        let groups = acc.into_iter().filter(|(_, c)| *c != 0).collect();
        let phase_modulus = k as i128 * two_d2;
        let phase_mult = (h as i128).rem_euclid(phase_modulus) * m128.rem_euclid(phase_modulus) % phase_modulus;
        Ok(Self {
            mult: mult.clone(),
            two_d2,
            groups,
            phase_mult,
            phase_modulus: phase_modulus as u64,
            digits,
            t_min: t_min.clone(),
        })
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    /// `F(e(h/k) e^(-t))`, for `t >= t_min`.
    pub fn eval(&self, t: &Rational) -> Result<Cx<HpFloat>> {
        if !t.is_positive() {
            return Err(Error::NonPositiveT);
        }
        if t < &self.t_min {
            return Err(Error::Invalid(format!("t = {t} is below the lattice bound {}", self.t_min)));
        }
        Ok(with_precision_digits(self.digits, || {
            let step_exp = t * Rational::new(self.mult.clone(), Integer::from(self.two_d2));
            let step = HpFloat::from_rational(&step_exp).neg().exp();
            let mut by_phase: BTreeMap<u64, HpFloat> = BTreeMap::new();
            let mut cur = HpFloat::one();
            let mut at = 0i128;
            for (v, c) in &self.groups {
                cur = cur.mul(&step.powi((v - at) as u64));
                at = *v;
                let r = (v.rem_euclid(self.phase_modulus as i128) * self.phase_mult % self.phase_modulus as i128) as u64;
                let term = cur.mul(&HpFloat::from_i64(*c));
                let slot = by_phase.entry(r).or_insert_with(HpFloat::zero);
                *slot = slot.add(&term);
            }
            let mut acc = Cx::zero();
            for (r, s) in by_phase {
                acc = acc.add(&Cx::<HpFloat>::root_of_unity(r, self.phase_modulus).scale(&s));
            }
            acc
        }))
    }
}

/// Direct summation of `F` at `q = e(h/k) e^(-t)` to `precision` decimal digits.
pub fn radial_eval(
    set: &SignedAlphaSet,
    q: &QuadraticForm2,
    mult: &Integer,
    h: i64,
    k: i64,
    t: &Rational,
    precision: usize,
) -> Result<Cx<HpFloat>> {
    RadialLattice::new(set, q, mult, h, k, t, precision)?.eval(t)
}

/// One line of an [`OrderReport`].
#[derive(Clone, Debug)]
pub struct OrderRow {
    pub t: Rational,
    pub radial: Cx<HpFloat>,
    pub partial_sum: Cx<HpFloat>,
    pub residual: HpFloat,
    /// `R(t) / R(2t)`; absent on the first row.
    pub ratio: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct OrderReport {
    pub h: i64,
    pub k: i64,
    pub order: usize,
    pub digits: usize,
    pub rows: Vec<OrderRow>,
}

impl OrderReport {
    /// `2^-(order + 1)`.
    pub fn expected_ratio(&self) -> f64 {
        0.5f64.powi(self.order as i32 + 1)
    }

    /// Every ratio lies within a factor 4 of the expected one.
    pub fn passes(&self) -> bool {
        let e = self.expected_ratio();
        self.rows.iter().filter_map(|r| r.ratio).all(|x| x >= e / 4.0 && x <= 4.0 * e)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,radial,partial_sum,residual,ratio\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                r.t,
                format_complex(&r.radial, self.digits),
                format_complex(&r.partial_sum, self.digits),
                r.residual.to_decimal(self.digits.min(20)),
                r.ratio.map_or(String::new(), |x| format!("{x:.6}")),
            );
        }
        s
    }
}

/// `re` alone when the imaginary part is below the working precision, else `re+imi`.
pub fn format_complex(z: &Cx<HpFloat>, digits: usize) -> String {
    let re = z.re.to_decimal(digits);
    let tiny = with_precision_digits(digits, || HpFloat::parse(&format!("1e-{}", digits.saturating_sub(5))));
    if z.im.abs() < tiny {
        re
    } else {
        let im = z.im.to_decimal(digits);
        if im.starts_with('-') {
            format!("{re}{im}i")
        } else {
            format!("{re}+{im}i")
        }
    }
}

/// Default radial points `t = 2^-4, ..., 2^-12`.
pub fn default_ts() -> Vec<Rational> {
    (4..=12).map(|e| Rational::new(Integer::one(), Integer::one() << e)).collect()
}

/// Residual table for the expansion truncated at `order`.
pub fn order_check(
    set: &SignedAlphaSet,
    q: &QuadraticForm2,
    mult: &Integer,
    h: i64,
    k: i64,
    order: usize,
) -> Result<OrderReport> {
    order_check_with(set, q, mult, h, k, order, &default_ts(), &Rational::zero(), crate::real::DEFAULT_DIGITS)
}

/// [`order_check`] at chosen `ts` (decreasing), with `a(0)` shifted by
/// `a0_shift` and the radial sums computed to `digits` digits.
#[allow(clippy::too_many_arguments)]
pub fn order_check_with(
    set: &SignedAlphaSet,
    q: &QuadraticForm2,
    mult: &Integer,
    h: i64,
    k: i64,
    order: usize,
    ts: &[Rational],
    a0_shift: &Rational,
    digits: usize,
) -> Result<OrderReport> {
    let exp = em_expansion(set, q, mult, h, k, order)?;
    let t_min = ts.iter().min().cloned().ok_or_else(|| Error::Invalid("no t values".into()))?;
    let lattice = RadialLattice::new(set, q, mult, h, k, &t_min, digits)?;
    let rows: Vec<Result<OrderRow>> = ts
        .par_iter()
        .map(|t| {
            let radial = lattice.eval(t)?;
            Ok(with_precision_digits(digits, || {
                let mut coeffs = exp.coefficients::<HpFloat>();
                coeffs[0] = coeffs[0].add(&Cx::real(HpFloat::from_rational(a0_shift)));
                let partial_sum = exp.partial_sum(&coeffs, &HpFloat::from_rational(t), order);
                let residual = radial.sub(&partial_sum).norm();
                OrderRow { t: t.clone(), radial, partial_sum, residual, ratio: None }
            }))
        })
        .collect();
    let mut rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    for i in 1..rows.len() {
        let (a, b) = (rows[i].residual.to_f64(), rows[i - 1].residual.to_f64());
        rows[i].ratio = Some(a / b);
    }
    Ok(OrderReport { h, k, order, digits, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauss::phase_sum;
    use crate::plumbing::HLabels;
    use crate::theta::{derive_family_params, false_theta_series, rat};
    use proptest::prelude::*;

    fn entry1() -> (SignedAlphaSet, QuadraticForm2, Integer) {
        let (p, q) = derive_family_params(&HLabels([2, 3, 7, 1, 2, 3])).unwrap();
        (p.signed_set().unwrap(), q, p.l())
    }

    /// `d^j/dy2^j g(y, 0)` by expanding `exp(-m(2 s2 y y2 + s3 y2^2))` in `y2`.
    fn derivative_by_series<R: Real>(q: &QuadraticForm2, mult: &Integer, j: usize, y: &R) -> R {
        let r_of = |x: &Integer| R::from_rational(&Rational::from_integer(x.clone()));
        let m = r_of(mult);
        let a = m.mul(&r_of(&q.two_sigma2)).mul(y);
        let b = m.mul(&r_of(&q.sigma3));
        // [y2^j] sum_r (-(a y2 + b y2^2))^r / r!
        let mut coeff = R::zero();
        for r in 0..=j {
            for i in 0..=r {
                // i factors of b y2^2, r - i factors of a y2
                if (r - i) + 2 * i != j {
                    continue;
                }
                let binom: Integer = factorial::<Integer>(r) / (factorial::<Integer>(i) * factorial::<Integer>(r - i));
                let w = Rational::new(binom, factorial::<Integer>(r));
                let mut term = R::from_rational(&w).mul(&a.powi((r - i) as u64)).mul(&b.powi(i as u64));
                if r % 2 == 1 {
                    term = term.neg();
                }
                coeff = coeff.add(&term);
            }
        }
        let lambda = m.mul(&r_of(&q.sigma1));
        r_of(&factorial::<Integer>(j)).mul(&coeff).mul(&lambda.mul(y).mul(y).neg().exp())
    }

    /// Romberg integration over `[a, b]`, refined until two successive
    /// diagonal entries agree within `tol`.
    fn romberg<R: Real>(f: &dyn Fn(&R) -> R, a: &R, b: &R, tol: &R, max_levels: usize) -> R {
        let two = R::from_i64(2);
        let width = b.sub(a);
        let mut prev_row = vec![width.mul(&f(a).add(&f(b))).div(&two)];
        for level in 1..max_levels {
            let n = 1u64 << level;
            let h = width.div(&R::from_i64(n as i64));
            let mut mid = R::zero();
            for i in (1..n).step_by(2) {
                mid = mid.add(&f(&a.add(&h.mul(&R::from_i64(i as i64)))));
            }
            let mut row = vec![prev_row[0].div(&two).add(&h.mul(&mid))];
            let mut four_k = R::one();
            for k in 1..=level {
                four_k = four_k.mul(&R::from_i64(4));
                let next = row[k - 1].add(&row[k - 1].sub(&prev_row[k - 1]).div(&four_k.sub(&R::one())));
                row.push(next);
            }
            if level > 4 && row[level].sub(&prev_row[level - 1]).abs() <= *tol {
                return row[level].clone();
            }
            prev_row = row;
        }
        prev_row.pop().expect("nonempty row")
    }

    #[test]
    fn boundary_integral_diagonal_form_vanishes() {
        let q = QuadraticForm2::from_i64(1, 0, 1).unwrap();
        for axis in [1, 2] {
            for j in [1, 3, 5] {
                assert!(gaussian_boundary_integral(&q, &Integer::one(), j, axis).unwrap().is_zero());
            }
        }
        assert_eq!(gaussian_boundary_integral(&q, &Integer::one(), 2, 1), Err(Error::EvenDerivative(2)));
        assert!(gaussian_boundary_integral(&q, &Integer::one(), 1, 3).is_err());
    }

    #[test]
    fn boundary_integral_entry1_against_quadrature() {
        let (_, q, l) = entry1();
        with_precision_digits(30, || {
            let lambda = (l.to_f64().unwrap() * q.sigma1.to_f64().unwrap()).max(1.0);
            // the integrand is below 1e-40 beyond this point
            let upper = HpFloat::from_i64(((100.0 / lambda).sqrt().ceil()) as i64);
            for j in [1usize, 3] {
                let exact = gaussian_boundary_integral(&q, &l, j, 2).unwrap();
                let f = |y: &HpFloat| derivative_by_series(&q, &l, j, y);
                let tol = HpFloat::parse("1e-22");
                let numeric = romberg::<HpFloat>(&f, &HpFloat::zero(), &upper, &tol, 16);
                let err = numeric.sub(&HpFloat::from_rational(&exact)).abs().to_f64();
                let scale = exact.to_f64().unwrap().abs().max(1.0);
                assert!(err <= 1e-15 * scale, "j={j}: {exact} vs {}", numeric.to_decimal(25));
            }
        });
        assert_eq!(gaussian_boundary_integral(&q, &l, 1, 2).unwrap(), -Rational::new(q.two_sigma2.clone(), q.sigma1.clone() * 2));
    }

    #[test]
    fn boundary_integral_scaling() {
        let (_, q, l) = entry1();
        for c in [2i64, 3] {
            let scaled = QuadraticForm2::new(&q.sigma1 * c, &q.two_sigma2 * c, &q.sigma3 * c).unwrap();
            for j in [1usize, 3, 5] {
                for axis in [1, 2] {
                    let base = gaussian_boundary_integral(&q, &l, j, axis).unwrap();
                    let got = gaussian_boundary_integral(&scaled, &l, j, axis).unwrap();
                    assert_eq!(got, base * ri(c).pow(((j - 1) / 2) as i32));
                }
            }
        }
    }

    #[test]
    fn corner_derivatives() {
        let q = QuadraticForm2::from_i64(2, 3, 5).unwrap();
        let m = Integer::from(1);
        assert_eq!(corner_derivative(&q, &m, 0, 0), ri(1));
        assert_eq!(corner_derivative(&q, &m, 2, 0), ri(-4));
        assert_eq!(corner_derivative(&q, &m, 1, 1), ri(-3));
        assert_eq!(corner_derivative(&q, &m, 0, 2), ri(-10));
        assert_eq!(corner_derivative(&q, &m, 1, 2), ri(0));
        // d^4/dx1^4 exp(-2 x1^2) at 0 = 4! * (2^2 / 2!) = 48
        assert_eq!(corner_derivative(&q, &m, 4, 0), ri(48));
    }

    #[test]
    fn expansion_needs_quantum_point() {
        let set = SignedAlphaSet::new(vec![([rat(1, 2), rat(1, 2)], 1)]).unwrap();
        let q = QuadraticForm2::from_i64(1, 0, 1).unwrap();
        assert_eq!(em_expansion(&set, &q, &Integer::one(), 0, 1, 2).unwrap_err(), Error::NotInQuantumSet("0/1".into()));
        let (s, q, l) = entry1();
        assert_eq!(em_expansion(&s, &q, &l, 0, 1, 7).unwrap_err(), Error::OrderTooLarge(7, 6));
        assert!(matches!(em_expansion(&s, &q, &l, 2, 4, 1), Err(Error::NotCoprime { .. })));
    }

    #[test]
    fn main_term_matches_gauss_module() {
        let (s, q, l) = entry1();
        for (h, k) in [(0, 1), (1, 2), (1, 3), (2, 5)] {
            let zero = phase_sum(&s, &q, &l, h, k).unwrap().is_zero();
            assert_eq!(zero, em_expansion(&s, &q, &l, h, k, 0).is_ok(), "{h}/{k}");
        }
    }

    #[test]
    fn entry1_expansion_pairing_and_values() {
        let (s, q, l) = entry1();
        for (h, k) in [(0, 1), (1, 2)] {
            let e = em_expansion(&s, &q, &l, h, k, 3).unwrap();
            assert!(e.pairing_invariant);
            assert!(e.half_integral_terms_vanish);
        }
        let e = em_expansion(&s, &q, &l, 0, 1, 2).unwrap();
        let a: Vec<f64> = e.coefficients::<f64>().iter().map(|c| c.re).collect();
        assert_eq!(a[0], 0.0);
        assert!((a[1] + 4.0).abs() < 1e-12, "{a:?}");
        assert!((a[2] + 291.0 + 1.0 / 3.0).abs() < 1e-9, "{a:?}");
    }

    #[test]
    fn radial_matches_truncated_series() {
        let (s, q, l) = entry1();
        let t = rat(1, 2);
        let f = radial_eval(&s, &q, &l, 0, 1, &t, 30).unwrap();
        let series = false_theta_series(&s, &q, &l, &rat(400, 1)).unwrap();
        let mut expected = 0.0;
        for (e, c) in series.absolute() {
            expected += c.to_f64().unwrap() * (-0.5 * e.to_f64().unwrap()).exp();
        }
        assert!((f.re.to_f64() - expected).abs() < 1e-13 * expected.abs().max(1.0));
        assert!(f.im.abs().to_f64() < 1e-30);
    }

    #[test]
    fn radial_large_t_is_first_term() {
        let (s, q, l) = entry1();
        let t = ri(10);
        let f = radial_eval(&s, &q, &l, 0, 1, &t, 30).unwrap().re.to_f64();
        let series = false_theta_series(&s, &q, &l, &rat(40, 1)).unwrap();
        let (e, c) = series.absolute().into_iter().find(|(_, c)| !c.is_zero()).unwrap();
        let first = c.to_f64().unwrap() * (-10.0 * e.to_f64().unwrap()).exp();
        assert!((f - first).abs() <= 0.01 * first.abs(), "{f} vs {first}");
    }

    #[test]
    fn radial_bounded_and_stable() {
        let (s, q, l) = entry1();
        let t = rat(1, 1024);
        let lo = radial_eval(&s, &q, &l, 0, 1, &t, 30).unwrap();
        let hi = radial_eval(&s, &q, &l, 0, 1, &t, 60).unwrap();
        assert!(lo.re.to_f64().abs() < 1.0);
        assert_eq!(lo.re.to_decimal(15), hi.re.to_decimal(15));
        assert_eq!(radial_eval(&s, &q, &l, 0, 1, &ri(0), 30).unwrap_err(), Error::NonPositiveT);
    }

    #[test]
    fn order_zero_and_two_decay() {
        let (s, q, l) = entry1();
        let ts: Vec<Rational> = (8..=12).map(|e| rat(1, 1 << e)).collect();
        for order in [0, 2] {
            let r = order_check_with(&s, &q, &l, 0, 1, order, &ts, &Rational::zero(), 30).unwrap();
            assert!(r.passes(), "order {order}:\n{}", r.to_csv());
        }
        let bad = order_check_with(&s, &q, &l, 0, 1, 2, &ts, &rat(1, 1000), 30).unwrap();
        // the constant offset takes over once the true residual drops below it
        for row in &bad.rows[3..] {
            assert!((row.ratio.unwrap() - 1.0).abs() < 0.05, "{}", bad.to_csv());
        }
        assert!(!bad.passes());
    }

    #[test]
    fn remainder_bounded_by_next_term() {
        // a(0) against the radial limit: F(t) - sum_{1<=m<=5} a(m) t^m = a(0) + O(t^6)
        let (s, q, l) = entry1();
        let e = em_expansion(&s, &q, &l, 0, 1, 6).unwrap();
        let t = rat(1, 4096);
        with_precision_digits(50, || {
            let coeffs = e.coefficients::<HpFloat>();
            let f = radial_eval(&s, &q, &l, 0, 1, &t, 50).unwrap();
            let th = HpFloat::from_rational(&t);
            let rest = f.sub(&e.partial_sum(&coeffs, &th, 5));
            let bound = coeffs[6].norm().mul(&th.powi(6)).mul(&HpFloat::from_i64(2));
            assert!(rest.norm() <= bound, "{} vs {}", rest.norm(), bound);
            assert!(coeffs[0].norm().to_f64() == 0.0);
        });
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn boundary_integral_axis_symmetry(s1 in 1i64..20, s3 in 1i64..20, t2 in -8i64..8, j in 0usize..4) {
            prop_assume!(4 * s1 * s3 > t2 * t2);
            let q = QuadraticForm2::from_i64(s1, t2, s3).unwrap();
            let swapped = QuadraticForm2::from_i64(s3, t2, s1).unwrap();
            let m = Integer::from(3);
            prop_assert_eq!(
                gaussian_boundary_integral(&q, &m, 2 * j + 1, 1).unwrap(),
                gaussian_boundary_integral(&swapped, &m, 2 * j + 1, 2).unwrap()
            );
        }
    }
}

