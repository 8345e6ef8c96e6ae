//! Exact integer matrices and Bernoulli polynomials.
//!
//! Everything here is generic over the integer scalar (`i64`, `i128`,
//! [`BigInt`](num_bigint::BigInt), ...) so that hot loops can run on machine
//! words while the public API defaults to arbitrary precision through the
//! aliases in the crate root.

use std::fmt;

use num_integer::Integer as IntegerOps;
use num_rational::Ratio;
use num_traits::{FromPrimitive, One, Signed, Zero};

use crate::error::{Error, Result};

/// Integer scalar usable by the exact routines.
pub trait ExactInt: IntegerOps + Signed + Clone + FromPrimitive + fmt::Debug + fmt::Display {}
impl<T> ExactInt for T where T: IntegerOps + Signed + Clone + FromPrimitive + fmt::Debug + fmt::Display {}

/// Dense row-major integer matrix.
#[derive(Clone, PartialEq, Eq)]
pub struct IntMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
    symmetric: bool,
}

impl<T: ExactInt> IntMatrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        let mut m = Self { rows, cols, data, symmetric: false };
        m.symmetric = m.check_symmetric();
        Ok(m)
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Self::new(r, c, rows.iter().flatten().cloned().collect())
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![T::zero(); n * n];
        for i in 0..n {
            data[i * n + i] = T::one();
        }
        Self { rows: n, cols: n, data, symmetric: true }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Set only when the entries were checked to be symmetric.
    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn trace(&self) -> T {
        (0..self.rows.min(self.cols)).fold(T::zero(), |acc, i| acc + self.get(i, i).clone())
    }

    fn check_symmetric(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    fn require_square(&self) -> Result<()> {
        if self.is_square() {
            Ok(())
        } else {
            Err(Error::NotSquare { rows: self.rows, cols: self.cols })
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut data = Vec::with_capacity(self.rows * other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = T::zero();
                for k in 0..self.cols {
                    acc = acc + self.get(i, k).clone() * other.get(k, j).clone();
                }
                data.push(acc);
            }
        }
        Self::new(self.rows, other.cols, data)
    }

    pub fn scale(&self, s: &T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x.clone() * s.clone()).collect(),
            symmetric: self.symmetric,
        }
    }

    /// Leading `k x k` principal submatrix.
    pub fn leading(&self, k: usize) -> Self {
        let data = (0..k)
            .flat_map(|i| (0..k).map(move |j| (i, j)))
            .map(|(i, j)| self.get(i, j).clone())
            .collect();
        Self::new(k, k, data).expect("leading block has consistent shape")
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> Result<T> {
        self.require_square()?;
        let n = self.rows;
        if n == 0 {
            return Ok(T::one());
        }
        let mut a: Vec<Vec<T>> = (0..n).map(|i| self.row(i).to_vec()).collect();
        let mut negate = false;
        let mut prev = T::one();
        for k in 0..n - 1 {
            if a[k][k].is_zero() {
                match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                    Some(p) => {
                        a.swap(k, p);
                        negate = !negate;
                    }
                    None => return Ok(T::zero()),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = a[i][j].clone() * a[k][k].clone() - a[i][k].clone() * a[k][j].clone();
                    a[i][j] = num / prev.clone();
                }
            }
            prev = a[k][k].clone();
        }
        let d = a[n - 1][n - 1].clone();
        Ok(if negate { -d } else { d })
    }

    /// Leading principal minors `det(leading(1)), ..., det(leading(n))`.
    pub fn leading_principal_minors(&self) -> Result<Vec<T>> {
        self.require_square()?;
        (1..=self.rows).map(|k| self.leading(k).det()).collect()
    }

    /// Sylvester's criterion on a symmetric matrix.
    pub fn is_positive_definite(&self) -> Result<bool> {
        self.require_square()?;
        if !self.symmetric {
            return Ok(false);
        }
        Ok(self.leading_principal_minors()?.iter().all(|m| m.is_positive()))
    }

    /// Returns `(adjugate, det)` with `self * adjugate = det * I`.
    ///
    /// Gauss-Jordan over the rationals; the adjugate is `det * inverse`,
    /// which is integral.
    pub fn inverse_exact(&self) -> Result<(Self, T)> {
        self.require_square()?;
        let det = self.det()?;
        if det.is_zero() {
            return Err(Error::Singular);
        }
        let inv = self.inverse_rational()?;
        let n = self.rows;
        let mut data = Vec::with_capacity(n * n);
        for q in inv {
            let scaled = q * Ratio::from_integer(det.clone());
            debug_assert!(scaled.is_integer());
            data.push(scaled.to_integer());
        }
        Ok((Self::new(n, n, data)?, det))
    }

    /// Exact inverse with rational entries, row-major.
    pub fn inverse_rational(&self) -> Result<Vec<Ratio<T>>> {
        self.require_square()?;
        let n = self.rows;
        let mut a: Vec<Vec<Ratio<T>>> = (0..n)
            .map(|i| {
                let mut row: Vec<Ratio<T>> =
                    self.row(i).iter().map(|x| Ratio::from_integer(x.clone())).collect();
                row.extend((0..n).map(|j| if i == j { Ratio::one() } else { Ratio::zero() }));
                row
            })
            .collect();
        for col in 0..n {
            let pivot = (col..n).find(|&i| !a[i][col].is_zero()).ok_or(Error::Singular)?;
            a.swap(col, pivot);
            let p = a[col][col].clone();
            for x in a[col].iter_mut() {
                *x = x.clone() / p.clone();
            }
            for i in 0..n {
                if i != col && !a[i][col].is_zero() {
                    let f = a[i][col].clone();
                    for j in col..2 * n {
                        let v = a[col][j].clone() * f.clone();
                        a[i][j] = a[i][j].clone() - v;
                    }
                }
            }
        }
        Ok(a.into_iter().flat_map(|row| row.into_iter().skip(n)).collect())
    }
}

impl<T: fmt::Display> fmt::Debug for IntMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "IntMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> =
                self.data[i * self.cols..(i + 1) * self.cols].iter().map(|x| x.to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

/// Bernoulli numbers `B_0, ..., B_max` (convention `B_1 = -1/2`), computed once.
#[derive(Clone, Debug)]
pub struct BernoulliTable<T> {
    numbers: Vec<Ratio<T>>,
    binomials: Vec<Vec<T>>,
}

impl<T: ExactInt> BernoulliTable<T> {
    pub fn new(max: usize) -> Self {
        let mut binomials: Vec<Vec<T>> = Vec::with_capacity(max + 2);
        for n in 0..=max + 1 {
            let mut row = vec![T::one(); n + 1];
            for k in 1..n {
                row[k] = binomials[n - 1][k - 1].clone() + binomials[n - 1][k].clone();
            }
            binomials.push(row);
        }
        // sum_{k<=m} C(m+1, k) B_k = 0 for m >= 1
        let mut numbers: Vec<Ratio<T>> = Vec::with_capacity(max + 1);
        numbers.push(Ratio::one());
        for m in 1..=max {
            let mut acc = Ratio::zero();
            for (k, b) in numbers.iter().enumerate() {
                acc = acc + b.clone() * Ratio::from_integer(binomials[m + 1][k].clone());
            }
            let lead = Ratio::from_integer(binomials[m + 1][m].clone());
            numbers.push(-acc / lead);
        }
        Self { numbers, binomials }
    }

    pub fn max_index(&self) -> usize {
        self.numbers.len() - 1
    }

    pub fn number(&self, m: usize) -> &Ratio<T> {
        &self.numbers[m]
    }

    /// `B_m(x) = sum_k C(m, k) B_k x^(m-k)`.
    pub fn poly(&self, m: usize, x: &Ratio<T>) -> Ratio<T> {
        assert!(m <= self.max_index(), "Bernoulli index {m} beyond table");
        // Horner in x over the reversed coefficient list.
        let mut acc = Ratio::zero();
        for k in 0..=m {
            acc = acc * x.clone()
                + self.numbers[k].clone() * Ratio::from_integer(self.binomials[m][k].clone());
        }
        acc
    }
}

/// One-off evaluation of `B_m(x)`.
pub fn bernoulli_poly<T: ExactInt>(m: usize, x: &Ratio<T>) -> Ratio<T> {
    BernoulliTable::new(m).poly(m, x)
}

/// `sgn*(x)`: the sign with `sgn*(0) = 1`.
pub fn sgn_star<T: Signed>(x: &T) -> i8 {
    if x.is_negative() {
        -1
    } else {
        1
    }
}

/// `n!` as an integer of type `T`.
pub fn factorial<T: ExactInt>(n: usize) -> T {
    (1..=n).fold(T::one(), |acc, i| acc * T::from_usize(i).expect("small factorial factor"))
}
