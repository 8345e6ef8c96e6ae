//! `Z(q)` straight from the principal-value contour integral.
//!
//! Each vertex contributes a factor `(w - 1/w)^(2 - deg)`. Extracting the
//! constant term of that factor against the theta function `Theta_M` leaves an
//! exact weight per coordinate of `m`, so the integral becomes a finite signed
//! sum of `q^(m^T M^{-1} m / 2)` over `m in Z^6`. Nothing here uses the central
//! block or the shift vectors of the closed form.

use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::BinaryForm;
use crate::plumbing::{build_matrix, HLabels, EDGES};
use crate::theta::{rat, QSeries};
use crate::{Integer, Rational};

/// Coefficient extracted by the principal-value integral at a vertex whose
/// factor is `(w - 1/w)^power`, for Fourier index `m`.
///
/// `+1`: `delta(m, -1) - delta(m, 1)`. `-1`: `sgn_o(m) / 2`, where `sgn_o`
/// is the sign on odd integers and zero on even ones.
pub fn pv_weight(power: i64, m: i64) -> Result<Rational> {
    match power {
        1 => Ok(rat(
            match m {
                -1 => 1,
                1 => -1,
                _ => 0,
            },
            1,
        )),
        -1 => Ok(if m % 2 == 0 { Rational::zero() } else { rat(m.signum(), 2) }),
        p => Err(Error::UnsupportedPower(p)),
    }
}

/// `2 - deg(v)` for every vertex of the H-graph.
pub fn vertex_powers() -> [i64; 6] {
    let mut deg = [0i64; 6];
    for &(i, j) in &EDGES {
        deg[i] += 1;
        deg[j] += 1;
    }
    deg.map(|d| 2 - d)
}

/// `m^T M^{-1} m / 2`, exactly.
pub fn theta_exponent(h: &HLabels, m: &[i64; 6]) -> Result<Rational> {
    let (adj, det) = build_matrix(h).inverse_exact()?;
    let mut acc = Integer::zero();
    for i in 0..6 {
        for j in 0..6 {
            acc += adj.get(i, j) * Integer::from(m[i] * m[j]);
        }
    }
    Ok(Rational::new(acc, det * 2))
}

/// `Z(q)` below the absolute cutoff, via the contour weights.
pub fn z_series_contour(h: &HLabels, cutoff: &Rational) -> Result<QSeries> {
    let matrix = build_matrix(h);
    if !matrix.is_positive_definite()? {
        return Err(Error::NotPu(h.to_string()));
    }
    let powers = vertex_powers();
    let (adj, det) = matrix.inverse_exact()?;
    let prefactor = rat(h.trace() - 18, 2);
    let rel = cutoff - &prefactor;
    if !rel.is_positive() {
        return Ok(QSeries::zero(prefactor, cutoff.clone()));
    }
    let two_det: Integer = &det * 2;
    // m^T adj m < rel * 2 det
    let limit = (&rel * Rational::from_integer(two_det.clone())).ceil().to_integer();
    let limit = limit.to_i128().ok_or_else(|| Error::Overflow(limit.to_string()))?;
    let a = |i: usize, j: usize| -> Result<i128> {
        adj.get(i, j).to_i128().ok_or_else(|| Error::Overflow(adj.get(i, j).to_string()))
    };
    // Vertices with power +1 take only finitely many weighted values; the rest
    // are enumerated over the ellipse.
    let leaves: Vec<usize> = (0..6).filter(|&v| powers[v] == 1).collect();
    let centers: Vec<usize> = (0..6).filter(|&v| powers[v] != 1).collect();
    if centers.len() != 2 {
        return Err(Error::Dimension(format!("expected two inner vertices, found {}", centers.len())));
    }
    let (c1, c2) = (centers[0], centers[1]);
    let leaf_range: Vec<i64> = (-2..=2).collect();
    let mut sectors: Vec<Vec<i64>> = vec![Vec::new()];
    for _ in &leaves {
        sectors = sectors
            .into_iter()
            .flat_map(|s| leaf_range.iter().map(move |&x| [s.clone(), vec![x]].concat()))
            .collect();
    }
    let parts: Vec<Result<Vec<(Rational, Rational)>>> = sectors
        .par_iter()
        .map(|u| {
            let mut w_leaf = Rational::one();
            for (k, &v) in leaves.iter().enumerate() {
                w_leaf *= pv_weight(powers[v], u[k])?;
            }
            if w_leaf.is_zero() {
                return Ok(Vec::new());
            }
            let mut h1 = 0i128;
            let mut h2 = 0i128;
            let mut c0 = 0i128;
            for (k, &v) in leaves.iter().enumerate() {
                h1 += a(c1, v)? * u[k] as i128;
                h2 += a(c2, v)? * u[k] as i128;
                for (l, &w) in leaves.iter().enumerate() {
                    c0 += a(v, w)? * (u[k] * u[l]) as i128;
                }
            }
            let form = BinaryForm { g11: a(c1, c1)?, g12: a(c1, c2)?, g22: a(c2, c2)?, h1, h2, c0 };
            let mut out = Vec::new();
            for (y, v) in form.points_below(&limit, &1, &[0, 0]) {
                let w = &w_leaf * pv_weight(powers[c1], y[0] as i64)? * pv_weight(powers[c2], y[1] as i64)?;
                if !w.is_zero() {
                    out.push((Rational::new(Integer::from(v), two_det.clone()), w));
                }
            }
            Ok(out)
        })
        .collect();
    let mut all = Vec::new();
    for p in parts {
        all.extend(p?);
    }
    Ok(QSeries::from_terms(prefactor, cutoff.clone(), all))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theta::z_series;

    const E1: HLabels = HLabels([2, 3, 7, 1, 2, 3]);

    #[test]
    fn weights() {
        assert_eq!(pv_weight(1, -1).unwrap(), rat(1, 1));
        assert_eq!(pv_weight(1, 1).unwrap(), rat(-1, 1));
        assert_eq!(pv_weight(1, 0).unwrap(), rat(0, 1));
        assert_eq!(pv_weight(-1, 3).unwrap(), rat(1, 2));
        assert_eq!(pv_weight(-1, -1).unwrap(), rat(-1, 2));
        assert_eq!(pv_weight(-1, 2).unwrap(), rat(0, 1));
        assert_eq!(pv_weight(2, 1).unwrap_err(), Error::UnsupportedPower(2));
        for m in -6..=6 {
            for p in [1, -1] {
                assert_eq!(pv_weight(p, -m).unwrap(), -pv_weight(p, m).unwrap());
            }
        }
    }

    #[test]
    fn powers_of_h_graph() {
        assert_eq!(vertex_powers(), [1, 1, -1, -1, 1, 1]);
    }

    #[test]
    fn exponents() {
        assert_eq!(theta_exponent(&E1, &[0; 6]).unwrap(), rat(0, 1));
        assert_eq!(theta_exponent(&E1, &[0, 0, 2, 2, 0, 0]).unwrap(), rat(600, 1));
        let m = [1, -2, 3, 5, -1, 4];
        let neg = m.map(|x| -x);
        assert_eq!(theta_exponent(&E1, &m).unwrap(), theta_exponent(&E1, &neg).unwrap());
        assert!(theta_exponent(&E1, &m).unwrap().is_positive());
    }

    #[test]
    fn agrees_with_closed_form() {
        for (h, cut) in [(E1, 30), (HLabels([2, 3, 3, 1, 2, 27]), 20)] {
            let c = rat(cut, 1);
            assert_eq!(z_series_contour(&h, &c).unwrap(), z_series(&h, &c).unwrap());
        }
    }

    #[test]
    fn empty_below_minimum() {
        assert!(z_series_contour(&E1, &rat(0, 1)).unwrap().is_empty());
    }
}
