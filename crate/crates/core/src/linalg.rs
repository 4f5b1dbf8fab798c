//! Float linear algebra on sampled systems: numeric nullspaces, rank,
//! least squares, and rounding of null vectors back to small rationals.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

/// Relative singular-value cutoff below which a direction counts as null.
pub const NULL_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct NullSpace {
    /// Columns span the numeric nullspace (unknowns × k).
    pub basis: DMatrix<f64>,
    pub singular_values: Vec<f64>,
    /// Ratio of the largest discarded to the smallest kept singular value;
    /// close to 1 means the cutoff is ambiguous.
    pub gap: f64,
}

/// Scales every row to unit norm (zero rows are left alone).
pub fn normalize_rows(m: &mut DMatrix<f64>) {
    for mut row in m.row_iter_mut() {
        let n = row.norm();
        if n > 0.0 {
            row /= n;
        }
    }
}

pub fn nullspace(a: &DMatrix<f64>) -> NullSpace {
    let cols = a.ncols();
    // Pad to at least as many rows as columns so V is square.
    let a = if a.nrows() < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (a.nrows(), cols)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = a.svd(false, true);
    let v_t = svd.v_t.expect("requested V");
    let sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let cutoff = NULL_THRESHOLD * smax.max(f64::MIN_POSITIVE);
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&i, &j| sv[j].partial_cmp(&sv[i]).unwrap());
    let null_idx: Vec<usize> = order.iter().copied().filter(|&i| sv[i] <= cutoff).collect();
    let kept_min = order
        .iter()
        .filter(|&&i| sv[i] > cutoff)
        .map(|&i| sv[i])
        .fold(f64::INFINITY, f64::min);
    let dropped_max = null_idx.iter().map(|&i| sv[i]).fold(0.0, f64::max);
    let gap = if kept_min.is_finite() && kept_min > 0.0 { dropped_max / kept_min } else { 0.0 };
    let mut basis = DMatrix::zeros(cols, null_idx.len());
    for (c, &i) in null_idx.iter().enumerate() {
        basis.set_column(c, &v_t.row(i).transpose());
    }
    NullSpace {
        basis,
        singular_values: sv,
        gap,
    }
}

pub fn rank(a: &DMatrix<f64>) -> usize {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0;
    }
    let sv = a.clone().svd(false, false).singular_values;
    let smax = sv.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > NULL_THRESHOLD * smax).count()
}

/// Reduced row echelon form of the transpose of `basis` (k × unknowns),
/// giving a canonical basis of the same span with unit pivots.
pub fn rref_rows(basis: &DMatrix<f64>) -> DMatrix<f64> {
    let mut m = basis.transpose();
    let (rows, cols) = m.shape();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let (pivot, val) = (r..rows)
            .map(|i| (i, m[(i, c)].abs()))
            .fold((r, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if val < 1e-9 {
            continue;
        }
        m.swap_rows(r, pivot);
        let p = m[(r, c)];
        for j in 0..cols {
            m[(r, j)] /= p;
        }
        for i in 0..rows {
            if i != r {
                let f = m[(i, c)];
                if f != 0.0 {
                    for j in 0..cols {
                        m[(i, j)] -= f * m[(r, j)];
                    }
                }
            }
        }
        r += 1;
    }
    m
}

/// Closest rational with denominator at most `max_den`, if within `tol`.
pub fn rationalize(x: f64, max_den: i64, tol: f64) -> Option<BigRational> {
    if x.abs() < tol {
        return Some(BigRational::zero());
    }
    // Continued fraction convergents.
    let (mut h0, mut h1) = (0i64, 1i64);
    let (mut k0, mut k1) = (1i64, 0i64);
    let mut v = x;
    for _ in 0..40 {
        let a = v.floor();
        if a.abs() > 1e12 {
            break;
        }
        let a = a as i64;
        let h2 = a.checked_mul(h1)?.checked_add(h0)?;
        let k2 = a.checked_mul(k1)?.checked_add(k0)?;
        if k2 > max_den {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        if (x - h1 as f64 / k1 as f64).abs() < tol {
            return Some(BigRational::new(BigInt::from(h1), BigInt::from(k1)));
        }
        let frac = v - a as f64;
        if frac.abs() < 1e-15 {
            break;
        }
        v = 1.0 / frac;
    }
    if k1 > 0 && (x - h1 as f64 / k1 as f64).abs() < tol {
        Some(BigRational::new(BigInt::from(h1), BigInt::from(k1)))
    } else {
        None
    }
}

/// Least-squares solution of `a x = b` and its residual norm.
pub fn least_squares(a: &DMatrix<f64>, b: &nalgebra::DVector<f64>) -> (nalgebra::DVector<f64>, f64) {
    let svd = a.clone().svd(true, true);
    let x = svd
        .solve(b, 1e-12)
        .unwrap_or_else(|_| nalgebra::DVector::zeros(a.ncols()));
    let r = (a * &x - b).norm();
    (x, r)
}

pub fn is_small(q: &BigRational) -> bool {
    q.abs() < BigRational::new(1.into(), 1_000_000.into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nullspace_of_rank_one() {
        let a = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0]);
        let ns = nullspace(&a);
        assert_eq!(ns.basis.ncols(), 2);
        assert!((&a * &ns.basis).norm() < 1e-12);
    }

    #[test]
    fn rationals_recovered() {
        assert_eq!(rationalize(-0.25, 1000, 1e-9), Some(BigRational::new((-1).into(), 4.into())));
        assert_eq!(rationalize(2.0 / 3.0, 1000, 1e-9), Some(BigRational::new(2.into(), 3.into())));
        assert_eq!(rationalize(std::f64::consts::PI, 100, 1e-9), None);
    }

    #[test]
    fn rref_canonical() {
        let b = DMatrix::from_column_slice(3, 1, &[2.0, 4.0, 0.0]);
        let r = rref_rows(&b);
        assert!((r[(0, 0)] - 1.0).abs() < 1e-12 && (r[(0, 1)] - 2.0).abs() < 1e-12);
    }
}
