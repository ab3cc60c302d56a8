//! Cholesky factorization of Hermitian positive-definite Gram matrices and
//! the triangular solves that turn Gram-weighted operator norms into plain
//! spectral norms.

use super::{Mat, Vecc};
use crate::{error::Error, C64, Result};

/// Lower-triangular Cholesky factor `L` with `G = L L^H`.
///
/// `G` must be Hermitian positive definite up to roundoff; the factorization
/// reads only the lower triangle.  A non-positive pivot (relative to the
/// largest diagonal entry) is reported as a singular-system error, which for
/// Gram matrices means the underlying basis is numerically dependent.
pub fn cholesky(g: &Mat) -> Result<Mat> {
    let (m, n) = g.dim();
    if m != n {
        return Err(Error::validation("cholesky: matrix must be square"));
    }
    let scale = (0..n).map(|i| g[[i, i]].re).fold(0.0f64, f64::max).max(f64::MIN_POSITIVE);
    let mut l = Mat::zeros((n, n));
    for j in 0..n {
        let mut d = g[[j, j]].re;
        for k in 0..j {
            d -= l[[j, k]].norm_sqr();
        }
        if !(d.is_finite() && d > scale * 1e-14) {
            return Err(Error::SingularSystem(format!(
                "cholesky: pivot {j} non-positive ({d:.3e} against scale {scale:.3e})"
            )));
        }
        let dj = d.sqrt();
        l[[j, j]] = C64::new(dj, 0.0);
        for i in j + 1..n {
            let mut s = g[[i, j]];
            for k in 0..j {
                s -= l[[i, k]] * l[[j, k]].conj();
            }
            l[[i, j]] = s / dj;
        }
    }
    Ok(l)
}

/// Solve `L x = b` for lower-triangular `L` by forward substitution.
pub fn solve_lower(l: &Mat, b: &Vecc) -> Vecc {
    let n = l.nrows();
    assert_eq!(b.len(), n);
    let mut x = b.clone();
    for i in 0..n {
        let mut s = x[i];
        for k in 0..i {
            s -= l[[i, k]] * x[k];
        }
        x[i] = s / l[[i, i]];
    }
    x
}

/// Solve `L X = B` column by column.
pub fn solve_lower_mat(l: &Mat, b: &Mat) -> Mat {
    let (n, cols) = b.dim();
    assert_eq!(l.nrows(), n);
    let mut x = b.clone();
    for j in 0..cols {
        for i in 0..n {
            let mut s = x[[i, j]];
            for k in 0..i {
                s -= l[[i, k]] * x[[k, j]];
            }
            x[[i, j]] = s / l[[i, i]];
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{adjoint, fro_norm};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_hpd(n: usize) -> Mat {
        // A^H A + I is Hermitian positive definite for any A.
        let a = Mat::from_shape_fn((n, n), |(i, j)| {
            let x = ((i * 13 + j * 7) % 19) as f64 / 19.0 - 0.5;
            let y = ((i * 3 + j * 11) % 23) as f64 / 23.0 - 0.5;
            c(x, y)
        });
        let mut g = adjoint(&a).dot(&a);
        for i in 0..n {
            g[[i, i]] += c(1.0, 0.0);
        }
        g
    }

    #[test]
    fn factor_reconstructs() {
        let g = random_hpd(9);
        let l = cholesky(&g).unwrap();
        let rec = l.dot(&adjoint(&l));
        let diff = &rec - &g;
        assert!(fro_norm(&diff) < 1e-12 * fro_norm(&g));
        // Strictly lower-triangular beyond the diagonal band.
        for i in 0..9 {
            for j in i + 1..9 {
                assert_eq!(l[[i, j]], c(0.0, 0.0));
            }
        }
    }

    #[test]
    fn forward_solve_matches_direct_product() {
        let g = random_hpd(7);
        let l = cholesky(&g).unwrap();
        let x = Vecc::from_shape_fn(7, |i| c(i as f64 - 2.0, 0.3 * i as f64));
        let b = l.dot(&x);
        let got = solve_lower(&l, &b);
        for i in 0..7 {
            assert!((got[i] - x[i]).norm() < 1e-12);
        }
        let bm = Mat::from_shape_fn((7, 2), |(i, j)| b[i] * c(1.0 + j as f64, 0.0));
        let gm = solve_lower_mat(&l, &bm);
        for i in 0..7 {
            assert!((gm[[i, 0]] - x[i]).norm() < 1e-12);
            assert!((gm[[i, 1]] - x[i] * 2.0).norm() < 1e-11);
        }
    }

    #[test]
    fn indefinite_rejected() {
        let mut g = random_hpd(4);
        g[[2, 2]] = c(-5.0, 0.0);
        assert!(cholesky(&g).is_err());
    }
}
