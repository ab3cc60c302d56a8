//! Householder QR and null-space extraction for complex matrices.

use super::{adjoint, Mat};
use crate::{error::Error, C64, Result};

/// Full QR decomposition `A = Q R` with unitary `Q` (m x m) and upper
/// trapezoidal `R` (m x n).
pub fn qr_decompose(a: &Mat) -> (Mat, Mat) {
    let (m, n) = a.dim();
    let mut r = a.clone();
    let mut q = Mat::eye(m);
    let steps = m.min(n);
    let mut v = vec![C64::new(0.0, 0.0); m];

    for k in 0..steps {
        // Householder vector for column k below the diagonal.
        let mut xnorm = 0.0;
        for i in k..m {
            xnorm += r[[i, k]].norm_sqr();
        }
        let xnorm = xnorm.sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let x0 = r[[k, k]];
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { C64::new(1.0, 0.0) };
        let alpha = -phase * xnorm;
        let mut vnorm_sq = 0.0;
        for i in k..m {
            let vi = if i == k { r[[i, k]] - alpha } else { r[[i, k]] };
            v[i] = vi;
            vnorm_sq += vi.norm_sqr();
        }
        if vnorm_sq == 0.0 {
            continue;
        }
        let beta = 2.0 / vnorm_sq;

        // r <- (I - beta v v^H) r
        for j in k..n {
            let mut dot = C64::new(0.0, 0.0);
            for i in k..m {
                dot += v[i].conj() * r[[i, j]];
            }
            let dot = dot * beta;
            for i in k..m {
                let vi = v[i];
                r[[i, j]] -= vi * dot;
            }
        }
        // q <- q (I - beta v v^H)
        for i in 0..m {
            let mut dot = C64::new(0.0, 0.0);
            for j in k..m {
                dot += q[[i, j]] * v[j];
            }
            let dot = dot * beta;
            for j in k..m {
                q[[i, j]] -= dot * v[j].conj();
            }
        }
        // Clean the eliminated entries.
        r[[k, k]] = alpha;
        for i in (k + 1)..m {
            r[[i, k]] = C64::new(0.0, 0.0);
        }
    }
    (q, r)
}

/// Orthonormal basis of the null space of `c` (rows = constraints).
///
/// Computed from the QR factorization of `c^H`; columns of the returned
/// matrix are mutually orthonormal and satisfy `c x = 0` to roundoff.
/// Constraint rows must be linearly independent; a rank-deficient set is
/// reported as an error rather than silently compressed.
pub fn null_space(c: &Mat) -> Result<Mat> {
    let (mrows, n) = c.dim();
    if mrows >= n {
        return Err(Error::validation(
            "null_space: need fewer constraints than unknowns",
        ));
    }
    let ch = adjoint(c); // n x mrows
    let (q, r) = qr_decompose(&ch);
    // Rank check on the triangular factor.
    let scale = super::fro_norm(c).max(f64::MIN_POSITIVE);
    for k in 0..mrows {
        if r[[k, k]].norm() < 1e-12 * scale {
            return Err(Error::SingularSystem(format!(
                "null_space: constraint rows numerically dependent (|r[{k},{k}]| = {:.3e})",
                r[[k, k]].norm()
            )));
        }
    }
    let dim = n - mrows;
    let mut basis = Mat::zeros((n, dim));
    for j in 0..dim {
        basis.column_mut(j).assign(&q.column(mrows + j));
    }
    Ok(basis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{fro_norm, Vecc};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn qr_reconstructs() {
        let a = Mat::from_shape_fn((5, 3), |(i, j)| {
            c((i * 3 + j) as f64 * 0.3 - 1.0, (i as f64 - j as f64) * 0.7)
        });
        let (q, r) = qr_decompose(&a);
        let qr = q.dot(&r);
        let diff = &qr - &a;
        assert!(fro_norm(&diff) < 1e-12 * fro_norm(&a).max(1.0));
        // Q unitary.
        let qhq = adjoint(&q).dot(&q);
        let eye = Mat::eye(5);
        assert!(fro_norm(&(&qhq - &eye)) < 1e-12);
    }

    #[test]
    fn null_space_annihilated() {
        let c_mat = Mat::from_shape_fn((2, 6), |(i, j)| {
            c((i + j) as f64 * 0.5, if j % 2 == 0 { 0.3 } else { -0.2 })
        });
        let ns = null_space(&c_mat).unwrap();
        assert_eq!(ns.dim(), (6, 4));
        for j in 0..4 {
            let col: Vecc = ns.column(j).to_owned();
            let r = c_mat.dot(&col);
            assert!(r.iter().map(|v| v.norm()).fold(0.0, f64::max) < 1e-12);
        }
        // Orthonormal columns.
        let g = adjoint(&ns).dot(&ns);
        let eye = Mat::eye(4);
        assert!(fro_norm(&(&g - &eye)) < 1e-12);
    }

    #[test]
    fn dependent_constraints_detected() {
        let mut c_mat = Mat::zeros((2, 4));
        for j in 0..4 {
            c_mat[[0, j]] = c(j as f64, 1.0);
            c_mat[[1, j]] = c(2.0 * j as f64, 2.0); // scalar multiple of row 0
        }
        assert!(null_space(&c_mat).is_err());
    }
}
