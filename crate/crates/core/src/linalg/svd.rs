//! One-sided Jacobi SVD for complex matrices.
//!
//! Slower than bidiagonalization approaches but simple, very accurate for
//! small singular values, and free of convergence edge cases at the sizes
//! used here (a few hundred columns).

use super::Mat;
use crate::{error::Error, C64, Result};

/// `a = u diag(s) v^H` with `s` sorted descending.
///
/// `u` has the shape of `a` with orthonormal columns where `s > 0`;
/// `v` is square unitary.
pub fn svd_jacobi(a: &Mat) -> Result<(Mat, Vec<f64>, Mat)> {
    let (m, n) = a.dim();
    let mut w = a.clone();
    let mut v = Mat::eye(n);
    let tol = 1e-14;
    let max_sweeps = 60;

    let mut converged = false;
    for _sweep in 0..max_sweeps {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let mut app = 0.0;
                let mut aqq = 0.0;
                let mut apq = C64::new(0.0, 0.0);
                for i in 0..m {
                    let wp = w[[i, p]];
                    let wq = w[[i, q]];
                    app += wp.norm_sqr();
                    aqq += wq.norm_sqr();
                    apq += wp.conj() * wq;
                }
                let habs = apq.norm();
                if habs <= tol * (app * aqq).sqrt() || habs == 0.0 {
                    continue;
                }
                rotated = true;
                let phase = apq / habs;
                let tau = (aqq - app) / (2.0 * habs);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                // Columns: [p q] <- [p q] * [[c, s], [-s e^{-i phi}, c e^{-i phi}]]
                let pc = phase.conj();
                for i in 0..m {
                    let wp = w[[i, p]];
                    let wq = w[[i, q]];
                    w[[i, p]] = wp * c - wq * (s * pc);
                    w[[i, q]] = wp * s + wq * (c * pc);
                }
                for i in 0..n {
                    let vp = v[[i, p]];
                    let vq = v[[i, q]];
                    v[[i, p]] = vp * c - vq * (s * pc);
                    v[[i, q]] = vp * s + vq * (c * pc);
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence(
            "jacobi svd did not converge within sweep budget".into(),
        ));
    }

    let mut sigma: Vec<f64> = (0..n)
        .map(|j| w.column(j).iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sigma[j].partial_cmp(&sigma[i]).unwrap());

    let mut u = Mat::zeros((m, n));
    let mut vout = Mat::zeros((n, n));
    let mut sout = vec![0.0; n];
    for (jnew, &jold) in order.iter().enumerate() {
        sout[jnew] = sigma[jold];
        vout.column_mut(jnew).assign(&v.column(jold));
        if sigma[jold] > 0.0 {
            let col = w.column(jold).mapv(|x| x / sigma[jold]);
            u.column_mut(jnew).assign(&col);
        }
    }
    sigma.clear();
    Ok((u, sout, vout))
}

/// Singular values only, sorted descending.
pub fn singular_values(a: &Mat) -> Vec<f64> {
    match svd_jacobi(a) {
        Ok((_, s, _)) => s,
        Err(_) => vec![f64::NAN; a.ncols()],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{adjoint, fro_norm};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn reconstructs_matrix() {
        let a = Mat::from_shape_fn((5, 4), |(i, j)| {
            c(
                ((i * 3 + j) % 7) as f64 - 3.0,
                ((i + 2 * j) % 5) as f64 * 0.5 - 1.0,
            )
        });
        let (u, s, v) = svd_jacobi(&a).unwrap();
        let mut us = u.clone();
        for j in 0..4 {
            let sj = s[j];
            us.column_mut(j).mapv_inplace(|x| x * sj);
        }
        let rec = us.dot(&adjoint(&v));
        assert!(fro_norm(&(&rec - &a)) < 1e-12 * fro_norm(&a).max(1.0));
        for w in s.windows(2) {
            assert!(w[0] >= w[1]);
        }
    }

    #[test]
    fn rank_deficient_detected() {
        // Second column is i times the first.
        let mut a = Mat::zeros((4, 3));
        for i in 0..4 {
            a[[i, 0]] = c(i as f64 + 1.0, -1.0);
            a[[i, 1]] = a[[i, 0]] * C64::new(0.0, 1.0);
            a[[i, 2]] = c(0.5, i as f64);
        }
        let (_, s, v) = svd_jacobi(&a).unwrap();
        assert!(s[2] < 1e-13 * s[0]);
        // Null vector annihilates a.
        let x = v.column(2).to_owned();
        let ax = a.dot(&x);
        assert!(ax.iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-12);
    }

    #[test]
    fn unitary_input_gives_unit_singular_values() {
        let inv_sqrt2 = 1.0 / 2.0_f64.sqrt();
        let a = ndarray::array![
            [c(inv_sqrt2, 0.0), c(0.0, inv_sqrt2)],
            [c(0.0, inv_sqrt2), c(inv_sqrt2, 0.0)],
        ];
        let s = singular_values(&a);
        assert!((s[0] - 1.0).abs() < 1e-14);
        assert!((s[1] - 1.0).abs() < 1e-14);
    }
}
