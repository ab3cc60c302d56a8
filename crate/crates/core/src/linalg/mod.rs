//! Dense complex linear algebra used by the operator route.
//!
//! Everything here is written against `ndarray` containers with
//! `Complex64` entries.  The algorithms are the classical dense ones
//! (partial-pivot LU, Householder QR, Hessenberg reduction with shifted
//! QR iteration, one-sided Jacobi SVD); problem sizes stay in the low
//! thousands so cubic-cost direct methods are the right tool.

mod chol;
mod eig;
mod gauss;
mod lu;
mod qr;
mod svd;

pub use chol::{cholesky, solve_lower, solve_lower_mat};
pub use eig::{eig, generalized_eigenspace, EigDecomposition, EigenCluster};
pub use gauss::gauss_legendre;
pub use lu::{LuFactors, Lu};
pub use qr::{null_space, qr_decompose};
pub use svd::{singular_values, svd_jacobi};

use crate::C64;
use ndarray::{Array1, Array2};

pub type Mat = Array2<C64>;
pub type Vecc = Array1<C64>;

/// Conjugate transpose.
pub fn adjoint(a: &Mat) -> Mat {
    let (m, n) = a.dim();
    let mut out = Mat::zeros((n, m));
    for i in 0..m {
        for j in 0..n {
            out[[j, i]] = a[[i, j]].conj();
        }
    }
    out
}

/// Euclidean norm of a complex vector.
pub fn vec_norm(v: &Vecc) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Frobenius norm.
pub fn fro_norm(a: &Mat) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Infinity norm (max absolute row sum).
pub fn inf_norm(a: &Mat) -> f64 {
    let (m, _) = a.dim();
    (0..m)
        .map(|i| a.row(i).iter().map(|x| x.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `a x` for row-major `a`; faster than `a.dot(&x)` for repeated use.
pub fn matvec(a: &Mat, x: &Vecc) -> Vecc {
    let (m, n) = a.dim();
    assert_eq!(n, x.len());
    let xs = x.as_slice().expect("contiguous");
    let mut out = Vecc::zeros(m);
    for i in 0..m {
        let row = a.row(i);
        let row = row.as_slice().expect("contiguous row");
        let mut acc = C64::new(0.0, 0.0);
        for (aij, xj) in row.iter().zip(xs) {
            acc += aij * xj;
        }
        out[i] = acc;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adjoint_involution() {
        let a = Mat::from_shape_fn((3, 2), |(i, j)| C64::new(i as f64, j as f64 + 1.0));
        let b = adjoint(&adjoint(&a));
        assert_eq!(a, b);
    }

    #[test]
    fn matvec_matches_dot() {
        let a = Mat::from_shape_fn((4, 4), |(i, j)| C64::new((i * j) as f64, i as f64 - j as f64));
        let x = Vecc::from_shape_fn(4, |i| C64::new(1.0 + i as f64, -(i as f64)));
        let y = matvec(&a, &x);
        let z = a.dot(&x);
        for i in 0..4 {
            assert!((y[i] - z[i]).norm() < 1e-12);
        }
    }
}
