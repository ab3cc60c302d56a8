//! Partial-pivot LU factorization with a cheap 1-norm condition estimate.

use super::{Mat, Vecc};
use crate::{error::Error, C64, Result};

/// LU factors of a square complex matrix, `P A = L U`.
#[derive(Debug)]
pub struct LuFactors {
    /// Combined storage: strictly lower part holds L (unit diagonal), upper holds U.
    lu: Mat,
    /// Row permutation: row `i` of `L U` is row `perm[i]` of `A`.
    perm: Vec<usize>,
    n: usize,
}

/// Convenience trait wrapper so call sites read `a.lu()?`.
pub trait Lu {
    fn lu(&self) -> Result<LuFactors>;
}

impl Lu for Mat {
    fn lu(&self) -> Result<LuFactors> {
        LuFactors::new(self)
    }
}

impl LuFactors {
    pub fn new(a: &Mat) -> Result<Self> {
        let (m, n) = a.dim();
        if m != n {
            return Err(Error::validation("lu: matrix must be square"));
        }
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = super::inf_norm(a).max(f64::MIN_POSITIVE);

        for k in 0..n {
            // Pivot search in column k.
            let mut pmax = 0.0;
            let mut prow = k;
            for i in k..n {
                let v = lu[[i, k]].norm();
                if v > pmax {
                    pmax = v;
                    prow = i;
                }
            }
            if pmax <= scale * 1e-300 {
                return Err(Error::SingularSystem(format!(
                    "lu: pivot {pmax:.3e} at column {k} (scale {scale:.3e})"
                )));
            }
            if prow != k {
                perm.swap(prow, k);
                for j in 0..n {
                    let tmp = lu[[k, j]];
                    lu[[k, j]] = lu[[prow, j]];
                    lu[[prow, j]] = tmp;
                }
            }
            let pivot = lu[[k, k]];
            // Eliminate below the pivot; row-major inner loops on slices.
            let (top, mut bottom) = lu.view_mut().split_at(ndarray::Axis(0), k + 1);
            let urow = top.row(k);
            let urow = urow.as_slice().expect("contiguous");
            for i in 0..bottom.nrows() {
                let mut row = bottom.row_mut(i);
                let row = row.as_slice_mut().expect("contiguous");
                let l = row[k] / pivot;
                row[k] = l;
                if l != C64::new(0.0, 0.0) {
                    for j in (k + 1)..n {
                        row[j] -= l * urow[j];
                    }
                }
            }
        }
        Ok(LuFactors { lu, perm, n })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solve `A x = b`.
    pub fn solve(&self, b: &Vecc) -> Result<Vecc> {
        if b.len() != self.n {
            return Err(Error::validation("lu solve: dimension mismatch"));
        }
        let n = self.n;
        let mut x = Vecc::zeros(n);
        for i in 0..n {
            x[i] = b[self.perm[i]];
        }
        // Forward substitution with unit lower factor.
        for i in 0..n {
            let row = self.lu.row(i);
            let row = row.as_slice().expect("contiguous");
            let mut acc = x[i];
            for j in 0..i {
                acc -= row[j] * x[j];
            }
            x[i] = acc;
        }
        // Back substitution.
        for i in (0..n).rev() {
            let row = self.lu.row(i);
            let row = row.as_slice().expect("contiguous");
            let mut acc = x[i];
            for j in (i + 1)..n {
                acc -= row[j] * x[j];
            }
            x[i] = acc / row[i];
        }
        Ok(x)
    }

    /// Solve `A^H x = b`; needed by the condition estimator.
    pub fn solve_adjoint(&self, b: &Vecc) -> Result<Vecc> {
        if b.len() != self.n {
            return Err(Error::validation("lu solve: dimension mismatch"));
        }
        let n = self.n;
        let mut y = b.clone();
        // (LU)^H = U^H L^H: first solve U^H w = b (forward), then L^H v = w (backward).
        for i in 0..n {
            let mut acc = y[i];
            for j in 0..i {
                acc -= self.lu[[j, i]].conj() * y[j];
            }
            y[i] = acc / self.lu[[i, i]].conj();
        }
        for i in (0..n).rev() {
            let mut acc = y[i];
            for j in (i + 1)..n {
                acc -= self.lu[[j, i]].conj() * y[j];
            }
            y[i] = acc;
        }
        // Undo the permutation: x[perm[i]] = v[i].
        let mut x = Vecc::zeros(n);
        for i in 0..n {
            x[self.perm[i]] = y[i];
        }
        Ok(x)
    }

    /// Solve for many right-hand sides stacked as columns.
    pub fn solve_mat(&self, b: &Mat) -> Result<Mat> {
        let (m, k) = b.dim();
        if m != self.n {
            return Err(Error::validation("lu solve: dimension mismatch"));
        }
        let mut out = Mat::zeros((m, k));
        for j in 0..k {
            let col = b.column(j).to_owned();
            let x = self.solve(&col)?;
            out.column_mut(j).assign(&x);
        }
        Ok(out)
    }

    /// Hager-style estimate of the 1-norm of `A^{-1}`.
    ///
    /// Multiplying by `‖A‖_1` gives a condition estimate; a handful of
    /// solves suffices and the estimate is a guaranteed lower bound.
    pub fn inv_norm1_estimate(&self) -> f64 {
        let n = self.n;
        let mut x = Vecc::from_elem(n, C64::new(1.0 / n as f64, 0.0));
        let mut est = 0.0;
        for _ in 0..5 {
            let y = match self.solve(&x) {
                Ok(y) => y,
                Err(_) => return f64::INFINITY,
            };
            let ynorm: f64 = y.iter().map(|v| v.norm()).sum();
            if ynorm <= est {
                break;
            }
            est = ynorm;
            // Subgradient direction.
            let xi = Vecc::from_shape_fn(n, |i| {
                let v = y[i];
                if v.norm() > 0.0 {
                    v / v.norm()
                } else {
                    C64::new(1.0, 0.0)
                }
            });
            let z = match self.solve_adjoint(&xi) {
                Ok(z) => z,
                Err(_) => return f64::INFINITY,
            };
            let (jmax, _) = z
                .iter()
                .enumerate()
                .fold((0, 0.0), |(jm, vm), (j, v)| {
                    if v.norm() > vm {
                        (j, v.norm())
                    } else {
                        (jm, vm)
                    }
                });
            x.fill(C64::new(0.0, 0.0));
            x[jmax] = C64::new(1.0, 0.0);
        }
        est
    }
}
