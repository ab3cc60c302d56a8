//! Dense non-Hermitian eigensolver: Hessenberg reduction followed by
//! shifted QR iteration with Givens rotations, plus eigenvector recovery
//! by triangular back-substitution.

use super::{Mat, Vecc};
use crate::{error::Error, C64, Result};

/// One group of numerically coincident eigenvalues.
///
/// `algebraic` counts the eigenvalues in the group; `geometric` is the
/// number of independent eigenvectors the group actually carries.  A
/// defective (Jordan-like) group has `geometric < algebraic`, and callers
/// should use the generalized basis of rank `algebraic` instead of
/// treating the returned eigenvectors as independent.
#[derive(Debug, Clone)]
pub struct EigenCluster {
    pub value: C64,
    /// Indices into the sorted eigenvalue list.
    pub members: Vec<usize>,
    pub algebraic: usize,
    pub geometric: usize,
}

impl EigenCluster {
    /// Dimension of the generalized eigenspace attached to this value.
    pub fn generalized_rank(&self) -> usize {
        self.algebraic
    }

    pub fn is_defective(&self) -> bool {
        self.geometric < self.algebraic
    }
}

/// Eigendecomposition of a general complex matrix.
///
/// Eigenvalues are sorted by modulus, largest first; `vectors` columns are
/// unit-norm right eigenvectors aligned with `values`.
pub struct EigDecomposition {
    pub values: Vec<C64>,
    pub vectors: Mat,
    pub clusters: Vec<EigenCluster>,
}

struct Givens {
    c: f64,
    s: C64,
}

fn givens(a: C64, b: C64) -> (Givens, C64) {
    let an = a.norm();
    let bn = b.norm();
    if bn == 0.0 {
        return (Givens { c: 1.0, s: C64::new(0.0, 0.0) }, a);
    }
    if an == 0.0 {
        return (Givens { c: 0.0, s: C64::new(1.0, 0.0) }, b);
    }
    let norm = an.hypot(bn);
    let alpha = a / an;
    let c = an / norm;
    let s = alpha * b.conj() / norm;
    (Givens { c, s }, alpha * norm)
}

/// Reduce to upper Hessenberg form by Householder similarity; returns
/// `(h, q)` with `a = q h q^H`.
fn hessenberg(a: &Mat) -> (Mat, Mat) {
    let n = a.nrows();
    let mut h = a.clone();
    let mut q = Mat::eye(n);
    let mut v = vec![C64::new(0.0, 0.0); n];

    for k in 0..n.saturating_sub(2) {
        let mut xnorm = 0.0;
        for i in (k + 1)..n {
            xnorm += h[[i, k]].norm_sqr();
        }
        let xnorm = xnorm.sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let x0 = h[[k + 1, k]];
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { C64::new(1.0, 0.0) };
        let alpha = -phase * xnorm;
        let mut vnorm_sq = 0.0;
        for i in (k + 1)..n {
            let vi = if i == k + 1 { h[[i, k]] - alpha } else { h[[i, k]] };
            v[i] = vi;
            vnorm_sq += vi.norm_sqr();
        }
        if vnorm_sq == 0.0 {
            continue;
        }
        let beta = 2.0 / vnorm_sq;

        // h <- P h with P = I - beta v v^H.
        for j in k..n {
            let mut dot = C64::new(0.0, 0.0);
            for i in (k + 1)..n {
                dot += v[i].conj() * h[[i, j]];
            }
            let dot = dot * beta;
            for i in (k + 1)..n {
                let vi = v[i];
                h[[i, j]] -= vi * dot;
            }
        }
        // h <- h P.
        for i in 0..n {
            let mut dot = C64::new(0.0, 0.0);
            for j in (k + 1)..n {
                dot += h[[i, j]] * v[j];
            }
            let dot = dot * beta;
            for j in (k + 1)..n {
                h[[i, j]] -= dot * v[j].conj();
            }
        }
        // q <- q P.
        for i in 0..n {
            let mut dot = C64::new(0.0, 0.0);
            for j in (k + 1)..n {
                dot += q[[i, j]] * v[j];
            }
            let dot = dot * beta;
            for j in (k + 1)..n {
                q[[i, j]] -= dot * v[j].conj();
            }
        }
        h[[k + 1, k]] = alpha;
        for i in (k + 2)..n {
            h[[i, k]] = C64::new(0.0, 0.0);
        }
    }
    (h, q)
}

/// Shifted QR iteration on a Hessenberg matrix; returns upper triangular
/// `t` and accumulates the similarity into `z` (so the original matrix is
/// `z t z^H` when `z` starts as the Hessenberg transform).
fn schur_from_hessenberg(mut h: Mat, mut z: Mat) -> Result<(Mat, Mat)> {
    let n = h.nrows();
    if n == 0 {
        return Ok((h, z));
    }
    let eps = f64::EPSILON;
    let max_total = 60 * n.max(4);
    let mut total_iters = 0usize;
    let mut hi = n - 1;
    let mut stuck = 0usize;

    'outer: loop {
        // Deflate trailing 1x1 blocks.
        loop {
            if hi == 0 {
                break 'outer;
            }
            let sub = h[[hi, hi - 1]].norm();
            let local = h[[hi - 1, hi - 1]].norm() + h[[hi, hi]].norm();
            if sub <= eps * local.max(f64::MIN_POSITIVE) {
                h[[hi, hi - 1]] = C64::new(0.0, 0.0);
                hi -= 1;
                stuck = 0;
            } else {
                break;
            }
        }

        // Active block lower edge.
        let mut lo = hi;
        while lo > 0 {
            let sub = h[[lo, lo - 1]].norm();
            let local = h[[lo - 1, lo - 1]].norm() + h[[lo, lo]].norm();
            if sub <= eps * local.max(f64::MIN_POSITIVE) {
                h[[lo, lo - 1]] = C64::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }

        total_iters += 1;
        stuck += 1;
        if total_iters > max_total {
            return Err(Error::NonConvergence(format!(
                "qr iteration exceeded {max_total} steps (block {lo}..={hi})"
            )));
        }

        // Wilkinson shift from the trailing 2x2, with an exceptional shift
        // when progress stalls.
        let a = h[[hi - 1, hi - 1]];
        let b = h[[hi - 1, hi]];
        let c = h[[hi, hi - 1]];
        let d = h[[hi, hi]];
        let mut sigma = {
            let tr_half = (a + d) * 0.5;
            let disc = ((a - d) * 0.5).powi(2) + b * c;
            let root = disc.sqrt();
            let e1 = tr_half + root;
            let e2 = tr_half - root;
            if (e1 - d).norm() < (e2 - d).norm() { e1 } else { e2 }
        };
        if stuck > 0 && stuck % 12 == 0 {
            sigma = d + C64::new(0.75 * c.norm(), 0.0);
        }

        // Explicit shifted QR sweep on the active block.
        for i in lo..=hi {
            h[[i, i]] -= sigma;
        }
        let mut rots = Vec::with_capacity(hi - lo);
        for i in lo..hi {
            let (g, r) = givens(h[[i, i]], h[[i + 1, i]]);
            h[[i, i]] = r;
            h[[i + 1, i]] = C64::new(0.0, 0.0);
            for j in (i + 1)..n {
                let hij = h[[i, j]];
                let hi1j = h[[i + 1, j]];
                h[[i, j]] = g.c * hij + g.s * hi1j;
                h[[i + 1, j]] = -g.s.conj() * hij + g.c * hi1j;
            }
            rots.push(g);
        }
        for (idx, g) in rots.iter().enumerate() {
            let i = lo + idx;
            // h <- h G^H on columns i, i+1 (rows through i+1 are nonzero).
            for r in 0..=(i + 1).min(hi) {
                let hri = h[[r, i]];
                let hri1 = h[[r, i + 1]];
                h[[r, i]] = g.c * hri + g.s.conj() * hri1;
                h[[r, i + 1]] = -g.s * hri + g.c * hri1;
            }
            for r in 0..n {
                let zri = z[[r, i]];
                let zri1 = z[[r, i + 1]];
                z[[r, i]] = g.c * zri + g.s.conj() * zri1;
                z[[r, i + 1]] = -g.s * zri + g.c * zri1;
            }
        }
        for i in lo..=hi {
            h[[i, i]] += sigma;
        }
    }
    Ok((h, z))
}

/// Right eigenvector of the triangular factor for eigenvalue at `j`.
fn triangular_eigvec(t: &Mat, j: usize, tnorm: f64) -> Vecc {
    let lambda = t[[j, j]];
    let mut y = Vecc::zeros(t.nrows());
    y[j] = C64::new(1.0, 0.0);
    for i in (0..j).rev() {
        let mut acc = C64::new(0.0, 0.0);
        for k in (i + 1)..=j {
            acc += t[[i, k]] * y[k];
        }
        let mut den = t[[i, i]] - lambda;
        if den.norm() < f64::EPSILON * tnorm {
            den = C64::new(f64::EPSILON * tnorm.max(f64::MIN_POSITIVE), 0.0);
        }
        y[i] = -acc / den;
    }
    y
}

/// Full eigendecomposition with modulus-descending ordering and
/// coincident-value cluster reporting.
pub fn eig(a: &Mat) -> Result<EigDecomposition> {
    let (m, n) = a.dim();
    if m != n {
        return Err(Error::validation("eig: matrix must be square"));
    }
    if n == 0 {
        return Ok(EigDecomposition {
            values: vec![],
            vectors: Mat::zeros((0, 0)),
            clusters: vec![],
        });
    }
    let (h, q) = hessenberg(a);
    let (t, z) = schur_from_hessenberg(h, q)?;
    let tnorm = super::fro_norm(&t).max(f64::MIN_POSITIVE);

    // Sort by |lambda| descending, ties by lexicographic (re, im).
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        let (li, lj) = (t[[i, i]], t[[j, j]]);
        lj.norm()
            .partial_cmp(&li.norm())
            .unwrap()
            .then(li.re.partial_cmp(&lj.re).unwrap())
            .then(li.im.partial_cmp(&lj.im).unwrap())
    });

    let values: Vec<C64> = order.iter().map(|&i| t[[i, i]]).collect();
    let mut vectors = Mat::zeros((n, n));
    for (col, &i) in order.iter().enumerate() {
        let y = triangular_eigvec(&t, i, tnorm);
        let x = z.dot(&y);
        let nrm = super::vec_norm(&x);
        let x = x.mapv(|v| v / nrm);
        vectors.column_mut(col).assign(&x);
    }

    let clusters = detect_clusters(&values, a, tnorm)?;
    Ok(EigDecomposition { values, vectors, clusters })
}

fn detect_clusters(values: &[C64], a: &Mat, scale: f64) -> Result<Vec<EigenCluster>> {
    let n = values.len();
    let ctol = 1e-10 * scale.max(1.0);
    let mut assigned = vec![false; n];
    let mut clusters = Vec::new();
    for i in 0..n {
        if assigned[i] {
            continue;
        }
        let mut members = vec![i];
        assigned[i] = true;
        for j in (i + 1)..n {
            if !assigned[j] && (values[j] - values[i]).norm() <= ctol {
                members.push(j);
                assigned[j] = true;
            }
        }
        if members.len() > 1 {
            let mean = members.iter().map(|&k| values[k]).sum::<C64>() / members.len() as f64;
            let geometric = {
                let mut shifted = a.clone();
                for d in 0..n {
                    shifted[[d, d]] -= mean;
                }
                let sv = super::svd::singular_values(&shifted);
                let cutoff = 1e-9 * scale.max(1.0);
                sv.iter().filter(|&&s| s < cutoff).count().max(1)
            };
            clusters.push(EigenCluster {
                value: mean,
                algebraic: members.len(),
                geometric: geometric.min(members.len()),
                members,
            });
        }
    }
    Ok(clusters)
}

/// Generalized eigenspace basis for a cluster: orthonormal columns
/// spanning `ker((A - value)^algebraic)`.
pub fn generalized_eigenspace(a: &Mat, cluster: &EigenCluster) -> Result<Mat> {
    let n = a.nrows();
    let mut shifted = a.clone();
    for d in 0..n {
        shifted[[d, d]] -= cluster.value;
    }
    let mut powered = shifted.clone();
    for _ in 1..cluster.algebraic {
        powered = powered.dot(&shifted);
    }
    // Null space of powered = right singular vectors with tiny sigma.
    let (_u, s, v) = super::svd_jacobi(&powered)?;
    let smax = s.first().copied().unwrap_or(0.0).max(f64::MIN_POSITIVE);
    let cutoff = smax * 1e-9;
    let keep: Vec<usize> = (0..n).filter(|&i| s[i] <= cutoff).collect();
    if keep.len() < cluster.algebraic {
        return Err(Error::NonConvergence(format!(
            "generalized eigenspace rank {} below algebraic multiplicity {}",
            keep.len(),
            cluster.algebraic
        )));
    }
    let mut basis = Mat::zeros((n, keep.len()));
    for (j, &idx) in keep.iter().enumerate() {
        basis.column_mut(j).assign(&v.column(idx));
    }
    Ok(basis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn diagonal_matrix_exact() {
        let a = Mat::from_diag(&ndarray::arr1(&[c(3.0, 1.0), c(-2.0, 0.0), c(0.5, -0.5)]));
        let d = eig(&a).unwrap();
        assert!((d.values[0] - c(3.0, 1.0)).norm() < 1e-12);
        assert!((d.values[1] - c(-2.0, 0.0)).norm() < 1e-12);
        assert!((d.values[2] - c(0.5, -0.5)).norm() < 1e-12);
    }

    #[test]
    fn residuals_small_for_dense_matrix() {
        let n = 12;
        let a = Mat::from_shape_fn((n, n), |(i, j)| {
            let x = ((i * 7 + j * 3) % 11) as f64 / 11.0 - 0.5;
            let y = ((i * 5 + j * 13) % 17) as f64 / 17.0 - 0.5;
            c(x, y)
        });
        let d = eig(&a).unwrap();
        for (k, &lam) in d.values.iter().enumerate() {
            let v = d.vectors.column(k).to_owned();
            let av = a.dot(&v);
            let r = &av - &v.mapv(|x| x * lam);
            let rn = r.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            assert!(rn < 1e-10, "eigenpair {k} residual {rn:.3e}");
        }
        // Moduli are non-increasing.
        for w in d.values.windows(2) {
            assert!(w[0].norm() >= w[1].norm() - 1e-14);
        }
    }

    #[test]
    fn jordan_block_reported_as_cluster() {
        let a = array![
            [c(2.0, 1.0), c(1.0, 0.0)],
            [c(0.0, 0.0), c(2.0, 1.0)],
        ];
        let d = eig(&a).unwrap();
        assert_eq!(d.clusters.len(), 1);
        let cl = &d.clusters[0];
        assert_eq!(cl.algebraic, 2);
        assert_eq!(cl.generalized_rank(), 2);
        assert_eq!(cl.geometric, 1);
        assert!(cl.is_defective());
        assert!((cl.value - c(2.0, 1.0)).norm() < 1e-8);
        let basis = generalized_eigenspace(&a, cl).unwrap();
        assert_eq!(basis.ncols(), 2);
    }

    #[test]
    fn hermitian_matrix_real_eigenvalues() {
        let a = array![
            [c(2.0, 0.0), c(1.0, 1.0)],
            [c(1.0, -1.0), c(3.0, 0.0)],
        ];
        let d = eig(&a).unwrap();
        for v in &d.values {
            assert!(v.im.abs() < 1e-12);
        }
        // Trace check.
        let s: C64 = d.values.iter().sum();
        assert!((s - c(5.0, 0.0)).norm() < 1e-12);
    }
}
