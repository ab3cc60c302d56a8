//! Direct application of the discrete resolvent and the weighted Helmholtz
//! projection onto divergence-constrained fields.

use ndarray::Array1;

use crate::{Error, Result};
use crate::grid::RadialGrid;
use crate::linalg::{matvec, vec_norm, LuFactors, Mat, Vecc};
use crate::medium::MediumProfile;
use crate::modes::{ModeIndex, Polarization};
use crate::ONE;

use super::assembly::{medium_samples, ModeOperatorBlocks, SectorOps};

/// Conditioning threshold past which the assembled system is treated as
/// singular (the shift collides with a discrete eigenvalue).
pub(crate) const CONDITION_LIMIT: f64 = 1e13;

/// Relative residual accepted after the direct solve (with one step of
/// iterative refinement allowed).
const RESIDUAL_LIMIT: f64 = 1e-10;

/// Applies the discrete resolvent `R_z = B_z⁻¹` to a stacked source pair.
///
/// Fails with a singular-system error when the conditioning estimate
/// indicates the shift sits on a discrete eigenvalue; the caller is
/// expected to re-shift.
pub fn apply_rz(blocks: &ModeOperatorBlocks, f: &Vecc, g: &Vecc) -> Result<(Vecc, Vecc)> {
    let x = blocks.stack_pair(f, g)?;
    let y = solve_embedded(blocks, &x)?;
    Ok(blocks.split_pair(&y))
}

/// Solves `A(z) y = E x` for a stacked source vector, with a conditioning
/// gate and a residual check (one iterative-refinement step).
pub(crate) fn solve_embedded(blocks: &ModeOperatorBlocks, x: &Vecc) -> Result<Vecc> {
    let cond = blocks.condition_estimate()?;
    if !cond.is_finite() || cond > CONDITION_LIMIT {
        return Err(Error::SingularSystem(format!(
            "shift {} collides with the discrete spectrum (condition estimate {:.3e}); re-shift",
            blocks.shift(),
            cond
        )));
    }
    let rhs = matvec(blocks.source_map(), x);
    let lu = blocks.factors()?;
    let mut y = lu.solve(&rhs)?;
    let a = blocks.matrix();
    let norm_a = a
        .rows()
        .into_iter()
        .map(|row| row.iter().map(|v| v.norm()).sum::<f64>())
        .fold(0.0_f64, f64::max);
    let scale = |y: &Vecc| vec_norm(&rhs) + norm_a * vec_norm(y);
    let residual = |y: &Vecc| {
        let mut r = matvec(a, y);
        r -= &rhs;
        vec_norm(&r)
    };
    if residual(&y) > RESIDUAL_LIMIT * scale(&y) {
        // One step of iterative refinement.
        let mut r = matvec(a, &y);
        r -= &rhs;
        let dy = lu.solve(&r)?;
        y -= &dy;
        let res = residual(&y);
        if res > RESIDUAL_LIMIT * scale(&y) {
            return Err(Error::NonConvergence(format!(
                "resolvent solve residual {:.3e} exceeds {:.0e} of scale after refinement",
                res, RESIDUAL_LIMIT
            )));
        }
    }
    Ok(y)
}

/// The weighted Helmholtz projection for one mode sector.
///
/// TE fields are tangential and divergence-free, so the projection is the
/// identity there.  On the TM sector the potential problem
/// `div((1+m)∇φ) = div((1+m)u)`, `φ(R) = 0`, regular at the origin, is
/// solved once per (mode, medium, grid) and reused.
pub(crate) enum Projector {
    Identity,
    Weighted(Box<WeightedProjector>),
}

pub(crate) struct WeightedProjector {
    n: usize,
    lu: LuFactors,
    /// Rows extracting the weighted divergence data at the collocation
    /// nodes of the potential problem (nodes 1..=N−2).
    data_rows: Mat,
    /// Discrete gradient `φ ↦ (φ', φ/r)`.
    grad: Mat,
}

impl Projector {
    pub(crate) fn new(
        mode: ModeIndex,
        medium: &MediumProfile,
        grid: &RadialGrid,
    ) -> Result<Self> {
        match mode.polarization() {
            Polarization::TE => Ok(Projector::Identity),
            Polarization::TM => {
                let ops = SectorOps::new(mode, grid);
                let (_m, one_plus_m) = medium_samples(medium, grid);
                let n = ops.n;
                let wdiv = ops.weighted_divergence(&one_plus_m);
                let grad = ops.gradient();
                // Potential system: weighted divergence of the gradient at
                // nodes 1..=N−2, then φ(R) = 0, then regularity at 0.
                let lhs_all = wdiv.dot(&grad); // N×N, rows = nodes
                let mut bvp = Mat::zeros((n, n));
                let mut data_rows = Mat::zeros((n - 2, 2 * n));
                for (offset, i) in (1..=n - 2).enumerate() {
                    for j in 0..n {
                        bvp[[offset, j]] = lhs_all[[i, j]];
                    }
                    for j in 0..2 * n {
                        data_rows[[offset, j]] = wdiv[[i, j]];
                    }
                }
                bvp[[n - 2, n - 1]] = ONE;
                for j in 0..n {
                    bvp[[n - 1, j]] = ops.at_zero[j];
                }
                let lu = LuFactors::new(&bvp).map_err(|e| {
                    Error::SingularSystem(format!(
                        "weighted potential problem is singular: {e}"
                    ))
                })?;
                Ok(Projector::Weighted(Box::new(WeightedProjector {
                    n,
                    lu,
                    data_rows,
                    grad,
                })))
            }
        }
    }

    /// Projects a single field (u-shaped vector) onto the discretely
    /// weighted-divergence-free part.
    pub(crate) fn project_field(&self, u: &Vecc) -> Result<Vecc> {
        match self {
            Projector::Identity => Ok(u.clone()),
            Projector::Weighted(w) => {
                let phi = w.potential(u)?;
                let mut out = u.clone();
                let gphi = matvec(&w.grad, &phi);
                out -= &gphi;
                Ok(out)
            }
        }
    }

    /// The scalar potential of the gradient part of `u`.
    #[cfg(test)]
    pub(crate) fn potential(&self, u: &Vecc) -> Result<Vecc> {
        match self {
            Projector::Identity => Ok(Vecc::zeros(u.len())),
            Projector::Weighted(w) => w.potential(u),
        }
    }

    /// Projects the u-component of a stacked pair, leaving v untouched.
    pub(crate) fn project_pair(&self, x: &Vecc) -> Result<Vecc> {
        match self {
            Projector::Identity => Ok(x.clone()),
            Projector::Weighted(_) => {
                let half = x.len() / 2;
                let u = x.slice(ndarray::s![0..half]).to_owned();
                let ud = self.project_field(&u)?;
                let mut out = x.clone();
                for i in 0..half {
                    out[i] = ud[i];
                }
                Ok(out)
            }
        }
    }
}

impl WeightedProjector {
    fn potential(&self, u: &Vecc) -> Result<Vecc> {
        let n = self.n;
        if u.len() != 2 * n {
            return Err(Error::validation(format!(
                "projection expects a TM pair field of length {}, got {}",
                2 * n,
                u.len()
            )));
        }
        let data = matvec(&self.data_rows, u);
        let mut rhs: Vecc = Array1::zeros(n);
        for (offset, value) in data.iter().enumerate() {
            rhs[offset] = *value;
        }
        self.lu.solve(&rhs)
    }
}

/// Weighted Helmholtz projection of a discrete field: removes the gradient
/// part of `u` in the `(1+m)`-weighted metric, returning `u_d = u − ∇φ`
/// with `div((1+m)u_d) = 0` at the collocation nodes, `φ(R) = 0`.
///
/// On the TE sector this is the identity (tangential fields are
/// divergence-free and `∇m` is radial).
pub fn helmholtz_project(
    mode: ModeIndex,
    medium: &MediumProfile,
    grid: &RadialGrid,
    u: &Vecc,
) -> Result<Vecc> {
    let expected = match mode.polarization() {
        Polarization::TE => grid.len(),
        Polarization::TM => 2 * grid.len(),
    };
    if u.len() != expected {
        return Err(Error::validation(format!(
            "helmholtz_project: field length {} does not match the {:?} sector length {}",
            u.len(),
            mode.polarization(),
            expected
        )));
    }
    let projector = Projector::new(mode, medium, grid)?;
    projector.project_field(u)
}
