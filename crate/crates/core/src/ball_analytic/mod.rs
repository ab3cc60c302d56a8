//! Closed-form boundary-matching determinants for piecewise-constant media.
//!
//! Per mode `(l, polarization)` the transmission conditions at the sphere
//! `r = R` couple the interior solution (propagated through the layers) to
//! the free solution. In the matched variables `(u, t)` — `u = r g` and
//! `t = u'` (TE) or `t = (1/n) u'` (TM) — both are continuous across layer
//! interfaces, the interior solution inside a layer of index `n_i` is a
//! combination of Riccati-Bessel functions `psi_l(kappa r)` and
//! `chi_l(kappa r)` with `kappa = k sqrt(n_i)`, and a wavenumber is a
//! transmission eigenvalue of the mode exactly when
//!
//! ```text
//! W(k) = u_in(R) t_free(R) - t_in(R) u_free(R) = 0 .
//! ```
//!
//! Both the interior state and its `k`-derivative are propagated in closed
//! form (tangent of the 2x2 layer transfer), giving an analytic derivative
//! for Newton polishing; a high-order complex difference quotient is
//! provided as an independent check. The `ode` submodule certifies the
//! determinant against direct integration of the radial problems.

pub mod ode;

pub use ode::{
    determinant_oracle_residual, oracle_boundary_states, oracle_determinant, BoundaryStates,
    OracleOptions,
};

use crate::medium::{MediumProfile, RadialIndex};
use crate::modes::{ModeIndex, Polarization};
use crate::specfun::{riccati_chi, riccati_psi};
use crate::{C64, Error, Result};

/// A 2x2 complex matrix with just the operations the layer transfer needs.
#[derive(Debug, Clone, Copy)]
struct Mat2 {
    m: [[C64; 2]; 2],
}

impl Mat2 {
    fn matvec(&self, v: [C64; 2]) -> [C64; 2] {
        [
            self.m[0][0] * v[0] + self.m[0][1] * v[1],
            self.m[1][0] * v[0] + self.m[1][1] * v[1],
        ]
    }

    /// Inverse given the exact determinant (supplied analytically to avoid
    /// cancellation in `psi chi' - psi' chi`).
    fn inv_with_det(&self, det: C64) -> Mat2 {
        Mat2 {
            m: [
                [self.m[1][1] / det, -self.m[0][1] / det],
                [-self.m[1][0] / det, self.m[0][0] / det],
            ],
        }
    }
}

/// Riccati pair `(psi, psi', psi'')` at `z`; the second derivative comes
/// from the defining equation `psi'' = (l(l+1)/z^2 - 1) psi`.
fn psi_triple(l: u32, z: C64) -> Result<(C64, C64, C64)> {
    let (p, dp) = riccati_psi(l as usize, z)?;
    let ll1 = (l as f64) * (l as f64 + 1.0);
    Ok((p, dp, (ll1 / (z * z) - 1.0) * p))
}

fn chi_triple(l: u32, z: C64) -> Result<(C64, C64, C64)> {
    let (p, dp) = riccati_chi(l as usize, z)?;
    let ll1 = (l as f64) * (l as f64 + 1.0);
    Ok((p, dp, (ll1 / (z * z) - 1.0) * p))
}

#[derive(Debug, Clone, Copy)]
struct Layer {
    r_in: f64,
    r_out: f64,
    n: C64,
}

/// Closed-form boundary-matching determinant of one mode on one medium.
#[derive(Debug, Clone)]
pub struct DeterminantFunction {
    mode: ModeIndex,
    radius: f64,
    layers: Vec<Layer>,
    /// Difference-quotient step scale for the derivative cross-check.
    fd_scale: f64,
}

/// Build the determinant for a piecewise-constant medium. Smooth interior
/// profiles have no closed-form radial solutions; use the operator route
/// for those.
pub fn build_determinant(mode: ModeIndex, medium: &MediumProfile) -> Result<DeterminantFunction> {
    let values: Vec<C64> = match medium.index() {
        RadialIndex::Constant { n0 } => vec![*n0],
        RadialIndex::Layered { values, .. } => values.clone(),
        RadialIndex::SmoothWithShell { .. } => {
            return Err(Error::validation(
                "closed-form determinants require a piecewise-constant index; \
                 use the operator route for smooth profiles",
            ))
        }
    };
    let mut bounds = vec![0.0];
    bounds.extend(medium.breakpoints());
    bounds.push(medium.radius());
    let layers = values
        .iter()
        .zip(bounds.windows(2))
        .map(|(&n, w)| Layer { r_in: w[0], r_out: w[1], n })
        .collect::<Vec<_>>();
    let n_max_sqrt = values.iter().map(|n| n.norm().sqrt()).fold(1.0f64, f64::max);
    Ok(DeterminantFunction {
        mode,
        radius: medium.radius(),
        layers,
        fd_scale: 1e-3 / (1.0 + medium.radius() * n_max_sqrt),
    })
}

/// Evaluate a determinant (free-function form of [`DeterminantFunction::eval`]).
pub fn eval_determinant(w: &DeterminantFunction, k: C64) -> Result<C64> {
    w.eval(k)
}

fn check_wavenumber(k: C64) -> Result<()> {
    if !k.re.is_finite() || !k.im.is_finite() {
        return Err(Error::validation(format!("wavenumber must be finite, got {k}")));
    }
    if k.norm() < 1e-12 {
        return Err(Error::validation(
            "wavenumber 0 is excluded from the determinant (the matching \
             degenerates there)",
        ));
    }
    Ok(())
}

impl DeterminantFunction {
    pub fn mode(&self) -> ModeIndex {
        self.mode
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    fn weight(&self, n: C64) -> C64 {
        match self.mode.polarization() {
            Polarization::TE => C64::new(1.0, 0.0),
            Polarization::TM => n.inv(),
        }
    }

    /// Interior `(u, t)` at `r = R` and its `k`-derivative, normalized so the
    /// innermost solution is `u = r j_l(kappa r)`.
    fn interior_state_tangent(&self, k: C64) -> Result<([C64; 2], [C64; 2])> {
        let l = self.mode.l();
        let first = &self.layers[0];
        let s0 = first.n.sqrt();
        let kappa = k * s0;
        let w0 = self.weight(first.n);
        let r1 = first.r_out;
        let zeta = kappa * r1;
        let (p, dp, ddp) = psi_triple(l, zeta)?;
        let mut y = [p / kappa, w0 * dp];
        // d/dk [psi(kappa r)/kappa] = s (r psi' / kappa - psi / kappa^2)
        let mut dy = [s0 * (r1 * dp / kappa - p / (kappa * kappa)), w0 * s0 * r1 * ddp];

        for layer in &self.layers[1..] {
            let s = layer.n.sqrt();
            let kap = k * s;
            let w = self.weight(layer.n);
            let (a, b) = (layer.r_in, layer.r_out);

            let basis = |r: f64| -> Result<(Mat2, Mat2)> {
                let z = kap * r;
                let (pp, pd, pdd) = psi_triple(l, z)?;
                let (cc, cd, cdd) = chi_triple(l, z)?;
                let m = Mat2 {
                    m: [[pp / kap, cc / kap], [w * pd, w * cd]],
                };
                let dm = Mat2 {
                    m: [
                        [
                            s * (r * pd / kap - pp / (kap * kap)),
                            s * (r * cd / kap - cc / (kap * kap)),
                        ],
                        [w * s * r * pdd, w * s * r * cdd],
                    ],
                };
                Ok((m, dm))
            };

            let (ma, dma) = basis(a)?;
            let (mb, dmb) = basis(b)?;
            // Exact determinant of the basis matrix: psi chi' - psi' chi = -1
            // for Riccati pairs, so det = -w / kap.
            let det = -w / kap;
            let ma_inv = ma.inv_with_det(det);
            let ab = ma_inv.matvec(y);
            // d(ab) = Ma^{-1} (dy - dMa ab)
            let rhs = {
                let t = dma.matvec(ab);
                [dy[0] - t[0], dy[1] - t[1]]
            };
            let dab = ma_inv.matvec(rhs);
            let yb = mb.matvec(ab);
            let dyb = {
                let t1 = dmb.matvec(ab);
                let t2 = mb.matvec(dab);
                [t1[0] + t2[0], t1[1] + t2[1]]
            };
            y = yb;
            dy = dyb;
        }
        Ok((y, dy))
    }

    /// Free `(u, t)` at `r = R` and its `k`-derivative (`u = r j_l(k r)`).
    fn free_state_tangent(&self, k: C64) -> Result<([C64; 2], [C64; 2])> {
        let l = self.mode.l();
        let big_r = self.radius;
        let z = k * big_r;
        let (p, dp, ddp) = psi_triple(l, z)?;
        let y = [p / k, dp];
        let dy = [big_r * dp / k - p / (k * k), big_r * ddp];
        Ok((y, dy))
    }

    /// Determinant value.
    pub fn eval(&self, k: C64) -> Result<C64> {
        Ok(self.eval_scaled(k)?.0)
    }

    /// Determinant value together with the local magnitude scale
    /// `|u_in t_free| + |t_in u_free|` (the natural denominator for
    /// residuals: the determinant is the difference of these two products).
    pub fn eval_scaled(&self, k: C64) -> Result<(C64, f64)> {
        check_wavenumber(k)?;
        let (yi, _) = self.interior_state_tangent(k)?;
        let (yf, _) = self.free_state_tangent(k)?;
        let p1 = yi[0] * yf[1];
        let p2 = yi[1] * yf[0];
        Ok((p1 - p2, p1.norm() + p2.norm()))
    }

    /// Determinant and its analytic `k`-derivative.
    pub fn eval_with_derivative(&self, k: C64) -> Result<(C64, C64)> {
        check_wavenumber(k)?;
        let (yi, dyi) = self.interior_state_tangent(k)?;
        let (yf, dyf) = self.free_state_tangent(k)?;
        let w = yi[0] * yf[1] - yi[1] * yf[0];
        let dw = dyi[0] * yf[1] + yi[0] * dyf[1] - dyi[1] * yf[0] - yi[1] * dyf[0];
        Ok((w, dw))
    }

    /// Fourth-order complex central difference quotient; independent check
    /// of the analytic derivative.
    pub fn derivative_difference(&self, k: C64) -> Result<C64> {
        let h = self.fd_scale * (1.0 + k.norm());
        let hr = C64::new(h, 0.0);
        let f1 = self.eval(k + hr)?;
        let f_1 = self.eval(k - hr)?;
        let f2 = self.eval(k + hr * 2.0)?;
        let f_2 = self.eval(k - hr * 2.0)?;
        Ok((8.0 * (f1 - f_1) - (f2 - f_2)) / (12.0 * h))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::medium::MediumProfile;
    use crate::modes::{ModeIndex, Polarization};
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn te(l: u32) -> ModeIndex {
        ModeIndex::new(l, Polarization::TE).unwrap()
    }

    fn tm(l: u32) -> ModeIndex {
        ModeIndex::new(l, Polarization::TM).unwrap()
    }

    fn ball4() -> MediumProfile {
        MediumProfile::constant(1.0, c(4.0, 0.0)).unwrap()
    }

    #[test]
    fn te_determinant_matches_reference_values() {
        let w = build_determinant(te(1), &ball4()).unwrap();
        // mpmath golden values (40 digits).
        let v = w.eval(c(1.0, 0.0)).unwrap();
        assert!(
            (v - c(0.092522689695169745, 0.0)).norm() < 1e-13,
            "W(1) = {v}"
        );
        let v = w.eval(c(2.5, 0.5)).unwrap();
        let gold = c(0.45108400390876496, -0.25871742173349906);
        assert!((v - gold).norm() < 1e-13 * gold.norm(), "W = {v}");
    }

    #[test]
    fn tm_determinant_matches_reference_values() {
        let w = build_determinant(tm(1), &ball4()).unwrap();
        let v = w.eval(c(1.0, 0.0)).unwrap();
        assert!(
            (v - c(0.19956548876745261, 0.0)).norm() < 1e-13,
            "W(1) = {v}"
        );
        let med16 = MediumProfile::constant(1.0, c(16.0, 0.0)).unwrap();
        let w = build_determinant(tm(3), &med16).unwrap();
        let v = w.eval(c(1.7, -0.2)).unwrap();
        let gold = c(0.010427386643168458, 0.015110546929510202);
        assert!((v - gold).norm() < 1e-12 * gold.norm(), "W = {v}");
    }

    #[test]
    fn determinant_vanishes_at_known_roots() {
        // For n = 4 (sqrt n = 2) the first TE degree-1 roots sit exactly at
        // multiples of pi; the first TM degree-1 root was located with
        // mpmath.
        let w = build_determinant(te(1), &ball4()).unwrap();
        for root in [PI, 2.0 * PI, 3.0 * PI] {
            let (v, scale) = w.eval_scaled(c(root, 0.0)).unwrap();
            assert!(v.norm() <= 1e-13 * scale, "W({root}) = {v}, scale {scale}");
        }
        let w = build_determinant(tm(1), &ball4()).unwrap();
        let (v, scale) = w.eval_scaled(c(3.5928629794141145, 0.0)).unwrap();
        assert!(v.norm() <= 1e-12 * scale);
    }

    #[test]
    fn analytic_and_difference_derivatives_agree() {
        for (mode, medium) in [
            (te(1), ball4()),
            (tm(2), ball4()),
            (
                te(1),
                MediumProfile::layered(1.0, vec![0.5], vec![c(9.0, 0.0), c(4.0, 0.0)])
                    .unwrap(),
            ),
            (
                tm(3),
                MediumProfile::layered(1.0, vec![0.4], vec![c(2.0, 0.5), c(3.0, 0.0)])
                    .unwrap(),
            ),
        ] {
            let w = build_determinant(mode, &medium).unwrap();
            for k in [c(1.1, 0.0), c(2.0, 0.7), c(0.8, -1.2), c(4.0, 0.3)] {
                let (_, da) = w.eval_with_derivative(k).unwrap();
                let dd = w.derivative_difference(k).unwrap();
                assert!(
                    (da - dd).norm() <= 1e-8 * da.norm().max(1e-12),
                    "mode {mode}, k = {k}: analytic {da} vs difference {dd}"
                );
            }
        }
    }

    #[test]
    fn conjugate_symmetry_for_real_media() {
        let w = build_determinant(tm(2), &ball4()).unwrap();
        for k in [c(1.3, 0.8), c(2.6, -0.4), c(0.7, 2.0)] {
            let a = w.eval(k).unwrap();
            let b = w.eval(k.conj()).unwrap();
            assert!((a.conj() - b).norm() < 1e-12 * a.norm().max(1e-300));
        }
    }

    #[test]
    fn oracle_and_closed_form_agree_on_sample_path() {
        // Identical normalization on both sides: the ratio along a sample
        // path away from roots must be 1 to oracle accuracy.
        let opts = OracleOptions::default();
        let cases: Vec<(ModeIndex, MediumProfile)> = vec![
            (tm(2), ball4()),
            (te(2), ball4()),
            (
                te(1),
                MediumProfile::layered(1.0, vec![0.5], vec![c(9.0, 0.0), c(4.0, 0.0)])
                    .unwrap(),
            ),
        ];
        for (mode, medium) in cases {
            let w = build_determinant(mode, &medium).unwrap();
            for j in 0..20 {
                let k = c(0.7 + 0.17 * j as f64, 0.35);
                let analytic = w.eval(k).unwrap();
                let oracle = oracle_determinant(mode, &medium, k, &opts).unwrap();
                let ratio = oracle / analytic;
                assert!(
                    (ratio - 1.0).norm() < 1e-8,
                    "mode {mode}, k = {k}: ratio = {ratio}"
                );
            }
        }
    }

    #[test]
    fn oracle_residual_certifies_closed_form_roots() {
        let opts = OracleOptions::default();
        let medium = ball4();
        // Exact TE root at pi and mpmath TM root.
        let r = determinant_oracle_residual(te(1), &medium, c(PI, 0.0), &opts).unwrap();
        assert!(r < 1e-10, "TE residual at root: {r}");
        let r = determinant_oracle_residual(
            tm(1),
            &medium,
            c(3.5928629794141145, 0.0),
            &opts,
        )
        .unwrap();
        assert!(r < 1e-10, "TM residual at root: {r}");
    }

    #[test]
    fn closed_form_matches_oracle_at_unit_wavenumber() {
        let opts = OracleOptions::default();
        let medium = ball4();
        let w = build_determinant(te(1), &medium).unwrap();
        let (analytic, scale) = w.eval_scaled(c(1.0, 0.0)).unwrap();
        let oracle = oracle_determinant(te(1), &medium, c(1.0, 0.0), &opts).unwrap();
        assert!((analytic - oracle).norm() <= 1e-10 * scale.max(1.0));
    }

    #[test]
    fn smooth_profiles_are_rejected() {
        let med =
            MediumProfile::smooth_with_shell(1.0, c(6.0, 0.0), c(2.0, 0.0), 0.75).unwrap();
        let err = build_determinant(te(1), &med).unwrap_err();
        assert!(err.is_validation());
    }

    #[test]
    fn zero_wavenumber_rejected() {
        let w = build_determinant(te(1), &ball4()).unwrap();
        assert!(w.eval(c(0.0, 0.0)).is_err());
    }
}
