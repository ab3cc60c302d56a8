//! Independent radial ODE oracle for the boundary-matching determinant.
//!
//! For a mode of degree `l` the interior and free problems reduce to scalar
//! second-order equations for `u = r g` (`g` the radial profile of the
//! tangential trace-carrying field):
//!
//! * tangential-curl polarization (TE): `u'' = (l(l+1)/r^2 - k^2 n(r)) u`
//!   with matched data `(u, u')`,
//! * radial/gradient polarization (TM): `[(1/n) u']' = (l(l+1)/(n r^2) - k^2) u`
//!   with matched data `(u, (1/n) u')`.
//!
//! The matched pairs are exactly the tangential traces entering the
//! transmission conditions, so a wavenumber is a transmission eigenvalue of
//! the mode precisely when the interior and free boundary data are linearly
//! dependent.
//!
//! The oracle integrates both problems with an adaptive embedded
//! Dormand-Prince 5(4) scheme, starting from a power-series expansion of the
//! regular solution at the origin, and never evaluates Bessel functions; it
//! is the independent cross-check for the closed-form determinants.

use crate::medium::{MediumProfile, RadialIndex};
use crate::modes::{ModeIndex, Polarization};
use crate::{C64, Error, Result};

/// Controls for the oracle integration.
#[derive(Debug, Clone, Copy)]
pub struct OracleOptions {
    /// Relative tolerance of the embedded step-error estimate.
    pub rel_tol: f64,
    /// Absolute floor added to the per-component error scale (guards the
    /// tiny magnitudes of high-degree regular solutions near the origin).
    pub abs_tol_floor: f64,
    /// Hard cap on accepted plus rejected steps per piece.
    pub max_steps: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-12, abs_tol_floor: 1e-280, max_steps: 400_000 }
    }
}

/// Interior and free boundary data produced by the oracle.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryStates {
    /// `(u, t)` of the interior problem at `r = R`.
    pub interior: [C64; 2],
    /// `(u, t)` of the free problem at `r = R`.
    pub free: [C64; 2],
}

/// Double factorial `(2l + 1)!!` as a float.
fn double_factorial_odd(l: u32) -> f64 {
    let mut acc = 1.0f64;
    let mut q = 2 * l + 1;
    while q > 1 {
        acc *= q as f64;
        q -= 2;
    }
    acc
}

/// Coefficients of `n(r)` as a polynomial in `r^2` on the innermost piece.
fn innermost_index_poly(medium: &MediumProfile) -> Vec<C64> {
    match medium.index() {
        RadialIndex::Constant { n0 } => vec![*n0],
        RadialIndex::Layered { values, .. } => vec![values[0]],
        RadialIndex::SmoothWithShell { n_center, n_shell, core_radius } => {
            // n(r) = n_c - 3 d s^2 + 3 d s^4 - d s^6 with d = n_c - n_s,
            // s = r / core_radius.
            let d = n_center - n_shell;
            let rc2 = core_radius * core_radius;
            vec![
                *n_center,
                -3.0 * d / rc2,
                3.0 * d / (rc2 * rc2),
                -d / (rc2 * rc2 * rc2),
            ]
        }
    }
}

/// Power-series start of the regular solution, normalized so that for a
/// locally constant index the solution is `u(r) = r j_l(kappa r)` with
/// `kappa = k sqrt(n(0))`. Returns `(u, t)` at `r`.
fn regular_series_start(
    pol: Polarization,
    l: u32,
    k: C64,
    nu: &[C64],
    r: f64,
) -> Result<[C64; 2]> {
    let ll1 = (l as f64) * (l as f64 + 1.0);
    let k2 = k * k;
    let kappa0 = k * nu[0].sqrt();
    // c_0 = kappa0^l / (2l + 1)!! reproduces the r j_l normalization.
    let c0 = kappa0.powu(l) / double_factorial_odd(l);

    // eta = nu * nu (convolution), used by the TM recursion.
    let mut eta = vec![C64::new(0.0, 0.0); 2 * nu.len() - 1];
    for (p1, &a) in nu.iter().enumerate() {
        for (p2, &b) in nu.iter().enumerate() {
            eta[p1 + p2] += a * b;
        }
    }

    let max_terms = 120usize;
    let mut c = Vec::with_capacity(max_terms);
    c.push(c0);
    let lf = l as f64;
    for jj in 1..max_terms {
        let j = jj as f64;
        let denom = 2.0 * j * (2.0 * lf + 2.0 * j + 1.0);
        let c_j = match pol {
            Polarization::TE => {
                // 2J(2l+2J+1) c_J = -k^2 sum_{p+q=J-1} nu_p c_q
                let mut s = C64::new(0.0, 0.0);
                for (p, &nup) in nu.iter().enumerate() {
                    if jj >= 1 + p {
                        s += nup * c[jj - 1 - p];
                    }
                }
                -k2 * s / denom
            }
            Polarization::TM => {
                // nu_0 2J(2l+2J+1) c_J =
                //   - sum_{p>=1} nu_p c_{J-p} [(l+1+2q)(l+2q) - 2p(l+1+2q) - l(l+1)]
                //   - k^2 sum_{P+q=J-1} eta_P c_q      (q = J - p resp. J-1-P)
                let mut s = C64::new(0.0, 0.0);
                for (p, &nup) in nu.iter().enumerate().skip(1) {
                    if jj >= p {
                        let q = (jj - p) as f64;
                        let factor = (lf + 1.0 + 2.0 * q) * (lf + 2.0 * q)
                            - 2.0 * (p as f64) * (lf + 1.0 + 2.0 * q)
                            - ll1;
                        s += nup * c[jj - p] * factor;
                    }
                }
                let mut sk = C64::new(0.0, 0.0);
                for (pp, &etap) in eta.iter().enumerate() {
                    if jj >= 1 + pp {
                        sk += etap * c[jj - 1 - pp];
                    }
                }
                -(s + k2 * sk) / (nu[0] * denom)
            }
        };
        c.push(c_j);
    }

    // Evaluate u = sum c_j r^{l+1+2j} and u' = sum c_j (l+1+2j) r^{l+2j}.
    let r2 = r * r;
    let r_pow_l1 = r.powi(l as i32 + 1);
    let mut u = C64::new(0.0, 0.0);
    let mut up = C64::new(0.0, 0.0);
    let mut pw = r_pow_l1;
    let mut converged = false;
    for (jj, &cj) in c.iter().enumerate() {
        let term_u = cj * pw;
        let term_up = term_u * ((l as f64 + 1.0 + 2.0 * jj as f64) / r);
        u += term_u;
        up += term_up;
        let mag = term_u.re.abs() + term_u.im.abs();
        let base = u.re.abs() + u.im.abs();
        if jj > 2 && mag <= 1e-18 * base.max(1e-290) {
            converged = true;
            break;
        }
        pw *= r2;
    }
    if !converged {
        return Err(Error::NonConvergence(format!(
            "regular-solution series did not converge at r = {r} for |k| = {}",
            k.norm()
        )));
    }
    // Evaluate n(r) to convert u' into the matched second component.
    let t = match pol {
        Polarization::TE => up,
        Polarization::TM => {
            let mut n_r = C64::new(0.0, 0.0);
            let mut p = 1.0;
            for &nup in nu {
                n_r += nup * p;
                p *= r2;
            }
            up / n_r
        }
    };
    Ok([u, t])
}

/// Right-hand side of the first-order system in the matched variables.
fn rhs(pol: Polarization, ll1: f64, k2: C64, n_r: C64, r: f64, y: &[C64; 2]) -> [C64; 2] {
    match pol {
        Polarization::TE => [y[1], (ll1 / (r * r) - k2 * n_r) * y[0]],
        Polarization::TM => [n_r * y[1], (ll1 / (n_r * (r * r)) - k2) * y[0]],
    }
}

// Dormand-Prince 5(4) tableau.
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] =
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const B5: [f64; 7] =
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

fn axpy(y: &[C64; 2], h: f64, coeffs: &[f64], ks: &[[C64; 2]]) -> [C64; 2] {
    let mut out = *y;
    for (c, kv) in coeffs.iter().zip(ks.iter()) {
        if *c != 0.0 {
            out[0] += h * *c * kv[0];
            out[1] += h * *c * kv[1];
        }
    }
    out
}

/// Integrate `y' = f(r, y)` from `r0` to `r1` (forward) adaptively.
fn dp54<F>(f: F, r0: f64, r1: f64, y0: [C64; 2], opts: &OracleOptions) -> Result<[C64; 2]>
where
    F: Fn(f64, &[C64; 2]) -> [C64; 2],
{
    debug_assert!(r1 > r0);
    let span = r1 - r0;
    let mut r = r0;
    let mut y = y0;
    let mut h = span * 1e-3;
    let mut k1 = f(r, &y);
    let mut steps = 0usize;
    while r < r1 {
        if steps >= opts.max_steps {
            return Err(Error::OdeStepFailure(format!(
                "step budget exhausted at r = {r} (started {r0}, target {r1})"
            )));
        }
        steps += 1;
        if r + h > r1 {
            h = r1 - r;
        }
        let k2v = f(r + h / 5.0, &axpy(&y, h, &A2, &[k1]));
        let k3 = f(r + 3.0 * h / 10.0, &axpy(&y, h, &A3, &[k1, k2v]));
        let k4 = f(r + 4.0 * h / 5.0, &axpy(&y, h, &A4, &[k1, k2v, k3]));
        let k5 = f(r + 8.0 * h / 9.0, &axpy(&y, h, &A5, &[k1, k2v, k3, k4]));
        let k6 = f(r + h, &axpy(&y, h, &A6, &[k1, k2v, k3, k4, k5]));
        let ks6 = [k1, k2v, k3, k4, k5, k6];
        let y5 = axpy(&y, h, &B5[..6], &ks6);
        let k7 = f(r + h, &y5);
        let ks7 = [k1, k2v, k3, k4, k5, k6, k7];
        let y4 = axpy(&y, h, &B4, &ks7);
        // Error estimate against per-component scales.
        let mut err: f64 = 0.0;
        for i in 0..2 {
            let scale =
                opts.abs_tol_floor + opts.rel_tol * y[i].norm().max(y5[i].norm());
            err = err.max((y5[i] - y4[i]).norm() / scale);
        }
        if err <= 1.0 {
            r += h;
            y = y5;
            k1 = k7; // first-same-as-last
        }
        let factor = if err > 0.0 { 0.9 * err.powf(-0.2) } else { 5.0 };
        h *= factor.clamp(0.2, 5.0);
        if !(h.is_finite()) || h <= f64::EPSILON * r1 {
            return Err(Error::OdeStepFailure(format!(
                "step size collapsed to {h} at r = {r}"
            )));
        }
    }
    Ok(y)
}

/// Pick the series handoff radius: small enough for fast convergence and to
/// stay inside the innermost coefficient piece.
fn series_radius(medium: &MediumProfile, k: C64, n0: C64) -> f64 {
    let big_r = medium.radius();
    let zeta = (k.norm() * n0.norm().sqrt().max(1.0)).max(1e-6);
    let mut r = (0.05 * big_r).min(0.35 / zeta);
    if let Some(first) = medium.breakpoints().first() {
        r = r.min(0.5 * first);
    }
    r.max(1e-8 * big_r)
}

/// Integrate the interior problem (actual index profile) from the origin
/// series to `r = R`, returning the matched pair `(u, t)` at the boundary.
fn integrate_interior(
    mode: ModeIndex,
    medium: &MediumProfile,
    k: C64,
    opts: &OracleOptions,
) -> Result<[C64; 2]> {
    let pol = mode.polarization();
    let ll1 = mode.ll1();
    let k2 = k * k;
    let nu = innermost_index_poly(medium);
    let r_start = series_radius(medium, k, nu[0]);
    let mut y = regular_series_start(pol, mode.l(), k, &nu, r_start)?;
    let mut pieces = vec![r_start];
    for b in medium.breakpoints() {
        if b > r_start && b < medium.radius() {
            pieces.push(b);
        }
    }
    pieces.push(medium.radius());
    for w in pieces.windows(2) {
        let (a, b) = (w[0], w[1]);
        // Evaluate the coefficient at the midpoint-respecting radius inside
        // the piece; MediumProfile::n is piecewise-defined so sampling at
        // the integration point is correct inside each piece.
        y = dp54(
            |r, yv| rhs(pol, ll1, k2, medium.n(r), r, yv),
            a,
            b,
            y,
            opts,
        )?;
    }
    Ok(y)
}

/// Integrate the free problem (`n = 1`) to the boundary.
fn integrate_free(mode: ModeIndex, big_r: f64, k: C64, opts: &OracleOptions) -> Result<[C64; 2]> {
    let pol = mode.polarization();
    let ll1 = mode.ll1();
    let k2 = k * k;
    let one = [C64::new(1.0, 0.0)];
    let zeta = k.norm().max(1e-6);
    let r_start = (0.05 * big_r).min(0.35 / zeta).max(1e-8 * big_r);
    let y0 = regular_series_start(pol, mode.l(), k, &one, r_start)?;
    dp54(
        |r, yv| rhs(pol, ll1, k2, C64::new(1.0, 0.0), r, yv),
        r_start,
        big_r,
        y0,
        opts,
    )
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

/// Boundary data of the interior and free problems by direct integration.
pub fn oracle_boundary_states(
    mode: ModeIndex,
    medium: &MediumProfile,
    k: C64,
    opts: &OracleOptions,
) -> Result<BoundaryStates> {
    check_wavenumber(k)?;
    let interior = integrate_interior(mode, medium, k, opts)?;
    let free = integrate_free(mode, medium.radius(), k, opts)?;
    Ok(BoundaryStates { interior, free })
}

/// Oracle value of the boundary-matching determinant (same normalization as
/// the closed-form determinant: both columns behave like `r j_l` near the
/// origin).
pub fn oracle_determinant(
    mode: ModeIndex,
    medium: &MediumProfile,
    k: C64,
    opts: &OracleOptions,
) -> Result<C64> {
    let s = oracle_boundary_states(mode, medium, k, opts)?;
    Ok(s.interior[0] * s.free[1] - s.interior[1] * s.free[0])
}

/// Residual certificate: `|det M| / (||row_1|| ||row_2||)` for the 2x2
/// boundary-matching matrix `M = [[u_in, u_free], [t_in, t_free]]`. Near a
/// true transmission eigenvalue this is small; at generic wavenumbers it is
/// order one.
pub fn determinant_oracle_residual(
    mode: ModeIndex,
    medium: &MediumProfile,
    k: C64,
    opts: &OracleOptions,
) -> Result<f64> {
    let s = oracle_boundary_states(mode, medium, k, opts)?;
    let det = s.interior[0] * s.free[1] - s.interior[1] * s.free[0];
    let row1 = (s.interior[0].norm_sqr() + s.free[0].norm_sqr()).sqrt();
    let row2 = (s.interior[1].norm_sqr() + s.free[1].norm_sqr()).sqrt();
    let denom = row1 * row2;
    if denom == 0.0 {
        return Err(Error::NonConvergence(
            "boundary-matching rows vanished; cannot normalize the residual".into(),
        ));
    }
    Ok(det.norm() / denom)
}
