//! Semiclassical scaling verification for the shifted pair system.
//!
//! The resolvent estimates predict, for shifts `z = μ·h⁻²` along an
//! admissible ray and divergence-constrained sources, the decays
//!
//!   ‖v‖_{L²} ≤ C(‖f‖ + h²‖g‖),   ‖u‖_{L²} ≲ h²‖f‖ (f-only),
//!   ‖u‖_{L²} ≲ h⁴‖g‖ (g-only),
//!
//! together with two exact discrete identities on the TM sector: the
//! divergence relation `μ·div v = −h²·div g` and the boundary trace
//! relation `z·u_N(R) = −m/(1+m)·v_N(R) − f_N(R)`.  This module
//! manufactures constraint-exact sources, solves the ladder of shifts,
//! fits the observed exponents, and reports bounded-constant checks —
//! the inequalities are one-sided, so boundedness of the constant is the
//! assertable claim and exponent fits are secondary evidence.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::admissibility::{contrast_cone, ShiftPoint};
use crate::{Error, Result};
use crate::grid::{RadialGrid, Scheme};
use crate::linalg::{matvec, Vecc};
use crate::medium::MediumProfile;
use crate::modes::{ModeIndex, Polarization};
use crate::poly::Poly;
use crate::radial_operator::{assemble_bz, build_grid, ModeOperatorBlocks};
use crate::{C64, ONE};

/// Which source components are active.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SourceKind {
    FOnly,
    GOnly,
    Mixed,
}

/// A stacked pair of discrete sources in the mode's field layout.
#[derive(Clone, Debug)]
pub struct SourcePair {
    pub f: Vecc,
    pub g: Vecc,
}

/// Manufactures smooth, grid-sampled sources with unit L² norm satisfying
/// the divergence constraints `div((1+m)f) = 0` and `div g = 0` exactly
/// at the discrete level.
///
/// TE sources are tangential, hence automatically divergence-free; the
/// radial profiles are seeded random polynomials.  TM sources carry the
/// longitudinal correction explicitly: the pair `(1+m)·(a_f, b_f)` is
/// built from a scalar potential `A` as `(A, (2A + rA')/l(l+1))`, which
/// makes the weighted divergence vanish nodally for any medium; `g` uses
/// the same construction with unit weight.  The construction relies on
/// exact polynomial differentiation, so it requires the spectral scheme;
/// on a finite-difference grid the discrete constraint cannot be met and
/// an error is returned.
///
/// The same seed yields bit-identical fields on the same grid.
pub fn manufacture_source(
    mode: ModeIndex,
    grid: &RadialGrid,
    medium: &MediumProfile,
    kind: SourceKind,
    seed: u64,
) -> Result<SourcePair> {
    let n = grid.len();
    let radius = grid.radius();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coeff = || rng.gen_range(0.25..1.0_f64) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };

    let (mut f, mut g) = match mode.polarization() {
        Polarization::TE => {
            // f must satisfy the trace-free smoothness used by the
            // estimates' source class; a boundary bubble keeps it generic.
            let bubble = Poly::new(vec![0.0, 1.0])
                .mul(&Poly::new(vec![radius, -1.0]))
                .mul(&Poly::new(vec![radius, -1.0]));
            let fp = bubble.mul(&Poly::new(vec![coeff(), coeff(), coeff()]));
            let gp = Poly::new(vec![0.0, 1.0]).mul(&Poly::new(vec![coeff(), coeff(), coeff()]));
            let f: Vecc = grid.nodes().mapv(|r| C64::new(fp.eval(r), 0.0));
            let g: Vecc = grid.nodes().mapv(|r| C64::new(gp.eval(r), 0.0));
            (f, g)
        }
        Polarization::TM => {
            let l = mode.l() as usize;
            let l2 = mode.ll1();
            // Potential with a gentle boundary envelope (1 − (r/R)²)².
            let envelope = {
                let q = Poly::new(vec![1.0, 0.0, -1.0 / (radius * radius)]);
                q.mul(&q)
            };
            let make_pair = |pot: &Poly| {
                let b = pot
                    .scale(2.0)
                    .add(&Poly::new(vec![0.0, 1.0]).mul(&pot.derivative()))
                    .scale(1.0 / l2);
                (pot.clone(), b)
            };
            let pot_f = Poly::monomial(l + 1, coeff())
                .add(&Poly::monomial(l + 3, coeff()))
                .mul(&envelope);
            let (af, bf) = make_pair(&pot_f);
            let pot_g = Poly::monomial(l + 1, coeff()).add(&Poly::monomial(l + 3, coeff()));
            let (ag, bg) = make_pair(&pot_g);
            let mut f = Vecc::zeros(2 * n);
            let mut g = Vecc::zeros(2 * n);
            for (i, &r) in grid.nodes().iter().enumerate() {
                let w = ONE + medium.m(r);
                f[i] = C64::new(af.eval(r), 0.0) / w;
                f[n + i] = C64::new(bf.eval(r), 0.0) / w;
                g[i] = C64::new(ag.eval(r), 0.0);
                g[n + i] = C64::new(bg.eval(r), 0.0);
            }
            (f, g)
        }
    };

    match kind {
        SourceKind::FOnly => g.fill(crate::ZERO),
        SourceKind::GOnly => f.fill(crate::ZERO),
        SourceKind::Mixed => {}
    }

    // Verify the discrete divergence constraints before normalizing.
    check_divergence_constraints(mode, grid, medium, &f, &g)?;

    let norms = mode_norms(mode, grid);
    if kind != SourceKind::GOnly {
        let nf = norms.field_l2(&f);
        if nf == 0.0 {
            return Err(Error::validation("manufactured f vanished"));
        }
        f.mapv_inplace(|v| v / nf);
    }
    if kind != SourceKind::FOnly {
        let ng = norms.field_l2(&g);
        if ng == 0.0 {
            return Err(Error::validation("manufactured g vanished"));
        }
        g.mapv_inplace(|v| v / ng);
    }
    Ok(SourcePair { f, g })
}

fn check_divergence_constraints(
    mode: ModeIndex,
    grid: &RadialGrid,
    medium: &MediumProfile,
    f: &Vecc,
    g: &Vecc,
) -> Result<()> {
    if mode.polarization() == Polarization::TE {
        return Ok(()); // tangential fields are divergence-free identically
    }
    let n = grid.len();
    let l2 = mode.ll1();
    let d1 = grid.d1();
    let nodes = grid.nodes();
    // div_h(w·(a,b)) = (D + 2/r)(w∘a) − l(l+1)/r·(w∘b), evaluated at the
    // interior constraint nodes.
    let div_residual = |field: &Vecc, weighted: bool| -> f64 {
        let wa: Vec<C64> = (0..n)
            .map(|i| {
                let w = if weighted { ONE + medium.m(nodes[i]) } else { ONE };
                field[i] * w
            })
            .collect();
        let wb: Vec<C64> = (0..n)
            .map(|i| {
                let w = if weighted { ONE + medium.m(nodes[i]) } else { ONE };
                field[n + i] * w
            })
            .collect();
        let scale = wa
            .iter()
            .chain(wb.iter())
            .map(|v| v.norm())
            .fold(0.0_f64, f64::max)
            .max(f64::MIN_POSITIVE)
            * (n * n) as f64; // differentiation amplifies roundoff by O(N²)
        let mut worst = 0.0_f64;
        for i in 1..n - 1 {
            let mut acc = crate::ZERO;
            for j in 0..n {
                acc += C64::new(d1[[i, j]], 0.0) * wa[j];
            }
            acc += C64::new(2.0 / nodes[i], 0.0) * wa[i];
            acc -= C64::new(l2 / nodes[i], 0.0) * wb[i];
            worst = worst.max(acc.norm() / scale);
        }
        worst
    };
    let rf = div_residual(f, true);
    let rg = div_residual(g, false);
    if rf > 1e-10 || rg > 1e-10 {
        return Err(Error::validation(format!(
            "TM source constraint violation: weighted divergence residual {rf:.3e}, \
             divergence residual {rg:.3e} — the longitudinal component must be matched \
             to the potential exactly (spectral differentiation required)"
        )));
    }
    Ok(())
}

/// Mode-aware L² norms over the grid.
struct ModeNorms<'a> {
    grid: &'a RadialGrid,
    l2: f64,
    tm: bool,
}

fn mode_norms(mode: ModeIndex, grid: &RadialGrid) -> ModeNorms<'_> {
    ModeNorms {
        grid,
        l2: mode.ll1(),
        tm: mode.polarization() == Polarization::TM,
    }
}

impl ModeNorms<'_> {
    fn field_l2(&self, field: &Vecc) -> f64 {
        let w = self.grid.quad_r2();
        let n = self.grid.len();
        let mut acc = 0.0;
        if self.tm {
            for i in 0..n {
                acc += w[i] * (field[i].norm_sqr() + self.l2 * field[n + i].norm_sqr());
            }
        } else {
            for i in 0..n {
                acc += self.l2 * w[i] * field[i].norm_sqr();
            }
        }
        acc.sqrt()
    }
}

/// Discrete semiclassical Sobolev norms of a scalar radial component:
/// returns the cumulative family `s_j = sqrt(Σ_{i≤j} h^{2i}·‖D^i φ‖²)` for
/// `j = 0..=order` in the quadrature metric `∫ |·|² r² dr`.
///
/// `order` must be one of 0, 1, 2, 4; orders above 2 require spectral
/// differentiation (a second-order finite-difference grid cannot measure
/// them reliably).
pub fn semiclassical_norms(
    field: &Vecc,
    h: f64,
    grid: &RadialGrid,
    order: usize,
) -> Result<Vec<f64>> {
    if !matches!(order, 0 | 1 | 2 | 4) {
        return Err(Error::validation(format!(
            "semiclassical_norms: order must be 0, 1, 2 or 4, got {order}"
        )));
    }
    if order > 2 && grid.scheme() == Scheme::FiniteDifference {
        return Err(Error::validation(
            "semiclassical_norms: orders above 2 exceed the finite-difference scheme's reliable differentiation order",
        ));
    }
    if field.len() != grid.len() {
        return Err(Error::validation(format!(
            "semiclassical_norms: field length {} does not match grid size {}",
            field.len(),
            grid.len()
        )));
    }
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::validation("semiclassical_norms: h must be positive"));
    }
    let w = grid.quad_r2();
    let n = grid.len();
    let l2_sq = |v: &Vecc| -> f64 { (0..n).map(|i| w[i] * v[i].norm_sqr()).sum() };
    let d1 = grid.d1();
    let deriv = |v: &Vecc| -> Vecc {
        let mut out = Vecc::zeros(n);
        for i in 0..n {
            let mut acc = crate::ZERO;
            for j in 0..n {
                acc += C64::new(d1[[i, j]], 0.0) * v[j];
            }
            out[i] = acc;
        }
        out
    };
    let mut norms = Vec::with_capacity(order + 1);
    let mut acc = l2_sq(field);
    norms.push(acc.sqrt());
    let mut current = field.clone();
    let mut hpow = 1.0;
    for _ in 1..=order {
        current = deriv(&current);
        hpow *= h * h;
        acc += hpow * l2_sq(&current);
        norms.push(acc.sqrt());
    }
    Ok(norms)
}

/// Norm table at one ladder point.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScalingSample {
    pub h: f64,
    pub shift: C64,
    pub grid_points: usize,
    pub norm_u_l2: f64,
    pub norm_u_h2sc: f64,
    pub norm_v_l2: f64,
    pub norm_f: f64,
    pub norm_g: f64,
    /// Relative residual of `μ·div v = −h²·div g` at the enforced nodes
    /// (TM only).
    pub divergence_identity: Option<f64>,
    /// Relative residual of the boundary trace relation
    /// `z·u_N(R) + m/(1+m)·v_N(R) + f_N(R) = 0` (TM only).
    pub trace_identity: Option<f64>,
}

/// One verified inequality or identity.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    /// Headline value (fitted exponent, constant ratio, or residual).
    pub value: f64,
    pub detail: String,
}

/// Least-squares exponent fit of `log norm` against `log h`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExponentFit {
    pub quantity: String,
    pub exponent: f64,
    /// Root-mean-square residual of the log-log fit; fits above 0.1 are
    /// reported as "bounded but unfitted".
    pub fit_residual: f64,
}

/// Full scaling experiment output.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScalingReport {
    pub mode: ModeIndex,
    pub kind: SourceKind,
    pub theta: f64,
    pub mu: C64,
    pub samples: Vec<ScalingSample>,
    pub fits: Vec<ExponentFit>,
    pub checks: Vec<CheckOutcome>,
    /// Ladder indices where a norm jumped by more than an order of
    /// magnitude between adjacent points (resonance proximity).
    pub resonance_flags: Vec<usize>,
}

impl ScalingReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn fit_exponent(hs: &[f64], values: &[f64]) -> Option<ExponentFit> {
    let pts: Vec<(f64, f64)> = hs
        .iter()
        .zip(values)
        .filter(|(_, &v)| v > 0.0 && v.is_finite())
        .map(|(&h, &v)| (h.ln(), v.ln()))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-12 {
        return None;
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let rss: f64 = pts
        .iter()
        .map(|&(x, y)| {
            let e = y - (slope * x + intercept);
            e * e
        })
        .sum();
    Some(ExponentFit {
        quantity: String::new(),
        exponent: slope,
        fit_residual: (rss / n).sqrt(),
    })
}

/// Grid resolution required for semiclassical parameter `h` (configured
/// budget of eight collocation points per unit of 1/h, capped by the dense
/// solver's practical limit).
fn ladder_resolution(h: f64) -> Result<usize> {
    let needed = (8.0 / h).ceil() as usize;
    if needed > 512 {
        return Err(Error::ResolutionInsufficient(format!(
            "h = {h:.3e} needs {needed} nodes, above the dense-solver cap of 512"
        )));
    }
    Ok(needed.max(16))
}

/// Runs the semiclassical scaling experiment: assemble the pair system at
/// `z = μ·h⁻²` for each ladder value, solve with manufactured
/// constraint-exact sources, and verify the predicted norm behavior.
pub fn scaling_experiment(
    mode: ModeIndex,
    medium: &MediumProfile,
    theta: f64,
    h_ladder: &[f64],
    kind: SourceKind,
    seed: u64,
) -> Result<ScalingReport> {
    if h_ladder.len() < 2 {
        return Err(Error::validation("scaling_experiment: ladder needs at least two points"));
    }
    if h_ladder.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::validation("scaling_experiment: ladder must be strictly decreasing"));
    }
    if h_ladder.iter().any(|&h| !(h.is_finite() && h > 0.0)) {
        return Err(Error::validation("scaling_experiment: ladder values must be positive"));
    }
    // The ray direction must keep its distance from the forbidden contrast
    // directions — otherwise the resolvent bound being measured does not
    // apply.
    let cone = contrast_cone(medium);
    let dist = cone
        .forbidden
        .iter()
        .map(|arc| arc.distance(theta))
        .fold(f64::INFINITY, f64::min);
    if dist < 0.02 {
        return Err(Error::NoAdmissibleRay(format!(
            "scaling_experiment: direction θ = {theta} is within {dist:.3e} of the forbidden contrast directions"
        )));
    }

    let mu = C64::from_polar(1.0, theta);
    let mut samples = Vec::with_capacity(h_ladder.len());
    for &h in h_ladder {
        let n = ladder_resolution(h)?;
        let grid = build_grid(n, medium.radius(), Scheme::Spectral)?;
        let shift = ShiftPoint::at_radius(theta, 1.0 / (h * h))?;
        debug_assert_eq!(shift.z, mu * (1.0 / (h * h)));
        let blocks = assemble_bz(mode, medium, shift.z, &grid)?;
        let sources = manufacture_source(mode, &grid, medium, kind, seed)?;
        let x = blocks.stack_pair(&sources.f, &sources.g)?;
        let y = blocks.factors()?.solve(&matvec(blocks.source_map(), &x))?;
        let (u, v) = blocks.split_pair(&y);
        samples.push(measure_sample(&blocks, &grid, h, &u, &v, &sources)?);
    }

    let hs: Vec<f64> = h_ladder.to_vec();
    let mut fits = Vec::new();
    let mut checks = Vec::new();

    let u_l2: Vec<f64> = samples.iter().map(|s| s.norm_u_l2).collect();
    let v_l2: Vec<f64> = samples.iter().map(|s| s.norm_v_l2).collect();
    let u_h2: Vec<f64> = samples.iter().map(|s| s.norm_u_h2sc).collect();

    // (i) bounded constant in ‖v‖ ≤ C(‖f‖ + h²‖g‖).
    {
        let cs: Vec<f64> = samples
            .iter()
            .map(|s| s.norm_v_l2 / (s.norm_f + s.h * s.h * s.norm_g).max(f64::MIN_POSITIVE))
            .collect();
        let cmax = cs.iter().cloned().fold(0.0_f64, f64::max);
        let cmin = cs.iter().cloned().fold(f64::INFINITY, f64::min);
        let ratio = cmax / cmin.max(f64::MIN_POSITIVE);
        checks.push(CheckOutcome {
            name: "v-bounded-constant".into(),
            passed: ratio <= 5.0,
            value: ratio,
            detail: format!(
                "C = ‖v‖/(‖f‖ + h²‖g‖) ∈ [{cmin:.3e}, {cmax:.3e}], max/min = {ratio:.2}"
            ),
        });
    }

    // Exponent checks depend on which source component drives the system.
    match kind {
        SourceKind::FOnly => {
            push_exponent_check(
                &mut fits,
                &mut checks,
                &hs,
                &u_l2,
                "u-l2-exponent-f",
                2.0,
                0.3,
                &samples,
                |s| s.norm_u_l2 / (s.h * s.h * s.norm_f).max(f64::MIN_POSITIVE),
            );
            // ‖u‖_{H²sc} / (h²‖f‖) bounded: the semiclassical family absorbs
            // the derivative growth, so the ratio must stay O(1).
            let ratios: Vec<f64> = samples
                .iter()
                .map(|s| s.norm_u_h2sc / (s.h * s.h * s.norm_f).max(f64::MIN_POSITIVE))
                .collect();
            let rmax = ratios.iter().cloned().fold(0.0_f64, f64::max);
            let rmin = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
            let ratio = rmax / rmin.max(f64::MIN_POSITIVE);
            if let Some(mut fit) = fit_exponent(&hs, &u_h2) {
                fit.quantity = "u-h2sc".into();
                fits.push(fit);
            }
            checks.push(CheckOutcome {
                name: "u-h2sc-bounded-f".into(),
                passed: ratio <= 5.0,
                value: ratio,
                detail: format!("‖u‖_H²sc/(h²‖f‖) stability max/min = {ratio:.2}"),
            });
        }
        SourceKind::GOnly => {
            push_exponent_check(
                &mut fits,
                &mut checks,
                &hs,
                &u_l2,
                "u-l2-exponent-g",
                4.0,
                0.4,
                &samples,
                |s| s.norm_u_l2 / (s.h.powi(4) * s.norm_g).max(f64::MIN_POSITIVE),
            );
            push_exponent_check(
                &mut fits,
                &mut checks,
                &hs,
                &v_l2,
                "v-l2-exponent-g",
                2.0,
                0.4,
                &samples,
                |s| s.norm_v_l2 / (s.h * s.h * s.norm_g).max(f64::MIN_POSITIVE),
            );
        }
        SourceKind::Mixed => {
            if let Some(mut fit) = fit_exponent(&hs, &u_l2) {
                fit.quantity = "u-l2".into();
                fits.push(fit);
            }
        }
    }

    // Exact discrete identities on the TM sector.
    if mode.polarization() == Polarization::TM {
        let worst_div = samples
            .iter()
            .filter_map(|s| s.divergence_identity)
            .fold(0.0_f64, f64::max);
        checks.push(CheckOutcome {
            name: "divergence-identity".into(),
            passed: worst_div <= 1e-10,
            value: worst_div,
            detail: format!("max residual of μ·div v = −h²·div g over the ladder: {worst_div:.3e}"),
        });
        let worst_trace = samples
            .iter()
            .filter_map(|s| s.trace_identity)
            .fold(0.0_f64, f64::max);
        checks.push(CheckOutcome {
            name: "trace-identity".into(),
            passed: worst_trace <= 1e-8,
            value: worst_trace,
            detail: format!(
                "max residual of z·u_N + m/(1+m)·v_N + f_N = 0 at r = R: {worst_trace:.3e}"
            ),
        });
    }

    // Monotone ladder: flag order-of-magnitude jumps between neighbors.
    let mut resonance_flags = Vec::new();
    for i in 1..samples.len() {
        for (a, b) in [
            (samples[i - 1].norm_u_l2, samples[i].norm_u_l2),
            (samples[i - 1].norm_v_l2, samples[i].norm_v_l2),
        ] {
            if a > 0.0 && b > 0.0 {
                let jump = (b / a).max(a / b);
                // The expected inter-point change is bounded by the h-ratio
                // to the strongest predicted power (h⁴ → factor 16 for a
                // halving ladder); an extra margin separates resonances.
                if jump > 40.0 && !resonance_flags.contains(&i) {
                    resonance_flags.push(i);
                }
            }
        }
    }

    Ok(ScalingReport {
        mode,
        kind,
        theta,
        mu,
        samples,
        fits,
        checks,
        resonance_flags,
    })
}

#[allow(clippy::too_many_arguments)]
fn push_exponent_check(
    fits: &mut Vec<ExponentFit>,
    checks: &mut Vec<CheckOutcome>,
    hs: &[f64],
    values: &[f64],
    name: &str,
    target: f64,
    band: f64,
    samples: &[ScalingSample],
    constant_of: impl Fn(&ScalingSample) -> f64,
) {
    match fit_exponent(hs, values) {
        Some(mut fit) => {
            fit.quantity = name.into();
            let (passed, detail) = if fit.fit_residual <= 0.1 {
                (
                    (fit.exponent - target).abs() <= band,
                    format!(
                        "fitted exponent {:.3} (target {target} ± {band}), fit residual {:.3e}",
                        fit.exponent, fit.fit_residual
                    ),
                )
            } else {
                // One-sided bound: fall back to bounded-constant evidence.
                let cs: Vec<f64> = samples.iter().map(&constant_of).collect();
                let cmax = cs.iter().cloned().fold(0.0_f64, f64::max);
                let cmin = cs.iter().cloned().fold(f64::INFINITY, f64::min).max(f64::MIN_POSITIVE);
                (
                    cmax / cmin <= 5.0,
                    format!(
                        "bounded but unfitted: log-log residual {:.3e} > 0.1; constant stability max/min = {:.2}",
                        fit.fit_residual,
                        cmax / cmin
                    ),
                )
            };
            let value = fit.exponent;
            fits.push(fit);
            checks.push(CheckOutcome {
                name: name.into(),
                passed,
                value,
                detail,
            });
        }
        None => checks.push(CheckOutcome {
            name: name.into(),
            passed: false,
            value: f64::NAN,
            detail: "exponent fit impossible (degenerate norm sequence)".into(),
        }),
    }
}

fn measure_sample(
    blocks: &ModeOperatorBlocks,
    grid: &RadialGrid,
    h: f64,
    u: &Vecc,
    v: &Vecc,
    sources: &SourcePair,
) -> Result<ScalingSample> {
    let mode = blocks.mode();
    let n = grid.len();
    let l2 = mode.ll1();
    let norms = mode_norms(mode, grid);

    // Semiclassical H² norm of u: componentwise scalar norms combined with
    // the angular weights of the vector harmonic basis.
    let comp_slices: Vec<(Vecc, f64)> = match mode.polarization() {
        Polarization::TE => vec![(u.clone(), l2)],
        Polarization::TM => vec![
            (u.slice(ndarray::s![0..n]).to_owned(), 1.0),
            (u.slice(ndarray::s![n..2 * n]).to_owned(), l2),
        ],
    };
    let mut h2_sq = 0.0;
    for (comp, ang) in &comp_slices {
        let s = semiclassical_norms(comp, h, grid, 2)?;
        h2_sq += ang * s[2] * s[2];
    }

    let (div_res, trace_res) = match mode.polarization() {
        Polarization::TE => (None, None),
        Polarization::TM => {
            let mu = blocks.shift() * C64::new(h * h, 0.0);
            let d1 = grid.d1();
            let nodes = grid.nodes();
            // Nodal divergences of v and g at the enforced nodes 1..=N−2.
            let div_of = |field: &Vecc| -> Vec<C64> {
                (1..n - 1)
                    .map(|i| {
                        let mut acc = crate::ZERO;
                        for j in 0..n {
                            acc += C64::new(d1[[i, j]], 0.0) * field[j];
                        }
                        acc + C64::new(2.0 / nodes[i], 0.0) * field[i]
                            - C64::new(l2 / nodes[i], 0.0) * field[n + i]
                    })
                    .collect()
            };
            let div_v = div_of(v);
            let div_g = div_of(&sources.g);
            let h2 = C64::new(h * h, 0.0);
            let mut num = 0.0_f64;
            let mut den = 0.0_f64;
            for (dv, dg) in div_v.iter().zip(&div_g) {
                num = num.max((mu * dv + h2 * dg).norm());
                den = den.max((mu * dv).norm().max((h2 * dg).norm()));
            }
            let div_res = if den > 0.0 { num / den } else { num };

            // Trace relation at r = R from the boundary-collocated
            // Y-equation combined with the enforced curl trace.
            let z = blocks.shift();
            let m_b = blocks.medium().m(grid.radius());
            let lhs = z * u[n - 1];
            let rhs = -(m_b / (ONE + m_b)) * v[n - 1] - sources.f[n - 1];
            let scale = lhs.norm().max(rhs.norm()).max(f64::MIN_POSITIVE);
            let trace_res = (lhs - rhs).norm() / scale;
            (Some(div_res), Some(trace_res))
        }
    };

    Ok(ScalingSample {
        h,
        shift: blocks.shift(),
        grid_points: n,
        norm_u_l2: norms.field_l2(u),
        norm_u_h2sc: h2_sq.sqrt(),
        norm_v_l2: norms.field_l2(v),
        norm_f: norms.field_l2(&sources.f),
        norm_g: norms.field_l2(&sources.g),
        divergence_identity: div_res,
        trace_identity: trace_res,
    })
}
