//! Certified complex root counting and localization by the argument
//! principle.
//!
//! [`winding_count`] integrates the logarithmic derivative of an analytic
//! function around an axis-aligned rectangle with an adaptive
//! Gauss–Legendre pair, certifying that the result lands within a quarter
//! unit of an integer. [`find_roots`] combines winding counts with
//! midpoint subdivision and multiplicity-aware Newton polishing to locate
//! every root inside a box, recording per-root residuals and reconciling
//! the sum of multiplicities against the outer winding number exactly.
//!
//! Zeros that sit (numerically) on a box edge are detected and handled
//! deterministically: the outermost box is inflated by a fixed tiny
//! factor, while interior split lines are re-placed at a
//! golden-ratio-perturbed coordinate, so that child boxes still partition
//! their parent exactly and winding numbers stay conserved.

use serde::{Deserialize, Serialize};

use crate::ball_analytic::DeterminantFunction;
use crate::linalg::gauss_legendre;
use crate::{C64, Error, Result};
use std::f64::consts::TAU;

const GOLDEN: f64 = 1.618_033_988_749_895;

/// An analytic function of one complex variable, with derivative and a
/// local magnitude scale for relative residuals.
pub trait AnalyticFn {
    fn eval(&self, k: C64) -> Result<C64>;

    fn eval_with_derivative(&self, k: C64) -> Result<(C64, C64)>;

    /// Local magnitude scale used to turn `|f(k)|` into a relative
    /// residual (for boundary-matching determinants: the sum of the
    /// magnitudes of the two products whose difference is the
    /// determinant). Defaults to 1.
    fn scale(&self, k: C64) -> Result<f64> {
        let _ = k;
        Ok(1.0)
    }
}

impl AnalyticFn for DeterminantFunction {
    fn eval(&self, k: C64) -> Result<C64> {
        DeterminantFunction::eval(self, k)
    }

    fn eval_with_derivative(&self, k: C64) -> Result<(C64, C64)> {
        DeterminantFunction::eval_with_derivative(self, k)
    }

    fn scale(&self, k: C64) -> Result<f64> {
        Ok(DeterminantFunction::eval_scaled(self, k)?.1)
    }
}

/// Axis-aligned closed rectangle in the complex plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchBox {
    re_lo: f64,
    re_hi: f64,
    im_lo: f64,
    im_hi: f64,
}

impl SearchBox {
    pub fn new(re_lo: f64, re_hi: f64, im_lo: f64, im_hi: f64) -> Result<Self> {
        let all_finite =
            re_lo.is_finite() && re_hi.is_finite() && im_lo.is_finite() && im_hi.is_finite();
        if !all_finite || re_lo >= re_hi || im_lo >= im_hi {
            return Err(Error::validation(format!(
                "search box must have finite, positively ordered sides, got \
                 re [{re_lo}, {re_hi}], im [{im_lo}, {im_hi}]"
            )));
        }
        Ok(SearchBox { re_lo, re_hi, im_lo, im_hi })
    }

    pub fn re_range(&self) -> (f64, f64) {
        (self.re_lo, self.re_hi)
    }

    pub fn im_range(&self) -> (f64, f64) {
        (self.im_lo, self.im_hi)
    }

    /// Corners in counter-clockwise order starting at the lower left.
    pub fn corners(&self) -> [C64; 4] {
        [
            C64::new(self.re_lo, self.im_lo),
            C64::new(self.re_hi, self.im_lo),
            C64::new(self.re_hi, self.im_hi),
            C64::new(self.re_lo, self.im_hi),
        ]
    }

    pub fn center(&self) -> C64 {
        C64::new(0.5 * (self.re_lo + self.re_hi), 0.5 * (self.im_lo + self.im_hi))
    }

    pub fn width(&self) -> f64 {
        self.re_hi - self.re_lo
    }

    pub fn height(&self) -> f64 {
        self.im_hi - self.im_lo
    }

    pub fn diameter(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn contains(&self, k: C64) -> bool {
        self.re_lo <= k.re && k.re <= self.re_hi && self.im_lo <= k.im && k.im <= self.im_hi
    }

    /// Scale both sides by `factor` about the center.
    pub fn inflate(&self, factor: f64) -> SearchBox {
        let c = self.center();
        let hw = 0.5 * self.width() * factor;
        let hh = 0.5 * self.height() * factor;
        SearchBox {
            re_lo: c.re - hw,
            re_hi: c.re + hw,
            im_lo: c.im - hh,
            im_hi: c.im + hh,
        }
    }

    /// Centered square box of half-side `rho`.
    pub fn square_around(k: C64, rho: f64) -> SearchBox {
        SearchBox {
            re_lo: k.re - rho,
            re_hi: k.re + rho,
            im_lo: k.im - rho,
            im_hi: k.im + rho,
        }
    }

    /// Split the longer side at parameter `t` in (0, 1). The two children
    /// partition this box exactly (they share the split coordinate).
    fn split_at(&self, t: f64) -> (SearchBox, SearchBox) {
        if self.width() >= self.height() {
            let c = self.re_lo + t * self.width();
            (
                SearchBox { re_hi: c, ..*self },
                SearchBox { re_lo: c, ..*self },
            )
        } else {
            let c = self.im_lo + t * self.height();
            (
                SearchBox { im_hi: c, ..*self },
                SearchBox { im_lo: c, ..*self },
            )
        }
    }
}

/// Controls for the certified winding computation.
#[derive(Debug, Clone)]
pub struct WindingOptions {
    /// Per-edge quadrature tolerance in winding units.
    pub edge_tol: f64,
    /// Maximum adaptive bisection depth per edge.
    pub max_depth: u32,
    /// Largest accepted distance between the raw contour integral (in
    /// winding units) and the nearest integer.
    pub certify_defect: f64,
    /// Pre-scan points per edge for the minimum-modulus check.
    pub scan_points: usize,
    /// `|f|/scale` below this during the edge scan or quadrature is
    /// treated as a zero on the boundary.
    pub boundary_zero_rel: f64,
    /// `|f|/scale` below this when the adaptive depth runs out is treated
    /// as evidence of a near-boundary zero (rather than plain quadrature
    /// failure).
    pub near_zero_rel: f64,
}

impl Default for WindingOptions {
    fn default() -> Self {
        WindingOptions {
            edge_tol: 0.005,
            max_depth: 26,
            certify_defect: 0.25,
            scan_points: 48,
            boundary_zero_rel: 1e-9,
            near_zero_rel: 1e-6,
        }
    }
}

/// A certified winding number.
#[derive(Debug, Clone, Copy)]
pub struct WindingCount {
    /// Integer winding number (count of enclosed zeros with multiplicity).
    pub winding: i64,
    /// Distance of the raw contour integral from `winding`.
    pub defect: f64,
    /// Function evaluations spent.
    pub evaluations: usize,
}

struct EdgeQuad {
    x15: Vec<f64>,
    w15: Vec<f64>,
    x31: Vec<f64>,
    w31: Vec<f64>,
}

impl EdgeQuad {
    fn new() -> Self {
        let (x15, w15) = gauss_legendre(15);
        let (x31, w31) = gauss_legendre(31);
        EdgeQuad { x15, w15, x31, w31 }
    }
}

fn log_derivative<F: AnalyticFn + ?Sized>(
    f: &F,
    z: C64,
    boundary_zero_rel: f64,
    min_rel: &mut f64,
) -> Result<C64> {
    let (v, d) = f.eval_with_derivative(z)?;
    let s = f.scale(z)?.max(f64::MIN_POSITIVE);
    let rel = v.norm() / s;
    if rel < *min_rel {
        *min_rel = rel;
    }
    if rel < boundary_zero_rel {
        return Err(Error::BoundaryZero(format!(
            "|f|/scale = {rel:.3e} at {z} during contour quadrature"
        )));
    }
    Ok(d / v)
}

/// Adaptive Gauss–Legendre pair integral of `f'/f` along the segment from
/// `a` to `b`, with tolerance `tol` (integral units) spread proportionally
/// over subsegments.
fn integrate_edge<F: AnalyticFn + ?Sized>(
    f: &F,
    a: C64,
    b: C64,
    quad: &EdgeQuad,
    opts: &WindingOptions,
    evals: &mut usize,
) -> Result<C64> {
    let tol = opts.edge_tol * TAU;
    // Work stack of (t_lo, t_hi, depth) in edge parameter space.
    let mut stack = vec![(0.0f64, 1.0f64, 0u32)];
    let mut total = C64::new(0.0, 0.0);
    let mut min_rel = f64::INFINITY;
    let dz = b - a;
    while let Some((t0, t1, depth)) = stack.pop() {
        let mid = 0.5 * (t0 + t1);
        let half = 0.5 * (t1 - t0);
        let mut rule = |x: &[f64], w: &[f64], evals: &mut usize| -> Result<C64> {
            let mut acc = C64::new(0.0, 0.0);
            for (&xi, &wi) in x.iter().zip(w) {
                let t = mid + half * xi;
                let z = a + dz * t;
                acc += log_derivative(f, z, opts.boundary_zero_rel, &mut min_rel)? * wi;
                *evals += 1;
            }
            Ok(acc * (dz * half))
        };
        let coarse = rule(&quad.x15, &quad.w15, evals)?;
        let fine = rule(&quad.x31, &quad.w31, evals)?;
        let err = (fine - coarse).norm();
        if err <= tol * (t1 - t0) {
            total += fine;
        } else if depth >= opts.max_depth {
            return if min_rel < opts.near_zero_rel {
                Err(Error::BoundaryZero(format!(
                    "adaptive depth {depth} exhausted with |f|/scale down to \
                     {min_rel:.3e} on edge {a} -> {b}"
                )))
            } else {
                Err(Error::WindingNonConvergence(format!(
                    "edge {a} -> {b} quadrature error {err:.3e} above tolerance \
                     at depth {depth}"
                )))
            };
        } else {
            stack.push((t0, mid, depth + 1));
            stack.push((mid, t1, depth + 1));
        }
    }
    Ok(total)
}

fn scan_edge<F: AnalyticFn + ?Sized>(
    f: &F,
    a: C64,
    b: C64,
    opts: &WindingOptions,
    evals: &mut usize,
) -> Result<()> {
    let n = opts.scan_points.max(2);
    for j in 0..n {
        let t = j as f64 / (n - 1) as f64;
        let z = a + (b - a) * t;
        let v = f.eval(z)?;
        let s = f.scale(z)?.max(f64::MIN_POSITIVE);
        *evals += 1;
        if v.norm() / s < opts.boundary_zero_rel {
            return Err(Error::BoundaryZero(format!(
                "|f|/scale = {:.3e} at edge point {z}",
                v.norm() / s
            )));
        }
    }
    Ok(())
}

/// Certified winding number of `f` around `bx`.
///
/// Returns [`Error::BoundaryZero`] when a zero (numerically) touches the
/// boundary and [`Error::WindingNonConvergence`] when the contour
/// quadrature cannot certify an integer.
pub fn winding_count<F: AnalyticFn + ?Sized>(
    f: &F,
    bx: &SearchBox,
    opts: &WindingOptions,
) -> Result<WindingCount> {
    let quad = EdgeQuad::new();
    let corners = bx.corners();
    let mut total = C64::new(0.0, 0.0);
    let mut evals = 0usize;
    for i in 0..4 {
        let a = corners[i];
        let b = corners[(i + 1) % 4];
        scan_edge(f, a, b, opts, &mut evals)?;
        total += integrate_edge(f, a, b, &quad, opts, &mut evals)?;
    }
    // total = 2 pi i * winding for analytic f.
    let raw = total / C64::new(0.0, TAU);
    let nearest = raw.re.round();
    let defect = (raw - nearest).norm();
    if defect > opts.certify_defect {
        return Err(Error::WindingNonConvergence(format!(
            "contour integral {raw} is {defect:.3} winding units from the \
             nearest integer (certification limit {})",
            opts.certify_defect
        )));
    }
    Ok(WindingCount { winding: nearest as i64, defect, evaluations: evals })
}

/// Controls for the subdivision root search.
#[derive(Debug, Clone)]
pub struct RootFinderOptions {
    pub winding: WindingOptions,
    /// Boxes are not subdivided below this diameter; an unresolved
    /// cluster at this size is reported as non-convergence.
    pub min_box_diameter: f64,
    /// Newton step acceptance threshold, relative to `1 + |k|`.
    pub newton_tol: f64,
    pub max_newton_iterations: u32,
    /// Safety cap on examined boxes.
    pub max_boxes: usize,
    /// Cap on outer-box inflations when zeros touch the requested
    /// boundary.
    pub max_inflations: u32,
    /// Half-side cap for the per-root verification box, relative to
    /// `1 + |k|`.
    pub verify_radius: f64,
}

impl Default for RootFinderOptions {
    fn default() -> Self {
        RootFinderOptions {
            winding: WindingOptions::default(),
            min_box_diameter: 1e-6,
            newton_tol: 1e-13,
            max_newton_iterations: 50,
            max_boxes: 40_000,
            max_inflations: 12,
            verify_radius: 1e-4,
        }
    }
}

/// A certified root.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RootRecord {
    pub location: C64,
    pub multiplicity: u32,
    /// `|f(location)| / scale(location)`.
    pub residual: f64,
    pub newton_iterations: u32,
    /// The subdivision box that resolved this root.
    pub enclosure: SearchBox,
}

/// Result of a root search over a box.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RootSearchReport {
    pub roots: Vec<RootRecord>,
    /// Winding number of the (possibly inflated) search box; equals the
    /// sum of multiplicities by construction.
    pub total_winding: i64,
    /// The box actually searched (inflated from the request when zeros
    /// touched its boundary).
    pub search_box: SearchBox,
    pub inflations: u32,
    pub boxes_examined: usize,
    pub evaluations: usize,
}

/// Multiplicity-aware Newton iteration `k <- k - m f / f'` from `start`.
/// Soft-fails (returns `None`) on divergence, stagnation, or evaluation
/// errors, in which case the caller subdivides instead.
fn newton_polish<F: AnalyticFn + ?Sized>(
    f: &F,
    start: C64,
    m: i64,
    guard: &SearchBox,
    opts: &RootFinderOptions,
) -> Option<(C64, f64, u32)> {
    let mf = m as f64;
    let mut k = start;
    for it in 0..opts.max_newton_iterations {
        let (v, d) = f.eval_with_derivative(k).ok()?;
        let s = f.scale(k).ok()?.max(f64::MIN_POSITIVE);
        if v.norm() / s <= 1e-11 && (d.norm() * opts.newton_tol * (1.0 + k.norm()) >= v.norm() * mf
            || d.norm() == 0.0)
        {
            // Already at the root to full precision (covers exact multiple
            // roots where f' vanishes too).
            return Some((k, v.norm() / s, it));
        }
        if d.norm() == 0.0 {
            return None;
        }
        let step = v / d * mf;
        let next = k - step;
        if !guard.contains(next) && !guard.inflate(3.0).contains(next) {
            return None;
        }
        if step.norm() <= opts.newton_tol * (1.0 + k.norm()) {
            let (v1, _) = f.eval_with_derivative(next).ok()?;
            let s1 = f.scale(next).ok()?.max(f64::MIN_POSITIVE);
            return Some((next, v1.norm() / s1, it + 1));
        }
        k = next;
    }
    None
}

/// Try to resolve box `bx` with winding `m` as a single root cluster:
/// Newton from the center, then an independent winding certificate on a
/// small box around the candidate. Returns `None` when the box needs
/// subdividing.
fn try_resolve<F: AnalyticFn + ?Sized>(
    f: &F,
    bx: &SearchBox,
    m: i64,
    opts: &RootFinderOptions,
    evals: &mut usize,
) -> Result<Option<RootRecord>> {
    let Some((k, residual, iters)) = newton_polish(f, bx.center(), m, bx, opts) else {
        return Ok(None);
    };
    if !bx.contains(k) {
        return Ok(None);
    }
    // Verification box: small enough to isolate this cluster once
    // subdivision has separated roots, large enough that the contour stays
    // clear of rounding noise near high-multiplicity roots.
    let mut rho = (opts.verify_radius * (1.0 + k.norm()))
        .min(0.3 * bx.diameter())
        .max(1e-7);
    for _ in 0..4 {
        match winding_count(f, &SearchBox::square_around(k, rho), &opts.winding) {
            Ok(count) => {
                *evals += count.evaluations;
                if count.winding == m {
                    return Ok(Some(RootRecord {
                        location: k,
                        multiplicity: m as u32,
                        residual,
                        newton_iterations: iters,
                        enclosure: *bx,
                    }));
                }
                return Ok(None);
            }
            Err(Error::BoundaryZero(_)) => {
                // Another zero touches the verification contour: nudge the
                // radius deterministically and retry.
                rho *= 1.0 + 1e-3 / GOLDEN;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(None)
}

/// Split `bx` into two exactly partitioning children with certified
/// windings, moving the split line by golden-ratio-derived offsets when a
/// zero sits on it.
fn split_with_certified_children<F: AnalyticFn + ?Sized>(
    f: &F,
    bx: &SearchBox,
    opts: &RootFinderOptions,
    evals: &mut usize,
) -> Result<[(SearchBox, i64); 2]> {
    for attempt in 0..10u32 {
        // 0.5, then 0.5 +/- j * 0.0309.. (golden-scaled), all within
        // (0.2, 0.8) so children stay comparably sized.
        let j = attempt.div_ceil(2) as f64;
        let sign = if attempt % 2 == 1 { 1.0 } else { -1.0 };
        let t = 0.5 + sign * j * (0.05 / GOLDEN);
        let (left, right) = bx.split_at(t);
        let wl = match winding_count(f, &left, &opts.winding) {
            Ok(c) => c,
            Err(Error::BoundaryZero(_)) => continue,
            Err(e) => return Err(e),
        };
        let wr = match winding_count(f, &right, &opts.winding) {
            Ok(c) => c,
            Err(Error::BoundaryZero(_)) => continue,
            Err(e) => return Err(e),
        };
        *evals += wl.evaluations + wr.evaluations;
        return Ok([(left, wl.winding), (right, wr.winding)]);
    }
    Err(Error::BoundaryZero(format!(
        "could not place a zero-free split line in box re {:?} im {:?}",
        bx.re_range(),
        bx.im_range()
    )))
}

/// Locate all roots of `f` in `bx` with certified multiplicities.
///
/// The outer winding number is computed first (inflating the box by a
/// fixed tiny factor when a zero touches the requested boundary); the box
/// is then subdivided until each piece is resolved by a Newton candidate
/// whose own small verification contour reproduces the piece's winding.
/// Winding is conserved exactly across subdivisions, so the sum of
/// reported multiplicities equals the outer winding number.
pub fn find_roots<F: AnalyticFn + ?Sized>(
    f: &F,
    bx: &SearchBox,
    opts: &RootFinderOptions,
) -> Result<RootSearchReport> {
    let mut top = *bx;
    let mut inflations = 0u32;
    let mut evaluations = 0usize;
    let top_count = loop {
        match winding_count(f, &top, &opts.winding) {
            Ok(c) => break c,
            Err(Error::BoundaryZero(_)) if inflations < opts.max_inflations => {
                inflations += 1;
                top = top.inflate(1.0 + 1e-3 / GOLDEN);
            }
            Err(e) => return Err(e),
        }
    };
    evaluations += top_count.evaluations;

    let mut roots: Vec<RootRecord> = Vec::new();
    let mut stack = vec![(top, top_count.winding)];
    let mut boxes_examined = 0usize;
    while let Some((piece, m)) = stack.pop() {
        if m == 0 {
            continue;
        }
        if m < 0 {
            return Err(Error::WindingNonConvergence(format!(
                "negative winding {m} for an analytic function in box re {:?} \
                 im {:?} — quadrature failure",
                piece.re_range(),
                piece.im_range()
            )));
        }
        boxes_examined += 1;
        if boxes_examined > opts.max_boxes {
            return Err(Error::NonConvergence(format!(
                "root search exceeded the box budget ({})",
                opts.max_boxes
            )));
        }
        if let Some(rec) = try_resolve(f, &piece, m, opts, &mut evaluations)? {
            roots.push(rec);
            continue;
        }
        if piece.diameter() <= opts.min_box_diameter {
            return Err(Error::NonConvergence(format!(
                "unresolved root cluster of winding {m} in box re {:?} im {:?} \
                 at the minimum box diameter",
                piece.re_range(),
                piece.im_range()
            )));
        }
        let children = split_with_certified_children(f, &piece, opts, &mut evaluations)?;
        let child_sum: i64 = children.iter().map(|c| c.1).sum();
        if child_sum != m {
            return Err(Error::WindingNonConvergence(format!(
                "children windings sum to {child_sum} but the parent has {m}"
            )));
        }
        stack.extend(children);
    }

    roots.sort_by(|a, b| {
        (a.location.re, a.location.im)
            .partial_cmp(&(b.location.re, b.location.im))
            .unwrap()
    });
    let mult_sum: i64 = roots.iter().map(|r| r.multiplicity as i64).sum();
    debug_assert_eq!(mult_sum, top_count.winding);
    Ok(RootSearchReport {
        roots,
        total_winding: top_count.winding,
        search_box: top,
        inflations,
        boxes_examined,
        evaluations,
    })
}

/// One point of the eigenvalue counting function.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CountPoint {
    /// Right edge of the counted real interval.
    pub k_max: f64,
    /// Sum of multiplicities in the box.
    pub count: u64,
    /// Number of distinct roots in the box.
    pub distinct: usize,
}

/// Counting function `K -> #roots in [re_min, K] x [-im_half_width,
/// im_half_width]` for each requested `K` (each evaluated by a full
/// certified search).
pub fn counting_function<F: AnalyticFn + ?Sized>(
    f: &F,
    re_min: f64,
    k_values: &[f64],
    im_half_width: f64,
    opts: &RootFinderOptions,
) -> Result<Vec<CountPoint>> {
    let mut out = Vec::with_capacity(k_values.len());
    for &k_max in k_values {
        let bx = SearchBox::new(re_min, k_max, -im_half_width, im_half_width)?;
        let report = find_roots(f, &bx, opts)?;
        out.push(CountPoint {
            k_max,
            count: report.roots.iter().map(|r| r.multiplicity as u64).sum(),
            distinct: report.roots.len(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ball_analytic::build_determinant;
    use crate::medium::MediumProfile;
    use crate::modes::{ModeIndex, Polarization};
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    /// Test adapter: an analytic function given by a closure returning
    /// (value, derivative).
    struct Fn2<F: Fn(C64) -> (C64, C64)>(F);

    impl<F: Fn(C64) -> (C64, C64)> AnalyticFn for Fn2<F> {
        fn eval(&self, k: C64) -> Result<C64> {
            Ok((self.0)(k).0)
        }
        fn eval_with_derivative(&self, k: C64) -> Result<(C64, C64)> {
            Ok((self.0)(k))
        }
    }

    #[test]
    fn winding_of_simple_linear_function() {
        let f = Fn2(|k| (k - c(2.0, 1.0), c(1.0, 0.0)));
        let bx = SearchBox::new(0.0, 4.0, -2.0, 2.0).unwrap();
        let w = winding_count(&f, &bx, &WindingOptions::default()).unwrap();
        assert_eq!(w.winding, 1);
        assert!(w.defect < 1e-10);
        let out = SearchBox::new(3.0, 4.0, -2.0, 2.0).unwrap();
        let w = winding_count(&f, &out, &WindingOptions::default()).unwrap();
        assert_eq!(w.winding, 0);
    }

    #[test]
    fn entire_function_without_zeros_counts_zero() {
        let f = Fn2(|k| (k.exp(), k.exp()));
        let bx = SearchBox::new(-3.0, 3.0, -3.0, 3.0).unwrap();
        let report = find_roots(&f, &bx, &RootFinderOptions::default()).unwrap();
        assert_eq!(report.total_winding, 0);
        assert!(report.roots.is_empty());
    }

    #[test]
    fn finds_simple_root_with_small_residual() {
        let f = Fn2(|k| (k - c(2.0, 1.0), c(1.0, 0.0)));
        let bx = SearchBox::new(0.0, 4.0, -2.0, 2.0).unwrap();
        let report = find_roots(&f, &bx, &RootFinderOptions::default()).unwrap();
        assert_eq!(report.roots.len(), 1);
        let r = &report.roots[0];
        assert!((r.location - c(2.0, 1.0)).norm() < 1e-12);
        assert_eq!(r.multiplicity, 1);
        assert!(r.residual < 1e-12);
    }

    #[test]
    fn resolves_double_root_at_box_center() {
        // The root sits exactly at the center of the search box, which is
        // also the first Newton start.
        let f = Fn2(|k| {
            let d = k - c(2.0, 0.0);
            (d * d, 2.0 * d)
        });
        let bx = SearchBox::new(1.0, 3.0, -1.0, 1.0).unwrap();
        let report = find_roots(&f, &bx, &RootFinderOptions::default()).unwrap();
        assert_eq!(report.total_winding, 2);
        assert_eq!(report.roots.len(), 1);
        assert_eq!(report.roots[0].multiplicity, 2);
        assert!((report.roots[0].location - c(2.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn separates_close_pair_of_simple_roots() {
        let (a, b) = (c(1.0, 0.0), c(1.05, 0.0));
        let f = Fn2(move |k| ((k - a) * (k - b), (k - a) + (k - b)));
        let bx = SearchBox::new(0.0, 2.0, -1.0, 1.0).unwrap();
        let report = find_roots(&f, &bx, &RootFinderOptions::default()).unwrap();
        assert_eq!(report.total_winding, 2);
        assert_eq!(report.roots.len(), 2);
        assert!((report.roots[0].location - a).norm() < 1e-10);
        assert!((report.roots[1].location - b).norm() < 1e-10);
        assert!(report.roots.iter().all(|r| r.multiplicity == 1));
    }

    #[test]
    fn boundary_zeros_trigger_deterministic_inflation() {
        // sin(pi k) has zeros at 0 and 2 exactly on the requested box
        // edges; the search must inflate and then find all three roots.
        let f = Fn2(|k| {
            let z = k * PI;
            (z.sin(), PI * z.cos())
        });
        let bx = SearchBox::new(0.0, 2.0, -0.8, 0.8).unwrap();
        let report = find_roots(&f, &bx, &RootFinderOptions::default()).unwrap();
        assert!(report.inflations >= 1);
        assert_eq!(report.total_winding, 3);
        let locs: Vec<f64> = report.roots.iter().map(|r| r.location.re).collect();
        for (found, expected) in locs.iter().zip([0.0, 1.0, 2.0]) {
            assert!((found - expected).abs() < 1e-10, "roots {locs:?}");
        }
        assert!(report.roots.iter().all(|r| r.location.im.abs() < 1e-10));
    }

    #[test]
    fn determinant_roots_match_known_values() {
        // TE degree 1 on the constant ball with index 4 has real roots
        // exactly at multiples of pi, plus conjugate complex pairs; the
        // pair inside this box was located independently with mpmath.
        let medium = MediumProfile::constant(1.0, c(4.0, 0.0)).unwrap();
        let mode = ModeIndex::new(1, Polarization::TE).unwrap();
        let w = build_determinant(mode, &medium).unwrap();
        let bx = SearchBox::new(2.5, 7.0, -1.0, 1.0).unwrap();
        let report = find_roots(&w, &bx, &RootFinderOptions::default()).unwrap();
        assert_eq!(report.total_winding, 4);
        assert_eq!(report.roots.len(), 4);
        let expected = [
            c(PI, 0.0),
            c(4.5478341831117337, -0.6509818044649710),
            c(4.5478341831117337, 0.6509818044649710),
            c(2.0 * PI, 0.0),
        ];
        for (r, e) in report.roots.iter().zip(expected) {
            assert!(
                (r.location - e).norm() < 1e-10,
                "root {} vs expected {e}",
                r.location
            );
            assert_eq!(r.multiplicity, 1);
            assert!(r.residual < 1e-10, "residual {}", r.residual);
        }
    }

    #[test]
    fn counting_function_is_monotone() {
        let f = Fn2(|k| {
            let z = k * PI;
            (z.sin(), PI * z.cos())
        });
        let counts = counting_function(
            &f,
            0.3,
            &[1.5, 2.5, 3.5],
            0.5,
            &RootFinderOptions::default(),
        )
        .unwrap();
        let ns: Vec<u64> = counts.iter().map(|p| p.count).collect();
        assert_eq!(ns, vec![1, 2, 3]);
    }

    #[test]
    fn invalid_boxes_are_rejected() {
        assert!(SearchBox::new(1.0, 1.0, 0.0, 1.0).is_err());
        assert!(SearchBox::new(0.0, 1.0, 2.0, 1.0).is_err());
        assert!(SearchBox::new(f64::NAN, 1.0, 0.0, 1.0).is_err());
    }
}
