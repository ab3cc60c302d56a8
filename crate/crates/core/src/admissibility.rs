//! Admissible resolvent rays in the complex shift plane.
//!
//! The pair system with spectral shift `z = r e^{i theta}` stays uniformly
//! invertible along the ray `theta` provided the direction avoids a finite
//! forbidden set of angles determined by the medium:
//!
//! * the contrast cone: the closure of `{ arg(1 / n(r)) : r in [0, R] }`,
//! * the angle `0` (positive real axis),
//! * the boundary ratio angle `arg((n_G + 1) / n_G)` for the shell value
//!   `n_G`.
//!
//! `contrast_cone` computes these sets exactly for the supported profile
//! shapes. `choose_ray` picks the admissible direction nearest a preferred
//! angle with a safety margin, and, when the contrast cone fits inside a
//! quarter-turn sector, also constructs a finite family of admissible rays
//! whose consecutive angular gaps (including the wraparound gap) are all
//! strictly below `pi / 4`; such a family covers the plane densely enough for
//! ray-wise spectral arguments with square-summable resolvent tails.

use crate::medium::{MediumProfile, RadialIndex};
use crate::{C64, Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI, TAU};

/// Map an angle to the canonical branch `[0, 2 pi)`.
pub fn canonical_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    // rem_euclid may return TAU itself when `a` is a tiny negative number.
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// A closed arc on the angle circle, stored as a canonical start angle in
/// `[0, 2 pi)` plus a nonnegative width (counterclockwise). A zero-width arc
/// is a single forbidden direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleInterval {
    lo: f64,
    width: f64,
}

impl AngleInterval {
    /// Single forbidden direction.
    pub fn point(a: f64) -> Self {
        Self { lo: canonical_angle(a), width: 0.0 }
    }

    /// Closed arc spanning the shorter way between two directions.
    pub fn shorter_arc(a: f64, b: f64) -> Self {
        let a = canonical_angle(a);
        let b = canonical_angle(b);
        let forward = canonical_angle(b - a);
        if forward <= PI {
            Self { lo: a, width: forward }
        } else {
            Self { lo: b, width: TAU - forward }
        }
    }

    /// Arc from `lo` extending counterclockwise by `width`.
    pub fn from_lo_width(lo: f64, width: f64) -> Self {
        Self { lo: canonical_angle(lo), width: width.clamp(0.0, TAU) }
    }

    /// Canonical start angle.
    pub fn lo(&self) -> f64 {
        self.lo
    }

    /// Arc width.
    pub fn width(&self) -> f64 {
        self.width
    }

    /// Canonical end angle (may wrap past `2 pi` numerically; callers use
    /// circular arithmetic).
    pub fn hi(&self) -> f64 {
        self.lo + self.width
    }

    /// Whether the closed arc contains the direction `a`.
    pub fn contains(&self, a: f64) -> bool {
        canonical_angle(a - self.lo) <= self.width
    }

    /// Circular distance from the direction `a` to the closed arc.
    pub fn distance(&self, a: f64) -> f64 {
        let off = canonical_angle(a - self.lo);
        if off <= self.width {
            0.0
        } else {
            // Distance to the upper end going backwards, or to the start
            // going forwards around the circle.
            (off - self.width).min(TAU - off)
        }
    }
}

/// The contrast cone and the full forbidden set for a medium.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConeReport {
    /// Closure of `{ arg(1 / n(r)) }` as a finite union of closed arcs.
    pub cone: Vec<AngleInterval>,
    /// The boundary ratio direction `arg((n_G + 1) / n_G)`.
    pub boundary_ratio_angle: f64,
    /// Cone plus the two special directions, merged into disjoint arcs.
    pub forbidden: Vec<AngleInterval>,
    /// Width of the minimal closed arc enclosing the cone.
    pub cone_enclosing_width: f64,
}

fn arg_canonical(v: C64) -> f64 {
    canonical_angle(v.arg())
}

/// Merge a set of closed arcs into disjoint closed arcs (cyclic order).
fn merge_arcs(mut arcs: Vec<AngleInterval>) -> Vec<AngleInterval> {
    if arcs.is_empty() {
        return arcs;
    }
    if arcs.iter().any(|a| a.width >= TAU) {
        return vec![AngleInterval::from_lo_width(0.0, TAU)];
    }
    arcs.sort_by(|a, b| a.lo.partial_cmp(&b.lo).expect("finite angles"));
    // Unroll onto the line [0, 4 pi) and merge, then re-wrap.
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for arc in &arcs {
        let (s, e) = (arc.lo, arc.lo + arc.width);
        match merged.last_mut() {
            Some((_, le)) if s <= *le => {
                *le = le.max(e);
            }
            _ => merged.push((s, e)),
        }
    }
    // The last arc may wrap past 2 pi and swallow the first ones.
    while merged.len() > 1 {
        let (ls, le) = *merged.last().expect("nonempty");
        let (fs, fe) = merged[0];
        if le >= TAU && le - TAU >= fs {
            let new_end = le.max(fe + TAU);
            merged.remove(0);
            let last = merged.last_mut().expect("nonempty");
            *last = (ls, new_end);
        } else {
            break;
        }
    }
    if merged.len() == 1 && merged[0].1 - merged[0].0 >= TAU {
        return vec![AngleInterval::from_lo_width(0.0, TAU)];
    }
    merged
        .into_iter()
        .map(|(s, e)| AngleInterval::from_lo_width(s, e - s))
        .collect()
}

/// Width of the minimal closed arc enclosing the given arcs.
fn enclosing_width(arcs: &[AngleInterval]) -> f64 {
    let merged = merge_arcs(arcs.to_vec());
    if merged.is_empty() {
        return 0.0;
    }
    if merged.len() == 1 {
        return merged[0].width.min(TAU);
    }
    // The minimal enclosing arc is the complement of the largest gap
    // between consecutive merged arcs.
    let mut largest_gap = 0.0f64;
    for (i, arc) in merged.iter().enumerate() {
        let next = &merged[(i + 1) % merged.len()];
        let gap = canonical_angle(next.lo - arc.hi());
        largest_gap = largest_gap.max(gap);
    }
    TAU - largest_gap
}

/// Compute the contrast cone `{ arg(1 / n(r)) }` and the full forbidden set.
pub fn contrast_cone(medium: &MediumProfile) -> ConeReport {
    let cone: Vec<AngleInterval> = match medium.index() {
        RadialIndex::Constant { n0 } => vec![AngleInterval::point(arg_canonical(n0.inv()))],
        RadialIndex::Layered { values, .. } => {
            values.iter().map(|n| AngleInterval::point(arg_canonical(n.inv()))).collect()
        }
        RadialIndex::SmoothWithShell { n_center, n_shell, .. } => {
            // Along the blend the index traces the straight segment from
            // n_shell to n_center. For a segment n(t) = n_s + t d, the
            // derivative of arg n(t) is Im(conj(n) d) / |n|^2 whose numerator
            // Im(conj(n_s) d) is constant in t, so arg n is monotone along
            // the segment and the cone is the shorter arc between the
            // endpoint directions.
            vec![AngleInterval::shorter_arc(
                arg_canonical(n_center.inv()),
                arg_canonical(n_shell.inv()),
            )]
        }
    };
    let n_g = medium.n_boundary();
    let boundary_ratio_angle = arg_canonical((n_g + 1.0) / n_g);
    let mut forbidden = cone.clone();
    forbidden.push(AngleInterval::point(0.0));
    forbidden.push(AngleInterval::point(boundary_ratio_angle));
    let cone_enclosing_width = enclosing_width(&cone);
    ConeReport {
        cone,
        boundary_ratio_angle,
        forbidden: merge_arcs(forbidden),
        cone_enclosing_width,
    }
}

/// Options for ray selection.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RayOptions {
    /// Preferred direction (default `pi / 2`).
    pub preference: f64,
    /// Required angular distance from every forbidden arc (default `0.05`).
    pub margin: f64,
    /// Default radius along the ray at which shift points are produced
    /// (default `25.0`).
    pub onset_radius: f64,
}

impl Default for RayOptions {
    fn default() -> Self {
        Self { preference: FRAC_PI_2, margin: 0.05, onset_radius: 25.0 }
    }
}

/// A point `z = mu / h^2` on an admissible ray, with the unimodular direction
/// `mu = e^{i theta}` and the semiclassical parameter `h = |z|^{-1/2}`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ShiftPoint {
    pub theta: f64,
    pub z: C64,
    pub h: f64,
    pub mu: C64,
}

impl ShiftPoint {
    /// Build the shift at radius `r` along direction `theta`, keeping the
    /// identity `z = mu * h^{-2}` exact in floating point (with `h^{-2}`
    /// evaluated as `1 / (h * h)`).
    pub fn at_radius(theta: f64, r: f64) -> Result<Self> {
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::validation(format!("shift radius must be positive, got {r}")));
        }
        let mu = C64::from_polar(1.0, theta);
        let h = 1.0 / r.sqrt();
        let z = mu * (1.0 / (h * h));
        Ok(Self { theta, z, h, mu })
    }
}

/// A family of admissible ray directions with consecutive gaps below
/// `pi / 4`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RayFamily {
    /// Sorted canonical directions.
    pub angles: Vec<f64>,
    /// Margin actually maintained by the family members.
    pub margin: f64,
    /// Largest consecutive gap including the wraparound gap.
    pub max_gap: f64,
}

/// Result of ray selection.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RaySelection {
    /// Chosen admissible direction.
    pub theta: f64,
    /// Margin maintained by `theta`.
    pub margin: f64,
    /// Full forbidden set used for the selection.
    pub forbidden: Vec<AngleInterval>,
    /// Whether the contrast cone fits inside a closed arc of width below
    /// `pi / 4`.
    pub cone_in_quarter_turn: bool,
    /// Admissible ray family with gaps below `pi / 4`; present exactly when
    /// `cone_in_quarter_turn` holds.
    pub ray_family: Option<RayFamily>,
    /// Default radius for `shift()`.
    pub onset_radius: f64,
}

impl RaySelection {
    /// Unimodular ray direction `e^{i theta}`.
    pub fn mu(&self) -> C64 {
        C64::from_polar(1.0, self.theta)
    }

    /// Shift at the default onset radius.
    pub fn shift(&self) -> ShiftPoint {
        self.shift_at(self.onset_radius)
    }

    /// Shift at radius `r` along the chosen ray.
    pub fn shift_at(&self, r: f64) -> ShiftPoint {
        ShiftPoint::at_radius(self.theta, r).expect("onset radius validated at construction")
    }

    /// Shift with prescribed semiclassical parameter `h` (radius `h^{-2}`).
    pub fn shift_for_h(&self, h: f64) -> Result<ShiftPoint> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::validation(format!(
                "semiclassical parameter must be positive, got {h}"
            )));
        }
        let mu = C64::from_polar(1.0, self.theta);
        let z = mu * (1.0 / (h * h));
        Ok(ShiftPoint { theta: self.theta, z, h, mu })
    }
}

fn min_distance(forbidden: &[AngleInterval], a: f64) -> f64 {
    forbidden.iter().map(|arc| arc.distance(a)).fold(f64::INFINITY, f64::min)
}

fn is_admissible(forbidden: &[AngleInterval], a: f64, margin: f64) -> bool {
    min_distance(forbidden, a) >= margin
}

fn circular_distance(a: f64, b: f64) -> f64 {
    let d = canonical_angle(a - b);
    d.min(TAU - d)
}

/// Admissible arcs: complement of the forbidden set inflated by `margin`.
fn admissible_arcs(forbidden: &[AngleInterval], margin: f64) -> Vec<AngleInterval> {
    let inflated: Vec<AngleInterval> = forbidden
        .iter()
        .map(|arc| AngleInterval::from_lo_width(arc.lo - margin, arc.width + 2.0 * margin))
        .collect();
    let merged = merge_arcs(inflated);
    if merged.len() == 1 && merged[0].width >= TAU {
        return Vec::new();
    }
    if merged.is_empty() {
        return vec![AngleInterval::from_lo_width(0.0, TAU)];
    }
    let mut arcs = Vec::with_capacity(merged.len());
    for (i, arc) in merged.iter().enumerate() {
        let next = &merged[(i + 1) % merged.len()];
        let gap = if merged.len() == 1 {
            TAU - arc.width
        } else {
            canonical_angle(next.lo - arc.hi())
        };
        if gap > 0.0 {
            arcs.push(AngleInterval::from_lo_width(arc.hi(), gap));
        }
    }
    arcs
}

/// Build an admissible ray family with all consecutive gaps strictly below
/// `pi / 4`, maintaining `margin` distance from the forbidden set.
fn build_ray_family(forbidden: &[AngleInterval], margin: f64) -> Option<RayFamily> {
    const QUARTER: f64 = PI / 4.0;
    let mut m = margin;
    for _ in 0..40 {
        let arcs = admissible_arcs(forbidden, m);
        if !arcs.is_empty() {
            // Every blocked gap between consecutive admissible arcs must be
            // shorter than a quarter turn, otherwise two rays cannot
            // straddle it.
            let blocked_ok = if arcs.len() == 1 && arcs[0].width >= TAU {
                true
            } else {
                arcs.iter().enumerate().all(|(i, arc)| {
                    let next = &arcs[(i + 1) % arcs.len()];
                    canonical_angle(next.lo - arc.hi()) < QUARTER * 0.999
                })
            };
            if blocked_ok {
                let step = 0.9 * QUARTER;
                let mut angles = Vec::new();
                for arc in &arcs {
                    if arc.width >= TAU {
                        // Free circle: evenly spaced rays.
                        let count = (TAU / step).ceil() as usize;
                        for j in 0..count {
                            angles.push(canonical_angle(TAU * j as f64 / count as f64));
                        }
                        break;
                    }
                    let pieces = (arc.width / step).ceil().max(1.0) as usize;
                    for j in 0..=pieces {
                        angles
                            .push(canonical_angle(arc.lo + arc.width * j as f64 / pieces as f64));
                    }
                }
                angles.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
                angles.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
                if angles.len() >= 2 {
                    let mut max_gap = 0.0f64;
                    for (i, &a) in angles.iter().enumerate() {
                        let b = angles[(i + 1) % angles.len()];
                        max_gap = max_gap.max(canonical_angle(b - a));
                    }
                    let all_admissible =
                        angles.iter().all(|&a| is_admissible(forbidden, a, m * 0.999));
                    if max_gap < QUARTER && all_admissible {
                        return Some(RayFamily { angles, margin: m, max_gap });
                    }
                }
            }
        }
        m *= 0.5;
        if m < 1e-9 {
            break;
        }
    }
    None
}

/// Choose the admissible ray direction nearest the preferred angle.
///
/// Returns `NoAdmissibleRay` when the margin-inflated forbidden set covers
/// the whole circle.
pub fn choose_ray(medium: &MediumProfile, options: &RayOptions) -> Result<RaySelection> {
    if !(options.margin.is_finite() && options.margin >= 0.0) {
        return Err(Error::validation(format!(
            "ray margin must be nonnegative, got {}",
            options.margin
        )));
    }
    if !(options.onset_radius.is_finite() && options.onset_radius > 0.0) {
        return Err(Error::validation(format!(
            "onset radius must be positive, got {}",
            options.onset_radius
        )));
    }
    let report = contrast_cone(medium);
    let forbidden = report.forbidden.clone();
    let pref = canonical_angle(options.preference);
    let margin = options.margin;

    let theta = if is_admissible(&forbidden, pref, margin) {
        pref
    } else {
        // The nearest admissible direction lies on the margin boundary of
        // some forbidden arc.
        let mut best: Option<(f64, f64)> = None;
        for arc in &forbidden {
            for cand in [canonical_angle(arc.lo - margin), canonical_angle(arc.hi() + margin)] {
                if is_admissible(&forbidden, cand, margin * 0.999_999) {
                    let d = circular_distance(cand, pref);
                    let better = match best {
                        None => true,
                        Some((bd, ba)) => d < bd - 1e-15 || (d < bd + 1e-15 && cand < ba),
                    };
                    if better {
                        best = Some((d, cand));
                    }
                }
            }
        }
        match best {
            Some((_, cand)) => cand,
            None => {
                return Err(Error::NoAdmissibleRay(format!(
                    "no direction stays {margin} away from the forbidden set \
                     {forbidden:?}"
                )))
            }
        }
    };

    let cone_in_quarter_turn = report.cone_enclosing_width < PI / 4.0;
    let ray_family =
        if cone_in_quarter_turn { build_ray_family(&forbidden, margin) } else { None };

    Ok(RaySelection {
        theta,
        margin,
        forbidden,
        cone_in_quarter_turn,
        ray_family,
        onset_radius: options.onset_radius,
    })
}
