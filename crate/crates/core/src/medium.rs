//! Radially stratified media on a ball.
//!
//! A medium is a complex-valued refractive-index coefficient `n(r)` on the
//! ball of radius `R`, constant on a shell `[R - delta, R]` at the boundary.
//! Three shapes are supported:
//!
//! * constant index on the whole ball,
//! * piecewise-constant layers (the outermost layer is the shell),
//! * a smooth interior profile that blends into a constant shell with two
//!   continuous derivatives at the junction.
//!
//! Invariants enforced at construction: `Re n > 0` everywhere, the boundary
//! value satisfies `n != 1` (zero contrast in the shell makes the pair system
//! degenerate), and the shell width is strictly positive.

use crate::{C64, Error, Result};
use serde::{Deserialize, Serialize};

/// Minimum allowed distance between the boundary index and 1.
pub const MIN_BOUNDARY_CONTRAST: f64 = 1e-9;

/// Shape of the radial index coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RadialIndex {
    /// `n(r) = n0` on the whole ball.
    Constant { n0: C64 },
    /// Piecewise-constant layers: `values[i]` on `(interfaces[i-1], interfaces[i])`
    /// with `interfaces` strictly increasing inside `(0, R)`; `values` has one
    /// more entry than `interfaces` and its last entry is the shell value.
    Layered { interfaces: Vec<f64>, values: Vec<C64> },
    /// Smooth interior profile blended into a constant shell:
    /// `n(r) = n_shell + (n_center - n_shell) * (1 - (r/core_radius)^2)^3`
    /// for `r < core_radius` and `n(r) = n_shell` beyond. The blend has two
    /// vanishing derivatives at the junction and zero slope at the origin.
    SmoothWithShell { n_center: C64, n_shell: C64, core_radius: f64 },
}

/// A radially stratified medium on the ball of radius `radius`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MediumProfile {
    radius: f64,
    index: RadialIndex,
}

fn check_positive_real_part(n: C64, what: &str) -> Result<()> {
    if !n.re.is_finite() || !n.im.is_finite() {
        return Err(Error::validation(format!("{what} must be finite, got {n}")));
    }
    if n.re <= 0.0 {
        return Err(Error::validation(format!(
            "{what} must have positive real part, got {n}"
        )));
    }
    Ok(())
}

fn check_boundary_contrast(n_gamma: C64) -> Result<()> {
    if (n_gamma - C64::new(1.0, 0.0)).norm() < MIN_BOUNDARY_CONTRAST {
        return Err(Error::validation(format!(
            "boundary index {n_gamma} is too close to 1; the index must differ \
             from 1 in the boundary shell (zero contrast there makes the pair \
             system degenerate)"
        )));
    }
    Ok(())
}

fn check_radius(radius: f64) -> Result<()> {
    if !radius.is_finite() || radius <= 0.0 {
        return Err(Error::validation(format!(
            "ball radius must be positive and finite, got {radius}"
        )));
    }
    Ok(())
}

impl MediumProfile {
    /// Constant index `n0` on the ball of radius `radius`.
    pub fn constant(radius: f64, n0: C64) -> Result<Self> {
        check_radius(radius)?;
        check_positive_real_part(n0, "index")?;
        check_boundary_contrast(n0)?;
        Ok(Self { radius, index: RadialIndex::Constant { n0 } })
    }

    /// Piecewise-constant layers. `interfaces` are the interior layer
    /// boundaries (strictly increasing, inside `(0, radius)`); `values[i]` is
    /// the index between `interfaces[i-1]` and `interfaces[i]`, so `values`
    /// must have `interfaces.len() + 1` entries and the last one is the shell
    /// value at the boundary.
    pub fn layered(radius: f64, interfaces: Vec<f64>, values: Vec<C64>) -> Result<Self> {
        check_radius(radius)?;
        if values.len() != interfaces.len() + 1 {
            return Err(Error::validation(format!(
                "layered medium needs one more value than interfaces, got {} values \
                 for {} interfaces",
                values.len(),
                interfaces.len()
            )));
        }
        let mut prev = 0.0;
        for &b in &interfaces {
            if !b.is_finite() || b <= prev || b >= radius {
                return Err(Error::validation(format!(
                    "layer interfaces must be strictly increasing inside (0, {radius}), \
                     got {interfaces:?}"
                )));
            }
            prev = b;
        }
        for &v in &values {
            check_positive_real_part(v, "layer index")?;
        }
        let n_gamma = *values.last().expect("at least one layer value");
        check_boundary_contrast(n_gamma)?;
        Ok(Self { radius, index: RadialIndex::Layered { interfaces, values } })
    }

    /// Smooth interior profile blended into a constant shell of value
    /// `n_shell` outside `core_radius`.
    pub fn smooth_with_shell(
        radius: f64,
        n_center: C64,
        n_shell: C64,
        core_radius: f64,
    ) -> Result<Self> {
        check_radius(radius)?;
        if !core_radius.is_finite() || core_radius <= 0.0 || core_radius >= radius {
            return Err(Error::validation(format!(
                "core radius must lie strictly inside (0, {radius}), got {core_radius}"
            )));
        }
        // The profile traces the straight segment between n_center and
        // n_shell, so positivity of the real part at both ends covers every
        // radius.
        check_positive_real_part(n_center, "central index")?;
        check_positive_real_part(n_shell, "shell index")?;
        check_boundary_contrast(n_shell)?;
        Ok(Self { radius, index: RadialIndex::SmoothWithShell { n_center, n_shell, core_radius } })
    }

    /// Ball radius `R`.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// The index shape.
    pub fn index(&self) -> &RadialIndex {
        &self.index
    }

    /// Index coefficient `n(r)`. Values of `r` outside `[0, R]` are clamped
    /// to the shell value.
    pub fn n(&self, r: f64) -> C64 {
        match &self.index {
            RadialIndex::Constant { n0 } => *n0,
            RadialIndex::Layered { interfaces, values } => {
                for (i, &b) in interfaces.iter().enumerate() {
                    if r < b {
                        return values[i];
                    }
                }
                *values.last().expect("at least one layer value")
            }
            RadialIndex::SmoothWithShell { n_center, n_shell, core_radius } => {
                if r >= *core_radius {
                    *n_shell
                } else {
                    let s2 = (r / core_radius).powi(2);
                    let blend = (1.0 - s2).powi(3);
                    n_shell + (n_center - n_shell) * blend
                }
            }
        }
    }

    /// Contrast `m(r) = n(r) - 1`.
    pub fn m(&self, r: f64) -> C64 {
        self.n(r) - C64::new(1.0, 0.0)
    }

    /// Radial derivative `m'(r) = n'(r)`. Zero for piecewise-constant media
    /// (away from interfaces the coefficient is locally constant; the jump at
    /// an interface is handled by the routes that support layered media).
    pub fn m_prime(&self, r: f64) -> C64 {
        match &self.index {
            RadialIndex::Constant { .. } | RadialIndex::Layered { .. } => C64::new(0.0, 0.0),
            RadialIndex::SmoothWithShell { n_center, n_shell, core_radius } => {
                if r >= *core_radius {
                    C64::new(0.0, 0.0)
                } else {
                    let s = r / core_radius;
                    let d_blend = -6.0 * s * (1.0 - s * s).powi(2) / core_radius;
                    (n_center - n_shell) * d_blend
                }
            }
        }
    }

    /// Boundary (shell) value of the index.
    pub fn n_boundary(&self) -> C64 {
        match &self.index {
            RadialIndex::Constant { n0 } => *n0,
            RadialIndex::Layered { values, .. } => *values.last().expect("nonempty"),
            RadialIndex::SmoothWithShell { n_shell, .. } => *n_shell,
        }
    }

    /// Width of the constant shell at the boundary.
    pub fn shell_width(&self) -> f64 {
        match &self.index {
            RadialIndex::Constant { .. } => self.radius,
            RadialIndex::Layered { interfaces, .. } => {
                self.radius - interfaces.last().copied().unwrap_or(0.0)
            }
            RadialIndex::SmoothWithShell { core_radius, .. } => self.radius - core_radius,
        }
    }

    /// Interior radii where the coefficient switches pieces (layer
    /// interfaces, or the core/shell junction). Empty for constant media.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.index {
            RadialIndex::Constant { .. } => Vec::new(),
            RadialIndex::Layered { interfaces, .. } => interfaces.clone(),
            RadialIndex::SmoothWithShell { core_radius, .. } => vec![*core_radius],
        }
    }

    /// True when the coefficient is constant within pieces (constant or
    /// layered) so the closed-form route applies.
    pub fn is_piecewise_constant(&self) -> bool {
        matches!(
            self.index,
            RadialIndex::Constant { .. } | RadialIndex::Layered { .. }
        )
    }

    /// True when the coefficient is continuously differentiable on the whole
    /// ball (constant or smooth-with-shell) so collocation differentiation of
    /// the coefficient is meaningful.
    pub fn is_smooth(&self) -> bool {
        matches!(
            self.index,
            RadialIndex::Constant { .. } | RadialIndex::SmoothWithShell { .. }
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn constant_profile_evaluates_everywhere() {
        let med = MediumProfile::constant(1.0, c(4.0, 0.0)).unwrap();
        assert_eq!(med.n(0.0), c(4.0, 0.0));
        assert_eq!(med.n(0.7), c(4.0, 0.0));
        assert_eq!(med.n(1.0), c(4.0, 0.0));
        assert_eq!(med.m(0.5), c(3.0, 0.0));
        assert_eq!(med.m_prime(0.5), c(0.0, 0.0));
        assert_eq!(med.n_boundary(), c(4.0, 0.0));
        assert_eq!(med.shell_width(), 1.0);
        assert!(med.breakpoints().is_empty());
        assert!(med.is_piecewise_constant());
        assert!(med.is_smooth());
    }

    #[test]
    fn unit_index_is_rejected() {
        let err = MediumProfile::constant(1.0, c(1.0, 0.0)).unwrap_err();
        assert!(err.is_validation(), "expected validation error, got {err}");
        let err = MediumProfile::layered(1.0, vec![0.5], vec![c(2.0, 0.0), c(1.0, 0.0)])
            .unwrap_err();
        assert!(err.is_validation());
        let err = MediumProfile::smooth_with_shell(1.0, c(2.0, 0.0), c(1.0, 0.0), 0.5)
            .unwrap_err();
        assert!(err.is_validation());
    }

    #[test]
    fn nonpositive_real_part_is_rejected() {
        assert!(MediumProfile::constant(1.0, c(-2.0, 1.0)).is_err());
        assert!(MediumProfile::constant(1.0, c(0.0, 1.0)).is_err());
        assert!(
            MediumProfile::layered(1.0, vec![0.5], vec![c(-1.0, 0.0), c(4.0, 0.0)]).is_err()
        );
    }

    #[test]
    fn layered_lookup_uses_half_open_pieces() {
        let med = MediumProfile::layered(
            2.0,
            vec![0.5, 1.2],
            vec![c(2.0, 0.0), c(3.0, 0.5), c(4.0, 0.0)],
        )
        .unwrap();
        assert_eq!(med.n(0.0), c(2.0, 0.0));
        assert_eq!(med.n(0.49), c(2.0, 0.0));
        assert_eq!(med.n(0.5), c(3.0, 0.5));
        assert_eq!(med.n(1.19), c(3.0, 0.5));
        assert_eq!(med.n(1.2), c(4.0, 0.0));
        assert_eq!(med.n(2.0), c(4.0, 0.0));
        assert_eq!(med.n_boundary(), c(4.0, 0.0));
        assert!((med.shell_width() - 0.8).abs() < 1e-15);
        assert_eq!(med.breakpoints(), vec![0.5, 1.2]);
        assert!(med.is_piecewise_constant());
        assert!(!med.is_smooth());
    }

    #[test]
    fn layered_validation_catches_bad_interfaces() {
        // Not increasing.
        assert!(MediumProfile::layered(
            1.0,
            vec![0.6, 0.4],
            vec![c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)]
        )
        .is_err());
        // Interface at the outer boundary leaves no shell.
        assert!(MediumProfile::layered(1.0, vec![1.0], vec![c(2.0, 0.0), c(4.0, 0.0)]).is_err());
        // Wrong value count.
        assert!(MediumProfile::layered(1.0, vec![0.5], vec![c(2.0, 0.0)]).is_err());
    }

    #[test]
    fn smooth_profile_blends_with_flat_junction() {
        let n_c = c(6.0, 0.5);
        let n_s = c(2.0, 0.0);
        let med = MediumProfile::smooth_with_shell(1.0, n_c, n_s, 0.75).unwrap();
        assert_eq!(med.n(0.0), n_c);
        assert_eq!(med.n(0.75), n_s);
        assert_eq!(med.n(0.9), n_s);
        assert_eq!(med.m_prime(0.8), c(0.0, 0.0));
        // Zero slope at the origin and at the junction.
        assert_eq!(med.m_prime(0.0), c(0.0, 0.0));
        let h = 1e-5;
        let near_junction = med.m_prime(0.75 - h);
        assert!(near_junction.norm() < 1e-7, "slope at junction: {near_junction}");
        // Finite-difference check of m' in the interior.
        let r = 0.4;
        let fd = (med.n(r + h) - med.n(r - h)) / (2.0 * h);
        assert!((fd - med.m_prime(r)).norm() < 1e-8 * (1.0 + fd.norm()));
        assert!((med.shell_width() - 0.25).abs() < 1e-15);
        assert_eq!(med.breakpoints(), vec![0.75]);
        assert!(!med.is_piecewise_constant());
        assert!(med.is_smooth());
    }

    #[test]
    fn smooth_profile_stays_on_segment() {
        // The blend factor lies in [0, 1], so n(r) stays on the segment
        // between the two endpoint values.
        let n_c = c(1.0, 2.0);
        let n_s = c(4.0, -1.0);
        let med = MediumProfile::smooth_with_shell(1.0, n_c, n_s, 0.6).unwrap();
        for i in 0..100 {
            let r = 0.6 * i as f64 / 99.0;
            let n = med.n(r);
            // Solve n = n_s + t (n_c - n_s) for t, check t real in [0, 1].
            let t = (n - n_s) / (n_c - n_s);
            assert!(t.im.abs() < 1e-14);
            assert!((-1e-14..=1.0 + 1e-14).contains(&t.re), "t = {t}");
        }
    }

    #[test]
    fn serde_round_trip() {
        let med = MediumProfile::layered(
            1.5,
            vec![0.5],
            vec![c(2.0, 0.1), c(4.0, 0.0)],
        )
        .unwrap();
        let json = serde_json::to_string(&med).unwrap();
        let back: MediumProfile = serde_json::from_str(&json).unwrap();
        assert_eq!(med, back);
    }
}
