//! Dense real-coefficient polynomials in one variable.
//!
//! Manufactured solutions, divergence-free source construction, and the
//! smooth probe generators all need radial profiles whose derivatives and
//! moments are available in closed form, independently of any grid.  This
//! module provides that small amount of exact symbolic arithmetic.

/// A polynomial `p(r) = Σ coeffs[j] · r^j` with real coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly {
    coeffs: Vec<f64>,
}

impl Poly {
    /// Builds a polynomial from coefficients in increasing degree order.
    /// Trailing zeros are trimmed so `degree` is meaningful.
    pub fn new(coeffs: Vec<f64>) -> Self {
        let mut p = Poly { coeffs };
        p.trim();
        p
    }

    pub fn zero() -> Self {
        Poly { coeffs: vec![] }
    }

    pub fn constant(c: f64) -> Self {
        Poly::new(vec![c])
    }

    /// `c · r^degree`.
    pub fn monomial(degree: usize, c: f64) -> Self {
        let mut coeffs = vec![0.0; degree + 1];
        coeffs[degree] = c;
        Poly::new(coeffs)
    }

    fn trim(&mut self) {
        while matches!(self.coeffs.last(), Some(&c) if c == 0.0) {
            self.coeffs.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree of the polynomial; the zero polynomial reports degree 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Horner evaluation.
    pub fn eval(&self, r: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * r + c)
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly::zero();
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(j, &c)| j as f64 * c)
            .collect();
        Poly::new(coeffs)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|j| {
                self.coeffs.get(j).copied().unwrap_or(0.0)
                    + other.coeffs.get(j).copied().unwrap_or(0.0)
            })
            .collect();
        Poly::new(coeffs)
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Poly {
        Poly::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut coeffs = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Poly::new(coeffs)
    }

    /// Exact division by `r`; `None` when the constant term is nonzero.
    pub fn divide_by_r(&self) -> Option<Poly> {
        if self.is_zero() {
            return Some(Poly::zero());
        }
        if self.coeffs[0] != 0.0 {
            return None;
        }
        Some(Poly::new(self.coeffs[1..].to_vec()))
    }

    /// Exact moment `∫₀^R p(r) r² dr`.
    pub fn integral_r2(&self, radius: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(j, &c)| c * radius.powi(j as i32 + 3) / (j as f64 + 3.0))
            .sum()
    }

    /// `(1 + r·q(r))`-style composition helper: returns `p(αr)` for a scaled
    /// argument, useful for nondimensionalized profiles.
    pub fn scale_argument(&self, alpha: f64) -> Poly {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(j, &c)| c * alpha.powi(j as i32))
            .collect();
        Poly::new(coeffs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_and_evaluation() {
        // p = (1 + 2r)(3 - r) = 3 + 5r - 2r^2
        let p = Poly::new(vec![1.0, 2.0]).mul(&Poly::new(vec![3.0, -1.0]));
        assert_eq!(p.coeffs(), &[3.0, 5.0, -2.0]);
        assert!((p.eval(2.0) - (3.0 + 10.0 - 8.0)).abs() < 1e-15);
        let dp = p.derivative();
        assert_eq!(dp.coeffs(), &[5.0, -4.0]);
    }

    #[test]
    fn moment_matches_closed_form() {
        // ∫₀¹ (r + r³) r² dr = 1/4 + 1/6
        let p = Poly::new(vec![0.0, 1.0, 0.0, 1.0]);
        assert!((p.integral_r2(1.0) - (0.25 + 1.0 / 6.0)).abs() < 1e-15);
    }

    #[test]
    fn division_by_r_requires_zero_constant_term() {
        let p = Poly::new(vec![0.0, 4.0, 5.0]);
        assert_eq!(p.divide_by_r().unwrap().coeffs(), &[4.0, 5.0]);
        assert!(Poly::new(vec![1.0, 1.0]).divide_by_r().is_none());
    }
}
