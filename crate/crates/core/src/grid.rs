//! Radial grids on (0, R].
//!
//! The origin is excluded: radial field components carry 1/r factors and
//! every retained profile is determined by its values at the interior nodes
//! together with an extrapolation row for limits at r = 0. Two schemes:
//!
//! - `Spectral`: Chebyshev-Lobatto nodes with the r = 0 endpoint dropped,
//!   polynomial (barycentric) differentiation, quadrature weights that
//!   integrate the interpolant against r^2 dr exactly;
//! - `FiniteDifference`: uniform nodes, second-order difference stencils,
//!   panel-quadratic quadrature weights, used as the independent
//!   cross-check discretization.

use ndarray::{Array1, Array2};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Scheme {
    Spectral,
    FiniteDifference,
}

/// Discretization of (0, R]: nodes ascending with `nodes[n-1] = R`.
#[derive(Clone, Debug)]
pub struct RadialGrid {
    scheme: Scheme,
    radius: f64,
    nodes: Array1<f64>,
    d1: Array2<f64>,
    d2: Array2<f64>,
    quad_r2: Array1<f64>,
    at_zero: Array1<f64>,
}

impl RadialGrid {
    pub fn new(scheme: Scheme, n: usize, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::validation("grid radius must be positive and finite"));
        }
        if n < 8 {
            return Err(Error::validation("grid needs at least 8 nodes"));
        }
        match scheme {
            Scheme::Spectral => Ok(Self::spectral(n, radius)),
            Scheme::FiniteDifference => Ok(Self::finite_difference(n, radius)),
        }
    }

    fn spectral(n: usize, radius: f64) -> Self {
        // Lobatto points t_k = -cos(k pi / n), k = 0..n, mapped to [0, R];
        // k = 0 (r = 0) is dropped. Barycentric weights of the full set are
        // (-1)^k (halved at the ends); removing a node multiplies each
        // remaining weight by its distance to it. Common factors cancel in
        // every barycentric formula, so t-space weights pair with r-space
        // differences below.
        let mut t = Vec::with_capacity(n);
        let mut w = Vec::with_capacity(n);
        for k in 1..=n {
            let tk = -(k as f64 * std::f64::consts::PI / n as f64).cos();
            let mut wk = if k % 2 == 0 { 1.0 } else { -1.0 };
            if k == n {
                wk *= 0.5;
            }
            t.push(tk);
            w.push(wk * (tk + 1.0));
        }
        // Clamp the endpoint exactly.
        t[n - 1] = 1.0;
        let nodes: Array1<f64> =
            t.iter().map(|&tk| radius * (tk + 1.0) / 2.0).collect();

        let d1 = differentiation_matrix(nodes.as_slice().unwrap(), &w);
        let d2 = d1.dot(&d1);
        let at_zero = lagrange_row(nodes.as_slice().unwrap(), &w, 0.0);
        let quad_r2 = spectral_quadrature(nodes.as_slice().unwrap(), &w, radius);
        RadialGrid { scheme: Scheme::Spectral, radius, nodes, d1, d2, quad_r2, at_zero }
    }

    fn finite_difference(n: usize, radius: f64) -> Self {
        let h = radius / n as f64;
        let nodes: Array1<f64> = (1..=n).map(|i| i as f64 * h).collect();

        let mut d1 = Array2::zeros((n, n));
        d1[[0, 0]] = -1.5 / h;
        d1[[0, 1]] = 2.0 / h;
        d1[[0, 2]] = -0.5 / h;
        for i in 1..n - 1 {
            d1[[i, i - 1]] = -0.5 / h;
            d1[[i, i + 1]] = 0.5 / h;
        }
        d1[[n - 1, n - 1]] = 1.5 / h;
        d1[[n - 1, n - 2]] = -2.0 / h;
        d1[[n - 1, n - 3]] = 0.5 / h;

        let h2 = h * h;
        let mut d2 = Array2::zeros((n, n));
        for (c, v) in [(0, 2.0), (1, -5.0), (2, 4.0), (3, -1.0)] {
            d2[[0, c]] = v / h2;
        }
        for i in 1..n - 1 {
            d2[[i, i - 1]] = 1.0 / h2;
            d2[[i, i]] = -2.0 / h2;
            d2[[i, i + 1]] = 1.0 / h2;
        }
        for (c, v) in [(0, 2.0), (1, -5.0), (2, 4.0), (3, -1.0)] {
            d2[[n - 1, n - 1 - c]] = v / h2;
        }

        let quad_r2 = fd_quadrature(nodes.as_slice().unwrap());
        let mut at_zero = Array1::zeros(n);
        at_zero[0] = 3.0;
        at_zero[1] = -3.0;
        at_zero[2] = 1.0;
        RadialGrid {
            scheme: Scheme::FiniteDifference,
            radius,
            nodes,
            d1,
            d2,
            quad_r2,
            at_zero,
        }
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Nodes ascending; the last one is exactly R.
    pub fn nodes(&self) -> &Array1<f64> {
        &self.nodes
    }

    /// First-derivative matrix.
    pub fn d1(&self) -> &Array2<f64> {
        &self.d1
    }

    /// Second-derivative matrix.
    pub fn d2(&self) -> &Array2<f64> {
        &self.d2
    }

    /// Weights integrating node values against r^2 dr over (0, R).
    pub fn quad_r2(&self) -> &Array1<f64> {
        &self.quad_r2
    }

    /// Row evaluating the interpolant's limit at r = 0.
    pub fn at_zero(&self) -> &Array1<f64> {
        &self.at_zero
    }

    /// Integral of a real nodal function against r^2 dr.
    pub fn integrate_r2(&self, values: &Array1<f64>) -> f64 {
        self.quad_r2.dot(values)
    }
}

/// Barycentric differentiation matrix with the negative-sum diagonal.
fn differentiation_matrix(x: &[f64], w: &[f64]) -> Array2<f64> {
    let n = x.len();
    let mut d = Array2::zeros((n, n));
    for i in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if i != j {
                let v = (w[j] / w[i]) / (x[i] - x[j]);
                d[[i, j]] = v;
                diag -= v;
            }
        }
        d[[i, i]] = diag;
    }
    d
}

/// Values of all Lagrange basis polynomials at a point off the node set.
fn lagrange_row(x: &[f64], w: &[f64], at: f64) -> Array1<f64> {
    let n = x.len();
    let mut row = Array1::zeros(n);
    for j in 0..n {
        if (at - x[j]).abs() < f64::EPSILON * (x[j].abs() + 1.0) {
            row[j] = 1.0;
            return row;
        }
    }
    let terms: Vec<f64> = (0..n).map(|j| w[j] / (at - x[j])).collect();
    let denom: f64 = terms.iter().sum();
    for j in 0..n {
        row[j] = terms[j] / denom;
    }
    row
}

/// Quadrature weights w_i = int_0^R l_i(r) r^2 dr via Gauss-Legendre of
/// degree comfortably above deg(l_i) + 2.
fn spectral_quadrature(x: &[f64], w: &[f64], radius: f64) -> Array1<f64> {
    let n = x.len();
    let (gl_x, gl_w) = crate::linalg::gauss_legendre(n / 2 + 3);
    let mut q = Array1::zeros(n);
    for (&gx, &gw) in gl_x.iter().zip(&gl_w) {
        // Map [-1, 1] -> [0, R].
        let r = radius * (gx + 1.0) / 2.0;
        let scale = radius / 2.0 * gw * r * r;
        let row = lagrange_row(x, w, r);
        for i in 0..n {
            q[i] += scale * row[i];
        }
    }
    q
}

/// Closed-form integral over [a, b] of the quadratic Lagrange basis on
/// nodes (p, q, s) against r^2 dr; returns the three stencil weights.
fn quad_panel_r2(p: f64, q: f64, s: f64, a: f64, b: f64) -> [f64; 3] {
    let moment = |k: u32| (b.powi(k as i32 + 3) - a.powi(k as i32 + 3)) / (k as f64 + 3.0);
    let (m0, m1, m2) = (moment(0), moment(1), moment(2));
    // L_p = (r - q)(r - s) / ((p - q)(p - s)), cyclically.
    let basis = |u: f64, v: f64, t: f64| (m2 - (u + v) * m1 + u * v * m0) / ((t - u) * (t - v));
    [basis(q, s, p), basis(p, s, q), basis(p, q, s)]
}

/// Panel-quadratic weights for int_0^R f r^2 dr on uniform nodes; exact for
/// global quadratics including over the head interval [0, r_1].
fn fd_quadrature(x: &[f64]) -> Array1<f64> {
    let n = x.len();
    let mut q = Array1::zeros(n);
    let head = quad_panel_r2(x[0], x[1], x[2], 0.0, x[0]);
    for (i, hw) in head.iter().enumerate() {
        q[i] += hw;
    }
    for i in 0..n - 1 {
        // Stencil centered when possible, shifted at the left edge.
        let c = if i == 0 { 1 } else { i };
        let pw = quad_panel_r2(x[c - 1], x[c], x[c + 1], x[i], x[i + 1]);
        for (k, w) in pw.iter().enumerate() {
            q[c - 1 + k] += w;
        }
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(coeffs: &[f64], x: f64) -> f64 {
        coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    fn poly_d(coeffs: &[f64], x: f64) -> f64 {
        coeffs
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (k, &c)| acc * x + k as f64 * c)
    }

    #[test]
    fn spectral_differentiates_polynomials_exactly() {
        let g = RadialGrid::new(Scheme::Spectral, 24, 1.3).unwrap();
        let coeffs = [0.7, -1.1, 0.4, 2.0, -0.3, 0.05, 1.0];
        let f: Array1<f64> = g.nodes().mapv(|r| poly(&coeffs, r));
        let df = g.d1().dot(&f);
        for (i, &r) in g.nodes().iter().enumerate() {
            assert!((df[i] - poly_d(&coeffs, r)).abs() < 1e-10, "node {i}");
        }
    }

    #[test]
    fn spectral_second_derivative_spectrally_accurate() {
        let g = RadialGrid::new(Scheme::Spectral, 32, 2.0).unwrap();
        let f: Array1<f64> = g.nodes().mapv(f64::sin);
        let d2f = g.d2().dot(&f);
        for (i, &r) in g.nodes().iter().enumerate() {
            assert!((d2f[i] + r.sin()).abs() < 1e-9, "node {i}: {}", d2f[i] + r.sin());
        }
    }

    #[test]
    fn spectral_quadrature_exact_for_interpolated_monomials() {
        let radius: f64 = 1.7;
        let n = 20;
        let g = RadialGrid::new(Scheme::Spectral, n, radius).unwrap();
        for k in 0..n {
            let f: Array1<f64> = g.nodes().mapv(|r| r.powi(k as i32));
            let got = g.integrate_r2(&f);
            let want = radius.powi(k as i32 + 3) / (k as f64 + 3.0);
            assert!(
                (got - want).abs() < 1e-12 * want.abs().max(1.0),
                "k = {k}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn spectral_extrapolation_recovers_value_at_origin() {
        let g = RadialGrid::new(Scheme::Spectral, 16, 1.0).unwrap();
        let coeffs = [2.5, -1.0, 3.0, -0.5];
        let f: Array1<f64> = g.nodes().mapv(|r| poly(&coeffs, r));
        let p0 = g.at_zero().dot(&f);
        assert!((p0 - 2.5).abs() < 1e-11);
    }

    #[test]
    fn spectral_nodes_exclude_origin_include_boundary() {
        let g = RadialGrid::new(Scheme::Spectral, 40, 0.8).unwrap();
        assert!(g.nodes()[0] > 0.0);
        assert_eq!(g.nodes()[g.len() - 1], 0.8);
        assert!(g.nodes().windows(2).into_iter().all(|w| w[0] < w[1]));
    }

    #[test]
    fn fd_derivatives_second_order() {
        let radius = 1.0;
        let err = |n: usize| -> (f64, f64) {
            let g = RadialGrid::new(Scheme::FiniteDifference, n, radius).unwrap();
            let f: Array1<f64> = g.nodes().mapv(|r| (2.0 * r).sin());
            let d1f = g.d1().dot(&f);
            let d2f = g.d2().dot(&f);
            let mut e1: f64 = 0.0;
            let mut e2: f64 = 0.0;
            for (i, &r) in g.nodes().iter().enumerate() {
                e1 = e1.max((d1f[i] - 2.0 * (2.0 * r).cos()).abs());
                e2 = e2.max((d2f[i] + 4.0 * (2.0 * r).sin()).abs());
            }
            (e1, e2)
        };
        let (a1, a2) = err(40);
        let (b1, b2) = err(80);
        assert!(a1 / b1 > 3.4, "d1 order: {}", a1 / b1);
        assert!(a2 / b2 > 3.4, "d2 order: {}", a2 / b2);
    }

    #[test]
    fn fd_quadrature_exact_for_quadratics_and_converges() {
        let g = RadialGrid::new(Scheme::FiniteDifference, 50, 2.0).unwrap();
        // Exact on quadratics.
        let f: Array1<f64> = g.nodes().mapv(|r| 1.0 - 0.7 * r + 0.3 * r * r);
        let want = 8.0 / 3.0 - 0.7 * 16.0 / 4.0 + 0.3 * 32.0 / 5.0;
        assert!((g.integrate_r2(&f) - want).abs() < 1e-12);

        // Convergent on smooth non-polynomial data.
        let int_err = |n: usize| {
            let g = RadialGrid::new(Scheme::FiniteDifference, n, 2.0).unwrap();
            let f: Array1<f64> = g.nodes().mapv(f64::exp);
            // int_0^2 e^r r^2 dr = e^2·(4 - 4 + 2) - 2 = 2 e^2 - 2.
            (g.integrate_r2(&f) - (2.0 * (2.0f64).exp() - 2.0)).abs()
        };
        assert!(int_err(40) / int_err(80) > 5.0);
    }

    #[test]
    fn fd_extrapolation_quadratic() {
        let g = RadialGrid::new(Scheme::FiniteDifference, 30, 1.0).unwrap();
        let f: Array1<f64> = g.nodes().mapv(|r| 4.0 - r + 5.0 * r * r);
        assert!((g.at_zero().dot(&f) - 4.0).abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(RadialGrid::new(Scheme::Spectral, 4, 1.0).is_err());
        assert!(RadialGrid::new(Scheme::Spectral, 20, 0.0).is_err());
        assert!(RadialGrid::new(Scheme::FiniteDifference, 20, f64::NAN).is_err());
    }
}
