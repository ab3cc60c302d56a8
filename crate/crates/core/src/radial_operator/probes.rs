//! Random smooth fields in the discrete constrained space H(D).
//!
//! The operator-identity checks need probes that (a) satisfy the discrete
//! divergence, trace, and regularity constraints essentially exactly, and
//! (b) are smooth enough that the collocation solution of the pair system
//! resolves them to spectral accuracy — the right-identity
//! `P^d B_z P^d R_z = I` holds on resolved fields but degrades to the
//! truncation error of the scheme on rough ones.
//!
//! Construction: polynomial potentials.
//!
//!   TM u-part: pick `A(r) = r^{l+1} (R² − r²)³ q(r)` with a random
//!   low-degree `q`, set the pair `(1+m)·(a, b) = (A, (2A + rA')/l(l+1))`.
//!   By construction `div_h((1+m)u) = 0` nodally for any medium (the
//!   weighted divergence differentiates the nodal product, which is the
//!   polynomial pair (A, B)), and the cubic boundary factor kills both
//!   traces.  The v-part uses the same potential trick without boundary
//!   factors.
//!
//!   TE: `u = r (R − r)² q(r)` satisfies u(R) = (ru)'(R) = 0 and the origin
//!   regularity row; `v = r·t(r)` needs only the origin row.
//!
//! A final orthogonal projection onto the null space of the constraint
//! rows removes the residual interpolation error of the regularity rows
//! for non-constant media (≈1e-12) without roughening the field.

use ndarray::Array1;
use rand::Rng;

use crate::linalg::{adjoint, matvec, vec_norm, Mat, Vecc};
use crate::modes::Polarization;
use crate::poly::Poly;
use crate::C64;

use super::assembly::ModeOperatorBlocks;

fn random_unit(rng: &mut impl Rng) -> C64 {
    let re = rng.gen_range(-1.0..1.0);
    let im = rng.gen_range(-1.0..1.0);
    C64::new(re, im)
}

/// Evaluates `amp · p(r_i)` over the nodes into `out[offset..offset+n]`.
fn add_profile(out: &mut Vecc, offset: usize, nodes: &Array1<f64>, amp: C64, p: &Poly) {
    for (i, &r) in nodes.iter().enumerate() {
        out[offset + i] += amp * p.eval(r);
    }
}

/// Draws one random smooth field in the discrete constrained space of the
/// blocks, normalized to unit Euclidean length.  `basis` must be the
/// orthonormal constrained basis of the same blocks.
pub fn random_constrained_field(
    blocks: &ModeOperatorBlocks,
    basis: &Mat,
    rng: &mut impl Rng,
) -> Vecc {
    let grid = blocks.grid();
    let nodes = grid.nodes();
    let n = grid.len();
    let radius = grid.radius();
    let l = blocks.mode().l();
    let l2 = blocks.mode().ll1();
    let dim = blocks.dim();
    let mut x = Vecc::zeros(dim);

    match blocks.mode().polarization() {
        Polarization::TE => {
            // u = r (R − r)² (c₀ + c₁ r + c₂ r²), v = r (d₀ + d₁ r + d₂ r²).
            let bubble = Poly::new(vec![0.0, 1.0]).mul(
                &Poly::new(vec![radius, -1.0]).mul(&Poly::new(vec![radius, -1.0])),
            );
            for degree in 0..3 {
                let p = bubble.mul(&Poly::monomial(degree, 1.0));
                add_profile(&mut x, 0, nodes, random_unit(rng), &p);
                add_profile(&mut x, n, nodes, random_unit(rng), &Poly::monomial(degree + 1, 1.0));
            }
        }
        Polarization::TM => {
            // Potential A = r^{l+1}(R² − r²)³·r^{2j}; pair (A, (2A + rA')/l2).
            let r2_factor = {
                let f = Poly::new(vec![radius * radius, 0.0, -1.0]);
                f.mul(&f).mul(&f)
            };
            let lead = Poly::monomial((l as usize) + 1, 1.0).mul(&r2_factor);
            let medium = blocks.medium();
            let weight: Vec<C64> = nodes.iter().map(|&r| crate::ONE + medium.m(r)).collect();
            for j in 0..2 {
                let a_pot = lead.mul(&Poly::monomial(2 * j, 1.0));
                let b_pot = a_pot
                    .scale(2.0)
                    .add(&Poly::new(vec![0.0, 1.0]).mul(&a_pot.derivative()))
                    .scale(1.0 / l2);
                let amp = random_unit(rng);
                for (i, &r) in nodes.iter().enumerate() {
                    x[i] += amp * a_pot.eval(r) / weight[i];
                    x[n + i] += amp * b_pot.eval(r) / weight[i];
                }
                // v-part potential: no boundary factor, no weight.
                let v_pot = Poly::monomial((l as usize) + 1 + 2 * j, 1.0);
                let v_b = v_pot
                    .scale(2.0)
                    .add(&Poly::new(vec![0.0, 1.0]).mul(&v_pot.derivative()))
                    .scale(1.0 / l2);
                let vamp = random_unit(rng);
                add_profile(&mut x, 2 * n, nodes, vamp, &v_pot);
                add_profile(&mut x, 3 * n, nodes, vamp, &v_b);
            }
        }
    }

    // Exact membership: orthogonal projection onto the constrained space.
    let coords = matvec(&adjoint(basis), &x);
    let mut projected = matvec(basis, &coords);
    let norm = vec_norm(&projected);
    if norm > 0.0 {
        projected.mapv_inplace(|v| v / norm);
    }
    projected
}
