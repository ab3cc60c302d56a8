//! Operator-identity verification: the projected resolvent inverts the
//! projected pair operator from both sides, the resolvent-shift identity
//! holds, and the weighted Helmholtz projection behaves as a projection
//! (annihilates gradients, fixes constrained fields, idempotent).

use maxtev_core::grid::Scheme;
use maxtev_core::linalg::{vec_norm, Mat, Vecc};
use maxtev_core::medium::MediumProfile;
use maxtev_core::modes::{ModeIndex, Polarization};
use maxtev_core::poly::Poly;
use maxtev_core::radial_operator::{
    assemble_bz, build_grid, helmholtz_project, operator_norm_with_basis,
    random_constrained_field, verify_operator_identities,
};
use maxtev_core::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn constant_medium() -> MediumProfile {
    MediumProfile::constant(1.0, c(4.0, 0.0)).unwrap()
}

fn smooth_medium() -> MediumProfile {
    MediumProfile::smooth_with_shell(1.0, c(3.0, 0.0), c(2.0, 0.1), 0.6).unwrap()
}

fn max_abs(v: &Vecc) -> f64 {
    v.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

// ---------------------------------------------------------------------------
// Inverse identities and the resolvent-shift identity.
// ---------------------------------------------------------------------------

#[test]
fn te_identities_hold_on_random_probes() {
    let medium = constant_medium();
    let mode = ModeIndex::new(1, Polarization::TE).unwrap();
    let grid = build_grid(48, medium.radius(), Scheme::Spectral).unwrap();
    let report =
        verify_operator_identities(mode, &medium, c(0.0, 40.0), &grid, 100, 2024).unwrap();
    assert_eq!(report.probes, 100);
    assert_eq!(report.grid_points, 48);
    assert!(
        report.max_left_identity_err <= 1e-8,
        "left identity error {:.3e}",
        report.max_left_identity_err
    );
    assert!(
        report.max_right_identity_err <= 1e-8,
        "right identity error {:.3e}",
        report.max_right_identity_err
    );
    assert!(
        report.max_shift_identity_err <= 1e-7,
        "shift identity error {:.3e}",
        report.max_shift_identity_err
    );
}

#[test]
fn tm_identities_hold_on_random_probes() {
    let medium = constant_medium();
    let mode = ModeIndex::new(2, Polarization::TM).unwrap();
    let grid = build_grid(48, medium.radius(), Scheme::Spectral).unwrap();
    let report =
        verify_operator_identities(mode, &medium, c(0.0, 40.0), &grid, 100, 77).unwrap();
    assert!(
        report.max_left_identity_err <= 1e-8,
        "left identity error {:.3e}",
        report.max_left_identity_err
    );
    assert!(
        report.max_right_identity_err <= 1e-8,
        "right identity error {:.3e}",
        report.max_right_identity_err
    );
    assert!(
        report.max_shift_identity_err <= 1e-7,
        "shift identity error {:.3e}",
        report.max_shift_identity_err
    );
}

#[test]
fn identities_hold_for_smooth_medium() {
    let medium = smooth_medium();
    for (l, pol) in [(1, Polarization::TE), (1, Polarization::TM)] {
        let mode = ModeIndex::new(l, pol).unwrap();
        let grid = build_grid(48, medium.radius(), Scheme::Spectral).unwrap();
        let report =
            verify_operator_identities(mode, &medium, c(10.0, 25.0), &grid, 25, 5150).unwrap();
        assert!(
            report.max_left_identity_err <= 1e-8
                && report.max_right_identity_err <= 1e-8
                && report.max_shift_identity_err <= 1e-7,
            "{pol:?}: identity errors {:.3e} / {:.3e} / {:.3e}",
            report.max_left_identity_err,
            report.max_right_identity_err,
            report.max_shift_identity_err
        );
    }
}

// ---------------------------------------------------------------------------
// Weighted Helmholtz projection.
// ---------------------------------------------------------------------------

/// A TM gradient field (φ', φ/r) for a potential vanishing at the boundary;
/// the projection must annihilate it regardless of the medium weight.
fn gradient_field(grid_nodes: &[f64], radius: f64) -> Vecc {
    let phi = Poly::new(vec![0.0, 0.0, 1.0])
        .mul(&Poly::new(vec![radius, -1.0]))
        .mul(&Poly::new(vec![1.0, 0.5]));
    let dphi = phi.derivative();
    let n = grid_nodes.len();
    let mut u = Vecc::zeros(2 * n);
    for (i, &r) in grid_nodes.iter().enumerate() {
        u[i] = c(dphi.eval(r), 0.0);
        u[n + i] = c(phi.eval(r) / r, 0.0);
    }
    u
}

#[test]
fn projection_annihilates_pure_gradients() {
    for medium in [constant_medium(), smooth_medium()] {
        let mode = ModeIndex::new(2, Polarization::TM).unwrap();
        let grid = build_grid(32, medium.radius(), Scheme::Spectral).unwrap();
        let nodes: Vec<f64> = grid.nodes().iter().copied().collect();
        let u = gradient_field(&nodes, medium.radius());
        let proj = helmholtz_project(mode, &medium, &grid, &u).unwrap();
        let scale = max_abs(&u);
        assert!(
            max_abs(&proj) <= 1e-9 * scale,
            "gradient survived projection: {:.3e} of {:.3e}",
            max_abs(&proj),
            scale
        );
    }
}

#[test]
fn projection_is_identity_for_te() {
    let medium = constant_medium();
    let mode = ModeIndex::new(1, Polarization::TE).unwrap();
    let grid = build_grid(24, medium.radius(), Scheme::Spectral).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let u: Vecc = (0..grid.len())
        .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let proj = helmholtz_project(mode, &medium, &grid, &u).unwrap();
    let mut diff = proj.clone();
    diff -= &u;
    assert!(max_abs(&diff) <= 1e-14 * max_abs(&u));
}

#[test]
fn projection_is_idempotent_on_raw_fields() {
    let medium = smooth_medium();
    let mode = ModeIndex::new(1, Polarization::TM).unwrap();
    let grid = build_grid(28, medium.radius(), Scheme::Spectral).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..20 {
        let u: Vecc = (0..2 * grid.len())
            .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let once = helmholtz_project(mode, &medium, &grid, &u).unwrap();
        let twice = helmholtz_project(mode, &medium, &grid, &once).unwrap();
        let mut diff = twice.clone();
        diff -= &once;
        let scale = max_abs(&u).max(1e-300);
        assert!(
            max_abs(&diff) <= 1e-10 * scale,
            "projection not idempotent: {:.3e} of {:.3e}",
            max_abs(&diff),
            scale
        );
    }
}

#[test]
fn projection_fixes_constrained_fields() {
    let medium = constant_medium();
    let mode = ModeIndex::new(2, Polarization::TM).unwrap();
    let grid = build_grid(28, medium.radius(), Scheme::Spectral).unwrap();
    let blocks = assemble_bz(mode, &medium, c(4.0, 4.0), &grid).unwrap();
    let basis = blocks.constrained_basis().unwrap();
    let fl = blocks.field_len();
    let mut rng = ChaCha8Rng::seed_from_u64(123);
    for _ in 0..20 {
        let x = random_constrained_field(&blocks, &basis, &mut rng);
        let u_half: Vecc = x.iter().take(fl).copied().collect();
        let proj = helmholtz_project(mode, &medium, &grid, &u_half).unwrap();
        let mut diff = proj.clone();
        diff -= &u_half;
        let scale = vec_norm(&x).max(1e-300);
        assert!(
            max_abs(&diff) <= 1e-10 * scale,
            "constrained field moved by projection: {:.3e}",
            max_abs(&diff)
        );
    }
}

// ---------------------------------------------------------------------------
// The scan's operator norm is a property of the subspace, not of the basis
// chosen to represent it.
// ---------------------------------------------------------------------------

fn unitary_column_mix(k: usize, seed: u64) -> Mat {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perm: Vec<usize> = (0..k).collect();
    for i in (1..k).rev() {
        let j = rng.gen_range(0..=i);
        perm.swap(i, j);
    }
    let mut u = Mat::zeros((k, k));
    for (j, &pj) in perm.iter().enumerate() {
        let theta: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        u[[pj, j]] = c(theta.cos(), theta.sin());
    }
    u
}

fn random_well_conditioned_mix(k: usize, seed: u64) -> Mat {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = 0.25 / (k as f64).sqrt();
    let mut m = Mat::eye(k);
    for i in 0..k {
        for j in 0..k {
            m[[i, j]] += c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * scale;
        }
    }
    m
}

#[test]
fn operator_norm_invariant_under_basis_change() {
    for (pol, n) in [(Polarization::TE, 32), (Polarization::TM, 24)] {
        let medium = constant_medium();
        let mode = ModeIndex::new(1, pol).unwrap();
        let grid = build_grid(n, medium.radius(), Scheme::Spectral).unwrap();
        let blocks = assemble_bz(mode, &medium, c(5.0, 2.0), &grid).unwrap();
        let basis = blocks.constrained_basis().unwrap();
        let k = basis.ncols();

        let reference = operator_norm_with_basis(&blocks, &basis).unwrap();
        assert!(
            reference.is_finite() && reference > 0.0,
            "{pol:?}: reference norm = {reference}"
        );

        let unitary = basis.dot(&unitary_column_mix(k, 4242));
        let under_unitary = operator_norm_with_basis(&blocks, &unitary).unwrap();
        assert!(
            (under_unitary - reference).abs() <= 1e-10 * reference,
            "{pol:?}: unitary re-basing changed the norm: {reference} vs {under_unitary}"
        );

        let skewed = basis.dot(&random_well_conditioned_mix(k, 777));
        let under_skew = operator_norm_with_basis(&blocks, &skewed).unwrap();
        assert!(
            (under_skew - reference).abs() <= 1e-8 * reference,
            "{pol:?}: invertible re-basing changed the norm: {reference} vs {under_skew}"
        );
    }
}
