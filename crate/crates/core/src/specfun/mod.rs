//! Spherical Bessel functions of complex argument.
//!
//! Everything downstream (mode determinants, transfer matrices, the
//! operator-route cross checks) reduces to j_l, y_l and the Riccati forms
//! psi_l = z j_l, chi_l = -z y_l at complex z, so this module carries the
//! accuracy budget for the whole analytic route.
//!
//! Production path is plain f64:
//! - exact limits at z = 0;
//! - ascending series while |z|^2 <= 2l + 3 (first term ratio <= 1/2, terms
//!   decay monotonically, no cancellation);
//! - otherwise downward recurrence seeded above the turning point and
//!   normalized against j_0 or j_1 from complex sin/cos, re-run with a
//!   deeper start until two passes agree;
//! - y_l by upward recurrence, which follows the dominant solution.
//!
//! [`refimpl`] repeats the construction in double-double arithmetic and is
//! the yardstick the tests (and the acceptance gate) measure this module
//! against.

pub(crate) mod dd;
pub mod refimpl;

use crate::{Error, Result, C64};

/// Point evaluation of j_l, y_l with derivatives and self-test diagnostics.
#[derive(Clone, Copy, Debug)]
pub struct BesselEval {
    pub j: C64,
    pub jp: C64,
    pub y: C64,
    pub yp: C64,
    /// |j y' - j' y - 1/z^2| relative to the largest participating term;
    /// scaling by 1/z^2 alone would be unmeasurable once e^{2|Im z|}
    /// dwarfs it.
    pub wronskian_residual: f64,
    /// Three-term recurrence residual for j at orders l, l+1, l+2,
    /// relative to the largest participating magnitude.
    pub recurrence_residual: f64,
}

/// j_0..j_{l_max} with per-entry underflow marks: a `true` flag means the
/// true magnitude falls below the smallest normal f64 and the entry was
/// replaced by exact zero rather than left as denormal noise.
#[derive(Clone, Debug)]
pub struct JLadder {
    pub values: Vec<C64>,
    pub underflowed: Vec<bool>,
}

const ZERO: C64 = C64::new(0.0, 0.0);

/// Arguments with |Im z| beyond this make e^|Im z| overflow once the
/// algebraic prefactors pile on.
const IM_OVERFLOW_LIMIT: f64 = 700.0;

fn check_overflow_regime(z: C64) -> Result<()> {
    if z.im.abs() > IM_OVERFLOW_LIMIT {
        return Err(Error::Overflow(format!(
            "spherical Bessel functions overflow for |Im z| = {} > {}",
            z.im.abs(),
            IM_OVERFLOW_LIMIT
        )));
    }
    Ok(())
}

fn series_converges(l: usize, z: C64) -> bool {
    z.norm_sqr() <= (2 * l + 3) as f64
}

/// Ascending series for j_l in the regime where terms decay from the start.
/// Graceful underflow: a vanished leading term is the correct answer.
fn series_j(l: usize, z: C64) -> C64 {
    let mut t = C64::new(1.0, 0.0);
    for j in 1..=l {
        t = t * z / (2 * j + 1) as f64;
        if t == ZERO {
            return ZERO;
        }
    }
    let mz2 = -(z * z);
    let mut sum = t;
    for k in 1..200usize {
        t = t * mz2 / (2.0 * k as f64 * (2 * l + 2 * k + 1) as f64);
        sum += t;
        // 1-norms: squaring would underflow for legitimately tiny values.
        let tn = t.re.abs() + t.im.abs();
        let sn = sum.re.abs() + sum.im.abs();
        if tn <= 1e-18 * sn.max(1e-250) {
            break;
        }
    }
    sum
}

fn j0_j1(z: C64) -> (C64, C64) {
    let s = z.sin();
    let c = z.cos();
    let j0 = s / z;
    let j1 = (j0 - c) / z;
    (j0, j1)
}

/// Rescale threshold for the downward pass. Kept well below sqrt(f64 max)
/// so that complex division by a stored entry (whose implementation squares
/// the denominator's magnitude) cannot overflow.
const MILLER_RESCALE_LIMIT: f64 = 1e120;
const MILLER_RESCALE_FACTOR: f64 = 1e-120;

/// One downward pass seeded at `start`; stored entries carry the number of
/// rescales applied *after* they were recorded so large dynamic ranges
/// survive until the final per-entry normalization.
fn miller_pass_f64(l_max: usize, z: C64, start: usize) -> Vec<(C64, u32)> {
    let zinv = 1.0 / z;
    let mut stored: Vec<(C64, u32)> = vec![(ZERO, 0); l_max + 1];
    let mut rescales: u32 = 0;
    let mut recorded_at = vec![0u32; l_max + 1];
    let mut p_next = ZERO;
    let mut p_cur = C64::new(1.0, 0.0);
    if start <= l_max {
        stored[start] = (p_cur, 0);
        recorded_at[start] = rescales;
    }
    for k in (1..=start).rev() {
        let p_prev = p_cur * ((2 * k + 1) as f64) * zinv - p_next;
        p_next = p_cur;
        p_cur = p_prev;
        if p_cur.re.abs() > MILLER_RESCALE_LIMIT || p_cur.im.abs() > MILLER_RESCALE_LIMIT {
            p_cur *= MILLER_RESCALE_FACTOR;
            p_next *= MILLER_RESCALE_FACTOR;
            rescales += 1;
        }
        if k - 1 <= l_max {
            stored[k - 1] = (p_cur, 0);
            recorded_at[k - 1] = rescales;
        }
    }
    for (e, at) in stored.iter_mut().zip(recorded_at) {
        e.1 = rescales - at;
    }
    stored
}

/// Apply normalization and deferred rescales in an overflow-safe order.
fn finalize_miller_entry(p: C64, deferred: u32, scale: C64) -> C64 {
    let mut v = p * scale;
    for _ in 0..deferred {
        if v == ZERO {
            break;
        }
        v *= MILLER_RESCALE_FACTOR;
    }
    v
}

/// Entry-wise agreement of two normalized ladders from different starting
/// depths. An entry that is accidentally tiny next to its neighbors (near
/// a real zero of j_l, e.g. j_0 at multiples of pi) can only be reproduced
/// to absolute accuracy at the neighborhood scale, so each entry's
/// tolerance is relative to the largest magnitude among orders l-1, l,
/// l+1. Entries in a fully underflowed tail are exempt.
fn ladders_agree(a: &[C64], b: &[C64]) -> bool {
    (0..b.len()).all(|i| {
        let local = b[i]
            .norm()
            .max(if i > 0 { b[i - 1].norm() } else { 0.0 })
            .max(b.get(i + 1).map_or(0.0, |v| v.norm()));
        local < 1e-290 || (a[i] - b[i]).norm() <= 1e-12 * local
    })
}

fn miller_j_all_f64(l_max: usize, z: C64) -> Result<Vec<C64>> {
    let (j0, j1) = j0_j1(z);
    if l_max == 0 {
        return Ok(vec![j0]);
    }
    // Normalize against whichever of j_0, j_1 is larger; they have no
    // common zeros, so the bigger one is always a healthy divisor.
    let use0 = j0.norm_sqr() >= j1.norm_sqr();
    let idx = if use0 { 0 } else { 1 };
    let target = if use0 { j0 } else { j1 };
    let za = z.norm();
    let base = (l_max as f64).max(za).ceil() as usize + 1;
    let mut delta = 25 + (0.25 * za) as usize;
    let mut prev: Option<Vec<C64>> = None;
    for _ in 0..5 {
        let raw = miller_pass_f64(l_max, z, base + delta);
        // The normalization entry is recorded last or next to last, so it
        // carries at most one deferred rescale; fold it into the ratio.
        let mut denom = raw[idx].0;
        for _ in 0..raw[idx].1 {
            denom *= MILLER_RESCALE_FACTOR;
        }
        let scale = target / denom;
        let cur: Vec<C64> = raw
            .iter()
            .map(|&(p, d)| finalize_miller_entry(p, d, scale))
            .collect();
        if cur.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Overflow(format!(
                "spherical j overflowed at z = {z}"
            )));
        }
        if let Some(p) = &prev {
            if ladders_agree(p, &cur) {
                return Ok(cur);
            }
        }
        prev = Some(cur);
        delta = delta * 2 + 20;
    }
    Err(Error::NonConvergence(format!(
        "downward recurrence for spherical j did not stabilize at z = {z}"
    )))
}

/// j_0..j_{l_max} for nonzero z: orders with |z|^2 <= 2l + 3 take the
/// series, the prefix below goes through one downward-recurrence ladder.
fn j_ladder_f64(l_max: usize, z: C64) -> Result<Vec<C64>> {
    let mut values = vec![ZERO; l_max + 1];
    let split = (0..=l_max).find(|&l| series_converges(l, z)).unwrap_or(l_max + 1);
    if split > 0 {
        let prefix = miller_j_all_f64((split - 1).min(l_max), z)?;
        values[..prefix.len()].copy_from_slice(&prefix);
    }
    for (l, v) in values.iter_mut().enumerate().take(l_max + 1).skip(split) {
        *v = series_j(l, z);
    }
    Ok(values)
}

/// j_l alone; exact at z = 0.
pub fn sph_bessel_j(l: usize, z: C64) -> Result<C64> {
    if z == ZERO {
        return Ok(if l == 0 { C64::new(1.0, 0.0) } else { ZERO });
    }
    check_overflow_regime(z)?;
    if series_converges(l, z) {
        Ok(series_j(l, z))
    } else {
        Ok(miller_j_all_f64(l, z)?[l])
    }
}

/// j_0..j_{l_max} with underflow flags.
pub fn sph_bessel_j_all(l_max: usize, z: C64) -> Result<JLadder> {
    if z == ZERO {
        let mut values = vec![ZERO; l_max + 1];
        values[0] = C64::new(1.0, 0.0);
        return Ok(JLadder { underflowed: vec![false; l_max + 1], values });
    }
    check_overflow_regime(z)?;
    let mut values = j_ladder_f64(l_max, z)?;
    let mut underflowed = vec![false; l_max + 1];
    for (v, f) in values.iter_mut().zip(underflowed.iter_mut()) {
        if v.norm() < f64::MIN_POSITIVE {
            *f = true;
            *v = ZERO;
        }
    }
    Ok(JLadder { values, underflowed })
}

/// Off the real axis the classic upward y march is unstable: below the
/// turning point j_l and y_l are parallel up to e^{-2|Im z|} and roundoff
/// picked up there surfaces amplified by up to e^{+2|Im z|} (more precisely
/// e^{(L^2 - l^2)/|z|} growth in the two-exponential regime). Above this
/// threshold we switch to the cross-Wronskian chain instead.
const Y_MARCH_IM_LIMIT: f64 = 2.5;

/// y_0..y_{l_max} given the j ladder of the same length plus one.
///
/// Near the real axis: plain 3-term upward march (amplification is bounded
/// by e^{2 Im limit}, a factor ~150 on f64 eps). Otherwise: the chain
/// y_l = (j_l y_{l-1} - 1/z^2) / j_{l-1} from the exact cross identity
/// j_l y_{l-1} - j_{l-1} y_l = 1/z^2. Propagated error telescopes to
/// j_L / j_l, which stays bounded off the real axis because all zeros of
/// spherical j are real.
fn y_ladder(l_max: usize, z: C64, j: &[C64]) -> Result<Vec<C64>> {
    let s = z.sin();
    let c = z.cos();
    let y0 = -c / z;
    let mut y = Vec::with_capacity(l_max + 1);
    y.push(y0);
    if z.im.abs() <= Y_MARCH_IM_LIMIT {
        if l_max >= 1 {
            y.push((y0 - s) / z);
        }
        for k in 1..l_max {
            let next = y[k] * ((2 * k + 1) as f64) / z - y[k - 1];
            y.push(next);
        }
    } else {
        debug_assert!(j.len() > l_max);
        let w = 1.0 / (z * z);
        for l in 1..=l_max {
            y.push((j[l] * y[l - 1] - w) / j[l - 1]);
        }
    }
    if let Some(v) = y.iter().find(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::Overflow(format!(
            "spherical y overflowed near order {l_max} at z = {z} ({v})"
        )));
    }
    Ok(y)
}

/// f_l' from the pair (f_l, f_{l+1}).
fn derivative(l: usize, z: C64, f_l: C64, f_lp1: C64) -> C64 {
    f_l * (l as f64) / z - f_lp1
}

/// Full evaluation with diagnostics; requires z != 0 (y_l has a pole there).
pub fn sph_bessel_eval(l: usize, z: C64) -> Result<BesselEval> {
    if z == ZERO {
        return Err(Error::validation(
            "sph_bessel_eval requires z != 0; y_l is singular at the origin",
        ));
    }
    check_overflow_regime(z)?;
    let js = j_ladder_f64(l + 2, z)?;
    let (j_l, j_lp1, j_lp2) = (js[l], js[l + 1], js[l + 2]);
    let ys = y_ladder(l + 1, z, &js)?;
    let (y_l, y_lp1) = (ys[l], ys[l + 1]);
    let jp = derivative(l, z, j_l, j_lp1);
    let yp = derivative(l, z, y_l, y_lp1);

    let w_exact = 1.0 / (z * z);
    let w_scale = (j_l * yp).norm().max((jp * y_l).norm()).max(w_exact.norm());
    let wronskian_residual = (j_l * yp - jp * y_l - w_exact).norm() / w_scale;
    let rec_scale = j_l.norm().max(j_lp1.norm()).max(j_lp2.norm());
    let recurrence_residual = if rec_scale < f64::MIN_POSITIVE {
        0.0
    } else {
        (j_lp1 * ((2 * l + 3) as f64) / z - j_l - j_lp2).norm() / rec_scale
    };
    Ok(BesselEval { j: j_l, jp, y: y_l, yp, wronskian_residual, recurrence_residual })
}

/// Riccati function of the first kind: psi_l(z) = z j_l(z) and derivative.
/// Defined (and exact) at z = 0.
pub fn riccati_psi(l: usize, z: C64) -> Result<(C64, C64)> {
    if z == ZERO {
        let psip = if l == 0 { C64::new(1.0, 0.0) } else { ZERO };
        return Ok((ZERO, psip));
    }
    check_overflow_regime(z)?;
    let js = j_ladder_f64(l + 1, z)?;
    let (j_l, j_lp1) = (js[l], js[l + 1]);
    let jp = derivative(l, z, j_l, j_lp1);
    Ok((z * j_l, j_l + z * jp))
}

/// Riccati function of the second kind: chi_l(z) = -z y_l(z) and derivative.
pub fn riccati_chi(l: usize, z: C64) -> Result<(C64, C64)> {
    if z == ZERO {
        return Err(Error::validation("riccati_chi is singular at z = 0"));
    }
    check_overflow_regime(z)?;
    let js = j_ladder_f64(l + 1, z)?;
    let ys = y_ladder(l + 1, z, &js)?;
    let (y_l, y_lp1) = (ys[l], ys[l + 1]);
    let yp = derivative(l, z, y_l, y_lp1);
    Ok((-(z * y_l), -(y_l + z * yp)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: C64, b: C64, rel: f64) -> bool {
        (a - b).norm() <= rel * b.norm().max(f64::MIN_POSITIVE)
    }

    // Golden values generated with mpmath at 40 decimal digits.

    #[test]
    fn matches_golden_point_values() {
        let z = C64::new(3.0, 2.0);
        let e = sph_bessel_eval(5, z).unwrap();
        assert!(close(
            e.j,
            C64::new(-0.03826973982196613007535242, 0.03058956365657633682369056),
            1e-13
        ));
        assert!(close(
            e.jp,
            C64::new(-0.006752078072838507748448199, 0.06444093794676611118929486),
            1e-13
        ));
        assert!(close(
            e.y,
            C64::new(0.4751373098121195837623721, 0.1248006821577663136389336),
            1e-13
        ));
        assert!(close(
            e.yp,
            C64::new(-0.8177771945079648932241598, 0.4236987170170164196415701),
            1e-13
        ));

        let (psi, psip) = riccati_psi(10, C64::new(8.0, -0.5)).unwrap();
        assert!(close(
            psi,
            C64::new(0.1291418825589790588905082, -0.06858418233635983010958026),
            1e-13
        ));
        assert!(close(
            psip,
            C64::new(0.1338368727108011638072114, -0.05149020356348252104494482),
            1e-13
        ));
    }

    #[test]
    fn golden_ladder_imaginary_argument() {
        let ladder = sph_bessel_j_all(40, C64::new(0.0, 10.0)).unwrap();
        assert!(ladder.underflowed.iter().all(|&f| !f));
        assert!(close(ladder.values[0], C64::new(1101.323287470339337723652, 0.0), 1e-13));
        assert!(close(ladder.values[1], C64::new(0.0, 991.1909632632983801997724), 1e-13));
        assert!(close(ladder.values[5], C64::new(0.0, 236.8395827065114121423479), 1e-13));
        assert!(close(ladder.values[20], C64::new(2.371543577256102519639257e-5, 0.0), 1e-13));
        assert!(close(ladder.values[40], C64::new(2.81471582952412325797107e-21, 0.0), 1e-12));
    }

    #[test]
    fn underflow_is_flagged_not_noisy() {
        // True magnitudes: |j_240(10i)| ~ 1e-302 (normal), |j_250| ~ 1e-319
        // (subnormal), |j_260| below the subnormal floor entirely.
        let ladder = sph_bessel_j_all(260, C64::new(0.0, 10.0)).unwrap();
        assert!(!ladder.underflowed[40]);
        assert!(!ladder.underflowed[240]);
        assert!(ladder.values[240].norm() > 0.0);
        for l in 250..=260 {
            assert!(ladder.underflowed[l], "expected underflow flag at l = {l}");
            assert_eq!(ladder.values[l], C64::new(0.0, 0.0));
        }
        // Low orders still match the no-flag ladder.
        let short = sph_bessel_j_all(40, C64::new(0.0, 10.0)).unwrap();
        for l in 0..=40 {
            assert!(close(ladder.values[l], short.values[l], 1e-12), "l = {l}");
        }
    }

    #[test]
    fn far_field_golden_values() {
        let j = sph_bessel_j(60, C64::new(200.0, 0.0)).unwrap();
        assert!(close(j, C64::new(0.004883912424765821529838469, 0.0), 1e-12));
        let j = sph_bessel_j(40, C64::new(120.0, 80.0)).unwrap();
        assert!(close(
            j,
            C64::new(-2.61111473136694357331308e30, 7.519482307180026548621545e30),
            1e-12
        ));
        let j = sph_bessel_j(60, C64::new(0.0, 200.0)).unwrap();
        assert!(close(j, C64::new(2.009058205495404561947714e80, 0.0), 1e-12));
    }

    #[test]
    fn small_argument_series_and_y_growth() {
        let z = C64::new(0.05, 0.02);
        let j = sph_bessel_j(8, z).unwrap();
        assert!(close(
            j,
            C64::new(-2.042623967816357009960997e-18, 1.999837199795594310337478e-19),
            1e-13
        ));
        let e = sph_bessel_eval(2, z).unwrap();
        assert!(close(e.y, C64::new(-8004.034704096932737799826, 17470.33659025141066318377), 1e-13));
    }

    #[test]
    fn exact_limits_at_origin() {
        assert_eq!(sph_bessel_j(0, ZERO).unwrap(), C64::new(1.0, 0.0));
        assert_eq!(sph_bessel_j(7, ZERO).unwrap(), ZERO);
        let (psi, psip) = riccati_psi(0, ZERO).unwrap();
        assert_eq!((psi, psip), (ZERO, C64::new(1.0, 0.0)));
        let (psi, psip) = riccati_psi(3, ZERO).unwrap();
        assert_eq!((psi, psip), (ZERO, ZERO));
        assert!(sph_bessel_eval(2, ZERO).unwrap_err().is_validation());
        assert!(riccati_chi(2, ZERO).unwrap_err().is_validation());
    }

    #[test]
    fn overflow_is_an_error_not_inf() {
        match sph_bessel_j(3, C64::new(1.0, 800.0)) {
            Err(Error::Overflow(_)) => {}
            other => panic!("expected overflow error, got {other:?}"),
        }
        // y_l blowing up past f64 range at tiny |z| is also caught.
        match sph_bessel_eval(60, C64::new(1e-8, 0.0)) {
            Err(Error::Overflow(_)) => {}
            other => panic!("expected overflow error, got {other:?}"),
        }
    }

    #[test]
    fn diagnostics_are_small_and_meaningful() {
        for &(l, re, im) in &[
            (1usize, 0.7, 0.1),
            (5, 3.0, 2.0),
            (10, 8.0, -0.5),
            (30, 90.0, 15.0),
            (60, 199.0, -20.0),
        ] {
            let e = sph_bessel_eval(l, C64::new(re, im)).unwrap();
            assert!(e.wronskian_residual < 1e-11, "wronskian {} at l={l}", e.wronskian_residual);
            assert!(e.recurrence_residual < 1e-11, "recurrence {} at l={l}", e.recurrence_residual);
        }
    }

    #[test]
    fn riccati_chi_consistent_with_y() {
        let z = C64::new(4.0, 1.5);
        let e = sph_bessel_eval(6, z).unwrap();
        let (chi, chip) = riccati_chi(6, z).unwrap();
        assert!(close(chi, -z * e.y, 1e-14));
        assert!(close(chip, -(e.y + z * e.yp), 1e-14));
    }

    #[test]
    fn agrees_with_reference_on_structured_sweep() {
        // Mixed regimes: small/large modulus, near-real, strongly complex.
        let mut max_rel: f64 = 0.0;
        for l in [0usize, 1, 2, 7, 19, 41, 60] {
            for &r in &[0.07, 0.9, 6.0, 31.0, 125.0, 199.0] {
                for &th in &[0.0, 0.4, 1.2, 2.3, 3.14, 4.5, 5.9] {
                    let z = C64::from_polar(r, th);
                    let got = sph_bessel_eval(l, z).unwrap();
                    let want = refimpl::ref_bessel(l, z).unwrap();
                    for (a, b) in [
                        (got.j, want.j),
                        (got.jp, want.jp),
                        (got.y, want.y),
                        (got.yp, want.yp),
                    ] {
                        if b.norm() > 1e-280 {
                            max_rel = max_rel.max((a - b).norm() / b.norm());
                        }
                    }
                }
            }
        }
        assert!(max_rel < 1e-12, "max relative error vs reference: {max_rel:.3e}");
    }

    proptest! {
        #[test]
        fn conjugation_symmetry(l in 0usize..45, re in -60.0f64..60.0, im in -40.0f64..40.0) {
            let z = C64::new(re, im);
            prop_assume!(z.norm() > 1e-3);
            let a = sph_bessel_eval(l, z).unwrap();
            let b = sph_bessel_eval(l, z.conj()).unwrap();
            prop_assert!(close(a.j.conj(), b.j, 1e-13));
            prop_assert!(close(a.y.conj(), b.y, 1e-13));
            prop_assert!(close(a.jp.conj(), b.jp, 1e-13));
            prop_assert!(close(a.yp.conj(), b.yp, 1e-13));
        }

        #[test]
        fn wronskian_holds_on_random_points(l in 0usize..50, re in -150.0f64..150.0, im in -80.0f64..80.0) {
            let z = C64::new(re, im);
            prop_assume!(z.norm() > 0.05);
            let e = sph_bessel_eval(l, z).unwrap();
            prop_assert!(e.wronskian_residual < 1e-10,
                "wronskian residual {} at l={}, z={}", e.wronskian_residual, l, z);
        }
    }
}
