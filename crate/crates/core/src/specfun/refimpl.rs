//! Reference evaluator for spherical Bessel functions in double-double
//! arithmetic. Slow and simple on purpose: it exists to certify the f64
//! production path in [`super`], not to be called in solver loops.
//!
//! Regimes:
//! - ascending series when the first term ratio |z|^2 / (2(2l+3)) <= 1/2,
//!   where every term shrinks and there is no cancellation;
//! - otherwise downward recurrence normalized against sin/cos of z evaluated
//!   in double-double, self-validated by re-running with a deeper start.
//!
//! y_l always goes upward from y_0, y_1 (the dominant solution direction).

use super::dd::{Cdd, Dd, CDD_ZERO, DD_ONE};
use crate::{Error, Result, C64};

/// j, y and first derivatives at a single order.
#[derive(Clone, Copy, Debug)]
pub struct RefBessel {
    pub j: C64,
    pub jp: C64,
    pub y: C64,
    pub yp: C64,
}

fn series_converges(l: usize, z_abs2: f64) -> bool {
    z_abs2 <= (2 * l + 3) as f64
}

/// Ascending series, valid when [`series_converges`]; all terms same-signed
/// in magnitude decay so double-double precision is kept in full.
fn series_j(l: usize, z: Cdd) -> Result<Cdd> {
    // Leading term z^l / (2l+1)!! as a running product to dodge overflow.
    let mut t = Cdd::new(DD_ONE, super::dd::DD_ZERO);
    for j in 1..=l {
        t = t.mul(z).div_f64((2 * j + 1) as f64);
    }
    let mz2 = z.mul(z).neg();
    let mut sum = t;
    for k in 1..500 {
        let kf = k as f64;
        t = t.mul(mz2).div_f64(2.0 * kf * (2 * l + 2 * k + 1) as f64);
        sum = sum.add(t);
        // 1-norms on hi parts: squaring underflows for tiny magnitudes.
        let tn = t.re.hi.abs() + t.im.hi.abs();
        let sn = sum.re.hi.abs() + sum.im.hi.abs();
        if tn <= 1e-36 * sn.max(1e-250) {
            return Ok(sum);
        }
    }
    Err(Error::NonConvergence("reference series for spherical j".into()))
}

fn j0_j1(z: Cdd) -> (Cdd, Cdd) {
    let s = z.sin();
    let c = z.cos();
    let j0 = s.div(z);
    let j1 = j0.sub(c).div(z);
    (j0, j1)
}

/// One downward pass from `start`, rescaled to avoid overflow; entries for
/// orders <= l_max are recorded and normalized against j_0 or j_1.
fn miller_pass(l_max: usize, z: Cdd, zinv: Cdd, start: usize) -> Vec<Cdd> {
    let mut stored = vec![CDD_ZERO; l_max + 1];
    let mut p_next = CDD_ZERO;
    let mut p_cur = Cdd::new(Dd::from_f64(1e-250), super::dd::DD_ZERO);
    if start <= l_max {
        stored[start] = p_cur;
    }
    for k in (1..=start).rev() {
        let p_prev = p_cur.mul_f64((2 * k + 1) as f64).mul(zinv).sub(p_next);
        p_next = p_cur;
        p_cur = p_prev;
        // Threshold kept below sqrt(f64 max): complex division squares the
        // denominator's magnitude, so stored entries must stay modest.
        if p_cur.re.hi.abs() > 1e120 || p_cur.im.hi.abs() > 1e120 {
            p_cur = p_cur.mul_f64(1e-120);
            p_next = p_next.mul_f64(1e-120);
            for e in stored.iter_mut() {
                *e = e.mul_f64(1e-120);
            }
        }
        if k - 1 <= l_max {
            stored[k - 1] = p_cur;
        }
    }
    let (j0, j1) = j0_j1(z);
    let scale = if j0.norm_sqr_f64() >= j1.norm_sqr_f64() {
        j0.div(stored[0])
    } else {
        j1.div(stored[1.min(l_max)])
    };
    stored.into_iter().map(|p| p.mul(scale)).collect()
}

/// All of j_0..j_{l_max} by self-validated downward recurrence.
fn miller_j_all(l_max: usize, z: Cdd) -> Result<Vec<Cdd>> {
    if l_max == 0 {
        return Ok(vec![j0_j1(z).0]);
    }
    let za = z.norm_sqr_f64().sqrt();
    let zinv = Cdd::new(DD_ONE, super::dd::DD_ZERO).div(z);
    let base = l_max.max(za.ceil() as usize).max(1);
    let mut delta = 60 + (0.5 * za) as usize;
    let mut prev: Option<Vec<Cdd>> = None;
    for _ in 0..6 {
        let cur = miller_pass(l_max, z, zinv, base + delta);
        if let Some(p) = &prev {
            let mut ok = true;
            for i in 0..cur.len() {
                // Tolerance relative to the neighborhood magnitude: an
                // entry that is accidentally tiny next to its neighbors
                // (j_l near one of its real zeros) is only reproducible to
                // absolute accuracy at that scale.
                let local = cur[i]
                    .norm_sqr_f64()
                    .sqrt()
                    .max(if i > 0 { cur[i - 1].norm_sqr_f64().sqrt() } else { 0.0 })
                    .max(cur.get(i + 1).map_or(0.0, |v| v.norm_sqr_f64().sqrt()));
                if local < 1e-280 {
                    continue;
                }
                let diff = p[i].sub(cur[i]);
                if diff.norm_sqr_f64().sqrt() > 1e-26 * local {
                    ok = false;
                    break;
                }
            }
            if ok {
                return Ok(cur);
            }
        }
        prev = Some(cur);
        delta = delta * 2 + 40;
    }
    Err(Error::NonConvergence(
        "downward recurrence for spherical j did not stabilize".into(),
    ))
}

/// j_0..j_{l_max}: series where it converges without cancellation, one
/// downward-recurrence ladder for the prefix below the split.
fn ref_ladder(l_max: usize, z: Cdd, z_abs2: f64) -> Result<Vec<Cdd>> {
    let split = (0..=l_max)
        .find(|&l| series_converges(l, z_abs2))
        .unwrap_or(l_max + 1);
    let mut vals = vec![CDD_ZERO; l_max + 1];
    if split > 0 {
        let prefix = miller_j_all((split - 1).min(l_max), z)?;
        vals[..prefix.len()].copy_from_slice(&prefix);
    }
    for (l, v) in vals.iter_mut().enumerate().take(l_max + 1).skip(split) {
        *v = series_j(l, z)?;
    }
    Ok(vals)
}

/// y_0..y_{l_max} given j_0..j_{l_max}. Same regime split as the production
/// path: plain upward march near the real axis, cross-Wronskian chain
/// y_l = (j_l y_{l-1} - 1/z^2) / j_{l-1} off it (the plain march loses
/// e^{2|Im z|} of precision past the turning point, which even
/// double-double cannot absorb for |Im z| ~ 40).
fn y_ladder(l_max: usize, z: Cdd, j: &[Cdd]) -> Result<Vec<Cdd>> {
    let zinv = Cdd::new(DD_ONE, super::dd::DD_ZERO).div(z);
    let s = z.sin();
    let c = z.cos();
    let y0 = c.neg().div(z);
    let mut y = Vec::with_capacity(l_max + 1);
    y.push(y0);
    if z.im.hi.abs() <= 2.5 {
        if l_max >= 1 {
            y.push(y0.sub(s).div(z));
        }
        for k in 1..l_max {
            let next = y[k].mul_f64((2 * k + 1) as f64).mul(zinv).sub(y[k - 1]);
            y.push(next);
        }
    } else {
        let w = zinv.mul(zinv);
        for l in 1..=l_max {
            y.push(j[l].mul(y[l - 1]).sub(w).div(j[l - 1]));
        }
    }
    for (k, v) in y.iter().enumerate() {
        if !v.re.hi.is_finite() || !v.im.hi.is_finite() {
            return Err(Error::Overflow(format!("spherical y overflow at order {k}")));
        }
    }
    Ok(y)
}

/// f_l' = f_{l-1} - (l+1)/z f_l, rearranged from the pair (f_l, f_{l+1}):
/// f_l' = l/z f_l - f_{l+1}.
fn derivative(l: usize, z: Cdd, f_l: Cdd, f_lp1: Cdd) -> Cdd {
    f_l.mul_f64(l as f64).div(z).sub(f_lp1)
}

/// Evaluate j_l, y_l and derivatives; `z` must be nonzero.
pub fn ref_bessel(l: usize, z: C64) -> Result<RefBessel> {
    if z == C64::new(0.0, 0.0) {
        return Err(Error::validation("reference evaluator requires z != 0"));
    }
    let zd = Cdd::from_c64(z);
    let z_abs2 = z.norm_sqr();
    let js = ref_ladder(l + 1, zd, z_abs2)?;
    let (j_l, j_lp1) = (js[l], js[l + 1]);
    let ys = y_ladder(l + 1, zd, &js)?;
    let (y_l, y_lp1) = (ys[l], ys[l + 1]);
    let jp = derivative(l, zd, j_l, j_lp1);
    let yp = derivative(l, zd, y_l, y_lp1);
    Ok(RefBessel {
        j: j_l.to_c64(),
        jp: jp.to_c64(),
        y: y_l.to_c64(),
        yp: yp.to_c64(),
    })
}

/// j_0..j_{l_max} in one call; entries may round to zero in f64.
pub fn ref_j_all(l_max: usize, z: C64) -> Result<Vec<C64>> {
    if z == C64::new(0.0, 0.0) {
        return Err(Error::validation("reference evaluator requires z != 0"));
    }
    let zd = Cdd::from_c64(z);
    let z_abs2 = z.norm_sqr();
    Ok(ref_ladder(l_max, zd, z_abs2)?
        .into_iter()
        .map(|v| v.to_c64())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: C64, b: C64, rel: f64) -> bool {
        (a - b).norm() <= rel * b.norm().max(f64::MIN_POSITIVE)
    }

    // Expected values below were generated with mpmath at 40 decimal digits
    // via j_l(z) = sqrt(pi/(2z)) J_{l+1/2}(z) and the corresponding y_l.

    #[test]
    fn series_regime_small_argument() {
        let z = C64::new(0.05, 0.02);
        let e = ref_bessel(8, z).unwrap();
        let want = C64::new(-2.042623967816357009960997e-18, 1.999837199795594310337478e-19);
        assert!(close(e.j, want, 1e-14), "j8 got {} want {}", e.j, want);
        let ey = ref_bessel(2, z).unwrap();
        let want_y = C64::new(-8004.034704096932737799826, 17470.33659025141066318377);
        assert!(close(ey.y, want_y, 1e-14));
    }

    #[test]
    fn moderate_complex_argument() {
        let z = C64::new(3.0, 2.0);
        let e = ref_bessel(5, z).unwrap();
        assert!(close(
            e.j,
            C64::new(-0.03826973982196613007535242, 0.03058956365657633682369056),
            1e-14
        ));
        assert!(close(
            e.jp,
            C64::new(-0.006752078072838507748448199, 0.06444093794676611118929486),
            1e-14
        ));
        assert!(close(
            e.y,
            C64::new(0.4751373098121195837623721, 0.1248006821577663136389336),
            1e-14
        ));
        assert!(close(
            e.yp,
            C64::new(-0.8177771945079648932241598, 0.4236987170170164196415701),
            1e-14
        ));
    }

    #[test]
    fn downward_recurrence_regime() {
        let z = C64::new(5.0, 1.0);
        let e = ref_bessel(4, z).unwrap();
        assert!(close(
            e.y,
            C64::new(-0.1776776583634940895665928, 0.1643585604734927501822772),
            1e-14
        ));
        assert!(close(
            e.yp,
            C64::new(0.1540281636119662339227843, -0.0054367378584070211015059),
            1e-14
        ));

        // Riccati values psi_l = z j_l, psi_l' = j_l + z j_l'.
        let z = C64::new(8.0, -0.5);
        let e = ref_bessel(10, z).unwrap();
        let psi = z * e.j;
        let psip = e.j + z * e.jp;
        assert!(close(
            psi,
            C64::new(0.1291418825589790588905082, -0.06858418233635983010958026),
            1e-14
        ));
        assert!(close(
            psip,
            C64::new(0.1338368727108011638072114, -0.05149020356348252104494482),
            1e-14
        ));
    }

    #[test]
    fn purely_imaginary_argument_ladder() {
        let z = C64::new(0.0, 10.0);
        let all = ref_j_all(40, z).unwrap();
        assert!(close(all[0], C64::new(1101.323287470339337723652, 0.0), 1e-14));
        assert!(close(all[1], C64::new(0.0, 991.1909632632983801997724), 1e-14));
        assert!(close(all[5], C64::new(0.0, 236.8395827065114121423479), 1e-14));
        assert!(close(all[20], C64::new(2.371543577256102519639257e-5, 0.0), 1e-14));
        assert!(close(all[40], C64::new(2.81471582952412325797107e-21, 0.0), 1e-13));
    }

    #[test]
    fn far_field_arguments() {
        let e = ref_bessel(60, C64::new(200.0, 0.0)).unwrap();
        assert!(close(e.j, C64::new(0.004883912424765821529838469, 0.0), 1e-14));

        let e = ref_bessel(40, C64::new(120.0, 80.0)).unwrap();
        assert!(close(
            e.j,
            C64::new(-2.61111473136694357331308e30, 7.519482307180026548621545e30),
            1e-14
        ));
        let e0 = ref_bessel(0, C64::new(120.0, 80.0)).unwrap();
        assert!(close(
            e0.j,
            C64::new(1.795478903088588315428408e32, 6.826262772103997873526401e31),
            1e-14
        ));

        let e = ref_bessel(60, C64::new(0.0, 200.0)).unwrap();
        assert!(close(e.j, C64::new(2.009058205495404561947714e80, 0.0), 1e-14));
        let e3 = ref_bessel(3, C64::new(0.0, 200.0)).unwrap();
        assert!(close(e3.j, C64::new(0.0, -1.752972686636052175156028e84), 1e-14));
    }

    #[test]
    fn wronskian_identity_internal_precision() {
        // j y' - j' y = 1/z^2, checked well below f64 roundoff by evaluating
        // the residual in double-double. Scaled by the largest participating
        // term: the products grow like e^{2|Im z|} and their cancellation is
        // the quantity under test.
        for &(l, re, im) in &[
            (0usize, 1.3, 0.4),
            (5, 3.0, 2.0),
            (12, 0.2, 0.1),
            (30, 55.0, -20.0),
            (60, 180.0, 40.0),
        ] {
            let z = Cdd::from_c64(C64::new(re, im));
            let z_abs2 = re * re + im * im;
            let js = ref_ladder(l + 1, z, z_abs2).unwrap();
            let (j_l, j_lp1) = (js[l], js[l + 1]);
            let ys = y_ladder(l + 1, z, &js).unwrap();
            let (y_l, y_lp1) = (ys[l], ys[l + 1]);
            let jp = derivative(l, z, j_l, j_lp1);
            let yp = derivative(l, z, y_l, y_lp1);
            let t1 = j_l.mul(yp);
            let t2 = jp.mul(y_l);
            let rhs = Cdd::new(DD_ONE, super::super::dd::DD_ZERO).div(z.mul(z));
            let scale = t1
                .norm_sqr_f64()
                .max(t2.norm_sqr_f64())
                .max(rhs.norm_sqr_f64())
                .sqrt();
            let resid = t1.sub(t2).sub(rhs).norm_sqr_f64().sqrt() / scale;
            assert!(resid < 1e-28, "l = {l}, z = {re}+{im}i, resid = {resid:.3e}");
        }
    }

    #[test]
    fn conjugation_symmetry() {
        for &(l, re, im) in &[(3usize, 2.0, 5.0), (25, 80.0, 3.0), (7, 0.3, 0.9)] {
            let a = ref_bessel(l, C64::new(re, im)).unwrap();
            let b = ref_bessel(l, C64::new(re, -im)).unwrap();
            assert!(close(a.j.conj(), b.j, 1e-14));
            assert!(close(a.y.conj(), b.y, 1e-14));
            assert!(close(a.jp.conj(), b.jp, 1e-14));
        }
    }

    #[test]
    fn ladder_matches_single_orders() {
        let z = C64::new(7.0, -3.0);
        let all = ref_j_all(25, z).unwrap();
        for l in [0usize, 1, 9, 25] {
            let single = ref_bessel(l, z).unwrap();
            assert!(close(all[l], single.j, 1e-13), "l = {l}");
        }
    }

    #[test]
    fn rejects_zero_argument() {
        assert!(ref_bessel(3, C64::new(0.0, 0.0)).is_err());
    }
}
