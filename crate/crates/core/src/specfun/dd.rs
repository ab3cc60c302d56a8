//! Double-double arithmetic (~31 significant digits) used only by the
//! reference implementation in [`super::refimpl`].
//!
//! A value is an unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`.
//! The error-free transformations are the classical Dekker/Knuth ones;
//! products rely on `f64::mul_add` for the exact residual.

/// Error-free sum: returns `(s, e)` with `s = fl(a + b)` and `a + b = s + e`.
#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

/// Like [`two_sum`] but requires `|a| >= |b|`.
#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let e = b - (s - a);
    (s, e)
}

/// Error-free product via fused multiply-add.
#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let e = a.mul_add(b, -p);
    (p, e)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

pub const DD_ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
pub const DD_ONE: Dd = Dd { hi: 1.0, lo: 0.0 };
/// pi/2 to double-double precision.
pub const DD_FRAC_PI_2: Dd = Dd {
    hi: 1.570_796_326_794_896_6,
    lo: 6.123_233_995_736_766e-17,
};
/// ln 2 to double-double precision.
pub const DD_LN_2: Dd = Dd {
    hi: 0.693_147_180_559_945_3,
    lo: 2.319_046_813_846_299_6e-17,
};

impl Dd {
    #[inline]
    pub fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn add(self, other: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, other.hi);
        let (t1, t2) = two_sum(self.lo, other.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        let (hi, lo) = quick_two_sum(s1, s2 + t2);
        Dd { hi, lo }
    }

    #[inline]
    pub fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    #[inline]
    pub fn sub(self, other: Dd) -> Dd {
        self.add(other.neg())
    }

    #[inline]
    pub fn mul(self, other: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, other.hi);
        let e = e + self.hi * other.lo + self.lo * other.hi;
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }

    #[inline]
    pub fn mul_f64(self, other: f64) -> Dd {
        let (p, e) = two_prod(self.hi, other);
        let e = e + self.lo * other;
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }

    #[inline]
    pub fn div(self, other: Dd) -> Dd {
        let q1 = self.hi / other.hi;
        let r = self.sub(other.mul_f64(q1));
        let q2 = r.hi / other.hi;
        let r = r.sub(other.mul_f64(q2));
        let q3 = r.hi / other.hi;
        let (s, e) = quick_two_sum(q1, q2);
        let (hi, lo) = quick_two_sum(s, e + q3);
        Dd { hi, lo }
    }

    #[inline]
    pub fn div_f64(self, other: f64) -> Dd {
        self.div(Dd::from_f64(other))
    }

    /// Scale by an exact power of two.
    #[inline]
    fn ldexp(self, n: i32) -> Dd {
        let f = (n as f64).exp2();
        Dd { hi: self.hi * f, lo: self.lo * f }
    }

    /// exp(x); arguments up to ~700 in magnitude.
    pub fn exp(self) -> Dd {
        if self.hi > 709.0 {
            return Dd::from_f64(f64::INFINITY);
        }
        if self.hi < -745.0 {
            return DD_ZERO;
        }
        let m = (self.hi / DD_LN_2.hi).round();
        let r = self.sub(DD_LN_2.mul_f64(m));
        // Taylor series on the reduced argument, |r| <= ln2 / 2.
        let mut sum = DD_ONE.add(r);
        let mut term = r;
        let mut k = 2.0;
        loop {
            term = term.mul(r).div_f64(k);
            sum = sum.add(term);
            if term.hi.abs() < 1e-35 * sum.hi.abs().max(1e-300) || k > 40.0 {
                break;
            }
            k += 1.0;
        }
        sum.ldexp(m as i32)
    }

    /// Simultaneous sin and cos with pi/2 argument reduction.
    pub fn sin_cos(self) -> (Dd, Dd) {
        let k = (self.hi / DD_FRAC_PI_2.hi).round();
        let r = self.sub(DD_FRAC_PI_2.mul_f64(k));
        let quadrant = ((k as i64) % 4 + 4) % 4;

        let r2 = r.mul(r);
        // sin(r) = r (1 - r^2/6 + ...), cos(r) = 1 - r^2/2 + ...
        let mut s = DD_ONE;
        let mut c = DD_ONE;
        let mut term_s = DD_ONE;
        let mut term_c = DD_ONE;
        for k in 1..25 {
            let kf = k as f64;
            term_s = term_s.mul(r2).div_f64(2.0 * kf * (2.0 * kf + 1.0)).neg();
            term_c = term_c.mul(r2).div_f64(2.0 * kf * (2.0 * kf - 1.0)).neg();
            s = s.add(term_s);
            c = c.add(term_c);
            if term_s.hi.abs() < 1e-35 && term_c.hi.abs() < 1e-35 {
                break;
            }
        }
        let s = s.mul(r);
        match quadrant {
            0 => (s, c),
            1 => (c, s.neg()),
            2 => (s.neg(), c.neg()),
            _ => (c.neg(), s),
        }
    }

    /// Simultaneous sinh and cosh.
    pub fn sinh_cosh(self) -> (Dd, Dd) {
        if self.hi.abs() < 0.5 {
            let y2 = self.mul(self);
            let mut sh = DD_ONE;
            let mut ch = DD_ONE;
            let mut term_s = DD_ONE;
            let mut term_c = DD_ONE;
            for k in 1..20 {
                let kf = k as f64;
                term_s = term_s.mul(y2).div_f64(2.0 * kf * (2.0 * kf + 1.0));
                term_c = term_c.mul(y2).div_f64(2.0 * kf * (2.0 * kf - 1.0));
                sh = sh.add(term_s);
                ch = ch.add(term_c);
                if term_s.hi.abs() < 1e-35 {
                    break;
                }
            }
            (sh.mul(self), ch)
        } else {
            let e = self.exp();
            let ei = DD_ONE.div(e);
            let sh = e.sub(ei).mul_f64(0.5);
            let ch = e.add(ei).mul_f64(0.5);
            (sh, ch)
        }
    }
}

/// Complex number with double-double components.
#[derive(Clone, Copy, Debug)]
pub struct Cdd {
    pub re: Dd,
    pub im: Dd,
}

pub const CDD_ZERO: Cdd = Cdd { re: DD_ZERO, im: DD_ZERO };

impl Cdd {
    pub fn new(re: Dd, im: Dd) -> Cdd {
        Cdd { re, im }
    }

    pub fn from_c64(z: num_complex::Complex64) -> Cdd {
        Cdd { re: Dd::from_f64(z.re), im: Dd::from_f64(z.im) }
    }

    pub fn to_c64(self) -> num_complex::Complex64 {
        num_complex::Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    pub fn add(self, o: Cdd) -> Cdd {
        Cdd { re: self.re.add(o.re), im: self.im.add(o.im) }
    }

    pub fn sub(self, o: Cdd) -> Cdd {
        Cdd { re: self.re.sub(o.re), im: self.im.sub(o.im) }
    }

    pub fn neg(self) -> Cdd {
        Cdd { re: self.re.neg(), im: self.im.neg() }
    }

    pub fn mul(self, o: Cdd) -> Cdd {
        Cdd {
            re: self.re.mul(o.re).sub(self.im.mul(o.im)),
            im: self.re.mul(o.im).add(self.im.mul(o.re)),
        }
    }

    pub fn mul_f64(self, s: f64) -> Cdd {
        Cdd { re: self.re.mul_f64(s), im: self.im.mul_f64(s) }
    }

    pub fn div_f64(self, s: f64) -> Cdd {
        Cdd { re: self.re.div_f64(s), im: self.im.div_f64(s) }
    }

    pub fn div(self, o: Cdd) -> Cdd {
        let den = o.re.mul(o.re).add(o.im.mul(o.im));
        let num = self.mul(Cdd { re: o.re, im: o.im.neg() });
        Cdd { re: num.re.div(den), im: num.im.div(den) }
    }

    /// Squared magnitude collapsed to f64; used for size comparisons only.
    pub fn norm_sqr_f64(self) -> f64 {
        self.re.hi * self.re.hi + self.im.hi * self.im.hi
    }

    /// sin(x + iy) = sin x cosh y + i cos x sinh y.
    pub fn sin(self) -> Cdd {
        let (sx, cx) = self.re.sin_cos();
        let (shy, chy) = self.im.sinh_cosh();
        Cdd { re: sx.mul(chy), im: cx.mul(shy) }
    }

    /// cos(x + iy) = cos x cosh y - i sin x sinh y.
    pub fn cos(self) -> Cdd {
        let (sx, cx) = self.re.sin_cos();
        let (shy, chy) = self.im.sinh_cosh();
        Cdd { re: cx.mul(chy), im: sx.mul(shy).neg() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn add_tracks_tiny_components() {
        let a = Dd::from_f64(1.0);
        let b = Dd::from_f64(1e-25);
        let s = a.add(b).sub(a);
        assert!((s.to_f64() - 1e-25).abs() < 1e-40);
    }

    #[test]
    fn mul_div_roundtrip() {
        let a = Dd::from_f64(std::f64::consts::PI);
        let b = Dd::from_f64(std::f64::consts::E);
        let c = a.mul(b).div(b);
        let err = c.sub(a);
        assert!(err.to_f64().abs() < 1e-31);
    }

    #[test]
    fn exp_matches_known_value() {
        // e - fl(e) = 1.4456468917292501e-16 (mpmath, 45 digits).
        let e = DD_ONE.exp();
        assert_eq!(e.hi, std::f64::consts::E);
        let tail = e.sub(Dd::from_f64(std::f64::consts::E));
        assert!((tail.to_f64() - 1.4456468917292501e-16).abs() < 1e-26);

        // e^200 = 7.22597376812574925817747704219e86; relative gap between
        // the true value and fl(e^200) is 4.144131222572533e-17.
        let big = Dd::from_f64(200.0).exp();
        assert_eq!(big.hi, 7.225973768125749e86);
        let rel = big.sub(Dd::from_f64(7.225973768125749e86)).div(big);
        assert!((rel.to_f64() - 4.144131222572533e-17).abs() < 1e-27);
    }

    #[test]
    fn sin_cos_pythagoras_at_large_argument() {
        for &x in &[0.3, 1.7, 55.0, 199.4, -123.456] {
            let (s, c) = Dd::from_f64(x).sin_cos();
            let one = s.mul(s).add(c.mul(c));
            assert!((one.to_f64() - 1.0).abs() < 1e-29, "x = {x}");
            // Cross-check against f64 libm at its own precision.
            assert!((s.to_f64() - x.sin()).abs() < 1e-14);
            assert!((c.to_f64() - x.cos()).abs() < 1e-14);
        }
    }

    #[test]
    fn complex_sin_against_f64() {
        let z = num_complex::Complex64::new(3.0, 2.0);
        let s = Cdd::from_c64(z).sin().to_c64();
        let expect = z.sin();
        assert!((s - expect).norm() < 1e-13 * expect.norm());
    }

    #[test]
    fn sinh_cosh_identity_small_arguments() {
        // cosh^2 - sinh^2 = 1 is only testable while e^{2y} leaves headroom
        // below the double-double epsilon.
        for &y in &[0.01, 0.49, 0.51, 4.0, 8.0] {
            let (sh, ch) = Dd::from_f64(y).sinh_cosh();
            let d = ch.mul(ch).sub(sh.mul(sh));
            assert!((d.to_f64() - 1.0).abs() < 1e-24, "y = {y}");
        }
    }

    #[test]
    fn exp_reciprocal_consistency_large_arguments() {
        for &y in &[20.0, 120.0, 200.0, 700.0] {
            let e = Dd::from_f64(y).exp();
            let ei = Dd::from_f64(-y).exp();
            let one = e.mul(ei);
            assert!((one.to_f64() - 1.0).abs() < 1e-29, "y = {y}");
        }
    }

    #[test]
    fn sin_cos_at_200_match_golden() {
        // mpmath hi/lo splits: sin 200 = fl + 4.5985118177408985e-17,
        // cos 200 = fl - 2.7733408070520052e-17.
        let (s, c) = Dd::from_f64(200.0).sin_cos();
        let st = s.sub(Dd { hi: -0.8732972972139946, lo: 4.5985118177408985e-17 });
        let ct = c.sub(Dd { hi: 0.48718767500700594, lo: -2.7733408070520052e-17 });
        assert!(st.to_f64().abs() < 1e-29, "sin tail off by {:e}", st.to_f64());
        assert!(ct.to_f64().abs() < 1e-29, "cos tail off by {:e}", ct.to_f64());
    }
}
