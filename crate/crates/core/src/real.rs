//! Double-double scalar used for every continued-fraction orbit.
//!
//! The maps amplify rounding error by `1/x²` per step, so an orbit carried in
//! plain `f64` drifts after roughly forty golden-mean steps. Orbits are carried
//! in double-double (about 106 bits); the logarithms and β-products that are
//! summed only need `f64`.

pub use twofloat::TwoFloat as Real;

/// Square root of 5 to double-double precision.
pub fn sqrt5() -> Real {
    Real::from(5.0).sqrt()
}

/// The golden mean `(√5 − 1)/2`, the fixed point of the Gauss map.
pub fn golden() -> Real {
    (sqrt5() - 1.0) / 2.0
}

/// `(3 − √5)/2 = 1 − g`, the fixed point of the by-excess map with digit 3.
pub fn golden_sq() -> Real {
    (Real::from(3.0) - sqrt5()) / 2.0
}

/// `√2 − 1`, the Gauss fixed point with digit 2.
pub fn silver() -> Real {
    Real::from(2.0).sqrt() - 1.0
}

/// `p/q` rounded to double-double.
pub fn ratio(p: i64, q: i64) -> Real {
    Real::from(p as f64) / q as f64
}

/// `a / b` to double-double accuracy.
///
/// The crate's own `Real / Real` forms the residual `1 − b·(1/b)` without a
/// fused multiply-add, which leaves the quotient accurate only to `f64`.
/// Dividing by an `f64` is exact enough, so the quotient is refined by two
/// residual corrections.
pub fn div(a: Real, b: Real) -> Real {
    let q1 = a.hi() / b.hi();
    let r = a - b * q1;
    let q2 = r.hi() / b.hi();
    let r = r - b * q2;
    let q3 = r.hi() / b.hi();
    Real::new_add(q1, q2) + q3
}

pub fn recip(b: Real) -> Real {
    div(Real::from(1.0), b)
}

pub fn to_f64(x: Real) -> f64 {
    x.hi() + x.lo()
}

/// Natural logarithm accurate to `f64` precision using both limbs.
pub fn ln(x: Real) -> f64 {
    x.hi().ln() + x.lo() / x.hi()
}

/// Fractional part `x − ⌊x⌋ ∈ [0, 1)`.
pub fn frac(x: Real) -> Real {
    let f = x - x.floor();
    if f < 0.0 {
        f + 1.0
    } else if f >= 1.0 {
        f - 1.0
    } else {
        f
    }
}

pub fn is_finite(x: Real) -> bool {
    x.hi().is_finite() && x.lo().is_finite()
}

/// Relative spacing of double-double numbers.
pub const DD_EPS: f64 = 1.232_595_164_407_831e-32; // 2^-106

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_is_gauss_fixed_point() {
        let g = golden();
        let back = recip(g) - 1.0;
        assert!(to_f64((back - g).abs()) < 1e-30);
    }

    #[test]
    fn division_keeps_both_limbs() {
        let third = recip(Real::from(3.0));
        assert!(to_f64((third * 3.0 - 1.0).abs()) < 1e-31);
        let a = Real::new_add(1.0, 1e-20);
        let b = golden();
        assert!(to_f64((div(a, b) * b - a).abs()) < 1e-31);
    }

    #[test]
    fn frac_handles_negative_and_exact_values() {
        assert_eq!(to_f64(frac(Real::from(-0.25))), 0.75);
        assert_eq!(to_f64(frac(Real::from(3.0))), 0.0);
        let x = golden() - 2.0;
        assert!(to_f64((frac(x) - golden()).abs()) < 1e-31);
    }

    #[test]
    fn ln_uses_low_limb() {
        let x = Real::new_add(1.0, 1e-20);
        assert!((ln(x) - 1e-20).abs() < 1e-35);
    }
}
