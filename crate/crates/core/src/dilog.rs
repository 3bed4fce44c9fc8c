//! Principal-branch dilogarithm on `ℂ`, cut along `[1, ∞)`.
//!
//! Points with `|z| > 1` are inverted, points with `Re z > 1/2` reflected,
//! and the remainder summed as a Bernoulli series in `u = −log(1 − z)`
//! (`|u| < 1.8` there, so the series converges like `0.075^k`). On the cut
//! the value is the limit from the lower half-plane.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

const PI2_6: f64 = PI * PI / 6.0;

/// `B_{2k} / (2k + 1)!` for `k = 1..`.
const BERNOULLI: [f64; 22] = [
    0.027777777777777776,
    -0.0002777777777777778,
    4.72411186696901e-06,
    -9.185773074661964e-08,
    1.8978869988971e-09,
    -4.0647616451442256e-11,
    8.921691020456452e-13,
    -1.9939295860721074e-14,
    4.518980029619918e-16,
    -1.0356517612181247e-17,
    2.395218621026187e-19,
    -5.581785874325009e-21,
    1.3091507554183213e-22,
    -3.0874198024267403e-24,
    7.315975652702203e-26,
    -1.740845657234001e-27,
    4.1576356446139e-29,
    -9.962148488284622e-31,
    2.3940344248961652e-32,
    -5.76834735536739e-34,
    1.393179479647008e-35,
    -3.3721219654850894e-37,
];

/// `Li₂(z)`.
pub fn li2(z: Complex64) -> Result<Complex64> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Domain(format!("non-finite dilogarithm argument {z}")));
    }
    Ok(li2_unchecked(z))
}

pub(crate) fn li2_unchecked(z: Complex64) -> Complex64 {
    if z.im == 0.0 && z.re > 1.0 {
        // Lower lip of the cut.
        let x = z.re;
        let l = x.ln();
        let re = 2.0 * PI2_6 - 0.5 * l * l - li2_disk(Complex64::new(1.0 / x, 0.0)).re;
        return Complex64::new(re, -PI * l);
    }
    if z.norm_sqr() > 1.0 {
        let l = (-z).ln();
        return -PI2_6 - 0.5 * l * l - li2_disk(z.inv());
    }
    li2_disk(z)
}

fn li2_disk(z: Complex64) -> Complex64 {
    if z == Complex64::new(0.0, 0.0) {
        return z;
    }
    if z == Complex64::new(1.0, 0.0) {
        return Complex64::new(PI2_6, 0.0);
    }
    if z.re > 0.5 {
        let w = Complex64::new(1.0, 0.0) - z;
        return PI2_6 - z.ln() * w.ln() - bernoulli_series(w);
    }
    bernoulli_series(z)
}

fn bernoulli_series(z: Complex64) -> Complex64 {
    let u = -(Complex64::new(1.0, 0.0) - z).ln();
    let u2 = u * u;
    let mut sum = u - 0.25 * u2;
    let mut pow = u * u2;
    for c in BERNOULLI {
        let term = pow * c;
        sum += term;
        if term.norm() < 1e-18 * sum.norm() {
            break;
        }
        pow *= u2;
    }
    sum
}
