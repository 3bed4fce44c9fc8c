//! Small real special-function helpers shared by the closed forms.

use std::f64::consts::PI;

/// `B_{2k} / (2k (2k − 1))` for `k = 1..=7`.
const STIRLING: [f64; 7] =
    [1.0 / 12.0, -1.0 / 360.0, 1.0 / 1260.0, -1.0 / 1680.0, 1.0 / 1188.0, -691.0 / 360_360.0, 1.0 / 156.0];

/// Stirling correction `lnΓ(z) − [(z − ½) ln z − z + ½ ln 2π]`, for `z ≥ 20`.
pub fn stirling_tail(z: f64) -> f64 {
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    let mut pow = inv;
    let mut s = 0.0;
    for c in STIRLING {
        s += c * pow;
        pow *= inv2;
    }
    s
}

/// `lnΓ(z)` for `z > 0`.
pub fn ln_gamma(z: f64) -> f64 {
    debug_assert!(z > 0.0);
    let mut shift = 0.0;
    let mut w = z;
    while w < 20.0 {
        shift += w.ln();
        w += 1.0;
    }
    (w - 0.5) * w.ln() - w + 0.5 * (2.0 * PI).ln() + stirling_tail(w) - shift
}
