//! Complex Brjuno and Wilton functions on the upper half-plane as truncated
//! sums of dilogarithm terms over reduced fractions `p/q`, each paired with
//! its Farey parents `p′/q′ < p/q < p″/q″`.
//!
//! Fractions are taken from one period centred on `Re z`, and each one is
//! summed over all of its integer translates `p/q + k`: the sum over `ℚ` is
//! not the same as the sum over one period evaluated at `z`. Far translates
//! are handled through the expansion of a term in `1/(q z − p)`, whose
//! leading order cancels the log term and whose next two orders sum in
//! closed form over `k`.

use num_complex::Complex64;
use num_integer::Integer;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

use crate::cf::{farey_parents, FareyTriple};
use crate::dilog::li2_unchecked;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncationPlan {
    pub q_max: i64,
    /// Fractions with `q > q_min_keep` farther than this from `Re z` are skipped.
    pub window: f64,
    pub q_min_keep: i64,
}

impl Default for TruncationPlan {
    fn default() -> Self {
        TruncationPlan { q_max: 400, window: 0.5, q_min_keep: 40 }
    }
}

impl TruncationPlan {
    pub fn with_q_max(q_max: i64) -> Self {
        TruncationPlan { q_max, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.q_max < 1 {
            return Err(Error::Domain(format!("q_max = {} must be at least 1", self.q_max)));
        }
        if !(self.window > 0.0) || self.q_min_keep < 0 {
            return Err(Error::Domain("window must be positive and q_min_keep non-negative".into()));
        }
        Ok(())
    }
}

/// One fraction's contribution to each sum, before the common `−1/π`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TermContribution {
    pub farey: FareyTriple,
    pub value_b: Complex64,
    pub value_w: Complex64,
    pub value_semi: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComplexSums {
    pub brjuno: Complex64,
    pub wilton: Complex64,
    pub semi: Complex64,
    pub terms: usize,
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// `(p − q z)·[Li₂((p − q z)/d) − base]` with `d = q₀ z − p₀`.
fn bracket(p: i64, q: i64, z: Complex64, d: Complex64, base: Complex64) -> Complex64 {
    let a = c(p as f64) - z * q as f64;
    a * (li2_unchecked(a / d) - base)
}

struct Bases {
    lower: Complex64,
    upper: Complex64,
    log_b: f64,
    log_w: f64,
    log_s: f64,
}

impl Bases {
    fn new(t: &FareyTriple) -> Self {
        let q = t.q as f64;
        let (q1, q2) = (t.q1 as f64, t.q2 as f64);
        Bases {
            lower: li2_unchecked(c(-q1 / q)),
            upper: li2_unchecked(c(-q2 / q)),
            log_b: ((q + q2) / (q + q1)).ln() / q,
            log_w: ((q + q1) * (q + q2) / (q * q)).ln() / q,
            log_s: ((q + q2) / q).ln() / q,
        }
    }
}

fn single_with(t: &FareyTriple, z: Complex64, k: &Bases) -> (Complex64, Complex64, Complex64) {
    let d = z * t.q as f64 - t.p as f64;
    let lower = bracket(t.p1, t.q1, z, d, k.lower);
    let upper = bracket(t.p2, t.q2, z, d, k.upper);
    (lower + upper + k.log_b, -lower + upper + k.log_w, upper + k.log_s)
}

/// The `(𝓑, 𝓦, ½(𝓑 + 𝓦))` terms of one fraction at one point, before the
/// common `−1/π`.
pub fn single_term(t: &FareyTriple, z: Complex64) -> (Complex64, Complex64, Complex64) {
    single_with(t, z, &Bases::new(t))
}

/// `Li₂′, Li₂″, Li₂‴` at real `w ∈ [−1, 0]`.
fn li2_derivatives(w: f64) -> (f64, f64, f64) {
    if w.abs() < 0.25 {
        let (mut d1, mut d2, mut d3) = (0.0, 0.0, 0.0);
        let mut pow = 1.0;
        for j in 0..40 {
            let j = j as f64;
            d1 += pow / (j + 1.0);
            d2 += pow * (j + 1.0) / (j + 2.0);
            d3 += pow * (j + 1.0) * (j + 2.0) / (j + 3.0);
            pow *= w;
        }
        return (d1, d2, d3);
    }
    let l = (1.0 - w).ln();
    let d1 = -l / w;
    let d2 = 1.0 / (w * (1.0 - w)) + l / (w * w);
    let d3 = -(1.0 - 2.0 * w) / (w * w * (1.0 - w).powi(2)) - 2.0 * l / w.powi(3) - 1.0 / (w * w * (1.0 - w));
    (d1, d2, d3)
}

/// Coefficients of `e` and `e²`, `e = 1/(q d)`, in the large-`d` expansion
/// of one bracket with parent denominator `q′` (the `e⁰` part cancels
/// against the log term).
fn far_field(q_parent: i64, q: i64, upper: bool) -> (f64, f64) {
    let w = -(q_parent as f64) / q as f64;
    let (d1, d2, d3) = li2_derivatives(w);
    let s = if upper { 1.0 } else { -1.0 };
    let qf = q as f64;
    ((w * d2 / 2.0 + d1) / qf, s * (w * d3 / 6.0 + d2 / 2.0) / qf)
}

/// Number of translates `p/q + k`, `|k| ≤ K`, summed term by term; the
/// remainder of the expansion beyond `e²` is `O(q⁻⁷ K⁻²)`.
fn translate_cutoff(q: i64) -> i64 {
    let k = (TRANSLATE_SCALE / (q as f64).powi(7)).sqrt().ceil() as i64;
    k.max(2)
}

const TRANSLATE_SCALE: f64 = 1e8;

/// One fraction's contribution summed over all its integer translates.
///
/// The translates with `|k| ≤ K` are evaluated directly. The rest are
/// replaced by the `e` and `e²` terms of the far-field expansion, whose
/// full sums over `k` are `π cot(πu)/q²` and `π² csc²(πu)/q⁴` with
/// `u = z − p/q`.
pub fn term(t: &FareyTriple, z: Complex64) -> TermContribution {
    let kmax = translate_cutoff(t.q);
    let qf = t.q as f64;
    let u = z - t.p as f64 / qf;
    let mut direct = (Complex64::default(), Complex64::default(), Complex64::default());
    let mut e1 = Complex64::default();
    let mut e2 = Complex64::default();
    let bases = Bases::new(t);
    for k in -kmax..=kmax {
        let zk = z - k as f64;
        let (b, w, s) = single_with(t, zk, &bases);
        direct.0 += b;
        direct.1 += w;
        direct.2 += s;
        let e = (zk * qf - t.p as f64).inv() / qf;
        e1 += e;
        e2 += e * e;
    }
    let en = (Complex64::new(0.0, 2.0 * PI) * u).exp();
    let cot = Complex64::new(0.0, 1.0) * (en + 1.0) / (en - 1.0);
    let csc2 = -4.0 * en / ((en - 1.0) * (en - 1.0));
    let tail1 = cot * PI / (qf * qf) - e1;
    let tail2 = csc2 * (PI * PI) / qf.powi(4) - e2;
    let (l1, l2) = far_field(t.q1, t.q, false);
    let (u1, u2) = far_field(t.q2, t.q, true);
    TermContribution {
        farey: *t,
        value_b: direct.0 + tail1 * (l1 + u1) + tail2 * (l2 + u2),
        value_w: direct.1 + tail1 * (u1 - l1) + tail2 * (u2 - l2),
        value_semi: direct.2 + tail1 * u1 + tail2 * u2,
    }
}

/// Reduced fractions with `q ≤ q_max` in `[center − ½, center + ½)`, sorted
/// by `(q, p)`, minus the windowed-out ones, each with its Farey parents.
pub fn enumerate_fractions(plan: &TruncationPlan, center: f64) -> Result<Vec<FareyTriple>> {
    plan.validate()?;
    if !center.is_finite() {
        return Err(Error::Domain("non-finite center".into()));
    }
    let mut out = Vec::new();
    for q in 1..=plan.q_max {
        let lo = ((center - 0.5) * q as f64).ceil() as i64;
        for p in lo..lo + q {
            if p.gcd(&q) != 1 {
                continue;
            }
            if q > plan.q_min_keep && (p as f64 / q as f64 - center).abs() > plan.window {
                continue;
            }
            out.push(farey_parents(p, q)?);
        }
    }
    Ok(out)
}

/// Recursive pairwise sum; the split points depend only on the length.
pub fn pairwise_sum(xs: &[Complex64]) -> Complex64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

fn check_z(z: Complex64) -> Result<()> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Domain(format!("non-finite argument {z}")));
    }
    if z.im <= 0.0 {
        return Err(Error::Domain(format!("Im z = {} must be positive", z.im)));
    }
    Ok(())
}

/// All three sums over a fixed set of fractions.
pub fn evaluate_terms(z: Complex64, fracs: &[FareyTriple]) -> Result<ComplexSums> {
    check_z(z)?;
    let terms: Vec<TermContribution> = fracs.par_iter().map(|t| term(t, z)).collect();
    let scale = -1.0 / PI;
    let pick = |f: fn(&TermContribution) -> Complex64| {
        let v: Vec<Complex64> = terms.iter().map(f).collect();
        pairwise_sum(&v) * scale
    };
    Ok(ComplexSums {
        brjuno: pick(|t| t.value_b),
        wilton: pick(|t| t.value_w),
        semi: pick(|t| t.value_semi),
        terms: terms.len(),
    })
}

pub fn complex_sums(z: Complex64, plan: &TruncationPlan) -> Result<ComplexSums> {
    check_z(z)?;
    let fracs = enumerate_fractions(plan, z.re)?;
    evaluate_terms(z, &fracs)
}

/// Truncated `𝓑(z)`.
pub fn complex_brjuno(z: Complex64, plan: &TruncationPlan) -> Result<Complex64> {
    Ok(complex_sums(z, plan)?.brjuno)
}

/// Truncated `𝓦(z)`.
pub fn complex_wilton(z: Complex64, plan: &TruncationPlan) -> Result<Complex64> {
    Ok(complex_sums(z, plan)?.wilton)
}

/// Truncated `½(𝓑 + 𝓦)`, summed from its own combined term.
pub fn complex_semi(z: Complex64, plan: &TruncationPlan) -> Result<Complex64> {
    Ok(complex_sums(z, plan)?.semi)
}
