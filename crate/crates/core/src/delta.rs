//! The defect functions `Δ⁺ = B⁺ − 2B₀⁺` and `Δ⁻ = W⁻ − 2B₀⁻`, the
//! nearest-integer series for `Δ⁻`, its jumps at rationals, and a sampled
//! Hölder-exponent estimate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::brjuno::{self, b_minus_ext, detect_rational, f_tilde_raw, w_plus_ext, EvalConfig, RATIONAL_Q_CAP};
use crate::cf::{self, CfKind, MIN_ITERATE};
use crate::error::{Error, Result};
use crate::real::{self, Real};

/// Default truncation of the `Δ⁻` series.
pub const SERIES_TERMS: usize = 40;

/// Offsets used for one-sided limits when the caller has no preference.
pub const DEFAULT_OFFSETS: [f64; 4] = [1e-4, 1e-5, 1e-6, 1e-7];

/// Denominator bound for the "offset crosses a rational" check.
const CROSSING_Q: i64 = 50;

/// `B₀(x) + B₀(−x)`, that is `2B₀⁺(x)`.
fn semi_even2(x: Real, cfg: &EvalConfig) -> Result<f64> {
    Ok(brjuno::semi_brjuno(x, cfg)?.value + brjuno::semi_brjuno(-x, cfg)?.value)
}

/// `B₀(x) − B₀(−x)`, that is `2B₀⁻(x)`.
fn semi_odd2(x: Real, cfg: &EvalConfig) -> Result<f64> {
    Ok(brjuno::semi_brjuno(x, cfg)?.value - brjuno::semi_brjuno(-x, cfg)?.value)
}

/// `B(x) − 2B₀⁺(x)`.
pub fn brjuno_defect(x: impl Into<Real>, cfg: &EvalConfig) -> Result<f64> {
    let x = x.into();
    Ok(brjuno::brjuno(x, cfg)?.value - semi_even2(x, cfg)?)
}

/// `W(x) − 2B₀⁻(x)`.
pub fn wilton_defect(x: impl Into<Real>, cfg: &EvalConfig) -> Result<f64> {
    let x = x.into();
    Ok(brjuno::wilton(x, cfg)?.value - semi_odd2(x, cfg)?)
}

/// `Δ⁺(x) = B(x) − B⁻(x) − 2B₀⁺(x)`.
pub fn delta_plus(x: impl Into<Real>, cfg: &EvalConfig) -> Result<f64> {
    let x = x.into();
    Ok(brjuno::brjuno(x, cfg)?.value - b_minus_ext(x) - semi_even2(x, cfg)?)
}

/// `Δ⁻(x) = W(x) − W⁺(x) − B₀(x) + B₀(1 − x)`.
pub fn delta_minus_direct(x: impl Into<Real>, cfg: &EvalConfig) -> Result<f64> {
    let x = x.into();
    Ok(brjuno::wilton(x, cfg)?.value - w_plus_ext(x) - semi_odd2(x, cfg)?)
}

/// Partial sum `Σ_{i<m} (−1)^i β_{i−1} f̃(ε_i x_i)` over the nearest-integer
/// expansion, with signed `β_i = ε_0 x_0 ⋯ ε_i x_i` and `β_{−1} = 1`.
///
/// A rational input (or one that becomes rational at working precision)
/// just stops at its last term.
pub fn delta_minus_series(x: impl Into<Real>, m: usize) -> Result<f64> {
    let x = x.into();
    if m == 0 {
        return Err(Error::Domain("series needs at least one term".into()));
    }
    if !real::is_finite(x) {
        return Err(Error::Domain("non-finite argument".into()));
    }
    let (_, eps0, x0) = cf::reduce_seed(x, CfKind::NearestInteger);
    let mut sum = 0.0;
    let mut beta = 1.0;
    let mut cur = x0;
    let mut eps = eps0 as f64;
    for i in 0..m {
        let signed = if eps < 0.0 { -cur } else { cur };
        let sign = if i % 2 == 1 { -1.0 } else { 1.0 };
        sum += sign * beta * f_tilde_raw(signed);
        beta *= eps * real::to_f64(cur);
        if cur == 0.0 || real::to_f64(cur) < MIN_ITERATE {
            break;
        }
        let s = cf::step(cur, CfKind::NearestInteger);
        if s.capped {
            break;
        }
        eps = s.digit.eps as f64;
        cur = s.next;
    }
    Ok(sum)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JumpReport {
    pub p: i64,
    pub q: i64,
    pub depth: usize,
    pub left_limit: f64,
    pub right_limit: f64,
    pub jump: f64,
    pub expected: f64,
    pub offset_used: f64,
    /// Spread between extrapolations from the two finest and the next pair
    /// of offsets; a rough error bar on the limits.
    pub spread: f64,
    pub rejected_offsets: Vec<f64>,
}

/// `(√5 − 2)·10⁻²`, the relative jitter keeping `p/q ± δ` off short rationals.
fn jitter() -> f64 {
    (5f64.sqrt() - 2.0) * 1e-2
}

/// Whether `(lo, hi)` contains a rational with denominator ≤ `q_max`.
fn crosses_rational(lo: f64, hi: f64, q_max: i64) -> bool {
    (1..=q_max).any(|q| {
        let first = (lo * q as f64).floor() as i64 + 1;
        (first as f64) < hi * q as f64
    })
}

/// Extrapolates `L(δ)` linearly to `δ = 0` from the two finest offsets.
fn extrapolate(points: &[(f64, f64)]) -> (f64, f64) {
    let lin = |a: (f64, f64), b: (f64, f64)| b.1 - b.0 * (a.1 - b.1) / (a.0 - b.0);
    let n = points.len();
    match n {
        0 => (f64::NAN, f64::INFINITY),
        1 => (points[0].1, f64::INFINITY),
        2 => {
            let v = lin(points[0], points[1]);
            (v, (v - points[1].1).abs())
        }
        _ => {
            let v = lin(points[n - 2], points[n - 1]);
            let w = lin(points[n - 3], points[n - 2]);
            (v, (v - w).abs())
        }
    }
}

/// One-sided limits of `Δ⁻` at `p/q` and their difference.
///
/// `offsets` must be decreasing; each is jittered by `δ(√5 − 2)·10⁻²`.
/// Offsets whose interval reaches another rational with denominator ≤ 50
/// are dropped; if fewer than two remain the measurement is refused.
pub fn jump_at(p: i64, q: i64, offsets: &[f64]) -> Result<JumpReport> {
    let depth = cf::rational_depth(p, q)?;
    if 2 * p == q {
        return Err(Error::Domain("1/2 is an endpoint of the series domain".into()));
    }
    if offsets.windows(2).any(|w| !(w[1] < w[0])) || offsets.iter().any(|&d| !(d > 0.0)) {
        return Err(Error::Domain("offsets must be positive and strictly decreasing".into()));
    }
    let center = real::ratio(p, q);
    let cf = center.hi();
    let mut kept = Vec::new();
    let mut rejected = Vec::new();
    for &d in offsets {
        let dd = d * (1.0 + jitter());
        // Keep p/q itself out of both open intervals.
        let guard = 4.0 * cf * f64::EPSILON;
        let left = crosses_rational(cf - dd, cf - guard, CROSSING_Q);
        let right = crosses_rational(cf + guard, cf + dd, CROSSING_Q);
        if left || right {
            rejected.push(d);
        } else {
            kept.push(dd);
        }
    }
    if kept.len() < 2 {
        return Err(Error::Domain(format!(
            "offsets {rejected:?} cross rationals with denominator ≤ {CROSSING_Q} near {p}/{q}"
        )));
    }
    let side = |sign: f64| -> Result<Vec<(f64, f64)>> {
        kept.par_iter().map(|&dd| Ok((dd, delta_minus_series(center + sign * dd, SERIES_TERMS)?))).collect()
    };
    let (left, spread_l) = extrapolate(&side(-1.0)?);
    let (right, spread_r) = extrapolate(&side(1.0)?);
    Ok(JumpReport {
        p,
        q,
        depth,
        left_limit: left,
        right_limit: right,
        jump: right - left,
        expected: 2.0 / q as f64,
        offset_used: *kept.last().unwrap(),
        spread: spread_l.max(spread_r),
        rejected_offsets: rejected,
    })
}

/// Which defect function a Hölder estimate samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DeltaFn {
    Plus,
    Minus,
}

impl DeltaFn {
    pub fn eval(self, x: Real, cfg: &EvalConfig) -> Result<f64> {
        match self {
            DeltaFn::Plus => delta_plus(x, cfg),
            DeltaFn::Minus => delta_minus_direct(x, cfg),
        }
    }
}

/// Where the pairs `(x, x + h)` are placed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum PairSampling {
    /// `x` uniform in the interval.
    Uniform,
    /// Each pair straddles a random reduced `p/q` with `q ≤ q_max` in the
    /// interval at a uniform relative position; this exposes jumps.
    StraddleRationals { q_max: i64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HolderPlan {
    pub lo: f64,
    pub hi: f64,
    pub pairs: usize,
    pub seed: u64,
    pub sampling: PairSampling,
}

impl HolderPlan {
    pub fn uniform(lo: f64, hi: f64, seed: u64) -> Self {
        HolderPlan { lo, hi, pairs: 1000, seed, sampling: PairSampling::Uniform }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HolderReport {
    pub exponent_estimate: f64,
    pub scales: Vec<f64>,
    pub moduli: Vec<f64>,
    pub fit_residual: f64,
    /// Valid pairs per scale, after dropping rational-at-precision points.
    pub samples: Vec<usize>,
    /// The modulus vanished at some scale, so no slope exists.
    pub degenerate: bool,
    /// Some scale kept fewer than a tenth of its pairs.
    pub undersampled: bool,
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Least-squares slope of `y` on `x` and the RMS residual.
fn fit_line(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - my - slope * (x - mx)).powi(2)).sum();
    (slope, (rss / n).sqrt())
}

fn random_rational(rng: &mut ChaCha8Rng, lo: f64, hi: f64, q_max: i64) -> Option<(i64, i64)> {
    for _ in 0..1000 {
        let q = rng.gen_range(1..=q_max);
        let (p_lo, p_hi) = ((lo * q as f64).ceil() as i64, (hi * q as f64).floor() as i64);
        if p_lo > p_hi {
            continue;
        }
        let p = rng.gen_range(p_lo..=p_hi);
        let v = p as f64 / q as f64;
        if v > lo && v < hi && num_integer::gcd(p, q) == 1 {
            return Some((p, q));
        }
    }
    None
}

/// Median `|F(x + h) − F(x)|` per scale and the log–log slope.
pub fn holder_estimate_with<F>(f: F, plan: &HolderPlan, scales: &[f64]) -> Result<HolderReport>
where
    F: Fn(Real) -> Result<f64> + Sync,
{
    if !(plan.lo < plan.hi) || plan.hi - plan.lo <= scales.iter().cloned().fold(0.0, f64::max) {
        return Err(Error::Domain("interval must be longer than every scale".into()));
    }
    if scales.len() < 2 || scales.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Domain("need at least two strictly decreasing scales".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let mut moduli = Vec::with_capacity(scales.len());
    let mut samples = Vec::with_capacity(scales.len());
    for &h in scales {
        let starts: Vec<Real> = (0..plan.pairs)
            .map(|_| match plan.sampling {
                PairSampling::Uniform => Real::from(rng.gen_range(plan.lo..plan.hi - h)),
                PairSampling::StraddleRationals { q_max } => {
                    match random_rational(&mut rng, plan.lo + h, plan.hi - h, q_max) {
                        Some((p, q)) => real::ratio(p, q) - h * rng.gen_range(0.05..0.95),
                        None => Real::from(rng.gen_range(plan.lo..plan.hi - h)),
                    }
                }
            })
            .collect();
        let mut diffs: Vec<f64> = starts
            .par_iter()
            .filter_map(|&x| {
                let a = f(x).ok()?;
                let b = f(x + h).ok()?;
                Some((b - a).abs())
            })
            .collect();
        samples.push(diffs.len());
        moduli.push(median(&mut diffs));
    }
    let degenerate = moduli.iter().any(|&m| !(m > 0.0));
    let undersampled = samples.iter().any(|&n| n * 10 < plan.pairs);
    let (exponent_estimate, fit_residual) = if degenerate {
        (f64::NAN, f64::NAN)
    } else {
        let lx: Vec<f64> = scales.iter().map(|h| h.ln()).collect();
        let ly: Vec<f64> = moduli.iter().map(|m| m.ln()).collect();
        fit_line(&lx, &ly)
    };
    Ok(HolderReport {
        exponent_estimate,
        scales: scales.to_vec(),
        moduli,
        fit_residual,
        samples,
        degenerate,
        undersampled,
    })
}

pub fn holder_estimate(which: DeltaFn, plan: &HolderPlan, scales: &[f64], cfg: &EvalConfig) -> Result<HolderReport> {
    holder_estimate_with(|x| which.eval(x, cfg), plan, scales)
}

/// `2^−from, …, 2^−to`.
pub fn dyadic_scales(from: i32, to: i32) -> Vec<f64> {
    (from..=to).map(|k| 2f64.powi(-k)).collect()
}

/// `1/q` if `x` is `p/q` at working precision, else 0.
pub fn popcorn(x: impl Into<Real>) -> f64 {
    match detect_rational(x.into(), MIN_ITERATE, RATIONAL_Q_CAP) {
        Some((_, q)) => 1.0 / q as f64,
        None => 0.0,
    }
}
