//! Real Brjuno-type functions: the Brjuno function `B`, the Wilton function
//! `W`, the semi-Brjuno function `B₀` and the nearest-integer variant `B½`,
//! all as the series `Σ_j σ_j β_{j−1} log(1/x_j)` over the iterates of the
//! corresponding map, together with the closed forms for `B⁻`, `W⁺`, `Φ` and
//! the functions `g`, `f`, `f̃`.

use serde::Serialize;

use crate::cf::{self, CfKind, MIN_ITERATE};
use crate::error::{Error, Result};
use crate::real::{self, Real};
use crate::special::{ln_gamma, stirling_tail};

/// Additive constant in the heuristic tail estimate.
const TAIL_K: f64 = 10.0;

/// Convergent denominators above this never trigger rational detection.
pub const RATIONAL_Q_CAP: i64 = 1_000_000;

/// Decay ratio above which a by-excess expansion is reported as stalled.
const STALL_RATIO: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalConfig {
    pub max_depth: usize,
    pub tail_tol: f64,
    pub min_iterate: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig { max_depth: 128, tail_tol: 1e-12, min_iterate: MIN_ITERATE }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_depth == 0 {
            return Err(Error::Domain("max_depth must be at least 1".into()));
        }
        if !(self.tail_tol > 0.0 && self.tail_tol < 1.0) {
            return Err(Error::Domain(format!("tail_tol {} must lie in (0, 1)", self.tail_tol)));
        }
        if !(self.min_iterate > 0.0) {
            return Err(Error::Domain("min_iterate must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalResult {
    pub value: f64,
    pub depth_used: usize,
    /// Heuristic estimate of the truncation error, not a rigorous bound.
    pub tail_bound: f64,
    pub converged: bool,
}

/// Which of the three series-defined functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum RealFn {
    Brjuno,
    Wilton,
    Semi,
}

impl RealFn {
    pub fn eval(self, x: Real, cfg: &EvalConfig) -> Result<EvalResult> {
        match self {
            RealFn::Brjuno => brjuno(x, cfg),
            RealFn::Wilton => wilton(x, cfg),
            RealFn::Semi => semi_brjuno(x, cfg),
        }
    }
}

/// Relative gap below which a value carrying a nonzero low limb is taken
/// to be rational.
const DD_RATIONAL_GAP: f64 = 1e-28;

/// Returns the convergent `p/q` (with `q ≤ q_cap`) that `x` cannot be told
/// apart from, if any. The gap allowed is `min_iterate` for values that are
/// exact doubles and `DD_RATIONAL_GAP·max(1, |x|)` (capped by `min_iterate`)
/// otherwise.
pub fn detect_rational(x: Real, min_iterate: f64, q_cap: i64) -> Option<(i64, i64)> {
    let min_iterate =
        if x.lo() == 0.0 { min_iterate } else { min_iterate.min(DD_RATIONAL_GAP * x.hi().abs().max(1.0)) };
    let (a0, _, x0) = cf::reduce_seed(x, CfKind::Gauss);
    let (mut p_prev, mut q_prev) = (1i64, 0i64);
    let (mut p, mut q) = (a0, 1i64);
    let mut cur = x0;
    loop {
        let gap = real::to_f64((x - real::ratio(p, q)).abs());
        if cur == 0.0 || gap <= min_iterate {
            return Some((p, q));
        }
        let s = cf::step(cur, CfKind::Gauss);
        if s.capped {
            return None;
        }
        let a = s.digit.a as i64;
        let qn = a.checked_mul(q).and_then(|v| v.checked_add(q_prev))?;
        let pn = a.checked_mul(p).and_then(|v| v.checked_add(p_prev))?;
        if qn > q_cap {
            return None;
        }
        (p_prev, q_prev, p, q) = (p, q, pn, qn);
        cur = s.next;
    }
}

fn check_input(x: Real, cfg: &EvalConfig) -> Result<()> {
    cfg.validate()?;
    if !real::is_finite(x) {
        return Err(Error::Domain(format!("non-finite argument {}", real::to_f64(x))));
    }
    if let Some((p, q)) = detect_rational(x, cfg.min_iterate, RATIONAL_Q_CAP) {
        return Err(Error::RationalInput { p, q });
    }
    Ok(())
}

/// The last Gauss convergent before the orbit of `x` ends or leaves `i64`.
fn rational_error(x: Real) -> Error {
    let (a0, _, mut cur) = cf::reduce_seed(x, CfKind::Gauss);
    let (mut p_prev, mut q_prev, mut p, mut q) = (1i64, 0i64, a0, 1i64);
    while cur != 0.0 {
        let s = cf::step(cur, CfKind::Gauss);
        let a = s.digit.a as i64;
        let next = a
            .checked_mul(q)
            .and_then(|v| v.checked_add(q_prev))
            .zip(a.checked_mul(p).and_then(|v| v.checked_add(p_prev)));
        match next {
            Some((qn, pn)) if !s.capped => {
                (p_prev, q_prev, p, q) = (p, q, pn, qn);
                cur = s.next;
            }
            _ => break,
        }
    }
    Error::RationalInput { p, q }
}

/// Running state of a series `Σ σ_j β_{j−1} log(1/x_j)`.
struct Accumulator {
    sum: f64,
    beta: f64,
    history: Vec<f64>,
    steps: usize,
}

impl Accumulator {
    fn new() -> Self {
        Accumulator { sum: 0.0, beta: 1.0, history: vec![1.0], steps: 0 }
    }

    fn rho(&self) -> f64 {
        let n = self.history.len();
        if n < 2 {
            return 0.0;
        }
        let m = (n - 1).min(5);
        let last = self.history[n - 1];
        let first = self.history[n - 1 - m];
        if first <= 0.0 {
            return 0.0;
        }
        (last / first).powf(1.0 / m as f64)
    }

    /// Estimated size of the remaining series when the next iterate is `x`.
    fn tail(&self, x: Real) -> f64 {
        let rho = self.rho();
        if rho >= 1.0 {
            return f64::INFINITY;
        }
        self.beta * (real::ln(x).abs() + TAIL_K) / (1.0 - rho)
    }

    fn push_beta(&mut self, beta: f64) {
        self.beta = beta;
        self.history.push(beta);
    }

    fn finish(&self, x: Real, cfg: &EvalConfig, stall_check: bool) -> EvalResult {
        let tail_bound = self.tail(x);
        let stalled = stall_check && self.rho() > STALL_RATIO;
        EvalResult {
            value: self.sum,
            depth_used: self.steps,
            tail_bound,
            converged: tail_bound <= cfg.tail_tol && !stalled,
        }
    }
}

fn gauss_like_series(x: Real, kind: CfKind, alternating: bool, cfg: &EvalConfig) -> Result<EvalResult> {
    check_input(x, cfg)?;
    let (_, _, mut cur) = cf::reduce_seed(x, kind);
    let mut acc = Accumulator::new();
    let mut sign = 1.0;
    loop {
        if cur == 0.0 {
            return Err(rational_error(x));
        }
        if acc.tail(cur) <= cfg.tail_tol || acc.steps >= cfg.max_depth {
            return Ok(acc.finish(cur, cfg, false));
        }
        acc.sum += sign * acc.beta * (-real::ln(cur));
        let beta = acc.beta * real::to_f64(cur);
        let s = cf::step(cur, kind);
        if s.capped {
            return Err(rational_error(x));
        }
        acc.push_beta(beta);
        acc.steps += 1;
        if alternating {
            sign = -sign;
        }
        cur = s.next;
    }
}

/// The Brjuno function `B(x) = Σ_{j≥0} β_{j−1} log(1/x_j)` over Gauss iterates.
pub fn brjuno(x: impl Into<Real>, cfg: &EvalConfig) -> Result<EvalResult> {
    gauss_like_series(x.into(), CfKind::Gauss, false, cfg)
}

/// The Wilton function `W(x) = Σ_{j≥0} (−1)^j β_{j−1} log(1/x_j)`.
pub fn wilton(x: impl Into<Real>, cfg: &EvalConfig) -> Result<EvalResult> {
    gauss_like_series(x.into(), CfKind::Gauss, true, cfg)
}

/// `B½`: the same series over nearest-integer iterates `x_i ∈ [0, 1/2]`.
pub fn brjuno_half(x: impl Into<Real>, cfg: &EvalConfig) -> Result<EvalResult> {
    gauss_like_series(x.into(), CfKind::NearestInteger, false, cfg)
}

/// `Σ_{k=0}^{m−1} (s_k / s_0) log(s_k / (s_k − 1))` with `s_k = s_0 − k`,
/// `m = ⌊s_0⌋ − 1`: the contribution of one run of by-excess digits 2
/// started at `u = 1 − 1/s_0`, relative to the β before the run.
pub(crate) fn run_sum(s0: Real) -> f64 {
    let m = real::to_f64(s0.floor()) as u64 - 1;
    let n = real::to_f64(s0);
    if m < 64 {
        let mut acc = 0.0;
        for k in 0..m {
            let s = real::to_f64(s0 - k as f64);
            acc += -s * (-1.0 / s).ln_1p();
        }
        return acc / n;
    }
    let c = real::to_f64(real::frac(s0)) + 1.0;
    let half_ln_2pi = 0.5 * (2.0 * std::f64::consts::PI).ln();
    1.0 + (0.5 * n.ln() - half_ln_2pi - stirling_tail(n) - c * c.ln() + ln_gamma(c)) / n
}

/// The semi-Brjuno function `B₀(x) = Σ_{j≥0} β_{j−1} log(1/x_j)` over
/// by-excess iterates of `{x}`.
///
/// Runs of the digit 2 (iterates in `(1/2, 1)`) are summed in closed form,
/// so each run counts once against `max_depth`; `depth_used` reports the
/// true number of map applications.
pub fn semi_brjuno(x: impl Into<Real>, cfg: &EvalConfig) -> Result<EvalResult> {
    let x = x.into();
    check_input(x, cfg)?;
    let mut cur = real::frac(x);
    let mut acc = Accumulator::new();
    let mut blocks = 0;
    loop {
        if cur == 0.0 {
            return Err(rational_error(x));
        }
        if acc.tail(cur) <= cfg.tail_tol || blocks >= cfg.max_depth {
            return Ok(acc.finish(cur, cfg, true));
        }
        blocks += 1;
        if cur > 0.5 {
            // u = 1 − 1/s with s > 2: ⌊s⌋ − 1 digits 2, ending at {s}/(1 + {s}).
            let s0 = real::recip(Real::from(1.0) - cur);
            let m = real::to_f64(s0.floor()) as usize - 1;
            let f = real::frac(s0);
            let c = f + 1.0;
            acc.sum += acc.beta * run_sum(s0);
            let beta = acc.beta * real::to_f64(real::div(c, s0));
            acc.push_beta(beta);
            acc.steps += m;
            cur = real::div(f, c);
            continue;
        }
        acc.sum += acc.beta * (-real::ln(cur));
        let beta = acc.beta * real::to_f64(cur);
        let s = cf::step(cur, CfKind::ByExcess);
        if s.capped {
            return Err(rational_error(x));
        }
        acc.push_beta(beta);
        acc.steps += 1;
        cur = s.next;
    }
}

/// Which approximant in [`qlog_approximant`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum QlogKind {
    Brjuno,
    Wilton,
    Semi,
}

fn gauss_table(x: Real, depth: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let cfg = EvalConfig::default();
    check_input(x, &cfg)?;
    let e = cf::expand(x, CfKind::Gauss, depth + 1)?;
    let qs = e.convergents.iter().map(|(_, q)| num_traits::ToPrimitive::to_f64(q).unwrap_or(f64::INFINITY)).collect();
    let a = e.digits.iter().map(|d| d.a as f64).collect();
    Ok((qs, a))
}

/// The partial sums `Σ log q_{j+1}/q_j`, `Σ (−1)^j log q_{j+1}/q_j` or
/// `Σ log a_{2j+1}/q_{2j}` over the regular convergents of `x`, with `depth`
/// terms (fewer if the expansion ends).
pub fn qlog_approximant(x: impl Into<Real>, kind: QlogKind, depth: usize) -> Result<f64> {
    let x = x.into();
    let (qs, a) = gauss_table(x, 2 * depth + 1)?;
    let mut s = 0.0;
    match kind {
        QlogKind::Brjuno | QlogKind::Wilton => {
            for j in 0..depth.min(qs.len().saturating_sub(1)) {
                let sign = if kind == QlogKind::Wilton && j % 2 == 1 { -1.0 } else { 1.0 };
                s += sign * qs[j + 1].ln() / qs[j];
            }
        }
        QlogKind::Semi => {
            for j in 0..depth {
                // a_{2j+1} is digits[2j].
                if 2 * j >= a.len() {
                    break;
                }
                s += a[2 * j].ln() / qs[2 * j];
            }
        }
    }
    Ok(s)
}

/// `Σ_{j<depth} log q_j / q_j` over the regular convergents.
pub fn log_q_over_q(x: impl Into<Real>, depth: usize) -> Result<f64> {
    let (qs, _) = gauss_table(x.into(), depth)?;
    Ok(qs.iter().take(depth).map(|q| q.ln() / q).sum())
}

/// `½(F(x) + F(−x))`.
pub fn even_part(f: RealFn, x: impl Into<Real>, cfg: &EvalConfig) -> Result<f64> {
    let x = x.into();
    Ok(0.5 * (f.eval(x, cfg)?.value + f.eval(-x, cfg)?.value))
}

/// `½(F(x) − F(−x))`.
pub fn odd_part(f: RealFn, x: impl Into<Real>, cfg: &EvalConfig) -> Result<f64> {
    let x = x.into();
    Ok(0.5 * (f.eval(x, cfg)?.value - f.eval(-x, cfg)?.value))
}

fn open_half(x: Real) -> Result<()> {
    if x > 0.0 && x < 0.5 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{} is outside (0, 1/2)", real::to_f64(x))))
    }
}

fn b_minus_raw(x: Real) -> f64 {
    let xf = real::to_f64(x);
    0.5 * xf * (real::ln(Real::from(1.0) - x) - real::ln(x))
}

fn w_plus_raw(x: Real) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let l1 = real::ln(Real::from(1.0) - x);
    0.5 * real::to_f64(x) * (l1 - real::ln(x)) - l1
}

/// `B⁻(x) = (x/2) log((1 − x)/x)` on `(0, 1/2)`.
pub fn b_minus_closed(x: impl Into<Real>) -> Result<f64> {
    let x = x.into();
    open_half(x)?;
    Ok(b_minus_raw(x))
}

/// `W⁺(x) = (x/2) log((1 − x)/x) − log(1 − x)` on `(0, 1/2)`.
pub fn w_plus_closed(x: impl Into<Real>) -> Result<f64> {
    let x = x.into();
    open_half(x)?;
    Ok(w_plus_raw(x))
}

/// `B⁻` extended to an odd 1-periodic function.
pub fn b_minus_ext(x: impl Into<Real>) -> f64 {
    let t = real::frac(x.into());
    if t == 0.0 || t == 0.5 {
        0.0
    } else if t < 0.5 {
        b_minus_raw(t)
    } else {
        -b_minus_raw(Real::from(1.0) - t)
    }
}

/// `W⁺` extended to an even 1-periodic function.
pub fn w_plus_ext(x: impl Into<Real>) -> f64 {
    let t = real::frac(x.into());
    if t <= 0.5 {
        w_plus_raw(t)
    } else {
        w_plus_raw(Real::from(1.0) - t)
    }
}

fn checked_half(x: Real) -> Result<()> {
    open_half(x)?;
    if let Some((p, q)) = detect_rational(x, MIN_ITERATE, RATIONAL_Q_CAP) {
        return Err(Error::RationalInput { p, q });
    }
    Ok(())
}

/// `Φ(x) = x log x + x A(x) log(x A(x)) + x Σ_{j=1}^{n−1} log(1 − jx)`,
/// `n = ⌊1/x⌋`, for `x ∈ (0, 1/2)`.
pub fn phi(x: impl Into<Real>) -> Result<f64> {
    let x = x.into();
    checked_half(x)?;
    Ok(phi_raw(x))
}

/// Below `1/x = 30` the sum is taken term by term; above, the sum is folded
/// into `lnΓ` and the `x log x` pieces cancel to
/// `−1 + ½ x log x + t log t·x + x(½ log 2π + τ(1/x) − lnΓ(1 + t))`.
pub(crate) fn phi_raw(x: Real) -> f64 {
    let y = real::recip(x);
    let n = real::to_f64(y.floor());
    let t = y - n;
    let xf = real::to_f64(x);
    let tf = real::to_f64(t);
    let lx = real::ln(x);
    let t_log_t = if tf > 0.0 { tf * real::ln(t) } else { 0.0 };
    if n < 30.0 {
        let xt = x * t;
        let mut s = xf * lx;
        if tf > 0.0 {
            s += real::to_f64(xt) * real::ln(xt);
        }
        let mut tail = 0.0;
        for j in 1..(n as u64) {
            tail += real::ln(Real::from(1.0) - x * j as f64);
        }
        s + xf * tail
    } else {
        let yf = real::to_f64(y);
        let half_ln_2pi = 0.5 * (2.0 * std::f64::consts::PI).ln();
        -1.0 + 0.5 * xf * lx + xf * t_log_t + xf * (half_ln_2pi + stirling_tail(yf) - ln_gamma(1.0 + tf))
    }
}

/// `Φ(x) = x B₀(A x) − B₀(1 − x)` from the series.
pub fn phi_series(x: impl Into<Real>, cfg: &EvalConfig) -> Result<f64> {
    let x = x.into();
    checked_half(x)?;
    let ax = real::frac(real::recip(x));
    Ok(real::to_f64(x) * semi_brjuno(ax, cfg)?.value - semi_brjuno(Real::from(1.0) - x, cfg)?.value)
}

/// Direct term-by-term `Φ`, kept for cross-checking the folded branch.
pub fn phi_direct(x: Real) -> f64 {
    let y = real::recip(x);
    let n = real::to_f64(y.floor()) as u64;
    let t = y - n as f64;
    let xt = x * t;
    let mut s = real::to_f64(x) * real::ln(x);
    if t > 0.0 {
        s += real::to_f64(xt) * real::ln(xt);
    }
    let mut tail = 0.0;
    for j in 1..n {
        tail += real::ln(Real::from(1.0) - x * j as f64);
    }
    s + real::to_f64(x) * tail
}

/// `g(x) = −log x − [W⁺(x) + x W⁺(A x)]` on `(0, 1/2)`.
pub fn g_func(x: impl Into<Real>) -> Result<f64> {
    let x = x.into();
    checked_half(x)?;
    Ok(-real::ln(x) - w_plus_raw(x) - real::to_f64(x) * w_plus_ext(real::frac(real::recip(x))))
}

pub(crate) fn f_raw(x: Real) -> f64 {
    -w_plus_raw(x) - real::to_f64(x) * w_plus_ext(real::frac(real::recip(x))) - phi_raw(x)
}

/// `f(x) = g(x) + log x − Φ(x)` on `(0, 1/2)`.
pub fn f_func(x: impl Into<Real>) -> Result<f64> {
    let x = x.into();
    checked_half(x)?;
    Ok(f_raw(x))
}

/// `f̃`: `f` extended to an odd 1-periodic function. Rational arguments are
/// rejected.
pub fn f_tilde(x: impl Into<Real>) -> Result<f64> {
    let x = x.into();
    if let Some((p, q)) = detect_rational(x, MIN_ITERATE, RATIONAL_Q_CAP) {
        return Err(Error::RationalInput { p, q });
    }
    Ok(f_tilde_raw(x))
}

/// `f̃` without rational detection. `f̃(0) = 0` and `f̃(1/2) = 0`.
pub(crate) fn f_tilde_raw(x: Real) -> f64 {
    let t = real::frac(x);
    if t == 0.0 || t == 0.5 {
        0.0
    } else if t < 0.5 {
        f_raw(t)
    } else {
        -f_raw(Real::from(1.0) - t)
    }
}

/// `B⁺ = B − B⁻`.
pub fn brjuno_plus(x: impl Into<Real>, cfg: &EvalConfig) -> Result<EvalResult> {
    let x = x.into();
    let mut r = brjuno(x, cfg)?;
    r.value -= b_minus_ext(x);
    Ok(r)
}

/// `W⁻ = W − W⁺`.
pub fn wilton_minus(x: impl Into<Real>, cfg: &EvalConfig) -> Result<EvalResult> {
    let x = x.into();
    let mut r = wilton(x, cfg)?;
    r.value -= w_plus_ext(x);
    Ok(r)
}
