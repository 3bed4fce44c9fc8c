//! Seeded sampling, CSV emission and the verification suites.
//!
//! Samples are drawn from `ChaCha8Rng` (stream 0) seeded with the plan's
//! seed, one `f64` at a time via `gen_range(lo..hi)`, and rejected when they
//! fall inside the exclusion radius of a short rational or are themselves
//! rational at working precision. Evaluation runs as a parallel map whose
//! output is collected in index order, so files do not depend on the
//! thread count.

use std::io::Write;
use std::str::FromStr;

use num_complex::Complex64;
use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::brjuno::{self, detect_rational, EvalConfig, EvalResult, QlogKind, RATIONAL_Q_CAP};
use crate::cf::{farey_parents, MIN_ITERATE};
use crate::complex;
use crate::delta::{self, JumpReport, DEFAULT_OFFSETS};
use crate::error::{Error, Result};
use crate::real::{self, Real};

/// Draws per requested sample before a plan is declared infeasible.
const MAX_DRAWS_PER_SAMPLE: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SamplePlan {
    pub n: usize,
    pub lo: f64,
    pub hi: f64,
    pub seed: u64,
    pub exclusion_q: i64,
    pub exclusion_radius_scale: f64,
}

impl SamplePlan {
    pub fn new(n: usize, lo: f64, hi: f64, seed: u64) -> Self {
        SamplePlan { n, lo, hi, seed, exclusion_q: 50, exclusion_radius_scale: 1e-4 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Domain("n must be positive".into()));
        }
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi) {
            return Err(Error::Domain(format!("bad interval ({}, {})", self.lo, self.hi)));
        }
        if self.exclusion_q < 1 || !(self.exclusion_radius_scale > 0.0) {
            return Err(Error::Domain("exclusion_q and exclusion_radius_scale must be positive".into()));
        }
        Ok(())
    }

    /// True if `x` is at least `scale/q²` from every `p/q` with `q ≤ exclusion_q`.
    pub fn admits(&self, x: f64) -> bool {
        for q in 1..=self.exclusion_q {
            let qf = q as f64;
            let p = (x * qf).round();
            if (x - p / qf).abs() < self.exclusion_radius_scale / (qf * qf) {
                return false;
            }
        }
        true
    }

    pub fn draw(&self) -> Result<Vec<f64>> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut out = Vec::with_capacity(self.n);
        let budget = self.n.saturating_mul(MAX_DRAWS_PER_SAMPLE);
        let mut draws = 0usize;
        while out.len() < self.n {
            if draws == budget {
                return Err(Error::Domain(format!("exclusion rule rejects nearly all of ({}, {})", self.lo, self.hi)));
            }
            draws += 1;
            let x: f64 = rng.gen_range(self.lo..self.hi);
            if self.admits(x) && detect_rational(Real::from(x), MIN_ITERATE, RATIONAL_Q_CAP).is_none() {
                out.push(x);
            }
        }
        Ok(out)
    }
}

/// Every function the sampler and `eval` know by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FnName {
    B,
    W,
    B0,
    BHalf,
    BPlus,
    BMinus,
    WPlus,
    WMinus,
    DeltaPlus,
    DeltaMinus,
    Phi,
    F,
    FTilde,
    Popcorn,
}

impl FnName {
    pub const ALL: [FnName; 14] = [
        FnName::B,
        FnName::W,
        FnName::B0,
        FnName::BHalf,
        FnName::BPlus,
        FnName::BMinus,
        FnName::WPlus,
        FnName::WMinus,
        FnName::DeltaPlus,
        FnName::DeltaMinus,
        FnName::Phi,
        FnName::F,
        FnName::FTilde,
        FnName::Popcorn,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FnName::B => "B",
            FnName::W => "W",
            FnName::B0 => "B0",
            FnName::BHalf => "B_half",
            FnName::BPlus => "B_plus",
            FnName::BMinus => "B_minus",
            FnName::WPlus => "W_plus",
            FnName::WMinus => "W_minus",
            FnName::DeltaPlus => "delta_plus",
            FnName::DeltaMinus => "delta_minus",
            FnName::Phi => "phi",
            FnName::F => "f",
            FnName::FTilde => "f_tilde",
            FnName::Popcorn => "popcorn",
        }
    }

    pub fn eval(self, x: Real, cfg: &EvalConfig) -> Result<EvalResult> {
        cfg.validate()?;
        if !real::is_finite(x) {
            return Err(Error::Domain(format!("non-finite argument {}", real::to_f64(x))));
        }
        let exact = |value: f64| EvalResult { value, depth_used: 0, tail_bound: 0.0, converged: true };
        match self {
            FnName::B => brjuno::brjuno(x, cfg),
            FnName::W => brjuno::wilton(x, cfg),
            FnName::B0 => brjuno::semi_brjuno(x, cfg),
            FnName::BHalf => brjuno::brjuno_half(x, cfg),
            FnName::BPlus => brjuno::brjuno_plus(x, cfg),
            FnName::WMinus => brjuno::wilton_minus(x, cfg),
            FnName::BMinus | FnName::WPlus => {
                if let Some((p, q)) = detect_rational(x, cfg.min_iterate, RATIONAL_Q_CAP) {
                    return Err(Error::RationalInput { p, q });
                }
                Ok(exact(if self == FnName::BMinus { brjuno::b_minus_ext(x) } else { brjuno::w_plus_ext(x) }))
            }
            FnName::DeltaPlus => {
                let mut r = brjuno::brjuno(x, cfg)?;
                r.value = delta::delta_plus(x, cfg)?;
                Ok(r)
            }
            FnName::DeltaMinus => {
                let mut r = brjuno::wilton(x, cfg)?;
                r.value = delta::delta_minus_direct(x, cfg)?;
                Ok(r)
            }
            FnName::Phi => brjuno::phi(x).map(exact),
            FnName::F => brjuno::f_func(x).map(exact),
            FnName::FTilde => brjuno::f_tilde(x).map(exact),
            FnName::Popcorn => Ok(exact(delta::popcorn(x))),
        }
    }
}

impl FromStr for FnName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FnName::ALL
            .iter()
            .copied()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| Error::Domain(format!("unknown function {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleRow {
    pub x: f64,
    pub result: Result<EvalResult>,
}

pub fn sample(f: FnName, plan: &SamplePlan, cfg: &EvalConfig) -> Result<Vec<SampleRow>> {
    let xs = plan.draw()?;
    Ok(xs.into_par_iter().map(|x| SampleRow { x, result: f.eval(Real::from(x), cfg) }).collect())
}

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `x,value,depth,tail_bound,converged`, plus `reason` if any row
/// failed.
pub fn write_csv<W: Write>(rows: &[SampleRow], out: W) -> Result<()> {
    let with_reason = rows.iter().any(|r| r.result.is_err());
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(e.to_string());
    let mut header = vec!["x", "value", "depth", "tail_bound", "converged"];
    if with_reason {
        header.push("reason");
    }
    w.write_record(&header).map_err(io)?;
    for row in rows {
        let mut rec = vec![fmt_f64(row.x)];
        match &row.result {
            Ok(r) => {
                rec.extend([
                    fmt_f64(r.value),
                    r.depth_used.to_string(),
                    fmt_f64(r.tail_bound),
                    r.converged.to_string(),
                ]);
                if with_reason {
                    rec.push(String::new());
                }
            }
            Err(e) => rec.extend([String::new(), String::new(), String::new(), "false".into(), e.to_string()]),
        }
        w.write_record(&rec).map_err(io)?;
    }
    w.flush().map_err(|e| Error::Io(e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DefectReport {
    pub function_pair: String,
    pub n: usize,
    pub sup_abs: f64,
    pub mean_abs: f64,
    pub argmax: f64,
    pub seed: u64,
}

/// Sup and mean of `|d(x)|` over the points where `d` is defined.
pub fn defect_report<F>(label: &str, xs: &[f64], seed: u64, d: F) -> DefectReport
where
    F: Fn(Real) -> Result<f64> + Sync,
{
    let vals: Vec<Option<f64>> = xs.par_iter().map(|&x| d(Real::from(x)).ok().map(f64::abs)).collect();
    let (mut sup, mut argmax, mut sum, mut n) = (0.0, f64::NAN, 0.0, 0usize);
    for (&x, v) in xs.iter().zip(&vals) {
        if let Some(v) = *v {
            n += 1;
            sum += v;
            if v > sup || argmax.is_nan() {
                sup = v;
                argmax = x;
            }
        }
    }
    DefectReport {
        function_pair: label.to_string(),
        n,
        sup_abs: sup,
        mean_abs: if n > 0 { sum / n as f64 } else { 0.0 },
        argmax,
        seed,
    }
}

/// Largest residual of an identity that should vanish.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub identity: String,
    pub n: usize,
    pub max_abs: f64,
    pub argmax: f64,
    pub tolerance: f64,
    /// Points where the residual could not be evaluated.
    pub failures: usize,
    pub passed: bool,
}

fn residual_report<F>(label: &str, xs: &[f64], tolerance: f64, r: F) -> ResidualReport
where
    F: Fn(Real) -> Result<f64> + Sync,
{
    let vals: Vec<Result<f64>> = xs.par_iter().map(|&x| r(Real::from(x))).collect();
    let (mut max, mut argmax, mut failures) = (0.0f64, f64::NAN, 0usize);
    for (&x, v) in xs.iter().zip(&vals) {
        match v {
            Ok(v) if v.is_finite() => {
                if v.abs() > max || argmax.is_nan() {
                    max = v.abs();
                    argmax = x;
                }
            }
            _ => failures += 1,
        }
    }
    ResidualReport {
        identity: label.to_string(),
        n: xs.len(),
        max_abs: max,
        argmax,
        tolerance,
        failures,
        passed: failures == 0 && max <= tolerance,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Record {
    Defect(DefectReport),
    Residual(ResidualReport),
    Jump(JumpReport),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteOutcome {
    pub records: Vec<Record>,
    /// Descriptions of failed hard assertions.
    pub hard_failures: Vec<String>,
}

impl SuiteOutcome {
    pub fn passed(&self) -> bool {
        self.hard_failures.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    BoundedDefect,
    FunctionalEqs,
    Jumps,
    Qlog,
    ComplexIdentity,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "theorem1" => Suite::BoundedDefect,
            "functional_eqs" => Suite::FunctionalEqs,
            "jumps" => Suite::Jumps,
            "qlog" => Suite::Qlog,
            "complex_identity" => Suite::ComplexIdentity,
            _ => return Err(Error::Domain(format!("unknown suite {s:?}"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub n: usize,
    pub seed: u64,
    pub q_max: i64,
    pub tol: Option<f64>,
    pub eval: EvalConfig,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { n: 10_000, seed: 7, q_max: 20, tol: None, eval: EvalConfig::default() }
    }
}

pub const RESIDUAL_TOL: f64 = 1e-7;
pub const JUMP_TOL: f64 = 1e-3;
pub const CANCELLATION_TOL: f64 = 1e-12;

pub fn verify(suite: Suite, opts: &VerifyOptions) -> Result<SuiteOutcome> {
    opts.eval.validate()?;
    match suite {
        Suite::BoundedDefect => bounded_defect(opts),
        Suite::FunctionalEqs => functional_eqs(opts),
        Suite::Jumps => jumps(opts),
        Suite::Qlog => qlog(opts),
        Suite::ComplexIdentity => complex_identity(opts),
    }
}

/// Soft: the sups are reported, nothing is asserted.
pub fn bounded_defect(opts: &VerifyOptions) -> Result<SuiteOutcome> {
    let xs = SamplePlan::new(opts.n, 0.0, 1.0, opts.seed).draw()?;
    let cfg = opts.eval;
    let records = vec![
        Record::Defect(defect_report("B - 2 B0+", &xs, opts.seed, |x| delta::brjuno_defect(x, &cfg))),
        Record::Defect(defect_report("W - 2 B0-", &xs, opts.seed, |x| delta::wilton_defect(x, &cfg))),
    ];
    Ok(SuiteOutcome { records, hard_failures: Vec::new() })
}

fn inv_frac(x: Real) -> Real {
    real::frac(real::recip(x))
}

fn by_excess_image(x: Real) -> Real {
    let y = real::recip(x);
    y.ceil() - y
}

/// Residuals of the five functional equations; `n` points in `(0, 1)` for
/// the first three and in `(0, 1/2)` for the last two.
pub fn functional_eqs(opts: &VerifyOptions) -> Result<SuiteOutcome> {
    let tol = opts.tol.unwrap_or(RESIDUAL_TOL);
    let cfg = opts.eval;
    let unit = SamplePlan::new(opts.n, 0.0, 1.0, opts.seed).draw()?;
    let half = SamplePlan::new(opts.n, 0.0, 0.5, opts.seed.wrapping_add(1)).draw()?;
    let xf = real::to_f64;
    let reports = vec![
        residual_report("B(x) + log x - x B(1/x)", &unit, tol, |x| {
            Ok(brjuno::brjuno(x, &cfg)?.value + real::ln(x) - xf(x) * brjuno::brjuno(inv_frac(x), &cfg)?.value)
        }),
        residual_report("W(x) + log x + x W(1/x)", &unit, tol, |x| {
            Ok(brjuno::wilton(x, &cfg)?.value + real::ln(x) + xf(x) * brjuno::wilton(inv_frac(x), &cfg)?.value)
        }),
        residual_report("B0(x) + log x - x B0(A0 x)", &unit, tol, |x| {
            let ax = by_excess_image(x);
            let tail = if ax == 0.0 { 0.0 } else { brjuno::semi_brjuno(ax, &cfg)?.value };
            Ok(brjuno::semi_brjuno(x, &cfg)?.value + real::ln(x) - xf(x) * tail)
        }),
        residual_report("W-(x) - g(x) + x W-(A x)", &half, tol, |x| {
            let lhs = brjuno::wilton_minus(x, &cfg)?.value;
            Ok(lhs - brjuno::g_func(x)? + xf(x) * brjuno::wilton_minus(inv_frac(x), &cfg)?.value)
        }),
        residual_report("delta-(x) - f(x) + x delta-(A x)", &half, tol, |x| {
            let lhs = delta::delta_minus_direct(x, &cfg)?;
            Ok(lhs - brjuno::f_func(x)? + xf(x) * delta::delta_minus_direct(inv_frac(x), &cfg)?)
        }),
    ];
    let hard_failures = reports
        .iter()
        .filter(|r| !r.passed)
        .map(|r| format!("{}: max residual {:e} at x = {} ({} failures)", r.identity, r.max_abs, r.argmax, r.failures))
        .collect();
    Ok(SuiteOutcome { records: reports.into_iter().map(Record::Residual).collect(), hard_failures })
}

/// Reduced `p/q` in `(0, 1/2)` with `q ≤ q_max`, ordered by `(q, p)`.
pub fn fractions_below_half(q_max: i64) -> Vec<(i64, i64)> {
    let mut out = Vec::new();
    for q in 3..=q_max {
        for p in 1..=(q - 1) / 2 {
            if p.gcd(&q) == 1 {
                out.push((p, q));
            }
        }
    }
    out
}

/// Hard: each jump positive and within the tolerance of `2/q`.
pub fn jumps(opts: &VerifyOptions) -> Result<SuiteOutcome> {
    let tol = opts.tol.unwrap_or(JUMP_TOL);
    let fr = fractions_below_half(opts.q_max);
    let reports: Vec<Result<JumpReport>> =
        fr.par_iter().map(|&(p, q)| delta::jump_at(p, q, &DEFAULT_OFFSETS)).collect();
    let mut records = Vec::new();
    let mut hard_failures = Vec::new();
    for ((p, q), r) in fr.iter().zip(reports) {
        match r {
            Ok(r) => {
                if !(r.jump > 0.0 && (r.jump - r.expected).abs() <= tol) {
                    hard_failures.push(format!("{p}/{q}: jump {} against {}", r.jump, r.expected));
                }
                records.push(Record::Jump(r));
            }
            Err(e) => hard_failures.push(format!("{p}/{q}: {e}")),
        }
    }
    Ok(SuiteOutcome { records, hard_failures })
}

pub const QLOG_DEPTH: usize = 40;

/// Soft: distance from each function to its convergent-denominator
/// approximant, and `Σ log q_j / q_j`.
pub fn qlog(opts: &VerifyOptions) -> Result<SuiteOutcome> {
    let xs = SamplePlan::new(opts.n, 0.0, 1.0, opts.seed).draw()?;
    let cfg = opts.eval;
    let d = QLOG_DEPTH;
    let records = vec![
        Record::Defect(defect_report("B - sum log q_(j+1)/q_j", &xs, opts.seed, |x| {
            Ok(brjuno::brjuno(x, &cfg)?.value - brjuno::qlog_approximant(x, QlogKind::Brjuno, d)?)
        })),
        Record::Defect(defect_report("W - sum (-1)^j log q_(j+1)/q_j", &xs, opts.seed, |x| {
            Ok(brjuno::wilton(x, &cfg)?.value - brjuno::qlog_approximant(x, QlogKind::Wilton, d)?)
        })),
        Record::Defect(defect_report("B0 - sum log a_(2j+1)/q_(2j)", &xs, opts.seed, |x| {
            Ok(brjuno::semi_brjuno(x, &cfg)?.value - brjuno::qlog_approximant(x, QlogKind::Semi, d)?)
        })),
        Record::Defect(defect_report("sum log q_j/q_j", &xs, opts.seed, |x| brjuno::log_q_over_q(x, d))),
    ];
    Ok(SuiteOutcome { records, hard_failures: Vec::new() })
}

pub const IDENTITY_Q_MAX: i64 = 100;
pub const IDENTITY_POINTS: usize = 10;

/// Seeded points in the upper half-plane: `Re z ∈ (−1, 2)`,
/// `log10 Im z ∈ (−3, 0)`.
pub fn random_upper_points(n: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let re: f64 = rng.gen_range(-1.0..2.0);
            let e: f64 = rng.gen_range(-3.0..0.0);
            Complex64::new(re, 10f64.powf(e))
        })
        .collect()
}

/// Largest `|½(𝓑-term + 𝓦-term) − semi-term|` over reduced `p/q` with
/// `q ≤ q_max` in one period around each `z`.
pub fn max_cancellation_error(points: &[Complex64], q_max: i64) -> Result<ResidualReport> {
    let mut max = 0.0f64;
    let mut argmax = f64::NAN;
    let mut n = 0;
    for &z in points {
        let plan = complex::TruncationPlan { q_max, window: 0.5, q_min_keep: q_max };
        let fracs = complex::enumerate_fractions(&plan, z.re)?;
        n += fracs.len();
        let errs: Vec<f64> = fracs
            .par_iter()
            .map(|t| {
                let c = complex::term(t, z);
                (0.5 * (c.value_b + c.value_w) - c.value_semi).norm()
            })
            .collect();
        for e in errs {
            if e > max || argmax.is_nan() {
                max = e;
                argmax = z.re;
            }
        }
    }
    Ok(ResidualReport {
        identity: "(B-term + W-term)/2 - semi-term".into(),
        n,
        max_abs: max,
        argmax,
        tolerance: CANCELLATION_TOL,
        failures: 0,
        passed: max <= CANCELLATION_TOL,
    })
}

/// Hard: term-wise cancellation at `IDENTITY_POINTS` seeded points.
pub fn complex_identity(opts: &VerifyOptions) -> Result<SuiteOutcome> {
    let tol = opts.tol.unwrap_or(CANCELLATION_TOL);
    let pts = random_upper_points(IDENTITY_POINTS, opts.seed);
    let mut r = max_cancellation_error(&pts, IDENTITY_Q_MAX)?;
    r.tolerance = tol;
    r.passed = r.max_abs <= tol;
    let hard_failures = if r.passed { Vec::new() } else { vec![format!("max cancellation error {:e}", r.max_abs)] };
    Ok(SuiteOutcome { records: vec![Record::Residual(r)], hard_failures })
}

/// Checks that `farey_parents` is consistent for every reduced `p/q` in
/// `[0, 1]` with `q ≤ q_max`; returns the failures.
pub fn farey_failures(q_max: i64) -> Vec<(i64, i64)> {
    let mut bad = Vec::new();
    for q in 1..=q_max {
        for p in 0..=q {
            if p.gcd(&q) != 1 {
                continue;
            }
            match farey_parents(p, q) {
                Ok(t) if t.is_valid() => {}
                _ => bad.push((p, q)),
            }
        }
    }
    bad
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plan_respects_exclusion() {
        let plan = SamplePlan::new(500, 0.0, 1.0, 3);
        let xs = plan.draw().unwrap();
        assert_eq!(xs.len(), 500);
        assert!(xs.iter().all(|&x| plan.admits(x) && x > 0.0 && x < 1.0));
        assert_eq!(xs, plan.draw().unwrap());
    }

    #[test]
    fn narrow_interval_is_infeasible() {
        let mut plan = SamplePlan::new(3, 0.5 - 1e-6, 0.5 + 1e-6, 1);
        plan.exclusion_radius_scale = 0.1;
        assert!(plan.draw().is_err());
    }

    #[test]
    fn names_round_trip() {
        for f in FnName::ALL {
            assert_eq!(f.as_str().parse::<FnName>().unwrap(), f);
        }
        assert!("Q".parse::<FnName>().is_err());
    }

    #[test]
    fn csv_reason_column_only_on_failure() {
        let ok = SampleRow {
            x: 0.25,
            result: Ok(EvalResult { value: 1.0, depth_used: 2, tail_bound: 0.0, converged: true }),
        };
        let mut buf = Vec::new();
        write_csv(std::slice::from_ref(&ok), &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("x,value,depth,tail_bound,converged\n"));
        let bad = SampleRow { x: 0.5, result: Err(Error::RationalInput { p: 1, q: 2 }) };
        let mut buf = Vec::new();
        write_csv(&[ok, bad], &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("x,value,depth,tail_bound,converged,reason\n"));
        assert_eq!(s.lines().count(), 3);
    }

    #[test]
    fn fraction_list() {
        assert_eq!(fractions_below_half(5), vec![(1, 3), (1, 4), (1, 5), (2, 5)]);
    }
}
