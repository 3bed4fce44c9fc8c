//! Extended-precision reference values: periodic continued fractions
//! reassembled from their Möbius fixed points, the closed form of the
//! series at such points, and a big-float re-evaluation of the series.

use astro_float::{BigFloat, Consts, RoundingMode};
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::brjuno::{detect_rational, RealFn, RATIONAL_Q_CAP};
use crate::cf::{CfKind, Digit, MIN_ITERATE};
use crate::error::{Error, Result};
use crate::real::Real;

const RM: RoundingMode = RoundingMode::ToEven;

/// Precision used when the caller does not choose one.
pub const DEFAULT_BITS: usize = 256;

/// By-excess orbits longer than this in the oracle are refused.
const MAX_ORACLE_STEPS: usize = 200_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PeriodicCF {
    pub kind: CfKind,
    pub preperiod: Vec<Digit>,
    pub period: Vec<Digit>,
}

impl PeriodicCF {
    /// Purely periodic expansion with `eps` taken from the kind.
    pub fn pure(kind: CfKind, digits: &[u64]) -> Self {
        let eps = match kind {
            CfKind::ByExcess => -1,
            _ => 1,
        };
        PeriodicCF { kind, preperiod: Vec::new(), period: digits.iter().map(|&a| Digit { a, eps }).collect() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.period.is_empty() {
            return Err(Error::Domain("empty period".into()));
        }
        for d in self.preperiod.iter().chain(&self.period) {
            let ok = match self.kind {
                CfKind::Gauss => d.a >= 1 && d.eps == 1,
                CfKind::ByExcess => d.a >= 2 && d.eps == -1,
                CfKind::NearestInteger => d.a >= 2 && (d.eps == 1 || d.eps == -1) && !(d.a == 2 && d.eps == -1),
            };
            if !ok {
                return Err(Error::Domain(format!("digit ({}, {}) is not valid for {:?}", d.a, d.eps, self.kind)));
            }
        }
        Ok(())
    }
}

/// Big-float working context.
pub struct Ctx {
    pub p: usize,
    cc: Consts,
}

impl Ctx {
    pub fn new(p: usize) -> Result<Self> {
        let cc = Consts::new().map_err(|e| Error::Precision(format!("{e:?}")))?;
        Ok(Ctx { p, cc })
    }

    pub fn int(&self, v: i64) -> BigFloat {
        BigFloat::from_i64(v, self.p)
    }

    fn big(&self, v: &BigInt) -> BigFloat {
        match v.to_i64() {
            Some(i) => self.int(i),
            None => BigFloat::parse(&v.to_string(), astro_float::Radix::Dec, self.p, RM, &mut Consts::new().unwrap()),
        }
    }

    pub fn from_real(&self, x: Real) -> BigFloat {
        BigFloat::from_f64(x.hi(), self.p).add(&BigFloat::from_f64(x.lo(), self.p), self.p, RM)
    }

    pub fn ln(&mut self, x: &BigFloat) -> BigFloat {
        x.ln(self.p, RM, &mut self.cc)
    }
}

pub fn to_f64(x: &BigFloat) -> f64 {
    format!("{x}").parse().unwrap_or(f64::NAN)
}

/// Nearest double-double.
pub fn to_real(x: &BigFloat) -> Real {
    let p = x.precision().unwrap_or(DEFAULT_BITS);
    let hi = to_f64(x);
    let lo = to_f64(&x.sub(&BigFloat::from_f64(hi, p), p, RM));
    Real::new_add(hi, lo)
}

/// `π` to `bits` bits.
pub fn pi(bits: usize) -> Result<BigFloat> {
    let mut cc = Consts::new().map_err(|e| Error::Precision(format!("{e:?}")))?;
    Ok(cc.pi(bits, RM))
}

fn is_lt(a: &BigFloat, b: &BigFloat) -> bool {
    a.cmp(b) == Some(-1)
}

/// 2×2 integer matrix acting as a Möbius map.
type Mat = [[BigInt; 2]; 2];

fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let e = |i: usize, j: usize| &a[i][0] * &b[0][j] + &a[i][1] * &b[1][j];
    [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]
}

/// `x_{i−1} = 1/(a_i + ε_i x_i)` as a matrix in `x_i`.
fn digit_mat(d: &Digit) -> Mat {
    [[BigInt::zero(), BigInt::from(1)], [BigInt::from(d.eps), BigInt::from(d.a)]]
}

fn product(ds: &[Digit]) -> Mat {
    let id = [[BigInt::from(1), BigInt::zero()], [BigInt::zero(), BigInt::from(1)]];
    ds.iter().fold(id, |m, d| mat_mul(&m, &digit_mat(d)))
}

fn apply(ctx: &Ctx, m: &Mat, x: &BigFloat) -> BigFloat {
    let p = ctx.p;
    let num = ctx.big(&m[0][0]).mul(x, p, RM).add(&ctx.big(&m[0][1]), p, RM);
    let den = ctx.big(&m[1][0]).mul(x, p, RM).add(&ctx.big(&m[1][1]), p, RM);
    num.div(&den, p, RM)
}

/// The number whose expansion is `pc`, as the fixed point of the period's
/// Möbius map in the kind's domain, pulled back through the preperiod.
pub fn periodic_value(pc: &PeriodicCF, bits: usize) -> Result<BigFloat> {
    let mut ctx = Ctx::new(bits)?;
    periodic_value_in(&mut ctx, pc)
}

fn periodic_value_in(ctx: &mut Ctx, pc: &PeriodicCF) -> Result<BigFloat> {
    pc.validate()?;
    let m = product(&pc.period);
    let [[a, b], [c, d]] = &m;
    // c x² + (d − a) x − b = 0.
    if c.is_zero() {
        return Err(Error::Degenerate("period map has no finite fixed point".into()));
    }
    let da = d - a;
    let disc = &da * &da + BigInt::from(4) * b * c;
    if !disc.is_positive() {
        return Err(Error::Degenerate("period map has no distinct real fixed points".into()));
    }
    let p = ctx.p;
    let s = ctx.big(&disc).sqrt(p, RM);
    let two_c = ctx.big(&(BigInt::from(2) * c));
    let neg_da = ctx.big(&(-&da));
    let roots = [neg_da.add(&s, p, RM).div(&two_c, p, RM), neg_da.sub(&s, p, RM).div(&two_c, p, RM)];
    let hi = match pc.kind {
        CfKind::NearestInteger => ctx.int(1).div(&ctx.int(2), p, RM),
        _ => ctx.int(1),
    };
    let zero = ctx.int(0);
    let inside: Vec<&BigFloat> = roots.iter().filter(|r| is_lt(&zero, r) && is_lt(r, &hi)).collect();
    let x = match inside.as_slice() {
        [r] => (*r).clone(),
        _ => return Err(Error::Degenerate("period map has no fixed point inside the domain".into())),
    };
    if pc.preperiod.is_empty() {
        return Ok(x);
    }
    Ok(apply(ctx, &product(&pc.preperiod), &x))
}

fn sign(which: RealFn, j: usize) -> f64 {
    if which == RealFn::Wilton && j % 2 == 1 {
        -1.0
    } else {
        1.0
    }
}

fn compatible(kind: CfKind, which: RealFn) -> Result<()> {
    let ok = matches!(
        (kind, which),
        (CfKind::Gauss, RealFn::Brjuno) | (CfKind::Gauss, RealFn::Wilton) | (CfKind::ByExcess, RealFn::Semi)
    );
    if ok {
        Ok(())
    } else {
        Err(Error::Domain(format!("{which:?} is not built on the {kind:?} expansion")))
    }
}

/// Iterates `x_i = ε_i (1/x_{i−1} − a_i)` through the given digits.
fn orbit(ctx: &Ctx, x0: &BigFloat, ds: &[Digit]) -> Vec<BigFloat> {
    let p = ctx.p;
    let mut out = vec![x0.clone()];
    for d in ds {
        let prev = out.last().unwrap();
        let mut next = prev.reciprocal(p, RM).sub(&ctx.int(d.a as i64), p, RM);
        if d.eps < 0 {
            next = next.neg();
        }
        out.push(next);
    }
    out
}

/// `Σ_{j<n} σ_j β_{j−1} log(1/x_j)` and `σ_n β_{n−1}` over the first `n`
/// iterates.
fn partial(ctx: &mut Ctx, which: RealFn, xs: &[BigFloat]) -> (BigFloat, BigFloat) {
    let p = ctx.p;
    let mut sum = ctx.int(0);
    let mut beta = ctx.int(1);
    for (j, x) in xs.iter().enumerate() {
        let mut t = beta.mul(&ctx.ln(x), p, RM).neg();
        if sign(which, j) < 0.0 {
            t = t.neg();
        }
        sum = sum.add(&t, p, RM);
        beta = beta.mul(x, p, RM);
    }
    if sign(which, xs.len()) < 0.0 {
        beta = beta.neg();
    }
    (sum, beta)
}

/// The series at a periodic point, summed in closed form around one period.
pub fn closed_form_b(pc: &PeriodicCF, which: RealFn, bits: usize) -> Result<BigFloat> {
    compatible(pc.kind, which)?;
    let mut ctx = Ctx::new(bits)?;
    let x0 = periodic_value_in(&mut ctx, pc)?;
    let m = pc.preperiod.len();
    let k = pc.period.len();
    let all: Vec<Digit> = pc.preperiod.iter().chain(&pc.period).cloned().collect();
    let xs = orbit(&ctx, &x0, &all[..m + k - 1]);
    let (pre_sum, pre_beta) = partial(&mut ctx, which, &xs[..m]);
    let (per_sum, per_beta) = partial(&mut ctx, which, &xs[m..m + k]);
    let p = ctx.p;
    let one = ctx.int(1);
    let denom = one.sub(&per_beta, p, RM);
    if !is_lt(&ctx.int(0), &denom) || !is_lt(&denom, &ctx.int(2)) {
        return Err(Error::Degenerate("period β-product does not contract".into()));
    }
    let periodic = per_sum.div(&denom, p, RM);
    Ok(pre_sum.add(&pre_beta.mul(&periodic, p, RM), p, RM))
}

/// Result of a big-float series evaluation.
#[derive(Debug, Clone)]
pub struct Recheck {
    pub value: BigFloat,
    pub steps: usize,
}

impl Recheck {
    pub fn to_f64(&self) -> f64 {
        to_f64(&self.value)
    }
}

/// Precision at which [`recheck`] iterates for a target of `bits`.
pub fn working_bits(bits: usize) -> usize {
    2 * bits + 64
}

/// Re-evaluates the series with digits recomputed in big-float arithmetic.
///
/// `bits` is the target output precision. An input error `δ` reaches the
/// sum as about `δ·2^bits` once `β` has fallen to `2^−bits`, so `x` itself
/// must carry [`working_bits`]`(bits)` bits for the result to be good to
/// `2^−bits`.
pub fn recheck(x: &BigFloat, which: RealFn, bits: usize) -> Result<Recheck> {
    let wp = working_bits(bits);
    let mut ctx = Ctx::new(wp)?;
    let p = wp;
    if x.is_nan() || x.is_inf() {
        return Err(Error::Domain("non-finite argument".into()));
    }
    let xf = to_f64(x);
    let head = Real::from(xf);
    // Rational at double precision is rejected even if the big-float input
    // carries more digits.
    if let Some((pn, qn)) = detect_rational(head, MIN_ITERATE, RATIONAL_Q_CAP) {
        return Err(Error::RationalInput { p: pn, q: qn });
    }
    let kind = match which {
        RealFn::Semi => CfKind::ByExcess,
        _ => CfKind::Gauss,
    };
    let mut cur = x.sub(&x.floor(), p, RM);
    let eps_out = BigFloat::from_f64(2f64.powi(-(bits as i32) - 8), p);
    let mut sum = ctx.int(0);
    let mut beta = ctx.int(1);
    let mut steps = 0;
    let one = ctx.int(1);
    let tiny = BigFloat::from_f64(2f64.powi(-(bits as i32) / 2), p);
    let double_level = BigFloat::from_f64(2f64.powi(-64), p);
    loop {
        // An exact rational ends in an iterate that is zero up to rounding.
        // Past β = 2⁻⁶⁴ that ending lies beyond double resolution and the
        // sum so far is returned.
        if cur.is_zero() || is_lt(&cur, &tiny) {
            if is_lt(&beta, &double_level) {
                break;
            }
            return Err(Error::RationalInput { p: 0, q: 0 });
        }
        let lg = ctx.ln(&cur);
        let tail = beta.mul(&lg.abs().add(&ctx.int(10), p, RM), p, RM);
        if is_lt(&tail, &eps_out) {
            break;
        }
        if steps >= MAX_ORACLE_STEPS {
            return Err(Error::Precision(format!("no convergence after {steps} steps")));
        }
        let mut t = beta.mul(&lg, p, RM).neg();
        if sign(which, steps) < 0.0 {
            t = t.neg();
        }
        sum = sum.add(&t, p, RM);
        beta = beta.mul(&cur, p, RM);
        let y = cur.reciprocal(p, RM);
        cur = match kind {
            CfKind::ByExcess if y.fract().is_zero() => ctx.int(0),
            CfKind::ByExcess => y.add(&one, p, RM).floor().sub(&y, p, RM),
            _ => y.sub(&y.floor(), p, RM),
        };
        steps += 1;
    }
    let mut value = sum;
    value.set_precision(bits, RM).map_err(|e| Error::Precision(format!("{e:?}")))?;
    Ok(Recheck { value, steps })
}

/// [`recheck`] of a double-double input, converted exactly.
pub fn recheck_real(x: Real, which: RealFn, bits: usize) -> Result<Recheck> {
    let ctx = Ctx::new(working_bits(bits))?;
    recheck(&ctx.from_real(x), which, bits)
}

/// `|a − b|` as an `f64`.
pub fn abs_diff(a: &BigFloat, b: &BigFloat) -> f64 {
    let p = a.precision().unwrap_or(DEFAULT_BITS).max(b.precision().unwrap_or(DEFAULT_BITS));
    to_f64(&a.sub(b, p, RM).abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_mean_from_period_one() {
        let g = periodic_value(&PeriodicCF::pure(CfKind::Gauss, &[1]), 256).unwrap();
        let expected = (5f64.sqrt() - 1.0) / 2.0;
        assert!((to_f64(&g) - expected).abs() < 1e-16);
    }

    #[test]
    fn by_excess_period_two_is_degenerate() {
        let r = periodic_value(&PeriodicCF::pure(CfKind::ByExcess, &[2]), 128);
        assert!(matches!(r, Err(Error::Degenerate(_))));
    }

    #[test]
    fn invalid_digits_are_rejected() {
        assert!(periodic_value(&PeriodicCF::pure(CfKind::ByExcess, &[1]), 128).is_err());
        assert!(periodic_value(&PeriodicCF::pure(CfKind::Gauss, &[]), 128).is_err());
        let bad = PeriodicCF { kind: CfKind::NearestInteger, preperiod: vec![], period: vec![Digit { a: 2, eps: -1 }] };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn incompatible_kind_is_rejected() {
        let pc = PeriodicCF::pure(CfKind::ByExcess, &[3]);
        assert!(closed_form_b(&pc, RealFn::Brjuno, 128).is_err());
    }
}
