//! Continued-fraction expansions under the Gauss map `A(x) = {1/x}`, the
//! by-excess map `A₀(x) = ⌊1/x + 1⌋ − 1/x` and the nearest-integer map
//! `A½(x) = |1/x − ⌊1/x + 1/2⌋|`.
//!
//! All three are written in the common signed form
//!
//! ```text
//! 1/x_{i-1} = a_i + ε_i x_i
//! ```
//!
//! with `ε_i = +1` for Gauss, `ε_i = −1` for by-excess and `ε_i ∈ {−1, 0, +1}`
//! for nearest-integer. The convergents then follow one recurrence,
//! `Q_{i+1} = a_{i+1} Q_i + ε_i Q_{i-1}`, which is the matrix product
//! `[[0,1],[ε_1,a_1]] ⋯ [[0,1],[ε_n,a_n]]`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::real::{self, Real, DD_EPS};

/// Below this size an iterate is treated as zero (the seed is rational at
/// working precision).
pub const MIN_ITERATE: f64 = 1e-15;

/// Partial quotients above this are clamped and the expansion is flagged.
pub const DIGIT_CAP: f64 = 1e15;

/// Snap `⌊·⌋` to an integer when the argument is this many ulps from it.
const SNAP_ULPS: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum CfKind {
    Gauss,
    ByExcess,
    NearestInteger,
}

impl CfKind {
    /// Upper end of the interval the iterates live in.
    pub fn domain_max(self) -> f64 {
        match self {
            CfKind::Gauss | CfKind::ByExcess => 1.0,
            CfKind::NearestInteger => 0.5,
        }
    }
}

/// One partial quotient `a_i` with its sign `ε_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Digit {
    pub a: u64,
    pub eps: i8,
}

/// Result of one application of a map.
#[derive(Debug, Clone, Copy)]
pub struct Step {
    pub digit: Digit,
    pub next: Real,
    /// `1/x` was within a few ulps of a discontinuity of the map.
    pub ambiguous: bool,
    /// The digit exceeded [`DIGIT_CAP`].
    pub capped: bool,
}

fn snap_floor(v: Real) -> (f64, bool) {
    let n = v.round();
    let tol = SNAP_ULPS * DD_EPS * v.hi().abs().max(1.0);
    if real::to_f64((v - n).abs()) <= tol {
        (real::to_f64(n), true)
    } else {
        (real::to_f64(v.floor()), false)
    }
}

/// Initial reduction of a real seed: returns `(a₀, ε₀, x₀)` with
/// `x = a₀ + ε₀ x₀`.
pub fn reduce_seed(x: Real, kind: CfKind) -> (i64, i8, Real) {
    match kind {
        CfKind::Gauss | CfKind::ByExcess => {
            let a0 = x.floor();
            (real::to_f64(a0) as i64, 1, real::frac(x))
        }
        CfKind::NearestInteger => {
            let a0 = (x + 0.5).floor();
            let d = x - a0;
            let eps = if d > 0.0 {
                1
            } else if d < 0.0 {
                -1
            } else {
                0
            };
            (real::to_f64(a0) as i64, eps, d.abs())
        }
    }
}

/// Apply the map once. `x` must be strictly positive.
pub fn step(x: Real, kind: CfKind) -> Step {
    let y = real::recip(x);
    if y.hi() > DIGIT_CAP {
        return Step {
            digit: Digit {
                a: DIGIT_CAP as u64,
                eps: match kind {
                    CfKind::Gauss => 1,
                    CfKind::ByExcess => -1,
                    CfKind::NearestInteger => 0,
                },
            },
            next: Real::from(0.0),
            ambiguous: false,
            capped: true,
        };
    }
    let ulps = SNAP_ULPS * DD_EPS * y.hi().abs();
    match kind {
        CfKind::Gauss => {
            let (a, snapped) = snap_floor(y);
            let next = if snapped { Real::from(0.0) } else { y - a };
            Step { digit: Digit { a: a as u64, eps: 1 }, next, ambiguous: snapped, capped: false }
        }
        CfKind::ByExcess => {
            let (fl, snapped) = snap_floor(y);
            // 1/x an integer: the expansion ends with digit 1/x.
            let (a, next) = if snapped { (fl, Real::from(0.0)) } else { (fl + 1.0, Real::from(fl + 1.0) - y) };
            Step { digit: Digit { a: a as u64, eps: -1 }, next, ambiguous: snapped, capped: false }
        }
        CfKind::NearestInteger => {
            let (a, tie) = snap_floor(y + 0.5);
            let d = y - a;
            let (eps, next) = if real::to_f64(d.abs()) <= ulps {
                (0, Real::from(0.0))
            } else if d > 0.0 {
                (1, d)
            } else {
                (-1, -d)
            };
            Step { digit: Digit { a: a as u64, eps }, next, ambiguous: tie || eps == 0, capped: false }
        }
    }
}

/// Convergents `(P_i, Q_i)`, `i = 0..=digits.len()`, of `a₀ + ε₀·[digits]`.
pub fn convergents(a0: i64, eps0: i8, digits: &[Digit]) -> Vec<(BigInt, BigInt)> {
    let a0 = BigInt::from(a0);
    let eps0 = BigInt::from(eps0.clamp(-1, 1));
    // Convergents of x₀ itself; (p_{-1}, q_{-1}) = (1, 0).
    let mut prev = (BigInt::one(), BigInt::zero());
    let mut cur = (BigInt::zero(), BigInt::one());
    let mut eps_prev = BigInt::one();
    let mut out = Vec::with_capacity(digits.len() + 1);
    let lift = |p: &BigInt, q: &BigInt| {
        let big_p = if eps0.is_zero() {
            // x₀ = 0, so x = a₀ and every convergent P_i/Q_i is a₀.
            &a0 * q
        } else {
            &a0 * q + &eps0 * p
        };
        (big_p, q.clone())
    };
    out.push(lift(&cur.0, &cur.1));
    for d in digits {
        let a = BigInt::from(d.a);
        let next = (&a * &cur.0 + &eps_prev * &prev.0, &a * &cur.1 + &eps_prev * &prev.1);
        prev = std::mem::replace(&mut cur, next);
        eps_prev = BigInt::from(d.eps);
        out.push(lift(&cur.0, &cur.1));
    }
    out
}

/// A floating-point continued-fraction expansion.
#[derive(Debug, Clone)]
pub struct CfExpansion {
    pub kind: CfKind,
    pub seed_x: Real,
    pub a0: i64,
    pub eps0: i8,
    /// `(a_i, ε_i)` for `i = 1..=n`.
    pub digits: Vec<Digit>,
    /// `x_0, …, x_n`.
    pub iterates: Vec<Real>,
    /// `(P_i, Q_i)` for `i = 0..=n`.
    pub convergents: Vec<(BigInt, BigInt)>,
    /// `β_i = x_0 ⋯ x_i`.
    pub betas: Vec<f64>,
    /// Some `x_i` is exactly zero.
    pub terminated: bool,
    /// Stopped because an iterate fell below [`MIN_ITERATE`].
    pub near_rational: bool,
    pub boundary_ambiguous: bool,
    pub digit_capped: bool,
}

impl CfExpansion {
    pub fn depth(&self) -> usize {
        self.digits.len()
    }
}

/// Expand `x` under `kind` for at most `max_depth` steps.
pub fn expand(x: Real, kind: CfKind, max_depth: usize) -> Result<CfExpansion> {
    if !real::is_finite(x) {
        return Err(Error::Domain(format!("non-finite seed {}", real::to_f64(x))));
    }
    let (a0, eps0, x0) = reduce_seed(x, kind);
    let mut e = CfExpansion {
        kind,
        seed_x: x,
        a0,
        eps0,
        digits: Vec::new(),
        iterates: vec![x0],
        convergents: Vec::new(),
        betas: vec![real::to_f64(x0)],
        terminated: x0 == 0.0,
        near_rational: false,
        boundary_ambiguous: false,
        digit_capped: false,
    };
    let mut cur = x0;
    while e.digits.len() < max_depth && !e.terminated {
        if cur.hi() < MIN_ITERATE {
            e.near_rational = true;
            break;
        }
        let s = step(cur, kind);
        e.boundary_ambiguous |= s.ambiguous;
        e.digit_capped |= s.capped;
        e.digits.push(s.digit);
        e.iterates.push(s.next);
        let beta = e.betas.last().copied().unwrap_or(1.0) * real::to_f64(s.next);
        e.betas.push(beta);
        e.terminated = s.next == 0.0;
        cur = s.next;
        if s.capped {
            break;
        }
    }
    e.convergents = convergents(e.a0, e.eps0, &e.digits);
    Ok(e)
}

/// The `(P_i, Q_i)` table of an expansion.
pub fn convergent_table(e: &CfExpansion) -> Vec<(BigInt, BigInt)> {
    e.convergents.clone()
}

/// An expansion carried out in exact rational arithmetic.
#[derive(Debug, Clone)]
pub struct RationalExpansion {
    pub kind: CfKind,
    pub a0: BigInt,
    pub eps0: i8,
    pub digits: Vec<Digit>,
    pub iterates: Vec<BigRational>,
    pub terminated: bool,
}

impl RationalExpansion {
    pub fn convergents(&self) -> Vec<(BigInt, BigInt)> {
        let a0 = self.a0.to_i64().expect("integer part fits in i64");
        convergents(a0, self.eps0, &self.digits)
    }

    pub fn depth(&self) -> usize {
        self.digits.len()
    }
}

fn floor_rat(r: &BigRational) -> BigInt {
    r.numer().div_floor(r.denom())
}

/// Exact expansion of `p/q`.
pub fn expand_rational(p: i64, q: i64, kind: CfKind, max_depth: usize) -> Result<RationalExpansion> {
    if q == 0 {
        return Err(Error::Domain("zero denominator".into()));
    }
    let x = BigRational::new(BigInt::from(p), BigInt::from(q));
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let (a0, eps0, x0) = match kind {
        CfKind::Gauss | CfKind::ByExcess => {
            let a0 = floor_rat(&x);
            let x0 = &x - BigRational::from_integer(a0.clone());
            (a0, 1i8, x0)
        }
        CfKind::NearestInteger => {
            let a0 = floor_rat(&(&x + &half));
            let d = &x - BigRational::from_integer(a0.clone());
            let eps = if d.is_positive() {
                1
            } else if d.is_negative() {
                -1
            } else {
                0
            };
            (a0, eps, d.abs())
        }
    };
    let mut e = RationalExpansion { kind, a0, eps0, digits: Vec::new(), terminated: x0.is_zero(), iterates: vec![x0] };
    while e.digits.len() < max_depth && !e.terminated {
        let cur = e.iterates.last().unwrap();
        let y = cur.recip();
        let (digit, next) = match kind {
            CfKind::Gauss => {
                let a = floor_rat(&y);
                let next = &y - BigRational::from_integer(a.clone());
                (Digit { a: to_digit(&a)?, eps: 1 }, next)
            }
            CfKind::ByExcess => {
                if y.is_integer() {
                    (Digit { a: to_digit(&y.to_integer())?, eps: -1 }, BigRational::zero())
                } else {
                    let a: BigInt = floor_rat(&y) + BigInt::one();
                    let next = BigRational::from_integer(a.clone()) - &y;
                    (Digit { a: to_digit(&a)?, eps: -1 }, next)
                }
            }
            CfKind::NearestInteger => {
                let a = floor_rat(&(&y + &half));
                let d = &y - BigRational::from_integer(a.clone());
                let eps = if d.is_positive() {
                    1
                } else if d.is_negative() {
                    -1
                } else {
                    0
                };
                (Digit { a: to_digit(&a)?, eps }, d.abs())
            }
        };
        e.terminated = next.is_zero();
        e.digits.push(digit);
        e.iterates.push(next);
    }
    Ok(e)
}

fn to_digit(a: &BigInt) -> Result<u64> {
    a.to_u64().ok_or_else(|| Error::Domain(format!("partial quotient {a} does not fit in u64")))
}

/// Smallest `i` with `A½^i(p/q) = 0`, for reduced `p/q ∈ (0, 1/2]`.
pub fn rational_depth(p: i64, q: i64) -> Result<usize> {
    if q <= 0 || p <= 0 || 2 * p > q {
        return Err(Error::Domain(format!("{p}/{q} is outside (0, 1/2]")));
    }
    if p.gcd(&q) != 1 {
        return Err(Error::Domain(format!("{p}/{q} is not reduced")));
    }
    // x = num/den; 1/x = den/num; a = ⌊(2 den + num) / (2 num)⌋.
    let (mut num, mut den) = (p as i128, q as i128);
    let mut depth = 0;
    while num != 0 {
        let a = (2 * den + num).div_euclid(2 * num);
        let d = den - a * num;
        depth += 1;
        den = num;
        num = d.abs();
    }
    Ok(depth)
}

/// A reduced fraction with its Farey parents `p′/q′ < p/q < p″/q″`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FareyTriple {
    pub p: i64,
    pub q: i64,
    pub p1: i64,
    pub q1: i64,
    pub p2: i64,
    pub q2: i64,
}

impl FareyTriple {
    pub fn value(&self) -> f64 {
        self.p as f64 / self.q as f64
    }

    /// Mediant and unimodularity checks.
    pub fn is_valid(&self) -> bool {
        self.q > 0
            && self.q1 >= 0
            && self.q2 >= 0
            && self.p == self.p1 + self.p2
            && self.q == self.q1 + self.q2
            && self.p2 * self.q1 - self.p1 * self.q2 == 1
    }
}

/// Farey parents of `p/q`. For `q = 1` the parents are `(p−1)/1` and `1/0`.
pub fn farey_parents(p: i64, q: i64) -> Result<FareyTriple> {
    if q <= 0 {
        return Err(Error::Domain(format!("denominator {q} must be positive")));
    }
    if p.gcd(&q) != 1 {
        return Err(Error::Domain(format!("{p}/{q} is not reduced")));
    }
    if q == 1 {
        return Ok(FareyTriple { p, q, p1: p - 1, q1: 1, p2: 1, q2: 0 });
    }
    let k = p.div_euclid(q);
    let r = p.rem_euclid(q);
    // r·q′ ≡ 1 (mod q) with 0 < q′ < q.
    let ext = r.extended_gcd(&q);
    let q1 = ext.x.rem_euclid(q);
    let p1 = (r * q1 - 1) / q;
    let q2 = q - q1;
    let p2 = r - p1;
    Ok(FareyTriple { p, q, p1: p1 + k * q1, q1, p2: p2 + k * q2, q2 })
}
