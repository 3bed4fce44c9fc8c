//! The twelve acceptance criteria. Runs without the libtest harness so the
//! PASS/FAIL lines are always printed; exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::panic;
use std::time::{Duration, Instant};

use brjuno_core::brjuno::{self, EvalConfig, RealFn};
use brjuno_core::cf::{self, CfKind};
use brjuno_core::complex::{self, TruncationPlan};
use brjuno_core::delta::{self, DeltaFn, HolderPlan, PairSampling};
use brjuno_core::dilog::li2;
use brjuno_core::harness::{self, SamplePlan, VerifyOptions};
use brjuno_core::real::{self, Real};
use brjuno_core::FnName;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(t: Duration, limit: f64) -> bool {
    t.as_secs_f64() < limit
}

fn uniform(n: usize, lo: f64, hi: f64, seed: u64) -> Vec<f64> {
    SamplePlan::new(n, lo, hi, seed).draw().expect("sample plan")
}

fn closed_form_oracles() -> Outcome {
    let t = Instant::now();
    let cfg = EvalConfig::default();
    let g = real::golden();
    let xs = real::golden_sq();
    let lg = real::ln(g);
    let gf = real::to_f64(g);
    let xsf = real::to_f64(xs);
    let pairs = [
        ("B(g)", brjuno::brjuno(g, &cfg).unwrap().value, -lg / (1.0 - gf)),
        ("W(g)", brjuno::wilton(g, &cfg).unwrap().value, -lg / (1.0 + gf)),
        ("B0(x*)", brjuno::semi_brjuno(xs, &cfg).unwrap().value, -real::ln(xs) / (1.0 - xsf)),
    ];
    let worst = pairs.iter().map(|(_, a, b)| (a - b).abs()).fold(0.0, f64::max);
    let detail = pairs.iter().map(|(n, a, _)| format!("{n} = {a:.10}")).collect::<Vec<_>>().join(", ");
    let el = t.elapsed();
    check(worst <= 1e-9 && within(el, 1.0), format!("{detail}; max error {worst:.1e}; {el:.2?}"))
}

fn functional_equations() -> Outcome {
    let t = Instant::now();
    let out = harness::functional_eqs(&VerifyOptions { n: 10_000, seed: 11, ..VerifyOptions::default() }).unwrap();
    let el = t.elapsed();
    let worst = out
        .records
        .iter()
        .filter_map(|r| match r {
            harness::Record::Residual(r) => Some(r.max_abs),
            _ => None,
        })
        .fold(0.0, f64::max);
    check(
        out.passed() && within(el, 10.0),
        format!("5 identities × 10⁴ points, max residual {worst:.1e}; {el:.2?} {:?}", out.hard_failures),
    )
}

fn closed_form_identities() -> Outcome {
    let cfg = EvalConfig::default();
    let xs = uniform(1000, 0.0, 0.5, 12);
    let (mut odd, mut even, mut phi) = (0.0f64, 0.0f64, 0.0f64);
    for &x in &xs {
        let r = Real::from(x);
        odd = odd.max((brjuno::odd_part(RealFn::Brjuno, r, &cfg).unwrap() - brjuno::b_minus_closed(r).unwrap()).abs());
        even =
            even.max((brjuno::even_part(RealFn::Wilton, r, &cfg).unwrap() - brjuno::w_plus_closed(r).unwrap()).abs());
        phi = phi.max((brjuno::phi(r).unwrap() - brjuno::phi_series(r, &cfg).unwrap()).abs());
    }
    check(
        odd.max(even).max(phi) <= 1e-8,
        format!("odd part of B {odd:.1e}, even part of W {even:.1e}, Φ {phi:.1e} on 10³ points"),
    )
}

fn bounded_defect() -> Outcome {
    let sups = |n: usize| {
        let out = harness::bounded_defect(&VerifyOptions { n, seed: 7, ..VerifyOptions::default() }).unwrap();
        out.records
            .iter()
            .map(|r| match r {
                harness::Record::Defect(d) => d.sup_abs,
                _ => f64::NAN,
            })
            .collect::<Vec<_>>()
    };
    let a = sups(10_000);
    let b = sups(20_000);
    let stable = a.iter().zip(&b).all(|(x, y)| x.is_finite() && y.is_finite() && (y - x).abs() <= 0.2 * x);
    check(
        stable,
        format!("sup|B−2B0⁺| = {:.4} → {:.4}, sup|W−2B0⁻| = {:.4} → {:.4} (n = 10⁴ → 2·10⁴)", a[0], b[0], a[1], b[1]),
    )
}

fn jump_law() -> Outcome {
    let t = Instant::now();
    let out = harness::jumps(&VerifyOptions { q_max: 20, ..VerifyOptions::default() }).unwrap();
    let el = t.elapsed();
    let (mut n, mut worst) = (0, 0.0f64);
    for r in &out.records {
        if let harness::Record::Jump(j) = r {
            n += 1;
            worst = worst.max((j.jump - j.expected).abs());
        }
    }
    check(
        out.passed() && n == harness::fractions_below_half(20).len() && within(el, 60.0),
        format!("{n} fractions, max |jump − 2/q| = {worst:.1e}; {el:.2?} {:?}", out.hard_failures),
    )
}

fn dual_path() -> Outcome {
    let cfg = EvalConfig::default();
    let xs = uniform(1000, 0.0, 0.5, 13);
    let mut worst = 0.0f64;
    let mut series: Vec<Vec<f64>> = Vec::new();
    for &x in &xs {
        let s40 = delta::delta_minus_series(x, 40).unwrap();
        worst = worst.max((s40 - delta::delta_minus_direct(x, &cfg).unwrap()).abs());
        // series[m] holds m + 1 terms.
        series.push((1..=40).map(|m| delta::delta_minus_series(x, m).unwrap()).collect());
    }
    // Tail after N terms, sup over the sample, against (√2 − 1)^N.
    let rho = real::to_f64(real::silver());
    let tails: Vec<f64> = (0..=30).map(|n| series.iter().map(|s| (s[n] - s[39]).abs()).fold(0.0, f64::max)).collect();
    let c = (1..=12).map(|n| tails[n] / rho.powi(n as i32)).fold(0.0, f64::max);
    let floor = 1e-11;
    let bounded = (13..=30).all(|n| tails[n] <= c * rho.powi(n as i32) || tails[n] <= floor);
    check(
        worst <= 1e-6 && bounded,
        format!("max |series − direct| = {worst:.1e}; tail ≤ {c:.2}·(√2−1)^N for N ≤ 30 (floor {floor:.0e})"),
    )
}

fn endpoint_limits() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let (mut loose, mut tight) = (true, true);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let xi: f64 = rng.gen_range(0.0..1.0);
        let a = 1e-4 * (1.0 + xi);
        let b = 0.5 - a;
        let errs = [
            brjuno::f_tilde(a).unwrap() - 1.0,
            brjuno::f_tilde(b).unwrap(),
            brjuno::phi(a).unwrap() + 1.0,
            brjuno::phi(b).unwrap() + 2f64.ln(),
        ];
        for e in errs {
            worst = worst.max(e.abs());
            loose &= e.abs() <= 0.05;
            tight &= e.abs() <= 5e-3;
        }
    }
    check(loose && tight, format!("max endpoint error {worst:.1e} at offset 10⁻⁴(1+ξ) (tolerances 0.05 and 5e-3)"))
}

fn holder_exponents() -> Outcome {
    let cfg = EvalConfig::default();
    let plus =
        delta::holder_estimate(DeltaFn::Plus, &HolderPlan::uniform(0.05, 0.45, 1), &delta::dyadic_scales(5, 20), &cfg)
            .unwrap();
    let plan =
        HolderPlan { sampling: PairSampling::StraddleRationals { q_max: 20 }, ..HolderPlan::uniform(0.05, 0.45, 2) };
    let minus = delta::holder_estimate(DeltaFn::Minus, &plan, &delta::dyadic_scales(10, 20), &cfg).unwrap();
    let (a, b) = (plus.exponent_estimate, minus.exponent_estimate);
    check(
        (0.4..=0.6).contains(&a) && b < 0.1 && !plus.degenerate && !minus.degenerate,
        format!("Δ⁺ exponent {a:.3}, Δ⁻ exponent near rationals {b:.3}"),
    )
}

fn dilog_identities() -> Outcome {
    let t = Instant::now();
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let pi2_6 = PI * PI / 6.0;
    let mut worst = 0.0f64;
    let mut note = |e: f64| worst = worst.max(e);
    note((li2(c(1.0, 0.0)).unwrap() - pi2_6).norm());
    note((li2(c(-1.0, 0.0)).unwrap() + PI * PI / 12.0).norm());
    note((li2(c(0.5, 0.0)).unwrap() - (PI * PI / 12.0 - 0.5 * 2f64.ln().powi(2))).norm());
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for _ in 0..1000 {
        let z = c(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        let one = c(1.0, 0.0);
        let refl = li2(z).unwrap() + li2(one - z).unwrap() - (pi2_6 - z.ln() * (one - z).ln());
        let inv = li2(z).unwrap() + li2(z.inv()).unwrap() - (-pi2_6 - 0.5 * (-z).ln().powi(2));
        note(refl.norm());
        note(inv.norm());
    }
    let el = t.elapsed();
    check(worst <= 1e-11 && within(el, 1.0), format!("max identity error {worst:.1e} over 10³ points; {el:.2?}"))
}

fn complex_identities() -> Outcome {
    let pts = harness::random_upper_points(10, 16);
    let cancel = harness::max_cancellation_error(&pts, 100).unwrap();
    let b = real::to_f64(real::golden());
    let target = brjuno::brjuno(real::golden(), &EvalConfig::default()).unwrap().value;
    let plan = TruncationPlan::with_q_max(1000);
    let gaps: Vec<f64> = [1e-1, 1e-2, 1e-3]
        .iter()
        .map(|&y| (complex::complex_brjuno(Complex64::new(b, y), &plan).unwrap().im - target).abs())
        .collect();
    let decreasing = gaps.windows(2).all(|w| w[1] < w[0]);
    check(
        cancel.max_abs <= 1e-12 && decreasing,
        format!(
            "term cancellation {:.1e} over {} terms; |Im 𝓑(g+iy) − B(g)| = {:.3}, {:.3}, {:.3}",
            cancel.max_abs, cancel.n, gaps[0], gaps[1], gaps[2]
        ),
    )
}

fn exactness() -> Outcome {
    let mut failures = Vec::new();
    let mut count = 0usize;
    for q in 1..=500i64 {
        for p in 0..=q {
            if p.gcd(&q) != 1 {
                continue;
            }
            count += 1;
            for kind in [CfKind::Gauss, CfKind::ByExcess, CfKind::NearestInteger] {
                let e = cf::expand_rational(p, q, kind, 10_000).unwrap();
                let cv = e.convergents();
                let ok_end = e.terminated && cv.last() == Some(&(BigInt::from(p), BigInt::from(q)));
                let ok_det = cv.windows(2).all(|w| {
                    let d: BigInt = &w[1].0 * &w[0].1 - &w[0].0 * &w[1].1;
                    d.abs() == BigInt::from(1)
                });
                if !(ok_end && ok_det) {
                    failures.push(format!("{kind:?} {p}/{q}"));
                }
            }
            if p > 0 && 2 * p <= q {
                let e = cf::expand_rational(p, q, CfKind::NearestInteger, 10_000).unwrap();
                if cf::rational_depth(p, q).unwrap() != e.depth() {
                    failures.push(format!("depth {p}/{q}"));
                }
            }
        }
    }
    let farey = harness::farey_failures(500);
    failures.extend(farey.iter().map(|(p, q)| format!("farey {p}/{q}")));
    check(
        failures.is_empty(),
        format!(
            "{count} fractions in [0, 1] with q ≤ 500, {} failures {:?}",
            failures.len(),
            &failures[..failures.len().min(5)]
        ),
    )
}

fn csv_bytes(threads: usize) -> Vec<u8> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    pool.install(|| {
        let rows = harness::sample(FnName::B, &SamplePlan::new(2000, 0.0, 1.0, 42), &EvalConfig::default()).unwrap();
        let mut buf = Vec::new();
        harness::write_csv(&rows, &mut buf).unwrap();
        buf
    })
}

fn reproducibility() -> Outcome {
    let a = csv_bytes(1);
    let b = csv_bytes(1);
    let c = csv_bytes(4);
    check(a == b && a == c, format!("{} bytes; runs equal: {}, 1 vs 4 threads equal: {}", a.len(), a == b, a == c))
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("closed-form oracle agreement", closed_form_oracles),
        ("functional-equation residuals", functional_equations),
        ("closed-form identities", closed_form_identities),
        ("bounded defect, stable under doubling n", bounded_defect),
        ("jump 2/q of Δ⁻ at rationals", jump_law),
        ("Δ⁻ series against direct evaluation", dual_path),
        ("endpoint limits of f̃ and Φ", endpoint_limits),
        ("Hölder exponents of Δ±", holder_exponents),
        ("dilogarithm identities", dilog_identities),
        ("complex term cancellation and boundary trend", complex_identities),
        ("exact continued-fraction and Farey identities", exactness),
        ("deterministic sampling", reproducibility),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let res = panic::catch_unwind(f).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let el = t.elapsed();
        match res {
            Ok(d) => println!("PASS {:>2} {name}: {d} [{el:.1?}]", i + 1),
            Err(d) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {d} [{el:.1?}]", i + 1)
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
