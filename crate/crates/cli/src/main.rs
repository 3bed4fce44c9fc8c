mod config;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use brjuno_core::complex::{self, TruncationPlan};
use brjuno_core::delta::{self, DeltaFn, HolderPlan, PairSampling, DEFAULT_OFFSETS};
use brjuno_core::harness::{self, Suite, VerifyOptions};
use brjuno_core::{cf, Error, EvalConfig, FnName, Real, SamplePlan};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

use config::Config;

#[derive(Parser)]
#[command(name = "brjuno", version, about = "Brjuno-type functions from the command line")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Common {
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Number of samples.
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Maximum continued-fraction depth.
    #[arg(long, global = true)]
    depth: Option<usize>,
    /// Tail tolerance for evaluation; assertion tolerance for `verify`.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true)]
    qmax: Option<i64>,
    /// Write output here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// key=value file mirroring the flags; flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        <Format as ValueEnum>::from_str(s, true)
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate one function at one point.
    Eval { function: String, x: f64 },
    /// Evaluate a function on a seeded random sample.
    Sample {
        function: String,
        #[arg(long)]
        lo: Option<f64>,
        #[arg(long)]
        hi: Option<f64>,
    },
    /// Run a verification suite.
    Verify {
        #[arg(value_parser = ["theorem1", "functional_eqs", "jumps", "qlog", "complex_identity"])]
        suite: String,
    },
    /// Left and right limits of Δ⁻ at p/q.
    Jump { p: i64, q: i64 },
    /// Hölder exponent estimate for delta_plus or delta_minus.
    Holder {
        #[arg(value_parser = ["delta_plus", "delta_minus"])]
        function: String,
        #[arg(long)]
        lo: Option<f64>,
        #[arg(long)]
        hi: Option<f64>,
        #[arg(long)]
        pairs: Option<usize>,
        /// Place pairs across rationals with denominator up to this.
        #[arg(long)]
        straddle: Option<i64>,
        #[arg(long, default_value_t = 5)]
        from: i32,
        #[arg(long, default_value_t = 20)]
        to: i32,
    },
    /// Truncated complex Brjuno, Wilton or semi sum at z (e.g. 0.618+0.01i).
    Complex {
        #[arg(value_parser = ["B", "W", "semi"])]
        which: String,
        #[arg(allow_hyphen_values = true)]
        z: String,
    },
    /// Farey parents of p/q, or every reduced fraction in [0, 1) up to --qmax.
    Farey { fraction: Option<String> },
}

enum Failure {
    Hard(serde_json::Value),
    Domain(String, serde_json::Value),
    Diverged,
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::RationalInput { p, q } => Failure::Domain(
                e.to_string(),
                json!({"error": "rational_input", "p": p, "q": q, "message": e.to_string()}),
            ),
            Error::Io(m) => Failure::Io(m),
            e => Failure::Domain(e.to_string(), json!({"error": "domain", "message": e.to_string()})),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

fn usage(msg: String) -> Failure {
    Failure::Domain(msg.clone(), json!({"error": "usage", "message": msg}))
}

/// Flags merged with the config file.
struct Opts {
    seed: u64,
    n: Option<usize>,
    depth: Option<usize>,
    tol: Option<f64>,
    qmax: Option<i64>,
    out: Option<PathBuf>,
    format: Format,
    lo: Option<f64>,
    hi: Option<f64>,
    pairs: Option<usize>,
}

impl Opts {
    fn eval_config(&self) -> Result<EvalConfig, Failure> {
        let mut c = EvalConfig::default();
        if let Some(d) = self.depth {
            c.max_depth = d;
        }
        if let Some(t) = self.tol {
            c.tail_tol = t;
        }
        c.validate()?;
        Ok(c)
    }

    fn sink(&self) -> Result<Box<dyn Write>, Failure> {
        Ok(match &self.out {
            Some(p) => {
                Box::new(BufWriter::new(File::create(p).map_err(|e| Failure::Io(format!("{}: {e}", p.display())))?))
            }
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }

    fn emit<T: Serialize>(&self, v: &T) -> Result<(), Failure> {
        let mut w = self.sink()?;
        serde_json::to_writer(&mut w, v).map_err(|e| Failure::Io(e.to_string()))?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }
}

fn merge(c: &Common, lo: Option<f64>, hi: Option<f64>, pairs: Option<usize>) -> Result<Opts, Failure> {
    let file = match &c.config {
        Some(p) => Config::load(p).map_err(usage)?,
        None => Config::default(),
    };
    Ok(Opts {
        seed: file.pick("seed", c.seed).map_err(usage)?.unwrap_or(42),
        n: file.pick("n", c.n).map_err(usage)?,
        depth: file.pick("depth", c.depth).map_err(usage)?,
        tol: file.pick("tol", c.tol).map_err(usage)?,
        qmax: file.pick("qmax", c.qmax).map_err(usage)?,
        out: file.pick("out", c.out.clone()).map_err(usage)?,
        format: file.pick("format", c.format).map_err(usage)?.unwrap_or(Format::Json),
        lo: file.pick("lo", lo).map_err(usage)?,
        hi: file.pick("hi", hi).map_err(usage)?,
        pairs: file.pick("pairs", pairs).map_err(usage)?,
    })
}

fn parse_name(s: &str) -> Result<FnName, Failure> {
    s.parse::<FnName>().map_err(|e| {
        let names: Vec<&str> = FnName::ALL.iter().map(|f| f.as_str()).collect();
        usage(format!("{e}; expected one of {}", names.join(", ")))
    })
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.cmd {
        Cmd::Eval { function, x } => {
            let o = merge(&cli.common, None, None, None)?;
            let f = parse_name(&function)?;
            let r = f.eval(Real::from(x), &o.eval_config()?)?;
            o.emit(&r)?;
            if !r.converged {
                return Err(Failure::Diverged);
            }
            Ok(())
        }
        Cmd::Sample { function, lo, hi } => {
            let o = merge(&cli.common, lo, hi, None)?;
            let f = parse_name(&function)?;
            let half = matches!(f, FnName::Phi | FnName::F);
            let mut plan = SamplePlan::new(
                o.n.unwrap_or(10_000),
                o.lo.unwrap_or(0.0),
                o.hi.unwrap_or(if half { 0.5 } else { 1.0 }),
                o.seed,
            );
            if let Some(q) = o.qmax {
                plan.exclusion_q = q;
            }
            let rows = harness::sample(f, &plan, &o.eval_config()?)?;
            match o.format {
                Format::Csv => {
                    let w = o.sink()?;
                    harness::write_csv(&rows, w)?;
                }
                Format::Json => {
                    let recs: Vec<serde_json::Value> = rows
                        .iter()
                        .map(|r| match &r.result {
                            Ok(v) => json!({"x": r.x, "value": v.value, "depth_used": v.depth_used,
                                            "tail_bound": v.tail_bound, "converged": v.converged}),
                            Err(e) => json!({"x": r.x, "value": null, "converged": false, "reason": e.to_string()}),
                        })
                        .collect();
                    o.emit(&recs)?;
                }
            }
            Ok(())
        }
        Cmd::Verify { suite } => {
            let o = merge(&cli.common, None, None, None)?;
            let s: Suite = suite.parse()?;
            let d = VerifyOptions::default();
            let opts = VerifyOptions {
                n: o.n.unwrap_or(d.n),
                seed: o.seed,
                q_max: o.qmax.unwrap_or(d.q_max),
                tol: o.tol,
                eval: {
                    let mut c = EvalConfig::default();
                    if let Some(depth) = o.depth {
                        c.max_depth = depth;
                    }
                    c
                },
            };
            let out = harness::verify(s, &opts)?;
            let report = json!({"suite": suite, "passed": out.passed(), "hard_failures": out.hard_failures, "records": out.records});
            o.emit(&report)?;
            if out.passed() {
                Ok(())
            } else {
                Err(Failure::Hard(json!(out.hard_failures)))
            }
        }
        Cmd::Jump { p, q } => {
            let o = merge(&cli.common, None, None, None)?;
            o.emit(&delta::jump_at(p, q, &DEFAULT_OFFSETS)?)
        }
        Cmd::Holder { function, lo, hi, pairs, straddle, from, to } => {
            let o = merge(&cli.common, lo, hi, pairs)?;
            let which = if function == "delta_plus" { DeltaFn::Plus } else { DeltaFn::Minus };
            let mut plan = HolderPlan::uniform(o.lo.unwrap_or(0.05), o.hi.unwrap_or(0.45), o.seed);
            if let Some(n) = o.pairs {
                plan.pairs = n;
            }
            if let Some(q_max) = straddle {
                plan.sampling = PairSampling::StraddleRationals { q_max };
            }
            if from > to {
                return Err(usage(format!("--from {from} exceeds --to {to}")));
            }
            let r = delta::holder_estimate(which, &plan, &delta::dyadic_scales(from, to), &o.eval_config()?)?;
            o.emit(&r)
        }
        Cmd::Complex { which, z } => {
            let o = merge(&cli.common, None, None, None)?;
            let z: Complex64 =
                z.trim().parse().map_err(|_| usage(format!("cannot parse {z:?} as a complex number")))?;
            let plan = TruncationPlan::with_q_max(o.qmax.unwrap_or(TruncationPlan::default().q_max));
            let s = complex::complex_sums(z, &plan)?;
            let v = match which.as_str() {
                "B" => s.brjuno,
                "W" => s.wilton,
                _ => s.semi,
            };
            o.emit(&json!({"re": v.re, "im": v.im, "terms_used": s.terms}))
        }
        Cmd::Farey { fraction } => {
            let o = merge(&cli.common, None, None, None)?;
            match fraction {
                Some(f) => {
                    let (p, q) = f
                        .split_once('/')
                        .and_then(|(a, b)| Some((a.trim().parse::<i64>().ok()?, b.trim().parse::<i64>().ok()?)))
                        .ok_or_else(|| usage(format!("expected p/q, got {f:?}")))?;
                    o.emit(&cf::farey_parents(p, q)?)
                }
                None => {
                    let plan = TruncationPlan { q_max: o.qmax.unwrap_or(10), window: 0.5, q_min_keep: i64::MAX };
                    let fr = complex::enumerate_fractions(&plan, 0.5)?;
                    match o.format {
                        Format::Json => o.emit(&fr),
                        Format::Csv => {
                            let mut w = o.sink()?;
                            writeln!(w, "p,q,p1,q1,p2,q2")?;
                            for t in &fr {
                                writeln!(w, "{},{},{},{},{},{}", t.p, t.q, t.p1, t.q1, t.p2, t.q2)?;
                            }
                            w.flush()?;
                            Ok(())
                        }
                    }
                }
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Hard(cases)) => {
            eprintln!("hard assertion failed: {cases}");
            ExitCode::from(1)
        }
        Err(Failure::Io(m)) => {
            eprintln!("{}", json!({"error": "io", "message": m}));
            ExitCode::from(1)
        }
        Err(Failure::Domain(m, rec)) => {
            println!("{rec}");
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Diverged) => {
            eprintln!("error: series did not reach the tail tolerance");
            ExitCode::from(3)
        }
    }
}
