use std::fmt::Write as _;

use cantorvar::averages::variation_sum;
use cantorvar::dadic::upow;
use cantorvar::dynamics::{jump_check, FiniteSystem};
use cantorvar::forms::{c_p, CpBound, FormContext};
use cantorvar::gen::{exact_fn, float_fn, float_values, rng_from, trial_seed};
use cantorvar::verify::{all_passed, run_suite, CheckRecord, SuiteConfig};
use cantorvar::{par, Cyclotomic, Error, Group, Mode, Scalar, StepFn2};
use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;

use crate::config::{CpConfig, FunctionSpec, JumpsConfig, VariationConfig};
use crate::CliError;

/// Seed streams, one per randomized subcommand.
const STREAM_VARIATION: u64 = 101;
const STREAM_JUMPS: u64 = 102;

/// Largest `|X| d^N` accepted by the jumps sweep.
const JUMPS_WORK_CAP: u64 = 10_000_000;

pub struct Output {
    pub text: String,
    pub passed: bool,
}

pub fn verify(cfg: &SuiteConfig) -> Result<Output, CliError> {
    let records = run_suite(cfg)?;
    let mut text = String::new();
    for r in &records {
        text.push_str(&serde_json::to_string(r).map_err(|e| CliError::Other(e.to_string()))?);
        text.push('\n');
    }
    let failed: Vec<&CheckRecord> = records.iter().filter(|r| !r.passed()).collect();
    for r in &failed {
        eprintln!(
            "check {} ({}) failed {} of {} instances, first failing seed {:?}",
            r.check_id, r.mode, r.failures, r.instances, r.failing_seed
        );
    }
    Ok(Output {
        text,
        passed: all_passed(&records),
    })
}

fn csv_text(header: &[&str], rows: Vec<Vec<String>>) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Other(e.to_string());
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(&row).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Other(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Other(e.to_string()))
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:?}")).unwrap_or_default()
}

fn joined<T: std::fmt::Debug>(xs: &[T]) -> String {
    let mut s = String::new();
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        let _ = write!(s, "{x:?}");
    }
    s
}

fn function<S: Scalar>(
    spec: &FunctionSpec,
    g: &Group,
    cfg: &VariationConfig,
    rng: &mut ChaCha8Rng,
    random: &impl Fn(&mut ChaCha8Rng) -> Result<StepFn2<S>, Error>,
) -> Result<StepFn2<S>, CliError> {
    match spec {
        FunctionSpec::Named(n) if n == "random" => Ok(random(rng)?),
        FunctionSpec::Named(n) if n == "unit_square" => {
            Ok(StepFn2::unit_indicator(g, cfg.resolution, cfg.support)?)
        }
        FunctionSpec::Named(n) => Err(CliError::Config(format!(
            "unknown function {n:?}, expected \"random\", \"unit_square\" or a step function object"
        ))),
        FunctionSpec::Grid(v) => {
            let f = StepFn2::<S>::from_json(v)?;
            if f.group().orders() != g.orders()
                || f.resolution() != cfg.resolution
                || f.support() != cfg.support
            {
                return Err(CliError::Config(
                    "inline step function does not match the group, K and N of the variation section".into(),
                ));
            }
            Ok(f)
        }
    }
}

fn variation_rows<S: Scalar>(
    cfg: &VariationConfig,
    seed: u64,
    random: impl Fn(&Group, &mut ChaCha8Rng) -> Result<StepFn2<S>, Error> + Sync,
) -> Result<Vec<Vec<String>>, CliError> {
    let g = Group::new(&cfg.group)?;
    let cp = c_p(cfg.p)?;
    let trials = if cfg.f.is_random() || cfg.g.is_random() {
        cfg.trials
    } else {
        1
    };
    let draw = |rng: &mut ChaCha8Rng| random(&g, rng);
    let rows = par::map_range(trials, |t| -> Result<Vec<String>, CliError> {
        let s = trial_seed(seed, STREAM_VARIATION, t as u64);
        let mut rng = rng_from(s);
        let f = function(&cfg.f, &g, cfg, &mut rng, &draw)?;
        let gf = function(&cfg.g, &g, cfg, &mut rng, &draw)?;
        let ctx = FormContext::new(cfg.p, cfg.ladder.clone(), f, gf)?;
        let report = variation_report(&ctx, &cp)?;
        Ok(vec![
            t.to_string(),
            s.to_string(),
            g.order().to_string(),
            cfg.resolution.to_string(),
            cfg.support.to_string(),
            cfg.p.to_string(),
            joined(cfg.ladder.ks()),
            format!("{:?}", report.variation_sum),
            opt(report.bound),
            opt(report.ratio),
            joined(&report.jump_norms),
        ])
    });
    rows.into_iter().collect()
}

fn variation_report<S: Scalar>(
    ctx: &FormContext<S>,
    cp: &CpBound,
) -> Result<cantorvar::averages::VariationReport, CliError> {
    let pf = ctx.p as f64;
    let avgs = ctx.ladder_averages()?;
    let report = variation_sum(&avgs, pf)?;
    let nf = ctx.f.lp_norm_p_f64(2.0 * pf);
    let ng = ctx.g.lp_norm_p_f64(2.0 * pf);
    Ok(report.with_bound(cp.big_c() * (nf * ng).sqrt()))
}

pub const VARIATION_HEADER: [&str; 11] = [
    "trial",
    "seed",
    "d",
    "K",
    "N",
    "p",
    "ladder",
    "variation_sum",
    "bound",
    "ratio",
    "jump_norms",
];

pub fn variation(cfg: &VariationConfig, seed: u64, mode: Mode) -> Result<Output, CliError> {
    let rows = match mode {
        Mode::Exact => variation_rows::<Cyclotomic>(cfg, seed, |g, rng| {
            exact_fn(g, cfg.resolution, cfg.support, rng, false)
        })?,
        Mode::Float => variation_rows::<Complex64>(cfg, seed, |g, rng| {
            float_fn(g, cfg.resolution, cfg.support, rng)
        })?,
    };
    Ok(Output {
        text: csv_text(&VARIATION_HEADER, rows)?,
        passed: true,
    })
}

pub const JUMPS_HEADER: [&str; 5] = ["trial", "seed", "eps", "count", "bound"];

fn fixed_values(
    v: &Option<Vec<f64>>,
    sys: &FiniteSystem,
    name: &str,
) -> Result<Option<Vec<Complex64>>, CliError> {
    match v {
        None => Ok(None),
        Some(v) if v.len() == sys.len() => {
            Ok(Some(v.iter().map(|&x| Complex64::new(x, 0.0)).collect()))
        }
        Some(v) => Err(CliError::Config(format!(
            "jumps.{name} has {} values but the system has {} points",
            v.len(),
            sys.len()
        ))),
    }
}

pub fn jumps(cfg: &JumpsConfig, seed: u64) -> Result<Output, CliError> {
    if cfg.eps.iter().any(|&e| !(e > 0.0)) {
        return Err(CliError::Config("every eps must be positive".into()));
    }
    let sys = cfg.system.build()?;
    let work = (sys.len() as u64).saturating_mul(upow(sys.group().order(), sys.depth()));
    if work > JUMPS_WORK_CAP {
        return Err(
            Error::CapExceeded(format!("|X| d^N = {work} exceeds {JUMPS_WORK_CAP}")).into(),
        );
    }
    let cp = c_p(cfg.p)?;
    let f_fixed = fixed_values(&cfg.f, &sys, "f")?;
    let g_fixed = fixed_values(&cfg.g, &sys, "g")?;
    let trials = if f_fixed.is_some() && g_fixed.is_some() {
        1
    } else {
        cfg.trials
    };
    let per_trial = par::map_range(trials, |t| -> Result<Vec<Vec<String>>, CliError> {
        let s = trial_seed(seed, STREAM_JUMPS, t as u64);
        let mut rng = rng_from(s);
        let f = f_fixed
            .clone()
            .unwrap_or_else(|| float_values(sys.len(), &mut rng));
        let g = g_fixed
            .clone()
            .unwrap_or_else(|| float_values(sys.len(), &mut rng));
        cfg.eps
            .iter()
            .map(|&eps| {
                let (count, bound) = jump_check(&sys, &f, &g, &cp, eps)?;
                Ok(vec![
                    t.to_string(),
                    s.to_string(),
                    format!("{eps:?}"),
                    count.to_string(),
                    format!("{bound:?}"),
                ])
            })
            .collect()
    });
    let mut rows = Vec::new();
    for r in per_trial {
        rows.extend(r?);
    }
    Ok(Output {
        text: csv_text(&JUMPS_HEADER, rows)?,
        passed: true,
    })
}

pub const CP_HEADER: [&str; 3] = ["p", "c_p", "C_p"];

pub fn cp(cfg: &CpConfig) -> Result<Output, CliError> {
    let bounds = par::map_slice(&cfg.p_list, |&p| c_p(p));
    let mut rows = Vec::new();
    for b in bounds {
        let b = b?;
        rows.push(vec![
            b.p.to_string(),
            format!("{:?}", b.lower),
            format!("{:?}", b.big_c()),
        ]);
    }
    Ok(Output {
        text: csv_text(&CP_HEADER, rows)?,
        passed: true,
    })
}
