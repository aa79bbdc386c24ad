//! The named check suite: exact identities on random rational instances,
//! floating-point inequality sweeps, and desk-scale ergodic checks. Each
//! check produces one [`CheckRecord`].
//!
//! Trials are independent and seeded by [`trial_seed`](crate::gen::trial_seed)
//! with the check's stream number, so results do not depend on the number
//! of worker threads.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::abelian::{CharacterTable, Group, Rotation};
use crate::averages::DiscreteGrid;
use crate::dadic::{upow, DadicInterval};
use crate::dynamics::{jump_check, sup_over_subsequences, transference_check, FiniteSystem};
use crate::error::{Error, Result};
use crate::forms::{
    c_p, lambda_fast, lambda_tilde_oracle, proposition_bound_check, scalar_lemma_lhs, theta_fast,
    theta_haar_oracle, theta_prime, xi, CpBound, FormContext, ORACLE_CAP, SLACK,
};
use crate::gen;
use crate::haar::{character_product_check, phi_at_cell, phi_difference_decomposition, HaarAtom};
use crate::par;
use crate::scalar::{Cyclotomic, Mode, Scalar};
use crate::stepfn::MAX_SIDE;

/// Planted faults for negative-control runs.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Faults {
    /// Doubles the first coefficient of every telescoping decomposition.
    pub telescoping: bool,
    /// Overwrites character table entry `(1, 0)` with the rotation `1/2`.
    pub character_table: bool,
    /// Replaces digit-wise negation with the identity map.
    pub negation: bool,
}

/// Size limits. Values above the library limits are rejected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Caps {
    pub max_side: usize,
    pub oracle_summands: f64,
}

impl Default for Caps {
    fn default() -> Caps {
        Caps {
            max_side: MAX_SIDE,
            oracle_summands: ORACLE_CAP,
        }
    }
}

/// Parameters of a suite run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    /// Digit groups, each given by its cyclic factor orders.
    pub groups: Vec<Vec<usize>>,
    pub p_list: Vec<u32>,
    /// Random instances per randomized check.
    pub trials: usize,
    pub seed: u64,
    /// Restricts the run to one mode; the other mode's checks are skipped.
    pub mode: Option<Mode>,
    /// Upper limit on `N + K` for random grids.
    pub max_cells_exp: u32,
    pub max_ladder_width: usize,
    /// Lowest ladder scale.
    pub min_scale: i32,
    /// Random `(a, b)` pairs per exponent for the scalar lemma.
    pub lemma_samples: usize,
    /// Largest depth `N` of random dynamical systems.
    pub max_depth: u32,
    /// Largest number of points of random dynamical systems.
    pub max_points: usize,
    pub eps_list: Vec<f64>,
    pub caps: Caps,
    pub faults: Faults,
}

impl Default for SuiteConfig {
    fn default() -> SuiteConfig {
        SuiteConfig {
            groups: vec![vec![2]],
            p_list: vec![2],
            trials: 50,
            seed: 1,
            mode: None,
            max_cells_exp: 3,
            max_ladder_width: 3,
            min_scale: -2,
            lemma_samples: 20_000,
            max_depth: 3,
            max_points: 81,
            eps_list: vec![0.1, 0.2, 0.5],
            caps: Caps::default(),
            faults: Faults::default(),
        }
    }
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<()> {
        if self.caps.max_side > MAX_SIDE {
            return Err(Error::CapExceeded(format!(
                "max_side {} exceeds the grid limit {MAX_SIDE}",
                self.caps.max_side
            )));
        }
        if !(self.caps.oracle_summands <= ORACLE_CAP) {
            return Err(Error::CapExceeded(format!(
                "oracle_summands {} exceeds the oracle limit {ORACLE_CAP:e}",
                self.caps.oracle_summands
            )));
        }
        if self.groups.is_empty() {
            return Err(Error::InvalidGroup("no groups given".into()));
        }
        for orders in &self.groups {
            let g = Group::new(orders)?;
            if g.order() > self.caps.max_side {
                return Err(Error::CapExceeded(format!(
                    "group of order {} exceeds max_side {}",
                    g.order(),
                    self.caps.max_side
                )));
            }
        }
        if self.p_list.is_empty() || self.p_list.iter().any(|&p| p < 2) {
            return Err(Error::Exponent(format!("{:?}", self.p_list)));
        }
        if self.trials == 0
            || self.max_cells_exp == 0
            || self.max_ladder_width == 0
            || self.max_depth == 0
        {
            return Err(Error::InvalidArgument(
                "trials, max_cells_exp, max_ladder_width and max_depth must be positive".into(),
            ));
        }
        if self.min_scale > 0 {
            return Err(Error::InvalidArgument("min_scale must be at most 0".into()));
        }
        if self.eps_list.iter().any(|e| !(*e > 0.0)) {
            return Err(Error::InvalidArgument("eps values must be positive".into()));
        }
        Ok(())
    }

    fn group(&self, trial: usize) -> Result<Group> {
        let g = Group::new(&self.groups[trial % self.groups.len()])?;
        Ok(if self.faults.negation {
            g.with_broken_negation()
        } else {
            g
        })
    }

    fn p(&self, trial: usize) -> u32 {
        self.p_list[(trial / self.groups.len()) % self.p_list.len()]
    }

    fn table(&self, g: &Group) -> CharacterTable {
        let t = CharacterTable::new(g);
        if self.faults.character_table {
            t.with_corrupted_entry(1, 0, Rotation::new(1, 2))
        } else {
            t
        }
    }

    /// Largest `N + K` for group order `d`, optionally under the oracle cap.
    fn cells_exp(&self, d: usize, oracle_p: Option<u32>) -> Result<u32> {
        let e = (1..=self.max_cells_exp)
            .rev()
            .find(|&e| {
                let side_ok = (d as u64)
                    .checked_pow(e)
                    .is_some_and(|s| s <= self.caps.max_side as u64);
                let cost_ok = oracle_p.is_none_or(|p| {
                    (d as f64).powf(((p + 2) * e) as f64) <= self.caps.oracle_summands
                });
                side_ok && cost_ok
            })
            .unwrap_or(0);
        if e == 0 {
            return Err(Error::CapExceeded(format!(
                "no grid of order {d} fits the caps"
            )));
        }
        Ok(e)
    }
}

/// Outcome of one named check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub check_id: String,
    pub mode: Mode,
    pub instances: usize,
    pub failures: usize,
    /// Largest observed `lhs / rhs` for inequality checks.
    pub worst_ratio: Option<f64>,
    pub seed: u64,
    /// Seed of the first failing trial.
    pub failing_seed: Option<u64>,
    pub skipped: bool,
}

impl CheckRecord {
    pub fn passed(&self) -> bool {
        self.skipped || self.failures == 0
    }

    fn skipped(id: &str, mode: Mode, seed: u64) -> CheckRecord {
        CheckRecord {
            check_id: id.to_string(),
            mode,
            instances: 0,
            failures: 0,
            worst_ratio: None,
            seed,
            failing_seed: None,
            skipped: true,
        }
    }
}

/// Result of one trial: instance count, failures, worst ratio.
#[derive(Clone, Copy, Debug, Default)]
struct Outcome {
    instances: usize,
    failures: usize,
    ratio: Option<f64>,
}

impl Outcome {
    fn exact(ok: bool) -> Outcome {
        Outcome {
            instances: 1,
            failures: (!ok) as usize,
            ratio: None,
        }
    }
}

fn max_opt(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.max(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

fn aggregate(id: &str, mode: Mode, seed: u64, stream: u64, outcomes: Vec<Outcome>) -> CheckRecord {
    let mut rec = CheckRecord {
        check_id: id.to_string(),
        mode,
        instances: 0,
        failures: 0,
        worst_ratio: None,
        seed,
        failing_seed: None,
        skipped: false,
    };
    for (t, o) in outcomes.into_iter().enumerate() {
        rec.instances += o.instances;
        rec.failures += o.failures;
        rec.worst_ratio = max_opt(rec.worst_ratio, o.ratio);
        if o.failures > 0 && rec.failing_seed.is_none() {
            rec.failing_seed = Some(gen::trial_seed(seed, stream, t as u64));
        }
    }
    rec
}

fn run_trials(
    cfg: &SuiteConfig,
    stream: u64,
    trials: usize,
    f: impl Fn(usize, &mut ChaCha8Rng) -> Result<Outcome> + Sync + Send,
) -> Result<Vec<Outcome>> {
    par::map_range(trials, |t| {
        let mut rng = gen::rng_from(gen::trial_seed(cfg.seed, stream, t as u64));
        f(t, &mut rng)
    })
    .into_iter()
    .collect()
}

/// Ids of the exact identity checks, in report order.
pub const EXACT_CHECKS: [&str; 7] = [
    "lambda_substitution",
    "theta_dual_telescoping",
    "summation_by_parts",
    "telescoping",
    "dual_telescoping",
    "character_property",
    "transference",
];

/// Ids of the floating-point checks, in report order.
pub const FLOAT_CHECKS: [&str; 18] = [
    "scalar_lemma",
    "pointwise_lemma",
    "telescoped_chain",
    "average_holder",
    "cauchy_schwarz",
    "lambda_abs_dominates",
    "cauchy_schwarz_abs",
    "theta_bound_f",
    "theta_bound_g",
    "summation_by_parts",
    "theta_prime_nonneg",
    "jensen",
    "xi_nonneg",
    "xi_holder",
    "proposition_bound",
    "theorem",
    "jumps",
    "cp_certificate",
];

/// Runs every check and returns one record per check id and mode.
pub fn run_suite(cfg: &SuiteConfig) -> Result<Vec<CheckRecord>> {
    cfg.validate()?;
    let mut out = Vec::new();
    let run_exact = cfg.mode != Some(Mode::Float);
    let run_float = cfg.mode != Some(Mode::Exact);
    for (i, id) in EXACT_CHECKS.iter().enumerate() {
        if !run_exact {
            out.push(CheckRecord::skipped(id, Mode::Exact, cfg.seed));
            continue;
        }
        let stream = i as u64;
        let outcomes = match *id {
            "lambda_substitution" => {
                run_trials(cfg, stream, cfg.trials, |t, rng| lambda_trial(cfg, t, rng))?
            }
            "theta_dual_telescoping" => run_trials(cfg, stream, cfg.trials, |t, rng| {
                theta_trial(cfg, t, rng, true)
            })?,
            "summation_by_parts" => run_trials(cfg, stream, cfg.trials, |t, rng| {
                theta_trial(cfg, t, rng, false)
            })?,
            "telescoping" => run_trials(cfg, stream, cfg.trials, |t, rng| {
                telescoping_trial(cfg, t, rng)
            })?,
            "dual_telescoping" => run_trials(cfg, stream, cfg.trials, |t, rng| {
                dual_telescoping_trial(cfg, t, rng)
            })?,
            "character_property" => run_trials(cfg, stream, cfg.groups.len(), |t, _| {
                character_trial(cfg, t)
            })?,
            "transference" => run_trials(cfg, stream, cfg.trials, |t, rng| {
                transference_trial(cfg, t, rng)
            })?,
            _ => unreachable!(),
        };
        out.push(aggregate(id, Mode::Exact, cfg.seed, stream, outcomes));
    }
    if !run_float {
        out.extend(
            FLOAT_CHECKS
                .iter()
                .map(|id| CheckRecord::skipped(id, Mode::Float, cfg.seed)),
        );
        return Ok(out);
    }
    let cps: BTreeMap<u32, CpBound> = cfg
        .p_list
        .iter()
        .map(|&p| c_p(p).map(|c| (p, c)))
        .collect::<Result<_>>()?;
    let base = EXACT_CHECKS.len() as u64;

    // c_p certificate: the certified bound never exceeds the sampled minimum
    let cert: Vec<Outcome> = cps
        .values()
        .map(|c| Outcome {
            instances: 1,
            failures: (!(c.lower > 0.0 && c.lower <= c.upper)) as usize,
            ratio: Some(c.lower / c.upper),
        })
        .collect();

    let lemma = run_trials(cfg, base, cfg.p_list.len(), |t, rng| {
        lemma_trial(cfg.lemma_samples, &cps[&cfg.p_list[t]], rng)
    })?;

    let props: Vec<Vec<(String, Outcome)>> = par::map_range(cfg.trials, |t| {
        let mut rng = gen::rng_from(gen::trial_seed(cfg.seed, base + 1, t as u64));
        proposition_trial(cfg, t, &cps, &mut rng)
    })
    .into_iter()
    .collect::<Result<_>>()?;

    let theorem = run_trials(cfg, base + 2, cfg.trials, |t, rng| {
        theorem_trial(cfg, t, &cps, rng).map(|(a, _)| a)
    })?;
    let jumps = run_trials(cfg, base + 2, cfg.trials, |t, rng| {
        theorem_trial(cfg, t, &cps, rng).map(|(_, b)| b)
    })?;

    for id in FLOAT_CHECKS {
        let rec = match id {
            "scalar_lemma" => aggregate(id, Mode::Float, cfg.seed, base, lemma.clone()),
            "theorem" => aggregate(id, Mode::Float, cfg.seed, base + 2, theorem.clone()),
            "jumps" => aggregate(id, Mode::Float, cfg.seed, base + 2, jumps.clone()),
            "cp_certificate" => aggregate(id, Mode::Float, cfg.seed, u64::MAX, cert.clone()),
            link => {
                let outcomes: Vec<Outcome> = props
                    .iter()
                    .map(|links| {
                        links
                            .iter()
                            .find(|(n, _)| n == link)
                            .map_or(Outcome::default(), |(_, o)| *o)
                    })
                    .collect();
                aggregate(link, Mode::Float, cfg.seed, base + 1, outcomes)
            }
        };
        out.push(rec);
    }
    Ok(out)
}

fn exact_shape(cfg: &SuiteConfig, d: usize, p: u32, rng: &mut ChaCha8Rng) -> Result<(u32, u32)> {
    Ok(gen::shape(rng, cfg.cells_exp(d, Some(p))?))
}

fn lambda_trial(cfg: &SuiteConfig, t: usize, rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let g = cfg.group(t)?;
    let p = cfg.p(t);
    let (res, sup) = exact_shape(cfg, g.order(), p, rng)?;
    let ladder = gen::ladder(rng, cfg.min_scale, res as i32, cfg.max_ladder_width);
    let complex = rng.gen_bool(0.5);
    let f = gen::exact_fn(&g, res, sup, rng, complex)?;
    let h = gen::exact_fn(&g, res, sup, rng, complex)?;
    let ctx = FormContext::with_table(p, ladder, cfg.table(&g), f, h)?;
    Ok(Outcome::exact(
        lambda_fast(&ctx)? == lambda_tilde_oracle(&ctx)?,
    ))
}

fn theta_trial(cfg: &SuiteConfig, t: usize, rng: &mut ChaCha8Rng, oracle: bool) -> Result<Outcome> {
    let g = cfg.group(t)?;
    let p = cfg.p(t);
    let (res, sup) = exact_shape(cfg, g.order(), p, rng)?;
    let ladder = gen::ladder(rng, cfg.min_scale, res as i32, cfg.max_ladder_width);
    let ft = gen::exact_fn(&g, res, sup, rng, false)?.tilde_f();
    let fast = theta_fast(&ft, p, &ladder)?;
    let ok = if oracle {
        theta_haar_oracle(&ft, &cfg.table(&g), p, &ladder)? == fast
    } else {
        let tp = theta_prime(&ft, p, &ladder)?;
        fast + tp == xi(&ft, p, ladder.last())? - xi(&ft, p, ladder.first())?
    };
    Ok(Outcome::exact(ok))
}

/// Random `lo < hi` and a resolution for the telescoping checks, such that
/// the window of `d^(max(-lo, 0) + res)` cells stays within `budget`.
fn random_scales(
    cfg: &SuiteConfig,
    d: usize,
    budget: u64,
    rng: &mut ChaCha8Rng,
) -> (i32, i32, i32, u64) {
    let lo = rng.gen_range(cfg.min_scale..=1);
    let hi = if rng.gen_bool(0.5) {
        lo + 1
    } else {
        rng.gen_range(lo + 1..=2)
    };
    let res = hi.max(0) + 1;
    let window = upow(d, (-lo).max(0) as u32 + res as u32);
    if window <= budget {
        (lo, hi, res, window)
    } else {
        (-1, 0, 0, d as u64)
    }
}

fn telescoping_trial(cfg: &SuiteConfig, t: usize, rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let g = cfg.group(t)?;
    let d = g.order();
    let table = cfg.table(&g);
    let (lo, hi, res, window) = random_scales(cfg, d, 1 << 14, rng);
    let mut terms: Vec<(Cyclotomic, HaarAtom)> = phi_difference_decomposition(d, lo, hi)?
        .into_iter()
        .map(|term| (term.coefficient(d), term.atom()))
        .collect();
    if cfg.faults.telescoping {
        terms[0].0 = terms[0].0.add_ref(&terms[0].0);
    }
    let mut ok = true;
    for cell in 0..window {
        let lhs = crate::haar::eval_terms_at_cell(&terms, &table, cell, res)?;
        let rhs = phi_at_cell::<Cyclotomic>(hi, cell, res, d)?
            - phi_at_cell::<Cyclotomic>(lo, cell, res, d)?;
        if lhs != rhs {
            ok = false;
            break;
        }
    }
    Ok(Outcome::exact(ok))
}

/// `(phi_hi - phi_lo)(y1 (-) y2) = sum_r d^r sum_s sum_J h_J^s(y1) conj(h_J^s(y2))`.
fn dual_telescoping_trial(cfg: &SuiteConfig, t: usize, rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let g = cfg.group(t)?;
    let d = g.order();
    let table = cfg.table(&g);
    let (lo, hi, res, window) = random_scales(cfg, d, 1 << 8, rng);
    let mut coeff: Vec<(i32, usize, Cyclotomic)> = phi_difference_decomposition(d, lo, hi)?
        .into_iter()
        .map(|term| (term.r, term.s, term.coefficient::<Cyclotomic>(d)))
        .collect();
    if cfg.faults.telescoping {
        coeff[0].2 = coeff[0].2.add_ref(&coeff[0].2);
    }
    for y1 in 0..window {
        for y2 in 0..window {
            let diff = g.oplus_int(y1, g.ominus_int(y2));
            let lhs = phi_at_cell::<Cyclotomic>(hi, diff, res, d)?
                - phi_at_cell::<Cyclotomic>(lo, diff, res, d)?;
            let mut rhs = Cyclotomic::zero();
            for (r, s, c) in &coeff {
                let j = DadicInterval::containing_cell(y1, res, *r, d);
                let a: Cyclotomic = HaarAtom::new(j, *s).value_at_cell(&table, y1, res)?;
                let b: Cyclotomic = HaarAtom::new(j, *s).value_at_cell(&table, y2, res)?;
                rhs = rhs + c.mul_ref(&a).mul_ref(&b.conj());
            }
            if lhs != rhs {
                return Ok(Outcome::exact(false));
            }
        }
    }
    Ok(Outcome::exact(true))
}

/// Exhaustive over resolutions `1..=3`, intervals of scale `0..res` inside
/// `[0, 1)`, characters and cells.
fn character_trial(cfg: &SuiteConfig, t: usize) -> Result<Outcome> {
    let g = cfg.group(t)?;
    let d = g.order();
    let table = cfg.table(&g);
    let mut out = Outcome::default();
    for res in 1..=3i32 {
        if upow(d, res as u32) > 64 {
            break;
        }
        for r in 0..res {
            let n = upow(d, r as u32);
            for i in 0..n {
                for j in 0..n {
                    let (ii, jj) = (DadicInterval::new(r, i), DadicInterval::new(r, j));
                    for s in 0..d {
                        for x in ii.cells(res, d)? {
                            for y in jj.cells(res, d)? {
                                out.instances += 1;
                                if !character_product_check(&table, ii, jj, s, x, y, res)? {
                                    out.failures += 1;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

fn transference_trial(cfg: &SuiteConfig, t: usize, rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let g = cfg.group(t)?;
    let d = g.order();
    let max_depth = (1..=2u32)
        .rev()
        .find(|&n| upow(d, n) <= cfg.caps.max_side as u64)
        .unwrap_or(1);
    let depth = rng.gen_range(1..=max_depth);
    let complex = rng.gen_bool(0.5);
    let mut rnd = || DiscreteGrid::from_fn(&g, depth, |_, _| gen::exact_value(rng, complex));
    let (fp, gp) = (rnd()?, rnd()?);
    let mut out = Outcome::default();
    for n in 0..=depth {
        out.instances += 1;
        if !transference_check(&fp, &gp, n)? {
            out.failures += 1;
        }
    }
    Ok(out)
}

fn lemma_trial(samples: usize, cp: &CpBound, rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let p = cp.p as f64;
    let mut out = Outcome {
        instances: samples,
        failures: 0,
        ratio: Some(0.0),
    };
    for i in 0..samples {
        let (a, b) = match i % 3 {
            0 => (rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0)),
            1 => {
                // near the minimizer of theta, where the lemma is tight
                let b: f64 = rng.gen_range(-5.0..5.0);
                let t = cp.argmin * (1.0 + rng.gen_range(-0.05..0.05));
                (b * (1.0 + t), b)
            }
            _ => {
                let scale = 10f64.powi(rng.gen_range(-6..=6));
                (
                    scale * rng.gen_range(-1.0..1.0),
                    scale * rng.gen_range(-1.0..1.0),
                )
            }
        };
        let lhs = scalar_lemma_lhs(a, b, p);
        let rhs = cp.lower * (a - b).abs().powf(p);
        let slack = SLACK * (a.abs().powf(p) + b.abs().powf(p));
        if lhs < rhs - slack {
            out.failures += 1;
        }
        if lhs > 0.0 {
            out.ratio = max_opt(out.ratio, Some(rhs / lhs));
        }
    }
    Ok(out)
}

fn proposition_trial(
    cfg: &SuiteConfig,
    t: usize,
    cps: &BTreeMap<u32, CpBound>,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<(String, Outcome)>> {
    let g = cfg.group(t)?;
    let p = cfg.p(t);
    let (res, sup) = gen::shape(rng, cfg.cells_exp(g.order(), None)?);
    let ladder = gen::ladder(rng, cfg.min_scale, res as i32, cfg.max_ladder_width);
    let f = gen::float_fn(&g, res, sup, rng)?;
    let h = gen::float_fn(&g, res, sup, rng)?;
    let ctx = FormContext::with_table(p, ladder, cfg.table(&g), f, h)?;
    let rep = proposition_bound_check(&ctx, &cps[&p])?;
    Ok(rep
        .links
        .iter()
        .map(|l| {
            let ratio = if l.name == "proposition_bound" {
                rep.variation.ratio
            } else if l.rhs > 0.0 {
                Some(l.lhs / l.rhs)
            } else {
                None
            };
            (
                l.name.clone(),
                Outcome {
                    instances: 1,
                    failures: (!l.pass) as usize,
                    ratio,
                },
            )
        })
        .collect())
}

/// A random translation system with at most `max_points` points.
pub fn random_system(
    g: &Group,
    max_depth: u32,
    max_points: usize,
    rng: &mut ChaCha8Rng,
) -> Result<FiniteSystem> {
    let d = g.order();
    let depth = rng.gen_range(1..=max_depth);
    let copies = (1..=4usize)
        .filter(|&r| {
            d.checked_pow(r as u32)
                .is_some_and(|n| n <= max_points.max(d))
        })
        .collect::<Vec<_>>();
    let r = *copies.choose(rng).unwrap_or(&1);
    let b = Group::new(&g.orders().repeat(r))?;
    let exp = b.exponent();
    let m = g.orders().len();
    let mut images = || -> Vec<usize> {
        (0..depth as usize * m)
            .map(|gi| {
                let ord = g.orders()[gi % m];
                let base = rng.gen_range(0..b.order());
                (0..exp / ord).fold(0, |acc, _| b.add_raw(acc, base))
            })
            .collect()
    };
    let (sigma, tau) = (images(), images());
    FiniteSystem::translation(g, depth, &b, &sigma, &tau)
}

fn theorem_trial(
    cfg: &SuiteConfig,
    t: usize,
    cps: &BTreeMap<u32, CpBound>,
    rng: &mut ChaCha8Rng,
) -> Result<(Outcome, Outcome)> {
    let g = Group::new(&cfg.groups[t % cfg.groups.len()])?;
    let cp = &cps[&cfg.p(t)];
    let sys = random_system(&g, cfg.max_depth, cfg.max_points, rng)?;
    let f: Vec<Complex64> = gen::float_values(sys.len(), rng);
    let h: Vec<Complex64> = gen::float_values(sys.len(), rng);
    let (_, rep) = sup_over_subsequences(&sys, &f, &h, cp)?;
    let ratio = rep.ratio.unwrap_or(f64::INFINITY);
    let theorem = Outcome {
        instances: 1,
        failures: (ratio > 1.0 + SLACK) as usize,
        ratio: Some(ratio),
    };
    let mut jumps = Outcome {
        instances: 0,
        failures: 0,
        ratio: Some(0.0),
    };
    for &eps in &cfg.eps_list {
        let (count, bound) = jump_check(&sys, &f, &h, cp, eps)?;
        jumps.instances += 1;
        if count as f64 > bound {
            jumps.failures += 1;
        }
        jumps.ratio = max_opt(jumps.ratio, Some(count as f64 / bound));
    }
    Ok((theorem, jumps))
}

/// Whether every record passed.
pub fn all_passed(records: &[CheckRecord]) -> bool {
    records.iter().all(CheckRecord::passed)
}
