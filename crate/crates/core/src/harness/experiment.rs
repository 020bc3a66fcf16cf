//! Mechanism comparison over an `(n, mechanism, ε)` grid.
//!
//! Seeds: the dataset and its p-mean for trial `k` at sample size index `i`
//! come from `seed ⊕ hash(DATA | i, k)` and are shared by every mechanism
//! and budget, so cells are compared on common random numbers. Mechanism
//! noise for cell `c` uses `seed ⊕ hash(c, k)`. Nothing depends on the
//! worker count.

use serde::Serialize;

use crate::calibration::{ewg_rate, rdp_to_dp_budget, rl_rate, RdpBudget};
use crate::error::{Error, Result};
use crate::frechet::{sensitivity_bound, solve_pmean, Dataset, SensitivityContext, SolverOptions};
use crate::manifold::{distance, uniform_ball_sample, uniform_ball_samples, Point};
use crate::mechanisms::{ewg_sample, rl_sample, Mechanism};
use crate::parallel::{map_indexed, Parallelism};
use crate::release::{calibrate_release, release_summary, ReleaseMechanism};
use crate::rng::{derive_seed, RngState};

use super::config::{ExperimentConfig, Scenario};

const DATA_TAG: u64 = 0xD47A << 32;
const ANCHOR_TAG: u64 = 0xA7C4 << 32;

/// One trial outcome, or the error that aborted its cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRow {
    pub mechanism: Mechanism,
    pub manifold: String,
    pub scenario: Scenario,
    pub n: usize,
    pub p: f64,
    pub alpha: f64,
    pub epsilon: f64,
    pub trial: usize,
    /// `d(μ̂, μ̃)`; meaningless when `error` is set.
    pub distance: f64,
    pub seed: u64,
    /// Error code of an aborted cell.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateRow {
    pub mechanism: Mechanism,
    pub manifold: String,
    pub scenario: Scenario,
    pub n: usize,
    pub p: f64,
    pub alpha: f64,
    pub epsilon: f64,
    pub mean_distance: f64,
    pub stderr: f64,
    pub trials: usize,
    pub error: Option<String>,
}

impl AggregateRow {
    pub fn is_error(&self) -> bool {
        self.error.is_some()
    }
}

/// Calibration actually used for a cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellInfo {
    pub mechanism: Mechanism,
    pub n: usize,
    pub epsilon: f64,
    pub delta: f64,
    /// Diffusion time (BM, Langevin).
    pub t: Option<f64>,
    /// Noise rate (RL, EWG).
    pub sigma: Option<f64>,
    pub n_step: Option<usize>,
    /// `ok` or an error code.
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentOutput {
    pub rows: Vec<TrialRow>,
    pub aggregates: Vec<AggregateRow>,
    pub cells: Vec<CellInfo>,
}

/// `(mean, stderr)` with the sample standard deviation; stderr is NaN
/// below two values.
pub fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let k = xs.len();
    if k == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / k as f64;
    if k < 2 {
        return (mean, f64::NAN);
    }
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, (ss / (k - 1) as f64).sqrt() / (k as f64).sqrt())
}

/// Per-trial inputs shared by every cell at one sample size.
struct Prepared {
    mean: Point,
    anchor: Point,
}

fn prepare_trials(cfg: &ExperimentConfig, ni: usize, n: usize, par: Parallelism) -> Vec<Result<Prepared>> {
    let solver = SolverOptions::default();
    let make_mean = |k: usize| -> Result<Point> {
        let mut rng = RngState::new(derive_seed(cfg.master_seed, DATA_TAG | ni as u64, k as u64), 0).rng();
        let pts = uniform_ball_samples(&cfg.center, cfg.r, n, &mut rng)?;
        solve_pmean(&Dataset::new(pts, cfg.center.clone(), cfg.r)?, cfg.p, solver)
    };
    let make_anchor = |k: usize| -> Result<Point> {
        match cfg.scenario {
            Scenario::AnchorAtCenter => Ok(cfg.center.clone()),
            Scenario::AnchorRandomInBall => {
                let s = derive_seed(cfg.master_seed, ANCHOR_TAG | ni as u64, k as u64);
                uniform_ball_sample(&cfg.center, cfg.r, &mut RngState::new(s, 0).rng())
            }
        }
    };
    let shared = (!cfg.resample_dataset).then(|| make_mean(0));
    map_indexed(cfg.trials, par, |k| {
        let mean = match &shared {
            Some(Ok(m)) => m.clone(),
            Some(Err(e)) => return Err(clone_error(e)),
            None => make_mean(k)?,
        };
        Ok(Prepared { mean, anchor: make_anchor(k)? })
    })
}

/// Errors are not `Clone` (they may wrap I/O errors); cell bookkeeping only
/// needs the code and message.
fn clone_error(e: &Error) -> Error {
    match e {
        Error::Convergence { iterations, grad_norm } => {
            Error::Convergence { iterations: *iterations, grad_norm: *grad_norm }
        }
        other => Error::Domain(format!("{}: {other}", other.code())),
    }
}

/// How a cell turns a p-mean into a release.
enum CellPlan {
    Diffusion { t: f64, n_step: usize },
    Rate(f64),
}

fn plan_cell(cfg: &ExperimentConfig, mech: Mechanism, delta: f64, budget: &RdpBudget) -> Result<CellPlan> {
    let spec = &cfg.manifold;
    match mech {
        Mechanism::Bm => {
            let c = calibrate_release(&cfg.center, delta, budget, &ReleaseMechanism::Bm, cfg.n_step)?;
            Ok(CellPlan::Diffusion { t: c.t, n_step: c.n_step })
        }
        Mechanism::Langevin => {
            let m = ReleaseMechanism::Langevin { lambda: cfg.lambda, anchor: cfg.center.clone(), provenance: String::new() };
            let c = calibrate_release(&cfg.center, delta, budget, &m, cfg.n_step)?;
            Ok(CellPlan::Diffusion { t: c.t, n_step: c.n_step })
        }
        Mechanism::Rl => {
            let sigma = rl_rate(delta, rdp_to_dp_budget(budget), true);
            // surface non-normalizable rates once per cell
            crate::manifold::radial::RadialLaw::laplace(spec.kind(), spec.dim(), sigma)?;
            Ok(CellPlan::Rate(sigma))
        }
        Mechanism::Ewg => Ok(CellPlan::Rate(ewg_rate(delta, budget))),
    }
}

fn release_one(
    cfg: &ExperimentConfig,
    mech: Mechanism,
    delta: f64,
    budget: &RdpBudget,
    prep: &Prepared,
    seed: u64,
) -> Result<f64> {
    let state = RngState::new(seed, 0);
    let y = match mech {
        Mechanism::Bm => release_summary(&prep.mean, delta, budget, &ReleaseMechanism::Bm, cfg.n_step, state)?.private_point,
        Mechanism::Langevin => {
            let m = ReleaseMechanism::Langevin {
                lambda: cfg.lambda,
                anchor: prep.anchor.clone(),
                provenance: format!("scenario {}", cfg.scenario),
            };
            release_summary(&prep.mean, delta, budget, &m, cfg.n_step, state)?.private_point
        }
        Mechanism::Rl => {
            let sigma = rl_rate(delta, rdp_to_dp_budget(budget), true);
            rl_sample(&prep.mean, sigma, &mut state.rng())?
        }
        Mechanism::Ewg => ewg_sample(&prep.anchor, &prep.mean, ewg_rate(delta, budget), &mut state.rng())?,
    };
    distance(&prep.mean, &y)
}

/// Runs every `(n, mechanism, ε)` cell for `cfg.trials` trials.
///
/// A failing trial aborts its cell, which is then reported as a single
/// error row carrying the error code.
pub fn run_experiment(cfg: &ExperimentConfig, par: Parallelism) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let label = cfg.manifold.label();
    let (n_mech, n_eps) = (cfg.mechanisms.len(), cfg.epsilon_list.len());
    let mut out = ExperimentOutput { rows: Vec::new(), aggregates: Vec::new(), cells: Vec::new() };

    for (ni, &n) in cfg.n_list.iter().enumerate() {
        let delta = SensitivityContext::for_spec(&cfg.manifold, cfg.p, cfg.r, n).and_then(|c| sensitivity_bound(&c));
        let prepared = match &delta {
            Ok(_) => prepare_trials(cfg, ni, n, par),
            Err(_) => Vec::new(),
        };
        for (mi, &mech) in cfg.mechanisms.iter().enumerate() {
            for (ei, &eps) in cfg.epsilon_list.iter().enumerate() {
                let cell = (ni * n_mech + mi) * n_eps + ei;
                let row = |trial: usize, distance: f64, seed: u64, error: Option<String>| TrialRow {
                    mechanism: mech,
                    manifold: label.clone(),
                    scenario: cfg.scenario,
                    n,
                    p: cfg.p,
                    alpha: cfg.alpha,
                    epsilon: eps,
                    trial,
                    distance,
                    seed,
                    error,
                };
                let budget = RdpBudget::new(cfg.alpha, eps)?;
                let mut info = CellInfo {
                    mechanism: mech,
                    n,
                    epsilon: eps,
                    delta: f64::NAN,
                    t: None,
                    sigma: None,
                    n_step: None,
                    status: "ok".into(),
                };
                let outcome: Result<Vec<f64>> = (|| {
                    let delta = *delta.as_ref().map_err(clone_error)?;
                    info.delta = delta;
                    match plan_cell(cfg, mech, delta, &budget)? {
                        CellPlan::Diffusion { t, n_step } => {
                            info.t = Some(t);
                            info.n_step = Some(n_step);
                        }
                        CellPlan::Rate(s) => info.sigma = Some(s),
                    }
                    let dists = map_indexed(cfg.trials, par, |k| {
                        let prep = prepared[k].as_ref().map_err(clone_error)?;
                        release_one(cfg, mech, delta, &budget, prep, derive_seed(cfg.master_seed, cell as u64, k as u64))
                    });
                    dists.into_iter().collect()
                })();
                match outcome {
                    Ok(dists) => {
                        let (mean, se) = mean_and_stderr(&dists);
                        for (k, d) in dists.iter().enumerate() {
                            out.rows.push(row(k, *d, derive_seed(cfg.master_seed, cell as u64, k as u64), None));
                        }
                        out.aggregates.push(AggregateRow {
                            mechanism: mech,
                            manifold: label.clone(),
                            scenario: cfg.scenario,
                            n,
                            p: cfg.p,
                            alpha: cfg.alpha,
                            epsilon: eps,
                            mean_distance: mean,
                            stderr: se,
                            trials: dists.len(),
                            error: None,
                        });
                    }
                    Err(e) => {
                        let code = e.code().to_string();
                        info.status = code.clone();
                        out.rows.push(row(0, f64::NAN, derive_seed(cfg.master_seed, cell as u64, 0), Some(code.clone())));
                        out.aggregates.push(AggregateRow {
                            mechanism: mech,
                            manifold: label.clone(),
                            scenario: cfg.scenario,
                            n,
                            p: cfg.p,
                            alpha: cfg.alpha,
                            epsilon: eps,
                            mean_distance: f64::NAN,
                            stderr: f64::NAN,
                            trials: 0,
                            error: Some(code),
                        });
                    }
                }
                out.cells.push(info);
            }
        }
    }
    Ok(out)
}
