//! End-to-end private release of a constrained Fréchet p-mean.
//!
//! Pipeline: p-mean → sensitivity bound → diffusion time for the budget →
//! diffusion sample started at the p-mean.

use serde::Serialize;

use crate::calibration::{
    bm_time_for_budget, bm_utility_bound, langevin_time_for_budget, langevin_utility_bound, RdpBudget,
};
use crate::error::{Error, Result};
use crate::frechet::{sensitivity_bound, solve_pmean, Dataset, SensitivityContext, SolverOptions};
use crate::manifold::{distance, Point};
use crate::mechanisms::{bm_sample, langevin_sample, Mechanism, MechanismConfig};
use crate::rng::RngState;

#[derive(Debug, Clone, PartialEq)]
pub enum ReleaseMechanism {
    Bm,
    /// `anchor` must not depend on the confidential data; `provenance`
    /// records where it came from and is logged verbatim.
    Langevin { lambda: f64, anchor: Point, provenance: String },
}

impl ReleaseMechanism {
    pub fn kind(&self) -> Mechanism {
        match self {
            ReleaseMechanism::Bm => Mechanism::Bm,
            ReleaseMechanism::Langevin { .. } => Mechanism::Langevin,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ReleaseRequest {
    pub dataset: Dataset,
    pub p: f64,
    pub budget: RdpBudget,
    pub mechanism: ReleaseMechanism,
    pub n_step: Option<usize>,
    pub solver: SolverOptions,
}

impl ReleaseRequest {
    pub fn new(dataset: Dataset, p: f64, budget: RdpBudget, mechanism: ReleaseMechanism) -> Self {
        Self { dataset, p, budget, mechanism, n_step: None, solver: SolverOptions::default() }
    }
}

/// Audit record of one release.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReleaseRecord {
    #[serde(serialize_with = "coords")]
    pub private_point: Point,
    /// The non-private p-mean; kept for diagnostics, never publish it.
    #[serde(skip)]
    pub pmean: Point,
    pub delta_used: f64,
    pub t_used: f64,
    pub n_step: usize,
    pub mechanism: Mechanism,
    /// Expected-distance bound for this mechanism, when one applies.
    pub utility_bound: Option<f64>,
    pub anchor_provenance: Option<String>,
    pub seed: RngState,
}

fn coords<S: serde::Serializer>(p: &Point, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(p.coords())
}

/// Calibrated diffusion time and step count for a release of sensitivity
/// `delta` under `budget`.
pub fn calibrate_release(
    mean: &Point,
    delta: f64,
    budget: &RdpBudget,
    mechanism: &ReleaseMechanism,
    n_step: Option<usize>,
) -> Result<MechanismConfig> {
    let spec = mean.spec();
    let k = spec.ric_lower_k();
    let cfg = match mechanism {
        ReleaseMechanism::Bm => MechanismConfig::brownian(bm_time_for_budget(k, budget, delta)?)?,
        ReleaseMechanism::Langevin { lambda, anchor, .. } => {
            if !spec.is_hadamard() {
                return Err(Error::UnsupportedManifold(format!(
                    "Langevin mechanism requires a Hadamard manifold, got {spec}"
                )));
            }
            if anchor.spec() != spec {
                return Err(Error::SpecMismatch(format!("anchor on {} but data on {spec}", anchor.spec())));
            }
            let t = langevin_time_for_budget(k, *lambda, budget, delta)?;
            MechanismConfig::langevin(t, *lambda, anchor.clone())?
        }
    };
    match n_step {
        Some(n) => cfg.with_steps(n),
        None => Ok(cfg),
    }
}

/// Releases a diffusion sample started at an already computed summary
/// `mean` whose sensitivity is `delta`.
pub fn release_summary(
    mean: &Point,
    delta: f64,
    budget: &RdpBudget,
    mechanism: &ReleaseMechanism,
    n_step: Option<usize>,
    seed: RngState,
) -> Result<ReleaseRecord> {
    let cfg = calibrate_release(mean, delta, budget, mechanism, n_step)?;
    let spec = mean.spec();
    let mut rng = seed.rng();
    let m = spec.dim();
    let (private_point, utility_bound, provenance) = match mechanism {
        ReleaseMechanism::Bm => {
            let y = bm_sample(mean, cfg.t, cfg.n_step, &mut rng)?;
            // √(2mt) needs Ric bounded below by a non-negative constant.
            let bound = (spec.ric_lower_k() <= 0.0).then(|| bm_utility_bound(m, cfg.t));
            (y, bound, None)
        }
        ReleaseMechanism::Langevin { lambda, anchor, provenance } => {
            let y = langevin_sample(mean, &cfg, &mut rng)?;
            let d_oa = distance(anchor, mean)?;
            let bound = langevin_utility_bound(m, spec.ric_lower_k(), *lambda, d_oa, cfg.t);
            (y, Some(bound), Some(provenance.clone()))
        }
    };
    Ok(ReleaseRecord {
        private_point,
        pmean: mean.clone(),
        delta_used: delta,
        t_used: cfg.t,
        n_step: cfg.n_step,
        mechanism: mechanism.kind(),
        utility_bound,
        anchor_provenance: provenance,
        seed,
    })
}

/// RDP release of the constrained p-mean of `req.dataset`.
pub fn private_pmean(req: &ReleaseRequest, seed: RngState) -> Result<ReleaseRecord> {
    let data = &req.dataset;
    let ctx = SensitivityContext::for_spec(data.spec(), req.p, data.radius(), data.len())?;
    let delta = sensitivity_bound(&ctx)?;
    let mean = solve_pmean(data, req.p, req.solver)?;
    release_summary(&mean, delta, &req.budget, &req.mechanism, req.n_step, seed)
}
