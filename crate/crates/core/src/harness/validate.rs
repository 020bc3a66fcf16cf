//! Property suites run by `manifold-dp validate`. Failures are report
//! entries, never errors.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::Serialize;

use crate::calibration::{
    bm_epsilon, bm_time_for_budget, dp_to_rdp, langevin_epsilon, langevin_time_for_budget, rdp_to_dp_budget,
    renyi_divergence_sphere, RdpBudget, SphereGrid,
};
use crate::error::{Error, Result};
use crate::frechet::{
    frechet_gradient, frechet_objective, sensitivity_bound, solve_pmean, strong_convexity_k, Dataset,
    SensitivityContext, SolverOptions,
};
use crate::manifold::heat_kernel::ZonalHeatKernel;
use crate::manifold::{
    distance, exp_map, log_map, tangent_gaussian, uniform_ball_sample, uniform_ball_samples, ManifoldSpec, Point,
};
use crate::mechanisms::bm_sample;
use crate::parallel::{map_indexed, monte_carlo, Parallelism};
use crate::quadrature::GaussLegendre;
use crate::rng::{derive_seed, RngState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Calibration,
    Geometry,
    KernelOracle,
    Sensitivity,
    DivergenceBound,
}

impl Suite {
    pub const ALL: [Suite; 5] =
        [Suite::Calibration, Suite::Geometry, Suite::KernelOracle, Suite::Sensitivity, Suite::DivergenceBound];

    pub fn label(&self) -> &'static str {
        match self {
            Suite::Calibration => "calibration",
            Suite::Geometry => "geometry",
            Suite::KernelOracle => "kernel-oracle",
            Suite::Sensitivity => "sensitivity",
            Suite::DivergenceBound => "divergence-bound",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.label() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| Error::Config(format!("unknown validation suite `{s}`")))
    }
}

/// `observed ≤ threshold` unless stated otherwise in `property`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub property: String,
    pub observed: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl Check {
    pub fn at_most(property: impl Into<String>, observed: f64, threshold: f64) -> Self {
        Self { property: property.into(), observed, threshold, passed: observed <= threshold }
    }

    pub fn at_least(property: impl Into<String>, observed: f64, threshold: f64) -> Self {
        Self { property: property.into(), observed, threshold, passed: observed >= threshold }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub suite: Suite,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl Report {
    fn new(suite: Suite, checks: Vec<Check>) -> Self {
        Self { suite, passed: checks.iter().all(|c| c.passed), checks }
    }
}

pub fn validate(suite: Suite, seed: u64, par: Parallelism) -> Report {
    let checks = match suite {
        Suite::Calibration => calibration_checks(),
        Suite::Geometry => geometry_checks(seed),
        Suite::KernelOracle => kernel_oracle_checks(seed, par),
        Suite::Sensitivity => sensitivity_checks(seed, par, 1000, 10_000),
        Suite::DivergenceBound => divergence_checks(),
    };
    Report::new(suite, checks)
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs()
    }
}

/// Round trips and limits of the closed-form calibrations over a
/// 10×5×5×4 grid of `(K, α, Δ, ε)`.
pub fn calibration_checks() -> Vec<Check> {
    let ks = [-1.0, -0.5, -0.1, -1e-3, 0.0, 1e-3, 0.1, 0.5, 1.0, 2.0];
    let alphas = [1.5, 2.0, 5.0, 10.0, 32.0];
    let deltas = [0.01, 0.1, 0.5, 1.0, 2.0];
    let epss = [0.01, 0.1, 1.0, 10.0];
    let (mut bm_err, mut lv_err, mut floor_miss, mut tuples) = (0.0f64, 0.0f64, 0usize, 0usize);
    for &k in &ks {
        for &a in &alphas {
            for &d in &deltas {
                for &e in &epss {
                    tuples += 1;
                    let b = RdpBudget::new(a, e).expect("grid budgets are valid");
                    match bm_time_for_budget(k, &b, d) {
                        Ok(t) => bm_err = bm_err.max(rel(bm_epsilon(k, a, d, t), e)),
                        Err(Error::InfeasibleBudget { .. }) if k > 0.0 && 2.0 * e <= k * a * d * d => {}
                        Err(_) => floor_miss += 1,
                    }
                    for gap in [0.1, 1.0] {
                        let lambda = k.max(0.0) + gap;
                        match langevin_time_for_budget(k, lambda, &b, d)
                            .and_then(|t| langevin_epsilon(k, lambda, a, d, t))
                        {
                            Ok(back) => lv_err = lv_err.max(rel(back, e)),
                            Err(_) => floor_miss += 1,
                        }
                    }
                }
            }
        }
    }
    let mut cont = 0.0f64;
    let mut limit = 0.0f64;
    let mut mono_violations = 0usize;
    for &a in &alphas {
        for &d in &deltas {
            for t in [0.05, 0.5, 3.0] {
                for k in [1e-8, -1e-8] {
                    cont = cont.max(rel(bm_epsilon(k, a, d, t), a * d * d / (4.0 * t)));
                }
            }
            for &e in &epss {
                let b = RdpBudget::new(a, e).unwrap();
                let t = langevin_time_for_budget(1.0, 1.0 + 1e-12, &b, d).unwrap();
                limit = limit.max(rel(t, a * d * d / (4.0 * e)));
            }
        }
    }
    for k in [-1.0, 0.0, 1.0] {
        let grid: Vec<f64> = (1..=100).map(|i| 0.02 * i as f64).collect();
        mono_violations += grid
            .windows(2)
            .filter(|w| bm_epsilon(k, 2.0, 0.5, w[1]) >= bm_epsilon(k, 2.0, 0.5, w[0]))
            .count();
    }
    let (mut rdp_bound, mut rdp_round) = (0usize, 0.0f64);
    for &a in &alphas {
        for star in [1e-4, 0.01, 0.3, 1.0, 5.0, 50.0, 800.0] {
            let v = dp_to_rdp(star, a);
            if !(v > 0.0 && v <= star) {
                rdp_bound += 1;
            }
            if let Ok(b) = RdpBudget::new(a, v) {
                rdp_round = rdp_round.max((dp_to_rdp(rdp_to_dp_budget(&b), a) - v).abs());
            }
        }
    }
    vec![
        Check::at_least("calibration grid size", tuples as f64, 1000.0),
        Check::at_most("BM eps->t->eps max relative error", bm_err, 1e-12),
        Check::at_most("Langevin eps->t->eps max relative error", lv_err, 1e-12),
        Check::at_most("unexpected calibration errors", floor_miss as f64, 0.0),
        Check::at_most("K->0 continuity, relative gap to alpha*Delta^2/(4t) at |K|=1e-8", cont, 1e-6),
        Check::at_most("Langevin lambda->K+ limit, relative gap to alpha*Delta^2/(4 eps)", limit, 1e-6),
        Check::at_most("bm_epsilon monotonicity violations", mono_violations as f64, 0.0),
        Check::at_most("dp_to_rdp outside (0, eps*]", rdp_bound as f64, 0.0),
        Check::at_most("dp_to_rdp inverse round trip error", rdp_round, 1e-10),
    ]
}

fn geometry_specs() -> [(ManifoldSpec, f64); 4] {
    [
        (ManifoldSpec::euclidean(3), 2.0),
        (ManifoldSpec::sphere(2), 1.2),
        (ManifoldSpec::sphere(3), 1.2),
        (ManifoldSpec::hyperboloid(2), 3.0),
    ]
}

/// Exp/log inverses, metric axioms and gradient consistency on random
/// points.
pub fn geometry_checks(seed: u64) -> Vec<Check> {
    let mut out = Vec::new();
    for (si, (spec, r)) in geometry_specs().into_iter().enumerate() {
        let mut rng = RngState::new(seed, si as u64).rng();
        let o = spec.origin();
        let (mut round, mut sym, mut tri, mut len) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        let mut invariant = 0usize;
        for _ in 0..2000 {
            let pts = uniform_ball_samples(&o, r, 3, &mut rng).expect("radius is valid");
            let (x, y, z) = (&pts[0], &pts[1], &pts[2]);
            let v = log_map(x, y).expect("inside injectivity radius");
            let back = exp_map(x, &v).unwrap();
            round = round.max(distance(&back, y).unwrap());
            let dxy = distance(x, y).unwrap();
            len = len.max((v.norm() - dxy).abs());
            sym = sym.max((dxy - distance(y, x).unwrap()).abs());
            tri = tri.max(dxy - distance(x, z).unwrap() - distance(z, y).unwrap());
            if Point::new(spec, back.coords().to_vec()).is_err() {
                invariant += 1;
            }
        }
        let data = Dataset::new(uniform_ball_samples(&o, r / 2.0, 12, &mut rng).unwrap(), o.clone(), r / 2.0).unwrap();
        let mut fd = 0.0f64;
        for p in [1.5, 2.0, 3.0] {
            for _ in 0..20 {
                let y = uniform_ball_sample(&o, r / 2.0, &mut rng).unwrap();
                let v = tangent_gaussian(&y, &mut rng);
                let v = v.scaled(1.0 / v.norm());
                let h = 1e-6;
                let f = |s: f64| frechet_objective(&data, &exp_map(&y, &v.scaled(s)).unwrap(), p).unwrap();
                let g = frechet_gradient(&data, &y, p).unwrap();
                fd = fd.max((g.inner(&v) - (f(h) - f(-h)) / (2.0 * h)).abs());
            }
        }
        let l = spec.label();
        out.push(Check::at_most(format!("{l}: exp(log) round trip"), round, 1e-9));
        out.push(Check::at_most(format!("{l}: |log| vs distance"), len, 1e-9));
        out.push(Check::at_most(format!("{l}: distance symmetry"), sym, 1e-12));
        out.push(Check::at_most(format!("{l}: triangle inequality excess"), tri, 1e-9));
        out.push(Check::at_most(format!("{l}: outputs violating constraints"), invariant as f64, 0.0));
        out.push(Check::at_most(format!("{l}: gradient vs finite difference"), fd, 1e-5));
    }
    out
}

/// Two-sided Kolmogorov–Smirnov statistic of `samples` against `cdf`.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &mut [f64], cdf: F) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples.iter().enumerate().fold(0.0f64, |acc, (i, &x)| {
        let c = cdf(x);
        acc.max((c - i as f64 / n).abs()).max(((i + 1) as f64 / n - c).abs())
    })
}

/// Geodesic random walk on `S²` against the spectral heat kernel.
pub fn kernel_oracle_checks(seed: u64, par: Parallelism) -> Vec<Check> {
    let s2 = ManifoldSpec::sphere(2);
    let x = s2.origin();
    let (t, order) = (0.2, 60);
    let kernel = ZonalHeatKernel::new(t, order).expect("valid kernel");
    let rule = GaussLegendre::new(200);
    let mass = 2.0 * PI * rule.integrate(-1.0, 1.0, |c| kernel.eval(c));
    let mut radii = monte_carlo(100_000, seed, par, |rng| {
        let y = bm_sample(&x, t, 200, rng).expect("valid walk");
        distance(&x, &y).unwrap()
    });
    let ks = ks_statistic(&mut radii, |th| kernel.radial_cdf(th));
    vec![
        Check::at_most("heat kernel mass error (t=0.2, L=60)", (mass - 1.0).abs(), 1e-6),
        Check::at_most("BM radial KS vs spectral kernel (t=0.2, 200 steps, 1e5 draws)", ks, 0.02),
    ]
}

/// Largest `d(μ(D), μ(D′)) − Δ` over random adjacent pairs, together with `Δ`.
pub fn adjacent_pair_excess(
    spec: ManifoldSpec,
    p: f64,
    r: f64,
    n: usize,
    trials: usize,
    seed: u64,
    par: Parallelism,
) -> Result<(f64, f64)> {
    let ctx = SensitivityContext::for_spec(&spec, p, r, n)?;
    let bound = sensitivity_bound(&ctx)?;
    let o = spec.origin();
    let gaps = map_indexed(trials, par, |k| -> Result<f64> {
        let mut rng = RngState::new(seed, k as u64).rng();
        let data = Dataset::new(uniform_ball_samples(&o, r, n, &mut rng)?, o.clone(), r)?;
        let i = rng.random_range(0..n);
        let other = data.replaced(i, uniform_ball_sample(&o, r, &mut rng)?)?;
        let a = solve_pmean(&data, p, SolverOptions::default())?;
        let b = solve_pmean(&other, p, SolverOptions::default())?;
        distance(&a, &b)
    });
    let mut worst = f64::NEG_INFINITY;
    for g in gaps {
        worst = worst.max(g? - bound);
    }
    Ok((worst, bound))
}

/// Smallest slack of the strong-convexity inequality
/// `F(γ_s) ≤ (1−s)F(x) + sF(z) − (k/2)s(1−s)d²(x,z)` over random triples.
pub fn strong_convexity_slack(spec: ManifoldSpec, p: f64, r: f64, samples: usize, seed: u64) -> Result<f64> {
    let k = strong_convexity_k(spec.sec_upper(), r, p)?;
    let o = spec.origin();
    let mut rng = RngState::new(seed, 0).rng();
    let mut worst = f64::INFINITY;
    for _ in 0..samples {
        let data = Dataset::new(uniform_ball_samples(&o, r, 5, &mut rng)?, o.clone(), r)?;
        let x = uniform_ball_sample(&o, r, &mut rng)?;
        let z = uniform_ball_sample(&o, r, &mut rng)?;
        let s: f64 = rng.random();
        let g = exp_map(&x, &log_map(&x, &z)?.scaled(s))?;
        let d = distance(&x, &z)?;
        let rhs = (1.0 - s) * frechet_objective(&data, &x, p)? + s * frechet_objective(&data, &z, p)?
            - 0.5 * k * s * (1.0 - s) * d * d;
        worst = worst.min(rhs - frechet_objective(&data, &g, p)?);
    }
    Ok(worst)
}

/// Smallest slack of the p-uniform convexity inequality
/// `d(z,γ_s)^p ≤ (1−s)d(z,x)^p + s·d(z,y)^p − (k_p/2)s(1−s)d(x,y)^p`
/// with `k_p = 8/2^p`.
pub fn nsk_slack(spec: ManifoldSpec, p: f64, r: f64, samples: usize, seed: u64) -> Result<f64> {
    let k_p = 8.0 / 2f64.powf(p);
    let o = spec.origin();
    let mut rng = RngState::new(seed, 0).rng();
    let mut worst = f64::INFINITY;
    for _ in 0..samples {
        let pts = uniform_ball_samples(&o, r, 3, &mut rng)?;
        let (x, y, z) = (&pts[0], &pts[1], &pts[2]);
        let s: f64 = rng.random();
        let g = exp_map(x, &log_map(x, y)?.scaled(s))?;
        let rhs = (1.0 - s) * distance(z, x)?.powf(p) + s * distance(z, y)?.powf(p)
            - 0.5 * k_p * s * (1.0 - s) * distance(x, y)?.powf(p);
        worst = worst.min(rhs - distance(z, &g)?.powf(p));
    }
    Ok(worst)
}

/// Sample-size used for the adjacent-pair trials.
pub const SENSITIVITY_N: usize = 10;

pub fn sensitivity_checks(seed: u64, par: Parallelism, trials: usize, witnesses: usize) -> Vec<Check> {
    let s2 = ManifoldSpec::sphere(2);
    let h2 = ManifoldSpec::hyperboloid(2);
    let mut settings = vec![(s2, 1.5, PI / 5.0), (s2, 2.0, PI / 5.0)];
    for p in [1.5, 2.0, 3.0] {
        for r in [1.0, 3.0] {
            settings.push((h2, p, r));
        }
    }
    let mut out = Vec::new();
    for (i, (spec, p, r)) in settings.into_iter().enumerate() {
        let name = format!("{spec} p={p} r={r:.4} n={SENSITIVITY_N}: max d(mu,mu') - bound over {trials} pairs");
        match adjacent_pair_excess(spec, p, r, SENSITIVITY_N, trials, derive_seed(seed, 1, i as u64), par) {
            Ok((excess, _)) => out.push(Check::at_most(name, excess, 1e-6)),
            Err(e) => out.push(Check { property: format!("{name} ({e})"), observed: f64::NAN, threshold: 1e-6, passed: false }),
        }
    }
    let witness = |name: String, v: Result<f64>| match v {
        Ok(v) => Check::at_least(name, v, -1e-9),
        Err(e) => Check { property: format!("{name} ({e})"), observed: f64::NAN, threshold: -1e-9, passed: false },
    };
    for (i, (spec, p, r)) in [(s2, 1.5, PI / 5.0), (s2, 2.0, PI / 5.0), (h2, 1.5, 3.0), (h2, 2.0, 3.0)]
        .into_iter()
        .enumerate()
    {
        out.push(witness(
            format!("{spec} p={p}: strong-convexity slack over {witnesses} triples"),
            strong_convexity_slack(spec, p, r, witnesses, derive_seed(seed, 2, i as u64)),
        ));
    }
    out.push(witness(
        format!("hyperboloid2 p=3: uniform-convexity slack (k=1) over {witnesses} triples"),
        nsk_slack(h2, 3.0, 3.0, witnesses, derive_seed(seed, 3, 0)),
    ));
    out
}

/// Quadrature divergence against the closed-form bound on a 5×5 `(d, t)`
/// grid at `α = 2`.
pub fn divergence_checks() -> Vec<Check> {
    let s2 = ManifoldSpec::sphere(2);
    let x = s2.origin();
    let mut worst = f64::NEG_INFINITY;
    let mut failures = 0usize;
    for d in [0.05f64, 0.1, 0.2, 0.3, 0.4] {
        let y = Point::projected(s2, vec![d.sin(), 0.0, d.cos()]).expect("valid point");
        for t in [0.2, 0.5, 1.0, 1.5, 2.0] {
            match renyi_divergence_sphere(&x, &y, t, 2.0, 60, SphereGrid::default()) {
                Ok(v) => worst = worst.max(v / bm_epsilon(-1.0, 2.0, d, t)),
                Err(_) => failures += 1,
            }
        }
    }
    vec![
        Check::at_most("quadrature failures", failures as f64, 0.0),
        Check::at_most("max D_2 / bound over (d, t) grid", worst, 1.0),
    ]
}
