//! Constrained Fréchet p-means on geodesic balls and their sensitivity.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::manifold::{clamp_to_ball, distance, kernels, ManifoldSpec, Point, TangentVector};

/// Slack on ball-membership and radius conditions.
const RADIUS_SLACK: f64 = 1e-9;

/// Gradient terms closer than this to a data point are dropped.
const COINCIDENT: f64 = 1e-12;

/// `n ≥ 1` points inside the closed ball `B(o, r)`.
#[derive(Debug, Clone)]
pub struct Dataset {
    points: Vec<Point>,
    center: Point,
    radius: f64,
}

impl Dataset {
    pub fn new(points: Vec<Point>, center: Point, radius: f64) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Domain("dataset must contain at least one point".into()));
        }
        if !(radius > 0.0) {
            return Err(Error::Domain(format!("ball radius must be positive, got {radius}")));
        }
        for (i, x) in points.iter().enumerate() {
            let d = distance(&center, x)?;
            if d > radius + RADIUS_SLACK {
                return Err(Error::Domain(format!("point {i} lies at distance {d} outside B(o, {radius})")));
            }
        }
        Ok(Self { points, center, radius })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn center(&self) -> &Point {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn spec(&self) -> &ManifoldSpec {
        self.center.spec()
    }

    /// Same dataset with point `i` swapped for `x` (an adjacent dataset).
    pub fn replaced(&self, i: usize, x: Point) -> Result<Self> {
        let mut points = self.points.clone();
        points[i] = x;
        Self::new(points, self.center.clone(), self.radius)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    /// Any curvature, `p ∈ (1, 2]`, small ball.
    GeneralSmallBall,
    /// Complete, simply connected, non-positively curved.
    Hadamard,
    /// Positive sectional upper bound, `p ≥ 2`.
    CompactPositive,
}

/// Inputs to the sensitivity bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SensitivityContext {
    pub p: f64,
    pub r: f64,
    pub n: usize,
    /// Sectional curvature upper bound κ.
    pub kappa: f64,
    /// Injectivity radius (may be infinite).
    pub inj: f64,
    pub regime: Regime,
}

impl SensitivityContext {
    /// Context for a ball of radius `r` on `spec`, with the regime read off
    /// the curvature and `p`.
    pub fn for_spec(spec: &ManifoldSpec, p: f64, r: f64, n: usize) -> Result<Self> {
        let kappa = spec.sec_upper();
        let regime = if spec.is_hadamard() {
            Regime::Hadamard
        } else if kappa > 0.0 && p >= 2.0 {
            Regime::CompactPositive
        } else {
            Regime::GeneralSmallBall
        };
        let ctx = Self { p, r, n, kappa, inj: spec.inj_radius(), regime };
        ctx.validate()?;
        Ok(ctx)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 1.0) || !self.p.is_finite() {
            return Err(Error::Domain(format!("exponent p must exceed 1, got {}", self.p)));
        }
        if !(self.r > 0.0) {
            return Err(Error::Domain(format!("ball radius must be positive, got {}", self.r)));
        }
        if self.n == 0 {
            return Err(Error::Domain("sample size must be at least 1".into()));
        }
        Ok(())
    }
}

/// `F_D(y) = (1/(np)) Σ d(y, x_i)^p`.
pub fn frechet_objective(data: &Dataset, y: &Point, p: f64) -> Result<f64> {
    let kind = y.spec().kind();
    let mut sum = 0.0;
    for x in &data.points {
        if x.spec() != y.spec() {
            return Err(Error::SpecMismatch(format!("{} vs {}", x.spec(), y.spec())));
        }
        sum += kernels::distance(kind, y.coords(), x.coords()).powf(p);
    }
    Ok(sum / (data.len() as f64 * p))
}

/// Riemannian gradient `−(1/n) Σ d(y,x_i)^{p−2} Log_y(x_i)`.
pub fn frechet_gradient(data: &Dataset, y: &Point, p: f64) -> Result<TangentVector> {
    let kind = y.spec().kind();
    let mut grad = vec![0.0; y.coords().len()];
    let mut log = vec![0.0; grad.len()];
    for x in &data.points {
        if x.spec() != y.spec() {
            return Err(Error::SpecMismatch(format!("{} vs {}", x.spec(), y.spec())));
        }
        let d = kernels::distance(kind, y.coords(), x.coords());
        if d < COINCIDENT {
            continue;
        }
        kernels::log(kind, y.coords(), x.coords(), &mut log)?;
        let w = d.powf(p - 2.0);
        for (g, l) in grad.iter_mut().zip(&log) {
            *g -= w * l;
        }
    }
    let n = data.len() as f64;
    grad.iter_mut().for_each(|g| *g /= n);
    Ok(TangentVector::from_raw(y.clone(), grad))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: 1e-9, max_iter: 10_000 }
    }
}

/// Constrained p-mean by projected Riemannian gradient descent from the
/// ball centre, halving the step until it achieves sufficient decrease.
/// The step size carries over between iterations and never grows.
pub fn solve_pmean(data: &Dataset, p: f64, opts: SolverOptions) -> Result<Point> {
    if !(p > 1.0) {
        return Err(Error::Domain(format!("exponent p must exceed 1, got {p}")));
    }
    let o = &data.center;
    let r = data.radius;
    let mut y = o.clone();
    let mut f = frechet_objective(data, &y, p)?;
    let mut g = frechet_gradient(data, &y, p)?;
    let mut eta = 1.0;
    for _ in 0..opts.max_iter {
        let gn = g.norm();
        if gn <= opts.tol {
            return Ok(y);
        }
        loop {
            let step = g.scaled(-eta);
            let cand = clamp_to_ball(o, &crate::manifold::exp_map(&y, &step)?, r)?;
            let f_new = frechet_objective(data, &cand, p)?;
            // Sufficient decrease F_new ≤ F − ½η‖g‖² (what a step η ≤ 1/L
            // guarantees), up to rounding so the final steps are not starved.
            // Plain non-increase lets oscillating iterates crawl.
            if f_new <= f - 0.5 * eta * gn * gn + 8.0 * f64::EPSILON * f.abs() {
                y = cand;
                f = f_new;
                break;
            }
            eta *= 0.5;
            if eta < 1e-30 {
                return Err(Error::Convergence { iterations: opts.max_iter, grad_norm: gn });
            }
        }
        g = frechet_gradient(data, &y, p)?;
    }
    let gn = g.norm();
    if gn <= opts.tol {
        return Ok(y);
    }
    Err(Error::Convergence { iterations: opts.max_iter, grad_norm: gn })
}

/// Comparison function `b_c(l) = √c·l·cot(√c·l)` for `c > 0`, else 1.
pub fn b_func(c: f64, l: f64) -> Result<f64> {
    if c <= 0.0 {
        return Ok(1.0);
    }
    let x = c.sqrt() * l;
    if x >= PI {
        return Err(Error::Domain(format!("b_c(l) needs l < π/√c, got √c·l = {x}")));
    }
    if x.abs() < 1e-6 {
        return Ok(1.0 - x * x / 3.0);
    }
    Ok(x / x.tan())
}

/// `π/(k√κ)`, infinite when `κ ≤ 0`.
fn curvature_scale(kappa: f64, k: f64) -> f64 {
    if kappa > 0.0 {
        PI / (k * kappa.sqrt())
    } else {
        f64::INFINITY
    }
}

/// Largest radius on which the constrained p-mean is unique.
pub fn admissible_radius(kappa: f64, p: f64, inj: f64) -> f64 {
    let scale = if p < 2.0 { curvature_scale(kappa, 2.0) } else { curvature_scale(kappa, 1.0) };
    0.5 * inj.min(scale)
}

/// Strong-convexity constant `(2r)^{p−2} min{p−1, b_κ(2r)}` of `F_D` on
/// `B(o, r)`, `p ∈ (1, 2]`.
pub fn strong_convexity_k(kappa: f64, r: f64, p: f64) -> Result<f64> {
    if !(p > 1.0 && p <= 2.0) {
        return Err(Error::Domain(format!("strong convexity constant needs p in (1, 2], got {p}")));
    }
    if !(r > 0.0) || r > 0.5 * curvature_scale(kappa, 2.0) + RADIUS_SLACK {
        return Err(Error::Domain(format!("radius {r} exceeds π/(4√κ) for κ = {kappa}")));
    }
    let b = b_func(kappa, 2.0 * r)?;
    Ok((2.0 * r).powf(p - 2.0) * (p - 1.0).min(b))
}

fn small_ball_ok(ctx: &SensitivityContext) -> bool {
    ctx.r <= 0.5 * ctx.inj.min(curvature_scale(ctx.kappa, 2.0)) + RADIUS_SLACK
}

fn compact_ok(ctx: &SensitivityContext) -> bool {
    ctx.kappa > 0.0 && ctx.p >= 2.0 && ctx.r <= curvature_scale(ctx.kappa, 4.0) + RADIUS_SLACK
}

/// Sensitivity bound for `p ∈ (1, 2]` on a small ball:
/// `(2r(2−b))^{p−1} / (n (4r)^{p−2} min{p−1, b})`, `b = b_κ(2r)`.
pub fn sensitivity_p_le_2(ctx: &SensitivityContext) -> Result<f64> {
    ctx.validate()?;
    if ctx.p > 2.0 {
        return Err(Error::Domain(format!("bound needs p in (1, 2], got {}", ctx.p)));
    }
    if !small_ball_ok(ctx) {
        return Err(Error::Domain(format!("radius {} exceeds ½·min(inj, π/(2√κ))", ctx.r)));
    }
    let (p, r, n) = (ctx.p, ctx.r, ctx.n as f64);
    let b = b_func(ctx.kappa, 2.0 * r)?;
    Ok((2.0 * r * (2.0 - b)).powf(p - 1.0) / (n * (4.0 * r).powf(p - 2.0) * (p - 1.0).min(b)))
}

/// Sensitivity bound on a Hadamard manifold:
/// `((p−1)(4r)^{p−2}·2r / (n λ_p))^{1/(p−1)}` with `λ_p = k_p/p`.
pub fn sensitivity_hadamard(ctx: &SensitivityContext) -> Result<f64> {
    ctx.validate()?;
    if ctx.regime != Regime::Hadamard {
        return Err(Error::Regime(format!("Hadamard bound applied in regime {:?}", ctx.regime)));
    }
    let (p, r, n) = (ctx.p, ctx.r, ctx.n as f64);
    let k_p = if p <= 2.0 { 2.0 * (p - 1.0) } else { 8.0 / 2f64.powf(p) };
    let lambda_p = k_p / p;
    Ok(((p - 1.0) * (4.0 * r).powf(p - 2.0) * 2.0 * r / (n * lambda_p)).powf(1.0 / (p - 1.0)))
}

/// Sensitivity bound for `p ≥ 2` under positive curvature on `r ≤ π/(4√κ)`:
/// `(2^{p−1} p(p−1)(4r)^{p−2}(2−b)·2r / (n b))^{1/(p−1)}`.
pub fn sensitivity_compact(ctx: &SensitivityContext) -> Result<f64> {
    ctx.validate()?;
    if !(ctx.kappa > 0.0) {
        return Err(Error::Domain(format!("compact bound needs κ > 0, got {}", ctx.kappa)));
    }
    if ctx.p < 2.0 {
        return Err(Error::Domain(format!("compact bound needs p ≥ 2, got {}", ctx.p)));
    }
    if !compact_ok(ctx) {
        return Err(Error::Domain(format!("radius {} exceeds π/(4√κ)", ctx.r)));
    }
    let (p, r, n) = (ctx.p, ctx.r, ctx.n as f64);
    let b = b_func(ctx.kappa, 2.0 * r)?;
    let inner = 2f64.powf(p - 1.0) * p * (p - 1.0) * (4.0 * r).powf(p - 2.0) * (2.0 - b) * 2.0 * r / (n * b);
    Ok(inner.powf(1.0 / (p - 1.0)))
}

/// Smallest applicable sensitivity bound.
pub fn sensitivity_bound(ctx: &SensitivityContext) -> Result<f64> {
    ctx.validate()?;
    let mut best: Option<f64> = None;
    let mut take = |v: f64| best = Some(best.map_or(v, |b: f64| b.min(v)));
    if ctx.p <= 2.0 && small_ball_ok(ctx) {
        take(sensitivity_p_le_2(ctx)?);
    }
    if ctx.regime == Regime::Hadamard && ctx.p >= 2.0 {
        take(sensitivity_hadamard(ctx)?);
    }
    if compact_ok(ctx) {
        take(sensitivity_compact(ctx)?);
    }
    best.ok_or_else(|| {
        Error::NoValidBound(format!(
            "p = {}, r = {}, κ = {}, regime {:?}",
            ctx.p, ctx.r, ctx.kappa, ctx.regime
        ))
    })
}
