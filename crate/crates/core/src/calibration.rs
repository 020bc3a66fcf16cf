//! Rényi-DP budgets, diffusion-time calibration and utility bounds.
//!
//! Curvature convention: `K` is the Ricci lower bound in `Ric ≥ −K‖X‖²`, so
//! the unit sphere `S^m` has `K = −(m−1)` and `H^m` has `K = m−1`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::manifold::heat_kernel::ZonalHeatKernel;
use crate::manifold::{kernels, ManifoldKind, Point};
use crate::quadrature::GaussLegendre;

/// Target `(α, ε)`-RDP guarantee.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RdpBudget {
    alpha: f64,
    epsilon: f64,
}

impl RdpBudget {
    pub fn new(alpha: f64, epsilon: f64) -> Result<Self> {
        if !(alpha > 1.0) || !alpha.is_finite() {
            return Err(Error::Domain(format!("RDP order must exceed 1, got {alpha}")));
        }
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::Domain(format!("RDP budget must be positive, got {epsilon}")));
        }
        Ok(Self { alpha, epsilon })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

/// Global sensitivity `Δ` in geodesic distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SensitivitySummary {
    delta: f64,
}

impl SensitivitySummary {
    pub fn new(delta: f64) -> Result<Self> {
        if !(delta >= 0.0) || !delta.is_finite() {
            return Err(Error::Domain(format!("sensitivity must be finite and non-negative, got {delta}")));
        }
        Ok(Self { delta })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

/// RDP cost of releasing `B_t(a)`: `KαΔ² / (2(1 − e^{−2Kt}))`.
///
/// `|K·t| < 1e-12` takes the flat limit `αΔ²/(4t)`.
pub fn bm_epsilon(k: f64, alpha: f64, delta: f64, t: f64) -> f64 {
    if (k * t).abs() < 1e-12 {
        return alpha * delta * delta / (4.0 * t);
    }
    k * alpha * delta * delta / (-2.0 * (-2.0 * k * t).exp_m1())
}

/// Smallest diffusion time whose BM release meets `budget`.
///
/// For `K > 0` the cost never drops below `KαΔ²/2`; budgets at or under
/// that floor are infeasible. Zero sensitivity needs no noise and gives 0.
pub fn bm_time_for_budget(k: f64, budget: &RdpBudget, delta: f64) -> Result<f64> {
    let (alpha, eps) = (budget.alpha, budget.epsilon);
    let c = alpha * delta * delta;
    if k == 0.0 {
        return Ok(c / (4.0 * eps));
    }
    if k > 0.0 && 2.0 * eps <= k * c {
        return Err(Error::InfeasibleBudget { epsilon: eps, floor: k * c / 2.0 });
    }
    Ok(-(-k * c / (2.0 * eps)).ln_1p() / (2.0 * k))
}

fn drift_gap(k: f64, lambda: f64) -> Result<f64> {
    if !(lambda > k) {
        return Err(Error::DriftTooWeak { lambda, k });
    }
    Ok(lambda - k)
}

/// Diffusion time of the anchored Langevin release meeting `budget`.
pub fn langevin_time_for_budget(k: f64, lambda: f64, budget: &RdpBudget, delta: f64) -> Result<f64> {
    let g = drift_gap(k, lambda)?;
    let x = budget.alpha * delta * delta / (2.0 * budget.epsilon);
    // ln(1 + g·x)/(2g) → x/2 as g → 0
    let gx = g * x;
    if gx < 1e-300 {
        return Ok(x / 2.0);
    }
    Ok(gx.ln_1p() / (2.0 * g))
}

/// RDP cost of the Langevin release after time `t`:
/// `(λ−K)αΔ² / (2(e^{2(λ−K)t} − 1))`.
pub fn langevin_epsilon(k: f64, lambda: f64, alpha: f64, delta: f64, t: f64) -> Result<f64> {
    let g = drift_gap(k, lambda)?;
    if !(t > 0.0) {
        return Err(Error::Domain(format!("diffusion time must be positive, got {t}")));
    }
    let c = alpha * delta * delta;
    if g * t < 1e-300 {
        return Ok(c / (4.0 * t));
    }
    Ok(g * c / (2.0 * (2.0 * g * t).exp_m1()))
}

/// RDP curve of an `ε*`-DP Laplace-type mechanism at order `α`.
pub fn dp_to_rdp(eps_star: f64, alpha: f64) -> f64 {
    if eps_star <= 0.0 {
        return 0.0;
    }
    let x = eps_star;
    let v = if alpha * x > 700.0 {
        // log(e^{αx} + e^{(1−α)x}) − log(e^x + 1)
        let num = alpha * x + ((1.0 - 2.0 * alpha) * x).exp().ln_1p();
        let den = x + (-x).exp().ln_1p();
        (num - den) / (alpha - 1.0)
    } else {
        let ex = x.exp();
        let r = (ex * ((alpha - 1.0) * x).exp_m1() + ((1.0 - alpha) * x).exp_m1()) / (ex + 1.0);
        r.ln_1p() / (alpha - 1.0)
    };
    v.clamp(0.0, x)
}

/// Pure-DP parameter `ε*` whose RDP curve hits `target.epsilon` at
/// `target.alpha`, by bisection to absolute `1e-12`.
pub fn rdp_to_dp_budget(target: &RdpBudget) -> f64 {
    let (alpha, eps) = (target.alpha, target.epsilon);
    let mut lo = eps;
    let mut hi = eps * alpha / (alpha - 1.0) + 10.0;
    while dp_to_rdp(hi, alpha) < eps {
        lo = hi;
        hi *= 2.0;
    }
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if dp_to_rdp(mid, alpha) < eps {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `E[d(a, B_t)] ≤ √(2mt)` on manifolds with positive Ricci lower bound.
pub fn bm_utility_bound(m: usize, t: f64) -> f64 {
    (2.0 * m as f64 * t).sqrt()
}

/// Expected-distance bound for the anchored Langevin release, as displayed:
/// `(2m/λ + (d(o,a) + √((m−1)K)/λ)²)^{1/2} (1 − e^{−λt})^{1/2}`.
pub fn langevin_utility_bound(m: usize, k: f64, lambda: f64, d_oa: f64, t: f64) -> f64 {
    let mf = m as f64;
    let shift = d_oa + ((mf - 1.0) * k).max(0.0).sqrt() / lambda;
    let scale = 2.0 * mf / lambda + shift * shift;
    (scale * -(-lambda * t).exp_m1()).sqrt()
}

/// Laplace rate `Δ/ε*`, doubled off homogeneous spaces.
pub fn rl_rate(delta: f64, eps_star: f64, homogeneous: bool) -> f64 {
    if delta == 0.0 {
        return 0.0;
    }
    let base = delta / eps_star;
    if homogeneous {
        base
    } else {
        2.0 * base
    }
}

/// Wrapped-Gaussian scale `Δ·√(α/(2ε))`.
pub fn ewg_rate(delta: f64, budget: &RdpBudget) -> f64 {
    delta * (budget.alpha / (2.0 * budget.epsilon)).sqrt()
}

/// Resolution of the latitude–longitude product rule on `S²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SphereGrid {
    /// Gauss–Legendre nodes in `cos θ`.
    pub n_theta: usize,
    /// Uniform nodes in `φ ∈ [0, 2π)`.
    pub n_phi: usize,
}

impl Default for SphereGrid {
    fn default() -> Self {
        Self { n_theta: 256, n_phi: 128 }
    }
}

impl SphereGrid {
    fn coarser(&self) -> Self {
        Self { n_theta: (self.n_theta * 3 / 4).max(2), n_phi: (self.n_phi * 3 / 4).max(2) }
    }
}

/// `log E_q[(p/q)^α] / (α−1)` for the two truncated heat-kernel laws on
/// a given grid.
fn divergence_on_grid(k: &ZonalHeatKernel, cos_d: f64, sin_d: f64, alpha: f64, grid: SphereGrid) -> Result<f64> {
    // Coordinates centred on y: z = cos θ·y + sin θ(cos φ·u + sin φ·v), with
    // u the unit direction of x ⟂ y, so ⟨x,z⟩ = cos θ cos d + sin θ cos φ sin d.
    let rule = GaussLegendre::new(grid.n_theta);
    let dphi = 2.0 * PI / grid.n_phi as f64;
    let cos_phi: Vec<f64> = (0..grid.n_phi).map(|j| ((j as f64 + 0.5) * dphi).cos()).collect();
    let (mut mass, mut excess) = (0.0, 0.0);
    for (&c, &w) in rule.nodes.iter().zip(&rule.weights) {
        let s = (1.0 - c * c).max(0.0).sqrt();
        let q = k.eval(c);
        if !(q > 0.0) {
            return Err(Error::Accuracy { relative_change: f64::INFINITY });
        }
        let mut row = 0.0;
        for &cp in &cos_phi {
            let p = k.eval(c * cos_d + s * cp * sin_d);
            if !(p > 0.0) {
                return Err(Error::Accuracy { relative_change: f64::INFINITY });
            }
            row += (alpha * (p / q).ln()).exp_m1();
        }
        mass += w * q * grid.n_phi as f64;
        excess += w * q * row;
    }
    Ok((excess / mass).ln_1p() / (alpha - 1.0))
}

/// Numerical `D_α(p(x,·,t) ‖ p(y,·,t))` between two heat-kernel laws on
/// `S²`, truncated at `order`.
///
/// Errors with `Accuracy` when a ¾-resolution grid disagrees by more than
/// `1e-6` relative, or the truncated kernel goes non-positive.
pub fn renyi_divergence_sphere(x: &Point, y: &Point, t: f64, alpha: f64, order: usize, grid: SphereGrid) -> Result<f64> {
    for p in [x, y] {
        if p.spec().kind() != ManifoldKind::Sphere || p.spec().dim() != 2 {
            return Err(Error::UnsupportedManifold(format!(
                "heat-kernel divergence is implemented for sphere2, got {}",
                p.spec()
            )));
        }
    }
    if !(alpha > 1.0) {
        return Err(Error::Domain(format!("RDP order must exceed 1, got {alpha}")));
    }
    let k = ZonalHeatKernel::new(t, order)?;
    let d = kernels::distance(ManifoldKind::Sphere, x.coords(), y.coords());
    let (sin_d, cos_d) = d.sin_cos();
    let fine = divergence_on_grid(&k, cos_d, sin_d, alpha, grid)?;
    let coarse = divergence_on_grid(&k, cos_d, sin_d, alpha, grid.coarser())?;
    let change = (fine - coarse).abs();
    if change > 1e-6 * fine.abs() + 1e-15 {
        return Err(Error::Accuracy { relative_change: change / fine.abs().max(f64::MIN_POSITIVE) });
    }
    Ok(fine.max(0.0))
}
