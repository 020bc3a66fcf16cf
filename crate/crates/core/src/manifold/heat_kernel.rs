//! Spectral heat kernel of the unit 2-sphere.
//!
//! `p(x,z,t) = Σ_{l=0}^{L} (2l+1)/(4π) · e^{−l(l+1)t} · P_l(⟨x,z⟩)`, the
//! transition density of the diffusion generated by `Δ` (not `Δ/2`).

use std::f64::consts::PI;

use super::{kernels, ManifoldKind, Point};
use crate::error::{Error, Result};

/// A truncated zonal expansion, evaluated in `cos θ`.
#[derive(Debug, Clone)]
pub struct ZonalHeatKernel {
    coeffs: Vec<f64>,
    decay: Vec<f64>,
}

impl ZonalHeatKernel {
    pub fn new(t: f64, order: usize) -> Result<Self> {
        if !(t > 0.0) {
            return Err(Error::Domain(format!("diffusion time must be positive, got {t}")));
        }
        if order < 1 {
            return Err(Error::Domain("truncation order must be at least 1".into()));
        }
        let decay: Vec<f64> = (0..=order).map(|l| (-((l * (l + 1)) as f64) * t).exp()).collect();
        let coeffs = decay
            .iter()
            .enumerate()
            .map(|(l, e)| (2 * l + 1) as f64 / (4.0 * PI) * e)
            .collect();
        Ok(Self { coeffs, decay })
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Kernel value at `⟨x,z⟩ = c` via the forward Legendre recurrence.
    pub fn eval(&self, c: f64) -> f64 {
        let c = c.clamp(-1.0, 1.0);
        let (mut p0, mut p1) = (1.0, c);
        let mut sum = self.coeffs[0];
        if self.coeffs.len() > 1 {
            sum += self.coeffs[1] * c;
        }
        for l in 2..self.coeffs.len() {
            let lf = l as f64;
            let p2 = ((2.0 * lf - 1.0) * c * p1 - (lf - 1.0) * p0) / lf;
            sum += self.coeffs[l] * p2;
            p0 = p1;
            p1 = p2;
        }
        sum
    }

    /// `P[d(x, B_t) ≤ θ]` in closed form, using
    /// `∫_c^1 P_l = (P_{l−1}(c) − P_{l+1}(c))/(2l+1)`.
    pub fn radial_cdf(&self, theta: f64) -> f64 {
        let c = theta.clamp(0.0, PI).cos();
        let order = self.order();
        let mut p = vec![0.0; order + 2];
        crate::quadrature::legendre_table(c, &mut p);
        let mut sum = 1.0 - c;
        for l in 1..=order {
            sum += self.decay[l] * (p[l - 1] - p[l + 1]);
        }
        (0.5 * sum).clamp(0.0, 1.0)
    }

    /// Density of `θ = d(x, B_t)` on `[0, π]`: `2π p(cos θ) sin θ`.
    pub fn radial_density(&self, theta: f64) -> f64 {
        2.0 * PI * self.eval(theta.cos()) * theta.sin()
    }
}

fn require_s2(p: &Point) -> Result<()> {
    if p.spec().kind() != ManifoldKind::Sphere || p.spec().dim() != 2 {
        return Err(Error::UnsupportedManifold(format!(
            "spectral heat kernel is implemented for sphere2, got {}",
            p.spec()
        )));
    }
    Ok(())
}

/// Truncated spectral heat kernel `p(x, z, t)` on `S²` with `l ≤ order`.
pub fn sphere_heat_kernel(x: &Point, z: &Point, t: f64, order: usize) -> Result<f64> {
    require_s2(x)?;
    require_s2(z)?;
    let k = ZonalHeatKernel::new(t, order)?;
    Ok(k.eval(kernels::dot(x.coords(), z.coords())))
}

/// CDF of the geodesic distance travelled by Brownian motion on `S²` in
/// time `t`.
pub fn sphere_heat_kernel_radial_cdf(theta: f64, t: f64, order: usize) -> Result<f64> {
    Ok(ZonalHeatKernel::new(t, order)?.radial_cdf(theta))
}
