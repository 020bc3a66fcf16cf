//! Samplers for the diffusion mechanisms and the two baselines.
//!
//! * Brownian motion: geodesic random walk `Y ← Exp_Y(√(2h)·ξ)`.
//! * Langevin: Euler–geodesic step `Y ← Exp_Y(hλ·Log_Y(o) + √(2h)·ξ)`,
//!   the discretization of `dX = √2 dB − ∇V dt` with `V = ½λ d²(o, ·)`.
//! * Riemannian Laplace: density `∝ exp(−d(c, x)/σ)`, sampled in polar form.
//! * Exponential-wrapped Gaussian: `Exp_{p₀}(z)`, `z ~ N(Log_{p₀}(c), σ² I)`.
//!
//! All samplers consume randomness only through the generator passed in, so
//! a fixed stream reproduces the output bit for bit.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifold::radial::RadialLaw;
use crate::manifold::sampling::{sample_isotropic, Workspace};
use crate::manifold::{kernels, ManifoldKind, Point};

/// Default step count: step size `h ≤ 0.01` and at least 100 steps.
pub fn default_n_step(t: f64) -> usize {
    let h = (0.01f64).min(t / 100.0);
    // guard against t/h landing a hair above an integer
    (((t / h) * (1.0 - 1e-12)).ceil() as usize).max(1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mechanism {
    /// Brownian motion started at the summary.
    Bm,
    /// Anchored Langevin diffusion (Hadamard manifolds).
    Langevin,
    /// Riemannian Laplace baseline.
    Rl,
    /// Exponential-wrapped Gaussian baseline.
    Ewg,
}

impl Mechanism {
    pub fn label(&self) -> &'static str {
        match self {
            Mechanism::Bm => "bm",
            Mechanism::Langevin => "langevin",
            Mechanism::Rl => "rl",
            Mechanism::Ewg => "ewg",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bm" | "brownian" => Ok(Mechanism::Bm),
            "langevin" => Ok(Mechanism::Langevin),
            "rl" | "laplace" => Ok(Mechanism::Rl),
            "ewg" => Ok(Mechanism::Ewg),
            other => Err(Error::Config(format!("unknown mechanism `{other}`"))),
        }
    }
}

/// Diffusion parameters for one mechanism run.
#[derive(Debug, Clone, PartialEq)]
pub struct MechanismConfig {
    pub t: f64,
    pub n_step: usize,
    /// Langevin pull strength; unused by Brownian motion.
    pub lambda: f64,
    /// Langevin anchor; `None` for Brownian motion.
    pub anchor: Option<Point>,
}

impl MechanismConfig {
    pub fn brownian(t: f64) -> Result<Self> {
        let cfg = Self { t, n_step: default_n_step(t.max(f64::MIN_POSITIVE)), lambda: 0.0, anchor: None };
        cfg.check_time()?;
        Ok(cfg)
    }

    /// Requires `lambda > K` for the anchor's manifold.
    pub fn langevin(t: f64, lambda: f64, anchor: Point) -> Result<Self> {
        let cfg = Self { t, n_step: default_n_step(t.max(f64::MIN_POSITIVE)), lambda, anchor: Some(anchor) };
        cfg.check_time()?;
        cfg.check_drift()?;
        Ok(cfg)
    }

    pub fn with_steps(mut self, n_step: usize) -> Result<Self> {
        if n_step == 0 {
            return Err(Error::Domain("n_step must be at least 1".into()));
        }
        self.n_step = n_step;
        Ok(self)
    }

    fn check_time(&self) -> Result<()> {
        if !(self.t > 0.0) || !self.t.is_finite() {
            return Err(Error::Domain(format!("diffusion time must be positive, got {}", self.t)));
        }
        if self.n_step == 0 {
            return Err(Error::Domain("n_step must be at least 1".into()));
        }
        Ok(())
    }

    fn check_drift(&self) -> Result<()> {
        let anchor = self
            .anchor
            .as_ref()
            .ok_or_else(|| Error::Domain("Langevin mechanism needs an anchor".into()))?;
        let k = anchor.spec().ric_lower_k();
        if !(self.lambda > k) || !(self.lambda > 0.0) {
            return Err(Error::DriftTooWeak { lambda: self.lambda, k });
        }
        Ok(())
    }
}

/// Brownian motion `B_t(a)` by `n_step` geodesic Gaussian steps.
///
/// On flat space the walk is a sum of Gaussians, so the output is exactly
/// `N(a, 2t·I)` whatever the step count.
pub fn bm_sample<R: Rng + ?Sized>(a: &Point, t: f64, n_step: usize, rng: &mut R) -> Result<Point> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("diffusion time must be positive, got {t}")));
    }
    if n_step == 0 {
        return Err(Error::Domain("n_step must be at least 1".into()));
    }
    let spec = *a.spec();
    let kind = spec.kind();
    let scale = (2.0 * t / n_step as f64).sqrt();
    let mut ws = Workspace::new(spec);
    let mut y = a.coords().to_vec();
    let mut xi = vec![0.0; y.len()];
    let mut next = vec![0.0; y.len()];
    for _ in 0..n_step {
        ws.tangent_gaussian(&y, rng, &mut xi);
        xi.iter_mut().for_each(|c| *c *= scale);
        kernels::exp(kind, &y, &xi, &mut next);
        std::mem::swap(&mut y, &mut next);
    }
    Ok(Point::from_raw(spec, y))
}

/// Langevin diffusion `X_t^o(a)` pulled toward `cfg.anchor`.
pub fn langevin_sample<R: Rng + ?Sized>(a: &Point, cfg: &MechanismConfig, rng: &mut R) -> Result<Point> {
    let spec = *a.spec();
    if !spec.is_hadamard() {
        return Err(Error::UnsupportedManifold(format!(
            "Langevin mechanism requires a Hadamard manifold, got {spec}"
        )));
    }
    cfg.check_time()?;
    cfg.check_drift()?;
    let anchor = cfg.anchor.as_ref().expect("checked above");
    if anchor.spec() != a.spec() {
        return Err(Error::SpecMismatch(format!("anchor on {} but start on {}", anchor.spec(), spec)));
    }
    let kind = spec.kind();
    let h = cfg.t / cfg.n_step as f64;
    let noise = (2.0 * h).sqrt();
    let pull = h * cfg.lambda;
    let mut ws = Workspace::new(spec);
    let mut y = a.coords().to_vec();
    let mut xi = vec![0.0; y.len()];
    let mut drift = vec![0.0; y.len()];
    let mut next = vec![0.0; y.len()];
    for _ in 0..cfg.n_step {
        ws.tangent_gaussian(&y, rng, &mut xi);
        kernels::log(kind, &y, anchor.coords(), &mut drift)?;
        for (x, d) in xi.iter_mut().zip(&drift) {
            *x = pull * d + noise * *x;
        }
        kernels::exp(kind, &y, &xi, &mut next);
        std::mem::swap(&mut y, &mut next);
    }
    Ok(Point::from_raw(spec, y))
}

/// Riemannian Laplace draw around `center` with rate `sigma`.
///
/// On hyperbolic space the density is only normalizable for
/// `sigma < 1/(m−1)`; larger rates are an error, not a silent fallback.
pub fn rl_sample<R: Rng + ?Sized>(center: &Point, sigma: f64, rng: &mut R) -> Result<Point> {
    if sigma == 0.0 {
        return Ok(center.clone());
    }
    let spec = center.spec();
    let law = RadialLaw::laplace(spec.kind(), spec.dim(), sigma)?;
    Ok(sample_isotropic(center, &law, rng))
}

/// Exponential-wrapped Gaussian with footpoint `footpoint`, center `center`
/// and scale `sigma`.
pub fn ewg_sample<R: Rng + ?Sized>(footpoint: &Point, center: &Point, sigma: f64, rng: &mut R) -> Result<Point> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::Domain(format!("EWG scale must be non-negative, got {sigma}")));
    }
    if footpoint.spec() != center.spec() {
        return Err(Error::SpecMismatch(format!("{} vs {}", footpoint.spec(), center.spec())));
    }
    let spec = *footpoint.spec();
    let kind = spec.kind();
    let mut mean = vec![0.0; spec.ambient_dim()];
    kernels::log(kind, footpoint.coords(), center.coords(), &mut mean)?;
    let mut ws = Workspace::new(spec);
    let mut z = vec![0.0; mean.len()];
    ws.tangent_gaussian(footpoint.coords(), rng, &mut z);
    for (zi, mi) in z.iter_mut().zip(&mean) {
        *zi = mi + sigma * *zi;
    }
    let mut out = vec![0.0; mean.len()];
    kernels::exp(kind, footpoint.coords(), &z, &mut out);
    if kind == ManifoldKind::Euclidean && sigma == 0.0 {
        return Ok(center.clone());
    }
    Ok(Point::from_raw(spec, out))
}
