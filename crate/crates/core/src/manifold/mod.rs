//! Exact geometry for the three unit-curvature models used throughout the
//! crate: flat space `R^m`, the unit sphere `S^m ⊂ R^{m+1}` and the
//! hyperboloid model of `H^m` (curvature −1) inside Minkowski space.
//!
//! Points and tangent vectors are stored in embedded (ambient) coordinates.
//! The public types validate their invariants; the slice kernels in
//! [`kernels`] skip validation and are what the samplers run in their inner
//! loops.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub mod heat_kernel;
pub(crate) mod kernels;
pub mod radial;
pub mod sampling;

pub use heat_kernel::{sphere_heat_kernel, sphere_heat_kernel_radial_cdf};
pub use sampling::{tangent_gaussian, uniform_ball_sample, uniform_ball_samples};

/// Tolerance for the point and tangent-space invariants.
pub const CONSTRAINT_TOL: f64 = 1e-10;

/// Sphere log map refuses pairs closer than this to antipodal.
pub const ANTIPODAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ManifoldKind {
    Euclidean,
    Sphere,
    Hyperboloid,
}

/// A concrete manifold together with the curvature data the privacy and
/// sensitivity formulas consume.
///
/// `ric_lower_k` is the `K` in `Ric ≥ −K`, so the sphere has a negative `K`
/// and hyperbolic space a positive one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ManifoldSpec {
    kind: ManifoldKind,
    dim: usize,
    ric_lower_k: f64,
    sec_upper: f64,
    sec_lower: f64,
    inj_radius: f64,
}

impl ManifoldSpec {
    pub fn euclidean(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be positive");
        Self {
            kind: ManifoldKind::Euclidean,
            dim,
            ric_lower_k: 0.0,
            sec_upper: 0.0,
            sec_lower: 0.0,
            inj_radius: f64::INFINITY,
        }
    }

    pub fn sphere(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be positive");
        Self {
            kind: ManifoldKind::Sphere,
            dim,
            ric_lower_k: -((dim - 1) as f64),
            sec_upper: 1.0,
            sec_lower: 1.0,
            inj_radius: std::f64::consts::PI,
        }
    }

    pub fn hyperboloid(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be positive");
        Self {
            kind: ManifoldKind::Hyperboloid,
            dim,
            ric_lower_k: (dim - 1) as f64,
            sec_upper: -1.0,
            sec_lower: -1.0,
            inj_radius: f64::INFINITY,
        }
    }

    pub fn kind(&self) -> ManifoldKind {
        self.kind
    }

    /// Intrinsic dimension `m`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ambient_dim(&self) -> usize {
        match self.kind {
            ManifoldKind::Euclidean => self.dim,
            ManifoldKind::Sphere | ManifoldKind::Hyperboloid => self.dim + 1,
        }
    }

    pub fn ric_lower_k(&self) -> f64 {
        self.ric_lower_k
    }

    pub fn sec_upper(&self) -> f64 {
        self.sec_upper
    }

    pub fn sec_lower(&self) -> f64 {
        self.sec_lower
    }

    pub fn inj_radius(&self) -> f64 {
        self.inj_radius
    }

    /// Complete, simply connected, non-positively curved.
    pub fn is_hadamard(&self) -> bool {
        matches!(self.kind, ManifoldKind::Euclidean | ManifoldKind::Hyperboloid)
    }

    /// The canonical base point: the origin, the north pole `(0,…,0,1)`, or
    /// the hyperboloid apex `(1,0,…,0)`.
    pub fn origin(&self) -> Point {
        let mut coords = vec![0.0; self.ambient_dim()];
        match self.kind {
            ManifoldKind::Euclidean => {}
            ManifoldKind::Sphere => *coords.last_mut().unwrap() = 1.0,
            ManifoldKind::Hyperboloid => coords[0] = 1.0,
        }
        Point { spec: *self, coords }
    }

    /// Short label used in CSV output, e.g. `sphere2`.
    pub fn label(&self) -> String {
        let name = match self.kind {
            ManifoldKind::Euclidean => "euclidean",
            ManifoldKind::Sphere => "sphere",
            ManifoldKind::Hyperboloid => "hyperboloid",
        };
        format!("{name}{}", self.dim)
    }
}

impl fmt::Display for ManifoldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Parses `euclidean:3`, `sphere:2`, `hyperboloid:2` (also `sphere2`).
impl FromStr for ManifoldSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let split = s
            .find(|c: char| c == ':' || c.is_ascii_digit())
            .ok_or_else(|| Error::Config(format!("manifold `{s}` needs a dimension, e.g. sphere:2")))?;
        let (name, rest) = s.split_at(split);
        let dim: usize = rest
            .trim_start_matches(':')
            .parse()
            .map_err(|_| Error::Config(format!("bad manifold dimension in `{s}`")))?;
        if dim == 0 {
            return Err(Error::Config("manifold dimension must be positive".into()));
        }
        match name {
            "euclidean" | "r" => Ok(ManifoldSpec::euclidean(dim)),
            "sphere" | "s" => Ok(ManifoldSpec::sphere(dim)),
            "hyperboloid" | "hyperbolic" | "h" => Ok(ManifoldSpec::hyperboloid(dim)),
            other => Err(Error::Config(format!("unknown manifold `{other}`"))),
        }
    }
}

/// A point in embedded coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point {
    spec: ManifoldSpec,
    coords: Vec<f64>,
}

impl Point {
    /// Checks length and the constraint surface (`‖x‖ = 1` on the sphere,
    /// `⟨x,x⟩_L = −1, x₀ > 0` on the hyperboloid).
    pub fn new(spec: ManifoldSpec, coords: Vec<f64>) -> Result<Self> {
        if coords.len() != spec.ambient_dim() {
            return Err(Error::InvalidPoint(format!(
                "{} expects {} coordinates, got {}",
                spec,
                spec.ambient_dim(),
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidPoint("non-finite coordinate".into()));
        }
        match spec.kind {
            ManifoldKind::Euclidean => {}
            ManifoldKind::Sphere => {
                let n = kernels::dot(&coords, &coords).sqrt();
                if (n - 1.0).abs() > CONSTRAINT_TOL {
                    return Err(Error::InvalidPoint(format!("sphere point has norm {n}")));
                }
            }
            ManifoldKind::Hyperboloid => {
                let q = kernels::minkowski(&coords, &coords);
                if (q + 1.0).abs() > CONSTRAINT_TOL * coords[0].abs().max(1.0).powi(2) || coords[0] <= 0.0 {
                    return Err(Error::InvalidPoint(format!(
                        "hyperboloid point has <x,x>_L = {q}, x0 = {}",
                        coords[0]
                    )));
                }
            }
        }
        Ok(Self { spec, coords })
    }

    /// Pulls arbitrary ambient coordinates onto the manifold: normalizes on
    /// the sphere, rescales a future-timelike vector onto the upper sheet.
    pub fn projected(spec: ManifoldSpec, mut coords: Vec<f64>) -> Result<Self> {
        if coords.len() != spec.ambient_dim() {
            return Err(Error::InvalidPoint(format!(
                "{} expects {} coordinates, got {}",
                spec,
                spec.ambient_dim(),
                coords.len()
            )));
        }
        match spec.kind {
            ManifoldKind::Euclidean => {}
            ManifoldKind::Sphere => {
                let n = kernels::dot(&coords, &coords).sqrt();
                if !(n > 0.0 && n.is_finite()) {
                    return Err(Error::InvalidPoint("cannot normalize a zero vector".into()));
                }
                coords.iter_mut().for_each(|c| *c /= n);
            }
            ManifoldKind::Hyperboloid => {
                let q = kernels::minkowski(&coords, &coords);
                if !(q < 0.0) || coords[0] <= 0.0 {
                    return Err(Error::InvalidPoint("vector is not future timelike".into()));
                }
                let s = (-q).sqrt();
                coords.iter_mut().for_each(|c| *c /= s);
            }
        }
        Self::new(spec, coords)
    }

    /// Hyperboloid point with the given spatial coordinates; `x₀` is solved
    /// from the constraint.
    pub fn hyperboloid_from_spatial(spatial: &[f64]) -> Self {
        let spec = ManifoldSpec::hyperboloid(spatial.len());
        let mut coords = Vec::with_capacity(spatial.len() + 1);
        coords.push((1.0 + kernels::dot(spatial, spatial)).sqrt());
        coords.extend_from_slice(spatial);
        Self { spec, coords }
    }

    pub(crate) fn from_raw(spec: ManifoldSpec, coords: Vec<f64>) -> Self {
        debug_assert_eq!(coords.len(), spec.ambient_dim());
        Self { spec, coords }
    }

    pub fn spec(&self) -> &ManifoldSpec {
        &self.spec
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    fn same_spec(&self, other: &Point) -> Result<()> {
        if self.spec != other.spec {
            return Err(Error::SpecMismatch(format!("{} vs {}", self.spec, other.spec)));
        }
        Ok(())
    }
}

/// A tangent vector `v ∈ T_x M`, stored in ambient coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    base: Point,
    coords: Vec<f64>,
}

impl TangentVector {
    pub fn new(base: Point, coords: Vec<f64>) -> Result<Self> {
        if coords.len() != base.coords.len() {
            return Err(Error::Domain(format!(
                "tangent vector has {} coordinates, base point has {}",
                coords.len(),
                base.coords.len()
            )));
        }
        let kind = base.spec.kind;
        let scale = kernels::dot(&coords, &coords).sqrt().max(1.0) * kernels::dot(&base.coords, &base.coords).sqrt().max(1.0);
        let off = match kind {
            ManifoldKind::Euclidean => 0.0,
            ManifoldKind::Sphere => kernels::dot(&base.coords, &coords),
            ManifoldKind::Hyperboloid => kernels::minkowski(&base.coords, &coords),
        };
        if off.abs() > CONSTRAINT_TOL * scale {
            return Err(Error::Domain(format!("vector is not tangent at the base point (inner product {off:e})")));
        }
        Ok(Self { base, coords })
    }

    pub fn zero(base: Point) -> Self {
        let coords = vec![0.0; base.coords.len()];
        Self { base, coords }
    }

    pub(crate) fn from_raw(base: Point, coords: Vec<f64>) -> Self {
        Self { base, coords }
    }

    pub fn base(&self) -> &Point {
        &self.base
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Riemannian inner product with another vector at the same base point.
    pub fn inner(&self, other: &TangentVector) -> f64 {
        kernels::tangent_inner(self.base.spec.kind, &self.coords, &other.coords)
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).max(0.0).sqrt()
    }

    pub fn scaled(&self, s: f64) -> TangentVector {
        TangentVector {
            base: self.base.clone(),
            coords: self.coords.iter().map(|c| c * s).collect(),
        }
    }

    /// `self + s·other`, both at the same base point.
    pub fn add_scaled(&self, s: f64, other: &TangentVector) -> TangentVector {
        TangentVector {
            base: self.base.clone(),
            coords: self.coords.iter().zip(&other.coords).map(|(a, b)| a + s * b).collect(),
        }
    }

    /// Coefficients in the deterministic orthonormal frame at the base point.
    pub fn frame_coefficients(&self) -> Vec<f64> {
        let spec = self.base.spec;
        let mut frame = vec![0.0; spec.dim * spec.ambient_dim()];
        kernels::orthonormal_frame(spec.kind, spec.dim, &self.base.coords, &mut frame);
        frame
            .chunks_exact(spec.ambient_dim())
            .map(|u| kernels::tangent_inner(spec.kind, u, &self.coords))
            .collect()
    }
}

/// Geodesic distance.
pub fn distance(x: &Point, y: &Point) -> Result<f64> {
    x.same_spec(y)?;
    Ok(kernels::distance(x.spec.kind, &x.coords, &y.coords))
}

/// `Exp_x(v)`; the result is re-projected onto the constraint surface.
pub fn exp_map(x: &Point, v: &TangentVector) -> Result<Point> {
    x.same_spec(&v.base)?;
    let tol = 1e-12 * kernels::dot(&x.coords, &x.coords).sqrt().max(1.0);
    if x.coords.iter().zip(&v.base.coords).any(|(a, b)| (a - b).abs() > tol) {
        return Err(Error::Domain("tangent vector is attached to a different base point".into()));
    }
    let mut out = vec![0.0; x.coords.len()];
    kernels::exp(x.spec.kind, &x.coords, &v.coords, &mut out);
    Ok(Point::from_raw(x.spec, out))
}

/// `Log_x(y)`. Fails on the sphere when `y` is (numerically) antipodal to `x`.
pub fn log_map(x: &Point, y: &Point) -> Result<TangentVector> {
    x.same_spec(y)?;
    let mut out = vec![0.0; x.coords.len()];
    kernels::log(x.spec.kind, &x.coords, &y.coords, &mut out)?;
    Ok(TangentVector::from_raw(x.clone(), out))
}

/// The point at distance `min(d(o,y), r)` from `o` along the geodesic to `y`.
pub fn clamp_to_ball(o: &Point, y: &Point, r: f64) -> Result<Point> {
    let d = distance(o, y)?;
    if d <= r {
        return Ok(y.clone());
    }
    let v = log_map(o, y)?;
    exp_map(o, &v.scaled(r / d))
}
