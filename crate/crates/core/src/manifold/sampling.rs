//! Random tangent vectors and isotropic point laws.

use rand::Rng;

use super::radial::RadialLaw;
use super::{kernels, ManifoldSpec, Point, TangentVector};
use crate::error::Result;
use crate::parallel::std_normal;

/// Scratch buffers for the sampler inner loops.
#[derive(Debug, Clone)]
pub(crate) struct Workspace {
    pub(crate) spec: ManifoldSpec,
    frame: Vec<f64>,
    z: Vec<f64>,
}

impl Workspace {
    pub(crate) fn new(spec: ManifoldSpec) -> Self {
        Self {
            spec,
            frame: vec![0.0; spec.dim() * spec.ambient_dim()],
            z: vec![0.0; spec.dim()],
        }
    }

    /// `out = u·Z` with `Z ~ N(0, I_m)` and `u` the deterministic frame at `x`.
    pub(crate) fn tangent_gaussian<R: Rng + ?Sized>(&mut self, x: &[f64], rng: &mut R, out: &mut [f64]) {
        kernels::orthonormal_frame(self.spec.kind(), self.spec.dim(), x, &mut self.frame);
        for z in self.z.iter_mut() {
            *z = std_normal(rng);
        }
        kernels::combine_frame(&self.frame, &self.z, out);
    }

    /// Unit tangent direction, uniform on the unit sphere of `T_x M`.
    pub(crate) fn uniform_direction<R: Rng + ?Sized>(&mut self, x: &[f64], rng: &mut R, out: &mut [f64]) {
        loop {
            self.tangent_gaussian(x, rng, out);
            let n = self.z.iter().map(|z| z * z).sum::<f64>().sqrt();
            if n > 1e-300 {
                out.iter_mut().for_each(|c| *c /= n);
                return;
            }
        }
    }
}

/// `ξ = u·Z`: `m` i.i.d. standard normal coefficients in an orthonormal
/// frame of `T_x M`.
pub fn tangent_gaussian<R: Rng + ?Sized>(x: &Point, rng: &mut R) -> TangentVector {
    let mut ws = Workspace::new(*x.spec());
    let mut out = vec![0.0; x.coords().len()];
    ws.tangent_gaussian(x.coords(), rng, &mut out);
    TangentVector::from_raw(x.clone(), out)
}

/// Point `Exp_c(s·θ)` with `θ` a uniform tangent direction and `s` drawn
/// from `law`.
pub(crate) fn sample_isotropic<R: Rng + ?Sized>(center: &Point, law: &RadialLaw, rng: &mut R) -> Point {
    let spec = *center.spec();
    let mut ws = Workspace::new(spec);
    let mut dir = vec![0.0; spec.ambient_dim()];
    ws.uniform_direction(center.coords(), rng, &mut dir);
    let s = law.quantile(rng.random::<f64>());
    dir.iter_mut().for_each(|c| *c *= s);
    let mut out = vec![0.0; dir.len()];
    kernels::exp(spec.kind(), center.coords(), &dir, &mut out);
    Point::from_raw(spec, out)
}

/// Uniform draw from the geodesic ball `B(o, r)` w.r.t. Riemannian volume.
pub fn uniform_ball_sample<R: Rng + ?Sized>(o: &Point, r: f64, rng: &mut R) -> Result<Point> {
    let law = RadialLaw::uniform_ball(o.spec().kind(), o.spec().dim(), r)?;
    Ok(sample_isotropic(o, &law, rng))
}

/// Many uniform draws sharing one radial law.
pub fn uniform_ball_samples<R: Rng + ?Sized>(o: &Point, r: f64, count: usize, rng: &mut R) -> Result<Vec<Point>> {
    let law = RadialLaw::uniform_ball(o.spec().kind(), o.spec().dim(), r)?;
    Ok((0..count).map(|_| sample_isotropic(o, &law, rng)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{distance, ManifoldKind};
    use crate::rng::RngState;
    use std::f64::consts::PI;

    #[test]
    fn north_pole_gaussian_lives_in_xy_plane() {
        let s = ManifoldSpec::sphere(2);
        let x = s.origin();
        let mut rng = RngState::new(1, 0).rng();
        for _ in 0..100 {
            let v = tangent_gaussian(&x, &mut rng);
            assert_eq!(v.coords()[2], 0.0);
        }
    }

    #[test]
    fn gaussian_outputs_are_tangent() {
        let mut rng = RngState::new(2, 0).rng();
        for spec in [ManifoldSpec::sphere(2), ManifoldSpec::hyperboloid(3), ManifoldSpec::euclidean(2)] {
            let x = uniform_ball_sample(&spec.origin(), 1.0, &mut rng).unwrap();
            let v = tangent_gaussian(&x, &mut rng);
            assert!(TangentVector::new(x.clone(), v.coords().to_vec()).is_ok());
        }
    }

    #[test]
    fn ball_samples_stay_in_the_ball() {
        let mut rng = RngState::new(3, 0).rng();
        let h = ManifoldSpec::hyperboloid(2);
        let o = h.origin();
        for p in uniform_ball_samples(&o, 3.0, 2000, &mut rng).unwrap() {
            assert!(distance(&o, &p).unwrap() <= 3.0 + 1e-9);
            assert!(Point::new(h, p.coords().to_vec()).is_ok());
        }
        let s = ManifoldSpec::sphere(2);
        let c = s.origin();
        for p in uniform_ball_samples(&c, PI / 5.0, 2000, &mut rng).unwrap() {
            assert!(distance(&c, &p).unwrap() <= PI / 5.0 + 1e-12);
        }
    }

    #[test]
    fn ball_sample_rejects_nonpositive_radius() {
        let mut rng = RngState::new(4, 0).rng();
        assert!(uniform_ball_sample(&ManifoldSpec::sphere(2).origin(), 0.0, &mut rng).is_err());
    }

    #[test]
    fn one_dimensional_direction_is_a_sign() {
        let mut rng = RngState::new(5, 0).rng();
        let e = ManifoldSpec::euclidean(1);
        let mut ws = Workspace::new(e);
        let mut out = [0.0];
        for _ in 0..10 {
            ws.uniform_direction(&[0.0], &mut rng, &mut out);
            assert_eq!(out[0].abs(), 1.0);
        }
        assert_eq!(e.kind(), ManifoldKind::Euclidean);
    }
}
