//! One-dimensional laws for the geodesic radius of isotropic distributions.
//!
//! An isotropic law around a point has radius density proportional to
//! `w(s)·A(s)`, where `A(s)` is the area factor of the geodesic sphere of
//! radius `s` (`s^{m−1}`, `sin^{m−1} s` or `sinh^{m−1} s`). Two weights are
//! needed: `w = 1` on `[0, r]` (uniform ball) and `w = e^{−s/σ}` (Riemannian
//! Laplace). Dimensions 1 and 2 use closed-form integrals; higher dimensions
//! use a cumulative Gauss–Legendre table.

use super::ManifoldKind;
use crate::error::{Error, Result};
use crate::quadrature::gl16;
use std::f64::consts::PI;

const TABLE_PANELS: usize = 2048;

#[derive(Debug, Clone)]
pub struct RadialLaw {
    kind: ManifoldKind,
    dim: usize,
    /// `1/σ`, zero for the unweighted law.
    rate: f64,
    /// Right end of the support; `∞` allowed.
    upper: f64,
    total: f64,
    table: Option<Table>,
}

#[derive(Debug, Clone)]
struct Table {
    width: f64,
    cumulative: Vec<f64>,
}

impl RadialLaw {
    /// Radius of the uniform law on the geodesic ball `B(o, r)`.
    pub fn uniform_ball(kind: ManifoldKind, dim: usize, r: f64) -> Result<Self> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::Domain(format!("ball radius must be positive and finite, got {r}")));
        }
        if kind == ManifoldKind::Sphere && r >= PI {
            return Err(Error::Domain(format!("sphere ball radius must be below π, got {r}")));
        }
        Ok(Self::build(kind, dim, 0.0, r))
    }

    /// Radius of the Riemannian Laplace law `∝ exp(−d(c,x)/σ)`.
    pub fn laplace(kind: ManifoldKind, dim: usize, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::Domain(format!("Laplace rate must be positive and finite, got {sigma}")));
        }
        let rate = 1.0 / sigma;
        if kind == ManifoldKind::Hyperboloid && dim >= 2 && rate <= (dim - 1) as f64 {
            return Err(Error::Normalization(format!(
                "exp(-s/{sigma})·sinh^{}(s) is not integrable on [0, ∞): need σ < 1/(m−1) = {}",
                dim - 1,
                1.0 / (dim - 1) as f64
            )));
        }
        let upper = if kind == ManifoldKind::Sphere { PI } else { f64::INFINITY };
        Ok(Self::build(kind, dim, rate, upper))
    }

    fn build(kind: ManifoldKind, dim: usize, rate: f64, upper: f64) -> Self {
        let mut law = Self { kind, dim, rate, upper, total: 0.0, table: None };
        if dim <= 2 {
            law.total = if upper.is_finite() { law.closed_integral(upper) } else { law.closed_total() };
        } else {
            let end = if upper.is_finite() { upper } else { law.truncation_point() };
            let width = end / TABLE_PANELS as f64;
            let mut cumulative = Vec::with_capacity(TABLE_PANELS + 1);
            cumulative.push(0.0);
            let mut acc = 0.0;
            for k in 0..TABLE_PANELS {
                let lo = width * k as f64;
                acc += gl16().integrate(lo, lo + width, |s| law.weight(s));
                cumulative.push(acc);
            }
            law.total = acc;
            law.upper = end;
            law.table = Some(Table { width, cumulative });
        }
        law
    }

    /// Where the neglected tail mass drops below ~1e-18 of the total.
    fn truncation_point(&self) -> f64 {
        let m1 = (self.dim - 1) as f64;
        let decay = match self.kind {
            ManifoldKind::Hyperboloid => self.rate - m1,
            _ => self.rate,
        };
        3.0 * m1 / decay + 45.0 / decay
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    /// Unnormalized density `w(s)·A(s)`.
    pub fn weight(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return if self.dim == 1 { 1.0 } else { 0.0 };
        }
        let m1 = (self.dim - 1) as i32;
        let area = match self.kind {
            ManifoldKind::Euclidean => s.powi(m1),
            ManifoldKind::Sphere => s.sin().max(0.0).powi(m1),
            ManifoldKind::Hyperboloid => {
                if m1 == 0 {
                    1.0
                } else {
                    // stay in log space for large s
                    return (m1 as f64 * s.sinh().ln() - self.rate * s).exp();
                }
            }
        };
        area * (-self.rate * s).exp()
    }

    /// Normalized density on the support.
    pub fn density(&self, s: f64) -> f64 {
        if s < 0.0 || s > self.upper {
            return 0.0;
        }
        self.weight(s) / self.total
    }

    /// `∫_0^s w·A`.
    pub fn integral(&self, s: f64) -> f64 {
        let s = s.clamp(0.0, self.upper);
        match &self.table {
            None => self.closed_integral(s),
            Some(t) => {
                let k = ((s / t.width) as usize).min(TABLE_PANELS - 1);
                let lo = t.width * k as f64;
                t.cumulative[k] + gl16().integrate(lo, s, |u| self.weight(u))
            }
        }
    }

    pub fn cdf(&self, s: f64) -> f64 {
        (self.integral(s) / self.total).clamp(0.0, 1.0)
    }

    /// Normalizing constant `∫ w·A` over the support.
    pub fn total(&self) -> f64 {
        self.total
    }

    /// Inverse CDF by safeguarded Newton iteration.
    pub fn quantile(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        if u >= 1.0 {
            return self.upper;
        }
        let target = u * self.total;
        let mut lo = 0.0;
        let mut hi = if self.upper.is_finite() {
            self.upper
        } else {
            let mut h = 1.0f64.max(2.0 / self.rate.max(1e-300));
            while self.integral(h) < target && h < 1e300 {
                h *= 2.0;
            }
            h
        };
        let mut s = 0.5 * (lo + hi);
        for _ in 0..200 {
            let f = self.integral(s) - target;
            if f == 0.0 {
                return s;
            }
            if f > 0.0 {
                hi = s;
            } else {
                lo = s;
            }
            let d = self.weight(s);
            let mut next = if d > 0.0 { s - f / d } else { f64::NAN };
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - s).abs() <= 1e-14 * s.max(1.0) || hi - lo <= 1e-14 * hi.max(1.0) {
                return next;
            }
            s = next;
        }
        s
    }

    fn closed_integral(&self, s: f64) -> f64 {
        let a = self.rate;
        match (self.dim, self.kind) {
            (1, _) => {
                if a == 0.0 {
                    s
                } else {
                    -(-a * s).exp_m1() / a
                }
            }
            (2, ManifoldKind::Euclidean) => {
                if a == 0.0 {
                    0.5 * s * s
                } else {
                    one_minus_exp_poly(a * s) / (a * a)
                }
            }
            (2, ManifoldKind::Sphere) => {
                if a == 0.0 {
                    2.0 * (0.5 * s).sin().powi(2)
                } else {
                    (1.0 - (-a * s).exp() * (a * s.sin() + s.cos())) / (1.0 + a * a)
                }
            }
            (2, ManifoldKind::Hyperboloid) => {
                if a == 0.0 {
                    2.0 * (0.5 * s).sinh().powi(2)
                } else {
                    let dm = a - 1.0;
                    let first = if dm == 0.0 { s } else { -(-dm * s).exp_m1() / dm };
                    let second = -(-(a + 1.0) * s).exp_m1() / (a + 1.0);
                    0.5 * (first - second)
                }
            }
            _ => unreachable!("closed forms exist for dimensions 1 and 2 only"),
        }
    }

    fn closed_total(&self) -> f64 {
        let a = self.rate;
        match (self.dim, self.kind) {
            (1, _) => 1.0 / a,
            (2, ManifoldKind::Euclidean) => 1.0 / (a * a),
            (2, ManifoldKind::Hyperboloid) => 1.0 / (a * a - 1.0),
            _ => unreachable!("bounded support handled by closed_integral"),
        }
    }
}

/// `1 − e^{−x}(1+x)` without cancellation near zero.
fn one_minus_exp_poly(x: f64) -> f64 {
    if x < 0.5 {
        // Σ_{k≥2} (−1)^k (k−1) x^k / k!
        let mut term = x * x / 2.0; // x^k/k! at k=2
        let mut sum = 0.0;
        for k in 2..40 {
            let kf = k as f64;
            let signed = if k % 2 == 0 { term } else { -term };
            sum += (kf - 1.0) * signed;
            term *= x / (kf + 1.0);
            if term < 1e-20 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        1.0 - (-x).exp() * (1.0 + x)
    }
}
