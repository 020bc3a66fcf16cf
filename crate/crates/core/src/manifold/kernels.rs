//! Allocation-free geometry on raw coordinate slices.

use super::{ManifoldKind, ANTIPODAL_TOL};
use crate::error::{Error, Result};
use std::f64::consts::PI;

#[inline]
pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// `⟨x,y⟩_L = −x₀y₀ + Σ xᵢyᵢ`.
#[inline]
pub(crate) fn minkowski(x: &[f64], y: &[f64]) -> f64 {
    -x[0] * y[0] + dot(&x[1..], &y[1..])
}

/// Metric on tangent vectors in ambient coordinates.
#[inline]
pub(crate) fn tangent_inner(kind: ManifoldKind, u: &[f64], v: &[f64]) -> f64 {
    match kind {
        ManifoldKind::Hyperboloid => minkowski(u, v),
        _ => dot(u, v),
    }
}

pub(crate) fn distance(kind: ManifoldKind, x: &[f64], y: &[f64]) -> f64 {
    match kind {
        ManifoldKind::Euclidean => x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt(),
        ManifoldKind::Sphere => {
            // 2·atan2(‖x−y‖, ‖x+y‖) equals arccos⟨x,y⟩ but keeps full
            // precision near 0 and π.
            let (mut dm, mut dp) = (0.0, 0.0);
            for (a, b) in x.iter().zip(y) {
                dm += (a - b) * (a - b);
                dp += (a + b) * (a + b);
            }
            2.0 * dm.sqrt().atan2(dp.sqrt())
        }
        ManifoldKind::Hyperboloid => {
            // ⟨x−y,x−y⟩_L = 4 sinh²(d/2), the stable form of arccosh(−⟨x,y⟩_L).
            let mut q = -(x[0] - y[0]) * (x[0] - y[0]);
            for (a, b) in x[1..].iter().zip(&y[1..]) {
                q += (a - b) * (a - b);
            }
            2.0 * (q.max(0.0).sqrt() / 2.0).asinh()
        }
    }
}

/// Re-project ambient coordinates onto the constraint surface in place.
#[inline]
pub(crate) fn renormalize(kind: ManifoldKind, x: &mut [f64]) {
    match kind {
        ManifoldKind::Euclidean => {}
        ManifoldKind::Sphere => {
            let n = dot(x, x).sqrt();
            x.iter_mut().for_each(|c| *c /= n);
        }
        ManifoldKind::Hyperboloid => {
            let s = (-minkowski(x, x)).sqrt();
            x.iter_mut().for_each(|c| *c /= s);
        }
    }
}

pub(crate) fn exp(kind: ManifoldKind, x: &[f64], v: &[f64], out: &mut [f64]) {
    match kind {
        ManifoldKind::Euclidean => {
            for ((o, a), b) in out.iter_mut().zip(x).zip(v) {
                *o = a + b;
            }
        }
        ManifoldKind::Sphere | ManifoldKind::Hyperboloid => {
            let n = tangent_inner(kind, v, v).max(0.0).sqrt();
            if n < 1e-14 {
                out.copy_from_slice(x);
                return;
            }
            let (c, s) = if kind == ManifoldKind::Sphere {
                (n.cos(), n.sin() / n)
            } else {
                (n.cosh(), n.sinh() / n)
            };
            for ((o, a), b) in out.iter_mut().zip(x).zip(v) {
                *o = c * a + s * b;
            }
            renormalize(kind, out);
        }
    }
}

pub(crate) fn log(kind: ManifoldKind, x: &[f64], y: &[f64], out: &mut [f64]) -> Result<()> {
    match kind {
        ManifoldKind::Euclidean => {
            for ((o, a), b) in out.iter_mut().zip(x).zip(y) {
                *o = b - a;
            }
            Ok(())
        }
        ManifoldKind::Sphere => {
            let d = distance(kind, x, y);
            if d >= PI - ANTIPODAL_TOL {
                return Err(Error::CutLocus { distance: d, limit: PI });
            }
            let c = dot(x, y);
            for ((o, a), b) in out.iter_mut().zip(x).zip(y) {
                *o = b - c * a;
            }
            scale_to(out, dot(out, out).sqrt(), d);
            Ok(())
        }
        ManifoldKind::Hyperboloid => {
            let d = distance(kind, x, y);
            let c = minkowski(x, y);
            for ((o, a), b) in out.iter_mut().zip(x).zip(y) {
                *o = b + c * a;
            }
            scale_to(out, minkowski(out, out).max(0.0).sqrt(), d);
            Ok(())
        }
    }
}

#[inline]
fn scale_to(v: &mut [f64], current: f64, target: f64) {
    if current > 0.0 && target > 0.0 {
        let s = target / current;
        v.iter_mut().for_each(|c| *c *= s);
    } else {
        v.iter_mut().for_each(|c| *c = 0.0);
    }
}

/// Orthonormal frame of `T_x M`, written row-wise into `frame`
/// (`dim` rows of ambient length).
///
/// Gram–Schmidt over the projected ambient axes, visiting axes in order of
/// increasing `|x_j|` (ties by index). Deterministic for a given `x`.
pub(crate) fn orthonormal_frame(kind: ManifoldKind, dim: usize, x: &[f64], frame: &mut [f64]) {
    let amb = x.len();
    debug_assert_eq!(frame.len(), dim * amb);
    if kind == ManifoldKind::Euclidean {
        frame.iter_mut().for_each(|c| *c = 0.0);
        for k in 0..dim {
            frame[k * amb + k] = 1.0;
        }
        return;
    }

    // Axis order without allocating for the usual small ambient sizes.
    let mut order_buf = [0usize; 16];
    let mut order_vec;
    let order: &mut [usize] = if amb <= order_buf.len() {
        &mut order_buf[..amb]
    } else {
        order_vec = vec![0usize; amb];
        &mut order_vec
    };
    for (i, o) in order.iter_mut().enumerate() {
        *o = i;
    }
    // insertion sort, stable
    for i in 1..amb {
        let mut j = i;
        while j > 0 && x[order[j - 1]].abs() > x[order[j]].abs() {
            order.swap(j - 1, j);
            j -= 1;
        }
    }

    let mut filled = 0;
    for &axis in order.iter() {
        if filled == dim {
            break;
        }
        let (done, rest) = frame.split_at_mut(filled * amb);
        let cand = &mut rest[..amb];
        // project e_axis onto T_x M
        match kind {
            ManifoldKind::Sphere => {
                for (c, xi) in cand.iter_mut().zip(x) {
                    *c = -x[axis] * xi;
                }
                cand[axis] += 1.0;
            }
            ManifoldKind::Hyperboloid => {
                // e + ⟨x,e⟩_L x
                let ip = if axis == 0 { -x[0] } else { x[axis] };
                for (c, xi) in cand.iter_mut().zip(x) {
                    *c = ip * xi;
                }
                cand[axis] += 1.0;
            }
            ManifoldKind::Euclidean => unreachable!(),
        }
        for prev in done.chunks_exact(amb) {
            let ip = tangent_inner(kind, prev, cand);
            for (c, p) in cand.iter_mut().zip(prev) {
                *c -= ip * p;
            }
        }
        // second pass for numerical orthogonality
        for prev in done.chunks_exact(amb) {
            let ip = tangent_inner(kind, prev, cand);
            for (c, p) in cand.iter_mut().zip(prev) {
                *c -= ip * p;
            }
        }
        let n = tangent_inner(kind, cand, cand).max(0.0).sqrt();
        if n < 1e-6 {
            continue;
        }
        cand.iter_mut().for_each(|c| *c /= n);
        filled += 1;
    }
    assert_eq!(filled, dim, "failed to build a tangent frame");
}

/// `out = Σ_k z_k u_k`.
#[inline]
pub(crate) fn combine_frame(frame: &[f64], z: &[f64], out: &mut [f64]) {
    let amb = out.len();
    out.iter_mut().for_each(|c| *c = 0.0);
    for (u, zk) in frame.chunks_exact(amb).zip(z) {
        for (o, ui) in out.iter_mut().zip(u) {
            *o += zk * ui;
        }
    }
}
