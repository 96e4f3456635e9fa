//! Extrinsic geometry of parametrized surfaces in the ball.
//!
//! A surface patch is handed over as a [`Jet`] triple: position together
//! with its first and second partials in the parameters `(u, v)`. The
//! routines here turn that into the unit normal, the mean curvature
//! `H = I^{ij} h_ij` with `h_ij = −g(N, ∇_{X_i} X_j)`, and the boundary angle
//! `Θ = g(ν, N)` against the outward normal of the unit sphere.

use crate::capmetric::{AmbientMetric, CapMetric};
use crate::error::Result;
use crate::scalar::{cross, Jet, Scalar};
use crate::{Mat3, Vec3};

pub fn value(x: &[Jet; 3]) -> Vec3 {
    Vec3::new(x[0].v, x[1].v, x[2].v)
}

pub fn d_u(x: &[Jet; 3]) -> Vec3 {
    Vec3::new(x[0].du, x[1].du, x[2].du)
}

pub fn d_v(x: &[Jet; 3]) -> Vec3 {
    Vec3::new(x[0].dv, x[1].dv, x[2].dv)
}

/// Unit normal `N = G⁻¹ n♭ / |n♭|_{G⁻¹}` where `n♭` is the covector
/// annihilating both tangents; the sign is chosen so that `N · orient > 0`.
pub fn unit_normal(ginv: &Mat3, xu: &Vec3, xv: &Vec3, orient: &Vec3) -> Vec3 {
    let covector = xu.cross(xv);
    let raised = ginv * covector;
    let n = raised / covector.dot(&raised).sqrt();
    if n.dot(orient) < 0.0 {
        -n
    } else {
        n
    }
}

/// Mean curvature of the patch at the jet base point, normal oriented by
/// `orient`.
pub fn mean_curvature(metric: &dyn AmbientMetric, x: &[Jet; 3], orient: &Vec3) -> Result<f64> {
    let p = value(x);
    let g = metric.metric(&p)?;
    let ginv = metric.inverse(&p)?;
    let gamma = metric.christoffel(&p)?;
    let tangents = [d_u(x), d_v(x)];
    let second = [
        [Vec3::new(x[0].duu, x[1].duu, x[2].duu), Vec3::new(x[0].duv, x[1].duv, x[2].duv)],
        [Vec3::new(x[0].duv, x[1].duv, x[2].duv), Vec3::new(x[0].dvv, x[1].dvv, x[2].dvv)],
    ];
    let n = unit_normal(&ginv, &tangents[0], &tangents[1], orient);
    let gn = g * n;
    let mut first = nalgebra::Matrix2::<f64>::zeros();
    let mut shape = nalgebra::Matrix2::<f64>::zeros();
    for a in 0..2 {
        for b in 0..2 {
            first[(a, b)] = tangents[a].dot(&(g * tangents[b]));
            let mut cov = second[a][b];
            for k in 0..3 {
                let mut s = 0.0;
                for i in 0..3 {
                    for j in 0..3 {
                        s += gamma[k][i][j] * tangents[a][i] * tangents[b][j];
                    }
                }
                cov[k] += s;
            }
            shape[(a, b)] = -gn.dot(&cov);
        }
    }
    let inv = first
        .try_inverse()
        .ok_or_else(|| crate::Error::Discretization("degenerate surface patch".into()))?;
    Ok((inv * shape).trace())
}

/// Outward unit normal of the sphere `|x| = |p|` in the metric, as a vector.
pub fn ball_boundary_normal(metric: &dyn AmbientMetric, p: &Vec3) -> Result<Vec3> {
    let ginv = metric.inverse(p)?;
    let raised = ginv * p;
    Ok(raised / p.dot(&raised).sqrt())
}

/// `Θ = g(ν, N)` at `p`, using the level sets of `|x|` to extend `ν` off the
/// unit sphere.
pub fn boundary_angle(metric: &dyn AmbientMetric, p: &Vec3, n: &Vec3) -> Result<f64> {
    let ginv = metric.inverse(p)?;
    Ok(p.dot(n) / p.dot(&(ginv * p)).sqrt())
}

/// An inverse metric that can be evaluated on jets of the position.
pub trait InverseJet {
    fn inverse_jet(&self, x: &[Jet; 3]) -> [[Jet; 3]; 3];
}

impl InverseJet for CapMetric {
    fn inverse_jet(&self, x: &[Jet; 3]) -> [[Jet; 3]; 3] {
        self.inverse_generic(x)
    }
}

/// Unit normal as a jet, from jets of the position and of both tangents.
/// `sign` is `±1` and fixes the orientation relative to `X_u × X_v`.
pub fn normal_jet(
    metric: &dyn InverseJet,
    x: &[Jet; 3],
    xu: &[Jet; 3],
    xv: &[Jet; 3],
    sign: f64,
) -> [Jet; 3] {
    let covector = cross(xu, xv);
    let ginv = metric.inverse_jet(x);
    let mut raised = [Jet::constant(0.0); 3];
    for i in 0..3 {
        for j in 0..3 {
            raised[i] = raised[i] + ginv[i][j] * covector[j];
        }
    }
    let norm2 = (0..3).fold(Jet::constant(0.0), |acc, i| acc + raised[i] * covector[i]);
    let scale = Jet::constant(sign) / norm2.sqrt();
    [raised[0] * scale, raised[1] * scale, raised[2] * scale]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere_patch(radius: f64, u: f64, v: f64) -> [Jet; 3] {
        let (u, v) = (Jet::var_u(u), Jet::var_v(v));
        let r = Jet::constant(radius);
        [r * u.sin() * v.cos(), r * u.sin() * v.sin(), r * u.cos()]
    }

    #[test]
    fn round_sphere_has_mean_curvature_two_over_radius() {
        let flat = CapMetric::euclidean();
        let x = sphere_patch(0.5, 1.1, 0.3);
        let h = mean_curvature(&flat, &x, &value(&x)).unwrap();
        assert!((h - 4.0).abs() < 1e-12, "{h}");
        let h = mean_curvature(&flat, &x, &-value(&x)).unwrap();
        assert!((h + 4.0).abs() < 1e-12);
    }

    #[test]
    fn centred_geodesic_sphere_in_cap_metric() {
        // the sphere |x| = ρ in g_t is a geodesic sphere of the space form of
        // curvature t², with geodesic radius R = asin(|t|ρ)/|t| and mean
        // curvature 2|t| cot(|t| R)
        let t: f64 = 0.6;
        let rho = 0.7;
        let x = sphere_patch(rho, 0.8, -0.4);
        let h = mean_curvature(&CapMetric::new(t).unwrap(), &x, &value(&x)).unwrap();
        let big_r = (t * rho).asin() / t;
        let want = 2.0 * t / (t * big_r).tan();
        assert!((h - want).abs() < 1e-12, "{h} vs {want}");
    }

    #[test]
    fn boundary_normal_is_unit_and_radial() {
        let m = CapMetric::new(0.5).unwrap();
        let p = Vec3::new(0.6, 0.0, 0.8);
        let nu = ball_boundary_normal(&m, &p).unwrap();
        let g = m.metric(&p).unwrap();
        assert!((nu.dot(&(g * nu)) - 1.0).abs() < 1e-14);
        assert!((nu - (1.0f64 - 0.25).sqrt() * p).norm() < 1e-14);
        assert!((boundary_angle(&m, &p, &nu).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn normal_jet_matches_pointwise_normal() {
        let m = CapMetric::new(0.4).unwrap();
        let (u, v) = (Jet::var_u(0.3), Jet::var_v(0.2));
        let x = [u, v, (u * v).sin() * Jet::constant(0.3)];
        let one = Jet::constant(1.0);
        let zero = Jet::constant(0.0);
        let xu = [one, zero, v * (u * v).cos() * Jet::constant(0.3)];
        let xv = [zero, one, u * (u * v).cos() * Jet::constant(0.3)];
        let n = normal_jet(&m, &x, &xu, &xv, 1.0);
        let p = value(&x);
        let pointwise = unit_normal(&m.inverse(&p).unwrap(), &d_u(&x), &d_v(&x), &Vec3::z());
        assert!((value(&n) - pointwise).norm() < 1e-14);
        // first derivative against a finite difference in u
        let h = 1e-6;
        let at = |uu: f64| {
            let q = Vec3::new(uu, 0.2, 0.3 * (uu * 0.2f64).sin());
            let a = Vec3::new(1.0, 0.0, 0.3 * 0.2 * (uu * 0.2f64).cos());
            let b = Vec3::new(0.0, 1.0, 0.3 * uu * (uu * 0.2f64).cos());
            unit_normal(&m.inverse(&q).unwrap(), &a, &b, &Vec3::z())
        };
        let fd = (at(0.3 + h) - at(0.3 - h)) / (2.0 * h);
        assert!((d_u(&n) - fd).norm() < 1e-8);
    }
}
