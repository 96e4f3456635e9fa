//! The spherical-cap metric family on the closed unit ball.
//!
//! For `|t| < 1` the ball is the pullback of a cap of the round 3-sphere of
//! radius `1/|t|`:
//!
//! ```text
//! g_t(x) = δ + t²/(1 − t²|x|²) x⊗x
//! ```
//!
//! All derivatives below are hand-differentiated from this closed form.
//! Writing `q = 1 − t²|x|²` and `c = t²/q`, one has `∂_k c = c1 x_k` with
//! `c1 = 2t⁴/q²`, and `∂_m c1 = c2 x_m` with `c2 = 8t⁶/q³`. The inverse metric
//! is `δ − t² x⊗x`.

use nalgebra::{Cholesky, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::{Mat3, Vec3};

/// `Γ^k_{ij}` stored as `gamma[k][i][j]`.
pub type Christoffel = [[[f64; 3]; 3]; 3];
/// `∂_k g_{ij}` stored as `dg[k][i][j]`.
pub type MetricGradient = [[[f64; 3]; 3]; 3];
/// `∂_m ∂_k g_{ij}` stored as `d2g[m][k][i][j]`.
pub type MetricHessian = [[[[f64; 3]; 3]; 3]; 3];

/// A Riemannian metric on (a neighbourhood of) the closed ball.
pub trait AmbientMetric {
    fn metric(&self, x: &Vec3) -> Result<Mat3>;
    fn christoffel(&self, x: &Vec3) -> Result<Christoffel>;
    fn inverse(&self, x: &Vec3) -> Result<Mat3> {
        self.metric(x)?
            .try_inverse()
            .ok_or_else(|| Error::Discretization("singular metric".into()))
    }
}

/// Full evaluation of `g_t` and its geometry at one point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSample {
    pub t: f64,
    pub x: [f64; 3],
    pub g: Mat3,
    pub dg: MetricGradient,
    pub gamma: Christoffel,
    pub ric: Mat3,
}

impl MetricSample {
    pub fn at(t: f64, x: &Vec3) -> Result<Self> {
        let jet = cap_metric_jet(t, x)?;
        Ok(MetricSample {
            t,
            x: [x[0], x[1], x[2]],
            g: jet.g,
            dg: jet.dg,
            gamma: jet.christoffel(),
            ric: jet.ricci(),
        })
    }
}

/// The metric `g_t` as an [`AmbientMetric`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapMetric {
    pub t: f64,
}

impl CapMetric {
    pub fn new(t: f64) -> Result<Self> {
        if !(t.abs() < 1.0) {
            return Err(Error::InvalidArgument(format!("|t| must be < 1, got {t}")));
        }
        Ok(CapMetric { t })
    }

    pub fn euclidean() -> Self {
        CapMetric { t: 0.0 }
    }

    /// `g_t`, evaluated on any scalar type.
    pub fn metric_generic<T: Scalar>(&self, x: &[T; 3]) -> [[T; 3]; 3] {
        let t2 = T::cst(self.t * self.t);
        let q = T::cst(1.0) - t2 * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
        let c = t2 / q;
        let mut out = [[T::cst(0.0); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let delta = if i == j { 1.0 } else { 0.0 };
                out[i][j] = T::cst(delta) + c * x[i] * x[j];
            }
        }
        out
    }

    /// `g_t^{-1} = δ − t² x⊗x`, evaluated on any scalar type.
    pub fn inverse_generic<T: Scalar>(&self, x: &[T; 3]) -> [[T; 3]; 3] {
        let t2 = T::cst(self.t * self.t);
        let mut out = [[T::cst(0.0); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let delta = if i == j { 1.0 } else { 0.0 };
                out[i][j] = T::cst(delta) - t2 * x[i] * x[j];
            }
        }
        out
    }
}

impl AmbientMetric for CapMetric {
    fn metric(&self, x: &Vec3) -> Result<Mat3> {
        metric_at(self.t, x)
    }
    fn christoffel(&self, x: &Vec3) -> Result<Christoffel> {
        christoffel(self.t, x)
    }
    fn inverse(&self, x: &Vec3) -> Result<Mat3> {
        check_domain(self.t, x)?;
        Ok(Mat3::identity() - self.t * self.t * x * x.transpose())
    }
}

fn check_domain(t: f64, x: &Vec3) -> Result<f64> {
    let s = t * t * x.norm_squared();
    if s >= 1.0 || !s.is_finite() {
        return Err(Error::MetricDomain(s));
    }
    Ok(1.0 - s)
}

pub fn metric_at(t: f64, x: &Vec3) -> Result<Mat3> {
    let q = check_domain(t, x)?;
    let c = t * t / q;
    Ok(Mat3::identity() + c * x * x.transpose())
}

/// The cap embedding into `R⁴`; its image lies on the sphere of radius
/// `1/|t|` centred at `(0, 0, 0, −1/t)`.
pub fn embed_sphere(t: f64, x: &Vec3) -> Result<[f64; 4]> {
    if t == 0.0 {
        return Err(Error::InvalidArgument(
            "embed_sphere is singular at t = 0; use embed_flat".into(),
        ));
    }
    if x.norm() > 1.0 + 1e-12 {
        return Err(Error::InvalidArgument("point outside the closed ball".into()));
    }
    let r2 = x.norm_squared();
    let w = -1.0 / t + t.signum() * (1.0 / (t * t) - r2).sqrt();
    Ok([x[0], x[1], x[2], w])
}

/// The `t = 0` limit of [`embed_sphere`].
pub fn embed_flat(x: &Vec3) -> [f64; 4] {
    [x[0], x[1], x[2], 0.0]
}

/// Centre of the sphere containing the image of [`embed_sphere`].
pub fn sphere_center(t: f64) -> [f64; 4] {
    [0.0, 0.0, 0.0, -1.0 / t]
}

/// The metric together with its first and second coordinate derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricJet {
    pub g: Mat3,
    pub dg: MetricGradient,
    pub d2g: MetricHessian,
}

pub fn cap_metric_jet(t: f64, x: &Vec3) -> Result<MetricJet> {
    let q = check_domain(t, x)?;
    let t2 = t * t;
    let c = t2 / q;
    let c1 = 2.0 * t2 * t2 / (q * q);
    let c2 = 8.0 * t2 * t2 * t2 / (q * q * q);
    let d = |i: usize, j: usize| if i == j { 1.0 } else { 0.0 };
    let g = Mat3::identity() + c * x * x.transpose();
    let mut dg = [[[0.0; 3]; 3]; 3];
    let mut d2g = [[[[0.0; 3]; 3]; 3]; 3];
    for k in 0..3 {
        for i in 0..3 {
            for j in 0..3 {
                dg[k][i][j] = c1 * x[k] * x[i] * x[j] + c * (d(i, k) * x[j] + d(j, k) * x[i]);
                for m in 0..3 {
                    d2g[m][k][i][j] = (c1 * d(m, k) + c2 * x[m] * x[k]) * x[i] * x[j]
                        + c1 * x[k] * (d(i, m) * x[j] + d(j, m) * x[i])
                        + c1 * x[m] * (d(i, k) * x[j] + d(j, k) * x[i])
                        + c * (d(i, k) * d(j, m) + d(j, k) * d(i, m));
                }
            }
        }
    }
    Ok(MetricJet { g, dg, d2g })
}

pub fn christoffel_from_first_jet(g: &Mat3, dg: &MetricGradient) -> Result<Christoffel> {
    let ginv = g
        .try_inverse()
        .ok_or_else(|| Error::Discretization("singular metric".into()))?;
    Ok(christoffel_with_inverse(&ginv, dg))
}

fn christoffel_with_inverse(ginv: &Mat3, dg: &MetricGradient) -> Christoffel {
    let mut gamma = [[[0.0; 3]; 3]; 3];
    for k in 0..3 {
        for i in 0..3 {
            for j in 0..3 {
                let mut s = 0.0;
                for l in 0..3 {
                    s += ginv[(k, l)] * (dg[i][j][l] + dg[j][i][l] - dg[l][i][j]);
                }
                gamma[k][i][j] = 0.5 * s;
            }
        }
    }
    gamma
}

impl MetricJet {
    pub fn christoffel(&self) -> Christoffel {
        let ginv = self.g.try_inverse().expect("metric jets are positive definite");
        christoffel_with_inverse(&ginv, &self.dg)
    }

    /// Ricci tensor from the 2-jet,
    /// `R_ij = ∂_k Γ^k_ij − ∂_j Γ^k_ik + Γ^k_kl Γ^l_ij − Γ^k_jl Γ^l_ik`.
    pub fn ricci(&self) -> Mat3 {
        let ginv = self.g.try_inverse().expect("metric jets are positive definite");
        let gamma = christoffel_with_inverse(&ginv, &self.dg);
        // ∂_m g^{kl} = −g^{ka} ∂_m g_ab g^{bl}
        let mut dginv = [[[0.0; 3]; 3]; 3];
        for m in 0..3 {
            let dm = Mat3::from_fn(|a, b| self.dg[m][a][b]);
            let prod = -(ginv * dm * ginv);
            for k in 0..3 {
                for l in 0..3 {
                    dginv[m][k][l] = prod[(k, l)];
                }
            }
        }
        // dgamma[m][k][i][j] = ∂_m Γ^k_ij
        let mut dgamma = [[[[0.0; 3]; 3]; 3]; 3];
        for m in 0..3 {
            for k in 0..3 {
                for i in 0..3 {
                    for j in 0..3 {
                        let mut s = 0.0;
                        for l in 0..3 {
                            let lowered = self.dg[i][j][l] + self.dg[j][i][l] - self.dg[l][i][j];
                            let dlowered =
                                self.d2g[m][i][j][l] + self.d2g[m][j][i][l] - self.d2g[m][l][i][j];
                            s += dginv[m][k][l] * lowered + ginv[(k, l)] * dlowered;
                        }
                        dgamma[m][k][i][j] = 0.5 * s;
                    }
                }
            }
        }
        Mat3::from_fn(|i, j| {
            let mut r = 0.0;
            for k in 0..3 {
                r += dgamma[k][k][i][j] - dgamma[j][k][i][k];
                for l in 0..3 {
                    r += gamma[k][k][l] * gamma[l][i][j] - gamma[k][j][l] * gamma[l][i][k];
                }
            }
            r
        })
    }

    /// The jet of `w·g` for a positive scalar `w` with gradient `dw` and
    /// Hessian `d2w` at the same point.
    pub fn scaled(&self, w: f64, dw: &Vec3, d2w: &Mat3) -> MetricJet {
        let mut dg = [[[0.0; 3]; 3]; 3];
        let mut d2g = [[[[0.0; 3]; 3]; 3]; 3];
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    dg[k][i][j] = dw[k] * self.g[(i, j)] + w * self.dg[k][i][j];
                    for m in 0..3 {
                        d2g[m][k][i][j] = d2w[(m, k)] * self.g[(i, j)]
                            + dw[k] * self.dg[m][i][j]
                            + dw[m] * self.dg[k][i][j]
                            + w * self.d2g[m][k][i][j];
                    }
                }
            }
        }
        MetricJet { g: self.g * w, dg, d2g }
    }
}

pub fn christoffel(t: f64, x: &Vec3) -> Result<Christoffel> {
    let jet = cap_metric_jet(t, x)?;
    let ginv = Mat3::identity() - t * t * x * x.transpose();
    Ok(christoffel_with_inverse(&ginv, &jet.dg))
}

pub fn ricci_at(t: f64, x: &Vec3) -> Result<Mat3> {
    Ok(cap_metric_jet(t, x)?.ricci())
}

/// A scalar field on the ball with gradient and Hessian access.
pub trait AmbientScalar {
    fn value(&self, x: &Vec3) -> f64;
    fn gradient(&self, x: &Vec3) -> Vec3;
    fn hessian(&self, x: &Vec3) -> Mat3;
}

type ValueFn = Box<dyn Fn(&Vec3) -> f64 + Send + Sync>;
type GradFn = Box<dyn Fn(&Vec3) -> Vec3 + Send + Sync>;
type HessFn = Box<dyn Fn(&Vec3) -> Mat3 + Send + Sync>;

/// A field supplied together with closed-form derivatives.
pub struct AnalyticField {
    pub name: String,
    value: ValueFn,
    gradient: GradFn,
    hessian: HessFn,
}

impl AnalyticField {
    pub fn new(
        name: impl Into<String>,
        value: impl Fn(&Vec3) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(&Vec3) -> Vec3 + Send + Sync + 'static,
        hessian: impl Fn(&Vec3) -> Mat3 + Send + Sync + 'static,
    ) -> Self {
        AnalyticField {
            name: name.into(),
            value: Box::new(value),
            gradient: Box::new(gradient),
            hessian: Box::new(hessian),
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::new("constant", move |_| c, |_| Vec3::zeros(), |_| Mat3::zeros())
    }

    pub fn norm_squared() -> Self {
        Self::new("|x|^2", |x| x.norm_squared(), |x| 2.0 * x, |_| 2.0 * Mat3::identity())
    }

    pub fn coordinate(i: usize) -> Self {
        Self::new(
            format!("x{}", i + 1),
            move |x| x[i],
            move |_| {
                let mut g = Vec3::zeros();
                g[i] = 1.0;
                g
            },
            |_| Mat3::zeros(),
        )
    }
}

impl AmbientScalar for AnalyticField {
    fn value(&self, x: &Vec3) -> f64 {
        (self.value)(x)
    }
    fn gradient(&self, x: &Vec3) -> Vec3 {
        (self.gradient)(x)
    }
    fn hessian(&self, x: &Vec3) -> Mat3 {
        (self.hessian)(x)
    }
}

/// A field whose derivatives are taken by centred differences with a fixed
/// step.
pub struct FdField {
    value: ValueFn,
    pub step: f64,
}

impl FdField {
    pub fn new(value: impl Fn(&Vec3) -> f64 + Send + Sync + 'static, step: f64) -> Self {
        FdField { value: Box::new(value), step }
    }
}

impl AmbientScalar for FdField {
    fn value(&self, x: &Vec3) -> f64 {
        (self.value)(x)
    }
    fn gradient(&self, x: &Vec3) -> Vec3 {
        let h = self.step;
        Vec3::from_fn(|i, _| {
            let mut e = Vec3::zeros();
            e[i] = h;
            ((self.value)(&(x + e)) - (self.value)(&(x - e))) / (2.0 * h)
        })
    }
    fn hessian(&self, x: &Vec3) -> Mat3 {
        let h = self.step;
        let f = &self.value;
        Mat3::from_fn(|i, j| {
            let mut ei = Vec3::zeros();
            let mut ej = Vec3::zeros();
            ei[i] = h;
            ej[j] = h;
            (f(&(x + ei + ej)) - f(&(x + ei - ej)) - f(&(x - ei + ej)) + f(&(x - ei - ej)))
                / (4.0 * h * h)
        })
    }
}

/// Riemannian Hessian `∂_i∂_j h − Γ^k_ij ∂_k h`.
pub fn hessian_in_metric(gamma: &Christoffel, grad: &Vec3, hess: &Mat3) -> Mat3 {
    Mat3::from_fn(|i, j| {
        let mut s = hess[(i, j)];
        for k in 0..3 {
            s -= gamma[k][i][j] * grad[k];
        }
        s
    })
}

/// `(n − 2) Hess h + (Δh) g` in dimension `n = 3`, the first variation of the
/// Ricci tensor along `s ↦ e^{−2sh} g_t`.
pub fn conformal_ricci_derivative(h: &dyn AmbientScalar, t: f64, x: &Vec3) -> Result<Mat3> {
    let g = metric_at(t, x)?;
    let gamma = christoffel(t, x)?;
    let ginv = Mat3::identity() - t * t * x * x.transpose();
    let hess = hessian_in_metric(&gamma, &h.gradient(x), &h.hessian(x));
    let lap = (ginv * hess).trace();
    Ok(hess + lap * g)
}

/// Smallest eigenvalue of `Hess_{g_t}(|x|²)` relative to `g_t` over a fixed
/// sample of the closed ball: 11 radii times 200 quasi-uniform directions.
pub fn convexity_margin(t: f64) -> Result<f64> {
    CapMetric::new(t)?;
    let field = AnalyticField::norm_squared();
    let mut margin = f64::INFINITY;
    for x in convexity_sample() {
        let g = metric_at(t, &x)?;
        let gamma = christoffel(t, &x)?;
        let hess = hessian_in_metric(&gamma, &field.gradient(&x), &field.hessian(&x));
        let l = Cholesky::new(g)
            .ok_or_else(|| Error::Discretization("metric not positive definite".into()))?
            .l();
        let linv = l.try_inverse().expect("cholesky factor is invertible");
        let reduced = linv * hess * linv.transpose();
        let reduced = 0.5 * (reduced + reduced.transpose());
        let eig = SymmetricEigen::new(reduced).eigenvalues.min();
        margin = margin.min(eig);
    }
    Ok(margin)
}

fn convexity_sample() -> Vec<Vec3> {
    let dirs = fibonacci_sphere(200);
    let mut out = vec![Vec3::zeros()];
    for i in 1..=10 {
        let r = i as f64 / 10.0;
        out.extend(dirs.iter().map(|d| d * r));
    }
    out
}

/// Quasi-uniform points on the unit sphere.
pub fn fibonacci_sphere(n: usize) -> Vec<Vec3> {
    let golden = std::f64::consts::PI * (3.0 - 5.0f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            Vec3::new(r * phi.cos(), r * phi.sin(), z)
        })
        .collect()
}

/// `e^{sφ} g` for a base metric `g`.
pub struct ConformalMetric<'a, M: AmbientMetric, F: AmbientScalar + ?Sized> {
    pub base: &'a M,
    pub field: &'a F,
    pub s: f64,
}

impl<M: AmbientMetric, F: AmbientScalar + ?Sized> AmbientMetric for ConformalMetric<'_, M, F> {
    fn metric(&self, x: &Vec3) -> Result<Mat3> {
        Ok(self.base.metric(x)? * (self.s * self.field.value(x)).exp())
    }

    fn christoffel(&self, x: &Vec3) -> Result<Christoffel> {
        // e^{2w} g with w = sφ/2
        let mut gamma = self.base.christoffel(x)?;
        let g = self.base.metric(x)?;
        let dw = 0.5 * self.s * self.field.gradient(x);
        let raised = self.base.inverse(x)? * dw;
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    let mut add = -g[(i, j)] * raised[k];
                    if k == i {
                        add += dw[j];
                    }
                    if k == j {
                        add += dw[i];
                    }
                    gamma[k][i][j] += add;
                }
            }
        }
        Ok(gamma)
    }

    fn inverse(&self, x: &Vec3) -> Result<Mat3> {
        Ok(self.base.inverse(x)? * (-self.s * self.field.value(x)).exp())
    }
}

/// A metric given by closures for `g` and `∂g`; Christoffel symbols follow
/// from the first jet.
pub struct JetMetric<G, D>
where
    G: Fn(&Vec3) -> Mat3,
    D: Fn(&Vec3) -> MetricGradient,
{
    pub metric: G,
    pub gradient: D,
}

impl<G, D> AmbientMetric for JetMetric<G, D>
where
    G: Fn(&Vec3) -> Mat3,
    D: Fn(&Vec3) -> MetricGradient,
{
    fn metric(&self, x: &Vec3) -> Result<Mat3> {
        Ok((self.metric)(x))
    }
    fn christoffel(&self, x: &Vec3) -> Result<Christoffel> {
        christoffel_from_first_jet(&(self.metric)(x), &(self.gradient)(x))
    }
}
