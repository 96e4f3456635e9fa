//! Conformal variation formulas and the normal-perturbation check of the
//! closed-form Jacobi operators.
//!
//! Along `g_s = e^{sφ} g` the mean curvature of a fixed surface varies by
//! `dφ(N) − ½ φ H` at `s = 0`, while the boundary angle is unchanged to first
//! order. Along a normal displacement `e + εφN` the first variations of
//! `(H, Θ)` are `(J^h φ, J^θ φ)`; both are checked here by centred
//! differences of the fully nonlinear quantities.

use serde::{Deserialize, Serialize};

use super::{Grid, SurfaceFunction};
use crate::capmetric::{AmbientMetric, AmbientScalar, CapMetric};
use crate::error::{Error, Result};
use crate::geometry::{self, normal_jet};
use crate::rotprofile::{solve_t0, Profile};
use crate::scalar::{Jet, Scalar};
use crate::spectrum::SurfaceKind;
use crate::Vec3;

/// A parametrized surface patch: position and both tangents as jets.
pub trait SurfacePatch {
    /// `[X, X_u, X_v]` at `(u, v)`.
    fn frame(&self, u: f64, v: f64) -> Result<[[Jet; 3]; 3]>;
    /// Sign turning `X_u × X_v` into the chosen normal.
    fn normal_sign(&self) -> f64;
}

/// The equatorial disk in polar coordinates, normal `+e3`.
#[derive(Debug, Clone, Copy, Default)]
pub struct DiskPatch;

impl SurfacePatch for DiskPatch {
    fn frame(&self, u: f64, v: f64) -> Result<[[Jet; 3]; 3]> {
        if u <= 0.0 {
            return Err(Error::InvalidArgument("polar patch is singular at r = 0".into()));
        }
        let (r, th) = (Jet::var_u(u), Jet::var_v(v));
        let zero = Jet::constant(0.0);
        Ok([
            [r * th.cos(), r * th.sin(), zero],
            [th.cos(), th.sin(), zero],
            [-(r * th.sin()), r * th.cos(), zero],
        ])
    }
    fn normal_sign(&self) -> f64 {
        1.0
    }
}

/// `e_cat(t, θ) = r0⁻¹(cosh t cos θ, cosh t sin θ, t)`, normal away from the
/// axis.
#[derive(Debug, Clone, Copy)]
pub struct CatenoidPatch {
    pub r0: f64,
}

impl Default for CatenoidPatch {
    fn default() -> Self {
        CatenoidPatch { r0: solve_t0().r0 }
    }
}

impl SurfacePatch for CatenoidPatch {
    fn frame(&self, u: f64, v: f64) -> Result<[[Jet; 3]; 3]> {
        let (t, th) = (Jet::var_u(u), Jet::var_v(v));
        let k = Jet::constant(1.0 / self.r0);
        Ok([
            [k * t.cosh() * th.cos(), k * t.cosh() * th.sin(), k * t],
            [k * t.sinh() * th.cos(), k * t.sinh() * th.sin(), k],
            [-(k * t.cosh() * th.sin()), k * t.cosh() * th.cos(), Jet::constant(0.0)],
        ])
    }
    fn normal_sign(&self) -> f64 {
        -1.0
    }
}

/// The revolution surface of a computed profile, `(ρ(z) cos θ, ρ(z) sin θ, z)`,
/// normal away from the axis.
#[derive(Debug, Clone, Copy)]
pub struct RotationalPatch<'a> {
    pub profile: &'a Profile,
}

impl SurfacePatch for RotationalPatch<'_> {
    fn frame(&self, u: f64, v: f64) -> Result<[[Jet; 3]; 3]> {
        let [rho, p, pp, ppp] = self.profile.derivatives_at(u)?;
        let r = Jet { v: rho, du: p, duu: pp, ..Default::default() };
        let dr = Jet { v: p, du: pp, duu: ppp, ..Default::default() };
        let th = Jet::var_v(v);
        Ok([
            [r * th.cos(), r * th.sin(), Jet::var_u(u)],
            [dr * th.cos(), dr * th.sin(), Jet::constant(1.0)],
            [-(r * th.sin()), r * th.cos(), Jet::constant(0.0)],
        ])
    }
    fn normal_sign(&self) -> f64 {
        -1.0
    }
}

/// Position and unit normal (in `metric`) as jets.
pub fn position_and_normal(
    patch: &dyn SurfacePatch,
    metric: &CapMetric,
    u: f64,
    v: f64,
) -> Result<([Jet; 3], [Jet; 3])> {
    let [x, xu, xv] = patch.frame(u, v)?;
    let n = normal_jet(metric, &x, &xu, &xv, patch.normal_sign());
    Ok((x, n))
}

fn displaced(x: &[Jet; 3], n: &[Jet; 3], phi: Jet, eps: f64) -> [Jet; 3] {
    let e = Jet::constant(eps);
    [x[0] + e * phi * n[0], x[1] + e * phi * n[1], x[2] + e * phi * n[2]]
}

/// Mean curvature at `(u, v)` of the surface displaced by `ε φ N`.
pub fn displaced_mean_curvature(
    patch: &dyn SurfacePatch,
    metric: &CapMetric,
    phi: &dyn Fn(Jet, Jet) -> Jet,
    u: f64,
    v: f64,
    eps: f64,
) -> Result<f64> {
    let (x, n) = position_and_normal(patch, metric, u, v)?;
    let y = displaced(&x, &n, phi(Jet::var_u(u), Jet::var_v(v)), eps);
    geometry::mean_curvature(metric, &y, &geometry::value(&n))
}

/// Boundary angle at `(u, v)` of the surface displaced by `ε φ N`.
pub fn displaced_boundary_angle(
    patch: &dyn SurfacePatch,
    metric: &CapMetric,
    phi: &dyn Fn(Jet, Jet) -> Jet,
    u: f64,
    v: f64,
    eps: f64,
) -> Result<f64> {
    let (x, n) = position_and_normal(patch, metric, u, v)?;
    let y = displaced(&x, &n, phi(Jet::var_u(u), Jet::var_v(v)), eps);
    let p = geometry::value(&y);
    let ginv = metric.inverse(&p)?;
    let normal = geometry::unit_normal(&ginv, &geometry::d_u(&y), &geometry::d_v(&y), &geometry::value(&n));
    geometry::boundary_angle(metric, &p, &normal)
}

/// Position and Euclidean unit normal of the disk or catenoid at grid
/// coordinates `(a, θ)`.
pub fn surface_point(surface: SurfaceKind, a: f64, theta: f64) -> (Vec3, Vec3) {
    match surface {
        SurfaceKind::Disk => (Vec3::new(a * theta.cos(), a * theta.sin(), 0.0), Vec3::z()),
        SurfaceKind::Catenoid => {
            let r0 = solve_t0().r0;
            let (c, s) = (theta.cos(), theta.sin());
            (
                Vec3::new(a.cosh() * c, a.cosh() * s, a) / r0,
                Vec3::new(c / a.cosh(), s / a.cosh(), -a.tanh()),
            )
        }
    }
}

fn patch_for(surface: SurfaceKind) -> Box<dyn SurfacePatch> {
    match surface {
        SurfaceKind::Disk => Box::new(DiskPatch),
        SurfaceKind::Catenoid => Box::new(CatenoidPatch::default()),
    }
}

/// Mean curvature of the fixed disk or catenoid at `(a, θ)` in an arbitrary
/// ambient metric, normal oriented as in the Euclidean picture.
pub fn surface_mean_curvature(
    surface: SurfaceKind,
    metric: &dyn AmbientMetric,
    a: f64,
    theta: f64,
) -> Result<f64> {
    let [x, _, _] = match surface {
        // the Cartesian chart avoids the polar singularity at the centre
        SurfaceKind::Disk => {
            let (u, v) = (Jet::var_u(a * theta.cos()), Jet::var_v(a * theta.sin()));
            [[u, v, Jet::constant(0.0)]; 3]
        }
        SurfaceKind::Catenoid => patch_for(surface).frame(a, theta)?,
    };
    let (_, orient) = surface_point(surface, a, theta);
    geometry::mean_curvature(metric, &x, &orient)
}

/// Boundary angle of the fixed disk or catenoid at a boundary point `(a, θ)`
/// in an arbitrary ambient metric.
pub fn surface_boundary_angle(
    surface: SurfaceKind,
    metric: &dyn AmbientMetric,
    a: f64,
    theta: f64,
) -> Result<f64> {
    let [x, xu, xv] = patch_for(surface).frame(a, theta)?;
    let p = geometry::value(&x);
    let (_, orient) = surface_point(surface, a, theta);
    let n = geometry::unit_normal(&metric.inverse(&p)?, &geometry::value(&xu), &geometry::value(&xv), &orient);
    geometry::boundary_angle(metric, &p, &n)
}

/// `dφ(N) − ½ φ H` on the grid, with `H` the Euclidean mean curvature of the
/// surface (zero up to rounding for both surfaces).
pub fn conformal_h_variation(
    surface: SurfaceKind,
    phi: &dyn AmbientScalar,
    grid: &Grid,
) -> Result<SurfaceFunction> {
    let flat = CapMetric::euclidean();
    let mut values = Vec::new();
    for &a in grid.rows() {
        for j in 0..grid.n_theta() {
            let th = grid.theta(j);
            let (p, n) = surface_point(surface, a, th);
            let h = surface_mean_curvature(surface, &flat, a, th)?;
            values.push(phi.gradient(&p).dot(&n) - 0.5 * phi.value(&p) * h);
        }
    }
    Ok(SurfaceFunction { grid: grid.clone(), values })
}

/// The first variation of `Θ` along `e^{sφ} g`: identically zero, one value
/// per boundary point (`n_theta` on the disk, `2 n_theta` on the catenoid).
pub fn conformal_theta_variation(surface: SurfaceKind, _phi: &dyn AmbientScalar, n_theta: usize) -> Vec<f64> {
    match surface {
        SurfaceKind::Disk => vec![0.0; n_theta],
        SurfaceKind::Catenoid => vec![0.0; 2 * n_theta],
    }
}

/// A comparison of a closed-form Jacobi value with its finite-difference
/// counterpart at one point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCheck {
    pub a: f64,
    pub theta: f64,
    pub closed_form: f64,
    pub fd: f64,
    pub fd_half: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalPerturbationReport {
    pub eps: f64,
    pub interior: Vec<PointCheck>,
    pub boundary: Vec<PointCheck>,
    /// `max |fd − closed|` divided by `max |closed|` (interior points).
    pub rel_error_h: f64,
    pub rel_error_theta: f64,
    /// Largest `|fd|` anywhere; the figure of merit for kernel elements.
    pub max_abs_fd: f64,
    /// Ratio of the interior errors at `ε` and `ε/2`.
    pub error_ratio: f64,
}

/// Closed-form `(J^h φ, J^θ φ)` of the Euclidean disk or catenoid from a jet
/// of `φ` in grid coordinates. `upper` selects the end for the catenoid.
pub fn closed_form_jacobi(surface: SurfaceKind, a: f64, phi: Jet, upper: bool) -> (f64, f64) {
    match surface {
        SurfaceKind::Disk => {
            let lap = phi.duu + phi.du / a + phi.dvv / (a * a);
            (-lap, phi.v - phi.du)
        }
        SurfaceKind::Catenoid => {
            let c = solve_t0();
            let sech2 = 1.0 / a.cosh().powi(2);
            let h = -c.r0 * c.r0 * sech2 * (phi.duu + phi.dvv + 2.0 * sech2 * phi.v);
            let theta = if upper { phi.v - c.t0 * phi.du } else { phi.v + c.t0 * phi.du };
            (h, theta)
        }
    }
}

/// Checks the closed-form Jacobi operators of the Euclidean disk or catenoid
/// against centred differences of `H` and `Θ` along `e + εφN`. `phi` is a
/// function of the grid coordinates.
pub fn normal_perturbation_fd_check(
    surface: SurfaceKind,
    phi: &dyn Fn(Jet, Jet) -> Jet,
    eps: f64,
) -> Result<NormalPerturbationReport> {
    let flat = CapMetric::euclidean();
    let patch = patch_for(surface);
    let c = solve_t0();
    let thetas = [0.3, 1.9, 4.0];
    let (interior_rows, boundary_rows): (Vec<f64>, Vec<(f64, bool)>) = match surface {
        SurfaceKind::Disk => (vec![0.2, 0.5, 0.8], vec![(1.0, true)]),
        SurfaceKind::Catenoid => (vec![-0.9, 0.0, 0.6, 1.1], vec![(-c.t0, false), (c.t0, true)]),
    };
    let centred = |f: &dyn Fn(f64) -> Result<f64>, e: f64| -> Result<f64> {
        Ok((f(e)? - f(-e)?) / (2.0 * e))
    };
    let mut interior = Vec::new();
    for &a in &interior_rows {
        for &th in &thetas {
            let jet = phi(Jet::var_u(a), Jet::var_v(th));
            let (cf, _) = closed_form_jacobi(surface, a, jet, true);
            let f = |e: f64| displaced_mean_curvature(patch.as_ref(), &flat, phi, a, th, e);
            interior.push(PointCheck {
                a,
                theta: th,
                closed_form: cf,
                fd: centred(&f, eps)?,
                fd_half: centred(&f, 0.5 * eps)?,
            });
        }
    }
    let mut boundary = Vec::new();
    for &(a, upper) in &boundary_rows {
        for &th in &thetas {
            let jet = phi(Jet::var_u(a), Jet::var_v(th));
            let (_, cf) = closed_form_jacobi(surface, a, jet, upper);
            let f = |e: f64| displaced_boundary_angle(patch.as_ref(), &flat, phi, a, th, e);
            boundary.push(PointCheck {
                a,
                theta: th,
                closed_form: cf,
                fd: centred(&f, eps)?,
                fd_half: centred(&f, 0.5 * eps)?,
            });
        }
    }
    let rel = |checks: &[PointCheck]| {
        let scale = checks.iter().fold(0.0f64, |m, p| m.max(p.closed_form.abs()));
        let err = checks.iter().fold(0.0f64, |m, p| m.max((p.fd - p.closed_form).abs()));
        if scale > 0.0 {
            err / scale
        } else {
            err
        }
    };
    let err = |checks: &[PointCheck], half: bool| {
        checks.iter().fold(0.0f64, |m, p| {
            let v = if half { p.fd_half } else { p.fd };
            m.max((v - p.closed_form).abs())
        })
    };
    let max_abs_fd = interior.iter().chain(&boundary).fold(0.0f64, |m, p| m.max(p.fd.abs()));
    Ok(NormalPerturbationReport {
        eps,
        rel_error_h: rel(&interior),
        rel_error_theta: rel(&boundary),
        max_abs_fd,
        error_ratio: err(&interior, false) / err(&interior, true),
        interior,
        boundary,
    })
}

/// The Jacobi field `g(e1 × X, N)` generated by rotations about the `x1`
/// axis, which are isometries of every `g_t`.
pub fn rotation_field(metric: &CapMetric, x: &[Jet; 3], n: &[Jet; 3]) -> Jet {
    let k = [Jet::constant(0.0), -x[2], x[1]];
    let g = metric.metric_generic(x);
    let mut out = Jet::constant(0.0);
    for i in 0..3 {
        for j in 0..3 {
            out = out + k[i] * g[i][j] * n[j];
        }
    }
    out
}
