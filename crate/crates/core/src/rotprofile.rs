//! Surfaces of revolution about the `x3` axis.
//!
//! A profile is the graph `ρ(z)` of the distance to the axis over the axial
//! coordinate `z`, so the surface is `(ρ(z) cos θ, ρ(z) sin θ, z)`. Normals
//! point away from the axis.
//!
//! The minimal profile equation in `g_t` is the Euler–Lagrange equation of
//! the rotational area `2π ∫ ρ √S dz` with
//! `S = 1 + ρ'² + c (ρρ' + z)²` and `c = t²/(1 − t²(ρ² + z²))`.

use serde::{Deserialize, Serialize};

use crate::capmetric::CapMetric;
use crate::error::{Error, Result};
use crate::geometry;
use crate::linalg::bisect;
use crate::ode::rk4_step;
use crate::scalar::{Jet, Scalar};
use crate::Vec3;

/// The positive root of `t = coth t` and the scale of the critical catenoid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalConstants {
    pub t0: f64,
    pub r0: f64,
}

pub fn solve_t0() -> CriticalConstants {
    let f = |t: f64| t - 1.0 / t.tanh();
    let mut t = bisect(f, 1.0, 2.0, 1e-13).expect("t - coth t changes sign on [1, 2]");
    for _ in 0..3 {
        let sh = t.sinh();
        let df = 1.0 + 1.0 / (sh * sh);
        let step = f(t) / df;
        t -= step;
        if step.abs() < 1e-17 {
            break;
        }
    }
    CriticalConstants { t0: t, r0: t * t.cosh() }
}

/// `(a⁻¹ cosh(as + b), sinh(as + b))`.
pub fn euclid_catenoid(a: f64, b: f64, s: f64) -> (f64, f64) {
    let w = a * s + b;
    (w.cosh() / a, w.sinh())
}

fn revolution_jet(s: f64, rho: f64, drho: f64, ddrho: f64) -> [Jet; 3] {
    let r = Jet { v: rho, du: drho, duu: ddrho, ..Default::default() };
    let theta = Jet::var_v(0.0);
    [r * theta.cos(), r * theta.sin(), Jet::var_u(s)]
}

/// Mean curvature in `g_t` of the revolution surface through the profile
/// point `(s, ρ, ρ', ρ'')`, evaluated on the meridian `θ = 0`.
pub fn mean_curvature_rot(t: f64, s: f64, rho: f64, drho: f64, ddrho: f64) -> Result<f64> {
    if rho * rho + s * s > 1.0 + 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "profile point ({rho}, {s}) lies outside the ball"
        )));
    }
    let metric = CapMetric::new(t)?;
    let x = revolution_jet(s, rho, drho, ddrho);
    geometry::mean_curvature(&metric, &x, &Vec3::x())
}

/// Mean curvature in `g_t` of the graph `x3 = w(x1, x2)` at `(x1, x2)`, with
/// the normal oriented towards `+x3`. `w` carries value and derivatives.
pub fn mean_curvature_graph(t: f64, x1: f64, x2: f64, w: Jet) -> Result<f64> {
    let metric = CapMetric::new(t)?;
    let x = [Jet::var_u(x1), Jet::var_v(x2), w];
    geometry::mean_curvature(&metric, &x, &Vec3::z())
}

/// Second derivative `ρ''` of a minimal profile in `g_t`.
pub fn profile_rhs<T: Scalar>(t: f64, z: T, rho: T, p: T) -> T {
    let t2 = T::cst(t * t);
    let one = T::cst(1.0);
    let two = T::cst(2.0);
    let half = T::cst(0.5);
    let q = one - t2 * (rho * rho + z * z);
    let c = t2 / q;
    let c2 = c * c;
    let u = rho * p + z;
    let s = one + p * p + c * u * u;
    let rs = s.sqrt();
    let s32 = s * rs;
    let a = p + c * u * rho;

    let a_rho = two * c2 * rho * rho * u + c * p * rho + c * u;
    let s_rho = two * c2 * rho * u * u + two * c * u * p;
    let a_z = two * c2 * z * u * rho + c * rho;
    let s_z = two * c2 * z * u * u + two * c * u;

    let l_pp = rho * ((one + c * rho * rho) * s - a * a) / s32;
    let l_prho = a / rs + rho * a_rho / rs - half * rho * a * s_rho / s32;
    let l_pz = rho * a_z / rs - half * rho * a * s_z / s32;
    let l_rho = rs + half * rho * s_rho / rs;
    (l_rho - l_prho * p - l_pz) / l_pp
}

/// Which end of a profile meets the sphere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Upper,
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileSample {
    pub s: f64,
    pub rho: f64,
    pub drho: f64,
}

/// A minimal profile in `g_t`, sampled on a fixed step from the apex out to
/// both exits from the ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub a: f64,
    pub b: f64,
    pub t: f64,
    pub step: f64,
    pub samples: Vec<ProfileSample>,
    pub domain: (f64, f64),
}

/// Where a profile meets the unit sphere, with the angle residual `Θ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryHit {
    pub s_star: f64,
    pub rho: f64,
    pub drho: f64,
    pub theta: f64,
    pub side: Side,
}

pub const DEFAULT_STEP: f64 = 1e-4;
const EXIT_TOL: f64 = 1e-13;
const MAX_AXIAL_EXTENT: f64 = 4.0;

pub fn minimal_profile_ode(t: f64, a: f64, b: f64) -> Result<Profile> {
    minimal_profile_ode_with_step(t, a, b, DEFAULT_STEP)
}

pub fn minimal_profile_ode_with_step(t: f64, a: f64, b: f64, step: f64) -> Result<Profile> {
    if !(a > 0.0) {
        return Err(Error::InvalidArgument(format!("a must be positive, got {a}")));
    }
    CapMetric::new(t)?;
    if !(step > 0.0) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {step}")));
    }
    let apex = ProfileSample { s: -b / a, rho: 1.0 / a, drho: 0.0 };
    if apex.rho * apex.rho + apex.s * apex.s >= 1.0 {
        return Err(Error::InvalidArgument("apex lies outside the ball".into()));
    }
    let up = integrate_to_exit(t, apex, step)?;
    let down = integrate_to_exit(t, apex, -step)?;
    let mut samples: Vec<ProfileSample> = down.into_iter().rev().collect();
    samples.pop();
    samples.extend(up);
    let domain = (samples[0].s, samples[samples.len() - 1].s);
    Ok(Profile { a, b, t, step, samples, domain })
}

fn field(t: f64) -> impl Fn(f64, &[f64; 2]) -> [f64; 2] {
    move |z, y| [y[1], profile_rhs(t, z, y[0], y[1])]
}

fn outside(s: f64, y: &[f64; 2]) -> f64 {
    (y[0] * y[0] + s * s).sqrt() - 1.0
}

fn integrate_to_exit(t: f64, start: ProfileSample, h: f64) -> Result<Vec<ProfileSample>> {
    let f = field(t);
    let mut out = vec![start];
    let mut s = start.s;
    let mut y = [start.rho, start.drho];
    let max_steps = (MAX_AXIAL_EXTENT / h.abs()).ceil() as usize;
    for i in 0..max_steps {
        let next = rk4_step(&f, s, &y, h);
        let s_next = start.s + (i + 1) as f64 * h;
        if !next.iter().all(|v| v.is_finite()) || next[0] <= 0.0 {
            return Err(Error::Integration {
                s,
                rho: y[0],
                drho: y[1],
                reason: "profile left the admissible region".into(),
            });
        }
        if outside(s_next, &next) >= 0.0 {
            // localize the exit on the step fraction
            let frac = bisect(
                |fr| {
                    let yy = rk4_step(&f, s, &y, fr * h);
                    outside(s + fr * h, &yy)
                },
                0.0,
                1.0,
                1e-15,
            )?;
            let ye = rk4_step(&f, s, &y, frac * h);
            let se = s + frac * h;
            if outside(se, &ye).abs() > EXIT_TOL.max(1e-12) {
                return Err(Error::Integration {
                    s: se,
                    rho: ye[0],
                    drho: ye[1],
                    reason: "exit localization failed".into(),
                });
            }
            out.push(ProfileSample { s: se, rho: ye[0], drho: ye[1] });
            return Ok(out);
        }
        s = s_next;
        y = next;
        out.push(ProfileSample { s, rho: y[0], drho: y[1] });
    }
    Err(Error::NoExit)
}

impl Profile {
    /// `(ρ, ρ')` at an arbitrary `s` in the domain, by a partial step from the
    /// nearest stored sample.
    pub fn state_at(&self, s: f64) -> Result<(f64, f64)> {
        let (lo, hi) = self.domain;
        if s < lo - 1e-14 || s > hi + 1e-14 {
            return Err(Error::InvalidArgument(format!("s = {s} outside [{lo}, {hi}]")));
        }
        let idx = self.samples.partition_point(|p| p.s < s);
        let near = match idx {
            0 => 0,
            i if i >= self.samples.len() => self.samples.len() - 1,
            i => {
                if (self.samples[i].s - s).abs() < (s - self.samples[i - 1].s).abs() {
                    i
                } else {
                    i - 1
                }
            }
        };
        let p = self.samples[near];
        let h = s - p.s;
        if h == 0.0 {
            return Ok((p.rho, p.drho));
        }
        let y = rk4_step(&field(self.t), p.s, &[p.rho, p.drho], h);
        Ok((y[0], y[1]))
    }

    /// `(ρ, ρ', ρ'', ρ''')` at `s`.
    pub fn derivatives_at(&self, s: f64) -> Result<[f64; 4]> {
        let (rho, p) = self.state_at(s)?;
        let pp = profile_rhs(self.t, s, rho, p);
        let jet = profile_rhs(
            self.t,
            Jet::var_u(s),
            Jet { v: rho, du: p, duu: pp, ..Default::default() },
            Jet { v: p, du: pp, ..Default::default() },
        );
        Ok([rho, p, pp, jet.du])
    }

    fn end(&self, side: Side) -> ProfileSample {
        match side {
            Side::Upper => self.samples[self.samples.len() - 1],
            Side::Lower => self.samples[0],
        }
    }
}

/// `Θ` at a point of a revolution surface lying on the unit sphere.
pub fn rotational_boundary_angle(t: f64, s: f64, rho: f64, drho: f64) -> Result<f64> {
    let metric = CapMetric::new(t)?;
    let p = Vec3::new(rho, 0.0, s);
    let ginv = crate::capmetric::AmbientMetric::inverse(&metric, &p)?;
    let n = geometry::unit_normal(&ginv, &Vec3::new(drho, 0.0, 1.0), &Vec3::y(), &Vec3::x());
    geometry::boundary_angle(&metric, &p, &n)
}

pub fn boundary_hit(profile: &Profile, side: Side) -> Result<BoundaryHit> {
    let e = profile.end(side);
    if ((e.rho * e.rho + e.s * e.s).sqrt() - 1.0).abs() > 1e-10 {
        return Err(Error::NoExit);
    }
    Ok(BoundaryHit {
        s_star: e.s,
        rho: e.rho,
        drho: e.drho,
        theta: rotational_boundary_angle(profile.t, e.s, e.rho, e.drho)?,
        side,
    })
}

/// Both boundary hits, upper first.
pub fn boundary_hits(profile: &Profile) -> Result<[BoundaryHit; 2]> {
    Ok([boundary_hit(profile, Side::Upper)?, boundary_hit(profile, Side::Lower)?])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub max_halvings: usize,
    pub fd_step: f64,
    pub ode_step: f64,
    pub t_range: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-10,
            max_iter: 40,
            max_halvings: 8,
            fd_step: 1e-6,
            ode_step: DEFAULT_STEP,
            t_range: 0.35,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewtonDiagnostics {
    pub iterations: usize,
    pub theta_plus: f64,
    pub theta_minus: f64,
    pub residual_path: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatenoidSolution {
    pub t: f64,
    pub a: f64,
    pub b: f64,
    pub profile: Profile,
    pub diagnostics: NewtonDiagnostics,
}

fn residual(t: f64, a: f64, b: f64, step: f64) -> Result<([f64; 2], Profile)> {
    let profile = minimal_profile_ode_with_step(t, a, b, step)?;
    let [up, down] = boundary_hits(&profile)?;
    Ok(([up.theta, down.theta], profile))
}

pub fn solve_critical_catenoid(t: f64) -> Result<CatenoidSolution> {
    let c = solve_t0();
    solve_critical_catenoid_from(t, (c.r0, 0.0), &SolverOptions::default())
}

/// Damped Newton on `(Θ₊, Θ₋)(a, b) = 0` from the initial guess `init`.
pub fn solve_critical_catenoid_from(
    t: f64,
    init: (f64, f64),
    opts: &SolverOptions,
) -> Result<CatenoidSolution> {
    if !(t.abs() < opts.t_range) {
        return Err(Error::InvalidArgument(format!(
            "|t| = {} is outside the solver range {}",
            t.abs(),
            opts.t_range
        )));
    }
    let (mut a, mut b) = init;
    let norm = |r: &[f64; 2]| r[0].abs().max(r[1].abs());
    let (mut r, mut profile) = residual(t, a, b, opts.ode_step)?;
    let mut path = vec![norm(&r)];
    for iter in 0..=opts.max_iter {
        if norm(&r) < opts.tol {
            return Ok(CatenoidSolution {
                t,
                a,
                b,
                profile,
                diagnostics: NewtonDiagnostics {
                    iterations: iter,
                    theta_plus: r[0],
                    theta_minus: r[1],
                    residual_path: path,
                },
            });
        }
        if iter == opts.max_iter {
            break;
        }
        let h = opts.fd_step;
        let (ra_p, _) = residual(t, a + h, b, opts.ode_step)?;
        let (ra_m, _) = residual(t, a - h, b, opts.ode_step)?;
        let (rb_p, _) = residual(t, a, b + h, opts.ode_step)?;
        let (rb_m, _) = residual(t, a, b - h, opts.ode_step)?;
        let j = nalgebra::Matrix2::new(
            (ra_p[0] - ra_m[0]) / (2.0 * h),
            (rb_p[0] - rb_m[0]) / (2.0 * h),
            (ra_p[1] - ra_m[1]) / (2.0 * h),
            (rb_p[1] - rb_m[1]) / (2.0 * h),
        );
        let delta = j
            .lu()
            .solve(&nalgebra::Vector2::new(-r[0], -r[1]))
            .ok_or_else(|| Error::NonConvergence {
                iterations: iter,
                residual: norm(&r),
                path: path.clone(),
            })?;
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let (na, nb) = (a + lambda * delta[0], b + lambda * delta[1]);
            if na > 0.0 {
                if let Ok((nr, np)) = residual(t, na, nb, opts.ode_step) {
                    if norm(&nr) < norm(&r) {
                        accepted = Some((na, nb, nr, np));
                        break;
                    }
                }
            }
            lambda *= 0.5;
        }
        match accepted {
            Some((na, nb, nr, np)) => {
                a = na;
                b = nb;
                r = nr;
                profile = np;
                path.push(norm(&r));
            }
            None => break,
        }
    }
    Err(Error::NonConvergence { iterations: path.len() - 1, residual: norm(&r), path })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub t: f64,
    pub a: f64,
    pub b: f64,
    pub theta_plus: f64,
    pub theta_minus: f64,
    pub iters: usize,
    pub converged: bool,
    pub error: Option<String>,
}

/// Continuation over `t_grid`, each solve warm-started from the previous
/// converged row. Failed rows are recorded and the sweep moves on.
pub fn sweep(t_grid: &[f64], opts: &SolverOptions) -> Vec<SweepRow> {
    let c = solve_t0();
    let mut guess = (c.r0, 0.0);
    let mut rows = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        match solve_critical_catenoid_from(t, guess, opts) {
            Ok(sol) => {
                guess = (sol.a, sol.b);
                rows.push(SweepRow {
                    t,
                    a: sol.a,
                    b: sol.b,
                    theta_plus: sol.diagnostics.theta_plus,
                    theta_minus: sol.diagnostics.theta_minus,
                    iters: sol.diagnostics.iterations,
                    converged: true,
                    error: None,
                });
            }
            Err(e) => rows.push(SweepRow {
                t,
                a: f64::NAN,
                b: f64::NAN,
                theta_plus: f64::NAN,
                theta_minus: f64::NAN,
                iters: 0,
                converged: false,
                error: Some(e.to_string()),
            }),
        }
    }
    rows
}

/// Largest `|H|` over the stored samples of a profile.
pub fn max_mean_curvature(profile: &Profile) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for p in &profile.samples {
        let pp = profile_rhs(profile.t, p.s, p.rho, p.drho);
        let h = mean_curvature_rot(profile.t, p.s, p.rho, p.drho, pp)?;
        worst = worst.max(h.abs());
    }
    Ok(worst)
}
