//! Jacobi operators of the critical disk and the critical catenoid in the
//! Euclidean ball.
//!
//! The disk is parametrized in polar coordinates `(r, θ)`, the catenoid by
//! the conformal map `e_cat(t, θ) = r0⁻¹(cosh t cos θ, cosh t sin θ, t)` on
//! `[−t0, t0] × S¹`. With normals away from the axis (disk: `+e3`) the
//! operators are
//!
//! ```text
//! disk:     J^h φ = −Δφ,                               J^θ φ = φ − ∂_r φ        at r = 1
//! catenoid: J^h φ = −(r0²/cosh²t)(Δφ + 2φ/cosh²t),     J^θ φ = φ ∓ t0 ∂_t φ     at t = ±t0
//! ```
//!
//! Grid functions use second-order differences in the radial/axial
//! direction and the FFT in `θ`.

mod modes;
mod variation;

pub use modes::*;
pub use variation::*;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::fornberg_weights;
use crate::rotprofile::solve_t0;

/// Smallest admissible number of radial/axial intervals and of azimuthal
/// samples. Grids must be power-of-two multiples of it.
pub const BASE_RESOLUTION: usize = 16;

fn check_power_of_two_multiple(n: usize) -> Result<()> {
    if n < BASE_RESOLUTION || n % BASE_RESOLUTION != 0 || !(n / BASE_RESOLUTION).is_power_of_two() {
        return Err(Error::Resolution { got: n, min: BASE_RESOLUTION });
    }
    Ok(())
}

/// One azimuthal mode of the catenoid Jacobi problem,
/// `−φ'' − f_n φ = λ r0⁻² cosh²t φ` with `f_n = 2/cosh²t − n²` and Robin ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourierModeProblem {
    pub n: i64,
    pub t0: f64,
    pub r0: f64,
}

impl FourierModeProblem {
    pub fn new(n: i64) -> Self {
        let c = solve_t0();
        FourierModeProblem { n, t0: c.t0, r0: c.r0 }
    }

    pub fn potential(&self, t: f64) -> f64 {
        let sech = 1.0 / t.cosh();
        2.0 * sech * sech - (self.n * self.n) as f64
    }

    /// The conformal factor `r0⁻² cosh²t` of the induced metric.
    pub fn weight(&self, t: f64) -> f64 {
        (t.cosh() / self.r0).powi(2)
    }

    pub fn domain(&self) -> (f64, f64) {
        (-self.t0, self.t0)
    }

    /// `(φ(−t0) + t0 φ'(−t0), φ(t0) − t0 φ'(t0))` from end values and slopes.
    pub fn robin(&self, lower: (f64, f64), upper: (f64, f64)) -> (f64, f64) {
        (lower.0 + self.t0 * lower.1, upper.0 - self.t0 * upper.1)
    }
}

/// Polar grid on the closed unit disk: `r_i = sin(π i / 2m)`, `i = 0..=m`,
/// clustered towards the rim, times `n_theta` equispaced angles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiskGrid {
    pub r: Vec<f64>,
    pub n_theta: usize,
}

impl DiskGrid {
    pub fn new(intervals: usize, n_theta: usize) -> Result<Self> {
        check_power_of_two_multiple(intervals)?;
        check_power_of_two_multiple(n_theta)?;
        let r = (0..=intervals)
            .map(|i| (std::f64::consts::FRAC_PI_2 * i as f64 / intervals as f64).sin())
            .collect();
        Ok(DiskGrid { r, n_theta })
    }
}

/// Tensor grid on `[−t0, t0] × S¹`, uniform in both directions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CylinderGrid {
    pub t: Vec<f64>,
    pub n_theta: usize,
    pub t0: f64,
    pub r0: f64,
}

impl CylinderGrid {
    pub fn new(intervals: usize, n_theta: usize) -> Result<Self> {
        check_power_of_two_multiple(intervals)?;
        check_power_of_two_multiple(n_theta)?;
        let c = solve_t0();
        let h = 2.0 * c.t0 / intervals as f64;
        let t = (0..=intervals).map(|i| -c.t0 + h * i as f64).collect();
        Ok(CylinderGrid { t, n_theta, t0: c.t0, r0: c.r0 })
    }

    pub fn spacing(&self) -> f64 {
        self.t[1] - self.t[0]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Grid {
    Disk(DiskGrid),
    Cylinder(CylinderGrid),
}

impl Grid {
    /// Radial (disk) or axial (catenoid) nodes.
    pub fn rows(&self) -> &[f64] {
        match self {
            Grid::Disk(g) => &g.r,
            Grid::Cylinder(g) => &g.t,
        }
    }

    pub fn n_theta(&self) -> usize {
        match self {
            Grid::Disk(g) => g.n_theta,
            Grid::Cylinder(g) => g.n_theta,
        }
    }

    pub fn theta(&self, j: usize) -> f64 {
        2.0 * std::f64::consts::PI * j as f64 / self.n_theta() as f64
    }
}

/// Grid values of a function on the disk or the catenoid, stored row-major
/// (`values[i * n_theta + j]` at row node `i`, angle `θ_j`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceFunction {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl SurfaceFunction {
    /// Samples `f(row coordinate, θ)` on the grid.
    pub fn sample(grid: &Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let nt = grid.n_theta();
        let mut values = Vec::with_capacity(grid.rows().len() * nt);
        for &a in grid.rows() {
            for j in 0..nt {
                values.push(f(a, grid.theta(j)));
            }
        }
        SurfaceFunction { grid: grid.clone(), values }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let nt = self.grid.n_theta();
        &self.values[i * nt..(i + 1) * nt]
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid.n_theta() + j]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    fn map_rows(&self, f: impl Fn(usize, &[f64]) -> Vec<f64>) -> SurfaceFunction {
        let n = self.grid.rows().len();
        let mut values = Vec::with_capacity(self.values.len());
        for i in 0..n {
            values.extend(f(i, self.row(i)));
        }
        SurfaceFunction { grid: self.grid.clone(), values }
    }
}

/// Spectral second derivative in `θ` of one periodic row.
pub(crate) fn theta_second_derivative(row: &[f64]) -> Vec<f64> {
    let n = row.len();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut buf: Vec<Complex64> = row.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fwd.process(&mut buf);
    for (k, c) in buf.iter_mut().enumerate() {
        let m = signed_mode(k, n);
        // the Nyquist mode has no well-defined derivative; drop it
        let factor = if 2 * k == n { 0.0 } else { -((m * m) as f64) };
        *c *= factor / n as f64;
    }
    inv.process(&mut buf);
    buf.iter().map(|c| c.re).collect()
}

fn signed_mode(k: usize, n: usize) -> i64 {
    if 2 * k <= n {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

/// First and second derivative weights at node `i` of `xs`: centred three
/// point stencils inside, four point one-sided stencils at the ends.
fn row_stencil(xs: &[f64], i: usize) -> (Vec<usize>, Vec<f64>, Vec<f64>) {
    let n = xs.len();
    let idx: Vec<usize> = if i == 0 {
        (0..4).collect()
    } else if i == n - 1 {
        (n - 4..n).collect()
    } else {
        vec![i - 1, i, i + 1]
    };
    let pts: Vec<f64> = idx.iter().map(|&k| xs[k]).collect();
    let w = fornberg_weights(xs[i], &pts, 2);
    (idx, w[1].clone(), w[2].clone())
}

/// Five point one-sided first derivative at an end of `xs`.
fn end_derivative(xs: &[f64], column: impl Fn(usize) -> f64, upper: bool) -> f64 {
    let n = xs.len();
    let idx: Vec<usize> = if upper { (n - 5..n).collect() } else { (0..5).collect() };
    let at = if upper { xs[n - 1] } else { xs[0] };
    let pts: Vec<f64> = idx.iter().map(|&k| xs[k]).collect();
    let w = fornberg_weights(at, &pts, 1);
    idx.iter().zip(&w[1]).map(|(&k, wk)| wk * column(k)).sum()
}

fn require_disk(phi: &SurfaceFunction) -> Result<&DiskGrid> {
    match &phi.grid {
        Grid::Disk(g) => Ok(g),
        Grid::Cylinder(_) => Err(Error::InvalidArgument("expected a disk grid function".into())),
    }
}

fn require_cylinder(phi: &SurfaceFunction) -> Result<&CylinderGrid> {
    match &phi.grid {
        Grid::Cylinder(g) => Ok(g),
        Grid::Disk(_) => Err(Error::InvalidArgument("expected a cylinder grid function".into())),
    }
}

/// `−Δφ` on the disk. The centre row uses the ring-average identity
/// `mean_θ φ(r1, θ) − φ(0) = r1² Δφ(0)/4 + O(r1⁴)`.
pub fn disk_jacobi_h(phi: &SurfaceFunction) -> Result<SurfaceFunction> {
    let grid = require_disk(phi)?;
    check_power_of_two_multiple(grid.r.len() - 1)?;
    let nt = grid.n_theta;
    let r = &grid.r;
    let centre = phi.at(0, 0);
    let ring: f64 = phi.row(1).iter().sum::<f64>() / nt as f64;
    let lap0 = 4.0 * (ring - centre) / (r[1] * r[1]);
    Ok(phi.map_rows(|i, row| {
        if i == 0 {
            return vec![-lap0; nt];
        }
        let (idx, w1, w2) = row_stencil(r, i);
        let tt = theta_second_derivative(row);
        (0..nt)
            .map(|j| {
                let (mut d1, mut d2) = (0.0, 0.0);
                for (k, &ik) in idx.iter().enumerate() {
                    let v = phi.at(ik, j);
                    d1 += w1[k] * v;
                    d2 += w2[k] * v;
                }
                -(d2 + d1 / r[i] + tt[j] / (r[i] * r[i]))
            })
            .collect()
    }))
}

/// `φ − ∂_r φ` on the rim `r = 1`, one value per grid angle.
pub fn disk_jacobi_theta(phi: &SurfaceFunction) -> Result<Vec<f64>> {
    let grid = require_disk(phi)?;
    let last = grid.r.len() - 1;
    Ok((0..grid.n_theta)
        .map(|j| phi.at(last, j) - end_derivative(&grid.r, |k| phi.at(k, j), true))
        .collect())
}

/// `−(r0²/cosh²t)(Δφ + 2φ/cosh²t)` on the catenoid cylinder.
pub fn cat_jacobi_h(phi: &SurfaceFunction) -> Result<SurfaceFunction> {
    let grid = require_cylinder(phi)?;
    let nt = grid.n_theta;
    let r02 = grid.r0 * grid.r0;
    Ok(phi.map_rows(|i, row| {
        let t = grid.t[i];
        let sech2 = 1.0 / t.cosh().powi(2);
        let (idx, _, w2) = row_stencil(&grid.t, i);
        let tt = theta_second_derivative(row);
        (0..nt)
            .map(|j| {
                let d2: f64 = idx.iter().zip(&w2).map(|(&k, w)| w * phi.at(k, j)).sum();
                -r02 * sech2 * (d2 + tt[j] + 2.0 * sech2 * row[j])
            })
            .collect()
    }))
}

/// Robin values `(φ(−t0) + t0 ∂_tφ(−t0), φ(t0) − t0 ∂_tφ(t0))` per grid angle.
pub fn cat_jacobi_theta(phi: &SurfaceFunction) -> Result<(Vec<f64>, Vec<f64>)> {
    let grid = require_cylinder(phi)?;
    let last = grid.t.len() - 1;
    let t0 = grid.t0;
    let lower = (0..grid.n_theta)
        .map(|j| phi.at(0, j) + t0 * end_derivative(&grid.t, |k| phi.at(k, j), false))
        .collect();
    let upper = (0..grid.n_theta)
        .map(|j| phi.at(last, j) - t0 * end_derivative(&grid.t, |k| phi.at(k, j), true))
        .collect();
    Ok((lower, upper))
}

/// Mode `n` of a grid function: `φ_n(a) = (1/N) Σ_j φ(a, θ_j) e^{−inθ_j}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeFunction {
    pub n: i64,
    pub values: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeDecomposition {
    pub modes: Vec<ModeFunction>,
    /// `|Σ|φ|² − N Σ|φ_n|²| / Σ|φ|²` over the whole grid.
    pub parseval_residual: f64,
}

impl ModeDecomposition {
    pub fn mode(&self, n: i64) -> Option<&ModeFunction> {
        self.modes.iter().find(|m| m.n == n)
    }

    /// Inverse transform back onto the grid of `like`.
    pub fn reconstruct(&self, like: &SurfaceFunction) -> SurfaceFunction {
        let nt = like.grid.n_theta();
        let rows = like.grid.rows().len();
        let mut planner = FftPlanner::new();
        let inv = planner.plan_fft_inverse(nt);
        let mut values = Vec::with_capacity(rows * nt);
        for i in 0..rows {
            let mut buf = vec![Complex64::new(0.0, 0.0); nt];
            for m in &self.modes {
                let k = m.n.rem_euclid(nt as i64) as usize;
                buf[k] = m.values[i];
            }
            inv.process(&mut buf);
            values.extend(buf.iter().map(|c| c.re));
        }
        SurfaceFunction { grid: like.grid.clone(), values }
    }
}

pub fn mode_reduce(phi: &SurfaceFunction) -> Result<ModeDecomposition> {
    let nt = phi.grid.n_theta();
    if !nt.is_power_of_two() {
        return Err(Error::Resolution { got: nt, min: BASE_RESOLUTION });
    }
    let rows = phi.grid.rows().len();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(nt);
    let mut modes: Vec<ModeFunction> = (0..nt)
        .map(|k| ModeFunction { n: signed_mode(k, nt), values: Vec::with_capacity(rows) })
        .collect();
    let (mut energy, mut spectral) = (0.0, 0.0);
    for i in 0..rows {
        let row = phi.row(i);
        energy += row.iter().map(|v| v * v).sum::<f64>();
        let mut buf: Vec<Complex64> = row.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fwd.process(&mut buf);
        for (k, c) in buf.iter().enumerate() {
            let c = c / nt as f64;
            spectral += c.norm_sqr() * nt as f64;
            modes[k].values.push(c);
        }
    }
    modes.sort_by_key(|m| m.n);
    let parseval_residual = if energy > 0.0 { (energy - spectral).abs() / energy } else { 0.0 };
    Ok(ModeDecomposition { modes, parseval_residual })
}

/// `−φ_n'' − f_n φ_n` on the axial grid with the same stencils as
/// [`cat_jacobi_h`].
pub fn mode_operator(n: i64, grid: &CylinderGrid, values: &[Complex64]) -> Vec<Complex64> {
    let problem = FourierModeProblem { n, t0: grid.t0, r0: grid.r0 };
    (0..grid.t.len())
        .map(|i| {
            let (idx, _, w2) = row_stencil(&grid.t, i);
            let d2: Complex64 = idx.iter().zip(&w2).map(|(&k, w)| values[k] * *w).sum();
            -d2 - values[i] * problem.potential(grid.t[i])
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disk() -> Grid {
        Grid::Disk(DiskGrid::new(64, 32).unwrap())
    }

    fn cyl(n: usize) -> Grid {
        Grid::Cylinder(CylinderGrid::new(n, 32).unwrap())
    }

    #[test]
    fn resolution_rules() {
        assert!(DiskGrid::new(8, 32).is_err());
        assert!(DiskGrid::new(48, 32).is_err());
        assert!(CylinderGrid::new(32, 24).is_err());
        assert!(CylinderGrid::new(32, 64).is_ok());
    }

    #[test]
    fn disk_interior_operator() {
        let g = disk();
        let cases: [(fn(f64, f64) -> f64, f64); 4] = [
            (|r, th| r * th.cos(), 0.0),
            (|_, _| 1.0, 0.0),
            (|r, th| r * r * (2.0 * th).cos(), 0.0),
            (|r, _| r * r, -4.0),
        ];
        for (f, want) in cases {
            let out = disk_jacobi_h(&SurfaceFunction::sample(&g, f)).unwrap();
            for v in &out.values {
                assert!((v - want).abs() < 1e-7, "{v} vs {want}");
            }
        }
    }

    #[test]
    fn disk_boundary_operator() {
        let g = disk();
        let x = disk_jacobi_theta(&SurfaceFunction::sample(&g, |r, th| r * th.cos())).unwrap();
        assert!(x.iter().all(|v| v.abs() < 1e-9));
        let one = disk_jacobi_theta(&SurfaceFunction::sample(&g, |_, _| 1.0)).unwrap();
        assert!(one.iter().all(|v| (v - 1.0).abs() < 1e-9));
        let q = disk_jacobi_theta(&SurfaceFunction::sample(&g, |r, th| r * r * (2.0 * th).cos())).unwrap();
        for (j, v) in q.iter().enumerate() {
            assert!((v + (2.0 * g.theta(j)).cos()).abs() < 1e-8);
        }
    }

    #[test]
    fn catenoid_operators_on_closed_forms() {
        let g = cyl(64);
        let Grid::Cylinder(c) = &g else { unreachable!() };
        let r02 = c.r0 * c.r0;
        let one = cat_jacobi_h(&SurfaceFunction::sample(&g, |_, _| 1.0)).unwrap();
        for (i, &t) in c.t.iter().enumerate() {
            let want = -2.0 * r02 / t.cosh().powi(4);
            assert!((one.at(i, 3) - want).abs() < 1e-12);
        }
        let cos = cat_jacobi_h(&SurfaceFunction::sample(&g, |_, th| th.cos())).unwrap();
        for (i, &t) in c.t.iter().enumerate() {
            let s2 = 1.0 / t.cosh().powi(2);
            let want = r02 * s2 * (1.0 - 2.0 * s2) * g.theta(5).cos();
            assert!((cos.at(i, 5) - want).abs() < 1e-12);
        }
        let (lo, up) = cat_jacobi_theta(&SurfaceFunction::sample(&g, |_, _| 1.0)).unwrap();
        assert!(lo.iter().chain(&up).all(|v| (v - 1.0).abs() < 1e-12));
        let (lo, up) = cat_jacobi_theta(&SurfaceFunction::sample(&g, |t, _| t.tanh())).unwrap();
        assert!(lo.iter().chain(&up).all(|v| v.abs() > 1e-2));
    }

    #[test]
    fn catenoid_kernel_residual_is_second_order() {
        let kernel = |t: f64, th: f64| (t.sinh() + t / t.cosh()) * th.cos();
        let err = |n| {
            let g = cyl(n);
            let phi = SurfaceFunction::sample(&g, kernel);
            let (lo, up) = cat_jacobi_theta(&phi).unwrap();
            let robin = lo.iter().chain(&up).fold(0.0f64, |m, v| m.max(v.abs()));
            (cat_jacobi_h(&phi).unwrap().max_abs(), robin)
        };
        let (coarse, _) = err(64);
        let (fine, robin) = err(128);
        assert!(fine < 1e-2, "{fine}");
        assert!((coarse / fine - 4.0).abs() < 0.5, "{}", coarse / fine);
        assert!(robin < 1e-6, "{robin}");
    }

    #[test]
    fn fourier_reduction() {
        let g = cyl(32);
        let phi = SurfaceFunction::sample(&g, |t, th| t * th.cos());
        let dec = mode_reduce(&phi).unwrap();
        for m in &dec.modes {
            let size = m.values.iter().fold(0.0f64, |a, c| a.max(c.norm()));
            if m.n.abs() == 1 {
                assert!(size > 0.1);
            } else {
                assert!(size < 1e-14, "mode {} has {size}", m.n);
            }
        }
        assert!(dec.parseval_residual < 1e-12);
        let rich = SurfaceFunction::sample(&g, |t, th| (t * th.sin()).exp() + (3.0 * th).cos() * t);
        let back = mode_reduce(&rich).unwrap().reconstruct(&rich);
        let err = rich.values.iter().zip(&back.values).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(err < 1e-12);
    }

    #[test]
    fn reduction_commutes_with_the_operator() {
        let g = cyl(64);
        let Grid::Cylinder(c) = &g else { unreachable!() };
        let phi = SurfaceFunction::sample(&g, |t, th| {
            (0.3 * t + th.sin()).exp() + t * t * (2.0 * th).cos()
        });
        let lhs = mode_reduce(&cat_jacobi_h(&phi).unwrap()).unwrap();
        let rhs = mode_reduce(&phi).unwrap();
        for n in -15..=15 {
            let ode = mode_operator(n, c, &rhs.mode(n).unwrap().values);
            for (i, &t) in c.t.iter().enumerate() {
                let factor = (c.r0 / t.cosh()).powi(2);
                let d = lhs.mode(n).unwrap().values[i] - ode[i] * factor;
                assert!(d.norm() < 1e-9, "n = {n}: {}", d.norm());
            }
        }
    }

    #[test]
    fn potential_bounds() {
        for n in [0i64, 1, 2, 5] {
            let p = FourierModeProblem::new(n);
            for k in 0..=20 {
                let t = -p.t0 + 2.0 * p.t0 * k as f64 / 20.0;
                assert!(p.potential(t) <= 2.0 - (n * n) as f64);
                assert_eq!(p.potential(t), p.potential(-t));
                if n >= 2 {
                    assert!(p.potential(t) <= -2.0);
                }
            }
        }
    }
}
