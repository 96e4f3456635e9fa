//! Fundamental systems of the catenoid mode equation `φ'' + f_n φ = 0`,
//! the Robin determinant, the Riccati comparison bound and the closed-form
//! Jacobi fields.

use serde::{Deserialize, Serialize};

use super::FourierModeProblem;
use crate::linalg::gauss_legendre;
use crate::ode::rk4_step;
use crate::rotprofile::solve_t0;

/// Value, first and second derivative of a solution at one point.
pub type Taylor = [f64; 3];

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Zero,
    One,
    Numeric { step: f64, forward: Vec<[[f64; 2]; 2]>, backward: Vec<[[f64; 2]; 2]> },
}

/// A pair of solutions of the mode equation. For `n = 0` and `|n| = 1` the
/// pair is in closed form:
///
/// * `n = 0`: `u = 1 − t tanh t`, `v = tanh t`
/// * `|n| = 1`: `u = sinh t + t/cosh t`, `v = 1/cosh t`
///
/// otherwise the solutions with data `(1, 0)` and `(0, 1)` at `t = 0` are
/// integrated by RK4, so the Wronskian is one.
#[derive(Debug, Clone, PartialEq)]
pub struct FundamentalSystem {
    pub problem: FourierModeProblem,
    kind: Kind,
}

const NUMERIC_STEPS: usize = 4096;

pub fn mode_fundamental_solutions(n: i64) -> FundamentalSystem {
    fundamental_with_steps(n, NUMERIC_STEPS)
}

fn fundamental_with_steps(n: i64, steps: usize) -> FundamentalSystem {
    let problem = FourierModeProblem::new(n);
    let kind = match n.abs() {
        0 => Kind::Zero,
        1 => Kind::One,
        _ => {
            let step = problem.t0 / steps as f64;
            let integrate = |h: f64| {
                let f = |t: f64, y: &[f64; 4]| {
                    let p = problem.potential(t);
                    [y[1], -p * y[0], y[3], -p * y[2]]
                };
                let mut y = [1.0, 0.0, 0.0, 1.0];
                let mut out = vec![[[y[0], y[1]], [y[2], y[3]]]];
                for i in 0..steps {
                    y = rk4_step(&f, i as f64 * h, &y, h);
                    out.push([[y[0], y[1]], [y[2], y[3]]]);
                }
                out
            };
            Kind::Numeric { step, forward: integrate(step), backward: integrate(-step) }
        }
    };
    FundamentalSystem { problem, kind }
}

impl FundamentalSystem {
    pub fn is_closed_form(&self) -> bool {
        !matches!(self.kind, Kind::Numeric { .. })
    }

    /// Taylor data of both solutions at `t`.
    pub fn eval(&self, t: f64) -> [Taylor; 2] {
        let p = self.problem.potential(t);
        match &self.kind {
            Kind::Zero => {
                let (th, s2) = (t.tanh(), 1.0 / t.cosh().powi(2));
                [
                    [1.0 - t * th, -th - t * s2, -2.0 * s2 + 2.0 * t * s2 * th],
                    [th, s2, -2.0 * s2 * th],
                ]
            }
            Kind::One => {
                let (th, sech) = (t.tanh(), 1.0 / t.cosh());
                [
                    [
                        t.sinh() + t * sech,
                        t.cosh() + sech - t * sech * th,
                        t.sinh() - 2.0 * sech * th - t * sech * (sech * sech - th * th),
                    ],
                    [sech, -sech * th, sech * (th * th - sech * sech)],
                ]
            }
            Kind::Numeric { step, forward, backward } => {
                let (table, h) = if t >= 0.0 { (forward, *step) } else { (backward, -*step) };
                let k = ((t / h).round() as usize).min(table.len() - 1);
                let base = k as f64 * h;
                let y0 = table[k];
                let f = |s: f64, y: &[f64; 4]| {
                    let q = self.problem.potential(s);
                    [y[1], -q * y[0], y[3], -q * y[2]]
                };
                let y = rk4_step(&f, base, &[y0[0][0], y0[0][1], y0[1][0], y0[1][1]], t - base);
                [[y[0], y[1], -p * y[0]], [y[2], y[3], -p * y[2]]]
            }
        }
    }

    /// `u v' − u' v` at `t`.
    pub fn wronskian(&self, t: f64) -> f64 {
        let [u, v] = self.eval(t);
        u[0] * v[1] - u[1] * v[0]
    }

    /// Largest `|φ'' + f_n φ|` over `samples` equispaced points. For the
    /// integrated systems the second derivative is defined by the equation,
    /// so the reported figure is the step-doubling discrepancy at `±t0`.
    pub fn ode_residual(&self, samples: usize) -> f64 {
        match &self.kind {
            Kind::Numeric { .. } => {
                let coarse = fundamental_with_steps(self.problem.n, NUMERIC_STEPS / 2);
                let t0 = self.problem.t0;
                let mut worst: f64 = 0.0;
                for t in [-t0, t0] {
                    let (a, b) = (self.eval(t), coarse.eval(t));
                    for s in 0..2 {
                        for d in 0..2 {
                            worst = worst.max((a[s][d] - b[s][d]).abs());
                        }
                    }
                }
                worst
            }
            _ => {
                let (lo, hi) = self.problem.domain();
                let mut worst: f64 = 0.0;
                for k in 0..=samples {
                    let t = lo + (hi - lo) * k as f64 / samples as f64;
                    let p = self.problem.potential(t);
                    for sol in self.eval(t) {
                        worst = worst.max((sol[2] + p * sol[0]).abs());
                    }
                }
                worst
            }
        }
    }

    /// Robin functionals `(B₋, B₊)` of each solution.
    pub fn robin_data(&self) -> [(f64, f64); 2] {
        let t0 = self.problem.t0;
        let (lo, up) = (self.eval(-t0), self.eval(t0));
        [0, 1].map(|s| self.problem.robin((lo[s][0], lo[s][1]), (up[s][0], up[s][1])))
    }

    /// Size of the boundary data `(φ, φ')` of each solution at both ends.
    fn boundary_scale(&self) -> [f64; 2] {
        let t0 = self.problem.t0;
        let (lo, up) = (self.eval(-t0), self.eval(t0));
        [0, 1].map(|s| (lo[s][0].powi(2) + lo[s][1].powi(2) + up[s][0].powi(2) + up[s][1].powi(2)).sqrt())
    }
}

/// Default threshold below which [`mode_bvp_determinant`] declares a kernel.
pub const KERNEL_DET_TOL: f64 = 1e-7;

/// `det [[B₋u, B₋v], [B₊u, B₊v]]` after scaling each solution to unit
/// boundary data. Vanishes exactly when mode `n` carries a Jacobi field.
pub fn mode_bvp_determinant(n: i64) -> f64 {
    determinant_of(&mode_fundamental_solutions(n))
}

fn determinant_of(sys: &FundamentalSystem) -> f64 {
    let [(bu_lo, bu_up), (bv_lo, bv_up)] = sys.robin_data();
    let [su, sv] = sys.boundary_scale();
    (bu_lo * bv_up - bv_lo * bu_up) / (su * sv)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeReport {
    pub n: i64,
    pub det: f64,
    pub kernel_flag: bool,
    pub residuals: ModeResiduals,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeResiduals {
    pub ode: f64,
    pub wronskian_drift: f64,
}

pub fn mode_report(n: i64) -> ModeReport {
    let sys = mode_fundamental_solutions(n);
    let det = determinant_of(&sys);
    let t0 = sys.problem.t0;
    let w = [-t0, 0.0, t0].map(|t| sys.wronskian(t));
    let drift = (w[0] - w[1]).abs().max((w[2] - w[1]).abs());
    ModeReport {
        n,
        det,
        kernel_flag: det.abs() < KERNEL_DET_TOL,
        residuals: ModeResiduals { ode: sys.ode_residual(2000), wronskian_drift: drift },
    }
}

/// The comparison `√2 tanh(√2 t0)` against the Robin value `1/t0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiccatiBound {
    pub gamma_bound: f64,
    pub inv_t0: f64,
    pub margin: f64,
}

pub fn riccati_bound_check() -> RiccatiBound {
    let t0 = solve_t0().t0;
    riccati_bound_at(t0)
}

pub fn riccati_bound_at(t0: f64) -> RiccatiBound {
    let r2 = std::f64::consts::SQRT_2;
    let gamma_bound = r2 * (r2 * t0).tanh();
    RiccatiBound { gamma_bound, inv_t0: 1.0 / t0, margin: gamma_bound - 1.0 / t0 }
}

/// A closed-form Jacobi field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelElement {
    /// `x` on the disk.
    DiskX,
    /// `y` on the disk.
    DiskY,
    /// `(sinh t + t/cosh t) cos θ` on the catenoid.
    CatenoidCos,
    /// `(sinh t + t/cosh t) sin θ` on the catenoid.
    CatenoidSin,
}

impl KernelElement {
    /// Value at polar `(r, θ)` on the disk or `(t, θ)` on the catenoid.
    pub fn eval(&self, a: f64, theta: f64) -> f64 {
        let (profile, angular) = self.split(a, theta);
        profile[0] * angular
    }

    /// Radial/axial Taylor data and the angular factor.
    pub fn split(&self, a: f64, theta: f64) -> (Taylor, f64) {
        match self {
            KernelElement::DiskX => ([a, 1.0, 0.0], theta.cos()),
            KernelElement::DiskY => ([a, 1.0, 0.0], theta.sin()),
            KernelElement::CatenoidCos => (mode_fundamental_solutions(1).eval(a)[0], theta.cos()),
            KernelElement::CatenoidSin => (mode_fundamental_solutions(1).eval(a)[0], theta.sin()),
        }
    }

    pub fn is_disk(&self) -> bool {
        matches!(self, KernelElement::DiskX | KernelElement::DiskY)
    }

    /// Largest interior residual of the reduced operator over a fine grid:
    /// `φ'' + φ'/r − φ/r²` on the disk, `φ'' + f_1 φ` on the catenoid.
    pub fn ode_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        if self.is_disk() {
            for k in 1..=2000 {
                let r = k as f64 / 2000.0;
                let (p, _) = self.split(r, 0.0);
                worst = worst.max((p[2] + p[1] / r - p[0] / (r * r)).abs());
            }
        } else {
            worst = mode_fundamental_solutions(1).ode_residual(2000);
        }
        worst
    }

    /// Largest Robin residual over both boundary components.
    pub fn robin_residual(&self) -> f64 {
        if self.is_disk() {
            let (p, _) = self.split(1.0, 0.0);
            (p[0] - p[1]).abs()
        } else {
            let problem = FourierModeProblem::new(1);
            let t0 = problem.t0;
            let (lo, _) = self.split(-t0, 0.0);
            let (up, _) = self.split(t0, 0.0);
            let (a, b) = problem.robin((lo[0], lo[1]), (up[0], up[1]));
            a.abs().max(b.abs())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelBases {
    pub disk: [KernelElement; 2],
    pub catenoid: [KernelElement; 2],
}

pub fn kernel_bases() -> KernelBases {
    KernelBases {
        disk: [KernelElement::DiskX, KernelElement::DiskY],
        catenoid: [KernelElement::CatenoidCos, KernelElement::CatenoidSin],
    }
}

/// `L²` Gram matrix of a basis in the induced metric, by tensor Gauss
/// quadrature (area element `r dr dθ` on the disk, `r0⁻² cosh²t dt dθ` on
/// the catenoid).
pub fn gram_matrix(basis: &[KernelElement]) -> nalgebra::DMatrix<f64> {
    let k = basis.len();
    let (nodes, weights) = gauss_legendre(24);
    let c = solve_t0();
    let n_theta = 64;
    let mut gram = nalgebra::DMatrix::zeros(k, k);
    for (x, w) in nodes.iter().zip(&weights) {
        for j in 0..n_theta {
            let theta = 2.0 * std::f64::consts::PI * j as f64 / n_theta as f64;
            let dtheta = 2.0 * std::f64::consts::PI / n_theta as f64;
            let vals: Vec<f64> = basis
                .iter()
                .map(|e| {
                    let a = if e.is_disk() { 0.5 * (x + 1.0) } else { c.t0 * x };
                    e.eval(a, theta)
                })
                .collect();
            for a in 0..k {
                for b in 0..k {
                    let e = basis[a];
                    let area = if e.is_disk() {
                        let r = 0.5 * (x + 1.0);
                        0.5 * r
                    } else {
                        let t = c.t0 * x;
                        c.t0 * (t.cosh() / c.r0).powi(2)
                    };
                    gram[(a, b)] += w * dtheta * area * vals[a] * vals[b];
                }
            }
        }
    }
    gram
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_systems_solve_the_equation() {
        for n in [0, 1, -1] {
            let sys = mode_fundamental_solutions(n);
            assert!(sys.is_closed_form());
            assert!(sys.ode_residual(4000) < 1e-8);
        }
    }

    #[test]
    fn closed_form_derivatives_match_differences() {
        for n in [0, 1] {
            let sys = mode_fundamental_solutions(n);
            let h = 1e-5;
            for t in [-0.9, 0.3, 1.1] {
                let (a, b, c) = (sys.eval(t), sys.eval(t + h), sys.eval(t - h));
                for s in 0..2 {
                    assert!(((b[s][0] - c[s][0]) / (2.0 * h) - a[s][1]).abs() < 1e-8);
                    assert!(((b[s][1] - c[s][1]) / (2.0 * h) - a[s][2]).abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn numeric_system_has_unit_wronskian() {
        let sys = mode_fundamental_solutions(2);
        assert!(!sys.is_closed_form());
        let t0 = sys.problem.t0;
        for t in [-t0, -0.5, 0.0, 0.77, t0] {
            assert!((sys.wronskian(t) - 1.0).abs() < 1e-10);
        }
        assert!(sys.ode_residual(0) < 1e-8);
    }

    #[test]
    fn determinant_dichotomy() {
        for n in -8i64..=8 {
            let det = mode_bvp_determinant(n);
            assert_eq!(det, mode_bvp_determinant(-n));
            if n.abs() == 1 {
                assert!(det.abs() < 1e-9, "n = {n}: {det}");
            } else {
                assert!(det.abs() > 1e-3, "n = {n}: {det}");
            }
        }
    }

    #[test]
    fn riccati_margin() {
        let r = riccati_bound_check();
        assert!((r.margin - 0.489).abs() < 5e-3, "{}", r.margin);
        assert!(r.inv_t0 < 1.0);
        assert!(riccati_bound_at(1.0).gamma_bound > 1.0);
    }

    #[test]
    fn kernel_elements() {
        let b = kernel_bases();
        for e in b.disk.iter().chain(&b.catenoid) {
            assert!(e.ode_residual() < 1e-8, "{e:?}");
            assert!(e.robin_residual() < 1e-10, "{e:?}");
        }
        for basis in [&b.disk[..], &b.catenoid[..]] {
            let g = gram_matrix(basis);
            assert!(g.determinant() > 1e-3);
            assert!(g[(0, 1)].abs() < 1e-12);
        }
        // ∫_D x² = π/4
        let g = gram_matrix(&b.disk);
        assert!((g[(0, 0)] - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
    }
}
