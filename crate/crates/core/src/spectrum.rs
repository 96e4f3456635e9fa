//! Robin Sturm–Liouville spectra of the critical disk and catenoid, mode by
//! mode, with nullity and index certified across grid refinements.
//!
//! Each azimuthal mode is discretized by continuous piecewise linear finite
//! elements with a consistent mass matrix. Coefficients are integrated by
//! Gauss quadrature, so the resulting pencil `K − λM` is symmetric
//! tridiagonal and its inertia is read off an `LDLᵀ` factorization.
//!
//! * catenoid, mode `n`: `∫ φ'² − f_n φ² − (φ(t0)² + φ(−t0)²)/t0` against
//!   `∫ r0⁻² cosh²t φ²` on `[−t0, t0]`
//! * disk, mode `n`: `∫ r φ'² + n² φ²/r − φ(1)²` against `∫ r φ²` on
//!   `[0, 1]`, with `φ(0) = 0` for `n ≥ 1`

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jacobi::{mode_fundamental_solutions, RotationalPatch};
use crate::linalg::{gauss_legendre, TridiagonalPencil};
use crate::rotprofile::{solve_critical_catenoid, solve_t0};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SurfaceKind {
    Disk,
    Catenoid,
}

impl std::str::FromStr for SurfaceKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "disk" => Ok(SurfaceKind::Disk),
            "catenoid" => Ok(SurfaceKind::Catenoid),
            other => Err(Error::InvalidArgument(format!("unknown surface `{other}`"))),
        }
    }
}

impl std::fmt::Display for SurfaceKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SurfaceKind::Disk => "disk",
            SurfaceKind::Catenoid => "catenoid",
        })
    }
}

/// Smallest admissible number of grid points.
pub const BASE_GRID: usize = 65;
/// Default refinement levels (grid points).
pub const DEFAULT_LEVELS: [usize; 3] = [257, 513, 1025];
/// Zero tolerance at the finest default level; coarser levels scale it by
/// `(h / h_finest)²`.
pub const DEFAULT_ZERO_TOL: f64 = 1e-6;
/// Eigenvalues are reported up to this value.
pub const REPORT_CAP: f64 = 50.0;

const EIG_TOL: f64 = 1e-13;

fn check_grid(grid_size: usize) -> Result<()> {
    if grid_size < BASE_GRID {
        return Err(Error::Resolution { got: grid_size, min: BASE_GRID });
    }
    Ok(())
}

/// Assembles `∫ p φ'ψ' + q φψ` and `∫ w φψ` over a uniform mesh of `[lo, hi]`.
fn assemble(
    lo: f64,
    hi: f64,
    grid_size: usize,
    quad_points: usize,
    p: impl Fn(f64) -> f64,
    q: impl Fn(f64) -> f64,
    w: impl Fn(f64) -> f64,
) -> TridiagonalPencil {
    let elements = grid_size - 1;
    let h = (hi - lo) / elements as f64;
    let (xg, wg) = gauss_legendre(quad_points);
    let mut pencil = TridiagonalPencil {
        k_diag: vec![0.0; grid_size],
        k_off: vec![0.0; elements],
        m_diag: vec![0.0; grid_size],
        m_off: vec![0.0; elements],
    };
    for e in 0..elements {
        let a = lo + e as f64 * h;
        let (mut k, mut m) = ([[0.0; 2]; 2], [[0.0; 2]; 2]);
        for (xi, wi) in xg.iter().zip(&wg) {
            let x = a + 0.5 * h * (xi + 1.0);
            let jw = 0.5 * h * wi;
            let s = 0.5 * (xi + 1.0);
            let n = [1.0 - s, s];
            let dn = [-1.0 / h, 1.0 / h];
            let (pv, qv, wv) = (p(x), q(x), w(x));
            for i in 0..2 {
                for j in 0..2 {
                    k[i][j] += jw * (pv * dn[i] * dn[j] + qv * n[i] * n[j]);
                    m[i][j] += jw * wv * n[i] * n[j];
                }
            }
        }
        pencil.k_diag[e] += k[0][0];
        pencil.k_diag[e + 1] += k[1][1];
        pencil.k_off[e] += k[0][1];
        pencil.m_diag[e] += m[0][0];
        pencil.m_diag[e + 1] += m[1][1];
        pencil.m_off[e] += m[0][1];
    }
    pencil
}

/// Finite element pencil of catenoid mode `n` on `grid_size` nodes.
pub fn catenoid_pencil(n: u32, grid_size: usize) -> Result<TridiagonalPencil> {
    check_grid(grid_size)?;
    let c = solve_t0();
    let nn = (n * n) as f64;
    let mut pencil = assemble(
        -c.t0,
        c.t0,
        grid_size,
        4,
        |_| 1.0,
        |t| nn - 2.0 / t.cosh().powi(2),
        |t| (t.cosh() / c.r0).powi(2),
    );
    pencil.k_diag[0] -= 1.0 / c.t0;
    pencil.k_diag[grid_size - 1] -= 1.0 / c.t0;
    Ok(pencil)
}

/// Finite element pencil of disk mode `n`; for `n ≥ 1` the centre node is
/// removed (`φ(0) = 0`).
pub fn disk_pencil(n: u32, grid_size: usize) -> Result<TridiagonalPencil> {
    check_grid(grid_size)?;
    let nn = (n * n) as f64;
    let mut pencil = assemble(0.0, 1.0, grid_size, 8, |r| r, |r| nn / r, |r| r);
    let last = grid_size - 1;
    pencil.k_diag[last] -= 1.0;
    if n >= 1 {
        pencil.k_diag.remove(0);
        pencil.k_off.remove(0);
        pencil.m_diag.remove(0);
        pencil.m_off.remove(0);
    }
    Ok(pencil)
}

/// Nodes carried by the pencil of [`disk_pencil`] or [`catenoid_pencil`].
pub fn pencil_nodes(surface: SurfaceKind, n: u32, grid_size: usize) -> Vec<f64> {
    match surface {
        SurfaceKind::Catenoid => {
            let t0 = solve_t0().t0;
            let h = 2.0 * t0 / (grid_size - 1) as f64;
            (0..grid_size).map(|i| -t0 + h * i as f64).collect()
        }
        SurfaceKind::Disk => {
            let h = 1.0 / (grid_size - 1) as f64;
            let start = if n >= 1 { 1 } else { 0 };
            (start..grid_size).map(|i| i as f64 * h).collect()
        }
    }
}

pub fn mode_pencil(surface: SurfaceKind, n: u32, grid_size: usize) -> Result<TridiagonalPencil> {
    match surface {
        SurfaceKind::Disk => disk_pencil(n, grid_size),
        SurfaceKind::Catenoid => catenoid_pencil(n, grid_size),
    }
}

/// Eigenvalues of catenoid mode `n` below [`REPORT_CAP`], ascending.
pub fn catenoid_mode_eigs(n: u32, grid_size: usize) -> Result<Vec<f64>> {
    Ok(catenoid_pencil(n, grid_size)?.eigenvalues_below(REPORT_CAP, EIG_TOL))
}

/// Eigenvalues of disk mode `n` below [`REPORT_CAP`], ascending.
pub fn disk_mode_eigs(n: u32, grid_size: usize) -> Result<Vec<f64>> {
    Ok(disk_pencil(n, grid_size)?.eigenvalues_below(REPORT_CAP, EIG_TOL))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSpectrum {
    pub n: u32,
    /// 1 for `n = 0`, 2 for the pair `±n`.
    pub multiplicity: usize,
    pub eigenvalues: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementRow {
    pub grid_size: usize,
    pub zero_tol: f64,
    pub nullity: usize,
    pub index: usize,
    pub smallest_abs: f64,
    pub modes_scanned: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub surface: SurfaceKind,
    /// Per-mode spectra at the finest level.
    pub modes: Vec<ModeSpectrum>,
    pub nullity: usize,
    pub index: usize,
    pub zero_tol: f64,
    pub refinement: Vec<RefinementRow>,
    /// `C` in the least-squares fit `smallest |λ| ≈ C h²` over the levels.
    pub h2_constant: f64,
    /// False when nullity or index differ between levels.
    pub stable: bool,
}

impl SpectralReport {
    pub fn inconclusive(&self) -> bool {
        !self.stable
    }
}

fn level_counts(
    surface: SurfaceKind,
    grid_size: usize,
    zero_tol: f64,
) -> Result<(RefinementRow, Vec<ModeSpectrum>)> {
    let (mut nullity, mut index) = (0, 0);
    let mut smallest = f64::INFINITY;
    let mut quiet = 0;
    let mut modes = Vec::new();
    let mut n = 0u32;
    while quiet < 2 {
        if n > 64 {
            return Err(Error::Discretization("mode scan did not terminate".into()));
        }
        let eigs = mode_pencil(surface, n, grid_size)?.eigenvalues_below(REPORT_CAP, EIG_TOL);
        let mult = if n == 0 { 1 } else { 2 };
        let zero = eigs.iter().filter(|l| l.abs() < zero_tol).count();
        let neg = eigs.iter().filter(|&&l| l <= -zero_tol).count();
        if let Some(m) = eigs.iter().map(|l| l.abs()).reduce(f64::min) {
            smallest = smallest.min(m);
        }
        nullity += mult * zero;
        index += mult * neg;
        quiet = if zero + neg == 0 { quiet + 1 } else { 0 };
        modes.push(ModeSpectrum { n, multiplicity: mult, eigenvalues: eigs });
        n += 1;
    }
    Ok((
        RefinementRow { grid_size, zero_tol, nullity, index, smallest_abs: smallest, modes_scanned: n },
        modes,
    ))
}

pub fn nullity_and_index(surface: SurfaceKind) -> Result<SpectralReport> {
    nullity_and_index_with(surface, &DEFAULT_LEVELS, DEFAULT_ZERO_TOL)
}

/// Runs the mode scan at each level in `levels` (ascending grid sizes);
/// `zero_tol` applies at the finest level and scales with `h²` elsewhere.
pub fn nullity_and_index_with(
    surface: SurfaceKind,
    levels: &[usize],
    zero_tol: f64,
) -> Result<SpectralReport> {
    if levels.is_empty() || !(zero_tol > 0.0) {
        return Err(Error::InvalidArgument("need at least one level and a positive tolerance".into()));
    }
    let finest = *levels.iter().max().unwrap();
    let h_fine = 1.0 / (finest - 1) as f64;
    let mut refinement = Vec::new();
    let mut modes = Vec::new();
    for &g in levels {
        let h = 1.0 / (g - 1) as f64;
        let tol = zero_tol * (h / h_fine).powi(2);
        let (row, m) = level_counts(surface, g, tol)?;
        refinement.push(row);
        if g == finest {
            modes = m;
        }
    }
    let last = refinement.iter().find(|r| r.grid_size == finest).unwrap().clone();
    let stable = refinement.iter().all(|r| r.nullity == last.nullity && r.index == last.index);
    let (mut num, mut den) = (0.0, 0.0);
    for r in &refinement {
        let h2 = (1.0 / (r.grid_size - 1) as f64).powi(2);
        num += r.smallest_abs * h2;
        den += h2 * h2;
    }
    Ok(SpectralReport {
        surface,
        modes,
        nullity: last.nullity,
        index: last.index,
        zero_tol,
        refinement,
        h2_constant: num / den,
        stable,
    })
}

/// Normalized `M`-inner product between the discrete eigenvector of the
/// near-zero eigenvalue of mode 1 and the closed-form Jacobi field profile
/// (`r` on the disk, `sinh t + t/cosh t` on the catenoid).
pub fn kernel_correlation(surface: SurfaceKind, grid_size: usize) -> Result<f64> {
    let pencil = mode_pencil(surface, 1, grid_size)?;
    let eigs = pencil.eigenvalues_below(REPORT_CAP, EIG_TOL);
    let lambda = eigs
        .iter()
        .copied()
        .min_by(|a, b| a.abs().total_cmp(&b.abs()))
        .ok_or_else(|| Error::Discretization("mode 1 has no eigenvalues below the cap".into()))?;
    let v = pencil.eigenvector(lambda)?;
    let nodes = pencil_nodes(surface, 1, grid_size);
    let sys = mode_fundamental_solutions(1);
    let exact: Vec<f64> = nodes
        .iter()
        .map(|&a| match surface {
            SurfaceKind::Disk => a,
            SurfaceKind::Catenoid => sys.eval(a)[0][0],
        })
        .collect();
    let vv = pencil.mass_inner(&v, &v);
    let ee = pencil.mass_inner(&exact, &exact);
    Ok(pencil.mass_inner(&v, &exact).abs() / (vv * ee).sqrt())
}

/// Options for [`semicontinuity_probe`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeOptions {
    /// Chebyshev polynomials per mode.
    pub basis_size: usize,
    /// Highest azimuthal mode examined.
    pub max_mode: u32,
    /// Displacement step of the finite differences.
    pub eps: f64,
    /// Singular values below this fraction of the largest count as zero.
    pub rel_tol: f64,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        ProbeOptions { basis_size: 20, max_mode: 4, eps: 1e-3, rel_tol: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeMode {
    pub n: u32,
    pub near_zero: usize,
    /// The two smallest singular values relative to the largest.
    pub smallest: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeRow {
    pub t: f64,
    pub a: f64,
    pub near_zero: usize,
    pub modes: Vec<ProbeMode>,
    pub error: Option<String>,
}

fn chebyshev<T: crate::scalar::Scalar>(k: usize, x: T) -> T {
    let (mut p0, mut p1) = (T::cst(1.0), x);
    if k == 0 {
        return p0;
    }
    for _ in 1..k {
        let p2 = T::cst(2.0) * x * p1 - p0;
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Collocation matrix of the linearized `(H, Θ)` map of the deformed
/// catenoid restricted to `φ(z) cos nθ`, assembled by finite differences of
/// the displaced surface.
fn probe_matrix(
    patch: &RotationalPatch<'_>,
    metric: &crate::CapMetric,
    n: u32,
    opts: &ProbeOptions,
) -> Result<nalgebra::DMatrix<f64>> {
    use crate::jacobi::{displaced_boundary_angle, displaced_mean_curvature};
    use crate::scalar::{Jet, Scalar};
    let k = opts.basis_size;
    let (lo, hi) = patch.profile.domain;
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let nodes: Vec<f64> =
        (0..k)
            .map(|i| (mid - half * (std::f64::consts::PI * i as f64 / (k - 1) as f64).cos()).clamp(lo, hi))
            .collect();
    let mut m = nalgebra::DMatrix::zeros(k, k);
    let e = opts.eps;
    let richardson = |f: &dyn Fn(f64) -> Result<f64>| -> Result<f64> {
        let d1 = f(e)? - f(-e)?;
        let d2 = f(2.0 * e)? - f(-2.0 * e)?;
        Ok((8.0 * d1 - d2) / (12.0 * e))
    };
    for col in 0..k {
        let phi = move |u: Jet, v: Jet| {
            let x = (u - Jet::constant(mid)) / Jet::constant(half);
            chebyshev(col, x) * (v.scale(n as f64)).cos()
        };
        for (row, &z) in nodes.iter().enumerate() {
            let value = if row == 0 || row == k - 1 {
                richardson(&|eps| displaced_boundary_angle(patch, metric, &phi, z, 0.0, eps))?
            } else {
                richardson(&|eps| displaced_mean_curvature(patch, metric, &phi, z, 0.0, eps))?
            };
            m[(row, col)] = value;
        }
    }
    // equilibrate rows then columns
    for mut r in m.row_iter_mut() {
        let s = r.amax();
        if s > 0.0 {
            r /= s;
        }
    }
    for mut c in m.column_iter_mut() {
        let s = c.amax();
        if s > 0.0 {
            c /= s;
        }
    }
    Ok(m)
}

/// For each `t`, counts the near-zero singular values of the finite
/// difference Jacobi map of the critical catenoid of `g_t` over the modes
/// `0..=max_mode` (modes `n ≥ 1` counted twice).
pub fn semicontinuity_probe(t_list: &[f64], opts: &ProbeOptions) -> Vec<ProbeRow> {
    t_list
        .iter()
        .map(|&t| match probe_one(t, opts) {
            Ok(row) => row,
            Err(e) => ProbeRow { t, a: f64::NAN, near_zero: 0, modes: Vec::new(), error: Some(e.to_string()) },
        })
        .collect()
}

fn probe_one(t: f64, opts: &ProbeOptions) -> Result<ProbeRow> {
    let sol = solve_critical_catenoid(t)?;
    let metric = crate::CapMetric::new(t)?;
    let patch = RotationalPatch { profile: &sol.profile };
    let mut modes = Vec::new();
    let mut total = 0;
    for n in 0..=opts.max_mode {
        let m = probe_matrix(&patch, &metric, n, opts)?;
        let sv = m.singular_values();
        let max = sv.max();
        let mut rel: Vec<f64> = sv.iter().map(|s| s / max).collect();
        rel.sort_by(f64::total_cmp);
        let near_zero = rel.iter().filter(|&&s| s < opts.rel_tol).count();
        total += near_zero * if n == 0 { 1 } else { 2 };
        modes.push(ProbeMode { n, near_zero, smallest: rel.iter().take(2).copied().collect() });
    }
    Ok(ProbeRow { t, a: sol.a, near_zero: total, modes, error: None })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coarse_grids_are_rejected() {
        assert!(catenoid_mode_eigs(0, 33).is_err());
    }

    #[test]
    fn catenoid_mode_signs() {
        let one = catenoid_mode_eigs(1, 513).unwrap();
        assert!(one.iter().any(|l| l.abs() < 1e-5));
        let zero = catenoid_mode_eigs(0, 513).unwrap();
        assert!(zero.iter().all(|l| l.abs() > 1e-2));
        let three = catenoid_mode_eigs(3, 513).unwrap();
        assert!(three[0] > 0.0);
        assert!(three.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn disk_mode_signs() {
        let one = disk_mode_eigs(1, 257).unwrap();
        assert!(one[0].abs() < 1e-9, "{}", one[0]);
        let zero = disk_mode_eigs(0, 257).unwrap();
        assert_eq!(zero.iter().filter(|&&l| l < 0.0).count(), 1);
        assert!(disk_mode_eigs(2, 257).unwrap()[0] > 0.0);
    }

    #[test]
    fn correlation_with_closed_form() {
        assert!(kernel_correlation(SurfaceKind::Disk, 257).unwrap() > 0.999);
        assert!(kernel_correlation(SurfaceKind::Catenoid, 257).unwrap() > 0.999);
    }

    #[test]
    fn surface_names_round_trip() {
        for s in [SurfaceKind::Disk, SurfaceKind::Catenoid] {
            assert_eq!(s.to_string().parse::<SurfaceKind>().unwrap(), s);
        }
        assert!("torus".parse::<SurfaceKind>().is_err());
    }

    #[test]
    fn chebyshev_recurrence() {
        let x: f64 = 0.3;
        assert!((chebyshev(5, x) - (5.0 * x.acos()).cos()).abs() < 1e-14);
    }
}
