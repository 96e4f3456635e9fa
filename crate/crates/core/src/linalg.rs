//! Small numerical kernels: quadrature, finite-difference weights, bracketed
//! root finding and the symmetric tridiagonal pencil eigen-solver used by
//! [`crate::spectrum`].

use crate::error::{Error, Result};

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=m {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pm = if m == 1 { x } else { p1 };
            let pm1 = if m == 1 { 1.0 } else { p0 };
            dp = m as f64 * (x * pm - pm1) / (x * x - 1.0);
            let dx = pm / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[m - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    (nodes, weights)
}

/// Fornberg's finite-difference weights for the derivatives `0..=order` at
/// `x0` from the stencil `xs`. Row `k` of the result holds the weights of
/// the `k`-th derivative.
pub fn fornberg_weights(x0: f64, xs: &[f64], order: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    let mut c = vec![vec![0.0; n]; order + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Bisection on a sign change of `f` over `[lo, hi]`.
pub fn bisect(mut f: impl FnMut(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::InvalidArgument(format!(
            "no sign change on [{lo}, {hi}]"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol || mid == lo || mid == hi {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// The generalized eigenproblem `K x = λ M x` for symmetric tridiagonal `K`
/// and symmetric positive definite tridiagonal `M`.
///
/// Eigenvalues are located by bisection on the Sylvester inertia of
/// `K − σ M`, obtained from the pivots of its `LDLᵀ` factorization.
#[derive(Debug, Clone)]
pub struct TridiagonalPencil {
    pub k_diag: Vec<f64>,
    pub k_off: Vec<f64>,
    pub m_diag: Vec<f64>,
    pub m_off: Vec<f64>,
}

impl TridiagonalPencil {
    pub fn len(&self) -> usize {
        self.k_diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k_diag.is_empty()
    }

    /// Number of eigenvalues strictly below `sigma`.
    pub fn count_below(&self, sigma: f64) -> usize {
        let n = self.len();
        let mut count = 0;
        let mut pivot = 0.0f64;
        for i in 0..n {
            let d = self.k_diag[i] - sigma * self.m_diag[i];
            pivot = if i == 0 {
                d
            } else {
                let e = self.k_off[i - 1] - sigma * self.m_off[i - 1];
                let prev = if pivot == 0.0 { f64::EPSILON * (e.abs() + 1.0) } else { pivot };
                d - e * e / prev
            };
            if pivot < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn lower_bound(&self) -> f64 {
        let mut lo = -1.0;
        while self.count_below(lo) > 0 {
            lo *= 2.0;
            if lo < -1e300 {
                break;
            }
        }
        lo
    }

    /// All eigenvalues below `cap`, ascending, each to absolute accuracy `tol`.
    pub fn eigenvalues_below(&self, cap: f64, tol: f64) -> Vec<f64> {
        let total = self.count_below(cap);
        let lo0 = self.lower_bound();
        (0..total)
            .map(|k| {
                let (mut lo, mut hi) = (lo0, cap);
                while hi - lo > tol {
                    let mid = 0.5 * (lo + hi);
                    if mid == lo || mid == hi {
                        break;
                    }
                    if self.count_below(mid) > k {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                0.5 * (lo + hi)
            })
            .collect()
    }

    /// `y = M x`.
    pub fn apply_mass(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = self.m_diag[i] * x[i];
                if i > 0 {
                    s += self.m_off[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    s += self.m_off[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    pub fn mass_inner(&self, x: &[f64], y: &[f64]) -> f64 {
        self.apply_mass(x).iter().zip(y).map(|(a, b)| a * b).sum()
    }

    /// Eigenvector for an isolated eigenvalue `lambda` by shifted inverse
    /// iteration, normalized to unit `M`-norm with a nonnegative last entry.
    pub fn eigenvector(&self, lambda: f64) -> Result<Vec<f64>> {
        let n = self.len();
        let scale = self.k_diag.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let shift = lambda + 1e-10 * scale.max(1.0) * f64::EPSILON.sqrt();
        let diag: Vec<f64> = (0..n).map(|i| self.k_diag[i] - shift * self.m_diag[i]).collect();
        let off: Vec<f64> = (0..n - 1).map(|i| self.k_off[i] - shift * self.m_off[i]).collect();
        let mut x = vec![1.0; n];
        for (i, v) in x.iter_mut().enumerate() {
            *v += 0.01 * (i as f64 * 0.731).sin();
        }
        for _ in 0..6 {
            let rhs = self.apply_mass(&x);
            x = solve_tridiagonal(&off, &diag, &off, &rhs)?;
            let norm = self.mass_inner(&x, &x).sqrt();
            if !norm.is_finite() || norm == 0.0 {
                return Err(Error::Discretization("inverse iteration breakdown".into()));
            }
            x.iter_mut().for_each(|v| *v /= norm);
        }
        if x[n - 1] < 0.0 {
            x.iter_mut().for_each(|v| *v = -*v);
        }
        Ok(x)
    }
}

/// Tridiagonal solve with partial pivoting (LAPACK `gtsv` style).
pub fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut du = sup.to_vec();
    du.push(0.0);
    let mut dl = sub.to_vec();
    dl.push(0.0);
    let mut du2 = vec![0.0; n];
    let mut b = rhs.to_vec();
    for i in 0..n.saturating_sub(1) {
        if d[i].abs() >= dl[i].abs() {
            if d[i] == 0.0 {
                d[i] = f64::MIN_POSITIVE;
            }
            let fact = dl[i] / d[i];
            d[i + 1] -= fact * du[i];
            b[i + 1] -= fact * b[i];
            dl[i] = 0.0;
        } else {
            let fact = d[i] / dl[i];
            d[i] = dl[i];
            let tmp = d[i + 1];
            d[i + 1] = du[i] - fact * tmp;
            if i + 1 < n - 1 {
                du2[i] = du[i + 1];
                du[i + 1] = -fact * du2[i];
            }
            du[i] = tmp;
            b.swap(i, i + 1);
            b[i + 1] -= fact * b[i];
        }
    }
    if d[n - 1] == 0.0 {
        d[n - 1] = f64::MIN_POSITIVE;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = b[n - 1] / d[n - 1];
    if n > 1 {
        x[n - 2] = (b[n - 2] - du[n - 2] * x[n - 1]) / d[n - 2];
    }
    for i in (0..n.saturating_sub(2)).rev() {
        x[i] = (b[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / d[i];
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Discretization("singular tridiagonal system".into()));
    }
    Ok(x)
}
