//! Degree bookkeeping for non-degenerate families of free boundary minimal
//! surfaces.
//!
//! A non-degenerate family parametrized by a compact manifold `Z` with Morse
//! index `i` contributes `(−1)^i χ(Z)`. The disk family is parametrized by
//! `S²` (the unit normal of the equatorial plane), the catenoid family by two
//! copies of `RP²` (the axis, once per orientation).
//!
//! Euler characteristics are tabulated. [`morse_euler_oracle`] recomputes
//! them by counting critical points of random functions.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix2, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::capmetric::fibonacci_sphere;
use crate::error::{Error, Result};
use crate::spectrum::{SpectralReport, SurfaceKind};
use crate::{Mat3, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Manifold {
    S2,
    RP2,
    #[serde(rename = "RP2_pair")]
    RP2Pair,
}

impl Manifold {
    pub fn euler(&self) -> i64 {
        match self {
            Manifold::S2 => 2,
            Manifold::RP2 => 1,
            Manifold::RP2Pair => 2,
        }
    }
}

impl FromStr for Manifold {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "S2" => Ok(Manifold::S2),
            "RP2" => Ok(Manifold::RP2),
            "RP2_pair" => Ok(Manifold::RP2Pair),
            other => Err(Error::UnknownManifold(other.to_string())),
        }
    }
}

impl fmt::Display for Manifold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Manifold::S2 => "S2",
            Manifold::RP2 => "RP2",
            Manifold::RP2Pair => "RP2_pair",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    Disk,
    Annulus,
    Other,
}

impl FromStr for Topology {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "disk" => Ok(Topology::Disk),
            "annulus" => Ok(Topology::Annulus),
            "other" => Ok(Topology::Other),
            other => Err(Error::InvalidArgument(format!("unknown topology `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyRecord {
    pub manifold: Manifold,
    pub index: usize,
    pub euler: i64,
    pub contribution: i64,
}

impl FamilyRecord {
    pub fn new(manifold: Manifold, index: usize) -> Self {
        FamilyRecord {
            manifold,
            index,
            euler: manifold.euler(),
            contribution: family_contribution(index, manifold),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeLedger {
    pub topology: Topology,
    pub records: Vec<FamilyRecord>,
    pub total: i64,
}

/// `(−1)^index · χ(manifold)`.
pub fn family_contribution(index: usize, manifold: Manifold) -> i64 {
    let sign = if index % 2 == 0 { 1 } else { -1 };
    sign * manifold.euler()
}

/// Builds the ledger for `topology` from spectral reports. The disk needs a
/// disk report, the annulus a catenoid report; other topologies carry no
/// families.
pub fn assemble_degree(topology: Topology, reports: &[SpectralReport]) -> Result<DegreeLedger> {
    let find = |kind: SurfaceKind| {
        reports
            .iter()
            .find(|r| r.surface == kind)
            .ok_or_else(|| Error::MissingReport(kind.to_string()))
    };
    let records = match topology {
        Topology::Disk => vec![FamilyRecord::new(Manifold::S2, find(SurfaceKind::Disk)?.index)],
        Topology::Annulus => {
            vec![FamilyRecord::new(Manifold::RP2Pair, find(SurfaceKind::Catenoid)?.index)]
        }
        Topology::Other => Vec::new(),
    };
    Ok(ledger_from(topology, records))
}

/// Builds the ledger directly from an index value.
pub fn assemble_degree_from_index(topology: Topology, index: Option<usize>) -> Result<DegreeLedger> {
    let need = |name: &str| index.ok_or_else(|| Error::MissingReport(name.to_string()));
    let records = match topology {
        Topology::Disk => vec![FamilyRecord::new(Manifold::S2, need("disk")?)],
        Topology::Annulus => vec![FamilyRecord::new(Manifold::RP2Pair, need("catenoid")?)],
        Topology::Other => Vec::new(),
    };
    Ok(ledger_from(topology, records))
}

fn ledger_from(topology: Topology, records: Vec<FamilyRecord>) -> DegreeLedger {
    let total = records.iter().map(|r| r.contribution).sum();
    DegreeLedger { topology, records, total }
}

/// A polynomial in `(x, y, z)` as a list of `(coefficient, exponents)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    pub terms: Vec<(f64, [u32; 3])>,
}

fn pow_with_derivs(x: f64, e: u32) -> [f64; 3] {
    let p = |k: i32| if k < 0 { 0.0 } else { x.powi(k) };
    let e = e as i32;
    [p(e), e as f64 * p(e - 1), (e * (e - 1)) as f64 * p(e - 2)]
}

impl Polynomial {
    pub fn value(&self, x: &Vec3) -> f64 {
        self.terms
            .iter()
            .map(|(c, e)| c * x[0].powi(e[0] as i32) * x[1].powi(e[1] as i32) * x[2].powi(e[2] as i32))
            .sum()
    }

    pub fn gradient_hessian(&self, x: &Vec3) -> (Vec3, Mat3) {
        let mut g = Vec3::zeros();
        let mut h = Mat3::zeros();
        for (c, e) in &self.terms {
            let p = [0, 1, 2].map(|i| pow_with_derivs(x[i], e[i]));
            for i in 0..3 {
                let mut gi = *c;
                for k in 0..3 {
                    gi *= if k == i { p[k][1] } else { p[k][0] };
                }
                g[i] += gi;
                for j in 0..3 {
                    let mut hij = *c;
                    for k in 0..3 {
                        let order = (k == i) as usize + (k == j) as usize;
                        hij *= p[k][order];
                    }
                    h[(i, j)] += hij;
                }
            }
        }
        (g, h)
    }

    /// All monomials of the listed degrees with coefficients uniform in
    /// `[−1, 1]`.
    pub fn random(rng: &mut impl Rng, degrees: &[u32]) -> Self {
        let mut terms = Vec::new();
        for &d in degrees {
            for a in 0..=d {
                for b in 0..=(d - a) {
                    terms.push((rng.random_range(-1.0..1.0), [a, b, d - a - b]));
                }
            }
        }
        Polynomial { terms }
    }

    pub fn height() -> Self {
        Polynomial { terms: vec![(1.0, [0, 0, 1])] }
    }
}

/// A nondegenerate critical point on the sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPoint {
    pub x: Vec3,
    pub index: usize,
    /// Smallest `|eigenvalue|` of the Riemannian Hessian.
    pub min_curvature: f64,
}

fn tangent_basis(x: &Vec3) -> (Vec3, Vec3) {
    let helper = if x[0].abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let e1 = (helper - x * x.dot(&helper)).normalize();
    (e1, x.cross(&e1))
}

/// Riemannian gradient and Hessian of `f|S²` in a tangent basis at `x`.
fn riemannian_derivatives(f: &Polynomial, x: &Vec3) -> (nalgebra::Vector2<f64>, Matrix2<f64>) {
    let (g, h) = f.gradient_hessian(x);
    let (e1, e2) = tangent_basis(x);
    let radial = x.dot(&g);
    let basis = [e1, e2];
    let grad = nalgebra::Vector2::new(g.dot(&e1), g.dot(&e2));
    let hess = Matrix2::from_fn(|i, j| {
        basis[i].dot(&(h * basis[j])) - if i == j { radial } else { 0.0 }
    });
    (grad, hess)
}

fn newton_on_sphere(f: &Polynomial, start: &Vec3) -> Option<Vec3> {
    let mut x = start.normalize();
    for _ in 0..60 {
        let (grad, hess) = riemannian_derivatives(f, &x);
        if grad.norm() < 1e-13 {
            return Some(x);
        }
        let step = hess.lu().solve(&(-grad))?;
        let len = step.norm();
        let step = if len > 0.3 { step * (0.3 / len) } else { step };
        let (e1, e2) = tangent_basis(&x);
        x = (x + e1 * step[0] + e2 * step[1]).normalize();
    }
    let (grad, _) = riemannian_derivatives(f, &x);
    (grad.norm() < 1e-11).then_some(x)
}

/// Critical points of `f` restricted to the sphere, found by Newton's method
/// from a quasi-uniform mesh of `seeds` points. With `antipodal`, `x` and
/// `−x` are identified and one representative is kept.
pub fn critical_points(f: &Polynomial, seeds: usize, antipodal: bool) -> Vec<CriticalPoint> {
    let mut found: Vec<CriticalPoint> = Vec::new();
    for s in fibonacci_sphere(seeds) {
        let Some(x) = newton_on_sphere(f, &s) else { continue };
        let same = |p: &CriticalPoint| (p.x - x).norm() < 1e-6 || (antipodal && (p.x + x).norm() < 1e-6);
        if found.iter().any(same) {
            continue;
        }
        let (_, hess) = riemannian_derivatives(f, &x);
        let eig = SymmetricEigen::new(0.5 * (hess + hess.transpose())).eigenvalues;
        found.push(CriticalPoint {
            x,
            index: eig.iter().filter(|&&l| l < 0.0).count(),
            min_curvature: eig.iter().fold(f64::INFINITY, |m, l| m.min(l.abs())),
        });
    }
    found
}

/// `Σ (−1)^index` over critical points.
pub fn morse_sum(points: &[CriticalPoint]) -> i64 {
    points.iter().map(|p| if p.index % 2 == 0 { 1 } else { -1 }).sum()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MorseOutcome {
    pub manifold: Manifold,
    pub euler: i64,
    pub per_trial: Vec<i64>,
    pub discarded: usize,
}

const MORSE_SEEDS: usize = 2000;
const DEGENERACY_TOL: f64 = 1e-4;

/// Euler characteristic of `S²` or `RP²` by Morse counting over
/// `trial_count` random functions; trials with a nearly degenerate critical
/// point are discarded and resampled (at most `4 · trial_count` times).
/// `RP2_pair` counts two copies of `RP²`.
pub fn morse_euler_oracle(manifold: Manifold, trial_count: usize, seed: u64) -> Result<MorseOutcome> {
    if trial_count == 0 {
        return Err(Error::InvalidArgument("trial_count must be at least 1".into()));
    }
    let (antipodal, degrees, copies): (bool, &[u32], i64) = match manifold {
        Manifold::S2 => (false, &[1, 2, 3], 1),
        Manifold::RP2 => (true, &[2, 4], 1),
        Manifold::RP2Pair => (true, &[2, 4], 2),
    };
    let cap = 4 * trial_count;
    let mut per_trial = Vec::with_capacity(trial_count);
    let mut discarded = 0;
    let mut attempt = 0u64;
    while per_trial.len() < trial_count {
        if discarded >= cap {
            return Err(Error::DegenerateTrials(discarded));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(attempt));
        attempt += 1;
        let f = Polynomial::random(&mut rng, degrees);
        let points = critical_points(&f, MORSE_SEEDS, antipodal);
        let scale = f.terms.iter().fold(0.0f64, |m, (c, _)| m.max(c.abs()));
        if points.is_empty() || points.iter().any(|p| p.min_curvature < DEGENERACY_TOL * scale) {
            discarded += 1;
            continue;
        }
        per_trial.push(copies * morse_sum(&points));
    }
    let euler = per_trial[0];
    if per_trial.iter().any(|&v| v != euler) {
        return Err(Error::MorseDisagreement(per_trial));
    }
    Ok(MorseOutcome { manifold, euler, per_trial, discarded })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contributions() {
        assert_eq!(family_contribution(0, Manifold::S2), 2);
        assert_eq!(family_contribution(1, Manifold::S2), -2);
        for i in 0..6 {
            assert_eq!(family_contribution(i, Manifold::RP2Pair), if i % 2 == 0 { 2 } else { -2 });
            assert_eq!(family_contribution(i + 1, Manifold::RP2), -family_contribution(i, Manifold::RP2));
        }
        assert!(matches!("T2".parse::<Manifold>(), Err(Error::UnknownManifold(_))));
        assert_eq!("RP2_pair".parse::<Manifold>().unwrap(), Manifold::RP2Pair);
    }

    #[test]
    fn ledgers() {
        for idx in 0..4 {
            let d = assemble_degree_from_index(Topology::Disk, Some(idx)).unwrap();
            assert_eq!(d.total.abs(), 2);
            let a = assemble_degree_from_index(Topology::Annulus, Some(idx)).unwrap();
            assert_eq!(a.total.abs(), 2);
        }
        assert_eq!(assemble_degree_from_index(Topology::Other, None).unwrap().total, 0);
        assert!(matches!(assemble_degree(Topology::Disk, &[]), Err(Error::MissingReport(_))));
    }

    #[test]
    fn polynomial_derivatives() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = Polynomial::random(&mut rng, &[1, 2, 3]);
        let x = Vec3::new(0.3, -0.5, 0.7);
        let (g, h) = f.gradient_hessian(&x);
        let eps = 1e-5;
        for i in 0..3 {
            let mut e = Vec3::zeros();
            e[i] = eps;
            let fd = (f.value(&(x + e)) - f.value(&(x - e))) / (2.0 * eps);
            assert!((fd - g[i]).abs() < 1e-8);
            let (gp, _) = f.gradient_hessian(&(x + e));
            let (gm, _) = f.gradient_hessian(&(x - e));
            for j in 0..3 {
                assert!(((gp[j] - gm[j]) / (2.0 * eps) - h[(i, j)]).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn height_function() {
        let pts = critical_points(&Polynomial::height(), 500, false);
        assert_eq!(pts.len(), 2);
        let mut idx: Vec<usize> = pts.iter().map(|p| p.index).collect();
        idx.sort();
        assert_eq!(idx, vec![0, 2]);
        assert_eq!(morse_sum(&pts), 2);
    }

    #[test]
    fn oracle_small_runs() {
        assert_eq!(morse_euler_oracle(Manifold::S2, 3, 0).unwrap().euler, 2);
        assert_eq!(morse_euler_oracle(Manifold::RP2, 3, 0).unwrap().euler, 1);
        assert_eq!(morse_euler_oracle(Manifold::RP2, 2, 7).unwrap(), morse_euler_oracle(Manifold::RP2, 2, 7).unwrap());
    }
}
