//! Numerical toolkit for free boundary minimal surfaces in the unit ball.
//!
//! The ball carries the one-parameter family of spherical-cap metrics
//! `g_t = δ + t²/(1 − t²|x|²) x⊗x`, each of constant sectional curvature `t²`.
//! The crate builds the two rotationally symmetric free boundary minimal
//! surfaces of this family (the equatorial disk and the critical catenoid),
//! analyses their Jacobi operators mode by mode, and assembles the mapping
//! degree contributed by the resulting non-degenerate families.
//!
//! Module map:
//!
//! * [`capmetric`]: closed-form metric, Christoffel symbols, Ricci tensor and
//!   conformal variation of Ricci.
//! * [`rotprofile`]: surfaces of revolution, the `t0 = coth t0` constants, the
//!   minimal profile ODE and free-boundary shooting with continuation in `t`.
//! * [`jacobi`]: Jacobi operators of the critical disk and catenoid, Fourier
//!   reduction, fundamental systems and variation formulas.
//! * [`spectrum`]: Robin Sturm–Liouville eigen-solver, nullity and index.
//! * [`degree`]: family contributions, a Morse-counting Euler characteristic
//!   oracle and assembly of the final degree.
//!
//! Orientation conventions: the boundary normal `ν` of the ball points
//! outward, surface normals of revolution surfaces point away from the axis,
//! and the mean curvature is `H = tr(∇N)` (a round sphere of radius `R` with
//! outward normal has `H = 2/R`).

pub mod capmetric;
pub mod degree;
pub mod error;
pub mod geometry;
pub mod jacobi;
pub mod linalg;
pub mod ode;
pub mod rotprofile;
pub mod scalar;
pub mod spectrum;

pub use capmetric::{AmbientMetric, AmbientScalar, CapMetric, MetricSample};
pub use degree::{DegreeLedger, FamilyRecord, Manifold, Topology};
pub use error::{Error, Result};
pub use jacobi::{FourierModeProblem, SurfaceFunction};
pub use rotprofile::{BoundaryHit, CriticalConstants, Profile};
pub use spectrum::{SpectralReport, SurfaceKind};

pub type Vec3 = nalgebra::Vector3<f64>;
pub type Mat3 = nalgebra::Matrix3<f64>;
