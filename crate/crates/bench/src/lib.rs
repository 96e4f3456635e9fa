//! Fixtures shared by the criterion benches in `benches/`.

pub use fbmin::{CapMetric, SurfaceKind, Vec3};

/// Points spread through the open unit ball: shells of quasi-uniform
/// directions at radii `k / (shells + 1)`.
pub fn ball_points(shells: usize, per_shell: usize) -> Vec<Vec3> {
    let dirs = fbmin::capmetric::fibonacci_sphere(per_shell);
    (1..=shells)
        .flat_map(|k| {
            let r = k as f64 / (shells + 1) as f64;
            dirs.iter().map(move |d| d * r)
        })
        .collect()
}

/// Uniform grid of `n` parameters in `[0, t_max]`.
pub fn t_grid(t_max: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2);
    (0..n).map(|i| t_max * i as f64 / (n - 1) as f64).collect()
}
