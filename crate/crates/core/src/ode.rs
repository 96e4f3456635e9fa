//! Classical fourth-order Runge–Kutta on fixed-size states.

pub fn rk4_step<const N: usize>(
    f: &impl Fn(f64, &[f64; N]) -> [f64; N],
    s: f64,
    y: &[f64; N],
    h: f64,
) -> [f64; N] {
    let k1 = f(s, y);
    let k2 = f(s + 0.5 * h, &axpy(y, 0.5 * h, &k1));
    let k3 = f(s + 0.5 * h, &axpy(y, 0.5 * h, &k2));
    let k4 = f(s + h, &axpy(y, h, &k3));
    let mut out = *y;
    for i in 0..N {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

fn axpy<const N: usize>(y: &[f64; N], a: f64, k: &[f64; N]) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        out[i] += a * k[i];
    }
    out
}

/// Integrates from `s0` to `s1` with `steps` equal steps and returns the
/// trajectory including both endpoints.
pub fn rk4_path<const N: usize>(
    f: &impl Fn(f64, &[f64; N]) -> [f64; N],
    s0: f64,
    s1: f64,
    y0: [f64; N],
    steps: usize,
) -> Vec<(f64, [f64; N])> {
    let h = (s1 - s0) / steps as f64;
    let mut out = Vec::with_capacity(steps + 1);
    let mut y = y0;
    out.push((s0, y));
    for i in 0..steps {
        let s = s0 + i as f64 * h;
        y = rk4_step(f, s, &y, h);
        let next = if i + 1 == steps { s1 } else { s0 + (i + 1) as f64 * h };
        out.push((next, y));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fourth_order_convergence_on_harmonic_oscillator() {
        let f = |_s: f64, y: &[f64; 2]| [y[1], -y[0]];
        let err = |steps| {
            let path = rk4_path(&f, 0.0, 2.0, [0.0, 1.0], steps);
            (path.last().unwrap().1[0] - 2.0f64.sin()).abs()
        };
        let ratio = err(50) / err(100);
        assert!((ratio - 16.0).abs() < 1.0, "ratio {ratio}");
    }
}
