//! A minimal scalar abstraction and a second-order bivariate jet.
//!
//! [`Jet`] carries a value together with its first and second partial
//! derivatives with respect to two surface parameters `(u, v)`. Arithmetic on
//! jets propagates derivatives exactly (forward-mode differentiation), which
//! lets the geometric routines obtain second fundamental forms of displaced
//! surfaces without numerical differentiation in the parameter domain.

use std::ops::{Add, Div, Mul, Neg, Sub};

pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn cst(v: f64) -> Self;
    fn value(&self) -> f64;
    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn sinh(self) -> Self;
    fn cosh(self) -> Self;
    fn tanh(self) -> Self;

    fn scale(self, k: f64) -> Self {
        self * Self::cst(k)
    }
    fn powi(self, n: u32) -> Self {
        let mut acc = Self::cst(1.0);
        for _ in 0..n {
            acc = acc * self;
        }
        acc
    }
}

impl Scalar for f64 {
    fn cst(v: f64) -> Self {
        v
    }
    fn value(&self) -> f64 {
        *self
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn sinh(self) -> Self {
        f64::sinh(self)
    }
    fn cosh(self) -> Self {
        f64::cosh(self)
    }
    fn tanh(self) -> Self {
        f64::tanh(self)
    }
}

/// Value and partial derivatives up to order two in `(u, v)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet {
    pub v: f64,
    pub du: f64,
    pub dv: f64,
    pub duu: f64,
    pub duv: f64,
    pub dvv: f64,
}

impl Jet {
    pub fn constant(v: f64) -> Self {
        Jet { v, ..Default::default() }
    }

    /// The coordinate function `u` at `u = value`.
    pub fn var_u(value: f64) -> Self {
        Jet { v: value, du: 1.0, ..Default::default() }
    }

    /// The coordinate function `v` at `v = value`.
    pub fn var_v(value: f64) -> Self {
        Jet { v: value, dv: 1.0, ..Default::default() }
    }

    /// Composition with a scalar function given its value and first two
    /// derivatives at `self.v`.
    pub fn chain(self, f: f64, f1: f64, f2: f64) -> Self {
        Jet {
            v: f,
            du: f1 * self.du,
            dv: f1 * self.dv,
            duu: f2 * self.du * self.du + f1 * self.duu,
            duv: f2 * self.du * self.dv + f1 * self.duv,
            dvv: f2 * self.dv * self.dv + f1 * self.dvv,
        }
    }

    /// Composition with a univariate function known through its Taylor
    /// data `[f, f', f'']` at `self.v`.
    pub fn compose(self, taylor: [f64; 3]) -> Self {
        self.chain(taylor[0], taylor[1], taylor[2])
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet {
            v: self.v + o.v,
            du: self.du + o.du,
            dv: self.dv + o.dv,
            duu: self.duu + o.duu,
            duv: self.duv + o.duv,
            dvv: self.dvv + o.dvv,
        }
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        self + (-o)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet {
            v: -self.v,
            du: -self.du,
            dv: -self.dv,
            duu: -self.duu,
            duv: -self.duv,
            dvv: -self.dvv,
        }
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        Jet {
            v: self.v * o.v,
            du: self.du * o.v + self.v * o.du,
            dv: self.dv * o.v + self.v * o.dv,
            duu: self.duu * o.v + 2.0 * self.du * o.du + self.v * o.duu,
            duv: self.duv * o.v + self.du * o.dv + self.dv * o.du + self.v * o.duv,
            dvv: self.dvv * o.v + 2.0 * self.dv * o.dv + self.v * o.dvv,
        }
    }
}

impl Div for Jet {
    type Output = Jet;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Jet) -> Jet {
        let r = 1.0 / o.v;
        self * o.chain(r, -r * r, 2.0 * r * r * r)
    }
}

impl Scalar for Jet {
    fn cst(v: f64) -> Self {
        Jet::constant(v)
    }
    fn value(&self) -> f64 {
        self.v
    }
    fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * self.v))
    }
    fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, e, e)
    }
    fn sin(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(s, c, -s)
    }
    fn cos(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(c, -s, -c)
    }
    fn sinh(self) -> Self {
        let (s, c) = (self.v.sinh(), self.v.cosh());
        self.chain(s, c, s)
    }
    fn cosh(self) -> Self {
        let (s, c) = (self.v.sinh(), self.v.cosh());
        self.chain(c, s, c)
    }
    fn tanh(self) -> Self {
        let th = self.v.tanh();
        let sech2 = 1.0 - th * th;
        self.chain(th, sech2, -2.0 * th * sech2)
    }
}

pub type JetVec = [Jet; 3];

pub fn cross<T: Scalar>(a: &[T; 3], b: &[T; 3]) -> [T; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn dot<T: Scalar>(a: &[T; 3], b: &[T; 3]) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd2(f: impl Fn(f64, f64) -> f64, u: f64, v: f64) -> [f64; 5] {
        let h = 1e-4;
        [
            (f(u + h, v) - f(u - h, v)) / (2.0 * h),
            (f(u, v + h) - f(u, v - h)) / (2.0 * h),
            (f(u + h, v) - 2.0 * f(u, v) + f(u - h, v)) / (h * h),
            (f(u + h, v + h) - f(u + h, v - h) - f(u - h, v + h) + f(u - h, v - h)) / (4.0 * h * h),
            (f(u, v + h) - 2.0 * f(u, v) + f(u, v - h)) / (h * h),
        ]
    }

    fn generic<T: Scalar>(u: T, v: T) -> T {
        (u * v.cosh()).sin() + (u * u + T::cst(2.0)).sqrt() / (T::cst(1.5) + v.tanh()) - (u - v).exp()
    }

    #[test]
    fn jet_derivatives_match_finite_differences() {
        let (u, v) = (0.3, -0.7);
        let j = generic(Jet::var_u(u), Jet::var_v(v));
        let fd = fd2(|a, b| generic(a, b), u, v);
        assert!((j.v - generic(u, v)).abs() < 1e-15);
        for (got, want) in [j.du, j.dv, j.duu, j.duv, j.dvv].iter().zip(fd) {
            assert!((got - want).abs() < 1e-6, "{got} vs {want}");
        }
    }

    #[test]
    fn sinh_cosh_identity_holds_on_jets() {
        let x = Jet::var_u(0.4) * Jet::var_v(1.3);
        let r = x.cosh() * x.cosh() - x.sinh() * x.sinh();
        assert!((r.v - 1.0).abs() < 1e-14);
        for d in [r.du, r.dv, r.duu, r.duv, r.dvv] {
            assert!(d.abs() < 1e-13);
        }
    }
}
