//! Complex numbers carried as `mantissa * exp(scale)` so that exponential sums
//! far outside the double range can be multiplied and divided safely.

use num_complex::Complex64 as C;
use std::ops::{Div, Mul, Neg};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scaled {
    pub m: C,
    pub s: f64,
}

impl Scaled {
    pub const ZERO: Scaled = Scaled { m: C { re: 0.0, im: 0.0 }, s: 0.0 };

    pub fn new(m: C, s: f64) -> Self {
        Scaled { m, s }.normalize()
    }

    pub fn from_c(c: C) -> Self {
        Scaled { m: c, s: 0.0 }.normalize()
    }

    /// `c * exp(w)` without forming `exp(w)`.
    pub fn exp_times(w: C, c: C) -> Self {
        Scaled { m: c * C::from_polar(1.0, w.im), s: w.re }.normalize()
    }

    pub fn exp(w: C) -> Self {
        Self::exp_times(w, C::new(1.0, 0.0))
    }

    fn normalize(self) -> Self {
        let a = self.m.norm();
        if a == 0.0 || !a.is_finite() {
            return if a == 0.0 { Self::ZERO } else { self };
        }
        let k = a.ln();
        Scaled { m: self.m / a, s: self.s + k }
    }

    pub fn is_zero(&self) -> bool {
        self.m.norm() == 0.0
    }

    /// log|value|; `-inf` for zero.
    pub fn ln_abs(&self) -> f64 {
        let a = self.m.norm();
        if a == 0.0 {
            f64::NEG_INFINITY
        } else {
            a.ln() + self.s
        }
    }

    /// Principal-branch complex logarithm.
    pub fn ln(&self) -> C {
        C::new(self.ln_abs(), self.m.arg())
    }

    pub fn to_c(&self) -> C {
        if self.is_zero() {
            return C::new(0.0, 0.0);
        }
        self.m * self.s.exp()
    }

    /// Value divided by `exp(shift)`.
    pub fn to_c_shifted(&self, shift: f64) -> C {
        if self.is_zero() {
            return C::new(0.0, 0.0);
        }
        self.m * (self.s - shift).exp()
    }

    pub fn abs(&self) -> f64 {
        self.to_c().norm()
    }

    pub fn conj(&self) -> Self {
        Scaled { m: self.m.conj(), s: self.s }
    }

    pub fn scale(&self, c: C) -> Self {
        Scaled { m: self.m * c, s: self.s }.normalize()
    }

    pub fn add(&self, o: &Scaled) -> Self {
        if self.is_zero() {
            return *o;
        }
        if o.is_zero() {
            return *self;
        }
        let s = self.s.max(o.s);
        Scaled::new(self.m * (self.s - s).exp() + o.m * (o.s - s).exp(), s)
    }

    pub fn sub(&self, o: &Scaled) -> Self {
        self.add(&-*o)
    }

    pub fn powi(&self, n: i32) -> Self {
        Scaled::new(self.m.powi(n), self.s * n as f64)
    }
}

impl Mul for Scaled {
    type Output = Scaled;
    fn mul(self, o: Scaled) -> Scaled {
        Scaled::new(self.m * o.m, self.s + o.s)
    }
}

impl Div for Scaled {
    type Output = Scaled;
    fn div(self, o: Scaled) -> Scaled {
        Scaled::new(self.m / o.m, self.s - o.s)
    }
}

impl Neg for Scaled {
    type Output = Scaled;
    fn neg(self) -> Scaled {
        Scaled { m: -self.m, s: self.s }
    }
}

/// Accumulates `Σ c_k exp(w_k)` with the largest real exponent factored out.
#[derive(Clone, Debug, Default)]
pub struct ExpSum {
    terms: Vec<(C, C)>,
}

impl ExpSum {
    pub fn new() -> Self {
        ExpSum { terms: Vec::new() }
    }

    pub fn with_capacity(n: usize) -> Self {
        ExpSum { terms: Vec::with_capacity(n) }
    }

    pub fn push(&mut self, w: C, c: C) {
        if c.norm() != 0.0 {
            self.terms.push((w, c));
        }
    }

    pub fn push_scaled(&mut self, v: Scaled) {
        if !v.is_zero() {
            self.terms.push((C::new(v.s, 0.0), v.m));
        }
    }

    /// Sum together with the largest single-term magnitude, both scaled.
    pub fn eval_with_max(&self) -> (Scaled, f64) {
        if self.terms.is_empty() {
            return (Scaled::ZERO, f64::NEG_INFINITY);
        }
        let ref_s = self
            .terms
            .iter()
            .map(|(w, c)| w.re + c.norm().ln())
            .fold(f64::NEG_INFINITY, f64::max);
        let mut acc = C::new(0.0, 0.0);
        for (w, c) in &self.terms {
            acc += c * (w - ref_s).exp();
        }
        (Scaled::new(acc, ref_s), ref_s)
    }

    pub fn eval(&self) -> Scaled {
        self.eval_with_max().0
    }

    /// |sum| / max|term|, the cancellation ratio of the sum.
    pub fn relative_magnitude(&self) -> f64 {
        let (v, m) = self.eval_with_max();
        if v.is_zero() {
            0.0
        } else {
            (v.ln_abs() - m).exp()
        }
    }
}

/// `(e^w - 1) / w`, continuous through `w = 0`.
pub fn phi1(w: C) -> C {
    if w.norm() < PHI1_SWITCH {
        phi1_series(w)
    } else {
        phi1_direct(w)
    }
}

pub const PHI1_SWITCH: f64 = 1e-3;

pub fn phi1_series(w: C) -> C {
    let mut term = C::new(1.0, 0.0);
    let mut acc = term;
    for k in 1..10 {
        term *= w / (k as f64 + 1.0);
        acc += term;
    }
    acc
}

pub fn phi1_direct(w: C) -> C {
    expm1(w) / w
}

/// `e^w - 1` without cancellation for small `w`.
pub fn expm1(w: C) -> C {
    let (x, y) = (w.re, w.im);
    let s = (0.5 * y).sin();
    C::new(x.exp_m1() * y.cos() - 2.0 * s * s, x.exp() * y.sin())
}
