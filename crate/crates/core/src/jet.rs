//! Truncated Taylor series in one complex variable, used to differentiate
//! the entire function H through its roots.

use num_complex::Complex64 as C;
use std::ops::{Add, Div, Mul, Neg, Sub};

pub const ORDER: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    pub c: [C; ORDER],
}

impl Jet {
    pub fn constant(v: C) -> Self {
        let mut c = [C::new(0.0, 0.0); ORDER];
        c[0] = v;
        Jet { c }
    }

    /// The identity map expanded about `z0`.
    pub fn variable(z0: C) -> Self {
        let mut j = Jet::constant(z0);
        j.c[1] = C::new(1.0, 0.0);
        j
    }

    pub fn value(&self) -> C {
        self.c[0]
    }

    /// d-th derivative at the expansion point.
    pub fn derivative(&self, d: usize) -> C {
        let f: f64 = (1..=d).map(|k| k as f64).product();
        self.c[d] * f
    }

    pub fn scale(&self, s: C) -> Self {
        let mut out = *self;
        out.c.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// `exp(self - self(0))`: the exponential with its constant factor removed.
    pub fn exp_reduced(&self) -> Self {
        // y' = a' y with y(0) = 1
        let mut y = Jet::constant(C::new(1.0, 0.0));
        for n in 1..ORDER {
            let mut acc = C::new(0.0, 0.0);
            for k in 1..=n {
                acc += self.c[k] * y.c[n - k] * k as f64;
            }
            y.c[n] = acc / n as f64;
        }
        y
    }

    pub fn recip(&self) -> Self {
        let mut r = Jet::constant(C::new(1.0, 0.0) / self.c[0]);
        for n in 1..ORDER {
            let mut acc = C::new(0.0, 0.0);
            for k in 1..=n {
                acc += self.c[k] * r.c[n - k];
            }
            r.c[n] = -acc / self.c[0];
        }
        r
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(mut self, o: Jet) -> Jet {
        for k in 0..ORDER {
            self.c[k] += o.c[k];
        }
        self
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(mut self, o: Jet) -> Jet {
        for k in 0..ORDER {
            self.c[k] -= o.c[k];
        }
        self
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(C::new(-1.0, 0.0))
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let mut out = Jet::constant(C::new(0.0, 0.0));
        for i in 0..ORDER {
            for j in 0..ORDER - i {
                out.c[i + j] += self.c[i] * o.c[j];
            }
        }
        out
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, o: Jet) -> Jet {
        self * o.recip()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_and_division_match_closed_forms() {
        let z0 = C::new(0.3, -0.7);
        let x = Jet::variable(z0);
        // exp(2x)/(1+x) derivatives at z0 against the product rule
        let f = (x.scale(C::new(2.0, 0.0))).exp_reduced().scale((z0 * 2.0).exp())
            / (x + Jet::constant(C::new(1.0, 0.0)));
        let e = (z0 * 2.0).exp();
        let d1 = e * (2.0 / (1.0 + z0) - 1.0 / (1.0 + z0).powi(2));
        assert!((f.derivative(1) - d1).norm() < 1e-13);
        let h = 1e-3;
        let g = |z: C| (z * 2.0).exp() / (1.0 + z);
        let fd3 = (g(z0 + 2.0 * h) - 2.0 * g(z0 + h) + 2.0 * g(z0 - h) - g(z0 - 2.0 * h)) / (2.0 * h * h * h);
        assert!((f.derivative(3) - fd3).norm() < 1e-5 * fd3.norm());
    }
}
