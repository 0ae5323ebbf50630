//! Fractional Sobolev norms of zero-extended time signals and the interpolation checks
//! built on them.

use num_complex::Complex64 as C;
use num_rational::Ratio;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;
use serde::Serialize;
use std::f64::consts::PI;

/// Zero padding factor of the discrete transform.
pub const PAD: usize = 16;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SobolevNorm {
    pub s: f64,
    pub value: f64,
}

/// `(ξ_k, |û(ξ_k)|², Δξ)` of the zero extension of samples `u(k dt)`, unitary convention.
pub fn power_spectrum(u: &[f64], dt: f64) -> (Vec<f64>, Vec<f64>, f64) {
    let n = (u.len() * PAD).next_power_of_two();
    let mut buf: Vec<C> = u.iter().map(|&v| C::new(v, 0.0)).chain(std::iter::repeat(C::new(0.0, 0.0))).take(n).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let dxi = 2.0 * PI / (n as f64 * dt);
    let c = dt / (2.0 * PI).sqrt();
    let xi: Vec<f64> = (0..n).map(|k| if k <= n / 2 { k as f64 } else { k as f64 - n as f64 } * dxi).collect();
    let pw: Vec<f64> = buf.iter().map(|v| (v * c).norm_sqr()).collect();
    (xi, pw, dxi)
}

/// `(Σ weight(ξ_k) |û(ξ_k)|² Δξ)^{1/2}`.
pub fn weighted_norm(u: &[f64], dt: f64, weight: impl Fn(f64) -> f64) -> f64 {
    let (xi, pw, dxi) = power_spectrum(u, dt);
    (xi.iter().zip(&pw).map(|(x, p)| weight(*x) * p).sum::<f64>() * dxi).sqrt()
}

/// `‖u‖_{H^s(ℝ)}` of the zero extension, `s ∈ [-2, 2]`.
pub fn fractional_norm(u: &[f64], dt: f64, s: f64) -> SobolevNorm {
    assert!((-2.0..=2.0).contains(&s), "order {s} outside [-2, 2]");
    SobolevNorm { s, value: weighted_norm(u, dt, |x| (1.0 + x * x).powf(s)) }
}

/// Discrete L² norm matching the transform: `(dt Σ u²)^{1/2}`.
pub fn l2(u: &[f64], dt: f64) -> f64 {
    (dt * u.iter().map(|v| v * v).sum::<f64>()).sqrt()
}

/// `1 + 2^{1-α} / (π(1-α))`: bound of `∫|ŵ|²(1+|z|)^{-α} / (T^α ‖w‖²)` for w on [0, T], T ≤ 1.
pub fn scaling_constant(alpha: f64) -> f64 {
    1.0 + 2f64.powf(1.0 - alpha) / (PI * (1.0 - alpha))
}

#[derive(Clone, Debug, Serialize)]
pub struct ScalingRatio {
    pub alpha: f64,
    pub t: f64,
    pub ratio: f64,
}

/// `∫|ŵ|²(1+|z|)^{-α} dz / (T^α ∫|w|²)` for `w(t) = g(t/T)` sampled with `n` intervals.
pub fn scaling_ratio(g: impl Fn(f64) -> f64, t: f64, alpha: f64, n: usize) -> ScalingRatio {
    let dt = t / n as f64;
    let w: Vec<f64> = (0..=n).map(|k| g(k as f64 / n as f64)).collect();
    let num = weighted_norm(&w, dt, |x| (1.0 + x.abs()).powf(-alpha)).powi(2);
    let den = t.powf(alpha) * l2(&w, dt).powi(2);
    ScalingRatio { alpha, t, ratio: num / den }
}

/// One Hölder interpolation `‖v‖_{s} ≤ ‖v‖_{a}^{θ} ‖v‖_{b}^{1-θ}` on ℝ.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Interpolation {
    pub s: (i64, i64),
    pub a: (i64, i64),
    pub b: (i64, i64),
    pub theta: (i64, i64),
    pub one_minus_theta: (i64, i64),
}

impl Interpolation {
    fn r(v: (i64, i64)) -> Ratio<i64> {
        Ratio::new(v.0, v.1)
    }

    /// Exponents sum to one and the orders interpolate: `θa + (1-θ)b = s`.
    pub fn exact(&self) -> bool {
        let (s, a, b, t, u) = (Self::r(self.s), Self::r(self.a), Self::r(self.b), Self::r(self.theta), Self::r(self.one_minus_theta));
        t + u == Ratio::from_integer(1) && t * a + u * b == s
    }

    fn f(v: (i64, i64)) -> f64 {
        v.0 as f64 / v.1 as f64
    }

    /// `‖v‖_s / (‖v‖_a^θ ‖v‖_b^{1-θ})`.
    pub fn ratio(&self, u: &[f64], dt: f64) -> f64 {
        let n = |s: f64| fractional_norm(u, dt, s).value;
        n(Self::f(self.s)) / (n(Self::f(self.a)).powf(Self::f(self.theta)) * n(Self::f(self.b)).powf(Self::f(self.one_minus_theta)))
    }
}

/// The four interpolation inequalities between `H^{-2/3}`, `H^{1/2}`, `H^{-1}`, `H^{7/6}`.
pub fn interpolations() -> [Interpolation; 4] {
    [
        Interpolation { s: (0, 1), a: (-2, 3), b: (1, 2), theta: (3, 7), one_minus_theta: (4, 7) },
        Interpolation { s: (-1, 3), a: (-2, 3), b: (1, 2), theta: (5, 7), one_minus_theta: (2, 7) },
        Interpolation { s: (0, 1), a: (-1, 1), b: (7, 6), theta: (7, 13), one_minus_theta: (6, 13) },
        Interpolation { s: (-1, 3), a: (-1, 1), b: (7, 6), theta: (9, 13), one_minus_theta: (4, 13) },
    ]
}

/// Deterministic smooth test functions on `[0, T]`, vanishing to all orders at both ends:
/// a bump times a random trigonometric polynomial, sampled with `n` intervals.
pub fn test_functions(count: usize, t: f64, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let modes = rng.gen_range(1..=8);
            let coef: Vec<(f64, f64, f64)> = (0..modes)
                .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(0.0..2.0 * PI), rng.gen_range(0.0..12.0)))
                .collect();
            let width = rng.gen_range(0.3..1.0);
            let centre = rng.gen_range(width / 2.0..1.0 - width / 2.0);
            (0..=n)
                .map(|k| {
                    let x = k as f64 / n as f64;
                    let s = 2.0 * (x - centre) / width;
                    let bump = if s.abs() < 1.0 { (-1.0 / (1.0 - s * s)).exp() } else { 0.0 };
                    let trig: f64 = coef.iter().map(|(a, ph, f)| a * (2.0 * PI * f * x + ph).cos()).sum();
                    bump * (1.0 + trig)
                })
                .collect::<Vec<f64>>()
        })
        .map(|v| v.into_iter().map(|y| y / t.sqrt()).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_zero_is_l2_and_norms_increase() {
        let fs = test_functions(5, 2.0, 512, 7);
        let dt = 2.0 / 512.0;
        for u in &fs {
            let a = fractional_norm(u, dt, 0.0).value;
            assert!((a - l2(u, dt)).abs() < 1e-10 * a);
            let mut prev = 0.0;
            for s in [-2.0, -1.0, -2.0 / 3.0, 0.0, 0.5, 7.0 / 6.0, 2.0] {
                let v = fractional_norm(u, dt, s).value;
                assert!(v >= prev);
                prev = v;
            }
        }
    }

    #[test]
    fn gaussian_h1_norm() {
        // û of e^{-t²/2} is e^{-ξ²/2}; ∫(1+ξ²)e^{-ξ²} = √π·3/2
        let dt = 0.01;
        let u: Vec<f64> = (0..=2000).map(|k| (-(k as f64 * dt - 10.0).powi(2) / 2.0).exp()).collect();
        let v = fractional_norm(&u, dt, 1.0).value;
        assert!((v * v - 1.5 * PI.sqrt()).abs() < 1e-8, "{}", v * v);
    }

    #[test]
    fn exponents_are_exact() {
        for i in interpolations() {
            assert!(i.exact(), "{i:?}");
        }
    }

    #[test]
    fn interpolations_hold_with_unit_constant() {
        let dt = 1.0 / 1024.0;
        for u in test_functions(20, 1.0, 1024, 3) {
            for i in interpolations() {
                assert!(i.ratio(&u, dt) <= 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn scaling_ratio_bounded() {
        let g = |x: f64| if x > 0.0 && x < 1.0 { (-1.0 / (x * (1.0 - x))).exp() * (1.0 + x) } else { 0.0 };
        for alpha in [1.0 / 3.0, 2.0 / 3.0] {
            for t in [1.0, 0.5, 0.25, 0.125] {
                let r = scaling_ratio(g, t, alpha, 1024);
                assert!(r.ratio <= scaling_constant(alpha), "{r:?}");
            }
        }
    }
}
