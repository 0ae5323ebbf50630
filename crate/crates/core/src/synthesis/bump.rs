//! Fourier transform of the Gevrey bump `e^{-ν/(1-s²)}` on `[-1, 1]`.
//!
//! `v̂₁(x) = ∫_{-1}^{1} e^{-ν/(1-s²)} e^{-ixs} ds` is real and even. For large `x` it is
//! exponentially small compared with the integrand, so the integral is taken along the
//! parabola `t = s - iκ(1-s²)`, with κ chosen to minimise the peak of the integrand.
//! The two halves of the path are mirror images, which gives `2 Re ∫₀¹`.

use crate::quad;
use crate::scaled::Scaled;
use num_complex::Complex64 as C;
use serde::Serialize;

const KAPPAS: usize = 40;
const EPS_SAMPLES: usize = 96;
/// Parts of the path this far below the peak (in log) are dropped.
const CUTOFF: f64 = 60.0;

/// Exponent `f = -ν/(1-t²) - ixt` and `dt/ds` at `s = 1 - eps` on the parabola κ.
fn on_path(nu: f64, x: f64, kappa: f64, eps: f64) -> (C, C) {
    let s = 1.0 - eps;
    let a = eps * (2.0 - eps);
    let q = C::new(1.0 + kappa * kappa * a, 2.0 * kappa * s);
    let t = C::new(s, -kappa * a);
    let f = -nu / (q * a) - C::new(0.0, x) * t;
    (f, C::new(1.0, 2.0 * kappa * s))
}

fn eps_samples() -> impl Iterator<Item = f64> {
    // dense near the endpoint, where the endpoint saddles sit for large x
    (0..EPS_SAMPLES).map(|k| (-(k as f64) * 28.0 / (EPS_SAMPLES - 1) as f64).exp2().min(1.0))
}

fn peak(nu: f64, x: f64, kappa: f64) -> f64 {
    eps_samples().map(|e| on_path(nu, x, kappa, e).0.re).fold(f64::NEG_INFINITY, f64::max)
}

/// The parabola depth with the lowest integrand peak.
pub fn best_kappa(nu: f64, x: f64) -> (f64, f64) {
    let mut best = (0.0, peak(nu, x, 0.0));
    if x == 0.0 {
        return best;
    }
    for k in 0..KAPPAS {
        let kappa = 1e-3 * (3e3f64).powf(k as f64 / (KAPPAS - 1) as f64);
        let m = peak(nu, x, kappa);
        if m < best.1 {
            best = (kappa, m);
        }
    }
    best
}

/// `v̂₁(x)` as a scaled real number (imaginary part zero).
pub fn vhat1(nu: f64, x: f64) -> Scaled {
    let x = x.abs();
    let (kappa, fmax) = best_kappa(nu, x);
    // geometric breaks across the part of the path within CUTOFF of the peak
    let eps: Vec<f64> = eps_samples().collect();
    let live: Vec<usize> = (0..eps.len()).filter(|&k| on_path(nu, x, kappa, eps[k]).0.re > fmax - CUTOFF).collect();
    let hi = eps[live[0].saturating_sub(1)];
    let lo = eps[(live[live.len() - 1] + 1).min(eps.len() - 1)];
    let pieces = 64;
    let mut breaks = vec![0.0];
    for k in 0..=pieces {
        breaks.push(lo * (hi / lo).powf(k as f64 / pieces as f64));
    }
    if hi < 1.0 {
        breaks.push(1.0);
    }
    let r = quad::integrate_pieces(
        |eps| {
            if eps <= 0.0 {
                return C::new(0.0, 0.0);
            }
            let (f, dt) = on_path(nu, x, kappa, eps);
            (f - fmax).exp() * dt
        },
        &breaks,
        1e-17,
        1e-13,
        400,
    );
    Scaled::new(C::new(2.0 * r.value.re, 0.0), fmax)
}

/// `v̂(z) = e^{-iβz} v̂₁(βz)`: transform of `e^{-ν/(1-(t-1)²)}` against `e^{-iβtz}` on [0, 2].
pub fn vhat(nu: f64, beta: f64, z: f64) -> Scaled {
    vhat1(nu, beta * z).scale(C::from_polar(1.0, -beta * z))
}

#[derive(Clone, Debug, Serialize)]
pub struct EnvelopeFit {
    /// Fitted `δ` in `|v̂| ≈ C e^{-ν/4} e^{-(1+δ)√(βν z)}` over the window.
    pub delta: f64,
    /// `max_z (log|v̂| + ν/4 + (1+δ)√(βνz))` with the fitted δ.
    pub log_c: f64,
    /// Same maximum with δ = 0.
    pub log_c_delta0: f64,
    pub z_range: (f64, f64),
}

/// Fits the decay envelope on `[z0, z1]` using the local maxima of `|v̂|` per bin.
pub fn envelope_fit(nu: f64, beta: f64, z0: f64, z1: f64, bins: usize) -> EnvelopeFit {
    let per_bin = 24;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for b in 0..bins {
        let lo = z0 * (z1 / z0).powf(b as f64 / bins as f64);
        let hi = z0 * (z1 / z0).powf((b + 1) as f64 / bins as f64);
        let (mut zbest, mut lbest) = (lo, f64::NEG_INFINITY);
        for k in 0..per_bin {
            let z = lo * (hi / lo).powf(k as f64 / (per_bin - 1) as f64);
            let l = vhat1(nu, beta * z).ln_abs();
            if l > lbest {
                lbest = l;
                zbest = z;
            }
        }
        xs.push((beta * nu * zbest).sqrt());
        ys.push(lbest + nu / 4.0);
    }
    // log|v̂| + ν/4 ≈ log C - (1+δ) √(βνz)
    let pts: Vec<(f64, f64)> = xs.iter().zip(&ys).map(|(a, b)| (*a, *b)).collect();
    let (slope, _) = crate::fit::linear_fit(&pts);
    let delta = -slope - 1.0;
    let log_c = xs.iter().zip(&ys).map(|(a, b)| b + (1.0 + delta) * a).fold(f64::NEG_INFINITY, f64::max);
    let log_c_delta0 = xs.iter().zip(&ys).map(|(a, b)| b + a).fold(f64::NEG_INFINITY, f64::max);
    EnvelopeFit { delta, log_c, log_c_delta0, z_range: (z0, z1) }
}
