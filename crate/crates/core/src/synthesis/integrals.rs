//! The quadratic integrals `I` (E ≠ 0) and `J` (E = 0) and their normaliser `∫|w|²`.
//!
//! `û(z) conj û(z-p) ∫B dz` is assembled as `v̂(z) conj v̂(z-p) N(z) / (Ξ(z) conj Ξ(z-p))`:
//! the det Q factors of û cancel against the denominators of `∫B`, leaving only the
//! root gaps Ξ, which vanish at `z = ±2/(3√3)` together with N.

use super::ControlSpec;
use crate::error::Result;
use crate::kernel::{int_b_numerator, kernel_roots};
use crate::quad::kronrod15;
use crate::scaled::Scaled;
use crate::spectral::vandermonde;
use crate::unreachable::{constants, eta_triple};
use num_complex::Complex64 as C;
use serde::Serialize;

/// Points closer than this to a root collision are bridged by interpolation.
pub const BRIDGE: f64 = 1e-3;
const MIN_PANELS: usize = 32;
const MAX_PANELS: usize = 8192;
/// Successive panel doublings must agree to this fraction of `∫|w|²`.
pub const QUAD_TOL: f64 = 1e-9;

#[derive(Clone, Debug, Serialize)]
pub struct IntegralReport {
    pub k: i64,
    pub l: i64,
    pub t_final: f64,
    pub case: u8,
    pub gamma: f64,
    pub nu: f64,
    pub p: f64,
    /// I (case 1) or J (case 2), divided by `e^{2 log_peak}`.
    #[serde(serialize_with = "crate::unreachable::ser_c")]
    pub value: C,
    /// `∫|ŵ|² dz = ∫|w|² dt`, same normalisation.
    pub w_energy: f64,
    pub re_ratio: f64,
    /// `Im I / (T ∫|w|²)`.
    pub im_ratio_per_t: f64,
    pub panels: usize,
    pub converged: bool,
}

/// Root-collision points of the integrand in z.
pub fn collision_points(p: f64) -> [f64; 4] {
    let zc = 2.0 / (3.0 * 3f64.sqrt());
    [-zc, zc, p - zc, p + zc]
}

struct Integrand<'a> {
    spec: &'a ControlSpec,
    eta: [C; 3],
    /// `e^{-iβp} / E` or `e^{-iβp} / F`.
    factor: C,
    shift: f64,
}

impl Integrand<'_> {
    fn raw(&self, z: f64) -> C {
        let s = self.spec;
        let (lam, lt) = kernel_roots(z, s.p);
        let num = int_b_numerator(&self.eta, s.length, &lam, &lt).eval();
        let den = Scaled::from_c(vandermonde(&lam) * vandermonde(&lt));
        let v = s.vhat1(z) * s.vhat1(z - s.p);
        (v * num / den).scale(self.factor).to_c_shifted(2.0 * self.shift)
    }

    fn pair_term(&self, z: f64) -> C {
        for zc in collision_points(self.spec.p) {
            if (z - zc).abs() < BRIDGE {
                // cubic through four points straddling the collision
                let xs = [-2.0, -1.0, 1.0, 2.0].map(|k| zc + k * BRIDGE);
                let ys = xs.map(|x| self.raw(x));
                let mut acc = C::new(0.0, 0.0);
                for i in 0..4 {
                    let mut w = 1.0;
                    for j in 0..4 {
                        if i != j {
                            w *= (z - xs[j]) / (xs[i] - xs[j]);
                        }
                    }
                    acc += ys[i] * w;
                }
                return acc;
            }
        }
        self.raw(z)
    }

    fn energy_term(&self, z: f64) -> Result<f64> {
        Ok(self.spec.what(z)?.to_c_shifted(self.shift).norm_sqr())
    }
}

fn breakpoints(s_max: f64, panels: usize, extra: &[f64]) -> Vec<f64> {
    let mut b: Vec<f64> = (0..=panels).map(|k| -s_max + 2.0 * s_max * k as f64 / panels as f64).collect();
    for &e in extra {
        if e.abs() < s_max {
            b.push(e);
        }
    }
    b.sort_by(|x, y| x.total_cmp(y));
    b.dedup_by(|x, y| (*x - *y).abs() < 1e-14);
    b
}

/// Both integrals over `s = z^{1/3}` with `n` uniform panels plus the collision points.
fn evaluate(f: &Integrand, s_max: f64, n: usize) -> Result<(C, f64)> {
    let extra: Vec<f64> = collision_points(f.spec.p).iter().map(|z| z.cbrt()).chain([0.0]).collect();
    let b = breakpoints(s_max, n, &extra);
    let mut pair = C::new(0.0, 0.0);
    let mut energy = 0.0;
    let mut err = None;
    for w in b.windows(2) {
        let (pv, _) = kronrod15(|s| f.pair_term(s * s * s) * (3.0 * s * s), w[0], w[1]);
        let (ev, _) = kronrod15(
            |s| match f.energy_term(s * s * s) {
                Ok(v) => C::new(v * 3.0 * s * s, 0.0),
                Err(e) => {
                    err = Some(e);
                    C::new(0.0, 0.0)
                }
            },
            w[0],
            w[1],
        );
        pair += pv;
        energy += ev.re;
    }
    if let Some(e) = err {
        return Err(e);
    }
    Ok((pair, energy))
}

/// `I = ∫ (1/E) û(z) conj û(z-p) ∫B dz` in case 1, `J` with F in case 2, and `∫|ŵ|²`.
pub fn integral(spec: &ControlSpec) -> Result<IntegralReport> {
    let data = constants(&spec.pair)?;
    let eta = eta_triple(&spec.pair)?.eta;
    let lead = if spec.case == 1 { data.e } else { data.f };
    let factor = C::from_polar(1.0, -spec.beta * spec.p) / lead;
    let f = Integrand { spec, eta, factor, shift: spec.log_peak };
    let s_max = spec.z_max.cbrt();
    let mut n = MIN_PANELS;
    let mut prev = evaluate(&f, s_max, n)?;
    let mut converged = false;
    while n < MAX_PANELS {
        n *= 2;
        let cur = evaluate(&f, s_max, n)?;
        let scale = cur.1;
        let done = (cur.0 - prev.0).norm() <= QUAD_TOL * scale && (cur.1 - prev.1).abs() <= QUAD_TOL * scale;
        prev = cur;
        if done {
            converged = true;
            break;
        }
    }
    let (value, w_energy) = prev;
    Ok(IntegralReport {
        k: spec.k,
        l: spec.l,
        t_final: spec.t_final,
        case: spec.case,
        gamma: spec.gamma,
        nu: spec.nu,
        p: spec.p,
        value,
        w_energy,
        re_ratio: value.re / w_energy,
        im_ratio_per_t: value.im / (spec.t_final * w_energy),
        panels: n,
        converged,
    })
}
