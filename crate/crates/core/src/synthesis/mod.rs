//! Construction of controls steering 0 to 0 and the quadratic integrals they generate.
//!
//! `û = v̂ H` with the Gevrey bump transform `v̂` and `H = det Q / Ξ`; the companion
//! `ŵ = κ v̂ H^{(d)}(· + iγ)` has d = 1 when `E ≠ 0` and d = 3 (with an extra factor z)
//! when `E = 0`.

pub mod bump;
pub mod hderiv;
pub mod integrals;
pub mod norms;
pub mod spectrum;

use crate::error::{Error, Result};
use crate::number_theory::CriticalPair;
use crate::scaled::Scaled;
use crate::spectral::{frame, mu};
use num_complex::Complex64 as C;
use serde::Serialize;

pub use integrals::{integral, IntegralReport};
pub use norms::{fractional_norm, SobolevNorm};
pub use spectrum::{steering_spectrum, SpectrumTriple};

/// Constant in `βν² = 1.617²`.
pub const NU_CONSTANT: f64 = 1.617;
/// The rounded value quoted for `ν² T`.
pub const NU_SQUARED_T_QUOTED: f64 = 5.223;
/// Candidate shifts of the line on which `H^{(d)}` is evaluated.
pub const GAMMA_CANDIDATES: [f64; 4] = [0.5, 1.0, 1.5, 2.0];
/// Working spectra are truncated where `|û|` falls below this fraction of its peak.
pub const SPECTRAL_FLOOR: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum NuRule {
    /// `ν = 1.617 L^{3/2} / √β`: the growth `e^{c L |z|^{1/3}}` of H is balanced for every L.
    LengthScaled,
    /// `ν = 1.617 / √β`.
    Literal,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ControlSpec {
    pub k: i64,
    pub l: i64,
    pub length: f64,
    pub p: f64,
    pub t_final: f64,
    pub beta: f64,
    pub nu: f64,
    pub nu_rule: NuRule,
    /// `ν²T` with ν from `(1.617)²/β`, next to the quoted 5.223.
    pub nu_squared_t: f64,
    pub nu_squared_t_quoted: f64,
    pub gamma: f64,
    /// 1 if `e^{η₁L} ≠ 1`, else 2.
    pub case: u8,
    /// Largest |z| kept in the working spectrum.
    pub z_max: f64,
    /// `ln max|û|` over the working spectrum, used to normalise sampled spectra.
    pub log_peak: f64,
    #[serde(skip)]
    pub pair: CriticalPair,
}

impl ControlSpec {
    pub fn new(pair: &CriticalPair, t_final: f64, nu_rule: NuRule) -> Result<Self> {
        if !(t_final > 0.0 && t_final.is_finite()) {
            return Err(Error::Domain(format!("T must be positive, got {t_final}")));
        }
        let beta = t_final / 2.0;
        let base = NU_CONSTANT / beta.sqrt();
        let nu = match nu_rule {
            NuRule::LengthScaled => base * pair.length.powf(1.5),
            NuRule::Literal => base,
        };
        let mut spec = ControlSpec {
            k: pair.k,
            l: pair.l,
            length: pair.length,
            p: pair.p,
            t_final,
            beta,
            nu,
            nu_rule,
            nu_squared_t: base * base * t_final,
            nu_squared_t_quoted: NU_SQUARED_T_QUOTED,
            gamma: 0.0,
            case: if pair.case_e0 { 2 } else { 1 },
            z_max: 0.0,
            log_peak: 0.0,
            pair: *pair,
        };
        let (z_max, log_peak) = spec.support();
        spec.z_max = z_max;
        spec.log_peak = log_peak;
        spec.gamma = spec.select_gamma()?;
        Ok(spec)
    }

    pub fn derivative_order(&self) -> usize {
        if self.case == 1 {
            1
        } else {
            3
        }
    }

    /// `κ` with `ŵ = κ v̂ H^{(d)}_γ` (times z in case 2), normalised by `L^d`.
    pub fn kappa(&self) -> C {
        let m3 = mu()[2];
        match self.case {
            1 => C::new(3.0, 0.0) / (m3 * self.length),
            _ => C::new(27.0, 0.0) / (m3 * m3 * m3 * self.length.powi(3)),
        }
    }

    pub fn vhat(&self, z: f64) -> Scaled {
        bump::vhat(self.nu, self.beta, z)
    }

    pub fn vhat1(&self, z: f64) -> Scaled {
        bump::vhat1(self.nu, self.beta * z)
    }

    pub fn h(&self, z: f64) -> Scaled {
        frame(C::new(z, 0.0), self.length).h
    }

    pub fn uhat(&self, z: f64) -> Scaled {
        self.vhat(z) * self.h(z)
    }

    pub fn what(&self, z: f64) -> Result<Scaled> {
        let d = self.derivative_order();
        let hd = hderiv::h_derivative_on_line(self.length, self.gamma, z, d)?;
        let mut w = self.vhat(z) * hd;
        w = w.scale(self.kappa());
        if self.case == 2 {
            w = w.scale(C::new(z, 0.0));
        }
        Ok(w)
    }

    /// `(z_max, ln peak|û|)` from a logarithmic scan of `ln|v̂₁| + ln|H|`.
    fn support(&self) -> (f64, f64) {
        let zs: Vec<f64> = (-40..=180).map(|k| 10f64.powf(k as f64 / 20.0)).collect();
        let logs: Vec<f64> = zs.iter().map(|&z| self.vhat1(z).ln_abs() + self.h(z).ln_abs()).collect();
        let peak = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let floor = peak + SPECTRAL_FLOOR.ln();
        let last = logs.iter().rposition(|&v| v > floor).unwrap_or(0);
        let z_max = zs[(last + 1).min(zs.len() - 1)] * 1.5;
        (z_max, peak)
    }

    fn select_gamma(&self) -> Result<f64> {
        let d = self.derivative_order();
        let s_max = self.z_max.cbrt();
        let grid: Vec<f64> = (0..=400).map(|k| {
            let s = -s_max + 2.0 * s_max * k as f64 / 400.0;
            s * s * s
        }).collect();
        let mut last_err = None;
        for g in GAMMA_CANDIDATES {
            let mut ok = true;
            for &z in &grid {
                match hderiv::h_derivative_on_line(self.length, g, z, d) {
                    Ok(v) if v.ln_abs() > (1e-10f64).ln() => {}
                    Ok(_) => {
                        ok = false;
                        break;
                    }
                    Err(e) => {
                        last_err = Some(e);
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                return Ok(g);
            }
        }
        Err(last_err.unwrap_or_else(|| Error::InvariantViolation("H derivative vanishes on every candidate line".into())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parameters_follow_the_horizon() {
        let pair = CriticalPair::new(3, 2).unwrap();
        let s = ControlSpec::new(&pair, 0.2, NuRule::Literal).unwrap();
        assert_eq!(s.beta, 0.1);
        assert!((s.nu * s.nu * s.beta - NU_CONSTANT * NU_CONSTANT).abs() < 1e-12);
        assert!((s.nu_squared_t - 5.229378).abs() < 1e-6);
        assert_eq!(s.case, 1);
        assert!(GAMMA_CANDIDATES.contains(&s.gamma));
        let scaled = ControlSpec::new(&pair, 0.2, NuRule::LengthScaled).unwrap();
        assert!((scaled.nu / s.nu - pair.length.powf(1.5)).abs() < 1e-9);
        let case2 = ControlSpec::new(&CriticalPair::new(4, 1).unwrap(), 0.2, NuRule::LengthScaled).unwrap();
        assert_eq!(case2.case, 2);
        assert!(ControlSpec::new(&pair, 0.0, NuRule::Literal).is_err());
    }

    #[test]
    fn support_floor_is_respected() {
        let pair = CriticalPair::new(2, 1).unwrap();
        let s = ControlSpec::new(&pair, 0.4, NuRule::LengthScaled).unwrap();
        for z in [s.z_max, -s.z_max, 2.0 * s.z_max] {
            assert!(s.uhat(z).ln_abs() < s.log_peak + SPECTRAL_FLOOR.ln());
        }
    }
}
