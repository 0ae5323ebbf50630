//! Sampled spectra of the steering control and their time-domain reconstruction.

use super::ControlSpec;
use crate::error::{Error, Result};
use crate::pde::{solve_linear, Grid};
use num_complex::Complex64 as C;
use rustfft::FftPlanner;
use serde::Serialize;
use std::f64::consts::PI;

/// Largest admissible fraction of `∫|u|²` outside `[0, T]`.
pub const LEAK_TOL: f64 = 1e-6;
/// The reconstruction window is this many horizons long, centred on `[0, T]`.
pub const WINDOW: f64 = 8.0;

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumTriple {
    pub spec: ControlSpec,
    pub dz: f64,
    #[serde(skip)]
    pub z: Vec<f64>,
    /// Spectra divided by `e^{log_peak}`.
    #[serde(skip)]
    pub vhat: Vec<C>,
    #[serde(skip)]
    pub uhat: Vec<C>,
    #[serde(skip)]
    pub what: Vec<C>,
    #[serde(skip)]
    pub t: Vec<f64>,
    #[serde(skip)]
    pub u_time: Vec<f64>,
    #[serde(skip)]
    pub w_time: Vec<C>,
    /// Fraction of `Σ|u|²` outside `[0, T]`.
    pub leak_u: f64,
    pub leak_w: f64,
    /// `max|Im u| / max|u|` before the real part is taken.
    pub imag_ratio: f64,
    /// `max|û(-z) - conj û(z)| / max|û|`.
    pub hermitian_defect: f64,
    /// `∫|w|² dt` by the rectangle rule, normalised.
    pub w_energy: f64,
}

/// `(1/√2π) Σ_k f_k e^{i z_k t_n} Δz` on `t_n = t_a + n·2π/(MΔz)` for `z_k = (k - K)Δz`.
fn inverse_transform(f: &[C], dz: f64, t_a: f64) -> Vec<C> {
    let m = f.len();
    let kk = (m - 1) / 2;
    let mut buf: Vec<C> = f
        .iter()
        .enumerate()
        .map(|(k, v)| v * C::from_polar(1.0, (k as f64 - kk as f64) * dz * t_a))
        .collect();
    FftPlanner::new().plan_fft_inverse(m).process(&mut buf);
    let norm = dz / (2.0 * PI).sqrt();
    buf.iter()
        .enumerate()
        .map(|(n, v)| v * C::from_polar(norm, -2.0 * PI * (kk * n % m) as f64 / m as f64))
        .collect()
}

fn leak<T: Copy>(t: &[f64], v: &[T], t_final: f64, abs2: impl Fn(T) -> f64) -> f64 {
    let tol = 1e-12 * t_final;
    let (mut inside, mut outside) = (0.0, 0.0);
    for (tt, x) in t.iter().zip(v) {
        if *tt < -tol || *tt > t_final + tol {
            outside += abs2(*x);
        } else {
            inside += abs2(*x);
        }
    }
    outside / (inside + outside)
}

/// Samples `û`, `v̂`, `ŵ` on `z_k = kΔz`, `|k| ≤ K`, `Δz = 2π/(8T)`, and reconstructs u and w.
pub fn steering_spectrum(spec: &ControlSpec) -> Result<SpectrumTriple> {
    let t_final = spec.t_final;
    let dz = 2.0 * PI / (WINDOW * t_final);
    let kk = (spec.z_max / dz).ceil() as usize;
    let m = 2 * kk + 1;
    let shift = spec.log_peak;
    let mut z = Vec::with_capacity(m);
    let (mut vhat, mut uhat, mut what) = (Vec::with_capacity(m), Vec::with_capacity(m), Vec::with_capacity(m));
    for k in 0..m {
        let zk = (k as f64 - kk as f64) * dz;
        let v = spec.vhat(zk);
        z.push(zk);
        vhat.push(v.to_c_shifted(shift));
        uhat.push((v * spec.h(zk)).to_c_shifted(shift));
        what.push(spec.what(zk)?.to_c_shifted(shift));
    }
    let peak = uhat.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let hermitian_defect = (0..=kk).map(|j| (uhat[kk + j] - uhat[kk - j].conj()).norm()).fold(0.0, f64::max) / peak;
    let t_a = t_final / 2.0 - WINDOW * t_final / 2.0;
    let dt = 2.0 * PI / (m as f64 * dz);
    let t: Vec<f64> = (0..m).map(|n| t_a + n as f64 * dt).collect();
    let uc = inverse_transform(&uhat, dz, t_a);
    let w_time = inverse_transform(&what, dz, t_a);
    let umax = uc.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let imag_ratio = uc.iter().map(|v| v.im.abs()).fold(0.0, f64::max) / umax;
    let u_time: Vec<f64> = uc.iter().map(|v| v.re).collect();
    let leak_u = leak(&t, &u_time, t_final, |x| x * x);
    let leak_w = leak(&t, &w_time, t_final, |x: C| x.norm_sqr());
    let w_energy = w_time.iter().map(|v| v.norm_sqr()).sum::<f64>() * dt;
    let out = SpectrumTriple {
        spec: *spec,
        dz,
        z,
        vhat,
        uhat,
        what,
        t,
        u_time,
        w_time,
        leak_u,
        leak_w,
        imag_ratio,
        hermitian_defect,
        w_energy,
    };
    if leak_u > LEAK_TOL {
        return Err(Error::SupportLeak(leak_u));
    }
    Ok(out)
}

impl SpectrumTriple {
    /// Trigonometric interpolant of the normalised control at time t.
    pub fn u_at(&self, t: f64) -> f64 {
        let kk = (self.z.len() - 1) / 2;
        let step = C::from_polar(1.0, self.dz * t);
        let mut e = C::from_polar(1.0, self.z[0] * t);
        let mut acc = C::new(0.0, 0.0);
        for (k, u) in self.uhat.iter().enumerate() {
            if k % 64 == 0 {
                e = C::from_polar(1.0, (k as f64 - kk as f64) * self.dz * t);
            }
            acc += u * e;
            e *= step;
        }
        acc.re * self.dz / (2.0 * PI).sqrt()
    }

    /// Control samples on the time nodes of a solver grid.
    pub fn sample_on(&self, grid: &Grid) -> Vec<f64> {
        grid.times().iter().map(|&t| self.u_at(t)).collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SteeringCheck {
    pub nx: usize,
    pub nt: usize,
    pub final_norm: f64,
    pub max_norm: f64,
    /// `‖y(T)‖ / max_t ‖y(t)‖`.
    pub ratio: f64,
}

/// Runs the linear solver from rest with the synthesized control.
pub fn steering_check(s: &SpectrumTriple, nx: usize, nt: usize) -> Result<SteeringCheck> {
    let grid = Grid::new(s.spec.length, nx, s.spec.t_final, nt)?;
    let u = s.sample_on(&grid);
    let traj = solve_linear(&grid, &vec![0.0; nx], &u, None, 1)?;
    let norms = traj.l2_norms();
    let max_norm = norms.iter().cloned().fold(0.0, f64::max);
    let final_norm = *norms.last().unwrap();
    Ok(SteeringCheck { nx, nt, final_norm, max_norm, ratio: final_norm / max_norm })
}

#[cfg(test)]
mod tests {
    use super::super::{ControlSpec, NuRule};
    use super::*;
    use crate::number_theory::CriticalPair;

    #[test]
    fn control_is_real_and_supported() {
        let pair = CriticalPair::new(2, 1).unwrap();
        let spec = ControlSpec::new(&pair, 0.4, NuRule::LengthScaled).unwrap();
        let s = steering_spectrum(&spec).unwrap();
        assert!(s.hermitian_defect < 1e-10, "{}", s.hermitian_defect);
        assert!(s.imag_ratio < 1e-10, "{}", s.imag_ratio);
        assert!(s.leak_u < LEAK_TOL, "{}", s.leak_u);
        assert!(s.leak_w < LEAK_TOL, "{}", s.leak_w);
        // the interpolant reproduces the FFT samples
        for n in (0..s.t.len()).step_by(s.t.len() / 7) {
            assert!((s.u_at(s.t[n]) - s.u_time[n]).abs() < 1e-9 * s.u_time.iter().fold(0.0f64, |m, v| m.max(v.abs())));
        }
    }

    #[test]
    fn case_one_relation() {
        // ŵ H = κ û H'_γ pointwise
        let pair = CriticalPair::new(3, 2).unwrap();
        let spec = ControlSpec::new(&pair, 0.2, NuRule::LengthScaled).unwrap();
        for z in [-30.0, -1.0, 0.4, 7.0, 55.0] {
            let lhs = spec.what(z).unwrap() * spec.h(z);
            let hd = super::super::hderiv::h_derivative_on_line(spec.length, spec.gamma, z, 1).unwrap();
            let rhs = (spec.uhat(z) * hd).scale(spec.kappa());
            assert!(((lhs / rhs).to_c() - 1.0).norm() < 1e-12);
        }
    }

    #[test]
    fn steers_rest_to_rest_only_with_the_h_factor() {
        let pair = CriticalPair::new(2, 1).unwrap();
        let spec = ControlSpec::new(&pair, 0.4, NuRule::LengthScaled).unwrap();
        let mut s = steering_spectrum(&spec).unwrap();
        let good = steering_check(&s, 256, 2000).unwrap();
        assert!(good.ratio < 1e-6, "{good:?}");
        // the bare bump is supported in [0, T] but does not return the state to rest
        s.uhat = s.vhat.clone();
        let bad = steering_check(&s, 256, 2000).unwrap();
        assert!(bad.ratio > 1e-2, "{bad:?}");
    }

    #[test]
    fn paley_wiener_and_time_reversal() {
        let pair = CriticalPair::new(3, 2).unwrap();
        let spec = ControlSpec::new(&pair, 0.2, NuRule::LengthScaled).unwrap();
        let s = steering_spectrum(&spec).unwrap();
        let dt = s.t[1] - s.t[0];
        let inside: Vec<usize> = (0..s.t.len()).filter(|&i| s.t[i] >= 0.0 && s.t[i] <= spec.t_final).collect();
        let u: Vec<f64> = inside.iter().map(|&i| s.u_time[i]).collect();
        let pw = crate::spectral::paley_wiener_check(&u, dt, spec.t_final, spec.z_max, 200, None);
        assert!(pw.passes, "{pw:?}");
        // |∫|w|² e^{-ipt}| is unchanged by t → T - t
        let moment = |rev: bool| -> C {
            inside
                .iter()
                .map(|&i| {
                    let t = if rev { spec.t_final - s.t[i] } else { s.t[i] };
                    C::from_polar(s.w_time[i].norm_sqr(), -spec.p * t)
                })
                .sum::<C>()
                * dt
        };
        let (a, b) = (moment(false), moment(true));
        assert!((a.norm() - b.norm()).abs() < 1e-12 * a.norm());
        assert!((a - b.conj() * C::from_polar(1.0, -spec.p * spec.t_final)).norm() < 1e-12 * a.norm());
    }
}
