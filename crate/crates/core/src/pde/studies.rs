//! Convergence ladders, conservation and the quadratic projection identities.

use super::solver::{l2_norm, solve_linear, solve_second_order_with, Grid, Stepper};
use crate::error::{Error, Result};
use crate::fit::observed_orders;
use crate::kernel::int_b_closed;
use crate::number_theory::CriticalPair;
use crate::unreachable::eta_triple;
use num_complex::Complex64 as C;
use serde::Serialize;
use std::f64::consts::PI;

/// `Re(c Ψ(t, x))` on the given nodes.
pub fn psi_profile(pair: &CriticalPair, c: C, t: f64, x: &[f64]) -> Result<Vec<f64>> {
    let e = eta_triple(pair)?;
    Ok(x.iter().map(|&xi| (c * e.psi(t, xi)).re).collect())
}

/// `exp(-1/(1-s²))` on `(-1, 1)`, zero outside.
pub fn bump(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - s * s)).exp()
    }
}

/// Smooth control supported in `[a, b]` with peak `amp`.
pub fn bump_control(grid: &Grid, a: f64, b: f64, amp: f64) -> Vec<f64> {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    grid.sample_control(|t| amp * bump((t - mid) / half) / bump(0.0))
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    pub nx: Vec<usize>,
    pub nt: Vec<usize>,
    pub errors: Vec<f64>,
    pub orders: Vec<f64>,
}

/// Error against `Re(cΨ)` at `t_final` with `nt = steps_per_node · nx`.
pub fn space_time_convergence(pair: &CriticalPair, c: C, t_final: f64, nxs: &[usize], steps_per_node: usize) -> Result<ConvergenceReport> {
    let mut errors = Vec::new();
    let mut nts = Vec::new();
    for &nx in nxs {
        let nt = steps_per_node * nx;
        let g = Grid::new(pair.length, nx, t_final, nt)?;
        let x = g.x();
        let y0 = psi_profile(pair, c, 0.0, &x)?;
        let tr = solve_linear(&g, &y0, &vec![0.0; nt + 1], None, nt)?;
        let exact = psi_profile(pair, c, t_final, &x)?;
        let diff: Vec<f64> = tr.final_state().iter().zip(&exact).map(|(a, b)| a - b).collect();
        errors.push(l2_norm(&diff, g.dx));
        nts.push(nt);
    }
    let orders = observed_orders(&errors);
    Ok(ConvergenceReport { nx: nxs.to_vec(), nt: nts, errors, orders })
}

/// Crank–Nicolson steps replaced by two damped half steps at the start.
pub const STARTUP_STEPS: usize = 2;

/// Self-convergence in dt at fixed nx against a run with `reference_factor` times the finest nt.
///
/// The grid data of `Re(cΨ)` carry a small component on the stiff, nearly imaginary
/// eigenmodes of the discrete operator that Crank–Nicolson neither damps nor resolves,
/// so the first steps are damped half steps.
pub fn time_convergence(pair: &CriticalPair, c: C, t_final: f64, nx: usize, nts: &[usize], reference_factor: usize) -> Result<ConvergenceReport> {
    let run = |nt: usize| -> Result<Vec<f64>> {
        let g = Grid::new(pair.length, nx, t_final, nt)?;
        let st = Stepper::new(&g)?;
        let mut y = psi_profile(pair, c, 0.0, &g.x())?;
        for n in 0..nt {
            y = if n < STARTUP_STEPS {
                let half = st.damped_half_step(&y, 0.0);
                st.damped_half_step(&half, 0.0)
            } else {
                st.linear_step(&y, 0.0, 0.0, None)
            };
        }
        Ok(y)
    };
    let finest = *nts.iter().max().ok_or_else(|| Error::Config("empty nt ladder".into()))?;
    let reference = run(finest * reference_factor)?;
    let dx = pair.length / (nx + 1) as f64;
    let mut errors = Vec::new();
    for &nt in nts {
        let y = run(nt)?;
        let d: Vec<f64> = y.iter().zip(&reference).map(|(a, b)| a - b).collect();
        errors.push(l2_norm(&d, dx));
    }
    Ok(ConvergenceReport { nx: vec![nx; nts.len()], nt: nts.to_vec(), errors: errors.clone(), orders: observed_orders(&errors) })
}

#[derive(Clone, Debug, Serialize)]
pub struct DriftReport {
    pub period: f64,
    pub nx: usize,
    pub nt: usize,
    /// `max_t |‖y(t)‖/‖y(0)‖ - 1|`.
    pub relative_drift: f64,
    pub final_error: f64,
}

/// L²-norm drift of the free evolution of `Re(cΨ)` over `periods` periods `2π/p`.
pub fn conservation_drift(pair: &CriticalPair, c: C, nx: usize, dt: f64, periods: f64) -> Result<DriftReport> {
    if pair.p == 0.0 {
        return Err(Error::Domain("p = 0: Ψ is stationary".into()));
    }
    let period = 2.0 * PI / pair.p;
    let t = periods * period;
    let nt = (t / dt).ceil() as usize;
    let g = Grid::new(pair.length, nx, t, nt)?;
    let x = g.x();
    let y0 = psi_profile(pair, c, 0.0, &x)?;
    let tr = solve_linear(&g, &y0, &vec![0.0; nt + 1], None, nt)?;
    let n0 = tr.energy[0].sqrt();
    let relative_drift = tr.energy.iter().map(|e| (e.sqrt() / n0 - 1.0).abs()).fold(0.0, f64::max);
    let exact = psi_profile(pair, c, t, &x)?;
    let d: Vec<f64> = tr.final_state().iter().zip(&exact).map(|(a, b)| a - b).collect();
    Ok(DriftReport { period, nx, nt, relative_drift, final_error: l2_norm(&d, g.dx) / n0 })
}

#[derive(Clone, Debug, Serialize)]
pub struct ProjectionReport {
    pub nx: usize,
    pub nt: usize,
    #[serde(serialize_with = "crate::unreachable::ser_c")]
    pub lhs: C,
    #[serde(serialize_with = "crate::unreachable::ser_c")]
    pub rhs: C,
    pub relative_discrepancy: f64,
}

/// `2∫y₂(T)φ e^{-ipT} dx` against `∫₀ᵀ∫ y₁² φ_x e^{-ipt} dx dt`, trapezoid rules on the solver grid.
pub fn projection_identity(pair: &CriticalPair, grid: &Grid, u1: &[f64]) -> Result<ProjectionReport> {
    if (grid.length - pair.length).abs() > 1e-12 * pair.length {
        return Err(Error::Config("grid length differs from the critical length".into()));
    }
    let e = eta_triple(pair)?;
    let x = grid.x();
    let phi: Vec<C> = x.iter().map(|&v| e.phi(v)).collect();
    let phi_x: Vec<C> = x.iter().map(|&v| e.phi_deriv(v, 1)).collect();
    let dt = grid.dt;
    let dx = grid.dx;
    let nt = grid.nt;
    let mut rhs = C::new(0.0, 0.0);
    let mut y2_final = Vec::new();
    solve_second_order_with(grid, u1, nt, |n, y1, y2| {
        let w = if n == 0 || n == nt { 0.5 } else { 1.0 };
        let s: C = y1.iter().zip(&phi_x).map(|(a, p)| p * (a * a)).sum();
        rhs += s * dx * w * dt * C::from_polar(1.0, -pair.p * n as f64 * dt);
        if n == nt {
            y2_final = y2.to_vec();
        }
    })?;
    let proj: C = y2_final.iter().zip(&phi).map(|(a, p)| p * *a).sum::<C>() * dx;
    let lhs = proj * 2.0 * C::from_polar(1.0, -pair.p * grid.t_final);
    Ok(ProjectionReport { nx: grid.nx, nt, lhs, rhs, relative_discrepancy: (lhs - rhs).norm() / rhs.norm() })
}

#[derive(Clone, Debug, Serialize)]
pub struct FrequencyReport {
    #[serde(serialize_with = "crate::unreachable::ser_c")]
    pub time_side: C,
    #[serde(serialize_with = "crate::unreachable::ser_c")]
    pub frequency_side: C,
    pub relative_discrepancy: f64,
    /// `‖y₁(T)‖ / max_t ‖y₁(t)‖`: how far the run is from having left the domain.
    pub tail_ratio: f64,
    pub z_max: f64,
    pub skipped_poles: usize,
}

/// Unitary transform `(2π)^{-1/2} ∫ u(t) e^{-izt} dt` of a sampled control (trapezoid).
pub fn control_transform(u: &[f64], dt: f64, z: f64) -> C {
    let step = C::from_polar(1.0, -z * dt);
    let mut ph = C::new(1.0, 0.0);
    let mut acc = C::new(0.0, 0.0);
    let last = u.len() - 1;
    for (i, &v) in u.iter().enumerate() {
        let w = if i == 0 || i == last { 0.5 } else { 1.0 };
        acc += ph * (v * w);
        ph *= step;
        if i % 64 == 63 {
            ph = C::from_polar(1.0, -z * dt * (i + 1) as f64);
        }
    }
    acc * dt / (2.0 * PI).sqrt()
}

/// `∫₀ᵀ∫ y₁² φ_x e^{-ipt}` against `∫ û(z) conj(û(z-p)) ∫B(z) dz`. The two agree when
/// `y₁` has left the domain by `T`; `tail_ratio` reports how well that holds.
pub fn frequency_identity(pair: &CriticalPair, grid: &Grid, u1: &[f64], dz: f64) -> Result<FrequencyReport> {
    let e = eta_triple(pair)?;
    let x = grid.x();
    let phi_x: Vec<C> = x.iter().map(|&v| e.phi_deriv(v, 1)).collect();
    let (dt, dx, nt) = (grid.dt, grid.dx, grid.nt);
    let mut time_side = C::new(0.0, 0.0);
    let mut max_norm: f64 = 0.0;
    let mut last_norm = 0.0;
    solve_second_order_with(grid, u1, nt, |n, y1, _| {
        let w = if n == 0 || n == nt { 0.5 } else { 1.0 };
        let s: C = y1.iter().zip(&phi_x).map(|(a, p)| p * (a * a)).sum();
        time_side += s * dx * w * dt * C::from_polar(1.0, -pair.p * n as f64 * dt);
        let nrm = l2_norm(y1, dx);
        max_norm = max_norm.max(nrm);
        last_norm = nrm;
    })?;
    let mut freq = C::new(0.0, 0.0);
    let mut skipped = 0;
    let mut peak: f64 = 0.0;
    let mut j: i64 = 0;
    let mut z_max = 0.0;
    // march outwards in both directions until the integrand has died out
    let mut quiet = [0usize; 2];
    while quiet[0] < 200 || quiet[1] < 200 {
        for (side, sgn) in [(0usize, 1.0f64), (1, -1.0)] {
            if quiet[side] >= 200 {
                continue;
            }
            let z = sgn * (j as f64 + 0.5) * dz;
            let term = match int_b_closed(pair, z) {
                Ok(b) => control_transform(u1, dt, z) * control_transform(u1, dt, z - pair.p).conj() * b,
                Err(Error::NearPole { .. }) => {
                    skipped += 1;
                    C::new(0.0, 0.0)
                }
                Err(err) => return Err(err),
            };
            freq += term * dz;
            peak = peak.max(term.norm());
            if term.norm() < 1e-13 * peak {
                quiet[side] += 1;
            } else {
                quiet[side] = 0;
            }
            z_max = z.abs();
        }
        j += 1;
        if j > 2_000_000 {
            return Err(Error::Resolution("frequency integrand does not decay".into()));
        }
    }
    Ok(FrequencyReport {
        time_side,
        frequency_side: freq,
        relative_discrepancy: (time_side - freq).norm() / time_side.norm(),
        tail_ratio: last_norm / max_norm.max(1e-300),
        z_max,
        skipped_poles: skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pde::solver::{solve_nonlinear, solve_second_order};

    fn pair(k: i64, l: i64) -> CriticalPair {
        CriticalPair::new(k, l).unwrap()
    }

    #[test]
    fn zero_data_stays_zero() {
        let g = Grid::new(5.0, 40, 1.0, 50).unwrap();
        let z = vec![0.0; 40];
        let u = vec![0.0; 51];
        assert!(solve_linear(&g, &z, &u, None, 10).unwrap().states.iter().all(|s| s.iter().all(|v| *v == 0.0)));
        assert!(solve_nonlinear(&g, &z, &u, 10).unwrap().final_state().iter().all(|v| *v == 0.0));
        let (a, b) = solve_second_order(&g, &u, 10).unwrap();
        assert!(a.final_state().iter().chain(b.final_state()).all(|v| *v == 0.0));
    }

    #[test]
    fn exact_solution_ladder() {
        let r = space_time_convergence(&pair(2, 1), C::new(1.0, 0.0), 2.0, &[64, 128, 256], 4).unwrap();
        assert!(r.orders.iter().all(|o| *o >= 1.9), "{r:?}");
        assert!((r.errors[0] - 1.17e-2).abs() < 0.05e-2, "{r:?}");
    }

    #[test]
    fn dt_self_convergence() {
        let r = time_convergence(&pair(2, 1), C::new(0.5, 0.5), 2.0, 128, &[16, 32, 64, 128], 8).unwrap();
        assert!(r.orders.iter().all(|o| *o >= 1.9), "{r:?}");
    }

    #[test]
    fn energy_law_holds_per_step() {
        let g = Grid::new(pair(2, 1).length, 128, 2.0, 256).unwrap();
        let y0 = psi_profile(&pair(2, 1), C::new(1.0, 0.3), 0.0, &g.x()).unwrap();
        let u = bump_control(&g, 0.2, 1.6, 0.7);
        let tr = solve_linear(&g, &y0, &u, None, 64).unwrap();
        assert!(tr.audit.discrete_residual < 1e-10, "{:?}", tr.audit);
        let g2 = Grid::new(g.length, 256, 2.0, 512).unwrap();
        let y0 = psi_profile(&pair(2, 1), C::new(1.0, 0.3), 0.0, &g2.x()).unwrap();
        let tr2 = solve_linear(&g2, &y0, &bump_control(&g2, 0.2, 1.6, 0.7), None, 64).unwrap();
        assert!(tr2.audit.continuous_defect < 0.6 * tr.audit.continuous_defect, "{:?} {:?}", tr.audit, tr2.audit);
        // free decay: norm never increases
        let free = g.sample_profile(|x| (x * (g.length - x)).powi(2) / 100.0);
        let tr3 = solve_linear(&g, &free, &vec![0.0; 257], None, 64).unwrap();
        assert!(tr3.energy.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-14)));
    }

    #[test]
    fn nonlinear_expansion_scaling() {
        let pr = pair(2, 1);
        let g = Grid::new(pr.length, 64, 2.0, 128).unwrap();
        let u1 = bump_control(&g, 0.0, 2.0, 1.0);
        let z = vec![0.0; 64];
        let (y1, y2) = solve_second_order(&g, &u1, 128).unwrap();
        let mut gap1 = Vec::new();
        let mut gap2 = Vec::new();
        let eps = [0.2, 0.1, 0.05, 0.025];
        for &ep in &eps {
            let u: Vec<f64> = u1.iter().map(|v| v * ep).collect();
            let yn = solve_nonlinear(&g, &z, &u, 128).unwrap();
            let yl = solve_linear(&g, &z, &u, None, 128).unwrap();
            let d1: Vec<f64> = yn.final_state().iter().zip(yl.final_state()).map(|(a, b)| a - b).collect();
            let d2: Vec<f64> = yn
                .final_state()
                .iter()
                .zip(y1.final_state().iter().zip(y2.final_state()))
                .map(|(a, (b, c))| a - ep * b - ep * ep * c)
                .collect();
            gap1.push(l2_norm(&d1, g.dx));
            gap2.push(l2_norm(&d2, g.dx));
        }
        let (s1, _) = crate::fit::loglog_slope(&eps, &gap1);
        let (s2, _) = crate::fit::loglog_slope(&eps, &gap2);
        assert!((s1 - 2.0).abs() < 0.1, "{s1} {gap1:?}");
        assert!((s2 - 3.0).abs() < 0.15, "{s2} {gap2:?}");
    }

    #[test]
    fn large_data_diverges() {
        let g = Grid::new(10.0, 64, 1.0, 10).unwrap();
        let y0 = g.sample_profile(|x| 1e4 * (x * (10.0 - x)).powi(2));
        let r = solve_nonlinear(&g, &y0, &vec![0.0; 11], 1);
        assert!(matches!(r, Err(Error::FixedPointDiverged { step: 0, .. })), "{r:?}");
    }

    #[test]
    fn projection_identity_refines() {
        let pr = pair(2, 1);
        let mut rel = Vec::new();
        for (nx, nt) in [(128, 512), (256, 1024)] {
            let g = Grid::new(pr.length, nx, 2.0, nt).unwrap();
            let u = bump_control(&g, 0.0, 2.0, 1.0);
            rel.push(projection_identity(&pr, &g, &u).unwrap().relative_discrepancy);
        }
        assert!(rel[1] <= 0.5 * rel[0], "{rel:?}");
    }

    #[test]
    fn frequency_identity_after_exit() {
        let pr = pair(2, 1);
        let g = Grid::new(pr.length, 128, 40.0, 10240).unwrap();
        let u = bump_control(&g, 0.0, 1.0, 1.0);
        let f = frequency_identity(&pr, &g, &u, 0.05).unwrap();
        assert!(f.tail_ratio < 1e-3, "{f:?}");
        assert!(f.relative_discrepancy < 0.05, "{f:?}");
    }

    #[test]
    fn transform_of_bump() {
        let g = Grid::new(5.0, 40, 2.0, 4000).unwrap();
        let u = bump_control(&g, 0.0, 2.0, 1.0);
        // ∫ bump = 0.4439938161680794 / e^{-1} on (-1, 1), scaled by half-width 1
        let want = 0.443_993_816_168_079_4 / (-1f64).exp() / (2.0 * PI).sqrt();
        assert!((control_transform(&u, g.dt, 0.0).re - want).abs() < 1e-9);
        let z = 3.7;
        let direct: C = crate::quad::integrate(|t| C::from_polar(bump(t - 1.0) / bump(0.0), -z * t), 0.0, 2.0, 1e-14, 1e-13, 200).value
            / (2.0 * PI).sqrt();
        assert!((control_transform(&u, g.dt, z) - direct).norm() < 1e-8);
    }
}
