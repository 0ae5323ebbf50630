//! Crank–Nicolson time stepping for the linear, forced and nonlinear systems.

use super::banded::{Banded, BandedLu};
use super::operator::Operator;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

pub const PICARD_MAX_ITER: usize = 25;
pub const PICARD_TOL: f64 = 1e-11;

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct Grid {
    pub length: f64,
    pub nx: usize,
    pub dx: f64,
    pub t_final: f64,
    pub nt: usize,
    pub dt: f64,
}

impl Grid {
    pub fn new(length: f64, nx: usize, t_final: f64, nt: usize) -> Result<Self> {
        if nx < 32 {
            return Err(Error::Config(format!("nx = {nx} below 32")));
        }
        if !(length > 0.0 && length.is_finite()) || !(t_final > 0.0 && t_final.is_finite()) || nt == 0 {
            return Err(Error::Config(format!("bad grid: L = {length}, T = {t_final}, nt = {nt}")));
        }
        Ok(Grid { length, nx, dx: length / (nx + 1) as f64, t_final, nt, dt: t_final / nt as f64 })
    }

    /// Interior nodes `x_j = j dx`, j = 1..=nx.
    pub fn x(&self) -> Vec<f64> {
        (1..=self.nx).map(|j| j as f64 * self.dx).collect()
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.nt).map(|i| i as f64 * self.dt).collect()
    }

    pub fn sample_profile(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.x().into_iter().map(f).collect()
    }

    pub fn sample_control(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.times().into_iter().map(f).collect()
    }
}

/// Factorized one-step map `(I - h A) y⁺ = (I + h A) y + h b (u + u⁺) + h (f + f⁺)`, `h = dt/2`.
#[derive(Clone, Debug)]
pub struct Stepper {
    pub grid: Grid,
    pub op: Operator,
    lu: BandedLu,
    rhs: Banded,
    half_dt: f64,
}

impl Stepper {
    pub fn new(grid: &Grid) -> Result<Self> {
        let op = Operator::new(grid.nx, grid.dx);
        let h = grid.dt / 2.0;
        let lhs = op.a.affine_identity(-h, 1.0);
        let rhs = op.a.affine_identity(h, 1.0);
        let lu = lhs.factor()?;
        Ok(Stepper { grid: *grid, op, lu, rhs, half_dt: h })
    }

    /// Right-hand side before the solve; `f_sum = f + f⁺`.
    fn assemble(&self, y: &[f64], u0: f64, u1: f64, f_sum: Option<&[f64]>) -> Vec<f64> {
        let h = self.half_dt;
        let mut r = self.rhs.matvec(y);
        let us = h * (u0 + u1);
        for (ri, bi) in r.iter_mut().zip(&self.op.b) {
            *ri += us * bi;
        }
        if let Some(f) = f_sum {
            for (ri, fi) in r.iter_mut().zip(f) {
                *ri += h * fi;
            }
        }
        r
    }

    pub fn linear_step(&self, y: &[f64], u0: f64, u1: f64, f_sum: Option<&[f64]>) -> Vec<f64> {
        let mut r = self.assemble(y, u0, u1, f_sum);
        self.lu.solve_in_place(&mut r);
        r
    }

    /// Applies `(I - hA)^{-1}` to `v`.
    pub fn solve(&self, v: &[f64]) -> Vec<f64> {
        self.lu.solve(v)
    }

    /// Backward Euler over half a step, `(I - hA) y⁺ = y + h b u⁺`; damps stiff modes.
    pub fn damped_half_step(&self, y: &[f64], u1: f64) -> Vec<f64> {
        let h = self.half_dt;
        let mut r: Vec<f64> = y.iter().zip(&self.op.b).map(|(v, b)| v + h * b * u1).collect();
        self.lu.solve_in_place(&mut r);
        r
    }

    /// `(I - hA)^{-1}(I + hA) v`.
    pub fn propagate(&self, v: &[f64]) -> Vec<f64> {
        let mut r = self.rhs.matvec(v);
        self.lu.solve_in_place(&mut r);
        r
    }

    /// `(I - hA)^{-1} h b`: response of one step to a unit control at one end.
    pub fn control_response(&self) -> Vec<f64> {
        let v: Vec<f64> = self.op.b.iter().map(|b| b * self.half_dt).collect();
        self.lu.solve(&v)
    }

    /// One step of `y_t + y_x + y_xxx + (y²/2)_x = 0` by Picard iteration on the
    /// implicit convection average.
    pub fn nonlinear_step(&self, y: &[f64], u0: f64, u1: f64, step: usize) -> Result<Vec<f64>> {
        let h = self.half_dt;
        let n0 = self.op.convection(y);
        let neg: Vec<f64> = n0.iter().map(|v| -v).collect();
        let base = self.linear_step(y, u0, u1, Some(&neg));
        let mut cur = base.clone();
        let mut update = f64::INFINITY;
        for _ in 0..PICARD_MAX_ITER {
            let n1 = self.op.convection(&cur);
            let corr = self.lu.solve(&n1.iter().map(|v| -h * v).collect::<Vec<_>>());
            let next: Vec<f64> = base.iter().zip(&corr).map(|(b, c)| b + c).collect();
            if next.iter().any(|v| !v.is_finite()) {
                update = f64::INFINITY;
                break;
            }
            let diff = next.iter().zip(&cur).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            let size = next.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            update = if size > 0.0 { diff / size } else { 0.0 };
            cur = next;
            if update <= PICARD_TOL {
                return Ok(cur);
            }
        }
        Err(Error::FixedPointDiverged { step, update })
    }
}

/// Per-step audit of `dx‖y⁺‖² - dx‖y‖² = dt(ū² - (g_L·ȳ/dx)² - (g_R·ȳ/dx - ū)² + 2dx ȳ·f̄)`.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct EnergyAudit {
    /// Largest per-step violation of the discrete law, relative to the largest energy.
    pub discrete_residual: f64,
    /// `Σ |ΔE - dt(ū² - y_x(0)² + 2⟨ȳ, f̄⟩)|` over all steps: the defect against the continuous law.
    pub continuous_defect: f64,
}

#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct XNorm {
    pub max_l2: f64,
    pub h1_l2_in_time: f64,
}

impl XNorm {
    pub fn total(&self) -> f64 {
        self.max_l2 + self.h1_l2_in_time
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Trajectory {
    pub grid: Grid,
    /// Indices of the stored snapshots (every `save_every` steps plus the last).
    pub saved_steps: Vec<usize>,
    pub states: Vec<Vec<f64>>,
    pub control: Vec<f64>,
    /// `dx‖y(t_i)‖²` at every time node.
    pub energy: Vec<f64>,
    pub audit: EnergyAudit,
    pub xnorm: XNorm,
}

impl Trajectory {
    pub fn final_state(&self) -> &[f64] {
        self.states.last().expect("at least one snapshot")
    }

    pub fn l2_norms(&self) -> Vec<f64> {
        self.energy.iter().map(|e| e.sqrt()).collect()
    }
}

pub fn l2_norm(y: &[f64], dx: f64) -> f64 {
    (dx * y.iter().map(|v| v * v).sum::<f64>()).sqrt()
}

/// Records energy, the audit and snapshots while stepping.
struct Recorder {
    grid: Grid,
    save_every: usize,
    saved_steps: Vec<usize>,
    states: Vec<Vec<f64>>,
    energy: Vec<f64>,
    audit: EnergyAudit,
    h1_sq: f64,
    max_l2: f64,
}

impl Recorder {
    fn new(grid: &Grid, y0: &[f64], save_every: usize) -> Self {
        let e = grid.dx * y0.iter().map(|v| v * v).sum::<f64>();
        let mut r = Recorder {
            grid: *grid,
            save_every: save_every.max(1),
            saved_steps: vec![0],
            states: vec![y0.to_vec()],
            energy: vec![e],
            audit: EnergyAudit::default(),
            h1_sq: 0.0,
            max_l2: e.sqrt(),
        };
        r.h1_sq += 0.5 * grid.dt * h1_seminorm_sq(y0, grid.dx);
        r
    }

    fn record(&mut self, op: &Operator, n: usize, y0: &[f64], y1: &[f64], u0: f64, u1: f64, f_sum: Option<&[f64]>) {
        let dx = self.grid.dx;
        let dt = self.grid.dt;
        let e1 = dx * y1.iter().map(|v| v * v).sum::<f64>();
        let e0 = *self.energy.last().unwrap();
        let ym: Vec<f64> = y0.iter().zip(y1).map(|(a, b)| 0.5 * (a + b)).collect();
        let um = 0.5 * (u0 + u1);
        let (sl, sr) = op.wall_slopes(&ym);
        let work = f_sum.map_or(0.0, |f| dx * ym.iter().zip(f).map(|(a, b)| a * b).sum::<f64>());
        let rate = um * um - sl * sl - (sr - um).powi(2) + work;
        let scale = e0.max(e1).max(dt * (um * um + sl * sl + sr * sr)).max(1e-300);
        let disc = ((e1 - e0) - dt * rate).abs() / scale;
        self.audit.discrete_residual = self.audit.discrete_residual.max(disc);
        self.audit.continuous_defect += ((e1 - e0) - dt * (um * um - sl * sl + work)).abs();
        self.energy.push(e1);
        self.max_l2 = self.max_l2.max(e1.sqrt());
        let w = if n + 1 == self.grid.nt { 0.5 } else { 1.0 };
        self.h1_sq += w * dt * h1_seminorm_sq(y1, dx);
        if (n + 1) % self.save_every == 0 || n + 1 == self.grid.nt {
            self.saved_steps.push(n + 1);
            self.states.push(y1.to_vec());
        }
    }

    fn finish(self, control: Vec<f64>) -> Trajectory {
        Trajectory {
            grid: self.grid,
            saved_steps: self.saved_steps,
            states: self.states,
            control,
            energy: self.energy,
            audit: self.audit,
            xnorm: XNorm { max_l2: self.max_l2, h1_l2_in_time: self.h1_sq.sqrt() },
        }
    }
}

/// `‖y_x‖²` by forward differences including the zero wall values.
fn h1_seminorm_sq(y: &[f64], dx: f64) -> f64 {
    let mut acc = y[0] * y[0] + y[y.len() - 1] * y[y.len() - 1];
    for w in y.windows(2) {
        acc += (w[1] - w[0]).powi(2);
    }
    acc / dx
}

fn check_inputs(grid: &Grid, y0: &[f64], u: &[f64]) -> Result<()> {
    if y0.len() != grid.nx {
        return Err(Error::Config(format!("initial state has {} values, grid has {}", y0.len(), grid.nx)));
    }
    if u.len() != grid.nt + 1 {
        return Err(Error::Config(format!("control has {} values, expected {}", u.len(), grid.nt + 1)));
    }
    Ok(())
}

/// Linear system `y_t + y_x + y_xxx = f`, `y_x(t, L) = u(t)`.
pub fn solve_linear(grid: &Grid, y0: &[f64], u: &[f64], forcing: Option<&[Vec<f64>]>, save_every: usize) -> Result<Trajectory> {
    check_inputs(grid, y0, u)?;
    if let Some(f) = forcing {
        if f.len() != grid.nt + 1 || f.iter().any(|v| v.len() != grid.nx) {
            return Err(Error::Config("forcing must hold nt+1 profiles of length nx".into()));
        }
    }
    let st = Stepper::new(grid)?;
    let mut rec = Recorder::new(grid, y0, save_every);
    let mut y = y0.to_vec();
    for n in 0..grid.nt {
        let fs: Option<Vec<f64>> = forcing.map(|f| f[n].iter().zip(&f[n + 1]).map(|(a, b)| a + b).collect());
        let y1 = st.linear_step(&y, u[n], u[n + 1], fs.as_deref());
        rec.record(&st.op, n, &y, &y1, u[n], u[n + 1], fs.as_deref());
        y = y1;
    }
    Ok(rec.finish(u.to_vec()))
}

/// Runs the first-order system with control `u1` from rest and the second-order
/// system `y₂,t + y₂,x + y₂,xxx = -(y₁²/2)_x` with homogeneous data alongside.
/// `observe(n, y1, y2)` is called at every time node.
pub fn solve_second_order_with<F: FnMut(usize, &[f64], &[f64])>(
    grid: &Grid,
    u1: &[f64],
    save_every: usize,
    mut observe: F,
) -> Result<(Trajectory, Trajectory)> {
    let zero = vec![0.0; grid.nx];
    check_inputs(grid, &zero, u1)?;
    let st = Stepper::new(grid)?;
    let mut r1 = Recorder::new(grid, &zero, save_every);
    let mut r2 = Recorder::new(grid, &zero, save_every);
    let mut y1 = zero.clone();
    let mut y2 = zero.clone();
    let mut n_prev = st.op.convection(&y1);
    observe(0, &y1, &y2);
    for n in 0..grid.nt {
        let y1n = st.linear_step(&y1, u1[n], u1[n + 1], None);
        let n_next = st.op.convection(&y1n);
        let fs: Vec<f64> = n_prev.iter().zip(&n_next).map(|(a, b)| -(a + b)).collect();
        let y2n = st.linear_step(&y2, 0.0, 0.0, Some(&fs));
        r1.record(&st.op, n, &y1, &y1n, u1[n], u1[n + 1], None);
        r2.record(&st.op, n, &y2, &y2n, 0.0, 0.0, Some(&fs));
        y1 = y1n;
        y2 = y2n;
        n_prev = n_next;
        observe(n + 1, &y1, &y2);
    }
    Ok((r1.finish(u1.to_vec()), r2.finish(vec![0.0; grid.nt + 1])))
}

pub fn solve_second_order(grid: &Grid, u1: &[f64], save_every: usize) -> Result<(Trajectory, Trajectory)> {
    solve_second_order_with(grid, u1, save_every, |_, _, _| {})
}

/// `y_t + y_x + y_xxx + y y_x = 0`, `y_x(t, L) = u(t)`.
pub fn solve_nonlinear(grid: &Grid, y0: &[f64], u: &[f64], save_every: usize) -> Result<Trajectory> {
    check_inputs(grid, y0, u)?;
    let st = Stepper::new(grid)?;
    let mut rec = Recorder::new(grid, y0, save_every);
    let mut y = y0.to_vec();
    let mut n_prev = st.op.convection(&y);
    for n in 0..grid.nt {
        let y1 = st.nonlinear_step(&y, u[n], u[n + 1], n)?;
        let n_next = st.op.convection(&y1);
        let fs: Vec<f64> = n_prev.iter().zip(&n_next).map(|(a, b)| -(a + b)).collect();
        rec.record(&st.op, n, &y, &y1, u[n], u[n + 1], Some(&fs));
        y = y1;
        n_prev = n_next;
    }
    Ok(rec.finish(u.to_vec()))
}
