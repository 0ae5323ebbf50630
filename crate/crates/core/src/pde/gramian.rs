//! Discrete control-to-final-state map, its singular values and minimum-norm controls.

use super::solver::{Grid, Stepper};
use crate::error::{Error, Result};
use crate::number_theory::LengthClass;
use crate::unreachable::eta_triple;
use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use std::f64::consts::PI;

/// `G` with `y(T) = G u` in weighted coordinates: states scaled by `√dx`, controls by `1/√dt`,
/// so that Euclidean norms approximate `L²(0,L)` and `L²(0,T)`.
#[derive(Clone, Debug)]
pub struct ControlMap {
    pub grid: Grid,
    pub g: DMatrix<f64>,
}

/// Assembles the map column by column: column n is the response to a unit control at `t_n`.
pub fn control_map(grid: &Grid) -> Result<ControlMap> {
    let st = Stepper::new(grid)?;
    let nt = grid.nt;
    let nx = grid.nx;
    // P_k = Φ^k c
    let mut powers = Vec::with_capacity(nt);
    powers.push(st.control_response());
    for k in 1..nt {
        let next = st.propagate(&powers[k - 1]);
        powers.push(next);
    }
    let w = (grid.dx / grid.dt).sqrt();
    let mut g = DMatrix::zeros(nx, nt + 1);
    for n in 0..=nt {
        let mut col = g.column_mut(n);
        if n < nt {
            for (c, v) in col.iter_mut().zip(&powers[nt - 1 - n]) {
                *c += w * v;
            }
        }
        if n > 0 {
            for (c, v) in col.iter_mut().zip(&powers[nt - n]) {
                *c += w * v;
            }
        }
    }
    Ok(ControlMap { grid: *grid, g })
}

impl ControlMap {
    /// Final state (nodal values) for a control sampled at the time nodes.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let v = DVector::from_iterator(u.len(), u.iter().map(|x| x * self.grid.dt.sqrt()));
        let y = &self.g * v;
        y.iter().map(|x| x / self.grid.dx.sqrt()).collect()
    }
}

fn singular_values_of(m: &DMatrix<f64>) -> Vec<f64> {
    let gram = if m.nrows() <= m.ncols() { m * m.transpose() } else { m.transpose() * m };
    let mut ev: Vec<f64> = gram.symmetric_eigenvalues().iter().map(|v| v.max(0.0).sqrt()).collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}

/// Orthonormal basis (weighted by √dx) of the span of sampled probe functions.
pub fn orthonormal_probes(probes: &[Vec<f64>], dx: f64) -> Result<DMatrix<f64>> {
    if probes.is_empty() {
        return Err(Error::Config("no probe functions".into()));
    }
    let n = probes[0].len();
    let m = DMatrix::from_fn(n, probes.len(), |i, j| probes[j][i] * dx.sqrt());
    let svd = m.svd(true, false);
    let u = svd.u.expect("left vectors");
    let smax = svd.singular_values.max();
    let keep: Vec<usize> = (0..svd.singular_values.len()).filter(|&k| svd.singular_values[k] > 1e-10 * smax).collect();
    Ok(DMatrix::from_fn(n, keep.len(), |i, j| u[(i, keep[j])]))
}

#[derive(Clone, Debug, Serialize)]
pub struct GramianReport {
    pub length: f64,
    pub nx: usize,
    pub nt: usize,
    pub t_final: f64,
    /// All singular values of the weighted map, descending.
    pub singular_values: Vec<f64>,
    /// Singular values of the map followed by projection onto the probe space.
    pub restricted: Vec<f64>,
    /// Leading singular values of the map followed by projection onto the complement.
    pub complement: Vec<f64>,
    /// `max restricted / max singular value`.
    pub restricted_ratio: f64,
    pub probe_dimension: usize,
}

pub fn gramian_with_probes(map: &ControlMap, probes: &[Vec<f64>]) -> Result<GramianReport> {
    let grid = map.grid;
    let q = orthonormal_probes(probes, grid.dx)?;
    let proj = q.transpose() * &map.g;
    let comp = &map.g - &q * &proj;
    let sv = singular_values_of(&map.g);
    let restricted = singular_values_of(&proj);
    let complement = singular_values_of(&comp);
    let smax = sv[0];
    Ok(GramianReport {
        length: grid.length,
        nx: grid.nx,
        nt: grid.nt,
        t_final: grid.t_final,
        restricted_ratio: if smax > 0.0 { restricted[0] / smax } else { 0.0 },
        singular_values: sv,
        restricted: restricted.into_iter().take(q.ncols()).collect(),
        complement,
        probe_dimension: q.ncols(),
    })
}

/// Real and imaginary parts of the profiles of a length class, sampled on the grid.
pub fn class_probes(class: &LengthClass, grid: &Grid) -> Result<Vec<Vec<f64>>> {
    let x = grid.x();
    let mut out = Vec::new();
    for pr in &class.pairs {
        let e = eta_triple(pr)?;
        let v: Vec<_> = x.iter().map(|&xi| e.phi(xi)).collect();
        let re: Vec<f64> = v.iter().map(|c| c.re).collect();
        let im: Vec<f64> = v.iter().map(|c| c.im).collect();
        for part in [re, im] {
            if part.iter().any(|a| a.abs() > 1e-12) {
                out.push(part);
            }
        }
    }
    Ok(out)
}

/// The direction `1 - cos(2πx/L)`: the unreachable profile at L = 2π, transplanted to any L.
pub fn cosine_probe(grid: &Grid) -> Vec<f64> {
    grid.sample_profile(|x| 1.0 - (2.0 * PI * x / grid.length).cos())
}

pub fn gramian(grid: &Grid, class: Option<&LengthClass>) -> Result<GramianReport> {
    let map = control_map(grid)?;
    let probes = match class {
        Some(c) => {
            if (c.length - grid.length).abs() > 1e-12 * c.length {
                return Err(Error::Config("grid length differs from the class length".into()));
            }
            class_probes(c, grid)?
        }
        None => vec![cosine_probe(grid)],
    };
    gramian_with_probes(&map, &probes)
}

#[derive(Clone, Debug, Serialize)]
pub struct HumResult {
    /// Control at the time nodes.
    pub control: Vec<f64>,
    pub relative_residual: f64,
    pub iterations: usize,
    pub control_norm: f64,
}

/// Minimum-norm control with `G u = target` by CGLS from zero.
///
/// Stagnation (less than 1% residual decrease over `window` iterations above `tol`)
/// is reported as `NotReachable`.
pub fn hum_control(map: &ControlMap, target: &[f64], tol: f64) -> Result<HumResult> {
    let grid = map.grid;
    let b = DVector::from_iterator(target.len(), target.iter().map(|v| v * grid.dx.sqrt()));
    let bn = b.norm();
    let m = map.g.ncols();
    if bn == 0.0 {
        return Ok(HumResult { control: vec![0.0; m], relative_residual: 0.0, iterations: 0, control_norm: 0.0 });
    }
    let window = 25;
    let max_iter = 4 * m;
    let mut x = DVector::zeros(m);
    let mut r = b.clone();
    let mut s = map.g.transpose() * &r;
    let mut p = s.clone();
    let mut gamma = s.norm_squared();
    let mut history = vec![1.0];
    let mut it = 0;
    let mut rel = 1.0;
    while it < max_iter {
        it += 1;
        let q = &map.g * &p;
        let qq = q.norm_squared();
        if qq == 0.0 {
            break;
        }
        let alpha = gamma / qq;
        x += alpha * &p;
        r -= alpha * &q;
        s = map.g.transpose() * &r;
        let gnew = s.norm_squared();
        p = &s + (gnew / gamma) * &p;
        gamma = gnew;
        rel = r.norm() / bn;
        history.push(rel);
        if rel <= tol {
            break;
        }
        if it > window && rel > 0.99 * history[it - window] {
            return Err(Error::NotReachable { residual: rel });
        }
    }
    if rel > tol {
        return Err(Error::NotReachable { residual: rel });
    }
    let control: Vec<f64> = x.iter().map(|v| v / grid.dt.sqrt()).collect();
    Ok(HumResult { control_norm: x.norm(), control, relative_residual: rel, iterations: it })
}
