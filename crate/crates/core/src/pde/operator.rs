//! Spatial operator for `y_x + y_xxx` on interior nodes with `y(0) = y(L) = y_x(0) = 0`
//! and `y_x(L) = u`.
//!
//! In units dx = 1 the third-derivative part is `A3 = -D3 + S + K`: D3 is the central
//! five-point stencil with ghost values `y_{-1} = -y_1` and `y_{n+2} = y_n + 2u`,
//! S moves the symmetric part to `-½(g_L g_Lᵀ + g_R g_Rᵀ)` with the one-sided
//! slopes `g_L·y ≈ y_x(0)`, `g_R·y ≈ y_x(L)`, and K is a skew 4×4 block at each end
//! fitted so that low-degree polynomials are differentiated exactly.

use super::banded::Banded;
use nalgebra::{DMatrix, DVector};
use std::sync::OnceLock;

/// Size of the skew correction blocks.
pub const BLOCK: usize = 4;
const FIT_N: usize = 30;

/// `(left, right)` upper triangles of K in row order (0,1),(0,2),(0,3),(1,2),(1,3),(2,3).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Closure {
    pub left: [f64; 6],
    pub right: [f64; 6],
}

fn pairs() -> [(usize, usize); 6] {
    [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
}

/// Dense `-D3l + S` and the input vector `g_R` for n nodes, dx = 1.
fn base_third(n: usize) -> (DMatrix<f64>, DVector<f64>) {
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        for (off, c) in [(2i64, 1.0), (1, -2.0), (-1, 2.0), (-2, -1.0)] {
            let j = i as i64 + off;
            if (0..n as i64).contains(&j) {
                a[(i, j as usize)] -= c / 2.0;
            }
        }
    }
    a[(0, 0)] -= 0.5;
    a[(n - 1, n - 1)] -= 0.5;
    let (gl, gr) = slope_vectors(n);
    let mut s = DMatrix::zeros(n, n);
    s[(0, 0)] += 0.5;
    s[(n - 1, n - 1)] += 0.5;
    s -= &gl * gl.transpose() * 0.5;
    s -= &gr * gr.transpose() * 0.5;
    (a + s, gr)
}

/// `g_L = (2, -1/2, 0, …)`, `g_R = (…, 0, 1/2, -2)`: one-sided slopes at the walls times dx.
pub fn slope_vectors(n: usize) -> (DVector<f64>, DVector<f64>) {
    let mut gl = DVector::zeros(n);
    gl[0] = 2.0;
    gl[1] = -0.5;
    let mut gr = DVector::zeros(n);
    gr[n - 1] = -2.0;
    gr[n - 2] = 0.5;
    (gl, gr)
}

/// Weighted least-squares fit of the skew blocks against `x^k` (left) and
/// `(x - (n+1))^k` (right, with `u = y_x(L)`), k = 1, 2, 3, weight `10^{3(3-k)}`.
pub fn fit_closure() -> Closure {
    let n = FIT_N;
    let (a, b) = base_third(n);
    let x: Vec<f64> = (1..=n).map(|i| i as f64).collect();
    let lx = (n + 1) as f64;
    let mut out = Closure { left: [0.0; 6], right: [0.0; 6] };
    for right in [false, true] {
        let off = if right { n - BLOCK } else { 0 };
        let rows: Vec<usize> = if right { (n - BLOCK - 2..n).collect() } else { (0..BLOCK + 2).collect() };
        let mut m = Vec::new();
        let mut rhs = Vec::new();
        for k in 1..=3i32 {
            let y = DVector::from_iterator(n, x.iter().map(|&v| if right { (v - lx).powi(k) } else { v.powi(k) }));
            let u = if right && k == 1 { 1.0 } else { 0.0 };
            let exact = if k == 3 { -6.0 } else { 0.0 };
            let w = 10f64.powi(3 * (3 - k));
            let r0 = &a * &y + &b * u;
            for &i in &rows {
                let mut row = [0.0; 6];
                for (t, (p, q)) in pairs().iter().enumerate() {
                    let (p, q) = (p + off, q + off);
                    if i == p {
                        row[t] += y[q];
                    }
                    if i == q {
                        row[t] -= y[p];
                    }
                }
                m.extend(row.iter().map(|v| v * w));
                rhs.push((exact - r0[i]) * w);
            }
        }
        let mat = DMatrix::from_row_slice(rhs.len(), 6, &m);
        let sol = mat.svd(true, true).solve(&DVector::from_vec(rhs), 1e-14).expect("closure fit");
        let dst = if right { &mut out.right } else { &mut out.left };
        dst.copy_from_slice(sol.as_slice());
    }
    out
}

pub fn closure() -> &'static Closure {
    static C: OnceLock<Closure> = OnceLock::new();
    C.get_or_init(fit_closure)
}

/// Discrete operator `A` and input vector `b` with `y' = A y + b u`, physical units.
#[derive(Clone, Debug)]
pub struct Operator {
    pub n: usize,
    pub dx: f64,
    pub a: Banded,
    pub b: Vec<f64>,
    /// Centered first difference (no 1/dx), zero Dirichlet values.
    pub d1: Banded,
}

impl Operator {
    pub fn new(n: usize, dx: f64) -> Self {
        assert!(n >= 2 * BLOCK + 2, "at least {} interior nodes", 2 * BLOCK + 2);
        let c = closure();
        let mut a3 = Banded::zeros(n, 3, 3);
        for i in 0..n {
            for (off, v) in [(2i64, 1.0), (1, -2.0), (-1, 2.0), (-2, -1.0)] {
                let j = i as i64 + off;
                if (0..n as i64).contains(&j) {
                    a3.add(i, j as usize, -v / 2.0);
                }
            }
        }
        a3.add(0, 0, -0.5);
        a3.add(n - 1, n - 1, -0.5);
        let (gl, gr) = slope_vectors(n);
        a3.add(0, 0, 0.5);
        a3.add(n - 1, n - 1, 0.5);
        for g in [&gl, &gr] {
            let idx: Vec<usize> = (0..n).filter(|&i| g[i] != 0.0).collect();
            for &i in &idx {
                for &j in &idx {
                    a3.add(i, j, -0.5 * g[i] * g[j]);
                }
            }
        }
        for (t, (p, q)) in pairs().iter().enumerate() {
            a3.add(*p, *q, c.left[t]);
            a3.add(*q, *p, -c.left[t]);
            let (p, q) = (p + n - BLOCK, q + n - BLOCK);
            a3.add(p, q, c.right[t]);
            a3.add(q, p, -c.right[t]);
        }
        let mut d1 = Banded::zeros(n, 1, 1);
        for i in 0..n {
            if i + 1 < n {
                d1.add(i, i + 1, 0.5);
            }
            if i > 0 {
                d1.add(i, i - 1, -0.5);
            }
        }
        let mut a = Banded::zeros(n, 3, 3);
        let s3 = 1.0 / dx.powi(3);
        for i in 0..n {
            for j in i.saturating_sub(3)..=(i + 3).min(n - 1) {
                let v = a3.get(i, j) * s3 - d1.get(i, j) / dx;
                if v != 0.0 {
                    a.add(i, j, v);
                }
            }
        }
        let b = gr.iter().map(|v| v / (dx * dx)).collect();
        Operator { n, dx, a, b, d1 }
    }

    /// `(g_L·y / dx, g_R·y / dx)`: one-sided approximations of `y_x(0)`, `y_x(L)`.
    pub fn wall_slopes(&self, y: &[f64]) -> (f64, f64) {
        let n = self.n;
        ((2.0 * y[0] - 0.5 * y[1]) / self.dx, (-2.0 * y[n - 1] + 0.5 * y[n - 2]) / self.dx)
    }

    /// Discrete `(y²/2)_x` in conservative form.
    pub fn convection(&self, y: &[f64]) -> Vec<f64> {
        let sq: Vec<f64> = y.iter().map(|v| v * v).collect();
        self.d1.matvec(&sq).into_iter().map(|v| v / (2.0 * self.dx)).collect()
    }
}
