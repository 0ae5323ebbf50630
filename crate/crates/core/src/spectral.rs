//! Roots of `λ³ + λ + iz = 0` and the entire functions `G = P/Ξ`, `H = det Q/Ξ`.

use crate::error::{Error, Result};
use crate::scaled::{phi1, ExpSum, Scaled};
use nalgebra::Matrix3;
use num_complex::Complex64 as C;
use serde::Serialize;
use std::f64::consts::PI;

const I: C = C { re: 0.0, im: 1.0 };

/// Below this |Ξ| the quotients are replaced by divided differences.
pub const XI_SWITCH: f64 = 1e-6;

/// Directions `μ_j = exp(-iπ/6 - 2jπi/3)`, j = 1, 2, 3.
pub fn mu() -> [C; 3] {
    [1.0, 2.0, 3.0].map(|j: f64| C::from_polar(1.0, -PI / 6.0 - 2.0 * j * PI / 3.0))
}

/// Directions `μ̃_j = exp(iπ/6 + 2jπi/3)`.
pub fn mu_tilde() -> [C; 3] {
    mu().map(|m| m.conj())
}

fn sort_roots(mut r: [C; 3]) -> [C; 3] {
    let scale = 1e-10 * (1.0 + r.iter().map(|v| v.norm()).fold(0.0, f64::max));
    r.sort_by(|a, b| {
        if (a.re - b.re).abs() <= scale {
            a.im.total_cmp(&b.im)
        } else {
            a.re.total_cmp(&b.re)
        }
    });
    r
}

/// The three roots of `λ³ + λ + iz = 0`, sorted by (Re, Im).
pub fn roots(z: C) -> [C; 3] {
    let zero = C::new(0.0, 0.0);
    let one = C::new(1.0, 0.0);
    let m = Matrix3::new(zero, -one, -I * z, one, zero, zero, zero, one, zero);
    let ev = m
        .eigenvalues()
        .or_else(|| nalgebra::Schur::try_new(m, 1e-15, 10_000).and_then(|s| s.eigenvalues()))
        .expect("3x3 companion matrix always has a Schur form");
    let mut r = [ev[0], ev[1], ev[2]];
    for root in r.iter_mut() {
        for _ in 0..2 {
            let d = 3.0 * *root * *root + 1.0;
            if d.norm() < 1e-8 {
                break;
            }
            let step = (*root * *root * *root + *root + I * z) / d;
            *root -= step;
        }
    }
    sort_roots(r)
}

/// Roots of `μ³ + μ - i(z - p) = 0`: the conjugates of the roots at `conj(z) - p`.
pub fn shifted_roots(z: C, p: f64) -> [C; 3] {
    sort_roots(roots((z - p).conj()).map(|v| v.conj()))
}

fn check_positive(z: f64, order: u8) -> Result<()> {
    if z <= 0.0 || !z.is_finite() {
        return Err(Error::Domain(format!("asymptotic roots need z > 0, got {z}")));
    }
    if !(1..=3).contains(&order) {
        return Err(Error::Domain(format!("order must be 1, 2 or 3, got {order}")));
    }
    Ok(())
}

/// Large-z expansion `μ_j s - 1/(3μ_j s)`, `s = z^{1/3}`; the z^{-1} term
/// vanishes, so order 3 coincides with order 2.
pub fn asymptotic_roots(z: f64, order: u8) -> Result<[C; 3]> {
    check_positive(z, order)?;
    let s = z.cbrt();
    Ok(mu().map(|m| {
        let mut v = m * s;
        if order >= 2 {
            v -= 1.0 / (3.0 * m * s);
        }
        v
    }))
}

/// Large-z expansion of the shifted-conjugate roots.
pub fn asymptotic_shifted_roots(z: f64, p: f64, order: u8) -> Result<[C; 3]> {
    check_positive(z, order)?;
    let s = z.cbrt();
    Ok(mu_tilde().map(|m| {
        let mut v = m * s;
        if order >= 2 {
            v -= 1.0 / (3.0 * m * s);
        }
        if order >= 3 {
            v -= m * p / (3.0 * s * s) + p / (9.0 * m * s * s * s * s);
        }
        v
    }))
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SpectralFrame {
    #[serde(skip)]
    pub z: C,
    #[serde(skip)]
    pub lambda: [C; 3],
    #[serde(skip)]
    pub det_q: Scaled,
    #[serde(skip)]
    pub p: Scaled,
    #[serde(skip)]
    pub xi: C,
    #[serde(skip)]
    pub g: Scaled,
    #[serde(skip)]
    pub h: Scaled,
    /// Whether G and H came from divided differences.
    pub divided_differences: bool,
}

/// `Ξ = (λ₂-λ₁)(λ₃-λ₂)(λ₃-λ₁)`, the Vandermonde determinant.
pub fn vandermonde(l: &[C; 3]) -> C {
    (l[1] - l[0]) * (l[2] - l[1]) * (l[2] - l[0])
}

/// `det Q = Σ_j (λ_{j+1} - λ_j) e^{-λ_{j+2} L}` (uses λ₁+λ₂+λ₃ = 0).
pub fn det_q_sum(l: &[C; 3], len: f64) -> ExpSum {
    let mut s = ExpSum::with_capacity(3);
    for j in 0..3 {
        s.push(-l[(j + 2) % 3] * len, l[(j + 1) % 3] - l[j]);
    }
    s
}

fn p_sum(l: &[C; 3], len: f64) -> ExpSum {
    let mut s = ExpSum::with_capacity(6);
    for j in 0..3 {
        s.push(l[(j + 2) % 3] * len, l[j]);
        s.push(l[(j + 1) % 3] * len, -l[j]);
    }
    s
}

/// First divided difference of `t ↦ e^{tL}`.
fn dd1(a: C, b: C, len: f64) -> C {
    (a * len).exp() * len * phi1((b - a) * len)
}

/// `(G, H)` from divided differences, valid through root collisions.
fn gh_divided(l: &[C; 3], len: f64) -> (C, C) {
    // put the closest pair first
    let d01 = (l[0] - l[1]).norm();
    let d12 = (l[1] - l[2]).norm();
    let d02 = (l[0] - l[2]).norm();
    let (a, b, c) = if d01 <= d12 && d01 <= d02 {
        (l[0], l[1], l[2])
    } else if d12 <= d02 {
        (l[1], l[2], l[0])
    } else {
        (l[0], l[2], l[1])
    };
    let ab = dd1(a, b, len);
    let bc = dd1(b, c, len);
    let abc = (bc - ab) / (c - a);
    (-abc, ab * bc - abc * (b * len).exp())
}

/// Frame quantities for a given root ordering.
pub fn frame_from_roots(z: C, l: [C; 3], len: f64) -> SpectralFrame {
    let det_q = det_q_sum(&l, len).eval();
    let p = p_sum(&l, len).eval();
    let xi = vandermonde(&l);
    let (g, h, dd) = if xi.norm() >= XI_SWITCH {
        let xs = Scaled::from_c(xi);
        (p / xs, det_q / xs, false)
    } else {
        let (g, h) = gh_divided(&l, len);
        (Scaled::from_c(g), Scaled::from_c(h), true)
    };
    SpectralFrame { z, lambda: l, det_q, p, xi, g, h, divided_differences: dd }
}

pub fn frame(z: C, len: f64) -> SpectralFrame {
    frame_from_roots(z, roots(z), len)
}

/// `ŷ(z, x)` for boundary datum `û`; zero-initial-state solution in frequency space.
pub fn y_hat(z: C, x: f64, u_hat: C, len: f64) -> Result<C> {
    let l = roots(z);
    let den = det_q_sum(&l, len);
    let rel = den.relative_magnitude();
    if rel < 1e-10 {
        return Err(Error::NearPole { z: z.re, rel });
    }
    let mut num = ExpSum::with_capacity(6);
    for j in 0..3 {
        let e = l[(j + 2) % 3] * x;
        num.push(l[(j + 1) % 3] * len + e, C::new(1.0, 0.0));
        num.push(l[j] * len + e, C::new(-1.0, 0.0));
    }
    Ok((num.eval() / den.eval()).scale(u_hat).to_c())
}

/// `∂ₓŷ(z, 0) = û P / det Q`.
pub fn dx_y_hat_at_zero(z: C, u_hat: C, len: f64) -> Result<C> {
    let f = frame(z, len);
    let rel = det_q_sum(&f.lambda, len).relative_magnitude();
    if rel < 1e-10 {
        return Err(Error::NearPole { z: z.re, rel });
    }
    Ok((f.p / f.det_q).scale(u_hat).to_c())
}

/// Leading large-|z| behaviour of H on the real axis:
/// `exp(-L(μ₁s - 1/(3μ₁s))) / ((μ₂-μ₁)(μ₃-μ₁)s²)` for z > 0, conjugated for z < 0.
pub fn h_asymptotic(z: f64, len: f64) -> Scaled {
    let m = mu();
    let s = z.abs().cbrt();
    let w = -(m[0] * s - 1.0 / (3.0 * m[0] * s)) * len;
    let v = Scaled::exp_times(w, C::new(1.0, 0.0) / ((m[1] - m[0]) * (m[2] - m[0]) * s * s));
    if z < 0.0 {
        v.conj()
    } else {
        v
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PaleyWienerReport {
    pub t: f64,
    pub lines: Vec<f64>,
    /// max over sampled lines of |û(z)| e^{-T|Im z|}.
    pub fitted_c: f64,
    /// ‖u‖_{L¹}/√(2π), the bound every function supported in [0, T] obeys.
    pub l1_bound: f64,
    pub passes: bool,
    /// Same fit for û·G/H when a length was supplied.
    pub fitted_c_gh: Option<f64>,
}

/// Checks `|û(z)| <= C e^{T|Im z|}` on `Im z ∈ {0, ±1}` for samples of u on
/// `t_k = k dt`, k = 0..n, with unitary transform `û(z) = (2π)^{-1/2} ∫ u e^{-izt}`.
pub fn paley_wiener_check(u: &[f64], dt: f64, t: f64, zmax: f64, points: usize, len: Option<f64>) -> PaleyWienerReport {
    let norm = 1.0 / (2.0 * PI).sqrt();
    let uhat = |z: C| -> C {
        let n = u.len();
        let mut acc = C::new(0.0, 0.0);
        for (k, &v) in u.iter().enumerate() {
            let w = if k == 0 || k + 1 == n { 0.5 } else { 1.0 };
            acc += (-I * z * (k as f64 * dt)).exp() * (v * w);
        }
        acc * dt * norm
    };
    let l1 = u.iter().map(|v| v.abs()).sum::<f64>() * dt * norm;
    let lines = vec![-1.0, 0.0, 1.0];
    let mut c_fit: f64 = 0.0;
    let mut c_gh: Option<f64> = len.map(|_| 0.0);
    for &y in &lines {
        for i in 0..points {
            let x = -zmax + 2.0 * zmax * i as f64 / (points.max(2) - 1) as f64;
            let z = C::new(x, y);
            let v = uhat(z);
            let damp = (-t * y.abs()).exp();
            c_fit = c_fit.max(v.norm() * damp);
            if let (Some(l), Some(c)) = (len, c_gh.as_mut()) {
                let f = frame(z, l);
                let q = (f.g / f.h).scale(v).abs() * damp;
                if q.is_finite() {
                    *c = c.max(q);
                }
            }
        }
    }
    PaleyWienerReport {
        t,
        lines,
        fitted_c: c_fit,
        l1_bound: l1,
        passes: c_fit <= l1 * (1.0 + 1e-9) + 1e-300,
        fitted_c_gh: c_gh,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fit::loglog_slope;
    use proptest::prelude::*;

    fn residual(l: C, z: C) -> f64 {
        (l * l * l + l + I * z).norm()
    }

    #[test]
    fn roots_at_zero() {
        let r = roots(C::new(0.0, 0.0));
        let want = [-I, C::new(0.0, 0.0), I];
        for (a, b) in r.iter().zip(want.iter()) {
            assert!((a - b).norm() < 1e-14, "{r:?}");
        }
    }

    #[test]
    fn large_z_matches_expansion() {
        let r = roots(C::new(1e6, 0.0));
        let m3 = mu()[2];
        let approx = m3 * 100.0 - 1.0 / (3.0 * m3 * 100.0);
        assert!((r[2] - approx).norm() <= 1e-8);
        assert!((mu()[1] - I).norm() < 1e-15);
        assert!(r[0].re < r[1].re && r[1].re < r[2].re);
    }

    proptest! {
        #[test]
        fn vieta_and_residual(x in -1e6f64..1e6, y in -50.0f64..50.0) {
            for z in [C::new(x, 0.0), C::new(x, y)] {
                let r = roots(z);
                let tol = 1e-12 * (1.0 + z.norm());
                for l in r { prop_assert!(residual(l, z) <= tol); }
                prop_assert!((r[0] + r[1] + r[2]).norm() <= tol);
                prop_assert!((r[0] * r[1] + r[1] * r[2] + r[2] * r[0] - 1.0).norm() <= tol);
                prop_assert!((r[0] * r[1] * r[2] + I * z).norm() <= tol);
            }
        }

        #[test]
        fn shifted_roots_are_conjugates(x in -1e5f64..1e5, p in 0.0f64..0.5) {
            let t = shifted_roots(C::new(x, 0.0), p);
            let r = roots(C::new(x - p, 0.0));
            for v in t {
                prop_assert!((v * v * v + v - I * (x - p)).norm() <= 1e-12 * (1.0 + x.abs()));
                prop_assert!(r.iter().any(|w| (w.conj() - v).norm() <= 1e-9 * (1.0 + v.norm())));
            }
        }

        #[test]
        fn g_h_permutation_invariant(x in -200.0f64..200.0, y in -3.0f64..3.0, len in 1.0f64..20.0) {
            let z = C::new(x, y);
            let l = roots(z);
            let base = frame_from_roots(z, l, len);
            let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
            for p in perms {
                let f = frame_from_roots(z, [l[p[0]], l[p[1]], l[p[2]]], len);
                let (g0, g1) = (base.g.to_c_shifted(base.g.s), f.g.to_c_shifted(base.g.s));
                let (h0, h1) = (base.h.to_c_shifted(base.h.s), f.h.to_c_shifted(base.h.s));
                prop_assert!((g0 - g1).norm() <= 1e-13 * g0.norm().max(1e-300));
                prop_assert!((h0 - h1).norm() <= 1e-13 * h0.norm().max(1e-300));
            }
        }
    }

    #[test]
    fn asymptotic_orders() {
        let zs: Vec<f64> = (0..10).map(|k| 1e3 * 2f64.powi(k)).chain([1e6]).collect();
        let p = 0.2;
        let mut errs = vec![vec![]; 4];
        for &z in &zs {
            let exact = roots(C::new(z, 0.0));
            let ex_t = shifted_roots(C::new(z, 0.0), p);
            let e = |a: [C; 3], b: &[C; 3]| a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
            errs[0].push(e(asymptotic_roots(z, 1).unwrap(), &exact));
            errs[1].push(e(asymptotic_roots(z, 2).unwrap(), &exact));
            errs[2].push(e(asymptotic_shifted_roots(z, p, 2).unwrap(), &ex_t));
            errs[3].push(e(asymptotic_shifted_roots(z, p, 3).unwrap(), &ex_t));
        }
        let want = [-1.0 / 3.0, -5.0 / 3.0, -2.0 / 3.0, -5.0 / 3.0];
        for (e, w) in errs.iter().zip(want) {
            let (s, _) = loglog_slope(&zs, e);
            assert!((s - w).abs() < 0.05, "slope {s} want {w}");
        }
        assert!(asymptotic_roots(-1.0, 1).is_err());
        assert!(asymptotic_roots(0.0, 2).is_err());
    }

    #[test]
    fn h_vanishes_at_zero_for_two_pi() {
        let f = frame(C::new(0.0, 0.0), 2.0 * PI);
        assert!(f.h.abs() < 1e-14, "{:?}", f.h);
        assert!(f.xi.norm() > 1.0);
    }

    #[test]
    fn divided_differences_agree_with_quotient() {
        // |Ξ| ranges over roughly 1e-2 .. 1e-5 near the collision at -2/(3√3)
        let zc = -2.0 / (3.0 * 3f64.sqrt());
        for len in [1.0, 2.0 * PI, 12.0] {
            for d in [1e-2, 3e-3, 1e-3, 3e-4] {
                for z in [C::new(zc + d, 0.0), C::new(zc - d, 0.0), C::new(-zc + d, 0.0), C::new(zc, d)] {
                    let l = roots(z);
                    let (g, h) = gh_divided(&l, len);
                    let f = frame_from_roots(z, l, len);
                    assert!(!f.divided_differences);
                    let xi = f.xi.norm();
                    let tol = 1e-14 / xi * 10.0 + 1e-12;
                    assert!((f.g.to_c() - g).norm() <= tol * g.norm().max(1.0), "G {z} {len}");
                    assert!((f.h.to_c() - h).norm() <= tol * h.norm().max(1.0), "H {z} {len}");
                }
            }
            // finite right at the double root
            let f = frame(C::new(zc, 0.0), len);
            assert!(f.divided_differences);
            assert!(f.g.abs().is_finite() && f.h.abs().is_finite());
        }
    }

    #[test]
    fn real_axis_symmetry() {
        for &z in &[0.7, 3.0, 55.0, 1e4] {
            let a = frame(C::new(z, 0.0), 9.0);
            let b = frame(C::new(-z, 0.0), 9.0);
            let (ha, hb) = (a.h.to_c_shifted(a.h.s), b.h.to_c_shifted(a.h.s));
            assert!((ha - hb.conj()).norm() < 1e-12 * ha.norm());
        }
    }

    #[test]
    fn h_has_no_real_zeros_for_noncritical_length() {
        // scan |H|/(asymptotic size) on a fine grid at L = 1
        let mut smallest = f64::INFINITY;
        for i in 0..20_000 {
            let z = -500.0 + i as f64 * 0.05;
            let f = frame(C::new(z, 0.0), 1.0);
            smallest = smallest.min(f.h.abs());
        }
        assert!(smallest > 1e-10, "{smallest}");
    }

    #[test]
    fn h_asymptotics_residual_order() {
        let len = 2.0 * PI * (7.0f64 / 3.0).sqrt();
        let zs: Vec<f64> = (0..10).map(|k| 1e3 * 2f64.powi(k)).chain([1e6]).collect();
        let res: Vec<f64> = zs
            .iter()
            .map(|&z| {
                let f = frame(C::new(z, 0.0), len);
                let a = h_asymptotic(z, len);
                ((f.h / a).to_c() - 1.0).norm()
            })
            .collect();
        let (s, _) = loglog_slope(&zs, &res);
        assert!(-s >= 0.6, "slope {s}");
        let f = frame(C::new(-5e4, 0.0), len);
        assert!(((f.h / h_asymptotic(-5e4, len)).to_c() - 1.0).norm() < 1e-2);
    }

    fn y_hat_plain(z: C, x: f64, u: C, len: f64) -> C {
        let l = roots(z);
        let e = |v: C| (v * len).exp();
        let mut num = C::new(0.0, 0.0);
        let mut den = C::new(0.0, 0.0);
        for j in 0..3 {
            num += (e(l[(j + 1) % 3]) - e(l[j])) * (l[(j + 2) % 3] * x).exp();
            den += (l[(j + 1) % 3] - l[j]) * (-l[(j + 2) % 3] * len).exp();
        }
        u * num / den
    }

    #[test]
    fn y_hat_properties() {
        let len = 7.3;
        let u = C::new(0.4, -1.1);
        for &z in &[0.3, -2.0, 17.0, 400.0, 1e3] {
            let z = C::new(z, 0.0);
            assert!(y_hat(z, 0.0, u, len).unwrap().norm() < 1e-12);
            assert!(y_hat(z, len, u, len).unwrap().norm() < 1e-12 * (1.0 + y_hat(z, 0.5 * len, u, len).unwrap().norm()));
            assert_eq!(y_hat(z, 1.0, C::new(0.0, 0.0), len).unwrap(), C::new(0.0, 0.0));
            for &x in &[0.1, 1.9, 4.4, 7.0] {
                let a = y_hat(z, x, u, len).unwrap();
                let b = y_hat_plain(z, x, u, len);
                assert!((a - b).norm() <= 1e-12 * b.norm().max(1e-3), "{z} {x} {a} {b}");
            }
            // central difference of the exact exponential sum in x
            let h = 1e-5;
            let fd = (y_hat(z, h, u, len).unwrap() - y_hat(z, -h, u, len).unwrap()) / (2.0 * h);
            let d = dx_y_hat_at_zero(z, u, len).unwrap();
            assert!((fd - d).norm() <= 1e-8 * d.norm().max(1.0), "{z} {fd} {d}");
        }
    }

    #[test]
    fn paley_wiener_bounds() {
        let t = 2.0;
        let n = 401;
        let dt = t / (n - 1) as f64;
        let ind = vec![1.0; n];
        let r = paley_wiener_check(&ind, dt, t, 30.0, 301, None);
        assert!(r.passes, "{r:?}");
        // indicator of [0, T]: |û(0)| = T/√(2π)
        assert!((r.fitted_c - t / (2.0 * PI).sqrt()).abs() < 1e-9);
        let zero = paley_wiener_check(&vec![0.0; n], dt, t, 30.0, 31, Some(6.0));
        assert!(zero.passes && zero.fitted_c == 0.0);
    }
}
