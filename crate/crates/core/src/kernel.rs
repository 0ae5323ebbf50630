//! The kernel `B(z, x)` and its x-integral, with large-z expansion checks.

use crate::error::{Error, Result};
use crate::fit::loglog_slope;
use crate::number_theory::CriticalPair;
use crate::quad;
use crate::scaled::{phi1, ExpSum, Scaled};
use crate::spectral::{det_q_sum, roots};
use crate::unreachable::{constants, eta_triple, UnreachableData};
use num_complex::Complex64 as C;
use serde::Serialize;

/// Denominators whose cancellation ratio falls below this are treated as poles.
pub const POLE_REL: f64 = 1e-10;

/// A closed-form sum cancelling below this ratio is zero to round-off.
pub const ZERO_CANCELLATION: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct KernelSample {
    pub z: f64,
    #[serde(serialize_with = "crate::unreachable::ser_c")]
    pub int_b: C,
    pub scaled_flag: bool,
    pub k: i64,
    pub l: i64,
}

/// Roots entering the two factors of B at real `z`.
fn factor_roots(z: f64, p: f64) -> ([C; 3], [C; 3]) {
    let lam = roots(C::new(z, 0.0));
    let lt = roots(C::new(z - p, 0.0)).map(|v| v.conj());
    (lam, lt)
}

fn checked_den(l: &[C; 3], len: f64, z: f64) -> Result<Scaled> {
    let d = det_q_sum(l, len);
    let rel = d.relative_magnitude();
    if rel < POLE_REL {
        return Err(Error::NearPole { z, rel });
    }
    Ok(d.eval())
}

/// `Σ_j (e^{λ_{j+1}L} - e^{λ_j L}) e^{λ_{j+2} x}` as exponent pairs per x-exponent.
fn numerator_terms(l: &[C; 3], len: f64) -> [(C, [C; 2]); 3] {
    [0, 1, 2].map(|j| (l[(j + 2) % 3], [l[(j + 1) % 3] * len, l[j] * len]))
}

/// `(η_{j+1} - η_j) η_{j+2}` against `η_{j+2}`: the coefficients of `φ_x`.
fn phi_x_terms(eta: &[C; 3]) -> [(C, C); 3] {
    [0, 1, 2].map(|j| (eta[(j + 2) % 3], (eta[(j + 1) % 3] - eta[j]) * eta[(j + 2) % 3]))
}

/// `B(z, x)` for an arbitrary triple `η` and frequency `p`.
pub fn b_eval_general(eta: &[C; 3], p: f64, len: f64, z: f64, x: f64) -> Result<C> {
    let (lam, lt) = factor_roots(z, p);
    let d1 = checked_den(&lam, len, z)?;
    let d2 = checked_den(&lt, len, z)?;
    let factor = |l: &[C; 3]| {
        let mut s = ExpSum::with_capacity(6);
        for (e, [w1, w2]) in numerator_terms(l, len) {
            s.push(w1 + e * x, C::new(1.0, 0.0));
            s.push(w2 + e * x, C::new(-1.0, 0.0));
        }
        s.eval()
    };
    let phi_x: C = phi_x_terms(eta).iter().map(|(e, c)| c * (e * x).exp()).sum();
    Ok((factor(&lam) / d1 * (factor(&lt) / d2)).scale(phi_x).to_c())
}

pub fn b_eval(pair: &CriticalPair, z: f64, x: f64) -> Result<C> {
    if !(0.0..=pair.length).contains(&x) {
        return Err(Error::Domain(format!("x = {x} outside [0, {}]", pair.length)));
    }
    let t = eta_triple(pair)?;
    b_eval_general(&t.eta, t.p, t.length, z, x)
}

/// Closed-form `∫₀ᴸ B(z, x) dx` for an arbitrary triple.
///
/// Each product of exponentials `s e^{W} e^{a x}` integrates to `s e^{W} L φ₁(aL)`
/// when `|aL| ≤ 1` and to `s (e^{W + aL} - e^{W}) / a` otherwise.
pub fn int_b_general(eta: &[C; 3], p: f64, len: f64, z: f64) -> Result<C> {
    int_b_with_cancellation(eta, p, len, z).map(|r| r.0)
}

/// Closed form together with `|sum| / max|term|` of the x-integrated exponential sum.
pub fn int_b_with_cancellation(eta: &[C; 3], p: f64, len: f64, z: f64) -> Result<(C, f64)> {
    let (lam, lt) = factor_roots(z, p);
    let d1 = checked_den(&lam, len, z)?;
    let d2 = checked_den(&lt, len, z)?;
    let s = int_b_numerator(eta, len, &lam, &lt);
    let ratio = s.relative_magnitude();
    Ok(((s.eval() / (d1 * d2)).to_c(), ratio))
}

/// `∫₀ᴸ B dx · det Q(λ) · det Q(λ̃)` for roots `λ` at z and `λ̃ = conj(roots(z - p))`.
pub fn int_b_numerator(eta: &[C; 3], len: f64, lam: &[C; 3], lt: &[C; 3]) -> ExpSum {
    let n1 = numerator_terms(lam, len);
    let n2 = numerator_terms(lt, len);
    let dk = phi_x_terms(eta);
    let mut s = ExpSum::with_capacity(27 * 8);
    for (ea, wa) in n1 {
        for (eb, wb) in n2 {
            for (ek, ck) in dk {
                let a = ea + eb + ek;
                let al = a * len;
                for (ia, w1) in wa.iter().enumerate() {
                    for (ib, w2) in wb.iter().enumerate() {
                        let sign = if ia == ib { 1.0 } else { -1.0 };
                        let w = w1 + w2;
                        if al.norm() <= 1.0 {
                            s.push(w, ck * sign * len * phi1(al));
                        } else {
                            s.push(w + al, ck * sign / a);
                            s.push(w, -ck * sign / a);
                        }
                    }
                }
            }
        }
    }
    s
}

/// Roots at z and the conjugated roots at `z - p`, in the order used by the kernel.
pub fn kernel_roots(z: f64, p: f64) -> ([C; 3], [C; 3]) {
    factor_roots(z, p)
}

pub fn int_b_closed(pair: &CriticalPair, z: f64) -> Result<C> {
    let t = eta_triple(pair)?;
    int_b_general(&t.eta, t.p, t.length, z)
}

pub fn sample(pair: &CriticalPair, z: f64) -> Result<KernelSample> {
    Ok(KernelSample { z, int_b: int_b_closed(pair, z)?, scaled_flag: true, k: pair.k, l: pair.l })
}

/// Adaptive Gauss–Kronrod integration of `B_eval` in x; used as an oracle.
pub fn int_b_quadrature(pair: &CriticalPair, z: f64, rel_tol: f64) -> Result<C> {
    let t = eta_triple(pair)?;
    let len = t.length;
    b_eval_general(&t.eta, t.p, len, z, 0.0)?;
    // split so that every piece holds a few oscillations of frequency ~ z^{1/3}
    let pieces = ((z.abs().cbrt() * len / 2.0).ceil() as usize).max(4);
    let edges: Vec<f64> = (0..=pieces).map(|i| len * i as f64 / pieces as f64).collect();
    let r = quad::integrate_pieces(
        |x| b_eval_general(&t.eta, t.p, len, z, x).unwrap_or(C::new(f64::NAN, 0.0)),
        &edges,
        0.0,
        rel_tol,
        2000,
    );
    if !r.value.is_finite() {
        return Err(Error::InvariantViolation(format!("quadrature of B at z = {z} hit a pole")));
    }
    Ok(r.value)
}

/// Residual decay exponent: -4/3 when E ≠ 0, -2 otherwise.
pub fn leading_exponent(pair: &CriticalPair) -> f64 {
    if pair.case_e0 {
        -2.0
    } else {
        -4.0 / 3.0
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AsymptoticReport {
    pub k: i64,
    pub l: i64,
    pub case_e0: bool,
    pub z_grid: Vec<f64>,
    pub excluded: Vec<f64>,
    /// Moduli of `intB` minus 0, 1 and 2 leading terms.
    pub residuals: [Vec<f64>; 3],
    /// Fitted log-log slopes per subtraction level.
    pub slopes: [f64; 3],
    /// Upper end of the window used for the third slope.
    pub third_level_zmax: f64,
    /// Every sample cancelled to round-off (k = l); slopes are then -∞.
    pub identically_zero: bool,
    pub constants: UnreachableData,
}

/// `z = z0 · 2^j`, j = 0..points.
pub fn dyadic_grid(z0: f64, points: usize) -> Vec<f64> {
    (0..points).map(|j| z0 * 2f64.powi(j as i32)).collect()
}

pub fn verify_expansion(pair: &CriticalPair, z_grid: &[f64]) -> Result<AsymptoticReport> {
    if z_grid.len() < 8 || z_grid.iter().any(|&z| !(1e3..=1e6).contains(&z)) {
        return Err(Error::Domain("expansion grid must hold ≥ 8 points in [1e3, 1e6]".into()));
    }
    let c = constants(pair)?;
    let (lead, next, e_lead, e_next) = if pair.case_e0 {
        (c.f, c.f1, -2.0, -8.0 / 3.0)
    } else {
        (c.e, c.e1, -4.0 / 3.0, -2.0)
    };
    let mut zs = Vec::new();
    let mut excluded = Vec::new();
    let mut res: [Vec<f64>; 3] = Default::default();
    let t = eta_triple(pair)?;
    let mut max_ratio: f64 = 0.0;
    for &z in z_grid {
        match int_b_with_cancellation(&t.eta, t.p, t.length, z) {
            Ok((v, ratio)) => {
                max_ratio = max_ratio.max(ratio);
                let r1 = v - lead * z.powf(e_lead);
                let r2 = r1 - next * z.powf(e_next);
                zs.push(z);
                res[0].push(v.norm());
                res[1].push(r1.norm());
                res[2].push(r2.norm());
            }
            Err(Error::NearPole { .. }) => excluded.push(z),
            Err(e) => return Err(e),
        }
    }
    let third_max = 1e5;
    let identically_zero = !zs.is_empty() && max_ratio < ZERO_CANCELLATION;
    let mut slopes = [f64::NEG_INFINITY; 3];
    for (lvl, r) in res.iter().enumerate() {
        let (x, y): (Vec<f64>, Vec<f64>) = zs
            .iter()
            .zip(r)
            .filter(|(z, _)| lvl < 2 || **z <= third_max * (1.0 + 1e-12))
            .map(|(z, v)| (*z, *v))
            .unzip();
        if identically_zero {
            break;
        }
        if x.len() < 3 {
            return Err(Error::Domain("too few usable grid points for a slope".into()));
        }
        slopes[lvl] = loglog_slope(&x, &y).0;
    }
    Ok(AsymptoticReport {
        k: pair.k,
        l: pair.l,
        case_e0: pair.case_e0,
        z_grid: zs,
        excluded,
        residuals: res,
        slopes,
        third_level_zmax: third_max,
        identically_zero,
        constants: c,
    })
}

/// Expected slopes `(level 0, level 1, level-2 upper bound)`.
pub fn expected_slopes(pair: &CriticalPair) -> (f64, f64, f64) {
    if pair.case_e0 {
        (-2.0, -8.0 / 3.0, -3.0)
    } else {
        (-4.0 / 3.0, -2.0, -7.0 / 3.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::number_theory::enumerate_pairs;
    use proptest::prelude::*;

    fn pair(k: i64, l: i64) -> CriticalPair {
        CriticalPair::new(k, l).unwrap()
    }

    #[test]
    fn closed_form_matches_quadrature() {
        let c = pair(2, 1);
        let a = int_b_closed(&c, 1e3).unwrap();
        let b = int_b_quadrature(&c, 1e3, 1e-12).unwrap();
        assert!((a - b).norm() <= 1e-9 * b.norm(), "{a} {b}");
        let mut checked = 0;
        for (i, pr) in [(2, 1), (4, 1), (7, 1), (3, 2), (5, 2)].iter().enumerate() {
            let c = pair(pr.0, pr.1);
            for j in 0..4 {
                let z = 10f64.powf(1.0 + 3.0 * ((i * 4 + j) as f64 * 0.618_033_988_7).fract());
                let (Ok(a), Ok(b)) = (int_b_closed(&c, z), int_b_quadrature(&c, z, 1e-12)) else { continue };
                assert!((a - b).norm() <= 1e-9 * b.norm(), "{pr:?} z={z} {a} {b}");
                checked += 1;
            }
        }
        assert!(checked >= 18);
    }

    #[test]
    fn small_and_negative_z() {
        for pr in [(2, 1), (4, 1), (3, 2)] {
            let c = pair(pr.0, pr.1);
            for z in [0.3, 1.0, 37.0, -5.0, -1e3] {
                let a = int_b_closed(&c, z).unwrap();
                let b = int_b_quadrature(&c, z, 1e-12).unwrap();
                assert!((a - b).norm() <= 1e-9 * b.norm().max(1e-14), "{pr:?} {z} {a} {b}");
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn conjugation_symmetry(idx in 0usize..21, lz in 0.0f64..6.0) {
            let c = enumerate_pairs(6)[idx];
            let z = 10f64.powf(lz);
            let t = eta_triple(&c).unwrap();
            let neg = t.eta.map(|e| -e);
            let (Ok(a), Ok(b)) = (int_b_general(&t.eta, t.p, t.length, -z), int_b_general(&neg, -t.p, t.length, z)) else {
                return Ok(());
            };
            prop_assert!((a - b.conj()).norm() <= 1e-12 * a.norm().max(1e-300), "{} {}", a, b);
            let x = 0.37 * t.length;
            let ba = b_eval_general(&t.eta, t.p, t.length, -z, x).unwrap();
            let bb = b_eval_general(&neg, -t.p, t.length, z, x).unwrap();
            prop_assert!((ba - bb.conj()).norm() <= 1e-12 * ba.norm().max(1e-300));
        }
    }

    #[test]
    fn expansion_slopes_examples() {
        let grid = dyadic_grid(1e3, 10);
        let r = verify_expansion(&pair(2, 1), &grid).unwrap();
        assert!((r.slopes[0] + 4.0 / 3.0).abs() < 0.05, "{:?}", r.slopes);
        assert!((r.slopes[1] + 2.0).abs() < 0.05, "{:?}", r.slopes);
        assert!(r.slopes[2] <= -7.0 / 3.0 + 0.1, "{:?}", r.slopes);
        let r = verify_expansion(&pair(4, 1), &grid).unwrap();
        assert!((r.slopes[0] + 2.0).abs() < 0.05, "{:?}", r.slopes);
        assert!((r.slopes[1] + 8.0 / 3.0).abs() < 0.07, "{:?}", r.slopes);
        assert!(r.slopes[2] <= -3.0 + 0.1, "{:?}", r.slopes);
        let r = verify_expansion(&pair(1, 1), &grid).unwrap();
        assert!(r.identically_zero && r.constants.f.norm() < 1e-15);
        assert!(r.slopes[0] <= -7.0 / 3.0 + 0.1, "{:?}", r.slopes);
    }

    #[test]
    fn expansion_slopes_all_small_pairs() {
        let grid = dyadic_grid(1e3, 10);
        for c in enumerate_pairs(6) {
            let r = verify_expansion(&c, &grid).unwrap();
            let (s0, s1, s2) = expected_slopes(&c);
            let tag = format!("({},{}) {:?}", c.k, c.l, r.slopes);
            if c.p == 0.0 {
                assert!(r.identically_zero, "{tag}");
                assert!(r.slopes[0] <= -7.0 / 3.0 + 0.1, "{tag}");
                continue;
            }
            assert!((r.slopes[0] - s0).abs() < 0.05, "{tag}");
            assert!((r.slopes[1] - s1).abs() < 0.07, "{tag}");
            if r.slopes[2] <= s2 + 0.1 {
                continue;
            }
            assert!(c.p * c.length > 6.0, "{tag}");
            // large pL: the third level is still pre-asymptotic below 1e5, so check
            // that residual·z^{-s2} stays bounded and its increments shrink
            let scaled: Vec<f64> = r
                .z_grid
                .iter()
                .zip(&r.residuals[2])
                .filter(|(z, _)| **z >= 8e3 && **z <= 1e5 * (1.0 + 1e-12))
                .map(|(z, v)| v * z.powf(-s2))
                .collect();
            let (lo, hi) = scaled.iter().fold((f64::MAX, 0.0f64), |(a, b), v| (a.min(*v), b.max(*v)));
            assert!(hi / lo < 2.0, "{tag} {scaled:?}");
            let inc: Vec<f64> = scaled.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
            assert!(inc.windows(2).all(|w| w[1] < w[0]), "{tag} {scaled:?}");
        }
    }

    #[test]
    fn decay_envelope_per_case() {
        let zs = dyadic_grid(10.0, 17);
        for (pr, exp) in [((4, 1), -2.0), ((2, 1), -4.0 / 3.0)] {
            let c = pair(pr.0, pr.1);
            assert_eq!(leading_exponent(&c), exp);
            let env: Vec<f64> = zs
                .iter()
                .filter_map(|&z| int_b_closed(&c, z).ok().map(|v| v.norm() * (1.0 + z).powf(-exp)))
                .collect();
            let max = env.iter().cloned().fold(0.0, f64::max);
            let tail = env[env.len() - 4..].iter().cloned().fold(0.0, f64::max);
            assert!(tail <= max && tail > 0.0);
            assert!(env.iter().all(|v| v.is_finite()));
        }
    }

    #[test]
    fn vanishes_for_equal_indices() {
        // k = l: the second factor is the conjugate of the first and φ_x is imaginary
        for pr in [(1, 1), (2, 2), (5, 5)] {
            let c = pair(pr.0, pr.1);
            let t = eta_triple(&c).unwrap();
            for z in [0.3, 37.0, 1e3, -40.0] {
                let (v, ratio) = int_b_with_cancellation(&t.eta, t.p, t.length, z).unwrap();
                assert!(ratio < ZERO_CANCELLATION, "{pr:?} {z} {v} {ratio}");
                let scale = quad::integrate(|x| C::new(b_eval(&c, z, x).unwrap().norm(), 0.0), 0.0, c.length, 0.0, 1e-8, 500).value.re;
                assert!(v.norm() <= 1e-12 * scale);
            }
        }
        for pr in [(2, 1), (4, 1)] {
            let r = verify_expansion(&pair(pr.0, pr.1), &dyadic_grid(1e3, 10)).unwrap();
            assert!(!r.identically_zero);
        }
    }

    #[test]
    fn domain_errors() {
        let c = pair(2, 1);
        assert!(matches!(b_eval(&c, 10.0, -0.1), Err(Error::Domain(_))));
        assert!(verify_expansion(&c, &[1e3; 4]).is_err());
    }
}
