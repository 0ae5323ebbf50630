//! Derivatives of `H = det Q / Ξ` off the real axis, through the roots.

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::scaled::Scaled;
use crate::spectral::{frame, roots, vandermonde};
use num_complex::Complex64 as C;

const I: C = C { re: 0.0, im: 1.0 };

/// Below this `|3λ² + 1|` the implicit derivative of a root is treated as singular.
pub const ROOT_DERIVATIVE_MIN: f64 = 1e-8;

/// Taylor jets of the three roots of `λ³ + λ + iw = 0` about `w`.
pub fn root_jets(w: C) -> Result<[Jet; 3]> {
    let l0 = roots(w);
    let mut out = [Jet::constant(C::new(0.0, 0.0)); 3];
    for (j, &l) in l0.iter().enumerate() {
        let d = 3.0 * l * l + 1.0;
        if d.norm() < ROOT_DERIVATIVE_MIN {
            return Err(Error::RootDerivativeSingular { z: w, value: d.norm() });
        }
        let wj = Jet::variable(w).scale(I);
        let mut lam = Jet::constant(l);
        // each sweep fixes one more Taylor coefficient
        for _ in 0..crate::jet::ORDER {
            let r = lam * lam * lam + lam + wj;
            lam = lam - r.scale(C::new(1.0, 0.0) / d);
        }
        out[j] = lam;
    }
    Ok(out)
}

/// Jet of H about `w`, returned as `(jet, shift)` with `H = jet * e^{shift}`.
pub fn h_jet(w: C, len: f64) -> Result<(Jet, f64)> {
    let lam = root_jets(w)?;
    let shift = (0..3).map(|j| (-lam[j].value() * len).re).fold(f64::NEG_INFINITY, f64::max);
    let mut det_q = Jet::constant(C::new(0.0, 0.0));
    for j in 0..3 {
        let e = lam[(j + 2) % 3].scale(C::new(-len, 0.0));
        let ex = e.exp_reduced().scale((e.value() - shift).exp());
        det_q = det_q + (lam[(j + 1) % 3] - lam[j]) * ex;
    }
    let xi = (lam[1] - lam[0]) * (lam[2] - lam[1]) * (lam[2] - lam[0]);
    if xi.value().norm() < 1e-12 {
        return Err(Error::RootDerivativeSingular { z: w, value: xi.value().norm() });
    }
    Ok((det_q / xi, shift))
}

/// `H^{(d)}(z + iγ)`, d ≤ 3.
pub fn h_derivative_on_line(len: f64, gamma: f64, z: f64, d: usize) -> Result<Scaled> {
    if d > 3 {
        return Err(Error::Domain(format!("derivative order {d} > 3")));
    }
    let (j, s) = h_jet(C::new(z, gamma), len)?;
    Ok(Scaled::new(j.derivative(d), s))
}

/// Cauchy-integral derivative from values of H on a circle of radius `r` about `w`.
pub fn h_derivative_cauchy(len: f64, w: C, d: usize, r: f64, n: usize) -> Scaled {
    let vals: Vec<(Scaled, C)> = (0..n)
        .map(|k| {
            let th = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            let e = C::from_polar(1.0, th);
            (frame(w + e * r, len).h, C::from_polar(1.0, -(d as f64) * th))
        })
        .collect();
    let shift = vals.iter().map(|(h, _)| h.s).fold(f64::NEG_INFINITY, f64::max);
    let mut acc = C::new(0.0, 0.0);
    for (h, rot) in &vals {
        acc += h.to_c_shifted(shift) * rot;
    }
    let fact: f64 = (1..=d).map(|k| k as f64).product();
    Scaled::new(acc * fact / (n as f64 * r.powi(d as i32)), shift)
}

/// Vandermonde determinant of the roots at `w`; zero where two roots meet.
pub fn root_gap(w: C) -> f64 {
    vandermonde(&roots(w)).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::number_theory::CriticalPair;
    use crate::spectral::mu;

    fn rel1(s: Scaled) -> f64 {
        (s.to_c() - 1.0).norm()
    }

    #[test]
    fn value_matches_frame() {
        for (z, g) in [(0.3, 1.0), (-4.0, 0.5), (250.0, 2.0), (-3e4, 1.5)] {
            let w = C::new(z, g);
            let (j, s) = h_jet(w, 9.6).unwrap();
            let want = frame(w, 9.6).h;
            let got = Scaled::new(j.value(), s);
            assert!(rel1(got / want) < 1e-11, "{z} {g}");
        }
    }

    #[test]
    fn agrees_with_cauchy_integrals() {
        // deterministic pseudo-random sample points over several decades
        let pair = CriticalPair::new(2, 1).unwrap();
        let len = pair.length;
        let mut seed = 0x9e3779b97f4a7c15u64;
        let mut worst: f64 = 0.0;
        for _ in 0..50 {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let u = (seed >> 11) as f64 / (1u64 << 53) as f64;
            let z = (if seed & 1 == 0 { 1.0 } else { -1.0 }) * 10f64.powf(-1.0 + 5.0 * u);
            let gamma = [0.5, 1.0, 1.5, 2.0][(seed >> 3) as usize % 4];
            let w = C::new(z, gamma);
            let r = (3.0 * z.abs().powf(2.0 / 3.0) / len).max(0.25);
            for d in [1, 3] {
                let a = h_derivative_on_line(len, gamma, z, d).unwrap();
                let b = h_derivative_cauchy(len, w, d, r, 64);
                let rel = rel1(a / b);
                worst = worst.max(rel);
            }
        }
        assert!(worst < 1e-10, "{worst}");
    }

    #[test]
    fn first_derivative_ratio_decays_like_z_to_minus_two_thirds() {
        let len = CriticalPair::new(2, 1).unwrap().length;
        let zs: Vec<f64> = (0..12).map(|k| 1e3 * 2f64.powi(k)).collect();
        let ratios: Vec<f64> = zs
            .iter()
            .map(|&z| {
                let h1 = h_derivative_on_line(len, 0.0, z, 1).unwrap();
                let h0 = h_derivative_on_line(len, 0.0, z, 0).unwrap();
                (h1 / h0).abs()
            })
            .collect();
        let (slope, _) = crate::fit::loglog_slope(&zs, &ratios);
        assert!((slope + 2.0 / 3.0).abs() < 0.05, "{slope}");
        // leading coefficient |μ| L / 3
        let last = ratios[ratios.len() - 1] * zs[zs.len() - 1].powf(2.0 / 3.0);
        assert!((last / (mu()[2].norm() * len / 3.0) - 1.0).abs() < 0.05, "{last}");
    }

    #[test]
    fn conjugate_symmetry_across_the_axis() {
        // H(-conj w) = conj H(w), so H^{(d)}(-z + iγ) = (-1)^d conj H^{(d)}(z + iγ)
        let len = 7.0;
        for (z, g) in [(1.3, 0.5), (40.0, 1.0), (-900.0, 2.0)] {
            for d in [1, 3] {
                let a = h_derivative_on_line(len, g, z, d).unwrap();
                let b = h_derivative_on_line(len, g, -z, d).unwrap();
                let sign = if d % 2 == 1 { -1.0 } else { 1.0 };
                let rel = rel1(a.conj().scale(C::new(sign, 0.0)) / b);
                assert!(rel < 1e-11, "{z} {g} {d} {rel}");
            }
        }
    }

    #[test]
    fn collision_is_singular() {
        let zc = 2.0 / (3.0 * 3f64.sqrt());
        let e = h_derivative_on_line(5.0, 0.0, zc, 1).unwrap_err();
        assert!(matches!(e, Error::RootDerivativeSingular { .. }));
    }
}
