//! Unreachable directions: the triple η_j, the profile φ, the solution Ψ and
//! the constants entering the small-time expansions of ∫B.

use crate::error::{Error, Result};
use crate::number_theory::{CriticalPair, LengthClass};
use nalgebra::DMatrix;
use num_complex::Complex64 as C;
use serde::Serialize;
use std::f64::consts::PI;

const I: C = C { re: 0.0, im: 1.0 };

#[derive(Clone, Copy, Debug)]
pub struct EtaTriple {
    pub pair: CriticalPair,
    pub eta: [C; 3],
    pub p: f64,
    pub length: f64,
}

pub fn eta_triple(pair: &CriticalPair) -> Result<EtaTriple> {
    let len = pair.length;
    let e1 = -2.0 * PI * I * (2 * pair.k + pair.l) as f64 / (3.0 * len);
    let e2 = e1 + 2.0 * PI * I * pair.k as f64 / len;
    let e3 = e2 + 2.0 * PI * I * pair.l as f64 / len;
    let t = EtaTriple { pair: *pair, eta: [e1, e2, e3], p: pair.p, length: len };
    for e in t.eta {
        let r = (e * e * e + e - I * pair.p).norm();
        if r > 1e-10 {
            return Err(Error::InvariantViolation(format!(
                "η = {e} misses η³ + η - ip = 0 by {r:e} for ({},{})",
                pair.k, pair.l
            )));
        }
    }
    Ok(t)
}

impl EtaTriple {
    /// `(η_{j+1} - η_j)` as the coefficient of `e^{η_{j+2} x}`, indexed by the exponent.
    pub fn coefficients(&self) -> [(C, C); 3] {
        let e = self.eta;
        [0, 1, 2].map(|j| (e[(j + 2) % 3], e[(j + 1) % 3] - e[j]))
    }

    /// `Σ (η_{j+1} - η_j) η_{j+2}^n`.
    pub fn moment(&self, n: i32) -> C {
        self.coefficients().iter().map(|(e, c)| c * e.powi(n)).sum()
    }

    /// n-th x-derivative of φ.
    pub fn phi_deriv(&self, x: f64, n: i32) -> C {
        self.coefficients().iter().map(|(e, c)| c * e.powi(n) * (e * x).exp()).sum()
    }

    pub fn phi(&self, x: f64) -> C {
        self.phi_deriv(x, 0)
    }

    pub fn psi(&self, t: f64, x: f64) -> C {
        (-I * t * self.p).exp() * self.phi(x)
    }

    /// `Ψ_t + Ψ_x + Ψ_xxx` by exact differentiation of the exponentials.
    pub fn psi_residual(&self, t: f64, x: f64) -> C {
        let e = (-I * t * self.p).exp();
        -I * self.p * e * self.phi(x) + e * (self.phi_deriv(x, 1) + self.phi_deriv(x, 3))
    }

    /// `exp(η₁ L)`.
    pub fn boundary_phase(&self) -> C {
        (self.eta[0] * self.length).exp()
    }

    /// Exact `∫₀ᴸ φ(x)^2 dx`.
    pub fn phi_squared_integral(&self) -> C {
        let cs = self.coefficients();
        let mut acc = C::new(0.0, 0.0);
        for (ea, ca) in cs {
            for (eb, cb) in cs {
                let a = ea + eb;
                acc += ca * cb * self.length * crate::scaled::phi1(a * self.length);
            }
        }
        acc
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct UnreachableData {
    #[serde(skip)]
    pub eta: [C; 3],
    #[serde(serialize_with = "ser_c")]
    pub gamma: C,
    #[serde(serialize_with = "ser_c")]
    pub lambda: C,
    #[serde(serialize_with = "ser_c")]
    pub e: C,
    #[serde(serialize_with = "ser_c")]
    pub e1: C,
    #[serde(serialize_with = "ser_c")]
    pub f: C,
    #[serde(serialize_with = "ser_c")]
    pub f1: C,
    pub case_e0: bool,
}

pub fn ser_c<S: serde::Serializer>(c: &C, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeStruct;
    let mut st = s.serialize_struct("complex", 2)?;
    st.serialize_field("re", &c.re)?;
    st.serialize_field("im", &c.im)?;
    st.end()
}

/// `-(8π³/L³) i kl(k+l)`.
pub fn gamma_closed(pair: &CriticalPair) -> C {
    -I * 8.0 * PI.powi(3) / pair.length.powi(3) * (pair.k * pair.l * (pair.k + pair.l)) as f64
}

/// `Λ = ip Σ (η_{j+1}-η_j)/η_{j+2}`. When some η vanishes (k = l, p = 0) the
/// quotient is evaluated through `ip/η = η² + 1`.
pub fn lambda_constant(t: &EtaTriple) -> C {
    if t.eta.iter().all(|e| e.norm() > 1e-12) {
        t.coefficients().iter().map(|(e, c)| c / e).sum::<C>() * (I * t.p)
    } else {
        t.coefficients().iter().map(|(e, c)| c * (e * e + 1.0)).sum()
    }
}

/// E, E₁, F, F₁ from Γ, Λ, p, L and `exp(η₁L)`.
fn expansion_constants(gamma: C, lambda: C, p: f64, len: f64, phase: C) -> (C, C, C, C) {
    let ipl = I * p * len;
    let a = -gamma * (2.0 / 3.0) - lambda / 3.0;
    let e = (phase - 1.0) * a / 3.0;
    let f = (lambda - gamma) * (phase - 1.0) * (2.0 / 27.0) + ipl * phase * a / 9.0;
    let e1 = -(ipl + 1.0) * e / 3.0 + f;
    let denom = gamma * 2.0 + lambda;
    let corr = if denom.norm() > 0.0 { (gamma - lambda) * 2.0 / (denom * 3.0) } else { C::new(0.0, 0.0) };
    // the imaginary part -pL/6 is fixed by the large-z expansion of ∫B
    let f1 = f * (C::new(-2.0 / 3.0, 0.0) - ipl / 6.0 + corr);
    (e, e1, f, f1)
}

pub fn constants(pair: &CriticalPair) -> Result<UnreachableData> {
    let t = eta_triple(pair)?;
    let gamma = t.moment(2);
    let lambda = lambda_constant(&t);
    let gc = gamma_closed(pair);
    let scale = gc.norm().max(1e-300);
    if (gamma - lambda).norm() > 1e-10 * scale || (gamma - gc).norm() > 1e-10 * scale {
        return Err(Error::InvariantViolation(format!(
            "Γ = {gamma}, Λ = {lambda}, closed form {gc} for ({},{})",
            pair.k, pair.l
        )));
    }
    let (e, e1, f, f1) = expansion_constants(gamma, lambda, t.p, t.length, t.boundary_phase());
    let small = e.norm() < 1e-12;
    if small != pair.case_e0 {
        return Err(Error::InvariantViolation(format!(
            "|E| = {:e} but case flag {} for ({},{})",
            e.norm(),
            pair.case_e0,
            pair.k,
            pair.l
        )));
    }
    Ok(UnreachableData { eta: t.eta, gamma, lambda, e, e1, f, f1, case_e0: pair.case_e0 })
}

/// The same constants with Γ = Λ replaced by the closed form and `exp(η₁L)`
/// by `exp(-2πi(2k+l)/3)`.
pub fn constants_closed(pair: &CriticalPair) -> UnreachableData {
    let g = gamma_closed(pair);
    let phase = C::from_polar(1.0, -2.0 * PI * ((2 * pair.k + pair.l) % 3) as f64 / 3.0);
    let (e, e1, f, f1) = expansion_constants(g, g, pair.p, pair.length, phase);
    let e = if pair.case_e0 { C::new(0.0, 0.0) } else { e };
    let e1 = if pair.case_e0 { f } else { e1 };
    UnreachableData { eta: [C::new(0.0, 0.0); 3], gamma: g, lambda: g, e, e1, f, f1, case_e0: pair.case_e0 }
}

/// `-1/3 ± (√3/18) pL - (i/6) pL`, with `+` when `exp(η₁L) = exp(2πi/3)`.
pub fn e1_over_e_closed(pair: &CriticalPair) -> Result<C> {
    let r = (2 * pair.k + pair.l) % 3;
    if r == 0 {
        return Err(Error::Case { k: pair.k, l: pair.l });
    }
    let sign = if r == 2 { 1.0 } else { -1.0 };
    let pl = pair.p * pair.length;
    Ok(C::new(-1.0 / 3.0 + sign * 3f64.sqrt() / 18.0 * pl, -pl / 6.0))
}

pub fn e1_over_e(pair: &CriticalPair) -> Result<C> {
    if pair.case_e0 {
        return Err(Error::Case { k: pair.k, l: pair.l });
    }
    let d = constants(pair)?;
    let r = d.e1 / d.e;
    let closed = e1_over_e_closed(pair)?;
    if (r - closed).norm() > 1e-10 * closed.norm().max(1.0) {
        return Err(Error::InvariantViolation(format!("E₁/E = {r} but closed form gives {closed}")));
    }
    Ok(r)
}

#[derive(Clone, Debug)]
pub struct MnBasis {
    pub n_class: i64,
    pub length: f64,
    pub x: Vec<f64>,
    /// Sampled real basis functions.
    pub functions: Vec<Vec<f64>>,
    pub labels: Vec<String>,
    pub gram: DMatrix<f64>,
    pub rank: usize,
}

fn simpson(v: &[f64], h: f64) -> f64 {
    let n = v.len();
    let mut acc = v[0] + v[n - 1];
    for (i, x) in v.iter().enumerate().take(n - 1).skip(1) {
        acc += x * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

fn gram_matrix(f: &[Vec<f64>], h: f64, stride: usize) -> DMatrix<f64> {
    let m = f.len();
    DMatrix::from_fn(m, m, |i, j| {
        let prod: Vec<f64> = f[i].iter().zip(&f[j]).step_by(stride).map(|(a, b)| a * b).collect();
        simpson(&prod, h * stride as f64)
    })
}

/// Real basis {Re φ_m, Im φ_m} of M_N on `intervals + 1` uniform nodes.
pub fn mn_basis(class: &LengthClass, intervals: usize) -> Result<MnBasis> {
    if intervals % 4 != 0 {
        return Err(Error::Resolution(format!("interval count {intervals} must be a multiple of 4")));
    }
    let len = class.length;
    let h = len / intervals as f64;
    let triples: Vec<EtaTriple> = class.pairs.iter().map(eta_triple).collect::<Result<_>>()?;
    let max_eta = triples.iter().flat_map(|t| t.eta.iter().map(|e| e.norm())).fold(0.0, f64::max);
    let period = 2.0 * PI / max_eta;
    if h > period / 16.0 {
        return Err(Error::Resolution(format!("spacing {h} exceeds 1/16 of period {period}")));
    }
    let x: Vec<f64> = (0..=intervals).map(|i| i as f64 * h).collect();
    let mut functions = Vec::new();
    let mut labels = Vec::new();
    for t in &triples {
        let v: Vec<C> = x.iter().map(|&xi| t.phi(xi)).collect();
        let re: Vec<f64> = v.iter().map(|c| c.re).collect();
        let im: Vec<f64> = v.iter().map(|c| c.im).collect();
        let nr = re.iter().map(|a| a * a).sum::<f64>().sqrt();
        let ni = im.iter().map(|a| a * a).sum::<f64>().sqrt();
        let tag = format!("({},{})", t.pair.k, t.pair.l);
        if t.p > 0.0 {
            functions.push(re);
            labels.push(format!("Re φ{tag}"));
            functions.push(im);
            labels.push(format!("Im φ{tag}"));
        } else {
            // for p = 0 one of the two parts vanishes identically
            let (keep, drop, name) = if nr >= ni { (re, ni, "Re") } else { (im, nr, "Im") };
            if drop > 1e-12 * nr.max(ni) {
                return Err(Error::InvariantViolation(format!("p = 0 but both parts of φ{tag} are nonzero")));
            }
            functions.push(keep);
            labels.push(format!("{name} φ{tag}"));
        }
    }
    let gram = gram_matrix(&functions, h, 1);
    let coarse = gram_matrix(&functions, h, 2);
    let scale = gram.amax();
    if (&gram - &coarse).amax() > 1e-8 * scale {
        return Err(Error::Resolution(format!(
            "Gram entries move by {:e} under halving",
            (&gram - &coarse).amax() / scale
        )));
    }
    let sv = gram.clone().svd(false, false).singular_values;
    let rank = sv.iter().filter(|s| **s > 1e-10 * sv[0]).count();
    Ok(MnBasis { n_class: class.n, length: len, x, functions, labels, gram, rank })
}

impl MnBasis {
    /// Relative L² residual of the Gram projection of `f` onto the basis.
    pub fn projection_residual(&self, f: &[f64]) -> f64 {
        let h = self.length / (self.x.len() - 1) as f64;
        let m = self.functions.len();
        let b = nalgebra::DVector::from_fn(m, |i, _| {
            let prod: Vec<f64> = self.functions[i].iter().zip(f).map(|(a, b)| a * b).collect();
            simpson(&prod, h)
        });
        let c = self.gram.clone().svd(true, true).solve(&b, 1e-14).expect("svd solve");
        let r: Vec<f64> = f
            .iter()
            .enumerate()
            .map(|(k, v)| v - (0..m).map(|i| c[i] * self.functions[i][k]).sum::<f64>())
            .collect();
        let nr = simpson(&r.iter().map(|a| a * a).collect::<Vec<_>>(), h).max(0.0).sqrt();
        let nf = simpson(&f.iter().map(|a| a * a).collect::<Vec<_>>(), h).sqrt();
        nr / nf
    }
}
