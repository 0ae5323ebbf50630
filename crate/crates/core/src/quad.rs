//! Globally adaptive Gauss–Kronrod (7/15) quadrature for complex-valued
//! integrands of a real variable.

use num_complex::Complex64 as C;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Clone, Copy, Debug)]
pub struct QuadResult {
    pub value: C,
    pub error: f64,
    pub intervals: usize,
    pub converged: bool,
}

fn gk15<F: FnMut(f64) -> C>(f: &mut F, a: f64, b: f64) -> (C, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for (j, &x) in XGK.iter().enumerate().take(7) {
        let s = f(c - h * x) + f(c + h * x);
        k += s * WGK[j];
        if j % 2 == 1 {
            g += s * WG[j / 2];
        }
    }
    (k * h, ((k - g) * h).norm())
}

/// Single 15-point Kronrod rule on `[a, b]` with its Gauss-difference error estimate.
pub fn kronrod15<F: FnMut(f64) -> C>(mut f: F, a: f64, b: f64) -> (C, f64) {
    gk15(&mut f, a, b)
}

/// Integrate `f` over `[a, b]` until the error estimate is below
/// `max(abs_tol, rel_tol * |I|)` or `max_intervals` is reached.
pub fn integrate<F: FnMut(f64) -> C>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> QuadResult {
    let (v, e) = gk15(&mut f, a, b);
    let mut parts = vec![(a, b, v, e)];
    loop {
        let total: C = parts.iter().map(|p| p.2).sum();
        let err: f64 = parts.iter().map(|p| p.3).sum();
        let tol = abs_tol.max(rel_tol * total.norm());
        if err <= tol || parts.len() >= max_intervals {
            return QuadResult { value: total, error: err, intervals: parts.len(), converged: err <= tol };
        }
        let (i, _) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .unwrap();
        let (a0, b0, _, _) = parts.swap_remove(i);
        let m = 0.5 * (a0 + b0);
        let (v1, e1) = gk15(&mut f, a0, m);
        let (v2, e2) = gk15(&mut f, m, b0);
        parts.push((a0, m, v1, e1));
        parts.push((m, b0, v2, e2));
    }
}

/// Integrate over consecutive breakpoints, summing the pieces.
pub fn integrate_pieces<F: FnMut(f64) -> C>(
    mut f: F,
    breaks: &[f64],
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> QuadResult {
    let mut out = QuadResult { value: C::new(0.0, 0.0), error: 0.0, intervals: 0, converged: true };
    let n = (breaks.len() - 1).max(1) as f64;
    for w in breaks.windows(2) {
        let r = integrate(&mut f, w[0], w[1], abs_tol / n, rel_tol, max_intervals);
        out.value += r.value;
        out.error += r.error;
        out.intervals += r.intervals;
        out.converged &= r.converged;
    }
    out
}

/// Composite trapezoid rule on uniform samples.
pub fn trapezoid(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let inner: f64 = values[1..n - 1].iter().sum();
    h * (inner + 0.5 * (values[0] + values[n - 1]))
}

pub fn trapezoid_c(values: &[C], h: f64) -> C {
    let n = values.len();
    if n < 2 {
        return C::new(0.0, 0.0);
    }
    let inner: C = values[1..n - 1].iter().sum();
    (inner + (values[0] + values[n - 1]) * 0.5) * h
}

/// Composite Simpson rule; `values.len()` must be odd.
pub fn simpson_c(values: &[C], h: f64) -> C {
    let n = values.len();
    assert!(n >= 3 && n % 2 == 1, "simpson needs an odd number of samples");
    let mut acc = values[0] + values[n - 1];
    for (i, v) in values.iter().enumerate().take(n - 1).skip(1) {
        acc += v * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * (h / 3.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oscillatory_exponential() {
        let w = 37.0;
        let r = integrate(|x| C::new(0.0, w * x).exp(), 0.0, 2.0, 0.0, 1e-13, 500);
        let exact = (C::new(0.0, 2.0 * w).exp() - 1.0) / C::new(0.0, w);
        assert!((r.value - exact).norm() < 1e-13, "{:?}", r);
    }

    #[test]
    fn endpoint_flat_bump() {
        // ∫_{-1}^{1} exp(-1/(1-x^2)) dx
        let r = integrate(|x| C::new((-1.0 / (1.0 - x * x)).exp(), 0.0), -1.0, 1.0, 1e-15, 1e-14, 500);
        assert!((r.value.re - 0.443_993_816_168_079_4).abs() < 1e-13, "{}", r.value.re);
    }

    #[test]
    fn simpson_exact_for_cubics() {
        let h = 0.25;
        let v: Vec<C> = (0..9).map(|i| C::new((i as f64 * h).powi(3), 0.0)).collect();
        assert!((simpson_c(&v, h).re - 4.0_f64.powi(4) / 4.0 / 16.0).abs() < 1e-14);
    }
}
