//! Roots of λ³ + λ + iz = 0 and the entire quotient H = det Q / Ξ along the real axis.
use kdv_critical::spectral::{frame, h_asymptotic};
use num_complex::Complex64 as C;
use std::f64::consts::PI;

fn main() {
    let len = 2.0 * PI * (7.0f64 / 3.0).sqrt();
    println!("L = {len:.6}");
    for z in [-50.0, -1.0, 0.0, 0.2, 1.0, 10.0, 1e3, 1e5] {
        let f = frame(C::new(z, 0.0), len);
        let h = f.h;
        let tail = if z.abs() >= 1e3 { format!("  H/H_asym = {:.6}", (h / h_asymptotic(z, len)).to_c()) } else { String::new() };
        println!(
            "z = {z:>8}  λ = {:.4} {:.4} {:.4}  ln|H| = {:>9.4}{}{tail}",
            f.lambda[0],
            f.lambda[1],
            f.lambda[2],
            h.ln_abs(),
            if f.divided_differences { "  (divided differences)" } else { "" }
        );
    }
}
