//! Closed-form ∫B against quadrature, and the residual slopes of its large-z expansion.
use kdv_critical::kernel::{dyadic_grid, expected_slopes, int_b_closed, int_b_quadrature, verify_expansion};
use kdv_critical::number_theory::CriticalPair;

fn main() -> kdv_critical::Result<()> {
    for (k, l) in [(2, 1), (4, 1), (3, 2)] {
        let p = CriticalPair::new(k, l)?;
        for z in [3.0, 100.0, 1e4] {
            let a = int_b_closed(&p, z)?;
            let b = int_b_quadrature(&p, z, 1e-12)?;
            println!("({k},{l}) z = {z:>7}  ∫B = {a:.6e}  |closed - quadrature|/|∫B| = {:.1e}", (a - b).norm() / b.norm());
        }
        let r = verify_expansion(&p, &dyadic_grid(1e3, 10))?;
        let want = expected_slopes(&p);
        println!("({k},{l}) slopes {:.3} {:.3} {:.3}  expected {:.3} {:.3} ≤{:.3}", r.slopes[0], r.slopes[1], r.slopes[2], want.0, want.1, want.2);
    }
    Ok(())
}
