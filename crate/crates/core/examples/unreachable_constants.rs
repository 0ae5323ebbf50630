//! Constants of the quadratic projection onto an unreachable direction.
use kdv_critical::number_theory::CriticalPair;
use kdv_critical::unreachable::{constants, e1_over_e_closed, gamma_closed};

fn main() -> kdv_critical::Result<()> {
    for (k, l) in [(1, 1), (2, 1), (3, 2), (4, 1), (9, 1)] {
        let p = CriticalPair::new(k, l)?;
        let d = constants(&p)?;
        println!("({k},{l})  L = {:.6}  p = {:.6}  3|2k+l: {}", p.length, p.p, p.case_e0);
        println!("   Γ = {:.10}   Λ = {:.10}   closed form {:.10}", d.gamma, d.lambda, gamma_closed(&p));
        println!("   E = {:.10}   E₁ = {:.10}", d.e, d.e1);
        println!("   F = {:.10}   F₁ = {:.10}", d.f, d.f1);
        if let Ok(r) = e1_over_e_closed(&p) {
            println!("   E₁/E = {:.12}  closed form {:.12}", d.e1 / d.e, r);
        }
    }
    Ok(())
}
