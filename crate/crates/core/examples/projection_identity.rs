//! Second-order expansion: the projection of y₂(T) onto φ against the quadratic interaction integral.
use kdv_critical::number_theory::CriticalPair;
use kdv_critical::pde::studies::{bump_control, projection_identity};
use kdv_critical::pde::Grid;

fn main() -> kdv_critical::Result<()> {
    let pair = CriticalPair::new(2, 1)?;
    for (nx, nt) in [(128, 1024), (256, 2048), (512, 4096)] {
        let g = Grid::new(pair.length, nx, 2.0, nt)?;
        let r = projection_identity(&pair, &g, &bump_control(&g, 0.0, 2.0, 1.0))?;
        println!("nx={nx:4} nt={nt:5}  2⟨y₂(T),φ⟩e^(-ipT) = {:.10}  ∫∫y₁²φ_x e^(-ipt) = {:.10}  rel {:.2e}", r.lhs, r.rhs, r.relative_discrepancy);
    }
    Ok(())
}
