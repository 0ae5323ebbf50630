//! Restricted singular-value ratio at a critical and a non-critical length.
use kdv_critical::number_theory::representations;
use kdv_critical::pde::gramian::gramian;
use kdv_critical::pde::Grid;
use std::f64::consts::PI;

fn main() -> kdv_critical::Result<()> {
    let nx: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(512);
    let class = representations(3)?;
    for nx in [64, 128, 256, nx].into_iter().filter(|&n| n <= nx) {
        let g = Grid::new(2.0 * PI, nx, 2.0, 400)?;
        let r = gramian(&g, Some(&class))?;
        println!("L=2π  nx={nx:5}  ratio={:.3e}  σmax={:.4}", r.restricted_ratio, r.singular_values[0]);
    }
    let g = Grid::new(1.0, nx, 2.0, 400)?;
    let r = gramian(&g, None)?;
    println!("L=1   nx={nx:5}  ratio={:.3e}  σmax={:.4}", r.restricted_ratio, r.singular_values[0]);
    Ok(())
}
