//! Synthesizes a control for a critical pair and checks that it steers the linear system from rest to rest.
use kdv_critical::number_theory::CriticalPair;
use kdv_critical::synthesis::spectrum::steering_check;
use kdv_critical::synthesis::{steering_spectrum, ControlSpec, NuRule};

fn main() -> kdv_critical::Result<()> {
    let a: Vec<f64> = std::env::args().skip(1).filter_map(|s| s.parse().ok()).collect();
    let (k, l, t) = match a[..] {
        [k, l, t, ..] => (k as i64, l as i64, t),
        _ => (2, 1, 0.4),
    };
    let spec = ControlSpec::new(&CriticalPair::new(k, l)?, t, NuRule::LengthScaled)?;
    let s = steering_spectrum(&spec)?;
    println!("({k},{l}) T={t}  ν={:.4}  γ={}  z_max={:.3e}", spec.nu, spec.gamma, spec.z_max);
    println!("mass outside [0,T]: u {:.2e}  w {:.2e}", s.leak_u, s.leak_w);
    println!("Hermitian defect {:.2e}  imaginary part {:.2e}", s.hermitian_defect, s.imag_ratio);
    for (nx, nt) in [(256, 2000), (512, 4000), (512, 16000)] {
        let c = steering_check(&s, nx, nt)?;
        println!("nx={nx:4} nt={nt:5}  ‖y(T)‖/max‖y‖ = {:.3e}", c.ratio);
    }
    Ok(())
}
