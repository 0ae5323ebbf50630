//! Re and Im of the quadratic integral against the energy of w over a sweep of horizons.
use kdv_critical::number_theory::CriticalPair;
use kdv_critical::synthesis::{integral, ControlSpec, NuRule};
use std::time::Instant;

fn main() -> kdv_critical::Result<()> {
    let args: Vec<i64> = std::env::args().skip(1).filter_map(|s| s.parse().ok()).collect();
    let (k, l) = match args[..] {
        [k, l, ..] => (k, l),
        _ => (3, 2),
    };
    let pair = CriticalPair::new(k, l)?;
    println!("pair ({k},{l})  L={:.6}  p={:.6}", pair.length, pair.p);
    for t in [0.4, 0.2, 0.1, 0.05] {
        let clock = Instant::now();
        let spec = ControlSpec::new(&pair, t, NuRule::LengthScaled)?;
        let r = integral(&spec)?;
        println!(
            "T={t:<5} case={} γ={} z_max={:.3e} Re/W={:.6} Im/(TW)={:.6} panels={} {:.1}s",
            r.case,
            r.gamma,
            spec.z_max,
            r.re_ratio,
            r.im_ratio_per_t,
            r.panels,
            clock.elapsed().as_secs_f64()
        );
    }
    Ok(())
}
