//! Fractional norms of zero-extended signals: the T^α scaling bound and four interpolation inequalities.
use kdv_critical::synthesis::norms::{fractional_norm, interpolations, l2, scaling_constant, scaling_ratio, test_functions};

fn main() {
    let g = |x: f64| if x > 0.0 && x < 1.0 { (-1.0 / (x * (1.0 - x))).exp() } else { 0.0 };
    for alpha in [1.0 / 3.0, 2.0 / 3.0] {
        let r: Vec<String> = [1.0, 0.5, 0.25, 0.125].iter().map(|&t| format!("{:.4}", scaling_ratio(g, t, alpha, 1024).ratio)).collect();
        println!("α = {alpha:.3}  ratios {}  bound {:.4}", r.join(" "), scaling_constant(alpha));
    }
    let dt = 1.0 / 1024.0;
    let fs = test_functions(100, 1.0, 1024, 7);
    let u = &fs[0];
    println!("‖u‖_L² = {:.6}  H^0 = {:.6}  H^-1 = {:.6}  H^1/2 = {:.6}", l2(u, dt), fractional_norm(u, dt, 0.0).value, fractional_norm(u, dt, -1.0).value, fractional_norm(u, dt, 0.5).value);
    for i in interpolations() {
        let worst = fs.iter().map(|u| i.ratio(u, dt)).fold(0.0, f64::max);
        println!("H^{}/{} ≤ H^{}/{}^({}/{}) · H^{}/{}^({}/{})  exact: {}  max ratio {worst:.4}", i.s.0, i.s.1, i.a.0, i.a.1, i.theta.0, i.theta.1, i.b.0, i.b.1, i.one_minus_theta.0, i.one_minus_theta.1, i.exact());
    }
}
