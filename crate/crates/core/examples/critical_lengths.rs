//! Critical length classes, their pairs and the controllability time T^>.
use kdv_critical::number_theory::{classes_up_to, t_star};

fn main() {
    let nmax: i64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(100);
    println!("{:>5} {:>10} {:>4} {:>4} {:>5}  {:>10}  pairs", "N", "L", "n_L", "n_L>", "dimM", "T>");
    for c in classes_up_to(nmax) {
        let pairs: Vec<String> = c.pairs.iter().map(|p| format!("({},{})", p.k, p.l)).collect();
        let t = t_star(&c).map(|t| format!("{t:10.4}")).unwrap_or_else(|_| format!("{:>10}", "-"));
        println!("{:>5} {:>10.6} {:>4} {:>4} {:>5}  {t}  {}", c.n, c.length, c.n_l, c.n_l_pos, c.dim_mn, pairs.join(" "));
    }
}
