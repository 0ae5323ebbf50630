//! Critical lengths `L = 2π sqrt(N/3)` with `N = k² + kl + l²`, their
//! representations and the associated frequencies.

use crate::error::{Error, Result};
use serde::Serialize;
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CriticalPair {
    pub k: i64,
    pub l: i64,
    pub n: i64,
    /// Domain length L.
    pub length: f64,
    pub p: f64,
    /// `3 | 2k + l`, i.e. `exp(η₁ L) = 1`.
    pub case_e0: bool,
}

impl CriticalPair {
    pub fn new(k: i64, l: i64) -> Result<Self> {
        if l < 1 || k < l {
            return Err(Error::Domain(format!("need k >= l >= 1, got ({k},{l})")));
        }
        let n = k * k + k * l + l * l;
        let nf = n as f64;
        Ok(CriticalPair {
            k,
            l,
            n,
            length: 2.0 * PI * (nf / 3.0).sqrt(),
            p: ((2 * k + l) * (k - l) * (2 * l + k)) as f64 / (3.0 * 3f64.sqrt() * nf.powf(1.5)),
            case_e0: (2 * k + l) % 3 == 0,
        })
    }

    /// p via `(2π/3L)³ (2k+l)(k-l)(k+2l)`.
    pub fn p_from_length(&self) -> f64 {
        (2.0 * PI / (3.0 * self.length)).powi(3) * ((2 * self.k + self.l) * (self.k - self.l) * (self.k + 2 * self.l)) as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LengthClass {
    pub n: i64,
    pub length: f64,
    pub pairs: Vec<CriticalPair>,
    pub n_l: usize,
    pub n_l_pos: usize,
    pub dim_mn: usize,
    /// Positive frequencies in strictly decreasing order.
    pub p_sorted: Vec<f64>,
}

/// All pairs with `1 <= l <= k <= k_max`, ordered by N then k.
pub fn enumerate_pairs(k_max: i64) -> Vec<CriticalPair> {
    let mut out = Vec::new();
    for k in 1..=k_max.max(0) {
        for l in 1..=k {
            out.push(CriticalPair::new(k, l).expect("valid by construction"));
        }
    }
    out.sort_by_key(|c| (c.n, c.k));
    out
}

fn isqrt(v: i64) -> i64 {
    if v < 0 {
        return -1;
    }
    let mut r = (v as f64).sqrt() as i64;
    while r * r > v {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= v {
        r += 1;
    }
    r
}

/// Every representation `N = k² + kl + l²` with `k >= l >= 1`.
pub fn representations(n: i64) -> Result<LengthClass> {
    let mut pairs = Vec::new();
    // for fixed l, k solves k² + lk + (l² - N) = 0
    let mut l = 1;
    while 3 * l * l <= n {
        let disc = 4 * n - 3 * l * l;
        let s = isqrt(disc);
        if s * s == disc && (s - l) % 2 == 0 {
            let k = (s - l) / 2;
            if k >= l {
                pairs.push(CriticalPair::new(k, l)?);
            }
        }
        l += 1;
    }
    if pairs.is_empty() {
        return Err(Error::NotCritical(n));
    }
    pairs.sort_by_key(|c| c.k);
    Ok(class_from_pairs(n, pairs))
}

fn class_from_pairs(n: i64, pairs: Vec<CriticalPair>) -> LengthClass {
    let mut p_sorted: Vec<f64> = pairs.iter().filter(|c| c.k > c.l).map(|c| c.p).collect();
    p_sorted.sort_by(|a, b| b.total_cmp(a));
    let n_l = pairs.len();
    let n_l_pos = p_sorted.len();
    LengthClass {
        n,
        length: 2.0 * PI * (n as f64 / 3.0).sqrt(),
        pairs,
        n_l,
        n_l_pos,
        dim_mn: n_l + n_l_pos,
        p_sorted,
    }
}

/// All critical length classes with `N <= n_max`.
pub fn classes_up_to(n_max: i64) -> Vec<LengthClass> {
    (1..=n_max).filter_map(|n| representations(n).ok()).collect()
}

/// `T^> = π Σ_m (n_L^> + 1 - m) / p_m`.
pub fn t_star(class: &LengthClass) -> Result<f64> {
    if class.n_l_pos == 0 {
        return Err(Error::NoPositiveFrequency(class.n));
    }
    let n = class.n_l_pos;
    Ok(PI * class
        .p_sorted
        .iter()
        .enumerate()
        .map(|(i, p)| (n - i) as f64 / p)
        .sum::<f64>())
}

/// The lengths L(2,1) and L(3,1), N ∈ {7, 13}.
pub fn excluded_lengths() -> Vec<LengthClass> {
    [7, 13].iter().map(|&n| representations(n).expect("7 and 13 are critical")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeMap;

    fn brute_force(n_max: i64) -> BTreeMap<i64, Vec<(i64, i64)>> {
        let mut m: BTreeMap<i64, Vec<(i64, i64)>> = BTreeMap::new();
        for k in 1..=n_max {
            if k * k > n_max {
                break;
            }
            for l in 1..=k {
                let n = k * k + k * l + l * l;
                if n <= n_max {
                    m.entry(n).or_default().push((k, l));
                }
            }
        }
        m
    }

    #[test]
    fn representations_match_brute_force() {
        let oracle = brute_force(10_000);
        for n in 1..=10_000 {
            match (representations(n), oracle.get(&n)) {
                (Ok(c), Some(v)) => {
                    let got: Vec<(i64, i64)> = c.pairs.iter().map(|p| (p.k, p.l)).collect();
                    assert_eq!(&got, v, "N = {n}");
                    assert_eq!(c.dim_mn, c.n_l + c.n_l_pos);
                    let has_diag = c.pairs.iter().any(|p| p.k == p.l);
                    assert!(c.n_l_pos + 1 >= c.n_l && c.n_l_pos <= c.n_l);
                    assert_eq!(c.n_l_pos + 1 == c.n_l, has_diag);
                    assert!(c.p_sorted.windows(2).all(|w| w[0] > w[1]));
                }
                (Err(Error::NotCritical(m)), None) => assert_eq!(m, n),
                (r, o) => panic!("N = {n}: {r:?} vs {o:?}"),
            }
        }
    }

    #[test]
    fn examples() {
        let c = representations(91).unwrap();
        let ks: Vec<(i64, i64)> = c.pairs.iter().map(|p| (p.k, p.l)).collect();
        assert_eq!(ks, vec![(6, 5), (9, 1)]);
        assert_eq!((c.n_l, c.n_l_pos, c.dim_mn), (2, 2, 4));
        let t = t_star(&c).unwrap();
        assert!((t - PI * (2.0 / c.p_sorted[0] + 1.0 / c.p_sorted[1])).abs() < 1e-12 * t);

        let c3 = representations(3).unwrap();
        assert_eq!((c3.n_l, c3.n_l_pos, c3.dim_mn), (1, 0, 1));
        assert_eq!(t_star(&c3), Err(Error::NoPositiveFrequency(3)));

        let c7 = representations(7).unwrap();
        assert_eq!((c7.n_l, c7.n_l_pos, c7.dim_mn), (1, 1, 2));
        let p21 = CriticalPair::new(2, 1).unwrap();
        assert!((t_star(&c7).unwrap() - PI / p21.p).abs() < 1e-14);
        // (2k+l)(k-l)(2l+k) = 20 and 3√3·7^{3/2} = 21√21
        assert!((p21.p - 20.0 / (21.0 * 21f64.sqrt())).abs() < 1e-15);
        assert!((p21.p - 0.207_826_56).abs() < 1e-8);
        assert!((p21.length - 2.0 * PI * (7.0f64 / 3.0).sqrt()).abs() < 1e-15);

        assert_eq!(representations(2), Err(Error::NotCritical(2)));
        let ex: Vec<i64> = excluded_lengths().iter().map(|c| c.n).collect();
        assert_eq!(ex, vec![7, 13]);

        let first = enumerate_pairs(1);
        assert_eq!(first.len(), 1);
        assert_eq!((first[0].k, first[0].l, first[0].p), (1, 1, 0.0));
        assert!((first[0].length - 2.0 * PI).abs() < 1e-15);
    }

    #[test]
    fn enumeration_is_canonical() {
        let v = enumerate_pairs(20);
        assert_eq!(v.len(), 210);
        assert!(v.windows(2).all(|w| (w[0].n, w[0].k) < (w[1].n, w[1].k)));
    }

    proptest! {
        #[test]
        fn pair_invariants(k in 1i64..200, dl in 0i64..200) {
            let l = 1 + dl % k;
            let c = CriticalPair::new(k, l).unwrap();
            prop_assert_eq!(c.n, k * k + k * l + l * l);
            prop_assert_eq!(c.p == 0.0, k == l);
            prop_assert!(c.p >= 0.0);
            let q = c.p_from_length();
            prop_assert!((q - c.p).abs() <= 1e-13 * c.p.max(1e-300));
            let l2 = c.length * c.length;
            prop_assert!((l2 - 4.0 * PI * PI * c.n as f64 / 3.0).abs() <= 1e-13 * l2);
        }
    }
}
