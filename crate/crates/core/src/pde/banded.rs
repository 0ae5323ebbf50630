//! Banded matrices and LU factorization with partial pivoting.

use crate::error::{Error, Result};

/// Square band matrix with `kl` sub- and `ku` super-diagonals.
#[derive(Clone, Debug)]
pub struct Banded {
    pub n: usize,
    pub kl: usize,
    pub ku: usize,
    /// Row-major, `data[i * w + (j + kl - i)]`, `w = kl + ku + 1`.
    data: Vec<f64>,
}

impl Banded {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        Banded { n, kl, ku, data: vec![0.0; n * (kl + ku + 1)] }
    }

    fn in_band(&self, i: usize, j: usize) -> bool {
        j + self.kl >= i && j <= i + self.ku && i < self.n && j < self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if self.in_band(i, j) {
            self.data[i * (self.kl + self.ku + 1) + j + self.kl - i]
        } else {
            0.0
        }
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(self.in_band(i, j), "({i},{j}) outside band");
        let w = self.kl + self.ku + 1;
        self.data[i * w + j + self.kl - i] += v;
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        let w = self.kl + self.ku + 1;
        for (i, yi) in y.iter_mut().enumerate() {
            let j0 = i.saturating_sub(self.kl);
            let j1 = (i + self.ku).min(self.n - 1);
            let row = &self.data[i * w..(i + 1) * w];
            let mut acc = 0.0;
            for j in j0..=j1 {
                acc += row[j + self.kl - i] * x[j];
            }
            *yi = acc;
        }
    }

    /// `a·self + b·I`.
    pub fn affine_identity(&self, a: f64, b: f64) -> Banded {
        let mut m = self.clone();
        for v in m.data.iter_mut() {
            *v *= a;
        }
        for i in 0..self.n {
            m.add(i, i, b);
        }
        m
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.get(i, j)).collect()).collect()
    }

    pub fn factor(&self) -> Result<BandedLu> {
        BandedLu::new(self)
    }
}

/// LU factors of a band matrix; U has bandwidth `kl + ku` after pivoting.
#[derive(Clone, Debug)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    uw: usize,
    /// Row i of U holds columns i..=i+uw.
    u: Vec<f64>,
    /// Multipliers of step i for rows i+1..=i+kl.
    l: Vec<f64>,
    piv: Vec<usize>,
}

impl BandedLu {
    fn new(a: &Banded) -> Result<Self> {
        let n = a.n;
        let kl = a.kl;
        let uw = a.kl + a.ku;
        // working rows in absolute column offsets relative to the diagonal of the pivot step
        let width = uw + 1;
        let mut rows: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                // columns i-kl ..= i+uw stored at 0..=kl+uw
                let mut r = vec![0.0; kl + width];
                for j in i.saturating_sub(kl)..=(i + a.ku).min(n - 1) {
                    r[j + kl - i] = a.get(i, j);
                }
                r
            })
            .collect();
        let at = |rows: &Vec<Vec<f64>>, i: usize, j: usize| rows[i][j + kl - i];
        let mut u = vec![0.0; n * width];
        let mut l = vec![0.0; n * kl.max(1)];
        let mut piv = vec![0; n];
        let scale = a.data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..n {
            let last = (i + kl).min(n - 1);
            let mut p = i;
            let mut best = at(&rows, i, i).abs();
            for r in i + 1..=last {
                let v = at(&rows, r, i).abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best == 0.0 || best < 1e-30 * scale {
                return Err(Error::LinearSolveFailure(format!("zero pivot at row {i}")));
            }
            piv[i] = p;
            let jmax = (i + uw).min(n - 1);
            if p != i {
                for j in i..=jmax {
                    let a_ij = at(&rows, i, j);
                    let a_pj = if j + kl >= p { at(&rows, p, j) } else { 0.0 };
                    rows[i][j + kl - i] = a_pj;
                    if j + kl >= p {
                        rows[p][j + kl - p] = a_ij;
                    }
                }
            }
            let d = at(&rows, i, i);
            for j in i..=jmax {
                u[i * width + j - i] = at(&rows, i, j);
            }
            for r in i + 1..=last {
                let m = at(&rows, r, i) / d;
                l[i * kl + r - i - 1] = m;
                if m != 0.0 {
                    for j in i..=jmax {
                        let uij = u[i * width + j - i];
                        rows[r][j + kl - r] -= m * uij;
                    }
                }
            }
        }
        Ok(BandedLu { n, kl, uw, u, l, piv })
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        let (n, kl, width) = (self.n, self.kl, self.uw + 1);
        for i in 0..n {
            let p = self.piv[i];
            if p != i {
                b.swap(i, p);
            }
            let bi = b[i];
            for r in i + 1..=(i + kl).min(n - 1) {
                b[r] -= self.l[i * kl + r - i - 1] * bi;
            }
        }
        for i in (0..n).rev() {
            let mut acc = b[i];
            for j in i + 1..=(i + self.uw).min(n - 1) {
                acc -= self.u[i * width + j - i] * b[j];
            }
            b[i] = acc / self.u[i * width];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use proptest::prelude::*;

    fn random_band(n: usize, kl: usize, ku: usize, seed: &[f64]) -> Banded {
        let mut m = Banded::zeros(n, kl, ku);
        let mut k = 0;
        for i in 0..n {
            for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                m.add(i, j, seed[k % seed.len()] + if i == j { 0.1 } else { 0.0 });
                k += 1;
            }
        }
        m
    }

    proptest! {
        #[test]
        fn matches_dense_solve(n in 1usize..40, kl in 0usize..4, ku in 0usize..4,
                               seed in prop::collection::vec(-1.0f64..1.0, 7..30),
                               rhs in prop::collection::vec(-1.0f64..1.0, 40)) {
            let m = random_band(n, kl, ku, &seed);
            let dense = DMatrix::from_fn(n, n, |i, j| m.get(i, j));
            let b = &rhs[..n];
            let Some(want) = dense.clone().lu().solve(&DVector::from_column_slice(b)) else { return Ok(()); };
            let cond = {
                let sv = dense.svd(false, false).singular_values;
                sv.max() / sv.min().max(1e-300)
            };
            prop_assume!(cond < 1e8);
            let got = m.factor().unwrap().solve(b);
            let scale = want.amax().max(1.0);
            for i in 0..n {
                prop_assert!((got[i] - want[i]).abs() <= 1e-12 * cond * scale);
            }
            let mv = m.matvec(&got);
            for i in 0..n {
                prop_assert!((mv[i] - b[i]).abs() <= 1e-12 * cond * scale);
            }
        }
    }

    #[test]
    fn pivoting_needed() {
        // zero diagonal forces a row swap
        let mut m = Banded::zeros(3, 1, 1);
        m.add(0, 1, 1.0);
        m.add(1, 0, 1.0);
        m.add(1, 2, 2.0);
        m.add(2, 1, 3.0);
        m.add(2, 2, 1.0);
        let x = m.factor().unwrap().solve(&[1.0, 5.0, 4.0]);
        let r = m.matvec(&x);
        for (a, b) in r.iter().zip([1.0, 5.0, 4.0]) {
            assert!((a - b).abs() < 1e-14);
        }
        let z = Banded::zeros(3, 1, 1);
        assert!(matches!(z.factor(), Err(Error::LinearSolveFailure(_))));
    }
}
