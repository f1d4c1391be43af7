//! Symmetric positive definite banded matrices and their Cholesky factor.

use crate::error::{Error, Result};

/// Lower band of a symmetric matrix, row-major: row `i` stores columns
/// `i - bw ..= i`.
#[derive(Clone, Debug)]
pub struct SymBand {
    n: usize,
    bw: usize,
    a: Vec<f64>,
}

impl SymBand {
    pub fn zeros(n: usize, bw: usize) -> Self {
        SymBand {
            n,
            bw,
            a: vec![0.0; n * (bw + 1)],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        i * (self.bw + 1) + (j + self.bw - i)
    }

    /// Adds `v` at `(i, j)` if it lies in the stored lower triangle;
    /// entries above the diagonal are ignored, so assembling a symmetric
    /// product over ordered pairs counts each entry once.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        if j > i {
            return;
        }
        assert!(i - j <= self.bw, "entry ({i}, {j}) outside the band {}", self.bw);
        let k = self.idx(i, j);
        self.a[k] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if j > i { (j, i) } else { (i, j) };
        if i - j > self.bw {
            0.0
        } else {
            self.a[self.idx(i, j)]
        }
    }

    /// `y = A x`.
    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let j0 = i.saturating_sub(self.bw);
            let row = &self.a[self.idx(i, j0)..=self.idx(i, i)];
            let mut s = 0.0;
            for (k, v) in row.iter().enumerate() {
                let j = j0 + k;
                s += v * x[j];
                if j != i {
                    y[j] += v * x[i];
                }
            }
            y[i] += s;
        }
        y
    }

    /// In-place Cholesky `A = L Lᵀ`.
    pub fn factor(mut self) -> Result<BandCholesky> {
        let bw = self.bw;
        for i in 0..self.n {
            let j0 = i.saturating_sub(bw);
            for j in j0..=i {
                let k0 = j0.max(j.saturating_sub(bw));
                let mut s = self.a[self.idx(i, j)];
                let ri = self.idx(i, k0);
                let rj = self.idx(j, k0);
                for k in 0..(j - k0) {
                    s -= self.a[ri + k] * self.a[rj + k];
                }
                if i == j {
                    if !(s > 0.0) {
                        return Err(Error::Numerical(format!(
                            "matrix not positive definite at row {i} (pivot {s:e})"
                        )));
                    }
                    let k = self.idx(i, i);
                    self.a[k] = s.sqrt();
                } else {
                    let d = self.a[self.idx(j, j)];
                    let k = self.idx(i, j);
                    self.a[k] = s / d;
                }
            }
        }
        Ok(BandCholesky { l: self })
    }
}

#[derive(Clone, Debug)]
pub struct BandCholesky {
    l: SymBand,
}

impl BandCholesky {
    pub fn n(&self) -> usize {
        self.l.n
    }

    /// Overwrites `b` with `A⁻¹ b`.
    pub fn solve(&self, b: &mut [f64]) {
        let l = &self.l;
        let bw = l.bw;
        for i in 0..l.n {
            let j0 = i.saturating_sub(bw);
            let r = l.idx(i, j0);
            let mut s = b[i];
            for (k, j) in (j0..i).enumerate() {
                s -= l.a[r + k] * b[j];
            }
            b[i] = s / l.a[l.idx(i, i)];
        }
        for i in (0..l.n).rev() {
            let xi = b[i] / l.a[l.idx(i, i)];
            b[i] = xi;
            let j0 = i.saturating_sub(bw);
            let r = l.idx(i, j0);
            for (k, j) in (j0..i).enumerate() {
                b[j] -= l.a[r + k] * xi;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplace_1d(n: usize) -> SymBand {
        let mut a = SymBand::zeros(n, 1);
        for i in 0..n {
            a.add(i, i, 2.0);
            if i > 0 {
                a.add(i, i - 1, -1.0);
            }
        }
        a
    }

    #[test]
    fn solves_tridiagonal() {
        let n = 50;
        let a = laplace_1d(n);
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).sin()).collect();
        let mut b = a.mul(&x);
        a.clone().factor().unwrap().solve(&mut b);
        for (u, v) in b.iter().zip(&x) {
            assert!((u - v).abs() < 1e-11);
        }
    }

    #[test]
    fn solves_wide_band() {
        // 2-D five-point Laplacian, band = row length
        let (nx, ny) = (7, 9);
        let n = nx * ny;
        let mut a = SymBand::zeros(n, ny);
        for i in 0..nx {
            for j in 0..ny {
                let k = i * ny + j;
                a.add(k, k, 4.0 + 0.1);
                if j > 0 {
                    a.add(k, k - 1, -1.0);
                }
                if i > 0 {
                    a.add(k, k - ny, -1.0);
                }
            }
        }
        let x: Vec<f64> = (0..n).map(|i| 1.0 / (1.0 + i as f64)).collect();
        let mut b = a.mul(&x);
        a.factor().unwrap().solve(&mut b);
        let err = b.iter().zip(&x).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn rejects_indefinite() {
        let mut a = laplace_1d(4);
        a.add(2, 2, -10.0);
        assert!(a.factor().is_err());
    }

    #[test]
    fn upper_entries_are_ignored() {
        let mut a = SymBand::zeros(3, 1);
        a.add(0, 1, 5.0);
        assert_eq!(a.get(1, 0), 0.0);
        a.add(1, 0, 5.0);
        assert_eq!(a.get(0, 1), 5.0);
    }
}
