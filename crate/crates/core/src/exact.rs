//! Small dense matrices over an exact field, plus integer Smith normal form.

use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct Mat<F> {
    rows: usize,
    cols: usize,
    data: Vec<F>,
}

impl<F: Scalar> Mat<F> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![F::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = F::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> F) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        Self::from_fn(self.rows, other.cols, |i, j| {
            (0..self.cols).fold(F::zero(), |acc, k| {
                acc + self[(i, k)].clone() * other[(k, j)].clone()
            })
        })
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| {
            self[(i, j)].clone() + other[(i, j)].clone()
        })
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| {
            self[(i, j)].clone() - other[(i, j)].clone()
        })
    }

    pub fn scale(&self, c: &F) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)].clone() * c.clone())
    }

    pub fn trace(&self) -> F {
        (0..self.rows.min(self.cols)).fold(F::zero(), |acc, i| acc + self[(i, i)].clone())
    }

    /// Determinant by fraction-producing Gaussian elimination.
    pub fn det(&self) -> F {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.clone();
        let mut det = F::one();
        for col in 0..n {
            let Some(pivot) = (col..n).find(|&r| !a[(r, col)].is_exact_zero()) else {
                return F::zero();
            };
            if pivot != col {
                for j in 0..n {
                    a.data.swap(pivot * n + j, col * n + j);
                }
                det = -det;
            }
            let p = a[(col, col)].clone();
            det = det * p.clone();
            for r in col + 1..n {
                let f = a[(r, col)].clone() / p.clone();
                if f.is_exact_zero() {
                    continue;
                }
                for j in col..n {
                    let v = a[(col, j)].clone() * f.clone();
                    a[(r, j)] = a[(r, j)].clone() - v;
                }
            }
        }
        det
    }

    pub fn rank(&self) -> usize {
        let mut a = self.clone();
        let (rows, cols) = (self.rows, self.cols);
        let mut rank = 0;
        for col in 0..cols {
            let Some(pivot) = (rank..rows).find(|&r| !a[(r, col)].is_exact_zero()) else {
                continue;
            };
            for j in 0..cols {
                a.data.swap(pivot * cols + j, rank * cols + j);
            }
            let p = a[(rank, col)].clone();
            for r in 0..rows {
                if r == rank {
                    continue;
                }
                let f = a[(r, col)].clone() / p.clone();
                if f.is_exact_zero() {
                    continue;
                }
                for j in 0..cols {
                    let v = a[(rank, j)].clone() * f.clone();
                    a[(r, j)] = a[(r, j)].clone() - v;
                }
            }
            rank += 1;
        }
        rank
    }

    /// Inverse by Gauss-Jordan elimination, `None` when singular.
    pub fn inverse(&self) -> Option<Self> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let pivot = (col..n).find(|&r| !a[(r, col)].is_exact_zero())?;
            for j in 0..n {
                a.data.swap(pivot * n + j, col * n + j);
                inv.data.swap(pivot * n + j, col * n + j);
            }
            let p = a[(col, col)].clone();
            for j in 0..n {
                a[(col, j)] = a[(col, j)].clone() / p.clone();
                inv[(col, j)] = inv[(col, j)].clone() / p.clone();
            }
            for r in 0..n {
                if r == col || a[(r, col)].is_exact_zero() {
                    continue;
                }
                let f = a[(r, col)].clone();
                for j in 0..n {
                    let va = a[(col, j)].clone() * f.clone();
                    let vi = inv[(col, j)].clone() * f.clone();
                    a[(r, j)] = a[(r, j)].clone() - va;
                    inv[(r, j)] = inv[(r, j)].clone() - vi;
                }
            }
        }
        Some(inv)
    }

    /// Characteristic polynomial `det(x - A)` as coefficients, constant term
    /// first, leading coefficient 1 last (Faddeev–LeVerrier).
    pub fn charpoly(&self) -> Vec<F> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut coeffs = vec![F::zero(); n + 1];
        coeffs[n] = F::one();
        let mut m = Self::zeros(n, n);
        for k in 1..=n {
            m = self.mul(&m).add(&Self::identity(n).scale(&coeffs[n - k + 1]));
            coeffs[n - k] = -(self.mul(&m).trace() / F::from_i64(k as i64));
        }
        coeffs
    }
}

/// Coefficients of `prod (x - r)` over the given roots, constant term first.
pub fn poly_from_roots<F: Scalar>(roots: &[F]) -> Vec<F> {
    let mut p = vec![F::one()];
    for r in roots {
        let mut next = vec![F::zero(); p.len() + 1];
        for (k, c) in p.iter().enumerate() {
            next[k + 1] = next[k + 1].clone() + c.clone();
            next[k] = next[k].clone() - c.clone() * r.clone();
        }
        p = next;
    }
    p
}

impl<F> std::ops::Index<(usize, usize)> for Mat<F> {
    type Output = F;
    fn index(&self, (i, j): (usize, usize)) -> &F {
        &self.data[i * self.cols + j]
    }
}

impl<F> std::ops::IndexMut<(usize, usize)> for Mat<F> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut F {
        &mut self.data[i * self.cols + j]
    }
}

/// Diagonal of the Smith normal form of an integer matrix (nonzero entries
/// only, each dividing the next).
pub fn smith_diagonal(m: &[Vec<i64>]) -> Vec<i64> {
    let mut a: Vec<Vec<i128>> = m
        .iter()
        .map(|r| r.iter().map(|&v| v as i128).collect())
        .collect();
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut diag = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        // smallest nonzero entry in the remaining block as pivot
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if a[i][j] != 0 && best.is_none_or(|(bi, bj)| a[i][j].abs() < a[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        a.swap(t, pi);
        for row in a.iter_mut() {
            row.swap(t, pj);
        }
        let mut clean = true;
        for i in t + 1..rows {
            let f = a[i][t] / a[t][t];
            for j in t..cols {
                a[i][j] -= f * a[t][j];
            }
            clean &= a[i][t] == 0;
        }
        for j in t + 1..cols {
            let f = a[t][j] / a[t][t];
            for i in t..rows {
                a[i][j] -= f * a[i][t];
            }
            clean &= a[t][j] == 0;
        }
        if !clean {
            continue;
        }
        // divisibility: fold a non-divisible entry into row t and retry
        let p = a[t][t];
        if let Some(i) = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| a[i][j] % p != 0)) {
            for j in t..cols {
                a[t][j] += a[i][j];
            }
            continue;
        }
        diag.push(p.unsigned_abs() as i64);
        t += 1;
    }
    diag
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{q, Q};

    fn qm(rows: &[&[i64]]) -> Mat<Q> {
        Mat::from_fn(rows.len(), rows[0].len(), |i, j| q(rows[i][j], 1))
    }

    #[test]
    fn det_and_rank() {
        let m = qm(&[&[2, -1, 0], &[-1, 2, -1], &[0, -1, 2]]);
        assert_eq!(m.det(), q(4, 1));
        assert_eq!(m.rank(), 3);
        let s = qm(&[&[1, 2], &[2, 4]]);
        assert_eq!(s.det(), q(0, 1));
        assert_eq!(s.rank(), 1);
    }

    #[test]
    fn inverse_round_trip() {
        let m = qm(&[&[2, 1, 0], &[1, 3, 1], &[0, 1, 4]]);
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), Mat::identity(3));
        assert!(qm(&[&[1, 2], &[2, 4]]).inverse().is_none());
    }

    #[test]
    fn charpoly_matches_roots_for_triangular() {
        let m = qm(&[&[1, 5, 7], &[0, 2, 3], &[0, 0, -4]]);
        let expected = poly_from_roots(&[q(1, 1), q(2, 1), q(-4, 1)]);
        assert_eq!(m.charpoly(), expected);
    }

    #[test]
    fn smith_of_a3_cartan() {
        let c = vec![vec![2, -1, 0], vec![-1, 2, -1], vec![0, -1, 2]];
        assert_eq!(smith_diagonal(&c), vec![1, 1, 4]);
        assert_eq!(smith_diagonal(&[vec![2, 4], vec![6, 8]]), vec![2, 4]);
    }
}
