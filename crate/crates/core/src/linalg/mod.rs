//! Dense matrices over exact fields, and the modular rank path.

mod blocked;
mod modular;

pub use blocked::F64_PRIME_LIMIT;
pub use modular::{certified_rank, CertifiedRank, Certification, ModMatrix};

use crate::field::{Cyclotomic6, Field, Rational};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

/// Row-major dense matrix. Maps act on column vectors: `cols` is the source dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Clone + Zero> Matrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![S::zero(); rows * cols] }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<S>) -> Self {
        assert_eq!(data.len(), rows * cols, "entry count must equal rows*cols");
        Matrix { rows, cols, data }
    }

    /// Builds from rows of equal length; an empty list gives a 0×`cols` matrix.
    pub fn from_rows(rows: &[Vec<S>], cols: usize) -> Self {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend_from_slice(r);
        }
        Matrix { rows: rows.len(), cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &S {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: S) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[S] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn entries(&self) -> &[S] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.data[r * self.cols + c].clone();
            }
        }
        t
    }

    pub fn map<T: Clone + Zero>(&self, f: impl Fn(&S) -> T) -> Matrix<T> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }
}

impl<F: Field> Matrix<F> {
    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, F::one());
        }
        m
    }

    pub fn mul(&self, other: &Matrix<F>) -> Matrix<F> {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let mut out: Matrix<F> = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self.data[i * self.cols + k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other.data[k * other.cols + j];
                    if !b.is_zero() {
                        let cur = out.data[i * other.cols + j].clone();
                        out.data[i * other.cols + j] = cur + a.clone() * b.clone();
                    }
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[F]) -> Vec<F> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .fold(F::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect()
    }

    /// Reduced row echelon form and the pivot columns.
    pub fn rref(&self) -> (Matrix<F>, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m.get(i, c).is_zero()) else { continue };
            m.swap_rows(r, p);
            let inv = m.get(r, c).inv().expect("nonzero pivot");
            for j in c..m.cols {
                let v = m.get(r, j).clone();
                m.set(r, j, v * inv.clone());
            }
            for i in 0..m.rows {
                if i == r || m.get(i, c).is_zero() {
                    continue;
                }
                let f = m.get(i, c).clone();
                for j in c..m.cols {
                    let pv = m.get(r, j).clone();
                    if !pv.is_zero() {
                        let cur = m.get(i, j).clone();
                        m.set(i, j, cur - f.clone() * pv);
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    /// Rank by Gauss–Jordan elimination over the field.
    pub fn rank_gauss(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the null space {x : M x = 0}.
    pub fn kernel(&self) -> Vec<Vec<F>> {
        let (m, pivots) = self.rref();
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let mut basis = Vec::new();
        for free in (0..self.cols).filter(|&c| !is_pivot[c]) {
            let mut v = vec![F::zero(); self.cols];
            v[free] = F::one();
            for (r, &p) in pivots.iter().enumerate() {
                v[p] = -m.get(r, free).clone();
            }
            basis.push(v);
        }
        basis
    }

    /// Basis of the column space, taken from the pivot columns.
    pub fn image(&self) -> Vec<Vec<F>> {
        let (_, pivots) = self.rref();
        pivots.iter().map(|&c| (0..self.rows).map(|r| self.get(r, c).clone()).collect()).collect()
    }

    /// Inverse of a square matrix, or `None` if singular.
    pub fn inverse(&self) -> Option<Matrix<F>> {
        let n = self.rows;
        if n != self.cols {
            return None;
        }
        let mut aug = Matrix::zeros(n, 2 * n);
        for r in 0..n {
            for c in 0..n {
                aug.set(r, c, self.get(r, c).clone());
            }
            aug.set(r, n + r, F::one());
        }
        let (red, piv) = aug.rref();
        if piv.len() < n || piv[n - 1] >= n {
            return None;
        }
        let mut out = Matrix::zeros(n, n);
        for r in 0..n {
            for c in 0..n {
                out.set(r, c, red.get(r, n + c).clone());
            }
        }
        Some(out)
    }

    /// Solves `M x = b` for one solution, or `None` if inconsistent.
    pub fn solve(&self, b: &[F]) -> Option<Vec<F>> {
        assert_eq!(b.len(), self.rows);
        let mut aug = Matrix::zeros(self.rows, self.cols + 1);
        for r in 0..self.rows {
            for c in 0..self.cols {
                aug.set(r, c, self.get(r, c).clone());
            }
            aug.set(r, self.cols, b[r].clone());
        }
        let (m, pivots) = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![F::zero(); self.cols];
        for (r, &p) in pivots.iter().enumerate() {
            x[p] = m.get(r, self.cols).clone();
        }
        Some(x)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for c in 0..self.cols {
                self.data.swap(a * self.cols + c, b * self.cols + c);
            }
        }
    }
}

/// Rank of a matrix over an exact field.
pub trait MatRank {
    fn mat_rank(&self) -> usize;

    fn kernel_dim(&self) -> usize
    where
        Self: Sized,
    {
        self.source_dim() - self.mat_rank()
    }

    fn source_dim(&self) -> usize;
}

impl MatRank for Matrix<Rational> {
    /// Fraction-free elimination after clearing row denominators.
    fn mat_rank(&self) -> usize {
        let mut rows: Vec<Vec<BigInt>> = (0..self.rows)
            .map(|r| {
                let row = self.row(r);
                let l = row.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
                row.iter().map(|q| q.numer() * (&l / q.denom())).collect()
            })
            .collect();
        bareiss_rank(&mut rows, self.cols)
    }

    fn source_dim(&self) -> usize {
        self.cols
    }
}

impl MatRank for Matrix<Cyclotomic6> {
    fn mat_rank(&self) -> usize {
        self.rank_gauss()
    }

    fn source_dim(&self) -> usize {
        self.cols
    }
}

impl MatRank for ModMatrix {
    fn mat_rank(&self) -> usize {
        self.clone().rank_in_place()
    }

    fn source_dim(&self) -> usize {
        self.cols()
    }
}

fn bareiss_rank(rows: &mut [Vec<BigInt>], cols: usize) -> usize {
    let n = rows.len();
    let mut rank = 0;
    let mut prev = BigInt::one();
    for c in 0..cols {
        if rank == n {
            break;
        }
        let Some(p) = (rank..n).find(|&i| !rows[i][c].is_zero()) else { continue };
        rows.swap(rank, p);
        let (top, rest) = rows.split_at_mut(rank + 1);
        let piv = &top[rank];
        for row in rest.iter_mut() {
            let f = row[c].clone();
            for j in c + 1..cols {
                let v = &piv[c] * &row[j] - &f * &piv[j];
                row[j] = v / &prev;
            }
            row[c] = BigInt::zero();
        }
        prev = top[rank][c].clone();
        rank += 1;
    }
    rank
}

/// Basis of the annihilator of span(vectors) inside F^n (dual coordinates).
pub fn perp<F: Field>(vectors: &[Vec<F>], n: usize) -> Vec<Vec<F>> {
    Matrix::from_rows(vectors, n).kernel()
}

/// Rank of the span of a list of vectors in F^n.
pub fn span_rank<F: Field>(vectors: &[Vec<F>], n: usize) -> usize {
    Matrix::from_rows(vectors, n).rank_gauss()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: i64) -> Rational {
        Rational::from_i64(v)
    }

    fn int_matrix(rows: &[&[i64]]) -> Matrix<Rational> {
        let cols = rows[0].len();
        Matrix::from_rows(&rows.iter().map(|r| r.iter().map(|&v| q(v)).collect()).collect::<Vec<_>>(), cols)
    }

    #[test]
    fn identity_and_zero() {
        assert_eq!(Matrix::<Rational>::identity(3).mat_rank(), 3);
        let z = Matrix::<Rational>::zeros(4, 4);
        assert_eq!(z.mat_rank(), 0);
        assert_eq!(z.kernel_dim(), 4);
        assert_eq!(Matrix::<Rational>::zeros(0, 0).mat_rank(), 0);
    }

    #[test]
    fn bareiss_agrees_with_gauss() {
        let m = int_matrix(&[&[2, 4, 6, 1], &[1, 2, 3, 0], &[3, 6, 9, 1], &[0, 0, 1, 5]]);
        assert_eq!(m.mat_rank(), 3);
        assert_eq!(m.rank_gauss(), 3);
        assert_eq!(m.transpose().mat_rank(), 3);
    }

    #[test]
    fn kernel_vectors_are_annihilated() {
        let m = int_matrix(&[&[1, 2, 3], &[2, 4, 6]]);
        let k = m.kernel();
        assert_eq!(k.len(), 2);
        for v in &k {
            assert!(m.apply(v).iter().all(|x| x.is_zero()));
        }
    }

    #[test]
    fn perp_of_coordinate_line() {
        let p = perp(&[vec![q(1), q(0), q(0)]], 3);
        assert_eq!(p.len(), 2);
        assert!(p.iter().all(|v| v[0].is_zero()));
    }

    #[test]
    fn solve_consistent_and_inconsistent() {
        let m = int_matrix(&[&[1, 1], &[1, -1]]);
        assert_eq!(m.solve(&[q(3), q(1)]).unwrap(), vec![q(2), q(1)]);
        let s = int_matrix(&[&[1, 1], &[2, 2]]);
        assert!(s.solve(&[q(1), q(3)]).is_none());
    }
}
