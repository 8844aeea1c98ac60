use super::blocked::{rank_f64, F64_PRIME_LIMIT};
use crate::field::{PrimeField, PrimeStream};

const BLOCKED_MIN: usize = 96;
use serde::{Deserialize, Serialize};

/// Dense row-major matrix over a prime field.
#[derive(Clone, Debug)]
pub struct ModMatrix {
    field: PrimeField,
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl ModMatrix {
    pub fn zeros(field: PrimeField, rows: usize, cols: usize) -> Self {
        ModMatrix { field, rows, cols, data: vec![0; rows * cols] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u64) {
        self.data[r * self.cols + c] = v;
    }

    /// Adds `v` to entry (r, c).
    #[inline]
    pub fn add_to(&mut self, r: usize, c: usize, v: u64) {
        let i = r * self.cols + c;
        self.data[i] = self.field.add(self.data[i], v);
    }

    /// Rank by elimination; the contents are overwritten.
    ///
    /// Large matrices over primes below 2^22 go through the blocked f64 kernel.
    pub fn rank_in_place(&mut self) -> usize {
        if self.field.modulus() < F64_PRIME_LIMIT && self.rows.min(self.cols) >= BLOCKED_MIN {
            let mut flt: Vec<f64> = std::mem::take(&mut self.data).into_iter().map(|x| x as f64).collect();
            let rank = rank_f64(&mut flt, self.rows, self.cols, self.field);
            self.data = flt.into_iter().map(|x| x as u64).collect();
            return rank;
        }
        self.rank_unblocked()
    }

    /// Plain row echelon elimination; leaves the matrix in echelon form.
    pub(crate) fn rank_unblocked(&mut self) -> usize {
        // Eliminate along the shorter side.
        if self.cols > self.rows {
            *self = self.transposed();
        }
        let f = self.field;
        let (rows, cols) = (self.rows, self.cols);
        let mut rank = 0;
        for c in 0..cols {
            if rank == rows {
                break;
            }
            let Some(p) = (rank..rows).find(|&r| self.data[r * cols + c] != 0) else { continue };
            if p != rank {
                for j in c..cols {
                    self.data.swap(p * cols + j, rank * cols + j);
                }
            }
            let (head, tail) = self.data.split_at_mut((rank + 1) * cols);
            let piv = &head[rank * cols + c..(rank + 1) * cols];
            let inv = f.inv(piv[0]).expect("nonzero pivot");
            for row in tail.chunks_exact_mut(cols) {
                let lead = row[c];
                if lead == 0 {
                    continue;
                }
                let m = f.neg(f.mul(lead, inv));
                let ms = f.shoup(m);
                let row = &mut row[c..];
                row[0] = 0;
                for (x, &y) in row[1..].iter_mut().zip(&piv[1..]) {
                    *x = f.add(*x, f.mul_shoup(y, m, ms));
                }
            }
            rank += 1;
        }
        rank
    }

    fn transposed(&self) -> Self {
        let mut t = ModMatrix::zeros(self.field, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.data[r * self.cols + c];
            }
        }
        t
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Certification {
    /// Exact elimination over Q.
    Exact,
    /// Two independent primes gave the same rank.
    TwoPrime,
    /// Ranks disagreed across three primes; the reported value is the largest seen.
    Uncertified,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertifiedRank {
    pub rank: usize,
    pub primes: Vec<u64>,
    pub ranks: Vec<usize>,
    pub certification: Certification,
}

/// Rank of a rational matrix via reductions modulo random primes.
///
/// `rank_mod` computes the rank for one prime, returning `None` when the prime
/// divides a denominator (the prime is then replaced). Ranks mod p never exceed
/// the rational rank, so the maximum seen is always a valid lower bound.
pub fn certified_rank(stream: &mut PrimeStream, mut rank_mod: impl FnMut(PrimeField) -> Option<usize>) -> CertifiedRank {
    let mut primes = Vec::new();
    let mut ranks = Vec::new();
    let mut draw = |primes: &mut Vec<u64>, ranks: &mut Vec<usize>| loop {
        let f = stream.next_field();
        if let Some(r) = rank_mod(f) {
            primes.push(f.modulus());
            ranks.push(r);
            return r;
        }
    };
    let r1 = draw(&mut primes, &mut ranks);
    let r2 = draw(&mut primes, &mut ranks);
    if r1 == r2 {
        return CertifiedRank { rank: r1, primes, ranks, certification: Certification::TwoPrime };
    }
    let r3 = draw(&mut primes, &mut ranks);
    let best = r1.max(r2).max(r3);
    let agree = ranks.iter().filter(|&&r| r == best).count() >= 2;
    CertifiedRank {
        rank: best,
        primes,
        ranks,
        certification: if agree { Certification::TwoPrime } else { Certification::Uncertified },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn product_matrix(f: PrimeField, n: usize, m: usize, k: usize, seed: u64) -> ModMatrix {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let a: Vec<u64> = (0..n * k).map(|_| rng.gen_range(0..f.modulus())).collect();
        let b: Vec<u64> = (0..k * m).map(|_| rng.gen_range(0..f.modulus())).collect();
        let mut out = ModMatrix::zeros(f, n, m);
        for i in 0..n {
            for j in 0..m {
                let mut s = 0;
                for t in 0..k {
                    s = f.add(s, f.mul(a[i * k + t], b[t * m + j]));
                }
                out.set(i, j, s);
            }
        }
        out
    }

    #[test]
    fn rank_of_low_rank_product() {
        let f = PrimeStream::new(3).next_field();
        assert_eq!(product_matrix(f, 40, 30, 7, 1).rank_in_place(), 7);
        assert_eq!(product_matrix(f, 20, 50, 20, 2).rank_in_place(), 20);
    }

    #[test]
    fn two_prime_agreement() {
        let mut s = PrimeStream::new(11);
        let c = certified_rank(&mut s, |f| Some(product_matrix(f, 12, 12, 5, 9).rank_in_place()));
        assert_eq!(c.rank, 5);
        assert_eq!(c.certification, Certification::TwoPrime);
        assert_eq!(c.primes.len(), 2);
    }

    #[test]
    fn disagreement_draws_a_third_prime() {
        let mut s = PrimeStream::new(11);
        let mut calls = 0;
        let c = certified_rank(&mut s, |_| {
            calls += 1;
            Some([3, 4, 5][calls - 1])
        });
        assert_eq!(c.ranks, vec![3, 4, 5]);
        assert_eq!(c.rank, 5);
        assert_eq!(c.certification, Certification::Uncertified);
    }
}
