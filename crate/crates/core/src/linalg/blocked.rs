//! Blocked elimination mod a small prime in f64 arithmetic.
//!
//! With p < 2^22 a panel of `PANEL` rank-one updates stays below 2^53, so the
//! trailing update is one exact dgemm followed by a single reduction.

use crate::field::PrimeField;

/// Largest prime (exclusive) the f64 kernel accepts.
pub const F64_PRIME_LIMIT: u64 = 1 << 22;

const PANEL: usize = 128;

#[inline]
fn reduce(x: f64, p: f64, pinv: f64) -> f64 {
    let mut r = x - (x * pinv).floor() * p;
    if r < 0.0 {
        r += p;
    } else if r >= p {
        r -= p;
    }
    r
}

/// Rank of a row-major `rows x cols` matrix with entries in [0, p).
pub(crate) fn rank_f64(data: &mut [f64], rows: usize, cols: usize, field: PrimeField) -> usize {
    let pu = field.modulus();
    assert!(pu < F64_PRIME_LIMIT, "prime too large for the f64 kernel");
    let (p, pinv) = (pu as f64, 1.0 / pu as f64);
    let mut rank = 0;
    let mut c0 = 0;
    // Multipliers of the current panel, one row of PANEL per matrix row.
    let mut l = vec![0.0f64; rows * PANEL];
    while c0 < cols && rank < rows {
        let c1 = (c0 + PANEL).min(cols);
        let start = rank;
        l[start * PANEL..].fill(0.0);
        for c in c0..c1 {
            if rank == rows {
                break;
            }
            let Some(piv) = (rank..rows).find(|&r| data[r * cols + c] != 0.0) else { continue };
            if piv != rank {
                for j in 0..cols {
                    data.swap(piv * cols + j, rank * cols + j);
                }
                for j in 0..PANEL {
                    l.swap(piv * PANEL + j, rank * PANEL + j);
                }
            }
            let k = rank - start;
            let inv = field.inv(data[rank * cols + c] as u64).expect("nonzero pivot");
            let (head, tail) = data.split_at_mut((rank + 1) * cols);
            let prow = &head[rank * cols + c..rank * cols + c1];
            for (i, row) in tail.chunks_exact_mut(cols).enumerate() {
                let lead = row[c];
                if lead == 0.0 {
                    continue;
                }
                let m = field.neg(field.mul(lead as u64, inv)) as f64;
                l[(rank + 1 + i) * PANEL + k] = m;
                row[c] = 0.0;
                for (x, &y) in row[c + 1..c1].iter_mut().zip(&prow[1..]) {
                    *x = reduce(*x + m * y, p, pinv);
                }
            }
            rank += 1;
        }
        let s = rank - start;
        if s == 0 || c1 == cols {
            c0 = c1;
            continue;
        }
        let width = cols - c1;
        // Bring the trailing parts of the new pivot rows up to date.
        for k in 1..s {
            let (done, cur) = data.split_at_mut((start + k) * cols);
            let cur = &mut cur[c1..cols];
            for j in 0..k {
                let m = l[(start + k) * PANEL + j];
                if m == 0.0 {
                    continue;
                }
                let u = &done[(start + j) * cols + c1..(start + j + 1) * cols];
                for (x, &y) in cur.iter_mut().zip(u) {
                    *x = reduce(*x + m * y, p, pinv);
                }
            }
        }
        // Remaining rows: A += L * U in one exact product.
        let below = rows - rank;
        if below > 0 {
            let (top, bottom) = data.split_at_mut(rank * cols);
            let u = &top[start * cols + c1..];
            let cptr = bottom[c1..].as_mut_ptr();
            // SAFETY: u, l and the output block live in disjoint buffers or
            // disjoint row ranges; strides describe in-bounds row-major views.
            unsafe {
                matrixmultiply::dgemm(
                    below,
                    s,
                    width,
                    1.0,
                    l[rank * PANEL..].as_ptr(),
                    PANEL as isize,
                    1,
                    u.as_ptr(),
                    cols as isize,
                    1,
                    1.0,
                    cptr,
                    cols as isize,
                    1,
                );
            }
            for row in bottom.chunks_exact_mut(cols) {
                for x in &mut row[c1..] {
                    *x = reduce(*x, p, pinv);
                }
            }
        }
        c0 = c1;
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ModMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn low_rank(f: PrimeField, n: usize, m: usize, k: usize, seed: u64) -> Vec<u64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = f.modulus();
        let a: Vec<u64> = (0..n * k).map(|_| rng.gen_range(0..p)).collect();
        let b: Vec<u64> = (0..k * m).map(|_| rng.gen_range(0..p)).collect();
        let mut out = vec![0u64; n * m];
        for i in 0..n {
            for j in 0..m {
                let mut s = 0;
                for t in 0..k {
                    s = f.add(s, f.mul(a[i * k + t], b[t * m + j]));
                }
                out[i * m + j] = s;
            }
        }
        out
    }

    #[test]
    fn agrees_with_unblocked_elimination() {
        let f = PrimeField::new(4_194_301).unwrap();
        for (n, m, k) in [(130, 170, 70), (200, 120, 120), (97, 97, 96), (60, 300, 5)] {
            let entries = low_rank(f, n, m, k, (n * m + k) as u64);
            let mut dense = ModMatrix::zeros(f, n, m);
            let mut flt: Vec<f64> = entries.iter().map(|&x| x as f64).collect();
            for (i, &x) in entries.iter().enumerate() {
                dense.set(i / m, i % m, x);
            }
            let expect = dense.clone().rank_unblocked();
            assert_eq!(expect, k.min(n).min(m));
            assert_eq!(rank_f64(&mut flt, n, m, f), expect);
        }
    }

    #[test]
    fn sparse_columns_and_zero_panels() {
        let f = PrimeField::new(65_537).unwrap();
        let (n, m) = (120, 150);
        let mut flt = vec![0.0; n * m];
        // Only every third column is populated, identity-like with repeats.
        for i in 0..n {
            let c = (3 * (i % 40)) % m;
            flt[i * m + c] = ((i % 7) + 1) as f64;
        }
        assert_eq!(rank_f64(&mut flt, n, m, f), 40);
    }
}
