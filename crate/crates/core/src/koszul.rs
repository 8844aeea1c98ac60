//! Koszul flattenings T_A^{∧p}: B*⊗ΛᵖA → Λᵖ⁺¹A⊗C and the border-rank bounds they give.

use crate::error::{Error, Result};
use crate::field::{PrimeField, PrimeStream, Rational};
use crate::linalg::{certified_rank, CertifiedRank, Certification, MatRank, Matrix, ModMatrix};
use crate::tensor::{Factor, Tensor3};
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

/// p-subsets of {0..n} in colexicographic order.
pub struct ExteriorBasis {
    n: usize,
    p: usize,
    subsets: Vec<Vec<usize>>,
    binom: Vec<Vec<u64>>,
}

impl ExteriorBasis {
    pub fn new(n: usize, p: usize) -> Self {
        let mut binom = vec![vec![0u64; p + 2]; n + 1];
        for (m, row) in binom.iter_mut().enumerate() {
            for (k, v) in row.iter_mut().enumerate() {
                *v = binomial(m, k);
            }
        }
        let mut subsets = Vec::with_capacity(binomial(n, p) as usize);
        let mut cur: Vec<usize> = (0..p).collect();
        if p <= n {
            loop {
                subsets.push(cur.clone());
                // colex successor: bump the lowest entry that can move up
                let mut i = 0;
                while i < p && (if i + 1 < p { cur[i] + 1 == cur[i + 1] } else { cur[i] + 1 == n }) {
                    i += 1;
                }
                if i == p {
                    break;
                }
                cur[i] += 1;
                for (j, c) in cur.iter_mut().enumerate().take(i) {
                    *c = j;
                }
            }
        }
        ExteriorBasis { n, p, subsets, binom }
    }

    pub fn len(&self) -> usize {
        self.subsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsets.is_empty()
    }

    pub fn subset(&self, r: usize) -> &[usize] {
        &self.subsets[r]
    }

    /// Colex rank of a sorted subset of size `p` or `p + 1`.
    pub fn rank_of(&self, s: &[usize]) -> usize {
        s.iter().enumerate().map(|(i, &x)| self.binom[x][i + 1]).sum::<u64>() as usize
    }

    /// e_S ∧ e_i as (sign, sorted S ∪ {i}); `None` if i ∈ S.
    pub fn wedge(&self, s: &[usize], i: usize) -> Option<(i64, Vec<usize>)> {
        debug_assert!(s.len() == self.p && i < self.n);
        let pos = s.partition_point(|&x| x < i);
        if pos < s.len() && s[pos] == i {
            return None;
        }
        let mut out = Vec::with_capacity(s.len() + 1);
        out.extend_from_slice(&s[..pos]);
        out.push(i);
        out.extend_from_slice(&s[pos..]);
        // e_i moves past the elements of S larger than it
        let sign = if (s.len() - pos) % 2 == 0 { 1 } else { -1 };
        Some((sign, out))
    }
}

/// One block of the map: global source columns and target rows.
#[derive(Clone, Debug)]
pub struct KoszulBlock {
    pub cols: Vec<usize>,
    pub rows: Vec<usize>,
}

/// Sparse description of T_A^{∧p}, split into weight blocks when graded.
pub struct KoszulMap<'a> {
    t: &'a Tensor3<Rational>,
    pub p: usize,
    src: ExteriorBasis,
    tgt: ExteriorBasis,
    pub blocks: Vec<KoszulBlock>,
}

impl<'a> KoszulMap<'a> {
    pub fn new(t: &'a Tensor3<Rational>, p: usize) -> Result<Self> {
        let [a, b, c] = t.dims();
        if a == 0 || p > a - 1 {
            return Err(Error::InvalidArgument(format!("p = {p} out of range for dim A = {a}")));
        }
        let src = ExteriorBasis::new(a, p);
        let tgt = ExteriorBasis::new(a, p + 1);
        let (ns, nt) = (b * src.len(), tgt.len() * c);
        let blocks = match t.grading() {
            None => vec![KoszulBlock { cols: (0..ns).collect(), rows: (0..nt).collect() }],
            Some(g) => {
                let [wa, wb, wc] = &g.factors;
                let sum = |s: &[usize]| s.iter().fold(crate::lie::WeightLabel::zero(wa[0].0.len()), |acc, &x| acc.add(&wa[x]));
                let mut by_weight: BTreeMap<crate::lie::WeightLabel, KoszulBlock> = BTreeMap::new();
                for bi in 0..b {
                    for (r, s) in src.subsets.iter().enumerate() {
                        let w = sum(s).sub(&wb[bi]);
                        by_weight.entry(w).or_insert_with(|| KoszulBlock { cols: vec![], rows: vec![] }).cols.push(bi * src.len() + r);
                    }
                }
                for (r, s) in tgt.subsets.iter().enumerate() {
                    let ws = sum(s);
                    for (ci, w) in wc.iter().enumerate() {
                        if let Some(block) = by_weight.get_mut(&ws.add(w)) {
                            block.rows.push(r * c + ci);
                        }
                    }
                }
                by_weight.into_values().filter(|bl| !bl.rows.is_empty() && !bl.cols.is_empty()).collect()
            }
        };
        Ok(KoszulMap { t, p, src, tgt, blocks })
    }

    pub fn source_dim(&self) -> usize {
        self.t.dims()[1] * self.src.len()
    }

    pub fn target_dim(&self) -> usize {
        self.tgt.len() * self.t.dims()[2]
    }

    pub fn largest_block(&self) -> (usize, usize) {
        self.blocks.iter().map(|b| (b.rows.len(), b.cols.len())).max_by_key(|(r, c)| r * c).unwrap_or((0, 0))
    }

    /// Nonzero entries of source column `col` as (target row, coefficient index into
    /// the tensor's entries, sign).
    fn column(&self, col: usize, slices: &[Vec<(usize, usize, usize)>], out: &mut Vec<(usize, usize, i64)>) {
        out.clear();
        let c = self.t.dims()[2];
        let (bi, r) = (col / self.src.len(), col % self.src.len());
        let s = self.src.subset(r);
        for &(i, k, off) in &slices[bi] {
            if let Some((sign, s2)) = self.src.wedge(s, i) {
                out.push((self.tgt.rank_of(&s2) * c + k, off, sign));
            }
        }
    }

    /// For each b: nonzero (i, k, offset) of T(i, b, k).
    fn slices(&self) -> Vec<Vec<(usize, usize, usize)>> {
        let [_, b, _] = self.t.dims();
        let mut s = vec![Vec::new(); b];
        for (i, j, k, _) in self.t.nonzeros() {
            s[j].push((i, k, self.t.offset(i, j, k)));
        }
        s
    }

    /// Dense matrix of the whole map over Q (small cases only).
    pub fn to_dense(&self) -> Matrix<Rational> {
        let mut m: Matrix<Rational> = Matrix::zeros(self.target_dim(), self.source_dim());
        let slices = self.slices();
        let mut buf = Vec::new();
        for col in 0..self.source_dim() {
            self.column(col, &slices, &mut buf);
            for &(row, off, sign) in &buf {
                let v = self.t.entries()[off].clone() * Rational::from_integer(sign.into());
                let cur = m.get(row, col).clone();
                m.set(row, col, cur + v);
            }
        }
        m
    }

    /// Rank modulo one prime, summed over blocks.
    pub fn rank_mod(&self, f: PrimeField) -> Option<usize> {
        let vals = self.t.reduce_mod(f)?;
        let slices = self.slices();
        let mut local = vec![usize::MAX; self.target_dim()];
        let mut buf = Vec::new();
        let mut total = 0;
        for block in &self.blocks {
            for (li, &r) in block.rows.iter().enumerate() {
                local[r] = li;
            }
            let mut m = ModMatrix::zeros(f, block.rows.len(), block.cols.len());
            for (lc, &col) in block.cols.iter().enumerate() {
                self.column(col, &slices, &mut buf);
                for &(row, off, sign) in &buf {
                    let v = if sign > 0 { vals[off] } else { f.neg(vals[off]) };
                    m.add_to(local[row], lc, v);
                }
            }
            total += m.rank_in_place();
        }
        Some(total)
    }

    /// Exact rank over Q, block by block.
    pub fn rank_exact(&self) -> usize {
        let slices = self.slices();
        let mut local = vec![usize::MAX; self.target_dim()];
        let mut buf = Vec::new();
        let mut total = 0;
        for block in &self.blocks {
            for (li, &r) in block.rows.iter().enumerate() {
                local[r] = li;
            }
            let mut m: Matrix<Rational> = Matrix::zeros(block.rows.len(), block.cols.len());
            for (lc, &col) in block.cols.iter().enumerate() {
                self.column(col, &slices, &mut buf);
                for &(row, off, sign) in &buf {
                    let v = self.t.entries()[off].clone() * Rational::from_integer(sign.into());
                    let cur = m.get(local[row], lc).clone();
                    m.set(local[row], lc, cur + v);
                }
            }
            total += m.mat_rank();
        }
        total
    }
}

/// Matrix of T_A^{∧p}: columns index B*⊗ΛᵖA, rows index Λᵖ⁺¹A⊗C.
pub fn koszul_map(t: &Tensor3<Rational>, p: usize) -> Result<Matrix<Rational>> {
    Ok(KoszulMap::new(t, p)?.to_dense())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RankPolicy {
    TwoPrime,
    Exact,
}

/// Limits on what a single Koszul computation may attempt.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeBudget {
    /// Maximum source·target entries of the whole map.
    pub max_entries: u64,
    /// Maximum entries of one dense block (8 bytes each).
    pub max_block_entries: u64,
}

impl Default for SizeBudget {
    fn default() -> Self {
        SizeBudget { max_entries: 10_000_000_000, max_block_entries: 100_000_000 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum RowStatus {
    Computed,
    Skipped { reason: String },
}

/// One row of a Koszul table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KoszulReport {
    pub p: usize,
    pub k: Option<usize>,
    pub source_dim: usize,
    pub target_dim: usize,
    pub rank: usize,
    pub kernel: usize,
    pub bound: u64,
    pub certification: Option<Certification>,
    pub primes: Vec<u64>,
    pub blocks: usize,
    pub largest_block: (usize, usize),
    #[serde(flatten)]
    pub status: RowStatus,
}

impl KoszulReport {
    pub fn is_computed(&self) -> bool {
        self.status == RowStatus::Computed
    }
}

/// How ranks are obtained; `cache` memoizes certified ranks by content hash.
#[derive(Clone, Copy)]
pub struct RankConfig<'c> {
    pub policy: RankPolicy,
    pub budget: SizeBudget,
    pub cache: Option<&'c crate::cache::RankCache>,
}

impl Default for RankConfig<'_> {
    fn default() -> Self {
        RankConfig { policy: RankPolicy::TwoPrime, budget: SizeBudget::default(), cache: None }
    }
}

/// ⌈rank / C(a−1, p)⌉.
pub fn bound_from_rank(rank: usize, a: usize, p: usize) -> u64 {
    let d = binomial(a - 1, p);
    (rank as u64).div_ceil(d)
}

/// Koszul bound of `t` (restricted to a generic k-dimensional A if `k` is given).
const SMALL_PRIME_BLOCK: usize = 1024;

pub fn koszul_bound(t: &Tensor3<Rational>, p: usize, k: Option<usize>, seed: u64, cfg: &RankConfig) -> Result<KoszulReport> {
    let restricted;
    let t = match k {
        Some(k) => {
            restricted = t.restrict_generic(Factor::A, k, seed)?;
            &restricted
        }
        None => t,
    };
    let map = KoszulMap::new(t, p)?;
    let (source_dim, target_dim) = (map.source_dim(), map.target_dim());
    let largest = map.largest_block();
    let mut report = KoszulReport {
        p,
        k,
        source_dim,
        target_dim,
        rank: 0,
        kernel: 0,
        bound: 0,
        certification: None,
        primes: vec![],
        blocks: map.blocks.len(),
        largest_block: largest,
        status: RowStatus::Computed,
    };
    let total = source_dim as u64 * target_dim as u64;
    let block = largest.0 as u64 * largest.1 as u64;
    if total > cfg.budget.max_entries || block > cfg.budget.max_block_entries {
        report.status = RowStatus::Skipped {
            reason: format!(
                "size budget: {}x{} map, largest dense block {}x{}",
                target_dim, source_dim, largest.0, largest.1
            ),
        };
        return Ok(report);
    }
    let certified = match cfg.policy {
        RankPolicy::Exact => {
            CertifiedRank { rank: map.rank_exact(), primes: vec![], ranks: vec![], certification: Certification::Exact }
        }
        RankPolicy::TwoPrime => {
            // Large dense blocks use primes small enough for the f64 kernel.
            let stream = || match largest.0.min(largest.1) >= SMALL_PRIME_BLOCK {
                true => PrimeStream::with_bits(seed, 22),
                false => PrimeStream::new(seed),
            };
            let compute = || certified_rank(&mut stream(), |f| map.rank_mod(f));
            match cfg.cache {
                Some(cache) => cache.get_or_compute(&crate::cache::rank_key(t, p, k, seed), compute),
                None => compute(),
            }
        }
    };
    report.rank = certified.rank;
    report.kernel = source_dim - certified.rank;
    report.bound = bound_from_rank(certified.rank, t.dims()[0], p);
    report.certification = Some(certified.certification);
    report.primes = certified.primes;
    Ok(report)
}

/// Which generic restriction each row uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KRule {
    /// No restriction.
    Unrestricted,
    /// k = 2p + 1.
    TwoPPlusOne,
    Fixed(usize),
}

impl KRule {
    pub fn k_for(self, p: usize) -> Option<usize> {
        match self {
            KRule::Unrestricted => None,
            KRule::TwoPPlusOne => Some(2 * p + 1),
            KRule::Fixed(k) => Some(k),
        }
    }
}

pub fn koszul_table(
    t: &Tensor3<Rational>,
    ps: impl IntoIterator<Item = usize>,
    rule: KRule,
    seed: u64,
    cfg: &RankConfig,
) -> Result<Vec<KoszulReport>> {
    ps.into_iter().map(|p| koszul_bound(t, p, rule.k_for(p), seed, cfg)).collect()
}

/// Whether a matrix is identically zero (used by callers checking degenerate maps).
pub fn is_zero_map(m: &Matrix<Rational>) -> bool {
    m.entries().iter().all(|v| v.is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::build_sl;
    use crate::tensor::structure_tensor;

    #[test]
    fn colex_order_and_ranks() {
        let e = ExteriorBasis::new(4, 2);
        let subsets: Vec<Vec<usize>> = (0..e.len()).map(|r| e.subset(r).to_vec()).collect();
        assert_eq!(subsets, vec![vec![0, 1], vec![0, 2], vec![1, 2], vec![0, 3], vec![1, 3], vec![2, 3]]);
        for (r, s) in subsets.iter().enumerate() {
            assert_eq!(e.rank_of(s), r);
        }
        assert_eq!(ExteriorBasis::new(3, 0).len(), 1);
    }

    #[test]
    fn wedge_signs() {
        let e = ExteriorBasis::new(4, 2);
        assert_eq!(e.wedge(&[0, 1], 2), Some((1, vec![0, 1, 2])));
        assert_eq!(e.wedge(&[1, 2], 0), Some((1, vec![0, 1, 2])));
        assert_eq!(e.wedge(&[0, 2], 1), Some((-1, vec![0, 1, 2])));
        assert_eq!(e.wedge(&[0, 2], 2), None);
    }

    #[test]
    fn sl3_first_row() {
        let t = structure_tensor(&build_sl(3).unwrap());
        let r = koszul_bound(&t, 1, None, 0, &RankConfig::default()).unwrap();
        assert_eq!((r.source_dim, r.target_dim, r.kernel, r.bound), (64, 224, 0, 10));
        assert_eq!(r.certification, Some(Certification::TwoPrime));
    }

    #[test]
    fn p_out_of_range() {
        let t = structure_tensor(&build_sl(2).unwrap());
        assert!(KoszulMap::new(&t, 3).is_err());
    }

    #[test]
    fn blocks_agree_with_dense_rank() {
        let t = structure_tensor(&build_sl(3).unwrap());
        let map = KoszulMap::new(&t, 2).unwrap();
        assert!(map.blocks.len() > 1);
        assert_eq!(map.rank_exact(), map.to_dense().mat_rank());
    }
}
