//! Dense order-3 tensors.

use crate::error::{Error, Result};
use crate::field::{Field, PrimeField, Rational};
use crate::lie::{LieAlgebra, WeightLabel};
use crate::linalg::{MatRank, Matrix};
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Factor {
    A,
    B,
    C,
}

impl Factor {
    pub const ALL: [Factor; 3] = [Factor::A, Factor::B, Factor::C];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn letter(self) -> char {
        ['A', 'B', 'C'][self.index()]
    }
}

/// Per-factor weights making the tensor homogeneous:
/// w_A(i) + w_B(j) + w_C(k) = 0 whenever T(i,j,k) ≠ 0.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grading {
    pub factors: [Vec<WeightLabel>; 3],
}

/// Dense tensor in A⊗B⊗C, stored with the C index fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor3<S> {
    dims: [usize; 3],
    entries: Vec<S>,
    pub provenance: String,
    grading: Option<Grading>,
}

impl<S: Clone + Zero> Tensor3<S> {
    pub fn zeros(dims: [usize; 3]) -> Self {
        Tensor3 { dims, entries: vec![S::zero(); dims[0] * dims[1] * dims[2]], provenance: String::new(), grading: None }
    }

    pub fn from_entries(dims: [usize; 3], entries: Vec<S>) -> Result<Self> {
        if entries.len() != dims[0] * dims[1] * dims[2] {
            return Err(Error::DimensionMismatch(format!("{} entries for dims {:?}", entries.len(), dims)));
        }
        Ok(Tensor3 { dims, entries, provenance: String::new(), grading: None })
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn entries(&self) -> &[S] {
        &self.entries
    }

    #[inline]
    pub fn offset(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.dims[1] + j) * self.dims[2] + k
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> &S {
        &self.entries[self.offset(i, j, k)]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, v: S) {
        let o = self.offset(i, j, k);
        self.entries[o] = v;
    }

    pub fn grading(&self) -> Option<&Grading> {
        self.grading.as_ref()
    }

    /// Attaches a grading; it must make every nonzero entry weight-zero.
    pub fn with_grading(mut self, grading: Grading) -> Result<Self> {
        for f in 0..3 {
            if grading.factors[f].len() != self.dims[f] {
                return Err(Error::DimensionMismatch("grading length differs from factor dim".into()));
            }
        }
        for (i, j, k, _) in self.nonzeros() {
            let w = grading.factors[0][i].add(&grading.factors[1][j]).add(&grading.factors[2][k]);
            if !w.is_zero() {
                return Err(Error::InvalidArgument(format!("entry ({i},{j},{k}) is not weight-homogeneous")));
            }
        }
        self.grading = Some(grading);
        Ok(self)
    }

    pub fn without_grading(mut self) -> Self {
        self.grading = None;
        self
    }

    pub fn with_provenance(mut self, p: impl Into<String>) -> Self {
        self.provenance = p.into();
        self
    }

    /// Nonzero entries as (i, j, k, value).
    pub fn nonzeros(&self) -> impl Iterator<Item = (usize, usize, usize, &S)> + '_ {
        let [_, b, c] = self.dims;
        self.entries.iter().enumerate().filter(|(_, v)| !v.is_zero()).map(move |(o, v)| (o / (b * c), (o / c) % b, o % c, v))
    }

    /// Slice with first index fixed: rows indexed by B, columns by C.
    pub fn slice(&self, i: usize) -> Matrix<S> {
        let [_, b, c] = self.dims;
        Matrix::from_vec(b, c, self.entries[i * b * c..(i + 1) * b * c].to_vec())
    }

    /// Coordinate flattening as a map from the chosen factor's dual: column x
    /// holds the slice at index x of that factor, flattened over the other two
    /// factors in their natural order.
    pub fn flatten(&self, factor: Factor) -> Matrix<S> {
        let f = factor.index();
        let others: Vec<usize> = (0..3).filter(|&g| g != f).collect();
        let (d1, d2) = (self.dims[others[0]], self.dims[others[1]]);
        let mut m = Matrix::zeros(d1 * d2, self.dims[f]);
        for (i, j, k, v) in self.nonzeros() {
            let idx = [i, j, k];
            m.set(idx[others[0]] * d2 + idx[others[1]], idx[f], v.clone());
        }
        m
    }

    /// Inverse of [`Tensor3::flatten`].
    pub fn unflatten(m: &Matrix<S>, factor: Factor, dims: [usize; 3]) -> Result<Self> {
        let f = factor.index();
        let others: Vec<usize> = (0..3).filter(|&g| g != f).collect();
        let d2 = dims[others[1]];
        if m.cols() != dims[f] || m.rows() != dims[others[0]] * d2 {
            return Err(Error::DimensionMismatch("flattening shape does not match dims".into()));
        }
        let mut t = Tensor3::zeros(dims);
        for r in 0..m.rows() {
            for x in 0..m.cols() {
                let mut idx = [0; 3];
                idx[f] = x;
                idx[others[0]] = r / d2;
                idx[others[1]] = r % d2;
                t.set(idx[0], idx[1], idx[2], m.get(r, x).clone());
            }
        }
        Ok(t)
    }

    /// Re-indexes so that factor slot s of the result is factor `perm[s]` of `self`.
    pub fn permute_factors(&self, perm: [usize; 3]) -> Result<Self> {
        let mut seen = [false; 3];
        for &p in &perm {
            if p > 2 || seen[p] {
                return Err(Error::InvalidArgument(format!("{perm:?} is not a permutation")));
            }
            seen[p] = true;
        }
        let dims = [self.dims[perm[0]], self.dims[perm[1]], self.dims[perm[2]]];
        let mut t = Tensor3::zeros(dims);
        for (i, j, k, v) in self.nonzeros() {
            let idx = [i, j, k];
            t.set(idx[perm[0]], idx[perm[1]], idx[perm[2]], v.clone());
        }
        t.provenance = self.provenance.clone();
        t.grading = self.grading.as_ref().map(|g| Grading {
            factors: [g.factors[perm[0]].clone(), g.factors[perm[1]].clone(), g.factors[perm[2]].clone()],
        });
        Ok(t)
    }

    pub fn map<T: Clone + Zero>(&self, f: impl Fn(&S) -> T) -> Tensor3<T> {
        Tensor3 {
            dims: self.dims,
            entries: self.entries.iter().map(f).collect(),
            provenance: self.provenance.clone(),
            grading: self.grading.clone(),
        }
    }
}

impl<F: Field> Tensor3<F> {
    /// Rank-one tensor a⊗b⊗c.
    pub fn outer(a: &[F], b: &[F], c: &[F]) -> Self {
        let mut t = Tensor3::zeros([a.len(), b.len(), c.len()]);
        for (i, x) in a.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
            for (j, y) in b.iter().enumerate().filter(|(_, y)| !y.is_zero()) {
                let xy = x.clone() * y.clone();
                for (k, z) in c.iter().enumerate() {
                    t.set(i, j, k, xy.clone() * z.clone());
                }
            }
        }
        t
    }

    pub fn add(&self, o: &Tensor3<F>) -> Result<Self> {
        if self.dims != o.dims {
            return Err(Error::DimensionMismatch(format!("{:?} vs {:?}", self.dims, o.dims)));
        }
        let entries = self.entries.iter().zip(&o.entries).map(|(a, b)| a.clone() + b.clone()).collect();
        Ok(Tensor3 { dims: self.dims, entries, provenance: self.provenance.clone(), grading: None })
    }

    pub fn scale(&self, s: &F) -> Self {
        self.map(|v| v.clone() * s.clone())
    }

    /// Quotient of one factor by span(annihilated).
    ///
    /// The annihilated vectors are row-reduced; their pivot coordinates are
    /// dropped and the remaining coordinates form the quotient basis.
    pub fn restrict_factor(&self, factor: Factor, annihilated: &[Vec<F>]) -> Result<Self> {
        let f = factor.index();
        let n = self.dims[f];
        if annihilated.is_empty() {
            return Ok(self.clone());
        }
        if annihilated.iter().any(|v| v.len() != n) {
            return Err(Error::DimensionMismatch(format!("annihilated vectors must have length {n}")));
        }
        let (rref, pivots) = Matrix::from_rows(annihilated, n).rref();
        if pivots.len() < annihilated.len() {
            return Err(Error::Dependent);
        }
        let keep: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
        // Quotient coordinates: image of e_p (p a pivot) is −Σ_{j kept} rref[p][j] e_j.
        let mut proj = Matrix::<F>::zeros(keep.len(), n);
        for (new, &old) in keep.iter().enumerate() {
            proj.set(new, old, F::one());
        }
        for (r, &p) in pivots.iter().enumerate() {
            for (new, &old) in keep.iter().enumerate() {
                let c = rref.get(r, old);
                if !c.is_zero() {
                    proj.set(new, p, -c.clone());
                }
            }
        }
        let mut out = self.apply_to_factor(factor, &proj);
        if let Some(g) = &self.grading {
            let homogeneous = (0..proj.rows()).all(|r| {
                let w = &g.factors[f][keep[r]];
                (0..n).all(|c| proj.get(r, c).is_zero() || &g.factors[f][c] == w)
            });
            if homogeneous {
                let mut factors = g.factors.clone();
                factors[f] = keep.iter().map(|&c| g.factors[f][c].clone()).collect();
                out.grading = Some(Grading { factors });
            }
        }
        Ok(out)
    }

    /// Applies a linear map (rows = new coordinates) to one factor.
    pub fn apply_to_factor(&self, factor: Factor, m: &Matrix<F>) -> Self {
        let f = factor.index();
        assert_eq!(m.cols(), self.dims[f]);
        let mut dims = self.dims;
        dims[f] = m.rows();
        let mut out: Tensor3<F> = Tensor3::zeros(dims);
        for (i, j, k, v) in self.nonzeros() {
            let idx = [i, j, k];
            for r in 0..m.rows() {
                let c = m.get(r, idx[f]);
                if c.is_zero() {
                    continue;
                }
                let mut t = idx;
                t[f] = r;
                let o = out.offset(t[0], t[1], t[2]);
                out.entries[o] = out.entries[o].clone() + c.clone() * v.clone();
            }
        }
        out.provenance = self.provenance.clone();
        out
    }

    /// Rank of each coordinate flattening.
    pub fn flattening_ranks(&self) -> [usize; 3] {
        Factor::ALL.map(|f| self.flatten(f).rank_gauss())
    }

    /// Per-factor conciseness: flattening rank equals the factor dimension.
    pub fn is_concise(&self) -> [bool; 3] {
        let r = self.flattening_ranks();
        [0, 1, 2].map(|f| r[f] == self.dims[f])
    }
}

impl Tensor3<Rational> {
    /// Restriction along k random covectors of the factor's dual, given by a
    /// seeded integer k×dim matrix with entries in [−9, 9].
    ///
    /// For k > dim the covectors are dependent and the result is not concise
    /// in that factor; this is what a generic k-plane of a larger ambient
    /// space looks like after an earlier restriction.
    pub fn restrict_generic(&self, factor: Factor, k: usize, seed: u64) -> Result<Self> {
        let n = self.dims[factor.index()];
        if k == 0 || n == 0 {
            return Err(Error::InvalidArgument(format!("cannot restrict factor of dimension {n} to k = {k}")));
        }
        let m = generic_matrix(k, n, seed);
        let mut out = self.apply_to_factor(factor, &m);
        out.grading = None;
        out.provenance = format!("{} restricted {} k={k} seed={seed}", self.provenance, factor.letter());
        Ok(out)
    }

    /// Entries reduced modulo p, or `None` if p divides a denominator.
    pub fn reduce_mod(&self, f: PrimeField) -> Option<Vec<u64>> {
        self.entries.iter().map(|q| if q.is_zero() { Some(0) } else { f.from_rational(q) }).collect()
    }

    /// All three flattenings have full rank (exact).
    pub fn concise_exact(&self) -> [bool; 3] {
        Factor::ALL.map(|f| self.flatten(f).mat_rank() == self.dims[f.index()])
    }
}

/// Seeded k×n integer matrix of rank min(k, n) with entries in [−9, 9].
pub fn generic_matrix(k: usize, n: usize, seed: u64) -> Matrix<Rational> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    loop {
        let data: Vec<Rational> = (0..k * n).map(|_| Rational::from_i64(rng.gen_range(-9..=9))).collect();
        let m = Matrix::from_vec(k, n, data);
        if m.mat_rank() == k.min(n) {
            return m;
        }
    }
}

/// Structure tensor T(i,j,k) = A_ij^k, graded by weights: the first two
/// factors are copies of g* and the third is g.
pub fn structure_tensor<F: Field>(g: &LieAlgebra) -> Tensor3<F> {
    let d = g.dim;
    let mut t = Tensor3::zeros([d, d, d]);
    for i in 0..d {
        for j in 0..d {
            for (k, v) in g.bracket(i, j) {
                t.set(i, j, *k, F::from_rational(v));
            }
        }
    }
    let dual: Vec<WeightLabel> = g.weights.iter().map(|w| w.neg()).collect();
    let grading = Grading { factors: [dual.clone(), dual, g.weights.clone()] };
    t.with_grading(grading).expect("brackets respect weights").with_provenance(format!("T_{}", g.name))
}

/// JSON form: sparse entries with values as strings.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TensorJson {
    pub dims: [usize; 3],
    pub field: String,
    pub entries: Vec<(usize, usize, usize, String)>,
    #[serde(default)]
    pub basis_labels: Vec<String>,
}

impl Tensor3<Rational> {
    pub fn to_json(&self, basis_labels: Vec<String>) -> TensorJson {
        TensorJson {
            dims: self.dims,
            field: "rational".into(),
            entries: self.nonzeros().map(|(i, j, k, v)| (i, j, k, v.to_string())).collect(),
            basis_labels,
        }
    }

    pub fn from_json(j: &TensorJson) -> Result<Self> {
        let mut t = Tensor3::zeros(j.dims);
        for (n, (i, a, k, v)) in j.entries.iter().enumerate() {
            if *i >= j.dims[0] || *a >= j.dims[1] || *k >= j.dims[2] {
                return Err(Error::parse(format!("entries[{n}]"), "index out of range"));
            }
            t.set(*i, *a, *k, crate::field::parse_rational(v)?);
        }
        Ok(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::build_sl;

    fn q(v: i64) -> Rational {
        Rational::from_i64(v)
    }

    #[test]
    fn sl2_structure_tensor_entries() {
        let t: Tensor3<Rational> = structure_tensor(&build_sl(2).unwrap());
        let mut vals: Vec<i64> = t.nonzeros().map(|(_, _, _, v)| v.to_integer().try_into().unwrap()).collect();
        vals.sort();
        assert_eq!(vals, vec![-2, -2, -1, 1, 2, 2]);
    }

    #[test]
    fn rank_one_flattenings() {
        let t = Tensor3::outer(&[q(1), q(2)], &[q(0), q(3)], &[q(1), q(1)]);
        assert_eq!(t.flattening_ranks(), [1, 1, 1]);
        assert_eq!(t.is_concise(), [false, false, false]);
        assert_eq!(Tensor3::<Rational>::zeros([2, 2, 2]).is_concise(), [false; 3]);
    }

    #[test]
    fn swapping_first_two_factors_negates_structure_tensor() {
        let t: Tensor3<Rational> = structure_tensor(&build_sl(3).unwrap());
        let s = t.permute_factors([1, 0, 2]).unwrap();
        assert!(s.add(&t).unwrap().entries().iter().all(|v| v.is_zero()));
        assert_eq!(s.permute_factors([1, 0, 2]).unwrap().entries(), t.entries());
        assert!(t.permute_factors([0, 0, 1]).is_err());
    }

    #[test]
    fn restrict_nothing_and_dependent() {
        let t: Tensor3<Rational> = structure_tensor(&build_sl(2).unwrap());
        assert_eq!(t.restrict_factor(Factor::A, &[]).unwrap(), t);
        let v = vec![q(1), q(0), q(0)];
        assert_eq!(t.restrict_factor(Factor::A, &[v.clone(), v]), Err(Error::Dependent));
    }

    #[test]
    fn coordinate_quotient_keeps_grading() {
        let g = build_sl(3).unwrap();
        let t: Tensor3<Rational> = structure_tensor(&g);
        let mut v = vec![q(0); 8];
        v[6] = q(-1);
        let r = t.restrict_factor(Factor::A, &[v]).unwrap();
        assert_eq!(r.dims(), [7, 8, 8]);
        assert!(r.grading().is_some());
        assert_eq!(r.slice(5), t.slice(5));
        assert_eq!(r.slice(6), t.slice(7));
    }

    #[test]
    fn json_round_trip() {
        let t: Tensor3<Rational> = structure_tensor(&build_sl(2).unwrap());
        let j = t.to_json(vec![]);
        let back = Tensor3::from_json(&serde_json::from_str(&serde_json::to_string(&j).unwrap()).unwrap()).unwrap();
        assert_eq!(back.entries(), t.entries());
    }
}
