use super::borel::BorelCandidate;
use super::poset::WeightPoset;
use crate::error::{Error, Result};
use crate::field::{PrimeStream, Rational};
use crate::lie::{dual_pairing, LieAlgebra, WeightLabel};
use crate::linalg::{certified_rank, Certification, Matrix, ModMatrix};
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};

/// Monomials of a fixed degree: sorted variable tuples in lexicographic order.
#[derive(Clone, Debug)]
pub struct MonomialBasis {
    monomials: Vec<Vec<usize>>,
    index: HashMap<Vec<usize>, usize>,
}

impl MonomialBasis {
    pub fn new(nvars: usize, degree: usize) -> Self {
        let mut monomials = Vec::new();
        let mut cur = Vec::with_capacity(degree);
        fn rec(nvars: usize, degree: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if cur.len() == degree {
                out.push(cur.clone());
                return;
            }
            for v in start..nvars {
                cur.push(v);
                rec(nvars, degree, v, cur, out);
                cur.pop();
            }
        }
        rec(nvars, degree, 0, &mut cur, &mut monomials);
        let index = monomials.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
        MonomialBasis { monomials, index }
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn monomial(&self, i: usize) -> &[usize] {
        &self.monomials[i]
    }

    /// Index of a monomial given as a sorted tuple.
    pub fn index_of(&self, m: &[usize]) -> Option<usize> {
        self.index.get(m).copied()
    }
}

/// Basis of S^a A*⊗S^b B*⊗S^c C*, with the C monomial varying fastest.
#[derive(Clone, Debug)]
pub struct GradedPiece {
    pub degree: [usize; 3],
    pub factor_dims: [usize; 3],
    bases: [MonomialBasis; 3],
}

impl GradedPiece {
    pub fn new(degree: [usize; 3], factor_dims: [usize; 3]) -> Self {
        let bases = [0, 1, 2].map(|f| MonomialBasis::new(factor_dims[f], degree[f]));
        GradedPiece { degree, factor_dims, bases }
    }

    pub fn len(&self) -> usize {
        self.bases.iter().map(MonomialBasis::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn split(&self, idx: usize) -> [usize; 3] {
        let (nb, nc) = (self.bases[1].len(), self.bases[2].len());
        [idx / (nb * nc), (idx / nc) % nb, idx % nc]
    }

    pub fn join(&self, m: [usize; 3]) -> usize {
        (m[0] * self.bases[1].len() + m[1]) * self.bases[2].len() + m[2]
    }

    pub fn basis(&self, f: usize) -> &MonomialBasis {
        &self.bases[f]
    }
}

/// A numeric graded subspace in the coordinates of a [`GradedPiece`].
#[derive(Clone, Debug)]
pub struct CandidateSpace {
    pub degree: [usize; 3],
    pub factor_dims: [usize; 3],
    pub basis: Vec<Vec<Rational>>,
    pub profile: Vec<(WeightLabel, usize)>,
}

impl CandidateSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// The zero subspace of a graded piece.
    pub fn zero(degree: [usize; 3], factor_dims: [usize; 3]) -> Self {
        CandidateSpace { degree, factor_dims, basis: vec![], profile: vec![] }
    }

    pub fn from_candidate(poset: &WeightPoset, cand: &BorelCandidate, sample: u64) -> Result<Self> {
        let grading = poset.grading.ok_or_else(|| Error::InvalidArgument("poset has no multidegree".into()))?;
        Ok(CandidateSpace {
            degree: grading.degree,
            factor_dims: grading.factor_dims,
            basis: cand.ambient_basis(poset, sample),
            profile: cand.profile.clone(),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rigor {
    /// Parameter-free candidate, rank certified by two primes.
    Exact,
    /// Parameterized family decided by majority over sampled instances.
    Sampled,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ApolarityOutcome {
    /// Target multidegree label such as "(210)".
    pub stage: String,
    pub candidates: Vec<usize>,
    pub image_codim: usize,
    pub passed: bool,
    pub rigor: Rigor,
    /// Codimension of every sampled instance (one entry when exact).
    pub sample_codims: Vec<usize>,
    pub certification: Certification,
}

pub fn stage_label(d: [usize; 3]) -> String {
    if d.iter().all(|&x| x < 10) {
        format!("({}{}{})", d[0], d[1], d[2])
    } else {
        format!("({},{},{})", d[0], d[1], d[2])
    }
}

/// Columns of the multiplication map space ⊗ X* → target, where X is the
/// factor whose degree goes up by one.
pub fn multiply_into(space: &CandidateSpace, target: [usize; 3]) -> Result<(usize, Vec<BTreeMap<usize, Rational>>)> {
    let raised: Vec<usize> = (0..3).filter(|&f| target[f] == space.degree[f] + 1).collect();
    let same = (0..3).filter(|&f| target[f] == space.degree[f]).count();
    if raised.len() != 1 || same != 2 {
        return Err(Error::InvalidArgument(format!(
            "target degree {} is not one step above {}",
            stage_label(target),
            stage_label(space.degree)
        )));
    }
    let f = raised[0];
    let src = GradedPiece::new(space.degree, space.factor_dims);
    let dst = GradedPiece::new(target, space.factor_dims);
    let mut cols = Vec::with_capacity(space.dim() * space.factor_dims[f]);
    for v in &space.basis {
        if v.len() != src.len() {
            return Err(Error::DimensionMismatch(format!("vector of length {} in a piece of dim {}", v.len(), src.len())));
        }
        for x in 0..space.factor_dims[f] {
            let mut col: BTreeMap<usize, Rational> = BTreeMap::new();
            for (idx, c) in v.iter().enumerate().filter(|(_, c)| !c.is_zero()) {
                let mut m = src.split(idx);
                let mut mono = src.basis(f).monomial(m[f]).to_vec();
                let pos = mono.partition_point(|&y| y <= x);
                mono.insert(pos, x);
                m[f] = dst.basis(f).index_of(&mono).expect("monomial of target degree");
                *col.entry(dst.join(m)).or_insert_with(Rational::zero) += c.clone();
            }
            col.retain(|_, c| !c.is_zero());
            cols.push(col);
        }
    }
    Ok((dst.len(), cols))
}

/// Certified rank of a sparse column list over Q.
pub fn columns_rank(rows: usize, cols: &[BTreeMap<usize, Rational>], seed: u64) -> (usize, Certification) {
    let mut stream = PrimeStream::new(seed);
    let cr = certified_rank(&mut stream, |field| {
        let mut m = ModMatrix::zeros(field, rows, cols.len());
        for (c, col) in cols.iter().enumerate() {
            for (&r, v) in col {
                m.set(r, c, field.from_rational(v)?);
            }
        }
        Some(m.rank_in_place())
    });
    (cr.rank, cr.certification)
}

/// Codimension of the image of space ⊗ X* in the target piece.
pub fn image_codim(space: &CandidateSpace, target: [usize; 3], seed: u64) -> Result<(usize, Certification)> {
    let (rows, cols) = multiply_into(space, target)?;
    let (rank, cert) = columns_rank(rows, &cols, seed);
    Ok((rows - rank, cert))
}

fn weakest(a: Certification, b: Certification) -> Certification {
    match (a, b) {
        (Certification::Uncertified, _) | (_, Certification::Uncertified) => Certification::Uncertified,
        (Certification::TwoPrime, _) | (_, Certification::TwoPrime) => Certification::TwoPrime,
        _ => Certification::Exact,
    }
}

/// The (210)/(120)/... test: the image of the candidate times one more
/// factor must have codimension at least r. Parameterized candidates are
/// decided by majority over `samples` instances.
pub fn multiplication_test(
    poset: &WeightPoset,
    cand: &BorelCandidate,
    target: [usize; 3],
    r: usize,
    samples: usize,
    seed: u64,
) -> Result<ApolarityOutcome> {
    let n = if cand.parameterized { samples.max(1) } else { 1 };
    let mut codims = Vec::with_capacity(n);
    let mut cert = Certification::Exact;
    for s in 0..n as u64 {
        let space = CandidateSpace::from_candidate(poset, cand, s)?;
        let (codim, c) = image_codim(&space, target, seed)?;
        codims.push(codim);
        cert = weakest(cert, c);
    }
    let passes = codims.iter().filter(|&&c| c >= r).count();
    let passed = 2 * passes > n;
    // Representative codim: the generic (smallest) value among samples.
    let image_codim = *codims.iter().min().expect("at least one sample");
    Ok(ApolarityOutcome {
        stage: stage_label(target),
        candidates: vec![cand.id],
        image_codim,
        passed,
        rigor: if cand.parameterized { Rigor::Sampled } else { Rigor::Exact },
        sample_codims: codims,
        certification: cert,
    })
}

/// The (111) test on one numeric triple: the image of
/// F110⊗C* ⊕ F101⊗B* ⊕ F011⊗A* in A*⊗B*⊗C* must have codimension at least r.
pub fn triple_test(f110: &CandidateSpace, f101: &CandidateSpace, f011: &CandidateSpace, r: usize, seed: u64) -> Result<ApolarityOutcome> {
    let expect = [([1, 1, 0], f110), ([1, 0, 1], f101), ([0, 1, 1], f011)];
    let mut cols = Vec::new();
    let mut rows = 0;
    for (deg, space) in expect {
        if space.degree != deg || space.factor_dims != f110.factor_dims {
            return Err(Error::InvalidArgument(format!("expected a {} candidate", stage_label(deg))));
        }
        let (r, c) = multiply_into(space, [1, 1, 1])?;
        rows = r;
        cols.extend(c);
    }
    let (rank, certification) = columns_rank(rows, &cols, seed);
    let image_codim = rows - rank;
    Ok(ApolarityOutcome {
        stage: "(111)".into(),
        candidates: vec![],
        image_codim,
        passed: image_codim >= r,
        rigor: Rigor::Exact,
        sample_codims: vec![image_codim],
        certification,
    })
}

/// Second-factor map X ↦ −tr(X ·), from g-coordinates to g*-coordinates.
fn apply_second(m: &Matrix<Rational>, space: &CandidateSpace, degree: [usize; 3]) -> CandidateSpace {
    let d = m.rows();
    let basis = space
        .basis
        .iter()
        .map(|v| {
            let mut w = vec![Rational::zero(); d * d];
            for (idx, c) in v.iter().enumerate().filter(|(_, c)| !c.is_zero()) {
                let (i, j) = (idx / d, idx % d);
                for k in 0..d {
                    let e = m.get(j, k);
                    if !e.is_zero() {
                        w[i * d + k] += c.clone() * e.clone();
                    }
                }
            }
            w
        })
        .collect();
    CandidateSpace { degree, factor_dims: space.factor_dims, basis, profile: space.profile.clone() }
}

/// Skew-symmetry transfer of a (1,1,0) candidate of a structure tensor to
/// (1,0,1) and (0,1,1) candidates: apply the invariant pairing g → g* on the
/// second factor. Weights, hence profiles, are unchanged.
pub fn transfer_by_skew(g: &LieAlgebra, f110: &CandidateSpace) -> Result<(CandidateSpace, CandidateSpace)> {
    if f110.degree != [1, 1, 0] || f110.factor_dims != [g.dim; 3] {
        return Err(Error::InvalidArgument("transfer needs a (110) candidate of a structure tensor".into()));
    }
    let psi = dual_pairing(g);
    let f101 = apply_second(&psi, f110, [1, 0, 1]);
    let mut f011 = f101.clone();
    f011.degree = [0, 1, 1];
    Ok((f101, f011))
}

/// Inverse of [`transfer_by_skew`] on its (1,0,1) output.
pub fn transfer_back(g: &LieAlgebra, f101: &CandidateSpace) -> Result<CandidateSpace> {
    if f101.degree != [1, 0, 1] {
        return Err(Error::InvalidArgument("expected a (101) candidate".into()));
    }
    let inv = dual_pairing(g).inverse().ok_or(Error::Dependent)?;
    Ok(apply_second(&inv, f101, [1, 1, 0]))
}
