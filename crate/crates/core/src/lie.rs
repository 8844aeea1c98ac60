//! Classical Lie algebras sl_n and so_n in weight bases.

use crate::error::{Error, Result};
use crate::field::{Field, Rational};
use crate::linalg::Matrix;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Integer weight in the coordinates dual to the chosen Cartan basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WeightLabel(pub Vec<i64>);

impl WeightLabel {
    pub fn zero(rank: usize) -> Self {
        WeightLabel(vec![0; rank])
    }

    pub fn add(&self, o: &WeightLabel) -> WeightLabel {
        WeightLabel(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, o: &WeightLabel) -> WeightLabel {
        WeightLabel(self.0.iter().zip(&o.0).map(|(a, b)| a - b).collect())
    }

    pub fn neg(&self) -> WeightLabel {
        WeightLabel(self.0.iter().map(|a| -a).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&a| a == 0)
    }

    /// Parses `[1 0 1]`, `[1,0,-1]`, or `1 0 1`.
    pub fn parse(s: &str) -> Result<Self> {
        let body = s.trim().trim_start_matches('[').trim_end_matches(']');
        body.split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<i64>().map_err(|_| Error::parse(s, "weight entries must be integers")))
            .collect::<Result<Vec<_>>>()
            .map(WeightLabel)
    }
}

impl fmt::Display for WeightLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|a| a.to_string()).collect();
        write!(f, "[{}]", parts.join(" "))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    Sl,
    So,
}

/// How a tensor factor carries the algebra action.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModuleKind {
    Adjoint,
    /// The dual of the adjoint: (X·α)(v) = −α([X, v]).
    Dual,
}

impl ModuleKind {
    pub fn dual(self) -> Self {
        match self {
            ModuleKind::Adjoint => ModuleKind::Dual,
            ModuleKind::Dual => ModuleKind::Adjoint,
        }
    }
}

/// A matrix Lie algebra with a basis of weight vectors.
#[derive(Clone, Debug)]
pub struct LieAlgebra {
    pub name: String,
    pub family: Family,
    /// Size of the defining matrices.
    pub n: usize,
    pub dim: usize,
    pub ss_rank: usize,
    pub basis_labels: Vec<String>,
    basis: Vec<Matrix<Rational>>,
    brackets: Vec<Vec<(usize, Rational)>>,
    pub cartan_indices: Vec<usize>,
    /// Positive root vectors; the first `ss_rank` are the simple ones, in order.
    pub raising_indices: Vec<usize>,
    pub lowering_indices: Vec<usize>,
    pub weights: Vec<WeightLabel>,
}

fn unit(n: usize, a: usize, b: usize) -> Matrix<Rational> {
    let mut m = Matrix::zeros(n, n);
    m.set(a, b, Rational::one());
    m
}

fn lin(terms: &[(i64, &Matrix<Rational>)]) -> Matrix<Rational> {
    let n = terms[0].1.rows();
    let mut out: Matrix<Rational> = Matrix::zeros(n, n);
    for (c, m) in terms {
        for r in 0..n {
            for k in 0..n {
                let v = m.get(r, k);
                if !v.is_zero() {
                    let cur = out.get(r, k).clone();
                    out.set(r, k, cur + Rational::from_i64(*c) * v.clone());
                }
            }
        }
    }
    out
}

fn commutator(x: &Matrix<Rational>, y: &Matrix<Rational>) -> Matrix<Rational> {
    lin(&[(1, &x.mul(y)), (-1, &y.mul(x))])
}

fn trace(m: &Matrix<Rational>) -> Rational {
    (0..m.rows()).fold(Rational::zero(), |acc, i| acc + m.get(i, i).clone())
}

/// sl_n with basis e_i^j (i ≠ j) and h_i = e_i^i − e_{i+1}^{i+1}.
///
/// Basis order: matrix positions in row-major order, skipping (n, n), with the
/// diagonal position (i, i) holding h_i. For n = 3 this is
/// h1, e12, e13, e21, h2, e23, e31, e32.
pub fn build_sl(n: usize) -> Result<LieAlgebra> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("sl_n needs n >= 2, got {n}")));
    }
    let mut basis = Vec::new();
    let mut labels = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if a == n - 1 && b == n - 1 {
                continue;
            }
            if a == b {
                basis.push(lin(&[(1, &unit(n, a, a)), (-1, &unit(n, a + 1, a + 1))]));
                labels.push(format!("h{}", a + 1));
            } else {
                basis.push(unit(n, a, b));
                labels.push(format!("e{}{}", a + 1, b + 1));
            }
        }
    }
    let cartan: Vec<Matrix<Rational>> =
        (0..n - 1).map(|i| lin(&[(1, &unit(n, i, i)), (-1, &unit(n, i + 1, i + 1))])).collect();
    finish(format!("sl{n}"), Family::Sl, n, basis, labels, cartan)
}

/// so_n preserving the antidiagonal form, so the Cartan subalgebra is diagonal.
///
/// Root vectors are E_ij − E_j'i' with k' = n+1−k. The Cartan basis used for
/// weight coordinates is h_j = H_j − H_{j+1} (j < r) followed by H_r for odd n
/// or H_{r−1} + H_r for even n, where H_k = E_kk − E_k'k'.
pub fn build_so(n: usize) -> Result<LieAlgebra> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("so_n needs n >= 3, got {n}")));
    }
    let r = n / 2;
    let bar = |k: usize| n - 1 - k;
    let big_h = |k: usize| lin(&[(1, &unit(n, k, k)), (-1, &unit(n, bar(k), bar(k)))]);
    let mut cartan: Vec<Matrix<Rational>> = (0..r.saturating_sub(1)).map(|j| lin(&[(1, &big_h(j)), (-1, &big_h(j + 1))])).collect();
    cartan.push(if n % 2 == 1 || r == 1 { big_h(r - 1) } else { lin(&[(1, &big_h(r - 2)), (1, &big_h(r - 1))]) });

    let mut basis = Vec::new();
    let mut labels = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if a + b < n - 1 {
                basis.push(lin(&[(1, &unit(n, a, b)), (-1, &unit(n, bar(b), bar(a)))]));
                labels.push(format!("x{}{}", a + 1, b + 1));
            }
        }
    }
    for (j, h) in cartan.iter().enumerate() {
        basis.push(h.clone());
        labels.push(format!("h{}", j + 1));
    }
    let raising = basis.len() - cartan.len();
    for i in 0..raising {
        basis.push(basis[i].transpose());
        labels.push(labels[i].replace('x', "y"));
    }
    finish(format!("so{n}"), Family::So, n, basis, labels, cartan)
}

fn finish(
    name: String,
    family: Family,
    n: usize,
    basis: Vec<Matrix<Rational>>,
    basis_labels: Vec<String>,
    cartan: Vec<Matrix<Rational>>,
) -> Result<LieAlgebra> {
    let dim = basis.len();
    let ss_rank = cartan.len();
    let flat = Matrix::from_rows(&basis.iter().map(|m| m.entries().to_vec()).collect::<Vec<_>>(), n * n).transpose();
    let coords = |m: &Matrix<Rational>| -> Vec<Rational> {
        flat.solve(m.entries()).expect("bracket stays in the algebra")
    };
    let mut brackets = Vec::with_capacity(dim * dim);
    for x in &basis {
        for y in &basis {
            let c = coords(&commutator(x, y));
            brackets.push(c.into_iter().enumerate().filter(|(_, v)| !v.is_zero()).collect());
        }
    }
    let mut weights = Vec::with_capacity(dim);
    for (idx, x) in basis.iter().enumerate() {
        let mut w = Vec::with_capacity(ss_rank);
        for h in &cartan {
            let c = coords(&commutator(h, x));
            let lambda = c[idx].clone();
            debug_assert!(c.iter().enumerate().all(|(k, v)| k == idx || v.is_zero()));
            assert!(lambda.is_integer(), "weights are integral");
            w.push(lambda.to_integer().try_into().expect("small weight"));
        }
        weights.push(WeightLabel(w));
    }
    let upper = |m: &Matrix<Rational>| (0..n).all(|a| (0..=a).all(|b| m.get(a, b).is_zero())) && !m.is_zero();
    let lower = |m: &Matrix<Rational>| (0..n).all(|a| (a..n).all(|b| m.get(a, b).is_zero())) && !m.is_zero();
    let cartan_indices: Vec<usize> = (0..dim).filter(|&i| weights[i].is_zero()).collect();
    let positive: Vec<usize> = (0..dim).filter(|&i| upper(&basis[i])).collect();
    let lowering_indices: Vec<usize> = (0..dim).filter(|&i| lower(&basis[i])).collect();
    let is_sum = |w: &WeightLabel| {
        positive.iter().any(|&a| positive.iter().any(|&b| &weights[a].add(&weights[b]) == w))
    };
    let mut simple: Vec<usize> = positive.iter().copied().filter(|&i| !is_sum(&weights[i])).collect();
    // Order simple roots so the i-th one has its largest weight entry (2) in slot i.
    simple.sort_by_key(|&i| weights[i].0.iter().position(|&v| v == 2).unwrap_or(usize::MAX));
    let mut raising_indices = simple.clone();
    raising_indices.extend(positive.iter().copied().filter(|i| !simple.contains(i)));
    if simple.len() != ss_rank || cartan_indices.len() != ss_rank {
        return Err(Error::InvalidArgument(format!("{name}: root data inconsistent")));
    }
    Ok(LieAlgebra {
        name,
        family,
        n,
        dim,
        ss_rank,
        basis_labels,
        basis,
        brackets,
        cartan_indices,
        raising_indices,
        lowering_indices,
        weights,
    })
}

/// Builds an algebra from a name such as `sl3` or `so5`.
pub fn build_named(name: &str) -> Result<LieAlgebra> {
    let bad = || Error::InvalidArgument(format!("unknown algebra {name:?}; expected sl<n> or so<n>"));
    let (fam, n) = name.split_at(2.min(name.len()));
    let n: usize = n.parse().map_err(|_| bad())?;
    match fam {
        "sl" => build_sl(n),
        "so" => build_so(n),
        _ => Err(bad()),
    }
}

impl LieAlgebra {
    /// Sparse coordinates of [x_i, x_j].
    pub fn bracket(&self, i: usize, j: usize) -> &[(usize, Rational)] {
        &self.brackets[i * self.dim + j]
    }

    /// Defining-representation matrix of basis element `i`.
    pub fn matrix(&self, i: usize) -> &Matrix<Rational> {
        &self.basis[i]
    }

    /// Coordinates of a defining-representation matrix in this basis.
    pub fn coords(&self, m: &Matrix<Rational>) -> Option<Vec<Rational>> {
        let flat = Matrix::from_rows(&self.basis.iter().map(|b| b.entries().to_vec()).collect::<Vec<_>>(), self.n * self.n)
            .transpose();
        flat.solve(m.entries())
    }

    /// Matrix of ad(x_i): column j holds the coordinates of [x_i, x_j].
    pub fn ad(&self, i: usize) -> Matrix<Rational> {
        let mut m = Matrix::zeros(self.dim, self.dim);
        for j in 0..self.dim {
            for (k, v) in self.bracket(i, j) {
                m.set(*k, j, v.clone());
            }
        }
        m
    }

    /// Simple roots, in the order of the simple raising operators.
    pub fn simple_roots(&self) -> Vec<WeightLabel> {
        self.raising_indices[..self.ss_rank].iter().map(|&i| self.weights[i].clone()).collect()
    }

    /// Index of the basis vector with the given weight, if unique.
    pub fn index_of_weight(&self, w: &WeightLabel) -> Option<usize> {
        let hits: Vec<usize> = (0..self.dim).filter(|&i| &self.weights[i] == w).collect();
        (hits.len() == 1).then(|| hits[0])
    }

    /// Weight of basis vector `i` viewed in a module of the given kind.
    pub fn module_weight(&self, i: usize, kind: ModuleKind) -> WeightLabel {
        match kind {
            ModuleKind::Adjoint => self.weights[i].clone(),
            ModuleKind::Dual => self.weights[i].neg(),
        }
    }

    pub fn check_jacobi(&self) -> bool {
        let d = self.dim;
        let bracket_vec = |v: &[(usize, Rational)], k: usize| -> Vec<Rational> {
            let mut out = vec![Rational::zero(); d];
            for (m, c) in v {
                for (l, e) in self.bracket(*m, k) {
                    out[*l] += c.clone() * e.clone();
                }
            }
            out
        };
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let a = bracket_vec(self.bracket(i, j), k);
                    let b = bracket_vec(self.bracket(j, k), i);
                    let c = bracket_vec(self.bracket(k, i), j);
                    if (0..d).any(|l| !(a[l].clone() + b[l].clone() + c[l].clone()).is_zero()) {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// Coordinate matrix of X ↦ −Xᵀ, an involutive automorphism.
pub fn dual_identification(g: &LieAlgebra) -> Matrix<Rational> {
    let mut m = Matrix::zeros(g.dim, g.dim);
    for j in 0..g.dim {
        let image = g.matrix(j).transpose().map(|v| -v.clone());
        for (i, v) in g.coords(&image).expect("closed under negative transpose").into_iter().enumerate() {
            m.set(i, j, v);
        }
    }
    m
}

/// Gram matrix of the invariant form tr(XY) in the defining representation.
pub fn trace_form(g: &LieAlgebra) -> Matrix<Rational> {
    let mut m = Matrix::zeros(g.dim, g.dim);
    for i in 0..g.dim {
        for j in 0..g.dim {
            m.set(i, j, trace(&g.matrix(i).mul(g.matrix(j))));
        }
    }
    m
}

/// Identification g → g* sending X to the functional Y ↦ −tr(XY), i.e. the
/// entrywise pairing with −Xᵀ. Column j holds the dual-basis coordinates of
/// the image of x_j. It intertwines the adjoint and dual actions.
pub fn dual_pairing(g: &LieAlgebra) -> Matrix<Rational> {
    trace_form(g).map(|v| -v.clone())
}

/// Action of raising operator `raiser` on the tensor product of the given
/// modules, by the Leibniz rule. Rows and columns index the product basis in
/// row-major order (first factor slowest).
pub fn raising_action(g: &LieAlgebra, raiser: usize, signature: &[ModuleKind]) -> Result<Matrix<Rational>> {
    if !g.raising_indices.contains(&raiser) {
        return Err(Error::InvalidArgument(format!("basis index {raiser} is not a raising operator of {}", g.name)));
    }
    Ok(tensor_action(g, raiser, signature))
}

/// Leibniz action of any basis element on a tensor product of modules.
pub fn tensor_action(g: &LieAlgebra, x: usize, signature: &[ModuleKind]) -> Matrix<Rational> {
    let ad = g.ad(x);
    let factor = |kind: ModuleKind| match kind {
        ModuleKind::Adjoint => ad.clone(),
        ModuleKind::Dual => ad.transpose().map(|v| -v.clone()),
    };
    let d = g.dim;
    let total = d.pow(signature.len() as u32);
    let mut out: Matrix<Rational> = Matrix::zeros(total, total);
    for (pos, &kind) in signature.iter().enumerate() {
        let f = factor(kind);
        let stride = d.pow((signature.len() - 1 - pos) as u32);
        for col in 0..total {
            let digit = (col / stride) % d;
            for r in 0..d {
                let v = f.get(r, digit);
                if !v.is_zero() {
                    let row = col - digit * stride + r * stride;
                    let cur = out.get(row, col).clone();
                    out.set(row, col, cur + v.clone());
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: i64) -> Rational {
        Rational::from_i64(v)
    }

    #[test]
    fn sl2_relations() {
        let g = build_sl(2).unwrap();
        assert_eq!(g.basis_labels, vec!["h1", "e12", "e21"]);
        let (h, e, f) = (0, 1, 2);
        assert_eq!(g.bracket(h, e), &[(e, q(2))]);
        assert_eq!(g.bracket(e, f), &[(h, q(1))]);
        assert_eq!(g.bracket(h, f), &[(f, q(-2))]);
        assert_eq!(g.raising_indices, vec![e]);
    }

    #[test]
    fn sl3_basis_order_and_weights() {
        let g = build_sl(3).unwrap();
        assert_eq!(g.basis_labels, vec!["h1", "e12", "e13", "e21", "h2", "e23", "e31", "e32"]);
        assert_eq!(g.weights[2], WeightLabel(vec![1, 1]));
        assert_eq!(g.simple_roots(), vec![WeightLabel(vec![2, -1]), WeightLabel(vec![-1, 2])]);
        assert!(g.check_jacobi());
    }

    #[test]
    fn so_dimensions_and_labels() {
        let so4 = build_so(4).unwrap();
        assert_eq!((so4.dim, so4.ss_rank), (6, 2));
        let so5 = build_so(5).unwrap();
        assert_eq!((so5.dim, so5.ss_rank), (10, 2));
        assert!(so5.weights.contains(&WeightLabel(vec![0, 1])));
        assert!(so5.weights.contains(&WeightLabel(vec![1, 0])));
        assert!(so5.check_jacobi() && so4.check_jacobi());
        assert!(build_so(2).is_err() && build_sl(1).is_err());
    }

    #[test]
    fn dual_identification_on_sl2() {
        let g = build_sl(2).unwrap();
        let d = dual_identification(&g);
        // columns: images of h, e, f
        assert_eq!(d.get(0, 0), &q(-1));
        assert_eq!(d.get(2, 1), &q(-1));
        assert_eq!(d.get(1, 2), &q(-1));
        assert_eq!(d.mul(&d), Matrix::identity(3));
    }

    #[test]
    fn raising_on_sl2_adjoint() {
        let g = build_sl(2).unwrap();
        let m = raising_action(&g, 1, &[ModuleKind::Adjoint]).unwrap();
        // e ↦ 0, h ↦ −2e, f ↦ h
        assert!(m.apply(&[q(0), q(1), q(0)]).iter().all(|v| v.is_zero()));
        assert_eq!(m.apply(&[q(1), q(0), q(0)]), vec![q(0), q(-2), q(0)]);
        assert_eq!(m.apply(&[q(0), q(0), q(1)]), vec![q(1), q(0), q(0)]);
        assert!(raising_action(&g, 0, &[ModuleKind::Adjoint]).is_err());
    }

    #[test]
    fn weight_labels_parse() {
        assert_eq!(WeightLabel::parse("[1 0 -1]").unwrap(), WeightLabel(vec![1, 0, -1]));
        assert_eq!(WeightLabel::parse("[1,0,1]").unwrap().to_string(), "[1 0 1]");
        assert!(WeightLabel::parse("[a]").is_err());
    }
}
