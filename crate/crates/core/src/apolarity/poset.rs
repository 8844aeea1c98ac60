use crate::error::{Error, Result};
use crate::field::{Field, Rational};
use crate::lie::{LieAlgebra, ModuleKind, WeightLabel};
use crate::linalg::{perp, Matrix};
use crate::tensor::Tensor3;
use num_traits::Zero;
use std::collections::BTreeMap;

/// Factor kinds of a structure tensor: A and B are copies of g*, C is g.
pub const STRUCTURE_KINDS: [ModuleKind; 3] = [ModuleKind::Dual, ModuleKind::Dual, ModuleKind::Adjoint];

/// One weight space of a graded subspace of a tensor-product module.
#[derive(Clone, Debug)]
pub struct WeightSpace {
    pub weight: WeightLabel,
    /// Basis in ambient coordinates.
    pub basis: Vec<Vec<Rational>>,
}

impl WeightSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

/// Matrix of a simple raising operator between two weight spaces, in their
/// local bases (rows: target, columns: source).
#[derive(Clone, Debug)]
pub struct RaisingEdge {
    pub op: usize,
    pub from: usize,
    pub to: usize,
    pub block: Matrix<Rational>,
}

/// Weight decomposition of a submodule with its simple raising maps.
#[derive(Clone, Debug)]
pub struct WeightPoset {
    pub ambient_dim: usize,
    pub spaces: Vec<WeightSpace>,
    pub edges: Vec<RaisingEdge>,
    pub simple_roots: Vec<WeightLabel>,
    /// True when the spaces are dual coordinates of another poset.
    pub dualized: bool,
    /// Multidegree and factor dimensions when the ambient module is a
    /// graded piece S^a A*⊗S^b B*⊗S^c C* with a,b,c ≤ 1.
    pub grading: Option<PosetGrading>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct PosetGrading {
    pub degree: [usize; 3],
    pub factor_dims: [usize; 3],
}

/// Action of basis element `x` on a vector of a tensor-product module.
pub(crate) fn act(g: &LieAlgebra, x: usize, kinds: &[ModuleKind], u: &[Rational]) -> Vec<Rational> {
    let d = g.dim;
    let ad = g.ad(x);
    let mut out = vec![Rational::zero(); u.len()];
    for (pos, &kind) in kinds.iter().enumerate() {
        let stride = d.pow((kinds.len() - 1 - pos) as u32);
        for (idx, val) in u.iter().enumerate().filter(|(_, v)| !v.is_zero()) {
            let digit = (idx / stride) % d;
            for r in 0..d {
                let c = match kind {
                    ModuleKind::Adjoint => ad.get(r, digit).clone(),
                    ModuleKind::Dual => -ad.get(digit, r).clone(),
                };
                if !c.is_zero() {
                    let target = idx - digit * stride + r * stride;
                    out[target] += c * val.clone();
                }
            }
        }
    }
    out
}

fn product_weight(g: &LieAlgebra, kinds: &[ModuleKind], mut idx: usize) -> WeightLabel {
    let mut w = WeightLabel::zero(g.ss_rank);
    for &kind in kinds.iter().rev() {
        w = w.add(&g.module_weight(idx % g.dim, kind));
        idx /= g.dim;
    }
    w
}

impl WeightPoset {
    /// Graded subspace of ⊗ kinds cut out by linear constraints.
    ///
    /// `constraints` are functionals in ambient coordinates; each must be a
    /// weight vector of the dual so the solution space is graded.
    pub fn cut_out(g: &LieAlgebra, kinds: &[ModuleKind], constraints: &[Vec<Rational>]) -> Self {
        let n = g.dim.pow(kinds.len() as u32);
        let mut coords: BTreeMap<WeightLabel, Vec<usize>> = BTreeMap::new();
        for idx in 0..n {
            coords.entry(product_weight(g, kinds, idx)).or_default().push(idx);
        }
        let mut spaces = Vec::new();
        // Sort by decreasing height so raising edges point to earlier spaces.
        let height = height_functional(g);
        let mut weights: Vec<(WeightLabel, Vec<usize>)> = coords.into_iter().collect();
        weights.sort_by(|a, b| height(&b.0).cmp(&height(&a.0)).then(b.0.cmp(&a.0)));
        for (w, idxs) in weights {
            let rows: Vec<Vec<Rational>> = constraints
                .iter()
                .map(|c| idxs.iter().map(|&i| c[i].clone()).collect::<Vec<_>>())
                .filter(|r: &Vec<Rational>| r.iter().any(|v| !v.is_zero()))
                .collect();
            let local = if rows.is_empty() {
                (0..idxs.len()).map(|i| unit_vec(idxs.len(), i)).collect()
            } else {
                Matrix::from_rows(&rows, idxs.len()).kernel()
            };
            if local.is_empty() {
                continue;
            }
            let basis = local
                .into_iter()
                .map(|v| {
                    let mut full = vec![Rational::zero(); n];
                    for (c, &i) in v.into_iter().zip(&idxs) {
                        full[i] = c;
                    }
                    full
                })
                .collect();
            spaces.push(WeightSpace { weight: w, basis });
        }
        let mut poset = WeightPoset { ambient_dim: n, spaces, edges: vec![], simple_roots: g.simple_roots(), dualized: false, grading: None };
        poset.edges = poset.compute_edges(g, kinds);
        poset
    }

    /// The whole tensor-product module.
    pub fn ambient(g: &LieAlgebra, kinds: &[ModuleKind]) -> Self {
        WeightPoset::cut_out(g, kinds, &[])
    }

    fn compute_edges(&self, g: &LieAlgebra, kinds: &[ModuleKind]) -> Vec<RaisingEdge> {
        let index: BTreeMap<&WeightLabel, usize> = self.spaces.iter().enumerate().map(|(i, s)| (&s.weight, i)).collect();
        let mut edges = Vec::new();
        for (s, root) in self.simple_roots.iter().enumerate() {
            let x = g.raising_indices[s];
            for (from, space) in self.spaces.iter().enumerate() {
                let Some(&to) = index.get(&space.weight.add(root)) else { continue };
                let target = &self.spaces[to];
                let tb = Matrix::from_rows(&target.basis, self.ambient_dim).transpose();
                let mut block = Matrix::zeros(target.dim(), space.dim());
                for (c, v) in space.basis.iter().enumerate() {
                    let image = act(g, x, kinds, v);
                    let local = tb.solve(&image).expect("raising preserves the submodule");
                    for (r, val) in local.into_iter().enumerate() {
                        block.set(r, c, val);
                    }
                }
                if !block.is_zero() {
                    edges.push(RaisingEdge { op: s, from, to, block });
                }
            }
        }
        edges
    }

    pub fn with_grading(mut self, degree: [usize; 3], factor_dims: [usize; 3]) -> Self {
        self.grading = Some(PosetGrading { degree, factor_dims });
        self
    }

    pub fn total_dim(&self) -> usize {
        self.spaces.iter().map(|s| s.dim()).sum()
    }

    pub fn index_of(&self, w: &WeightLabel) -> Option<usize> {
        self.spaces.iter().position(|s| &s.weight == w)
    }

    pub fn multiplicity(&self, w: &WeightLabel) -> usize {
        self.index_of(w).map_or(0, |i| self.spaces[i].dim())
    }

    /// The dual module: weights negated, raising blocks −Mᵀ with reversed
    /// direction. Basis vectors are local dual coordinates.
    pub fn dual(&self) -> WeightPoset {
        let n = self.spaces.len();
        // Space i of the dual is space n-1-i of self, keeping decreasing height.
        let spaces = (0..n)
            .rev()
            .map(|i| {
                let d = self.spaces[i].dim();
                WeightSpace { weight: self.spaces[i].weight.neg(), basis: (0..d).map(|k| unit_vec(d, k)).collect() }
            })
            .collect();
        let edges = self
            .edges
            .iter()
            .map(|e| RaisingEdge {
                op: e.op,
                from: n - 1 - e.to,
                to: n - 1 - e.from,
                block: e.block.transpose().map(|v| -v.clone()),
            })
            .collect();
        WeightPoset { ambient_dim: 0, spaces, edges, simple_roots: self.simple_roots.clone(), dualized: !self.dualized, grading: None }
    }

    /// Module content: highest weights with multiplicities, found by peeling
    /// off highest weight vectors (dimension of the joint kernel of raising,
    /// per weight).
    pub fn highest_weights(&self) -> Vec<(WeightLabel, usize)> {
        let mut out = Vec::new();
        for (i, s) in self.spaces.iter().enumerate() {
            let blocks: Vec<&Matrix<Rational>> = self.edges.iter().filter(|e| e.from == i).map(|e| &e.block).collect();
            let rows: Vec<Vec<Rational>> = blocks.iter().flat_map(|b| (0..b.rows()).map(|r| b.row(r).to_vec())).collect();
            let k = if rows.is_empty() { s.dim() } else { Matrix::from_rows(&rows, s.dim()).kernel().len() };
            if k > 0 {
                out.push((s.weight.clone(), k));
            }
        }
        out
    }
}

fn unit_vec(n: usize, i: usize) -> Vec<Rational> {
    let mut v = vec![Rational::zero(); n];
    v[i] = Rational::from_i64(1);
    v
}

/// A linear functional positive on every simple root.
pub(crate) fn height_functional(g: &LieAlgebra) -> impl Fn(&WeightLabel) -> Rational {
    let roots = g.simple_roots();
    let r = roots.len();
    let m = Matrix::from_rows(
        &roots.iter().map(|w| w.0.iter().map(|&v| Rational::from_i64(v)).collect()).collect::<Vec<_>>(),
        r,
    );
    let c = m.solve(&vec![Rational::from_i64(1); r]).expect("simple roots are independent");
    move |w: &WeightLabel| w.0.iter().zip(&c).fold(Rational::zero(), |acc, (&a, b)| acc + Rational::from_i64(a) * b.clone())
}

/// Which pair of factors the annihilator lives in; the third is contracted away.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum FactorPair {
    /// T(C*)^⊥ ⊂ A*⊗B*.
    AB,
    /// T(B*)^⊥ ⊂ A*⊗C*.
    AC,
    /// T(A*)^⊥ ⊂ B*⊗C*.
    BC,
}

impl FactorPair {
    pub fn factors(self) -> [usize; 2] {
        match self {
            FactorPair::AB => [0, 1],
            FactorPair::AC => [0, 2],
            FactorPair::BC => [1, 2],
        }
    }

    pub fn free(self) -> usize {
        3 - self.factors()[0] - self.factors()[1]
    }

    /// Multidegree label such as (1,1,0).
    pub fn degree(self) -> [usize; 3] {
        let mut d = [0; 3];
        for f in self.factors() {
            d[f] = 1;
        }
        d
    }
}

/// Perp of the flattening image T(X*) inside the other two duals, graded by weight.
pub fn annihilator_poset(t: &Tensor3<Rational>, g: &LieAlgebra, pair: FactorPair) -> Result<WeightPoset> {
    let concise = t.concise_exact();
    if let Some(f) = (0..3).find(|&f| !concise[f]) {
        return Err(Error::NotConcise(['A', 'B', 'C'][f]));
    }
    if t.dims() != [g.dim; 3] {
        return Err(Error::DimensionMismatch("tensor is not a structure tensor of g".into()));
    }
    let [f1, f2] = pair.factors();
    let free = pair.free();
    let d = g.dim;
    let kinds = [STRUCTURE_KINDS[f1].dual(), STRUCTURE_KINDS[f2].dual()];
    let mut constraints = vec![vec![Rational::zero(); d * d]; d];
    for (i, j, k, v) in t.nonzeros() {
        let idx = [i, j, k];
        constraints[idx[free]][idx[f1] * d + idx[f2]] = v.clone();
    }
    Ok(WeightPoset::cut_out(g, &kinds, &constraints).with_grading(pair.degree(), t.dims()))
}

/// Annihilator of a subspace given in local coordinates of one weight space.
pub(crate) fn local_perp(vectors: &[Vec<Rational>], n: usize) -> Vec<Vec<Rational>> {
    if vectors.is_empty() {
        return (0..n).map(|i| unit_vec(n, i)).collect();
    }
    perp(vectors, n)
}
