//! Exact rank decompositions and approximate border-rank curves.

mod curve;
mod parse;

pub use curve::{verify_curve, CurveConvention, CurveDecomposition, CurveTerm, Monomial};
pub use parse::{parse_appendix_listing, parse_decomposition, parse_decomposition_str, Decomposition};

use crate::error::{Error, Result};
use crate::field::{Cyclotomic6, Field, Rational};
use crate::lie::LieAlgebra;
use crate::linalg::Matrix;
use crate::tensor::Tensor3;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use std::fmt;

/// How factor vectors are written down.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layout {
    /// Coordinates in the tensor's own bases.
    #[default]
    Coordinates,
    /// Row-major n×n matrices in the defining representation.
    Matrix,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub prefactor: Cyclotomic6,
    pub factors: [Vec<Cyclotomic6>; 3],
}

#[derive(Clone, Debug, PartialEq)]
pub struct RankDecomposition {
    pub dims: [usize; 3],
    pub layout: Layout,
    pub terms: Vec<Term>,
}

/// Reading of a functional-valued factor written as a matrix M.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pairing {
    /// The coordinates of M, read in the dual basis.
    BasisCoordinates,
    /// X ↦ tr(MX).
    Trace,
    /// X ↦ tr(MᵀX).
    TransposeTrace,
}

/// How a matrix-layout decomposition maps to coordinates: the pairing used
/// for the two dual factors, and whether the last factor is transposed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Convention {
    pub dual: Pairing,
    pub transpose_c: bool,
}

impl Convention {
    pub const ALL: [Convention; 6] = [
        Convention { dual: Pairing::BasisCoordinates, transpose_c: false },
        Convention { dual: Pairing::Trace, transpose_c: false },
        Convention { dual: Pairing::TransposeTrace, transpose_c: false },
        Convention { dual: Pairing::BasisCoordinates, transpose_c: true },
        Convention { dual: Pairing::Trace, transpose_c: true },
        Convention { dual: Pairing::TransposeTrace, transpose_c: true },
    ];
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dual = match self.dual {
            Pairing::BasisCoordinates => "A,B as dual-basis coordinates of the printed matrix",
            Pairing::Trace => "A,B via X -> tr(MX)",
            Pairing::TransposeTrace => "A,B via X -> tr(M^T X)",
        };
        let c = if self.transpose_c { "C as coordinates of M^T" } else { "C as coordinates of M" };
        write!(f, "{dual}; {c}")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub exact: bool,
    pub l0_error: f64,
    pub l2_error: f64,
    pub negative_power_max: f64,
    pub convention: String,
    /// Terms whose removal leaves a residual of rank at most one, when not exact.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl RankDecomposition {
    pub fn rank(&self) -> usize {
        self.terms.len()
    }

    /// Checks factor lengths and nonzero prefactors.
    pub fn validate(&self) -> Result<()> {
        for (i, t) in self.terms.iter().enumerate() {
            if t.prefactor.is_zero() {
                return Err(Error::InvalidArgument(format!("term {} has a zero prefactor", i + 1)));
            }
            for (f, v) in t.factors.iter().enumerate() {
                let want = match self.layout {
                    Layout::Coordinates => self.dims[f],
                    Layout::Matrix => self.dims[f] + 1,
                };
                if v.len() != want {
                    return Err(Error::DimensionMismatch(format!(
                        "term {} factor {} has length {}, expected {want}",
                        i + 1,
                        f,
                        v.len()
                    )));
                }
            }
        }
        Ok(())
    }

    /// Coordinate form under a convention; identity for coordinate layouts.
    pub fn to_coordinates(&self, g: &LieAlgebra, conv: Convention) -> Result<RankDecomposition> {
        if self.layout == Layout::Coordinates {
            return Ok(self.clone());
        }
        self.validate()?;
        if self.dims != [g.dim; 3] || g.n * g.n != g.dim + 1 {
            return Err(Error::DimensionMismatch(format!("{:?} does not match {}", self.dims, g.name)));
        }
        let mut terms = Vec::with_capacity(self.terms.len());
        for (i, t) in self.terms.iter().enumerate() {
            let bad = || Error::InvalidArgument(format!("term {}: factor is not in {}", i + 1, g.name));
            let a = dual_coords(g, &t.factors[0], conv.dual).ok_or_else(bad)?;
            let b = dual_coords(g, &t.factors[1], conv.dual).ok_or_else(bad)?;
            let c = match conv.transpose_c {
                false => matrix_coords(g, &t.factors[2]),
                true => matrix_coords(g, &transpose(&t.factors[2], g.n)),
            }
            .ok_or_else(bad)?;
            terms.push(Term { prefactor: t.prefactor.clone(), factors: [a, b, c] });
        }
        Ok(RankDecomposition { dims: self.dims, layout: Layout::Coordinates, terms })
    }
}

fn transpose(m: &[Cyclotomic6], n: usize) -> Vec<Cyclotomic6> {
    (0..n * n).map(|i| m[(i % n) * n + i / n].clone()).collect()
}

fn split(m: &[Cyclotomic6], n: usize) -> (Matrix<Rational>, Matrix<Rational>) {
    let re = Matrix::from_vec(n, n, m.iter().map(|z| z.a.clone()).collect());
    let im = Matrix::from_vec(n, n, m.iter().map(|z| z.b.clone()).collect());
    (re, im)
}

fn matrix_coords(g: &LieAlgebra, m: &[Cyclotomic6]) -> Option<Vec<Cyclotomic6>> {
    let (re, im) = split(m, g.n);
    let (a, b) = (g.coords(&re)?, g.coords(&im)?);
    Some(a.into_iter().zip(b).map(|(a, b)| Cyclotomic6::new(a, b)).collect())
}

fn dual_coords(g: &LieAlgebra, m: &[Cyclotomic6], pairing: Pairing) -> Option<Vec<Cyclotomic6>> {
    let n = g.n;
    let trace_with = |m: &[Cyclotomic6]| {
        (0..g.dim)
            .map(|i| {
                let x = g.matrix(i);
                let mut s = Cyclotomic6::zero();
                for r in 0..n {
                    for c in 0..n {
                        let v = x.get(c, r);
                        if !v.is_zero() {
                            s = s + m[r * n + c].clone() * Cyclotomic6::from(v.clone());
                        }
                    }
                }
                s
            })
            .collect()
    };
    match pairing {
        Pairing::BasisCoordinates => matrix_coords(g, m),
        Pairing::Trace => Some(trace_with(m)),
        Pairing::TransposeTrace => Some(trace_with(&transpose(m, n))),
    }
}

/// Exact sum of prefactor·a⊗b⊗c over all terms; coordinate layout only.
pub fn assemble(d: &RankDecomposition) -> Result<Tensor3<Cyclotomic6>> {
    if d.layout != Layout::Coordinates {
        return Err(Error::InvalidArgument("matrix layout needs a convention; use to_coordinates".into()));
    }
    d.validate()?;
    let mut t = Tensor3::zeros(d.dims);
    for term in &d.terms {
        let [a, b, c] = &term.factors;
        let pa: Vec<Cyclotomic6> = a.iter().map(|x| x.clone() * term.prefactor.clone()).collect();
        t = t.add(&Tensor3::outer(&pa, b, c))?;
    }
    Ok(t)
}

fn residual_report(sum: &Tensor3<Cyclotomic6>, t: &Tensor3<Cyclotomic6>, convention: String) -> VerificationReport {
    let mut l0 = 0f64;
    let mut l2 = 0f64;
    let mut exact = true;
    for (x, y) in sum.entries().iter().zip(t.entries()) {
        let r = x.clone() - y.clone();
        if !r.is_zero() {
            exact = false;
            let e = r.to_complex().norm();
            l0 = l0.max(e);
            l2 += e * e;
        }
    }
    VerificationReport { exact, l0_error: l0, l2_error: l2.sqrt(), negative_power_max: 0.0, convention, notes: vec![] }
}

/// Exact comparison against a tensor over Q or Q(ζ).
///
/// Matrix layouts are tried under every [`Convention`]; the first exact one
/// is reported, otherwise the one with the smallest entrywise error.
pub fn verify_exact<S>(d: &RankDecomposition, t: &Tensor3<S>, g: Option<&LieAlgebra>) -> Result<VerificationReport>
where
    S: Clone + Zero + Into<Cyclotomic6>,
{
    d.validate()?;
    let t: Tensor3<Cyclotomic6> = t.map(|x| x.clone().into());
    let t = &t;
    if d.dims != t.dims() {
        return Err(Error::DimensionMismatch(format!("{:?} vs {:?}", d.dims, t.dims())));
    }
    if d.layout == Layout::Coordinates {
        return Ok(residual_report(&assemble(d)?, t, "coordinates".into()));
    }
    let g = g.ok_or_else(|| Error::InvalidArgument("matrix layout needs a Lie algebra".into()))?;
    let mut best: Option<(VerificationReport, RankDecomposition)> = None;
    for conv in Convention::ALL {
        let Ok(coords) = d.to_coordinates(g, conv) else { continue };
        let report = residual_report(&assemble(&coords)?, t, conv.to_string());
        if report.exact {
            return Ok(report);
        }
        if best.as_ref().map_or(true, |(b, _)| report.l0_error < b.l0_error) {
            best = Some((report, coords));
        }
    }
    let (mut report, coords) =
        best.ok_or_else(|| Error::InvalidArgument("no convention maps the factors into the algebra".into()))?;
    report.notes = suspect_terms(&coords, t);
    Ok(report)
}

/// Terms whose removal leaves a residual of flattening rank one: the usual
/// signature of a single misprinted term.
fn suspect_terms(d: &RankDecomposition, target: &Tensor3<Cyclotomic6>) -> Vec<String> {
    let Ok(sum) = assemble(d) else { return vec![] };
    let mut out = vec![];
    for (i, term) in d.terms.iter().enumerate() {
        let [a, b, c] = &term.factors;
        let pa: Vec<Cyclotomic6> = a.iter().map(|x| x.clone() * term.prefactor.clone()).collect();
        let Ok(without) = sum.add(&Tensor3::outer(&pa, b, c).scale(&-Cyclotomic6::from_i64(1))) else { continue };
        let Ok(res) = target.add(&without.scale(&-Cyclotomic6::from_i64(1))) else { continue };
        if res.flattening_ranks().iter().all(|&r| r <= 1) {
            out.push(format!("term {} alone accounts for the residual", i + 1));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::build_sl;
    use crate::tensor::structure_tensor;

    fn c(v: i64) -> Cyclotomic6 {
        Cyclotomic6::from_i64(v)
    }

    fn unit(n: usize, i: usize) -> Vec<Cyclotomic6> {
        (0..n).map(|j| c((i == j) as i64)).collect()
    }

    #[test]
    fn single_term_has_one_entry() {
        let d = RankDecomposition {
            dims: [2, 3, 4],
            layout: Layout::Coordinates,
            terms: vec![Term { prefactor: c(1), factors: [unit(2, 1), unit(3, 0), unit(4, 3)] }],
        };
        let t = assemble(&d).unwrap();
        let nz: Vec<_> = t.nonzeros().map(|(i, j, k, _)| (i, j, k)).collect();
        assert_eq!(nz, vec![(1, 0, 3)]);
    }

    #[test]
    fn transposed_coordinates_are_consistent() {
        let g = build_sl(2).unwrap();
        // e12 as a matrix: [[0,1],[0,0]].
        let m = vec![c(0), c(1), c(0), c(0)];
        let direct = matrix_coords(&g, &m).unwrap();
        let t = matrix_coords(&g, &transpose(&m, 2)).unwrap();
        assert_ne!(direct, t);
        assert!(matrix_coords(&g, &[c(1), c(0), c(0), c(0)]).is_none());
    }

    #[test]
    fn coordinate_layout_verifies_structure_tensor_trivially() {
        let g = build_sl(2).unwrap();
        let t: Tensor3<Rational> = structure_tensor(&g);
        let mut terms = vec![];
        for (i, j, k, v) in t.nonzeros() {
            terms.push(Term { prefactor: Cyclotomic6::from(v.clone()), factors: [unit(3, i), unit(3, j), unit(3, k)] });
        }
        let d = RankDecomposition { dims: [3, 3, 3], layout: Layout::Coordinates, terms };
        let r = verify_exact(&d, &t, None).unwrap();
        assert!(r.exact);
        assert_eq!((r.l0_error, r.l2_error), (0.0, 0.0));
    }
}
