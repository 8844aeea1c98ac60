use super::VerificationReport;
use crate::error::{Error, Result};
use crate::field::{rational_to_f64, Rational};
use crate::tensor::Tensor3;
use num_traits::{FromPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// `c · t^e`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub c: f64,
    pub e: i32,
}

impl Monomial {
    pub const ZERO: Monomial = Monomial { c: 0.0, e: 0 };
}

#[derive(Clone, Debug, PartialEq)]
pub struct CurveTerm {
    pub factors: [Vec<Monomial>; 3],
}

/// A family of decompositions with Laurent-monomial entries in t.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveDecomposition {
    pub dims: [usize; 3],
    pub terms: Vec<CurveTerm>,
}

/// Target reinterpretation tried when the plain reading does not verify:
/// factor order permuted and overall sign.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveConvention {
    pub perm: [usize; 3],
    pub sign: i8,
}

impl CurveConvention {
    pub const IDENTITY: CurveConvention = CurveConvention { perm: [0, 1, 2], sign: 1 };

    fn all() -> Vec<CurveConvention> {
        let perms = [[0, 1, 2], [1, 0, 2], [0, 2, 1], [2, 1, 0], [1, 2, 0], [2, 0, 1]];
        let mut out = vec![];
        for sign in [1, -1] {
            out.extend(perms.iter().map(|&perm| CurveConvention { perm, sign }));
        }
        out
    }

    fn describe(&self) -> String {
        if *self == Self::IDENTITY {
            return "coordinates in the algebra's basis order".into();
        }
        let s = if self.sign < 0 { "-" } else { "" };
        format!("{s}T with factors permuted {:?}", self.perm)
    }
}

impl CurveDecomposition {
    pub fn validate(&self) -> Result<()> {
        for (i, t) in self.terms.iter().enumerate() {
            for (f, v) in t.factors.iter().enumerate() {
                if v.len() != self.dims[f] {
                    return Err(Error::parse(
                        format!("term {}", i + 1),
                        format!("factor {} has {} entries, expected {}", f + 1, v.len(), self.dims[f]),
                    ));
                }
                if let Some(m) = v.iter().find(|m| !m.c.is_finite()) {
                    return Err(Error::parse(format!("term {}", i + 1), format!("non-finite coefficient {}", m.c)));
                }
            }
        }
        Ok(())
    }

    /// Exact Laurent expansion: exponent → entrywise coefficients.
    ///
    /// Every double is converted exactly, so the only error in the verdict is
    /// the one carried by the data.
    pub fn expand(&self) -> BTreeMap<i32, Vec<Rational>> {
        let [da, db, dc] = self.dims;
        let mut acc: BTreeMap<i32, Vec<Rational>> = BTreeMap::new();
        let exact = |m: &Monomial| Rational::from_f64(m.c).expect("finite");
        for term in &self.terms {
            let nz = |v: &[Monomial]| -> Vec<(usize, Rational, i32)> {
                v.iter().enumerate().filter(|(_, m)| m.c != 0.0).map(|(i, m)| (i, exact(m), m.e)).collect()
            };
            let (a, b, c) = (nz(&term.factors[0]), nz(&term.factors[1]), nz(&term.factors[2]));
            for (i, x, ex) in &a {
                for (j, y, ey) in &b {
                    let xy = x * y;
                    for (k, z, ez) in &c {
                        let slot = acc.entry(ex + ey + ez).or_insert_with(|| vec![Rational::zero(); da * db * dc]);
                        slot[(i * db + j) * dc + k] += &xy * z;
                    }
                }
            }
        }
        acc
    }
}

fn errors(expansion: &BTreeMap<i32, Vec<Rational>>, target: &Tensor3<Rational>) -> (f64, f64, f64) {
    let zero = vec![Rational::zero(); target.entries().len()];
    let constant = expansion.get(&0).unwrap_or(&zero);
    let mut l0 = 0f64;
    let mut sq = Rational::zero();
    for (x, y) in constant.iter().zip(target.entries()) {
        let d = x - y;
        l0 = l0.max(rational_to_f64(&d).abs());
        sq += &d * &d;
    }
    let mut neg = 0f64;
    for (_, coeffs) in expansion.range(..0) {
        for x in coeffs {
            neg = neg.max(rational_to_f64(x).abs());
            sq += x * x;
        }
    }
    (l0, rational_to_f64(&sq).sqrt(), neg)
}

fn reinterpret(t: &Tensor3<Rational>, conv: CurveConvention) -> Result<Tensor3<Rational>> {
    let p = t.permute_factors(conv.perm)?;
    Ok(if conv.sign < 0 { p.map(|x| -x.clone()) } else { p })
}

/// Compares the t⁰ part with `t` and measures the negative-degree part.
///
/// The plain reading is tried first; if its l0 error exceeds `tol`, the
/// factor permutations and sign flips of the target are searched and the
/// best one is reported.
pub fn verify_curve(c: &CurveDecomposition, t: &Tensor3<Rational>, tol: f64) -> Result<VerificationReport> {
    c.validate()?;
    if c.dims != t.dims() {
        return Err(Error::DimensionMismatch(format!("{:?} vs {:?}", c.dims, t.dims())));
    }
    let expansion = c.expand();
    let report = |conv: CurveConvention| -> Result<VerificationReport> {
        let (l0, l2, neg) = errors(&expansion, &reinterpret(t, conv)?);
        Ok(VerificationReport {
            exact: l0 == 0.0 && l2 == 0.0 && neg == 0.0,
            l0_error: l0,
            l2_error: l2,
            negative_power_max: neg,
            convention: conv.describe(),
            notes: vec![],
        })
    };
    let plain = report(CurveConvention::IDENTITY)?;
    if plain.l0_error <= tol || t.dims().iter().any(|&d| d != t.dims()[0]) {
        return Ok(plain);
    }
    let mut best = plain;
    for conv in CurveConvention::all() {
        let r = report(conv)?;
        if r.l0_error < best.l0_error {
            best = r;
        }
    }
    if best.l0_error > tol {
        best.notes.push(format!("no convention reaches tolerance {tol:e}; best reported"));
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(c: f64, e: i32) -> Monomial {
        Monomial { c, e }
    }

    #[test]
    fn cancelling_poles_leave_the_constant_term() {
        // (t^-1 a + t b) ⊗ (t c) ⊗ d  −  a ⊗ c ⊗ d  has t⁰ part 0 and a t² part.
        let c = CurveDecomposition {
            dims: [1, 1, 1],
            terms: vec![
                CurveTerm { factors: [vec![m(2.0, -1)], vec![m(3.0, 1)], vec![m(0.5, 0)]] },
                CurveTerm { factors: [vec![m(-3.0, 0)], vec![m(1.0, 0)], vec![m(1.0, 0)]] },
            ],
        };
        let e = c.expand();
        assert!(e[&0][0].is_zero());
        let t = Tensor3::from_entries([1, 1, 1], vec![Rational::zero()]).unwrap();
        let r = verify_curve(&c, &t, 0.0).unwrap();
        assert!(r.exact);
    }

    #[test]
    fn negative_powers_are_reported() {
        let c = CurveDecomposition {
            dims: [1, 1, 1],
            terms: vec![CurveTerm { factors: [vec![m(1e-3, -2)], vec![m(1.0, 0)], vec![m(1.0, 0)]] }],
        };
        let t = Tensor3::from_entries([1, 1, 1], vec![Rational::zero()]).unwrap();
        let r = verify_curve(&c, &t, 1.0).unwrap();
        assert!((r.negative_power_max - 1e-3).abs() < 1e-18);
        assert!(!r.exact);
    }
}
