//! Levenberg–Marquardt search for rank decompositions, with exact recovery
//! of converged solutions over Q(ζ).

use crate::decomp::{verify_exact, Layout, RankDecomposition, Term};
use crate::error::{Error, Result};
use crate::field::{Cyclotomic6, Field};
use crate::reconstruct::cyclo_reconstruct;
use crate::tensor::Tensor3;
use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex64;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

/// Find x with Σ_t a_t⊗b_t⊗c_t = target.
///
/// Unknowns are laid out factor by factor: all a_t, then all b_t, then all c_t.
#[derive(Clone, Debug)]
pub struct SearchProblem {
    pub target: Vec<Complex64>,
    pub dims: [usize; 3],
    pub r: usize,
    /// Real starting points; real targets then keep every iterate real.
    pub real: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub converged: bool,
    pub residual_norm: f64,
    pub iterations: usize,
    /// (re, im) pairs.
    pub solution: Vec<[f64; 2]>,
    pub seed: u64,
    /// Residual norm after each accepted step, starting point first.
    pub history: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub max_iter: usize,
    pub tol: f64,
    pub damping: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { max_iter: 500, tol: 1e-14, damping: 1e-3 }
    }
}

impl SearchProblem {
    pub fn new<S: Clone + Zero + Into<Cyclotomic6>>(target: &Tensor3<S>, r: usize) -> Self {
        let values = target.entries().iter().map(|x| x.clone().into().to_complex()).collect();
        SearchProblem { target: values, dims: target.dims(), r, real: false }
    }

    pub fn unknowns(&self) -> usize {
        self.r * self.dims.iter().sum::<usize>()
    }

    /// Start of factor `f` of term `t` in the unknown vector.
    fn offset(&self, f: usize, t: usize) -> usize {
        self.r * self.dims[..f].iter().sum::<usize>() + t * self.dims[f]
    }

    fn factor<'a>(&self, x: &'a [Complex64], f: usize, t: usize) -> &'a [Complex64] {
        let o = self.offset(f, t);
        &x[o..o + self.dims[f]]
    }

    /// Random start with entries uniform in the unit square (or interval).
    pub fn initial(&self, seed: u64) -> Vec<Complex64> {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        (0..self.unknowns())
            .map(|_| {
                let re = rng.gen_range(-1.0..1.0);
                let im = if self.real { 0.0 } else { rng.gen_range(-1.0..1.0) };
                Complex64::new(re, im)
            })
            .collect()
    }
}

/// F(x) = assemble(x) − target, entrywise in row-major order.
pub fn residual(p: &SearchProblem, x: &[Complex64]) -> Vec<Complex64> {
    let [da, db, dc] = p.dims;
    let mut out: Vec<Complex64> = p.target.iter().map(|v| -v).collect();
    for t in 0..p.r {
        let (a, b, c) = (p.factor(x, 0, t), p.factor(x, 1, t), p.factor(x, 2, t));
        for i in 0..da {
            for j in 0..db {
                let ab = a[i] * b[j];
                let row = &mut out[(i * db + j) * dc..(i * db + j + 1) * dc];
                for (o, z) in row.iter_mut().zip(c) {
                    *o += ab * z;
                }
            }
        }
    }
    out
}

/// ∂F/∂x: rows follow the residual, columns the unknowns.
pub fn jacobian(p: &SearchProblem, x: &[Complex64]) -> DMatrix<Complex64> {
    let [da, db, dc] = p.dims;
    let mut jac = DMatrix::zeros(da * db * dc, p.unknowns());
    for t in 0..p.r {
        let (a, b, c) = (p.factor(x, 0, t), p.factor(x, 1, t), p.factor(x, 2, t));
        let (oa, ob, oc) = (p.offset(0, t), p.offset(1, t), p.offset(2, t));
        for i in 0..da {
            for j in 0..db {
                for k in 0..dc {
                    let row = (i * db + j) * dc + k;
                    jac[(row, oa + i)] = b[j] * c[k];
                    jac[(row, ob + j)] = a[i] * c[k];
                    jac[(row, oc + k)] = a[i] * b[j];
                }
            }
        }
    }
    jac
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Levenberg–Marquardt from a seeded random start.
pub fn solve(p: &SearchProblem, seed: u64, opts: SolveOptions) -> SearchResult {
    solve_from(p, p.initial(seed), seed, opts)
}

/// Levenberg–Marquardt from a given start.
///
/// Steps solve (JᴴJ + λI)δ = −JᴴF; λ shrinks tenfold on acceptance and grows
/// tenfold on rejection. The residual norm is the Euclidean norm of F.
pub fn solve_from(p: &SearchProblem, mut x: Vec<Complex64>, seed: u64, opts: SolveOptions) -> SearchResult {
    let n = p.unknowns();
    let mut f = residual(p, &x);
    let mut fnorm = norm(&f);
    let mut history = vec![fnorm];
    let mut lambda = opts.damping;
    let mut iterations = 0;
    while iterations < opts.max_iter && fnorm >= opts.tol {
        iterations += 1;
        let jac = jacobian(p, &x);
        let jh = jac.adjoint();
        let normal = &jh * &jac;
        let grad = &jh * DVector::from_column_slice(&f);
        let mut accepted = false;
        for _ in 0..30 {
            let mut m = normal.clone();
            for d in 0..n {
                m[(d, d)] += Complex64::new(lambda, 0.0);
            }
            let Some(chol) = m.cholesky() else {
                lambda *= 10.0;
                continue;
            };
            let delta = chol.solve(&(-&grad));
            let trial: Vec<Complex64> = x.iter().zip(delta.iter()).map(|(a, d)| a + d).collect();
            let tf = residual(p, &trial);
            let tn = norm(&tf);
            if tn < fnorm {
                (x, f, fnorm) = (trial, tf, tn);
                lambda = (lambda / 10.0).max(1e-15);
                accepted = true;
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            break;
        }
        history.push(fnorm);
    }
    SearchResult {
        converged: fnorm < opts.tol,
        residual_norm: fnorm,
        iterations,
        solution: x.iter().map(|z| [z.re, z.im]).collect(),
        seed,
        history,
    }
}

/// Numerical point of a coordinate-layout decomposition (prefactors folded into a).
pub fn embed(d: &RankDecomposition) -> Result<Vec<Complex64>> {
    if d.layout != Layout::Coordinates {
        return Err(Error::InvalidArgument("embedding needs coordinate layout".into()));
    }
    d.validate()?;
    let mut x = vec![];
    for f in 0..3 {
        for t in &d.terms {
            let s = if f == 0 { t.prefactor.clone() } else { Cyclotomic6::from_i64(1) };
            x.extend(t.factors[f].iter().map(|z| (z.clone() * s.clone()).to_complex()));
        }
    }
    Ok(x)
}

/// Index of the first entry within a relative 1e-9 of the largest magnitude.
fn pivot(v: &[Complex64]) -> Option<usize> {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    (max > 0.0).then(|| v.iter().position(|z| z.norm() >= max * (1.0 - 1e-9)).expect("max exists"))
}

/// Rescales every term so its largest a-entry and largest b-entry equal 1;
/// the product lands in c. The assembled tensor is unchanged.
pub fn gauge_normalize(p: &SearchProblem, x: &[Complex64]) -> Vec<Complex64> {
    let mut y = x.to_vec();
    for t in 0..p.r {
        let mut scale = Complex64::new(1.0, 0.0);
        for f in 0..2 {
            let o = p.offset(f, t);
            let v = &mut y[o..o + p.dims[f]];
            if let Some(i) = pivot(v) {
                let s = v[i];
                v.iter_mut().for_each(|z| *z /= s);
                scale *= s;
            }
        }
        let o = p.offset(2, t);
        y[o..o + p.dims[2]].iter_mut().for_each(|z| *z *= scale);
    }
    y
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RationalizeFailure {
    pub reason: String,
    /// Largest distance between a recovered entry and its numerical value.
    pub worst_entry_error: f64,
}

/// Gauge-normalizes, reconstructs every entry in Q(ζ), and keeps the result
/// only if it verifies exactly against `target`.
pub fn rationalize<S>(
    p: &SearchProblem,
    x: &[Complex64],
    target: &Tensor3<S>,
    max_den: u64,
    entry_tol: f64,
) -> std::result::Result<RankDecomposition, RationalizeFailure>
where
    S: Clone + Zero + Into<Cyclotomic6>,
{
    let y = gauge_normalize(p, x);
    let mut worst = 0f64;
    let mut exact = Vec::with_capacity(y.len());
    for z in &y {
        match cyclo_reconstruct(*z, max_den) {
            Ok(r) => {
                worst = worst.max(r.error);
                exact.push(r.value);
            }
            Err(e) => return Err(RationalizeFailure { reason: e.to_string(), worst_entry_error: f64::INFINITY }),
        }
    }
    if worst > entry_tol {
        return Err(RationalizeFailure {
            reason: format!("recovered entries are off by up to {worst:e}"),
            worst_entry_error: worst,
        });
    }
    let terms = (0..p.r)
        .map(|t| {
            let part = |f: usize| {
                let o = p.offset(f, t);
                exact[o..o + p.dims[f]].to_vec()
            };
            Term { prefactor: Cyclotomic6::from_i64(1), factors: [part(0), part(1), part(2)] }
        })
        .collect();
    let d = RankDecomposition { dims: p.dims, layout: Layout::Coordinates, terms };
    match verify_exact(&d, target, None) {
        Ok(r) if r.exact => Ok(d),
        Ok(r) => Err(RationalizeFailure {
            reason: format!("reconstruction is not exact (l0 error {:e})", r.l0_error),
            worst_entry_error: worst,
        }),
        Err(e) => Err(RationalizeFailure { reason: e.to_string(), worst_entry_error: worst }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Rational;

    fn rank_one() -> (SearchProblem, Vec<Complex64>) {
        let a = [1, 2].map(Rational::from_i64);
        let b = [0, 1, -1].map(Rational::from_i64);
        let c = [3, 1].map(Rational::from_i64);
        let t = Tensor3::outer(&a, &b, &c);
        let x = [1.0, 2.0, 0.0, 1.0, -1.0, 3.0, 1.0].map(|v| Complex64::new(v, 0.0)).to_vec();
        (SearchProblem::new(&t, 1), x)
    }

    #[test]
    fn residual_vanishes_at_the_solution() {
        let (p, x) = rank_one();
        assert!(norm(&residual(&p, &x)) < 1e-15);
        let zero = vec![Complex64::zero(); p.unknowns()];
        let r = residual(&p, &zero);
        assert!(r.iter().zip(&p.target).all(|(a, b)| *a == -b));
    }

    #[test]
    fn gauge_keeps_the_tensor() {
        let (p, x) = rank_one();
        let y = gauge_normalize(&p, &x);
        assert!(norm(&residual(&p, &y)) < 1e-14);
        assert_eq!(y[1], Complex64::new(1.0, 0.0));
    }
}
