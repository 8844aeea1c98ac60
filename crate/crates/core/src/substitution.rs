//! Border substitution: restrict the A factor by the annihilator of a
//! raising-closed plane, take Koszul bounds of the restriction and add the
//! codimension.

use crate::apolarity::{enumerate_borel_fixed_with, EnumOptions, WeightPoset};
use crate::error::{Error, Result};
use crate::field::{Field, Rational};
use crate::koszul::{koszul_bound, KoszulReport, RankConfig};
use crate::lie::{dual_pairing, LieAlgebra, ModuleKind, WeightLabel};
use crate::tensor::{Factor, Tensor3};
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const CAVEAT: &str = "valid as stated only when the minimum over the Grassmannian is attained on the checked orbit representatives (closed-orbit argument)";

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SubstitutionReport {
    pub annihilated_weights: Vec<WeightLabel>,
    pub codim: usize,
    pub inner: KoszulReport,
    pub combined_bound: u64,
    pub caveat: String,
}

/// The `which`-th adjoint basis vector of the given weight.
pub fn weight_vector(g: &LieAlgebra, label: &WeightLabel, which: usize) -> Result<Vec<Rational>> {
    let idx = (0..g.dim)
        .filter(|&i| &g.weights[i] == label)
        .nth(which)
        .ok_or_else(|| Error::UnknownWeight(label.0.clone()))?;
    let mut v = vec![Rational::zero(); g.dim];
    v[idx] = Rational::from_i64(1);
    Ok(v)
}

/// Restricts A = g* by the images of the weight vectors under the invariant
/// pairing g → g*, then bounds the restriction with a Koszul flattening.
pub fn substitute_and_bound(
    t: &Tensor3<Rational>,
    g: &LieAlgebra,
    labels: &[WeightLabel],
    p: usize,
    k: Option<usize>,
    seed: u64,
    cfg: &RankConfig,
) -> Result<SubstitutionReport> {
    if t.dims()[0] != g.dim {
        return Err(Error::DimensionMismatch("A factor is not g*".into()));
    }
    let psi = dual_pairing(g);
    let mut vectors = Vec::with_capacity(labels.len());
    for (i, l) in labels.iter().enumerate() {
        let which = labels[..i].iter().filter(|m| *m == l).count();
        let v = weight_vector(g, l, which)?;
        vectors.push((0..g.dim).map(|c| (0..g.dim).fold(Rational::zero(), |acc, r| acc + v[r].clone() * psi.get(r, c).clone())).collect());
    }
    let restricted = t.restrict_factor(Factor::A, &vectors)?;
    let inner = koszul_bound(&restricted, p, k, seed, cfg)?;
    Ok(SubstitutionReport {
        annihilated_weights: labels.to_vec(),
        codim: labels.len(),
        combined_bound: inner.bound + labels.len() as u64,
        inner,
        caveat: CAVEAT.into(),
    })
}

/// One plane of a sweep with its reports for every p.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepEntry {
    pub labels: Vec<WeightLabel>,
    pub reports: Vec<SubstitutionReport>,
    /// Planes with identical inner reports, dropped as symmetric duplicates.
    pub duplicates: Vec<Vec<WeightLabel>>,
}

/// Raising-closed planes of the adjoint spanned by weight vectors.
pub fn highest_weight_planes(g: &LieAlgebra, dim: usize) -> Vec<Vec<WeightLabel>> {
    let poset = WeightPoset::ambient(g, &[ModuleKind::Adjoint]);
    let opts = EnumOptions { allow_dual: false, ..EnumOptions::default() };
    enumerate_borel_fixed_with(&poset, dim, &opts)
        .into_iter()
        .filter(|c| !c.parameterized && c.profile.iter().all(|(_, d)| *d == 1))
        .map(|c| c.profile.into_iter().map(|(w, _)| w).collect())
        .collect()
}

/// Substitution bounds for every highest weight plane of the given
/// dimension, with k = 2p + 1. Planes whose inner reports coincide are
/// merged.
pub fn substitution_sweep(
    t: &Tensor3<Rational>,
    g: &LieAlgebra,
    dim: usize,
    ps: &[usize],
    seed: u64,
    cfg: &RankConfig,
) -> Result<Vec<SweepEntry>> {
    let planes = highest_weight_planes(g, dim);
    let all: Vec<SweepEntry> = planes
        .into_par_iter()
        .map(|labels| -> Result<SweepEntry> {
            let reports = ps
                .iter()
                .map(|&p| substitute_and_bound(t, g, &labels, p, Some(2 * p + 1), seed, cfg))
                .collect::<Result<_>>()?;
            Ok(SweepEntry { labels, reports, duplicates: vec![] })
        })
        .collect::<Result<_>>()?;
    let key = |e: &SweepEntry| e.reports.iter().map(|r| (r.inner.rank, r.inner.kernel, r.inner.bound)).collect::<Vec<_>>();
    let mut out: Vec<SweepEntry> = Vec::new();
    for e in all {
        match out.iter_mut().find(|o| key(o) == key(&e)) {
            Some(o) => o.duplicates.push(e.labels),
            None => out.push(e),
        }
    }
    Ok(out)
}
