use super::borel::{enumerate_borel_fixed_with, probe_borel_fixed, BorelCandidate, EnumOptions};
use super::mult::{image_codim, multiplication_test, transfer_by_skew, triple_test, ApolarityOutcome, CandidateSpace, Rigor};
use super::poset::{annihilator_poset, FactorPair, WeightPoset};
use crate::error::{Error, Result};
use crate::field::Rational;
use crate::lie::{LieAlgebra, WeightLabel};
use crate::linalg::Certification;
use crate::tensor::Tensor3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Which stages of the run to execute.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStage {
    /// Enumeration and the (210)/(120) tests only.
    F110,
    /// Everything up to the (111) test.
    All,
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub samples: usize,
    pub seed: u64,
    /// Upper limit on lattice-probed candidates; 0 disables probing.
    pub probe_limit: usize,
    pub stage: RunStage,
    pub max_total_degree: usize,
    /// Upper limit on (111) triples; beyond it only diagonal triples run.
    pub triple_limit: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { samples: 16, seed: 0, probe_limit: 2_000_000, stage: RunStage::All, max_total_degree: 3, triple_limit: 50_000 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CandidateSource {
    /// A stratum of the enumeration; tested on sampled instances if parameterized.
    Stratum,
    /// A lattice point of some stratum; always exact.
    Probe,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WeightRow {
    pub weight: WeightLabel,
    pub ambient: usize,
    pub candidate: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CandidateReport {
    pub source: CandidateSource,
    pub id: usize,
    pub parameterized: bool,
    pub parameter_count: usize,
    /// Weight, ambient dimension, candidate dimension.
    pub profile: Vec<WeightRow>,
    /// (210), then (120) when (210) passed.
    pub outcomes: Vec<ApolarityOutcome>,
    /// (111) on the triple built from this candidate and its own transfers.
    pub diagonal_111: Option<ApolarityOutcome>,
    /// Passed both (210) and (120).
    pub f110_candidate: bool,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct StageCounts {
    pub enumerated: usize,
    pub passed_210: usize,
    pub passed_120: usize,
    pub diagonal_111_passed: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TripleReport {
    /// Indices into the report's candidate list for F110, F101, F011.
    pub members: [usize; 3],
    pub outcome: ApolarityOutcome,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ApolarityReport {
    pub algebra: String,
    pub r: usize,
    pub poset_dim: usize,
    pub candidate_dim: usize,
    pub strata: StageCounts,
    pub probes: StageCounts,
    /// Candidates that passed (210); the rest only appear in the counts.
    pub candidates: Vec<CandidateReport>,
    pub triples_tested: usize,
    /// False when the triple limit forced diagonal-only testing.
    pub triples_complete: bool,
    pub survivors: Vec<TripleReport>,
    pub conclusion: String,
    /// Rigor of the conclusion on parameter-free candidates and on
    /// parameterized strata respectively.
    pub exact_part: String,
    pub sampled_part: String,
}

fn profile_rows(poset: &WeightPoset, cand: &BorelCandidate) -> Vec<WeightRow> {
    poset
        .spaces
        .iter()
        .map(|s| WeightRow {
            weight: s.weight.clone(),
            ambient: s.dim(),
            candidate: cand.profile.iter().find(|(w, _)| w == &s.weight).map_or(0, |p| p.1),
        })
        .collect()
}

/// (111) on a triple of (1,1,0) candidates, the second and third entering
/// through their skew-symmetry transfers. Parameterized members are
/// sampled jointly, sample s of each; the majority decides.
fn test_111(g: &LieAlgebra, poset: &WeightPoset, triple: [&BorelCandidate; 3], r: usize, opts: &RunOptions) -> Result<ApolarityOutcome> {
    let parameterized = triple.iter().any(|c| c.parameterized);
    let n = if parameterized { opts.samples.max(1) } else { 1 };
    let mut codims = Vec::with_capacity(n);
    let mut cert = Certification::TwoPrime;
    for s in 0..n as u64 {
        let f110 = CandidateSpace::from_candidate(poset, triple[0], s)?;
        let (f101, _) = transfer_by_skew(g, &CandidateSpace::from_candidate(poset, triple[1], s)?)?;
        let (_, f011) = transfer_by_skew(g, &CandidateSpace::from_candidate(poset, triple[2], s)?)?;
        let out = triple_test(&f110, &f101, &f011, r, opts.seed)?;
        if out.certification == Certification::Uncertified {
            cert = Certification::Uncertified;
        }
        codims.push(out.image_codim);
    }
    let passes = codims.iter().filter(|&&c| c >= r).count();
    Ok(ApolarityOutcome {
        stage: "(111)".into(),
        candidates: triple.iter().map(|c| c.id).collect(),
        image_codim: *codims.iter().min().expect("one sample"),
        passed: 2 * passes > n,
        rigor: if parameterized { Rigor::Sampled } else { Rigor::Exact },
        sample_codims: codims,
        certification: cert,
    })
}

fn run_candidates<'a>(
    g: &LieAlgebra,
    poset: &WeightPoset,
    cands: &'a [BorelCandidate],
    source: CandidateSource,
    r: usize,
    opts: &RunOptions,
) -> Result<(StageCounts, Vec<(CandidateReport, &'a BorelCandidate)>)> {
    let degree3 = opts.max_total_degree >= 3;
    let reports: Vec<Option<(CandidateReport, &BorelCandidate)>> = cands
        .par_iter()
        .map(|c| -> Result<Option<(CandidateReport, &BorelCandidate)>> {
            if !degree3 {
                return Ok(None);
            }
            let t210 = multiplication_test(poset, c, [2, 1, 0], r, opts.samples, opts.seed)?;
            if !t210.passed {
                return Ok(None);
            }
            let t120 = multiplication_test(poset, c, [1, 2, 0], r, opts.samples, opts.seed)?;
            let f110_candidate = t120.passed;
            let diagonal_111 = match opts.stage {
                RunStage::All => Some(test_111(g, poset, [c, c, c], r, opts)?),
                RunStage::F110 => None,
            };
            let report = CandidateReport {
                source,
                id: c.id,
                parameterized: c.parameterized,
                parameter_count: c.parameter_count,
                profile: profile_rows(poset, c),
                outcomes: vec![t210, t120],
                diagonal_111,
                f110_candidate,
            };
            Ok(Some((report, c)))
        })
        .collect::<Result<_>>()?;
    let passed: Vec<(CandidateReport, &BorelCandidate)> = reports.into_iter().flatten().collect();
    let counts = StageCounts {
        enumerated: cands.len(),
        passed_210: passed.len(),
        passed_120: passed.iter().filter(|c| c.0.f110_candidate).count(),
        diagonal_111_passed: passed.iter().filter(|c| c.0.diagonal_111.as_ref().is_some_and(|o| o.passed)).count(),
    };
    Ok((counts, passed))
}

/// Border apolarity at rank r through total degree 3: enumerate (1,1,0)
/// candidates of codimension r − dim C in T(C*)^⊥, run (210) and (120),
/// transfer (210)-passers by skew-symmetry and run (111).
pub fn apolarity_run(t: &Tensor3<Rational>, g: &LieAlgebra, r: usize, opts: &RunOptions) -> Result<ApolarityReport> {
    if !(2..=3).contains(&opts.max_total_degree) {
        return Err(Error::InvalidArgument(format!("max total degree {} not supported", opts.max_total_degree)));
    }
    let poset = annihilator_poset(t, g, FactorPair::AB)?;
    let total = poset.total_dim();
    let c = t.dims()[2];
    if r < c || r - c > total {
        return Err(Error::InvalidArgument(format!("r = {r} outside [{c}, {}]", c + total)));
    }
    let dim = total - (r - c);
    let enum_opts = EnumOptions { seed: opts.seed, ..EnumOptions::default() };
    let strata = enumerate_borel_fixed_with(&poset, dim, &enum_opts);
    // Probes without free choices repeat parameter-free strata.
    let probes: Vec<BorelCandidate> = if opts.probe_limit > 0 {
        probe_borel_fixed(&poset, dim, &enum_opts, opts.probe_limit)
            .into_iter()
            .filter(|c| c.probe.as_ref().is_some_and(|p| !p.is_empty()))
            .collect()
    } else {
        vec![]
    };
    let (strata_counts, mut a) = run_candidates(g, &poset, &strata, CandidateSource::Stratum, r, opts)?;
    let (probe_counts, b) = run_candidates(g, &poset, &probes, CandidateSource::Probe, r, opts)?;
    a.extend(b);
    a.sort_by_key(|(c, _)| (c.source == CandidateSource::Probe, c.id));
    let tested = opts.stage == RunStage::All && opts.max_total_degree >= 3;
    let f110: Vec<usize> = (0..a.len()).filter(|&i| a[i].0.f110_candidate).collect();
    let mut triples: Vec<[usize; 3]> = Vec::new();
    let triples_complete = f110.len().pow(3) <= opts.triple_limit;
    if tested {
        if triples_complete {
            for &x in &f110 {
                for &y in &f110 {
                    for &z in &f110 {
                        triples.push([x, y, z]);
                    }
                }
            }
        } else {
            triples.extend(f110.iter().map(|&x| [x, x, x]));
        }
    }
    let tested_triples: Vec<TripleReport> = triples
        .par_iter()
        .map(|&m| -> Result<TripleReport> {
            let outcome = test_111(g, &poset, [a[m[0]].1, a[m[1]].1, a[m[2]].1], r, opts)?;
            Ok(TripleReport { members: m, outcome })
        })
        .collect::<Result<_>>()?;
    let triples_tested = tested_triples.len();
    let survivors: Vec<TripleReport> = tested_triples.into_iter().filter(|t| t.outcome.passed).collect();
    let exact_survivors = survivors.iter().filter(|t| t.outcome.rigor == Rigor::Exact).count();
    let sampled_survivors = survivors.len() - exact_survivors;
    let conclusion = if !tested {
        format!("{} candidates enumerated; (111) not run", strata.len() + probes.len())
    } else if survivors.is_empty() && f110.is_empty() {
        format!("no F110 candidate passes (210) and (120): evidence for border rank >= {}", r + 1)
    } else if survivors.is_empty() && triples_complete {
        format!("no candidate triple survives (111): evidence for border rank >= {}", r + 1)
    } else if survivors.is_empty() {
        format!("no diagonal triple survives (111); off-diagonal triples not tested ({} F110 candidates)", f110.len())
    } else {
        format!("{} candidate triples survive all degree-3 tests", survivors.len())
    };
    let candidates: Vec<CandidateReport> = a.into_iter().map(|(c, _)| c).collect();
    Ok(ApolarityReport {
        algebra: g.name.clone(),
        r,
        poset_dim: total,
        candidate_dim: dim,
        strata: strata_counts,
        probes: probe_counts,
        candidates,
        triples_tested,
        triples_complete,
        survivors,
        conclusion,
        exact_part: format!("exact: {exact_survivors} surviving triples of parameter-free candidates"),
        sampled_part: format!("sampled (N = {}): {sampled_survivors} surviving triples involving parameterized strata", opts.samples),
    })
}

/// Generic (210) codimension of a candidate, as a quick filter.
pub fn codim_210(poset: &WeightPoset, cand: &BorelCandidate, sample: u64, seed: u64) -> Result<usize> {
    Ok(image_codim(&CandidateSpace::from_candidate(poset, cand, sample)?, [2, 1, 0], seed)?.0)
}
