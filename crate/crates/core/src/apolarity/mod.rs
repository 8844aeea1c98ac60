//! Border apolarity: annihilator weight posets, Borel-fixed candidates and
//! multiplication-map codimension tests.

mod borel;
mod mult;
mod poset;
mod run;

pub use borel::{
    enumerate_borel_fixed, enumerate_borel_fixed_with, probe_borel_fixed, probe_choices, BorelCandidate, EnumOptions, Instance, ProbeChoice, Step,
    Stratum,
};
pub use poset::{annihilator_poset, FactorPair, RaisingEdge, WeightPoset, WeightSpace, PosetGrading, STRUCTURE_KINDS};
pub use mult::{
    columns_rank, image_codim, multiplication_test, multiply_into, stage_label, transfer_back, transfer_by_skew, triple_test, ApolarityOutcome,
    CandidateSpace, GradedPiece, MonomialBasis, Rigor,
};
pub use run::{apolarity_run, codim_210, ApolarityReport, CandidateReport, CandidateSource, RunOptions, RunStage, StageCounts, TripleReport, WeightRow};
