//! Hard-coded table pipelines: which algebra, which restriction, which p.

use serde::Serialize;
use sltensor_core::koszul::{koszul_bound, KRule, KoszulReport, RankConfig, RowStatus};
use sltensor_core::lie::{build_named, WeightLabel};
use sltensor_core::linalg::Certification;
use sltensor_core::substitution::{substitute_and_bound, CAVEAT};
use sltensor_core::tensor::structure_tensor;
use sltensor_core::Result;
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ValueColumn {
    Kernel,
    Rank,
}

impl ValueColumn {
    pub fn header(self) -> &'static str {
        match self {
            ValueColumn::Kernel => "Dimension of Kernel",
            ValueColumn::Rank => "Rank",
        }
    }
}

#[derive(Clone, Debug)]
pub enum Pipeline {
    Koszul(KRule),
    /// Restrict A by the images of these weight vectors, then k = 2p + 1.
    Substitution(Vec<WeightLabel>),
}

/// A table: pipeline plus reference values (p, kernel or rank, bound).
#[derive(Clone, Debug)]
pub struct TableSpec {
    pub number: u8,
    pub algebra: &'static str,
    pub title: String,
    pub pipeline: Pipeline,
    pub column: ValueColumn,
    pub reference: Vec<(usize, usize, u64)>,
}

pub const TABLE_COUNT: u8 = 14;

fn labels(ws: &[&[i64]]) -> Vec<WeightLabel> {
    ws.iter().map(|w| WeightLabel(w.to_vec())).collect()
}

fn describe(ls: &[WeightLabel]) -> String {
    ls.iter().map(|l| format!("v{l}")).collect::<Vec<_>>().join(" ∧ ")
}

impl TableSpec {
    pub fn get(number: u8) -> Option<TableSpec> {
        use Pipeline::*;
        use ValueColumn::*;
        let generic = KRule::TwoPPlusOne;
        let (algebra, pipeline, column, reference): (_, _, _, Vec<(usize, usize, u64)>) = match number {
            1 => ("sl3", Koszul(KRule::Unrestricted), Kernel, vec![(1, 0, 10), (2, 1, 11), (3, 8, 13)]),
            2 => ("sl3", Koszul(generic), Kernel, vec![(1, 0, 12), (2, 4, 13), (3, 7, 14)]),
            3 => (
                "sl4",
                Koszul(KRule::Unrestricted),
                Kernel,
                vec![(1, 0, 17), (2, 1, 18), (3, 15, 19), (4, 106, 21), (5, 470, 23), (6, 2680, 25), (7, 11039, 25)],
            ),
            4 => ("sl4", Koszul(generic), Kernel, vec![(1, 0, 23), (2, 2, 25), (3, 7, 26), (4, 38, 27), (5, 176, 27), (6, 2254, 26)]),
            5 => ("so4", Koszul(KRule::Unrestricted), Rank, vec![(1, 36, 8), (2, 78, 8), (3, 78, 8)]),
            6 => ("so4", Koszul(generic), Rank, vec![(1, 18, 9), (2, 48, 8)]),
            7 => ("so5", Koszul(KRule::Unrestricted), Rank, vec![(1, 100, 12), (2, 449, 13), (3, 1190, 15), (4, 1971, 16), (5, 1971, 16)]),
            8 => ("so5", Koszul(generic), Rank, vec![(1, 30, 15), (2, 98, 17), (3, 343, 18), (4, 1136, 17)]),
            9 => (
                "sl4",
                Substitution(labels(&[&[1, 0, 1]])),
                Kernel,
                vec![(1, 0, 23), (2, 2, 25), (3, 7, 26), (4, 38, 27), (5, 248, 27), (6, 2254, 26)],
            ),
            10 => (
                "sl4",
                Substitution(labels(&[&[1, 0, 1], &[-1, 1, 1]])),
                Kernel,
                vec![(1, 0, 23), (2, 2, 25), (3, 7, 26), (4, 78, 26), (5, 498, 26)],
            ),
            11 => (
                "sl4",
                Substitution(labels(&[&[1, 0, 1], &[1, 1, -1], &[-1, 1, 1]])),
                Kernel,
                vec![(1, 0, 23), (2, 2, 25), (3, 31, 25), (4, 168, 25), (5, 755, 25)],
            ),
            12 => (
                "sl4",
                Substitution(labels(&[&[1, 0, 1], &[1, 1, -1], &[2, -1, 0]])),
                Kernel,
                vec![(1, 0, 23), (2, 2, 25), (3, 7, 25), (4, 72, 25), (5, 498, 25)],
            ),
            13 => (
                "sl4",
                Substitution(labels(&[&[1, 0, 1], &[1, 1, -1], &[-1, 2, -1]])),
                Kernel,
                vec![(1, 3, 21), (2, 14, 23), (3, 42, 25), (4, 254, 24), (5, 1072, 24)],
            ),
            14 => ("so5", Substitution(labels(&[&[0, 1], &[1, 0]])), Kernel, vec![(1, 0, 15), (2, 4, 16), (3, 28, 17), (4, 194, 16)]),
            _ => return None,
        };
        let title = match &pipeline {
            Koszul(KRule::Unrestricted) => format!("T_{algebra} Koszul flattenings"),
            Koszul(_) => format!("T_{algebra} restricted to a generic subspace of dim k"),
            Substitution(ls) => format!("T_{algebra} with restriction Ã = {}", describe(ls)),
        };
        Some(TableSpec { number, algebra, title, pipeline, column, reference })
    }

    pub fn has_k(&self) -> bool {
        !matches!(self.pipeline, Pipeline::Koszul(KRule::Unrestricted))
    }

    /// CSV headers: the reference column names, then certification.
    pub fn headers(&self) -> Vec<String> {
        let mut h = vec!["p".to_string()];
        if self.has_k() {
            h.push("k".into());
        }
        h.extend(["Dimensions of Linear Map".into(), self.column.header().into(), "Koszul Bound".into()]);
        if let Pipeline::Substitution(_) = self.pipeline {
            h.push("Combined Bound".into());
        }
        h.push("Certification".into());
        h
    }
}

/// `table7`, `Table7` or `7`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TableId(pub u8);

impl FromStr for TableId {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let lower = s.to_ascii_lowercase();
        let digits = lower.strip_prefix("table").unwrap_or(&lower);
        match digits.parse::<u8>() {
            Ok(n) if (1..=TABLE_COUNT).contains(&n) => Ok(TableId(n)),
            _ => Err(format!("unknown table {s:?}; expected table1 .. table{TABLE_COUNT}")),
        }
    }
}

impl fmt::Display for TableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "table{}", self.0)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TableRow {
    pub p: usize,
    pub k: Option<usize>,
    pub source_dim: usize,
    pub target_dim: usize,
    pub rank: usize,
    pub kernel: usize,
    pub bound: u64,
    /// Substitution tables: inner bound plus codimension.
    pub combined_bound: Option<u64>,
    pub certification: Option<Certification>,
    pub primes: Vec<u64>,
    #[serde(flatten)]
    pub status: RowStatus,
    pub reference_value: Option<usize>,
    pub reference_bound: Option<u64>,
    /// None for skipped rows or rows without a reference.
    pub matches_reference: Option<bool>,
}

impl TableRow {
    pub fn is_computed(&self) -> bool {
        self.status == RowStatus::Computed
    }

    pub fn value(&self, c: ValueColumn) -> usize {
        match c {
            ValueColumn::Kernel => self.kernel,
            ValueColumn::Rank => self.rank,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TableResult {
    pub table: String,
    pub title: String,
    pub algebra: String,
    pub columns: Vec<String>,
    pub rows: Vec<TableRow>,
    pub best_bound: Option<u64>,
    pub codim: Option<usize>,
    pub best_combined_bound: Option<u64>,
    /// Weakest certification over computed rows.
    pub certification: String,
    pub mismatches: Vec<String>,
    pub notes: Vec<String>,
}

fn weakest(rows: &[TableRow]) -> String {
    let mut level = None;
    for r in rows.iter().filter(|r| r.is_computed()) {
        let c = r.certification.unwrap_or(Certification::Uncertified);
        level = Some(match (level, c) {
            (None, c) => c,
            (Some(Certification::Uncertified), _) | (_, Certification::Uncertified) => Certification::Uncertified,
            (Some(Certification::TwoPrime), _) | (_, Certification::TwoPrime) => Certification::TwoPrime,
            _ => Certification::Exact,
        });
    }
    match level {
        None => "none".into(),
        Some(c) => certification_name(c).into(),
    }
}

pub fn certification_name(c: Certification) -> &'static str {
    match c {
        Certification::Exact => "exact",
        Certification::TwoPrime => "two-prime",
        Certification::Uncertified => "uncertified",
    }
}

fn row_from(spec: &TableSpec, r: &KoszulReport, combined: Option<u64>) -> TableRow {
    let reference = spec.reference.iter().find(|x| x.0 == r.p);
    let mut row = TableRow {
        p: r.p,
        k: r.k,
        source_dim: r.source_dim,
        target_dim: r.target_dim,
        rank: r.rank,
        kernel: r.kernel,
        bound: r.bound,
        combined_bound: combined,
        certification: r.certification,
        primes: r.primes.clone(),
        status: r.status.clone(),
        reference_value: reference.map(|x| x.1),
        reference_bound: reference.map(|x| x.2),
        matches_reference: None,
    };
    if row.is_computed() {
        row.matches_reference = reference.map(|&(_, v, b)| row.value(spec.column) == v && row.bound == b);
    }
    row
}

/// Runs every row of a table. Rows that exceed the size budget are kept
/// with a skipped status.
pub fn reproduce(id: TableId, seed: u64, cfg: &RankConfig) -> Result<TableResult> {
    let spec = TableSpec::get(id.0).expect("TableId is range checked");
    let g = build_named(spec.algebra)?;
    let t = structure_tensor(&g);
    let ps: Vec<usize> = spec.reference.iter().map(|r| r.0).collect();
    let mut rows = Vec::with_capacity(ps.len());
    let mut codim = None;
    for &p in &ps {
        let row = match &spec.pipeline {
            Pipeline::Koszul(rule) => row_from(&spec, &koszul_bound(&t, p, rule.k_for(p), seed, cfg)?, None),
            Pipeline::Substitution(ls) => {
                let s = substitute_and_bound(&t, &g, ls, p, Some(2 * p + 1), seed, cfg)?;
                codim = Some(s.codim);
                let combined = s.inner.is_computed().then_some(s.combined_bound);
                row_from(&spec, &s.inner, combined)
            }
        };
        rows.push(row);
    }
    let computed = || rows.iter().filter(|r| r.is_computed());
    let best_bound = computed().map(|r| r.bound).max();
    let best_combined_bound = computed().filter_map(|r| r.combined_bound).max();
    let mismatches = rows
        .iter()
        .filter(|r| r.matches_reference == Some(false))
        .map(|r| {
            format!(
                "p={}: {} {} bound {}, reference {} bound {}",
                r.p,
                spec.column.header().to_lowercase(),
                r.value(spec.column),
                r.bound,
                r.reference_value.unwrap_or_default(),
                r.reference_bound.unwrap_or_default()
            )
        })
        .collect();
    let mut notes = vec![];
    if matches!(spec.pipeline, Pipeline::Substitution(_)) {
        notes.push(format!("combined bound = Koszul bound + codimension; {CAVEAT}"));
    }
    if rows.iter().any(|r| !r.is_computed()) {
        notes.push("rows over the size budget are skipped; raise --budget to run them".into());
    }
    Ok(TableResult {
        table: id.to_string(),
        title: spec.title.clone(),
        algebra: spec.algebra.into(),
        columns: spec.headers(),
        certification: weakest(&rows),
        rows,
        best_bound,
        codim,
        best_combined_bound: codim.and(best_combined_bound),
        mismatches,
        notes,
    })
}

/// Cells of one row in header order.
pub fn row_cells(spec: &TableSpec, r: &TableRow) -> Vec<String> {
    let mut cells = vec![r.p.to_string()];
    if spec.has_k() {
        cells.push(r.k.map_or_else(String::new, |k| k.to_string()));
    }
    cells.push(format!("({},{})", r.source_dim, r.target_dim));
    match &r.status {
        RowStatus::Computed => {
            cells.push(r.value(spec.column).to_string());
            cells.push(r.bound.to_string());
            if let Pipeline::Substitution(_) = spec.pipeline {
                cells.push(r.combined_bound.map_or_else(String::new, |b| b.to_string()));
            }
            cells.push(r.certification.map_or("none", certification_name).into());
        }
        RowStatus::Skipped { reason } => {
            cells.push("skipped".into());
            cells.push("skipped".into());
            if let Pipeline::Substitution(_) = spec.pipeline {
                cells.push("skipped".into());
            }
            cells.push(format!("skipped ({reason})"));
        }
    }
    cells
}
