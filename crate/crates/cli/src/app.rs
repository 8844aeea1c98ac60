//! Argument parsing and dispatch.

use crate::output::{pretty_value, table_csv, table_pretty, Artifact, ConfigEcho, Format};
use crate::reproduce::{certification_name, reproduce, TableId, TableSpec};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sltensor_core::apolarity::{annihilator_poset, apolarity_run, enumerate_borel_fixed, FactorPair, RunOptions, RunStage};
use sltensor_core::cache::RankCache;
use sltensor_core::decomp::{parse_decomposition, verify_curve, verify_exact, Decomposition};
use sltensor_core::field::Rational;
use sltensor_core::koszul::{koszul_bound, RankConfig, RankPolicy, SizeBudget};
use sltensor_core::lie::{build_named, LieAlgebra, WeightLabel};
use sltensor_core::search::{rationalize, solve, SearchProblem, SolveOptions};
use sltensor_core::substitution::{substitute_and_bound, substitution_sweep};
use sltensor_core::tensor::{structure_tensor, Factor, Tensor3, TensorJson};
use std::io::Write;
use std::path::PathBuf;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VERIFY: i32 = 2;

/// Environment variable naming the rank cache directory.
pub const CACHE_ENV: &str = "SLTENSOR_CACHE_DIR";

#[derive(Parser, Debug)]
#[command(name = "sltensor", version, about = "Border rank bounds and decompositions for Lie algebra structure tensors")]
#[command(arg_required_else_help = true)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Policy {
    TwoPrime,
    Exact,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalArgs {
    /// Seed for generic restrictions, prime draws and random starts.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Policy::TwoPrime)]
    pub policy: Policy,
    /// Largest dense block (entries) a rank computation may allocate.
    #[arg(long, global = true, default_value_t = SizeBudget::default().max_block_entries)]
    pub budget: u64,
    #[arg(long, global = true, env = CACHE_ENV)]
    pub cache_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    pub no_cache: bool,
    /// Recompute the first cached rank of the run and check it.
    #[arg(long, global = true)]
    pub audit: bool,
    #[arg(long, global = true, value_enum, default_value_t = Format::Pretty)]
    pub format: Format,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Structure tensors.
    #[command(subcommand)]
    Tensor(TensorCmd),
    /// Koszul flattening bounds.
    Koszul(KoszulArgs),
    /// Border substitution: restrict A by weight vectors, then Koszul.
    Substitute(SubstituteArgs),
    /// Border apolarity candidate enumeration and tests.
    Apolarity(ApolarityArgs),
    /// Check a decomposition against a structure tensor.
    #[command(subcommand)]
    Verify(VerifyCmd),
    /// Numerical decomposition search.
    Search(SearchArgs),
    /// Recompute a hard-coded table.
    Reproduce(ReproduceArgs),
}

#[derive(Subcommand, Debug)]
pub enum TensorCmd {
    Build {
        algebra: String,
        /// Restrict A to a generic subspace of this dimension.
        #[arg(long)]
        restrict: Option<usize>,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
pub struct TensorSource {
    /// Algebra name such as sl3 or so5.
    #[arg(required_unless_present = "tensor")]
    pub algebra: Option<String>,
    /// Tensor JSON written by `tensor build`.
    #[arg(long, conflicts_with = "algebra")]
    pub tensor: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct KoszulArgs {
    #[command(flatten)]
    pub source: TensorSource,
    /// Comma separated values of p.
    #[arg(long, short, value_delimiter = ',', required = true)]
    pub p: Vec<usize>,
    /// Restrict A to a generic k-dimensional subspace.
    #[arg(long, short, conflicts_with = "generic")]
    pub k: Option<usize>,
    /// Use k = 2p + 1.
    #[arg(long)]
    pub generic: bool,
}

#[derive(Args, Debug)]
pub struct SubstituteArgs {
    pub algebra: String,
    /// Weights to annihilate, e.g. "1 0 1;-1 1 1".
    #[arg(long, short, conflicts_with = "sweep")]
    pub weights: Option<String>,
    /// Try every highest weight plane of this dimension.
    #[arg(long)]
    pub sweep: Option<usize>,
    #[arg(long, short, value_delimiter = ',', required = true)]
    pub p: Vec<usize>,
}

#[derive(Args, Debug)]
pub struct ApolarityArgs {
    pub algebra: String,
    /// Border rank to test.
    #[arg(long, short, required_unless_present = "enumerate")]
    pub r: Option<usize>,
    /// Only enumerate Borel-fixed candidates of this dimension in T(C*)^⊥.
    #[arg(long, conflicts_with = "r")]
    pub enumerate: Option<usize>,
    #[arg(long, default_value_t = 16)]
    pub samples: usize,
    /// Stop after (210) and (120).
    #[arg(long)]
    pub f110_only: bool,
    #[arg(long, default_value_t = RunOptions::default().probe_limit)]
    pub probe_limit: usize,
}

#[derive(Subcommand, Debug)]
pub enum VerifyCmd {
    /// Exact decomposition over Q(ζ).
    RankDecomp {
        file: PathBuf,
        #[arg(long)]
        against: String,
    },
    /// Curve of decompositions with Laurent monomial entries.
    CurveDecomp {
        file: PathBuf,
        #[arg(long)]
        against: String,
        #[arg(long, default_value_t = 5e-16)]
        tol: f64,
    },
}

#[derive(Args, Debug)]
pub struct SearchArgs {
    pub algebra: String,
    #[arg(long, short)]
    pub r: usize,
    /// Number of seeds, starting at --seed.
    #[arg(long, default_value_t = 1)]
    pub starts: u64,
    #[arg(long, default_value_t = SolveOptions::default().max_iter)]
    pub max_iter: usize,
    #[arg(long, default_value_t = SolveOptions::default().tol)]
    pub tol: f64,
    /// Attempt exact recovery of converged points.
    #[arg(long)]
    pub rationalize: bool,
    #[arg(long, default_value_t = 100_000)]
    pub max_den: u64,
    /// Write the best solution (or the recovered decomposition) here.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ReproduceArgs {
    /// table1 .. table14
    pub table: TableId,
    /// Exit with status 2 if a computed row differs from the reference values.
    #[arg(long)]
    pub check: bool,
}

/// Failure carrying the exit status.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn usage(m: impl Into<String>) -> Self {
        Failure { code: EXIT_USAGE, message: m.into() }
    }

    fn verify(m: impl Into<String>) -> Self {
        Failure { code: EXIT_VERIFY, message: m.into() }
    }
}

impl From<sltensor_core::Error> for Failure {
    fn from(e: sltensor_core::Error) -> Self {
        Failure::usage(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::usage(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::usage(e.to_string())
    }
}

type Outcome = std::result::Result<(), Failure>;

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

struct Context {
    echo: ConfigEcho,
    policy: RankPolicy,
    budget: SizeBudget,
    cache: Option<RankCache>,
}

impl Context {
    fn new(g: &GlobalArgs) -> std::result::Result<Self, Failure> {
        let cache = match (&g.cache_dir, g.no_cache) {
            (Some(dir), false) => Some(RankCache::new(dir)?.with_audit(g.audit)),
            _ => None,
        };
        let policy = match g.policy {
            Policy::TwoPrime => RankPolicy::TwoPrime,
            Policy::Exact => RankPolicy::Exact,
        };
        Ok(Context {
            echo: ConfigEcho {
                seed: g.seed,
                policy: match policy {
                    RankPolicy::TwoPrime => "two-prime".into(),
                    RankPolicy::Exact => "exact".into(),
                },
                budget: g.budget,
                cache: cache.is_some(),
            },
            policy,
            budget: SizeBudget { max_block_entries: g.budget, ..SizeBudget::default() },
            cache,
        })
    }

    fn rank_config(&self) -> RankConfig<'_> {
        RankConfig { policy: self.policy, budget: self.budget, cache: self.cache.as_ref() }
    }
}

fn emit<T: Serialize>(ctx: &Context, format: Format, command: &str, cert: &str, result: &T, out: &mut dyn Write) -> Outcome {
    let artifact = Artifact::new(command, &ctx.echo, cert, result);
    match format {
        Format::Json => artifact.write_json(out)?,
        Format::Csv | Format::Pretty => {
            let v = serde_json::to_value(&artifact)?;
            let mut flat = serde_json::Map::new();
            for (k, x) in v.as_object().expect("artifact is an object") {
                match (k.as_str(), x) {
                    ("result", serde_json::Value::Object(m)) => flat.extend(m.clone()),
                    _ => {
                        flat.insert(k.clone(), x.clone());
                    }
                }
            }
            pretty_value(&serde_json::Value::Object(flat), out)?;
        }
    }
    Ok(())
}

fn algebra(name: &str) -> std::result::Result<(LieAlgebra, Tensor3<Rational>), Failure> {
    let g = build_named(name)?;
    let t = structure_tensor(&g);
    Ok((g, t))
}

fn load_tensor(src: &TensorSource) -> std::result::Result<Tensor3<Rational>, Failure> {
    match (&src.algebra, &src.tensor) {
        (_, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
            let j: TensorJson = serde_json::from_str(&text)?;
            Ok(Tensor3::from_json(&j)?)
        }
        (Some(name), None) => Ok(algebra(name)?.1),
        (None, None) => Err(Failure::usage("give an algebra or --tensor")),
    }
}

fn parse_weights(s: &str) -> std::result::Result<Vec<WeightLabel>, Failure> {
    s.split(';').filter(|w| !w.trim().is_empty()).map(|w| WeightLabel::parse(w).map_err(Failure::from)).collect()
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Outcome {
    let ctx = Context::new(&cli.global)?;
    let fmt = cli.global.format;
    let seed = cli.global.seed;
    match &cli.command {
        Command::Tensor(TensorCmd::Build { algebra: name, restrict, out: path }) => {
            let (g, mut t) = algebra(name)?;
            if let Some(k) = restrict {
                t = t.restrict_generic(Factor::A, *k, seed)?;
            }
            let labels = if restrict.is_some() { vec![] } else { g.basis_labels.clone() };
            let text = serde_json::to_string_pretty(&t.to_json(labels))?;
            match path {
                Some(p) => std::fs::write(p, text + "\n")?,
                None => writeln!(out, "{text}")?,
            }
        }
        Command::Koszul(a) => {
            let t = load_tensor(&a.source)?;
            let cfg = ctx.rank_config();
            let reports = a
                .p
                .iter()
                .map(|&p| koszul_bound(&t, p, if a.generic { Some(2 * p + 1) } else { a.k }, seed, &cfg))
                .collect::<sltensor_core::Result<Vec<_>>>()?;
            let cert = reports
                .iter()
                .filter_map(|r| r.certification)
                .map(certification_name)
                .max_by_key(|c| ["exact", "two-prime", "uncertified"].iter().position(|x| x == c))
                .unwrap_or("none");
            if fmt == Format::Json {
                emit(&ctx, fmt, "koszul", cert, &reports, out)?;
            } else {
                for r in &reports {
                    writeln!(
                        out,
                        "p={} k={} ({},{}) rank {} kernel {} bound {} {}",
                        r.p,
                        r.k.map_or("-".into(), |k| k.to_string()),
                        r.source_dim,
                        r.target_dim,
                        r.rank,
                        r.kernel,
                        r.bound,
                        match &r.status {
                            sltensor_core::koszul::RowStatus::Computed => r.certification.map_or("none", certification_name).to_string(),
                            sltensor_core::koszul::RowStatus::Skipped { reason } => format!("skipped ({reason})"),
                        }
                    )?;
                }
            }
        }
        Command::Substitute(a) => {
            let (g, t) = algebra(&a.algebra)?;
            let cfg = ctx.rank_config();
            match (&a.weights, a.sweep) {
                (Some(w), _) => {
                    let ls = parse_weights(w)?;
                    let reports = a
                        .p
                        .iter()
                        .map(|&p| substitute_and_bound(&t, &g, &ls, p, Some(2 * p + 1), seed, &cfg))
                        .collect::<sltensor_core::Result<Vec<_>>>()?;
                    if fmt == Format::Json {
                        emit(&ctx, fmt, "substitute", "two-prime", &reports, out)?;
                    } else {
                        for r in &reports {
                            writeln!(
                                out,
                                "p={} k={} ({},{}) kernel {} bound {} combined {}",
                                r.inner.p,
                                r.inner.k.unwrap_or(0),
                                r.inner.source_dim,
                                r.inner.target_dim,
                                r.inner.kernel,
                                r.inner.bound,
                                r.combined_bound
                            )?;
                        }
                        if let Some(r) = reports.first() {
                            writeln!(out, "note: {}", r.caveat)?;
                        }
                    }
                }
                (None, Some(dim)) => {
                    let entries = substitution_sweep(&t, &g, dim, &a.p, seed, &cfg)?;
                    if fmt == Format::Json {
                        emit(&ctx, fmt, "substitute", "two-prime", &entries, out)?;
                    } else {
                        for e in &entries {
                            let ls: Vec<String> = e.labels.iter().map(|l| l.to_string()).collect();
                            let bounds: Vec<String> =
                                e.reports.iter().map(|r| format!("p={}:{}/{}", r.inner.p, r.inner.kernel, r.combined_bound)).collect();
                            writeln!(out, "{}  {}  (+{} symmetric)", ls.join(" "), bounds.join(" "), e.duplicates.len())?;
                        }
                    }
                }
                (None, None) => return Err(Failure::usage("give --weights or --sweep")),
            }
        }
        Command::Apolarity(a) => {
            let (g, t) = algebra(&a.algebra)?;
            if let Some(dim) = a.enumerate {
                let poset = annihilator_poset(&t, &g, FactorPair::AB)?;
                let cands = enumerate_borel_fixed(&poset, dim);
                if fmt == Format::Json {
                    emit(&ctx, fmt, "apolarity", "exact", &cands, out)?;
                } else {
                    writeln!(out, "{} candidates of dimension {dim} in a {}-dimensional poset", cands.len(), poset.total_dim())?;
                    for c in &cands {
                        let prof: Vec<String> = c.profile.iter().map(|(w, d)| format!("{w}:{d}")).collect();
                        let kind = if c.parameterized { format!("{} parameters", c.parameter_count) } else { "parameter-free".into() };
                        writeln!(out, "#{} {} ({kind})", c.id, prof.join(" "))?;
                    }
                }
                return Ok(());
            }
            let r = a.r.expect("clap requires r without --enumerate");
            let opts = RunOptions {
                samples: a.samples,
                seed,
                probe_limit: a.probe_limit,
                stage: if a.f110_only { RunStage::F110 } else { RunStage::All },
                ..RunOptions::default()
            };
            let report = apolarity_run(&t, &g, r, &opts)?;
            emit(&ctx, fmt, "apolarity", "sampled", &report, out)?;
        }
        Command::Verify(VerifyCmd::RankDecomp { file, against }) => {
            let (g, t) = algebra(against)?;
            let d = match parse_decomposition(file)? {
                Decomposition::Exact(d) => d,
                Decomposition::Curve(_) => return Err(Failure::usage("file holds a curve; use verify curve-decomp")),
            };
            let report = verify_exact(&d, &t, Some(&g))?;
            emit(&ctx, fmt, "verify rank-decomp", if report.exact { "exact" } else { "failed" }, &report, out)?;
            if !report.exact {
                return Err(Failure::verify(format!("decomposition does not reproduce T_{against} (l0 error {:e})", report.l0_error)));
            }
        }
        Command::Verify(VerifyCmd::CurveDecomp { file, against, tol }) => {
            let (_, t) = algebra(against)?;
            let c = match parse_decomposition(file)? {
                Decomposition::Curve(c) => c,
                Decomposition::Exact(_) => return Err(Failure::usage("file holds an exact decomposition; use verify rank-decomp")),
            };
            let report = verify_curve(&c, &t, *tol)?;
            emit(&ctx, fmt, "verify curve-decomp", "floating-point", &report, out)?;
            if report.l0_error > *tol {
                return Err(Failure::verify(format!("l0 error {:e} exceeds {tol:e}", report.l0_error)));
            }
        }
        Command::Search(a) => {
            let (_, t) = algebra(&a.algebra)?;
            let problem = SearchProblem::new(&t, a.r);
            let opts = SolveOptions { max_iter: a.max_iter, tol: a.tol, ..SolveOptions::default() };
            let results: Vec<_> = (seed..seed + a.starts).map(|s| solve(&problem, s, opts)).collect();
            let best = results
                .iter()
                .min_by(|x, y| x.residual_norm.total_cmp(&y.residual_norm))
                .ok_or_else(|| Failure::usage("--starts must be positive"))?;
            let summary = SearchSummary {
                algebra: a.algebra.clone(),
                r: a.r,
                starts: a.starts,
                converged: results.iter().filter(|x| x.converged).count(),
                best_seed: best.seed,
                best_residual: best.residual_norm,
                best_iterations: best.iterations,
                residuals: results.iter().map(|x| x.residual_norm).collect(),
                recovered: None,
            };
            let mut summary = summary;
            let mut recovered = None;
            if a.rationalize && best.converged {
                let x: Vec<_> = best.solution.iter().map(num_complex).collect();
                match rationalize(&problem, &x, &t, a.max_den, 1e-9) {
                    Ok(d) => {
                        summary.recovered = Some("exact decomposition recovered".into());
                        recovered = Some(d);
                    }
                    Err(f) => summary.recovered = Some(format!("not recovered: {}", f.reason)),
                }
            }
            if let Some(path) = &a.out {
                let text = match recovered {
                    Some(d) => serde_json::to_string_pretty(&Decomposition::Exact(d))?,
                    None => serde_json::to_string_pretty(best)?,
                };
                std::fs::write(path, text + "\n")?;
            }
            emit(&ctx, fmt, "search", if summary.converged > 0 { "numerical" } else { "none" }, &summary, out)?;
        }
        Command::Reproduce(a) => {
            let spec = TableSpec::get(a.table.0).expect("TableId is range checked");
            let result = reproduce(a.table, seed, &ctx.rank_config())?;
            match fmt {
                Format::Json => Artifact::new("reproduce", &ctx.echo, &result.certification, &result).write_json(out)?,
                Format::Csv => table_csv(&spec, &result, out)?,
                Format::Pretty => table_pretty(&spec, &result, &ctx.echo, out)?,
            }
            if a.check && !result.mismatches.is_empty() {
                return Err(Failure::verify(format!("{} rows differ from the reference values", result.mismatches.len())));
            }
        }
    }
    Ok(())
}

fn num_complex(z: &[f64; 2]) -> sltensor_core::search::Complex64 {
    sltensor_core::search::Complex64::new(z[0], z[1])
}

#[derive(Serialize)]
struct SearchSummary {
    algebra: String,
    r: usize,
    starts: u64,
    converged: usize,
    best_seed: u64,
    best_residual: f64,
    best_iterations: usize,
    residuals: Vec<f64>,
    recovered: Option<String>,
}
