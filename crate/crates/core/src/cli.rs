//! Command-line front end.
//!
//! Exit codes: `0` success (and, for `verify`, every executed cell passed),
//! `1` computational failure or failed check, `2` usage error.
//!
//! `FORMSPACE_THREADS` sets the worker count for `verify` and
//! `FORMSPACE_MAX_DIM` the ambient-dimension cap; `--threads` and
//! `--max-dim` override both.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact_linalg::{self, Subspace};
use crate::exterior_poly::{FormSpaceDescriptor, PolyForm, PolyFormJson};
use crate::gmt::{
    c_formula, lift_hodge_tuple, mt_dim_formula, mt_space, phi_split, GradeRange, HodgeTuple,
    HodgeTupleJson,
};
use crate::operators::{apply, d_matrix, dstar_matrix, laplacian_matrix, star_matrix};
use crate::spaces::{harmonic_kernel, hodge_dim_formula, hodge_space, uvw_decomposition};
use crate::verify::{self, Suite, VerifyConfig};

pub const ENV_THREADS: &str = "FORMSPACE_THREADS";
pub const ENV_MAX_DIM: &str = "FORMSPACE_MAX_DIM";

#[derive(Debug, Parser)]
#[command(
    name = "formspace",
    version,
    about = "Exact kernels of d, d* and d + d* on polynomial differential forms"
)]
pub struct Cli {
    /// Worker threads for `verify` (overrides FORMSPACE_THREADS).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Ambient-dimension cap (overrides FORMSPACE_MAX_DIM).
    #[arg(long, global = true)]
    pub max_dim: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print formula (and optionally rank-computed) dimensions.
    Dims(DimsArgs),
    /// Write the canonical basis of a solution space as JSON.
    Basis(BasisArgs),
    /// Split an MT element into Hodge parts and its Φ-image.
    Split(SplitArgs),
    /// Lift a Hodge tuple to an MT element.
    Lift(IoArgs),
    /// Apply d, d*, the Laplacian or the Hodge star to a form.
    Apply(ApplyArgs),
    /// Export an operator matrix as JSON triplets.
    Operator(OperatorArgs),
    /// Run verification suites.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct SpaceParams {
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub k: i64,
    /// Single grade.
    #[arg(long, conflicts_with_all = ["r", "p", "q"])]
    pub s: Option<usize>,
    #[arg(long, requires_all = ["p", "q"])]
    pub r: Option<usize>,
    #[arg(long, requires_all = ["r", "q"])]
    pub p: Option<usize>,
    #[arg(long, requires_all = ["r", "p"])]
    pub q: Option<usize>,
}

enum Params {
    Single(usize),
    Graded(GradeRange),
}

impl SpaceParams {
    fn resolve(&self) -> Result<Params> {
        if self.m == 0 || self.m > crate::exterior_poly::MAX_DIMENSION {
            return Err(Error::InvalidDescriptor(format!(
                "m = {} out of range",
                self.m
            )));
        }
        if self.k < 0 {
            return Err(Error::InvalidDescriptor(format!(
                "k = {} must be non-negative",
                self.k
            )));
        }
        match (self.s, self.r, self.p, self.q) {
            (Some(s), None, None, None) => {
                if s > self.m {
                    return Err(Error::InvalidDescriptor(format!(
                        "grade {s} exceeds m = {}",
                        self.m
                    )));
                }
                Ok(Params::Single(s))
            }
            (None, Some(r), Some(p), Some(q)) => {
                Ok(Params::Graded(GradeRange::new(self.m, r, p, q)?))
            }
            _ => Err(Error::InvalidDescriptor(
                "give either --s or all of --r --p --q".into(),
            )),
        }
    }

    fn single(&self) -> Result<usize> {
        match self.resolve()? {
            Params::Single(s) => Ok(s),
            Params::Graded(_) => Err(Error::InvalidDescriptor("this space needs --s".into())),
        }
    }
}

#[derive(Debug, Args)]
pub struct DimsArgs {
    #[command(flatten)]
    pub space: SpaceParams,
    /// Also compute the dimension by exact rank.
    #[arg(long)]
    pub both: bool,
    /// For a range `(0, 0, ⌊m/2⌋)`, also print `c(k, m)`.
    #[arg(long)]
    pub monogenic: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SpaceKind {
    Hodge,
    Mt,
    Kerdelta,
    #[value(name = "U", alias = "u")]
    U,
    #[value(name = "V", alias = "v")]
    V,
    #[value(name = "W", alias = "w")]
    W,
}

#[derive(Debug, Args)]
pub struct BasisArgs {
    #[arg(long, value_enum)]
    pub space: SpaceKind,
    #[command(flatten)]
    pub params: SpaceParams,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct IoArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[command(flatten)]
    pub io: IoArgs,
    #[arg(long)]
    pub r: usize,
    #[arg(long)]
    pub p: usize,
    #[arg(long)]
    pub q: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OpKind {
    D,
    Dstar,
    Laplacian,
    Star,
}

#[derive(Debug, Args)]
pub struct ApplyArgs {
    #[arg(long, value_enum)]
    pub op: OpKind,
    #[command(flatten)]
    pub io: IoArgs,
}

#[derive(Debug, Args)]
pub struct OperatorArgs {
    #[arg(long, value_enum)]
    pub op: OpKind,
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub k: i64,
    #[arg(long)]
    pub s: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Suite id or alias, comma-separated, or `all`.
    #[arg(long, default_value = "all")]
    pub suite: String,
    #[arg(long)]
    pub m_min: Option<usize>,
    #[arg(long)]
    pub m_max: Option<usize>,
    #[arg(long)]
    pub k_min: Option<i64>,
    #[arg(long)]
    pub k_max: Option<i64>,
    #[arg(long, default_value_t = verify::DEFAULT_SEED)]
    pub seed: u64,
    /// Random cases per randomized cell.
    #[arg(long, default_value_t = verify::DEFAULT_CASES)]
    pub cases: usize,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Report file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// List the suites with their default ranges and exit.
    #[arg(long)]
    pub list: bool,
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("formspace: {e}");
            exit_code(&e)
        }
    }
}

/// `2` for errors in what the caller asked for, `1` for everything else.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidDescriptor(_)
        | Error::InvalidRange { .. }
        | Error::IndexOutOfRange { .. }
        | Error::UnknownSuite(_)
        | Error::Parse(_) => 2,
        _ => 1,
    }
}

fn env_usize(name: &str) -> Result<Option<usize>> {
    match std::env::var(name) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::Parse(format!("{name}={v} is not a non-negative integer"))),
        Err(_) => Ok(None),
    }
}

fn execute(cli: &Cli) -> Result<i32> {
    let cap = match cli.max_dim {
        Some(c) => Some(c),
        None => env_usize(ENV_MAX_DIM)?,
    };
    if let Some(cap) = cap {
        exact_linalg::set_dimension_cap(cap);
    }
    match &cli.command {
        Command::Dims(a) => cmd_dims(a),
        Command::Basis(a) => cmd_basis(a),
        Command::Split(a) => cmd_split(a),
        Command::Lift(a) => cmd_lift(a),
        Command::Apply(a) => cmd_apply(a),
        Command::Operator(a) => cmd_operator(a),
        Command::Verify(a) => {
            let threads = match cli.threads {
                Some(t) => Some(t),
                None => env_usize(ENV_THREADS)?,
            };
            cmd_verify(a, threads, exact_linalg::dimension_cap())
        }
    }
}

fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| Error::Precondition(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| Error::Precondition(format!("cannot write to stdout: {e}")))
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string(value).expect("JSON serialization of plain data");
    s.push('\n');
    s
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn cmd_dims(a: &DimsArgs) -> Result<i32> {
    let (m, k) = (a.space.m, a.space.k);
    let (label, formula, rank) = match a.space.resolve()? {
        Params::Single(s) => {
            let rank = if a.both {
                Some(hodge_space(m, k, s)?.dim())
            } else {
                None
            };
            (
                format!("H^{s}_{k}"),
                hodge_dim_formula(k, m, s as i64),
                rank,
            )
        }
        Params::Graded(g) => {
            let rank = if a.both {
                Some(mt_space(m, k, &g)?.dim())
            } else {
                None
            };
            (
                format!("MT^({},{},{})_{k}", g.r, g.p, g.q),
                mt_dim_formula(k, m, &g),
                rank,
            )
        }
    };
    let mut out = String::from("space\tm\tk\tformula\trank\tmatch\n");
    let (rank_col, match_col) = match rank {
        Some(r) => (
            r.to_string(),
            if r as u128 == formula {
                "match"
            } else {
                "MISMATCH"
            },
        ),
        None => ("-".to_string(), "-"),
    };
    out.push_str(&format!(
        "{label}\t{m}\t{k}\t{formula}\t{rank_col}\t{match_col}\n"
    ));
    if a.monogenic {
        out.push_str(&format!("c(k,m)\t{m}\t{k}\t{}\t-\t-\n", c_formula(k, m)));
    }
    write_output(None, &out)?;
    Ok(match rank {
        Some(r) if r as u128 != formula => 1,
        _ => 0,
    })
}

fn cmd_basis(a: &BasisArgs) -> Result<i32> {
    let (m, k) = (a.params.m, a.params.k);
    let sub: Subspace = match a.space {
        SpaceKind::Hodge => hodge_space(m, k, a.params.single()?)?,
        SpaceKind::Kerdelta => harmonic_kernel(m, k, a.params.single()?)?,
        SpaceKind::Mt => match a.params.resolve()? {
            Params::Graded(g) => mt_space(m, k, &g)?,
            Params::Single(s) => mt_space(m, k, &GradeRange::new(m, s, 0, 0)?)?,
        },
        SpaceKind::U | SpaceKind::V | SpaceKind::W => {
            let uvw = uvw_decomposition(m, k, a.params.single()?)?;
            match a.space {
                SpaceKind::U => uvw.u,
                SpaceKind::V => uvw.v,
                _ => uvw.w,
            }
        }
    };
    write_output(a.out.as_deref(), &to_json(&sub.to_json()))?;
    Ok(0)
}

fn cmd_split(a: &SplitArgs) -> Result<i32> {
    let json: PolyFormJson = read_json(&a.io.input)?;
    let f = PolyForm::from_json(&json)?;
    let range = GradeRange::new(f.m(), a.r, a.p, a.q)?;
    let split = phi_split(&f, &range)?;
    write_output(a.io.out.as_deref(), &to_json(&split.to_json()))?;
    Ok(0)
}

fn cmd_lift(a: &IoArgs) -> Result<i32> {
    let json: HodgeTupleJson = read_json(&a.input)?;
    let t = HodgeTuple::from_json(&json)?;
    let p = lift_hodge_tuple(&t)?;
    write_output(a.out.as_deref(), &to_json(&p.to_json()))?;
    Ok(0)
}

/// Applies `op` gradewise to a possibly mixed-grade form.
pub fn apply_gradewise(op: OpKind, f: &PolyForm) -> Result<PolyForm> {
    let (m, k) = (f.m(), f.k());
    let target_k = match op {
        OpKind::D | OpKind::Dstar => k - 1,
        OpKind::Laplacian => k - 2,
        OpKind::Star => k,
    };
    let mut out = PolyForm::zero(m, target_k);
    for s in f.grades() {
        let part = f.component(s);
        let matrix = match op {
            OpKind::D => d_matrix(m, k, s)?,
            OpKind::Dstar => dstar_matrix(m, k, s)?,
            OpKind::Laplacian => laplacian_matrix(m, k, s)?,
            OpKind::Star => star_matrix(m, k, s)?,
        };
        out = out.add(&apply(&matrix, &part)?)?;
    }
    Ok(out)
}

fn cmd_apply(a: &ApplyArgs) -> Result<i32> {
    let json: PolyFormJson = read_json(&a.io.input)?;
    let f = PolyForm::from_json(&json)?;
    let g = apply_gradewise(a.op, &f)?;
    write_output(a.io.out.as_deref(), &to_json(&g.to_json()))?;
    Ok(0)
}

fn cmd_operator(a: &OperatorArgs) -> Result<i32> {
    FormSpaceDescriptor::single(a.m, a.k, a.s)?;
    let op = match a.op {
        OpKind::D => d_matrix(a.m, a.k, a.s)?,
        OpKind::Dstar => dstar_matrix(a.m, a.k, a.s)?,
        OpKind::Laplacian => laplacian_matrix(a.m, a.k, a.s)?,
        OpKind::Star => star_matrix(a.m, a.k, a.s)?,
    };
    write_output(a.out.as_deref(), &to_json(&op.to_json()))?;
    Ok(0)
}

fn cmd_verify(a: &VerifyArgs, threads: Option<usize>, cap: usize) -> Result<i32> {
    let suites = Suite::parse_list(&a.suite)?;
    if a.list {
        let mut out = String::from("suite\talias\tm\tk\tdescription\n");
        for s in suites {
            let r = s.default_ranges();
            out.push_str(&format!(
                "{}\t{}\t{}..{}\t{}..{}\t{}\n",
                s.id(),
                s.alias(),
                r.m_min,
                r.m_max,
                r.k_min,
                r.k_max,
                s.description()
            ));
        }
        write_output(None, &out)?;
        return Ok(0);
    }
    let config = VerifyConfig {
        suites,
        m_min: a.m_min,
        m_max: a.m_max,
        k_min: a.k_min,
        k_max: a.k_max,
        seed: a.seed,
        cases: a.cases,
        cap,
    };
    config.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads.filter(|&t| t > 0) {
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Precondition(format!("thread pool: {e}")))?;
    let report = pool.install(|| verify::run(&config))?;
    let text = match a.format {
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv(),
    };
    write_output(a.out.as_deref(), &text)?;
    let s = &report.summary;
    eprintln!(
        "{} checks: {} passed, {} failed, {} skipped",
        s.total, s.passed, s.failed, s.skipped
    );
    Ok(if report.all_passed() { 0 } else { 1 })
}
