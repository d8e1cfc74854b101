//! Batch cross-checks of the dimension formulas and decompositions against
//! brute-force exact linear algebra.
//!
//! A suite enumerates parameter cells; every cell yields one or more
//! [`CheckResult`] rows. Rows carry a `check_id` of the form `SUITE` or
//! `SUITE.part` when a cell checks several things. Cells run in parallel,
//! but rows are always reported in enumeration order, and every random
//! input is drawn from a generator seeded by `(seed, suite, cell)`, so a
//! report depends only on its configuration.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exact_linalg::{Rational, SparseMatrix, SparseVec, Subspace};
use crate::exterior_poly::{
    binomial, enumerate_blades, enumerate_monomials, FormBasis, FormSpaceDescriptor, PolyForm,
};
use crate::gmt::{
    c_formula, mt_dim_formula, mt_space, phi_split_with, GradeRange, HodgeTuple, Lifter,
    PoincareSolver,
};
use crate::operators::{
    apply, d_matrix, dstar_matrix, euler_contraction_matrix, phi_matrix, star_matrix,
    OperatorMatrix,
};
use crate::spaces::{
    fisher_strata, harmonic_dim, hodge_dim_formula, hodge_space, kernel_stratification,
    uvw_decomposition, uvw_dims_formula, xy_dims_formula,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Suite {
    HodgeDim,
    MtDim,
    MonogenicDim,
    Lemma6Uvw,
    Thm7Subspaces,
    Lemma8Strata,
    Fisher,
    Thm2Split,
    LiftRoundtrip,
    Poincare,
    OperatorIdentities,
}

/// Inclusive parameter bounds for a suite.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Ranges {
    pub m_min: usize,
    pub m_max: usize,
    pub k_min: i64,
    pub k_max: i64,
}

impl Suite {
    pub const ALL: [Suite; 11] = [
        Suite::HodgeDim,
        Suite::MtDim,
        Suite::MonogenicDim,
        Suite::Lemma6Uvw,
        Suite::Thm7Subspaces,
        Suite::Lemma8Strata,
        Suite::Fisher,
        Suite::Thm2Split,
        Suite::LiftRoundtrip,
        Suite::Poincare,
        Suite::OperatorIdentities,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Suite::HodgeDim => "HODGE_DIM",
            Suite::MtDim => "MT_DIM",
            Suite::MonogenicDim => "MONOGENIC_DIM",
            Suite::Lemma6Uvw => "LEMMA6_UVW",
            Suite::Thm7Subspaces => "THM7_SUBSPACES",
            Suite::Lemma8Strata => "LEMMA8_STRATA",
            Suite::Fisher => "FISHER",
            Suite::Thm2Split => "THM2_SPLIT",
            Suite::LiftRoundtrip => "LIFT_ROUNDTRIP",
            Suite::Poincare => "POINCARE",
            Suite::OperatorIdentities => "OPERATOR_IDENTITIES",
        }
    }

    /// Short lowercase name accepted on the command line.
    pub fn alias(self) -> &'static str {
        match self {
            Suite::HodgeDim => "hodge",
            Suite::MtDim => "mt",
            Suite::MonogenicDim => "monogenic",
            Suite::Lemma6Uvw => "lemma6",
            Suite::Thm7Subspaces => "thm7",
            Suite::Lemma8Strata => "lemma8",
            Suite::Fisher => "fisher",
            Suite::Thm2Split => "thm2",
            Suite::LiftRoundtrip => "lift",
            Suite::Poincare => "poincare",
            Suite::OperatorIdentities => "identities",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Suite::HodgeDim => "rank of H^s_k against d(k,m,s)",
            Suite::MtDim => "rank of MT^(r,p,q)_k against the graded sum formula",
            Suite::MonogenicDim => "rank of MT^(0,0,m/2)_k against c(k,m)",
            Suite::Lemma6Uvw => "Ker Δ = H ⊕ U ⊕ V ⊕ W with predicted piece dimensions",
            Suite::Thm7Subspaces => {
                "subspace equalities for Ker dd*, Ker d*d and their intersections"
            }
            Suite::Lemma8Strata => "X/Y stratification of Ker d and Ker d*",
            Suite::Fisher => "r^{2j} Ker Δ strata fill 𝒫^s_k",
            Suite::Thm2Split => {
                "Ker Φ and Im Φ dimensions and split/reassemble of random MT elements"
            }
            Suite::LiftRoundtrip => "Φ(lift(t)) = t for random Hodge tuples",
            Suite::Poincare => "d- and d*-primitives of random closed and coclosed forms",
            Suite::OperatorIdentities => "d² = 0, (d*)² = 0, Cartan identity, star duality",
        }
    }

    pub fn default_ranges(self) -> Ranges {
        let (m_max, k_max) = match self {
            Suite::HodgeDim => (6, 4),
            Suite::MtDim => (5, 3),
            Suite::MonogenicDim => (5, 4),
            Suite::Lemma6Uvw => (5, 4),
            Suite::Thm7Subspaces => (4, 3),
            Suite::Lemma8Strata => (4, 4),
            Suite::Fisher => (5, 4),
            Suite::Thm2Split => (5, 3),
            Suite::LiftRoundtrip => (5, 3),
            Suite::Poincare => (5, 3),
            Suite::OperatorIdentities => (5, 4),
        };
        Ranges {
            m_min: 2,
            m_max,
            k_min: 0,
            k_max,
        }
    }

    /// Whether the suite draws random inputs.
    pub fn is_randomized(self) -> bool {
        matches!(
            self,
            Suite::Thm2Split | Suite::LiftRoundtrip | Suite::Poincare
        )
    }

    /// Accepts ids (`HODGE_DIM`), aliases (`hodge`) and `all`, case-insensitively.
    pub fn parse_list(name: &str) -> Result<Vec<Suite>> {
        let mut out = Vec::new();
        for part in name.split(',').map(str::trim) {
            if part.eq_ignore_ascii_case("all") {
                out.extend(Suite::ALL);
                continue;
            }
            let suite = Suite::ALL
                .into_iter()
                .find(|s| s.id().eq_ignore_ascii_case(part) || s.alias().eq_ignore_ascii_case(part))
                .ok_or_else(|| Error::UnknownSuite(part.to_string()))?;
            out.push(suite);
        }
        out.sort();
        out.dedup();
        Ok(out)
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

pub fn suites() -> &'static [Suite] {
    &Suite::ALL
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Value {
    Int(u128),
    Bool(bool),
    Missing,
    Error(String),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) => write!(f, "{n}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Missing => Ok(()),
            Value::Error(e) => write!(f, "error: {e}"),
        }
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            // u128 as a string would be awkward for consumers; every value
            // produced here fits comfortably in u64
            Value::Int(n) => match u64::try_from(*n) {
                Ok(v) => ser.serialize_u64(v),
                Err(_) => ser.serialize_str(&n.to_string()),
            },
            Value::Bool(b) => ser.serialize_bool(*b),
            Value::Missing => ser.serialize_none(),
            Value::Error(e) => ser.serialize_str(&format!("error: {e}")),
        }
    }
}

impl From<usize> for Value {
    fn from(n: usize) -> Self {
        Value::Int(n as u128)
    }
}

impl From<u128> for Value {
    fn from(n: u128) -> Self {
        Value::Int(n)
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Self {
        Value::Bool(b)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skipped => "skipped",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckResult {
    pub check_id: String,
    pub m: usize,
    pub k: i64,
    pub s: Option<usize>,
    pub r: Option<usize>,
    pub p: Option<usize>,
    pub q: Option<usize>,
    pub j: Option<usize>,
    pub computed: Value,
    pub expected: Value,
    pub status: Status,
}

/// One parameter point of a suite.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Cell {
    pub suite: Suite,
    pub m: usize,
    pub k: i64,
    pub s: Option<usize>,
    pub range: Option<GradeRange>,
}

impl Cell {
    fn row(&self, part: &str, j: Option<usize>, computed: Value, expected: Value) -> CheckResult {
        let status = match (&computed, &expected) {
            (Value::Error(_), _) | (_, Value::Error(_)) => Status::Fail,
            (c, e) if c == e => Status::Pass,
            _ => Status::Fail,
        };
        let check_id = if part.is_empty() {
            self.suite.id().to_string()
        } else {
            format!("{}.{}", self.suite.id(), part)
        };
        CheckResult {
            check_id,
            m: self.m,
            k: self.k,
            s: self.s,
            r: self.range.map(|g| g.r),
            p: self.range.map(|g| g.p),
            q: self.range.map(|g| g.q),
            j,
            computed,
            expected,
            status,
        }
    }

    /// Skipped rows record the offending ambient size as the computed value.
    fn skipped(&self, dim: usize) -> CheckResult {
        CheckResult {
            status: Status::Skipped,
            ..self.row("", None, Value::Int(dim as u128), Value::Missing)
        }
    }

    fn ambient(&self) -> FormSpaceDescriptor {
        match (self.s, self.range) {
            (Some(s), _) => FormSpaceDescriptor::with_grades(self.m, self.k, [s as i64]),
            (None, Some(g)) => g.descriptor(self.m, self.k),
            (None, None) => FormSpaceDescriptor::with_grades(self.m, self.k, 0..=self.m as i64),
        }
    }

    fn seed(&self, seed: u64) -> u64 {
        let mut h = seed;
        let fields = [
            self.suite as u64,
            self.m as u64,
            self.k as u64,
            self.s.map_or(u64::MAX, |s| s as u64),
            self.range.map_or(u64::MAX, |g| {
                ((g.r as u64) << 32) | ((g.p as u64) << 16) | g.q as u64
            }),
        ];
        for f in fields {
            h = splitmix(h ^ f);
        }
        h
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyConfig {
    pub suites: Vec<Suite>,
    pub m_min: Option<usize>,
    pub m_max: Option<usize>,
    pub k_min: Option<i64>,
    pub k_max: Option<i64>,
    pub seed: u64,
    pub cases: usize,
    pub cap: usize,
}

pub const DEFAULT_SEED: u64 = 20_240_601;
pub const DEFAULT_CASES: usize = 100;

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            suites: Suite::ALL.to_vec(),
            m_min: None,
            m_max: None,
            k_min: None,
            k_max: None,
            seed: DEFAULT_SEED,
            cases: DEFAULT_CASES,
            cap: crate::exact_linalg::DEFAULT_DIMENSION_CAP,
        }
    }
}

impl VerifyConfig {
    pub fn for_suites(suites: &[Suite]) -> Self {
        Self {
            suites: suites.to_vec(),
            ..Self::default()
        }
    }

    pub fn ranges(&self, suite: Suite) -> Ranges {
        let d = suite.default_ranges();
        Ranges {
            m_min: self.m_min.unwrap_or(d.m_min),
            m_max: self.m_max.unwrap_or(d.m_max),
            k_min: self.k_min.unwrap_or(d.k_min),
            k_max: self.k_max.unwrap_or(d.k_max),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.suites.is_empty() {
            return Err(Error::InvalidDescriptor("no suites selected".into()));
        }
        for &suite in &self.suites {
            let r = self.ranges(suite);
            if r.m_min < 1 || r.m_min > r.m_max || r.m_max > 31 {
                return Err(Error::InvalidDescriptor(format!(
                    "{suite}: m range {}..={} must lie in 1..=31 and be non-empty",
                    r.m_min, r.m_max
                )));
            }
            if r.k_min < 0 || r.k_min > r.k_max {
                return Err(Error::InvalidDescriptor(format!(
                    "{suite}: k range {}..={} must be non-empty and non-negative",
                    r.k_min, r.k_max
                )));
            }
        }
        Ok(())
    }
}

/// Enumerates the cells of `suite` in report order.
pub fn cells(suite: Suite, ranges: &Ranges) -> Vec<Cell> {
    let mut out = Vec::new();
    for m in ranges.m_min..=ranges.m_max {
        for k in ranges.k_min..=ranges.k_max {
            let base = Cell {
                suite,
                m,
                k,
                s: None,
                range: None,
            };
            match suite {
                Suite::MtDim | Suite::Thm2Split | Suite::LiftRoundtrip => {
                    out.extend(GradeRange::all(m).into_iter().map(|g| Cell {
                        range: Some(g),
                        ..base
                    }));
                }
                Suite::MonogenicDim => out.push(Cell {
                    range: Some(GradeRange {
                        r: 0,
                        p: 0,
                        q: m / 2,
                    }),
                    ..base
                }),
                _ => out.extend((0..=m).map(|s| Cell { s: Some(s), ..base })),
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuiteEcho {
    pub suite: &'static str,
    pub m_min: usize,
    pub m_max: usize,
    pub k_min: i64,
    pub k_max: i64,
    pub cells: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConfigEcho {
    pub seed: u64,
    pub cases: usize,
    pub dimension_cap: usize,
    pub suites: Vec<SuiteEcho>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Report {
    pub config: ConfigEcho,
    pub summary: Summary,
    pub results: Vec<CheckResult>,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "check_id", "m", "k", "s", "r", "p", "q", "j", "computed", "expected", "status",
        ])
        .expect("in-memory write");
        let opt = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.results {
            w.write_record([
                r.check_id.clone(),
                r.m.to_string(),
                r.k.to_string(),
                opt(r.s),
                opt(r.r),
                opt(r.p),
                opt(r.q),
                opt(r.j),
                r.computed.to_string(),
                r.expected.to_string(),
                r.status.to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush to memory")).expect("utf-8 csv")
    }
}

/// Runs every configured suite and assembles the report.
pub fn run(config: &VerifyConfig) -> Result<Report> {
    config.validate()?;
    let mut echo = Vec::new();
    let mut all_cells = Vec::new();
    for &suite in &config.suites {
        let ranges = config.ranges(suite);
        let cs = cells(suite, &ranges);
        echo.push(SuiteEcho {
            suite: suite.id(),
            m_min: ranges.m_min,
            m_max: ranges.m_max,
            k_min: ranges.k_min,
            k_max: ranges.k_max,
            cells: cs.len(),
        });
        all_cells.extend(cs);
    }
    let results: Vec<CheckResult> = all_cells
        .par_iter()
        .map(|cell| run_cell(cell, config))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    let mut summary = Summary {
        total: results.len(),
        ..Summary::default()
    };
    for r in &results {
        match r.status {
            Status::Pass => summary.passed += 1,
            Status::Fail => summary.failed += 1,
            Status::Skipped => summary.skipped += 1,
        }
    }
    Ok(Report {
        config: ConfigEcho {
            seed: config.seed,
            cases: config.cases,
            dimension_cap: config.cap,
            suites: echo,
        },
        summary,
        results,
    })
}

/// Runs a single suite with the given bounds.
pub fn run_suite(suite: Suite, ranges: Ranges, seed: u64) -> Result<Report> {
    run(&VerifyConfig {
        suites: vec![suite],
        m_min: Some(ranges.m_min),
        m_max: Some(ranges.m_max),
        k_min: Some(ranges.k_min),
        k_max: Some(ranges.k_max),
        seed,
        ..VerifyConfig::default()
    })
}

pub fn run_cell(cell: &Cell, config: &VerifyConfig) -> Vec<CheckResult> {
    let dim = cell.ambient().dim();
    if dim > config.cap {
        return vec![cell.skipped(dim)];
    }
    let mut ctx = Ctx {
        cell,
        rng: ChaCha8Rng::seed_from_u64(cell.seed(config.seed)),
        cases: config.cases,
        rows: Vec::new(),
    };
    let outcome = match cell.suite {
        Suite::HodgeDim => hodge_dim(&mut ctx),
        Suite::MtDim => mt_dim(&mut ctx),
        Suite::MonogenicDim => monogenic_dim(&mut ctx),
        Suite::Lemma6Uvw => lemma6(&mut ctx),
        Suite::Thm7Subspaces => thm7(&mut ctx),
        Suite::Lemma8Strata => lemma8(&mut ctx),
        Suite::Fisher => fisher(&mut ctx),
        Suite::Thm2Split => thm2(&mut ctx),
        Suite::LiftRoundtrip => lift_roundtrip(&mut ctx),
        Suite::Poincare => poincare(&mut ctx),
        Suite::OperatorIdentities => identities(&mut ctx),
    };
    match outcome {
        Ok(()) => ctx.rows,
        Err(Error::CapExceeded { dim, .. }) => vec![cell.skipped(dim)],
        Err(e) => {
            let mut rows = ctx.rows;
            rows.push(cell.row("", None, Value::Error(e.to_string()), Value::Missing));
            rows
        }
    }
}

struct Ctx<'a> {
    cell: &'a Cell,
    rng: ChaCha8Rng,
    cases: usize,
    rows: Vec<CheckResult>,
}

impl Ctx<'_> {
    fn check(&mut self, part: &str, computed: impl Into<Value>, expected: impl Into<Value>) {
        let row = self.cell.row(part, None, computed.into(), expected.into());
        self.rows.push(row);
    }

    fn check_j(
        &mut self,
        part: &str,
        j: usize,
        computed: impl Into<Value>,
        expected: impl Into<Value>,
    ) {
        let row = self
            .cell
            .row(part, Some(j), computed.into(), expected.into());
        self.rows.push(row);
    }

    fn s(&self) -> usize {
        self.cell.s.expect("single-grade cell")
    }

    fn range(&self) -> GradeRange {
        self.cell.range.expect("graded cell")
    }

    /// Numerator in `[−9, 9]` over a denominator in `[1, 4]`.
    fn coefficient(&mut self) -> Rational {
        let n: i64 = self.rng.gen_range(-9..=9);
        let d: i64 = self.rng.gen_range(1..=4);
        Rational::new(n.into(), d.into())
    }

    fn vector(&mut self, dim: usize) -> SparseVec {
        let entries: Vec<(usize, Rational)> = (0..dim).map(|i| (i, self.coefficient())).collect();
        SparseVec::from_entries(entries)
    }

    fn element_of(&mut self, sub: &Subspace) -> SparseVec {
        let coeffs: Vec<Rational> = (0..sub.dim()).map(|_| self.coefficient()).collect();
        sub.combination(&coeffs)
    }

    fn index(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n)
    }
}

fn sum_dims(parts: &[&Subspace]) -> usize {
    parts.iter().map(|p| p.dim()).sum()
}

fn span(ambient: &FormSpaceDescriptor, parts: &[&Subspace]) -> Result<Subspace> {
    let vectors: Vec<SparseVec> = parts
        .iter()
        .flat_map(|p| p.basis().iter().cloned())
        .collect();
    Subspace::from_spanning(ambient.clone(), &vectors)
}

/// `whole = ⊕ parts`: the parts span `whole` and their dimensions add up.
fn is_direct_sum(whole: &Subspace, parts: &[&Subspace]) -> Result<bool> {
    Ok(sum_dims(parts) == whole.dim() && span(whole.ambient(), parts)? == *whole)
}

fn hodge_dim(ctx: &mut Ctx) -> Result<()> {
    let (m, k, s) = (ctx.cell.m, ctx.cell.k, ctx.s());
    let h = hodge_space(m, k, s)?;
    ctx.check("", h.dim(), hodge_dim_formula(k, m, s as i64));
    Ok(())
}

fn mt_dim(ctx: &mut Ctx) -> Result<()> {
    let (m, k, g) = (ctx.cell.m, ctx.cell.k, ctx.range());
    let mt = mt_space(m, k, &g)?;
    ctx.check("", mt.dim(), mt_dim_formula(k, m, &g));
    Ok(())
}

fn monogenic_dim(ctx: &mut Ctx) -> Result<()> {
    let (m, k, g) = (ctx.cell.m, ctx.cell.k, ctx.range());
    let mt = mt_space(m, k, &g)?;
    ctx.check("", mt.dim(), c_formula(k, m));
    Ok(())
}

fn lemma6(ctx: &mut Ctx) -> Result<()> {
    let (m, k, s) = (ctx.cell.m, ctx.cell.k, ctx.s());
    let uvw = uvw_decomposition(m, k, s)?;
    let [h, u, v, w] = uvw_dims_formula(m, k, s);
    ctx.check("", uvw.ker_laplacian.dim(), h + u + v + w);
    ctx.check("h", uvw.h.dim(), h);
    ctx.check("u", uvw.u.dim(), u);
    ctx.check("v", uvw.v.dim(), v);
    ctx.check("w", uvw.w.dim(), w);
    let direct = is_direct_sum(&uvw.ker_laplacian, &[&uvw.h, &uvw.u, &uvw.v, &uvw.w])?;
    ctx.check("direct", direct, true);
    // W as the quotient Ker Δ / (Ker dd* ∩ Ker d*d)
    ctx.check(
        "w_quotient",
        uvw.ker_laplacian.dim() - uvw.ker_ddstar_dstard.dim(),
        w,
    );
    Ok(())
}

fn thm7(ctx: &mut Ctx) -> Result<()> {
    let (m, k, s) = (ctx.cell.m, ctx.cell.k, ctx.s());
    let uvw = uvw_decomposition(m, k, s)?;
    let c_u = is_direct_sum(&uvw.ker_ddstar_d, &[&uvw.h, &uvw.u])?;
    ctx.check("c_u", c_u, true);
    let c_v = is_direct_sum(&uvw.ker_dstard_dstar, &[&uvw.h, &uvw.v])?;
    ctx.check("c_v", c_v, true);
    let d_uv = is_direct_sum(&uvw.ker_ddstar_dstard, &[&uvw.h, &uvw.u, &uvw.v])?;
    ctx.check("d", d_uv, true);

    // Ker dd* = Ker d* ⊕ U and Ker d*d = Ker d ⊕ V
    let ambient = FormSpaceDescriptor::single(m, k, s)?;
    let full = Subspace::full(ambient.clone());
    let ker_ddstar = match crate::spaces::d_dstar(m, k, s)? {
        Some(op) => crate::exact_linalg::kernel(&op)?,
        None => full.clone(),
    };
    let ker_dstard = match crate::spaces::dstar_d(m, k, s)? {
        Some(op) => crate::exact_linalg::kernel(&op)?,
        None => full,
    };
    let ker_d = crate::exact_linalg::kernel(&d_matrix(m, k, s)?)?;
    let ker_dstar = crate::exact_linalg::kernel(&dstar_matrix(m, k, s)?)?;
    let split_u = is_direct_sum(&ker_ddstar, &[&ker_dstar, &uvw.u])?;
    ctx.check("ddstar_split", split_u, true);
    let split_v = is_direct_sum(&ker_dstard, &[&ker_d, &uvw.v])?;
    ctx.check("dstard_split", split_v, true);
    Ok(())
}

fn lemma8(ctx: &mut Ctx) -> Result<()> {
    let (m, k, s) = (ctx.cell.m, ctx.cell.k, ctx.s());
    let st = kernel_stratification(m, k, s)?;
    let si = s as i64;
    let levels = (k / 2) as usize + 1;
    let f = |k, s| hodge_dim_formula(k, m, s);
    let mut expect_d = f(k, si);
    let mut expect_ds = f(k, si);
    for j in 0..levels {
        let kj = k - 2 * j as i64;
        let (x, y) = xy_dims_formula(m, k, s, j);
        expect_d += f(kj - 1, si - 1) + x;
        expect_ds += f(kj - 1, si + 1) + y;
    }
    ctx.check("ker_d", st.ker_d.dim(), expect_d);
    ctx.check("ker_dstar", st.ker_dstar.dim(), expect_ds);
    for stratum in &st.strata {
        let (x, y) = xy_dims_formula(m, k, s, stratum.j);
        ctx.check_j("x", stratum.j, stratum.x.dim(), x);
        ctx.check_j("y", stratum.j, stratum.y.dim(), y);
    }
    let ok = st.check();
    ctx.check(
        "reassembly",
        match ok {
            Ok(()) => Value::Bool(true),
            Err(e) => Value::Error(e.to_string()),
        },
        true,
    );
    Ok(())
}

fn fisher(ctx: &mut Ctx) -> Result<()> {
    let (m, k, s) = (ctx.cell.m, ctx.cell.k, ctx.s());
    let strata = fisher_strata(m, k, s)?;
    let ambient = FormSpaceDescriptor::single(m, k, s)?;
    let blades = binomial(m as i64, s as i64);
    for (j, st) in strata.iter().enumerate() {
        ctx.check_j("", j, st.dim(), blades * harmonic_dim(k - 2 * j as i64, m));
    }
    let parts: Vec<&Subspace> = strata.iter().collect();
    ctx.check("total", sum_dims(&parts), ambient.dim());
    let direct = is_direct_sum(&Subspace::full(ambient), &parts)?;
    ctx.check("direct", direct, true);
    Ok(())
}

fn thm2(ctx: &mut Ctx) -> Result<()> {
    let (m, k, g) = (ctx.cell.m, ctx.cell.k, ctx.range());
    let mt = mt_space(m, k, &g)?;
    let phi = phi_matrix(m, k, &g, &mt)?;
    let ker: u128 = (g.p..=g.q)
        .map(|j| hodge_dim_formula(k, m, g.grade(j) as i64))
        .sum();
    let im: u128 = (g.p..g.q)
        .map(|j| hodge_dim_formula(k - 1, m, g.grade(j) as i64 + 1))
        .sum();
    ctx.check("ker", phi.kernel()?.dim(), ker);
    ctx.check("im", phi.image()?.dim(), im);

    let lifter = Lifter::new(m, k, &g)?;
    let basis = FormBasis::new(mt.ambient());
    let mut good = 0usize;
    for _ in 0..ctx.cases {
        let f = basis.form(&ctx.element_of(&mt));
        let split = phi_split_with(&lifter, &f)?;
        let mut re = split.lifted.clone();
        for part in &split.kernel_part {
            re = re.add(part)?;
        }
        let ok = re == f
            && lifter.phi(&split.lifted)? == split.image_part
            && lifter.is_solution(&split.lifted)?;
        good += ok as usize;
    }
    ctx.check("reassemble", good, ctx.cases);
    Ok(())
}

fn random_tuple(ctx: &mut Ctx, spaces: &[(Subspace, FormBasis)]) -> HodgeTuple {
    let (m, k, g) = (ctx.cell.m, ctx.cell.k, ctx.range());
    let components = spaces
        .iter()
        .map(|(sub, basis)| {
            let v = ctx.element_of(sub);
            basis.form(&v)
        })
        .collect();
    HodgeTuple {
        m,
        k,
        range: g,
        components,
    }
}

fn lift_roundtrip(ctx: &mut Ctx) -> Result<()> {
    let (m, k, g) = (ctx.cell.m, ctx.cell.k, ctx.range());
    let lifter = Lifter::new(m, k, &g)?;
    let spaces = (g.p..g.q)
        .map(|j| {
            let sub = hodge_space(m, k - 1, g.grade(j) + 1)?;
            let basis = FormBasis::new(sub.ambient());
            Ok((sub, basis))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut good = 0usize;
    let mut in_mt = 0usize;
    for _ in 0..ctx.cases {
        let t = random_tuple(ctx, &spaces);
        let p = lifter.lift(&t)?;
        good += (lifter.phi(&p)? == t) as usize;
        in_mt += lifter.is_solution(&p)? as usize;
    }
    ctx.check("", good, ctx.cases);
    ctx.check("in_mt", in_mt, ctx.cases);
    Ok(())
}

/// A single term `x^α dx_I` of `𝒫^s_k` that `d` (or `d*` when `dual`)
/// does not annihilate, or `None` when no such term exists.
fn non_closed_term(ctx: &mut Ctx, m: usize, k: i64, s: usize, dual: bool) -> Option<PolyForm> {
    let blades = enumerate_blades(m, s as i64);
    let monomials = enumerate_monomials(m, k);
    let mut candidates = Vec::new();
    for (bi, b) in blades.iter().enumerate() {
        for (ai, a) in monomials.iter().enumerate() {
            // d hits x_i with i ∉ I, d* hits i ∈ I; distinct i give distinct images
            let hit = (1..=m).any(|i| a.exps()[i - 1] > 0 && b.contains(i) == dual);
            if hit {
                candidates.push((bi, ai));
            }
        }
    }
    if candidates.is_empty() {
        return None;
    }
    let (bi, ai) = candidates[ctx.index(candidates.len())];
    let mut c = ctx.coefficient();
    while c == Rational::from_integer(0.into()) {
        c = ctx.coefficient();
    }
    let exps = monomials[ai].exps().to_vec();
    let idx = blades[bi].indices();
    PolyForm::term(m, &exps, &idx, c).ok()
}

fn poincare(ctx: &mut Ctx) -> Result<()> {
    let (m, k, s) = (ctx.cell.m, ctx.cell.k, ctx.s());
    let here = FormBasis::new(&FormSpaceDescriptor::single(m, k, s)?);
    if s >= 1 {
        let solver = PoincareSolver::d(m, k, s)?;
        let gen = d_matrix(m, k + 1, s - 1)?;
        let check_d = d_matrix(m, k + 1, s - 1)?;
        let check_ds = dstar_matrix(m, k + 1, s - 1)?;
        let mut good = 0usize;
        for _ in 0..ctx.cases {
            let g = ctx.vector(gen.source().dim());
            let f = here.form(&gen.apply_coords(&g));
            let q = solver.primitive(&f)?;
            good += (apply(&check_d, &q)? == f && apply(&check_ds, &q)?.is_zero()) as usize;
        }
        ctx.check("d", good, ctx.cases);
        let mut rejected = 0usize;
        let mut tried = 0usize;
        for _ in 0..ctx.cases {
            let Some(e) = non_closed_term(ctx, m, k, s, false) else {
                break;
            };
            tried += 1;
            let g = ctx.vector(gen.source().dim());
            let f = here.form(&gen.apply_coords(&g)).add(&e)?;
            rejected += matches!(solver.primitive(&f), Err(Error::NotClosed)) as usize;
        }
        if tried > 0 {
            ctx.check("not_closed", rejected, tried);
        }
    }
    if s < m {
        let solver = PoincareSolver::dstar(m, k, s)?;
        let gen = dstar_matrix(m, k + 1, s + 1)?;
        let check_d = d_matrix(m, k + 1, s + 1)?;
        let check_ds = dstar_matrix(m, k + 1, s + 1)?;
        let mut good = 0usize;
        for _ in 0..ctx.cases {
            let g = ctx.vector(gen.source().dim());
            let f = here.form(&gen.apply_coords(&g));
            let q = solver.primitive(&f)?;
            good += (apply(&check_ds, &q)? == f && apply(&check_d, &q)?.is_zero()) as usize;
        }
        ctx.check("dstar", good, ctx.cases);
        let mut rejected = 0usize;
        let mut tried = 0usize;
        for _ in 0..ctx.cases {
            let Some(e) = non_closed_term(ctx, m, k, s, true) else {
                break;
            };
            tried += 1;
            let g = ctx.vector(gen.source().dim());
            let f = here.form(&gen.apply_coords(&g)).add(&e)?;
            rejected += matches!(solver.primitive(&f), Err(Error::NotCoclosed)) as usize;
        }
        if tried > 0 {
            ctx.check("not_coclosed", rejected, tried);
        }
    }
    Ok(())
}

fn scaled_identity(desc: &FormSpaceDescriptor, factor: i64) -> Result<OperatorMatrix> {
    let n = desc.dim();
    OperatorMatrix::new(
        desc.clone(),
        desc.clone(),
        SparseMatrix::identity(n).scale(&Rational::from_integer(factor.into())),
    )
}

fn identities(ctx: &mut Ctx) -> Result<()> {
    let (m, k, s) = (ctx.cell.m, ctx.cell.k, ctx.s());
    if s + 2 <= m {
        let dd = d_matrix(m, k - 1, s + 1)?.compose(&d_matrix(m, k, s)?)?;
        ctx.check("dd", dd.is_zero(), true);
    }
    if s >= 2 {
        let dsds = dstar_matrix(m, k - 1, s - 1)?.compose(&dstar_matrix(m, k, s)?)?;
        ctx.check("dsds", dsds.is_zero(), true);
    }

    // d ι_E + ι_E d = (k + s)·id
    let ambient = FormSpaceDescriptor::single(m, k, s)?;
    let mut cartan = scaled_identity(&ambient, 0)?;
    if s >= 1 {
        let term = d_matrix(m, k + 1, s - 1)?.compose(&euler_contraction_matrix(m, k, s)?)?;
        cartan = cartan.add(&term)?;
    }
    if s < m {
        let term = euler_contraction_matrix(m, k - 1, s + 1)?.compose(&d_matrix(m, k, s)?)?;
        cartan = cartan.add(&term)?;
    }
    ctx.check(
        "cartan",
        cartan == scaled_identity(&ambient, k + s as i64)?,
        true,
    );

    let h = hodge_space(m, k, s)?;
    let dual = hodge_space(m, k, m - s)?;
    ctx.check("star_dim", dual.dim(), h.dim());
    let star = star_matrix(m, k, s)?;
    let maps = h
        .basis()
        .iter()
        .all(|v| dual.contains(&star.apply_coords(v)));
    ctx.check("star_maps", maps, true);
    let back = star_matrix(m, k, m - s)?.compose(&star)?;
    let sign = if (s * (m - s)) % 2 == 0 { 1 } else { -1 };
    ctx.check(
        "star_involution",
        back == scaled_identity(&ambient, sign)?,
        true,
    );
    Ok(())
}
