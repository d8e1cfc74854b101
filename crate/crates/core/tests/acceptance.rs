//! Acceptance criteria, one line per criterion. Every check is exact.
//!
//! Runs without the libtest harness so the summary lines always reach
//! stdout; the process exits non-zero when any criterion fails.

use std::process::{Command, ExitCode};
use std::time::Instant;

use formspace::exact_linalg::{intersect, kernel, rank, subspace_sum, Subspace};
use formspace::exterior_poly::{binomial, enumerate_blades, enumerate_monomials, FormBasis};
use formspace::gmt::{c_formula, mt_dim_formula, mt_space, phi_split_with, Lifter, PoincareSolver};
use formspace::operators::{
    apply, d_matrix, dirac_block_matrix, dstar_matrix, euler_contraction_matrix, gradewise_d,
    phi_matrix, OperatorMatrix,
};
use formspace::spaces::{
    d_dstar, dstar_d, fisher_strata, hodge_dim_formula, hodge_space, kernel_stratification,
    uvw_decomposition, uvw_dims_formula, xy_dims_formula,
};
use formspace::{
    Error, FormSpaceDescriptor, GradeRange, HodgeTuple, PolyForm, Rational, SparseVec,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CASES: usize = 100;
const SEED: u64 = 7_151_999;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn d(k: i64, m: usize, s: i64) -> u128 {
    hodge_dim_formula(k, m, s)
}

fn expect<T: PartialEq + std::fmt::Debug>(what: &str, got: T, want: T) -> Result<(), String> {
    if got == want {
        Ok(())
    } else {
        Err(format!("{what}: computed {got:?}, expected {want:?}"))
    }
}

fn lib<T>(what: &str, r: formspace::Result<T>) -> Result<T, String> {
    r.map_err(|e| format!("{what}: {e}"))
}

struct Rand(ChaCha8Rng);

impl Rand {
    fn new(salt: u64) -> Self {
        Rand(ChaCha8Rng::seed_from_u64(
            SEED ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15),
        ))
    }

    fn coeff(&mut self) -> Rational {
        let n: i64 = self.0.gen_range(-7..=7);
        let den: i64 = self.0.gen_range(1..=5);
        Rational::new(n.into(), den.into())
    }

    fn nonzero(&mut self) -> Rational {
        loop {
            let c = self.coeff();
            if c != Rational::from_integer(0.into()) {
                return c;
            }
        }
    }

    fn vector(&mut self, dim: usize) -> SparseVec {
        SparseVec::from_entries((0..dim).map(|i| (i, self.coeff())).collect::<Vec<_>>())
    }

    fn element(&mut self, sub: &Subspace) -> SparseVec {
        let c: Vec<Rational> = (0..sub.dim()).map(|_| self.coeff()).collect();
        sub.combination(&c)
    }
}

fn c1_hodge_dimensions() -> Outcome {
    let mut cells = 0;
    for m in 2..=6 {
        for k in 0..=4 {
            for s in 0..=m {
                let h = lib("hodge_space", hodge_space(m, k, s))?;
                expect(
                    &format!("dim H (m={m},k={k},s={s})"),
                    h.dim() as u128,
                    d(k, m, s as i64),
                )?;
                if k == 0 {
                    expect("dim H^s_0", h.dim() as u128, binomial(m as i64, s as i64))?;
                }
                cells += 1;
            }
        }
    }
    expect(
        "(3,1,1)",
        lib("hodge_space", hodge_space(3, 1, 1))?.dim(),
        5,
    )?;
    expect(
        "(4,2,2)",
        lib("hodge_space", hodge_space(4, 2, 2))?.dim(),
        30,
    )?;
    Ok(format!("{cells} cells"))
}

fn c2_mt_dimensions() -> Outcome {
    let mut cells = 0;
    for m in 2..=5 {
        for k in 0..=3 {
            for g in GradeRange::all(m) {
                let mt = lib("mt_space", mt_space(m, k, &g))?;
                let even: u128 = (g.p..=g.q).map(|j| d(k, m, (g.r + 2 * j) as i64)).sum();
                let odd: u128 = (g.p..g.q)
                    .map(|j| d(k - 1, m, (g.r + 2 * j + 1) as i64))
                    .sum();
                let sum = even + odd;
                expect(
                    &format!("dim MT (m={m},k={k},{g:?})"),
                    mt.dim() as u128,
                    sum,
                )?;
                expect("mt_dim_formula", mt_dim_formula(k, m, &g), sum)?;
                cells += 1;
            }
        }
    }
    let g = lib("range", GradeRange::new(4, 0, 0, 2))?;
    expect(
        "(4,1,(0,0,2))",
        lib("mt_space", mt_space(4, 1, &g))?.dim(),
        24,
    )?;
    Ok(format!("{cells} cells"))
}

fn c3_monogenic() -> Outcome {
    let mut cells = 0;
    for m in 2..=5usize {
        for k in 0..=4i64 {
            let g = lib("range", GradeRange::new(m, 0, 0, m / 2))?;
            let mt = lib("mt_space", mt_space(m, k, &g))?;
            let c = (1u128 << (m - 1)) * binomial(k + m as i64 - 2, m as i64 - 2);
            expect(&format!("c({k},{m})"), mt.dim() as u128, c)?;
            expect("c_formula", c_formula(k, m), c)?;
            cells += 1;
        }
    }
    expect("c(1,4)", c_formula(1, 4), 24)?;
    Ok(format!("{cells} cells"))
}

/// The four-term sum, with the last term absent in the extreme grades
/// where `W^0_k = W^m_k = {0}`.
fn c4_harmonic_kernel() -> Outcome {
    let mut cells = 0;
    let mut extreme = 0;
    for m in 2..=5 {
        for k in 0..=4 {
            for s in 0..=m {
                let si = s as i64;
                let w = if s == 0 || s == m {
                    if d(k - 2, m, si) != 0 {
                        extreme += 1;
                    }
                    0
                } else {
                    d(k - 2, m, si)
                };
                let want = [d(k, m, si), d(k - 1, m, si - 1), d(k - 1, m, si + 1), w];
                let uvw = lib("uvw", uvw_decomposition(m, k, s))?;
                let got = [uvw.h.dim(), uvw.u.dim(), uvw.v.dim(), uvw.w.dim()].map(|x| x as u128);
                let cell = format!("(m={m},k={k},s={s})");
                expect(&format!("pieces {cell}"), got, want)?;
                expect("uvw_dims_formula", uvw_dims_formula(m, k, s), want)?;
                let total: u128 = want.iter().sum();
                expect(
                    &format!("dim Ker Δ {cell}"),
                    uvw.ker_laplacian.dim() as u128,
                    total,
                )?;
                let all = [&uvw.h, &uvw.u, &uvw.v, &uvw.w]
                    .into_iter()
                    .try_fold(Subspace::zero(uvw.h.ambient().clone()), |acc, p| {
                        subspace_sum(&acc, p)
                    });
                expect(
                    &format!("span {cell}"),
                    lib("sum", all)?,
                    uvw.ker_laplacian.clone(),
                )?;
                cells += 1;
            }
        }
    }
    let uvw = lib("uvw", uvw_decomposition(4, 2, 2))?;
    expect(
        "(4,2,2)",
        [
            uvw.ker_laplacian.dim(),
            uvw.h.dim(),
            uvw.u.dim(),
            uvw.v.dim(),
            uvw.w.dim(),
        ],
        [54, 30, 9, 9, 6],
    )?;
    Ok(format!(
        "{cells} cells, {extreme} extreme-grade cells with W = 0"
    ))
}

fn kernel_or_full(
    op: Option<OperatorMatrix>,
    ambient: &FormSpaceDescriptor,
) -> Result<Subspace, String> {
    match op {
        Some(op) => lib("kernel", kernel(&op)),
        None => Ok(Subspace::full(ambient.clone())),
    }
}

/// Mutual containment plus additive dimensions.
fn direct_sum_equals(what: &str, whole: &Subspace, parts: &[&Subspace]) -> Result<(), String> {
    let mut acc = Subspace::zero(whole.ambient().clone());
    for p in parts {
        acc = lib("sum", subspace_sum(&acc, p))?;
    }
    let dims: usize = parts.iter().map(|p| p.dim()).sum();
    expect(&format!("{what}: pieces independent"), acc.dim(), dims)?;
    expect(
        &format!("{what}: sum inside"),
        whole.contains_subspace(&acc),
        true,
    )?;
    expect(
        &format!("{what}: sum covers"),
        acc.contains_subspace(whole),
        true,
    )
}

fn c5_subspace_equalities() -> Outcome {
    let mut cells = 0;
    for m in 2..=4 {
        for k in 0..=3 {
            for s in 0..=m {
                let ambient = lib("desc", FormSpaceDescriptor::single(m, k, s))?;
                let ker_d = lib("ker d", kernel(&lib("d", d_matrix(m, k, s))?))?;
                let ker_ds = lib("ker d*", kernel(&lib("d*", dstar_matrix(m, k, s))?))?;
                let ker_dds = kernel_or_full(lib("dd*", d_dstar(m, k, s))?, &ambient)?;
                let ker_dsd = kernel_or_full(lib("d*d", dstar_d(m, k, s))?, &ambient)?;
                let uvw = lib("uvw", uvw_decomposition(m, k, s))?;
                let [_, u, v, _] = uvw_dims_formula(m, k, s);
                expect("dim U", uvw.u.dim() as u128, u)?;
                expect("dim V", uvw.v.dim() as u128, v)?;
                let cell = format!("(m={m},k={k},s={s})");
                let (h, u, v) = (&uvw.h, &uvw.u, &uvw.v);
                direct_sum_equals(
                    &format!("Ker dd* ∩ Ker d {cell}"),
                    &lib("meet", intersect(&ker_dds, &ker_d))?,
                    &[h, u],
                )?;
                direct_sum_equals(
                    &format!("Ker d*d ∩ Ker d* {cell}"),
                    &lib("meet", intersect(&ker_dsd, &ker_ds))?,
                    &[h, v],
                )?;
                direct_sum_equals(
                    &format!("Ker dd* ∩ Ker d*d {cell}"),
                    &lib("meet", intersect(&ker_dds, &ker_dsd))?,
                    &[h, u, v],
                )?;
                cells += 1;
            }
        }
    }
    Ok(format!("{cells} cells, 3 equalities each"))
}

fn c6_split_lift() -> Outcome {
    let mut ranges = 0;
    let mut random = 0;
    for m in 2..=5 {
        for k in 0..=3 {
            for g in GradeRange::all(m) {
                let tag = format!("(m={m},k={k},{g:?})");
                let mt = lib("mt", mt_space(m, k, &g))?;
                let phi = lib("phi", phi_matrix(m, k, &g, &mt))?;
                let ker: u128 = (g.p..=g.q).map(|j| d(k, m, g.grade(j) as i64)).sum();
                let im: u128 = (g.p..g.q).map(|j| d(k - 1, m, g.grade(j) as i64 + 1)).sum();
                expect(
                    &format!("dim Ker Φ {tag}"),
                    lib("ker", phi.kernel())?.dim() as u128,
                    ker,
                )?;
                expect(
                    &format!("dim Im Φ {tag}"),
                    lib("im", phi.image())?.dim() as u128,
                    im,
                )?;

                let mut rng =
                    Rand::new((m * 1000 + k as usize * 100 + g.r * 25 + g.p * 5 + g.q) as u64);
                let lifter = lib("lifter", Lifter::new(m, k, &g))?;
                let dirac = lib("dirac", dirac_block_matrix(m, k, &g))?;
                let grad_d = lib("gradewise d", gradewise_d(m, k, &g))?;
                let targets = (g.p..g.q)
                    .map(|j| {
                        let h = hodge_space(m, k - 1, g.grade(j) + 1)?;
                        let b = FormBasis::new(h.ambient());
                        Ok((h, b))
                    })
                    .collect::<formspace::Result<Vec<_>>>();
                let targets = lib("targets", targets)?;
                let mt_basis = FormBasis::new(mt.ambient());
                for _ in 0..CASES {
                    // Φ(lift t) = t, computed through the raw gradewise d
                    let t = HodgeTuple {
                        m,
                        k,
                        range: g,
                        components: targets
                            .iter()
                            .map(|(h, b)| b.form(&rng.element(h)))
                            .collect(),
                    };
                    let p = lib("lift", lifter.lift(&t))?;
                    expect(
                        &format!("lift in MT {tag}"),
                        lib("dirac", apply(&dirac, &p))?.is_zero(),
                        true,
                    )?;
                    let dp = lib("d", apply(&grad_d, &p))?;
                    for (j, c) in (g.p..g.q).zip(&t.components) {
                        expect(
                            &format!("Φ(lift t) grade {} {tag}", g.grade(j) + 1),
                            &dp.component(g.grade(j) + 1),
                            c,
                        )?;
                    }

                    // split then reassemble
                    let f = mt_basis.form(&rng.element(&mt));
                    let split = lib("split", phi_split_with(&lifter, &f))?;
                    let mut re = split.lifted.clone();
                    for part in &split.kernel_part {
                        re = lib("add", re.add(part))?;
                    }
                    expect(&format!("reassembly {tag}"), &re, &f)?;
                    random += 2;
                }
                ranges += 1;
            }
        }
    }
    Ok(format!(
        "{ranges} (m,k,range) cells, {random} random round trips"
    ))
}

/// A form `f + x^α dx_I` where the added term has nonzero `d` (or `d*`).
fn perturbation(rng: &mut Rand, m: usize, k: i64, s: usize, dual: bool) -> Option<PolyForm> {
    let mut cands = Vec::new();
    for b in enumerate_blades(m, s as i64) {
        for a in enumerate_monomials(m, k) {
            if (1..=m).any(|i| a.exps()[i - 1] > 0 && b.contains(i) == dual) {
                cands.push((b, a));
            }
        }
    }
    if cands.is_empty() {
        return None;
    }
    let (b, a) = &cands[rng.0.gen_range(0..cands.len())];
    PolyForm::term(m, a.exps(), &b.indices(), rng.nonzero()).ok()
}

fn c7_primitives() -> Outcome {
    let mut solved = 0;
    let mut rejected = 0;
    for m in 2..=5 {
        for k in 0..=3 {
            for s in 0..=m {
                let mut rng = Rand::new((m * 100 + k as usize * 10 + s) as u64);
                let here = FormBasis::new(&lib("desc", FormSpaceDescriptor::single(m, k, s))?);
                let tag = format!("(m={m},k={k},s={s})");
                for dual in [false, true] {
                    if (!dual && s == 0) || (dual && s == m) {
                        continue;
                    }
                    let src = if dual { s + 1 } else { s - 1 };
                    let (solver, gen) = if dual {
                        (
                            lib("solver", PoincareSolver::dstar(m, k, s))?,
                            lib("d*", dstar_matrix(m, k + 1, src))?,
                        )
                    } else {
                        (
                            lib("solver", PoincareSolver::d(m, k, s))?,
                            lib("d", d_matrix(m, k + 1, src))?,
                        )
                    };
                    let d_q = lib("d", d_matrix(m, k + 1, src))?;
                    let ds_q = lib("d*", dstar_matrix(m, k + 1, src))?;
                    let (main, side) = if dual { (&ds_q, &d_q) } else { (&d_q, &ds_q) };
                    for _ in 0..CASES {
                        let f = here.form(&gen.apply_coords(&rng.vector(gen.source().dim())));
                        let q = lib("primitive", solver.primitive(&f))?;
                        expect(
                            &format!("primitive equation {tag}"),
                            lib("apply", apply(main, &q))?,
                            f,
                        )?;
                        expect(
                            &format!("gauge equation {tag}"),
                            lib("apply", apply(side, &q))?.is_zero(),
                            true,
                        )?;
                        solved += 1;
                    }
                    for _ in 0..CASES {
                        let Some(e) = perturbation(&mut rng, m, k, s, dual) else {
                            break;
                        };
                        let f = here.form(&gen.apply_coords(&rng.vector(gen.source().dim())));
                        let f = lib("add", f.add(&e))?;
                        let got = solver.primitive(&f);
                        let ok = if dual {
                            matches!(got, Err(Error::NotCoclosed))
                        } else {
                            matches!(got, Err(Error::NotClosed))
                        };
                        expect(&format!("rejection {tag} dual={dual}"), ok, true)?;
                        rejected += 1;
                    }
                }
            }
        }
    }
    Ok(format!("{solved} primitives, {rejected} rejections"))
}

fn c8_stratification() -> Outcome {
    let mut cells = 0;
    for m in 2..=4 {
        for k in 0..=4 {
            for s in 0..=m {
                let tag = format!("(m={m},k={k},s={s})");
                let ambient = lib("desc", FormSpaceDescriptor::single(m, k, s))?;
                let rank_d = lib("rank", rank(&lib("d", d_matrix(m, k, s))?))?;
                let rank_ds = lib("rank", rank(&lib("d*", dstar_matrix(m, k, s))?))?;
                let st = lib("stratification", kernel_stratification(m, k, s))?;
                let si = s as i64;
                let (mut want_d, mut want_ds) = (d(k, m, si), d(k, m, si));
                for j in 0..=(k / 2) as usize {
                    let kj = k - 2 * j as i64;
                    let (x, y) = xy_dims_formula(m, k, s, j);
                    want_d += d(kj - 1, m, si - 1) + x;
                    want_ds += d(kj - 1, m, si + 1) + y;
                }
                expect(
                    &format!("dim Ker d {tag}"),
                    (ambient.dim() - rank_d) as u128,
                    want_d,
                )?;
                expect(
                    &format!("dim Ker d* {tag}"),
                    (ambient.dim() - rank_ds) as u128,
                    want_ds,
                )?;
                expect(
                    &format!("reassembled Ker d {tag}"),
                    st.ker_d_reassembled.dim() as u128,
                    want_d,
                )?;
                expect(
                    &format!("reassembled Ker d* {tag}"),
                    st.ker_dstar_reassembled.dim() as u128,
                    want_ds,
                )?;
                lib(&format!("stratification identities {tag}"), st.check())?;

                let strata = lib("fisher", fisher_strata(m, k, s))?;
                let total: usize = strata.iter().map(Subspace::dim).sum();
                expect(&format!("Fisher total {tag}"), total, ambient.dim())?;
                let mut span = Subspace::zero(ambient.clone());
                for st in &strata {
                    span = lib("sum", subspace_sum(&span, st))?;
                }
                expect(&format!("Fisher span {tag}"), span.dim(), ambient.dim())?;
                cells += 1;
            }
        }
    }
    let st = lib("stratification", kernel_stratification(3, 2, 1))?;
    let u: usize = st.u_strata.iter().map(Subspace::dim).sum();
    let x: usize = st.strata.iter().map(|s| s.x.dim()).sum();
    expect(
        "(3,2,1) Ker d",
        [st.ker_d.dim(), st.h.dim(), u, x],
        [10, 7, 0, 3],
    )?;
    Ok(format!("{cells} cells"))
}

fn c9_identities() -> Outcome {
    let mut cells = 0;
    for m in 2..=5 {
        for k in 0..=4 {
            for s in 0..=m {
                let tag = format!("(m={m},k={k},s={s})");
                let ambient = lib("desc", FormSpaceDescriptor::single(m, k, s))?;
                if s + 2 <= m {
                    let dd = lib(
                        "dd",
                        lib("d", d_matrix(m, k - 1, s + 1))?.compose(&lib("d", d_matrix(m, k, s))?),
                    )?;
                    expect(&format!("d² = 0 {tag}"), dd.is_zero(), true)?;
                }
                if s >= 2 {
                    let a = lib("d*", dstar_matrix(m, k - 1, s - 1))?;
                    let dsds = lib("d*d*", a.compose(&lib("d*", dstar_matrix(m, k, s))?))?;
                    expect(&format!("(d*)² = 0 {tag}"), dsds.is_zero(), true)?;
                }
                // apply (d ι_E + ι_E d) to every basis vector
                let n = ambient.dim();
                let up = if s < m {
                    let de = lib("d", d_matrix(m, k, s))?;
                    Some(lib(
                        "∘",
                        lib("ι_E", euler_contraction_matrix(m, k - 1, s + 1))?.compose(&de),
                    )?)
                } else {
                    None
                };
                let down = if s >= 1 {
                    let ie = lib("ι_E", euler_contraction_matrix(m, k, s))?;
                    Some(lib("∘", lib("d", d_matrix(m, k + 1, s - 1))?.compose(&ie))?)
                } else {
                    None
                };
                let factor = Rational::from_integer((k + s as i64).into());
                for i in 0..n {
                    let e = SparseVec::unit(i);
                    let mut acc = SparseVec::new();
                    for op in up.iter().chain(down.iter()) {
                        acc = acc.add(&op.apply_coords(&e));
                    }
                    expect(&format!("Cartan {tag} basis {i}"), acc, e.scale(&factor))?;
                }
                expect(
                    &format!("star duality {tag}"),
                    d(k, m, s as i64),
                    d(k, m, (m - s) as i64),
                )?;
                let h = lib("H", hodge_space(m, k, s))?;
                let dual = lib("H", hodge_space(m, k, m - s))?;
                expect(&format!("dim H vs dim H^(m-s) {tag}"), h.dim(), dual.dim())?;
                cells += 1;
            }
        }
    }
    Ok(format!("{cells} cells on full bases"))
}

fn c10_determinism() -> Outcome {
    let dir = std::env::temp_dir().join(format!("formspace-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let mut reports = Vec::new();
    for run in 0..2 {
        let out = dir.join(format!("run{run}.json"));
        let status = Command::new(env!("CARGO_BIN_EXE_formspace"))
            .args([
                "verify", "--suite", "all", "--seed", "424242", "--format", "json", "--out",
            ])
            .arg(&out)
            .status()
            .map_err(|e| format!("spawn: {e}"))?;
        expect(&format!("run {run} exit status"), status.code(), Some(0))?;
        reports.push(std::fs::read(&out).map_err(|e| e.to_string())?);
    }
    let _ = std::fs::remove_dir_all(&dir);
    expect("report bytes identical", reports[0] == reports[1], true)?;
    Ok(format!("two runs, {} identical bytes", reports[0].len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("Hodge dimensions", c1_hodge_dimensions),
        ("GMT dimensions", c2_mt_dimensions),
        ("monogenic count c(k,m)", c3_monogenic),
        ("Ker Δ = H ⊕ U ⊕ V ⊕ W", c4_harmonic_kernel),
        ("kernel intersections", c5_subspace_equalities),
        ("split and lift", c6_split_lift),
        ("Poincaré primitives", c7_primitives),
        ("kernel stratification and Fisher strata", c8_stratification),
        ("operator identities", c9_identities),
        ("deterministic verify reports", c10_determinism),
    ];
    let filter: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let n = i + 1;
        if !filter.is_empty() && !filter.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {n}: PASS  {name} ({detail}; {secs:.1}s)"),
            Err(why) => {
                failed += 1;
                println!("criterion {n}: FAIL  {name} ({why})");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
