//! Pull-backs along equivariant maps and the kernel of `a*ω + ϖ` on a
//! conjugacy class.

use std::f64::consts::PI;
use std::sync::Arc;

use qpath::algebroid::{Algebroid, EquivariantAlgebroid, Field};
use qpath::forms::{eta_form, eta_g_linear};
use qpath::lifting::varpi_form;
use qpath::path::{Section, TimeGrid};
use qpath::pullback::{
    exponential_slice, generator_row, gram_kernel, loop_velocity, project_a_prime, span_residual, ClassTwoForm,
    ConjugacyClass, EquivariantMap, PullbackAlgebroid, PullbackSection, TruncatedBasis,
};
use qpath::sampling::Sampler;
use qpath::{Context, Matrix, Result, Vector};

use crate::check::{Check, Outcome, Probe, Worst};
use crate::config::Suite::Qham as S;

/// Grid for the truncated Fourier basis; mode 8 needs far more than 201 nodes.
const KERNEL_GRID: usize = 4001;
const N_MAX: [usize; 3] = [4, 6, 8];
const THRESHOLDS: [f64; 3] = [1e-7, 1e-8, 1e-9];
const ORACLE_TOL: f64 = 1e-4;

pub fn checks() -> Vec<Check> {
    vec![
        Check {
            suite: S,
            name: "sign_oracle",
            anchor: "d_G ω + Φ*η_G = 0 on the conjugacy class of exp(π/2 e_last)",
            tolerance: ORACLE_TOL,
            run: sign_oracle,
        },
        Check {
            suite: S,
            name: "kernel",
            anchor: "ker(a*ω + ϖ) = span of generators; |dim − dim g| over n_max ∈ {4,6,8} and three thresholds",
            tolerance: 0.0,
            run: kernel,
        },
        Check {
            suite: S,
            name: "generator_rows",
            anchor: "(a*ω + ϖ)(x_C ⊕ x_A, ·) = 0 on the truncated basis",
            tolerance: 1e-5,
            run: generator_rows,
        },
        Check {
            suite: S,
            name: "kernel_loops",
            anchor: "kernel vectors have constant loop part, max ‖ξ̇‖",
            tolerance: 1e-4,
            run: kernel_loops,
        },
        Check {
            suite: S,
            name: "pullback_eta",
            anchor: "d(Φ*ϖ) = Φ*η and ι_{x} Φ*ϖ = −Φ*η_G^{(1)}(x) for Φ = mult",
            tolerance: 1e-4,
            run: pullback_eta,
        },
        Check {
            suite: S,
            name: "pullback_jacobi",
            anchor: "Jacobi for the bracket of Φ^!A",
            tolerance: 1e-4,
            run: pullback_jacobi,
        },
        Check {
            suite: S,
            name: "functoriality",
            anchor: "Φ^!(dϖ) = d(Φ^!ϖ) on Φ-related sections",
            tolerance: 1e-4,
            run: functoriality,
        },
        Check {
            suite: S,
            name: "projection_closure",
            anchor: "the projection onto paths based at 0 keeps the exponential slice closed",
            tolerance: 1e-6,
            run: projection_closure,
        },
    ]
}

/// Everything measured on the conjugacy class, computed once per run.
#[derive(Clone, Debug)]
pub(crate) struct KernelStudy {
    oracle: f64,
    sign: f64,
    /// `(n_max, threshold, dimension)` for every combination tried.
    dimensions: Vec<(usize, f64, usize)>,
    expected: usize,
    rows: f64,
    loops: f64,
    antisymmetry: f64,
}

fn quarter_turn(alg: &qpath::lie::LieAlgebra) -> Matrix {
    alg.exp(&(alg.unit(alg.dim() - 1) * (PI / 2.0)))
}

fn study(ctx: &Context, run_seed: u64) -> Result<KernelStudy> {
    let fine = Context { grid: TimeGrid::new(KERNEL_GRID)?, ..ctx.clone() };
    let alg = &fine.alg;
    let class = ConjugacyClass::new(alg, quarter_turn(alg));
    let mut rng = Sampler::for_check(run_seed, "qham.kernel");
    let omega = ClassTwoForm::calibrate(&class, &mut rng, 8, ORACLE_TOL)?;
    let oracle = omega.oracle_residual(&mut rng, 8);
    let g = class.point(&rng.group_point(alg, 2.0));
    let mut out = KernelStudy {
        oracle,
        sign: omega.sign,
        dimensions: Vec::new(),
        expected: alg.dim(),
        rows: 0.0,
        loops: 0.0,
        antisymmetry: 0.0,
    };
    let (mut rows, mut loops) = (Worst::default(), Worst::default());
    for n_max in N_MAX {
        let basis = TruncatedBasis::new(&class, &g, n_max)?;
        for threshold in THRESHOLDS {
            let k = gram_kernel(&fine, &omega, &basis, threshold)?;
            out.dimensions.push((n_max, threshold, k.dimension));
            out.antisymmetry = out.antisymmetry.max(k.antisymmetry);
            for v in &k.vectors {
                loops.see(loop_velocity(&fine, &basis, v));
            }
        }
        for i in 0..alg.dim() {
            for r in generator_row(&fine, &omega, &basis, &alg.unit(i)) {
                rows.see(r);
            }
        }
    }
    out.rows = rows.0;
    out.loops = loops.0;
    Ok(out)
}

/// The shared study, or a skip when the group has no symplectic class.
fn shared_study<'a>(p: &'a Probe) -> Result<std::result::Result<&'a KernelStudy, Outcome>> {
    if !p.ctx.alg.is_nondegenerate() {
        return Ok(Err(Outcome::skipped(format!("the invariant form on {} is degenerate", p.ctx.alg.name()))));
    }
    match p.shared.kernel.get_or_init(|| study(p.ctx, p.run_seed)) {
        Ok(s) => Ok(Ok(s)),
        Err(e) => Err(e.clone()),
    }
}

fn sign_oracle(p: &mut Probe) -> Result<Outcome> {
    Ok(match shared_study(p)? {
        Ok(s) => Outcome::residual(s.oracle).with_note(format!("sign {:+}", s.sign)),
        Err(skip) => skip,
    })
}

fn kernel(p: &mut Probe) -> Result<Outcome> {
    Ok(match shared_study(p)? {
        Ok(s) => {
            let worst = s.dimensions.iter().map(|&(_, _, d)| d.abs_diff(s.expected)).max().unwrap_or(0);
            let dims: Vec<String> = s.dimensions.iter().map(|(n, t, d)| format!("{n}/{t:e}:{d}")).collect();
            Outcome::residual(worst as f64).with_note(format!(
                "expected {}, found {}; antisymmetry {:e}",
                s.expected,
                dims.join(" "),
                s.antisymmetry
            ))
        }
        Err(skip) => skip,
    })
}

fn generator_rows(p: &mut Probe) -> Result<Outcome> {
    Ok(match shared_study(p)? {
        Ok(s) => Outcome::residual(s.rows),
        Err(skip) => skip,
    })
}

fn kernel_loops(p: &mut Probe) -> Result<Outcome> {
    Ok(match shared_study(p)? {
        Ok(s) => Outcome::residual(s.loops),
        Err(skip) => skip,
    })
}

fn multiplication(ctx: &Context) -> PullbackAlgebroid {
    PullbackAlgebroid::new(EquivariantMap::multiplication(&ctx.alg, &ctx.tangent(2)))
}

fn pullback_eta(p: &mut Probe) -> Result<Outcome> {
    let ctx = p.ctx;
    let am = multiplication(ctx);
    let varpi_m = am.varpi_form(ctx);
    let d_varpi = varpi_m.d(&am);
    let eta3 = am.pullback_tangent(&eta_form(&ctx.alg, 0));
    let mut worst = Worst::default();
    for _ in 0..p.samples {
        let q = p.points(2, 1.0);
        let args: Vec<PullbackSection> = (0..3).map(|_| am.sample(&mut p.rng, ctx.bump)).collect();
        worst.see(d_varpi.value(&q, &args) - eta3.value(&q, &args));
        let x = p.rng.vector(&ctx.alg, 1.0);
        let xi = am.sample(&mut p.rng, ctx.bump);
        let contracted = -varpi_m.value(&q, &[am.generator(&x), xi.clone()]);
        worst.see(contracted - am.pullback_tangent(&eta_g_linear(&ctx.alg, 0, &x)).value(&q, &[xi]));
    }
    Ok(worst.outcome())
}

fn pullback_jacobi(p: &mut Probe) -> Result<Outcome> {
    let ctx = p.ctx;
    let am = multiplication(ctx);
    let mut worst = Worst::default();
    for _ in 0..p.samples {
        let [a, b, c]: [PullbackSection; 3] = std::array::from_fn(|_| am.sample(&mut p.rng, ctx.bump));
        let jac = [
            am.bracket(&am.bracket(&a, &b), &c),
            am.bracket(&am.bracket(&b, &c), &a),
            am.bracket(&am.bracket(&c, &a), &b),
        ];
        let q = p.points(2, 1.0);
        for t in super::TIMES {
            worst.see(jac.iter().fold(ctx.alg.zero(), |acc, x| acc + x.profile(&q, t)).amax());
        }
        let fields: Vec<Vec<Vector>> = jac.iter().map(|x| x.tangent(&q)).collect();
        for i in 0..2 {
            worst.see((&fields[0][i] + &fields[1][i] + &fields[2][i]).amax());
        }
    }
    Ok(worst.outcome())
}

/// `X = (v∘Φ, 0)` over `ξ`, which is Φ-related to `ξ`.
fn related(am: &PullbackAlgebroid, xi: &Section, zero: Vector) -> PullbackSection {
    let x1 = xi.clone();
    let field: Field = Arc::new(move |q: &[Matrix]| vec![x1.anchor(&(&q[0] * &q[1])), zero.clone()]);
    am.pull_section(xi, field)
}

fn functoriality(p: &mut Probe) -> Result<Outcome> {
    let ctx = p.ctx;
    let am = multiplication(ctx);
    let d_varpi = varpi_form(ctx).d(&ctx.atiyah());
    let rhs = am.varpi_form(ctx).d(&am);
    let mut worst = Worst::default();
    for _ in 0..p.samples {
        let q = p.points(2, 1.0);
        let sections = p.sections::<3>();
        let pulled: Vec<PullbackSection> = sections.iter().map(|xi| related(&am, xi, ctx.alg.zero())).collect();
        for x in &pulled {
            worst.see(am.seam_residual(x, &q));
        }
        worst.see(d_varpi.value(&am.map.value(&q), &sections) - rhs.value(&q, &pulled));
    }
    Ok(worst.outcome())
}

/// The exponential slice and its projection both close under the bracket;
/// a note records how far a generic triple is from closing, as a control.
fn projection_closure(p: &mut Probe) -> Result<Outcome> {
    let ctx = p.ctx;
    let alg = &ctx.alg;
    if !alg.is_nondegenerate() {
        return Ok(Outcome::skipped(format!("the invariant form on {} is degenerate", alg.name())));
    }
    let at = ctx.atiyah();
    let n = alg.dim();
    let slice: Vec<Section> = (0..n).map(|i| exponential_slice(alg, &alg.unit(i), 0.3)).collect();
    let projected: Vec<Section> = slice.iter().map(|x| project_a_prime(alg, x)).collect();
    let mut worst = Worst::default();
    let mut control = Worst::default();
    for _ in 0..p.samples {
        let g = p.point(0.8);
        for x in &slice {
            worst.see(x.seam_residual(alg, &g));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                worst.see(span_residual(&at.bracket(&slice[i], &slice[j]), &slice, &g, 40));
                worst.see(span_residual(&at.bracket(&projected[i], &projected[j]), &projected, &g, 40));
            }
        }
        let generic: Vec<Section> = (0..n).map(|_| project_a_prime(alg, &p.rng.section(ctx))).collect();
        control.see(span_residual(&at.bracket(&generic[0], &generic[1]), &generic, &g, 40));
    }
    Ok(worst.outcome().with_note(format!("generic control bracket leaves the span by {:e}", control.0)))
}
