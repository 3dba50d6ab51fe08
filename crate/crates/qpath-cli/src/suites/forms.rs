//! Exterior calculus on algebroids and the Cartan forms.

use qpath::algebroid::{Atiyah, Field, Tangent};
use qpath::atiyah::ConnectionFamily;
use qpath::forms::{cartan_eta, equivariant_d, eta_form, eta_g, maurer_cartan_form, Form, MixedForm};
use qpath::fusion::CourantElement;
use qpath::lie::{LieAlgebra, Side};
use qpath::lifting::varpi_form;
use qpath::path::Section;
use qpath::{Matrix, Result, Vector};

use crate::check::{Check, Outcome, Probe, Worst};
use crate::config::Suite::Forms as S;

const CLOSED_TOL: f64 = 1e-6;

pub fn checks() -> Vec<Check> {
    vec![
        Check { suite: S, name: "d_squared", anchor: "d_A d_A α = 0", tolerance: 1e-5, run: d_squared },
        Check { suite: S, name: "cartan", anchor: "L_ξ α = ι_ξ d_A α + d_A ι_ξ α", tolerance: 1e-6, run: cartan },
        Check {
            suite: S,
            name: "maurer_cartan",
            anchor: "dθ^R = ½[θ^R,θ^R], dθ^L = −½[θ^L,θ^L]",
            tolerance: 1e-8,
            run: maurer_cartan,
        },
        Check { suite: S, name: "eta_closed", anchor: "dη = 0", tolerance: CLOSED_TOL, run: eta_closed },
        Check {
            suite: S,
            name: "equivariant_closed",
            anchor: "d_G η_G = 0 with d_G = d − ι_{x_G}",
            tolerance: CLOSED_TOL,
            run: equivariant_closed,
        },
        Check {
            suite: S,
            name: "abelian_collapse",
            anchor: "η = 0, F = 0, d_A ϖ = 0 and the Courant twist vanish for abelian G",
            tolerance: 1e-10,
            run: abelian_collapse,
        },
    ]
}

/// `α(ξ)(g) = F(g)·ξ(g, t₀) + H(g)·a(ξ)(g)`, a genuine 1-form on `A`.
fn sample_one_form(p: &mut Probe) -> Form<Atiyah> {
    let alg = p.ctx.alg.clone();
    let (f, h) = (p.rng.field(&alg), p.rng.field(&alg));
    let t0 = p.rng.uniform(0.1, 0.9);
    Form::scalar(1, move |g: &Matrix, s: &[Section]| {
        alg.dot(&f(g), &s[0].profile(g, t0)) + alg.dot(&h(g), &s[0].anchor(g))
    })
}

fn d_squared(p: &mut Probe) -> Result<Outcome> {
    let at = p.ctx.atiyah();
    let mut worst = Worst::default();
    for _ in 0..p.samples {
        let alpha = sample_one_form(p);
        let g = p.point(1.0);
        let args = p.sections::<3>();
        worst.see(alpha.d(&at).d(&at).value(&g, &args));
    }
    Ok(worst.outcome())
}

fn cartan(p: &mut Probe) -> Result<Outcome> {
    let at = p.ctx.atiyah();
    let mut worst = Worst::default();
    for _ in 0..p.samples {
        let alpha = sample_one_form(p);
        let g = p.point(1.0);
        let [xi, zeta] = p.sections();
        let lhs = alpha.lie_derivative(&at, &xi);
        let rhs = alpha.d(&at).contract(&xi)?.add(&alpha.contract(&xi)?.d(&at));
        let args = std::slice::from_ref(&zeta);
        worst.see(lhs.value(&g, args) - rhs.value(&g, args));
    }
    Ok(worst.outcome())
}

/// A constant and an `Ad`-dependent right-trivialized field on `G`.
fn mixed_fields(p: &mut Probe, n: usize) -> Vec<Field> {
    let tangent = p.ctx.tangent(1);
    (0..n)
        .map(|i| if i % 2 == 0 { p.rng.tangent_vector(&p.ctx.alg, 1) } else { tangent.on_factor(0, p.rng.field(&p.ctx.alg)) })
        .collect()
}

fn maurer_cartan(p: &mut Probe) -> Result<Outcome> {
    let alg = &p.ctx.alg;
    let tangent = p.ctx.tangent(1);
    let right = maurer_cartan_form(alg, Side::Right, 0);
    let left = maurer_cartan_form(alg, Side::Left, 0);
    let dr = right.d(&tangent).sub(&right.bracket_wedge(&right, alg).scale(0.5));
    let dl = left.d(&tangent).add(&left.bracket_wedge(&left, alg).scale(0.5));
    let mut worst = Worst::default();
    for _ in 0..p.samples {
        let g = vec![p.point(1.0)];
        let args = mixed_fields(p, 2);
        worst.see(dr.eval(&g, &args).amax());
        worst.see(dl.eval(&g, &args).amax());
    }
    Ok(worst.outcome())
}

fn eta_closed(p: &mut Probe) -> Result<Outcome> {
    let d_eta = eta_form(&p.ctx.alg, 0).d(&p.ctx.tangent(1));
    let mut worst = Worst::default();
    for _ in 0..p.samples {
        let g = vec![p.point(1.0)];
        let args = mixed_fields(p, 4);
        worst.see(d_eta.value(&g, &args));
    }
    Ok(worst.outcome())
}

fn equivariant_residual(p: &mut Probe, form: &MixedForm<Tangent>, x: &Vector, g: &Vec<Matrix>) -> f64 {
    let tangent = p.ctx.tangent(1);
    let closed = equivariant_d(&tangent, form, x);
    let mut worst = Worst::default();
    for degree in [0, 2, 4] {
        if let Some(part) = closed.part(degree) {
            let args = mixed_fields(p, degree);
            worst.see(part.value(g, &args));
        }
    }
    worst.0
}

fn equivariant_closed(p: &mut Probe) -> Result<Outcome> {
    let mut worst = Worst::default();
    let mut variant = Worst::default();
    for _ in 0..p.samples {
        let x = p.rng.vector(&p.ctx.alg, 1.0);
        let eta = eta_g(&p.ctx.alg, 0, &x);
        let g = vec![p.point(1.0)];
        worst.see(equivariant_residual(p, &eta, &x, &g));
        // d + ι_{x_G} is d − ι_{(−x)_G}.
        variant.see(equivariant_residual(p, &eta, &(-&x), &g));
    }
    let out = worst.outcome();
    Ok(if variant.0 < CLOSED_TOL {
        out.with_note(format!("sign variant d + ι_x also annihilates η_G here (residual {:e})", variant.0))
    } else {
        out
    })
}

pub fn is_abelian(alg: &LieAlgebra) -> bool {
    let n = alg.dim();
    (0..n).all(|i| (0..n).all(|j| (0..n).all(|k| alg.structure_constant(i, j, k) == 0.0)))
}

fn abelian_collapse(p: &mut Probe) -> Result<Outcome> {
    let ctx = p.ctx;
    let alg = &ctx.alg;
    if !is_abelian(alg) {
        return Ok(Outcome::skipped(format!("{} is not abelian", alg.name())));
    }
    let at = ctx.atiyah();
    let families =
        [ConnectionFamily::standard(alg, ctx.bump), ConnectionFamily::invariant(alg, 0.4, -0.2, ctx.bump)];
    let d_varpi = varpi_form(ctx).d(&at);
    let mut worst = Worst::default();
    for _ in 0..p.samples {
        let g = p.point(2.0);
        let v: Vec<Vector> = (0..3).map(|_| p.rng.vector(alg, 1.0)).collect();
        worst.see(cartan_eta(alg, &g, [&v[0], &v[1], &v[2]]));
        let t = p.rng.uniform(0.0, 1.0);
        for fam in &families {
            worst.see(fam.curvature(t, &g, &v[0], &v[1], ctx.steps).amax());
        }
        let args = p.sections::<3>();
        worst.see(d_varpi.value(&g, &args));

        let gens: Vec<Section> = v.iter().map(|x| Section::generator(alg, x)).collect();
        let f = |s: &Section| CourantElement::action(ctx, s);
        let bracket = qpath::fusion::courant_bracket(ctx, &f(&gens[0]), &f(&gens[1]));
        let twist = bracket.coform.value(&g, &gens[2..]) - f(&bracket.section).coform.value(&g, &gens[2..]);
        worst.see(twist);
    }
    Ok(worst.outcome())
}
