//! The 2-form ϖ on `A`, the loop cocycle and the lifted bracket.

use std::f64::consts::{PI, TAU};

use qpath::atiyah::ConnectionFamily;
use qpath::forms::{equivariant_d, eta_g, pullback_anchor_mixed, MixedForm};
use qpath::lifting::{brylinski, dj, dtheta_j, dtheta_j_via_sigma, q_kappa, sigma, varpi, varpi_form};
use qpath::obstruction::{
    equivariant_generator_residual, obstruction_pairing_from_data, LiftedAlgebroid, LiftedSection, OmegaForm,
};
use qpath::path::{Bump, Section};
use qpath::{Matrix, Result, Vector};

use super::TIMES;
use crate::check::{Check, Outcome, Probe, Worst};
use crate::config::Suite::Lifting as S;

/// Nodes of the Gauss–Legendre rule behind the Poincaré primitive.
const POINCARE_NODES: usize = 16;
/// Radius of sampled points where an exponential chart is needed.
const CHART_RADIUS: f64 = 0.5;

pub fn checks() -> Vec<Check> {
    vec![
        Check { suite: S, name: "d3form", anchor: "d_A ϖ = a*η", tolerance: 1e-4, run: d3form },
        Check {
            suite: S,
            name: "d1form",
            anchor: "ι_{x_A} ϖ = ½ a*((θ^L + θ^R)·x)",
            tolerance: 1e-5,
            run: d1form,
        },
        Check {
            suite: S,
            name: "varpi_closed_form",
            anchor: "ϖ(x_A, y_A)(g) = ½ x·(Ad_g − Ad_{g⁻¹}) y",
            tolerance: 1e-8,
            run: varpi_closed_form,
        },
        Check {
            suite: S,
            name: "varpi_spot",
            anchor: "ϖ(e₁_A, e₂_A)(exp(πe₃/2)) = −1",
            tolerance: 1e-8,
            run: varpi_spot,
        },
        Check {
            suite: S,
            name: "sigma",
            anchor: "σ(sin(2πt)x, cos(2πt)x) = −π x·x",
            tolerance: 1e-7,
            run: sigma_trig,
        },
        Check { suite: S, name: "dj", anchor: "ϖ(ζ, ξ) = −⟨dj, ζ⟩(ξ) for loops ζ", tolerance: 1e-5, run: dj_contraction },
        Check {
            suite: S,
            name: "dtheta_j",
            anchor: "⟨d^θ j, ζ⟩ = ⟨dj, ζ⟩ + σ(θ, ζ)",
            tolerance: 1e-5,
            run: dtheta_j_identity,
        },
        Check {
            suite: S,
            name: "brylinski",
            anchor: "ϖ_Bry = ϖ + Q^α and ϖ = −Q^κ",
            tolerance: 1e-5,
            run: brylinski_forms,
        },
        Check {
            suite: S,
            name: "lifted_jacobi",
            anchor: "Jacobi for the lifted bracket when dω = −η",
            tolerance: 1e-4,
            run: lifted_jacobi,
        },
        Check {
            suite: S,
            name: "obstruction",
            anchor: "Jacobiator of the lifted bracket = −(dω + η)-pairing",
            tolerance: 1e-4,
            run: obstruction,
        },
        Check {
            suite: S,
            name: "generator_condition",
            anchor: "ω(x_G, v) + dΦ(x)(v) = ⟨d^θ j(v), Ψ(x)⟩",
            tolerance: 1e-4,
            run: generator_condition,
        },
    ]
}

fn d3form(p: &mut Probe) -> Result<Outcome> {
    let ctx = p.ctx;
    let dvarpi = varpi_form(ctx).d(&ctx.atiyah());
    let mut worst = Worst::default();
    for _ in 0..p.samples {
        let g = p.point(1.2);
        let args = p.sections::<3>();
        let x = p.rng.vector(&ctx.alg, 1.0);
        let eta = pullback_anchor_mixed(&eta_g(&ctx.alg, 0, &x));
        worst.see(dvarpi.value(&g, &args) - eta.part(3).expect("degree 3").value(&g, &args));
    }
    Ok(worst.outcome())
}

fn d1form(p: &mut Probe) -> Result<Outcome> {
    let ctx = p.ctx;
    let at = ctx.atiyah();
    let mut worst = Worst::default();
    for _ in 0..p.samples {
        let g = p.point(1.2);
        let x = p.rng.vector(&ctx.alg, 1.0);
        let dg = equivariant_d(&at, &MixedForm::single(varpi_form(ctx)), &x);
        let target = pullback_anchor_mixed(&eta_g(&ctx.alg, 0, &x));
        let [xi] = p.sections();
        let args = std::slice::from_ref(&xi);
        worst.see(dg.part(1).expect("degree 1").value(&g, args) - target.part(1).expect("degree 1").value(&g, args));
    }
    Ok(worst.outcome())
}

pub fn closed_form_varpi(alg: &qpath::lie::LieAlgebra, g: &Matrix, x: &Vector, y: &Vector) -> f64 {
    let gi = alg.inverse(g);
    0.5 * alg.dot(x, &(alg.ad_group(g, y) - alg.ad_group(&gi, y)))
}

/// At least 20 draws, whatever the sample count: the check is cheap.
fn varpi_closed_form(p: &mut Probe) -> Result<Outcome> {
    let alg = p.ctx.alg.clone();
    let mut worst = Worst::default();
    for _ in 0..p.samples.max(20) {
        let g = p.point(1.5);
        let (x, y) = (p.rng.vector(&alg, 1.0), p.rng.vector(&alg, 1.0));
        let quad = varpi(p.ctx, &Section::generator(&alg, &x), &Section::generator(&alg, &y), &g);
        worst.see(quad - closed_form_varpi(&alg, &g, &x, &y));
    }
    Ok(worst.outcome())
}

fn varpi_spot(p: &mut Probe) -> Result<Outcome> {
    let alg = p.ctx.alg.clone();
    if !matches!(alg.name(), "so3" | "su2") {
        return Ok(Outcome::skipped(format!("the spot value is stated for so3 and su2, not {}", alg.name())));
    }
    let g = alg.exp(&(alg.unit(2) * (PI / 2.0)));
    p.record(&g);
    let (x, y) = (alg.unit(0), alg.unit(1));
    let quad = varpi(p.ctx, &Section::generator(&alg, &x), &Section::generator(&alg, &y), &g);
    Ok(Outcome::residual((quad + 1.0).abs().max((closed_form_varpi(&alg, &g, &x, &y) + 1.0).abs())))
}

fn trig_loops(alg: &qpath::lie::LieAlgebra, x: &Vector) -> (Section, Section) {
    let (a, b, c, d) = (x.clone(), x.clone(), x.clone(), x.clone());
    let sin = Section::loop_at_identity(alg, move |t| &a * (TAU * t).sin(), move |t| &b * (TAU * (TAU * t).cos()));
    let cos = Section::loop_at_identity(alg, move |t| &c * (TAU * t).cos(), move |t| &d * (-TAU * (TAU * t).sin()));
    (sin, cos)
}

fn sigma_trig(p: &mut Probe) -> Result<Outcome> {
    let alg = p.ctx.alg.clone();
    let e = alg.identity();
    let mut worst = Worst::default();
    let mut directions = vec![alg.unit(0)];
    directions.extend((0..p.samples).map(|_| p.rng.vector(&alg, 1.0)));
    for x in directions {
        let (s, c) = trig_loops(&alg, &x);
        worst.see(sigma(p.ctx, &s, &c, &e)? + PI * alg.dot(&x, &x));
    }
    Ok(worst.outcome())
}

fn dj_contraction(p: &mut Probe) -> Result<Outcome> {
    let mut worst = Worst::default();
    for _ in 0..p.samples {
        let g = p.point(1.2);
        let ([l], [xi]) = (p.loops(), p.sections());
        worst.see(varpi(p.ctx, &l, &xi, &g) + dj(p.ctx, &l, &xi, &g));
    }
    Ok(worst.outcome())
}

fn dtheta_j_identity(p: &mut Probe) -> Result<Outcome> {
    let fam = ConnectionFamily::invariant(&p.ctx.alg, 0.2, 0.5, Bump::default());
    let mut worst = Worst::default();
    for _ in 0..p.samples {
        let g = p.point(1.2);
        let ([l], [xi]) = (p.loops(), p.sections());
        worst.see(dtheta_j(p.ctx, &fam, &l, &xi, &g) - dtheta_j_via_sigma(p.ctx, &fam, &l, &xi, &g));
    }
    Ok(worst.outcome())
}

fn brylinski_forms(p: &mut Probe) -> Result<Outcome> {
    let ctx = p.ctx;
    let fam = ConnectionFamily::invariant(&ctx.alg, 0.6, -0.3, Bump::default());
    let mut worst = Worst::default();
    for _ in 0..p.samples {
        let g = p.point(1.2);
        let [a, b] = p.sections();
        let w = varpi(ctx, &a, &b, &g);
        let qa = qpath::lifting::q_alpha(ctx, &fam, &g, &a.anchor(&g), &b.anchor(&g));
        worst.see(brylinski(ctx, &fam, &a, &b, &g) - w - qa);
        worst.see(w + q_kappa(ctx, &a, &b, &g));
    }
    Ok(worst.outcome())
}

fn lifted(p: &mut Probe) -> LiftedSection {
    let [body] = p.loops();
    LiftedSection::new(body, p.rng.scalar_function(&p.ctx.alg), p.rng.field(&p.ctx.alg))
}

fn lifted_jacobi(p: &mut Probe) -> Result<Outcome> {
    let ctx = p.ctx;
    let fam = ConnectionFamily::standard(&ctx.alg, Bump::default());
    let hat = LiftedAlgebroid::new(ctx, &fam, OmegaForm::poincare(&ctx.alg, POINCARE_NODES));
    let mut worst = Worst::default();
    for _ in 0..p.samples {
        let g = p.point(CHART_RADIUS);
        let (a, b, c) = (lifted(p), lifted(p), lifted(p));
        worst.see(hat.jacobiator(&a, &b, &c, &g, &TIMES).max_abs());
    }
    Ok(worst.outcome())
}

fn obstruction(p: &mut Probe) -> Result<Outcome> {
    let ctx = p.ctx;
    let fam = ConnectionFamily::invariant(&ctx.alg, 0.3, -0.2, Bump::default());
    let omega = OmegaForm::zero();
    let hat = LiftedAlgebroid::new(ctx, &fam, omega.clone());
    let mut worst = Worst::default();
    let mut size = Worst::default();
    for _ in 0..p.samples {
        let g = p.point(CHART_RADIUS);
        let (a, b, c) = (lifted(p), lifted(p), lifted(p));
        let jac = hat.jacobiator(&a, &b, &c, &g, &TIMES);
        let v: Vec<Vector> = [&a, &b, &c].iter().map(|x| (x.tangent)(&g)).collect();
        let pairing = obstruction_pairing_from_data(ctx, &omega, &fam, &g, [&v[0], &v[1], &v[2]]);
        worst.see(jac.scalar + pairing);
        worst.see(jac.body);
        worst.see(jac.tangent);
        size.see(pairing);
    }
    Ok(worst.outcome().with_note(format!("largest obstruction pairing {:e}", size.0)))
}

fn generator_condition(p: &mut Probe) -> Result<Outcome> {
    let ctx = p.ctx;
    let omega = OmegaForm::poincare(&ctx.alg, POINCARE_NODES);
    let fam = ConnectionFamily::standard(&ctx.alg, Bump::default());
    let mut worst = Worst::default();
    let mut points = vec![ctx.alg.identity()];
    points.extend((0..p.samples).map(|_| p.point(CHART_RADIUS)));
    for g in points {
        let (x, v) = (p.rng.vector(&ctx.alg, 1.0), p.rng.vector(&ctx.alg, 1.0));
        worst.see(equivariant_generator_residual(ctx, &omega, &fam, &x, &g, &v)?);
    }
    Ok(worst.outcome())
}
