//! The map `ξ ↦ (ξ, ι_ξ ϖ)` into the Courant algebroid `A ⊕ A*`.

use qpath::algebroid::Atiyah;
use qpath::forms::{cartan_eta, pullback_anchor, scalar, Form};
use qpath::fusion::{compatibility_residual, courant_bracket, courant_pairing, reduced_bracket_value, CourantElement};
use qpath::path::Section;
use qpath::{Matrix, Result, Vector};

use crate::check::{Check, Outcome, Probe, Worst};
use crate::config::Suite::Courant as S;

pub fn checks() -> Vec<Check> {
    vec![
        Check {
            suite: S,
            name: "isotropy",
            anchor: "⟨f(ξ), f(ζ)⟩ = 0 for f(ξ) = (ξ, ι_ξ ϖ)",
            tolerance: 1e-4,
            run: isotropy,
        },
        Check {
            suite: S,
            name: "bracket_preservation",
            anchor: "[f(ξ), f(ζ)] = f([ξ, ζ]_A) for loops ξ, ζ",
            tolerance: 1e-4,
            run: bracket_preservation,
        },
        Check {
            suite: S,
            name: "compatibility",
            anchor: "a(e₁)⟨e₂,e₃⟩ = ⟨[e₁,e₂],e₃⟩ + ⟨e₂,[e₁,e₃]⟩",
            tolerance: 1e-5,
            run: compatibility,
        },
        Check {
            suite: S,
            name: "eta_twist",
            anchor: "[(v₁,a*α₁),(v₂,a*α₂)] = ([v₁,v₂], a*(L_{v₁}α₂ − ι_{v₂}dα₁ + ι_{v₁}ι_{v₂}η))",
            tolerance: 1e-4,
            run: eta_twist,
        },
        Check {
            suite: S,
            name: "generator_twist",
            anchor: "[f(x_A), f(y_A)] − f([x_A, y_A]) = ι ι a*η on generators",
            tolerance: 1e-4,
            run: generator_twist,
        },
    ]
}

/// A scalar 1-form pulled back from `G`, hence basic.
fn basic_form(p: &mut Probe) -> Form<Atiyah> {
    let alg = p.ctx.alg.clone();
    let c = p.rng.vector(&alg, 1.0);
    let a = alg.clone();
    pullback_anchor(&p.rng.one_form(&alg, 0).map_values(move |_, v| scalar(a.dot(&c, &v))))
}

fn isotropy(p: &mut Probe) -> Result<Outcome> {
    let mut worst = Worst::default();
    for _ in 0..p.samples {
        let g = p.point(1.0);
        let [xi, zeta] = p.sections();
        let (fx, fz) = (CourantElement::action(p.ctx, &xi), CourantElement::action(p.ctx, &zeta));
        worst.see(courant_pairing(&fx, &fx, &g));
        worst.see(courant_pairing(&fx, &fz, &g));
    }
    Ok(worst.outcome())
}

fn bracket_preservation(p: &mut Probe) -> Result<Outcome> {
    let ctx = p.ctx;
    let mut worst = Worst::default();
    for _ in 0..p.samples {
        let g = p.point(1.0);
        let [xi, zeta] = p.loops();
        let [probe] = p.sections();
        let lhs = courant_bracket(ctx, &CourantElement::action(ctx, &xi), &CourantElement::action(ctx, &zeta));
        let target = CourantElement::action(ctx, &lhs.section);
        let args = std::slice::from_ref(&probe);
        worst.see(lhs.coform.value(&g, args) - target.coform.value(&g, args));
    }
    Ok(worst.outcome())
}

fn compatibility(p: &mut Probe) -> Result<Outcome> {
    let mut worst = Worst::default();
    for _ in 0..p.samples {
        let g = p.point(1.0);
        let e: Vec<CourantElement> = (0..3)
            .map(|_| {
                let [s] = p.sections();
                CourantElement::new(s, basic_form(p))
            })
            .collect();
        worst.see(compatibility_residual(p.ctx, [&e[0], &e[1], &e[2]], &g));
    }
    Ok(worst.outcome())
}

fn eta_twist(p: &mut Probe) -> Result<Outcome> {
    let ctx = p.ctx;
    let e = ctx.alg.identity();
    let mut worst = Worst::default();
    for _ in 0..p.samples {
        let g = p.point(1.0);
        let [v1, v2] = p.sections();
        let (a1, a2) = (basic_form(p), basic_form(p));
        let [lp] = p.loops();
        let lhs = courant_bracket(
            ctx,
            &CourantElement::with_basic(ctx, &v1, &a1, (&e, &lp))?,
            &CourantElement::with_basic(ctx, &v2, &a2, (&e, &lp))?,
        );
        let [zeta] = p.sections();
        let l = lhs.coform.value(&g, std::slice::from_ref(&zeta));
        worst.see(l - reduced_bracket_value(ctx, [&v1, &v2], [&a1, &a2], &zeta, &g));
    }
    Ok(worst.outcome())
}

fn generator_twist(p: &mut Probe) -> Result<Outcome> {
    let ctx = p.ctx;
    let zero = Form::scalar(1, |_: &Matrix, _: &[Section]| 0.0);
    let mut worst = Worst::default();
    for _ in 0..p.samples {
        let g = p.point(1.0);
        let x: Vec<Vector> = (0..3).map(|_| p.rng.vector(&ctx.alg, 1.0)).collect();
        let gens: Vec<Section> = x.iter().map(|x| Section::generator(&ctx.alg, x)).collect();
        let lhs = courant_bracket(ctx, &CourantElement::action(ctx, &gens[0]), &CourantElement::action(ctx, &gens[1]));
        let f_bracket = CourantElement::action(ctx, &lhs.section);
        let twist = lhs.coform.value(&g, &gens[2..]) - f_bracket.coform.value(&g, &gens[2..]);
        let v: Vec<Vector> = gens.iter().map(|s| s.anchor(&g)).collect();
        worst.see(twist - cartan_eta(&ctx.alg, &g, [&v[0], &v[1], &v[2]]));
        let reduced = reduced_bracket_value(ctx, [&gens[0], &gens[1]], [&zero, &zero], &gens[2], &g);
        worst.see(lhs.coform.value(&g, &gens[2..]) - reduced);
    }
    Ok(worst.outcome())
}
