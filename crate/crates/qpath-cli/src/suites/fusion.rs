//! Multiplicativity of ϖ under concatenation of composable paths.

use std::sync::Arc;

use qpath::forms::eta_form;
use qpath::fusion::{fusion_residual, lambda_form, lambda_value, multiplication, ComposablePair, PairSection};
use qpath::path::{Bump, FieldFn, Section};
use qpath::{Matrix, Result, Vector};

use super::lifting::closed_form_varpi;
use crate::check::{Check, Outcome, Probe, Worst};
use crate::config::Suite::Fusion as S;

/// Concatenation refuses pairs whose seams differ by more than this.
const SEAM_TOL: f64 = 1e-12;

pub fn checks() -> Vec<Check> {
    vec![
        Check {
            suite: S,
            name: "mult",
            anchor: "mult*ϖ = pr₁*ϖ + pr₂*ϖ − λ on composable pairs",
            tolerance: 1e-4,
            run: mult,
        },
        Check {
            suite: S,
            name: "generators",
            anchor: "ϖ(x,y)(g₂g₁) = ϖ(x,y)(g₂) + ϖ(x,y)(g₁) − λ on generator pairs",
            tolerance: 1e-10,
            run: generators,
        },
        Check {
            suite: S,
            name: "lambda",
            anchor: "mult*η = pr₁*η + pr₂*η − dλ",
            tolerance: 1e-4,
            run: lambda,
        },
        Check {
            suite: S,
            name: "associativity",
            anchor: "(ξ₃ * ξ₂) * ξ₁ = ξ₃ * (ξ₂ * ξ₁) up to dyadic reparametrization",
            tolerance: 1e-8,
            run: associativity,
        },
        Check {
            suite: S,
            name: "bracket_closure",
            anchor: "composable pairs are closed under the bracket on G × G",
            tolerance: 1e-6,
            run: bracket_closure,
        },
    ]
}

/// At least 8 pairs, whatever the sample count.
fn mult(p: &mut Probe) -> Result<Outcome> {
    let mut worst = Worst::default();
    for _ in 0..p.samples.max(8) {
        let (g2, g1) = (p.point(1.0), p.point(1.0));
        let xi = ComposablePair::sample(&mut p.rng, p.ctx, &g1, 0.1);
        let zeta = ComposablePair::sample(&mut p.rng, p.ctx, &g1, 0.1);
        worst.see(fusion_residual(p.ctx, &xi, &zeta, &g2, &g1, SEAM_TOL)?);
    }
    Ok(worst.outcome())
}

fn generators(p: &mut Probe) -> Result<Outcome> {
    let alg = p.ctx.alg.clone();
    let gen_anchor = |g: &Matrix, x: &Vector| alg.ad_group(g, x) - x;
    let mut worst = Worst::default();
    for _ in 0..p.samples {
        let (g2, g1) = (p.point(1.0), p.point(1.0));
        let (x, y) = (p.rng.vector(&alg, 1.0), p.rng.vector(&alg, 1.0));
        let lambda =
            lambda_value(&alg, &g2, [&gen_anchor(&g2, &x), &gen_anchor(&g1, &x)], [&gen_anchor(&g2, &y), &gen_anchor(&g1, &y)]);
        worst.see(
            closed_form_varpi(&alg, &(&g2 * &g1), &x, &y) - closed_form_varpi(&alg, &g2, &x, &y)
                - closed_form_varpi(&alg, &g1, &x, &y)
                + lambda,
        );
        let (gx, gy) = (Section::generator(&alg, &x), Section::generator(&alg, &y));
        let pair = |s: &Section| ComposablePair::new(s.clone(), s.clone());
        worst.see(fusion_residual(p.ctx, &pair(&gx), &pair(&gy), &g2, &g1, SEAM_TOL)?);
    }
    Ok(worst.outcome())
}

fn lambda(p: &mut Probe) -> Result<Outcome> {
    let alg = p.ctx.alg.clone();
    let tangent = p.ctx.tangent(2);
    let lhs = multiplication(&alg).pullback_eta(&alg);
    let rhs = eta_form(&alg, 0).add(&eta_form(&alg, 1)).sub(&lambda_form(&alg).d(&tangent));
    let mut worst = Worst::default();
    for _ in 0..p.samples {
        let g = p.points(2, 1.0);
        let v = p.tangent_args(2, 3);
        worst.see(lhs.value(&g, &v) - rhs.value(&g, &v));
    }
    Ok(worst.outcome())
}

/// A flat-margin section whose profile starts at `start`.
fn continuing(p: &mut Probe, start: Vector, margin: f64) -> Section {
    let bump = Bump::with_margin(margin);
    let alg = &p.ctx.alg;
    let a: FieldFn = Arc::new(move |_| start.clone());
    Section::template(alg, a, p.rng.field(alg), bump).with_interior_mode(p.rng.field(alg), 1, bump)
}

fn associativity(p: &mut Probe) -> Result<Outcome> {
    let alg = p.ctx.alg.clone();
    let dyadic = |t: f64| if t <= 0.5 { t / 2.0 } else if t <= 0.75 { t - 0.25 } else { 2.0 * t - 1.0 };
    let mut worst = Worst::default();
    for _ in 0..p.samples {
        let (g3, g2, g1) = (p.point(1.0), p.point(1.0), p.point(1.0));
        // Concatenation halves the flat margins, so start from a wider one.
        let xi1 = p.rng.flat_section(p.ctx, 0.25);
        let xi2 = continuing(p, xi1.profile(&g1, 1.0), 0.25);
        let xi3 = continuing(p, xi2.profile(&g2, 1.0), 0.25);
        let join = |a: &Section, b: &Section, ga: &Matrix, gb: &Matrix| {
            ComposablePair::new(a.clone(), b.clone()).concat(&alg, ga, gb, SEAM_TOL)
        };
        let left = join(&join(&xi3, &xi2, &g3, &g2)?, &xi1, &(&g3 * &g2), &g1)?;
        let right = join(&xi3, &join(&xi2, &xi1, &g2, &g1)?, &g3, &(&g2 * &g1))?;
        let total = &g3 * &g2 * &g1;
        for i in 0..=200 {
            let t = i as f64 / 200.0;
            worst.see((left.profile(&total, t) - right.profile(&total, dyadic(t))).amax());
        }
        worst.see((left.anchor(&total) - right.anchor(&total)).amax());
    }
    Ok(worst.outcome())
}

fn bracket_closure(p: &mut Probe) -> Result<Outcome> {
    let alg = p.ctx.alg.clone();
    let tangent = p.ctx.tangent(2);
    let bump = Bump::with_margin(0.1);
    let mut worst = Worst::default();
    for _ in 0..p.samples {
        let a = PairSection::sample_composable(&mut p.rng, &alg, bump);
        let b = PairSection::sample_composable(&mut p.rng, &alg, bump);
        let bracket = a.bracket(&b, &tangent);
        let g = p.points(2, 1.0);
        worst.see(bracket.seam_residual(&g));
        worst.see(bracket.quasi_periodicity_residual(&alg, &g));
    }
    Ok(worst.outcome())
}
