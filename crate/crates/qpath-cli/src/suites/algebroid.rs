//! Axioms of the path algebroid `A → G`.

use std::sync::Arc;

use qpath::algebroid::{Algebroid, EquivariantAlgebroid};
use qpath::path::Section;
use qpath::{Matrix, Result};

use super::TIMES;
use crate::check::{Check, Outcome, Probe, Worst};
use crate::config::Suite::Algebroid as S;

pub fn checks() -> Vec<Check> {
    vec![
        Check {
            suite: S,
            name: "jacobi",
            anchor: "[ξ,[ζ,χ]_A]_A + cyclic = 0",
            tolerance: 1e-5,
            run: jacobi,
        },
        Check {
            suite: S,
            name: "leibniz",
            anchor: "[ξ, fζ]_A = f[ξ,ζ]_A + (a(ξ)f) ζ",
            tolerance: 1e-5,
            run: leibniz,
        },
        Check {
            suite: S,
            name: "generators",
            anchor: "[x_A, y_A]_A = ([x,y])_A",
            tolerance: 1e-8,
            run: generators,
        },
        Check {
            suite: S,
            name: "seam",
            anchor: "[ξ,ζ]_A(g,1) = Ad_g [ξ,ζ]_A(g,0) + a([ξ,ζ]_A)(g)",
            tolerance: 1e-6,
            run: seam,
        },
    ]
}

/// Max norm of the profile at the probe times and of the anchor.
fn size(s: &Section, g: &Matrix) -> f64 {
    TIMES.iter().map(|&t| s.profile(g, t).amax()).fold(s.anchor(g).amax(), f64::max)
}

fn jacobi(p: &mut Probe) -> Result<Outcome> {
    let at = p.ctx.atiyah();
    let mut worst = Worst::default();
    for _ in 0..p.samples {
        let g = p.point(1.0);
        let [a, b, c] = p.sections();
        let sum = at
            .bracket(&at.bracket(&a, &b), &c)
            .add(&at.bracket(&at.bracket(&b, &c), &a))
            .add(&at.bracket(&at.bracket(&c, &a), &b));
        worst.see(size(&sum, &g));
    }
    Ok(worst.outcome())
}

fn leibniz(p: &mut Probe) -> Result<Outcome> {
    let at = p.ctx.atiyah();
    let mut worst = Worst::default();
    for _ in 0..p.samples {
        let g = p.point(1.0);
        let [a, b] = p.sections();
        let f = p.rng.scalar_function(&p.ctx.alg);
        let lhs = at.bracket(&a, &b.scale_by(f.clone()));
        let f1 = f.clone();
        let af = at.anchor_derivative(&a, &g, &|h: &Matrix| qpath::forms::scalar(f1(h)))[0];
        let rhs = at.bracket(&a, &b).scale(f(&g)).add(&b.scale(af));
        worst.see(size(&lhs.sub(&rhs), &g));
    }
    Ok(worst.outcome())
}

fn generators(p: &mut Probe) -> Result<Outcome> {
    let at = p.ctx.atiyah();
    let alg = p.ctx.alg.clone();
    let mut worst = Worst::default();
    for _ in 0..p.samples {
        let g = p.point(1.0);
        let (x, y) = (p.rng.vector(&alg, 1.0), p.rng.vector(&alg, 1.0));
        let b = at.bracket(&at.generator(&x), &at.generator(&y));
        worst.see(size(&b.sub(&at.generator(&alg.bracket(&x, &y))), &g));
    }
    Ok(worst.outcome())
}

fn seam(p: &mut Probe) -> Result<Outcome> {
    let at = p.ctx.atiyah();
    let mut worst = Worst::default();
    for _ in 0..p.samples {
        let g = p.point(1.0);
        let [a, b] = p.sections();
        let f = p.rng.scalar_function(&p.ctx.alg);
        worst.see(at.bracket(&a, &b).seam_residual(&p.ctx.alg, &g));
        worst.see(at.bracket(&a.scale_by(Arc::clone(&f)), &b).seam_residual(&p.ctx.alg, &g));
    }
    Ok(worst.outcome())
}
