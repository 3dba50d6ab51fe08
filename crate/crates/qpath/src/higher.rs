//! The higher forms `η^p_G` on `G` and `ϖ^p_G` on the path algebroid, the
//! Pressley–Segal forms on loops, and the calibration of the sign table.

use std::sync::Arc;

use crate::algebroid::{Atiyah, Tangent};
use crate::atiyah::{kappa, kappa_dot};
use crate::bott::{BottContext, ConventionTable, FormFamily};
use crate::chern_simons::cs;
use crate::forms::{eta_form, maurer_cartan_form, pullback_anchor, Form, MixedForm};
use crate::lie::{InvariantPolynomial, LieAlgebra, Side, Steps};
use crate::path::Section;
use crate::sampling::Sampler;
use crate::{Context, Error, Matrix, Result, Vector};

fn zero_form<A: crate::algebroid::Algebroid>(alg: &LieAlgebra) -> Form<A> {
    let z = alg.zero();
    Form::new(1, move |_: &A::Point, _: &[A::Section]| z.clone())
}

/// `η^p_G(x) = Υ^p_G(0, θ^L)(x)` on `G`, all degrees.
pub fn eta_p_g(bott: &BottContext<Tangent>, p: &InvariantPolynomial, x: &Vector) -> Result<MixedForm<Tangent>> {
    let tl = maurer_cartan_form(&bott.alg, Side::Left, 0);
    bott.bott_mixed(p, &[zero_form(&bott.alg), tl], x, 2 * p.degree())
}

/// `κ_t` with `∂_t κ_t` as a family of forms on the path algebroid.
pub fn kappa_family(ctx: &Context) -> FormFamily<Atiyah> {
    let (a, b, h) = (ctx.alg.clone(), ctx.alg.clone(), ctx.steps.time);
    FormFamily::new(move |t| kappa(&a, t), move |t| kappa_dot(&b, t, h))
}

/// The forms built from `κ_t` on the path algebroid for one invariant
/// polynomial.
#[derive(Clone, Debug)]
pub struct HigherForms {
    pub ctx: Context,
    pub bott: BottContext<Atiyah>,
    pub p: InvariantPolynomial,
    /// Gauss–Legendre nodes in `t` for `I^p_G`.
    pub t_nodes: usize,
}

impl HigherForms {
    pub fn new(ctx: &Context, p: InvariantPolynomial, conventions: ConventionTable) -> Self {
        let bott = BottContext::new(&ctx.alg, ctx.atiyah(), conventions);
        HigherForms { ctx: ctx.clone(), bott, p, t_nodes: 32 }
    }

    /// `a*θ^L`.
    pub fn theta_left(&self) -> Form<Atiyah> {
        pullback_anchor(&maurer_cartan_form(&self.ctx.alg, Side::Left, 0))
    }

    /// Degree-`degree` part of `I^p_G({κ_t})(x)`.
    pub fn i_p_g(&self, x: Option<&Vector>, degree: usize) -> Form<Atiyah> {
        self.bott.rectangle(&self.p, &kappa_family(&self.ctx), x, degree, self.t_nodes)
    }

    /// Degree-`degree` part of `Υ^p_G(0, β)(x)` on the path algebroid.
    pub fn upsilon_from_zero(&self, beta: &Form<Atiyah>, x: Option<&Vector>, degree: usize) -> Result<Form<Atiyah>> {
        self.bott.bott(&self.p, &[zero_form(&self.ctx.alg), beta.clone()], x, degree)
    }

    /// Degree-`degree` part of
    /// `ϖ^p_G(x) = ±(I^p_G({κ_t})(x) − Υ^p_G(0, a*θ^L, κ₀)(x))`.
    pub fn varpi_p_g(&self, x: Option<&Vector>, degree: usize) -> Result<Form<Atiyah>> {
        let simplex = [zero_form(&self.ctx.alg), self.theta_left(), kappa(&self.ctx.alg, 0.0)];
        let correction = self.bott.bott(&self.p, &simplex, x, degree)?;
        Ok(self.i_p_g(x, degree).sub(&correction).scale(self.bott.conventions.varpi_sign))
    }

    /// `σ^p(ξ, ζ)`: `ϖ^p` on two loops at the identity.
    pub fn pressley_segal(&self, xi: &Section, zeta: &Section) -> Result<f64> {
        let e = self.ctx.alg.identity();
        for s in [xi, zeta] {
            let v = s.anchor(&e).amax();
            if v > 1e-9 {
                return Err(Error::InvalidInput(format!("expected a loop, anchor has size {v:e}")));
            }
        }
        Ok(self.varpi_p_g(None, 2 * self.p.degree() - 2)?.value(&e, &[xi.clone(), zeta.clone()]))
    }
}

/// Result of comparing the cubic rectangle form with
/// `∫₀¹ Σ_σ sgn σ · p(κ_t, κ̇_t, [κ_t, κ_t])` on sampled sections.
#[derive(Clone, Debug, PartialEq)]
pub enum CubicCheck {
    /// No invariant cubic for this algebra, or the reference integrand
    /// vanishes identically on every sample.
    Skipped(String),
    /// Measured ratios, one per sample; constancy is the property.
    Ratios(Vec<f64>),
}

/// Measures the proportionality constant between `I^p({κ_t})` for a cubic
/// `p` and the explicit integral, on `samples` random section quadruples.
pub fn cubic_proportionality(ctx: &Context, rng: &mut Sampler, samples: usize) -> Result<CubicCheck> {
    let Some(p) = InvariantPolynomial::cubic(&ctx.alg) else {
        return Ok(CubicCheck::Skipped(format!("{} has no invariant cubic", ctx.alg.name())));
    };
    let higher = HigherForms::new(ctx, p.clone(), ConventionTable::standard());
    let i4 = higher.i_p_g(None, 4);
    let alg = &ctx.alg;
    let perms = crate::forms::permutations(4);
    let mut ratios = Vec::with_capacity(samples);
    let mut largest: f64 = 0.0;
    for _ in 0..samples {
        let g = rng.group_point(alg, 1.0);
        let args: Vec<Section> = (0..4).map(|_| rng.section(ctx)).collect();
        let explicit = ctx.grid.integrate(|t| {
            let k: Vec<Vector> = args.iter().map(|a| kappa(alg, t).eval(&g, std::slice::from_ref(a))).collect();
            let kd: Vec<Vector> =
                args.iter().map(|a| kappa_dot(alg, t, ctx.steps.time).eval(&g, std::slice::from_ref(a))).collect();
            perms
                .iter()
                .map(|(s, sign)| sign * p.eval(&[&k[s[0]], &kd[s[1]], &alg.bracket(&k[s[2]], &k[s[3]])]))
                .sum()
        });
        largest = largest.max(explicit.abs());
        ratios.push(i4.value(&g, &args) / explicit);
    }
    if largest < 1e-12 {
        return Ok(CubicCheck::Skipped(format!("cubic integrand vanishes identically on {}", alg.name())));
    }
    Ok(CubicCheck::Ratios(ratios))
}

fn unit_ratio(what: &str, measured: f64, reference: f64) -> Result<f64> {
    let r = measured / reference;
    if (r.abs() - 1.0).abs() > 1e-6 {
        return Err(Error::OracleAbort(format!("{what}: ratio {r} is not ±1")));
    }
    Ok(r.signum())
}

/// Recomputes the sign table from the identities it has to satisfy, on su2
/// at a fixed reference point:
/// - the simplex signs are the textbook `(−1)^{[(k+1)/2]}` up to one overall
///   sign chosen so that `Υ^p(0, θ^L) = η`;
/// - `cs_sign` compares the explicit Chern–Simons form with `Υ^p(0, β)`;
/// - `rectangle_sign` comes from the degree-1 part of
///   `Υ^p_G(0, κ₁) − Υ^p_G(0, κ₀) = d_G I^p_G({κ_t})`, which needs no
///   derivative;
/// - `varpi_sign` from the degree-1 part `−ι_{x_A}ϖ^p_G = a*η^p_G` of
///   `d_Gϖ^p_G = a*η^p_G`.
pub fn calibrate_conventions() -> Result<ConventionTable> {
    let ctx = Context::with_defaults(LieAlgebra::su2());
    let alg: &Arc<LieAlgebra> = &ctx.alg;
    let p = InvariantPolynomial::half_square(alg);
    let mut rng = Sampler::new(0);
    let g = vec![rng.group_point(alg, 1.0)];
    let args: Vec<_> = (0..3).map(|_| rng.tangent_vector(alg, 1)).collect();

    let tangent = Tangent::new(alg.clone(), 1, Steps::default());
    let textbook = ConventionTable { simplex_sign: ConventionTable::TEXTBOOK_SIGNS, ..ConventionTable::standard() };
    let trial = BottContext::new(alg, tangent.clone(), textbook);
    let tl = maurer_cartan_form(alg, Side::Left, 0);
    let eta_p = trial.bott(&p, &[zero_form(alg), tl.clone()], None, 3)?.value(&g, &args);
    let flip = unit_ratio("eta^p against eta", eta_p, eta_form(alg, 0).value(&g, &args))?;
    let simplex_sign = ConventionTable::TEXTBOOK_SIGNS.map(|s| s * flip);

    let mut table = ConventionTable { simplex_sign, rectangle_sign: 1.0, cs_sign: 1.0, eta_sign: 1.0, varpi_sign: 1.0 };
    let bott = BottContext::new(alg, tangent.clone(), table);
    let eta_p = bott.bott(&p, &[zero_form(alg), tl], None, 3)?.value(&g, &args);
    table.eta_sign = unit_ratio("eta^p after the flip", eta_p, eta_form(alg, 0).value(&g, &args))?;
    let beta = rng.one_form(alg, 0);
    let up = bott.bott(&p, &[zero_form(alg), beta.clone()], None, 3)?.value(&g, &args);
    table.cs_sign = unit_ratio("CS against Upsilon(0, beta)", cs(&beta, &tangent, alg).value(&g, &args), up)?;

    let higher = HigherForms::new(&ctx, p, table);
    let x = rng.vector(alg, 1.0);
    let g: Matrix = rng.group_point(alg, 1.0);
    let xi = rng.section(&ctx);
    let k1 = kappa(alg, 1.0);
    let k0 = kappa(alg, 0.0);
    let lhs = higher.upsilon_from_zero(&k1, Some(&x), 1)?.value(&g, std::slice::from_ref(&xi))
        - higher.upsilon_from_zero(&k0, Some(&x), 1)?.value(&g, std::slice::from_ref(&xi));
    let gen = Section::generator(alg, &x);
    let rhs = -higher.i_p_g(Some(&x), 2).value(&g, &[gen.clone(), xi.clone()]);
    table.rectangle_sign = unit_ratio("Lemma upsilon in degree 1", lhs, rhs)?;

    let higher = HigherForms::new(&ctx, higher.p.clone(), table);
    let contracted = -higher.varpi_p_g(Some(&x), 2)?.value(&g, &[gen, xi.clone()]);
    let eta_linear = pullback_anchor(eta_p_g(&bott, &higher.p, &x)?.part(1).expect("degree-1 part"));
    table.varpi_sign = unit_ratio("d_G varpi^p in degree 1", contracted, eta_linear.value(&g, &[xi]))?;
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn calibration_reproduces_the_standard_table() {
        assert_eq!(calibrate_conventions().unwrap(), ConventionTable::standard());
    }
}
