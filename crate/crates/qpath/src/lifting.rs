//! The central extension `L̂ = L ⊕ ℝ` of the loop bundle, its cocycle and
//! connection, and the canonical 2-form `ϖ` on the path algebroid.

use std::sync::Arc;

use crate::algebroid::{Algebroid, Atiyah};
use crate::atiyah::ConnectionFamily;
use crate::forms::{scalar, Form};
use crate::lie::directional_derivative;
use crate::path::{ScalarFn, Section};
use crate::{Context, Error, Matrix, Result, Vector};

fn require_loop(ctx: &Context, xi: &Section, g: &Matrix) -> Result<()> {
    let v = xi.anchor(g).amax();
    if v > 1e-9 {
        return Err(Error::InvalidInput(format!("expected a loop, anchor has size {v:e}")));
    }
    let _ = ctx;
    Ok(())
}

/// `∫₀¹ ξ̇·ζ dt` at `g`.
pub fn pairing_dot(ctx: &Context, xi: &Section, zeta: &Section, g: &Matrix) -> f64 {
    let alg = &ctx.alg;
    let h = ctx.steps.time;
    ctx.grid.integrate(|t| alg.dot(&xi.time_derivative(alg, g, t, h), &zeta.profile(g, t)))
}

/// The Kac–Moody type cocycle `σ(ξ₁, ξ₂) = −∫₀¹ ξ̇₁·ξ₂` on loops.
pub fn sigma(ctx: &Context, xi1: &Section, xi2: &Section, g: &Matrix) -> Result<f64> {
    require_loop(ctx, xi1, g)?;
    require_loop(ctx, xi2, g)?;
    Ok(-pairing_dot(ctx, xi1, xi2, g))
}

/// `⟨dj, ζ⟩(ξ) = ∫₀¹ ξ̇·ζ` for a loop `ζ`.
pub fn dj(ctx: &Context, zeta: &Section, xi: &Section, g: &Matrix) -> f64 {
    pairing_dot(ctx, xi, zeta, g)
}

/// `⟨d^θ j, ζ⟩(ξ) = −∫₀¹ α̇_t(a(ξ))·ζ_t`.
pub fn dtheta_j(ctx: &Context, fam: &ConnectionFamily, zeta: &Section, xi: &Section, g: &Matrix) -> f64 {
    let v = xi.anchor(g);
    -ctx.grid.integrate(|t| ctx.alg.dot(&fam.alpha_dot(t, g, &v), &zeta.profile(g, t)))
}

/// The same pairing through `d^θ j = dj + σ(θ, ·)`.
pub fn dtheta_j_via_sigma(ctx: &Context, fam: &ConnectionFamily, zeta: &Section, xi: &Section, g: &Matrix) -> f64 {
    dj(ctx, zeta, xi, g) - pairing_dot(ctx, &fam.apply(xi), zeta, g)
}

/// `ϖ(ξ, ζ) = ∫₀¹ ξ̇·ζ − Ad_g ξ(0)·v_ζ − ½ v_ξ·v_ζ`.
pub fn varpi(ctx: &Context, xi: &Section, zeta: &Section, g: &Matrix) -> f64 {
    let alg = &ctx.alg;
    let (vx, vz) = (xi.anchor(g), zeta.anchor(g));
    pairing_dot(ctx, xi, zeta, g) - alg.dot(&alg.ad_group(g, &xi.profile(g, 0.0)), &vz) - 0.5 * alg.dot(&vx, &vz)
}

/// `ϖ` as a scalar 2-form on the path algebroid.
pub fn varpi_form(ctx: &Context) -> Form<Atiyah> {
    let ctx = ctx.clone();
    Form::scalar(2, move |g: &Matrix, s: &[Section]| varpi(&ctx, &s[0], &s[1], g))
}

/// Closed form of `ϖ(x_A, y_A) = ½ x·(Ad_g y − Ad_{g⁻¹} y)`.
pub fn varpi_generators(ctx: &Context, x: &Vector, y: &Vector, g: &Matrix) -> f64 {
    let alg = &ctx.alg;
    0.5 * alg.dot(x, &(alg.ad_group(g, y) - alg.ad_group(&alg.inverse(g), y)))
}

/// `⟨dj, θ⟩ + ½σ(θ, θ)` evaluated on `(ξ, ζ)`.
pub fn brylinski(ctx: &Context, fam: &ConnectionFamily, xi: &Section, zeta: &Section, g: &Matrix) -> f64 {
    let (tx, tz) = (fam.apply(xi), fam.apply(zeta));
    pairing_dot(ctx, xi, &tz, g) - pairing_dot(ctx, zeta, &tx, g) - pairing_dot(ctx, &tx, &tz, g)
}

/// `Q^κ(ξ, ζ) = ½[θ^L(v_ξ)·κ₀(ζ) − θ^L(v_ζ)·κ₀(ξ)] + ½∫(κ·κ̇)(ξ, ζ)`.
pub fn q_kappa(ctx: &Context, xi: &Section, zeta: &Section, g: &Matrix) -> f64 {
    let alg = &ctx.alg;
    let gi = alg.inverse(g);
    let (lx, lz) = (alg.ad_group(&gi, &xi.anchor(g)), alg.ad_group(&gi, &zeta.anchor(g)));
    let boundary = 0.5 * (alg.dot(&lx, &-zeta.profile(g, 0.0)) - alg.dot(&lz, &-xi.profile(g, 0.0)));
    boundary + 0.5 * (pairing_dot(ctx, zeta, xi, g) - pairing_dot(ctx, xi, zeta, g))
}

/// `Q^α = ½θ^L·α₀ + ½∫₀¹ α_t·α̇_t` by quadrature, on tangent vectors.
pub fn q_alpha(ctx: &Context, fam: &ConnectionFamily, g: &Matrix, v: &Vector, w: &Vector) -> f64 {
    let alg = &ctx.alg;
    let gi = alg.inverse(g);
    let (lv, lw) = (alg.ad_group(&gi, v), alg.ad_group(&gi, w));
    let boundary = 0.5 * (alg.dot(&lv, &fam.alpha0(g, w)) - alg.dot(&lw, &fam.alpha0(g, v)));
    let bulk = ctx.grid.integrate(|t| {
        alg.dot(&fam.alpha(t, g, v), &fam.alpha_dot(t, g, w)) - alg.dot(&fam.alpha(t, g, w), &fam.alpha_dot(t, g, v))
    });
    boundary + 0.5 * bulk
}

/// Closed form `Q^α = ½(θ^L + θ^R)·α₀ + ½α₀·Ad_g α₀` for the bump
/// interpolation.
pub fn q_alpha_closed(ctx: &Context, fam: &ConnectionFamily, g: &Matrix, v: &Vector, w: &Vector) -> f64 {
    let alg = &ctx.alg;
    let gi = alg.inverse(g);
    let (sv, sw) = (alg.ad_group(&gi, v) + v, alg.ad_group(&gi, w) + w);
    let (av, aw) = (fam.alpha0(g, v), fam.alpha0(g, w));
    0.5 * (alg.dot(&sv, &aw) - alg.dot(&sw, &av)) + 0.5 * (alg.dot(&av, &alg.ad_group(g, &aw)) - alg.dot(&aw, &alg.ad_group(g, &av)))
}

/// `η` recovered from the connection data: `a*η = −⟨d^θ j, F^θ⟩`, where
/// `F^θ(v, w)(t) = F^{α_t}(v, w)`.
pub fn eta_from_data(ctx: &Context, fam: &ConnectionFamily, g: &Matrix, v: [&Vector; 3]) -> f64 {
    let alg = &ctx.alg;
    let pair = |a: &Vector, b: &Vector, c: &Vector| {
        -ctx.grid.integrate(|t| alg.dot(&fam.alpha_dot(t, g, a), &fam.curvature(t, g, b, c, ctx.steps)))
    };
    let total = pair(v[0], v[1], v[2]) - pair(v[1], v[0], v[2]) + pair(v[2], v[0], v[1]);
    -total
}

/// An element of `L̂ = L ⊕ ℝ` over each point: a loop and a central scalar.
#[derive(Clone)]
pub struct ExtendedLSection {
    pub body: Section,
    pub scalar: ScalarFn,
}

impl std::fmt::Debug for ExtendedLSection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ExtendedLSection").field("body", &self.body).finish()
    }
}

impl ExtendedLSection {
    pub fn new(body: Section, scalar: ScalarFn) -> Self {
        ExtendedLSection { body, scalar }
    }

    /// The splitting `j(ξ) = (ξ, 0)`.
    pub fn split(body: Section) -> Self {
        ExtendedLSection { body, scalar: Arc::new(|_| 0.0) }
    }

    /// `(ζ, s)` values at `g`, stacked as profile samples plus the scalar.
    pub fn sample(&self, ctx: &Context, g: &Matrix, times: &[f64]) -> Vector {
        let d = ctx.alg.dim();
        let mut out = Vector::zeros(d * times.len() + 1);
        for (i, &t) in times.iter().enumerate() {
            out.rows_mut(i * d, d).copy_from(&self.body.profile(g, t));
        }
        out[d * times.len()] = (self.scalar)(g);
        out
    }

    pub fn add(&self, other: &ExtendedLSection) -> ExtendedLSection {
        let (a, b) = (self.scalar.clone(), other.scalar.clone());
        ExtendedLSection { body: self.body.add(&other.body), scalar: Arc::new(move |g| a(g) + b(g)) }
    }

    pub fn sub(&self, other: &ExtendedLSection) -> ExtendedLSection {
        let (a, b) = (self.scalar.clone(), other.scalar.clone());
        ExtendedLSection { body: self.body.sub(&other.body), scalar: Arc::new(move |g| a(g) - b(g)) }
    }
}

/// `[(ζ₁,s₁), (ζ₂,s₂)] = (−[ζ₁,ζ₂]_𝔤, ∫₀¹ ζ̇₁·ζ₂)`.
pub fn bracket_lhat(ctx: &Context, a: &ExtendedLSection, b: &ExtendedLSection) -> ExtendedLSection {
    let body = ctx.atiyah().bracket(&a.body, &b.body);
    let (c, z1, z2) = (ctx.clone(), a.body.clone(), b.body.clone());
    ExtendedLSection { body, scalar: Arc::new(move |g| pairing_dot(&c, &z1, &z2, g)) }
}

/// `∇̂_ξ(ζ, s) = ([ξ, ζ]_A, a(ξ)s + ∫₀¹ ξ̇·ζ)`.
pub fn nabla_hat(ctx: &Context, xi: &Section, b: &ExtendedLSection) -> ExtendedLSection {
    let body = ctx.atiyah().bracket(xi, &b.body);
    let (c, x, z, s) = (ctx.clone(), xi.clone(), b.body.clone(), b.scalar.clone());
    ExtendedLSection {
        body,
        scalar: Arc::new(move |g| {
            let ds = directional_derivative(&c.alg, |h| scalar(s(h)), g, &x.anchor(g), c.steps.group)[0];
            ds + pairing_dot(&c, &x, &z, g)
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::LieAlgebra;
    use crate::path::Bump;
    use crate::sampling::Sampler;
    use approx::assert_abs_diff_eq;
    use nalgebra::DVector;
    use std::f64::consts::PI;

    fn trig_loops(ctx: &Context) -> (Section, Section) {
        let (e1, e1b, e1c, e1d) = (ctx.alg.unit(0), ctx.alg.unit(0), ctx.alg.unit(0), ctx.alg.unit(0));
        let s = Section::loop_at_identity(&ctx.alg, move |t| &e1 * (2.0 * PI * t).sin(), move |t| &e1b * (2.0 * PI * (2.0 * PI * t).cos()));
        let c = Section::loop_at_identity(&ctx.alg, move |t| &e1c * (2.0 * PI * t).cos(), move |t| &e1d * (-2.0 * PI * (2.0 * PI * t).sin()));
        (s, c)
    }

    #[test]
    fn sigma_oracle() {
        let ctx = Context::with_defaults(LieAlgebra::su2());
        let (s, c) = trig_loops(&ctx);
        let id = ctx.alg.identity();
        assert_abs_diff_eq!(sigma(&ctx, &s, &c, &id).unwrap(), -PI, epsilon = 1e-7);
        assert_abs_diff_eq!(sigma(&ctx, &c, &s, &id).unwrap(), PI, epsilon = 1e-7);
        let gen = Section::generator(&ctx.alg, &ctx.alg.unit(0));
        let g = ctx.alg.exp(&ctx.alg.unit(1));
        assert!(sigma(&ctx, &gen, &s, &g).is_err());
    }

    #[test]
    fn varpi_generator_oracle() {
        let ctx = Context::with_defaults(LieAlgebra::so3());
        let g = ctx.alg.exp(&(ctx.alg.unit(2) * (PI / 2.0)));
        let (x, y) = (ctx.alg.unit(0), ctx.alg.unit(1));
        let quad = varpi(&ctx, &Section::generator(&ctx.alg, &x), &Section::generator(&ctx.alg, &y), &g);
        assert_abs_diff_eq!(quad, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(varpi_generators(&ctx, &x, &y, &g), -1.0, epsilon = 1e-12);
    }

    #[test]
    fn varpi_is_antisymmetric() {
        let ctx = Context::with_defaults(LieAlgebra::su2());
        let mut s = Sampler::new(3);
        let g = s.group_point(&ctx.alg, 1.0);
        let (a, b) = (s.section(&ctx), s.section(&ctx));
        let r = varpi(&ctx, &a, &b, &g) + varpi(&ctx, &b, &a, &g);
        assert!(r.abs() < 1e-6, "{r}");
    }

    #[test]
    fn q_alpha_routes_agree() {
        let ctx = Context::with_defaults(LieAlgebra::su2());
        let fam = ConnectionFamily::invariant(&ctx.alg, 0.7, -0.4, Bump::default());
        let g = ctx.alg.exp(&DVector::from_vec(vec![0.3, 0.5, -0.9]));
        let v = DVector::from_vec(vec![0.2, -0.6, 0.1]);
        let w = DVector::from_vec(vec![-0.4, 0.3, 0.8]);
        assert_abs_diff_eq!(q_alpha(&ctx, &fam, &g, &v, &w), q_alpha_closed(&ctx, &fam, &g, &v, &w), epsilon = 1e-8);
        let zero = ConnectionFamily::standard(&ctx.alg, Bump::default());
        assert_abs_diff_eq!(q_alpha(&ctx, &zero, &g, &v, &w), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn eta_from_standard_data() {
        let ctx = Context::with_defaults(LieAlgebra::su2());
        let fam = ConnectionFamily::standard(&ctx.alg, Bump::default());
        let g = ctx.alg.exp(&DVector::from_vec(vec![0.3, 0.5, -0.9]));
        let (e1, e2, e3) = (ctx.alg.unit(0), ctx.alg.unit(1), ctx.alg.unit(2));
        assert_abs_diff_eq!(eta_from_data(&ctx, &fam, &g, [&e1, &e2, &e3]), 0.5, epsilon = 1e-8);
    }

    #[test]
    fn lhat_bracket_of_split_loops() {
        let ctx = Context::with_defaults(LieAlgebra::su2());
        let (s, c) = trig_loops(&ctx);
        let id = ctx.alg.identity();
        let b = bracket_lhat(&ctx, &ExtendedLSection::split(s.clone()), &ExtendedLSection::split(c.clone()));
        assert_abs_diff_eq!((b.scalar)(&id), -sigma(&ctx, &s, &c, &id).unwrap(), epsilon = 1e-12);
    }
}
