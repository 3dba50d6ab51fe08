//! The lifting problem: primitives `ω` with `dω = −η`, the bracket on
//! `Â = L̂ ⊕ TN` and its Jacobiator, the equivariant generator condition, and
//! the change of splitting data `(j, θ) → (j + β, θ + λ)`.

use std::sync::Arc;

use crate::algebroid::{Algebroid, Field, Tangent};
use crate::atiyah::ConnectionFamily;
use crate::forms::{cartan_eta, scalar, Form};
use crate::lie::{directional_derivative, LieAlgebra};
use crate::lifting::{eta_from_data, pairing_dot, ExtendedLSection};
use crate::path::{gauss_legendre_unit, FieldFn, ScalarFn, Section};
use crate::{Context, Error, Matrix, Result, Vector};

/// Radial-homotopy primitive of `−η` in exponential coordinates.
///
/// With `u = log g` and `J_y = dexp_y`, the pulled-back Cartan form is
/// `η̃_y(a,b,c) = η_{exp y}(J_y a, J_y b, J_y c)` and
/// `ω̃_u(b,c) = −∫₀¹ s² η̃_{su}(u,b,c) ds`. Valid wherever `log` inverts `exp`.
#[derive(Clone, Debug)]
pub struct PoincarePrimitive {
    alg: Arc<LieAlgebra>,
    rule: Vec<(f64, f64)>,
}

impl PoincarePrimitive {
    pub fn new(alg: &Arc<LieAlgebra>, nodes: usize) -> Self {
        PoincarePrimitive { alg: alg.clone(), rule: gauss_legendre_unit(nodes) }
    }

    fn chart_omega(&self, u: &Vector, b: &Vector, c: &Vector) -> f64 {
        let alg = &self.alg;
        -self
            .rule
            .iter()
            .map(|&(s, w)| {
                let y = u * s;
                let g = alg.exp(&y);
                // J_y u = u since ad_y u = 0.
                w * s * s * cartan_eta(alg, &g, [u, &alg.dexp(&y, b), &alg.dexp(&y, c)])
            })
            .sum::<f64>()
    }

    fn chart_coordinates(&self, g: &Matrix) -> Result<(Vector, Matrix)> {
        let u = self.alg.log(g);
        let jinv = self.alg.dexp_matrix(&u).try_inverse().ok_or(Error::SingularGram)?;
        Ok((u, jinv))
    }

    /// `ω_g(v, w)` for right-trivialized `v, w`.
    pub fn omega(&self, g: &Matrix, v: &Vector, w: &Vector) -> Result<f64> {
        let (u, jinv) = self.chart_coordinates(g)?;
        Ok(self.chart_omega(&u, &(&jinv * v), &(&jinv * w)))
    }

    /// `dΦ(x)(v) = −ω(x_G, v) − ½(θ^L + θ^R)(v)·x`, closed because `ω` is
    /// conjugation invariant.
    pub fn phi_differential(&self, x: &Vector, g: &Matrix, v: &Vector) -> Result<f64> {
        let alg = &self.alg;
        let xg = alg.ad_group(g, x) - x;
        let sym = alg.ad_group(&alg.inverse(g), v) + v;
        Ok(-self.omega(g, &xg, v)? - 0.5 * alg.dot(&sym, x))
    }

    /// `Φ(x)(g)`, integrating `dΦ(x)` along `s ↦ exp(su)` with `Φ(x)(e) = 0`.
    pub fn phi(&self, x: &Vector, g: &Matrix) -> Result<f64> {
        let u = self.alg.log(g);
        let mut total = 0.0;
        for &(s, w) in &self.rule {
            total += w * self.phi_differential(x, &self.alg.exp(&(&u * s)), &u)?;
        }
        Ok(total)
    }
}

/// Right-trivialized 2-form on `G`.
pub type TwoFormFn = Arc<dyn Fn(&Matrix, &Vector, &Vector) -> f64 + Send + Sync>;
/// `(x, g) ↦ Φ(x)(g)`.
pub type MomentFn = Arc<dyn Fn(&Vector, &Matrix) -> f64 + Send + Sync>;

/// A 2-form `ω` on the base with an optional equivariant 0-form part `Φ`, so
/// that `ω_G = ω − Φ`.
#[derive(Clone)]
pub struct OmegaForm {
    eval: TwoFormFn,
    moment: Option<MomentFn>,
}

impl std::fmt::Debug for OmegaForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OmegaForm").field("moment", &self.moment.is_some()).finish()
    }
}

impl OmegaForm {
    pub fn new(eval: TwoFormFn, moment: Option<MomentFn>) -> Self {
        OmegaForm { eval, moment }
    }

    pub fn zero() -> Self {
        OmegaForm { eval: Arc::new(|_, _, _| 0.0), moment: None }
    }

    /// The radial primitive with `nodes` Gauss–Legendre points, and its `Φ`.
    pub fn poincare(alg: &Arc<LieAlgebra>, nodes: usize) -> Self {
        let prim = PoincarePrimitive::new(alg, nodes);
        let p2 = prim.clone();
        OmegaForm {
            eval: Arc::new(move |g, v, w| prim.omega(g, v, w).unwrap_or(f64::NAN)),
            moment: Some(Arc::new(move |x, g| p2.phi(x, g).unwrap_or(f64::NAN))),
        }
    }

    pub fn value(&self, g: &Matrix, v: &Vector, w: &Vector) -> f64 {
        (self.eval)(g, v, w)
    }

    /// `Φ(x)(g)`, zero when no moment map is attached.
    pub fn moment(&self, x: &Vector, g: &Matrix) -> f64 {
        self.moment.as_ref().map_or(0.0, |m| m(x, g))
    }

    pub fn form(&self) -> Form<Tangent> {
        let eval = self.eval.clone();
        Form::scalar(2, move |p: &Vec<Matrix>, s: &[Field]| eval(&p[0], &s[0](p)[0], &s[1](p)[0]))
    }
}

/// `dω(v₁, v₂, v₃)` at `g` for right-trivialized vectors.
pub fn d_omega(ctx: &Context, omega: &OmegaForm, g: &Matrix, v: [&Vector; 3]) -> f64 {
    let tangent = ctx.tangent(1);
    let frames: Vec<Field> = v.iter().map(|x| Tangent::constant(vec![(*x).clone()])).collect();
    omega.form().d(&tangent).value(&vec![g.clone()], &frames)
}

/// `(dω + η)(v₁, v₂, v₃)` with the Cartan 3-form.
pub fn obstruction_pairing(ctx: &Context, omega: &OmegaForm, g: &Matrix, v: [&Vector; 3]) -> f64 {
    d_omega(ctx, omega, g, v) + cartan_eta(&ctx.alg, g, v)
}

/// `(dω + η)(v₁, v₂, v₃)` with `η` taken from the connection data,
/// `a*η = −⟨d^θ j, F^θ⟩`; it differs from the Cartan form by `dQ^α`.
pub fn obstruction_pairing_from_data(
    ctx: &Context,
    omega: &OmegaForm,
    fam: &ConnectionFamily,
    g: &Matrix,
    v: [&Vector; 3],
) -> f64 {
    d_omega(ctx, omega, g, v) + eta_from_data(ctx, fam, g, v)
}

/// A section `(ζ, s, X)` of `Â = L̂ ⊕ TN`.
#[derive(Clone)]
pub struct LiftedSection {
    pub hat_body: ExtendedLSection,
    pub tangent: FieldFn,
}

impl std::fmt::Debug for LiftedSection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LiftedSection").field("hat_body", &self.hat_body).finish()
    }
}

impl LiftedSection {
    pub fn new(body: Section, scalar: ScalarFn, tangent: FieldFn) -> Self {
        LiftedSection { hat_body: ExtendedLSection::new(body, scalar), tangent }
    }
}

/// The Jacobiator of three lifted sections, split into components.
#[derive(Clone, Debug, PartialEq)]
pub struct Jacobiator {
    /// Max norm of the `L`-part over the sampled times.
    pub body: f64,
    pub scalar: f64,
    pub tangent: f64,
}

impl Jacobiator {
    pub fn max_abs(&self) -> f64 {
        self.body.max(self.scalar.abs()).max(self.tangent)
    }
}

/// `Â` built from a connection family and a 2-form `ω`, with `L̂` acting
/// through `∇̂`.
///
/// In right trivialization `[Hor X, Hor Y]_A − Hor[X,Y] = −F^θ(X,Y)`, so
/// horizontal lifts bracket by `Hor[X,Y] − j(F^θ(X,Y)) + ω(X,Y)`. With this
/// sign the scalar part of the Jacobiator is `−(dω + η)(X₁,X₂,X₃)`.
#[derive(Clone, Debug)]
pub struct LiftedAlgebroid {
    ctx: Context,
    fam: ConnectionFamily,
    omega: OmegaForm,
}

impl LiftedAlgebroid {
    pub fn new(ctx: &Context, fam: &ConnectionFamily, omega: OmegaForm) -> Self {
        LiftedAlgebroid { ctx: ctx.clone(), fam: fam.clone(), omega }
    }

    /// The path-algebroid section `Hor(X) + ζ` underlying `(ζ, s, X)`.
    pub fn path_section(&self, a: &LiftedSection) -> Section {
        self.fam.horizontal(a.tangent.clone()).add(&a.hat_body.body)
    }

    pub fn bracket(&self, a: &LiftedSection, b: &LiftedSection) -> LiftedSection {
        let atiyah = self.ctx.atiyah();
        let (xa, xb) = (self.path_section(a), self.path_section(b));
        let bracket = atiyah.bracket(&xa, &xb);
        let body = self.fam.apply(&bracket);
        let tangent = bracket.anchor_fn().clone();

        let me = self.clone();
        let (ha, hb) = (self.fam.horizontal(a.tangent.clone()), self.fam.horizontal(b.tangent.clone()));
        let (za, zb) = (a.hat_body.body.clone(), b.hat_body.body.clone());
        let (sa, sb) = (a.hat_body.scalar.clone(), b.hat_body.scalar.clone());
        let (ta, tb) = (a.tangent.clone(), b.tangent.clone());
        let scalar_part = move |g: &Matrix| {
            let ctx = &me.ctx;
            let (va, vb) = (ta(g), tb(g));
            let h = ctx.steps.group;
            let dsb = directional_derivative(&ctx.alg, |k| scalar(sb(k)), g, &va, h)[0];
            let dsa = directional_derivative(&ctx.alg, |k| scalar(sa(k)), g, &vb, h)[0];
            dsb - dsa + pairing_dot(ctx, &ha, &zb, g) - pairing_dot(ctx, &hb, &za, g) + pairing_dot(ctx, &za, &zb, g)
                + me.omega.value(g, &va, &vb)
        };
        LiftedSection::new(body, Arc::new(scalar_part), tangent)
    }

    fn components(&self, a: &LiftedSection, g: &Matrix, times: &[f64]) -> (Vector, f64, Vector) {
        (a.hat_body.sample(&self.ctx, g, times), (a.hat_body.scalar)(g), (a.tangent)(g))
    }

    /// `Σ_cyc [[a, b], c]` at `g`, with the `L`-part sampled at `times`.
    pub fn jacobiator(&self, a: &LiftedSection, b: &LiftedSection, c: &LiftedSection, g: &Matrix, times: &[f64]) -> Jacobiator {
        let terms = [(a, b, c), (b, c, a), (c, a, b)];
        let d = self.ctx.alg.dim();
        let mut body = Vector::zeros(d * times.len() + 1);
        let (mut s, mut tangent) = (0.0, self.ctx.alg.zero());
        for (x, y, z) in terms {
            let (bv, sv, tv) = self.components(&self.bracket(&self.bracket(x, y), z), g, times);
            body += bv;
            s += sv;
            tangent += tv;
        }
        let body_max = body.rows(0, d * times.len()).amax();
        Jacobiator { body: body_max, scalar: s, tangent: tangent.amax() }
    }
}

/// Residual of `ω(x_N, v) + dΦ(x)(v) = ⟨d^θ j(v), Ψ(x)⟩` at `g`.
pub fn equivariant_generator_residual(
    ctx: &Context,
    omega: &OmegaForm,
    fam: &ConnectionFamily,
    x: &Vector,
    g: &Matrix,
    v: &Vector,
) -> Result<f64> {
    let alg = &ctx.alg;
    let xn = alg.ad_group(g, x) - x;
    let dphi = directional_derivative(alg, |k| scalar(omega.moment(x, k)), g, v, ctx.steps.group)[0];
    let psi = fam.psi(x)?;
    let rhs = -ctx.grid.integrate(|t| alg.dot(&fam.alpha_dot(t, g, v), &psi.profile(g, t)));
    Ok(omega.value(g, &xn, v) + dphi - rhs)
}

/// Change of splitting data: `j' = j + β` with `β(ζ) = ∫₀¹ b(g,t)·ζ_t`, and
/// `θ' = θ + λ` with `λ(ξ)` the loop built from `c(g, a(ξ))`.
#[derive(Clone)]
pub struct GaugeChange {
    pub b: Arc<dyn Fn(&Matrix, f64) -> Vector + Send + Sync>,
    pub c: Arc<dyn Fn(&Matrix, &Vector) -> Vector + Send + Sync>,
}

impl std::fmt::Debug for GaugeChange {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("GaugeChange")
    }
}

impl GaugeChange {
    pub fn new(
        b: impl Fn(&Matrix, f64) -> Vector + Send + Sync + 'static,
        c: impl Fn(&Matrix, &Vector) -> Vector + Send + Sync + 'static,
    ) -> Self {
        GaugeChange { b: Arc::new(b), c: Arc::new(c) }
    }

    pub fn beta(&self, ctx: &Context, zeta: &Section, g: &Matrix) -> f64 {
        ctx.grid.integrate(|t| ctx.alg.dot(&(self.b)(g, t), &zeta.profile(g, t)))
    }

    /// `λ` of the vector field `v`: a loop at every point.
    pub fn lambda(&self, ctx: &Context, v: FieldFn) -> Section {
        let c = self.c.clone();
        let a: FieldFn = Arc::new(move |g| c(g, &v(g)));
        let zero = ctx.alg.zero();
        Section::template(&ctx.alg, a, Arc::new(move |_| zero.clone()), ctx.bump)
    }

    fn lambda_of(&self, ctx: &Context, xi: &Section) -> Section {
        self.lambda(ctx, xi.anchor_fn().clone())
    }

    /// `⟨dj', ζ⟩(ξ) = ∫ξ̇·ζ + a(ξ)β(ζ) − β([ξ, ζ]_A)`.
    pub fn dj_prime(&self, ctx: &Context, zeta: &Section, xi: &Section, g: &Matrix) -> f64 {
        let db = directional_derivative(&ctx.alg, |k| scalar(self.beta(ctx, zeta, k)), g, &xi.anchor(g), ctx.steps.group)[0];
        pairing_dot(ctx, xi, zeta, g) + db - self.beta(ctx, &ctx.atiyah().bracket(xi, zeta), g)
    }

    /// `σ'(ξ₁, ξ₂) = σ(ξ₁, ξ₂) + β(−[ξ₁, ξ₂]_𝔤)`.
    pub fn sigma_prime(&self, ctx: &Context, xi1: &Section, xi2: &Section, g: &Matrix) -> f64 {
        let alg = &ctx.alg;
        let commutator = ctx.grid.integrate(|t| alg.dot(&(self.b)(g, t), &-alg.bracket(&xi1.profile(g, t), &xi2.profile(g, t))));
        -pairing_dot(ctx, xi1, xi2, g) + commutator
    }

    /// `ϖ' = ⟨dj', θ'⟩ + ½σ'(θ', θ')`.
    pub fn varpi_prime(&self, ctx: &Context, fam: &ConnectionFamily, xi: &Section, zeta: &Section, g: &Matrix) -> f64 {
        let tx = fam.apply(xi).add(&self.lambda_of(ctx, xi));
        let tz = fam.apply(zeta).add(&self.lambda_of(ctx, zeta));
        self.dj_prime(ctx, &tz, xi, g) - self.dj_prime(ctx, &tx, zeta, g) + self.sigma_prime(ctx, &tx, &tz, g)
    }

    /// `d^θλ(X, Y) = [Hor X, λY]_A − [Hor Y, λX]_A − λ[X, Y]`.
    pub fn d_theta_lambda(&self, ctx: &Context, fam: &ConnectionFamily, xi: &Section, zeta: &Section) -> Section {
        let atiyah = ctx.atiyah();
        let (x, y) = (xi.anchor_fn().clone(), zeta.anchor_fn().clone());
        let (lx, ly) = (self.lambda(ctx, x.clone()), self.lambda(ctx, y.clone()));
        let first = atiyah.bracket(&fam.horizontal(x.clone()), &ly);
        let second = atiyah.bracket(&fam.horizontal(y.clone()), &lx);
        let at = atiyah.clone();
        let xy: FieldFn = Arc::new(move |g| at.field_bracket(&|h| x(h), &|h| y(h), g));
        first.sub(&second).sub(&self.lambda(ctx, xy))
    }

    /// The horizontal 2-form
    /// `⟨d^θj, λ⟩ + ½σ(λ,λ) − ⟨β, F^θ + d^θλ⟩ + ½β([λ,λ]_L)`, which is `a*γ`.
    ///
    /// Named apart from the loop cocycle `σ`, with which it would otherwise
    /// share a symbol.
    pub fn gamma_precursor(&self, ctx: &Context, fam: &ConnectionFamily, xi: &Section, zeta: &Section, g: &Matrix) -> f64 {
        let alg = &ctx.alg;
        let (lx, lz) = (self.lambda_of(ctx, xi), self.lambda_of(ctx, zeta));
        let (vx, vz) = (xi.anchor(g), zeta.anchor(g));
        let dtj = |l: &Section, v: &Vector| -ctx.grid.integrate(|t| alg.dot(&fam.alpha_dot(t, g, v), &l.profile(g, t)));
        let first = dtj(&lz, &vx) - dtj(&lx, &vz) - pairing_dot(ctx, &lx, &lz, g);
        let curvature = ctx.grid.integrate(|t| alg.dot(&(self.b)(g, t), &fam.curvature(t, g, &vx, &vz, ctx.steps)));
        let dl = self.d_theta_lambda(ctx, fam, xi, zeta);
        let bracket = ctx.grid.integrate(|t| alg.dot(&(self.b)(g, t), &-alg.bracket(&lx.profile(g, t), &lz.profile(g, t))));
        first - curvature - self.beta(ctx, &dl, g) + bracket
    }

    /// `ϖ^{α}' − ϖ^α − a*γ`, which must be closed. Here `ϖ^α = ⟨dj, θ⟩ +
    /// ½σ(θ, θ)` is built from the unchanged data.
    pub fn defect_form(&self, ctx: &Context, fam: &ConnectionFamily) -> Form<crate::algebroid::Atiyah> {
        let (me, ctx, fam) = (self.clone(), ctx.clone(), fam.clone());
        Form::scalar(2, move |g: &Matrix, s: &[Section]| {
            me.varpi_prime(&ctx, &fam, &s[0], &s[1], g)
                - crate::lifting::brylinski(&ctx, &fam, &s[0], &s[1], g)
                - me.gamma_precursor(&ctx, &fam, &s[0], &s[1], g)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::Bump;
    use crate::sampling::Sampler;
    use nalgebra::DVector;

    #[test]
    fn poincare_primitive_inverts_eta() {
        let ctx = Context::with_defaults(LieAlgebra::su2());
        let omega = OmegaForm::poincare(&ctx.alg, 16);
        let mut s = Sampler::new(5);
        for _ in 0..3 {
            let g = s.group_point(&ctx.alg, 0.8);
            let v: Vec<Vector> = (0..3).map(|_| s.vector(&ctx.alg, 1.0)).collect();
            let r = obstruction_pairing(&ctx, &omega, &g, [&v[0], &v[1], &v[2]]);
            assert!(r.abs() < 1e-6, "{r}");
        }
    }

    #[test]
    fn moment_differential_matches() {
        let ctx = Context::with_defaults(LieAlgebra::su2());
        let prim = PoincarePrimitive::new(&ctx.alg, 16);
        let mut s = Sampler::new(6);
        let g = s.group_point(&ctx.alg, 0.8);
        let (x, v) = (s.vector(&ctx.alg, 1.0), s.vector(&ctx.alg, 1.0));
        let fd = directional_derivative(&ctx.alg, |k| scalar(prim.phi(&x, k).unwrap()), &g, &v, 1e-4)[0];
        let exact = prim.phi_differential(&x, &g, &v).unwrap();
        assert!((fd - exact).abs() < 1e-7, "{fd} vs {exact}");
    }

    #[test]
    fn generator_condition_holds_with_poincare_moment() {
        let ctx = Context::with_defaults(LieAlgebra::su2());
        let omega = OmegaForm::poincare(&ctx.alg, 16);
        let fam = ConnectionFamily::standard(&ctx.alg, Bump::default());
        let g = ctx.alg.exp(&DVector::from_vec(vec![0.3, -0.5, 0.4]));
        let (x, v) = (DVector::from_vec(vec![0.7, 0.1, -0.2]), DVector::from_vec(vec![-0.3, 0.6, 0.9]));
        let r = equivariant_generator_residual(&ctx, &omega, &fam, &x, &g, &v).unwrap();
        assert!(r.abs() < 1e-6, "{r}");
    }
}
