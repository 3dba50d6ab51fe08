//! Concatenation of paths, the composable-pair algebroid `A^[2]`, the fusion
//! identity for `ϖ`, and the Courant bracket on `A ⊕ A*`.

use std::sync::Arc;

use crate::algebroid::{Algebroid, Atiyah, Field, Tangent};
use crate::chern_simons::{lambda_pullback, GaugeMap};
use crate::forms::{cartan_eta, Form};
use crate::lie::LieAlgebra;
use crate::lifting::{varpi, varpi_form};
use crate::path::{Bump, Section};
use crate::sampling::Sampler;
use crate::{Context, Error, Matrix, Result, Vector};

/// `θ^R` of `g″g′` along `(v″, v′)`: `v″ + Ad_{g″} v′`.
pub fn mult_tangent(alg: &LieAlgebra, g2: &Matrix, v2: &Vector, v1: &Vector) -> Vector {
    v2 + alg.ad_group(g2, v1)
}

/// `mult_G: G × G → G`, `(g″, g′) ↦ g″g′`, with its exact pullback of `θ^R`.
pub fn multiplication(alg: &Arc<LieAlgebra>) -> GaugeMap<Tangent> {
    let a = alg.clone();
    let right = Form::new(1, move |p: &Vec<Matrix>, s: &[Field]| {
        let v = s[0](p);
        mult_tangent(&a, &p[0], &v[0], &v[1])
    });
    GaugeMap::new(alg, |p: &Vec<Matrix>| &p[0] * &p[1], right)
}

/// `λ = ½pr₁*θ^L·pr₂*θ^R` on `G × G`, factor 0 being `g″`.
pub fn lambda_form(alg: &Arc<LieAlgebra>) -> Form<Tangent> {
    lambda_pullback(&GaugeMap::projection(alg, 0), &GaugeMap::projection(alg, 1), alg)
}

/// `λ` at `(g″, g′)` on the tangent vectors `(v″, v′)` and `(w″, w′)`.
pub fn lambda_value(alg: &LieAlgebra, g2: &Matrix, v: [&Vector; 2], w: [&Vector; 2]) -> f64 {
    let gi = alg.inverse(g2);
    0.5 * (alg.dot(&alg.ad_group(&gi, v[0]), w[1]) - alg.dot(&alg.ad_group(&gi, w[0]), v[1]))
}

/// Width of the end intervals on which concatenated profiles must be constant.
pub const FLAT_MARGIN: f64 = 0.1;

/// A pair `(ξ″, ξ′) ∈ A_{g″} × A_{g′}` with `ξ′₁ = ξ″₀`, both flat near the
/// integers.
#[derive(Clone, Debug)]
pub struct ComposablePair {
    pub second: Section,
    pub first: Section,
}

impl ComposablePair {
    pub fn new(second: Section, first: Section) -> Self {
        ComposablePair { second, first }
    }

    /// `|ξ′₁(g′) − ξ″₀(g″)|`.
    pub fn seam_residual(&self, g2: &Matrix, g1: &Matrix) -> f64 {
        (self.first.profile(g1, 1.0) - self.second.profile(g2, 0.0)).amax()
    }

    /// A random pair at `(g″, g′)`: `ξ′` is a flat-margin section and `ξ″` a
    /// template whose initial value is `ξ′₁(g′)`.
    pub fn sample(rng: &mut Sampler, ctx: &Context, g1: &Matrix, margin: f64) -> Self {
        let first = rng.flat_section(ctx, margin);
        let start = first.profile(g1, 1.0);
        let bump = Bump::with_margin(margin);
        let a: crate::path::FieldFn = Arc::new(move |_| start.clone());
        let second = Section::template(&ctx.alg, a, rng.field(&ctx.alg), bump).with_interior_mode(
            rng.field(&ctx.alg),
            2,
            bump,
        );
        ComposablePair { second, first }
    }

    /// `ξ″ * ξ′ ∈ A_{g″g′}`: `ξ′_{2t}` on `[0, ½]`, `ξ″_{2t−1}` on `[½, 1]`,
    /// with anchor `Ad_{g″}v_{ξ′} + v_{ξ″}`. The result is an element of the
    /// fiber over `g″g′`; its profile ignores the base point.
    pub fn concat(&self, alg: &Arc<LieAlgebra>, g2: &Matrix, g1: &Matrix, tol: f64) -> Result<Section> {
        if !(self.first.has_flat_ends() && self.second.has_flat_ends()) {
            return Err(Error::InvalidInput("concatenation needs profiles constant near the integers".into()));
        }
        let gap = self.seam_residual(g2, g1);
        if !(gap <= tol) {
            return Err(Error::InvalidInput(format!("seam mismatch {gap:.3e}")));
        }
        let flat = [(&self.first, g1), (&self.second, g2)].iter().fold(0.0f64, |worst, (xi, g)| {
            let (start, end) = (xi.profile(g, 0.0), xi.profile(g, 1.0));
            [0.5, 1.0].iter().fold(worst, |w, &k| {
                let t = k * FLAT_MARGIN;
                w.max((xi.profile(g, t) - &start).amax()).max((xi.profile(g, 1.0 - t) - &end).amax())
            })
        });
        if flat > 1e-12 {
            return Err(Error::InvalidInput(format!("profile varies by {flat:.3e} within the flat margin")));
        }
        let anchor = mult_tangent(alg, g2, &self.second.anchor(g2), &self.first.anchor(g1));
        let (p2, p1) = (g2.clone(), g1.clone());
        let (s, f) = (self.second.clone(), self.first.clone());
        let profile = move |_: &Matrix, t: f64| if t <= 0.5 { f.profile(&p1, 2.0 * t) } else { s.profile(&p2, 2.0 * t - 1.0) };
        let (p2, p1, a) = (g2.clone(), g1.clone(), alg.clone());
        let (s, f) = (self.second.clone(), self.first.clone());
        let h = crate::lie::Steps::default().time;
        let dot = move |_: &Matrix, t: f64| {
            if t <= 0.5 {
                f.time_derivative(&a, &p1, 2.0 * t, h) * 2.0
            } else {
                s.time_derivative(&a, &p2, 2.0 * t - 1.0, h) * 2.0
            }
        };
        Ok(Section::new(profile, move |_| anchor.clone()).with_dot(dot).with_flat_ends(true))
    }
}

/// `ϖ_{g″g′}(ξ″*ξ′, ζ″*ζ′) − ϖ_{g″}(ξ″,ζ″) − ϖ_{g′}(ξ′,ζ′) + λ(a(ξ), a(ζ))`.
pub fn fusion_residual(
    ctx: &Context,
    xi: &ComposablePair,
    zeta: &ComposablePair,
    g2: &Matrix,
    g1: &Matrix,
    tol: f64,
) -> Result<f64> {
    let g = g2 * g1;
    let lhs = varpi(ctx, &xi.concat(&ctx.alg, g2, g1, tol)?, &zeta.concat(&ctx.alg, g2, g1, tol)?, &g);
    let parts = varpi(ctx, &xi.second, &zeta.second, g2) + varpi(ctx, &xi.first, &zeta.first, g1);
    let lambda = lambda_value(
        &ctx.alg,
        g2,
        [&xi.second.anchor(g2), &xi.first.anchor(g1)],
        [&zeta.second.anchor(g2), &zeta.first.anchor(g1)],
    );
    Ok(lhs - parts + lambda)
}

type PairProfile = Arc<dyn Fn(&[Matrix], f64) -> Vector + Send + Sync>;
type PairField = Arc<dyn Fn(&[Matrix]) -> Vector + Send + Sync>;

/// One factor of a section of `A × A → G × G`.
#[derive(Clone)]
struct Slot {
    profile: PairProfile,
    dot: PairProfile,
    anchor: PairField,
}

/// A section of `A × A` over `G × G`; slot 0 lives over `g″`, slot 1 over
/// `g′`, and both may depend on the whole point.
#[derive(Clone)]
pub struct PairSection {
    slots: [Slot; 2],
}

impl std::fmt::Debug for PairSection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("PairSection")
    }
}

fn template_slot(alg: &Arc<LieAlgebra>, slot: usize, a: PairField, v: PairField, bump: Bump) -> Slot {
    let (al, a1, v1) = (alg.clone(), a.clone(), v.clone());
    let jump = move |p: &[Matrix]| {
        let base = a1(p);
        al.ad_group(&p[slot], &base) + v1(p) - base
    };
    let jump = Arc::new(jump);
    let j2 = jump.clone();
    Slot {
        profile: Arc::new(move |p, t| a(p) + j2(p) * bump.value(t)),
        dot: Arc::new(move |p, t| jump(p) * bump.derivative(t)),
        anchor: v,
    }
}

fn random_pair_field(rng: &mut Sampler, alg: &Arc<LieAlgebra>) -> PairField {
    let (c, d1, d2) = (rng.vector(alg, 1.0), rng.vector(alg, 1.0), rng.vector(alg, 1.0));
    let alg = alg.clone();
    Arc::new(move |p| &c + alg.ad_group(&p[0], &d1) + alg.ad_group(&p[1], &d2) * 0.5)
}

impl PairSection {
    /// A composable pair of templates: slot 1 starts at `a′`, slot 0 starts
    /// where slot 1 ends, `Ad_{g′}a′ + v′`.
    pub fn sample_composable(rng: &mut Sampler, alg: &Arc<LieAlgebra>, bump: Bump) -> Self {
        let (a1, v1, v2) = (random_pair_field(rng, alg), random_pair_field(rng, alg), random_pair_field(rng, alg));
        let first = template_slot(alg, 1, a1.clone(), v1.clone(), bump);
        let al = alg.clone();
        let a2: PairField = Arc::new(move |p| al.ad_group(&p[1], &a1(p)) + v1(p));
        let second = template_slot(alg, 0, a2, v2, bump);
        PairSection { slots: [second, first] }
    }

    pub fn profile(&self, slot: usize, p: &[Matrix], t: f64) -> Vector {
        (self.slots[slot].profile)(p, t)
    }

    pub fn anchor(&self, p: &[Matrix]) -> Vec<Vector> {
        self.slots.iter().map(|s| (s.anchor)(p)).collect()
    }

    /// `|ξ′₁ − ξ″₀|` at `p = (g″, g′)`.
    pub fn seam_residual(&self, p: &[Matrix]) -> f64 {
        (self.profile(1, p, 1.0) - self.profile(0, p, 0.0)).amax()
    }

    /// `|ξ_i(1) − Ad_{g_i} ξ_i(0) − v_i|` for both slots.
    pub fn quasi_periodicity_residual(&self, alg: &LieAlgebra, p: &[Matrix]) -> f64 {
        (0..2)
            .map(|i| {
                let s = &self.slots[i];
                ((s.profile)(p, 1.0) - alg.ad_group(&p[i], &(s.profile)(p, 0.0)) - (s.anchor)(p)).amax()
            })
            .fold(0.0, f64::max)
    }

    /// The bracket of `A × A`, slot by slot:
    /// `−[ξᵢ, ζᵢ] + D_{a(ξ)}ζᵢ − D_{a(ζ)}ξᵢ`, anchor the bracket of the
    /// anchor fields on `G × G`.
    pub fn bracket(&self, other: &PairSection, tangent: &Tangent) -> PairSection {
        let field = |s: &PairSection| -> Field {
            let s = s.clone();
            Arc::new(move |p: &[Matrix]| s.anchor(p))
        };
        let anchor_bracket = tangent.bracket(&field(self), &field(other));
        let slots = [0, 1].map(|i| {
            let (x, z, tg) = (self.clone(), other.clone(), tangent.clone());
            let profile = move |p: &[Matrix], t: f64| {
                let (vx, vz) = (x.anchor(p), z.anchor(p));
                let dz = tg.derivative(&|q: &[Matrix]| z.profile(i, q, t), p, &vx);
                let dx = tg.derivative(&|q: &[Matrix]| x.profile(i, q, t), p, &vz);
                -tg.alg.bracket(&x.profile(i, p, t), &z.profile(i, p, t)) + dz - dx
            };
            let (x, z, tg) = (self.clone(), other.clone(), tangent.clone());
            let dot = move |p: &[Matrix], t: f64| {
                let (vx, vz) = (x.anchor(p), z.anchor(p));
                let xd = |q: &[Matrix]| (x.slots[i].dot)(q, t);
                let zd = |q: &[Matrix]| (z.slots[i].dot)(q, t);
                -tg.alg.bracket(&xd(p), &z.profile(i, p, t)) - tg.alg.bracket(&x.profile(i, p, t), &zd(p))
                    + tg.derivative(&zd, p, &vx)
                    - tg.derivative(&xd, p, &vz)
            };
            let ab = anchor_bracket.clone();
            Slot { profile: Arc::new(profile), dot: Arc::new(dot), anchor: Arc::new(move |p| ab(p)[i].clone()) }
        });
        PairSection { slots }
    }
}

/// An element `(v, α)` of `Γ(A ⊕ A*)`.
#[derive(Clone, Debug)]
pub struct CourantElement {
    pub section: Section,
    pub coform: Form<Atiyah>,
}

impl CourantElement {
    pub fn new(section: Section, coform: Form<Atiyah>) -> Self {
        CourantElement { section, coform }
    }

    /// `f(ξ) = (ξ, ι_ξϖ)`.
    pub fn action(ctx: &Context, xi: &Section) -> Self {
        let coform = varpi_form(ctx).contract(xi).expect("2-form");
        CourantElement { section: xi.clone(), coform }
    }

    /// `f(v) + α` for a basic 1-form `α`, checked on a probe loop.
    pub fn with_basic(ctx: &Context, v: &Section, alpha: &Form<Atiyah>, probe: (&Matrix, &Section)) -> Result<Self> {
        let (g, lp) = probe;
        let on_loop = alpha.value(g, std::slice::from_ref(lp)).abs();
        if lp.anchor(g).amax() > 1e-12 || on_loop > 1e-9 {
            return Err(Error::InvalidInput(format!("1-form is not basic: {on_loop:.3e} on a loop")));
        }
        let f = Self::action(ctx, v);
        Ok(CourantElement { section: f.section, coform: f.coform.add(alpha) })
    }
}

/// `⟦(v₁,α₁),(v₂,α₂)⟧ = ([v₁,v₂]_A, L_{v₁}α₂ − ι_{v₂}dα₁)`.
pub fn courant_bracket(ctx: &Context, a: &CourantElement, b: &CourantElement) -> CourantElement {
    let alg = ctx.atiyah();
    let section = alg.bracket(&a.section, &b.section);
    let lie = b.coform.lie_derivative(&alg, &a.section);
    let contracted = a.coform.d(&alg).contract(&b.section).expect("2-form");
    CourantElement { section, coform: lie.sub(&contracted) }
}

/// `⟨(v₁,α₁),(v₂,α₂)⟩ = α₁(v₂) + α₂(v₁)` at `g`.
pub fn courant_pairing(a: &CourantElement, b: &CourantElement, g: &Matrix) -> f64 {
    a.coform.value(g, std::slice::from_ref(&b.section)) + b.coform.value(g, std::slice::from_ref(&a.section))
}

/// `a(e₁)⟨e₂,e₃⟩ − ⟨⟦e₁,e₂⟧,e₃⟩ − ⟨e₂,⟦e₁,e₃⟧⟩` at `g`.
pub fn compatibility_residual(ctx: &Context, e: [&CourantElement; 3], g: &Matrix) -> f64 {
    let (e2, e3) = (e[1].clone(), e[2].clone());
    let pairing = move |h: &Matrix| crate::forms::scalar(courant_pairing(&e2, &e3, h));
    let lhs = ctx.atiyah().anchor_derivative(&e[0].section, g, &pairing)[0];
    let b12 = courant_bracket(ctx, e[0], e[1]);
    let b13 = courant_bracket(ctx, e[0], e[2]);
    lhs - courant_pairing(&b12, e[2], g) - courant_pairing(e[1], &b13, g)
}

/// Coform of `f([v₁,v₂]_A) + ι_{v₂}ι_{v₁}a*η + L_{v₁}α₂ − ι_{v₂}dα₁` on `ζ`.
pub fn reduced_bracket_value(
    ctx: &Context,
    v: [&Section; 2],
    alpha: [&Form<Atiyah>; 2],
    zeta: &Section,
    g: &Matrix,
) -> f64 {
    let alg = ctx.atiyah();
    let bracket = alg.bracket(v[0], v[1]);
    let twist = cartan_eta(&ctx.alg, g, [&v[0].anchor(g), &v[1].anchor(g), &zeta.anchor(g)]);
    let lie = alpha[1].lie_derivative(&alg, v[0]).value(g, std::slice::from_ref(zeta));
    let contracted = alpha[0].d(&alg).value(g, &[v[1].clone(), zeta.clone()]);
    varpi(ctx, &bracket, zeta, g) + twist + lie - contracted
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambda_value_matches_form() {
        let alg = Arc::new(LieAlgebra::su2());
        let mut s = Sampler::new(1);
        let p = vec![s.group_point(&alg, 1.0), s.group_point(&alg, 1.0)];
        let (v, w) = ([s.vector(&alg, 1.0), s.vector(&alg, 1.0)], [s.vector(&alg, 1.0), s.vector(&alg, 1.0)]);
        let form = lambda_form(&alg).value(&p, &[Tangent::constant(v.to_vec()), Tangent::constant(w.to_vec())]);
        let direct = lambda_value(&alg, &p[0], [&v[0], &v[1]], [&w[0], &w[1]]);
        assert!((form - direct).abs() < 1e-14);
    }
}
