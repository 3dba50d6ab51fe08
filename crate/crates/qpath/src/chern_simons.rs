//! Gauge transformations of `𝔤`-valued 1-forms, Chern–Simons forms and the
//! functional `Q` of gauge-periodic families.

use std::sync::Arc;

use crate::algebroid::{pushforward, Algebroid, Atiyah, EquivariantAlgebroid, Tangent};
use crate::atiyah::ConnectionFamily;
use crate::bott::FormFamily;
use crate::forms::{maurer_cartan_form, pullback_anchor, scalar, Form, MixedForm};
use crate::lie::{LieAlgebra, Side};
use crate::path::{gauss_legendre_unit, Bump};
use crate::{Error, Matrix, Result, Vector};

type PointMap<A> = Arc<dyn Fn(&<A as Algebroid>::Point) -> Matrix + Send + Sync>;

/// A map `Φ: N → G` together with `Φ*θ^R` and `Φ*θ^L` as forms on `A`.
pub struct GaugeMap<A: Algebroid> {
    map: PointMap<A>,
    right: Form<A>,
    left: Form<A>,
}

impl<A: Algebroid> Clone for GaugeMap<A> {
    fn clone(&self) -> Self {
        GaugeMap { map: self.map.clone(), right: self.right.clone(), left: self.left.clone() }
    }
}

impl<A: Algebroid> std::fmt::Debug for GaugeMap<A> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("GaugeMap")
    }
}

fn ad_form<A: Algebroid>(alg: &Arc<LieAlgebra>, map: &PointMap<A>, form: &Form<A>, invert: bool) -> Form<A> {
    let (alg, map) = (alg.clone(), map.clone());
    form.map_values(move |p, v| {
        let g = map(p);
        let g = if invert { alg.inverse(&g) } else { g };
        alg.ad_group(&g, &v)
    })
}

impl<A: Algebroid> GaugeMap<A> {
    /// `Φ` with a given `Φ*θ^R`; `Φ*θ^L = Ad_{Φ⁻¹}Φ*θ^R`.
    pub fn new(alg: &Arc<LieAlgebra>, map: impl Fn(&A::Point) -> Matrix + Send + Sync + 'static, right: Form<A>) -> Self {
        let map: PointMap<A> = Arc::new(map);
        let left = ad_form(alg, &map, &right, true);
        GaugeMap { map, right, left }
    }

    /// The constant map `Φ ≡ e`.
    pub fn identity(alg: &Arc<LieAlgebra>) -> Self {
        let (e, z) = (alg.identity(), alg.zero());
        let zero = Form::new(1, move |_: &A::Point, _: &[A::Section]| z.clone());
        GaugeMap { map: Arc::new(move |_| e.clone()), right: zero.clone(), left: zero }
    }

    pub fn value(&self, p: &A::Point) -> Matrix {
        (self.map)(p)
    }

    /// `Φ*θ^R`.
    pub fn right(&self) -> &Form<A> {
        &self.right
    }

    /// `Φ*θ^L`.
    pub fn left(&self) -> &Form<A> {
        &self.left
    }

    /// The pointwise product `Φ·Ψ`.
    pub fn compose(&self, other: &GaugeMap<A>, alg: &Arc<LieAlgebra>) -> GaugeMap<A> {
        let (f, g) = (self.map.clone(), other.map.clone());
        let right = self.right.add(&ad_form(alg, &self.map, &other.right, false));
        let left = other.left.add(&ad_form(alg, &other.map, &self.left, true));
        GaugeMap { map: Arc::new(move |p| f(p) * g(p)), right, left }
    }

    /// `Φ⁻¹`, with `(Φ⁻¹)*θ^R = −Φ*θ^L` and `(Φ⁻¹)*θ^L = −Φ*θ^R`.
    pub fn inverse(&self, alg: &Arc<LieAlgebra>) -> GaugeMap<A> {
        let (f, a) = (self.map.clone(), alg.clone());
        GaugeMap { map: Arc::new(move |p| a.inverse(&f(p))), right: self.left.scale(-1.0), left: self.right.scale(-1.0) }
    }

    /// `Φⁿ` for any integer `n`.
    pub fn power(&self, n: i64, alg: &Arc<LieAlgebra>) -> GaugeMap<A> {
        let base = if n < 0 { self.inverse(alg) } else { self.clone() };
        (0..n.unsigned_abs()).fold(GaugeMap::identity(alg), |acc, _| base.compose(&acc, alg))
    }

    /// `Φ•β = Ad_Φ β − Φ*θ^R`.
    pub fn transform(&self, beta: &Form<A>, alg: &Arc<LieAlgebra>) -> Form<A> {
        ad_form(alg, &self.map, beta, false).sub(&self.right)
    }

    /// `Φ*η = (1/12) Φ*θ^L·[Φ*θ^L, Φ*θ^L]`.
    pub fn pullback_eta(&self, alg: &Arc<LieAlgebra>) -> Form<A> {
        let l = &self.left;
        l.dot_wedge(&l.bracket_wedge(l, alg), alg).scale(1.0 / 12.0)
    }

    /// Degree-1 part of `Φ*η_G(x)`: `−½(Φ*θ^L + Φ*θ^R)·x`.
    pub fn pullback_eta_g_linear(&self, alg: &Arc<LieAlgebra>, x: &Vector) -> Form<A> {
        let (alg, x) = (alg.clone(), x.clone());
        self.left.add(&self.right).map_values(move |_, v| scalar(-0.5 * alg.dot(&v, &x)))
    }

    /// `Φ*η_G(x)`.
    pub fn pullback_eta_g(&self, alg: &Arc<LieAlgebra>, x: &Vector) -> MixedForm<A> {
        let mut m = MixedForm::single(self.pullback_eta(alg));
        m.insert(self.pullback_eta_g_linear(alg, x));
        m
    }
}

impl GaugeMap<Tangent> {
    /// A map `G^r → G`, with `Φ*θ^R` by differentiating along the flow.
    pub fn on_tangent(tangent: &Tangent, map: impl Fn(&[Matrix]) -> Matrix + Send + Sync + 'static) -> Self {
        let map: Arc<dyn Fn(&[Matrix]) -> Matrix + Send + Sync> = Arc::new(map);
        let (t, m) = (tangent.clone(), map.clone());
        let right = Form::new(1, move |p: &Vec<Matrix>, s: &[crate::algebroid::Field]| {
            let flow = |q: &[Matrix], v: &[Vector], h: f64| t.flow(q, v, h);
            pushforward(&t.alg, &*m, p, &s[0](p), &flow, t.steps.group)
        });
        GaugeMap::new(&tangent.alg, move |p: &Vec<Matrix>| map(p), right)
    }

    /// The projection `pr_i: G^r → G`, whose pullbacks are the Maurer–Cartan
    /// forms of that factor.
    pub fn projection(alg: &Arc<LieAlgebra>, factor: usize) -> Self {
        GaugeMap {
            map: Arc::new(move |p: &Vec<Matrix>| p[factor].clone()),
            right: maurer_cartan_form(alg, Side::Right, factor),
            left: maurer_cartan_form(alg, Side::Left, factor),
        }
    }

    /// `Φ∘a` on the path algebroid, for a map on a single copy of `G`.
    pub fn anchor_pullback(&self) -> GaugeMap<Atiyah> {
        let f = self.map.clone();
        GaugeMap {
            map: Arc::new(move |g: &Matrix| f(&vec![g.clone()])),
            right: pullback_anchor(&self.right),
            left: pullback_anchor(&self.left),
        }
    }
}

/// `CS(β) = ½dβ·β + ⅙β·[β,β]`.
pub fn cs<A: Algebroid>(beta: &Form<A>, algebroid: &A, alg: &Arc<LieAlgebra>) -> Form<A> {
    let quadratic = beta.d(algebroid).dot_wedge(beta, alg).scale(0.5);
    let cubic = beta.dot_wedge(&beta.bracket_wedge(beta, alg), alg).scale(1.0 / 6.0);
    quadratic.add(&cubic)
}

/// `CS_G(β)(x) = ½d_Gβ(x)·β + ⅙β·[β,β] + β·x`.
pub fn cs_g<A: EquivariantAlgebroid>(beta: &Form<A>, algebroid: &A, alg: &Arc<LieAlgebra>, x: &Vector) -> MixedForm<A> {
    let mut out = MixedForm::single(cs(beta, algebroid, alg));
    let gen = algebroid.generator(x);
    let (b, a, x) = (beta.clone(), alg.clone(), x.clone());
    out.insert(Form::new(1, move |p: &A::Point, s: &[A::Section]| {
        let contracted = b.eval(p, std::slice::from_ref(&gen));
        let value = b.eval(p, s);
        scalar(-0.5 * a.dot(&contracted, &value) + a.dot(&value, &x))
    }));
    out
}

fn split_time(t: f64) -> (i64, f64) {
    let n = t.floor();
    let (n, s) = (n as i64, t - n);
    if n == 1 && s == 0.0 {
        (0, 1.0)
    } else {
        (n, s)
    }
}

/// A family `β_t` with `β_{t+1} = Φ•β_t`, stored on `[0, 1]` and extended by
/// the gauge map.
pub struct OneFormFamily<A: Algebroid> {
    alg: Arc<LieAlgebra>,
    unit: FormFamily<A>,
    gauge: GaugeMap<A>,
}

impl<A: Algebroid> Clone for OneFormFamily<A> {
    fn clone(&self) -> Self {
        OneFormFamily { alg: self.alg.clone(), unit: self.unit.clone(), gauge: self.gauge.clone() }
    }
}

impl<A: Algebroid> std::fmt::Debug for OneFormFamily<A> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("OneFormFamily")
    }
}

impl<A: EquivariantAlgebroid> OneFormFamily<A> {
    /// `unit` only needs to be meaningful for `t ∈ [0, 1]`.
    pub fn new(alg: &Arc<LieAlgebra>, unit: FormFamily<A>, gauge: GaugeMap<A>) -> Self {
        OneFormFamily { alg: alg.clone(), unit, gauge }
    }

    /// `β_t = β₀ + f(t)(Φ•β₀ − β₀)` on `[0, 1]`.
    pub fn interpolating(alg: &Arc<LieAlgebra>, base: Form<A>, gauge: GaugeMap<A>, bump: Bump) -> Self {
        let step = gauge.transform(&base, alg).sub(&base);
        let (b, st) = (base.clone(), step.clone());
        let unit = FormFamily::new(move |t| b.add(&st.scale(bump.value(t))), move |t| step.scale(bump.derivative(t)));
        OneFormFamily::new(alg, unit, gauge)
    }

    pub fn gauge(&self) -> &GaugeMap<A> {
        &self.gauge
    }

    pub fn alg(&self) -> &Arc<LieAlgebra> {
        &self.alg
    }

    /// The family as `t ↦ (β_t, β̇_t)` on the whole line.
    pub fn as_family(&self) -> FormFamily<A> {
        let (a, b) = (self.clone(), self.clone());
        FormFamily::new(move |t| a.value(t), move |t| b.dot(t))
    }

    pub fn value(&self, t: f64) -> Form<A> {
        let (n, s) = split_time(t);
        let beta = (self.unit.value)(s);
        if n == 0 {
            beta
        } else {
            self.gauge.power(n, &self.alg).transform(&beta, &self.alg)
        }
    }

    pub fn dot(&self, t: f64) -> Form<A> {
        let (n, s) = split_time(t);
        let dot = (self.unit.dot)(s);
        if n == 0 {
            dot
        } else {
            let phi = self.gauge.power(n, &self.alg);
            ad_form(&self.alg, &phi.map, &dot, false)
        }
    }

    /// `|β_{t+1} − Φ•β_t|` on the given arguments.
    pub fn periodicity_residual(&self, t: f64, p: &A::Point, args: &[A::Section]) -> f64 {
        let moved = self.gauge.transform(&self.value(t), &self.alg);
        (self.value(t + 1.0).eval(p, args) - moved.eval(p, args)).amax()
    }

    /// `Q^β = ½Φ*θ^L·β₀ + ½∫₀¹β_t·β̇_t`, integrated with `panels` blocks of
    /// 16 Gauss–Legendre nodes.
    pub fn q_functional(&self, panels: usize) -> Form<A> {
        let gl = gauss_legendre_unit(16);
        let nodes: Vec<(f64, f64)> = (0..panels)
            .flat_map(|k| gl.iter().map(move |&(s, w)| ((k as f64 + s) / panels as f64, w / panels as f64)))
            .collect();
        let boundary = self.gauge.left.dot_wedge(&self.value(0.0), &self.alg).scale(0.5);
        let terms: Vec<(Form<A>, f64)> = nodes
            .iter()
            .map(|&(t, w)| (self.value(t).dot_wedge(&self.dot(t), &self.alg), 0.5 * w))
            .collect();
        Form::new(2, move |p: &A::Point, s: &[A::Section]| {
            terms.iter().fold(boundary.eval(p, s), |acc, (f, w)| acc + f.eval(p, s) * *w)
        })
    }

    /// `t ↦ β_{φ(t)}` for `φ(t + 1) = φ(t) + 1`.
    pub fn reparametrized(
        &self,
        phi: impl Fn(f64) -> f64 + Send + Sync + 'static,
        phi_dot: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        let (a, b) = (self.clone(), self.clone());
        let phi = Arc::new(phi);
        let p2 = phi.clone();
        let unit = FormFamily::new(move |t| a.value(phi(t)), move |t| b.dot(p2(t)).scale(phi_dot(t)));
        OneFormFamily::new(&self.alg, unit, self.gauge.clone())
    }

    /// `β⁻_t = β_{−t}`, with gauge map `Φ⁻¹`.
    pub fn inverted(&self) -> Self {
        let (a, b) = (self.clone(), self.clone());
        let unit = FormFamily::new(move |t| a.value(-t), move |t| b.dot(-t).scale(-1.0));
        OneFormFamily::new(&self.alg, unit, self.gauge.inverse(&self.alg))
    }

    /// `β″ * β′`: `β′_{2t}` on `[0, ½]`, `β″_{2t−1}` on `[½, 1]`, with gauge
    /// map `Φ″Φ′`. Composability `β′₁ = β″₀` is checked on the probe.
    pub fn concatenate(first: &Self, second: &Self, probe: (&A::Point, &[A::Section]), tol: f64) -> Result<Self> {
        let (p, args) = probe;
        let gap = (first.value(1.0).eval(p, args) - second.value(0.0).eval(p, args)).amax();
        if gap > tol {
            return Err(Error::InvalidInput(format!("families are not composable (gap {gap:.3e})")));
        }
        let (f1, s1, f2, s2) = (first.clone(), second.clone(), first.clone(), second.clone());
        let unit = FormFamily::new(
            move |t| if t <= 0.5 { f1.value(2.0 * t) } else { s1.value(2.0 * t - 1.0) },
            move |t| if t <= 0.5 { f2.dot(2.0 * t).scale(2.0) } else { s2.dot(2.0 * t - 1.0).scale(2.0) },
        );
        let gauge = second.gauge.compose(&first.gauge, &first.alg);
        Ok(OneFormFamily::new(&first.alg, unit, gauge))
    }
}

impl OneFormFamily<Tangent> {
    /// The family `α_t` on `G` with gauge map `id: G → G`.
    pub fn from_connection(fam: &ConnectionFamily) -> Self {
        let (a, b) = (fam.clone(), fam.clone());
        let alpha_dot = move |t: f64| {
            let f = b.clone();
            Form::new(1, move |p: &Vec<Matrix>, s: &[crate::algebroid::Field]| f.alpha_dot(t, &p[0], &s[0](p)[0]))
        };
        let unit = FormFamily::new(move |t| a.form_on_group(t), alpha_dot);
        OneFormFamily::new(fam.alg(), unit, GaugeMap::projection(fam.alg(), 0))
    }
}

/// `λ = ½pr₁*θ^L·pr₂*θ^R` on `G × G`, pulled back along `(Φ₁, Φ₂)`.
pub fn lambda_pullback<A: Algebroid>(first: &GaugeMap<A>, second: &GaugeMap<A>, alg: &Arc<LieAlgebra>) -> Form<A> {
    first.left().dot_wedge(second.right(), alg).scale(0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::Steps;
    use crate::sampling::Sampler;
    use approx::assert_abs_diff_eq;

    #[test]
    fn projection_matches_pushforward() {
        let alg = Arc::new(LieAlgebra::su2());
        let tangent = Tangent::new(alg.clone(), 1, Steps::default());
        let pushed = GaugeMap::on_tangent(&tangent, |p| p[0].clone());
        let exact = GaugeMap::projection(&alg, 0);
        let mut rng = Sampler::new(3);
        let p = vec![rng.group_point(&alg, 1.0)];
        let v = vec![Tangent::constant(vec![rng.vector(&alg, 1.0)])];
        assert_abs_diff_eq!((pushed.right().eval(&p, &v) - exact.right().eval(&p, &v)).amax(), 0.0, epsilon = 1e-8);
        assert_abs_diff_eq!((pushed.left().eval(&p, &v) - exact.left().eval(&p, &v)).amax(), 0.0, epsilon = 1e-8);
    }

    #[test]
    fn split_time_keeps_unit_interval_closed() {
        assert_eq!(split_time(1.0), (0, 1.0));
        assert_eq!(split_time(0.0), (0, 0.0));
        assert_eq!(split_time(-0.25), (-1, 0.75));
        assert_eq!(split_time(2.5), (2, 0.5));
    }
}
