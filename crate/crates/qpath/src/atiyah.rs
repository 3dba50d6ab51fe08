//! Connections on the path algebroid: the gauge-periodic families `α_t`,
//! the induced splitting `θ`, curvature, `Ψ`, and the canonical family `κ_t`.

use std::sync::Arc;

use crate::algebroid::{Algebroid, Atiyah, EquivariantAlgebroid, Field, Tangent};
use crate::forms::Form;
use crate::lie::{directional_derivative, LieAlgebra, Steps};
use crate::path::{Bump, FieldFn, ProfileFn, Section};
use crate::{Error, Matrix, Result, Vector};

/// Base 1-form `α₀` on `G`, as a function of the point and the
/// right-trivialized tangent vector.
pub type BaseForm = Arc<dyn Fn(&Matrix, &Vector) -> Vector + Send + Sync>;

/// A family `α_t` with `α_{t+1} = Ad_g α_t − θ^R`, interpolated on each unit
/// interval by a bump: `α_t = α_n + f(t − n)(α_{n+1} − α_n)`.
#[derive(Clone)]
pub struct ConnectionFamily {
    alg: Arc<LieAlgebra>,
    alpha0: BaseForm,
    bump: Bump,
    invariant: bool,
}

impl std::fmt::Debug for ConnectionFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ConnectionFamily").field("invariant", &self.invariant).finish()
    }
}

impl ConnectionFamily {
    pub fn new(alg: &Arc<LieAlgebra>, alpha0: BaseForm, bump: Bump, invariant: bool) -> Self {
        ConnectionFamily { alg: alg.clone(), alpha0, bump, invariant }
    }

    /// `α₀ = 0`.
    pub fn standard(alg: &Arc<LieAlgebra>, bump: Bump) -> Self {
        let zero = alg.zero();
        Self::new(alg, Arc::new(move |_, _| zero.clone()), bump, true)
    }

    /// `α₀ = c_R θ^R + c_L θ^L`, which is invariant under conjugation.
    pub fn invariant(alg: &Arc<LieAlgebra>, c_right: f64, c_left: f64, bump: Bump) -> Self {
        let a = alg.clone();
        Self::new(
            alg,
            Arc::new(move |g, v| v * c_right + a.ad_group(&a.inverse(g), v) * c_left),
            bump,
            true,
        )
    }

    pub fn alg(&self) -> &Arc<LieAlgebra> {
        &self.alg
    }

    pub fn bump(&self) -> Bump {
        self.bump
    }

    pub fn is_invariant(&self) -> bool {
        self.invariant
    }

    pub fn alpha0(&self, g: &Matrix, v: &Vector) -> Vector {
        (self.alpha0)(g, v)
    }

    fn split(t: f64) -> (i64, f64) {
        let n = t.floor();
        let (mut n, mut s) = (n as i64, t - n);
        if n == 1 && s == 0.0 {
            n = 0;
            s = 1.0;
        }
        (n, s)
    }

    fn shift(&self, g: &Matrix, v: &Vector, mut value: Vector, n: i64, affine: bool) -> Vector {
        if n > 0 {
            let ad = self.alg.ad_group_matrix(g);
            for _ in 0..n {
                value = &ad * value;
                if affine {
                    value -= v;
                }
            }
        } else if n < 0 {
            let ad = self.alg.ad_group_matrix(&self.alg.inverse(g));
            for _ in 0..(-n) {
                if affine {
                    value += v;
                }
                value = &ad * value;
            }
        }
        value
    }

    /// `α_t` applied to the tangent vector with `θ^R = v` at `g`.
    pub fn alpha(&self, t: f64, g: &Matrix, v: &Vector) -> Vector {
        let (n, s) = Self::split(t);
        let a0 = self.alpha0(g, v);
        let a1 = self.alg.ad_group(g, &a0) - v;
        let value = &a0 + (a1 - &a0) * self.bump.value(s);
        self.shift(g, v, value, n, true)
    }

    /// `∂α_t/∂t`.
    pub fn alpha_dot(&self, t: f64, g: &Matrix, v: &Vector) -> Vector {
        let (n, s) = Self::split(t);
        let a0 = self.alpha0(g, v);
        let a1 = self.alg.ad_group(g, &a0) - v;
        let value = (a1 - a0) * self.bump.derivative(s);
        self.shift(g, v, value, n, false)
    }

    /// `α_t` as a `𝔤`-valued form on `G`.
    pub fn form_on_group(&self, t: f64) -> Form<Tangent> {
        let me = self.clone();
        Form::new(1, move |p: &Vec<Matrix>, s: &[Field]| me.alpha(t, &p[0], &s[0](p)[0]))
    }

    /// `a*α_t` on the path algebroid.
    pub fn form_on_algebroid(&self, t: f64) -> Form<Atiyah> {
        let me = self.clone();
        Form::new(1, move |g: &Matrix, s: &[Section]| me.alpha(t, g, &s[0].anchor(g)))
    }

    /// `θ(ξ) = ξ + α(a(ξ))`, a loop at every point.
    pub fn apply(&self, xi: &Section) -> Section {
        let (me, x1) = (self.clone(), xi.clone());
        let (me2, x2) = (self.clone(), xi.clone());
        let zero = self.alg.zero();
        Section::from_parts(
            Arc::new(move |g, t| x1.profile(g, t) + me.alpha(t, g, &x1.anchor(g))),
            Some(Arc::new(move |g: &Matrix, t: f64| {
                x2.time_derivative(&me2.alg, g, t, 1e-5) + me2.alpha_dot(t, g, &x2.anchor(g))
            }) as ProfileFn),
            Arc::new(move |_| zero.clone()),
            xi.has_flat_ends(),
        )
    }

    /// Checked variant of [`ConnectionFamily::apply`] that confirms the result
    /// is a loop at `g`.
    pub fn try_apply(&self, xi: &Section, g: &Matrix, tol: f64) -> Result<Section> {
        let out = self.apply(xi);
        out.validate(&self.alg, g, tol)?;
        Ok(out)
    }

    /// Horizontal lift `Hor(X) = −α(X)` of a right-trivialized vector field.
    pub fn horizontal(&self, v: FieldFn) -> Section {
        let (me, v1) = (self.clone(), v.clone());
        let (me2, v2) = (self.clone(), v.clone());
        Section::from_parts(
            Arc::new(move |g, t| -me.alpha(t, g, &v1(g))),
            Some(Arc::new(move |g: &Matrix, t: f64| -me2.alpha_dot(t, g, &v2(g))) as ProfileFn),
            v,
            true,
        )
    }

    /// `F^{α_t}(v, w)` for constant frames `v, w`:
    /// `D_v α(w) − D_w α(v) − α(−[v,w]) + [α v, α w]`.
    pub fn curvature(&self, t: f64, g: &Matrix, v: &Vector, w: &Vector, steps: Steps) -> Vector {
        let alg = &self.alg;
        let dvw = directional_derivative(alg, |h| self.alpha(t, h, w), g, v, steps.group);
        let dwv = directional_derivative(alg, |h| self.alpha(t, h, v), g, w, steps.group);
        let frame = -alg.bracket(v, w);
        dvw - dwv - self.alpha(t, g, &frame) + alg.bracket(&self.alpha(t, g, v), &self.alpha(t, g, w))
    }

    /// `Ψ(x) = −x + α(x_G)`, a loop at every point.
    pub fn psi(&self, x: &Vector) -> Result<Section> {
        if !self.invariant {
            return Err(Error::InvalidInput("Ψ needs an invariant connection".into()));
        }
        let (me, x1) = (self.clone(), x.clone());
        let (me2, x2) = (self.clone(), x.clone());
        let zero = self.alg.zero();
        Ok(Section::from_parts(
            Arc::new(move |g, t| -&x1 + me.alpha(t, g, &(me.alg.ad_group(g, &x1) - &x1))),
            Some(Arc::new(move |g: &Matrix, t: f64| me2.alpha_dot(t, g, &(me2.alg.ad_group(g, &x2) - &x2)))
                as ProfileFn),
            Arc::new(move |_| zero.clone()),
            true,
        ))
    }

    /// The same family with `t` replaced by `φ(t)`, where `φ(t+1) = φ(t)+1`.
    pub fn reparametrized(&self, phi: Arc<dyn Fn(f64) -> f64 + Send + Sync>) -> Reparametrized {
        Reparametrized { base: self.clone(), phi }
    }
}

/// A connection family composed with a reparametrization of time; values
/// only, `∂_t` by the chain rule through a central difference of `φ`.
#[derive(Clone)]
pub struct Reparametrized {
    pub base: ConnectionFamily,
    pub phi: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl Reparametrized {
    pub fn alpha(&self, t: f64, g: &Matrix, v: &Vector) -> Vector {
        self.base.alpha((self.phi)(t), g, v)
    }

    pub fn alpha_dot(&self, t: f64, g: &Matrix, v: &Vector) -> Vector {
        let h = 1e-6;
        let dphi = ((self.phi)(t + h) - (self.phi)(t - h)) / (2.0 * h);
        self.base.alpha_dot((self.phi)(t), g, v) * dphi
    }
}

/// `κ_t(ξ) = −ξ_t` as a `𝔤`-valued form on the path algebroid.
pub fn kappa(alg: &Arc<LieAlgebra>, t: f64) -> Form<Atiyah> {
    let alg = alg.clone();
    Form::new(1, move |g: &Matrix, s: &[Section]| -s[0].extend(&alg, g, t))
}

/// `∂_t κ_t(ξ) = −ξ̇_t`.
pub fn kappa_dot(alg: &Arc<LieAlgebra>, t: f64, h: f64) -> Form<Atiyah> {
    let alg = alg.clone();
    Form::new(1, move |g: &Matrix, s: &[Section]| -s[0].time_derivative(&alg, g, t, h))
}

/// `F^β = dβ + ½[β, β]` for a `𝔤`-valued 1-form.
pub fn curvature_form<A: Algebroid>(beta: &Form<A>, algebroid: &A, alg: &Arc<LieAlgebra>) -> Form<A> {
    beta.d(algebroid).add(&beta.bracket_wedge(beta, alg).scale(0.5))
}

/// Degree-0 part of `F_G^β(x)`: `−β(x_N)`.
pub fn equivariant_curvature_zero<A: EquivariantAlgebroid>(beta: &Form<A>, algebroid: &A, x: &Vector) -> Form<A> {
    let gen = algebroid.generator(x);
    beta.contract(&gen).expect("1-form").scale(-1.0)
}

/// The action of `k` on sections: `(k.ξ)(g, t) = Ad_k ξ(k⁻¹ g k, t)`.
pub fn act(alg: &Arc<LieAlgebra>, k: &Matrix, xi: &Section) -> Section {
    let (a1, k1, x1) = (alg.clone(), k.clone(), xi.clone());
    let (a2, k2, x2) = (alg.clone(), k.clone(), xi.clone());
    let conj = |alg: &LieAlgebra, k: &Matrix, g: &Matrix| alg.inverse(k) * g * k;
    Section::new(
        move |g, t| a1.ad_group(&k1, &x1.profile(&conj(&a1, &k1, g), t)),
        move |g| a2.ad_group(&k2, &x2.anchor(&conj(&a2, &k2, g))),
    )
}
