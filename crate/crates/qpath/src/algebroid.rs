//! The Lie algebroids forms are evaluated on: the path algebroid `A → G`
//! and tangent bundles of products `G^r`, both in right trivialization.

use std::sync::Arc;

use crate::lie::{directional_derivative, richardson, LieAlgebra, Steps};
use crate::path::{ProfileFn, Section};
use crate::{Matrix, Vector};

/// What the exterior calculus needs from an algebroid: a bracket of sections
/// and the derivative of a function along the anchor of a section.
pub trait Algebroid: Clone + Send + Sync + 'static {
    type Point: Clone + Send + Sync + 'static;
    type Section: Clone + Send + Sync + 'static;

    fn bracket(&self, a: &Self::Section, b: &Self::Section) -> Self::Section;

    /// `a(s)[f]` at `p`.
    fn anchor_derivative(
        &self,
        s: &Self::Section,
        p: &Self::Point,
        f: &dyn Fn(&Self::Point) -> Vector,
    ) -> Vector;
}

/// Algebroids carrying generators of a `G`-action.
pub trait EquivariantAlgebroid: Algebroid {
    fn generator(&self, x: &Vector) -> Self::Section;
}

/// The path algebroid `A → G`.
#[derive(Clone, Debug)]
pub struct Atiyah {
    pub alg: Arc<LieAlgebra>,
    pub steps: Steps,
}

impl Atiyah {
    pub fn new(alg: Arc<LieAlgebra>, steps: Steps) -> Self {
        Atiyah { alg, steps }
    }

    /// `D_v F` at `g` along the right-trivialized direction `v`.
    pub fn derivative(&self, f: &dyn Fn(&Matrix) -> Vector, g: &Matrix, v: &Vector) -> Vector {
        directional_derivative(&self.alg, f, g, v, self.steps.group)
    }

    /// Bracket of right-trivialized vector fields: `−[v,w] + D_v w − D_w v`.
    pub fn field_bracket(
        &self,
        v: &dyn Fn(&Matrix) -> Vector,
        w: &dyn Fn(&Matrix) -> Vector,
        g: &Matrix,
    ) -> Vector {
        let (vg, wg) = (v(g), w(g));
        -self.alg.bracket(&vg, &wg) + self.derivative(w, g, &vg) - self.derivative(v, g, &wg)
    }
}

impl Algebroid for Atiyah {
    type Point = Matrix;
    type Section = Section;

    /// `[ξ,ζ]_A = −[ξ,ζ]_𝔤 + D_{v_ξ}ζ − D_{v_ζ}ξ`, with anchor the
    /// vector-field bracket and an analytic time derivative.
    fn bracket(&self, xi: &Section, zeta: &Section) -> Section {
        let me = self.clone();
        let (x1, z1) = (xi.clone(), zeta.clone());
        let profile = move |g: &Matrix, t: f64| {
            let (vx, vz) = (x1.anchor(g), z1.anchor(g));
            let pz = z1.profile_fn().clone();
            let px = x1.profile_fn().clone();
            -me.alg.bracket(&x1.profile(g, t), &z1.profile(g, t)) + me.derivative(&|h| pz(h, t), g, &vx)
                - me.derivative(&|h| px(h, t), g, &vz)
        };
        let me = self.clone();
        let (x2, z2) = (xi.clone(), zeta.clone());
        let dot = move |g: &Matrix, t: f64| {
            let h = me.steps.time;
            let alg = &me.alg;
            let (vx, vz) = (x2.anchor(g), z2.anchor(g));
            let (xv, zv) = (x2.profile(g, t), z2.profile(g, t));
            let (xd, zd) = (x2.time_derivative(alg, g, t, h), z2.time_derivative(alg, g, t, h));
            let zdot = |k: &Matrix| z2.time_derivative(alg, k, t, h);
            let xdot = |k: &Matrix| x2.time_derivative(alg, k, t, h);
            -alg.bracket(&xd, &zv) - alg.bracket(&xv, &zd) + me.derivative(&zdot, g, &vx)
                - me.derivative(&xdot, g, &vz)
        };
        let me = self.clone();
        let (x3, z3) = (xi.clone(), zeta.clone());
        let anchor = move |g: &Matrix| me.field_bracket(&|h| x3.anchor(h), &|h| z3.anchor(h), g);
        Section::from_parts(
            Arc::new(profile),
            Some(Arc::new(dot) as ProfileFn),
            Arc::new(anchor),
            xi.has_flat_ends() && zeta.has_flat_ends(),
        )
    }

    fn anchor_derivative(&self, s: &Section, p: &Matrix, f: &dyn Fn(&Matrix) -> Vector) -> Vector {
        self.derivative(f, p, &s.anchor(p))
    }
}

impl EquivariantAlgebroid for Atiyah {
    fn generator(&self, x: &Vector) -> Section {
        Section::generator(&self.alg, x)
    }
}

/// A vector field on `G^r`, as right-trivialized components.
pub type Field = Arc<dyn Fn(&[Matrix]) -> Vec<Vector> + Send + Sync>;

/// The tangent bundle of `G^r` with right-trivialized frames; points are
/// tuples of group elements.
#[derive(Clone, Debug)]
pub struct Tangent {
    pub alg: Arc<LieAlgebra>,
    pub factors: usize,
    pub steps: Steps,
}

impl Tangent {
    pub fn new(alg: Arc<LieAlgebra>, factors: usize, steps: Steps) -> Self {
        Tangent { alg, factors, steps }
    }

    /// Moves every factor along `exp(s v_i)`.
    pub fn flow(&self, p: &[Matrix], v: &[Vector], s: f64) -> Vec<Matrix> {
        p.iter().zip(v).map(|(g, vi)| (self.alg.to_matrix(vi) * s).exp() * g).collect()
    }

    /// Derivative of `f` at `p` along the tuple of directions `v`.
    pub fn derivative(&self, f: &dyn Fn(&[Matrix]) -> Vector, p: &[Matrix], v: &[Vector]) -> Vector {
        if v.iter().all(|x| x.amax() == 0.0) {
            return f(p) * 0.0;
        }
        richardson(|s| f(&self.flow(p, v, s)), self.steps.group)
    }

    /// A field with the same right-trivialized components everywhere.
    pub fn constant(vs: Vec<Vector>) -> Field {
        Arc::new(move |_| vs.clone())
    }

    /// Lifts a field on one factor to `G^r`, zero on the other factors.
    pub fn on_factor(&self, factor: usize, f: Arc<dyn Fn(&Matrix) -> Vector + Send + Sync>) -> Field {
        let r = self.factors;
        let zero = self.alg.zero();
        Arc::new(move |p| {
            (0..r).map(|i| if i == factor { f(&p[factor]) } else { zero.clone() }).collect()
        })
    }
}

fn concat_components(vs: &[Vector]) -> Vector {
    let n: usize = vs.iter().map(|v| v.len()).sum();
    Vector::from_iterator(n, vs.iter().flat_map(|v| v.iter().copied()))
}

fn split_components(v: &Vector, parts: usize) -> Vec<Vector> {
    let d = v.len() / parts;
    (0..parts).map(|i| v.rows(i * d, d).into_owned()).collect()
}

impl Algebroid for Tangent {
    type Point = Vec<Matrix>;
    type Section = Field;

    fn bracket(&self, v: &Field, w: &Field) -> Field {
        let me = self.clone();
        let (v, w) = (v.clone(), w.clone());
        Arc::new(move |p| {
            let (vp, wp) = (v(p), w(p));
            let fv = |q: &[Matrix]| concat_components(&v(q));
            let fw = |q: &[Matrix]| concat_components(&w(q));
            let dw = split_components(&me.derivative(&fw, p, &vp), me.factors);
            let dv = split_components(&me.derivative(&fv, p, &wp), me.factors);
            (0..me.factors)
                .map(|i| -me.alg.bracket(&vp[i], &wp[i]) + &dw[i] - &dv[i])
                .collect()
        })
    }

    fn anchor_derivative(&self, s: &Field, p: &Vec<Matrix>, f: &dyn Fn(&Vec<Matrix>) -> Vector) -> Vector {
        let v = s(p);
        self.derivative(&|q: &[Matrix]| f(&q.to_vec()), p, &v)
    }
}

impl EquivariantAlgebroid for Tangent {
    /// Conjugation generator `Ad_g x − x` on every factor.
    fn generator(&self, x: &Vector) -> Field {
        let alg = self.alg.clone();
        let x = x.clone();
        Arc::new(move |p| p.iter().map(|g| alg.ad_group(g, &x) - &x).collect())
    }
}

/// Right-trivialized pushforward of a map into `G`: `(D_v Φ) Φ⁻¹`.
pub fn pushforward(
    alg: &LieAlgebra,
    phi: &dyn Fn(&[Matrix]) -> Matrix,
    p: &[Matrix],
    v: &[Vector],
    flow: &dyn Fn(&[Matrix], &[Vector], f64) -> Vec<Matrix>,
    h: f64,
) -> Vector {
    let flat = |m: &Matrix| Vector::from_column_slice(m.as_slice());
    let base = phi(p);
    let d = richardson(|s| flat(&phi(&flow(p, v, s))), h);
    let n = base.nrows();
    let dm = Matrix::from_column_slice(n, n, d.as_slice());
    alg.from_matrix(&(dm * alg.inverse(&base)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::{Bump, FieldFn};
    use approx::assert_abs_diff_eq;
    use nalgebra::DVector;

    fn setup() -> Atiyah {
        Atiyah::new(Arc::new(LieAlgebra::su2()), Steps::default())
    }

    #[test]
    fn generators_bracket_like_algebra() {
        let a = setup();
        let x = DVector::from_vec(vec![0.3, -0.1, 0.7]);
        let y = DVector::from_vec(vec![-0.5, 0.9, 0.2]);
        let b = a.bracket(&a.generator(&x), &a.generator(&y));
        let want = a.generator(&a.alg.bracket(&x, &y));
        let g = a.alg.exp(&DVector::from_vec(vec![0.5, 0.1, -0.8]));
        for &t in &[0.0, 0.4, 1.0] {
            assert_abs_diff_eq!((b.profile(&g, t) - want.profile(&g, t)).amax(), 0.0, epsilon = 1e-9);
        }
        assert_abs_diff_eq!((b.anchor(&g) - want.anchor(&g)).amax(), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn loops_bracket_pointwise() {
        let a = setup();
        let e1 = a.alg.unit(0);
        let e2 = a.alg.unit(1);
        let (e1b, e2b) = (e1.clone(), e2.clone());
        let p = Section::loop_at_identity(&a.alg, move |t| &e1 * t.sin(), move |t| &e1b * t.cos());
        let q = Section::loop_at_identity(&a.alg, move |t| &e2 * t.cos(), move |t| &e2b * -t.sin());
        let b = a.bracket(&p, &q);
        let id = a.alg.identity();
        let t = 0.3f64;
        let want = -a.alg.unit(2) * (t.sin() * t.cos());
        assert_abs_diff_eq!((b.profile(&id, t) - want).amax(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn bracket_dot_matches_difference() {
        let a = setup();
        let alg = a.alg.clone();
        let d = DVector::from_vec(vec![0.4, 0.1, -0.6]);
        let alg1 = alg.clone();
        let av: FieldFn = Arc::new(move |g| alg1.ad_group(g, &d));
        let w = DVector::from_vec(vec![0.2, -0.3, 0.5]);
        let vv: FieldFn = Arc::new(move |_| w.clone());
        let xi = Section::template(&alg, av.clone(), vv.clone(), Bump::default());
        let zeta = Section::template(&alg, vv, av, Bump::default());
        let b = a.bracket(&xi, &zeta);
        let g = alg.exp(&DVector::from_vec(vec![-0.2, 0.6, 0.3]));
        assert!(b.seam_residual(&alg, &g) < 1e-8);
        let analytic = b.time_derivative(&alg, &g, 0.45, 1e-5);
        let numeric = b.without_dot().time_derivative(&alg, &g, 0.45, 1e-4);
        assert_abs_diff_eq!((analytic - numeric).amax(), 0.0, epsilon = 1e-6);
    }

    #[test]
    fn tangent_bracket_of_constant_frames() {
        let alg = Arc::new(LieAlgebra::so3());
        let tg = Tangent::new(alg.clone(), 2, Steps::default());
        let v = Tangent::constant(vec![alg.unit(0), alg.unit(1)]);
        let w = Tangent::constant(vec![alg.unit(1), alg.unit(1)]);
        let p = vec![alg.exp(&alg.unit(2)), alg.identity()];
        let b = tg.bracket(&v, &w)(&p);
        assert_abs_diff_eq!((&b[0] + alg.unit(2)).amax(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b[1].amax(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn pushforward_of_product() {
        let alg = Arc::new(LieAlgebra::su2());
        let tg = Tangent::new(alg.clone(), 2, Steps::default());
        let p = vec![
            alg.exp(&DVector::from_vec(vec![0.3, 0.2, -0.1])),
            alg.exp(&DVector::from_vec(vec![-0.7, 0.4, 0.9])),
        ];
        let v = vec![DVector::from_vec(vec![0.1, 0.5, 0.2]), DVector::from_vec(vec![-0.3, 0.0, 0.8])];
        let mult = |q: &[Matrix]| &q[0] * &q[1];
        let flow = |q: &[Matrix], v: &[Vector], s: f64| tg.flow(q, v, s);
        let got = pushforward(&alg, &mult, &p, &v, &flow, 1e-4);
        let want = &v[0] + alg.ad_group(&p[0], &v[1]);
        assert_abs_diff_eq!((got - want).amax(), 0.0, epsilon = 1e-9);
    }
}
