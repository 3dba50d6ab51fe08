//! Exterior calculus on algebroid forms: evaluation, contraction, the Koszul
//! differential, Lie derivative, products, equivariant differential, and the
//! Cartan 3-form.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::algebroid::{Algebroid, Atiyah, EquivariantAlgebroid, Field, Tangent};
use crate::lie::{LieAlgebra, Side};
use crate::{Error, Matrix, Result, Vector};

/// All permutations of `0..n` with their signs.
pub fn permutations(n: usize) -> Vec<(Vec<usize>, f64)> {
    fn rec(prefix: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out.into_iter()
        .map(|p| {
            let inversions = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).filter(|&(i, j)| p[i] > p[j]).count();
            let sign = if inversions % 2 == 0 { 1.0 } else { -1.0 };
            (p, sign)
        })
        .collect()
}

/// `(p, q)`-shuffles of `0..p+q`: the first `p` entries and the last `q`
/// entries are each increasing.
pub fn shuffles(p: usize, q: usize) -> Vec<(Vec<usize>, f64)> {
    permutations(p + q)
        .into_iter()
        .filter(|(s, _)| s[..p].windows(2).all(|w| w[0] < w[1]) && s[p..].windows(2).all(|w| w[0] < w[1]))
        .collect()
}

type FormFn<A> = Arc<
    dyn Fn(&<A as Algebroid>::Point, &[<A as Algebroid>::Section]) -> Vector + Send + Sync,
>;

/// A degree-`k` form: an alternating evaluator on `k` sections at a point.
/// Scalar forms return length-one vectors; `𝔤`-valued forms return algebra
/// coefficients.
pub struct Form<A: Algebroid> {
    degree: usize,
    eval: FormFn<A>,
}

impl<A: Algebroid> Clone for Form<A> {
    fn clone(&self) -> Self {
        Form { degree: self.degree, eval: self.eval.clone() }
    }
}

impl<A: Algebroid> std::fmt::Debug for Form<A> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Form(degree {})", self.degree)
    }
}

/// Wraps a scalar in a length-one vector.
pub fn scalar(x: f64) -> Vector {
    Vector::from_element(1, x)
}

impl<A: Algebroid> Form<A> {
    pub fn new(
        degree: usize,
        eval: impl Fn(&A::Point, &[A::Section]) -> Vector + Send + Sync + 'static,
    ) -> Self {
        Form { degree, eval: Arc::new(eval) }
    }

    /// A scalar form from an `f64` evaluator.
    pub fn scalar(degree: usize, eval: impl Fn(&A::Point, &[A::Section]) -> f64 + Send + Sync + 'static) -> Self {
        Form::new(degree, move |p, s| scalar(eval(p, s)))
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn eval(&self, p: &A::Point, args: &[A::Section]) -> Vector {
        debug_assert_eq!(args.len(), self.degree);
        (self.eval)(p, args)
    }

    /// First component of the value, for scalar forms.
    pub fn value(&self, p: &A::Point, args: &[A::Section]) -> f64 {
        self.eval(p, args)[0]
    }

    pub fn add(&self, other: &Form<A>) -> Form<A> {
        assert_eq!(self.degree, other.degree, "adding forms of different degree");
        let (a, b) = (self.eval.clone(), other.eval.clone());
        Form { degree: self.degree, eval: Arc::new(move |p, s| a(p, s) + b(p, s)) }
    }

    pub fn scale(&self, c: f64) -> Form<A> {
        let a = self.eval.clone();
        Form { degree: self.degree, eval: Arc::new(move |p, s| a(p, s) * c) }
    }

    pub fn sub(&self, other: &Form<A>) -> Form<A> {
        self.add(&other.scale(-1.0))
    }

    /// Applies a linear map to the values.
    pub fn map_values(&self, f: impl Fn(&A::Point, Vector) -> Vector + Send + Sync + 'static) -> Form<A> {
        let a = self.eval.clone();
        Form { degree: self.degree, eval: Arc::new(move |p, s| f(p, a(p, s))) }
    }

    /// `ι_ξ φ`, inserting into the first slot.
    pub fn contract(&self, xi: &A::Section) -> Result<Form<A>> {
        if self.degree == 0 {
            return Err(Error::InvalidInput("cannot contract a 0-form".into()));
        }
        let a = self.eval.clone();
        let xi = xi.clone();
        Ok(Form {
            degree: self.degree - 1,
            eval: Arc::new(move |p, s| {
                let mut args = Vec::with_capacity(s.len() + 1);
                args.push(xi.clone());
                args.extend_from_slice(s);
                a(p, &args)
            }),
        })
    }

    /// Koszul differential
    /// `dφ(ξ₀…ξ_k) = Σ(−1)ⁱ a(ξᵢ)φ(…ξ̂ᵢ…) + Σ_{i<j}(−1)^{i+j} φ([ξᵢ,ξⱼ], …ξ̂ᵢ…ξ̂ⱼ…)`.
    pub fn d(&self, alg: &A) -> Form<A> {
        let a = self.eval.clone();
        let alg = alg.clone();
        let k = self.degree;
        Form {
            degree: k + 1,
            eval: Arc::new(move |p, s| {
                let mut total: Option<Vector> = None;
                let mut push = |v: Vector| {
                    total = Some(match total.take() {
                        Some(t) => t + v,
                        None => v,
                    })
                };
                for i in 0..=k {
                    let rest: Vec<_> = s.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, x)| x.clone()).collect();
                    let f = |q: &A::Point| a(q, &rest);
                    let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                    push(alg.anchor_derivative(&s[i], p, &f) * sign);
                }
                for i in 0..=k {
                    for j in i + 1..=k {
                        let mut args = vec![alg.bracket(&s[i], &s[j])];
                        args.extend(s.iter().enumerate().filter(|(l, _)| *l != i && *l != j).map(|(_, x)| x.clone()));
                        let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                        push(a(p, &args) * sign);
                    }
                }
                total.expect("at least one term")
            }),
        }
    }

    /// `L_ξ φ(ζ₁…ζ_k) = a(ξ)φ(ζ₁…ζ_k) − Σ φ(…[ξ,ζᵢ]…)`.
    pub fn lie_derivative(&self, alg: &A, xi: &A::Section) -> Form<A> {
        let a = self.eval.clone();
        let alg = alg.clone();
        let xi = xi.clone();
        Form {
            degree: self.degree,
            eval: Arc::new(move |p, s| {
                let args = s.to_vec();
                let f = |q: &A::Point| a(q, &args);
                let mut total = alg.anchor_derivative(&xi, p, &f);
                for i in 0..s.len() {
                    let mut moved = s.to_vec();
                    moved[i] = alg.bracket(&xi, &s[i]);
                    total -= a(p, &moved);
                }
                total
            }),
        }
    }

    /// Graded product `(φ ∧ ψ)(ξ…) = Σ_shuffles sgn · combine(φ(…), ψ(…))`,
    /// which is the `1/(p!q!)`-normalized antisymmetrization.
    pub fn wedge_with(
        &self,
        other: &Form<A>,
        combine: impl Fn(&Vector, &Vector) -> Vector + Send + Sync + 'static,
    ) -> Form<A> {
        let (a, b) = (self.eval.clone(), other.eval.clone());
        let (p, q) = (self.degree, other.degree);
        let sh = shuffles(p, q);
        Form {
            degree: p + q,
            eval: Arc::new(move |pt, s| {
                let mut total: Option<Vector> = None;
                for (perm, sign) in &sh {
                    let left: Vec<_> = perm[..p].iter().map(|&i| s[i].clone()).collect();
                    let right: Vec<_> = perm[p..].iter().map(|&i| s[i].clone()).collect();
                    let v = combine(&a(pt, &left), &b(pt, &right)) * *sign;
                    total = Some(match total {
                        Some(t) => t + v,
                        None => v,
                    });
                }
                total.expect("at least one shuffle")
            }),
        }
    }

    /// Scalar product of scalar forms.
    pub fn wedge(&self, other: &Form<A>) -> Form<A> {
        self.wedge_with(other, |x, y| scalar(x[0] * y[0]))
    }

    /// `φ·ψ` for `𝔤`-valued forms, using the invariant form.
    pub fn dot_wedge(&self, other: &Form<A>, alg: &Arc<LieAlgebra>) -> Form<A> {
        let alg = alg.clone();
        self.wedge_with(other, move |x, y| scalar(alg.dot(x, y)))
    }

    /// `[φ, ψ]` for `𝔤`-valued forms.
    pub fn bracket_wedge(&self, other: &Form<A>, alg: &Arc<LieAlgebra>) -> Form<A> {
        let alg = alg.clone();
        self.wedge_with(other, move |x, y| alg.bracket(x, y))
    }

    /// Largest deviation from antisymmetry under adjacent swaps.
    pub fn antisymmetry_residual(&self, p: &A::Point, args: &[A::Section]) -> f64 {
        let base = self.eval(p, args);
        let mut worst: f64 = 0.0;
        for i in 0..args.len().saturating_sub(1) {
            let mut swapped = args.to_vec();
            swapped.swap(i, i + 1);
            worst = worst.max((self.eval(p, &swapped) + &base).amax());
        }
        worst
    }
}

/// An equivariant form at a fixed value of the equivariant variable: its
/// components by degree.
pub struct MixedForm<A: Algebroid> {
    pub parts: BTreeMap<usize, Form<A>>,
}

impl<A: Algebroid> Clone for MixedForm<A> {
    fn clone(&self) -> Self {
        MixedForm { parts: self.parts.clone() }
    }
}

impl<A: Algebroid> Default for MixedForm<A> {
    fn default() -> Self {
        MixedForm { parts: BTreeMap::new() }
    }
}

impl<A: Algebroid> MixedForm<A> {
    pub fn single(form: Form<A>) -> Self {
        let mut m = MixedForm::default();
        m.insert(form);
        m
    }

    /// Adds a component, summing with any existing one of the same degree.
    pub fn insert(&mut self, form: Form<A>) {
        let k = form.degree();
        let merged = match self.parts.remove(&k) {
            Some(f) => f.add(&form),
            None => form,
        };
        self.parts.insert(k, merged);
    }

    pub fn part(&self, degree: usize) -> Option<&Form<A>> {
        self.parts.get(&degree)
    }

    pub fn sub(&self, other: &MixedForm<A>) -> MixedForm<A> {
        let mut out = self.clone();
        for f in other.parts.values() {
            out.insert(f.scale(-1.0));
        }
        out
    }
}

/// `d_G φ(x) = d(φ(x)) − ι_{x}φ(x)`, degree by degree.
pub fn equivariant_d<A: EquivariantAlgebroid>(alg: &A, form: &MixedForm<A>, x: &Vector) -> MixedForm<A> {
    let gen = alg.generator(x);
    let mut out = MixedForm::default();
    for f in form.parts.values() {
        out.insert(f.d(alg));
        if f.degree() > 0 {
            out.insert(f.contract(&gen).expect("positive degree").scale(-1.0));
        }
    }
    out
}

/// `θ^L` or `θ^R` of one factor of `G^r`, as a `𝔤`-valued 1-form.
pub fn maurer_cartan_form(alg: &Arc<LieAlgebra>, side: Side, factor: usize) -> Form<Tangent> {
    let alg = alg.clone();
    Form::new(1, move |p: &Vec<Matrix>, s: &[Field]| alg.maurer_cartan(&p[factor], &s[0](p)[factor], side))
}

/// `η(v₁,v₂,v₃) = (1/12) Σ_σ sgn σ · θ^L(v_σ1)·[θ^L v_σ2, θ^L v_σ3]` with
/// right-trivialized tangent vectors.
pub fn cartan_eta(alg: &LieAlgebra, g: &Matrix, v: [&Vector; 3]) -> f64 {
    let gi = alg.inverse(g);
    let l: Vec<Vector> = v.iter().map(|x| alg.ad_group(&gi, x)).collect();
    permutations(3)
        .iter()
        .map(|(p, sign)| sign * alg.dot(&l[p[0]], &alg.bracket(&l[p[1]], &l[p[2]])))
        .sum::<f64>()
        / 12.0
}

/// The Cartan 3-form on one factor of `G^r`.
pub fn eta_form(alg: &Arc<LieAlgebra>, factor: usize) -> Form<Tangent> {
    let alg = alg.clone();
    Form::scalar(3, move |p: &Vec<Matrix>, s: &[Field]| {
        let v: Vec<Vector> = s.iter().map(|f| f(p)[factor].clone()).collect();
        cartan_eta(&alg, &p[factor], [&v[0], &v[1], &v[2]])
    })
}

/// Degree-1 part of `η_G(x)`: `−½(θ^L + θ^R)·x`.
pub fn eta_g_linear(alg: &Arc<LieAlgebra>, factor: usize, x: &Vector) -> Form<Tangent> {
    let alg = alg.clone();
    let x = x.clone();
    Form::scalar(1, move |p: &Vec<Matrix>, s: &[Field]| {
        let g = &p[factor];
        let v = &s[0](p)[factor];
        -0.5 * alg.dot(&(alg.ad_group(&alg.inverse(g), v) + v), &x)
    })
}

/// `η_G(x) = η − ½(θ^L+θ^R)·x`.
pub fn eta_g(alg: &Arc<LieAlgebra>, factor: usize, x: &Vector) -> MixedForm<Tangent> {
    let mut m = MixedForm::single(eta_form(alg, factor));
    m.insert(eta_g_linear(alg, factor, x));
    m
}

/// The vector field on `G` underlying the anchor of a path section.
pub fn anchor_field(xi: &crate::path::Section) -> Field {
    let a = xi.anchor_fn().clone();
    Arc::new(move |p: &[Matrix]| vec![a(&p[0])])
}

/// `a*ω` for a form on `G` (one factor).
pub fn pullback_anchor(form: &Form<Tangent>) -> Form<Atiyah> {
    let f = form.clone();
    Form::new(form.degree(), move |g: &Matrix, s: &[crate::path::Section]| {
        let fields: Vec<Field> = s.iter().map(anchor_field).collect();
        f.eval(&vec![g.clone()], &fields)
    })
}

/// `a*` on an equivariant form.
pub fn pullback_anchor_mixed(form: &MixedForm<Tangent>) -> MixedForm<Atiyah> {
    let mut out = MixedForm::default();
    for f in form.parts.values() {
        out.insert(pullback_anchor(f));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::Steps;
    use approx::assert_abs_diff_eq;
    use nalgebra::DVector;

    #[test]
    fn permutation_signs() {
        let p = permutations(3);
        assert_eq!(p.len(), 6);
        assert_eq!(p.iter().map(|(_, s)| s).sum::<f64>(), 0.0);
        assert_eq!(shuffles(1, 2).len(), 3);
        assert_eq!(shuffles(2, 2).len(), 6);
    }

    #[test]
    fn eta_oracle() {
        let alg = LieAlgebra::su2();
        let g = alg.exp(&DVector::from_vec(vec![0.3, -1.1, 0.4]));
        let (e1, e2, e3) = (alg.unit(0), alg.unit(1), alg.unit(2));
        // η is bi-invariant, so the frame value is the same at every g.
        let l = |v: &Vector| alg.ad_group(&g, v);
        let val = cartan_eta(&alg, &g, [&l(&e1), &l(&e2), &l(&e3)]);
        assert_abs_diff_eq!(val, 0.5, epsilon = 1e-13);
        assert_abs_diff_eq!(cartan_eta(&alg, &alg.identity(), [&e1, &e2, &e3]), 0.5, epsilon = 1e-14);
        let t = LieAlgebra::torus2();
        let v = DVector::from_vec(vec![1.0, 2.0]);
        assert_eq!(cartan_eta(&t, &t.identity(), [&v, &v, &v]), 0.0);
    }

    #[test]
    fn maurer_cartan_structure_equations() {
        let alg = Arc::new(LieAlgebra::su2());
        let tg = Tangent::new(alg.clone(), 1, Steps::default());
        let right = maurer_cartan_form(&alg, Side::Right, 0);
        let left = maurer_cartan_form(&alg, Side::Left, 0);
        let half_r = right.bracket_wedge(&right, &alg).scale(0.5);
        let half_l = left.bracket_wedge(&left, &alg).scale(0.5);
        let alg2 = alg.clone();
        let v: Field = Arc::new(move |p| vec![alg2.ad_group(&p[0], &DVector::from_vec(vec![0.2, 0.1, -0.4]))]);
        let w = Tangent::constant(vec![DVector::from_vec(vec![0.5, -0.3, 0.7])]);
        let p = vec![alg.exp(&DVector::from_vec(vec![0.7, 0.2, -0.3]))];
        let args = [v, w];
        let dr = right.d(&tg).eval(&p, &args) - half_r.eval(&p, &args);
        let dl = left.d(&tg).eval(&p, &args) + half_l.eval(&p, &args);
        assert!(dr.amax() < 1e-9);
        assert!(dl.amax() < 1e-9);
    }

    #[test]
    fn eta_equals_normalized_triple_product() {
        let alg = Arc::new(LieAlgebra::so3());
        let left = maurer_cartan_form(&alg, Side::Left, 0);
        let triple = left.dot_wedge(&left.bracket_wedge(&left, &alg), &alg).scale(1.0 / 12.0);
        let eta = eta_form(&alg, 0);
        let p = vec![alg.exp(&DVector::from_vec(vec![0.1, 0.9, -0.5]))];
        let args: Vec<Field> = (0..3)
            .map(|i| Tangent::constant(vec![DVector::from_fn(3, |j, _| ((i * 3 + j) as f64 * 0.7).sin())]))
            .collect();
        assert_abs_diff_eq!(eta.value(&p, &args), triple.value(&p, &args), epsilon = 1e-12);
    }
}
