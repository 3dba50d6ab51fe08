//! Bott forms `Υ^p(β₀,…,β_k)` and their equivariant versions, computed by
//! fiber integration of `p(F^β)` over a simplex or the rectangle `Δ¹ × I`.
//!
//! On `N × Δ^k` with `β = Σ sᵢβᵢ` the curvature splits as
//! `F^β = F_N(s) + Σ_j ds_j ∧ (β_j − β₀)`, so against the coordinate fields
//! `∂_j` it has `F(X, ∂_j) = −(β_j − β₀)(X)` and `F(∂_i, ∂_j) = 0`. Fiber
//! integration inserts the `∂_j` after the base arguments.

use std::sync::Arc;

use crate::algebroid::{Algebroid, EquivariantAlgebroid};
use crate::forms::{permutations, scalar, Form, MixedForm};
use crate::lie::{InvariantPolynomial, LieAlgebra};
use crate::path::gauss_legendre_unit;
use crate::{Error, Result, Vector};

/// Quadrature on the standard simplex `Δ^k`, in the coordinates
/// `(s₁, …, s_k)` with `s₀ = 1 − Σ sᵢ`.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplexRule {
    dimension: usize,
    nodes: Vec<(Vec<f64>, f64)>,
}

impl SimplexRule {
    /// Tensor Gauss–Legendre with `per_axis` points; `Δ²` through the Duffy
    /// map `(u, v) ↦ (u(1 − v), uv)`.
    pub fn new(dimension: usize, per_axis: usize) -> Result<Self> {
        let gl = gauss_legendre_unit(per_axis);
        let nodes = match dimension {
            0 => vec![(Vec::new(), 1.0)],
            1 => gl.iter().map(|&(s, w)| (vec![s], w)).collect(),
            2 => gl
                .iter()
                .flat_map(|&(u, wu)| gl.iter().map(move |&(v, wv)| (vec![u * (1.0 - v), u * v], wu * wv * u)))
                .collect(),
            k => return Err(Error::InvalidInput(format!("simplex dimension {k} is not supported"))),
        };
        Ok(SimplexRule { dimension, nodes })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn nodes(&self) -> &[(Vec<f64>, f64)] {
        &self.nodes
    }

    pub fn volume(&self) -> f64 {
        self.nodes.iter().map(|(_, w)| w).sum()
    }
}

/// Sign choices for fiber integration, fixed once and shared by every check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConventionTable {
    /// Overall sign of `Υ^p` for `k = 0, 1, 2` simplex directions.
    pub simplex_sign: [f64; 3],
    /// Sign of the `Δ¹ × I` integral defining `I^p_G`.
    pub rectangle_sign: f64,
    /// `CS(β) = cs_sign · Υ^p(0, β)` for `p(x) = ½x·x`.
    pub cs_sign: f64,
    /// `Υ^p(0, θ^L) = eta_sign · η` for `p(x) = ½x·x`.
    pub eta_sign: f64,
    /// `ϖ^p_G = varpi_sign · (I^p_G({κ_t}) − Υ^p_G(0, a*θ^L, κ₀))`.
    pub varpi_sign: f64,
}

impl ConventionTable {
    /// `(−1)^{[(k+1)/2]}`.
    pub const TEXTBOOK_SIGNS: [f64; 3] = [1.0, -1.0, -1.0];

    /// The table produced by [`crate::higher::calibrate_conventions`]. With
    /// the base arguments first and the simplex directions last, the textbook
    /// signs give `Υ^p(0, θ^L) = −η`; flipping all of them together keeps
    /// Stokes and gauge invariance and makes `η^p = η`.
    ///
    /// Once Stokes, `d_G I^p_G = Υ^p_G(0,κ₁) − Υ^p_G(0,κ₀)` and gauge
    /// invariance hold, `d_G(I^p_G − Υ^p_G(0, a*θ^L, κ₀)) = −a*η^p_G`, since
    /// `a*θ^L = g⁻¹•0` and `κ₀ = g⁻¹•κ₁`; hence `varpi_sign = −1`.
    pub const fn standard() -> Self {
        ConventionTable {
            simplex_sign: [-1.0, 1.0, 1.0],
            rectangle_sign: -1.0,
            cs_sign: -1.0,
            eta_sign: 1.0,
            varpi_sign: -1.0,
        }
    }

    pub fn sign(&self, k: usize) -> f64 {
        self.simplex_sign[k]
    }
}

impl Default for ConventionTable {
    fn default() -> Self {
        Self::standard()
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// The curvature of a connection on `N × fiber`, tabulated on the base
/// arguments and the fiber coordinate fields.
struct CurvatureTable {
    /// `F(X_a, X_b)` on base arguments.
    base: Vec<Vec<Vector>>,
    /// `e_j(X_a)` with `F(X_a, ∂_j) = −e_j(X_a)`.
    fiber: Vec<Vec<Vector>>,
    /// Degree-0 part of `F_G(x) + x`.
    zero: Vector,
}

impl CurvatureTable {
    fn entry(&self, a: usize, b: usize, zero: &Vector) -> Vector {
        let n = self.base.len();
        match (a < n, b < n) {
            (true, true) => self.base[a][b].clone(),
            (true, false) => -&self.fiber[b - n][a],
            (false, true) => self.fiber[a - n][b].clone(),
            (false, false) => zero.clone(),
        }
    }

    /// The part of `p(F + φ)` of full degree on base and fiber arguments:
    /// `binom(m, j) p(F^j, φ^{m−j})` evaluated on `(X₁…X_n, ∂₁…∂_k)`.
    fn evaluate(&self, p: &InvariantPolynomial, perms: &[(Vec<usize>, f64)]) -> f64 {
        let total = self.base.len() + self.fiber.len();
        if total % 2 == 1 {
            return 0.0;
        }
        let (m, j) = (p.degree(), total / 2);
        if j > m {
            return 0.0;
        }
        let zero = self.zero.clone() * 0.0;
        let mut table = vec![vec![zero.clone(); total]; total];
        for (a, row) in table.iter_mut().enumerate() {
            for (b, cell) in row.iter_mut().enumerate() {
                *cell = self.entry(a, b, &zero);
            }
        }
        let mut sum = 0.0;
        for (perm, sign) in perms {
            let mut args: Vec<&Vector> = (0..j).map(|i| &table[perm[2 * i]][perm[2 * i + 1]]).collect();
            args.extend((j..m).map(|_| &self.zero));
            sum += sign * p.eval(&args);
        }
        binomial(m, j) * sum / 2f64.powi(j as i32)
    }
}

/// Values of the 1-forms `β₀, …, β_k` at one point on the base arguments.
struct Jet {
    beta: Vec<Vec<Vector>>,
    dbeta: Vec<Vec<Vec<Vector>>>,
    generator: Vec<Vector>,
}

fn jet<A: EquivariantAlgebroid>(
    betas: &[Form<A>],
    dbetas: &[Form<A>],
    gen: Option<&A::Section>,
    dim: usize,
    p: &A::Point,
    args: &[A::Section],
) -> Jet {
    let n = args.len();
    let beta = betas.iter().map(|b| args.iter().map(|x| b.eval(p, std::slice::from_ref(x))).collect()).collect();
    let dbeta = dbetas
        .iter()
        .map(|db| {
            let mut m = vec![vec![Vector::zeros(dim); n]; n];
            for a in 0..n {
                for b in (a + 1)..n {
                    let v = db.eval(p, &[args[a].clone(), args[b].clone()]);
                    m[b][a] = -&v;
                    m[a][b] = v;
                }
            }
            m
        })
        .collect();
    let generator = betas
        .iter()
        .map(|b| gen.map_or_else(|| Vector::zeros(dim), |x| b.eval(p, std::slice::from_ref(x))))
        .collect();
    Jet { beta, dbeta, generator }
}

/// Everything needed to evaluate Bott integrands for one algebra.
#[derive(Clone, Debug)]
pub struct BottContext<A: EquivariantAlgebroid> {
    pub alg: Arc<LieAlgebra>,
    pub algebroid: A,
    pub conventions: ConventionTable,
    pub per_axis: usize,
}

impl<A: EquivariantAlgebroid> BottContext<A> {
    pub fn new(alg: &Arc<LieAlgebra>, algebroid: A, conventions: ConventionTable) -> Self {
        BottContext { alg: alg.clone(), algebroid, conventions, per_axis: 8 }
    }

    /// Degree-`degree` part of `Υ^p_G(β₀,…,β_k)(x)`; `x = None` gives the
    /// non-equivariant `Υ^p`.
    pub fn bott(&self, p: &InvariantPolynomial, betas: &[Form<A>], x: Option<&Vector>, degree: usize) -> Result<Form<A>> {
        let k = betas.len().checked_sub(1).ok_or_else(|| Error::InvalidInput("no forms given".into()))?;
        if k > 2 || p.degree() > 3 {
            return Err(Error::InvalidInput(format!("unsupported Bott form: k = {k}, m = {}", p.degree())));
        }
        let rule = SimplexRule::new(k, self.per_axis)?;
        let sign = self.conventions.sign(k);
        let dbetas: Vec<Form<A>> = betas.iter().map(|b| b.d(&self.algebroid)).collect();
        let betas = betas.to_vec();
        let (alg, p) = (self.alg.clone(), p.clone());
        let gen = x.map(|x| self.algebroid.generator(x));
        let x = x.cloned().unwrap_or_else(|| self.alg.zero());
        let perms = permutations(degree + k);
        Ok(Form::new(degree, move |pt: &A::Point, args: &[A::Section]| {
            let d = alg.dim();
            let jet = jet(&betas, &dbetas, gen.as_ref(), d, pt, args);
            let n = args.len();
            let mut total = 0.0;
            for (s_tail, w) in rule.nodes() {
                let mut s = vec![1.0 - s_tail.iter().sum::<f64>()];
                s.extend_from_slice(s_tail);
                let combo = |vals: &dyn Fn(usize) -> Vector| (0..=k).fold(Vector::zeros(d), |acc, i| acc + vals(i) * s[i]);
                let bs: Vec<Vector> = (0..n).map(|a| combo(&|i| jet.beta[i][a].clone())).collect();
                let mut base = vec![vec![Vector::zeros(d); n]; n];
                for a in 0..n {
                    for b in 0..n {
                        if a != b {
                            base[a][b] = combo(&|i| jet.dbeta[i][a][b].clone()) + alg.bracket(&bs[a], &bs[b]);
                        }
                    }
                }
                let fiber = (1..=k).map(|j| (0..n).map(|a| &jet.beta[j][a] - &jet.beta[0][a]).collect()).collect();
                let zero = &x - combo(&|i| jet.generator[i].clone());
                let table = CurvatureTable { base, fiber, zero };
                total += w * table.evaluate(&p, &perms);
            }
            scalar(sign * total)
        }))
    }

    /// All components of `Υ^p_G(β₀,…,β_k)(x)` of degree at most `max_degree`.
    pub fn bott_mixed(&self, p: &InvariantPolynomial, betas: &[Form<A>], x: &Vector, max_degree: usize) -> Result<MixedForm<A>> {
        let k = betas.len() - 1;
        let top = (2 * p.degree()).saturating_sub(k);
        let mut out = MixedForm::default();
        let mut degree = top % 2;
        while degree <= top.min(max_degree) {
            out.insert(self.bott(p, betas, Some(x), degree)?);
            degree += 2;
        }
        Ok(out)
    }

    /// Degree-`degree` part of `I^p_G({β_t})(x) = ∫_{Δ¹×I} p(F_G^β(x) + x)`
    /// for `β_{s,t} = s β_t`, with `t_nodes` Gauss–Legendre points in `t`.
    pub fn rectangle(
        &self,
        p: &InvariantPolynomial,
        family: &FormFamily<A>,
        x: Option<&Vector>,
        degree: usize,
        t_nodes: usize,
    ) -> Form<A> {
        let s_rule = gauss_legendre_unit(self.per_axis);
        let t_rule = gauss_legendre_unit(t_nodes);
        let sign = self.conventions.rectangle_sign;
        let (alg, p, family) = (self.alg.clone(), p.clone(), family.clone());
        let algebroid = self.algebroid.clone();
        let gen = x.map(|x| self.algebroid.generator(x));
        let x = x.cloned().unwrap_or_else(|| self.alg.zero());
        let perms = permutations(degree + 2);
        Form::new(degree, move |pt: &A::Point, args: &[A::Section]| {
            let d = alg.dim();
            let n = args.len();
            let mut total = 0.0;
            for &(t, wt) in &t_rule {
                let beta = (family.value)(t);
                let dot = (family.dot)(t);
                let jt = jet(&[beta.clone(), dot], &[beta.d(&algebroid)], gen.as_ref(), d, pt, args);
                for &(s, ws) in &s_rule {
                    let mut base = vec![vec![Vector::zeros(d); n]; n];
                    for a in 0..n {
                        for b in 0..n {
                            if a != b {
                                base[a][b] = &jt.dbeta[0][a][b] * s + alg.bracket(&jt.beta[0][a], &jt.beta[0][b]) * (s * s);
                            }
                        }
                    }
                    let fiber = vec![jt.beta[0].clone(), jt.beta[1].iter().map(|v| v * s).collect()];
                    let zero = &x - &jt.generator[0] * s;
                    let table = CurvatureTable { base, fiber, zero };
                    total += wt * ws * table.evaluate(&p, &perms);
                }
            }
            scalar(sign * total)
        })
    }
}

/// A `𝔤`-valued 1-form family `t ↦ β_t` with its `t`-derivative.
pub struct FormFamily<A: Algebroid> {
    pub value: Arc<dyn Fn(f64) -> Form<A> + Send + Sync>,
    pub dot: Arc<dyn Fn(f64) -> Form<A> + Send + Sync>,
}

impl<A: Algebroid> Clone for FormFamily<A> {
    fn clone(&self) -> Self {
        FormFamily { value: self.value.clone(), dot: self.dot.clone() }
    }
}

impl<A: Algebroid> std::fmt::Debug for FormFamily<A> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("FormFamily")
    }
}

impl<A: Algebroid> FormFamily<A> {
    pub fn new(
        value: impl Fn(f64) -> Form<A> + Send + Sync + 'static,
        dot: impl Fn(f64) -> Form<A> + Send + Sync + 'static,
    ) -> Self {
        FormFamily { value: Arc::new(value), dot: Arc::new(dot) }
    }
}
