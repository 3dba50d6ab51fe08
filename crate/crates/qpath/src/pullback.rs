//! Pull-back algebroids `A_M = Φ!A` along conjugation-equivariant maps
//! `Φ: G^r → G`, the kernel of `a_M*ω + ϖ_M` on a conjugacy class, and the
//! projection `q: A → A′` onto paths vanishing at `t = 0`.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use nalgebra::linalg::Schur;
use rayon::prelude::*;

use crate::algebroid::{Algebroid, Atiyah, EquivariantAlgebroid, Field, Tangent};
use crate::chern_simons::GaugeMap;
use crate::forms::{cartan_eta, eta_g_linear, Form};
use crate::lie::LieAlgebra;
use crate::lifting::varpi;
use crate::path::{Bump, Section};
use crate::sampling::Sampler;
use crate::{Context, Error, Matrix, Result, Vector};

type PathFn = Arc<dyn Fn(&[Matrix], f64) -> Vector + Send + Sync>;
type PointField = Arc<dyn Fn(&[Matrix]) -> Vector + Send + Sync>;

/// A map `Φ: G^r → G` intertwining diagonal conjugation on `G^r` with
/// conjugation on `G`.
#[derive(Clone)]
pub struct EquivariantMap {
    pub tangent: Tangent,
    pub phi: GaugeMap<Tangent>,
}

impl std::fmt::Debug for EquivariantMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "EquivariantMap(G^{} -> G)", self.tangent.factors)
    }
}

impl EquivariantMap {
    /// `Φ*θ^R` is obtained by differentiating `map`.
    pub fn new(tangent: &Tangent, map: impl Fn(&[Matrix]) -> Matrix + Send + Sync + 'static) -> Self {
        EquivariantMap { tangent: tangent.clone(), phi: GaugeMap::on_tangent(tangent, map) }
    }

    pub fn identity(alg: &Arc<LieAlgebra>, tangent: &Tangent) -> Self {
        EquivariantMap { tangent: tangent.clone(), phi: GaugeMap::projection(alg, 0) }
    }

    /// `(g″, g′) ↦ g″g′` with its exact `Φ*θ^R`.
    pub fn multiplication(alg: &Arc<LieAlgebra>, tangent: &Tangent) -> Self {
        EquivariantMap { tangent: tangent.clone(), phi: crate::fusion::multiplication(alg) }
    }

    pub fn alg(&self) -> &Arc<LieAlgebra> {
        &self.tangent.alg
    }

    pub fn value(&self, p: &[Matrix]) -> Matrix {
        self.phi.value(&p.to_vec())
    }

    /// `dΦ(v)` in right trivialization.
    pub fn push(&self, p: &[Matrix], v: &[Vector]) -> Vector {
        self.phi.right().eval(&p.to_vec(), &[Tangent::constant(v.to_vec())])
    }

    /// `|Φ(k·p) − kΦ(p)k⁻¹|`.
    pub fn equivariance_residual(&self, p: &[Matrix], k: &Matrix) -> f64 {
        let ki = self.alg().inverse(k);
        let moved: Vec<Matrix> = p.iter().map(|g| k * g * &ki).collect();
        (self.value(&moved) - k * self.value(p) * &ki).amax()
    }
}

/// A section `(X, ξ)` of `Φ!A`: a vector field on `G^r` and a path of
/// `𝔤`-valued functions with `ξ_{t+1} = Ad_Φ ξ_t + ι_XΦ*θ^R`.
#[derive(Clone)]
pub struct PullbackSection {
    field: Field,
    profile: PathFn,
    dot: PathFn,
}

impl std::fmt::Debug for PullbackSection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("PullbackSection")
    }
}

impl PullbackSection {
    pub fn new(
        field: Field,
        profile: impl Fn(&[Matrix], f64) -> Vector + Send + Sync + 'static,
        dot: impl Fn(&[Matrix], f64) -> Vector + Send + Sync + 'static,
    ) -> Self {
        PullbackSection { field, profile: Arc::new(profile), dot: Arc::new(dot) }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn tangent(&self, p: &[Matrix]) -> Vec<Vector> {
        (self.field)(p)
    }

    pub fn profile(&self, p: &[Matrix], t: f64) -> Vector {
        (self.profile)(p, t)
    }

    pub fn dot(&self, p: &[Matrix], t: f64) -> Vector {
        (self.dot)(p, t)
    }
}

/// `A_M = Φ!A` over `G^r`, with anchor `a_M(X, ξ) = X`.
#[derive(Clone, Debug)]
pub struct PullbackAlgebroid {
    pub map: EquivariantMap,
}

impl Algebroid for PullbackAlgebroid {
    type Point = Vec<Matrix>;
    type Section = PullbackSection;

    /// `([X,Y], −[ξ,ζ] + Xζ − Yξ)`.
    fn bracket(&self, a: &PullbackSection, b: &PullbackSection) -> PullbackSection {
        let tg = self.map.tangent.clone();
        let field = tg.bracket(&a.field, &b.field);
        let (x, z, t1) = (a.clone(), b.clone(), tg.clone());
        let profile = move |p: &[Matrix], t: f64| {
            let (vx, vz) = (x.tangent(p), z.tangent(p));
            let dz = t1.derivative(&|q: &[Matrix]| z.profile(q, t), p, &vx);
            let dx = t1.derivative(&|q: &[Matrix]| x.profile(q, t), p, &vz);
            -t1.alg.bracket(&x.profile(p, t), &z.profile(p, t)) + dz - dx
        };
        let (x, z) = (a.clone(), b.clone());
        let dot = move |p: &[Matrix], t: f64| {
            let (vx, vz) = (x.tangent(p), z.tangent(p));
            let dz = tg.derivative(&|q: &[Matrix]| z.dot(q, t), p, &vx);
            let dx = tg.derivative(&|q: &[Matrix]| x.dot(q, t), p, &vz);
            -tg.alg.bracket(&x.dot(p, t), &z.profile(p, t)) - tg.alg.bracket(&x.profile(p, t), &z.dot(p, t)) + dz - dx
        };
        PullbackSection::new(field, profile, dot)
    }

    fn anchor_derivative(&self, s: &PullbackSection, p: &Vec<Matrix>, f: &dyn Fn(&Vec<Matrix>) -> Vector) -> Vector {
        self.map.tangent.derivative(&|q: &[Matrix]| f(&q.to_vec()), p, &s.tangent(p))
    }
}

impl EquivariantAlgebroid for PullbackAlgebroid {
    /// `x_{A_M} = (x_M, x_A∘Φ)`: the conjugation field and the constant `−x`.
    fn generator(&self, x: &Vector) -> PullbackSection {
        let neg = -x.clone();
        let zero = self.map.alg().zero();
        PullbackSection::new(self.map.tangent.generator(x), move |_, _| neg.clone(), move |_, _| zero.clone())
    }
}

impl PullbackAlgebroid {
    pub fn new(map: EquivariantMap) -> Self {
        PullbackAlgebroid { map }
    }

    fn alg(&self) -> &Arc<LieAlgebra> {
        self.map.alg()
    }

    /// The element of `A_{Φ(p)}` carried by `s` at `p`. The returned section
    /// ignores its base-point argument.
    pub fn fiber(&self, s: &PullbackSection, p: &[Matrix]) -> Section {
        let anchor = self.map.push(p, &s.tangent(p));
        let (a, b) = (s.clone(), s.clone());
        let (p1, p2) = (p.to_vec(), p.to_vec());
        Section::new(move |_, t| a.profile(&p1, t), move |_| anchor.clone()).with_dot(move |_, t| b.dot(&p2, t))
    }

    /// `|ξ(1) − Ad_Φ ξ(0) − ι_XΦ*θ^R|` at `p`.
    pub fn seam_residual(&self, s: &PullbackSection, p: &[Matrix]) -> f64 {
        let phi = self.map.value(p);
        let expected = self.alg().ad_group(&phi, &s.profile(p, 0.0)) + self.map.push(p, &s.tangent(p));
        (s.profile(p, 1.0) - expected).amax()
    }

    /// `a + f(t)(Ad_Φ a + ι_XΦ*θ^R − a) + f(1−f) sin(2πt)·d`, quasi-periodic
    /// by construction.
    pub fn template(&self, field: Field, a: PointField, d: PointField, bump: Bump) -> PullbackSection {
        let (map, f2) = (self.map.clone(), field.clone());
        let a2 = a.clone();
        let jump: PointField = Arc::new(move |p| {
            let base = a2(p);
            map.alg().ad_group(&map.value(p), &base) + map.push(p, &f2(p)) - base
        });
        let mode = move |t: f64| {
            let f = bump.value(t);
            let df = bump.derivative(t);
            let (s, c) = (TAU * t).sin_cos();
            (f * (1.0 - f) * s, df * (1.0 - 2.0 * f) * s + f * (1.0 - f) * TAU * c)
        };
        let (j1, d1) = (jump.clone(), d.clone());
        let profile = move |p: &[Matrix], t: f64| a(p) + j1(p) * bump.value(t) + d1(p) * mode(t).0;
        let dot = move |p: &[Matrix], t: f64| jump(p) * bump.derivative(t) + d(p) * mode(t).1;
        PullbackSection::new(field, profile, dot)
    }

    /// A random template section with a random vector field.
    pub fn sample(&self, rng: &mut Sampler, bump: Bump) -> PullbackSection {
        let field = rng.tangent_vector(self.alg(), self.map.tangent.factors);
        let (a, d) = (self.random_function(rng), self.random_function(rng));
        self.template(field, a, d, bump)
    }

    /// A random loop section `(0, ξ)`.
    pub fn sample_loop(&self, rng: &mut Sampler, bump: Bump) -> PullbackSection {
        let r = self.map.tangent.factors;
        let zero = self.alg().zero();
        let field: Field = Arc::new(move |_| vec![zero.clone(); r]);
        let (a, d) = (self.random_function(rng), self.random_function(rng));
        self.template(field, a, d, bump)
    }

    fn random_function(&self, rng: &mut Sampler) -> PointField {
        let alg = self.alg().clone();
        let r = self.map.tangent.factors;
        let c = rng.vector(&alg, 1.0);
        let ds: Vec<Vector> = (0..r).map(|_| rng.vector(&alg, 1.0)).collect();
        Arc::new(move |p| ds.iter().zip(p).fold(c.clone(), |acc, (d, g)| acc + alg.ad_group(g, d)))
    }

    /// `(X, ξ∘Φ)` for a section `ξ` of `A` and a field `X` with
    /// `dΦ(X) = a(ξ)∘Φ`.
    pub fn pull_section(&self, xi: &Section, field: Field) -> PullbackSection {
        let (m1, m2, x1, x2) = (self.map.clone(), self.map.clone(), xi.clone(), xi.clone());
        let alg = self.alg().clone();
        PullbackSection::new(
            field,
            move |p, t| x1.profile(&m1.value(p), t),
            move |p, t| x2.time_derivative(&alg, &m2.value(p), t, 1e-5),
        )
    }

    /// `ϖ_M = Φ!ϖ`.
    pub fn varpi_form(&self, ctx: &Context) -> Form<PullbackAlgebroid> {
        let (ctx, me) = (ctx.clone(), self.clone());
        Form::scalar(2, move |p: &Vec<Matrix>, s: &[PullbackSection]| {
            varpi(&ctx, &me.fiber(&s[0], p), &me.fiber(&s[1], p), &me.map.value(p))
        })
    }

    /// `a_M*Φ*β` for a pointwise form `β` on one copy of `G`.
    pub fn pullback_tangent(&self, form: &Form<Tangent>) -> Form<PullbackAlgebroid> {
        let (me, form) = (self.clone(), form.clone());
        Form::new(form.degree(), move |p: &Vec<Matrix>, s: &[PullbackSection]| {
            let args: Vec<Field> = s.iter().map(|x| Tangent::constant(vec![me.map.push(p, &x.tangent(p))])).collect();
            form.eval(&vec![me.map.value(p)], &args)
        })
    }

    /// `Φ!φ` for a pointwise form `φ` on the path algebroid.
    pub fn pullback_atiyah(&self, form: &Form<Atiyah>) -> Form<PullbackAlgebroid> {
        let (me, form) = (self.clone(), form.clone());
        Form::new(form.degree(), move |p: &Vec<Matrix>, s: &[PullbackSection]| {
            let args: Vec<Section> = s.iter().map(|x| me.fiber(x, p)).collect();
            form.eval(&me.map.value(p), &args)
        })
    }

    /// `q_M(ξ, X) = (ξ − ξ(0), X + ξ(0)_M)`.
    pub fn project(&self, s: &PullbackSection) -> PullbackSection {
        let (alg, s1, s2, s3) = (self.alg().clone(), s.clone(), s.clone(), s.clone());
        let field: Field = Arc::new(move |p| {
            let x0 = s1.profile(p, 0.0);
            s1.tangent(p).iter().zip(p).map(|(v, g)| v + alg.ad_group(g, &x0) - &x0).collect()
        });
        PullbackSection::new(field, move |p, t| s2.profile(p, t) - s2.profile(p, 0.0), move |p, t| s3.dot(p, t))
    }
}

/// `q(ξ) = ξ − ξ(0)` on the path algebroid, with anchor `a(ξ) + ξ(0)_G`.
pub fn project_a_prime(alg: &Arc<LieAlgebra>, xi: &Section) -> Section {
    let (alg1, x1, x2, x3, alg3) = (alg.clone(), xi.clone(), xi.clone(), xi.clone(), alg.clone());
    Section::new(
        move |g, t| x1.profile(g, t) - x1.profile(g, 0.0),
        move |g| {
            let x0 = x2.profile(g, 0.0);
            x2.anchor(g) + alg1.ad_group(g, &x0) - x0
        },
    )
    .with_dot(move |g, t| x3.time_derivative(&alg3, g, t, 1e-5))
}

/// `Σ_k A^k/(k+1)!`, the right-trivialized differential of `exp` at `Y` when
/// `A = ad_Y`.
fn dexp_series(ad: &Matrix) -> Matrix {
    let n = ad.nrows();
    let mut term = Matrix::identity(n, n);
    let mut sum = term.clone();
    for k in 1..40 {
        term = &term * ad / (k as f64 + 1.0);
        sum += &term;
    }
    sum
}

/// The variation of `t ↦ exp((t + shift)·log g)` along the right-invariant
/// direction `v`. For fixed `shift` these sections span the image of a flat,
/// conjugation-invariant connection near the identity, hence a Lie
/// subalgebroid of `A` transverse to the generators when `shift ≠ 0`.
pub fn exponential_slice(alg: &Arc<LieAlgebra>, v: &Vector, shift: f64) -> Section {
    let (a1, v1) = (alg.clone(), v.clone());
    let v2 = v.clone();
    Section::new(
        move |g, t| {
            let x = a1.log(g);
            let ad = a1.ad_matrix(&x);
            let dlog = dexp_series(&ad).lu().solve(&v1).expect("dexp is invertible inside the chart");
            let s = t + shift;
            dexp_series(&(&ad * s)) * (dlog * s)
        },
        move |_| v2.clone(),
    )
}

/// Relative least-squares residual of `target` against `spanning` at `g`,
/// comparing profiles on `samples` nodes together with the anchors.
pub fn span_residual(target: &Section, spanning: &[Section], g: &Matrix, samples: usize) -> f64 {
    let stack = |s: &Section| {
        let mut parts: Vec<f64> = s.anchor(g).iter().copied().collect();
        for k in 0..=samples {
            parts.extend(s.profile(g, k as f64 / samples as f64).iter());
        }
        Vector::from_vec(parts)
    };
    let b = stack(target);
    let cols: Vec<Vector> = spanning.iter().map(stack).collect();
    let a = Matrix::from_columns(&cols);
    let svd = a.clone().svd(true, true);
    let coeffs = svd.solve(&b, 1e-12).expect("svd with vectors");
    (&a * coeffs - &b).norm() / b.norm().max(1e-300)
}

/// The conjugacy class of `base`, included in `G`. Tangent vectors at `g`
/// are right-trivialized elements of the range of `Ad_g − 1`.
#[derive(Clone, Debug)]
pub struct ConjugacyClass {
    pub alg: Arc<LieAlgebra>,
    pub base: Matrix,
}

impl ConjugacyClass {
    pub fn new(alg: &Arc<LieAlgebra>, base: Matrix) -> Self {
        ConjugacyClass { alg: alg.clone(), base }
    }

    /// `k g₀ k⁻¹`.
    pub fn point(&self, k: &Matrix) -> Matrix {
        k * &self.base * self.alg.inverse(k)
    }

    /// The generator `x_C = Ad_g x − x`.
    pub fn generator(&self, g: &Matrix, x: &Vector) -> Vector {
        self.alg.ad_group(g, x) - x
    }

    /// A basis of `T_g C`.
    pub fn tangent_basis(&self, g: &Matrix) -> Vec<Vector> {
        let m = self.alg.ad_group_matrix(g) - Matrix::identity(self.alg.dim(), self.alg.dim());
        let svd = m.svd(true, false);
        let u = svd.u.expect("left singular vectors");
        let smax = svd.singular_values.max();
        (0..svd.singular_values.len())
            // Roundoff in Ad_g − 1 must not count as a direction when the class is a point.
            .filter(|&i| svd.singular_values[i] > 1e-10 * smax.max(1.0))
            .map(|i| u.column(i).into_owned())
            .collect()
    }

    /// Some `x` with `x_C = w`.
    fn preimage(&self, g: &Matrix, w: &Vector) -> Vector {
        let m = self.alg.ad_group_matrix(g) - Matrix::identity(self.alg.dim(), self.alg.dim());
        m.pseudo_inverse(1e-10).expect("pseudo-inverse") * w
    }
}

/// The 2-form `ω_g(x_C, y_C) = ±½ x·(Ad_{g⁻¹} − Ad_g) y` on a conjugacy class.
#[derive(Clone, Debug)]
pub struct ClassTwoForm {
    pub class: ConjugacyClass,
    pub sign: f64,
}

impl ClassTwoForm {
    pub fn value(&self, g: &Matrix, w1: &Vector, w2: &Vector) -> f64 {
        let alg = &self.class.alg;
        let (x, y) = (self.class.preimage(g, w1), self.class.preimage(g, w2));
        let gi = alg.inverse(g);
        self.sign * 0.5 * alg.dot(&x, &(alg.ad_group(&gi, &y) - alg.ad_group(g, &y)))
    }

    /// Largest residual of `d_Gω + Φ*η_G = 0` over sampled points, `x` values
    /// and tangent vectors. In degree 1 this is
    /// `−ω(x_C, w) + η_G^{(1)}(x)(w)`; in degree 3 it is `η` on three tangent
    /// vectors, `dω` vanishing for dimension reasons on a 2-sphere.
    pub fn oracle_residual(&self, rng: &mut Sampler, samples: usize) -> f64 {
        let alg = &self.class.alg;
        let mut worst: f64 = 0.0;
        for _ in 0..samples {
            let g = self.class.point(&rng.group_point(alg, 2.0));
            let basis = self.class.tangent_basis(&g);
            let x = rng.vector(alg, 1.0);
            let xc = self.class.generator(&g, &x);
            let linear = eta_g_linear(alg, 0, &x);
            let coeff = |rng: &mut Sampler| basis.iter().fold(alg.zero(), |acc, b| acc + b * rng.uniform(-1.0, 1.0));
            let w = coeff(rng);
            let eta1 = linear.value(&vec![g.clone()], &[Tangent::constant(vec![w.clone()])]);
            worst = worst.max((-self.value(&g, &xc, &w) + eta1).abs());
            let ws: Vec<Vector> = (0..3).map(|_| coeff(rng)).collect();
            worst = worst.max(cartan_eta(alg, &g, [&ws[0], &ws[1], &ws[2]]).abs());
        }
        worst
    }

    /// Picks the sign for which the oracle passes; errors if neither does.
    pub fn calibrate(class: &ConjugacyClass, rng: &mut Sampler, samples: usize, tol: f64) -> Result<Self> {
        let mut seen = Vec::new();
        for sign in [1.0, -1.0] {
            let omega = ClassTwoForm { class: class.clone(), sign };
            let r = omega.oracle_residual(&mut rng.clone(), samples);
            if r < tol {
                return Ok(omega);
            }
            seen.push(r);
        }
        Err(Error::OracleAbort(format!("d_G omega + Phi*eta_G residuals {seen:?} for both signs")))
    }
}

/// One element `(w, ξ)` of the fiber of `A_C` at a point.
#[derive(Clone, Debug)]
pub struct BasisElement {
    pub label: String,
    pub tangent: Vector,
    pub section: Section,
}

/// Blocks of `Ad_g` in a frame orthonormal for the invariant form.
#[derive(Clone, Debug)]
enum AdBlock {
    Fixed(Vector),
    Flip(Vector),
    Rotation(Vector, Vector, f64),
}

fn ad_blocks(alg: &LieAlgebra, g: &Matrix) -> Result<Vec<AdBlock>> {
    let n = alg.dim();
    let chol = alg
        .form()
        .clone()
        .cholesky()
        .ok_or_else(|| Error::InvalidInput("the invariant form is not positive definite".into()))?;
    let l = chol.l();
    let lt_inv = l.transpose().try_inverse().expect("Cholesky factor is invertible");
    let ad = alg.ad_group_matrix(g);
    let r = l.transpose() * &ad * &lt_inv;
    let (q, t) = Schur::new(r).unpack();
    let to_alg = |y: Vector| &lt_inv * y;
    let mut blocks = Vec::new();
    let mut i = 0;
    while i < n {
        if i + 1 < n && t[(i + 1, i)].abs() > 1e-12 {
            let c = 0.5 * (t[(i, i)] + t[(i + 1, i + 1)]);
            let s = 0.5 * (t[(i + 1, i)] - t[(i, i + 1)]);
            let (u1, u2) = (q.column(i).into_owned(), q.column(i + 1).into_owned());
            let (u1, u2, s) = if s < 0.0 { (u2, u1, -s) } else { (u1, u2, s) };
            blocks.push(AdBlock::Rotation(to_alg(u1), to_alg(u2), s.atan2(c)));
            i += 2;
        } else {
            let u = to_alg(q.column(i).into_owned());
            blocks.push(if t[(i, i)] > 0.0 { AdBlock::Fixed(u) } else { AdBlock::Flip(u) });
            i += 1;
        }
    }
    for b in &blocks {
        let residual = match b {
            AdBlock::Fixed(u) => (alg.ad_group(g, u) - u).amax(),
            AdBlock::Flip(u) => (alg.ad_group(g, u) + u).amax(),
            AdBlock::Rotation(u1, u2, a) => (alg.ad_group(g, u1) - (u1 * a.cos() + u2 * a.sin())).amax(),
        };
        if residual > 1e-9 {
            return Err(Error::InvalidInput(format!("Ad_g frame is off by {residual:.3e}")));
        }
    }
    Ok(blocks)
}

fn planar_mode(u1: &Vector, u2: &Vector, omega: f64, phase: f64) -> Section {
    let (a1, a2, b1, b2) = (u1.clone(), u2.clone(), u1.clone(), u2.clone());
    let zero = u1 * 0.0;
    Section::new(
        move |_, t| {
            let a = omega * t + phase;
            &a1 * a.cos() + &a2 * a.sin()
        },
        move |_| zero.clone(),
    )
    .with_dot(move |_, t| {
        let a = omega * t + phase;
        (&b2 * a.cos() - &b1 * a.sin()) * omega
    })
}

fn line_mode(u: &Vector, omega: f64, phase: f64) -> Section {
    let (a, b) = (u.clone(), u.clone());
    let zero = u * 0.0;
    Section::new(move |_, t| &a * (omega * t + phase).cos(), move |_| zero.clone())
        .with_dot(move |_, t| &b * (-omega * (omega * t + phase).sin()))
}

/// A finite probe of the fiber of `A_C` at `g`: generators `(x_C, x_A)` for
/// `x` moved by `Ad_g`, and Fourier loop modes up to `n_max` built in a frame
/// where `Ad_g` is block diagonal, so each mode is exactly quasi-periodic.
#[derive(Clone, Debug)]
pub struct TruncatedBasis {
    pub n_max: usize,
    pub point: Matrix,
    pub elements: Vec<BasisElement>,
}

impl TruncatedBasis {
    pub fn new(class: &ConjugacyClass, g: &Matrix, n_max: usize) -> Result<Self> {
        let alg = &class.alg;
        let mut elements = Vec::new();
        let zero = alg.zero();
        let mut push_loop = |label: String, section: Section| {
            elements.push(BasisElement { label, tangent: zero.clone(), section })
        };
        let blocks = ad_blocks(alg, g)?;
        let mut moved = Vec::new();
        for (b, block) in blocks.iter().enumerate() {
            match block {
                AdBlock::Fixed(u) => {
                    for k in 0..=n_max {
                        let w = TAU * k as f64;
                        push_loop(format!("fixed{b}:cos{k}"), line_mode(u, w, 0.0));
                        if k > 0 {
                            push_loop(format!("fixed{b}:sin{k}"), line_mode(u, w, -PI / 2.0));
                        }
                    }
                }
                AdBlock::Flip(u) => {
                    for k in 0..n_max {
                        let w = PI * (2 * k + 1) as f64;
                        push_loop(format!("flip{b}:cos{k}"), line_mode(u, w, 0.0));
                        push_loop(format!("flip{b}:sin{k}"), line_mode(u, w, -PI / 2.0));
                    }
                    moved.push(u.clone());
                }
                AdBlock::Rotation(u1, u2, angle) => {
                    for k in -(n_max as i64)..=(n_max as i64) {
                        let w = angle + TAU * k as f64;
                        push_loop(format!("rot{b}:c{k}"), planar_mode(u1, u2, w, 0.0));
                        push_loop(format!("rot{b}:s{k}"), planar_mode(u1, u2, w, PI / 2.0));
                    }
                    moved.push(u1.clone());
                    moved.push(u2.clone());
                }
            }
        }
        for (i, x) in moved.iter().enumerate() {
            elements.push(BasisElement {
                label: format!("generator{i}"),
                tangent: class.generator(g, x),
                section: Section::generator(alg, x),
            });
        }
        Ok(TruncatedBasis { n_max, point: g.clone(), elements })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Largest violation of `ξ(1) = Ad_g ξ(0) + w` over the basis.
    pub fn seam_residual(&self, alg: &LieAlgebra) -> f64 {
        let g = &self.point;
        self.elements
            .iter()
            .map(|e| (e.section.profile(g, 1.0) - alg.ad_group(g, &e.section.profile(g, 0.0)) - &e.tangent).amax())
            .fold(0.0, f64::max)
    }

    /// `σ_min/σ_max` of the Gram matrix of `w·w′ + ∫ξ·ξ′`.
    pub fn conditioning(&self, ctx: &Context) -> f64 {
        let (g, alg) = (&self.point, &ctx.alg);
        let n = self.len();
        let rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let a = &self.elements[i];
                (0..n)
                    .map(|j| {
                        let b = &self.elements[j];
                        alg.dot(&a.tangent, &b.tangent)
                            + ctx.grid.integrate(|t| alg.dot(&a.section.profile(g, t), &b.section.profile(g, t)))
                    })
                    .collect()
            })
            .collect();
        let m = Matrix::from_fn(n, n, |i, j| rows[i][j]);
        let sv = m.singular_values();
        sv.min() / sv.max()
    }
}

/// `(a*ω + ϖ)((w, ξ), (w′, ξ′)) = ω(w, w′) + ϖ_g(ξ, ξ′)`.
pub fn kernel_form(ctx: &Context, omega: &ClassTwoForm, g: &Matrix, a: &BasisElement, b: &BasisElement) -> f64 {
    omega.value(g, &a.tangent, &b.tangent) + varpi(ctx, &a.section, &b.section, g)
}

/// The kernel of `a*ω + ϖ` restricted to a truncated basis.
#[derive(Clone, Debug)]
pub struct KernelReport {
    pub dimension: usize,
    pub singular_values: Vec<f64>,
    /// Coefficient vectors in the basis, unit length.
    pub vectors: Vec<Vector>,
    /// `max |M_ij + M_ji|` of the assembled matrix.
    pub antisymmetry: f64,
}

/// Assembles the antisymmetric matrix of `a*ω + ϖ` on `basis` and returns
/// its numerical kernel, `σ < threshold·σ_max`.
pub fn gram_kernel(ctx: &Context, omega: &ClassTwoForm, basis: &TruncatedBasis, threshold: f64) -> Result<KernelReport> {
    if !ctx.alg.is_nondegenerate() {
        return Err(Error::InvalidInput("the invariant form is degenerate".into()));
    }
    let cond = basis.conditioning(ctx);
    if cond < 1e-12 {
        return Err(Error::InvalidInput(format!("truncated basis is ill-conditioned ({cond:.3e})")));
    }
    let m = gram_matrix(ctx, omega, basis);
    Ok(kernel_of(&m, threshold))
}

pub fn gram_matrix(ctx: &Context, omega: &ClassTwoForm, basis: &TruncatedBasis) -> Matrix {
    let n = basis.len();
    let g = &basis.point;
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| (0..n).map(|j| kernel_form(ctx, omega, g, &basis.elements[i], &basis.elements[j])).collect())
        .collect();
    Matrix::from_fn(n, n, |i, j| rows[i][j])
}

/// Numerical kernel of an assembled matrix.
pub fn kernel_of(m: &Matrix, threshold: f64) -> KernelReport {
    let antisymmetry = (m + m.transpose()).amax();
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors");
    let smax = svd.singular_values.max();
    let mut singular_values: Vec<f64> = svd.singular_values.iter().copied().collect();
    let vectors: Vec<Vector> = (0..singular_values.len())
        .filter(|&i| singular_values[i] < threshold * smax)
        .map(|i| v_t.row(i).transpose().into_owned())
        .collect();
    singular_values.sort_by(|a, b| b.total_cmp(a));
    KernelReport { dimension: vectors.len(), singular_values, vectors, antisymmetry }
}

/// The row `b ↦ (a*ω + ϖ)((x_C, x_A), b)` over a basis.
pub fn generator_row(ctx: &Context, omega: &ClassTwoForm, basis: &TruncatedBasis, x: &Vector) -> Vec<f64> {
    let g = &basis.point;
    let gen = BasisElement {
        label: "x".into(),
        tangent: omega.class.generator(g, x),
        section: Section::generator(&ctx.alg, x),
    };
    basis.elements.par_iter().map(|b| kernel_form(ctx, omega, g, &gen, b)).collect()
}

/// `max_t |Σ cᵢ ξ̇ᵢ(t)|` for a coefficient vector on the basis.
pub fn loop_velocity(ctx: &Context, basis: &TruncatedBasis, coeffs: &Vector) -> f64 {
    let (g, alg) = (&basis.point, &ctx.alg);
    ctx.grid
        .nodes()
        .map(|t| {
            basis
                .elements
                .iter()
                .zip(coeffs.iter())
                .fold(alg.zero(), |acc, (e, c)| acc + e.section.time_derivative(alg, g, t, ctx.steps.time) * *c)
                .amax()
        })
        .fold(0.0, f64::max)
}
