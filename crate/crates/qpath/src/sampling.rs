//! Seeded random points, vectors and sections for property checks.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebroid::{Field, Tangent};
use crate::forms::Form;
use crate::lie::LieAlgebra;
use crate::path::{FieldFn, ScalarFn, Section};
use crate::{Context, Matrix, Vector};

/// FNV-1a hash, used to derive per-check seeds from names.
pub fn fnv1a(text: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in text.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Random generator for one check.
#[derive(Clone, Debug)]
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    /// Seed derived from a run seed and a check name, so results do not
    /// depend on execution order.
    pub fn for_check(seed: u64, name: &str) -> Self {
        Self::new(seed ^ fnv1a(name))
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.random_range(lo..hi)
    }

    pub fn vector(&mut self, alg: &LieAlgebra, scale: f64) -> Vector {
        Vector::from_fn(alg.dim(), |_, _| self.rng.random_range(-scale..scale))
    }

    /// `exp(u)` with coefficients of `u` uniform in `[−radius, radius]`.
    pub fn group_point(&mut self, alg: &LieAlgebra, radius: f64) -> Matrix {
        let u = self.vector(alg, radius);
        alg.exp(&u)
    }

    /// `g ↦ a₀ + c·Ad_g d` with random `a₀, c, d`.
    pub fn field(&mut self, alg: &Arc<LieAlgebra>) -> FieldFn {
        let a0 = self.vector(alg, 1.0);
        let d = self.vector(alg, 1.0);
        let c = self.uniform(-1.0, 1.0);
        let alg = alg.clone();
        Arc::new(move |g| &a0 + alg.ad_group(g, &d) * c)
    }

    /// `g ↦ c + p·Ad_g q`.
    pub fn scalar_function(&mut self, alg: &Arc<LieAlgebra>) -> ScalarFn {
        let p = self.vector(alg, 1.0);
        let q = self.vector(alg, 1.0);
        let c = self.uniform(-1.0, 1.0);
        let alg = alg.clone();
        Arc::new(move |g| c + alg.dot(&p, &alg.ad_group(g, &q)))
    }

    /// A `𝔤`-valued 1-form on factor `factor` of `G^r`:
    /// `v ↦ A v + sin(⟨W, g⟩) B Ad_{g⁻¹} v` with random `A, B, W`.
    pub fn one_form(&mut self, alg: &Arc<LieAlgebra>, factor: usize) -> Form<Tangent> {
        let (d, n) = (alg.dim(), alg.matrix_size());
        let a = Matrix::from_fn(d, d, |_, _| self.uniform(-1.0, 1.0));
        let b = Matrix::from_fn(d, d, |_, _| self.uniform(-1.0, 1.0));
        let w = Matrix::from_fn(n, n, |_, _| self.uniform(-1.0, 1.0));
        let alg = alg.clone();
        Form::new(1, move |p: &Vec<Matrix>, s: &[Field]| {
            let (g, v) = (&p[factor], &s[0](p)[factor]);
            &a * v + (&b * alg.ad_group(&alg.inverse(g), v)) * g.component_mul(&w).sum().sin()
        })
    }

    /// Constant right-trivialized tangent vectors on `G^r`.
    pub fn tangent_vector(&mut self, alg: &LieAlgebra, factors: usize) -> Field {
        Tangent::constant((0..factors).map(|_| self.vector(alg, 1.0)).collect())
    }

    /// A template section with an extra interior loop mode.
    pub fn section(&mut self, ctx: &Context) -> Section {
        let a = self.field(&ctx.alg);
        let v = self.field(&ctx.alg);
        let d = self.field(&ctx.alg);
        let k = 1 + (self.rng.random_range(0..2u32));
        Section::template(&ctx.alg, a, v, ctx.bump).with_interior_mode(d, k, ctx.bump)
    }

    /// A random loop at every point (anchor zero).
    pub fn loop_section(&mut self, ctx: &Context) -> Section {
        let a = self.field(&ctx.alg);
        let zero = ctx.alg.zero();
        let v: FieldFn = Arc::new(move |_| zero.clone());
        let d = self.field(&ctx.alg);
        let k = 1 + (self.rng.random_range(0..2u32));
        Section::template(&ctx.alg, a, v, ctx.bump).with_interior_mode(d, k, ctx.bump)
    }

    /// A section whose profile has flat margins, for concatenation.
    pub fn flat_section(&mut self, ctx: &Context, margin: f64) -> Section {
        let bump = crate::path::Bump::with_margin(margin);
        let a = self.field(&ctx.alg);
        let v = self.field(&ctx.alg);
        let d = self.field(&ctx.alg);
        Section::template(&ctx.alg, a, v, bump).with_interior_mode(d, 1, bump)
    }
}
