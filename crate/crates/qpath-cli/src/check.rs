//! What a single check is, and what it gets to work with.

use std::sync::OnceLock;

use qpath::algebroid::Field;
use qpath::path::Section;
use qpath::sampling::Sampler;
use qpath::{Context, Matrix, Result};

use crate::config::Suite;
use crate::suites::qham::KernelStudy;

/// Result of running one check.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    /// `None` when the check does not apply to the configured group.
    pub residual: Option<f64>,
    pub note: Option<String>,
}

impl Outcome {
    pub fn residual(r: f64) -> Self {
        Outcome { residual: Some(r), note: None }
    }

    pub fn skipped(reason: impl Into<String>) -> Self {
        Outcome { residual: None, note: Some(reason.into()) }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

pub type CheckFn = fn(&mut Probe) -> Result<Outcome>;

/// A named identity with a default tolerance.
#[derive(Clone, Copy, Debug)]
pub struct Check {
    pub suite: Suite,
    /// Short name; the full name is `suite.name`.
    pub name: &'static str,
    /// The identity being checked, written out.
    pub anchor: &'static str,
    pub tolerance: f64,
    pub run: CheckFn,
}

impl Check {
    pub fn full_name(&self) -> String {
        format!("{}.{}", self.suite, self.name)
    }
}

/// Results computed once per run and shared by several checks.
#[derive(Default)]
pub struct Shared {
    pub(crate) kernel: OnceLock<Result<KernelStudy>>,
}

const FNV_PRIME: u64 = 0x100000001b3;

/// Per-check sampling state. Every random input goes through the check's own
/// generator, and sampled group points are folded into a digest so reports
/// can be compared across runs.
pub struct Probe<'a> {
    pub ctx: &'a Context,
    pub samples: usize,
    pub seed: u64,
    pub rng: Sampler,
    pub(crate) shared: &'a Shared,
    pub(crate) run_seed: u64,
    digest: u64,
}

impl<'a> Probe<'a> {
    pub fn new(ctx: &'a Context, shared: &'a Shared, run_seed: u64, name: &str, samples: usize) -> Self {
        let seed = run_seed ^ qpath::sampling::fnv1a(name);
        Probe {
            ctx,
            samples,
            seed,
            rng: Sampler::new(seed),
            shared,
            run_seed,
            digest: 0xcbf29ce484222325,
        }
    }

    pub fn digest(&self) -> u64 {
        self.digest
    }

    pub fn record(&mut self, g: &Matrix) {
        for x in g.iter() {
            self.digest = (self.digest ^ x.to_bits()).wrapping_mul(FNV_PRIME);
        }
    }

    /// A random group element `exp(u)` with `|uᵢ| ≤ radius`.
    pub fn point(&mut self, radius: f64) -> Matrix {
        let g = self.rng.group_point(&self.ctx.alg, radius);
        self.record(&g);
        g
    }

    /// A random point of `G^r`.
    pub fn points(&mut self, r: usize, radius: f64) -> Vec<Matrix> {
        (0..r).map(|_| self.point(radius)).collect()
    }

    pub fn sections<const N: usize>(&mut self) -> [Section; N] {
        std::array::from_fn(|_| self.rng.section(self.ctx))
    }

    pub fn loops<const N: usize>(&mut self) -> [Section; N] {
        std::array::from_fn(|_| self.rng.loop_section(self.ctx))
    }

    /// `n` constant tangent vectors on `G^r`.
    pub fn tangent_args(&mut self, r: usize, n: usize) -> Vec<Field> {
        (0..n).map(|_| self.rng.tangent_vector(&self.ctx.alg, r)).collect()
    }
}

/// Running maximum of absolute values.
#[derive(Clone, Copy, Debug, Default)]
pub struct Worst(pub f64);

impl Worst {
    pub fn see(&mut self, r: f64) {
        // NaN must not be swallowed by max.
        if r.is_nan() || r.abs() > self.0 {
            self.0 = r.abs();
        }
    }

    pub fn outcome(self) -> Outcome {
        Outcome::residual(self.0)
    }
}
