//! Numerical settings shared by every construction.

use std::sync::Arc;

use crate::algebroid::{Atiyah, Tangent};
use crate::lie::{LieAlgebra, Steps};
use crate::path::{Bump, TimeGrid};

/// An algebra together with step sizes, the time grid and the bump used to
/// interpolate across unit intervals.
#[derive(Clone, Debug)]
pub struct Context {
    pub alg: Arc<LieAlgebra>,
    pub steps: Steps,
    pub grid: TimeGrid,
    pub bump: Bump,
}

impl Context {
    pub fn new(alg: LieAlgebra, steps: Steps, grid: TimeGrid) -> Self {
        Context { alg: Arc::new(alg), steps, grid, bump: Bump::default() }
    }

    /// Default steps and a 201-point grid.
    pub fn with_defaults(alg: LieAlgebra) -> Self {
        Self::new(alg, Steps::default(), TimeGrid::default())
    }

    pub fn atiyah(&self) -> Atiyah {
        Atiyah::new(self.alg.clone(), self.steps)
    }

    pub fn tangent(&self, factors: usize) -> Tangent {
        Tangent::new(self.alg.clone(), factors, self.steps)
    }
}
