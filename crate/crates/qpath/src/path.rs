//! Quasi-periodic path sections `ξ(g, t)` with `ξ(t+1) = Ad_g ξ(t) + v_ξ(g)`,
//! their time calculus, and quadrature on `[0, 1]`.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::lie::{richardson, LieAlgebra};
use crate::{Error, Matrix, Result, Vector};

/// Profile evaluator `(g, t) ↦ ξ(g, t)` for `t ∈ [0, 1]`.
pub type ProfileFn = Arc<dyn Fn(&Matrix, f64) -> Vector + Send + Sync>;
/// Group-point evaluator `g ↦ 𝔤`.
pub type FieldFn = Arc<dyn Fn(&Matrix) -> Vector + Send + Sync>;
/// Scalar function on the group.
pub type ScalarFn = Arc<dyn Fn(&Matrix) -> f64 + Send + Sync>;

/// Uniform grid on `[0, 1]` with an odd number of nodes, used with the
/// composite Simpson rule.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeGrid {
    n_points: usize,
    weights: Vec<f64>,
}

impl TimeGrid {
    pub fn new(n_points: usize) -> Result<Self> {
        if n_points < 3 || n_points % 2 == 0 {
            return Err(Error::InvalidInput(format!(
                "grid size must be odd and at least 3, got {n_points}"
            )));
        }
        let h = 1.0 / (n_points - 1) as f64;
        let weights = (0..n_points)
            .map(|k| {
                let c = if k == 0 || k == n_points - 1 {
                    1.0
                } else if k % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                c * h / 3.0
            })
            .collect();
        Ok(TimeGrid { n_points, weights })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn node(&self, k: usize) -> f64 {
        k as f64 / (self.n_points - 1) as f64
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(|k| self.node(k))
    }

    /// `(t_k, w_k)` pairs.
    pub fn rule(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.weights.iter().enumerate().map(|(k, w)| (self.node(k), *w))
    }

    /// `∫₀¹ f(t) dt` by composite Simpson.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.rule().map(|(t, w)| w * f(t)).sum()
    }

    /// Componentwise `∫₀¹ f(t) dt` of a vector-valued integrand.
    pub fn integrate_vec(&self, f: impl Fn(f64) -> Vector) -> Vector {
        let mut acc: Option<Vector> = None;
        for (t, w) in self.rule() {
            let y = f(t) * w;
            acc = Some(match acc {
                Some(a) => a + y,
                None => y,
            });
        }
        acc.expect("grid has at least three nodes")
    }
}

impl Default for TimeGrid {
    fn default() -> Self {
        TimeGrid::new(201).expect("201 is odd")
    }
}

/// Gauss–Legendre nodes and weights mapped to `[0, 1]`.
pub fn gauss_legendre_unit(n: usize) -> Vec<(f64, f64)> {
    let n = std::num::NonZeroUsize::new(n).expect("at least one node");
    let rule = gauss_quad::legendre::GaussLegendre::new(n);
    rule.nodes().zip(rule.weights()).map(|(x, w)| (0.5 * (x + 1.0), 0.5 * w)).collect()
}

fn flat_exp(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else {
        (-1.0 / u).exp()
    }
}

fn flat_exp_prime(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else {
        (-1.0 / u).exp() / (u * u)
    }
}

/// Smooth step `f` with `f ≡ 0` near 0 and `f ≡ 1` near 1.
///
/// With a nonzero `margin` the step is exactly constant on `[0, margin]` and
/// `[1 − margin, 1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bump {
    margin: f64,
}

impl Default for Bump {
    fn default() -> Self {
        Bump { margin: 0.0 }
    }
}

impl Bump {
    pub fn with_margin(margin: f64) -> Self {
        assert!((0.0..0.5).contains(&margin), "margin must lie in [0, 0.5)");
        Bump { margin }
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    fn rescale(&self, t: f64) -> (f64, f64) {
        let scale = 1.0 / (1.0 - 2.0 * self.margin);
        ((t - self.margin) * scale, scale)
    }

    pub fn value(&self, t: f64) -> f64 {
        let (u, _) = self.rescale(t);
        if u <= 0.0 {
            return 0.0;
        }
        if u >= 1.0 {
            return 1.0;
        }
        let a = flat_exp(u);
        let b = flat_exp(1.0 - u);
        a / (a + b)
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let (u, scale) = self.rescale(t);
        if u <= 0.0 || u >= 1.0 {
            return 0.0;
        }
        let a = flat_exp(u);
        let b = flat_exp(1.0 - u);
        let da = flat_exp_prime(u);
        let db = -flat_exp_prime(1.0 - u);
        (da * b - a * db) / ((a + b) * (a + b)) * scale
    }
}

/// A section of the path algebroid, given by analytic evaluators.
///
/// The profile is only consulted on `[0, 1]`; other times are reached through
/// the seam rule in [`Section::extend`].
#[derive(Clone)]
pub struct Section {
    profile: ProfileFn,
    dot: Option<ProfileFn>,
    anchor: FieldFn,
    flat_ends: bool,
}

impl std::fmt::Debug for Section {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Section")
            .field("analytic_dot", &self.dot.is_some())
            .field("flat_ends", &self.flat_ends)
            .finish()
    }
}

impl Section {
    pub fn new(
        profile: impl Fn(&Matrix, f64) -> Vector + Send + Sync + 'static,
        anchor: impl Fn(&Matrix) -> Vector + Send + Sync + 'static,
    ) -> Self {
        Section { profile: Arc::new(profile), dot: None, anchor: Arc::new(anchor), flat_ends: false }
    }

    /// Attaches an analytic `∂ξ/∂t`.
    pub fn with_dot(mut self, dot: impl Fn(&Matrix, f64) -> Vector + Send + Sync + 'static) -> Self {
        self.dot = Some(Arc::new(dot));
        self
    }

    pub fn with_flat_ends(mut self, flat: bool) -> Self {
        self.flat_ends = flat;
        self
    }

    pub fn from_parts(profile: ProfileFn, dot: Option<ProfileFn>, anchor: FieldFn, flat_ends: bool) -> Self {
        Section { profile, dot, anchor, flat_ends }
    }

    /// The zero section.
    pub fn zero(alg: &LieAlgebra) -> Self {
        let z = alg.zero();
        let z2 = z.clone();
        let z3 = z.clone();
        Section::new(move |_, _| z.clone(), move |_| z2.clone())
            .with_dot(move |_, _| z3.clone())
            .with_flat_ends(true)
    }

    /// The generator `x_A`: constant profile `−x` with anchor `Ad_g x − x`.
    pub fn generator(alg: &Arc<LieAlgebra>, x: &Vector) -> Self {
        let neg = -x.clone();
        let zero = alg.zero();
        let (alg, x) = (alg.clone(), x.clone());
        Section::new(move |_, _| neg.clone(), move |g| alg.ad_group(g, &x) - &x)
            .with_dot(move |_, _| zero.clone())
            .with_flat_ends(true)
    }

    /// `profile(g, t) = a(g) + f(t)·(Ad_g a(g) + v(g) − a(g))`, which satisfies
    /// the seam rule exactly.
    pub fn template(alg: &Arc<LieAlgebra>, a: FieldFn, v: FieldFn, bump: Bump) -> Self {
        let (alg1, a1, v1) = (alg.clone(), a.clone(), v.clone());
        let (alg2, a2, v2) = (alg.clone(), a, v.clone());
        Section::new(
            move |g, t| {
                let base = a1(g);
                let jump = alg1.ad_group(g, &base) + v1(g) - &base;
                base + jump * bump.value(t)
            },
            move |g| v(g),
        )
        .with_dot(move |g, t| {
            let base = a2(g);
            (alg2.ad_group(g, &base) + v2(g) - &base) * bump.derivative(t)
        })
        .with_flat_ends(true)
    }

    /// A loop at every `g` (anchor zero) built from a `g`-independent profile
    /// that is only valid where `Ad_g` fixes it; used at the identity.
    pub fn loop_at_identity(
        alg: &LieAlgebra,
        profile: impl Fn(f64) -> Vector + Send + Sync + 'static,
        dot: impl Fn(f64) -> Vector + Send + Sync + 'static,
    ) -> Self {
        let zero = alg.zero();
        Section::new(move |_, t| profile(t), move |_| zero.clone()).with_dot(move |_, t| dot(t))
    }

    pub fn profile(&self, g: &Matrix, t: f64) -> Vector {
        (self.profile)(g, t)
    }

    pub fn profile_fn(&self) -> &ProfileFn {
        &self.profile
    }

    pub fn dot_fn(&self) -> Option<&ProfileFn> {
        self.dot.as_ref()
    }

    pub fn anchor(&self, g: &Matrix) -> Vector {
        (self.anchor)(g)
    }

    pub fn anchor_fn(&self) -> &FieldFn {
        &self.anchor
    }

    pub fn has_flat_ends(&self) -> bool {
        self.flat_ends
    }

    pub fn has_analytic_dot(&self) -> bool {
        self.dot.is_some()
    }

    /// Value at any real `t`, through the seam rule.
    pub fn extend(&self, alg: &LieAlgebra, g: &Matrix, t: f64) -> Vector {
        let n = t.floor();
        let mut s = t - n;
        let mut n = n as i64;
        // Keep t = 1 on the profile rather than extending from t = 0.
        if n == 1 && s == 0.0 {
            n = 0;
            s = 1.0;
        }
        let mut value = self.profile(g, s);
        if n == 0 {
            return value;
        }
        let v = self.anchor(g);
        if n > 0 {
            let ad = alg.ad_group_matrix(g);
            for _ in 0..n {
                value = &ad * value + &v;
            }
        } else {
            let ad_inv = alg.ad_group_matrix(&alg.inverse(g));
            for _ in 0..(-n) {
                value = &ad_inv * (value - &v);
            }
        }
        value
    }

    /// `∂ξ/∂t` at any real `t`: analytic when available, otherwise a
    /// Richardson central difference through [`Section::extend`].
    pub fn time_derivative(&self, alg: &LieAlgebra, g: &Matrix, t: f64, h: f64) -> Vector {
        match &self.dot {
            Some(dot) => {
                let n = t.floor();
                let mut s = t - n;
                let mut n = n as i64;
                if n == 1 && s == 0.0 {
                    n = 0;
                    s = 1.0;
                }
                let d = dot(g, s);
                if n == 0 {
                    return d;
                }
                let ad = if n > 0 { alg.ad_group_matrix(g) } else { alg.ad_group_matrix(&alg.inverse(g)) };
                let mut d = d;
                for _ in 0..n.unsigned_abs() {
                    d = &ad * d;
                }
                d
            }
            None => richardson(|e| self.extend(alg, g, t + e), h),
        }
    }

    /// `‖ξ(g,1) − Ad_g ξ(g,0) − v(g)‖`.
    pub fn seam_residual(&self, alg: &LieAlgebra, g: &Matrix) -> f64 {
        let r = self.profile(g, 1.0) - alg.ad_group(g, &self.profile(g, 0.0)) - self.anchor(g);
        r.amax()
    }

    /// Checks the seam rule at `g`.
    pub fn validate(&self, alg: &LieAlgebra, g: &Matrix, tol: f64) -> Result<()> {
        let r = self.seam_residual(alg, g);
        if r.is_finite() && r <= tol {
            Ok(())
        } else {
            Err(Error::NotQuasiPeriodic(r))
        }
    }

    pub fn add(&self, other: &Section) -> Section {
        let (p1, p2) = (self.profile.clone(), other.profile.clone());
        let (a1, a2) = (self.anchor.clone(), other.anchor.clone());
        let dot = match (&self.dot, &other.dot) {
            (Some(d1), Some(d2)) => {
                let (d1, d2) = (d1.clone(), d2.clone());
                Some(Arc::new(move |g: &Matrix, t: f64| d1(g, t) + d2(g, t)) as ProfileFn)
            }
            _ => None,
        };
        Section {
            profile: Arc::new(move |g, t| p1(g, t) + p2(g, t)),
            dot,
            anchor: Arc::new(move |g| a1(g) + a2(g)),
            flat_ends: self.flat_ends && other.flat_ends,
        }
    }

    pub fn scale(&self, c: f64) -> Section {
        self.scale_by(Arc::new(move |_| c))
    }

    pub fn sub(&self, other: &Section) -> Section {
        self.add(&other.scale(-1.0))
    }

    /// Multiplication by a function on the group.
    pub fn scale_by(&self, h: ScalarFn) -> Section {
        let p = self.profile.clone();
        let a = self.anchor.clone();
        let (h1, h2) = (h.clone(), h.clone());
        let dot = self.dot.clone().map(|d| {
            let h = h.clone();
            Arc::new(move |g: &Matrix, t: f64| d(g, t) * h(g)) as ProfileFn
        });
        Section {
            profile: Arc::new(move |g, t| p(g, t) * h1(g)),
            dot,
            anchor: Arc::new(move |g| a(g) * h2(g)),
            flat_ends: self.flat_ends,
        }
    }

    /// Same section with the analytic time derivative dropped, so that
    /// [`Section::time_derivative`] falls back to finite differences.
    pub fn without_dot(&self) -> Section {
        Section { dot: None, ..self.clone() }
    }

    /// Adds `φ(t)·d(g)` with `φ(t) = f(t)(1 − f(t)) sin(2πkt)`, a profile
    /// supported away from the seam that keeps the section quasi-periodic.
    pub fn with_interior_mode(&self, d: FieldFn, k: u32, bump: Bump) -> Section {
        let kk = 2.0 * PI * k as f64;
        let phi = move |t: f64| {
            let f = bump.value(t);
            f * (1.0 - f) * (kk * t).sin()
        };
        let phi_dot = move |t: f64| {
            let f = bump.value(t);
            let df = bump.derivative(t);
            df * (1.0 - 2.0 * f) * (kk * t).sin() + f * (1.0 - f) * kk * (kk * t).cos()
        };
        let d1 = d.clone();
        let zero_anchor = {
            let d = d.clone();
            move |g: &Matrix| d(g) * 0.0
        };
        let bump_part = Section::new(move |g, t| d1(g) * phi(t), zero_anchor)
            .with_dot(move |g, t| d(g) * phi_dot(t))
            .with_flat_ends(true);
        self.add(&bump_part)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::DVector;

    #[test]
    fn simpson_oracles() {
        let grid = TimeGrid::default();
        assert_abs_diff_eq!(grid.integrate(|_| 1.0), 1.0, epsilon = 1e-14);
        let osc = grid.integrate(|t| (2.0 * PI * t).sin() * 2.0 * PI * (2.0 * PI * t).cos());
        assert_abs_diff_eq!(osc, 0.0, epsilon = 1e-12);
        let sq = grid.integrate(|t| 2.0 * PI * (2.0 * PI * t).cos().powi(2));
        assert_abs_diff_eq!(sq, PI, epsilon = 1e-8);
        assert!(TimeGrid::new(200).is_err());
        assert!(TimeGrid::new(1).is_err());
    }

    #[test]
    fn simpson_order_four() {
        let exact = (1.0f64).exp() - 1.0;
        let err = |n| (TimeGrid::new(n).unwrap().integrate(f64::exp) - exact).abs();
        assert!(err(21) / err(41) >= 12.0);
        assert!(err(41) / err(81) >= 12.0);
    }

    #[test]
    fn gauss_legendre_on_unit_interval() {
        let rule = gauss_legendre_unit(8);
        assert_abs_diff_eq!(rule.iter().map(|(_, w)| w).sum::<f64>(), 1.0, epsilon = 1e-14);
        let m: f64 = rule.iter().map(|(x, w)| w * x.powi(7)).sum();
        assert_abs_diff_eq!(m, 0.125, epsilon = 1e-14);
    }

    #[test]
    fn bump_shape() {
        for bump in [Bump::default(), Bump::with_margin(0.1)] {
            assert_eq!(bump.value(0.0), 0.0);
            assert_eq!(bump.value(1.0), 1.0);
            assert_abs_diff_eq!(bump.value(0.5), 0.5, epsilon = 1e-15);
            for &t in &[0.2, 0.37, 0.5, 0.81] {
                let fd = (bump.value(t + 1e-6) - bump.value(t - 1e-6)) / 2e-6;
                assert_abs_diff_eq!(fd, bump.derivative(t), epsilon = 1e-6);
            }
        }
        let b = Bump::with_margin(0.1);
        assert_eq!(b.value(0.05), 0.0);
        assert_eq!(b.value(0.95), 1.0);
        assert_eq!(b.derivative(0.95), 0.0);
    }

    fn sample_template(alg: &Arc<LieAlgebra>) -> Section {
        let a0 = DVector::from_vec(vec![0.3, -0.5, 0.8]);
        let d = DVector::from_vec(vec![1.0, 0.2, -0.4]);
        let v0 = DVector::from_vec(vec![-0.2, 0.7, 0.1]);
        let alg_a = alg.clone();
        let alg_v = alg.clone();
        let a: FieldFn = Arc::new(move |g| &a0 + alg_a.ad_group(g, &d) * 0.6);
        let v: FieldFn = Arc::new(move |g| &v0 + alg_v.ad_group(g, &v0) * -0.3);
        Section::template(alg, a, v, Bump::default())
    }

    #[test]
    fn template_is_quasi_periodic() {
        let alg = Arc::new(LieAlgebra::su2());
        let xi = sample_template(&alg);
        let g = alg.exp(&DVector::from_vec(vec![0.4, 1.2, -0.7]));
        assert!(xi.seam_residual(&alg, &g) < 1e-13);
        for &t in &[-2.3, -0.75, 0.1, 0.5, 1.4, 2.9] {
            let lhs = xi.extend(&alg, &g, t + 1.0);
            let rhs = alg.ad_group(&g, &xi.extend(&alg, &g, t)) + xi.anchor(&g);
            assert_abs_diff_eq!((lhs - rhs).amax(), 0.0, epsilon = 1e-10);
        }
        let back = alg.ad_group(&alg.inverse(&g), &(xi.profile(&g, 0.25) - xi.anchor(&g)));
        assert_abs_diff_eq!((xi.extend(&alg, &g, -0.75) - back).amax(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn template_derivative_matches_difference() {
        let alg = Arc::new(LieAlgebra::su2());
        let xi = sample_template(&alg);
        let g = alg.exp(&DVector::from_vec(vec![-0.4, 0.2, 0.9]));
        for &t in &[0.2, 0.5, 0.77, 1.3, -0.6] {
            let analytic = xi.time_derivative(&alg, &g, t, 1e-5);
            let numeric = xi.without_dot().time_derivative(&alg, &g, t, 1e-4);
            assert_abs_diff_eq!((analytic - numeric).amax(), 0.0, epsilon = 1e-6);
        }
    }

    #[test]
    fn constant_and_loop_sections() {
        let alg = Arc::new(LieAlgebra::so3());
        let x = DVector::from_vec(vec![0.5, -1.0, 2.0]);
        let g = alg.exp(&DVector::from_vec(vec![0.3, 0.3, 1.0]));
        let gen = Section::generator(&alg, &x);
        assert_abs_diff_eq!((gen.extend(&alg, &g, 1.5) + &x).amax(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!((gen.extend(&alg, &g, -3.2) + &x).amax(), 0.0, epsilon = 1e-12);

        // a = −x, v = Ad_g x − x gives the constant profile −x.
        let (alg1, x1) = (alg.clone(), x.clone());
        let neg = -x.clone();
        let tmpl = Section::template(
            &alg,
            Arc::new(move |_| neg.clone()),
            Arc::new(move |g| alg1.ad_group(g, &x1) - &x1),
            Bump::default(),
        );
        for &t in &[0.0, 0.3, 0.5, 1.0] {
            assert_abs_diff_eq!((tmpl.profile(&g, t) + &x).amax(), 0.0, epsilon = 1e-12);
        }

        let e1 = alg.unit(0);
        let e1b = e1.clone();
        let lp = Section::loop_at_identity(&alg, move |t| &e1 * (2.0 * PI * t).sin(), move |t| &e1b * (2.0 * PI * (2.0 * PI * t).cos()));
        let id = alg.identity();
        let fd = lp.without_dot().time_derivative(&alg, &id, 0.3, 1e-5);
        assert_abs_diff_eq!(fd[0], 2.0 * PI * (0.6 * PI).cos(), epsilon = 1e-8);
        let far = lp.extend(&alg, &id, 2.25);
        assert_abs_diff_eq!(far[0], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn interior_mode_keeps_seam() {
        let alg = Arc::new(LieAlgebra::su2());
        let xi = sample_template(&alg);
        let alg2 = alg.clone();
        let d: FieldFn = Arc::new(move |g| alg2.ad_group(g, &DVector::from_vec(vec![0.0, 1.0, 0.5])));
        let rich = xi.with_interior_mode(d, 2, Bump::default());
        let g = alg.exp(&DVector::from_vec(vec![0.1, -0.9, 0.4]));
        assert!(rich.seam_residual(&alg, &g) < 1e-13);
        let analytic = rich.time_derivative(&alg, &g, 0.4, 1e-5);
        let numeric = rich.without_dot().time_derivative(&alg, &g, 0.4, 1e-4);
        assert_abs_diff_eq!((analytic - numeric).amax(), 0.0, epsilon = 1e-6);
    }
}
