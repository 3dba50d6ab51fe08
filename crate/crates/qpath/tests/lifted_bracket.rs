use qpath::atiyah::ConnectionFamily;
use qpath::lie::LieAlgebra;
use qpath::obstruction::{
    equivariant_generator_residual, obstruction_pairing_from_data, GaugeChange, LiftedAlgebroid, LiftedSection,
    OmegaForm,
};
use qpath::path::Bump;
use qpath::sampling::Sampler;
use qpath::{Context, Matrix, Vector};

const TIMES: [f64; 4] = [0.1, 0.37, 0.5, 0.81];

fn lifted(s: &mut Sampler, ctx: &Context) -> LiftedSection {
    LiftedSection::new(s.loop_section(ctx), s.scalar_function(&ctx.alg), s.field(&ctx.alg))
}

fn triple(s: &mut Sampler, ctx: &Context) -> [LiftedSection; 3] {
    [lifted(s, ctx), lifted(s, ctx), lifted(s, ctx)]
}

fn jacobi_with_primitive(alg: LieAlgebra, seed: u64, samples: usize) {
    let ctx = Context::with_defaults(alg);
    let fam = ConnectionFamily::standard(&ctx.alg, Bump::default());
    let hat = LiftedAlgebroid::new(&ctx, &fam, OmegaForm::poincare(&ctx.alg, 16));
    let mut s = Sampler::new(seed);
    for _ in 0..samples {
        // Exponential chart: |u| stays well inside the injectivity radius.
        let g = s.group_point(&ctx.alg, 0.5);
        let [a, b, c] = triple(&mut s, &ctx);
        let jac = hat.jacobiator(&a, &b, &c, &g, &TIMES);
        assert!(jac.max_abs() < 1e-4, "{}: {jac:?}", ctx.alg.name());
    }
}

#[test]
fn heisenberg_jacobi_with_poincare_primitive() {
    jacobi_with_primitive(LieAlgebra::heisenberg3(), 41, 8);
}

#[test]
fn su2_chart_jacobi_with_poincare_primitive() {
    jacobi_with_primitive(LieAlgebra::su2(), 42, 3);
}

fn jacobiator_is_obstruction(alg: LieAlgebra, seed: u64, omega: impl Fn(&Context) -> OmegaForm) -> f64 {
    let ctx = Context::with_defaults(alg);
    let fam = ConnectionFamily::invariant(&ctx.alg, 0.3, -0.2, Bump::default());
    let omega = omega(&ctx);
    let hat = LiftedAlgebroid::new(&ctx, &fam, omega.clone());
    let mut s = Sampler::new(seed);
    let g: Matrix = s.group_point(&ctx.alg, 0.5);
    let [a, b, c] = triple(&mut s, &ctx);
    let jac = hat.jacobiator(&a, &b, &c, &g, &TIMES);
    let v: Vec<Vector> = [&a, &b, &c].iter().map(|x| (x.tangent)(&g)).collect();
    let pairing = obstruction_pairing_from_data(&ctx, &omega, &fam, &g, [&v[0], &v[1], &v[2]]);
    assert!(jac.body < 1e-6 && jac.tangent < 1e-6, "{jac:?}");
    assert!((jac.scalar + pairing).abs() < 1e-4, "{} vs {}", jac.scalar, -pairing);
    pairing
}

#[test]
fn heisenberg_jacobiator_without_primitive() {
    jacobiator_is_obstruction(LieAlgebra::heisenberg3(), 43, |_| OmegaForm::zero());
}

#[test]
fn su2_jacobiator_measures_obstruction() {
    let p = jacobiator_is_obstruction(LieAlgebra::su2(), 44, |_| OmegaForm::zero());
    assert!(p.abs() > 1e-3, "obstruction should be visible, got {p}");
    jacobiator_is_obstruction(LieAlgebra::su2(), 45, |ctx| OmegaForm::poincare(&ctx.alg, 16));
}

#[test]
fn generator_condition_at_fixed_point_and_generic_points() {
    let ctx = Context::with_defaults(LieAlgebra::su2());
    let omega = OmegaForm::poincare(&ctx.alg, 16);
    let fam = ConnectionFamily::standard(&ctx.alg, Bump::default());
    let mut s = Sampler::new(46);
    let mut points = vec![ctx.alg.identity()];
    points.extend((0..3).map(|_| s.group_point(&ctx.alg, 0.6)));
    for g in points {
        let (x, v) = (s.vector(&ctx.alg, 1.0), s.vector(&ctx.alg, 1.0));
        let r = equivariant_generator_residual(&ctx, &omega, &fam, &x, &g, &v).unwrap();
        assert!(r.abs() < 1e-4, "{r}");
    }
    let torus = Context::with_defaults(LieAlgebra::torus2());
    let flat = ConnectionFamily::standard(&torus.alg, Bump::default());
    let (e1, e2) = (torus.alg.unit(0), torus.alg.unit(1));
    let z = equivariant_generator_residual(&torus, &OmegaForm::zero(), &flat, &e1, &torus.alg.exp(&e2), &e2).unwrap();
    assert!(z.abs() < 1e-12, "{z}");
}

fn sample_change(s: &mut Sampler, ctx: &Context, scale: f64) -> GaugeChange {
    let alg = ctx.alg.clone();
    let (b0, b1) = (s.vector(&alg, scale), s.vector(&alg, scale));
    let m = qpath::Matrix::from_fn(alg.dim(), alg.dim(), |_, _| s.uniform(-scale, scale));
    let k = s.uniform(-scale, scale);
    let (a1, a2) = (alg.clone(), alg.clone());
    GaugeChange::new(
        move |g, t| &b0 + a1.ad_group(g, &b1) * (2.0 * std::f64::consts::PI * t).cos(),
        move |g, v| &m * v + a2.ad_group(g, v) * k,
    )
}

#[test]
fn gauge_change_shifts_eta_by_exact_form() {
    let ctx = Context::with_defaults(LieAlgebra::su2());
    let atiyah = ctx.atiyah();
    let fam = ConnectionFamily::invariant(&ctx.alg, 0.4, 0.1, Bump::default());
    let mut s = Sampler::new(47);
    let change = sample_change(&mut s, &ctx, 0.5);
    let defect = change.defect_form(&ctx, &fam).d(&atiyah);
    let g = s.group_point(&ctx.alg, 0.8);
    let args = [s.section(&ctx), s.section(&ctx), s.section(&ctx)];
    let r = defect.value(&g, &args);
    assert!(r.abs() < 1e-4, "{r}");
}

#[test]
fn trivial_gauge_change_has_no_gamma() {
    let ctx = Context::with_defaults(LieAlgebra::su2());
    let fam = ConnectionFamily::standard(&ctx.alg, Bump::default());
    let zero = ctx.alg.zero();
    let z2 = zero.clone();
    let change = GaugeChange::new(move |_, _| zero.clone(), move |_, _| z2.clone());
    let mut s = Sampler::new(48);
    let g = s.group_point(&ctx.alg, 0.8);
    let (a, b) = (s.section(&ctx), s.section(&ctx));
    assert!(change.gamma_precursor(&ctx, &fam, &a, &b, &g).abs() < 1e-12);
}

#[test]
fn gamma_without_lambda_is_minus_beta_of_curvature() {
    let ctx = Context::with_defaults(LieAlgebra::su2());
    let fam = ConnectionFamily::invariant(&ctx.alg, 0.4, 0.1, Bump::default());
    let mut s = Sampler::new(49);
    let b0 = s.vector(&ctx.alg, 1.0);
    let zero = ctx.alg.zero();
    let bb = b0.clone();
    let change = GaugeChange::new(move |_, _| bb.clone(), move |_, _| zero.clone());
    let g = s.group_point(&ctx.alg, 0.8);
    let (a, b) = (s.section(&ctx), s.section(&ctx));
    let (va, vb) = (a.anchor(&g), b.anchor(&g));
    let expected = -ctx.grid.integrate(|t| ctx.alg.dot(&b0, &fam.curvature(t, &g, &va, &vb, ctx.steps)));
    let got = change.gamma_precursor(&ctx, &fam, &a, &b, &g);
    assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
}
