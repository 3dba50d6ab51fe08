use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use qpath::algebroid::{Algebroid, EquivariantAlgebroid, Field, Tangent};
use qpath::forms::{eta_form, eta_g_linear};
use qpath::lie::{LieAlgebra, Steps};
use qpath::lifting::varpi_form;
use qpath::path::{Section, TimeGrid};
use qpath::pullback::{
    exponential_slice, generator_row, gram_kernel, loop_velocity, project_a_prime, span_residual, ClassTwoForm,
    ConjugacyClass, EquivariantMap, PullbackAlgebroid, PullbackSection, TruncatedBasis,
};
use qpath::sampling::Sampler;
use qpath::{Context, Matrix, Vector};

fn su2_pair() -> (Context, PullbackAlgebroid) {
    let ctx = Context::with_defaults(LieAlgebra::su2());
    let tangent = ctx.tangent(2);
    (ctx.clone(), PullbackAlgebroid::new(EquivariantMap::multiplication(&ctx.alg, &tangent)))
}

fn point(s: &mut Sampler, alg: &LieAlgebra, r: usize) -> Vec<Matrix> {
    (0..r).map(|_| s.group_point(alg, 1.0)).collect()
}

/// A context with a fine grid, for high Fourier modes.
fn fine(alg: LieAlgebra) -> Context {
    Context::new(alg, Steps::default(), TimeGrid::new(4001).unwrap())
}

fn quarter_turn(alg: &LieAlgebra) -> Matrix {
    alg.exp(&Vector::from_vec(vec![0.0, 0.0, PI / 2.0]))
}

#[test]
fn maps_are_equivariant() {
    let alg = Arc::new(LieAlgebra::su2());
    let mut s = Sampler::new(60);
    let mult = EquivariantMap::multiplication(&alg, &Tangent::new(alg.clone(), 2, Steps::default()));
    let square = EquivariantMap::new(&Tangent::new(alg.clone(), 1, Steps::default()), |p| &p[0] * &p[0]);
    let k = s.group_point(&alg, 2.0);
    assert!(mult.equivariance_residual(&point(&mut s, &alg, 2), &k) < 1e-12);
    assert!(square.equivariance_residual(&point(&mut s, &alg, 1), &k) < 1e-12);
}

#[test]
fn pullback_sections_satisfy_the_seam_condition() {
    let (ctx, am) = su2_pair();
    let mut s = Sampler::new(61);
    let (a, b) = (am.sample(&mut s, ctx.bump), am.sample(&mut s, ctx.bump));
    let bracket = am.bracket(&a, &b);
    let gen = am.generator(&s.vector(&ctx.alg, 1.0));
    for _ in 0..3 {
        let p = point(&mut s, &ctx.alg, 2);
        assert!(am.seam_residual(&a, &p) < 1e-12);
        assert!(am.seam_residual(&gen, &p) < 1e-12);
        assert!(am.seam_residual(&bracket, &p) < 1e-6, "{}", am.seam_residual(&bracket, &p));
        let anchor = am.anchor_derivative(&a, &p, &|q: &Vec<Matrix>| q[0].column(0).into_owned());
        let direct = ctx.tangent(2).derivative(&|q: &[Matrix]| q[0].column(0).into_owned(), &p, &a.tangent(&p));
        assert!((anchor - direct).amax() < 1e-14);
    }
}

#[test]
fn pulled_back_generators_bracket_like_the_algebra() {
    let (ctx, am) = su2_pair();
    let mut s = Sampler::new(62);
    let (x, y) = (s.vector(&ctx.alg, 1.0), s.vector(&ctx.alg, 1.0));
    let b = am.bracket(&am.generator(&x), &am.generator(&y));
    let want = am.generator(&ctx.alg.bracket(&x, &y));
    let p = point(&mut s, &ctx.alg, 2);
    for t in [0.0, 0.5, 1.0] {
        assert!((b.profile(&p, t) - want.profile(&p, t)).amax() < 1e-8);
    }
    for (u, v) in b.tangent(&p).iter().zip(want.tangent(&p)) {
        assert!((u - v).amax() < 1e-8);
    }
}

#[test]
fn vertical_pairs_bracket_fiberwise() {
    let (ctx, am) = su2_pair();
    let mut s = Sampler::new(63);
    let (a, b) = (am.sample_loop(&mut s, ctx.bump), am.sample_loop(&mut s, ctx.bump));
    let bracket = am.bracket(&a, &b);
    let p = point(&mut s, &ctx.alg, 2);
    for t in [0.2, 0.6] {
        let want = -ctx.alg.bracket(&a.profile(&p, t), &b.profile(&p, t));
        assert!((bracket.profile(&p, t) - want).amax() < 1e-14);
    }
}

#[test]
fn pullback_bracket_satisfies_jacobi() {
    let (ctx, am) = su2_pair();
    let mut s = Sampler::new(64);
    let mut worst: f64 = 0.0;
    for _ in 0..2 {
        let [a, b, c]: [PullbackSection; 3] = std::array::from_fn(|_| am.sample(&mut s, ctx.bump));
        let jac = [
            am.bracket(&am.bracket(&a, &b), &c),
            am.bracket(&am.bracket(&b, &c), &a),
            am.bracket(&am.bracket(&c, &a), &b),
        ];
        let p = point(&mut s, &ctx.alg, 2);
        for t in [0.3, 0.8] {
            let sum = jac.iter().fold(ctx.alg.zero(), |acc, x| acc + x.profile(&p, t));
            worst = worst.max(sum.amax());
        }
        let fields: Vec<Vec<Vector>> = jac.iter().map(|x| x.tangent(&p)).collect();
        for i in 0..2 {
            worst = worst.max((&fields[0][i] + &fields[1][i] + &fields[2][i]).amax());
        }
    }
    assert!(worst < 1e-4, "{worst}");
}

#[test]
fn pullback_commutes_with_d() {
    let (ctx, am) = su2_pair();
    let mut s = Sampler::new(65);
    let atiyah = ctx.atiyah();
    let d_varpi = varpi_form(&ctx).d(&atiyah);
    let rhs = am.varpi_form(&ctx).d(&am);
    let p = point(&mut s, &ctx.alg, 2);
    let sections: Vec<Section> = (0..3).map(|_| s.section(&ctx)).collect();
    // Sections of A_M that are Φ-related to sections of A: X = (v∘Φ, 0).
    let pulled: Vec<PullbackSection> = sections
        .iter()
        .map(|xi| {
            let (x1, zero) = (xi.clone(), ctx.alg.zero());
            let field: Field = Arc::new(move |q: &[Matrix]| vec![x1.anchor(&(&q[0] * &q[1])), zero.clone()]);
            am.pull_section(xi, field)
        })
        .collect();
    for x in &pulled {
        assert!(am.seam_residual(x, &p) < 1e-10);
    }
    let (l, r) = (d_varpi.value(&am.map.value(&p), &sections), rhs.value(&p, &pulled));
    assert!(l.abs() > 1e-3, "degenerate sample");
    assert!((l - r).abs() < 1e-4, "{l} vs {r}");

    // On pointwise forms the pullback is evaluation on the fibers.
    let v = varpi_form(&ctx);
    let (a, b) = (v.value(&am.map.value(&p), &sections[..2]), am.pullback_atiyah(&v).value(&p, &pulled[..2]));
    assert!((a - b).abs() < 1e-12);
}

#[test]
fn pulled_back_varpi_is_a_primitive_of_eta_g() {
    let (ctx, am) = su2_pair();
    let mut s = Sampler::new(66);
    let varpi_m = am.varpi_form(&ctx);
    let eta3 = am.pullback_tangent(&eta_form(&ctx.alg, 0));
    for _ in 0..2 {
        let p = point(&mut s, &ctx.alg, 2);
        let args: Vec<PullbackSection> = (0..3).map(|_| am.sample(&mut s, ctx.bump)).collect();
        let (l, r) = (varpi_m.d(&am).value(&p, &args), eta3.value(&p, &args));
        assert!(r.abs() > 1e-3, "degenerate sample");
        assert!((l - r).abs() < 1e-4, "{l} vs {r}");

        let x = s.vector(&ctx.alg, 1.0);
        let xi = am.sample(&mut s, ctx.bump);
        let contracted = -varpi_m.value(&p, &[am.generator(&x), xi.clone()]);
        let linear = am.pullback_tangent(&eta_g_linear(&ctx.alg, 0, &x)).value(&p, &[xi]);
        assert!((contracted - linear).abs() < 1e-5, "{contracted} vs {linear}");
    }
}

#[test]
fn projection_onto_paths_based_at_zero() {
    let (ctx, am) = su2_pair();
    let mut s = Sampler::new(67);
    let p = point(&mut s, &ctx.alg, 2);
    let x = s.vector(&ctx.alg, 1.0);
    let q_gen = am.project(&am.generator(&x));
    assert!(q_gen.profile(&p, 0.4).amax() < 1e-15);
    assert!(q_gen.tangent(&p).iter().all(|v| v.amax() < 1e-14));

    let xi = am.sample(&mut s, ctx.bump);
    let q = am.project(&xi);
    assert!(q.profile(&p, 0.0).amax() == 0.0);
    assert!(am.seam_residual(&q, &p) < 1e-12);

    let g = s.group_point(&ctx.alg, 1.0);
    let gen = project_a_prime(&ctx.alg, &Section::generator(&ctx.alg, &x));
    assert!(gen.profile(&g, 0.7).amax() < 1e-15 && gen.anchor(&g).amax() < 1e-14);
    let based = Section::template(&ctx.alg, Arc::new(|_| Vector::zeros(3)), s.field(&ctx.alg), ctx.bump);
    let projected = project_a_prime(&ctx.alg, &based);
    for t in [0.0, 0.3, 0.9] {
        assert_eq!(projected.profile(&g, t), based.profile(&g, t));
    }
    assert!((projected.anchor(&g) - based.anchor(&g)).amax() < 1e-15);
}

#[test]
fn projected_subalgebroids_stay_closed() {
    let ctx = Context::with_defaults(LieAlgebra::su2());
    let atiyah = ctx.atiyah();
    let mut s = Sampler::new(68);
    let shift = 0.3;
    let slice: Vec<Section> = (0..3).map(|i| exponential_slice(&ctx.alg, &ctx.alg.unit(i), shift)).collect();
    let projected: Vec<Section> = slice.iter().map(|x| project_a_prime(&ctx.alg, x)).collect();
    let g = s.group_point(&ctx.alg, 0.8);

    for x in &slice {
        assert!(x.seam_residual(&ctx.alg, &g) < 1e-10);
    }
    let gens: Vec<Section> = (0..3).map(|i| Section::generator(&ctx.alg, &ctx.alg.unit(i))).collect();
    let mut all = slice.clone();
    all.extend(gens);
    for (i, x) in all.iter().enumerate() {
        let rest: Vec<Section> = all.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, y)| y.clone()).collect();
        assert!(span_residual(x, &rest, &g, 40) > 1e-2, "slice is not transverse to the generators");
    }

    let mut worst: f64 = 0.0;
    for i in 0..3 {
        for j in (i + 1)..3 {
            worst = worst.max(span_residual(&atiyah.bracket(&slice[i], &slice[j]), &slice, &g, 40));
            worst = worst.max(span_residual(&atiyah.bracket(&projected[i], &projected[j]), &projected, &g, 40));
        }
    }
    assert!(worst < 1e-6, "{worst}");

    let generic: Vec<Section> = (0..3).map(|_| project_a_prime(&ctx.alg, &s.section(&ctx))).collect();
    let off = span_residual(&atiyah.bracket(&generic[0], &generic[1]), &generic, &g, 40);
    assert!(off > 1e-2, "control bracket unexpectedly closed: {off}");
}

#[test]
fn ghjw_sign_is_fixed_by_the_oracle() {
    let alg = Arc::new(LieAlgebra::su2());
    let class = ConjugacyClass::new(&alg, quarter_turn(&alg));
    let mut s = Sampler::new(69);
    let omega = ClassTwoForm::calibrate(&class, &mut s, 8, 1e-4).unwrap();
    assert_eq!(omega.sign, 1.0);
    assert!(omega.oracle_residual(&mut s, 8) < 1e-10);
    let wrong = ClassTwoForm { class: class.clone(), sign: -omega.sign };
    assert!(wrong.oracle_residual(&mut s, 8) > 1e-2);

    let g = quarter_turn(&alg);
    let (e1, e2) = (alg.unit(0), alg.unit(1));
    let w = omega.value(&g, &class.generator(&g, &e1), &class.generator(&g, &e2));
    assert!((w.abs() - 1.0).abs() < 1e-12);
    let ctx = Context::with_defaults(LieAlgebra::su2());
    let v = qpath::lifting::varpi(&ctx, &Section::generator(&alg, &e1), &Section::generator(&alg, &e2), &g);
    assert!((w + v).abs() < 1e-10, "{w} vs {v}");

    let minus_one = -alg.identity();
    let central = ClassTwoForm { class: ConjugacyClass::new(&alg, minus_one.clone()), sign: 1.0 };
    assert!(central.class.tangent_basis(&minus_one).is_empty());
    assert_eq!(central.value(&minus_one, &alg.zero(), &alg.zero()), 0.0);
}

#[test]
fn kernel_is_the_generators_on_a_conjugacy_class() {
    let start = Instant::now();
    let ctx = fine(LieAlgebra::su2());
    let class = ConjugacyClass::new(&ctx.alg, quarter_turn(&ctx.alg));
    let mut s = Sampler::new(70);
    let omega = ClassTwoForm::calibrate(&class, &mut s, 8, 1e-4).unwrap();
    let g = class.point(&s.group_point(&ctx.alg, 2.0));
    for n_max in [4, 6, 8] {
        let basis = TruncatedBasis::new(&class, &g, n_max).unwrap();
        assert!(basis.seam_residual(&ctx.alg) < 1e-12);
        for threshold in [1e-7, 1e-8, 1e-9] {
            let kernel = gram_kernel(&ctx, &omega, &basis, threshold).unwrap();
            assert_eq!(kernel.dimension, 3, "n_max {n_max}, threshold {threshold}");
            assert!(kernel.antisymmetry < 1e-6);
            for v in &kernel.vectors {
                assert!(loop_velocity(&ctx, &basis, v) < 1e-4);
            }
        }
        for i in 0..3 {
            let row = generator_row(&ctx, &omega, &basis, &ctx.alg.unit(i));
            let worst = row.iter().fold(0.0f64, |m, r| m.max(r.abs()));
            assert!(worst < 1e-5, "generator {i}: {worst}");
        }
    }
    assert!(start.elapsed().as_secs() < 120);
}

#[test]
fn abelian_kernel_is_the_constants() {
    let ctx = fine(LieAlgebra::torus2());
    let g = ctx.alg.exp(&Vector::from_vec(vec![0.7, -1.1]));
    let class = ConjugacyClass::new(&ctx.alg, g.clone());
    let omega = ClassTwoForm { class: class.clone(), sign: 1.0 };
    let basis = TruncatedBasis::new(&class, &g, 4).unwrap();
    assert!(basis.elements.iter().all(|e| !e.label.starts_with("generator")));
    let kernel = gram_kernel(&ctx, &omega, &basis, 1e-8).unwrap();
    assert_eq!(kernel.dimension, 2);
    for v in &kernel.vectors {
        assert!(loop_velocity(&ctx, &basis, v) < 1e-8);
    }
}

#[test]
fn abelian_class_is_a_point_and_passes_the_oracle() {
    let alg = Arc::new(LieAlgebra::torus2());
    let class = ConjugacyClass::new(&alg, alg.exp(&Vector::from_vec(vec![0.0, PI / 2.0])));
    let mut s = Sampler::new(71);
    let g = class.point(&s.group_point(&alg, 2.0));
    assert!(class.tangent_basis(&g).is_empty());
    let omega = ClassTwoForm::calibrate(&class, &mut s, 8, 1e-4).unwrap();
    assert!(omega.oracle_residual(&mut s, 8) < 1e-12);
}

#[test]
fn degenerate_form_is_rejected() {
    let ctx = Context::with_defaults(LieAlgebra::heisenberg3());
    let g = ctx.alg.exp(&Vector::from_vec(vec![0.3, 0.2, 0.1]));
    let class = ConjugacyClass::new(&ctx.alg, g.clone());
    assert!(TruncatedBasis::new(&class, &g, 2).is_err());
}
