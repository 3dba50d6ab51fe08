use std::sync::Arc;

use qpath::algebroid::{EquivariantAlgebroid, Field, Tangent};
use qpath::atiyah::{curvature_form, ConnectionFamily};
use qpath::chern_simons::{cs, lambda_pullback, GaugeMap, OneFormFamily};
use qpath::forms::{eta_form, scalar, Form, MixedForm};
use qpath::forms::equivariant_d;
use qpath::lie::{richardson, LieAlgebra, Steps};
use qpath::path::{gauss_legendre_unit, Bump};
use qpath::sampling::Sampler;
use qpath::Matrix;

fn su2() -> Arc<LieAlgebra> {
    Arc::new(LieAlgebra::su2())
}

fn point(s: &mut Sampler, alg: &LieAlgebra, factors: usize) -> Vec<Matrix> {
    (0..factors).map(|_| s.group_point(alg, 1.0)).collect()
}

fn args(s: &mut Sampler, alg: &LieAlgebra, factors: usize, n: usize) -> Vec<Field> {
    (0..n).map(|_| s.tangent_vector(alg, factors)).collect()
}

/// A gauge-periodic family on `G × G` with gauge map `pr₁`.
fn family(s: &mut Sampler, alg: &Arc<LieAlgebra>, gauge: GaugeMap<Tangent>) -> OneFormFamily<Tangent> {
    let base = s.one_form(alg, 0).add(&s.one_form(alg, 1));
    OneFormFamily::interpolating(alg, base, gauge, Bump::with_margin(0.1))
}

/// `∫₀¹ f(t) dt` with 8 panels of 16 Gauss–Legendre nodes.
fn integrate(f: impl Fn(f64) -> f64) -> f64 {
    let gl = gauss_legendre_unit(16);
    (0..8).flat_map(|k| gl.iter().map(move |&(s, w)| ((k as f64 + s) / 8.0, w / 8.0))).map(|(t, w)| w * f(t)).sum()
}

#[test]
fn families_are_gauge_periodic() {
    let alg = su2();
    let mut s = Sampler::new(20);
    let fam = family(&mut s, &alg, GaugeMap::projection(&alg, 0));
    let g = point(&mut s, &alg, 2);
    let v = args(&mut s, &alg, 2, 1);
    for t in [-0.7, 0.0, 0.3, 1.0, 1.6] {
        assert!(fam.periodicity_residual(t, &g, &v) < 1e-12);
    }
    let conn = OneFormFamily::from_connection(&ConnectionFamily::invariant(&alg, 0.4, -0.2, Bump::default()));
    let g = point(&mut s, &alg, 1);
    let v = args(&mut s, &alg, 1, 1);
    for t in [-0.4, 0.25, 0.9] {
        assert!(conn.periodicity_residual(t, &g, &v) < 1e-12);
    }
}

#[test]
fn transgression_formula() {
    let alg = su2();
    let tangent = Tangent::new(alg.clone(), 2, Steps::default());
    let mut s = Sampler::new(21);
    let fam = family(&mut s, &alg, GaugeMap::on_tangent(&tangent, |p| &p[0] * &p[1]));
    let g = point(&mut s, &alg, 2);
    let v = args(&mut s, &alg, 2, 3);
    for t in [0.3, 0.55] {
        let lhs = richardson(|h| scalar(cs(&fam.value(t + h), &tangent, &alg).value(&g, &v)), 1e-3)[0];
        let (b, bd) = (fam.value(t), fam.dot(t));
        let rhs = bd
            .dot_wedge(&curvature_form(&b, &tangent, &alg), &alg)
            .sub(&b.dot_wedge(&bd, &alg).d(&tangent).scale(0.5));
        assert!(lhs.abs() > 1e-3, "degenerate sample");
        assert!((lhs - rhs.value(&g, &v)).abs() < 1e-4, "{lhs} vs {}", rhs.value(&g, &v));
    }
}

#[test]
fn chern_simons_form_of_gauge_periodic_family() {
    let alg = su2();
    let tangent = Tangent::new(alg.clone(), 2, Steps::default());
    let mut s = Sampler::new(22);
    let fam = family(&mut s, &alg, GaugeMap::on_tangent(&tangent, |p| &p[0] * &p[1]));
    let g = point(&mut s, &alg, 2);
    let v = args(&mut s, &alg, 2, 3);
    let lhs = integrate(|t| fam.dot(t).dot_wedge(&curvature_form(&fam.value(t), &tangent, &alg), &alg).value(&g, &v));
    let q = fam.q_functional(8);
    let rhs = fam.gauge().pullback_eta(&alg).value(&g, &v) + q.d(&tangent).value(&g, &v);
    assert!(lhs.abs() > 1e-3, "degenerate sample");
    assert!((lhs - rhs).abs() < 1e-4, "{lhs} vs {rhs}");
}

#[test]
fn equivariant_chern_simons_form() {
    let alg = su2();
    let tangent = Tangent::new(alg.clone(), 1, Steps::default());
    let mut s = Sampler::new(23);
    let fam = OneFormFamily::from_connection(&ConnectionFamily::invariant(&alg, 0.4, -0.2, Bump::default()));
    let x = s.vector(&alg, 1.0);
    let gen = tangent.generator(&x);
    let g = point(&mut s, &alg, 1);
    let q = MixedForm::single(fam.q_functional(8));
    let dq = equivariant_d(&tangent, &q, &x);
    let eta_g = fam.gauge().pullback_eta_g(&alg, &x);

    let v1 = args(&mut s, &alg, 1, 1);
    let lhs1 = integrate(|t| {
        let (b, bd) = (fam.value(t), fam.dot(t));
        let zero = &x - b.eval(&g, std::slice::from_ref(&gen));
        alg.dot(&bd.eval(&g, &v1), &zero)
    });
    let rhs1 = eta_g.part(1).unwrap().value(&g, &v1) + dq.part(1).unwrap().value(&g, &v1);
    assert!((lhs1 - rhs1).abs() < 1e-6, "{lhs1} vs {rhs1}");

    let v3 = args(&mut s, &alg, 1, 3);
    let lhs3 = integrate(|t| fam.dot(t).dot_wedge(&curvature_form(&fam.value(t), &tangent, &alg), &alg).value(&g, &v3));
    let rhs3 = eta_form(&alg, 0).value(&g, &v3) + dq.part(3).unwrap().value(&g, &v3);
    assert!((lhs3 - rhs3).abs() < 1e-4, "{lhs3} vs {rhs3}");
}

fn q_gap(a: &Form<Tangent>, b: &Form<Tangent>, g: &Vec<Matrix>, v: &[Field]) -> f64 {
    (a.value(g, v) - b.value(g, v)).abs()
}

#[test]
fn q_is_reparametrization_invariant() {
    let alg = su2();
    let mut s = Sampler::new(24);
    let fam = family(&mut s, &alg, GaugeMap::projection(&alg, 0));
    let tau = std::f64::consts::TAU;
    for (shift, wobble) in [(0.0, 0.5), (0.3, 0.4), (0.8, -0.6)] {
        let moved = fam.reparametrized(
            move |t| t + shift + wobble * (tau * t).sin() / tau,
            move |t| 1.0 + wobble * (tau * t).cos(),
        );
        let g = point(&mut s, &alg, 2);
        let v = args(&mut s, &alg, 2, 2);
        let q = fam.q_functional(8);
        assert!(q.value(&g, &v).abs() > 1e-3, "degenerate sample");
        assert!(q_gap(&moved.q_functional(8), &q, &g, &v) < 1e-6);
    }
}

#[test]
fn q_changes_sign_under_inversion() {
    let alg = su2();
    let mut s = Sampler::new(25);
    let fam = family(&mut s, &alg, GaugeMap::projection(&alg, 0));
    let g = point(&mut s, &alg, 2);
    let v = args(&mut s, &alg, 2, 2);
    let q = fam.q_functional(8);
    assert!(q.value(&g, &v).abs() > 1e-3, "degenerate sample");
    assert!(q_gap(&fam.inverted().q_functional(8), &q.scale(-1.0), &g, &v) < 1e-6);
}

#[test]
fn q_under_concatenation() {
    let alg = su2();
    let mut s = Sampler::new(26);
    let (pr1, pr2) = (GaugeMap::projection(&alg, 0), GaugeMap::projection(&alg, 1));
    let first = family(&mut s, &alg, pr1.clone());
    let second = OneFormFamily::interpolating(&alg, first.value(1.0), pr2.clone(), Bump::with_margin(0.1));
    let g = point(&mut s, &alg, 2);
    let probe = args(&mut s, &alg, 2, 1);
    let joined = OneFormFamily::concatenate(&first, &second, (&g, &probe), 1e-12).unwrap();
    let sum = first.q_functional(8).add(&second.q_functional(8));
    let q = joined.q_functional(8);
    for _ in 0..3 {
        let g = point(&mut s, &alg, 2);
        let v = args(&mut s, &alg, 2, 2);
        // The λ-term pairs Φ″*θ^L with Φ′*θ^R, matching the product Φ″Φ′.
        let lambda = lambda_pullback(&pr2, &pr1, &alg);
        assert!(q_gap(&q, &sum.add(&lambda), &g, &v) < 1e-6);
        let swapped = lambda_pullback(&pr1, &pr2, &alg);
        assert!(q_gap(&q, &sum.add(&swapped), &g, &v) > 1e-3);
    }

    let other = family(&mut s, &alg, pr2);
    assert!(OneFormFamily::concatenate(&first, &other, (&g, &probe), 1e-8).is_err());
}

#[test]
fn trivial_family_has_zero_q() {
    let alg = su2();
    let mut s = Sampler::new(27);
    let z = alg.zero();
    let zero: Form<Tangent> = Form::new(1, move |_: &Vec<Matrix>, _: &[Field]| z.clone());
    let fam = OneFormFamily::interpolating(&alg, zero, GaugeMap::identity(&alg), Bump::default());
    let g = point(&mut s, &alg, 1);
    let v = args(&mut s, &alg, 1, 2);
    assert_eq!(fam.q_functional(4).value(&g, &v), 0.0);
}
