//! Bott forms, Chern–Simons forms, the Q-functional and the forms built
//! from an invariant polynomial on `A`.

use std::f64::consts::TAU;
use std::sync::Arc;

use qpath::algebroid::{EquivariantAlgebroid, Field, Tangent};
use qpath::atiyah::{curvature_form, ConnectionFamily};
use qpath::bott::{BottContext, ConventionTable};
use qpath::chern_simons::{cs, cs_g, lambda_pullback, GaugeMap, OneFormFamily};
use qpath::forms::{equivariant_d, eta_form, eta_g, eta_g_linear, maurer_cartan_form, pullback_anchor, scalar};
use qpath::forms::{Form, MixedForm};
use qpath::higher::{calibrate_conventions, cubic_proportionality, eta_p_g, CubicCheck, HigherForms};
use qpath::lie::{richardson, InvariantPolynomial, LieAlgebra, Side};
use qpath::lifting::{pairing_dot, varpi};
use qpath::path::{gauss_legendre_unit, Bump, Section};
use qpath::sampling::Sampler;
use qpath::{Error, Matrix, Result, Vector};

use crate::check::{Check, Outcome, Probe, Worst};
use crate::config::Suite::Bott as S;

pub fn checks() -> Vec<Check> {
    vec![
        Check {
            suite: S,
            name: "conventions",
            anchor: "sign table recomputed from η^p = η, CS = ±Υ^p(0,β), Stokes and d_G ϖ^p_G = a*η^p_G",
            tolerance: 0.0,
            run: conventions,
        },
        Check { suite: S, name: "eta_p", anchor: "Υ^p(0, θ^L) = η for p = ½x·x", tolerance: 1e-6, run: eta_p },
        Check { suite: S, name: "cs_bott", anchor: "CS(β) = −Υ^p(0, β)", tolerance: 1e-6, run: cs_bott },
        Check { suite: S, name: "flat", anchor: "Υ^p(θ^L) = 0 in degree 4", tolerance: 1e-6, run: flat },
        Check {
            suite: S,
            name: "stokes_1",
            anchor: "d Υ^p(β₀,β₁) = Υ^p(β₁) − Υ^p(β₀)",
            tolerance: 1e-4,
            run: stokes_1,
        },
        Check {
            suite: S,
            name: "stokes_2",
            anchor: "d Υ^p(β₀,β₁,β₂) = Υ^p(β₁,β₂) − Υ^p(β₀,β₂) + Υ^p(β₀,β₁)",
            tolerance: 1e-4,
            run: stokes_2,
        },
        Check {
            suite: S,
            name: "gauge_invariance",
            anchor: "Υ^p(Φ•β₀, Φ•β₁) = Υ^p(β₀, β₁)",
            tolerance: 1e-5,
            run: gauge_invariance,
        },
        Check { suite: S, name: "cs_primitive", anchor: "d CS(β) = ½ F_β·F_β", tolerance: 1e-4, run: cs_primitive },
        Check {
            suite: S,
            name: "cs_gauge_law",
            anchor: "CS(Φ•β) = CS(β) + Φ*η − ½ d(β·Φ*θ^L)",
            tolerance: 1e-4,
            run: cs_gauge_law,
        },
        Check {
            suite: S,
            name: "cs_gauge_law_equivariant",
            anchor: "CS_G(Φ•β) = CS_G(β) + Φ*η_G − ½ d_G(β·Φ*θ^L)",
            tolerance: 1e-4,
            run: cs_gauge_law_equivariant,
        },
        Check {
            suite: S,
            name: "transgression",
            anchor: "∂_t CS(β_t) = β̇_t·F_{β_t} − ½ d(β_t·β̇_t)",
            tolerance: 1e-4,
            run: transgression,
        },
        Check {
            suite: S,
            name: "cs_form",
            anchor: "∫₀¹ β̇_t·F_{β_t} dt = Φ*η + d Q for a gauge-periodic family",
            tolerance: 1e-4,
            run: cs_form,
        },
        Check {
            suite: S,
            name: "cs_form_equivariant",
            anchor: "∫₀¹ β̇_t·F^G_{β_t} dt = Φ*η_G + d_G Q",
            tolerance: 1e-4,
            run: cs_form_equivariant,
        },
        Check {
            suite: S,
            name: "q_reparametrization",
            anchor: "Q is invariant under reparametrization",
            tolerance: 1e-6,
            run: q_reparametrization,
        },
        Check { suite: S, name: "q_inversion", anchor: "Q(β̄) = −Q(β)", tolerance: 1e-6, run: q_inversion },
        Check {
            suite: S,
            name: "q_concatenation",
            anchor: "Q(β″ * β′) = Q(β″) + Q(β′) + λ(Φ″, Φ′)",
            tolerance: 1e-6,
            run: q_concatenation,
        },
        Check {
            suite: S,
            name: "eta_p_g",
            anchor: "Υ^p_G(0, θ^L) = η_G and d_G η^p_G = 0",
            tolerance: 1e-4,
            run: eta_p_g_check,
        },
        Check {
            suite: S,
            name: "upsilon_kappa",
            anchor: "Υ^p_G(0,κ₁) − Υ^p_G(0,κ₀) = d_G I^p_G({κ_t})",
            tolerance: 1e-3,
            run: upsilon_kappa,
        },
        Check {
            suite: S,
            name: "varpi_p_eta",
            anchor: "d_G ϖ^p_G = a*η^p_G",
            tolerance: 1e-3,
            run: varpi_p_eta,
        },
        Check {
            suite: S,
            name: "varpi_p_quadratic",
            anchor: "ϖ^p_G = ϖ for p = ½x·x",
            tolerance: 1e-5,
            run: varpi_p_quadratic,
        },
        Check {
            suite: S,
            name: "pressley_segal",
            anchor: "σ^p(ξ, ζ) = ∫₀¹ ξ̇·ζ on loops at e",
            tolerance: 1e-6,
            run: pressley_segal,
        },
        Check {
            suite: S,
            name: "pressley_segal_closed",
            anchor: "d_CE σ^p = 0 on loops at e",
            tolerance: 1e-4,
            run: pressley_segal_closed,
        },
        Check {
            suite: S,
            name: "cubic",
            anchor: "I^p({κ_t}) is proportional to ∫ Σ sgn p(κ, κ̇, [κ,κ]) for cubic p",
            tolerance: 1e-6,
            run: cubic,
        },
    ]
}

struct Setup {
    alg: Arc<LieAlgebra>,
    tangent: Tangent,
    bott: BottContext<Tangent>,
    p: InvariantPolynomial,
}

fn setup(probe: &Probe, factors: usize) -> Setup {
    let alg = probe.ctx.alg.clone();
    let tangent = probe.ctx.tangent(factors);
    let bott = BottContext::new(&alg, tangent.clone(), ConventionTable::standard());
    let p = InvariantPolynomial::half_square(&alg);
    Setup { alg, tangent, bott, p }
}

fn zero_form(alg: &LieAlgebra) -> Form<Tangent> {
    let z = alg.zero();
    Form::new(1, move |_: &Vec<Matrix>, _: &[Field]| z.clone())
}

/// A 1-form on `G × G` mixing both factors.
fn mixed_form(p: &mut Probe) -> Form<Tangent> {
    let alg = p.ctx.alg.clone();
    p.rng.one_form(&alg, 0).add(&p.rng.one_form(&alg, 1))
}

fn twist(tangent: &Tangent) -> GaugeMap<Tangent> {
    GaugeMap::on_tangent(tangent, |p| &p[0] * &p[1] * &p[0])
}

fn conventions(_: &mut Probe) -> Result<Outcome> {
    let found = calibrate_conventions()?;
    let standard = ConventionTable::standard();
    if found != standard {
        return Err(Error::OracleAbort(format!("calibrated table {found:?} differs from {standard:?}")));
    }
    Ok(Outcome::residual(0.0))
}

fn eta_p(p: &mut Probe) -> Result<Outcome> {
    let su = setup(p, 1);
    let up = su.bott.bott(&su.p, &[zero_form(&su.alg), maurer_cartan_form(&su.alg, Side::Left, 0)], None, 3)?;
    let eta = eta_form(&su.alg, 0);
    let mut worst = Worst::default();
    for _ in 0..p.samples {
        let g = p.points(1, 1.0);
        let v = p.tangent_args(1, 3);
        worst.see(up.value(&g, &v) - eta.value(&g, &v));
    }
    Ok(worst.outcome())
}

fn cs_bott(p: &mut Probe) -> Result<Outcome> {
    let su = setup(p, 2);
    let sign = su.bott.conventions.cs_sign;
    let mut worst = Worst::default();
    for _ in 0..p.samples {
        let beta = mixed_form(p);
        let up = su.bott.bott(&su.p, &[zero_form(&su.alg), beta.clone()], None, 3)?;
        let c = cs(&beta, &su.tangent, &su.alg);
        let g = p.points(2, 1.0);
        let v = p.tangent_args(2, 3);
        worst.see(c.value(&g, &v) - sign * up.value(&g, &v));
    }
    Ok(worst.outcome())
}

fn flat(p: &mut Probe) -> Result<Outcome> {
    let su = setup(p, 1);
    let up = su.bott.bott(&su.p, &[maurer_cartan_form(&su.alg, Side::Left, 0)], None, 4)?;
    let mut worst = Worst::default();
    for _ in 0..p.samples {
        let g = p.points(1, 1.0);
        let v = p.tangent_args(1, 4);
        worst.see(up.value(&g, &v));
    }
    Ok(worst.outcome())
}

fn stokes_1(p: &mut Probe) -> Result<Outcome> {
    let su = setup(p, 2);
    let mut worst = Worst::default();
    for _ in 0..p.samples {
        let b = [mixed_form(p), mixed_form(p)];
        let lhs = su.bott.bott(&su.p, &b, None, 3)?.d(&su.tangent);
        let r1 = su.bott.bott(&su.p, &b[1..], None, 4)?;
        let r0 = su.bott.bott(&su.p, &b[..1], None, 4)?;
        let g = p.points(2, 1.0);
        let v = p.tangent_args(2, 4);
        worst.see(lhs.value(&g, &v) - (r1.value(&g, &v) - r0.value(&g, &v)));
    }
    Ok(worst.outcome())
}

fn stokes_2(p: &mut Probe) -> Result<Outcome> {
    let su = setup(p, 2);
    let mut worst = Worst::default();
    for _ in 0..p.samples {
        let b = [mixed_form(p), mixed_form(p), mixed_form(p)];
        let face = |i: usize| -> Result<Form<Tangent>> {
            let rest: Vec<_> = b.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, f)| f.clone()).collect();
            su.bott.bott(&su.p, &rest, None, 3)
        };
        let lhs = su.bott.bott(&su.p, &b, None, 2)?.d(&su.tangent);
        let rhs = face(0)?.sub(&face(1)?).add(&face(2)?);
        let g = p.points(2, 1.0);
        let v = p.tangent_args(2, 3);
        worst.see(lhs.value(&g, &v) - rhs.value(&g, &v));
    }
    Ok(worst.outcome())
}

fn gauge_invariance(p: &mut Probe) -> Result<Outcome> {
    let su = setup(p, 2);
    let phi = twist(&su.tangent);
    let mut worst = Worst::default();
    for _ in 0..p.samples {
        let b = [mixed_form(p), mixed_form(p)];
        let moved: Vec<Form<Tangent>> = b.iter().map(|f| phi.transform(f, &su.alg)).collect();
        for degree in [1, 3] {
            let before = su.bott.bott(&su.p, &b, None, degree)?;
            let after = su.bott.bott(&su.p, &moved, None, degree)?;
            let g = p.points(2, 1.0);
            let v = p.tangent_args(2, degree);
            worst.see(before.value(&g, &v) - after.value(&g, &v));
        }
    }
    Ok(worst.outcome())
}

fn cs_primitive(p: &mut Probe) -> Result<Outcome> {
    let su = setup(p, 2);
    let mut worst = Worst::default();
    for _ in 0..p.samples {
        let beta = mixed_form(p);
        let f = curvature_form(&beta, &su.tangent, &su.alg);
        let lhs = cs(&beta, &su.tangent, &su.alg).d(&su.tangent);
        let rhs = f.dot_wedge(&f, &su.alg).scale(0.5);
        let g = p.points(2, 1.0);
        let v = p.tangent_args(2, 4);
        worst.see(lhs.value(&g, &v) - rhs.value(&g, &v));
    }
    Ok(worst.outcome())
}

fn cs_gauge_law(p: &mut Probe) -> Result<Outcome> {
    let su = setup(p, 2);
    let phi = twist(&su.tangent);
    let mut worst = Worst::default();
    for _ in 0..p.samples {
        let beta = mixed_form(p);
        let lhs = cs(&phi.transform(&beta, &su.alg), &su.tangent, &su.alg);
        let exact = beta.dot_wedge(phi.left(), &su.alg).d(&su.tangent).scale(0.5);
        let rhs = cs(&beta, &su.tangent, &su.alg).add(&phi.pullback_eta(&su.alg)).sub(&exact);
        let g = p.points(2, 1.0);
        let v = p.tangent_args(2, 3);
        worst.see(lhs.value(&g, &v) - rhs.value(&g, &v));
    }
    Ok(worst.outcome())
}

fn cs_gauge_law_equivariant(p: &mut Probe) -> Result<Outcome> {
    let su = setup(p, 1);
    let phi = GaugeMap::projection(&su.alg, 0);
    let inv = ConnectionFamily::invariant(&su.alg, 0.3, -0.7, Bump::default());
    let beta = inv.form_on_group(0.0);
    let moved = phi.transform(&beta, &su.alg);
    let corr = MixedForm::single(beta.dot_wedge(phi.left(), &su.alg).scale(0.5));
    let mut worst = Worst::default();
    for _ in 0..p.samples {
        let x = p.rng.vector(&su.alg, 1.0);
        let lhs = cs_g(&moved, &su.tangent, &su.alg, &x);
        let exact = equivariant_d(&su.tangent, &corr, &x);
        let g = p.points(1, 1.0);
        let v1 = p.tangent_args(1, 1);
        let v3 = p.tangent_args(1, 3);
        let rhs1 = cs_g(&beta, &su.tangent, &su.alg, &x).part(1).expect("degree 1").value(&g, &v1)
            + phi.pullback_eta_g_linear(&su.alg, &x).value(&g, &v1)
            - exact.part(1).expect("degree 1").value(&g, &v1);
        worst.see(lhs.part(1).expect("degree 1").value(&g, &v1) - rhs1);
        let rhs3 = cs(&beta, &su.tangent, &su.alg).value(&g, &v3) + eta_form(&su.alg, 0).value(&g, &v3)
            - exact.part(3).expect("degree 3").value(&g, &v3);
        worst.see(lhs.part(3).expect("degree 3").value(&g, &v3) - rhs3);
    }
    Ok(worst.outcome())
}

/// A gauge-periodic family on `G × G`.
fn family(p: &mut Probe, gauge: GaugeMap<Tangent>) -> OneFormFamily<Tangent> {
    let base = mixed_form(p);
    OneFormFamily::interpolating(&p.ctx.alg, base, gauge, Bump::with_margin(0.1))
}

/// `∫₀¹ f(t) dt` with 8 panels of 16 Gauss–Legendre nodes.
fn integrate(f: impl Fn(f64) -> f64) -> f64 {
    let gl = gauss_legendre_unit(16);
    (0..8).flat_map(|k| gl.iter().map(move |&(s, w)| ((k as f64 + s) / 8.0, w / 8.0))).map(|(t, w)| w * f(t)).sum()
}

fn product_gauge(tangent: &Tangent) -> GaugeMap<Tangent> {
    GaugeMap::on_tangent(tangent, |q| &q[0] * &q[1])
}

fn transgression(p: &mut Probe) -> Result<Outcome> {
    let su = setup(p, 2);
    let (alg, tangent) = (&su.alg, &su.tangent);
    let mut worst = Worst::default();
    for _ in 0..p.samples {
        let fam = family(p, product_gauge(tangent));
        let g = p.points(2, 1.0);
        let v = p.tangent_args(2, 3);
        let t = p.rng.uniform(0.15, 0.85);
        let lhs = richardson(|h| scalar(cs(&fam.value(t + h), tangent, alg).value(&g, &v)), 1e-3)[0];
        let (b, bd) = (fam.value(t), fam.dot(t));
        let rhs = bd.dot_wedge(&curvature_form(&b, tangent, alg), alg).sub(&b.dot_wedge(&bd, alg).d(tangent).scale(0.5));
        worst.see(lhs - rhs.value(&g, &v));
    }
    Ok(worst.outcome())
}

fn cs_form(p: &mut Probe) -> Result<Outcome> {
    let su = setup(p, 2);
    let (alg, tangent) = (&su.alg, &su.tangent);
    let mut worst = Worst::default();
    for _ in 0..p.samples {
        let fam = family(p, product_gauge(tangent));
        let g = p.points(2, 1.0);
        let v = p.tangent_args(2, 3);
        let lhs =
            integrate(|t| fam.dot(t).dot_wedge(&curvature_form(&fam.value(t), tangent, alg), alg).value(&g, &v));
        let rhs = fam.gauge().pullback_eta(alg).value(&g, &v) + fam.q_functional(8).d(tangent).value(&g, &v);
        worst.see(lhs - rhs);
    }
    Ok(worst.outcome())
}

fn cs_form_equivariant(p: &mut Probe) -> Result<Outcome> {
    let su = setup(p, 1);
    let (alg, tangent) = (&su.alg, &su.tangent);
    let fam = OneFormFamily::from_connection(&ConnectionFamily::invariant(alg, 0.4, -0.2, Bump::default()));
    let q = MixedForm::single(fam.q_functional(8));
    let mut worst = Worst::default();
    for _ in 0..p.samples {
        let x = p.rng.vector(alg, 1.0);
        let gen = tangent.generator(&x);
        let g = p.points(1, 1.0);
        let dq = equivariant_d(tangent, &q, &x);
        let eta_g = fam.gauge().pullback_eta_g(alg, &x);
        let v1 = p.tangent_args(1, 1);
        let lhs1 = integrate(|t| {
            let (b, bd) = (fam.value(t), fam.dot(t));
            let zero = &x - b.eval(&g, std::slice::from_ref(&gen));
            alg.dot(&bd.eval(&g, &v1), &zero)
        });
        let rhs1 = eta_g.part(1).expect("degree 1").value(&g, &v1) + dq.part(1).expect("degree 1").value(&g, &v1);
        worst.see(lhs1 - rhs1);
        let v3 = p.tangent_args(1, 3);
        let lhs3 =
            integrate(|t| fam.dot(t).dot_wedge(&curvature_form(&fam.value(t), tangent, alg), alg).value(&g, &v3));
        let rhs3 = eta_form(alg, 0).value(&g, &v3) + dq.part(3).expect("degree 3").value(&g, &v3);
        worst.see(lhs3 - rhs3);
    }
    Ok(worst.outcome())
}

fn q_reparametrization(p: &mut Probe) -> Result<Outcome> {
    let alg = p.ctx.alg.clone();
    let mut worst = Worst::default();
    for _ in 0..p.samples {
        let fam = family(p, GaugeMap::projection(&alg, 0));
        let (shift, wobble) = (p.rng.uniform(0.0, 1.0), p.rng.uniform(-0.8, 0.8));
        let moved = fam.reparametrized(
            move |t| t + shift + wobble * (TAU * t).sin() / TAU,
            move |t| 1.0 + wobble * (TAU * t).cos(),
        );
        let g = p.points(2, 1.0);
        let v = p.tangent_args(2, 2);
        worst.see(moved.q_functional(8).value(&g, &v) - fam.q_functional(8).value(&g, &v));
    }
    Ok(worst.outcome())
}

fn q_inversion(p: &mut Probe) -> Result<Outcome> {
    let alg = p.ctx.alg.clone();
    let mut worst = Worst::default();
    for _ in 0..p.samples {
        let fam = family(p, GaugeMap::projection(&alg, 0));
        let g = p.points(2, 1.0);
        let v = p.tangent_args(2, 2);
        worst.see(fam.inverted().q_functional(8).value(&g, &v) + fam.q_functional(8).value(&g, &v));
    }
    Ok(worst.outcome())
}

fn q_concatenation(p: &mut Probe) -> Result<Outcome> {
    let alg = p.ctx.alg.clone();
    let (pr1, pr2) = (GaugeMap::projection(&alg, 0), GaugeMap::projection(&alg, 1));
    // The λ-term pairs Φ″*θ^L with Φ′*θ^R, matching the product Φ″Φ′.
    let lambda = lambda_pullback(&pr2, &pr1, &alg);
    let mut worst = Worst::default();
    for _ in 0..p.samples {
        let first = family(p, pr1.clone());
        let second = OneFormFamily::interpolating(&alg, first.value(1.0), pr2.clone(), Bump::with_margin(0.1));
        let g = p.points(2, 1.0);
        let probe = p.tangent_args(2, 1);
        let joined = OneFormFamily::concatenate(&first, &second, (&g, &probe), 1e-12)?;
        let sum = first.q_functional(8).add(&second.q_functional(8)).add(&lambda);
        let g = p.points(2, 1.0);
        let v = p.tangent_args(2, 2);
        worst.see(joined.q_functional(8).value(&g, &v) - sum.value(&g, &v));
    }
    Ok(worst.outcome())
}

fn eta_p_g_check(p: &mut Probe) -> Result<Outcome> {
    let su = setup(p, 1);
    let tl = maurer_cartan_form(&su.alg, Side::Left, 0);
    let mut worst = Worst::default();
    for _ in 0..p.samples {
        let x = p.rng.vector(&su.alg, 1.0);
        let eta_p = su.bott.bott_mixed(&su.p, &[zero_form(&su.alg), tl.clone()], &x, 3)?;
        let reference = eta_g(&su.alg, 0, &x);
        let g = p.points(1, 1.0);
        for degree in [1, 3] {
            let v = p.tangent_args(1, degree);
            let part = |m: &MixedForm<Tangent>| m.part(degree).expect("part").value(&g, &v);
            worst.see(part(&eta_p) - part(&reference));
        }
        let v1 = p.tangent_args(1, 1);
        worst.see(eta_p.part(1).expect("degree 1").value(&g, &v1) - eta_g_linear(&su.alg, 0, &x).value(&g, &v1));
        let closed = equivariant_d(&su.tangent, &eta_p, &x);
        let v2 = p.tangent_args(1, 2);
        worst.see(closed.part(2).expect("degree 2").value(&g, &v2));
        worst.see(closed.part(0).expect("degree 0").value(&g, &[]));
    }
    Ok(worst.outcome())
}

fn higher(p: &Probe) -> HigherForms {
    HigherForms::new(p.ctx, InvariantPolynomial::half_square(&p.ctx.alg), ConventionTable::standard())
}

fn upsilon_kappa(p: &mut Probe) -> Result<Outcome> {
    let h = higher(p);
    let alg = &p.ctx.alg;
    let (k0, k1) = (qpath::atiyah::kappa(alg, 0.0), qpath::atiyah::kappa(alg, 1.0));
    let mut worst = Worst::default();
    for _ in 0..p.samples {
        let x = p.rng.vector(alg, 1.0);
        let g = p.point(1.0);
        let gen = Section::generator(alg, &x);
        let [xi] = p.sections();
        let one = std::slice::from_ref(&xi);
        let jump1 = h.upsilon_from_zero(&k1, Some(&x), 1)?.value(&g, one)
            - h.upsilon_from_zero(&k0, Some(&x), 1)?.value(&g, one);
        worst.see(jump1 + h.i_p_g(Some(&x), 2).value(&g, &[gen, xi]));
        let args = p.sections::<3>();
        let jump3 = h.upsilon_from_zero(&k1, Some(&x), 3)?.value(&g, &args)
            - h.upsilon_from_zero(&k0, Some(&x), 3)?.value(&g, &args);
        worst.see(jump3 - h.i_p_g(Some(&x), 2).d(&p.ctx.atiyah()).value(&g, &args));
    }
    Ok(worst.outcome())
}

fn eta_p_on_algebroid(p: &Probe, x: &Vector, degree: usize) -> Result<Form<qpath::algebroid::Atiyah>> {
    let bott = BottContext::new(&p.ctx.alg, p.ctx.tangent(1), ConventionTable::standard());
    let eta = eta_p_g(&bott, &InvariantPolynomial::half_square(&p.ctx.alg), x)?;
    Ok(pullback_anchor(eta.part(degree).expect("part")))
}

fn varpi_p_eta(p: &mut Probe) -> Result<Outcome> {
    let h = higher(p);
    let alg = p.ctx.alg.clone();
    let mut worst = Worst::default();
    for _ in 0..p.samples {
        let x = p.rng.vector(&alg, 1.0);
        let g = p.point(1.0);
        let vp = h.varpi_p_g(Some(&x), 2)?;
        let [xi] = p.sections();
        let gen = Section::generator(&alg, &x);
        let lhs1 = -vp.value(&g, &[gen, xi.clone()]);
        worst.see(lhs1 - eta_p_on_algebroid(p, &x, 1)?.value(&g, &[xi]));
        let args = p.sections::<3>();
        worst.see(vp.d(&p.ctx.atiyah()).value(&g, &args) - eta_p_on_algebroid(p, &x, 3)?.value(&g, &args));
    }
    Ok(worst.outcome())
}

fn varpi_p_quadratic(p: &mut Probe) -> Result<Outcome> {
    let h = higher(p);
    let mut worst = Worst::default();
    for _ in 0..p.samples {
        let g = p.point(1.0);
        let [a, b] = p.sections();
        let x = p.rng.vector(&p.ctx.alg, 1.0);
        let vp = h.varpi_p_g(Some(&x), 2)?.value(&g, &[a.clone(), b.clone()]);
        worst.see(vp - varpi(p.ctx, &a, &b, &g));
    }
    Ok(worst.outcome())
}

/// `offset + Σ_k a_k sin 2πkt + b_k cos 2πkt` at every point.
fn fourier_loop(s: &mut Sampler, alg: &LieAlgebra) -> Section {
    let modes: Vec<(f64, Vector, Vector)> =
        (1..=3).map(|k| (k as f64, s.vector(alg, 1.0 / k as f64), s.vector(alg, 1.0 / k as f64))).collect();
    let modes2 = modes.clone();
    let offset = s.vector(alg, 1.0);
    let dim = alg.dim();
    Section::loop_at_identity(
        alg,
        move |t| modes.iter().fold(offset.clone(), |acc, (k, a, b)| acc + a * (TAU * k * t).sin() + b * (TAU * k * t).cos()),
        move |t| {
            modes2.iter().fold(Vector::zeros(dim), |acc, (k, a, b)| {
                acc + (a * (TAU * k * t).cos() - b * (TAU * k * t).sin()) * (TAU * k)
            })
        },
    )
}

fn pressley_segal(p: &mut Probe) -> Result<Outcome> {
    let h = higher(p);
    let e = p.ctx.alg.identity();
    let mut worst = Worst::default();
    for _ in 0..p.samples {
        let (xi, zeta) = (fourier_loop(&mut p.rng, &p.ctx.alg), fourier_loop(&mut p.rng, &p.ctx.alg));
        worst.see(h.pressley_segal(&xi, &zeta)? - pairing_dot(p.ctx, &xi, &zeta, &e));
    }
    Ok(worst.outcome())
}

fn pressley_segal_closed(p: &mut Probe) -> Result<Outcome> {
    let h = higher(p);
    let sigma_p = h.varpi_p_g(None, 2)?.d(&p.ctx.atiyah());
    let e = p.ctx.alg.identity();
    let mut worst = Worst::default();
    for _ in 0..p.samples {
        let loops: Vec<Section> = (0..3).map(|_| fourier_loop(&mut p.rng, &p.ctx.alg)).collect();
        worst.see(sigma_p.value(&e, &loops));
    }
    Ok(worst.outcome())
}

fn cubic(p: &mut Probe) -> Result<Outcome> {
    match cubic_proportionality(p.ctx, &mut p.rng, p.samples.max(2))? {
        CubicCheck::Skipped(reason) => Ok(Outcome::skipped(reason)),
        CubicCheck::Ratios(r) => {
            let lo = r.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            Ok(Outcome::residual(hi - lo).with_note(format!("ratio ≈ {:.6}", r[0])))
        }
    }
}
