use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use supergauss_core::cases::{
    appendix_b_residuals, complete_bundle, family, hyp_case1_family, hyp_case2_derived, names,
    AppendixFields, FamilyOptions, Holomorphic,
};
use supergauss_core::frames::gauss_codazzi_fields;
use supergauss_core::*;

fn grid(n: usize) -> Arc<ConformalGrid> {
    Arc::new(ConformalGrid::unit_square(n).unwrap())
}

/// Smooth random field: a random quadratic in (s, t), optionally complex.
fn random_field(g: &Arc<ConformalGrid>, rng: &mut ChaCha8Rng, complex: bool) -> Field {
    let mut coef = [Complex64::new(0.0, 0.0); 6];
    for c in coef.iter_mut() {
        let im = if complex {
            rng.gen_range(-0.5..0.5)
        } else {
            0.0
        };
        *c = Complex64::new(rng.gen_range(-0.5..0.5), im);
    }
    Field::from_fn(g, move |x| {
        let (s, t) = (x.re, x.im);
        coef[0] + coef[1] * s + coef[2] * t + coef[3] * s * s + coef[4] * s * t + coef[5] * t * t
    })
}

fn gauss(spec: &CaseSpec, b: &GeometryBundle) -> Field {
    gauss_codazzi_fields(spec, b, Stencil::Second)
        .unwrap()
        .remove(0)
        .1
}

#[test]
fn wirtinger_derivative_of_log_matches_analytic() {
    let g = grid(81);
    let f = Field::from_fn(&g, |x| (x * x.conj() + 1.0).ln());
    let d = f.d_x(XDir::X1);
    let nodes = g.report_nodes();
    let err = nodes
        .iter()
        .map(|&k| {
            let x = g.x1(k);
            (d.body()[k] - x.conj() / (x * x.conj() + 1.0)).norm()
        })
        .fold(0.0, f64::max);
    assert!(err <= 50.0 * g.h() * g.h(), "{err}");
}

#[test]
fn flat_family_is_compatible() {
    let spec = CaseSpec::EucF0;
    let g = grid(101);
    let b = family(&spec, &g, &FamilyOptions::default()).unwrap();
    let zc = zero_curvature_residual(
        &assemble(&spec, &b, Stencil::Second).unwrap(),
        Tolerance::for_grid(&g),
    )
    .unwrap();
    assert!(zc.pass && zc.overall_max <= 50.0 * g.h() * g.h());
}

#[test]
fn curved_minimal_family_solves_gauss_codazzi() {
    // c = −1, Q = 0, H = 0: ∂1∂2u = e^u/2
    let spec = CaseSpec::CurF0 { c: -1.0 };
    let g = grid(101);
    let opts = FamilyOptions {
        h0: 0.0,
        ..Default::default()
    };
    let b = family(&spec, &g, &opts).unwrap();
    let u = b.get(names::U).unwrap();
    let lap = u.d_x(XDir::X1).d_x(XDir::X2);
    let oracle = &lap - &(u.exp() * 0.5);
    let nodes = g.report_nodes();
    let worst = nodes
        .iter()
        .map(|&k| oracle.body()[k].norm())
        .fold(0.0, f64::max);
    assert!(worst <= 50.0 * g.h() * g.h());
    let r = gauss_codazzi_residual(&spec, &b, Tolerance::for_grid(&g)).unwrap();
    assert!(r.pass, "{}", r.to_json());
}

#[test]
fn curved_gauss_tends_to_flat_with_exact_offset() {
    let g = grid(21);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let b = GeometryBundle::new()
        .with(names::U, random_field(&g, &mut rng, false))
        .with(names::Q, random_field(&g, &mut rng, true))
        .with(names::H, random_field(&g, &mut rng, false));
    let flat = gauss(&CaseSpec::EucF0, &b);
    let u = b.get(names::U).unwrap();
    for c in [-1.0, -10.0, -1e6] {
        let curved = gauss(&CaseSpec::CurF0 { c }, &b);
        for k in 0..g.len() {
            let expected = 0.5 * u.body()[k].re.exp() / c;
            let got = curved.body()[k] - flat.body()[k];
            assert!(
                (got - expected).norm() <= 1e-12 * (1.0 + flat.body()[k].norm()),
                "c={c}"
            );
        }
    }
}

#[test]
fn spherical_link_defects_are_exact() {
    let g = grid(21);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let u = random_field(&g, &mut rng, false);
        let q = random_field(&g, &mut rng, true);
        let h = random_field(&g, &mut rng, false);
        let flat = gauss(
            &CaseSpec::EucF0,
            &GeometryBundle::new()
                .with(names::U, u.clone())
                .with(names::Q, q.clone())
                .with(names::H, h.clone()),
        );
        let small = GeometryBundle::new()
            .with(names::U, u.clone())
            .with(names::Q_SMALL, q)
            .with(names::H_SMALL, h);
        let (a, k) = (rng.gen_range(0.2..2.0), rng.gen_range(0.5..2.0));
        let alpha = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let cases = [
            (CaseSpec::EucF2 { a, b: 1.0, k }, a * a / (k * k)),
            (
                CaseSpec::EucF3C1 {
                    alpha,
                    gamma: 1.0,
                    k,
                },
                4.0 * alpha.norm_sqr() / (k * k),
            ),
        ];
        for (spec, extra) in cases {
            let scaled = gauss(&spec, &small);
            for node in 0..g.len() {
                let expected = 0.5 * u.body()[node].re.exp() * extra;
                let got = scaled.body()[node] - flat.body()[node];
                let scale = 1.0 + flat.body()[node].norm() + expected.abs();
                assert!((got - expected).norm() <= 1e-13 * scale, "{}", spec.tag());
            }
        }
    }
}

#[test]
fn flat_f3_second_case_reduces_to_flat_f0_bitwise() {
    let g = grid(21);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let b = GeometryBundle::new()
        .with(names::U, random_field(&g, &mut rng, false))
        .with(names::Q, random_field(&g, &mut rng, true))
        .with(names::H, random_field(&g, &mut rng, false));
    let flat = gauss_codazzi_fields(&CaseSpec::EucF0, &b, Stencil::Second).unwrap();
    let spec = CaseSpec::EucF3C2 {
        alpha: 0.7,
        beta: Complex64::new(-0.2, 0.4),
        gamma: 1.3,
    };
    let f3 = gauss_codazzi_fields(&spec, &b, Stencil::Second).unwrap();
    for ((la, a), (lb, b)) in flat.iter().zip(&f3) {
        assert_eq!(la, lb);
        assert_eq!(a.body(), b.body());
    }
}

#[test]
fn hyperbolic_first_case_closed_forms() {
    let g = grid(41);
    for eps in [1.0, -1.0] {
        let spec = CaseSpec::HypF3C1 {
            alpha: 0.0,
            beta: Complex64::new(1.0, 0.0),
            gamma: 0.0,
            k: 1.0,
            c: -1.0,
            eps,
        };
        assert_eq!(spec.hyp_case1_sigma2(), Some(1.0));
        let b = hyp_case1_family(&spec, &g, &Holomorphic::identity(), Some(1.0)).unwrap();
        let gg = b.get(names::G).unwrap();
        let hh = b.get(names::H).unwrap();
        assert!(gg.trimmed().is_theta_free() && hh.trimmed().is_theta_free());
        for k in 0..g.len() {
            assert!((gg.body()[k] - eps).norm() < 1e-15);
            assert!((hh.body()[k] - eps).norm() < 1e-15);
        }
    }
}

#[test]
fn hyperbolic_second_case_constant_psi() {
    let g = grid(41);
    for eps in [1.0, -1.0] {
        let phi = Field::from_fn(&g, |x| Complex64::new(0.3 * x.re, 0.0));
        let psi = Field::constant(&g, 0.4);
        let b = hyp_case2_derived(&phi, &psi, -1.0, eps).unwrap();
        assert!(b.get(names::Q).unwrap().max_abs() < 1e-12);
        for k in 0..g.len() {
            assert!((b.get(names::G).unwrap().body()[k] - eps).norm() < 1e-12);
            assert!((b.get(names::H).unwrap().body()[k] - eps).norm() < 1e-12);
        }
    }
}

#[test]
fn hyperbolic_second_case_solution_passes_full_list() {
    let spec = CaseSpec::HypF3C2 { c: -0.5, eps: -1.0 };
    let g = grid(101);
    let b = family(&spec, &g, &FamilyOptions::default()).unwrap();
    let full = complete_bundle(&spec, &b).unwrap();
    let f = AppendixFields {
        phi: full.get(names::PHI).unwrap(),
        psi: full.get(names::PSI).unwrap(),
        q: full.get(names::Q).unwrap(),
        qbar: full.get(names::QBAR).unwrap(),
        h: full.get(names::H).unwrap(),
    };
    let r = appendix_b_residuals(
        &f,
        full.get(names::G).unwrap(),
        -0.5,
        Tolerance::for_grid(&g),
    );
    assert!(r.pass, "{}", r.to_json());
    let v = verify_case(&spec, &b, None).unwrap();
    assert!(v.pass, "{}", v.to_json());
}

#[test]
fn every_family_verifies() {
    let g = grid(41);
    for tag in CaseTag::ALL {
        let spec = CaseSpec::default_for(tag);
        let b = family(&spec, &g, &FamilyOptions::default()).unwrap();
        let r = verify_case(&spec, &b, None).unwrap();
        assert!(r.pass, "{tag}: {}", r.to_json());
        for key in ["case", "grid", "pairs", "overall_max", "pass"] {
            let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
            assert!(v.get(key).is_some(), "{key}");
        }
    }
    let r = verify_case(
        &CaseSpec::CurF2 { c: -1.0 },
        &family(&CaseSpec::CurF0 { c: -1.0 }, &g, &FamilyOptions::default()).unwrap(),
        None,
    )
    .unwrap();
    assert!(r.pass);
    assert_eq!(r.case, "cur-f2");
}
