mod common;

use common::*;
use conik::duality::make_pair;
use conik::proximity::{delta_f, gamma_g, gamma_inf, gamma_inf_bisect, proximity_report, tau_rho};
use conik::sample::{near_central_pair, SampleOptions};
use conik::worstcase::worstcase_orthant;
use conik::{ConeDescriptor, Vector};
use proptest::prelude::*;

const OPTS: SampleOptions = SampleOptions { depth: 0.99, log_scale: 1.0 };

#[test]
fn hand_evaluated_orthant_pair() {
    let f = barrier(ConeDescriptor::Orthant { n: 2 });
    let p = make_pair(&f, &vector(&[1.0, 2.0]), &vector(&[3.0, 1.0])).unwrap();
    let r = proximity_report(&f, &p).unwrap();
    assert!((r.gamma_g - 1.0 / 12.0).abs() < 1e-12);
    assert!((r.gamma_inf - 0.25).abs() < 1e-12);
    assert!((r.delta_f - 13.0 / 30.0).abs() < 1e-12);
}

#[test]
fn central_pairs_are_zero() {
    let f = barrier(ConeDescriptor::Soc { blocks: vec![3] });
    let x = vector(&[0.3, -0.2, 0.1, 2.0]);
    let p = make_pair(&f, &x, &-f.gradient(&x).unwrap()).unwrap();
    assert!(gamma_g(&p).unwrap() < 1e-12);
    assert!(gamma_inf(&f, &p).unwrap() < 1e-9);
    assert!((delta_f(&p).unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn orthant_worst_point_proximities() {
    for n in [2usize, 3, 7, 20] {
        let (tau, _) = tau_rho(n).unwrap();
        let f = barrier(ConeDescriptor::Orthant { n });
        let s = Vector::from_element(n, 1.0);
        let x = worstcase_orthant(n, &s, 0, 1.0).unwrap();
        let p = make_pair(&f, &x, &s).unwrap();
        assert!((gamma_g(&p).unwrap() - 1.0 / (tau + 1.0)).abs() < 1e-12, "n = {n}");
        assert!((gamma_inf(&f, &p).unwrap() - 1.0 / tau).abs() < 1e-12, "n = {n}");
    }
}

#[test]
fn tau_rho_values() {
    let (t2, r2) = tau_rho(2).unwrap();
    assert!((t2 - 2f64.sqrt()).abs() < 1e-15);
    assert!((r2 - 1.2071068).abs() < 1e-7);
    assert!((tau_rho(3).unwrap().1 - 1.2532).abs() < 1e-4);
    assert!((tau_rho(1_000_000).unwrap().1 - 4.0 / 3.0).abs() < 1e-5);
    assert!(tau_rho(1).is_err());
    let rhos: Vec<f64> = (2..=100).map(|n| tau_rho(n).unwrap().1).collect();
    assert!(rhos.windows(2).all(|w| w[0] < w[1]));
    assert!(rhos.iter().all(|&r| r < 4.0 / 3.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn proximity_ordering(seed in any::<u64>(), which in 0usize..9) {
        let (name, desc) = catalog().swap_remove(which);
        let f = barrier(desc);
        let (ps, _) = pairs(&f, 1, seed, OPTS);
        let r = proximity_report(&f, &ps[0]).unwrap();
        prop_assert!(r.gamma_g >= 0.0);
        prop_assert!(ps[0].theta * r.gamma_inf >= r.gamma_g - 1e-8 * (1.0 + r.gamma_g), "{}: {:?}", name, r);
        prop_assert!((r.delta_f - (r.gamma_g + 1.0) / r.mu).abs() <= 1e-12 * r.delta_f);
    }

    #[test]
    fn gauge_routes_agree(seed in any::<u64>(), which in 0usize..9) {
        let (name, desc) = catalog().swap_remove(which);
        let f = barrier(desc);
        let (ps, _) = pairs(&f, 1, seed, OPTS);
        let a = gamma_inf(&f, &ps[0]).unwrap();
        let b = gamma_inf_bisect(&f, &ps[0]).unwrap();
        prop_assert!((a - b).abs() <= 1e-8 * (1.0 + a), "{}: {} vs {}", name, a, b);
    }

    #[test]
    fn bounds_on_negative_curvature_cones(seed in any::<u64>(), which in 0usize..6) {
        let (name, desc) = negative_curvature_catalog().swap_remove(which);
        let f = barrier(desc);
        let (ps, _) = pairs(&f, 1, seed, OPTS);
        let (g, u) = (gamma_g(&ps[0]).unwrap(), gamma_inf(&f, &ps[0]).unwrap());
        prop_assert!(g >= u * u / (1.0 + u) - 1e-8 * (1.0 + g), "{}: γ_G {} γ_∞ {}", name, g, u);
        prop_assert!(g >= (3.0 * u - 1.0) / 4.0 - 1e-8 * (1.0 + g), "{}", name);
    }

    #[test]
    fn near_central_pairs_are_small(seed in any::<u64>(), which in 0usize..9) {
        let (_, desc) = catalog().swap_remove(which);
        let f = barrier(desc);
        let mut r = rng(seed);
        if let Ok(p) = near_central_pair(&f, &mut r, OPTS, 1e-4) {
            prop_assert!(gamma_g(&p).unwrap() < 1e-3);
            prop_assert!(gamma_inf(&f, &p).unwrap() < 1e-1);
        }
    }

    #[test]
    fn delta_scales_inversely(seed in any::<u64>(), which in 0usize..9, t in 0.01f64..100.0) {
        let (_, desc) = catalog().swap_remove(which);
        let f = barrier(desc);
        let (ps, _) = pairs(&f, 1, seed, OPTS);
        let p = &ps[0];
        let q = make_pair(&f, &(&p.x * t), &p.s).unwrap();
        let (a, b) = (delta_f(p).unwrap(), delta_f(&q).unwrap());
        prop_assert!((b * t - a).abs() <= 1e-9 * a);
        prop_assert!((gamma_g(&q).unwrap() - gamma_g(p).unwrap()).abs() <= 1e-8 * (1.0 + gamma_g(p).unwrap()));
    }
}
