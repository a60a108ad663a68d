mod common;

use common::*;
use conik::duality::shadow_primal;
use conik::proximity::tau_rho;
use conik::worstcase::{
    extreme_v_search, hatx_construct, ratio_r, slice_boundary, slice_grid, vspace_xi_orthant, vspace_xi_weighted,
    xi_sup_search, ExtremeSearchOptions,
};
use conik::{denselin, ConeDescriptor, Vector};
use proptest::prelude::*;

#[test]
fn vspace_matches_rho_and_descent() {
    for n in [2usize, 3, 5, 10] {
        let r = vspace_xi_orthant(n).unwrap();
        let rho = tau_rho(n).unwrap().1;
        assert!((r.xi - rho).abs() < 1e-8, "n = {n}: {} vs {rho}", r.xi);
        assert!((r.xi_descent - rho).abs() < 1e-6, "n = {n}: descent {}", r.xi_descent);
        assert!(r.v_opt.iter().all(|&v| v >= 1.0 - 1e-12));
    }
    assert!(vspace_xi_orthant(1).is_err());
}

#[test]
fn weighted_orthant_value() {
    let r = vspace_xi_weighted(&[2.0, 2.0]).unwrap();
    assert!((r.xi - 1.0774).abs() < 1e-3, "{}", r.xi);
    assert!(r.xi < tau_rho(2).unwrap().1);
    assert!(vspace_xi_weighted(&[2.0]).is_err());
    assert!(vspace_xi_weighted(&[0.5, 2.0]).is_err());
}

#[test]
fn exp_cone_certificate() {
    let f = barrier(ConeDescriptor::Exp { copies: 1 });
    let s = vector(&[1.0, 1.0, -1.0]);
    let mu = 1.0 / 3.0;
    let v = vector(&[0.0, 0.0, -1.0]);
    let xt = shadow_primal(&f, &s).unwrap();
    let c = &xt * mu;
    let norm2 = denselin::quad(&f.hessian(&c).unwrap(), &(&v - &c));
    assert!((norm2 - 6.0).abs() < 1e-7, "{norm2}");
    let cert = hatx_construct(&f, &s, &v, mu).unwrap();
    assert!(cert.valid, "{:?}", cert.checks);
    assert!((cert.xi_at_xhat - tau_rho(3).unwrap().1).abs() < 1e-6);
    let search = extreme_v_search(&f, &s, mu, ExtremeSearchOptions::default()).unwrap();
    assert!(search.found);
    assert!(search.attaining.iter().any(|a| (vector(&a.v) - &v).norm() < 1e-5));
}

#[test]
fn toeplitz_extreme_matrices() {
    let f = barrier(ConeDescriptor::toeplitz(3));
    let s = vector(&[3.0, 0.0, 0.0]);
    let search = extreme_v_search(&f, &s, 1.0, ExtremeSearchOptions::default()).unwrap();
    for v in [vector(&[1.0, 1.0, 1.0]), vector(&[1.0, -1.0, 1.0])] {
        let cert = hatx_construct(&f, &s, &v, 1.0).unwrap();
        assert!(cert.valid, "{:?}", cert.checks);
        assert!((cert.xi_at_xhat - tau_rho(3).unwrap().1).abs() < 1e-6);
        assert!(search.attaining.iter().any(|a| (vector(&a.v) - &v).norm() < 1e-5));
    }
}

#[test]
fn tridiagonal_slice_stays_below_rho() {
    let f = barrier(ConeDescriptor::toeplitz_tridiag(5));
    let s = vector(&[5.0, 0.0]);
    let search = extreme_v_search(&f, &s, 1.0, ExtremeSearchOptions::default()).unwrap();
    assert!(!search.found);
    let rho = tau_rho(5).unwrap().1;
    let best = slice_grid(&f, &s, 1.0, 201)
        .unwrap()
        .iter()
        .filter_map(|r| r.xi_check)
        .fold(0.0, f64::max);
    assert!(best < rho, "{best} vs {rho}");
    let boundary = slice_boundary(&f, &s, 1.0, 64).unwrap();
    assert_eq!(boundary.len(), 2);
}

#[test]
fn invalid_construction_inputs() {
    let f = barrier(ConeDescriptor::Orthant { n: 3 });
    let s = vector(&[1.0, 1.0, 1.0]);
    let off_slice = hatx_construct(&f, &s, &vector(&[1.0, 0.0, 0.0]), 1.0).unwrap();
    assert!(!off_slice.valid);
    assert!(extreme_v_search(&f, &s, -1.0, ExtremeSearchOptions::default()).is_err());
    assert!(xi_sup_search(&f, 2, 0, 0).is_err());
}

#[test]
fn sup_search_respects_theorem_bounds() {
    for desc in [ConeDescriptor::Orthant { n: 4 }, ConeDescriptor::Soc { blocks: vec![2] }, ConeDescriptor::Exp { copies: 1 }] {
        let f = barrier(desc);
        let r = xi_sup_search(&f, 6, 3, 2000).unwrap();
        assert!(!r.violates_bound, "{}: {} > {}", f.cone().name(), r.best_xi, r.bound);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn orthant_vertices_give_valid_certificates(n in 2usize..8, seed in any::<u64>(), mu in 0.1f64..10.0) {
        let f = barrier(ConeDescriptor::Orthant { n });
        let mut r = rng(seed);
        let s = conik::sample::interior_point(f.cone(), &mut r, conik::sample::SampleOptions::default());
        let i = (seed % n as u64) as usize;
        let mut v = Vector::zeros(n);
        v[i] = mu * n as f64 / s[i];
        let cert = hatx_construct(&f, &s, &v, mu).unwrap();
        prop_assert!(cert.valid, "{:?}", cert.checks);
        prop_assert!((cert.xi_at_xhat - tau_rho(n).unwrap().1).abs() < 1e-8);
    }

    #[test]
    fn feasible_v_obeys_the_norm_bound(seed in any::<u64>(), which in 0usize..9) {
        let (name, desc) = catalog().swap_remove(which);
        let f = barrier(desc);
        let (ps, _) = pairs(&f, 1, seed, conik::sample::SampleOptions::default());
        let p = &ps[0];
        let mut r = rng(seed ^ 1);
        let u = conik::sample::interior_point(f.cone(), &mut r, conik::sample::SampleOptions::default());
        let v = &u * (p.mu * p.theta / p.s.dot(&u));
        let local = denselin::quad(&p.hess_x_shadow, &v).sqrt();
        prop_assert!(local <= p.theta * p.mu * (1.0 + 1e-9), "{}", name);
        let ratio = ratio_r(p, &v).unwrap();
        prop_assert!(ratio > 0.0);
    }
}
