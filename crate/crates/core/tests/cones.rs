mod common;

use common::*;
use conik::cones::{smat, svec, Cone, ConeDescriptor, Verdict};
use conik::sample::{interior_point, SampleOptions};
use conik::{Barrier, SymMatrix, Vector};
use proptest::prelude::*;

const OPTS: SampleOptions = SampleOptions { depth: 0.99, log_scale: 1.0 };

fn cone(desc: ConeDescriptor) -> Cone {
    Cone::new(desc).unwrap()
}

#[test]
fn boundary_examples() {
    let o = cone(ConeDescriptor::Orthant { n: 2 });
    let m = o.contains(&vector(&[1.0, 0.0]), 1e-12).unwrap();
    assert_eq!(m.verdict, Verdict::Boundary);
    assert_eq!(m.margin, 0.0);
    let s = cone(ConeDescriptor::Soc { blocks: vec![2] });
    assert_eq!(s.contains(&vector(&[3.0, 4.0, 5.0]), 1e-12).unwrap().verdict, Verdict::Boundary);
    let e = cone(ConeDescriptor::Exp { copies: 1 });
    let x = vector(&[std::f64::consts::E, 1.0, 1.0]);
    assert_eq!(e.contains(&x, 1e-12).unwrap().verdict, Verdict::Boundary);
    assert_eq!(e.contains(&vector(&[3.0, 1.0, 1.0]), 1e-12).unwrap().verdict, Verdict::Interior);
    assert_eq!(e.contains(&vector(&[2.0, 1.0, 1.0]), 1e-12).unwrap().verdict, Verdict::Outside);
}

#[test]
fn dual_membership_examples() {
    let o = cone(ConeDescriptor::Orthant { n: 2 });
    assert!(o.dual_contains(&vector(&[1.0, 1.0]), 0.0).unwrap().is_interior());
    let e = cone(ConeDescriptor::Exp { copies: 1 });
    assert!(e.dual_contains(&vector(&[1.0, 0.0, -1.0]), 1e-12).unwrap().is_interior());
    assert!(!e.dual_contains(&vector(&[0.1, 0.0, -1.0]), 1e-12).unwrap().is_member());
}

#[test]
fn gauge_examples() {
    let o = cone(ConeDescriptor::Orthant { n: 2 });
    let (x, h) = (vector(&[1.0, 1.0]), vector(&[2.0, -1.0]));
    assert!((o.gauge(&x, &h).unwrap().sigma - 2.0).abs() < 1e-15);
    assert!((o.gauge_bisect(&x, &h).unwrap().sigma - 2.0).abs() < 1e-10);
    assert!((o.minkowski_norm(&x, &h).unwrap() - 2.0).abs() < 1e-15);
    assert_eq!(o.minkowski_norm(&x, &Vector::zeros(2)).unwrap(), 0.0);
    assert_eq!(o.gauge(&x, &vector(&[-1.0, -3.0])).unwrap().sigma, 0.0);
    let s = cone(ConeDescriptor::Soc { blocks: vec![2] });
    let g = s.gauge(&vector(&[0.0, 0.0, 1.0]), &vector(&[0.0, 0.0, 2.0])).unwrap().sigma;
    assert!((g - 2.0).abs() < 1e-14);
}

#[test]
fn invalid_descriptors_are_rejected() {
    assert!(Cone::new(ConeDescriptor::Orthant { n: 0 }).is_err());
    assert!(Cone::new(ConeDescriptor::Soc { blocks: vec![] }).is_err());
    assert!(Cone::new(ConeDescriptor::WeightedOrthant { weights: vec![0.5] }).is_err());
    assert!(Cone::new(ConeDescriptor::Orthant { n: 100_000 }).is_err());
    let asym = ConeDescriptor::LmiSlice { size: 2, matrices: vec![vec![1.0, 1.0, 0.0, 1.0]], interior: None };
    assert!(Cone::new(asym).is_err());
}

#[test]
fn descriptor_json_round_trip() {
    for (_, desc) in catalog() {
        let text = serde_json::to_string(&desc).unwrap();
        let back: ConeDescriptor = serde_json::from_str(&text).unwrap();
        assert_eq!(back, desc);
    }
}

#[test]
fn full_lmi_slice_matches_psd() {
    let m = 3;
    let n = m * (m + 1) / 2;
    let matrices = (0..n)
        .map(|i| {
            let mut e = Vector::zeros(n);
            e[i] = 1.0;
            smat(&e, m).transpose().as_slice().to_vec()
        })
        .collect();
    let lmi = Barrier::new(cone(ConeDescriptor::LmiSlice { size: m, matrices, interior: None }));
    let psd = Barrier::new(cone(ConeDescriptor::Psd { m }));
    let mut r = rng(3);
    for _ in 0..50 {
        let x = interior_point(psd.cone(), &mut r, OPTS);
        let h = interior_point(psd.cone(), &mut r, OPTS) - interior_point(psd.cone(), &mut r, OPTS);
        let (a, b) = (lmi.eval(&x).unwrap(), psd.eval(&x).unwrap());
        assert!((a.value - b.value).abs() < 1e-9 * (1.0 + b.value.abs()));
        assert!((a.gradient - &b.gradient).norm() < 1e-9 * b.gradient.norm());
        assert!((a.hessian - &b.hessian).norm() < 1e-9 * b.hessian.norm());
        let (ga, gb) = (lmi.cone().gauge(&x, &h).unwrap().sigma, psd.cone().gauge(&x, &h).unwrap().sigma);
        assert!((ga - gb).abs() < 1e-9 * (1.0 + gb));
    }
}

#[test]
fn svec_preserves_inner_products() {
    let a = SymMatrix::from_row_slice(3, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 5.0, 3.0, 5.0, 6.0]);
    let b = SymMatrix::from_row_slice(3, 3, &[0.5, -1.0, 0.0, -1.0, 2.0, 1.5, 0.0, 1.5, -3.0]);
    assert!((svec(&a).dot(&svec(&b)) - a.dot(&b)).abs() < 1e-12);
    assert!((smat(&svec(&a), 3) - a).norm() < 1e-14);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closed_form_gauge_matches_bisection(seed in any::<u64>(), which in 0usize..9) {
        let (name, desc) = catalog().swap_remove(which);
        let k = cone(desc);
        let mut r = rng(seed);
        let x = interior_point(&k, &mut r, OPTS);
        let h = interior_point(&k, &mut r, OPTS) - interior_point(&k, &mut r, OPTS) * 1.5;
        let a = k.gauge(&x, &h).unwrap().sigma;
        let b = k.gauge_bisect(&x, &h).unwrap().sigma;
        prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a), "{}: {} vs {}", name, a, b);
    }

    #[test]
    fn gauge_is_positively_homogeneous(seed in any::<u64>(), which in 0usize..9, t in 0.01f64..100.0) {
        let (_, desc) = catalog().swap_remove(which);
        let k = cone(desc);
        let mut r = rng(seed);
        let x = interior_point(&k, &mut r, OPTS);
        let h = interior_point(&k, &mut r, OPTS) - interior_point(&k, &mut r, OPTS);
        let a = k.gauge(&x, &h).unwrap().sigma;
        let b = k.gauge(&x, &(&h * t)).unwrap().sigma;
        prop_assert!((b - t * a).abs() <= 1e-9 * (1.0 + t * a));
    }

    #[test]
    fn translate_identity(seed in any::<u64>(), which in 0usize..9) {
        let (name, desc) = catalog().swap_remove(which);
        let k = cone(desc);
        let mut r = rng(seed);
        let x = interior_point(&k, &mut r, OPTS);
        let y = interior_point(&k, &mut r, OPTS);
        let d = &x - &y;
        // 1 + σ_y(d) = 1/(1 − σ_x(d)), compared as σ_x(d) = σ_y(d)/(1 + σ_y(d))
        let from_y = k.gauge(&y, &d).unwrap().sigma;
        let expect = from_y / (1.0 + from_y);
        let from_x = k.gauge(&x, &d).unwrap().sigma;
        prop_assert!((from_x - expect).abs() <= 1e-9 * expect.max(f64::MIN_POSITIVE), "{}: {} vs {}", name, from_x, expect);
    }

    #[test]
    fn gauge_boundary_point_is_on_boundary(seed in any::<u64>(), which in 0usize..9) {
        let (name, desc) = catalog().swap_remove(which);
        let k = cone(desc);
        let mut r = rng(seed);
        let x = interior_point(&k, &mut r, OPTS);
        let h = interior_point(&k, &mut r, OPTS) * 2.0 - interior_point(&k, &mut r, OPTS);
        let g = k.gauge(&x, &h).unwrap();
        if let Some(p) = g.boundary_point {
            let nudge = &x * (1e-7 * p.norm() / x.norm());
            prop_assert!(k.contains(&(&p + &nudge), 0.0).unwrap().is_interior(), "{}", name);
            prop_assert!(!k.contains(&(&p - &nudge), 0.0).unwrap().is_member(), "{}", name);
        }
    }

    #[test]
    fn barrier_gradient_images_lie_in_the_dual(seed in any::<u64>(), which in 0usize..9) {
        let (name, desc) = catalog().swap_remove(which);
        let f = barrier(desc);
        let mut r = rng(seed);
        let x = interior_point(f.cone(), &mut r, OPTS);
        let s = -f.gradient(&x).unwrap();
        prop_assert!(f.cone().dual_contains(&s, 0.0).unwrap().is_interior(), "{}", name);
        prop_assert!(f.cone().contains(&x, 0.0).unwrap().is_interior());
    }
}
