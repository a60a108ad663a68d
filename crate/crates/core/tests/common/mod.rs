#![allow(dead_code)]

use conik::cones::{Cone, ConeDescriptor};
use conik::denselin::Vector;
use conik::duality::PrimalDualPair;
use conik::sample::{self, SampleOptions};
use conik::Barrier;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn barrier(desc: ConeDescriptor) -> Barrier {
    Barrier::new(Cone::new(desc).expect("valid cone"))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn vector(v: &[f64]) -> Vector {
    Vector::from_vec(v.to_vec())
}

/// Every cone family the library implements, at modest sizes.
pub fn catalog() -> Vec<(&'static str, ConeDescriptor)> {
    vec![
        ("orthant", ConeDescriptor::Orthant { n: 4 }),
        ("psd", ConeDescriptor::Psd { m: 3 }),
        ("soc", ConeDescriptor::Soc { blocks: vec![3, 2] }),
        ("exp", ConeDescriptor::Exp { copies: 2 }),
        ("weighted", ConeDescriptor::WeightedOrthant { weights: vec![2.0, 1.5, 1.0] }),
        ("toeplitz-tridiag", ConeDescriptor::toeplitz_tridiag(5)),
        ("toeplitz", ConeDescriptor::toeplitz(3)),
        ("lmi-random", ConeDescriptor::random_lmi(4, 3, 1)),
        (
            "product",
            ConeDescriptor::Product {
                parts: vec![ConeDescriptor::Orthant { n: 2 }, ConeDescriptor::Exp { copies: 1 }],
            },
        ),
    ]
}

/// Cones whose barrier has negative curvature.
pub fn negative_curvature_catalog() -> Vec<(&'static str, ConeDescriptor)> {
    vec![
        ("orthant", ConeDescriptor::Orthant { n: 5 }),
        ("psd", ConeDescriptor::Psd { m: 3 }),
        ("soc", ConeDescriptor::Soc { blocks: vec![4] }),
        ("toeplitz-tridiag", ConeDescriptor::toeplitz_tridiag(5)),
        ("lmi-random", ConeDescriptor::random_lmi(3, 3, 7)),
        ("weighted", ConeDescriptor::WeightedOrthant { weights: vec![2.0, 2.0] }),
    ]
}

/// Deterministic stream of pairs; sample failures are skipped but counted.
pub fn pairs(f: &Barrier, count: usize, seed: u64, opts: SampleOptions) -> (Vec<PrimalDualPair>, usize) {
    let mut r = rng(seed);
    let mut out = Vec::with_capacity(count);
    let mut failures = 0;
    while out.len() < count {
        match sample::pair(f, &mut r, opts) {
            Ok(p) => out.push(p),
            Err(_) => {
                failures += 1;
                assert!(failures <= count / 10 + 5, "too many sampling failures on {}", f.cone().name());
            }
        }
    }
    (out, failures)
}

/// Central-difference gradient of the barrier value.
pub fn fd_gradient(f: &Barrier, x: &Vector, h: f64) -> Vector {
    let mut g = Vector::zeros(x.len());
    for i in 0..x.len() {
        let mut e = Vector::zeros(x.len());
        e[i] = h;
        g[i] = (f.value(&(x + &e)).unwrap() - f.value(&(x - &e)).unwrap()) / (2.0 * h);
    }
    g
}

/// Central-difference Hessian from the analytic gradient.
pub fn fd_hessian(f: &Barrier, x: &Vector, h: f64) -> nalgebra::DMatrix<f64> {
    let n = x.len();
    let mut m = nalgebra::DMatrix::zeros(n, n);
    for i in 0..n {
        let mut e = Vector::zeros(n);
        e[i] = h;
        let col = (f.gradient(&(x + &e)).unwrap() - f.gradient(&(x - &e)).unwrap()) / (2.0 * h);
        m.set_column(i, &col);
    }
    m
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// Step for finite differences: a fraction of the distance to the boundary.
pub fn fd_step(f: &Barrier, x: &Vector) -> f64 {
    let n = x.len();
    let mut reach = f64::INFINITY;
    for i in 0..n {
        let mut e = Vector::zeros(n);
        e[i] = 1.0;
        let a = f.cone().minkowski_norm(x, &e).unwrap();
        if a > 0.0 {
            reach = reach.min(1.0 / a);
        }
    }
    1e-4 * reach.min(x.norm())
}

/// Largest `λ` with `A q = λ B q`; `A ⪯ B` iff it is at most 1.
pub fn loewner_ratio(a: &conik::SymMatrix, b: &conik::SymMatrix) -> f64 {
    conik::denselin::geneig_range(a, b).unwrap().1
}

/// Spectral condition number of a symmetric positive definite matrix.
pub fn cond(m: &conik::SymMatrix) -> f64 {
    let e = m.clone().symmetric_eigen().eigenvalues;
    e.max() / e.min()
}

/// Rounding allowance `16 ε κ(b)` for generalized eigenvalues taken against `b`.
pub fn rounding(b: &conik::SymMatrix) -> f64 {
    16.0 * f64::EPSILON * cond(b)
}

/// `A ⪯ B` up to `tol` plus the rounding allowance of `B`.
pub fn loewner_le(a: &conik::SymMatrix, b: &conik::SymMatrix, tol: f64) -> bool {
    loewner_ratio(a, b) <= 1.0 + tol + rounding(b)
}

/// Random direction rescaled to local norm `r` at `x`.
pub fn direction_with_local_norm(f: &Barrier, x: &Vector, r: f64, rng: &mut impl rand::Rng) -> Vector {
    let g = Vector::from_iterator(x.len(), (0..x.len()).map(|_| rand_distr::Distribution::sample(&rand_distr::StandardNormal, rng)));
    let n = f.local_norm(x, &g).unwrap();
    g * (r / n)
}
