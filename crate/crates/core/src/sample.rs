//! Random interior points and primal–dual pairs.
//!
//! Points are drawn along random rays from the canonical interior point,
//! at a random fraction of the distance to the boundary, then rescaled.
//! Dual points are built as `s = −λF'(y)` for an independent interior `y`,
//! which makes the primal shadow `x̃ = y/λ` known exactly.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::barrier::Barrier;
use crate::cones::Cone;
use crate::denselin::{quad, Vector};
use crate::duality::{make_pair_hint, PrimalDualPair};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct SampleOptions {
    /// Largest fraction of the distance to the boundary.
    pub depth: f64,
    /// Standard deviation of the log of the random scale factor.
    pub log_scale: f64,
}

impl Default for SampleOptions {
    fn default() -> Self {
        SampleOptions {
            depth: 0.999,
            log_scale: 1.0,
        }
    }
}

fn gaussian(rng: &mut impl Rng, n: usize) -> Vector {
    Vector::from_iterator(n, (0..n).map(|_| StandardNormal.sample(rng)))
}

fn normal(rng: &mut impl Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Random interior point of `K`, block by block.
pub fn interior_point(cone: &Cone, rng: &mut impl Rng, opts: SampleOptions) -> Vector {
    let center = cone.interior_point();
    let mut x = center.clone();
    for b in cone.blocks() {
        let mut d = Vector::zeros(cone.dim());
        let g = gaussian(rng, b.dim);
        d.rows_mut(b.offset, b.dim).copy_from(&(&g / g.norm().max(1e-300)));
        // distance to the boundary along d is 1/σ_c(−d)
        let sigma = cone.gauge(&center, &-&d).map(|g| g.sigma).unwrap_or(f64::INFINITY);
        let reach = if sigma > 0.0 { 1.0 / sigma } else { 3.0 };
        let frac = opts.depth * rng.random::<f64>().powf(0.5);
        x += d * (reach * frac);
    }
    let scale = (opts.log_scale * normal(rng)).exp();
    x * scale
}

/// Random pair `(x, s)` with `s = −λF'(y)`; returns the pair and `y/λ = x̃`.
pub fn pair(f: &Barrier, rng: &mut impl Rng, opts: SampleOptions) -> Result<PrimalDualPair> {
    let x = interior_point(f.cone(), rng, opts);
    let y = interior_point(f.cone(), rng, opts);
    let lambda = (opts.log_scale * normal(rng)).exp();
    let s = -f.gradient(&y)? * lambda;
    make_pair_hint(f, &x, &s, Some(&(y / lambda)))
}

/// Pair with `y = x + h`, `‖h‖_x ≤ spread`, so the pair is nearly central.
/// `spread` must lie in `[0, 1)`, which keeps `y` inside the Dikin ellipsoid.
pub fn near_central_pair(f: &Barrier, rng: &mut impl Rng, opts: SampleOptions, spread: f64) -> Result<PrimalDualPair> {
    if !(0.0..1.0).contains(&spread) {
        return Err(Error::InvalidInput(format!("spread {spread} is outside [0, 1)")));
    }
    let x = interior_point(f.cone(), rng, opts);
    let d = gaussian(rng, x.len());
    let local = quad(&f.hessian(&x)?, &d).sqrt();
    let y = &x + d * (spread * rng.random::<f64>() / local.max(1e-300));
    let lambda = (opts.log_scale * normal(rng)).exp();
    let s = -f.gradient(&y)? * lambda;
    make_pair_hint(f, &x, &s, Some(&(y / lambda)))
}
