//! Conjugate-barrier machinery: shadows, dual Hessians and primal–dual pairs.

use crate::barrier::Barrier;
use crate::cones::{smat, svec, Block, BlockKind};
use crate::denselin::{self, chol_unchecked, SymMatrix, Vector};
use crate::error::{Error, Result};

/// Newton stops once the dual local norm of `F'(z) + s` falls below this.
pub const SHADOW_TOL: f64 = 1e-11;
pub const SHADOW_MAX_ITER: usize = 200;
/// Dikin-norm cap on a single damped Newton step.
const DIKIN_CAP: f64 = 0.9;
/// Below this Newton decrement undamped steps are taken.
const QUADRATIC_REGION: f64 = 0.25;
/// Decrement accepted when rounding in `F'` keeps Newton from reaching [`SHADOW_TOL`].
pub const SHADOW_FLOOR: f64 = 1e-9;

/// `s̃ = −F'(x)`.
pub fn shadow_dual(f: &Barrier, x: &Vector) -> Result<Vector> {
    Ok(-f.gradient(x)?)
}

/// `x̃ = −F'_*(s)`, the unique interior `z` with `F'(z) = −s`.
pub fn shadow_primal(f: &Barrier, s: &Vector) -> Result<Vector> {
    shadow_primal_from(f, s, None)
}

/// As [`shadow_primal`], with an optional warm start for the Newton blocks.
pub fn shadow_primal_from(f: &Barrier, s: &Vector, start: Option<&Vector>) -> Result<Vector> {
    let cone = f.cone();
    if s.len() != cone.dim() {
        return Err(Error::DimensionMismatch {
            expected: cone.dim(),
            actual: s.len(),
        });
    }
    let mut z = Vector::zeros(cone.dim());
    for b in cone.blocks() {
        let sb = b.slice(s);
        let zb = match &b.kind {
            BlockKind::Orthant | BlockKind::Weighted(_) => {
                let mut out = Vec::with_capacity(b.dim);
                for (k, &sk) in sb.iter().enumerate() {
                    if !(sk > 0.0) || !sk.is_finite() {
                        return Err(dual_not_interior(b, &format!("s[{k}] > 0"), sk));
                    }
                    let c = match &b.kind {
                        BlockKind::Weighted(w) => w[k],
                        _ => 1.0,
                    };
                    out.push(c / sk);
                }
                Vector::from_vec(out)
            }
            BlockKind::Psd { m } => {
                let sm = smat(&Vector::from_column_slice(sb), *m);
                let factor = chol_unchecked(&sm)
                    .map_err(|_| dual_not_interior(b, "S ≻ 0", denselin::lambda_min(&sm)))?;
                svec(&factor.inverse())
            }
            BlockKind::Soc => {
                let p = b.dim - 1;
                let t = sb[p];
                let yy: f64 = sb[..p].iter().map(|v| v * v).sum();
                let d = t * t - yy;
                if !(t > 0.0) || !(d > 0.0) {
                    return Err(dual_not_interior(b, "t > ‖y‖", t - yy.sqrt()));
                }
                Vector::from_iterator(b.dim, (0..b.dim).map(|k| if k < p { -2.0 * sb[k] / d } else { 2.0 * t / d }))
            }
            BlockKind::Exp | BlockKind::Lmi(_) => {
                let warm = start.map(|w| Vector::from_column_slice(b.slice(w)));
                newton_shadow(f, b, sb, warm)?
            }
        };
        z.rows_mut(b.offset, b.dim).copy_from(&zb);
    }
    Ok(z)
}

fn dual_not_interior(b: &Block, constraint: &str, margin: f64) -> Error {
    Error::NotInterior {
        cone: format!("K* ({})", b.kind.name()),
        constraint: constraint.to_string(),
        margin,
    }
}

/// Damped Newton on `min ⟨s, z⟩ + F(z)` over one block.
fn newton_shadow(f: &Barrier, b: &Block, s: &[f64], warm: Option<Vector>) -> Result<Vector> {
    let sub = block_barrier(f, b)?;
    let s = Vector::from_column_slice(s);
    if s.iter().any(|v| !v.is_finite()) {
        return Err(dual_not_interior(b, "finite entries", f64::NAN));
    }
    let x_ref = sub.cone().interior_point();
    let theta = sub.theta();
    let mut z = match warm.filter(|w| sub.eval(w).is_ok()) {
        Some(w) => w,
        None => {
            let scale = s.dot(&x_ref);
            if !(scale > 0.0) {
                return Err(dual_not_interior(b, "⟨s, x_ref⟩ > 0", scale));
            }
            &x_ref * (theta / scale)
        }
    };
    let phi = |z: &Vector| sub.value(z).ok().map(|v| v + s.dot(z));
    let mut lambda = f64::INFINITY;
    let mut best = (f64::INFINITY, z.clone());
    for _ in 0..SHADOW_MAX_ITER {
        let e = sub.eval(&z)?;
        let r = &s + &e.gradient;
        let dz = -denselin::spd_solve(&e.hessian, &r)?;
        lambda = r.dot(&-&dz).abs().sqrt();
        if lambda < best.0 {
            best = (lambda, z.clone());
        }
        if lambda <= SHADOW_TOL {
            return Ok(z);
        }
        if lambda < QUADRATIC_REGION {
            // full steps stay interior and converge quadratically; φ is too flat to compare here
            let zn = &z + &dz;
            if sub.eval(&zn).is_ok() {
                z = zn;
                continue;
            }
        }
        let phi0 = e.value + s.dot(&z);
        let mut alpha = (DIKIN_CAP / lambda).min(1.0);
        let mut moved = false;
        for _ in 0..60 {
            let zn = &z + &dz * alpha;
            if let Some(p) = phi(&zn) {
                if p <= phi0 + 1e-14 * phi0.abs().max(1.0) {
                    z = zn;
                    moved = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !moved {
            break;
        }
    }
    if best.0 <= SHADOW_FLOOR {
        return Ok(best.1);
    }
    if lambda.is_finite() && lambda < 1e-3 {
        Err(Error::NonConvergence {
            what: "shadow Newton",
            iterations: SHADOW_MAX_ITER,
            residual: lambda,
        })
    } else {
        // Divergence of the conjugate minimization certifies s ∉ int K*.
        let m = f.cone().dual_contains(&embed(f, b, &s), 0.0)?;
        if m.is_interior() {
            Err(Error::NonConvergence {
                what: "shadow Newton",
                iterations: SHADOW_MAX_ITER,
                residual: lambda,
            })
        } else {
            Err(dual_not_interior(b, m.constraint, m.margin))
        }
    }
}

/// Embeds a block vector into a full-dimensional vector whose other blocks
/// are dual-interior, so that cone-level membership reports on `b` alone.
fn embed(f: &Barrier, b: &Block, sb: &Vector) -> Vector {
    let x = f.cone().interior_point();
    let mut s = f.gradient(&x).map(|g| -g).unwrap_or(x);
    s.rows_mut(b.offset, b.dim).copy_from(sb);
    s
}

fn block_barrier(_f: &Barrier, b: &Block) -> Result<Barrier> {
    use crate::cones::{Cone, ConeDescriptor};
    let desc = match &b.kind {
        BlockKind::Exp => ConeDescriptor::Exp { copies: 1 },
        BlockKind::Lmi(d) => ConeDescriptor::LmiSlice {
            size: d.size,
            matrices: d
                .mats
                .iter()
                .map(|a| a.transpose().as_slice().to_vec())
                .collect(),
            interior: Some(d.interior.as_slice().to_vec()),
        },
        _ => unreachable!("closed-form shadow available"),
    };
    Ok(Barrier::new(Cone::new(desc)?))
}

/// `F''_*(s) = F''(x̃)^{-1}`.
pub fn dual_hessian(f: &Barrier, s: &Vector) -> Result<SymMatrix> {
    let xt = shadow_primal(f, s)?;
    let h = f.hessian(&xt)?;
    Ok(denselin::symmetrize(&chol_unchecked(&h)?.inverse()))
}

/// Interior primal–dual pair with cached shadows and Hessians.
#[derive(Clone, Debug)]
pub struct PrimalDualPair {
    pub x: Vector,
    pub s: Vector,
    /// `x̃ = −F'_*(s)`
    pub x_shadow: Vector,
    /// `s̃ = −F'(x)`
    pub s_shadow: Vector,
    /// `μ = ⟨s, x⟩/ϑ`
    pub mu: f64,
    /// `μ̃ = ⟨x̃, s̃⟩/ϑ`
    pub mu_tilde: f64,
    pub theta: f64,
    /// `F''(x)`
    pub hess_x: SymMatrix,
    /// `F''(x̃) = F''_*(s)^{-1}`
    pub hess_x_shadow: SymMatrix,
}

/// Relative slack allowed below `μμ̃ = 1` before a pair is declared inconsistent.
pub const MU_PRODUCT_SLACK: f64 = 1e-10;

pub fn make_pair(f: &Barrier, x: &Vector, s: &Vector) -> Result<PrimalDualPair> {
    make_pair_hint(f, x, s, None)
}

/// As [`make_pair`], warm-starting the shadow computation at `hint`.
pub fn make_pair_hint(f: &Barrier, x: &Vector, s: &Vector, hint: Option<&Vector>) -> Result<PrimalDualPair> {
    let ex = f.eval(x)?;
    let x_shadow = shadow_primal_from(f, s, hint)?;
    let hess_x_shadow = f.hessian(&x_shadow)?;
    let theta = f.theta();
    let s_shadow = -ex.gradient;
    let mu = s.dot(x) / theta;
    let mu_tilde = s_shadow.dot(&x_shadow) / theta;
    if !(mu > 0.0) || !(mu * mu_tilde >= 1.0 - MU_PRODUCT_SLACK) {
        return Err(Error::Inconsistent(format!(
            "pair violates μμ̃ ≥ 1: μ = {mu:e}, μ̃ = {mu_tilde:e}"
        )));
    }
    Ok(PrimalDualPair {
        x: x.clone(),
        s: s.clone(),
        x_shadow,
        s_shadow,
        mu,
        mu_tilde,
        theta,
        hess_x: ex.hessian,
        hess_x_shadow,
    })
}

impl PrimalDualPair {
    /// `μμ̃ − 1`, unclamped.
    pub fn excess(&self) -> f64 {
        self.mu * self.mu_tilde - 1.0
    }

    /// `F''_*(s)`.
    pub fn dual_hessian(&self) -> Result<SymMatrix> {
        Ok(denselin::symmetrize(&chol_unchecked(&self.hess_x_shadow)?.inverse()))
    }
}

/// `μμ̃ − 1 ≤ tol`.
pub fn is_central(pair: &PrimalDualPair, tol: f64) -> bool {
    pair.excess() <= tol
}
