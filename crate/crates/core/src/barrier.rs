//! Logarithmically homogeneous self-concordant barriers on the cone catalog
//! and numerical verifiers for their structural identities.

use serde::Serialize;

use crate::cones::{smat, Block, BlockKind, Cone};
use crate::denselin::{self, chol_unchecked, SymMatrix, Vector};
use crate::error::{Error, Result};

/// Standard barrier on a validated cone: `−Σ ln xᵢ` (weighted for weighted
/// orthants), `−ln det` on PSD blocks and LMI slices, `−ln(t² − ‖y‖²)` on
/// second-order blocks and `−ln(x₁x₂² ln(x₁/x₂) − x₁x₂x₃)` on exponential
/// blocks.
#[derive(Clone, Debug)]
pub struct Barrier {
    cone: Cone,
}

#[derive(Clone, Debug)]
pub struct BarrierEval {
    pub value: f64,
    pub gradient: Vector,
    pub hessian: SymMatrix,
}

#[derive(Clone, Debug, Serialize)]
pub struct LogHomReport {
    /// `|⟨F'(x), x⟩ + ϑ|`
    pub dot_residual: f64,
    /// `‖F''(x)x + F'(x)‖`
    pub hessian_residual: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CurvatureReport {
    /// Finite-difference step actually used.
    pub step: f64,
    /// Largest eigenvalue of the third-derivative matrix `F'''(x; u)`.
    pub max_eig: f64,
    /// Largest eigenvalue of `F''(x)^{-1/2} F'''(x; u) F''(x)^{-1/2}`.
    pub max_eig_whitened: f64,
    pub tol: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SelfConcordanceReport {
    pub step: f64,
    pub local_norm: f64,
    /// `λ_max(F''(x)^{-1/2} F'''(x;h) F''(x)^{-1/2}) / (2‖h‖_x) − 1`, nonpositive
    /// when the inequality holds. Invariant under `(x, h) → (tx, th)`.
    pub normalized_residual: f64,
    pub pass: bool,
}

impl Barrier {
    pub fn new(cone: Cone) -> Self {
        Barrier { cone }
    }

    pub fn cone(&self) -> &Cone {
        &self.cone
    }

    pub fn theta(&self) -> f64 {
        self.cone.theta()
    }

    pub fn dim(&self) -> usize {
        self.cone.dim()
    }

    fn check_dim(&self, v: &Vector) -> Result<()> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: v.len(),
            });
        }
        Ok(())
    }

    /// Value, gradient and Hessian at an interior point.
    pub fn eval(&self, x: &Vector) -> Result<BarrierEval> {
        self.check_dim(x)?;
        let n = self.dim();
        let mut out = BarrierEval {
            value: 0.0,
            gradient: Vector::zeros(n),
            hessian: SymMatrix::zeros(n, n),
        };
        for (i, b) in self.cone.blocks().iter().enumerate() {
            eval_block(b, b.slice(x), &mut out).map_err(|e| match e {
                Error::NotInterior { cone, constraint, margin } => Error::NotInterior {
                    cone,
                    constraint: format!("block {i} {constraint}"),
                    margin,
                },
                e => e,
            })?;
        }
        Ok(out)
    }

    pub fn value(&self, x: &Vector) -> Result<f64> {
        Ok(self.eval(x)?.value)
    }

    pub fn gradient(&self, x: &Vector) -> Result<Vector> {
        Ok(self.eval(x)?.gradient)
    }

    pub fn hessian(&self, x: &Vector) -> Result<SymMatrix> {
        Ok(self.eval(x)?.hessian)
    }

    /// `‖h‖_x = sqrt(⟨F''(x)h, h⟩)`.
    pub fn local_norm(&self, x: &Vector, h: &Vector) -> Result<f64> {
        self.check_dim(h)?;
        let hx = self.hessian(x)?;
        Ok(denselin::quad(&hx, h).max(0.0).sqrt())
    }

    pub fn check_loghom(&self, x: &Vector, tol: f64) -> Result<LogHomReport> {
        let e = self.eval(x)?;
        let theta = self.theta();
        let dot_residual = (e.gradient.dot(x) + theta).abs();
        let hessian_residual = (&e.hessian * x + &e.gradient).norm();
        let bound = tol * theta.max(1.0);
        Ok(LogHomReport {
            dot_residual,
            hessian_residual,
            pass: dot_residual <= bound && hessian_residual <= bound,
        })
    }

    /// Central difference of the Hessian along `u`, with the step scaled by
    /// the Minkowski norm of `u` at `x` so both probes stay interior.
    pub fn third_derivative(&self, x: &Vector, u: &Vector, rel_step: f64) -> Result<(SymMatrix, f64)> {
        self.check_dim(u)?;
        let scale = self.cone.minkowski_norm(x, u)?;
        if scale == 0.0 {
            return Ok((SymMatrix::zeros(self.dim(), self.dim()), 0.0));
        }
        let step = rel_step / scale;
        let hp = self.hessian(&(x + u * step))?;
        let hm = self.hessian(&(x - u * step))?;
        Ok((denselin::symmetrize(&((hp - hm) / (2.0 * step))), step))
    }

    /// Tests concavity of `x ↦ ⟨F'(x), u⟩` at `x` for `u ∈ K`.
    pub fn check_negative_curvature(&self, x: &Vector, u: &Vector, rel_step: f64, tol: f64) -> Result<CurvatureReport> {
        self.check_dim(u)?;
        let m = self.cone.contains(u, 1e-12 * u.norm().max(1.0))?;
        if !m.is_member() {
            return Err(Error::InvalidInput(format!(
                "direction u is not in the cone (margin {:e})",
                m.margin
            )));
        }
        let (d3, step) = self.third_derivative(x, u, rel_step)?;
        let hx = self.hessian(x)?;
        let f = chol_unchecked(&hx)?;
        let max_eig = denselin::lambda_max(&d3);
        let max_eig_whitened = denselin::lambda_max(&f.whiten(&d3));
        Ok(CurvatureReport {
            step,
            max_eig,
            max_eig_whitened,
            tol,
            pass: max_eig_whitened <= tol,
        })
    }

    /// Tests `F'''(x; h) ⪯ 2‖h‖_x F''(x)`.
    pub fn check_selfconcordance(&self, x: &Vector, h: &Vector, rel_step: f64, tol: f64) -> Result<SelfConcordanceReport> {
        let (d3, step) = self.third_derivative(x, h, rel_step)?;
        let hx = self.hessian(x)?;
        let local_norm = denselin::quad(&hx, h).max(0.0).sqrt();
        if local_norm == 0.0 {
            return Ok(SelfConcordanceReport {
                step,
                local_norm,
                normalized_residual: -1.0,
                pass: true,
            });
        }
        let f = chol_unchecked(&hx)?;
        let lmax = denselin::lambda_max(&f.whiten(&d3));
        let normalized_residual = lmax / (2.0 * local_norm) - 1.0;
        Ok(SelfConcordanceReport {
            step,
            local_norm,
            normalized_residual,
            pass: normalized_residual <= tol,
        })
    }
}

fn not_interior(b: &Block, constraint: &str, margin: f64) -> Error {
    Error::NotInterior {
        cone: b.kind.name().to_string(),
        constraint: constraint.to_string(),
        margin,
    }
}

fn eval_block(b: &Block, x: &[f64], out: &mut BarrierEval) -> Result<()> {
    let o = b.offset;
    match &b.kind {
        BlockKind::Orthant | BlockKind::Weighted(_) => {
            let weights = match &b.kind {
                BlockKind::Weighted(w) => Some(w),
                _ => None,
            };
            for (k, &xk) in x.iter().enumerate() {
                if !(xk > 0.0) || !xk.is_finite() {
                    return Err(not_interior(b, &format!("x[{k}] > 0"), xk));
                }
                let c = weights.map_or(1.0, |w| w[k]);
                out.value -= c * xk.ln();
                out.gradient[o + k] = -c / xk;
                out.hessian[(o + k, o + k)] = c / (xk * xk);
            }
        }
        BlockKind::Psd { m } => {
            let xm = smat(&Vector::from_column_slice(x), *m);
            let f = chol_unchecked(&xm).map_err(|_| {
                not_interior(b, "X ≻ 0", denselin::lambda_min(&xm))
            })?;
            let xi = f.inverse();
            out.value -= f.log_det();
            let g = crate::cones::svec(&xi);
            let mut idx = Vec::with_capacity(b.dim);
            for j in 0..*m {
                for i in j..*m {
                    idx.push((i, j));
                }
            }
            for (p, &(i, j)) in idx.iter().enumerate() {
                out.gradient[o + p] = -g[p];
                let sp = if i == j { 1.0 } else { std::f64::consts::SQRT_2 };
                for (q, &(k, l)) in idx.iter().enumerate().skip(p) {
                    let sq = if k == l { 1.0 } else { std::f64::consts::SQRT_2 };
                    let v = 0.5 * sp * sq * (xi[(i, k)] * xi[(j, l)] + xi[(i, l)] * xi[(j, k)]);
                    out.hessian[(o + p, o + q)] = v;
                    out.hessian[(o + q, o + p)] = v;
                }
            }
        }
        BlockKind::Soc => {
            let p = x.len() - 1;
            let t = x[p];
            let yy: f64 = x[..p].iter().map(|v| v * v).sum();
            let d = t * t - yy;
            if !(t > 0.0) || !(d > 0.0) {
                return Err(not_interior(b, "t > ‖y‖", t - yy.sqrt()));
            }
            out.value -= d.ln();
            // Jx with J = diag(−1, …, −1, 1)
            let jx: Vec<f64> = (0..=p).map(|k| if k < p { -x[k] } else { x[k] }).collect();
            for a in 0..=p {
                out.gradient[o + a] = -2.0 * jx[a] / d;
                for c in 0..=p {
                    let jdiag = if a == c {
                        if a < p { -1.0 } else { 1.0 }
                    } else {
                        0.0
                    };
                    out.hessian[(o + a, o + c)] = -2.0 * jdiag / d + 4.0 * jx[a] * jx[c] / (d * d);
                }
            }
        }
        BlockKind::Exp => {
            let (x1, x2, x3) = (x[0], x[1], x[2]);
            if !(x1 > 0.0) || !(x2 > 0.0) {
                return Err(not_interior(b, "x₁ > 0, x₂ > 0", x1.min(x2)));
            }
            let l = (x1 / x2).ln();
            let g = x2 * l - x3;
            if !(g > 0.0) || !g.is_finite() {
                return Err(not_interior(b, "x₂ ln(x₁/x₂) > x₃", g));
            }
            out.value += -x1.ln() - x2.ln() - g.ln();
            let dg = [x2 / x1, l - 1.0, -1.0];
            let d2g = [
                [-x2 / (x1 * x1), 1.0 / x1, 0.0],
                [1.0 / x1, -1.0 / x2, 0.0],
                [0.0, 0.0, 0.0],
            ];
            let base = [1.0 / x1, 1.0 / x2, 0.0];
            for a in 0..3 {
                out.gradient[o + a] = -base[a] - dg[a] / g;
                for c in 0..3 {
                    let diag = if a == c { base[a] * base[a] } else { 0.0 };
                    out.hessian[(o + a, o + c)] = diag - d2g[a][c] / g + dg[a] * dg[c] / (g * g);
                }
            }
        }
        BlockKind::Lmi(d) => {
            let m = d.matrix(x);
            let f = chol_unchecked(&m).map_err(|_| {
                not_interior(b, "Σ xᵢAᵢ ≻ 0", denselin::lambda_min(&m))
            })?;
            out.value -= f.log_det();
            let w: Vec<SymMatrix> = d.mats.iter().map(|a| f.whiten(a)).collect();
            for i in 0..w.len() {
                out.gradient[o + i] = -w[i].trace();
                for j in i..w.len() {
                    let v = w[i].dot(&w[j]);
                    out.hessian[(o + i, o + j)] = v;
                    out.hessian[(o + j, o + i)] = v;
                }
            }
        }
    }
    Ok(())
}
