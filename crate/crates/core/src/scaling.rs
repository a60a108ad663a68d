//! Primal–dual scalings, the local complexity measure ξ̌ and membership in
//! the scaling set 𝒯(x, s; ξ).
//!
//! 𝒯(x, s; ξ) holds the positive definite `T` with `Tx = s`, `Tx̃ = s̃` and
//! `F''(x)/(ξδ_F) ⪯ T ⪯ ξδ_F F''(x̃)`.

use serde::Serialize;

use crate::barrier::Barrier;
use crate::cones::{smat, svec, BlockKind};
use crate::denselin::{self, chol_unchecked, SymMatrix, Vector};
use crate::duality::PrimalDualPair;
use crate::error::{Error, Result};
use crate::proximity::delta_f;
use crate::quadrature::gauss_legendre;

pub const DEFAULT_QUAD_ORDER: usize = 32;
/// Relative tolerance on the equality constraints of 𝒯.
pub const EQUALITY_TOL: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    NesterovTodd,
    Integral { quad_order: usize },
    Custom,
}

impl Provenance {
    pub fn label(&self) -> String {
        match self {
            Provenance::NesterovTodd => "nesterov_todd".into(),
            Provenance::Integral { quad_order } => format!("integral({quad_order})"),
            Provenance::Custom => "custom".into(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ScalingCandidate {
    pub t: SymMatrix,
    pub provenance: Provenance,
    /// Scaling point `w` with `F''(w) = T` (Nesterov–Todd only).
    pub scaling_point: Option<Vector>,
}

/// Which scaling a caller asks for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScalingKind {
    NesterovTodd,
    Integral { quad_order: usize },
}

impl ScalingKind {
    pub fn build(self, f: &Barrier, pair: &PrimalDualPair) -> Result<ScalingCandidate> {
        match self {
            ScalingKind::NesterovTodd => nt_scaling(f, pair),
            ScalingKind::Integral { quad_order } => integral_scaling(f, pair, quad_order),
        }
    }
}

/// Nesterov–Todd scaling point `w` with `F''(w)x = s`, block by block.
pub fn nt_point(f: &Barrier, x: &Vector, s: &Vector) -> Result<Vector> {
    let mut w = Vector::zeros(f.dim());
    for b in f.cone().blocks() {
        let (xb, sb) = (b.slice(x), b.slice(s));
        let wb: Vector = match &b.kind {
            BlockKind::Orthant => Vector::from_iterator(b.dim, xb.iter().zip(sb).map(|(x, s)| (x / s).sqrt())),
            BlockKind::Weighted(c) => Vector::from_iterator(
                b.dim,
                xb.iter().zip(sb).zip(c).map(|((x, s), c)| (c * x / s).sqrt()),
            ),
            BlockKind::Psd { m } => {
                let xm = smat(&Vector::from_column_slice(xb), *m);
                let sm = smat(&Vector::from_column_slice(sb), *m);
                let xh = denselin::sym_apply(&xm, f64::sqrt);
                let mid = denselin::symmetrize(&(&xh * sm * &xh));
                let mid_isqrt = denselin::sym_apply(&mid, |l| 1.0 / l.sqrt());
                svec(&denselin::symmetrize(&(&xh * mid_isqrt * &xh)))
            }
            BlockKind::Soc => soc_nt_point(xb, sb),
            BlockKind::Exp | BlockKind::Lmi(_) => {
                return Err(Error::Unsupported {
                    operation: "nesterov_todd scaling",
                    kind: b.kind.name().to_string(),
                    hint: "use the integral scaling (--scaling integral)",
                })
            }
        };
        w.rows_mut(b.offset, b.dim).copy_from(&wb);
    }
    Ok(w)
}

/// Scaling point for `F = −ln(t² − ‖y‖²)`.
fn soc_nt_point(x: &[f64], s: &[f64]) -> Vector {
    let p = x.len() - 1;
    let jdot = |a: &[f64], b: &[f64]| a[p] * b[p] - a[..p].iter().zip(&b[..p]).map(|(u, v)| u * v).sum::<f64>();
    let q = jdot(x, x);
    let omega2 = 2.0 * (q / jdot(s, s)).sqrt();
    let sp: Vec<f64> = s.iter().map(|v| 0.5 * omega2 * v).collect();
    let xs: f64 = x.iter().zip(&sp).map(|(a, b)| a * b).sum();
    let norm = (2.0 * (q + xs)).sqrt();
    let omega = omega2.sqrt();
    Vector::from_iterator(
        p + 1,
        (0..=p).map(|k| {
            let js = if k < p { -sp[k] } else { sp[k] };
            omega * (x[k] + js) / norm
        }),
    )
}

pub fn nt_scaling(f: &Barrier, pair: &PrimalDualPair) -> Result<ScalingCandidate> {
    let w = nt_point(f, &pair.x, &pair.s)?;
    let t = f.hessian(&w)?;
    Ok(ScalingCandidate {
        t,
        provenance: Provenance::NesterovTodd,
        scaling_point: Some(w),
    })
}

/// Averaged Hessian `G = ∫₀¹ F''((1−α)x + αy) dα`.
#[derive(Clone, Debug)]
pub struct AveragedHessian {
    pub g: SymMatrix,
    pub endpoints: (Vector, Vector),
    /// Gauss–Legendre nodes per panel.
    pub quad_order: usize,
    pub panels: usize,
}

/// Local-norm length of one quadrature panel. Inside such a Dikin ball the
/// Hessian is analytic with its nearest singularity at least two panel
/// lengths away.
const PANEL_RADIUS: f64 = 0.5;
const MAX_PANELS: usize = 100_000;

/// Composite Gauss–Legendre approximation of the averaged Hessian, with
/// panels chosen so each spans at most [`PANEL_RADIUS`] in the local norm at
/// its left end.
pub fn averaged_hessian(f: &Barrier, x: &Vector, y: &Vector, quad_order: usize) -> Result<AveragedHessian> {
    let (nodes, weights) = gauss_legendre(quad_order);
    let n = f.dim();
    let d = y - x;
    let mut g = SymMatrix::zeros(n, n);
    let mut a = 0.0;
    let mut panels = 0;
    while a < 1.0 {
        let z = x + &d * a;
        let speed = denselin::quad(&f.hessian(&z)?, &d).max(0.0).sqrt();
        let len = if speed > 0.0 { (PANEL_RADIUS / speed).min(1.0 - a) } else { 1.0 - a };
        let b = if 1.0 - (a + len) < 1e-3 * len { 1.0 } else { a + len };
        for (t, w) in nodes.iter().zip(&weights) {
            let z = x + &d * (a + t * (b - a));
            g += f.hessian(&z)? * (*w * (b - a));
        }
        a = b;
        panels += 1;
        if panels > MAX_PANELS {
            return Err(Error::NonConvergence {
                what: "averaged Hessian panels",
                iterations: panels,
                residual: 1.0 - a,
            });
        }
    }
    Ok(AveragedHessian {
        g: denselin::symmetrize(&g),
        endpoints: (x.clone(), y.clone()),
        quad_order,
        panels,
    })
}

/// Single-panel Gauss–Legendre approximation of the averaged Hessian.
pub fn averaged_hessian_plain(f: &Barrier, x: &Vector, y: &Vector, quad_order: usize) -> Result<AveragedHessian> {
    let (nodes, weights) = gauss_legendre(quad_order);
    let n = f.dim();
    let mut g = SymMatrix::zeros(n, n);
    for (a, w) in nodes.iter().zip(&weights) {
        let z = x * (1.0 - a) + y * *a;
        g += f.hessian(&z)? * *w;
    }
    Ok(AveragedHessian {
        g: denselin::symmetrize(&g),
        endpoints: (x.clone(), y.clone()),
        quad_order,
        panels: 1,
    })
}

/// `T = μ ∫₀¹ F''((1−α)x + αμx̃) dα`.
pub fn integral_scaling(f: &Barrier, pair: &PrimalDualPair, quad_order: usize) -> Result<ScalingCandidate> {
    if quad_order < 8 {
        return Err(Error::InvalidInput(format!(
            "quadrature order must be at least 8, got {quad_order}"
        )));
    }
    let end = &pair.x_shadow * pair.mu;
    let avg = averaged_hessian(f, &pair.x, &end, quad_order)?;
    Ok(ScalingCandidate {
        t: avg.g * pair.mu,
        provenance: Provenance::Integral { quad_order },
        scaling_point: None,
    })
}

/// `ξ̌(x, s) = λ_max^{1/2}(F''(x), F''(x̃)) / δ_F` with the maximizing eigenvector.
#[derive(Clone, Debug, Serialize)]
pub struct XiCheck {
    pub xi_check: f64,
    pub lambda_max: f64,
    pub delta_f: f64,
    pub eigvec: Vec<f64>,
}

pub fn xi_check_local(pair: &PrimalDualPair) -> Result<XiCheck> {
    let (lambda_max, q) = denselin::geneig_max(&pair.hess_x, &pair.hess_x_shadow)?;
    let delta = delta_f(pair)?;
    Ok(XiCheck {
        xi_check: lambda_max.max(0.0).sqrt() / delta,
        lambda_max,
        delta_f: delta,
        eigvec: q.as_slice().to_vec(),
    })
}

/// Membership of a scaling in 𝒯(x, s; ξ), with scale-free margins.
#[derive(Clone, Debug, Serialize)]
pub struct MembershipCertificate {
    pub provenance: Provenance,
    pub xi: f64,
    pub delta_f: f64,
    /// `‖Tx − s‖/‖s‖`
    pub primal_residual: f64,
    /// `‖Tx̃ − s̃‖/‖s̃‖`
    pub shadow_residual: f64,
    /// `ξδ_F λ_min(T, F''(x)) − 1`, nonnegative iff `F''(x)/(ξδ_F) ⪯ T`.
    pub lower_margin: f64,
    /// `1 − λ_max(T, F''(x̃))/(ξδ_F)`, nonnegative iff `T ⪯ ξδ_F F''(x̃)`.
    pub upper_margin: f64,
    /// Smallest ξ for which both matrix inequalities hold.
    pub xi_min: f64,
    pub tol: f64,
    pub accepted: bool,
}

pub fn membership(t: &ScalingCandidate, pair: &PrimalDualPair, xi: f64, tol: f64) -> Result<MembershipCertificate> {
    let delta = delta_f(pair)?;
    let primal_residual = (&t.t * &pair.x - &pair.s).norm() / pair.s.norm();
    let shadow_residual = (&t.t * &pair.x_shadow - &pair.s_shadow).norm() / pair.s_shadow.norm();
    let (lo, _) = denselin::geneig_range(&t.t, &pair.hess_x)?;
    let (_, hi) = denselin::geneig_range(&t.t, &pair.hess_x_shadow)?;
    let lower_margin = xi * delta * lo - 1.0;
    let upper_margin = 1.0 - hi / (xi * delta);
    let xi_min = (1.0 / (delta * lo)).max(hi / delta);
    let accepted = primal_residual <= tol && shadow_residual <= tol && lower_margin >= -tol && upper_margin >= -tol;
    Ok(MembershipCertificate {
        provenance: t.provenance,
        xi,
        delta_f: delta,
        primal_residual,
        shadow_residual,
        lower_margin,
        upper_margin,
        xi_min,
        tol,
        accepted,
    })
}

/// Smallest accepted ξ in `[lo, hi]` by bisection on [`membership`].
pub fn xi_min_bisect(t: &ScalingCandidate, pair: &PrimalDualPair, lo: f64, hi: f64, tol: f64) -> Result<Option<f64>> {
    if !membership(t, pair, hi, tol)?.accepted {
        return Ok(None);
    }
    let (mut a, mut b) = (lo, hi);
    if membership(t, pair, a, tol)?.accepted {
        return Ok(Some(a));
    }
    while b - a > 1e-10 {
        let mid = 0.5 * (a + b);
        if membership(t, pair, mid, tol)?.accepted {
            b = mid;
        } else {
            a = mid;
        }
    }
    Ok(Some(b))
}

#[derive(Clone, Debug, Serialize)]
pub struct ComplexityReport {
    pub xi_check_local: f64,
    pub eigvec: Vec<f64>,
    pub xi_lower: f64,
    /// `+∞` when no candidate satisfies the equality constraints.
    pub xi_upper: f64,
    pub winner: Option<Provenance>,
    pub certificates: Vec<MembershipCertificate>,
}

/// Default candidates: Nesterov–Todd where supported, and the integral scaling.
pub fn default_candidates(f: &Barrier, pair: &PrimalDualPair) -> Result<Vec<ScalingCandidate>> {
    let mut out = Vec::new();
    if f.cone().is_self_scaled() {
        out.push(nt_scaling(f, pair)?);
    }
    out.push(integral_scaling(f, pair, DEFAULT_QUAD_ORDER)?);
    Ok(out)
}

/// Bounds `ξ̌(x, s) ≤ ξ(x, s) ≤ min over candidates of their minimal ξ`.
pub fn xi_local_bounds(pair: &PrimalDualPair, candidates: &[ScalingCandidate]) -> Result<ComplexityReport> {
    if candidates.is_empty() {
        return Err(Error::InvalidInput("no scaling candidates".into()));
    }
    let check = xi_check_local(pair)?;
    let mut certificates = Vec::with_capacity(candidates.len());
    let mut best = (f64::INFINITY, None);
    for c in candidates {
        let probe = membership(c, pair, check.xi_check.max(1e-300), EQUALITY_TOL)?;
        let feasible = probe.primal_residual <= EQUALITY_TOL && probe.shadow_residual <= EQUALITY_TOL;
        if feasible && probe.xi_min < best.0 {
            best = (probe.xi_min, Some(c.provenance));
        }
        certificates.push(membership(c, pair, probe.xi_min, EQUALITY_TOL)?);
    }
    Ok(ComplexityReport {
        xi_check_local: check.xi_check,
        eigvec: check.eigvec,
        xi_lower: check.xi_check,
        xi_upper: if best.0.is_finite() { best.0.max(check.xi_check) } else { f64::INFINITY },
        winner: best.1,
        certificates,
    })
}

/// `λ_max(F''(w)⁻¹F''(x))` at the Nesterov–Todd point `w`.
pub fn nt_eigen_identity(f: &Barrier, pair: &PrimalDualPair) -> Result<f64> {
    let w = nt_point(f, &pair.x, &pair.s)?;
    let hw = f.hessian(&w)?;
    let factor = chol_unchecked(&hw)?;
    Ok(denselin::geneig_with(&pair.hess_x, &factor).max().0)
}
