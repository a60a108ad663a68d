//! Worst-case pairs for ξ̌: the v-space problem on orthants, explicit
//! worst-case points, extreme directions of the slice problem
//!
//! ```text
//! maximize ⟨F''(x̃)v, v⟩  subject to  ⟨s, v⟩ = μϑ,  v ∈ K,
//! ```
//!
//! the induced points `x̂ = (1−τ)v + τμx̃`, and multi-start searches for
//! `sup ξ̌`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::barrier::Barrier;
use crate::denselin::{self, SymMatrix, Vector};
use crate::duality::{make_pair, shadow_primal, PrimalDualPair};
use crate::error::{Error, Result};
use crate::optim::{golden_section, nelder_mead};
use crate::proximity::{gamma_g, gamma_inf, tau_rho, tau_rho_real};
use crate::scaling::xi_check_local;

/// `R(x, s, v) = ⟨F''_*(s)^{-1}v, v⟩ / ⟨F''(x)v, v⟩`.
pub fn ratio_r(pair: &PrimalDualPair, v: &Vector) -> Result<f64> {
    if v.len() != pair.x.len() {
        return Err(Error::DimensionMismatch {
            expected: pair.x.len(),
            actual: v.len(),
        });
    }
    if v.iter().all(|&c| c == 0.0) {
        return Err(Error::InvalidInput("v must be nonzero".into()));
    }
    Ok(denselin::quad(&pair.hess_x_shadow, v) / denselin::quad(&pair.hess_x, v))
}

#[derive(Clone, Debug, Serialize)]
pub struct VSpaceResult {
    pub n: usize,
    /// `1/min f`
    pub xi: f64,
    /// Optimal `v`, normalized so that `min v = 1`.
    pub v_opt: Vec<f64>,
    pub alpha_opt: f64,
    /// Same quantity from projected-gradient descent on the unreduced problem.
    pub xi_descent: f64,
}

/// Solves the orthant v-space problem
///
/// ```text
/// minimize 1 + Σ_{j<n} 1/v_j − (n−1)/α   s.t.  v_j ≥ 1,  1 + Σ_{j<n} v_j = nα
/// ```
///
/// by golden section on the symmetric reduction `v_j = τ²(α−1) + 1`, and
/// independently by projected gradient on `(v_1, …, v_{n−1})`.
pub fn vspace_xi_orthant(n: usize) -> Result<VSpaceResult> {
    let (tau, _) = tau_rho(n)?;
    let m = (n - 1) as f64;
    let f = |alpha: f64| 1.0 + m / (tau * tau * (alpha - 1.0) + 1.0) - m / alpha;
    let (alpha, fmin) = golden_section(f, 1.0, 4.0, 1e-13);
    let vj = tau * tau * (alpha - 1.0) + 1.0;
    let mut v_opt = vec![vj; n - 1];
    v_opt.push(1.0);
    Ok(VSpaceResult {
        n,
        xi: 1.0 / fmin,
        v_opt,
        alpha_opt: alpha,
        xi_descent: 1.0 / vspace_descent(n),
    })
}

/// Projected gradient with Armijo backtracking on
/// `g(v) = 1 + Σ 1/v_j − n(n−1)/(1 + Σ v_j)`, `v_j ≥ 1`.
fn vspace_descent(n: usize) -> f64 {
    let nn = n as f64;
    let g = |v: &[f64]| {
        let sum: f64 = v.iter().sum();
        1.0 + v.iter().map(|x| 1.0 / x).sum::<f64>() - nn * (nn - 1.0) / (1.0 + sum)
    };
    let mut v: Vec<f64> = (0..n - 1).map(|j| 1.5 + 0.5 * (j % 3) as f64).collect();
    let mut val = g(&v);
    let mut step = 1.0;
    for _ in 0..20_000 {
        let sum: f64 = v.iter().sum();
        let c = nn * (nn - 1.0) / (1.0 + sum).powi(2);
        let grad: Vec<f64> = v.iter().map(|x| -1.0 / (x * x) + c).collect();
        let mut accepted = false;
        while step > 1e-18 {
            let trial: Vec<f64> = v.iter().zip(&grad).map(|(x, d)| (x - step * d).max(1.0)).collect();
            let tv = g(&trial);
            let moved: f64 = trial.iter().zip(&v).map(|(a, b)| (a - b) * (a - b)).sum();
            if tv <= val - 1e-4 * moved / step {
                let done = (val - tv).abs() <= 1e-17 * val.abs();
                v = trial;
                val = tv;
                accepted = !done;
                step *= 2.0;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    val
}

#[derive(Clone, Debug, Serialize)]
pub struct WeightedVSpaceResult {
    pub weights: Vec<f64>,
    pub xi: f64,
    /// Index whose ratio `c_k/v_k` is maximal at the optimum.
    pub active: usize,
    /// Common factor `v_i = β c_i` for `i ≠ active`, `v_active = c_active`.
    pub beta: f64,
}

/// `ξ̌` for the weighted orthant barrier `−Σ cᵢ ln xᵢ`.
///
/// With `vᵢ = xᵢsᵢ`, `1/ξ̌ = inf_v δ(v)/max_i(cᵢ/vᵢ)` with
/// `δ(v) = Σ cᵢ²/vᵢ − ϑ(ϑ−1)/Σ vᵢ`. Normalizing `v_k = c_k` at the active
/// index reduces the problem to one variable `β ≥ 1` per index.
pub fn vspace_xi_weighted(weights: &[f64]) -> Result<WeightedVSpaceResult> {
    if weights.len() < 2 || weights.iter().any(|c| !(c.is_finite() && *c >= 1.0)) {
        return Err(Error::InvalidInput("need at least two weights, each ≥ 1".into()));
    }
    let theta: f64 = weights.iter().sum();
    let mut best = (f64::INFINITY, 0, 1.0);
    for (k, &ck) in weights.iter().enumerate() {
        let rest = theta - ck;
        let delta = |beta: f64| ck + rest / beta - theta * (theta - 1.0) / (ck + beta * rest);
        // δ has a single stationary point in β > 0, so it is unimodal on [1, ∞)
        let (beta, val) = golden_section(|u| delta(1.0 + u * u), 0.0, 1e3, 1e-14);
        let beta = 1.0 + beta * beta;
        let val = val.min(delta(1.0));
        if val < best.0 {
            best = (val, k, beta);
        }
    }
    Ok(WeightedVSpaceResult {
        weights: weights.to_vec(),
        xi: 1.0 / best.0,
        active: best.1,
        beta: best.2,
    })
}

/// Worst-case primal point for the orthant: `x_j = τμx̃_j` for `j ≠ i` and
/// `x_i = τ/(τ+1)·μx̃_i`, with `x̃ = 1/s` and `i` zero-based.
pub fn worstcase_orthant(n: usize, s: &Vector, i: usize, mu: f64) -> Result<Vector> {
    let (tau, _) = tau_rho(n)?;
    if s.len() != n || i >= n || !(mu > 0.0) || s.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::InvalidInput(
            "need s > 0 of length n, i < n and μ > 0".into(),
        ));
    }
    Ok(Vector::from_iterator(
        n,
        (0..n).map(|j| {
            let base = tau * mu / s[j];
            if j == i { base / (tau + 1.0) } else { base }
        }),
    ))
}

#[derive(Clone, Debug, Serialize)]
pub struct ExtremeCandidate {
    pub v: Vec<f64>,
    /// `⟨F''(x̃)v, v⟩`
    pub value: f64,
    /// `‖v − μx̃‖²_{μx̃}`
    pub norm2: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExtremeSearch {
    pub mu: f64,
    pub theta: f64,
    /// `ϑ(ϑ−1)`, the largest possible `‖v − μx̃‖²_{μx̃}` on the slice.
    pub target: f64,
    /// Distinct local maximizers, best first.
    pub candidates: Vec<ExtremeCandidate>,
    /// Maximizers meeting the norm condition (empty when not found).
    pub attaining: Vec<ExtremeCandidate>,
    pub found: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct ExtremeSearchOptions {
    /// Relative tolerance on the norm condition.
    pub tol: f64,
    /// Angular grid resolution on two-dimensional slices.
    pub grid: usize,
    /// Random starts on higher-dimensional slices.
    pub starts: usize,
    pub seed: u64,
}

impl Default for ExtremeSearchOptions {
    fn default() -> Self {
        ExtremeSearchOptions {
            tol: 1e-7,
            grid: 720,
            starts: 64,
            seed: 0,
        }
    }
}

/// Slice geometry around `c = μx̃` on `{⟨s, v⟩ = μϑ}`.
struct Slice<'a> {
    f: &'a Barrier,
    center: Vector,
    basis: SymMatrix,
    h: SymMatrix,
    mu: f64,
}

impl Slice<'_> {
    fn direction(&self, u: &[f64]) -> Option<Vector> {
        let d = &self.basis * Vector::from_column_slice(u);
        let norm = d.norm();
        (norm > 0.0).then(|| d / norm)
    }

    /// Boundary point along unit direction `d`, with its `‖v − c‖²_c`.
    fn boundary(&self, d: &Vector) -> Option<(Vector, f64)> {
        let sigma = self.f.cone().gauge(&self.center, &-d).ok()?.sigma;
        if !(sigma > 0.0) {
            return None;
        }
        let step = d / sigma;
        let norm2 = denselin::quad(&self.h, &step) / (self.mu * self.mu);
        Some((&self.center + step, norm2))
    }
}

/// Maximizes `⟨F''(x̃)v, v⟩` over the slice `{⟨s, v⟩ = μϑ} ∩ K`.
///
/// Along any ray from `μx̃` in the slice the objective is a convex quadratic
/// with zero slope at the center, so maximizers lie on the slice boundary
/// and the search runs over directions.
pub fn extreme_v_search(f: &Barrier, s: &Vector, mu: f64, opts: ExtremeSearchOptions) -> Result<ExtremeSearch> {
    if !(mu > 0.0) {
        return Err(Error::InvalidInput("μ must be positive".into()));
    }
    let theta = f.theta();
    let xt = shadow_primal(f, s)?;
    let h = f.hessian(&xt)?;
    let slice = Slice {
        f,
        center: &xt * mu,
        basis: denselin::complement_basis(s),
        h: h.clone(),
        mu,
    };
    let k = slice.basis.ncols();
    let mut raw: Vec<(Vector, f64)> = Vec::new();
    let score = |u: &[f64]| -> f64 {
        slice
            .direction(u)
            .and_then(|d| slice.boundary(&d))
            .map_or(f64::NEG_INFINITY, |(_, n2)| n2)
    };
    match k {
        0 => {}
        1 => {
            for sign in [1.0, -1.0] {
                if let Some(b) = slice.direction(&[sign]).and_then(|d| slice.boundary(&d)) {
                    raw.push(b);
                }
            }
        }
        2 => {
            let m = opts.grid.max(16);
            let angle = |i: f64| i * std::f64::consts::TAU / m as f64;
            let vals: Vec<f64> = (0..m).map(|i| score(&[angle(i as f64).cos(), angle(i as f64).sin()])).collect();
            for i in 0..m {
                let (prev, next) = (vals[(i + m - 1) % m], vals[(i + 1) % m]);
                if vals[i] >= prev && vals[i] >= next && vals[i].is_finite() {
                    let (a, _) = golden_section(
                        |t| -score(&[t.cos(), t.sin()]),
                        angle(i as f64 - 1.0),
                        angle(i as f64 + 1.0),
                        1e-15,
                    );
                    if let Some(b) = slice.direction(&[a.cos(), a.sin()]).and_then(|d| slice.boundary(&d)) {
                        raw.push(b);
                    }
                }
            }
        }
        _ => {
            let results: Vec<Option<(Vector, f64)>> = (0..opts.starts.max(1))
                .into_par_iter()
                .map(|start| {
                    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
                    rng.set_stream(start as u64);
                    let u0: Vec<f64> = (0..k).map(|_| StandardNormal.sample(&mut rng)).collect();
                    let r = nelder_mead(|u| -score(u), &u0, 0.3, 4000, 1e-15);
                    slice.direction(&r.x).and_then(|d| slice.boundary(&d))
                })
                .collect();
            raw.extend(results.into_iter().flatten());
        }
    }
    let target = theta * (theta - 1.0);
    let scale = slice.center.norm();
    let mut candidates: Vec<ExtremeCandidate> = Vec::new();
    raw.sort_by(|a, b| b.1.total_cmp(&a.1));
    for (v, n2) in raw {
        if candidates
            .iter()
            .any(|c| (Vector::from_column_slice(&c.v) - &v).norm() <= 1e-5 * scale)
        {
            continue;
        }
        candidates.push(ExtremeCandidate {
            value: denselin::quad(&h, &v),
            v: v.as_slice().to_vec(),
            norm2: n2,
        });
    }
    let attaining: Vec<ExtremeCandidate> = candidates
        .iter()
        .filter(|c| c.norm2 >= target * (1.0 - opts.tol))
        .cloned()
        .collect();
    Ok(ExtremeSearch {
        mu,
        theta,
        target,
        found: !attaining.is_empty(),
        candidates,
        attaining,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CertificateCheck {
    pub name: &'static str,
    pub value: f64,
    pub target: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct WorstCaseCertificate {
    pub v: Vec<f64>,
    pub x_hat: Vec<f64>,
    pub r: Vec<f64>,
    pub u: Vec<f64>,
    pub t: Vec<f64>,
    pub mu: f64,
    pub theta: f64,
    pub tau: f64,
    pub rho: f64,
    /// `R(x̂, s, v)`
    pub ratio: f64,
    pub xi_at_xhat: f64,
    pub gamma_g: f64,
    pub gamma_inf: f64,
    pub checks: Vec<CertificateCheck>,
    pub valid: bool,
}

/// Clause tolerance for certificate validity.
pub const CERT_TOL: f64 = 1e-7;

/// Builds `x̂ = (1−τ)v + τμx̃`, `r = τ(s − F''(x̃)v/(μϑ))`,
/// `u = (s + τμF'(x̂))/(1−τ)` and `t = τ(x̂ − F''(x̂)^{-1}u/(μϑ))` and
/// re-verifies each claimed property.
pub fn hatx_construct(f: &Barrier, s: &Vector, v: &Vector, mu: f64) -> Result<WorstCaseCertificate> {
    let theta = f.theta();
    let (tau, rho) = tau_rho_real(theta);
    let cone = f.cone();
    let xt = shadow_primal(f, s)?;
    let h_xt = f.hessian(&xt)?;
    let c = &xt * mu;
    let mut checks = Vec::new();
    let mut check = |name: &'static str, value: f64, target: f64, pass: bool| {
        checks.push(CertificateCheck { name, value, target, pass });
    };
    let mt = mu * theta;

    let v_margin = cone.contains(v, 0.0)?.margin / v.norm();
    check("v in K", v_margin, 0.0, v_margin >= -CERT_TOL);
    let sv = s.dot(v);
    check("<s,v> = mu*theta", sv, mt, (sv - mt).abs() <= CERT_TOL * mt);
    let norm2 = denselin::quad(&h_xt, &(v - &c)) / (mu * mu);
    let target = theta * (theta - 1.0);
    check(
        "|v - mu*xt|^2 = theta(theta-1)",
        norm2,
        target,
        (norm2 - target).abs() <= CERT_TOL * target,
    );

    let x_hat = v * (1.0 - tau) + &c * tau;
    let interior = cone.contains(&x_hat, 0.0)?;
    check("x_hat interior", interior.margin, 0.0, interior.is_interior());
    let sx = s.dot(&x_hat);
    check("<s,x_hat> = mu*theta", sx, mt, (sx - mt).abs() <= CERT_TOL * mt);
    let dikin = (denselin::quad(&h_xt, &(&x_hat - &c)) / (mu * mu)).sqrt();
    let radius = tau / (tau + 1.0);
    check("|x_hat - mu*xt| = tau/(tau+1)", dikin, radius, (dikin - radius).abs() <= 1e-8);

    let r = (s - &h_xt * v / mt) * tau;
    let r_margin = cone.dual_contains(&r, 0.0)?.margin / r.norm();
    check("r in K*", r_margin, 0.0, r_margin >= -CERT_TOL);

    if !interior.is_interior() {
        return Err(Error::Inconsistent(format!(
            "x̂ is not interior (margin {:e})",
            interior.margin
        )));
    }
    let e_hat = f.eval(&x_hat)?;
    // mirror of x̂ on the dual slice {⟨x̂, y⟩ = μϑ} centered at −μF'(x̂)
    let u = (s + &e_hat.gradient * (tau * mu)) / (1.0 - tau);
    let u_margin = cone.dual_contains(&u, 0.0)?.margin / u.norm();
    check("u in K*", u_margin, 0.0, u_margin >= -CERT_TOL);
    let h_hat = denselin::chol_factor(&e_hat.hessian)?;
    let du = &u + &e_hat.gradient * mu;
    let u_norm2 = du.dot(&h_hat.solve(&du)) / (mu * mu);
    check(
        "|u - mu*s_hat|*^2 = theta(theta-1)",
        u_norm2,
        target,
        (u_norm2 - target).abs() <= CERT_TOL * target,
    );
    let hinv_u = h_hat.solve(&u);
    let t = (&x_hat - hinv_u / mt) * tau;
    let t_margin = cone.contains(&t, 0.0)?.margin / t.norm();
    check("t in K", t_margin, 0.0, t_margin >= -CERT_TOL);

    let pair = make_pair(f, &x_hat, s)?;
    let xi = xi_check_local(&pair)?.xi_check;
    let ratio = ratio_r(&pair, v)?;
    let gg = gamma_g(&pair)?;
    let gi = gamma_inf(f, &pair)?;
    let valid = checks.iter().all(|c| c.pass);
    Ok(WorstCaseCertificate {
        v: v.as_slice().to_vec(),
        x_hat: x_hat.as_slice().to_vec(),
        r: r.as_slice().to_vec(),
        u: u.as_slice().to_vec(),
        t: t.as_slice().to_vec(),
        mu,
        theta,
        tau,
        rho,
        ratio,
        xi_at_xhat: xi,
        gamma_g: gg,
        gamma_inf: gi,
        checks,
        valid,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SupSearch {
    pub best_xi: f64,
    pub best_x: Vec<f64>,
    pub best_s: Vec<f64>,
    /// Best value reached by each start, in start order.
    pub per_start: Vec<f64>,
    /// Applicable theorem bound: 4/3 with negative curvature, else 2ϑ.
    pub bound: f64,
    pub rho_theta: f64,
    pub evaluations: usize,
    pub violates_bound: bool,
}

/// Maps unconstrained coordinates to the slice `{⟨−F'(c), x⟩ = ϑ} ∩ int K`
/// through `u ↦ c + tanh(‖u‖)·L(d)·d`, `L(d)` the boundary distance along `d`.
struct SliceChart {
    center: Vector,
    basis: SymMatrix,
}

impl SliceChart {
    fn new(f: &Barrier) -> Result<Self> {
        let center = f.cone().interior_point();
        let normal = -f.gradient(&center)?;
        Ok(SliceChart {
            basis: denselin::complement_basis(&normal),
            center,
        })
    }

    fn point(&self, f: &Barrier, u: &[f64]) -> Option<Vector> {
        let norm = u.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Some(self.center.clone());
        }
        let d = &self.basis * Vector::from_column_slice(u) / norm;
        let sigma = f.cone().gauge(&self.center, &-&d).ok()?.sigma;
        let reach = if sigma > 0.0 { 1.0 / sigma } else { 1e6 };
        Some(&self.center + d * (norm.tanh() * reach))
    }
}

/// Multi-start Nelder–Mead maximization of `ξ̌(x, −F'(y))` over `x, y` in
/// the interior, each parameterized on a slice (ξ̌ is invariant under
/// separate positive scaling of `x` and `s`). Deterministic per seed.
pub fn xi_sup_search(f: &Barrier, n_starts: usize, seed: u64, budget: usize) -> Result<SupSearch> {
    if budget == 0 {
        return Err(Error::InvalidInput("budget must be positive".into()));
    }
    let chart = SliceChart::new(f)?;
    let k = chart.basis.ncols();
    let theta = f.theta();
    let bound = if f.cone().has_negative_curvature() { 4.0 / 3.0 } else { 2.0 * theta };
    let rho_theta = if theta > 1.0 { tau_rho_real(theta).1 } else { 1.0 };
    let eval = |u: &[f64]| -> Option<(f64, Vector, Vector)> {
        let x = chart.point(f, &u[..k])?;
        let y = chart.point(f, &u[k..])?;
        let s = -f.gradient(&y).ok()?;
        let pair = crate::duality::make_pair_hint(f, &x, &s, Some(&y)).ok()?;
        let xi = xi_check_local(&pair).ok()?.xi_check;
        Some((xi, x, s))
    };
    let runs: Vec<(f64, Vec<f64>, usize)> = (0..n_starts.max(1))
        .into_par_iter()
        .map(|start| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(start as u64);
            let mut u: Vec<f64> = (0..2 * k).map(|_| StandardNormal.sample(&mut rng)).collect();
            let mut best = eval(&u).map_or(f64::NEG_INFINITY, |r| r.0);
            let mut used = 1;
            if k == 0 {
                return (best, u, used);
            }
            while used < budget {
                let r = nelder_mead(
                    |p| eval(p).map_or(f64::INFINITY, |r| -r.0),
                    &u,
                    0.5,
                    budget - used,
                    1e-14,
                );
                used += r.evaluations;
                if -r.value > best + 1e-13 {
                    best = -r.value;
                    u = r.x;
                } else {
                    break;
                }
            }
            (best, u, used)
        })
        .collect();
    let mut best_idx = 0;
    for (i, r) in runs.iter().enumerate() {
        if r.0 > runs[best_idx].0 {
            best_idx = i;
        }
    }
    let (best_xi, u, _) = &runs[best_idx];
    let (_, x, s) = eval(u).ok_or_else(|| Error::Inconsistent("best point no longer evaluates".into()))?;
    Ok(SupSearch {
        best_xi: *best_xi,
        best_x: x.as_slice().to_vec(),
        best_s: s.as_slice().to_vec(),
        per_start: runs.iter().map(|r| r.0).collect(),
        bound,
        rho_theta,
        evaluations: runs.iter().map(|r| r.2).sum(),
        violates_bound: *best_xi > bound + 1e-7,
    })
}

/// Grid point on a two-dimensional section of the slice `{⟨s, x⟩ = μϑ}`.
#[derive(Clone, Debug, Serialize)]
pub struct SliceRow {
    pub a: f64,
    pub b: f64,
    pub x: Vec<f64>,
    pub inside: bool,
    /// `‖x − μx̃‖_{μx̃}`
    pub dikin: f64,
    pub gamma_g: Option<f64>,
    pub gamma_inf: Option<f64>,
    pub xi_check: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundaryRow {
    pub angle: f64,
    pub a: f64,
    pub b: f64,
    pub x: Vec<f64>,
}

/// Section coordinates: center `μx̃`, up to two directions of an orthonormal
/// basis of `s^⊥`, and the Hessian at `x̃`.
struct Section {
    center: Vector,
    dirs: Vec<Vector>,
    h: SymMatrix,
}

fn section(f: &Barrier, s: &Vector, mu: f64) -> Result<Section> {
    let xt = shadow_primal(f, s)?;
    let h = f.hessian(&xt)?;
    let basis = denselin::complement_basis(s);
    let dirs = (0..basis.ncols().min(2)).map(|j| basis.column(j).into_owned()).collect();
    Ok(Section { center: xt * mu, dirs, h })
}

/// Boundary of the section, one point per angle (two points on a line section).
pub fn slice_boundary(f: &Barrier, s: &Vector, mu: f64, samples: usize) -> Result<Vec<BoundaryRow>> {
    let sec = section(f, s, mu)?;
    let angles: Vec<f64> = match sec.dirs.len() {
        0 => Vec::new(),
        1 => vec![0.0, std::f64::consts::PI],
        _ => (0..samples).map(|i| i as f64 * std::f64::consts::TAU / samples as f64).collect(),
    };
    let mut rows = Vec::with_capacity(angles.len());
    for angle in angles {
        let (ca, sa) = (angle.cos(), angle.sin());
        let d = match sec.dirs.as_slice() {
            [e1] => e1 * ca.signum(),
            [e1, e2] => e1 * ca + e2 * sa,
            _ => unreachable!(),
        };
        let sigma = f.cone().gauge(&sec.center, &-&d)?.sigma;
        if sigma > 0.0 {
            let (a, b) = if sec.dirs.len() == 1 { (ca.signum() / sigma, 0.0) } else { (ca / sigma, sa / sigma) };
            rows.push(BoundaryRow {
                angle,
                a,
                b,
                x: (&sec.center + &d / sigma).as_slice().to_vec(),
            });
        }
    }
    Ok(rows)
}

/// Regular grid over the section with proximity measures at each interior point.
pub fn slice_grid(f: &Barrier, s: &Vector, mu: f64, resolution: usize) -> Result<Vec<SliceRow>> {
    let sec = section(f, s, mu)?;
    let reach = slice_boundary(f, s, mu, 256)?
        .iter()
        .map(|r| r.a.hypot(r.b))
        .fold(0.0, f64::max);
    let res = resolution.max(2);
    let coord = |i: usize| -reach + 2.0 * reach * i as f64 / (res - 1) as f64;
    let points: Vec<(f64, f64)> = match sec.dirs.len() {
        0 => vec![(0.0, 0.0)],
        1 => (0..res).map(|i| (coord(i), 0.0)).collect(),
        _ => (0..res).flat_map(|i| (0..res).map(move |j| (coord(i), coord(j)))).collect(),
    };
    let mut rows = Vec::with_capacity(points.len());
    for (a, b) in points {
        let mut x = sec.center.clone();
        for (e, t) in sec.dirs.iter().zip([a, b]) {
            x += e * t;
        }
        let inside = f.cone().contains(&x, 0.0)?.is_interior();
        let dikin = (denselin::quad(&sec.h, &(&x - &sec.center)) / (mu * mu)).sqrt();
        let (mut gg, mut gi, mut xc) = (None, None, None);
        if inside {
            if let Ok(pair) = make_pair(f, &x, s) {
                gg = gamma_g(&pair).ok();
                gi = gamma_inf(f, &pair).ok();
                xc = xi_check_local(&pair).ok().map(|r| r.xi_check);
            }
        }
        rows.push(SliceRow {
            a,
            b,
            x: x.as_slice().to_vec(),
            inside,
            dikin,
            gamma_g: gg,
            gamma_inf: gi,
            xi_check: xc,
        });
    }
    Ok(rows)
}
