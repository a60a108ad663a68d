//! Proximity measures γ_G and γ_∞, the normalizer δ_F and the constants τ_n, ρ_n.

use serde::Serialize;

use crate::barrier::Barrier;
use crate::duality::PrimalDualPair;
use crate::error::{Error, Result};

/// Rounding band below zero, per unit of ϑ, reported as an exact zero.
pub const CLAMP_BAND: f64 = 1e-10;

#[derive(Clone, Debug, Serialize)]
pub struct ProximityReport {
    pub gamma_g: f64,
    pub gamma_inf: f64,
    pub delta_f: f64,
    pub mu: f64,
    pub mu_tilde: f64,
}

fn clamp(value: f64, theta: f64, what: &str) -> Result<f64> {
    if value >= 0.0 {
        Ok(value)
    } else if value > -CLAMP_BAND * theta.max(1.0) {
        Ok(0.0)
    } else {
        Err(Error::Inconsistent(format!("{what} = {value:e} is negative")))
    }
}

/// `γ_G = ϑ(μμ̃ − 1)`.
pub fn gamma_g(pair: &PrimalDualPair) -> Result<f64> {
    clamp(pair.theta * pair.excess(), pair.theta, "γ_G")
}

/// `γ_∞ = σ_x(μx̃) − 1`, cross-checked against `σ_x(μx̃ − x)`.
pub fn gamma_inf(f: &Barrier, pair: &PrimalDualPair) -> Result<f64> {
    let target = &pair.x_shadow * pair.mu;
    let a = f.cone().gauge(&pair.x, &target)?.sigma - 1.0;
    let b = f.cone().gauge(&pair.x, &(&target - &pair.x))?.sigma;
    if (a - b).abs() > 1e-8 * (1.0 + a.abs()) {
        return Err(Error::Inconsistent(format!(
            "γ_∞ routes disagree: σ_x(μx̃) − 1 = {a:e}, σ_x(μx̃ − x) = {b:e}"
        )));
    }
    clamp(a, pair.theta, "γ_∞")
}

/// `γ_∞` through the bisection gauge only.
pub fn gamma_inf_bisect(f: &Barrier, pair: &PrimalDualPair) -> Result<f64> {
    let target = &pair.x_shadow * pair.mu;
    let a = f.cone().gauge_bisect(&pair.x, &target)?.sigma - 1.0;
    clamp(a, pair.theta, "γ_∞")
}

/// `δ_F = (γ_G + 1)/μ`, cross-checked against `⟨F'(x), F'_*(s)⟩ − ϑ(ϑ−1)/⟨s, x⟩`.
pub fn delta_f(pair: &PrimalDualPair) -> Result<f64> {
    let primary = (gamma_g(pair)? + 1.0) / pair.mu;
    let theta = pair.theta;
    let alternative = pair.s_shadow.dot(&pair.x_shadow) - theta * (theta - 1.0) / pair.s.dot(&pair.x);
    if (primary - alternative).abs() > 1e-9 * primary.abs() {
        return Err(Error::Inconsistent(format!(
            "δ_F expressions disagree: {primary:e} vs {alternative:e}"
        )));
    }
    Ok(primary)
}

pub fn proximity_report(f: &Barrier, pair: &PrimalDualPair) -> Result<ProximityReport> {
    Ok(ProximityReport {
        gamma_g: gamma_g(pair)?,
        gamma_inf: gamma_inf(f, pair)?,
        delta_f: delta_f(pair)?,
        mu: pair.mu,
        mu_tilde: pair.mu_tilde,
    })
}

/// `(τ_n, ρ_n)` with `τ_n = sqrt(n/(n−1))` and `ρ_n = (τ_n+1)²/(τ_n(τ_n+2))`.
pub fn tau_rho(n: usize) -> Result<(f64, f64)> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("τ_n needs n ≥ 2, got {n}")));
    }
    Ok(tau_rho_real(n as f64))
}

/// [`tau_rho`] for real `n > 1` (used with non-integer ϑ).
pub fn tau_rho_real(n: f64) -> (f64, f64) {
    let tau = (n / (n - 1.0)).sqrt();
    (tau, (tau + 1.0).powi(2) / (tau * (tau + 2.0)))
}
