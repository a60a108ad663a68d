//! Feasible-start primal–dual predictor–corrector method.
//!
//! Each step solves
//!
//! ```text
//! A d_x = b − Ax,   A*(d_y) + d_s = c − A*(y) − s,   T d_x + d_s = r
//! ```
//!
//! with `T` the selected scaling at the current pair. Predictor steps use
//! `r = −s`, corrector steps `r = μs̃ − s`. Iterates stay in the
//! neighborhood `γ_G(x, s) ≤ η`.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::barrier::Barrier;
use crate::cones::{Cone, ConeDescriptor};
use crate::denselin::{self, Vector};
use crate::duality::{make_pair, make_pair_hint, PrimalDualPair};
use crate::error::{Error, Result};
use crate::proximity::{gamma_g, gamma_inf};
use crate::sample::{self, SampleOptions};
use crate::scaling::{membership, xi_check_local, ScalingKind};

/// Relative tolerance for the start point residuals of a program.
pub const START_TOL: f64 = 1e-9;

/// Linear conic program `min ⟨c, x⟩ s.t. Ax = b, x ∈ K` with a strictly
/// feasible primal–dual start.
#[derive(Clone, Debug)]
pub struct ConicProgram {
    pub cone: ConeDescriptor,
    pub a: DMatrix<f64>,
    pub b: Vector,
    pub c: Vector,
    pub x0: Vector,
    pub y0: Vector,
    pub s0: Vector,
}

/// JSON layout of a [`ConicProgram`]; `A` is a list of rows.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProgramFile {
    pub cone: ConeDescriptor,
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub x0: Vec<f64>,
    pub y0: Vec<f64>,
    pub s0: Vec<f64>,
}

impl ConicProgram {
    /// Builds and validates a program: dimensions, full row rank, interior
    /// start and start residuals within [`START_TOL`].
    pub fn new(
        cone: ConeDescriptor,
        a: DMatrix<f64>,
        b: Vector,
        c: Vector,
        x0: Vector,
        y0: Vector,
        s0: Vector,
    ) -> Result<Self> {
        let k = Cone::new(cone.clone())?;
        let (m, n) = a.shape();
        if n != k.dim() {
            return Err(Error::DimensionMismatch { expected: k.dim(), actual: n });
        }
        for (v, len) in [(&b, m), (&c, n), (&x0, n), (&y0, m), (&s0, n)] {
            if v.len() != len {
                return Err(Error::DimensionMismatch { expected: len, actual: v.len() });
            }
        }
        if m == 0 || m >= n {
            return Err(Error::InvalidInput(format!("need 1 ≤ m < n, got m = {m}, n = {n}")));
        }
        if a.iter().chain(b.iter()).chain(c.iter()).chain(x0.iter()).chain(y0.iter()).chain(s0.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("program data must be finite".into()));
        }
        let gram = denselin::symmetrize(&(&a * a.transpose()));
        let eig = denselin::sym_eigenvalues(&gram);
        let (lo, hi) = (eig.min(), eig.max());
        if !(lo > 1e-12 * hi) {
            return Err(Error::InvalidInput("A must have full row rank".into()));
        }
        k.require_interior(&x0)?;
        k.require_dual_interior(&s0)?;
        let prog = ConicProgram { cone, a, b, c, x0, y0, s0 };
        let (rp, rd) = prog.residuals(&prog.x0, &prog.y0, &prog.s0);
        if rp > START_TOL || rd > START_TOL {
            return Err(Error::InvalidInput(format!(
                "start is not feasible: primal residual {rp:e}, dual residual {rd:e}"
            )));
        }
        Ok(prog)
    }

    pub fn from_file(file: ProgramFile) -> Result<Self> {
        let m = file.a.len();
        let n = file.a.first().map_or(0, |r| r.len());
        if file.a.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput("rows of A differ in length".into()));
        }
        let a = DMatrix::from_fn(m, n, |i, j| file.a[i][j]);
        ConicProgram::new(
            file.cone,
            a,
            Vector::from_vec(file.b),
            Vector::from_vec(file.c),
            Vector::from_vec(file.x0),
            Vector::from_vec(file.y0),
            Vector::from_vec(file.s0),
        )
    }

    pub fn from_json(text: &str) -> Result<Self> {
        ConicProgram::from_file(serde_json::from_str(text)?)
    }

    pub fn to_file(&self) -> ProgramFile {
        ProgramFile {
            cone: self.cone.clone(),
            a: self.a.row_iter().map(|r| r.iter().copied().collect()).collect(),
            b: self.b.as_slice().to_vec(),
            c: self.c.as_slice().to_vec(),
            x0: self.x0.as_slice().to_vec(),
            y0: self.y0.as_slice().to_vec(),
            s0: self.s0.as_slice().to_vec(),
        }
    }

    /// Relative residuals `‖Ax − b‖/(1+‖b‖)` and `‖A*(y) + s − c‖/(1+‖c‖)`.
    pub fn residuals(&self, x: &Vector, y: &Vector, s: &Vector) -> (f64, f64) {
        let rp = (&self.a * x - &self.b).norm() / (1.0 + self.b.norm());
        let rd = (self.a.transpose() * y + s - &self.c).norm() / (1.0 + self.c.norm());
        (rp, rd)
    }
}

/// Random strictly feasible instance with `m` equality constraints.
pub fn gen_feasible_instance(cone: &ConeDescriptor, m: usize, seed: u64) -> Result<ConicProgram> {
    let k = Cone::new(cone.clone())?;
    let n = k.dim();
    if m == 0 || m >= n {
        return Err(Error::InvalidInput(format!("need 1 ≤ m < n, got m = {m}, n = {n}")));
    }
    let f = Barrier::new(k);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let opts = SampleOptions { depth: 0.5, log_scale: 0.0 };
    let a = DMatrix::from_fn(m, n, |_, _| StandardNormal.sample(&mut rng));
    let x0 = sample::interior_point(f.cone(), &mut rng, opts);
    let y = sample::interior_point(f.cone(), &mut rng, opts);
    let s0 = -f.gradient(&y)?;
    let y0 = Vector::from_iterator(m, (0..m).map(|_| StandardNormal.sample(&mut rng)));
    let b = &a * &x0;
    let c = a.transpose() * &y0 + &s0;
    ConicProgram::new(cone.clone(), a, b, c, x0, y0, s0)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct IpmParams {
    /// Neighborhood radius on `γ_G`.
    pub eta: f64,
    pub max_iter: usize,
    pub min_step: f64,
    /// Fraction of the maximal step taken before backtracking.
    pub step_fraction: f64,
    pub backtrack: f64,
    /// Checks 𝒯 membership at `ξ = 4/3` on negative-curvature cones.
    pub check_membership: bool,
    pub membership_tol: f64,
}

impl Default for IpmParams {
    fn default() -> Self {
        IpmParams {
            eta: 0.25,
            max_iter: 500,
            min_step: 1e-12,
            step_fraction: 0.99,
            backtrack: 0.8,
            check_membership: true,
            membership_tol: 1e-7,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    Predictor,
    Corrector,
}

#[derive(Clone, Debug, Serialize)]
pub struct IterRecord {
    pub iter: usize,
    pub step: StepKind,
    pub alpha: f64,
    pub mu: f64,
    pub gap: f64,
    pub gamma_g: f64,
    pub gamma_inf: f64,
    pub xi_check: f64,
    pub scaling: String,
    /// Smallest ξ with `T ∈ 𝒯(x, s; ξ)`, when membership is checked.
    pub membership_xi_min: Option<f64>,
    pub primal_residual: f64,
    pub dual_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Status {
    Optimal,
    Stalled { reason: String },
    IterationLimit,
}

#[derive(Clone, Debug, Serialize)]
pub struct Solution {
    #[serde(flatten)]
    pub status: Status,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub s: Vec<f64>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    /// `⟨s, x⟩`
    pub gap: f64,
    pub initial_gap: f64,
    pub mu: f64,
    pub iterations: usize,
    pub predictor_steps: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct IpmTrace {
    pub records: Vec<IterRecord>,
}

impl IpmTrace {
    /// One JSON object per line.
    pub fn to_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r)?);
            out.push('\n');
        }
        Ok(out)
    }
}

struct Iterate {
    pair: PrimalDualPair,
    y: Vector,
}

/// Solves the step system for right-hand side `r` through the augmented
/// system `[T −A*; A 0] (d_x, d_y) = (r − r_d, r_p)`, which stays usable
/// when `T` is too ill-conditioned for a Cholesky factorization.
fn direction(prog: &ConicProgram, t: &denselin::SymMatrix, it: &Iterate, r: &Vector) -> Result<(Vector, Vector, Vector)> {
    let (x, s, y) = (&it.pair.x, &it.pair.s, &it.y);
    let (m, n) = prog.a.shape();
    let at = prog.a.transpose();
    let rp = &prog.b - &prog.a * x;
    let rd = &prog.c - &at * y - s;
    // row-scale T so both blocks have comparable magnitude
    let scale = denselin::scale_of(t);
    let mut k = DMatrix::zeros(n + m, n + m);
    k.view_mut((0, 0), (n, n)).copy_from(&(t / scale));
    k.view_mut((0, n), (n, m)).copy_from(&(-&at / scale));
    k.view_mut((n, 0), (m, n)).copy_from(&prog.a);
    let mut rhs = Vector::zeros(n + m);
    rhs.rows_mut(0, n).copy_from(&((r - &rd) / scale));
    rhs.rows_mut(n, m).copy_from(&rp);
    let sol = k.full_piv_lu().solve(&rhs).ok_or_else(|| {
        Error::Inconsistent("step system is singular".into())
    })?;
    let dx = sol.rows(0, n).into_owned();
    let dy = sol.rows(n, m).into_owned();
    let ds = &rd - &at * &dy;
    Ok((dx, dy, ds))
}

/// Longest step `α ≤ cap` keeping `x + αd_x ∈ int K` and `s + αd_s ∈ int K*`.
fn max_step(cone: &Cone, it: &Iterate, dx: &Vector, ds: &Vector, cap: f64) -> Result<f64> {
    let sx = cone.gauge(&it.pair.x, &-dx)?.sigma;
    let ss = cone.dual_gauge(&it.pair.s, &-ds)?;
    let sigma = sx.max(ss);
    Ok(if sigma > 0.0 { (1.0 / sigma).min(cap) } else { cap })
}

/// Numerical breakdown ends the run as a stall; other errors propagate.
fn stall_or(e: Error, stage: &str) -> Result<Status> {
    match e {
        Error::NotPositiveDefinite { .. } | Error::NonConvergence { .. } => Ok(Status::Stalled {
            reason: format!("{stage}: {e}"),
        }),
        e => Err(e),
    }
}

/// Runs the predictor–corrector method from the program's start point.
pub fn solve(prog: &ConicProgram, kind: ScalingKind, eps: f64, params: IpmParams) -> Result<(Solution, IpmTrace)> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidInput("eps must lie in (0, 1)".into()));
    }
    let cone = Cone::new(prog.cone.clone())?;
    if kind == ScalingKind::NesterovTodd && !cone.is_self_scaled() {
        return Err(Error::Unsupported {
            operation: "Nesterov–Todd scaling",
            kind: cone.name(),
            hint: "use the integral scaling (--scaling integral)",
        });
    }
    let check_membership = params.check_membership && cone.has_negative_curvature();
    let f = Barrier::new(cone);
    let mut it = Iterate {
        pair: make_pair(&f, &prog.x0, &prog.s0)?,
        y: prog.y0.clone(),
    };
    let gap0 = it.pair.s.dot(&it.pair.x);
    let mut trace = IpmTrace::default();
    let mut predictor_steps = 0;
    let mut corrector_run = 0;
    let status = loop {
        let gap = it.pair.s.dot(&it.pair.x);
        if gap <= eps * gap0 {
            break Status::Optimal;
        }
        if trace.records.len() >= params.max_iter {
            break Status::IterationLimit;
        }
        let gamma = gamma_g(&it.pair)?;
        // re-center down to η/4 before each predictor, at most a few corrector steps in a row
        let step = if (gamma > params.eta / 4.0 && corrector_run < 8) || gamma > params.eta {
            StepKind::Corrector
        } else {
            StepKind::Predictor
        };
        let scaling = match kind.build(&f, &it.pair) {
            Ok(t) => t,
            Err(e) => break stall_or(e, "scaling")?,
        };
        let xi_min = if check_membership {
            let cert = match membership(&scaling, &it.pair, 4.0 / 3.0, params.membership_tol) {
                Ok(c) => c,
                Err(e) => break stall_or(e, "membership check")?,
            };
            if !cert.accepted {
                return Err(Error::Inconsistent(format!(
                    "scaling {} fails 𝒯 membership at ξ = 4/3 (ξ_min = {}) at iteration {}",
                    scaling.provenance.label(),
                    cert.xi_min,
                    trace.records.len()
                )));
            }
            Some(cert.xi_min)
        } else {
            None
        };
        let r = match step {
            StepKind::Predictor => -&it.pair.s,
            StepKind::Corrector => &it.pair.s_shadow * it.pair.mu - &it.pair.s,
        };
        let (dx, dy, ds) = match direction(prog, &scaling.t, &it, &r) {
            Ok(d) => d,
            Err(e) => break stall_or(e, "search direction")?,
        };
        let cap = match step {
            StepKind::Predictor => 1.0,
            StepKind::Corrector => f64::INFINITY,
        };
        let mut alpha = (params.step_fraction * max_step(f.cone(), &it, &dx, &ds, cap)?).min(1.0);
        let accepted = loop {
            if alpha < params.min_step {
                break None;
            }
            let x = &it.pair.x + &dx * alpha;
            let s = &it.pair.s + &ds * alpha;
            let hint = &it.pair.x_shadow * (it.pair.s.norm() / s.norm());
            if let Ok(pair) = make_pair_hint(&f, &x, &s, Some(&hint)) {
                if let Ok(g) = gamma_g(&pair) {
                    let ok = match step {
                        StepKind::Predictor => g <= params.eta,
                        StepKind::Corrector => g < gamma || g <= params.eta / 4.0,
                    };
                    if ok {
                        break Some(pair);
                    }
                }
            }
            alpha *= params.backtrack;
        };
        let Some(pair) = accepted else {
            break Status::Stalled {
                reason: format!("{step:?} line search fell below step {:e}", params.min_step),
            };
        };
        it.y += &dy * alpha;
        it.pair = pair;
        match step {
            StepKind::Predictor => {
                predictor_steps += 1;
                corrector_run = 0;
            }
            StepKind::Corrector => corrector_run += 1,
        }
        let (rp, rd) = prog.residuals(&it.pair.x, &it.y, &it.pair.s);
        trace.records.push(IterRecord {
            iter: trace.records.len() + 1,
            step,
            alpha,
            mu: it.pair.mu,
            gap: it.pair.s.dot(&it.pair.x),
            gamma_g: gamma_g(&it.pair)?,
            gamma_inf: gamma_inf(&f, &it.pair).unwrap_or(f64::NAN),
            xi_check: xi_check_local(&it.pair).map_or(f64::NAN, |r| r.xi_check),
            scaling: scaling.provenance.label(),
            membership_xi_min: xi_min,
            primal_residual: rp,
            dual_residual: rd,
        });
    };
    let (rp, rd) = prog.residuals(&it.pair.x, &it.y, &it.pair.s);
    let solution = Solution {
        status,
        primal_objective: prog.c.dot(&it.pair.x),
        dual_objective: prog.b.dot(&it.y),
        gap: it.pair.s.dot(&it.pair.x),
        initial_gap: gap0,
        mu: it.pair.mu,
        iterations: trace.records.len(),
        predictor_steps,
        primal_residual: rp,
        dual_residual: rd,
        x: it.pair.x.as_slice().to_vec(),
        y: it.y.as_slice().to_vec(),
        s: it.pair.s.as_slice().to_vec(),
    };
    Ok((solution, trace))
}

#[derive(Clone, Debug, Serialize)]
pub struct StudyRow {
    pub theta: f64,
    pub median_iterations: f64,
    pub iterations: Vec<usize>,
    /// `20 ϑ^{1/2} ln(1/ε)`
    pub bound: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct IterationStudy {
    pub eps: f64,
    pub rows: Vec<StudyRow>,
    /// Least-squares slope of `ln(median iterations)` against `ln ϑ`.
    pub exponent: f64,
}

fn median(v: &mut [usize]) -> f64 {
    v.sort_unstable();
    let n = v.len();
    if n % 2 == 1 { v[n / 2] as f64 } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) as f64 }
}

/// Iteration counts over a cone family, one random instance per seed.
/// Each instance has `m = ⌈dim/2⌉` constraints.
pub fn iteration_study(
    family: impl Fn(usize) -> ConeDescriptor + Sync,
    sizes: &[usize],
    eps: f64,
    seeds: &[u64],
    kind: ScalingKind,
) -> Result<IterationStudy> {
    let mut rows = Vec::with_capacity(sizes.len());
    for &size in sizes {
        let desc = family(size);
        let theta = Cone::new(desc.clone())?.theta();
        let counts: Vec<usize> = seeds
            .par_iter()
            .map(|&seed| -> Result<usize> {
                let dim = Cone::new(desc.clone())?.dim();
                let prog = gen_feasible_instance(&desc, dim.div_ceil(2).min(dim - 1).max(1), seed)?;
                let (sol, _) = solve(&prog, kind, eps, IpmParams::default())?;
                if sol.status != Status::Optimal {
                    return Err(Error::NonConvergence {
                        what: "interior-point solve",
                        iterations: sol.iterations,
                        residual: sol.gap / sol.initial_gap,
                    });
                }
                Ok(sol.iterations)
            })
            .collect::<Result<_>>()?;
        let mut sorted = counts.clone();
        rows.push(StudyRow {
            theta,
            median_iterations: median(&mut sorted),
            iterations: counts,
            bound: 20.0 * theta.sqrt() * (1.0 / eps).ln(),
        });
    }
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.theta.ln(), r.median_iterations.ln())).collect();
    let n = pts.len() as f64;
    let (mx, my) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0 / n, a.1 + p.1 / n));
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(IterationStudy {
        eps,
        rows,
        exponent: if sxx > 0.0 { sxy / sxx } else { 0.0 },
    })
}
