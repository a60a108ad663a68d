//! Command-line front end.
//!
//! Cone specs are `kind:params` terms joined by `⊕` (or `+`):
//!
//! | term | cone |
//! |---|---|
//! | `orthant:n` | nonnegative orthant |
//! | `psd:m` | `m × m` PSD matrices |
//! | `soc:p1,p2,…` | second-order cones with `y ∈ R^{pᵢ}` |
//! | `exp:k` | `k` exponential cones |
//! | `weighted:c1,c2,…` | orthant with barrier `−Σ cᵢ ln xᵢ` |
//! | `toeplitz:m` | symmetric Toeplitz PSD matrices |
//! | `toeplitz-tridiag:m` | tridiagonal Toeplitz PSD matrices |
//! | `toeplitz-band:m,w` | Toeplitz PSD matrices of bandwidth `w` |
//! | `lmi-random:size,params,seed` | random LMI slice |
//!
//! Exit codes: 0 success, 1 bound violation, 2 usage or contract error,
//! 3 numerical non-convergence.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::barrier::Barrier;
use crate::cones::{Cone, ConeDescriptor, MAX_AMBIENT_DIM};
use crate::denselin::Vector;
use crate::error::{Error, Result};
use crate::ipm::{self, ConicProgram, IpmParams, Status};
use crate::proximity::{gamma_g, gamma_inf, tau_rho, tau_rho_real};
use crate::sample::{self, SampleOptions};
use crate::scaling::{xi_check_local, ScalingKind, DEFAULT_QUAD_ORDER};
use crate::worstcase::{self, ExtremeSearchOptions};

pub const SCHEMA: &str = "conik/v1";

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Slack on theorem bounds in sample scans.
pub const BOUND_TOL: f64 = 1e-9;

const SPEC_HELP: &str = "Cone spec: kind:params terms joined by ⊕ or +, e.g. exp:1⊕soc:3.
Kinds: orthant:n, psd:m, soc:p1,p2,..., exp:k, weighted:c1,c2,...,
toeplitz:m, toeplitz-tridiag:m, toeplitz-band:m,w, lmi-random:size,params,seed.

Exit codes: 0 success, 1 bound violation, 2 usage/contract error, 3 numerical non-convergence.";

#[derive(Parser, Debug)]
#[command(name = "conik", version, about = "Barrier calculus and complexity measures for conic programming", after_help = SPEC_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ScalingArg {
    Nt,
    Integral,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Table {
    RhoTable,
    LocalXiTable,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample interior pairs and record ξ̌, γ_G, γ_∞ and μμ̃.
    XiScan {
        #[arg(long)]
        cone: String,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Report file; only the summary is printed when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Extreme directions of the slice problem and worst-case certificates.
    WorstCase {
        #[arg(long)]
        cone: String,
        /// Dual point, comma separated; defaults to −F' at the canonical interior point.
        #[arg(long, allow_hyphen_values = true)]
        s: Option<String>,
        #[arg(long, default_value_t = 1.0)]
        mu: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Grid points per axis of the slice section.
        #[arg(long, default_value_t = 81)]
        grid: usize,
        /// Output directory for certificates.json, slice_grid.csv and slice_boundary.csv.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve a conic program from a JSON instance file.
    Solve {
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = ScalingArg::Integral)]
        scaling: ScalingArg,
        #[arg(long, default_value_t = 1e-8)]
        eps: f64,
        #[arg(long, default_value_t = DEFAULT_QUAD_ORDER)]
        quad_order: usize,
        /// Output directory for solution.json and trace.jsonl.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// ρ_n table or sampled local-regime table.
    Report {
        #[arg(value_enum)]
        table: Table,
        #[arg(long, default_value_t = 2000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
}

fn bad_token(token: &str, why: &str) -> Error {
    Error::InvalidCone(format!("bad token `{token}`: {why}"))
}

fn parse_usize(token: &str, field: &str, lo: usize) -> Result<usize> {
    let v: usize = field
        .trim()
        .parse()
        .map_err(|_| bad_token(token, &format!("`{field}` is not a nonnegative integer")))?;
    if v < lo || v > MAX_AMBIENT_DIM {
        return Err(bad_token(token, &format!("{v} is outside {lo}..={MAX_AMBIENT_DIM}")));
    }
    Ok(v)
}

/// Parses a cone spec such as `exp:1⊕soc:3` into a descriptor.
pub fn parse_cone_spec(spec: &str) -> Result<ConeDescriptor> {
    let terms: Vec<&str> = spec.split(['⊕', '+']).map(str::trim).collect();
    if terms.iter().any(|t| t.is_empty()) {
        return Err(bad_token(spec, "empty term"));
    }
    let mut parts = Vec::with_capacity(terms.len());
    for term in terms {
        let (kind, params) = term
            .split_once(':')
            .ok_or_else(|| bad_token(term, "expected kind:params"))?;
        let fields: Vec<&str> = params.split(',').collect();
        let arity = |n: usize| -> Result<()> {
            if fields.len() == n {
                Ok(())
            } else {
                Err(bad_token(term, &format!("{kind} takes {n} parameter(s)")))
            }
        };
        let desc = match kind.trim() {
            "orthant" => {
                arity(1)?;
                ConeDescriptor::Orthant { n: parse_usize(term, fields[0], 1)? }
            }
            "psd" => {
                arity(1)?;
                ConeDescriptor::Psd { m: parse_usize(term, fields[0], 1)? }
            }
            "soc" => ConeDescriptor::Soc {
                blocks: fields.iter().map(|f| parse_usize(term, f, 1)).collect::<Result<_>>()?,
            },
            "exp" => {
                arity(1)?;
                ConeDescriptor::Exp { copies: parse_usize(term, fields[0], 1)? }
            }
            "weighted" => ConeDescriptor::WeightedOrthant {
                weights: fields
                    .iter()
                    .map(|f| {
                        f.trim()
                            .parse::<f64>()
                            .map_err(|_| bad_token(term, &format!("`{f}` is not a number")))
                    })
                    .collect::<Result<_>>()?,
            },
            "toeplitz" => {
                arity(1)?;
                ConeDescriptor::toeplitz(parse_usize(term, fields[0], 1)?)
            }
            "toeplitz-tridiag" => {
                arity(1)?;
                ConeDescriptor::toeplitz_tridiag(parse_usize(term, fields[0], 2)?)
            }
            "toeplitz-band" => {
                arity(2)?;
                ConeDescriptor::toeplitz_band(parse_usize(term, fields[0], 1)?, parse_usize(term, fields[1], 0)?)
            }
            "lmi-random" => {
                arity(3)?;
                let size = parse_usize(term, fields[0], 1)?;
                let params = parse_usize(term, fields[1], 1)?;
                let seed: u64 = fields[2]
                    .trim()
                    .parse()
                    .map_err(|_| bad_token(term, &format!("`{}` is not a seed", fields[2])))?;
                ConeDescriptor::random_lmi(size, params, seed)
            }
            other => return Err(bad_token(term, &format!("unknown kind `{other}`"))),
        };
        parts.push(desc);
    }
    let desc = if parts.len() == 1 { parts.pop().unwrap() } else { ConeDescriptor::Product { parts } };
    Cone::new(desc.clone())?;
    Ok(desc)
}

/// Parses a comma-separated vector such as `1,1,-1`.
pub fn parse_vector(text: &str) -> Result<Vector> {
    let vals = text
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::InvalidInput(format!("bad vector entry `{t}`")))
        })
        .collect::<Result<Vec<f64>>>()?;
    if vals.len() > MAX_AMBIENT_DIM {
        return Err(Error::InvalidInput("vector too long".into()));
    }
    Ok(Vector::from_vec(vals))
}

/// Formats a float with 17 significant digits; non-finite values become `null`.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() { format!("{v:.16e}") } else { "null".into() }
}

struct Fixed17;

impl serde_json::ser::Formatter for Fixed17 {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        writer.write_all(fmt_f64(value).as_bytes())
    }
}

/// Serializes to JSON with every float at 17 significant digits.
pub fn to_json(value: &impl Serialize) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Fixed17);
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("JSON output is UTF-8"))
}

fn csv_string(header: &[String], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("CSV output is UTF-8"))
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, fmt_f64)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, text)?;
    Ok(())
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NonConvergence { .. } | Error::NotPositiveDefinite { .. } | Error::Inconsistent(_) => EXIT_NUMERICAL,
        _ => EXIT_USAGE,
    }
}

/// Theorem bound on ξ̌ for the cone, with its name.
pub fn xi_bound(cone: &Cone) -> (f64, &'static str) {
    let theta = cone.theta();
    if cone.is_optimal_self_scaled() && theta >= 2.0 {
        (tau_rho_real(theta).1, "rho_theta")
    } else if cone.has_negative_curvature() {
        (4.0 / 3.0, "four_thirds")
    } else {
        (2.0 * theta, "two_theta")
    }
}

#[derive(Clone, Debug, Serialize)]
struct ScanRecord {
    index: usize,
    xi_check: f64,
    gamma_g: f64,
    gamma_inf: f64,
    mu_mu_tilde: f64,
}

fn scan_record(f: &Barrier, index: usize, seed: u64) -> Option<(ScanRecord, Vec<f64>, Vec<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let pair = sample::pair(f, &mut rng, SampleOptions::default()).ok()?;
    let rec = ScanRecord {
        index,
        xi_check: xi_check_local(&pair).ok()?.xi_check,
        gamma_g: gamma_g(&pair).ok()?,
        gamma_inf: gamma_inf(f, &pair).ok()?,
        mu_mu_tilde: pair.mu * pair.mu_tilde,
    };
    Some((rec, pair.x.as_slice().to_vec(), pair.s.as_slice().to_vec()))
}

fn cmd_xi_scan(spec: &str, samples: usize, seed: u64, out: Option<&Path>, format: Format, stdout: &mut dyn Write) -> Result<i32> {
    let desc = parse_cone_spec(spec)?;
    let f = Barrier::new(Cone::new(desc)?);
    let (bound, bound_name) = xi_bound(f.cone());
    let results: Vec<_> = (0..samples).into_par_iter().map(|i| scan_record(&f, i, seed)).collect();
    let skipped = results.iter().filter(|r| r.is_none()).count();
    let records: Vec<_> = results.into_iter().flatten().collect();
    let worst = records.iter().max_by(|a, b| a.0.xi_check.total_cmp(&b.0.xi_check));
    let max_xi = worst.map_or(f64::NAN, |w| w.0.xi_check);
    let violations = records.iter().filter(|r| r.0.xi_check > bound + BOUND_TOL).count();
    let summary = json!({
        "schema": SCHEMA,
        "command": "xi-scan",
        "cone": spec,
        "theta": f.theta(),
        "samples": samples,
        "evaluated": records.len(),
        "skipped": skipped,
        "seed": seed,
        "max_xi_check": max_xi,
        "max_mu_mu_tilde": records.iter().map(|r| r.0.mu_mu_tilde).fold(f64::NAN, f64::max),
        "bound": bound,
        "bound_name": bound_name,
        "violations": violations,
        "worst_pair": worst.map(|w| json!({"x": w.1, "s": w.2})),
    });
    if let Some(path) = out {
        let text = match format {
            Format::Json => {
                let mut full = summary.clone();
                full["records"] = serde_json::to_value(records.iter().map(|r| &r.0).collect::<Vec<_>>())?;
                to_json(&full)?
            }
            Format::Csv => csv_string(
                &["index", "xi_check", "gamma_g", "gamma_inf", "mu_mu_tilde"].map(String::from),
                &records
                    .iter()
                    .map(|(r, _, _)| {
                        vec![
                            r.index.to_string(),
                            fmt_f64(r.xi_check),
                            fmt_f64(r.gamma_g),
                            fmt_f64(r.gamma_inf),
                            fmt_f64(r.mu_mu_tilde),
                        ]
                    })
                    .collect::<Vec<_>>(),
            )?,
        };
        write_file(path, &text)?;
    }
    stdout.write_all(to_json(&summary)?.as_bytes())?;
    if records.is_empty() && samples > 0 {
        return Ok(EXIT_NUMERICAL);
    }
    Ok(if violations > 0 { EXIT_VIOLATION } else { EXIT_OK })
}

fn cmd_worst_case(
    spec: &str,
    s: Option<&str>,
    mu: f64,
    seed: u64,
    grid: usize,
    out: Option<&Path>,
    stdout: &mut dyn Write,
) -> Result<i32> {
    let desc = parse_cone_spec(spec)?;
    let f = Barrier::new(Cone::new(desc)?);
    let s = match s {
        Some(text) => parse_vector(text)?,
        None => -f.gradient(&f.cone().interior_point())?,
    };
    if s.len() != f.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), actual: s.len() });
    }
    f.cone().require_dual_interior(&s)?;
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::InvalidInput("--mu must be positive".into()));
    }
    let theta = f.theta();
    let (tau, rho) = tau_rho_real(theta);
    let search = worstcase::extreme_v_search(&f, &s, mu, ExtremeSearchOptions { seed, ..Default::default() })?;
    let certificates = search
        .attaining
        .iter()
        .map(|c| worstcase::hatx_construct(&f, &s, &Vector::from_column_slice(&c.v), mu))
        .collect::<Result<Vec<_>>>()?;
    let rows = worstcase::slice_grid(&f, &s, mu, grid)?;
    let slice_max = rows
        .iter()
        .filter_map(|r| r.xi_check.map(|x| (x, r)))
        .max_by(|a, b| a.0.total_cmp(&b.0));
    let report = json!({
        "schema": SCHEMA,
        "command": "worst-case",
        "cone": spec,
        "s": s.as_slice(),
        "mu": mu,
        "theta": theta,
        "tau_theta": tau,
        "rho_theta": rho,
        "dikin_radii": [tau / (tau + 1.0), 1.0],
        "found": search.found,
        "target_norm2": search.target,
        "best_norm2": search.candidates.first().map(|c| c.norm2),
        "candidates": search.candidates,
        "certificates": certificates,
        "slice_grid_max_xi_check": slice_max.map(|m| m.0),
        "slice_grid_argmax": slice_max.map(|m| m.1.x.clone()),
        "slice_grid_below_rho": slice_max.map(|m| m.0 < rho),
    });
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        write_file(&dir.join("certificates.json"), &to_json(&report)?)?;
        let n = f.dim();
        let xs: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
        let mut header: Vec<String> = ["a", "b", "inside", "dikin", "gamma_g", "gamma_inf", "xi_check"].map(String::from).to_vec();
        header.extend(xs.iter().cloned());
        let grid_rows: Vec<Vec<String>> = rows
            .iter()
            .map(|r| {
                let mut row = vec![
                    fmt_f64(r.a),
                    fmt_f64(r.b),
                    r.inside.to_string(),
                    fmt_f64(r.dikin),
                    opt(r.gamma_g),
                    opt(r.gamma_inf),
                    opt(r.xi_check),
                ];
                row.extend(r.x.iter().map(|v| fmt_f64(*v)));
                row
            })
            .collect();
        write_file(&dir.join("slice_grid.csv"), &csv_string(&header, &grid_rows)?)?;
        let mut bheader: Vec<String> = ["angle", "a", "b"].map(String::from).to_vec();
        bheader.extend(xs);
        let brows: Vec<Vec<String>> = worstcase::slice_boundary(&f, &s, mu, 720)?
            .iter()
            .map(|r| {
                let mut row = vec![fmt_f64(r.angle), fmt_f64(r.a), fmt_f64(r.b)];
                row.extend(r.x.iter().map(|v| fmt_f64(*v)));
                row
            })
            .collect();
        write_file(&dir.join("slice_boundary.csv"), &csv_string(&bheader, &brows)?)?;
    }
    stdout.write_all(to_json(&report)?.as_bytes())?;
    Ok(if certificates.iter().all(|c| c.valid) { EXIT_OK } else { EXIT_VIOLATION })
}

fn cmd_solve(
    instance: &Path,
    scaling: ScalingArg,
    eps: f64,
    quad_order: usize,
    out: Option<&Path>,
    stdout: &mut dyn Write,
) -> Result<i32> {
    let prog = ConicProgram::from_json(&fs::read_to_string(instance)?)?;
    let kind = match scaling {
        ScalingArg::Nt => ScalingKind::NesterovTodd,
        ScalingArg::Integral => ScalingKind::Integral { quad_order },
    };
    let (sol, trace) = ipm::solve(&prog, kind, eps, IpmParams::default())?;
    let report = json!({
        "schema": SCHEMA,
        "command": "solve",
        "instance": instance.display().to_string(),
        "eps": eps,
        "solution": sol,
    });
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        write_file(&dir.join("solution.json"), &to_json(&report)?)?;
        let mut lines = String::new();
        for r in &trace.records {
            let mut line = to_json(r)?;
            line.retain(|c| c != '\n');
            lines.push_str(&line);
            lines.push('\n');
        }
        write_file(&dir.join("trace.jsonl"), &lines)?;
    }
    writeln!(
        stdout,
        "status {} iterations {} gap {} objective {}",
        match &sol.status {
            Status::Optimal => "optimal".to_string(),
            Status::IterationLimit => "iteration_limit".to_string(),
            Status::Stalled { reason } => format!("stalled ({reason})"),
        },
        sol.iterations,
        fmt_f64(sol.gap),
        fmt_f64(sol.primal_objective)
    )?;
    Ok(if sol.status == Status::Optimal { EXIT_OK } else { EXIT_NUMERICAL })
}

/// Cones sampled by the local-regime table.
pub const LOCAL_TABLE_CONES: [&str; 7] = [
    "orthant:3",
    "psd:3",
    "soc:3",
    "exp:1",
    "weighted:2,2",
    "toeplitz-tridiag:5",
    "lmi-random:4,3,1",
];

#[derive(Clone, Debug, Serialize)]
pub struct LocalRow {
    pub cone: String,
    pub regime: &'static str,
    pub bound: f64,
    pub samples: usize,
    pub max_value: Option<f64>,
    pub violations: usize,
}

/// Sampled local regimes: near-central pairs (`γ_G ≤ 1e-3`) against 1.2115,
/// pairs with `μx̃` in the half Dikin ellipsoid at `x` against 3, and pairs
/// with `μμ̃ ≥ 2` against 4. Values are `ξ̌(x, s)`, a lower bound for the
/// local `ξ`.
pub fn local_xi_table(samples: usize, seed: u64) -> Result<Vec<LocalRow>> {
    let mut rows = Vec::new();
    for spec in LOCAL_TABLE_CONES {
        let f = Barrier::new(Cone::new(parse_cone_spec(spec)?)?);
        let vals: Vec<Option<(f64, f64, f64, f64)>> = (0..3 * samples)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i as u64);
                let opts = SampleOptions::default();
                let pair = match i % 3 {
                    0 => sample::near_central_pair(&f, &mut rng, opts, 1e-3),
                    1 => sample::near_central_pair(&f, &mut rng, opts, 0.3),
                    _ => sample::pair(&f, &mut rng, opts),
                }
                .ok()?;
                let xi = xi_check_local(&pair).ok()?.xi_check;
                let dikin = f.local_norm(&pair.x, &(&pair.x_shadow * pair.mu - &pair.x)).ok()?;
                Some((xi, gamma_g(&pair).ok()?, dikin, pair.mu * pair.mu_tilde))
            })
            .collect();
        let vals: Vec<_> = vals.into_iter().flatten().collect();
        let regimes: [(&'static str, f64, Box<dyn Fn(&(f64, f64, f64, f64)) -> bool>); 3] = [
            ("near_central", 1.2115, Box::new(|v| v.1 <= 1e-3)),
            ("half_dikin", 3.0, Box::new(|v| v.2 <= 0.5)),
            ("mu_mu_tilde_ge_2", 4.0, Box::new(|v| v.3 >= 2.0)),
        ];
        for (regime, bound, pred) in regimes {
            let hits: Vec<f64> = vals.iter().filter(|v| pred(v)).map(|v| v.0).collect();
            rows.push(LocalRow {
                cone: spec.to_string(),
                regime,
                bound,
                samples: hits.len(),
                max_value: hits.iter().copied().reduce(f64::max),
                violations: hits.iter().filter(|&&x| x >= bound).count(),
            });
        }
    }
    Ok(rows)
}

fn cmd_report(table: Table, samples: usize, seed: u64, out: Option<&Path>, format: Format, stdout: &mut dyn Write) -> Result<i32> {
    let (text, code) = match table {
        Table::RhoTable => {
            let rows: Vec<(usize, f64, f64)> = (2..=100)
                .map(|n| tau_rho(n).map(|(t, r)| (n, t, r)))
                .collect::<Result<_>>()?;
            let text = match format {
                Format::Json => to_json(&json!({
                    "schema": SCHEMA,
                    "command": "report",
                    "table": "rho-table",
                    "rows": rows.iter().map(|r| json!({"n": r.0, "tau": r.1, "rho": r.2})).collect::<Vec<Value>>(),
                }))?,
                Format::Csv => csv_string(
                    &["n", "tau", "rho"].map(String::from),
                    &rows.iter().map(|r| vec![r.0.to_string(), fmt_f64(r.1), fmt_f64(r.2)]).collect::<Vec<_>>(),
                )?,
            };
            (text, EXIT_OK)
        }
        Table::LocalXiTable => {
            let rows = local_xi_table(samples, seed)?;
            let violated = rows.iter().any(|r| r.violations > 0);
            let text = match format {
                Format::Json => to_json(&json!({
                    "schema": SCHEMA,
                    "command": "report",
                    "table": "local-xi-table",
                    "samples": samples,
                    "seed": seed,
                    "rows": rows,
                }))?,
                Format::Csv => csv_string(
                    &["cone", "regime", "bound", "samples", "max_value", "violations"].map(String::from),
                    &rows
                        .iter()
                        .map(|r| {
                            vec![
                                r.cone.clone(),
                                r.regime.to_string(),
                                fmt_f64(r.bound),
                                r.samples.to_string(),
                                opt(r.max_value),
                                r.violations.to_string(),
                            ]
                        })
                        .collect::<Vec<_>>(),
                )?,
            };
            (text, if violated { EXIT_VIOLATION } else { EXIT_OK })
        }
    };
    match out {
        Some(path) => write_file(path, &text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(code)
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { stdout.write_all(text.as_bytes()) } else { stderr.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match &cli.command {
        Command::XiScan { cone, samples, seed, out, format } => {
            cmd_xi_scan(cone, *samples, *seed, out.as_deref(), *format, stdout)
        }
        Command::WorstCase { cone, s, mu, seed, grid, out } => {
            cmd_worst_case(cone, s.as_deref(), *mu, *seed, *grid, out.as_deref(), stdout)
        }
        Command::Solve { instance, scaling, eps, quad_order, out } => {
            cmd_solve(instance, *scaling, *eps, *quad_order, out.as_deref(), stdout)
        }
        Command::Report { table, samples, seed, out, format } => {
            cmd_report(*table, *samples, *seed, out.as_deref(), *format, stdout)
        }
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}
