//! Cone catalog: descriptors, membership oracles and Minkowski gauges.
//!
//! A [`ConeDescriptor`] is the serializable description of a cone; a
//! [`Cone`] is its validated, flattened form. Products are flattened into a
//! list of primitive [`Block`]s laid out contiguously in the ambient space,
//! so every operation below works block by block.
//!
//! Symmetric matrices are stored in scaled symmetric vectorization
//! ([`svec`]): the lower triangle column by column, off-diagonal entries
//! multiplied by √2, so that the Euclidean inner product of coordinates is
//! the trace inner product.

use std::f64::consts::SQRT_2;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::denselin::{self, chol_unchecked, SymMatrix, Vector};
use crate::error::{Error, Result};

/// Largest ambient dimension accepted by [`Cone::new`].
pub const MAX_AMBIENT_DIM: usize = 4096;
/// Largest matrix order for PSD blocks and LMI slices.
pub const MAX_MATRIX_ORDER: usize = 64;

/// Interior seed for the exponential cone, a point with `−F'(x) = x`.
const EXP_CENTER: [f64; 3] = [1.290_927_709_856_958, 0.805_102_001_584_795_4, -0.827_838_399_065_678_6];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConeDescriptor {
    /// Nonnegative orthant of dimension `n`.
    Orthant { n: usize },
    /// Positive semidefinite `m × m` matrices, in svec coordinates.
    Psd { m: usize },
    /// Direct sum of second-order cones `{(y, t) : ‖y‖ ≤ t}` with `y ∈ R^p`
    /// for each listed width `p`.
    Soc { blocks: Vec<usize> },
    /// Direct sum of exponential cones.
    Exp { copies: usize },
    /// `{x : Σ xᵢ Aᵢ ⪰ 0}` for linearly independent symmetric `Aᵢ`, each
    /// stored row-major as `size × size` entries.
    LmiSlice {
        size: usize,
        matrices: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        interior: Option<Vec<f64>>,
    },
    /// Nonnegative orthant with the weighted barrier `−Σ cᵢ ln xᵢ`, `cᵢ ≥ 1`.
    WeightedOrthant { weights: Vec<f64> },
    Product { parts: Vec<ConeDescriptor> },
}

impl ConeDescriptor {
    /// Symmetric Toeplitz matrices of order `m` with bandwidth `band`
    /// (`band + 1` parameters; the first one multiplies the identity).
    pub fn toeplitz_band(m: usize, band: usize) -> Self {
        let band = band.min(m.saturating_sub(1));
        let matrices = (0..=band)
            .map(|k| {
                let mut a = vec![0.0; m * m];
                for i in 0..m {
                    for j in 0..m {
                        if i.abs_diff(j) == k {
                            a[i * m + j] = 1.0;
                        }
                    }
                }
                a
            })
            .collect();
        ConeDescriptor::LmiSlice {
            size: m,
            matrices,
            interior: None,
        }
    }

    /// Full symmetric Toeplitz matrices of order `m`.
    pub fn toeplitz(m: usize) -> Self {
        Self::toeplitz_band(m, m.saturating_sub(1))
    }

    /// Tridiagonal symmetric Toeplitz matrices of order `m`.
    pub fn toeplitz_tridiag(m: usize) -> Self {
        Self::toeplitz_band(m, 1)
    }

    /// Random LMI slice with `params` parameters; the first matrix is the
    /// identity so that `e₁` is interior.
    pub fn random_lmi(size: usize, params: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut matrices = Vec::with_capacity(params);
        for k in 0..params {
            let mut a = vec![0.0; size * size];
            for i in 0..size {
                for j in 0..=i {
                    let v = if k == 0 {
                        if i == j { 1.0 } else { 0.0 }
                    } else {
                        rng.random_range(-1.0..1.0)
                    };
                    a[i * size + j] = v;
                    a[j * size + i] = v;
                }
            }
            matrices.push(a);
        }
        ConeDescriptor::LmiSlice {
            size,
            matrices,
            interior: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LmiData {
    pub size: usize,
    pub mats: Vec<SymMatrix>,
    pub interior: Vector,
}

impl LmiData {
    /// `Σ xᵢ Aᵢ`.
    pub fn matrix(&self, x: &[f64]) -> SymMatrix {
        let mut out = SymMatrix::zeros(self.size, self.size);
        for (a, &xi) in self.mats.iter().zip(x) {
            out += a * xi;
        }
        out
    }

    /// Adjoint map `Z ↦ (tr(Aᵢ Z))ᵢ`.
    pub fn adjoint(&self, z: &SymMatrix) -> Vector {
        Vector::from_iterator(self.mats.len(), self.mats.iter().map(|a| a.dot(z)))
    }
}

#[derive(Clone, Debug)]
pub enum BlockKind {
    Orthant,
    Weighted(Vec<f64>),
    Psd { m: usize },
    Soc,
    Exp,
    Lmi(LmiData),
}

impl BlockKind {
    pub fn name(&self) -> &'static str {
        match self {
            BlockKind::Orthant => "orthant",
            BlockKind::Weighted(_) => "weighted_orthant",
            BlockKind::Psd { .. } => "psd",
            BlockKind::Soc => "soc",
            BlockKind::Exp => "exp",
            BlockKind::Lmi(_) => "lmi_slice",
        }
    }
}

/// A primitive cone occupying `offset..offset + dim` of the ambient space.
#[derive(Clone, Debug)]
pub struct Block {
    pub kind: BlockKind,
    pub offset: usize,
    pub dim: usize,
}

impl Block {
    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.dim
    }

    /// Barrier parameter of the block's standard barrier.
    pub fn theta(&self) -> f64 {
        match &self.kind {
            BlockKind::Orthant => self.dim as f64,
            BlockKind::Weighted(w) => w.iter().sum(),
            BlockKind::Psd { m } => *m as f64,
            BlockKind::Soc => 2.0,
            BlockKind::Exp => 3.0,
            BlockKind::Lmi(d) => d.size as f64,
        }
    }

    pub fn slice<'a>(&self, v: &'a Vector) -> &'a [f64] {
        &v.as_slice()[self.range()]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Interior,
    Boundary,
    Outside,
}

#[derive(Clone, Debug)]
pub struct Membership {
    pub verdict: Verdict,
    /// Signed margin of the tightest constraint (positive inside).
    pub margin: f64,
    /// Index of the block holding the tightest constraint.
    pub block: usize,
    pub constraint: &'static str,
}

impl Membership {
    fn classify(margin: f64, tol: f64, block: usize, constraint: &'static str) -> Self {
        let verdict = if margin > tol {
            Verdict::Interior
        } else if margin >= -tol {
            Verdict::Boundary
        } else {
            Verdict::Outside
        };
        Membership {
            verdict,
            margin,
            block,
            constraint,
        }
    }

    pub fn is_interior(&self) -> bool {
        self.verdict == Verdict::Interior
    }

    /// Interior or boundary.
    pub fn is_member(&self) -> bool {
        self.verdict != Verdict::Outside
    }
}

#[derive(Clone, Debug)]
pub struct GaugeResult {
    /// `σ_x(h) = inf{β ≥ 0 : βx − h ∈ K}`.
    pub sigma: f64,
    /// `σ·x − h`, present when `σ > 0`.
    pub boundary_point: Option<Vector>,
}

/// Validated cone.
#[derive(Clone, Debug)]
pub struct Cone {
    descriptor: ConeDescriptor,
    blocks: Vec<Block>,
    dim: usize,
    theta: f64,
}

impl Cone {
    pub fn new(descriptor: ConeDescriptor) -> Result<Self> {
        let mut blocks = Vec::new();
        let mut offset = 0;
        flatten(&descriptor, &mut blocks, &mut offset, 0)?;
        if blocks.is_empty() {
            return Err(Error::InvalidCone("empty product".into()));
        }
        let theta = blocks.iter().map(Block::theta).sum();
        Ok(Cone {
            descriptor,
            blocks,
            dim: offset,
            theta,
        })
    }

    pub fn orthant(n: usize) -> Result<Self> {
        Self::new(ConeDescriptor::Orthant { n })
    }

    pub fn descriptor(&self) -> &ConeDescriptor {
        &self.descriptor
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Barrier parameter ϑ of the standard barrier on this cone.
    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn name(&self) -> String {
        let names: Vec<&str> = self.blocks.iter().map(|b| b.kind.name()).collect();
        let mut dedup = names.clone();
        dedup.dedup();
        dedup.join("+")
    }

    /// Every block carries a self-scaled barrier (Nesterov–Todd scaling exists).
    pub fn is_self_scaled(&self) -> bool {
        self.blocks.iter().all(|b| {
            matches!(
                b.kind,
                BlockKind::Orthant | BlockKind::Weighted(_) | BlockKind::Psd { .. } | BlockKind::Soc
            )
        })
    }

    /// Self-scaled with the optimal barrier on every block (no weights above 1).
    pub fn is_optimal_self_scaled(&self) -> bool {
        self.blocks.iter().all(|b| match &b.kind {
            BlockKind::Orthant | BlockKind::Psd { .. } | BlockKind::Soc => true,
            BlockKind::Weighted(w) => w.iter().all(|&c| c == 1.0),
            _ => false,
        })
    }

    /// The standard barrier of every block has negative curvature.
    pub fn has_negative_curvature(&self) -> bool {
        self.blocks.iter().all(|b| !matches!(b.kind, BlockKind::Exp))
    }

    fn check_dim(&self, v: &Vector) -> Result<()> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: v.len(),
            });
        }
        Ok(())
    }

    /// Canonical interior point.
    pub fn interior_point(&self) -> Vector {
        let mut x = Vector::zeros(self.dim);
        for b in &self.blocks {
            let r = b.range();
            match &b.kind {
                BlockKind::Orthant | BlockKind::Weighted(_) => x.rows_mut(r.start, b.dim).fill(1.0),
                BlockKind::Psd { m } => {
                    x.rows_mut(r.start, b.dim)
                        .copy_from(&svec(&SymMatrix::identity(*m, *m)));
                }
                BlockKind::Soc => x[r.end - 1] = 1.0,
                BlockKind::Exp => {
                    for k in 0..3 {
                        x[r.start + k] = EXP_CENTER[k];
                    }
                }
                BlockKind::Lmi(d) => x.rows_mut(r.start, b.dim).copy_from(&d.interior),
            }
        }
        x
    }

    /// Membership in `K` with a signed margin.
    pub fn contains(&self, x: &Vector, tol: f64) -> Result<Membership> {
        self.check_dim(x)?;
        Ok(self.fold_margins(|b| primal_margin(b, b.slice(x)), tol))
    }

    /// Membership in the dual cone `K*`.
    pub fn dual_contains(&self, s: &Vector, tol: f64) -> Result<Membership> {
        self.check_dim(s)?;
        Ok(self.fold_margins(|b| dual_margin(b, b.slice(s)), tol))
    }

    fn fold_margins(&self, f: impl Fn(&Block) -> (f64, &'static str), tol: f64) -> Membership {
        let mut worst = (f64::INFINITY, 0, "");
        for (i, b) in self.blocks.iter().enumerate() {
            let (m, c) = f(b);
            if m < worst.0 || m.is_nan() {
                worst = (m, i, c);
            }
            if m.is_nan() {
                break;
            }
        }
        let margin = if worst.0.is_nan() { f64::NEG_INFINITY } else { worst.0 };
        Membership::classify(margin, tol, worst.1, worst.2)
    }

    /// Strict interiority check with an error naming the violated constraint.
    pub fn require_interior(&self, x: &Vector) -> Result<()> {
        let m = self.contains(x, 0.0)?;
        if m.is_interior() {
            Ok(())
        } else {
            Err(Error::NotInterior {
                cone: format!("K ({})", self.blocks[m.block].kind.name()),
                constraint: format!("block {} {}", m.block, m.constraint),
                margin: m.margin,
            })
        }
    }

    pub fn require_dual_interior(&self, s: &Vector) -> Result<()> {
        let m = self.dual_contains(s, 0.0)?;
        if m.is_interior() {
            Ok(())
        } else {
            Err(Error::NotInterior {
                cone: format!("K* ({})", self.blocks[m.block].kind.name()),
                constraint: format!("block {} {}", m.block, m.constraint),
                margin: m.margin,
            })
        }
    }

    /// Minkowski gauge `σ_x(h)`, closed form where available.
    pub fn gauge(&self, x: &Vector, h: &Vector) -> Result<GaugeResult> {
        self.check_dim(x)?;
        self.check_dim(h)?;
        self.require_interior(x)?;
        let mut sigma = 0.0_f64;
        for b in &self.blocks {
            sigma = sigma.max(block_gauge(b, b.slice(x), b.slice(h))?);
        }
        Ok(self.gauge_result(x, h, sigma))
    }

    /// Minkowski gauge by bisection on the membership oracle.
    pub fn gauge_bisect(&self, x: &Vector, h: &Vector) -> Result<GaugeResult> {
        self.check_dim(x)?;
        self.check_dim(h)?;
        self.require_interior(x)?;
        let inside = |beta: f64| {
            let p = x * beta - h;
            self.fold_margins(|b| primal_margin(b, b.slice(&p)), 0.0).margin >= 0.0
        };
        let sigma = bisect_threshold(inside, x.norm().max(1e-300), h.norm());
        Ok(self.gauge_result(x, h, sigma))
    }

    fn gauge_result(&self, x: &Vector, h: &Vector, sigma: f64) -> GaugeResult {
        let boundary_point = (sigma > 0.0).then(|| x * sigma - h);
        GaugeResult {
            sigma,
            boundary_point,
        }
    }

    /// `|h|_x = max(σ_x(h), σ_x(−h))`.
    pub fn minkowski_norm(&self, x: &Vector, h: &Vector) -> Result<f64> {
        let a = self.gauge(x, h)?.sigma;
        let b = self.gauge(x, &-h)?.sigma;
        Ok(a.max(b))
    }

    /// Gauge of the dual cone: `inf{β ≥ 0 : βs − d ∈ K*}`.
    pub fn dual_gauge(&self, s: &Vector, d: &Vector) -> Result<f64> {
        self.check_dim(s)?;
        self.check_dim(d)?;
        self.require_dual_interior(s)?;
        let mut sigma = 0.0_f64;
        for b in &self.blocks {
            let (sb, db) = (b.slice(s), b.slice(d));
            let g = match &b.kind {
                BlockKind::Orthant | BlockKind::Weighted(_) | BlockKind::Psd { .. } | BlockKind::Soc => {
                    block_gauge(b, sb, db)?
                }
                BlockKind::Exp | BlockKind::Lmi(_) => {
                    let sv = Vector::from_column_slice(sb);
                    let dv = Vector::from_column_slice(db);
                    bisect_threshold(
                        |beta| {
                            let p = &sv * beta - &dv;
                            dual_margin(b, p.as_slice()).0 >= 0.0
                        },
                        sv.norm(),
                        dv.norm(),
                    )
                }
            };
            sigma = sigma.max(g);
        }
        Ok(sigma)
    }
}

fn flatten(desc: &ConeDescriptor, out: &mut Vec<Block>, offset: &mut usize, depth: usize) -> Result<()> {
    if depth > 32 {
        return Err(Error::InvalidCone("product nesting too deep".into()));
    }
    let mut push = |kind: BlockKind, dim: usize, out: &mut Vec<Block>| -> Result<()> {
        if dim == 0 {
            return Err(Error::InvalidCone(format!("{} block of dimension 0", kind.name())));
        }
        if *offset + dim > MAX_AMBIENT_DIM {
            return Err(Error::InvalidCone(format!(
                "ambient dimension exceeds {MAX_AMBIENT_DIM}"
            )));
        }
        out.push(Block {
            kind,
            offset: *offset,
            dim,
        });
        *offset += dim;
        Ok(())
    };
    match desc {
        ConeDescriptor::Orthant { n } => push(BlockKind::Orthant, *n, out),
        ConeDescriptor::Psd { m } => {
            if *m == 0 || *m > MAX_MATRIX_ORDER {
                return Err(Error::InvalidCone(format!(
                    "psd order must be in 1..={MAX_MATRIX_ORDER}, got {m}"
                )));
            }
            push(BlockKind::Psd { m: *m }, m * (m + 1) / 2, out)
        }
        ConeDescriptor::Soc { blocks } => {
            if blocks.is_empty() {
                return Err(Error::InvalidCone("soc needs at least one block".into()));
            }
            for &p in blocks {
                if p == 0 || p >= MAX_AMBIENT_DIM {
                    return Err(Error::InvalidCone(format!("invalid soc block width {p}")));
                }
                push(BlockKind::Soc, p + 1, out)?;
            }
            Ok(())
        }
        ConeDescriptor::Exp { copies } => {
            if *copies == 0 || *copies > MAX_AMBIENT_DIM / 3 {
                return Err(Error::InvalidCone(format!("invalid exp copy count {copies}")));
            }
            for _ in 0..*copies {
                push(BlockKind::Exp, 3, out)?;
            }
            Ok(())
        }
        ConeDescriptor::WeightedOrthant { weights } => {
            if let Some(c) = weights.iter().find(|c| !(c.is_finite() && **c >= 1.0)) {
                return Err(Error::InvalidCone(format!("barrier weight {c} is not a finite value ≥ 1")));
            }
            push(BlockKind::Weighted(weights.clone()), weights.len(), out)
        }
        ConeDescriptor::LmiSlice {
            size,
            matrices,
            interior,
        } => {
            let data = validate_lmi(*size, matrices, interior.as_deref())?;
            let n = data.mats.len();
            push(BlockKind::Lmi(data), n, out)
        }
        ConeDescriptor::Product { parts } => {
            if parts.is_empty() {
                return Err(Error::InvalidCone("empty product".into()));
            }
            for p in parts {
                flatten(p, out, offset, depth + 1)?;
            }
            Ok(())
        }
    }
}

fn validate_lmi(size: usize, matrices: &[Vec<f64>], interior: Option<&[f64]>) -> Result<LmiData> {
    if size == 0 || size > MAX_MATRIX_ORDER {
        return Err(Error::InvalidCone(format!(
            "lmi_slice size must be in 1..={MAX_MATRIX_ORDER}, got {size}"
        )));
    }
    let max_params = size * (size + 1) / 2;
    if matrices.is_empty() || matrices.len() > max_params {
        return Err(Error::InvalidCone(format!(
            "lmi_slice needs between 1 and {max_params} matrices, got {}",
            matrices.len()
        )));
    }
    let mut mats = Vec::with_capacity(matrices.len());
    for (k, a) in matrices.iter().enumerate() {
        if a.len() != size * size {
            return Err(Error::InvalidCone(format!(
                "lmi_slice matrix {k} has {} entries, expected {}",
                a.len(),
                size * size
            )));
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidCone(format!("lmi_slice matrix {k} has non-finite entries")));
        }
        let m = DMatrix::from_row_slice(size, size, a);
        if denselin::check_symmetric(&m).is_err() {
            return Err(Error::InvalidCone(format!("lmi_slice matrix {k} is not symmetric")));
        }
        mats.push(denselin::symmetrize(&m));
    }
    let n = mats.len();
    let gram = SymMatrix::from_fn(n, n, |i, j| mats[i].dot(&mats[j]));
    let gram_scale = denselin::scale_of(&gram);
    let gram_factor = chol_unchecked(&gram).ok().filter(|f| {
        let d = f.lower().diagonal();
        let dmin = d.iter().cloned().fold(f64::INFINITY, f64::min);
        dmin * dmin > 1e-12 * gram_scale
    });
    let Some(gram_factor) = gram_factor else {
        return Err(Error::InvalidCone("lmi_slice matrices are linearly dependent".into()));
    };
    let mut data = LmiData {
        size,
        mats,
        interior: Vector::zeros(n),
    };
    let x = match interior {
        Some(p) => {
            if p.len() != n {
                return Err(Error::InvalidCone(format!(
                    "lmi_slice interior point has {} entries, expected {n}",
                    p.len()
                )));
            }
            Vector::from_column_slice(p)
        }
        // Least-squares fit of the identity within the span.
        None => gram_factor.solve(&data.adjoint(&SymMatrix::identity(size, size))),
    };
    let lmin = denselin::lambda_min(&data.matrix(x.as_slice()));
    if !(lmin > 0.0) {
        return Err(Error::InvalidCone(
            "lmi_slice has no detected interior point (supply one with \"interior\")".into(),
        ));
    }
    data.interior = x;
    Ok(data)
}

/// Signed distance-like margin for `K` on one block.
fn primal_margin(b: &Block, x: &[f64]) -> (f64, &'static str) {
    if x.iter().any(|v| v.is_nan()) {
        return (f64::NAN, "finite entries");
    }
    match &b.kind {
        BlockKind::Orthant | BlockKind::Weighted(_) => (min_of(x), "x_i ≥ 0"),
        BlockKind::Psd { m } => (
            denselin::lambda_min(&smat(&Vector::from_column_slice(x), *m)),
            "λ_min(X) ≥ 0",
        ),
        BlockKind::Soc => {
            let p = x.len() - 1;
            let ynorm = x[..p].iter().map(|v| v * v).sum::<f64>().sqrt();
            (x[p] - ynorm, "t − ‖y‖ ≥ 0")
        }
        BlockKind::Exp => exp_primal_margin(x),
        BlockKind::Lmi(d) => (denselin::lambda_min(&d.matrix(x)), "λ_min(Σ xᵢAᵢ) ≥ 0"),
    }
}

fn exp_primal_margin(x: &[f64]) -> (f64, &'static str) {
    let (x1, x2, x3) = (x[0], x[1], x[2]);
    if x2 > 0.0 {
        if x1 > 0.0 {
            let g = x2 * (x1 / x2).ln() - x3;
            (g.min(x2), "x₂ ln(x₁/x₂) − x₃ ≥ 0")
        } else {
            (x1 - x2 * (x3 / x2).exp(), "x₁ ≥ x₂ exp(x₃/x₂)")
        }
    } else {
        // closure ray x₂ = 0 requires x₁ ≥ 0 and x₃ ≤ 0
        (x2.min(x1).min(-x3), "x₂ = 0 ⇒ x₁ ≥ 0, x₃ ≤ 0")
    }
}

fn exp_dual_margin(z: &[f64]) -> (f64, &'static str) {
    let (z1, z2, z3) = (z[0], z[1], z[2]);
    if z3 < 0.0 {
        if z1 > 0.0 {
            // e·z₁ ≥ −z₃ exp(z₂/z₃)  ⇔  z₂ − z₃ − z₃ ln(z₁/(−z₃)) ≥ 0
            let g = z2 - z3 - z3 * (z1 / -z3).ln();
            (g.min(-z3), "e·z₁ ≥ −z₃ exp(z₂/z₃)")
        } else {
            (z1 + z3 * (z2 / z3).exp() / std::f64::consts::E, "e·z₁ ≥ −z₃ exp(z₂/z₃)")
        }
    } else {
        // closure ray z₃ = 0 requires z₁ ≥ 0 and z₂ ≥ 0
        ((-z3).min(z1).min(z2), "z₃ = 0 ⇒ z₁ ≥ 0, z₂ ≥ 0")
    }
}

fn dual_margin(b: &Block, s: &[f64]) -> (f64, &'static str) {
    if s.iter().any(|v| v.is_nan()) {
        return (f64::NAN, "finite entries");
    }
    match &b.kind {
        BlockKind::Exp => exp_dual_margin(s),
        BlockKind::Lmi(d) => (lmi_dual_margin(d, s), "min ⟨s, x⟩ over normalized K ≥ 0"),
        _ => primal_margin(b, s),
    }
}

/// `min{⟨s, x⟩ : x ∈ K, ⟨c, x⟩ = 1}` with `c = −F'(x_ref)/ϑ`, computed by a
/// barrier path on the compact slice. Positive iff `s ∈ int K*`.
fn lmi_dual_margin(d: &LmiData, s: &[f64]) -> f64 {
    let n = d.mats.len();
    let s = Vector::from_column_slice(s);
    let theta = d.size as f64;
    let grad_hess = |x: &Vector| -> Option<(f64, Vector, SymMatrix)> {
        let f = chol_unchecked(&d.matrix(x.as_slice())).ok()?;
        let whitened: Vec<SymMatrix> = d.mats.iter().map(|a| f.whiten(a)).collect();
        let g = Vector::from_iterator(n, whitened.iter().map(|b| -b.trace()));
        let h = SymMatrix::from_fn(n, n, |i, j| whitened[i].dot(&whitened[j]));
        Some((-f.log_det(), g, h))
    };
    let x_ref = d.interior.clone();
    let Some((_, g_ref, _)) = grad_hess(&x_ref) else {
        return f64::NAN;
    };
    let c = -g_ref / theta;
    let mut x = x_ref;
    let mut t = 1.0 / s.norm().max(1e-300);
    let mut value = s.dot(&x);
    for _outer in 0..40 {
        // centering: minimize t⟨s,x⟩ + F(x) subject to ⟨c, x⟩ = 1
        let mut failed = false;
        for _ in 0..60 {
            let Some((fv, g, h)) = grad_hess(&x) else {
                failed = true;
                break;
            };
            let Ok(hf) = chol_unchecked(&h) else {
                failed = true;
                break;
            };
            let rhs = -(&s * t + &g);
            let hinv_rhs = hf.solve(&rhs);
            let hinv_c = hf.solve(&c);
            let nu = c.dot(&hinv_rhs) / c.dot(&hinv_c);
            let dx = hinv_rhs - hinv_c * nu;
            let lambda2 = dx.dot(&(&h * &dx));
            if !(lambda2 >= 1e-20) {
                break;
            }
            let phi0 = t * s.dot(&x) + fv;
            let mut alpha = 1.0 / (1.0 + lambda2.sqrt());
            let mut accepted = false;
            for _ in 0..50 {
                let xn = &x + &dx * alpha;
                if let Some((fn_, _, _)) = grad_hess(&xn) {
                    if t * s.dot(&xn) + fn_ <= phi0 + 1e-12 * phi0.abs().max(1.0) {
                        x = xn;
                        accepted = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            if !accepted || lambda2 < 1e-18 {
                break;
            }
        }
        value = s.dot(&x);
        let gap = theta / t;
        if failed || value < 0.0 || (value - gap > 0.0 && gap < 1e-3 * value) || gap < 1e-13 * s.norm() {
            // the slice minimum lies in [value − gap, value]
            return if value < 0.0 { value } else { value - gap };
        }
        t *= 10.0;
    }
    value
}

fn min_of(x: &[f64]) -> f64 {
    x.iter().cloned().fold(f64::INFINITY, f64::min)
}

/// Smallest `β ≥ 0` for which `inside(β)` holds, assuming monotonicity.
fn bisect_threshold(inside: impl Fn(f64) -> bool, x_norm: f64, h_norm: f64) -> f64 {
    if inside(0.0) {
        return 0.0;
    }
    let mut hi = (h_norm / x_norm).max(1e-12);
    let mut grow = 0;
    while !inside(hi) {
        hi *= 2.0;
        grow += 1;
        if grow > 2000 || !hi.is_finite() {
            return f64::INFINITY;
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        if hi - lo <= 1e-13 * (1.0 + hi) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if inside(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

fn block_gauge(b: &Block, x: &[f64], h: &[f64]) -> Result<f64> {
    let sigma = match &b.kind {
        BlockKind::Orthant | BlockKind::Weighted(_) => x
            .iter()
            .zip(h)
            .map(|(xi, hi)| hi / xi)
            .fold(0.0_f64, f64::max),
        BlockKind::Psd { m } => {
            let xm = smat(&Vector::from_column_slice(x), *m);
            let hm = smat(&Vector::from_column_slice(h), *m);
            denselin::geneig_range(&hm, &xm)?.1.max(0.0)
        }
        BlockKind::Lmi(d) => denselin::geneig_range(&d.matrix(h), &d.matrix(x))?.1.max(0.0),
        BlockKind::Soc => soc_gauge(x, h),
        BlockKind::Exp => {
            let xv = Vector::from_column_slice(x);
            let hv = Vector::from_column_slice(h);
            bisect_threshold(
                |beta| {
                    let p = &xv * beta - &hv;
                    exp_primal_margin(p.as_slice()).0 >= 0.0
                },
                xv.norm(),
                hv.norm(),
            )
        }
    };
    Ok(sigma)
}

/// Largest root of `(βt − t_h)² − ‖βy − y_h‖² = 0`, clamped at zero.
fn soc_gauge(x: &[f64], h: &[f64]) -> f64 {
    let p = x.len() - 1;
    let (y, t) = (&x[..p], x[p]);
    let (yh, th) = (&h[..p], h[p]);
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(u, v)| u * v).sum::<f64>();
    let a = t * t - dot(y, y);
    let half_b = -(t * th - dot(y, yh));
    let c = th * th - dot(yh, yh);
    let disc = (half_b * half_b - a * c).max(0.0);
    if disc < 1e-4 * half_b * half_b {
        // near double root: shift h by mid·x so the discriminant comes from a small vector
        let mid = -half_b / a;
        let ys: Vec<f64> = yh.iter().zip(y).map(|(u, v)| u - mid * v).collect();
        let ts = th - mid * t;
        let half_bs = -(t * ts - dot(y, &ys));
        let cs = ts * ts - dot(&ys, &ys);
        let spread = (-half_bs + (half_bs * half_bs - a * cs).max(0.0).sqrt()) / a;
        return (mid + spread).max(0.0);
    }
    let root = if half_b <= 0.0 {
        (-half_b + disc.sqrt()) / a
    } else {
        let den = -half_b - disc.sqrt();
        if den == 0.0 { 0.0 } else { c / den }
    };
    root.max(0.0)
}

/// Scaled symmetric vectorization of a symmetric matrix.
pub fn svec(m: &SymMatrix) -> Vector {
    let n = m.nrows();
    let mut v = Vector::zeros(n * (n + 1) / 2);
    let mut k = 0;
    for j in 0..n {
        for i in j..n {
            v[k] = if i == j { m[(i, j)] } else { m[(i, j)] * SQRT_2 };
            k += 1;
        }
    }
    v
}

/// Inverse of [`svec`].
pub fn smat(v: &Vector, n: usize) -> SymMatrix {
    let mut m = SymMatrix::zeros(n, n);
    let mut k = 0;
    for j in 0..n {
        for i in j..n {
            let val = if i == j { v[k] } else { v[k] / SQRT_2 };
            m[(i, j)] = val;
            m[(j, i)] = val;
            k += 1;
        }
    }
    m
}

/// Order `m` with `m(m+1)/2 = len`, if any.
pub fn svec_order(len: usize) -> Option<usize> {
    let m = (((8 * len + 1) as f64).sqrt() as usize).saturating_sub(1) / 2;
    (m * (m + 1) / 2 == len).then_some(m)
}
