//! Dense real symmetric linear algebra.
//!
//! Everything in this crate works on desk-scale problems, so vectors and
//! matrices are plain `nalgebra` dense storage. Symmetric eigenproblems are
//! delegated to `nalgebra::SymmetricEigen`; the Cholesky factorization is
//! written out here so that failures can report the offending pivot.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

pub type Vector = DVector<f64>;
pub type SymMatrix = DMatrix<f64>;

/// Relative asymmetry accepted by [`check_symmetric`].
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Lower-triangular Cholesky factor `L` with `L Lᵀ = M`.
#[derive(Clone, Debug)]
pub struct Factor {
    l: DMatrix<f64>,
}

impl Factor {
    pub fn lower(&self) -> &DMatrix<f64> {
        &self.l
    }

    pub fn dim(&self) -> usize {
        self.l.nrows()
    }

    /// Solves `M z = b`.
    pub fn solve(&self, b: &Vector) -> Vector {
        let y = self.solve_lower(b);
        self.solve_upper(&y)
    }

    /// Solves `M Z = B` column by column.
    pub fn solve_mat(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        let y = self
            .l
            .solve_lower_triangular(b)
            .expect("Cholesky factor has a positive diagonal");
        self.l
            .transpose()
            .solve_upper_triangular(&y)
            .expect("Cholesky factor has a positive diagonal")
    }

    /// Solves `L y = b`.
    pub fn solve_lower(&self, b: &Vector) -> Vector {
        self.l
            .solve_lower_triangular(b)
            .expect("Cholesky factor has a positive diagonal")
    }

    /// Solves `Lᵀ z = y`.
    pub fn solve_upper(&self, y: &Vector) -> Vector {
        self.l
            .transpose()
            .solve_upper_triangular(y)
            .expect("Cholesky factor has a positive diagonal")
    }

    /// `L⁻¹ A L⁻ᵀ` for symmetric `A`, symmetrized.
    pub fn whiten(&self, a: &SymMatrix) -> SymMatrix {
        let y = self
            .l
            .solve_lower_triangular(a)
            .expect("Cholesky factor has a positive diagonal");
        let c = self
            .l
            .solve_lower_triangular(&y.transpose())
            .expect("Cholesky factor has a positive diagonal");
        symmetrize(&c)
    }

    /// `M⁻¹`, symmetrized.
    pub fn inverse(&self) -> SymMatrix {
        let n = self.dim();
        symmetrize(&self.solve_mat(&DMatrix::identity(n, n)))
    }

    /// `ln det M`.
    pub fn log_det(&self) -> f64 {
        2.0 * self.l.diagonal().iter().map(|d| d.ln()).sum::<f64>()
    }
}

/// Largest absolute entry, at least 1; the scale used for relative tolerances.
pub fn scale_of(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(1.0_f64, |acc, v| acc.max(v.abs()))
}

pub fn asymmetry(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for j in 0..n {
        for i in (j + 1)..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

pub fn check_symmetric(m: &DMatrix<f64>) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            actual: m.ncols(),
        });
    }
    let asym = asymmetry(m);
    if asym > SYMMETRY_TOL * scale_of(m) {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }
    Ok(())
}

pub fn symmetrize(m: &DMatrix<f64>) -> SymMatrix {
    (m + m.transpose()) * 0.5
}

/// Cholesky factorization of a symmetric positive definite matrix.
///
/// Non-symmetric input is rejected; an indefinite matrix yields
/// [`Error::NotPositiveDefinite`] carrying the first failing pivot.
pub fn chol_factor(m: &SymMatrix) -> Result<Factor> {
    check_symmetric(m)?;
    chol_unchecked(m)
}

/// Cholesky without the symmetry check; only the lower triangle is read.
pub(crate) fn chol_unchecked(m: &SymMatrix) -> Result<Factor> {
    let n = m.nrows();
    let mut l = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let mut d = m[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::NotPositiveDefinite { pivot: j });
        }
        let d = d.sqrt();
        l[(j, j)] = d;
        for i in (j + 1)..n {
            let mut v = m[(i, j)];
            for k in 0..j {
                v -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = v / d;
        }
    }
    Ok(Factor { l })
}

/// Solves `M z = b` for symmetric positive definite `M`, falling back to a
/// pivoted LU when rounding makes the Cholesky factorization break down.
pub fn spd_solve(m: &SymMatrix, b: &Vector) -> Result<Vector> {
    match chol_unchecked(m) {
        Ok(f) => Ok(f.solve(b)),
        Err(e) => m.clone().full_piv_lu().solve(b).ok_or(e),
    }
}

/// Eigen-decomposition of a symmetric matrix, eigenvalues ascending.
pub fn sym_eigen(m: &SymMatrix) -> (Vector, DMatrix<f64>) {
    let n = m.nrows();
    let eig = SymmetricEigen::new(symmetrize(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = Vector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::<f64>::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vectors.set_column(k, &eig.eigenvectors.column(i));
    }
    (values, vectors)
}

pub fn sym_eigenvalues(m: &SymMatrix) -> Vector {
    sym_eigen(m).0
}

pub fn lambda_min(m: &SymMatrix) -> f64 {
    let v = sym_eigenvalues(m);
    v[0]
}

pub fn lambda_max(m: &SymMatrix) -> f64 {
    let v = sym_eigenvalues(m);
    v[v.len() - 1]
}

/// Applies `f` to the eigenvalues of a symmetric matrix.
pub fn sym_apply(m: &SymMatrix, f: impl Fn(f64) -> f64) -> SymMatrix {
    let (vals, vecs) = sym_eigen(m);
    let d = DMatrix::from_diagonal(&vals.map(f));
    symmetrize(&(&vecs * d * vecs.transpose()))
}

/// Generalized symmetric-definite eigenproblem `A q = λ B q`.
#[derive(Clone, Debug)]
pub struct GenEig {
    /// Ascending eigenvalues.
    pub values: Vector,
    /// Column `k` is the eigenvector of `values[k]`, normalized to unit 2-norm.
    pub vectors: DMatrix<f64>,
}

impl GenEig {
    pub fn max(&self) -> (f64, Vector) {
        let k = self.values.len() - 1;
        (self.values[k], self.vectors.column(k).into_owned())
    }

    pub fn min(&self) -> (f64, Vector) {
        (self.values[0], self.vectors.column(0).into_owned())
    }
}

/// Solves `A q = λ B q` by whitening with the Cholesky factor of `B`.
pub fn geneig(a: &SymMatrix, b: &SymMatrix) -> Result<GenEig> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch {
            expected: b.nrows(),
            actual: a.nrows(),
        });
    }
    check_symmetric(a)?;
    let factor = chol_factor(b)?;
    Ok(geneig_with(a, &factor))
}

pub(crate) fn geneig_with(a: &SymMatrix, b_factor: &Factor) -> GenEig {
    let c = b_factor.whiten(a);
    let (values, z) = sym_eigen(&c);
    let n = values.len();
    let mut vectors = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        let q = b_factor.solve_upper(&z.column(k).into_owned());
        let norm = q.norm();
        vectors.set_column(k, &(q / norm));
    }
    GenEig { values, vectors }
}

/// Largest generalized eigenvalue of the pair `(A, B)` with its unit eigenvector.
pub fn geneig_max(a: &SymMatrix, b: &SymMatrix) -> Result<(f64, Vector)> {
    Ok(geneig(a, b)?.max())
}

/// Extreme generalized eigenvalues `(λ_min, λ_max)` without eigenvectors.
pub fn geneig_range(a: &SymMatrix, b: &SymMatrix) -> Result<(f64, f64)> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch {
            expected: b.nrows(),
            actual: a.nrows(),
        });
    }
    let factor = chol_unchecked(b)?;
    let vals = sym_eigenvalues(&factor.whiten(a));
    Ok((vals[0], vals[vals.len() - 1]))
}

/// Smallest eigenvalue of `B − A`; nonnegative certifies `A ⪯ B`.
pub fn min_eig_diff(a: &SymMatrix, b: &SymMatrix) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch {
            expected: b.nrows(),
            actual: a.nrows(),
        });
    }
    Ok(lambda_min(&(b - a)))
}

/// Quadratic form `vᵀ M v`.
pub fn quad(m: &SymMatrix, v: &Vector) -> f64 {
    v.dot(&(m * v))
}

/// Orthonormal basis of the orthogonal complement of `normal`.
pub fn complement_basis(normal: &Vector) -> DMatrix<f64> {
    let n = normal.len();
    let unit = normal / normal.norm();
    let mut basis: Vec<Vector> = Vec::with_capacity(n.saturating_sub(1));
    // Gram-Schmidt on the standard basis, skipping the most aligned axis.
    let skip = unit.iamax();
    for k in 0..n {
        if k == skip {
            continue;
        }
        let mut e = Vector::zeros(n);
        e[k] = 1.0;
        for _ in 0..2 {
            e -= &unit * unit.dot(&e);
            for b in &basis {
                e -= b * b.dot(&e);
            }
        }
        let norm = e.norm();
        basis.push(e / norm);
    }
    DMatrix::from_columns(&basis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_spd(n: usize, rng: &mut ChaCha8Rng) -> SymMatrix {
        let m = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        &m * m.transpose() + DMatrix::identity(n, n)
    }

    fn random_sym(n: usize, rng: &mut ChaCha8Rng) -> SymMatrix {
        let m = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        symmetrize(&m)
    }

    #[test]
    fn chol_identity_and_diagonal() {
        let f = chol_factor(&DMatrix::identity(3, 3)).unwrap();
        assert_eq!(f.lower(), &DMatrix::<f64>::identity(3, 3));
        let f = chol_factor(&DMatrix::from_diagonal(&Vector::from_vec(vec![4.0, 9.0]))).unwrap();
        assert_eq!(f.lower()[(0, 0)], 2.0);
        assert_eq!(f.lower()[(1, 1)], 3.0);
        assert_eq!(f.lower()[(1, 0)], 0.0);
    }

    #[test]
    fn chol_reconstructs_random_spd() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let b = random_spd(5, &mut rng);
        let f = chol_factor(&b).unwrap();
        let err = (f.lower() * f.lower().transpose() - &b).norm();
        assert!(err <= 1e-10 * b.norm());
    }

    #[test]
    fn chol_reports_pivot_and_rejects_asymmetry() {
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 1.0]);
        assert!(matches!(chol_factor(&m), Err(Error::NotPositiveDefinite { pivot: 1 })));
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(matches!(chol_factor(&m), Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn geneig_simple_cases() {
        let i = DMatrix::<f64>::identity(3, 3);
        let (l, _) = geneig_max(&i, &i).unwrap();
        assert!((l - 1.0).abs() < 1e-14);
        let a = DMatrix::from_diagonal(&Vector::from_vec(vec![1.0, 4.0]));
        let (l, q) = geneig_max(&a, &DMatrix::identity(2, 2)).unwrap();
        assert!((l - 4.0).abs() < 1e-14);
        assert!(q[0].abs() < 1e-14 && (q[1].abs() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn geneig_matches_explicit_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random_spd(6, &mut rng);
        let b = random_spd(6, &mut rng);
        let g = geneig(&a, &b).unwrap();
        // Oracle: eigenvalues of B⁻¹A from the general (non-symmetric) solver.
        let binv = b.clone().try_inverse().unwrap();
        let mut oracle: Vec<f64> = (binv * &a).complex_eigenvalues().iter().map(|c| c.re).collect();
        oracle.sort_by(f64::total_cmp);
        for (k, o) in oracle.iter().enumerate() {
            assert!((g.values[k] - o).abs() <= 1e-9 * o.abs().max(1.0), "{k}: {} vs {o}", g.values[k]);
        }
        let (lmax, q) = g.max();
        let resid = (&a * &q - &b * &q * lmax).norm();
        assert!(resid < 1e-9 * a.norm());
        assert!((q.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn geneig_requires_definite_b() {
        let a = DMatrix::<f64>::identity(2, 2);
        let b = DMatrix::from_diagonal(&Vector::from_vec(vec![1.0, 0.0]));
        assert!(matches!(geneig_max(&a, &b), Err(Error::NotPositiveDefinite { pivot: 1 })));
    }

    #[test]
    fn geneig_congruence_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let a = random_sym(5, &mut rng);
            let b = random_spd(5, &mut rng);
            let c = DMatrix::from_fn(5, 5, |i, j| {
                if i == j { 2.0 } else { rng.random_range(-0.5..0.5) }
            });
            let (l1, _) = geneig_max(&a, &b).unwrap();
            let ca = symmetrize(&(c.transpose() * &a * &c));
            let cb = symmetrize(&(c.transpose() * &b * &c));
            let (l2, _) = geneig_max(&ca, &cb).unwrap();
            assert!((l1 - l2).abs() <= 1e-8 * l1.abs().max(1.0));
        }
    }

    #[test]
    fn min_eig_diff_cases() {
        let z = DMatrix::<f64>::zeros(2, 2);
        let i = DMatrix::<f64>::identity(2, 2);
        assert!((min_eig_diff(&z, &i).unwrap() - 1.0).abs() < 1e-15);
        let b = DMatrix::from_diagonal(&Vector::from_vec(vec![2.0, 0.5]));
        assert!((min_eig_diff(&i, &b).unwrap() + 0.5).abs() < 1e-15);
        assert!(matches!(
            min_eig_diff(&i, &DMatrix::identity(3, 3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn min_eig_diff_matches_full_decomposition() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a = random_sym(6, &mut rng);
        let b = random_sym(6, &mut rng);
        let d = &b - &a;
        let eig = SymmetricEigen::new(d.clone());
        let oracle = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!((min_eig_diff(&a, &b).unwrap() - oracle).abs() < 1e-12);
    }

    #[test]
    fn complement_basis_is_orthonormal() {
        let n = Vector::from_vec(vec![1.0, 2.0, -0.5, 3.0]);
        let b = complement_basis(&n);
        assert_eq!(b.ncols(), 3);
        let g = b.transpose() * &b;
        assert!((g - DMatrix::<f64>::identity(3, 3)).norm() < 1e-13);
        assert!((b.transpose() * &n).norm() < 1e-13);
    }
}
