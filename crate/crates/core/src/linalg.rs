//! Dense helpers shared by the subspace and functional code: rank-revealing
//! spans, orthogonal complements, projectors and pseudoinverse solves of
//! symmetric positive semidefinite systems.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Orthonormal basis (as columns) of the span of the columns of `generators`.
///
/// Directions whose singular value does not exceed `rank_tol * sigma_max` are
/// dropped, so a tie at the cutoff counts as rank-deficient.
pub fn orthonormal_span(generators: &DMatrix<f64>, rank_tol: f64) -> DMatrix<f64> {
    let n = generators.nrows();
    if generators.ncols() == 0 || n == 0 {
        return DMatrix::zeros(n, 0);
    }
    let svd = generators.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
    if sigma_max <= 0.0 {
        return DMatrix::zeros(n, 0);
    }
    let cutoff = rank_tol * sigma_max;
    let keep: Vec<usize> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > cutoff)
        .map(|(i, _)| i)
        .collect();
    let mut basis = DMatrix::zeros(n, keep.len());
    for (j, &i) in keep.iter().enumerate() {
        basis.set_column(j, &u.column(i));
    }
    basis
}

/// Orthonormal basis of the Euclidean orthogonal complement of the column
/// span of `basis`, which must already have orthonormal columns.
pub fn orthogonal_complement(basis: &DMatrix<f64>) -> DMatrix<f64> {
    let n = basis.nrows();
    let residual = DMatrix::identity(n, n) - basis * basis.transpose();
    let eig = SymmetricEigen::new(symmetrize(&residual));
    // Eigenvalues of I - QQ^T cluster at 0 and 1.
    let keep: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i] > 0.5).collect();
    let mut out = DMatrix::zeros(n, keep.len());
    for (j, &i) in keep.iter().enumerate() {
        out.set_column(j, &eig.eigenvectors.column(i));
    }
    out
}

/// Orthonormal basis of `{x : K x = 0}`.
pub fn null_space(constraints: &DMatrix<f64>, rank_tol: f64) -> DMatrix<f64> {
    let rows = orthonormal_span(&constraints.transpose(), rank_tol);
    orthogonal_complement(&rows)
}

/// Orthogonal projector `Q Q^T` onto the column span of an orthonormal `Q`.
pub fn projector(basis: &DMatrix<f64>) -> DMatrix<f64> {
    basis * basis.transpose()
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Eigen-decomposition of a symmetric matrix with eigenvalues sorted ascending.
pub fn sorted_eigen(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let k = m.nrows();
    if k == 0 {
        return (DVector::zeros(0), DMatrix::zeros(0, 0));
    }
    let eig = SymmetricEigen::new(symmetrize(m));
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = DVector::from_iterator(k, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(k, k);
    for (j, &i) in order.iter().enumerate() {
        vectors.set_column(j, &eig.eigenvectors.column(i));
    }
    (values, vectors)
}

/// Smallest eigenvalue of a symmetric matrix; `+inf` for the empty matrix.
pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    let (values, _) = sorted_eigen(m);
    values.iter().cloned().fold(f64::INFINITY, f64::min)
}

/// Largest eigenvalue of a symmetric matrix; `-inf` for the empty matrix.
pub fn max_eigenvalue(m: &DMatrix<f64>) -> f64 {
    let (values, _) = sorted_eigen(m);
    values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
}

/// Outcome of solving `M z = w` for symmetric positive semidefinite `M`.
#[derive(Debug, Clone, PartialEq)]
pub enum PsdSolve {
    /// `w` lies in `range(M)`; `z = M^+ w` is the least-norm solution and
    /// `energy = w^T M^+ w`.
    Solved { z: DVector<f64>, energy: f64 },
    /// `w` has a component outside `range(M)` beyond tolerance.
    OutsideRange { residual: f64 },
}

/// Spectral factorization of a symmetric positive semidefinite matrix,
/// reusable across right-hand sides.
///
/// Eigenvalues at or below `rank_tol * max(lambda_max, 1)` are treated as
/// zero. Membership of `w` in the range is accepted when the part of `w`
/// along the discarded eigenvectors has norm at most `abs_tol * (1 + |w|)`.
#[derive(Debug, Clone)]
pub struct PsdSystem {
    values: DVector<f64>,
    vectors: DMatrix<f64>,
    cutoff: f64,
}

impl PsdSystem {
    pub fn new(m: &DMatrix<f64>, rank_tol: f64) -> Self {
        let (values, vectors) = sorted_eigen(m);
        let lambda_max = values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
        PsdSystem { values, vectors, cutoff: rank_tol * lambda_max.max(1.0) }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Least-norm solution of `M z = w` via the pseudoinverse.
    pub fn solve(&self, w: &DVector<f64>, abs_tol: f64) -> PsdSolve {
        let k = self.values.len();
        let coords = self.vectors.transpose() * w;
        let mut z = DVector::zeros(k);
        let mut energy = 0.0;
        let mut outside = 0.0;
        for i in 0..k {
            let c = coords[i];
            if self.values[i] > self.cutoff {
                let scaled = c / self.values[i];
                z += self.vectors.column(i) * scaled;
                energy += c * scaled;
            } else {
                outside += c * c;
            }
        }
        let outside = outside.sqrt();
        if outside > abs_tol * (1.0 + w.norm()) {
            PsdSolve::OutsideRange { residual: outside }
        } else {
            PsdSolve::Solved { z, energy }
        }
    }
}

/// One-shot [`PsdSystem`] solve.
pub fn psd_solve(m: &DMatrix<f64>, w: &DVector<f64>, rank_tol: f64, abs_tol: f64) -> PsdSolve {
    PsdSystem::new(m, rank_tol).solve(w, abs_tol)
}

/// Stack column vectors into an `n x m` matrix.
pub fn columns(n: usize, vectors: &[DVector<f64>]) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(n, vectors.len());
    for (j, v) in vectors.iter().enumerate() {
        out.set_column(j, v);
    }
    out
}
