//! Seeded generators of random spaces, subspaces, relations and monotone
//! matrices, used by the property suites and the CLI demo.
//!
//! Random q-positive subspaces are built as graphs of contractions from a
//! subspace of the positive eigenspace of `P` into the negative one. Since a
//! q-positive subspace meets the negative eigenspace only at 0, such a
//! graph is maximal exactly when its dimension equals the number of
//! positive eigenvalues; that count gives a third, purely dimensional,
//! verdict alongside the complement criterion and the randomized oracle.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg;
use crate::space::{SsdbSpace, Tolerance};
use crate::subspace::Subspace;

pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| StandardNormal.sample(rng))
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// Haar-like random orthogonal matrix (QR of a Gaussian matrix with sign fix).
pub fn random_orthogonal<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DMatrix<f64> {
    let qr = gaussian_matrix(rng, n, n).qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// A random space together with its eigenstructure.
#[derive(Debug, Clone)]
pub struct SignedSpace {
    pub space: SsdbSpace,
    /// Orthonormal basis of the `+1` eigenspace of `P`.
    pub positive: DMatrix<f64>,
    /// Orthonormal basis of the `-1` eigenspace of `P`.
    pub negative: DMatrix<f64>,
}

impl SignedSpace {
    /// Splits a valid space into its `+1` / `-1` eigenspaces.
    pub fn from_space(space: &SsdbSpace) -> Self {
        let (values, vectors) = linalg::sorted_eigen(space.pairing());
        let n = space.dim();
        let m = values.iter().filter(|&&v| v < 0.0).count();
        SignedSpace {
            space: space.clone(),
            negative: vectors.columns(0, m).into_owned(),
            positive: vectors.columns(m, n - m).into_owned(),
        }
    }

    pub fn positive_dim(&self) -> usize {
        self.positive.ncols()
    }

    pub fn negative_dim(&self) -> usize {
        self.negative.ncols()
    }
}

/// `P = Q diag(+-1) Q^T` with `positive` plus signs and a random rotation.
pub fn random_space_with_signature<R: Rng + ?Sized>(rng: &mut R, n: usize, positive: usize) -> SignedSpace {
    assert!(n > 0 && positive <= n);
    let q = random_orthogonal(rng, n);
    let signs = DVector::from_fn(n, |i, _| if i < positive { 1.0 } else { -1.0 });
    let p = linalg::symmetrize(&(&q * DMatrix::from_diagonal(&signs) * q.transpose()));
    let space = SsdbSpace::new(p, Tolerance::default()).expect("rotated signature matrix is a valid pairing");
    SignedSpace {
        space,
        positive: q.columns(0, positive).into_owned(),
        negative: q.columns(positive, n - positive).into_owned(),
    }
}

/// Random signature and rotation; every fifth draw is one of the canonical
/// spaces instead (Hilbert, anti-Hilbert, the `R^3` swap pairing, or a
/// product space when `n` is even).
pub fn random_space<R: Rng + ?Sized>(rng: &mut R, n: usize) -> SignedSpace {
    if rng.random_range(0..5) == 0 {
        let canonical = match rng.random_range(0..4) {
            0 => SsdbSpace::hilbert(n).unwrap(),
            1 => SsdbSpace::anti_hilbert(n).unwrap(),
            2 if n == 3 => SsdbSpace::paper_r3(),
            _ if n.is_multiple_of(2) => SsdbSpace::product(n / 2).unwrap(),
            _ => SsdbSpace::hilbert(n).unwrap(),
        };
        return SignedSpace::from_space(&canonical);
    }
    let positive = rng.random_range(0..=n);
    random_space_with_signature(rng, n, positive)
}

/// Random `k x m` contraction with singular values in `[0, 1]`; each is
/// pinned to exactly 1 with probability `isotropic_prob`, which puts
/// q-isotropic vectors into the resulting graph.
pub fn random_contraction<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize, isotropic_prob: f64) -> DMatrix<f64> {
    let r = rows.min(cols);
    if r == 0 {
        return DMatrix::zeros(rows, cols);
    }
    let left = random_orthogonal(rng, rows);
    let right = random_orthogonal(rng, cols);
    let mut sigma = DMatrix::zeros(rows, cols);
    for i in 0..r {
        sigma[(i, i)] = if rng.random_bool(isotropic_prob) { 1.0 } else { rng.random_range(0.0..0.95) };
    }
    left * sigma * right.transpose()
}

/// A q-positive subspace with its known maximality.
#[derive(Debug, Clone)]
pub struct PositiveInstance {
    pub subspace: Subspace,
    /// `dim A == number of positive eigenvalues of P`.
    pub maximal: bool,
}

/// Graph of a random contraction over a `k`-dimensional subspace of the
/// positive eigenspace; `k` is the full positive dimension about half the
/// time.
pub fn random_q_positive<R: Rng + ?Sized>(rng: &mut R, signed: &SignedSpace) -> PositiveInstance {
    let p = signed.positive_dim();
    let k = if p == 0 || rng.random_bool(0.5) { p } else { rng.random_range(0..p) };
    random_q_positive_shaped(rng, signed, k, 0.25)
}

/// `k`-dimensional q-positive subspace; each singular value of the
/// contraction is pinned to 1 with probability `isotropic_prob`.
pub fn random_q_positive_shaped<R: Rng + ?Sized>(
    rng: &mut R,
    signed: &SignedSpace,
    k: usize,
    isotropic_prob: f64,
) -> PositiveInstance {
    let p = signed.positive_dim();
    let m = signed.negative_dim();
    assert!(k <= p, "q-positive subspaces have dimension at most {p}");
    let u = if p == 0 { DMatrix::zeros(0, 0) } else { random_orthogonal(rng, p).columns(0, k).into_owned() };
    let t = random_contraction(rng, m, k, isotropic_prob);
    let gens = &signed.positive * &u + &signed.negative * t;
    // Random invertible mixing so the stored basis is not the construction basis.
    let mix = gaussian_matrix(rng, k, k) + DMatrix::identity(k, k) * 3.0;
    let sub = Subspace::from_generator_matrix(&signed.space, &(gens * mix), Tolerance::default());
    debug_assert_eq!(sub.dim(), k);
    PositiveInstance { maximal: k == p, subspace: sub }
}

/// Random monotone `n x n` matrix: skew part plus a PSD part that is zero
/// a third of the time.
pub fn random_monotone_matrix<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DMatrix<f64> {
    let k = gaussian_matrix(rng, n, n);
    let skew = &k - k.transpose();
    match rng.random_range(0..3) {
        0 => skew,
        _ => {
            let rank = rng.random_range(0..=n);
            let l = gaussian_matrix(rng, n, rank);
            skew + &l * l.transpose()
        }
    }
}

/// Random skew-symmetric `n x n` matrix.
pub fn random_skew<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DMatrix<f64> {
    let k = gaussian_matrix(rng, n, n);
    &k - k.transpose()
}

/// Random linear subspace of `space` with dimension drawn from `0..=n`.
pub fn random_subspace<R: Rng + ?Sized>(rng: &mut R, space: &SsdbSpace) -> Subspace {
    let n = space.dim();
    let k = rng.random_range(0..=n);
    Subspace::from_generator_matrix(space, &gaussian_matrix(rng, n, k), Tolerance::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_instances_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let tol = Tolerance::default();
        for n in 1..=6 {
            for _ in 0..20 {
                let signed = random_space(&mut rng, n);
                assert_eq!(signed.positive_dim() + signed.negative_dim(), n);
                let inst = random_q_positive(&mut rng, &signed);
                assert!(inst.subspace.is_q_positive(tol));
                let theorem = inst.subspace.is_maximal_q_positive(tol).unwrap();
                assert_eq!(theorem.maximal, inst.maximal);
            }
        }
    }

    #[test]
    fn monotone_matrices_are_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 1..=4 {
            let s = random_monotone_matrix(&mut rng, n);
            assert!(linalg::min_eigenvalue(&linalg::symmetrize(&s)) > -1e-12);
        }
    }
}
