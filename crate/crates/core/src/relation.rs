//! Linear relations in `E x E*` with `E = R^n`.
//!
//! A relation is a subspace of the product space (pairing `[[0, I], [I, 0]]`),
//! so `q(x, x*) = <x, x*>` and monotonicity is q-positivity. Relations are
//! stored as subspaces, which keeps multivalued relations such as
//! `{0} x R^n` first-class.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, SsdbError};
use crate::linalg;
use crate::space::{SsdbSpace, Tolerance};
use crate::subspace::Subspace;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearRelation {
    n: usize,
    sub: Subspace,
}

/// How to decide maximal monotonicity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaximalityMethod {
    /// Complement criterion on the relation itself.
    ViaComplement,
    /// The adjoint is monotone.
    ViaAdjointMonotone,
    /// The adjoint is maximally monotone.
    ViaAdjointMaximal,
}

impl MaximalityMethod {
    pub const ALL: [MaximalityMethod; 3] = [
        MaximalityMethod::ViaComplement,
        MaximalityMethod::ViaAdjointMonotone,
        MaximalityMethod::ViaAdjointMaximal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MaximalityMethod::ViaComplement => "via_complement",
            MaximalityMethod::ViaAdjointMonotone => "via_adjoint_monotone",
            MaximalityMethod::ViaAdjointMaximal => "via_adjoint_maximal",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        MaximalityMethod::ALL.into_iter().find(|m| m.name() == s)
    }
}

/// `(x, x*) -> x ++ x*`.
pub fn embed(x: &DVector<f64>, xstar: &DVector<f64>) -> Result<DVector<f64>> {
    if x.len() != xstar.len() {
        return Err(SsdbError::DimensionMismatch { expected: x.len(), found: xstar.len() });
    }
    let n = x.len();
    let mut out = DVector::zeros(2 * n);
    out.rows_mut(0, n).copy_from(x);
    out.rows_mut(n, n).copy_from(xstar);
    Ok(out)
}

/// Inverse of [`embed`].
pub fn split(v: &DVector<f64>) -> Result<(DVector<f64>, DVector<f64>)> {
    if !v.len().is_multiple_of(2) {
        return Err(SsdbError::DimensionMismatch { expected: v.len() + 1, found: v.len() });
    }
    let n = v.len() / 2;
    Ok((v.rows(0, n).into_owned(), v.rows(n, n).into_owned()))
}

/// `(x, x*) -> (-x, x*)`; involutive, and `q(rho1(b)) = -q(b)`.
pub fn rho1_vector(v: &DVector<f64>) -> Result<DVector<f64>> {
    let (x, xstar) = split(v)?;
    embed(&(-x), &xstar)
}

impl LinearRelation {
    /// Wraps a subspace of `product(n)`.
    pub fn new(sub: Subspace, tol: Tolerance) -> Result<Self> {
        let dim = sub.ambient_dim();
        if dim == 0 || !dim.is_multiple_of(2) {
            return Err(SsdbError::DimensionMismatch { expected: dim + 1, found: dim });
        }
        let n = dim / 2;
        if !sub.space().approx_eq(&SsdbSpace::product(n)?, tol) {
            return Err(SsdbError::SpaceMismatch);
        }
        Ok(LinearRelation { n, sub })
    }

    /// Span of `(x_i, x*_i)` pairs given as `2n`-vectors.
    pub fn from_pairs(n: usize, pairs: &[DVector<f64>], tol: Tolerance) -> Result<Self> {
        let space = SsdbSpace::product(n)?;
        let sub = Subspace::from_generators(&space, pairs, tol)?;
        Ok(LinearRelation { n, sub })
    }

    /// `{(x, S x) : x in R^n}`.
    pub fn from_graph(s: &DMatrix<f64>, tol: Tolerance) -> Result<Self> {
        let (rows, cols) = s.shape();
        if rows != cols {
            return Err(SsdbError::NotSquare { rows, cols });
        }
        let n = rows;
        let space = SsdbSpace::product(n)?;
        let mut gens = DMatrix::zeros(2 * n, n);
        gens.view_mut((0, 0), (n, n)).copy_from(&DMatrix::identity(n, n));
        gens.view_mut((n, 0), (n, n)).copy_from(s);
        Ok(LinearRelation { n, sub: Subspace::from_generator_matrix(&space, &gens, tol) })
    }

    /// `{0} x R^n`.
    pub fn vertical(n: usize) -> Result<Self> {
        Self::coordinate_block(n, n)
    }

    /// `R^n x {0}`.
    pub fn horizontal(n: usize) -> Result<Self> {
        Self::coordinate_block(n, 0)
    }

    fn coordinate_block(n: usize, start: usize) -> Result<Self> {
        let space = SsdbSpace::product(n)?;
        let mut basis = DMatrix::zeros(2 * n, n);
        for i in 0..n {
            basis[(start + i, i)] = 1.0;
        }
        Ok(LinearRelation { n, sub: Subspace::from_orthonormal(&space, basis) })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn subspace(&self) -> &Subspace {
        &self.sub
    }

    /// Image under `rho1`.
    pub fn rho1(&self) -> Self {
        let mut basis = self.sub.basis().clone();
        basis.rows_mut(0, self.n).neg_mut();
        LinearRelation { n: self.n, sub: Subspace::from_orthonormal(self.sub.space(), basis) }
    }

    /// `A* = {(x, x*) : <x, a*> = <a, x*> for all (a, a*) in A}`, from the
    /// defining constraints `[a*^T, -a^T] (x, x*) = 0` over a basis of `A`.
    pub fn adjoint(&self, tol: Tolerance) -> Self {
        let n = self.n;
        let basis = self.sub.basis();
        let k = basis.ncols();
        let mut constraints = DMatrix::zeros(k, 2 * n);
        for j in 0..k {
            for i in 0..n {
                constraints[(j, i)] = basis[(n + i, j)];
                constraints[(j, n + i)] = -basis[(i, j)];
            }
        }
        let null = linalg::null_space(&constraints, tol.rank);
        LinearRelation { n, sub: Subspace::from_orthonormal(self.sub.space(), null) }
    }

    pub fn is_monotone(&self, tol: Tolerance) -> bool {
        let verdict = self.sub.is_q_positive(tol);
        if cfg!(debug_assertions) && verdict {
            let worst = self.sampled_min_pairing(64, 0x5eed);
            debug_assert!(worst >= -1e-6, "sampled pairing {worst} contradicts semidefinite test");
        }
        verdict
    }

    /// Direct check of `<x - y, x* - y*> >= 0` on `trials` random
    /// combinations of basis elements (differences of elements of a linear
    /// relation are elements, so one point per trial suffices). Returns the
    /// smallest sampled `<x, x*> / |(x, x*)|^2`, `+inf` for `{0}`.
    pub fn sampled_min_pairing(&self, trials: usize, seed: u64) -> f64 {
        let k = self.sub.dim();
        if k == 0 {
            return f64::INFINITY;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let basis = self.sub.basis();
        let mut worst = f64::INFINITY;
        for _ in 0..trials.max(1) {
            let coeffs = DVector::from_fn(k, |_, _| rng.random_range(-1.0..1.0));
            let point = basis * coeffs;
            let norm2 = point.norm_squared();
            if norm2 == 0.0 {
                continue;
            }
            let (x, xstar) = split(&point).expect("even length");
            worst = worst.min(x.dot(&xstar) / norm2);
        }
        for j in 0..k {
            let (x, xstar) = split(&basis.column(j).into_owned()).expect("even length");
            worst = worst.min(x.dot(&xstar));
        }
        worst
    }

    /// Maximal monotonicity by the chosen route. Fails with `NotMonotone`
    /// when the relation is not monotone.
    pub fn is_maximal_monotone(&self, method: MaximalityMethod, tol: Tolerance) -> Result<bool> {
        if !self.is_monotone(tol) {
            return Err(SsdbError::NotMonotone { min_eigenvalue: self.sub.min_form_eigenvalue() });
        }
        match method {
            MaximalityMethod::ViaComplement => Ok(self.sub.is_maximal_q_positive(tol)?.maximal),
            MaximalityMethod::ViaAdjointMonotone => Ok(self.adjoint(tol).rho1().sub.is_q_negative(tol)),
            MaximalityMethod::ViaAdjointMaximal => match self.adjoint(tol).rho1().sub.is_maximal_q_negative(tol) {
                Ok(m) => Ok(m.maximal),
                Err(SsdbError::NotQNegative { .. }) => Ok(false),
                Err(e) => Err(e),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn rotation() -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0])
    }

    #[test]
    fn graphs() {
        let id = LinearRelation::from_graph(&DMatrix::identity(2, 2), tol()).unwrap();
        let expected = LinearRelation::from_pairs(2, &[v(&[1., 0., 1., 0.]), v(&[0., 1., 0., 1.])], tol()).unwrap();
        assert!(id.subspace().approx_eq(expected.subspace(), tol()));
        let zero = LinearRelation::from_graph(&DMatrix::zeros(2, 2), tol()).unwrap();
        assert!(zero.subspace().approx_eq(LinearRelation::horizontal(2).unwrap().subspace(), tol()));
        assert_eq!(LinearRelation::from_graph(&rotation(), tol()).unwrap().subspace().dim(), 2);
    }

    #[test]
    fn embed_and_split() {
        let b = embed(&v(&[1.0, 0.0]), &v(&[2.0, 3.0])).unwrap();
        assert_eq!(SsdbSpace::product(2).unwrap().q(&b).unwrap(), 2.0);
        let (x, xs) = split(&b).unwrap();
        assert_eq!((x, xs), (v(&[1.0, 0.0]), v(&[2.0, 3.0])));
        assert!(embed(&v(&[1.0]), &v(&[1.0, 2.0])).is_err());
        assert!(split(&v(&[1.0, 2.0, 3.0])).is_err());
    }

    #[test]
    fn rho1_properties() {
        let s = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 3.0]);
        let r = LinearRelation::from_graph(&s, tol()).unwrap();
        assert_eq!(r.rho1().rho1(), r);
        // rho1(graph S) = graph(-S)
        let neg = LinearRelation::from_graph(&(-&s), tol()).unwrap();
        assert!(r.rho1().subspace().approx_eq(neg.subspace(), tol()));
        let p = SsdbSpace::product(2).unwrap();
        let b = v(&[0.3, -1.0, 2.0, 0.5]);
        assert_eq!(p.q(&rho1_vector(&b).unwrap()).unwrap(), -p.q(&b).unwrap());
    }

    #[test]
    fn adjoints() {
        let s = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, -0.5, 3.0]);
        let r = LinearRelation::from_graph(&s, tol()).unwrap();
        let expected = LinearRelation::from_graph(&s.transpose(), tol()).unwrap();
        assert!(r.adjoint(tol()).subspace().approx_eq(expected.subspace(), tol()));
        for block in [LinearRelation::vertical(3).unwrap(), LinearRelation::horizontal(3).unwrap()] {
            assert!(block.adjoint(tol()).subspace().approx_eq(block.subspace(), tol()));
        }
    }

    #[test]
    fn monotonicity() {
        assert!(LinearRelation::from_graph(&rotation(), tol()).unwrap().is_monotone(tol()));
        assert!(!LinearRelation::from_graph(&-DMatrix::identity(2, 2), tol()).unwrap().is_monotone(tol()));
        assert!(LinearRelation::vertical(2).unwrap().is_monotone(tol()));
    }

    #[test]
    fn maximal_monotonicity() {
        let skew = LinearRelation::from_graph(&rotation(), tol()).unwrap();
        let vertical = LinearRelation::vertical(2).unwrap();
        for method in MaximalityMethod::ALL {
            assert!(skew.is_maximal_monotone(method, tol()).unwrap());
            assert!(vertical.is_maximal_monotone(method, tol()).unwrap());
        }
        let line = LinearRelation::from_pairs(1, &[v(&[1.0, -1.0])], tol()).unwrap();
        assert_eq!(
            line.is_maximal_monotone(MaximalityMethod::ViaComplement, tol()).unwrap_err().kind(),
            "NotMonotone"
        );
        // monotone but not maximal: a line inside a 2-dim product space
        let partial = LinearRelation::from_pairs(2, &[v(&[1.0, 0.0, 1.0, 0.0])], tol()).unwrap();
        for method in MaximalityMethod::ALL {
            assert!(!partial.is_maximal_monotone(method, tol()).unwrap(), "{}", method.name());
        }
    }

    #[test]
    fn method_names_round_trip() {
        for m in MaximalityMethod::ALL {
            assert_eq!(MaximalityMethod::parse(m.name()), Some(m));
        }
        assert_eq!(MaximalityMethod::parse("bogus"), None);
    }

    #[test]
    fn rejects_foreign_space() {
        let sub = Subspace::whole(&SsdbSpace::hilbert(2).unwrap());
        assert_eq!(LinearRelation::new(sub, tol()).unwrap_err().kind(), "SpaceMismatch");
        let odd = Subspace::whole(&SsdbSpace::hilbert(3).unwrap());
        assert!(LinearRelation::new(odd, tol()).is_err());
    }
}
