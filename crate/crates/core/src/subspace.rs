//! Linear subspaces, finite point sets, the q-complement `A0` and maximality
//! of q-positive subspaces.
//!
//! For a linear subspace with orthonormal basis `B`, the pairwise condition
//! `q(b - c) >= 0` reduces to semidefiniteness of the reduced form `B^T P B`,
//! since differences of subspace elements fill the subspace.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Result, SsdbError};
use crate::extended::ExtReal;
use crate::linalg::{self, PsdSolve, PsdSystem};
use crate::space::{SsdbSpace, Tolerance};

/// A linear subspace of an [`SsdbSpace`], held as an orthonormal basis.
/// A basis with zero columns encodes `{0}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    space: SsdbSpace,
    basis: DMatrix<f64>,
}

/// Result of the complement-based maximality test.
#[derive(Debug, Clone, PartialEq)]
pub struct Maximality {
    pub maximal: bool,
    /// Unit vector `c` in `A0` with `q(c) > 0` when not maximal; `A + R c`
    /// is then a strictly larger q-positive set.
    pub witness: Option<DVector<f64>>,
    /// Largest eigenvalue of the reduced form of `q` on `A0`
    /// (`-inf` when `A0 = {0}`).
    pub complement_max_eigenvalue: f64,
}

/// Verdict of the randomized extension search.
#[derive(Debug, Clone, PartialEq)]
pub enum OracleVerdict {
    /// No extension found among the sampled candidates.
    MaximalProbable { trials: usize },
    /// `witness` lies outside `A` and `A + {witness}` is q-positive.
    NonMaximal { witness: DVector<f64>, trial: usize, infimum: ExtReal },
}

impl OracleVerdict {
    pub fn is_maximal_probable(&self) -> bool {
        matches!(self, OracleVerdict::MaximalProbable { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            OracleVerdict::MaximalProbable { .. } => "maximal-probable",
            OracleVerdict::NonMaximal { .. } => "non-maximal",
        }
    }
}

/// Default candidate count for [`Subspace::maximality_oracle`].
pub const DEFAULT_ORACLE_TRIALS: usize = 2000;

impl Subspace {
    /// Orthonormal basis of the span of `generators`.
    pub fn from_generators(space: &SsdbSpace, generators: &[DVector<f64>], tol: Tolerance) -> Result<Self> {
        for g in generators {
            space.check_dim(g)?;
        }
        let m = linalg::columns(space.dim(), generators);
        Ok(Self::from_generator_matrix(space, &m, tol))
    }

    /// Span of the columns of an `n x m` matrix.
    pub fn from_generator_matrix(space: &SsdbSpace, generators: &DMatrix<f64>, tol: Tolerance) -> Self {
        assert_eq!(generators.nrows(), space.dim(), "generator rows must match the space dimension");
        Subspace { space: space.clone(), basis: linalg::orthonormal_span(generators, tol.rank) }
    }

    /// Wraps a basis that is already orthonormal.
    pub(crate) fn from_orthonormal(space: &SsdbSpace, basis: DMatrix<f64>) -> Self {
        debug_assert_eq!(basis.nrows(), space.dim());
        Subspace { space: space.clone(), basis }
    }

    pub fn zero(space: &SsdbSpace) -> Self {
        Subspace { space: space.clone(), basis: DMatrix::zeros(space.dim(), 0) }
    }

    pub fn whole(space: &SsdbSpace) -> Self {
        let n = space.dim();
        Subspace { space: space.clone(), basis: DMatrix::identity(n, n) }
    }

    pub fn space(&self) -> &SsdbSpace {
        &self.space
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.space.dim()
    }

    /// Same basis viewed in another space of the same dimension.
    pub fn in_space(&self, space: &SsdbSpace) -> Result<Self> {
        if space.dim() != self.ambient_dim() {
            return Err(SsdbError::DimensionMismatch { expected: self.ambient_dim(), found: space.dim() });
        }
        Ok(Subspace { space: space.clone(), basis: self.basis.clone() })
    }

    /// The same subspace in the negated space (pairing `-P`).
    pub fn negated(&self) -> Self {
        Subspace { space: self.space.negate(), basis: self.basis.clone() }
    }

    pub fn projector(&self) -> DMatrix<f64> {
        linalg::projector(&self.basis)
    }

    /// `max |B1 B1^T - B2 B2^T|`.
    pub fn projection_distance(&self, other: &Subspace) -> f64 {
        linalg::max_abs(&(self.projector() - other.projector()))
    }

    pub fn approx_eq(&self, other: &Subspace, tol: Tolerance) -> bool {
        self.ambient_dim() == other.ambient_dim() && self.projection_distance(other) <= tol.abs
    }

    /// Euclidean distance from `b` to the subspace.
    pub fn distance(&self, b: &DVector<f64>) -> Result<f64> {
        self.space.check_dim(b)?;
        let proj = &self.basis * (self.basis.transpose() * b);
        Ok((b - proj).norm())
    }

    /// `|(I - B B^T) b| <= tau (1 + |b|)`.
    pub fn contains(&self, b: &DVector<f64>, tol: Tolerance) -> Result<bool> {
        Ok(self.distance(b)? <= tol.abs * (1.0 + b.norm()))
    }

    /// `B^T P B`, the matrix of `2q` in basis coordinates.
    pub fn reduced_form(&self) -> DMatrix<f64> {
        linalg::symmetrize(&(self.basis.transpose() * self.space.pairing() * &self.basis))
    }

    fn eigen_tolerance(&self, tol: Tolerance) -> f64 {
        tol.abs * (1.0 + self.space.pairing_scale())
    }

    /// Smallest eigenvalue of the reduced form (`+inf` for `{0}`).
    pub fn min_form_eigenvalue(&self) -> f64 {
        linalg::min_eigenvalue(&self.reduced_form())
    }

    /// Largest eigenvalue of the reduced form (`-inf` for `{0}`).
    pub fn max_form_eigenvalue(&self) -> f64 {
        linalg::max_eigenvalue(&self.reduced_form())
    }

    /// `q >= 0` on the subspace. `{0}` is q-positive.
    pub fn is_q_positive(&self, tol: Tolerance) -> bool {
        self.min_form_eigenvalue() >= -self.eigen_tolerance(tol)
    }

    /// `q <= 0` on the subspace. `{0}` is q-negative.
    pub fn is_q_negative(&self, tol: Tolerance) -> bool {
        self.max_form_eigenvalue() <= self.eigen_tolerance(tol)
    }

    /// `A0 = { b : [a, b] = 0 for all a in A }`, the null space of `B^T P`.
    ///
    /// `P` is orthogonal, so `P B` is already an orthonormal basis of the
    /// annihilated directions and `A0` is its Euclidean complement.
    pub fn q_complement(&self) -> Subspace {
        let pb = self.space.pairing() * &self.basis;
        Subspace { space: self.space.clone(), basis: linalg::orthogonal_complement(&pb) }
    }

    /// `inf { q(a - b) : a in A }`, exactly.
    ///
    /// Writing `a = B z`, `q(a - b) = z^T M z / 2 - z^T r + q(b)` with
    /// `M = B^T P B` and `r = B^T P b`.
    pub fn inf_q_over_translate(&self, b: &DVector<f64>, tol: Tolerance) -> Result<ExtReal> {
        TranslateInfimum::new(self, tol).eval(b)
    }

    /// Whether `c` is a genuine extension: `c` is outside `A` and `A + {c}`
    /// stays q-positive.
    ///
    /// `inf q(A - c)` depends only on the residual `h` of `c` orthogonal to
    /// `A` and is homogeneous of degree two in it, so the test is applied to
    /// `h / |h|`: `inf q(A - h/|h|) >= -tau (1 + max |P|)`.
    pub fn extends_q_positively(&self, c: &DVector<f64>, tol: Tolerance) -> Result<bool> {
        TranslateInfimum::new(self, tol).extends(c)
    }

    /// Complement criterion: a q-positive `A` is maximal exactly when `A0`
    /// is q-negative.
    pub fn is_maximal_q_positive(&self, tol: Tolerance) -> Result<Maximality> {
        let min_eigenvalue = self.min_form_eigenvalue();
        if min_eigenvalue < -self.eigen_tolerance(tol) {
            return Err(SsdbError::NotQPositive { min_eigenvalue });
        }
        let complement = self.q_complement();
        let form = complement.reduced_form();
        let (values, vectors) = linalg::sorted_eigen(&form);
        let k = values.len();
        if k == 0 {
            return Ok(Maximality { maximal: true, witness: None, complement_max_eigenvalue: f64::NEG_INFINITY });
        }
        let top = values[k - 1];
        if top <= self.eigen_tolerance(tol) {
            return Ok(Maximality { maximal: true, witness: None, complement_max_eigenvalue: top });
        }
        let mut witness = &complement.basis * vectors.column(k - 1);
        witness /= witness.norm();
        Ok(Maximality { maximal: false, witness: Some(witness), complement_max_eigenvalue: top })
    }

    /// Maximal q-negativity, i.e. maximal q-positivity for `-q`.
    pub fn is_maximal_q_negative(&self, tol: Tolerance) -> Result<Maximality> {
        self.negated().is_maximal_q_positive(tol).map_err(|e| match e {
            SsdbError::NotQPositive { min_eigenvalue } => SsdbError::NotQNegative { max_eigenvalue: -min_eigenvalue },
            other => other,
        })
    }

    /// Randomized extension search, independent of the complement criterion.
    ///
    /// Draws `trials` Gaussian candidates scaled by `1 + max |P|` from a
    /// seeded generator and reports the first one that extends `A`. A
    /// "maximal-probable" answer is never a certificate.
    pub fn maximality_oracle(&self, trials: usize, seed: u64, tol: Tolerance) -> Result<OracleVerdict> {
        let min_eigenvalue = self.min_form_eigenvalue();
        if min_eigenvalue < -self.eigen_tolerance(tol) {
            return Err(SsdbError::NotQPositive { min_eigenvalue });
        }
        let n = self.ambient_dim();
        if self.dim() == n {
            return Ok(OracleVerdict::MaximalProbable { trials });
        }
        let scale = 1.0 + self.space.pairing_scale();
        let infimum = TranslateInfimum::new(self, tol);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for trial in 0..trials {
            let c = DVector::from_fn(n, |_, _| {
                let x: f64 = StandardNormal.sample(&mut rng);
                scale * x
            });
            if infimum.extends(&c)? {
                let value = infimum.eval(&c)?;
                return Ok(OracleVerdict::NonMaximal { witness: c, trial, infimum: value });
            }
        }
        Ok(OracleVerdict::MaximalProbable { trials })
    }

    fn check_same_space(&self, other: &Subspace) -> Result<()> {
        if self.space != other.space {
            return Err(SsdbError::SpaceMismatch);
        }
        Ok(())
    }

    /// `A1 + A2`.
    pub fn sum(&self, other: &Subspace, tol: Tolerance) -> Result<Subspace> {
        self.check_same_space(other)?;
        let n = self.ambient_dim();
        let mut gens = DMatrix::zeros(n, self.dim() + other.dim());
        gens.columns_mut(0, self.dim()).copy_from(&self.basis);
        gens.columns_mut(self.dim(), other.dim()).copy_from(&other.basis);
        Ok(Self::from_generator_matrix(&self.space, &gens, tol))
    }

    /// `A1 ∩ A2`, as the complement of the sum of the Euclidean complements.
    pub fn intersection(&self, other: &Subspace, tol: Tolerance) -> Result<Subspace> {
        self.check_same_space(other)?;
        let perp = |s: &Subspace| Subspace::from_orthonormal(&s.space, linalg::orthogonal_complement(&s.basis));
        let joined = perp(self).sum(&perp(other), tol)?;
        Ok(perp(&joined))
    }
}

/// `b -> inf q(A - b)` with the reduced form of `A` factored once.
struct TranslateInfimum<'a> {
    sub: &'a Subspace,
    tol: Tolerance,
    /// `None` when the reduced form has a negative eigenvalue.
    system: Option<PsdSystem>,
}

impl<'a> TranslateInfimum<'a> {
    fn new(sub: &'a Subspace, tol: Tolerance) -> Self {
        let system = PsdSystem::new(&sub.reduced_form(), tol.rank);
        let system = (system.min_eigenvalue() >= -sub.eigen_tolerance(tol)).then_some(system);
        TranslateInfimum { sub, tol, system }
    }

    fn eval(&self, b: &DVector<f64>) -> Result<ExtReal> {
        let qb = self.sub.space.q(b)?;
        if self.sub.dim() == 0 {
            return Ok(ExtReal::Finite(qb));
        }
        let Some(system) = &self.system else {
            return Ok(ExtReal::NegInf);
        };
        let r = self.sub.basis.transpose() * (self.sub.space.pairing() * b);
        Ok(match system.solve(&r, self.tol.abs) {
            PsdSolve::Solved { energy, .. } => ExtReal::Finite(qb - 0.5 * energy),
            PsdSolve::OutsideRange { .. } => ExtReal::NegInf,
        })
    }

    fn extends(&self, c: &DVector<f64>) -> Result<bool> {
        if self.sub.contains(c, self.tol)? {
            return Ok(false);
        }
        let residual = c - &self.sub.basis * (self.sub.basis.transpose() * c);
        let direction = &residual / residual.norm();
        Ok(self.eval(&direction)?.at_least(-self.sub.eigen_tolerance(self.tol)))
    }
}

/// A finite, nonempty set of points, checked pairwise for q-positivity.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    space: SsdbSpace,
    points: Vec<DVector<f64>>,
}

/// A pair of points `(i, j)` with `q(p_i - p_j) < 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub first: usize,
    pub second: usize,
    pub value: f64,
}

impl PointSet {
    pub fn new(space: &SsdbSpace, points: Vec<DVector<f64>>) -> Result<Self> {
        if points.is_empty() {
            return Err(SsdbError::InvalidDimension(0));
        }
        for p in &points {
            space.check_dim(p)?;
        }
        Ok(PointSet { space: space.clone(), points })
    }

    pub fn points(&self) -> &[DVector<f64>] {
        &self.points
    }

    pub fn space(&self) -> &SsdbSpace {
        &self.space
    }

    /// First pair `(i, j)`, `i < j` in input order, with
    /// `q(p_i - p_j) < -tau (1 + |p_i - p_j|^2)`; `None` when q-positive.
    pub fn q_positivity_violation(&self, tol: Tolerance) -> Option<Violation> {
        for (i, a) in self.points.iter().enumerate() {
            for (j, b) in self.points.iter().enumerate().skip(i + 1) {
                let diff = a - b;
                let value = 0.5 * diff.dot(&(self.space.pairing() * &diff));
                if value < -tol.abs * (1.0 + diff.norm_squared()) {
                    return Some(Violation { first: i, second: j, value });
                }
            }
        }
        None
    }

    pub fn is_q_positive(&self, tol: Tolerance) -> bool {
        self.q_positivity_violation(tol).is_none()
    }

    /// Pairwise q-negativity, via the negated space.
    pub fn q_negativity_violation(&self, tol: Tolerance) -> Option<Violation> {
        let negated = PointSet { space: self.space.negate(), points: self.points.clone() };
        negated.q_positivity_violation(tol).map(|v| Violation { value: -v.value, ..v })
    }
}
