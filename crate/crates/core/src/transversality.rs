//! Constructive splitting `c = a - n` with `a` in a q-positive subspace `A`
//! and `n` in `N_q(g0)`.
//!
//! The minimizer `b` of `(q_A)_c + g0` is found from the strictly convex
//! reduced system `B^T (P + I) B z = B^T (P + I) c`; then `a = B z`,
//! `n = b = a - c`, and `d = -P n` is the dual point with `iota(d) = -b`.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, SsdbError};
use crate::extended::ExtReal;
use crate::functional::QuadraticFunctional;
use crate::linalg;
use crate::space::{g0, SsdbSpace, Tolerance};
use crate::subspace::Subspace;

pub const RESIDUAL_DOMAIN: &str = "domain";
pub const RESIDUAL_NQG0: &str = "nqg0";
pub const RESIDUAL_RECOMPOSITION: &str = "recomposition";
pub const RESIDUAL_EQ9: &str = "eq9";
pub const RESIDUAL_FENCHEL: &str = "fenchel_equality";

#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    /// Element of `A`.
    pub a: DVector<f64>,
    /// Element of `N_q(g0)`; also the minimizer `b`.
    pub nvec: DVector<f64>,
    /// Dual point, `d = -P nvec`.
    pub d: DVector<f64>,
    /// Named residuals; `fenchel_equality` is `+inf` if either Fenchel
    /// chain is infinite at the solution.
    pub residuals: BTreeMap<String, f64>,
    /// `q(n) + q(d) - [n, d]`, which must be `<= 0` under the hypotheses.
    pub pairing_gap: f64,
    /// Whether the hypotheses were verified (false only for forced runs).
    pub preconditions_met: bool,
}

impl Decomposition {
    pub fn residual(&self, name: &str) -> f64 {
        self.residuals.get(name).copied().unwrap_or(f64::NAN)
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.values().cloned().fold(0.0, f64::max)
    }

    /// Every residual is at most `bound` and the pairing gap at most `bound`.
    pub fn within(&self, bound: f64) -> bool {
        self.residuals.values().all(|&r| r <= bound) && self.pairing_gap <= bound
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DecomposeOptions {
    /// Run even when `A0` is not q-negative, reporting the residuals.
    pub force: bool,
}

/// Splits `c` as `a - n` with `a` in `A` and `n` in `N_q(g0)`.
///
/// Requires `A` q-positive and `A0` q-negative unless `options.force` is set.
pub fn decompose(
    a_sub: &Subspace,
    c: &DVector<f64>,
    options: DecomposeOptions,
    tol: Tolerance,
) -> Result<Decomposition> {
    let space = a_sub.space();
    space.check_dim(c)?;
    let positive = a_sub.is_q_positive(tol);
    let complement_negative = a_sub.q_complement().is_q_negative(tol);
    if !options.force {
        if !positive {
            return Err(SsdbError::NotQPositive { min_eigenvalue: a_sub.min_form_eigenvalue() });
        }
        if !complement_negative {
            return Err(SsdbError::ComplementNotQNegative {
                max_eigenvalue: a_sub.q_complement().max_form_eigenvalue(),
            });
        }
    }

    let n = space.dim();
    let basis = a_sub.basis();
    let shifted = space.pairing() + DMatrix::identity(n, n);
    let a = if basis.ncols() == 0 {
        DVector::zeros(n)
    } else {
        let lhs = linalg::symmetrize(&(basis.transpose() * &shifted * basis));
        let rhs = basis.transpose() * (&shifted * c);
        let chol = lhs.cholesky().ok_or(SsdbError::SingularSystem)?;
        basis * chol.solve(&rhs)
    };
    let nvec = &a - c;
    let d = -(space.pairing() * &nvec);

    let mut residuals = BTreeMap::new();
    residuals.insert(RESIDUAL_DOMAIN.to_string(), a_sub.distance(&a)?);
    residuals.insert(RESIDUAL_NQG0.to_string(), (g0(&nvec) + space.q(&nvec)?).abs());
    residuals.insert(RESIDUAL_RECOMPOSITION.to_string(), (c - (&a - &nvec)).norm());
    residuals.insert(
        RESIDUAL_EQ9.to_string(),
        (g0(&nvec) + g0(&d) + space.bracket(&nvec, &d)?).abs(),
    );
    residuals.insert(RESIDUAL_FENCHEL.to_string(), fenchel_residual(a_sub, c, &nvec, &d, tol)?);
    let pairing_gap = space.q(&nvec)? + space.q(&d)? - space.bracket(&nvec, &d)?;

    Ok(Decomposition {
        a,
        nvec,
        d,
        residuals,
        pairing_gap,
        preconditions_met: positive && complement_negative,
    })
}

/// Max of `|f_c(b) + f_c^@(d) - [b, d]|` and
/// `|f(b + c) + f^@(d + c) - [b + c, d + c]|` for `f = q_A`.
fn fenchel_residual(
    a_sub: &Subspace,
    c: &DVector<f64>,
    b: &DVector<f64>,
    d: &DVector<f64>,
    tol: Tolerance,
) -> Result<f64> {
    let space = a_sub.space();
    let f = QuadraticFunctional::q_restricted(a_sub);
    let fc = f.translate(c)?;
    let shifted_gap = match (fc.eval(b, tol)?, fc.conjugate_eval(d, tol)?) {
        (ExtReal::Finite(x), ExtReal::Finite(y)) => (x + y - space.bracket(b, d)?).abs(),
        _ => return Ok(f64::INFINITY),
    };
    let bc = b + c;
    let dc = d + c;
    let direct_gap = match (f.eval(&bc, tol)?, f.conjugate_eval(&dc, tol)?) {
        (ExtReal::Finite(x), ExtReal::Finite(y)) => (x + y - space.bracket(&bc, &dc)?).abs(),
        _ => return Ok(f64::INFINITY),
    };
    Ok(shifted_gap.max(direct_gap))
}

/// The returned `a` lies in the domain of the subdifferential of `q_A`,
/// which for this family is `A` itself.
pub fn verify_subdifferential_domain(
    a_sub: &Subspace,
    c: &DVector<f64>,
    options: DecomposeOptions,
    tol: Tolerance,
) -> Result<bool> {
    let result = decompose(a_sub, c, options, tol)?;
    a_sub.contains(&result.a, tol)
}

/// Comparison of [`decompose`] on `graph(S)` with the direct resolvent
/// solve `(I + S) x = c1 + c2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolventCheck {
    /// `(x, S x)` from the direct solve.
    pub direct: DVector<f64>,
    pub decomposed: Decomposition,
    /// `max |direct - decomposed.a|`.
    pub max_deviation: f64,
}

/// Cross-checks the splitting in the product space against the resolvent
/// of a monotone matrix.
pub fn resolvent_crosscheck(s: &DMatrix<f64>, c: &DVector<f64>, tol: Tolerance) -> Result<ResolventCheck> {
    let (rows, cols) = s.shape();
    if rows != cols {
        return Err(SsdbError::NotSquare { rows, cols });
    }
    let n = rows;
    let space = SsdbSpace::product(n)?;
    space.check_dim(c)?;
    let min_eigenvalue = linalg::min_eigenvalue(&linalg::symmetrize(s));
    if min_eigenvalue < -tol.abs * (1.0 + linalg::max_abs(s)) {
        return Err(SsdbError::NotMonotoneMatrix { min_eigenvalue });
    }
    let rhs = c.rows(0, n) + c.rows(n, n);
    let resolvent = DMatrix::identity(n, n) + s;
    let x = resolvent.lu().solve(&rhs).ok_or(SsdbError::SingularSystem)?;
    let mut direct = DVector::zeros(2 * n);
    direct.rows_mut(0, n).copy_from(&x);
    direct.rows_mut(n, n).copy_from(&(s * &x));

    let graph = crate::relation::LinearRelation::from_graph(s, tol)?;
    let decomposed = decompose(graph.subspace(), c, DecomposeOptions::default(), tol)?;
    let max_deviation = (&direct - &decomposed.a).amax();
    Ok(ResolventCheck { direct, decomposed, max_deviation })
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

    #[test]
    fn identity_graph_splits_point() {
        let p = SsdbSpace::product(1).unwrap();
        let a = Subspace::from_generators(&p, &[v(&[1.0, 1.0])], tol()).unwrap();
        let out = decompose(&a, &v(&[2.0, 0.0]), DecomposeOptions::default(), tol()).unwrap();
        assert!((&out.a - v(&[1.0, 1.0])).amax() < 1e-14);
        assert!((&out.nvec - v(&[-1.0, 1.0])).amax() < 1e-14);
        assert!((&out.d - v(&[-1.0, 1.0])).amax() < 1e-14);
        assert!(out.within(1e-12), "{:?}", out.residuals);
        assert!(p.in_nq_g0(&out.nvec, tol()).unwrap());
    }

    #[test]
    fn zero_point_splits_trivially() {
        let p = SsdbSpace::product(2).unwrap();
        let a = Subspace::from_generators(&p, &[v(&[1.0, 0.0, 0.0, 1.0]), v(&[0.0, 1.0, -1.0, 0.0])], tol()).unwrap();
        let out = decompose(&a, &DVector::zeros(4), DecomposeOptions::default(), tol()).unwrap();
        assert_eq!(out.a.amax(), 0.0);
        assert_eq!(out.nvec.amax(), 0.0);
        assert_eq!(out.max_residual(), 0.0);
    }

    #[test]
    fn anti_hilbert_zero_subspace() {
        let s = SsdbSpace::anti_hilbert(3).unwrap();
        let c = v(&[1.0, -2.0, 0.5]);
        let out = decompose(&Subspace::zero(&s), &c, DecomposeOptions::default(), tol()).unwrap();
        assert_eq!(out.a, DVector::zeros(3));
        assert_eq!(out.nvec, -&c);
        assert!(out.within(1e-12));
    }

    #[test]
    fn preconditions_are_enforced() {
        let s = SsdbSpace::paper_r3();
        let line = Subspace::from_generators(&s, &[v(&[1.0, -1.0, 2.0])], tol()).unwrap();
        let c = v(&[1.0, 1.0, 0.0]);
        let err = decompose(&line, &c, DecomposeOptions::default(), tol()).unwrap_err();
        assert_eq!(err.kind(), "ComplementNotQNegative");

        let forced = decompose(&line, &c, DecomposeOptions { force: true }, tol()).unwrap();
        assert!(!forced.preconditions_met);
        assert!(forced.residual(RESIDUAL_NQG0) > 1e-3);
        assert!(forced.residual(RESIDUAL_DOMAIN) < 1e-12);
        assert!(verify_subdifferential_domain(&line, &c, DecomposeOptions { force: true }, tol()).unwrap());

        let neg = Subspace::from_generators(&s, &[v(&[1.0, -1.0, 0.0])], tol()).unwrap();
        assert_eq!(decompose(&neg, &c, DecomposeOptions::default(), tol()).unwrap_err().kind(), "NotQPositive");
    }

    #[test]
    fn whole_hilbert_space() {
        let h = SsdbSpace::hilbert(3).unwrap();
        let c = v(&[0.3, -0.1, 2.0]);
        let out = decompose(&Subspace::whole(&h), &c, DecomposeOptions::default(), tol()).unwrap();
        assert!(out.nvec.amax() < 1e-14);
        assert!(verify_subdifferential_domain(&Subspace::whole(&h), &c, DecomposeOptions::default(), tol()).unwrap());
    }

    #[test]
    fn resolvent_examples() {
        let id = DMatrix::identity(1, 1);
        let check = resolvent_crosscheck(&id, &v(&[2.0, 0.0]), tol()).unwrap();
        assert!((check.direct[0] - 1.0).abs() < 1e-15);
        assert!(check.max_deviation < 1e-10);

        let zero = DMatrix::zeros(2, 2);
        let c = v(&[1.0, 2.0, 3.0, -4.0]);
        let check = resolvent_crosscheck(&zero, &c, tol()).unwrap();
        assert_eq!(check.direct, v(&[4.0, -2.0, 0.0, 0.0]));
        assert!(check.max_deviation < 1e-10);

        let rot = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let check = resolvent_crosscheck(&rot, &v(&[0.4, -1.2, 2.2, 0.9]), tol()).unwrap();
        assert!(check.max_deviation < 1e-10);

        let neg = -DMatrix::<f64>::identity(2, 2);
        assert_eq!(resolvent_crosscheck(&neg, &c, tol()).unwrap_err().kind(), "NotMonotoneMatrix");
    }
}
