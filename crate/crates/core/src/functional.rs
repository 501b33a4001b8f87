//! Convex quadratics restricted to affine subspaces.
//!
//! `f(x) = x^T H x / 2 + l^T x + kappa` on `offset + span(B)`, `+inf`
//! elsewhere. The family contains `q_A`, is closed under the translation
//! `f_c = f(. + c) - [., c] - q(c)`, and its members with a positive
//! semidefinite reduced Hessian have closed-form conjugates with respect to
//! the pairing.

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, SsdbError};
use crate::extended::ExtReal;
use crate::linalg::{self, PsdSolve};
use crate::space::{SsdbSpace, Tolerance};
use crate::subspace::Subspace;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticFunctional {
    space: SsdbSpace,
    dom_basis: DMatrix<f64>,
    dom_offset: DVector<f64>,
    hessian: DMatrix<f64>,
    linear: DVector<f64>,
    constant: f64,
}

/// Value of `f^@(d)` together with a maximizer when the supremum is finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Conjugate {
    pub value: ExtReal,
    /// Least-norm maximizer of `[x, d] - f(x)`.
    pub maximizer: Option<DVector<f64>>,
}

impl QuadraticFunctional {
    /// General member of the family. `hessian` must be symmetric within
    /// `tol`; the domain is `offset + domain`.
    pub fn new(
        domain: &Subspace,
        offset: DVector<f64>,
        hessian: DMatrix<f64>,
        linear: DVector<f64>,
        constant: f64,
        tol: Tolerance,
    ) -> Result<Self> {
        let space = domain.space();
        let n = space.dim();
        space.check_dim(&offset)?;
        space.check_dim(&linear)?;
        if hessian.shape() != (n, n) {
            return Err(SsdbError::DimensionMismatch { expected: n, found: hessian.nrows() });
        }
        if !constant.is_finite()
            || hessian.iter().chain(linear.iter()).chain(offset.iter()).any(|v| !v.is_finite())
        {
            return Err(SsdbError::NonFinite);
        }
        let asym = linalg::max_abs(&(&hessian - hessian.transpose()));
        if asym > tol.abs * (1.0 + linalg::max_abs(&hessian)) {
            return Err(SsdbError::NotSymmetric { deviation: asym });
        }
        Ok(QuadraticFunctional {
            space: space.clone(),
            dom_basis: domain.basis().clone(),
            dom_offset: offset,
            hessian: linalg::symmetrize(&hessian),
            linear,
            constant,
        })
    }

    /// `q_A`: `q` on `A`, `+inf` off `A`.
    pub fn q_restricted(a: &Subspace) -> Self {
        let n = a.ambient_dim();
        QuadraticFunctional {
            space: a.space().clone(),
            dom_basis: a.basis().clone(),
            dom_offset: DVector::zeros(n),
            hessian: a.space().pairing().clone(),
            linear: DVector::zeros(n),
            constant: 0.0,
        }
    }

    pub fn space(&self) -> &SsdbSpace {
        &self.space
    }

    pub fn hessian(&self) -> &DMatrix<f64> {
        &self.hessian
    }

    pub fn linear(&self) -> &DVector<f64> {
        &self.linear
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn dom_offset(&self) -> &DVector<f64> {
        &self.dom_offset
    }

    /// Linear part of the domain.
    pub fn dom_subspace(&self) -> Subspace {
        Subspace::from_orthonormal(&self.space, self.dom_basis.clone())
    }

    pub fn in_domain(&self, x: &DVector<f64>, tol: Tolerance) -> Result<bool> {
        self.space.check_dim(x)?;
        let rel = x - &self.dom_offset;
        let proj = &self.dom_basis * (self.dom_basis.transpose() * &rel);
        Ok((&rel - proj).norm() <= tol.abs * (1.0 + rel.norm()))
    }

    /// The quadratic expression, ignoring the domain.
    pub fn quadratic_value(&self, x: &DVector<f64>) -> f64 {
        0.5 * x.dot(&(&self.hessian * x)) + self.linear.dot(x) + self.constant
    }

    pub fn eval(&self, x: &DVector<f64>, tol: Tolerance) -> Result<ExtReal> {
        if self.in_domain(x, tol)? {
            Ok(ExtReal::Finite(self.quadratic_value(x)))
        } else {
            Ok(ExtReal::PosInf)
        }
    }

    /// `f_c = f(. + c) - [., c] - q(c)` in closed form.
    pub fn translate(&self, c: &DVector<f64>) -> Result<Self> {
        let qc = self.space.q(c)?;
        let hc = &self.hessian * c;
        let pc = self.space.pairing() * c;
        let constant = self.constant + 0.5 * c.dot(&hc) + self.linear.dot(c) - qc;
        Ok(QuadraticFunctional {
            space: self.space.clone(),
            dom_basis: self.dom_basis.clone(),
            dom_offset: &self.dom_offset - c,
            hessian: self.hessian.clone(),
            linear: &self.linear + hc - pc,
            constant,
        })
    }

    /// Hessian of `f` in domain coordinates, `B^T H B`.
    pub fn reduced_hessian(&self) -> DMatrix<f64> {
        linalg::symmetrize(&(self.dom_basis.transpose() * &self.hessian * &self.dom_basis))
    }

    fn indefinite(&self, reduced: &DMatrix<f64>, tol: Tolerance) -> bool {
        linalg::min_eigenvalue(reduced) < -tol.abs * (1.0 + linalg::max_abs(&self.hessian))
    }

    /// `f^@(d) = sup_x [x, d] - f(x)`, with a maximizer when finite.
    ///
    /// With `x = o + B z` the objective is `const + z^T w - z^T M z / 2`,
    /// `M = B^T H B`, `w = B^T (P d - H o - l)`. The supremum is `+inf` when
    /// `M` has a negative eigenvalue or `w` leaves `range(M)`.
    pub fn conjugate(&self, d: &DVector<f64>, tol: Tolerance) -> Result<Conjugate> {
        self.space.check_dim(d)?;
        let o = &self.dom_offset;
        let pd = self.space.pairing() * d;
        let ho = &self.hessian * o;
        let base = o.dot(&pd) - 0.5 * o.dot(&ho) - self.linear.dot(o) - self.constant;
        if self.dom_basis.ncols() == 0 {
            return Ok(Conjugate { value: ExtReal::Finite(base), maximizer: Some(o.clone()) });
        }
        let m = self.reduced_hessian();
        if self.indefinite(&m, tol) {
            return Ok(Conjugate { value: ExtReal::PosInf, maximizer: None });
        }
        let w = self.dom_basis.transpose() * (pd - ho - &self.linear);
        Ok(match linalg::psd_solve(&m, &w, tol.rank, tol.abs) {
            PsdSolve::Solved { z, energy } => Conjugate {
                value: ExtReal::Finite(base + 0.5 * energy),
                maximizer: Some(o + &self.dom_basis * z),
            },
            PsdSolve::OutsideRange { .. } => Conjugate { value: ExtReal::PosInf, maximizer: None },
        })
    }

    pub fn conjugate_eval(&self, d: &DVector<f64>, tol: Tolerance) -> Result<ExtReal> {
        Ok(self.conjugate(d, tol)?.value)
    }

    /// Classical Euclidean conjugate `f*(y) = sup_x <x, y> - f(x)`.
    ///
    /// Solved through the KKT system of the equality-constrained problem
    /// (`C^T x = C^T o` with `C` spanning the domain's orthogonal
    /// complement) rather than the reduced coordinates used by
    /// [`conjugate`](Self::conjugate), so `f^@(d) = f*(iota(d))` compares two
    /// independent routes.
    pub fn classical_conjugate_eval(&self, y: &DVector<f64>, tol: Tolerance) -> Result<ExtReal> {
        self.space.check_dim(y)?;
        if self.indefinite(&self.reduced_hessian(), tol) {
            return Ok(ExtReal::PosInf);
        }
        let n = self.space.dim();
        let normals = linalg::orthogonal_complement(&self.dom_basis);
        let m = normals.ncols();
        let mut kkt = DMatrix::zeros(n + m, n + m);
        kkt.view_mut((0, 0), (n, n)).copy_from(&self.hessian);
        kkt.view_mut((0, n), (n, m)).copy_from(&normals);
        kkt.view_mut((n, 0), (m, n)).copy_from(&normals.transpose());
        let mut rhs = DVector::zeros(n + m);
        rhs.rows_mut(0, n).copy_from(&(y - &self.linear));
        rhs.rows_mut(n, m).copy_from(&(normals.transpose() * &self.dom_offset));

        let svd = kkt.clone().svd(true, true);
        let sigma_max = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
        let eps = tol.rank * sigma_max.max(1.0);
        let sol = svd.solve(&rhs, eps).map_err(|_| SsdbError::SingularSystem)?;
        let residual = (&kkt * &sol - &rhs).norm();
        if residual > tol.abs * (1.0 + rhs.norm()) * (1.0 + sigma_max) {
            return Ok(ExtReal::PosInf);
        }
        let x = sol.rows(0, n).into_owned();
        Ok(ExtReal::Finite(y.dot(&x) - self.quadratic_value(&x)))
    }

    /// Field-wise comparison: Hessian, linear term and constant within
    /// `tau`, same linear domain, offsets equal modulo the domain.
    pub fn approx_eq(&self, other: &QuadraticFunctional, tol: Tolerance) -> bool {
        let close = |a: f64, b: f64| (a - b).abs() <= tol.abs * (1.0 + a.abs().max(b.abs()));
        if self.space != other.space {
            return false;
        }
        let dom_a = self.dom_subspace();
        let dom_b = other.dom_subspace();
        let offset_gap = &self.dom_offset - &other.dom_offset;
        linalg::max_abs(&(&self.hessian - &other.hessian)) <= tol.abs * (1.0 + linalg::max_abs(&self.hessian))
            && (&self.linear - &other.linear).amax() <= tol.abs * (1.0 + self.linear.amax())
            && close(self.constant, other.constant)
            && dom_a.approx_eq(&dom_b, tol)
            && dom_a.distance(&offset_gap).map(|d| d <= tol.abs * (1.0 + offset_gap.norm())).unwrap_or(false)
    }
}

/// Extended-real agreement: both `+inf`, both `-inf`, or finite with
/// relative gap reported.
fn ext_gap(a: ExtReal, b: ExtReal) -> Option<(f64, f64)> {
    match (a, b) {
        (ExtReal::Finite(x), ExtReal::Finite(y)) => Some(((x - y).abs(), 1.0 + x.abs().max(y.abs()))),
        (x, y) if x == y => Some((0.0, 1.0)),
        _ => None,
    }
}

/// Maximum residuals of the translation identities over a set of samples.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TranslationReport {
    pub samples: usize,
    /// `max |(f_c)^@(b) - (f^@)_c(b)|` over finite cases.
    pub conjugate_residual: f64,
    /// Same, divided by `1 + max(|lhs|, |rhs|)`.
    pub conjugate_relative: f64,
    /// `max |[f_c(b) + f_c^@(d) - [b,d]] - [f(b+c) + f^@(d+c) - [b+c,d+c]]|`.
    pub fenchel_residual: f64,
    pub fenchel_relative: f64,
    /// Samples where one side is infinite and the other is not.
    pub infinity_mismatches: usize,
}

impl TranslationReport {
    pub fn max_relative(&self) -> f64 {
        self.conjugate_relative.max(self.fenchel_relative)
    }

    pub fn holds(&self, relative_tol: f64) -> bool {
        self.infinity_mismatches == 0 && self.max_relative() <= relative_tol
    }
}

/// Checks `(f_c)^@ = (f^@)_c` at every `b` and the four-term Fenchel
/// identity at every `(b, d)` of `samples`.
pub fn verify_translation_identities(
    f: &QuadraticFunctional,
    c: &DVector<f64>,
    samples: &[(DVector<f64>, DVector<f64>)],
    tol: Tolerance,
) -> Result<TranslationReport> {
    let space = f.space();
    let fc = f.translate(c)?;
    let qc = space.q(c)?;
    let mut report = TranslationReport { samples: samples.len(), ..Default::default() };
    let record = |lhs: ExtReal, rhs: ExtReal, abs: &mut f64, rel: &mut f64, mismatches: &mut usize| {
        match ext_gap(lhs, rhs) {
            Some((gap, scale)) => {
                *abs = abs.max(gap);
                *rel = rel.max(gap / scale);
            }
            None => *mismatches += 1,
        }
    };
    for (b, d) in samples {
        let lhs = fc.conjugate_eval(b, tol)?;
        let rhs = match f.conjugate_eval(&(b + c), tol)? {
            ExtReal::Finite(v) => ExtReal::Finite(v - space.bracket(c, b)? - qc),
            other => other,
        };
        record(lhs, rhs, &mut report.conjugate_residual, &mut report.conjugate_relative, &mut report.infinity_mismatches);

        let left = add_finite(
            add(fc.eval(b, tol)?, fc.conjugate_eval(d, tol)?),
            -space.bracket(b, d)?,
        );
        let bc = b + c;
        let dc = d + c;
        let right = add_finite(
            add(f.eval(&bc, tol)?, f.conjugate_eval(&dc, tol)?),
            -space.bracket(&bc, &dc)?,
        );
        record(left, right, &mut report.fenchel_residual, &mut report.fenchel_relative, &mut report.infinity_mismatches);
    }
    Ok(report)
}

fn add(a: ExtReal, b: ExtReal) -> ExtReal {
    match (a, b) {
        (ExtReal::Finite(x), ExtReal::Finite(y)) => ExtReal::Finite(x + y),
        (ExtReal::PosInf, _) | (_, ExtReal::PosInf) => ExtReal::PosInf,
        _ => ExtReal::NegInf,
    }
}

fn add_finite(a: ExtReal, v: f64) -> ExtReal {
    add(a, ExtReal::Finite(v))
}

/// Fenchel-Young gap `f(x) + f^@(d) - [x, d]`; `+inf` dominates.
pub fn fenchel_young_gap(f: &QuadraticFunctional, x: &DVector<f64>, d: &DVector<f64>, tol: Tolerance) -> Result<ExtReal> {
    let sum = add(f.eval(x, tol)?, f.conjugate_eval(d, tol)?);
    Ok(add_finite(sum, -f.space().bracket(x, d)?))
}

/// Outcome of the complement implication for `q_A`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplementImplication {
    /// Whether `q_A(b) + q_A^@(d) = [b, d]` within tolerance.
    pub equality: bool,
    /// Whether `b - d` lies in `A0` (only meaningful when `equality`).
    pub difference_in_complement: bool,
}

impl ComplementImplication {
    /// Vacuously true when the Fenchel-Young equality fails.
    pub fn holds(&self) -> bool {
        !self.equality || self.difference_in_complement
    }
}

/// If `q_A(b) + q_A^@(d) = [b, d]`, then `b - d` must lie in `A0`.
pub fn check_complement_implication(
    a: &Subspace,
    b: &DVector<f64>,
    d: &DVector<f64>,
    tol: Tolerance,
) -> Result<ComplementImplication> {
    let min_eigenvalue = a.min_form_eigenvalue();
    if !a.is_q_positive(tol) {
        return Err(SsdbError::NotQPositive { min_eigenvalue });
    }
    let qa = QuadraticFunctional::q_restricted(a);
    let fb = qa.eval(b, tol)?;
    let fd = qa.conjugate_eval(d, tol)?;
    let bracket = a.space().bracket(b, d)?;
    let equality = match (fb, fd) {
        (ExtReal::Finite(x), ExtReal::Finite(y)) => {
            (x + y - bracket).abs() <= tol.abs * (1.0 + x.abs() + y.abs() + bracket.abs())
        }
        _ => false,
    };
    let difference_in_complement = equality && a.q_complement().contains(&(b - d), tol)?;
    Ok(ComplementImplication { equality, difference_in_complement })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::g0;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn r3_line() -> Subspace {
        Subspace::from_generators(&SsdbSpace::paper_r3(), &[v(&[1.0, -1.0, 2.0])], tol()).unwrap()
    }

    #[test]
    fn q_restricted_values() {
        let h = SsdbSpace::hilbert(3).unwrap();
        let f = QuadraticFunctional::q_restricted(&Subspace::whole(&h));
        let x = v(&[1.0, -2.0, 0.5]);
        assert_eq!(f.eval(&x, tol()).unwrap(), ExtReal::Finite(g0(&x)));

        let zero = QuadraticFunctional::q_restricted(&Subspace::zero(&h));
        assert_eq!(zero.eval(&v(&[0.0, 0.0, 0.0]), tol()).unwrap(), ExtReal::Finite(0.0));
        assert_eq!(zero.eval(&x, tol()).unwrap(), ExtReal::PosInf);

        let qa = QuadraticFunctional::q_restricted(&r3_line());
        assert_eq!(qa.eval(&v(&[1.0, -1.0, 2.0]), tol()).unwrap(), ExtReal::Finite(1.0));
        assert_eq!(qa.eval(&v(&[3.0, -3.0, 6.0]), tol()).unwrap(), ExtReal::Finite(9.0));
        assert_eq!(qa.eval(&v(&[1.0, 1.0, 0.0]), tol()).unwrap(), ExtReal::PosInf);
    }

    #[test]
    fn constant_functional() {
        let h = SsdbSpace::hilbert(2).unwrap();
        let f = QuadraticFunctional::new(
            &Subspace::whole(&h),
            DVector::zeros(2),
            DMatrix::zeros(2, 2),
            DVector::zeros(2),
            3.5,
            tol(),
        )
        .unwrap();
        assert_eq!(f.eval(&v(&[10.0, -4.0]), tol()).unwrap(), ExtReal::Finite(3.5));
        // sup of <x, d> - 3.5 is finite only at d = 0
        assert_eq!(f.conjugate_eval(&v(&[0.0, 0.0]), tol()).unwrap(), ExtReal::Finite(-3.5));
        assert_eq!(f.conjugate_eval(&v(&[1.0, 0.0]), tol()).unwrap(), ExtReal::PosInf);
    }

    #[test]
    fn rejects_asymmetric_hessian() {
        let h = SsdbSpace::hilbert(2).unwrap();
        let err = QuadraticFunctional::new(
            &Subspace::whole(&h),
            DVector::zeros(2),
            DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]),
            DVector::zeros(2),
            0.0,
            tol(),
        );
        assert_eq!(err.unwrap_err().kind(), "NotSymmetric");
    }

    #[test]
    fn translate_by_zero_is_identity() {
        let f = QuadraticFunctional::q_restricted(&r3_line());
        let g = f.translate(&DVector::zeros(3)).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn translate_shifts_domain() {
        let a = r3_line();
        let c = v(&[0.5, 2.0, -1.0]);
        let fc = QuadraticFunctional::q_restricted(&a).translate(&c).unwrap();
        assert!(fc.in_domain(&(v(&[1.0, -1.0, 2.0]) - &c), tol()).unwrap());
        assert!(!fc.in_domain(&v(&[1.0, -1.0, 2.0]), tol()).unwrap());
    }

    #[test]
    fn conjugate_closed_forms() {
        let h = SsdbSpace::hilbert(3).unwrap();
        let g = QuadraticFunctional::q_restricted(&Subspace::whole(&h));
        let d = v(&[1.0, 2.0, -2.0]);
        assert_eq!(g.conjugate_eval(&d, tol()).unwrap(), ExtReal::Finite(4.5));

        let origin = QuadraticFunctional::q_restricted(&Subspace::zero(&h));
        assert_eq!(origin.conjugate_eval(&d, tol()).unwrap(), ExtReal::Finite(0.0));

        let u = v(&[1.0, -1.0, 2.0]);
        let qa = QuadraticFunctional::q_restricted(&r3_line());
        let value = qa.conjugate_eval(&u, tol()).unwrap().finite().unwrap();
        assert!((value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn conjugate_of_indefinite_is_infinite() {
        let s = SsdbSpace::paper_r3();
        let a = Subspace::from_generators(&s, &[v(&[1.0, -1.0, 0.0])], tol()).unwrap();
        let f = QuadraticFunctional::q_restricted(&a);
        assert_eq!(f.conjugate_eval(&v(&[0.0, 0.0, 0.0]), tol()).unwrap(), ExtReal::PosInf);
        assert_eq!(f.classical_conjugate_eval(&v(&[0.0, 0.0, 0.0]), tol()).unwrap(), ExtReal::PosInf);
    }

    #[test]
    fn conjugate_routes_agree_on_line() {
        let qa = QuadraticFunctional::q_restricted(&r3_line());
        let s = SsdbSpace::paper_r3();
        for d in [v(&[1.0, -1.0, 2.0]), v(&[0.3, 2.0, -1.0]), v(&[0.0, 0.0, 0.0])] {
            let a = qa.conjugate_eval(&d, tol()).unwrap().finite().unwrap();
            let b = qa.classical_conjugate_eval(&s.iota(&d).unwrap(), tol()).unwrap().finite().unwrap();
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn translation_identities_at_zero() {
        let f = QuadraticFunctional::q_restricted(&r3_line());
        let samples = vec![(v(&[1.0, -1.0, 2.0]), v(&[0.2, 0.1, 0.0])), (v(&[0.0, 0.0, 0.0]), v(&[1.0, 1.0, 1.0]))];
        let report = verify_translation_identities(&f, &DVector::zeros(3), &samples, tol()).unwrap();
        assert_eq!(report.infinity_mismatches, 0);
        assert_eq!(report.max_relative(), 0.0);
    }

    #[test]
    fn translation_identities_for_g0() {
        let h = SsdbSpace::hilbert(2).unwrap();
        let f = QuadraticFunctional::q_restricted(&Subspace::whole(&h));
        let c = v(&[0.7, -1.3]);
        let samples = vec![(v(&[1.0, 2.0]), v(&[-0.5, 0.25])), (v(&[3.0, -1.0]), v(&[2.0, 2.0]))];
        let report = verify_translation_identities(&f, &c, &samples, tol()).unwrap();
        assert!(report.holds(1e-10), "{report:?}");
    }

    #[test]
    fn complement_implication_examples() {
        let a = r3_line();
        let zero = DVector::zeros(3);
        let out = check_complement_implication(&a, &zero, &zero, tol()).unwrap();
        assert!(out.equality && out.difference_in_complement);
        let u = v(&[1.0, -1.0, 2.0]);
        let out = check_complement_implication(&a, &u, &u, tol()).unwrap();
        assert!(out.equality && out.difference_in_complement);
        let out = check_complement_implication(&a, &u, &v(&[5.0, 0.0, 0.0]), tol()).unwrap();
        assert!(!out.equality && out.holds());

        let bad = Subspace::from_generators(&SsdbSpace::paper_r3(), &[v(&[1.0, -1.0, 0.0])], tol()).unwrap();
        assert_eq!(check_complement_implication(&bad, &zero, &zero, tol()).unwrap_err().kind(), "NotQPositive");
    }

    #[test]
    fn fenchel_young_on_line() {
        let qa = QuadraticFunctional::q_restricted(&r3_line());
        let u = v(&[1.0, -1.0, 2.0]);
        let gap = fenchel_young_gap(&qa, &u, &u, tol()).unwrap().finite().unwrap();
        assert!(gap.abs() < 1e-12);
        let off = fenchel_young_gap(&qa, &v(&[1.0, 1.0, 0.0]), &u, tol()).unwrap();
        assert_eq!(off, ExtReal::PosInf);
    }
}
