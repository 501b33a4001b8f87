//! The finite-dimensional space model.
//!
//! A space is `R^n` with the Euclidean norm and a pairing `[b, c] = b^T P c`
//! given by a symmetric involutive matrix `P`. Under the Euclidean norm these
//! are exactly the pairings whose duality map `iota(c) = P c` is a linear
//! isometry onto the dual, so every quantity below is computed in closed form.

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, SsdbError};
use crate::linalg::max_abs;

/// Absolute-plus-relative tolerance used by every boolean check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    /// Absolute tolerance `tau`; checks accept `tau * (1 + magnitude)`.
    pub abs: f64,
    /// Singular-value (or eigenvalue) cutoff fraction for rank decisions.
    pub rank: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { abs: 1e-9, rank: 1e-10 }
    }
}

impl Tolerance {
    pub fn new(abs: f64, rank: f64) -> Result<Self> {
        for (name, v) in [("abs", abs), ("rank", rank)] {
            if !v.is_finite() || v < 0.0 {
                return Err(SsdbError::InvalidTolerance(format!("{name} = {v}")));
            }
        }
        Ok(Tolerance { abs, rank })
    }
}

/// A symmetrically self-dual structure on `R^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SsdbSpace {
    pairing: DMatrix<f64>,
}

impl SsdbSpace {
    /// Validates `pairing` as a symmetric involution and wraps it.
    pub fn new(pairing: DMatrix<f64>, tol: Tolerance) -> Result<Self> {
        let (rows, cols) = pairing.shape();
        if rows != cols {
            return Err(SsdbError::NotSquare { rows, cols });
        }
        if rows == 0 {
            return Err(SsdbError::InvalidDimension(0));
        }
        if pairing.iter().any(|v| !v.is_finite()) {
            return Err(SsdbError::NonFinite);
        }
        let scale = 1.0 + max_abs(&pairing);
        let asym = max_abs(&(&pairing - pairing.transpose()));
        if asym > tol.abs * scale {
            return Err(SsdbError::NotSymmetric { deviation: asym });
        }
        let square = &pairing * &pairing - DMatrix::identity(rows, rows);
        let inv = max_abs(&square);
        if inv > tol.abs * scale * scale {
            return Err(SsdbError::NotInvolutive { deviation: inv });
        }
        Ok(SsdbSpace { pairing })
    }

    /// Hilbert model: `P = I`, so `q = g0` and `iota` is the identity.
    pub fn hilbert(n: usize) -> Result<Self> {
        check_positive_dim(n)?;
        Ok(SsdbSpace { pairing: DMatrix::identity(n, n) })
    }

    /// Anti-Hilbert model: `P = -I`, so `q = -g0`.
    pub fn anti_hilbert(n: usize) -> Result<Self> {
        check_positive_dim(n)?;
        Ok(SsdbSpace { pairing: -DMatrix::identity(n, n) })
    }

    /// `R^3` with `[b, c] = b1 c2 + b2 c1 + b3 c3`.
    pub fn paper_r3() -> Self {
        #[rustfmt::skip]
        let p = DMatrix::from_row_slice(3, 3, &[
            0.0, 1.0, 0.0,
            1.0, 0.0, 0.0,
            0.0, 0.0, 1.0,
        ]);
        SsdbSpace { pairing: p }
    }

    /// `E x E*` with `E = R^n`: pairing `[[0, I], [I, 0]]`, so
    /// `q(x, x*) = <x, x*>`.
    pub fn product(n: usize) -> Result<Self> {
        check_positive_dim(n)?;
        let mut p = DMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            p[(i, n + i)] = 1.0;
            p[(n + i, i)] = 1.0;
        }
        Ok(SsdbSpace { pairing: p })
    }

    pub fn dim(&self) -> usize {
        self.pairing.nrows()
    }

    pub fn pairing(&self) -> &DMatrix<f64> {
        &self.pairing
    }

    pub fn check_dim(&self, v: &DVector<f64>) -> Result<()> {
        if v.len() != self.dim() {
            return Err(SsdbError::DimensionMismatch { expected: self.dim(), found: v.len() });
        }
        Ok(())
    }

    /// `[b, c] = b^T P c`.
    pub fn bracket(&self, b: &DVector<f64>, c: &DVector<f64>) -> Result<f64> {
        self.check_dim(b)?;
        self.check_dim(c)?;
        Ok(b.dot(&(&self.pairing * c)))
    }

    /// `q(b) = [b, b] / 2`.
    pub fn q(&self, b: &DVector<f64>) -> Result<f64> {
        Ok(0.5 * self.bracket(b, b)?)
    }

    /// The duality map `iota(c) = P c`.
    pub fn iota(&self, c: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_dim(c)?;
        Ok(&self.pairing * c)
    }

    /// The space with pairing `-P`. Negating twice restores the matrix bit for bit.
    pub fn negate(&self) -> SsdbSpace {
        SsdbSpace { pairing: -&self.pairing }
    }

    /// Membership in `N_q(g0) = { b : g0(b) + q(b) = 0 }`.
    pub fn in_nq_g0(&self, b: &DVector<f64>, tol: Tolerance) -> Result<bool> {
        let gap = g0(b) + self.q(b)?;
        Ok(gap <= tol.abs * (1.0 + b.norm_squared()))
    }

    /// Scalar form of `iota(c) in dg0(b)`: `g0(b) + g0(c) = [b, c]`.
    ///
    /// The gap equals `|iota(c) - b|^2 / 2`, so this holds exactly when
    /// `|iota(c) - b| <= sqrt(2 tau (1 + |b|^2 + |c|^2))`.
    pub fn subdiff_g0_check(&self, b: &DVector<f64>, c: &DVector<f64>, tol: Tolerance) -> Result<bool> {
        let gap = (g0(b) + g0(c) - self.bracket(b, c)?).abs();
        Ok(gap <= tol.abs * subdiff_scale(b, c))
    }

    /// Approximate equality of pairings, `max |P1 - P2| <= tau`.
    pub fn approx_eq(&self, other: &SsdbSpace, tol: Tolerance) -> bool {
        self.dim() == other.dim() && max_abs(&(&self.pairing - &other.pairing)) <= tol.abs
    }

    /// `max |P|`, the magnitude used to scale eigenvalue tolerances.
    pub fn pairing_scale(&self) -> f64 {
        max_abs(&self.pairing)
    }
}

/// Scale factor used by [`SsdbSpace::subdiff_g0_check`].
pub fn subdiff_scale(b: &DVector<f64>, c: &DVector<f64>) -> f64 {
    1.0 + b.norm_squared() + c.norm_squared()
}

/// `g0(b) = |b|^2 / 2`.
pub fn g0(b: &DVector<f64>) -> f64 {
    0.5 * b.norm_squared()
}

fn check_positive_dim(n: usize) -> Result<()> {
    if n == 0 {
        Err(SsdbError::InvalidDimension(0))
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    #[test]
    fn validates_canonical_pairings() {
        let tol = Tolerance::default();
        assert!(SsdbSpace::new(DMatrix::identity(4, 4), tol).is_ok());
        assert!(SsdbSpace::new(SsdbSpace::paper_r3().pairing().clone(), tol).is_ok());
        assert!(SsdbSpace::new(SsdbSpace::product(2).unwrap().pairing().clone(), tol).is_ok());
    }

    #[test]
    fn rejects_bad_pairings() {
        let tol = Tolerance::default();
        let ones = DMatrix::from_element(2, 2, 1.0);
        assert_eq!(SsdbSpace::new(ones, tol).unwrap_err().kind(), "NotInvolutive");
        let skew = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        assert_eq!(SsdbSpace::new(skew, tol).unwrap_err().kind(), "NotSymmetric");
        assert_eq!(SsdbSpace::new(DMatrix::zeros(0, 0), tol).unwrap_err().kind(), "InvalidDimension");
        assert_eq!(SsdbSpace::new(DMatrix::zeros(2, 3), tol).unwrap_err().kind(), "NotSquare");
        let mut nan = DMatrix::identity(2, 2);
        nan[(0, 0)] = f64::NAN;
        assert_eq!(SsdbSpace::new(nan, tol).unwrap_err().kind(), "NonFinite");
    }

    #[test]
    fn builders_reject_zero_dimension() {
        assert!(SsdbSpace::hilbert(0).is_err());
        assert!(SsdbSpace::anti_hilbert(0).is_err());
        assert!(SsdbSpace::product(0).is_err());
    }

    #[test]
    fn builder_matrices() {
        assert_eq!(SsdbSpace::hilbert(2).unwrap().pairing(), &DMatrix::<f64>::identity(2, 2));
        assert_eq!(
            SsdbSpace::product(1).unwrap().pairing(),
            &DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])
        );
    }

    #[test]
    fn bracket_values() {
        let s = SsdbSpace::paper_r3();
        assert_eq!(s.bracket(&v(&[1.0, 0.0, 0.0]), &v(&[0.0, 1.0, 0.0])).unwrap(), 1.0);
        assert_eq!(s.bracket(&v(&[1.0, 2.0, 3.0]), &v(&[0.0, 0.0, 0.0])).unwrap(), 0.0);
        let h = SsdbSpace::hilbert(2).unwrap();
        assert_eq!(h.bracket(&v(&[3.0, 4.0]), &v(&[3.0, 4.0])).unwrap(), 25.0);
        assert_eq!(
            s.bracket(&v(&[1.0, 2.0]), &v(&[1.0, 2.0, 3.0])).unwrap_err().kind(),
            "DimensionMismatch"
        );
    }

    #[test]
    fn q_values() {
        let s = SsdbSpace::paper_r3();
        assert_eq!(s.q(&v(&[1.0, -1.0, 2.0])).unwrap(), 1.0);
        assert_eq!(s.q(&v(&[0.0, 0.0, 0.0])).unwrap(), 0.0);
        let anti = SsdbSpace::anti_hilbert(3).unwrap();
        let b = v(&[1.0, -2.0, 0.5]);
        assert_eq!(anti.q(&b).unwrap(), -g0(&b));
    }

    #[test]
    fn iota_values() {
        let s = SsdbSpace::paper_r3();
        assert_eq!(s.iota(&v(&[1.0, 2.0, 3.0])).unwrap(), v(&[2.0, 1.0, 3.0]));
        let p = SsdbSpace::product(2).unwrap();
        assert_eq!(p.iota(&v(&[1.0, 2.0, 3.0, 4.0])).unwrap(), v(&[3.0, 4.0, 1.0, 2.0]));
        let h = SsdbSpace::hilbert(3).unwrap();
        assert_eq!(h.iota(&v(&[1.0, 2.0, 3.0])).unwrap(), v(&[1.0, 2.0, 3.0]));
    }

    #[test]
    fn g0_values() {
        assert_eq!(g0(&v(&[3.0, 4.0])), 12.5);
        assert_eq!(g0(&v(&[0.0, 0.0])), 0.0);
    }

    #[test]
    fn negation() {
        let h = SsdbSpace::hilbert(3).unwrap();
        assert_eq!(h.negate(), SsdbSpace::anti_hilbert(3).unwrap());
        let s = SsdbSpace::paper_r3();
        assert_eq!(s.negate().negate(), s);
        let b = v(&[1.5, -0.5, 2.0]);
        assert_eq!(s.negate().q(&b).unwrap(), -(1.5 * -0.5) - 0.5 * 4.0);
    }

    #[test]
    fn nq_g0_membership() {
        let tol = Tolerance::default();
        let p = SsdbSpace::product(1).unwrap();
        assert!(p.in_nq_g0(&v(&[1.0, -1.0]), tol).unwrap());
        assert!(!p.in_nq_g0(&v(&[1.0, 1.0]), tol).unwrap());
        let h = SsdbSpace::hilbert(2).unwrap();
        assert!(!h.in_nq_g0(&v(&[0.1, 0.0]), tol).unwrap());
        let anti = SsdbSpace::anti_hilbert(2).unwrap();
        assert!(anti.in_nq_g0(&v(&[7.0, -3.0]), tol).unwrap());
    }

    #[test]
    fn subdifferential_identity() {
        let tol = Tolerance::default();
        let h = SsdbSpace::hilbert(2).unwrap();
        let c = v(&[1.0, -2.0]);
        assert!(h.subdiff_g0_check(&c, &c, tol).unwrap());
        assert!(!h.subdiff_g0_check(&(-&c), &c, tol).unwrap());
        let s = SsdbSpace::paper_r3();
        assert!(s.subdiff_g0_check(&v(&[2.0, 1.0, 3.0]), &v(&[1.0, 2.0, 3.0]), tol).unwrap());
    }

    #[test]
    fn tolerance_validation() {
        assert!(Tolerance::new(1e-9, 1e-10).is_ok());
        assert!(Tolerance::new(-1.0, 1e-10).is_err());
        assert!(Tolerance::new(1e-9, f64::NAN).is_err());
    }
}
