//! Dense complex linear algebra over small square matrices and state vectors.
//!
//! Everything here is immutable once built. Matrices are stored row-major and
//! are always square; constructors reject non-finite entries so no NaN or
//! infinity can enter the engine through this layer.

use std::fmt;
use std::ops::{Add, Index, Mul, Sub};

use nalgebra::DMatrix;
pub use num_complex::Complex64 as Complex;

use crate::error::{Error, Result};

pub const ZERO: Complex = Complex::new(0.0, 0.0);
pub const ONE: Complex = Complex::new(1.0, 0.0);
pub const I: Complex = Complex::new(0.0, 1.0);

fn check_finite(data: &[Complex]) -> Result<()> {
    match data.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}

/// Dense square complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex>,
}

impl ComplexMatrix {
    /// Builds a `dim x dim` matrix from row-major data.
    pub fn new(dim: usize, data: Vec<Complex>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::EmptyDimension);
        }
        if data.len() != dim * dim {
            return Err(Error::BadShape { dim, len: data.len() });
        }
        check_finite(&data)?;
        Ok(Self { dim, data })
    }

    pub fn from_rows(rows: Vec<Vec<Complex>>) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::BadShape { dim, len: row.len() * dim });
            }
            data.extend(row);
        }
        Self::new(dim, data)
    }

    /// Row-major real data, convenient for gate tables.
    pub fn from_real(dim: usize, data: &[f64]) -> Result<Self> {
        Self::new(dim, data.iter().map(|&x| Complex::new(x, 0.0)).collect())
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "matrix dimension must be positive");
        Self { dim, data: vec![ZERO; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        m
    }

    pub fn diagonal(entries: &[Complex]) -> Result<Self> {
        let dim = entries.len();
        if dim == 0 {
            return Err(Error::EmptyDimension);
        }
        let mut data = vec![ZERO; dim * dim];
        for (i, &z) in entries.iter().enumerate() {
            data[i * dim + i] = z;
        }
        Self::new(dim, data)
    }

    /// `|ket><bra|`.
    pub fn outer(ket: &StateVector, bra: &StateVector) -> Result<Self> {
        if ket.dim() != bra.dim() {
            return Err(Error::DimensionMismatch { left: ket.dim(), right: bra.dim() });
        }
        let dim = ket.dim();
        let mut data = Vec::with_capacity(dim * dim);
        for a in ket.entries() {
            for b in bra.entries() {
                data.push(a * b.conj());
            }
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Complex {
        self.data[row * self.dim + col]
    }

    pub fn as_slice(&self) -> &[Complex] {
        &self.data
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Complex]> {
        self.data.chunks(self.dim)
    }

    fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { left: self.dim, right: other.dim });
        }
        Ok(())
    }

    /// Matrix product `self * other`.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        let n = self.dim;
        let mut data = vec![ZERO; n * n];
        for i in 0..n {
            let row = &self.data[i * n..(i + 1) * n];
            let out = &mut data[i * n..(i + 1) * n];
            for (k, &a) in row.iter().enumerate() {
                if a == ZERO {
                    continue;
                }
                let other_row = &other.data[k * n..(k + 1) * n];
                for (o, &b) in out.iter_mut().zip(other_row) {
                    *o += a * b;
                }
            }
        }
        Ok(Self { dim: n, data })
    }

    /// Kronecker product; `result[(i*m + k), (j*m + l)] = self[i,j] * other[k,l]`.
    pub fn tensor(&self, other: &Self) -> Self {
        let (n, m) = (self.dim, other.dim);
        let dim = n * m;
        let mut data = vec![ZERO; dim * dim];
        for i in 0..n {
            for j in 0..n {
                let a = self.get(i, j);
                if a == ZERO {
                    continue;
                }
                for k in 0..m {
                    for l in 0..m {
                        data[(i * m + k) * dim + j * m + l] = a * other.get(k, l);
                    }
                }
            }
        }
        Self { dim, data }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(self.get(j, i).conj());
            }
        }
        Self { dim: n, data }
    }

    pub fn trace(&self) -> Complex {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn scale(&self, factor: Complex) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|z| z * factor).collect() }
    }

    /// Largest entry-wise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_same_dim(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// True iff every entry of `self - other` has modulus at most `tol`.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> Result<bool> {
        Ok(self.max_abs_diff(other)? <= tol)
    }

    /// `A A† == I` within `tol`.
    pub fn is_unitary(&self, tol: f64) -> bool {
        let product = &(self * &self.adjoint());
        product.max_abs_diff(&Self::identity(self.dim)).is_ok_and(|d| d <= tol)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_abs_diff(&self.adjoint()).is_ok_and(|d| d <= tol)
    }

    pub fn is_idempotent(&self, tol: f64) -> bool {
        (self * self).max_abs_diff(self).is_ok_and(|d| d <= tol)
    }

    /// Hilbert-Schmidt inner product `Tr(self† other)`.
    pub fn hs_inner(&self, other: &Self) -> Result<Complex> {
        self.check_same_dim(other)?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn apply(&self, v: &StateVector) -> Result<StateVector> {
        if self.dim != v.dim() {
            return Err(Error::DimensionMismatch { left: self.dim, right: v.dim() });
        }
        Ok(StateVector { data: self.apply_slice(v.entries()) })
    }

    pub(crate) fn apply_slice(&self, v: &[Complex]) -> Vec<Complex> {
        self.rows()
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `exp(-i * self * t)` for Hermitian `self`, via eigendecomposition.
    pub fn hermitian_exp(&self, t: f64) -> Result<Self> {
        let n = self.dim;
        let m = DMatrix::from_row_slice(n, n, &self.data);
        let eig = m.try_symmetric_eigen(1e-15, 10_000).ok_or(Error::Eigen)?;
        let phases: Vec<Complex> = eig
            .eigenvalues
            .iter()
            .map(|&e| Complex::new(0.0, -e * t).exp())
            .collect();
        let v = &eig.eigenvectors;
        let mut data = vec![ZERO; n * n];
        for i in 0..n {
            for j in 0..n {
                data[i * n + j] = (0..n).map(|k| v[(i, k)] * phases[k] * v[(j, k)].conj()).sum();
            }
        }
        Self::new(n, data)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex;

    fn index(&self, (row, col): (usize, usize)) -> &Complex {
        &self.data[row * self.dim + col]
    }
}

/// Panics on dimension mismatch; use [`ComplexMatrix::matmul`] for the fallible form.
impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("matrix product dimension mismatch")
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix sum dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix difference dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})", self.dim, self.dim)?;
        for row in self.rows() {
            let cells: Vec<String> = row.iter().map(|z| format!("{:.4}{:+.4}i", z.re, z.im)).collect();
            writeln!(f, "  [{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

/// Column vector of complex amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    data: Vec<Complex>,
}

impl StateVector {
    pub fn new(data: Vec<Complex>) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::EmptyDimension);
        }
        check_finite(&data)?;
        Ok(Self { data })
    }

    pub fn from_real(data: &[f64]) -> Result<Self> {
        Self::new(data.iter().map(|&x| Complex::new(x, 0.0)).collect())
    }

    /// Computational basis vector `|index>`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::EmptyDimension);
        }
        if index >= dim {
            return Err(Error::Argument(format!("basis index {index} out of range for dimension {dim}")));
        }
        let mut data = vec![ZERO; dim];
        data[index] = ONE;
        Ok(Self { data })
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn entries(&self) -> &[Complex] {
        &self.data
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm() - 1.0).abs() <= tol
    }

    pub fn normalize(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::ZeroVector);
        }
        Ok(self.scale(Complex::new(1.0 / n, 0.0)))
    }

    pub fn scale(&self, factor: Complex) -> Self {
        Self { data: self.data.iter().map(|z| z * factor).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { left: self.dim(), right: other.dim() });
        }
        Ok(Self { data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect() })
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> Result<Complex> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { left: self.dim(), right: other.dim() });
        }
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let data = self
            .data
            .iter()
            .flat_map(|a| other.data.iter().map(move |b| a * b))
            .collect();
        Self { data }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h() -> ComplexMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        ComplexMatrix::from_real(2, &[s, s, s, -s]).unwrap()
    }

    fn lcg_matrix(dim: usize, seed: u64) -> ComplexMatrix {
        let mut state = seed;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        let data = (0..dim * dim).map(|_| Complex::new(next(), next())).collect();
        ComplexMatrix::new(dim, data).unwrap()
    }

    #[test]
    fn identity_times_h_is_h() {
        let product = ComplexMatrix::identity(2).matmul(&h()).unwrap();
        assert!(product.approx_eq(&h(), 0.0).unwrap());
    }

    #[test]
    fn hadamard_squares_to_identity() {
        let hh = h().matmul(&h()).unwrap();
        assert!(hh.approx_eq(&ComplexMatrix::identity(2), 1e-12).unwrap());
        assert!(!h().approx_eq(&ComplexMatrix::identity(2), 1e-12).unwrap());
    }

    #[test]
    fn matmul_matches_triple_loop() {
        let (a, b) = (lcg_matrix(3, 1), lcg_matrix(3, 2));
        let fast = a.matmul(&b).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = ZERO;
                for k in 0..3 {
                    acc += a.get(i, k) * b.get(k, j);
                }
                assert!((fast.get(i, j) - acc).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn matmul_dimension_mismatch() {
        let err = ComplexMatrix::identity(2).matmul(&ComplexMatrix::identity(3)).unwrap_err();
        assert_eq!(err, Error::DimensionMismatch { left: 2, right: 3 });
        assert!(ComplexMatrix::identity(2).approx_eq(&ComplexMatrix::identity(3), 1.0).is_err());
    }

    #[test]
    fn tensor_of_identities() {
        let t = ComplexMatrix::identity(2).tensor(&ComplexMatrix::identity(2));
        assert_eq!(t, ComplexMatrix::identity(4));
        let t = ComplexMatrix::identity(3).tensor(&ComplexMatrix::identity(2));
        assert_eq!(t, ComplexMatrix::identity(6));
    }

    #[test]
    fn tensor_hadamard_on_first_qubit() {
        let hi = h().tensor(&ComplexMatrix::identity(2));
        let out = hi.apply(&StateVector::basis(4, 0).unwrap()).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let expected = StateVector::from_real(&[s, 0.0, s, 0.0]).unwrap();
        for (a, b) in out.entries().iter().zip(expected.entries()) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn tensor_is_associative() {
        let (a, b, c) = (lcg_matrix(2, 3), lcg_matrix(2, 4), lcg_matrix(2, 5));
        let left = a.tensor(&b).tensor(&c);
        let right = a.tensor(&b.tensor(&c));
        assert!(left.approx_eq(&right, 1e-14).unwrap());
    }

    #[test]
    fn adjoint_cases() {
        assert_eq!(ComplexMatrix::identity(3).adjoint(), ComplexMatrix::identity(3));
        assert_eq!(h().adjoint(), h());
        let m = lcg_matrix(4, 6);
        assert_eq!(m.adjoint().adjoint(), m);
    }

    #[test]
    fn trace_cases() {
        assert_eq!(ComplexMatrix::identity(4).trace(), Complex::new(4.0, 0.0));
        let v = StateVector::from_real(&[0.6, 0.8]).unwrap();
        let p = ComplexMatrix::outer(&v, &v).unwrap();
        assert!((p.trace() - ONE).norm() < 1e-15);
        let (a, b) = (lcg_matrix(3, 7), lcg_matrix(3, 8));
        let ab = a.matmul(&b).unwrap().trace();
        let ba = b.matmul(&a).unwrap().trace();
        assert!((ab - ba).norm() < 1e-12);
    }

    #[test]
    fn unitarity() {
        assert!(h().is_unitary(1e-12));
        let d = ComplexMatrix::from_real(2, &[1.0, 0.0, 0.0, 2.0]).unwrap();
        assert!(!d.is_unitary(1e-12));
    }

    #[test]
    fn rejects_non_finite() {
        let err = ComplexMatrix::from_real(1, &[f64::NAN]).unwrap_err();
        assert_eq!(err, Error::NonFinite { index: 0 });
        assert!(StateVector::from_real(&[1.0, f64::INFINITY]).is_err());
        assert_eq!(ComplexMatrix::new(0, vec![]).unwrap_err(), Error::EmptyDimension);
        assert!(ComplexMatrix::new(2, vec![ONE; 3]).is_err());
    }

    #[test]
    fn normalize_zero_vector_fails() {
        let z = StateVector::from_real(&[0.0, 0.0]).unwrap();
        assert_eq!(z.normalize().unwrap_err(), Error::ZeroVector);
        let v = StateVector::from_real(&[3.0, 4.0]).unwrap().normalize().unwrap();
        assert!(v.is_normalized(1e-15));
    }

    #[test]
    fn hermitian_exp_of_diagonal() {
        let hdiag = ComplexMatrix::from_real(2, &[0.3, 0.0, 0.0, -1.2]).unwrap();
        let u = hdiag.hermitian_exp(0.7).unwrap();
        assert!((u.get(0, 0) - Complex::new(0.0, -0.3 * 0.7).exp()).norm() < 1e-14);
        assert!((u.get(1, 1) - Complex::new(0.0, 1.2 * 0.7).exp()).norm() < 1e-14);
        assert!(u.get(0, 1).norm() < 1e-14);
    }
}
