//! Dense complex matrices, Haar sampling, Hermitian eigensolving and
//! log-determinants.

mod eigen;
mod haar;
mod lu;

pub use eigen::{hermitian_eigensystem, hermitian_eigenvalues, HermitianSpectrum};
pub(crate) use eigen::hermitian_eigensystem_unchecked;
pub use haar::{haar_orthogonal, haar_unitary};
pub use lu::{log_abs_det, Hessenberg, LogDet};

use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexDenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexDenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::invalid(format!(
                "{} entries do not fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::invalid("matrix entries must be finite"));
        }
        Ok(ComplexDenseMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexDenseMatrix { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diag(&vec![ONE; n])
    }

    pub fn from_diag(diag: &[Complex64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let d: Vec<Complex64> = diag.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::from_diag(&d)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        ComplexDenseMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [Complex64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::invalid(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == ZERO {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        (0..self.rows).map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }

    /// `self − w I`.
    pub fn shifted(&self, w: Complex64) -> Self {
        let mut m = self.clone();
        for i in 0..self.rows.min(self.cols) {
            m[(i, i)] -= w;
        }
        m
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::invalid("shape mismatch in subtraction"));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(ComplexDenseMatrix { rows: self.rows, cols: self.cols, data })
    }

    /// Multiplies column `j` by `factors[j]`.
    pub fn scale_columns(&mut self, factors: &[Complex64]) {
        for i in 0..self.rows {
            for (x, f) in self.row_mut(i).iter_mut().zip(factors) {
                *x *= f;
            }
        }
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (i..self.cols).all(|j| (self[(i, j)] - self[(j, i)].conj()).norm() <= tol))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Largest deviation of `self* self` from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        let g = self.adjoint().matmul(self).expect("shapes agree");
        g.sub(&Self::identity(self.cols)).expect("shapes agree").max_abs()
    }
}

impl Index<(usize, usize)> for ComplexDenseMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexDenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Householder vector `u` and `β = 2/(u*u)` mapping `x` to `γ e₁` with
/// `γ = −e^{i arg x₀} ‖x‖`. Returns `None` when `x` vanishes.
pub(crate) fn householder(x: &[Complex64]) -> Option<(Vec<Complex64>, f64, Complex64)> {
    let alpha = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if alpha == 0.0 {
        return None;
    }
    let phase = if x[0] == ZERO { ONE } else { x[0] / x[0].norm() };
    let gamma = -phase * alpha;
    let mut u = x.to_vec();
    u[0] -= gamma;
    let unorm2: f64 = u.iter().map(|z| z.norm_sqr()).sum();
    Some((u, 2.0 / unorm2, gamma))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matmul_and_adjoint() {
        let a = ComplexDenseMatrix::from_fn(2, 3, |i, j| Complex64::new(i as f64, j as f64));
        let b = a.adjoint();
        let c = a.matmul(&b).unwrap();
        assert!(c.is_hermitian(1e-14));
        assert_eq!(c.rows(), 2);
        assert!(a.matmul(&a).is_err());
        let i3 = ComplexDenseMatrix::identity(3);
        assert_eq!(a.matmul(&i3).unwrap(), a);
        assert_eq!(i3.trace(), Complex64::new(3.0, 0.0));
    }

    #[test]
    fn householder_maps_to_axis() {
        let x = vec![Complex64::new(1.0, 2.0), Complex64::new(-0.5, 0.1), Complex64::new(0.0, 3.0)];
        let (u, beta, gamma) = householder(&x).unwrap();
        let dot: Complex64 = u.iter().zip(&x).map(|(a, b)| a.conj() * b).sum();
        let px: Vec<Complex64> = x.iter().zip(&u).map(|(xi, ui)| xi - beta * ui * dot).collect();
        assert!((px[0] - gamma).norm() < 1e-14);
        assert!(px[1].norm() < 1e-14 && px[2].norm() < 1e-14);
    }
}
