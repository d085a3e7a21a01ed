use num_complex::Complex64;

use super::haar::apply_left;
use super::{householder, ComplexDenseMatrix, ZERO};
use crate::error::{Error, Result};

/// `log|det M|` with a crude conditioning indicator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDet {
    /// `−∞` for an exactly singular matrix.
    pub value: f64,
    /// `max|u_ii| / min|u_ii|`; infinite when singular.
    pub condition_estimate: f64,
    pub singular: bool,
}

/// LU with partial pivoting; `log|det| = Σ log|u_ii|`.
pub fn log_abs_det(m: &ComplexDenseMatrix) -> Result<LogDet> {
    if !m.is_square() {
        return Err(Error::invalid("log_abs_det needs a square matrix"));
    }
    let n = m.rows();
    let mut a = m.clone();
    let mut value = 0.0;
    let (mut umax, mut umin) = (0.0f64, f64::INFINITY);
    for k in 0..n {
        let (piv, mag) = (k..n)
            .map(|i| (i, a[(i, k)].norm()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if mag == 0.0 {
            return Ok(LogDet { value: f64::NEG_INFINITY, condition_estimate: f64::INFINITY, singular: true });
        }
        if piv != k {
            for j in 0..n {
                let t = a[(k, j)];
                a[(k, j)] = a[(piv, j)];
                a[(piv, j)] = t;
            }
        }
        let pivot = a[(k, k)];
        value += mag.ln();
        umax = umax.max(mag);
        umin = umin.min(mag);
        let pivot_row: Vec<Complex64> = a.row(k)[k + 1..].to_vec();
        for i in k + 1..n {
            let l = a[(i, k)] / pivot;
            if l == ZERO {
                continue;
            }
            for (aij, pj) in a.row_mut(i)[k + 1..].iter_mut().zip(&pivot_row) {
                *aij -= l * pj;
            }
        }
    }
    let condition_estimate = if n == 0 { 1.0 } else { umax / umin };
    Ok(LogDet { value, condition_estimate, singular: false })
}

/// Unitary Hessenberg form `H = Q* X Q`, reused for `log|det(X − w)|` at
/// many shifts `w` in `O(n²)` each.
#[derive(Debug, Clone)]
pub struct Hessenberg {
    h: ComplexDenseMatrix,
}

impl Hessenberg {
    pub fn new(x: &ComplexDenseMatrix) -> Result<Self> {
        if !x.is_square() {
            return Err(Error::invalid("Hessenberg reduction needs a square matrix"));
        }
        let n = x.rows();
        let mut h = x.clone();
        for k in 0..n.saturating_sub(2) {
            let col: Vec<Complex64> = (k + 1..n).map(|i| h[(i, k)]).collect();
            let Some((u, beta, _)) = householder(&col) else {
                continue;
            };
            apply_left(&mut h, k + 1, k, &u, beta);
            apply_right(&mut h, k + 1, &u, beta);
            for i in k + 2..n {
                h[(i, k)] = ZERO;
            }
        }
        Ok(Hessenberg { h })
    }

    pub fn matrix(&self) -> &ComplexDenseMatrix {
        &self.h
    }

    /// `log|det(H − w)|` by elimination with pivoting between adjacent rows.
    pub fn log_abs_det_shifted(&self, w: Complex64) -> LogDet {
        let h = &self.h;
        let n = h.rows();
        if n == 0 {
            return LogDet { value: 0.0, condition_estimate: 1.0, singular: false };
        }
        // carry = current row k restricted to columns k..n
        let mut carry: Vec<Complex64> = h.row(0).to_vec();
        carry[0] -= w;
        let mut next = vec![ZERO; n];
        let mut value = 0.0;
        let (mut umax, mut umin) = (0.0f64, f64::INFINITY);
        for k in 0..n {
            if k + 1 == n {
                let mag = carry[k].norm();
                if mag == 0.0 {
                    return singular();
                }
                value += mag.ln();
                umax = umax.max(mag);
                umin = umin.min(mag);
                break;
            }
            next[k..].copy_from_slice(&h.row(k + 1)[k..]);
            next[k + 1] -= w;
            if next[k].norm() > carry[k].norm() {
                std::mem::swap(&mut carry, &mut next);
            }
            let piv = carry[k];
            let mag = piv.norm();
            if mag == 0.0 {
                return singular();
            }
            value += mag.ln();
            umax = umax.max(mag);
            umin = umin.min(mag);
            let l = next[k] / piv;
            for (o, p) in next[k + 1..].iter_mut().zip(&carry[k + 1..]) {
                *o -= l * p;
            }
            // the eliminated row carries on
            std::mem::swap(&mut carry, &mut next);
        }
        LogDet { value, condition_estimate: umax / umin, singular: false }
    }
}

fn singular() -> LogDet {
    LogDet { value: f64::NEG_INFINITY, condition_estimate: f64::INFINITY, singular: true }
}

/// `A[.., k..] ← A[.., k..] (I − β u u*)`.
fn apply_right(a: &mut ComplexDenseMatrix, k: usize, u: &[Complex64], beta: f64) {
    for i in 0..a.rows() {
        let row = &mut a.row_mut(i)[k..];
        let s: Complex64 = row.iter().zip(u).map(|(x, ui)| x * ui).sum();
        let f = beta * s;
        for (x, ui) in row.iter_mut().zip(u) {
            *x -= f * ui.conj();
        }
    }
}
