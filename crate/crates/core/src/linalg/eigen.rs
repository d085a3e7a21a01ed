use num_complex::Complex64;

use super::{householder, ComplexDenseMatrix, ONE, ZERO};
use crate::error::{Error, Result};

/// Ascending eigenvalues of a Hermitian matrix, optionally with orthonormal
/// eigenvectors stored as columns.
#[derive(Debug, Clone)]
pub struct HermitianSpectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Option<ComplexDenseMatrix>,
    /// `max_k ‖M v_k − λ_k v_k‖₂` when vectors were computed and checked,
    /// otherwise the a priori bound `n ε ‖M‖_F`.
    pub residual: f64,
    pub residual_checked: bool,
}

impl HermitianSpectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }
}

/// Eigenvalues and, on request, eigenvectors with a measured residual.
pub fn hermitian_eigensystem(m: &ComplexDenseMatrix, want_vectors: bool) -> Result<HermitianSpectrum> {
    let mut spec = solve(m, want_vectors)?;
    if let Some(v) = &spec.eigenvectors {
        spec.residual = measured_residual(m, v, &spec.eigenvalues);
        spec.residual_checked = true;
    }
    Ok(spec)
}

/// Eigenvalues only, skipping the residual pass.
pub fn hermitian_eigenvalues(m: &ComplexDenseMatrix) -> Result<Vec<f64>> {
    Ok(solve(m, false)?.eigenvalues)
}

/// Eigenvectors without the `O(n³)` residual pass.
pub(crate) fn hermitian_eigensystem_unchecked(m: &ComplexDenseMatrix) -> Result<HermitianSpectrum> {
    solve(m, true)
}

fn measured_residual(m: &ComplexDenseMatrix, v: &ComplexDenseMatrix, lambda: &[f64]) -> f64 {
    let mv = m.matmul(v).expect("square shapes agree");
    let n = m.rows();
    let mut col_norm2 = vec![0.0; n];
    for i in 0..n {
        for (k, acc) in col_norm2.iter_mut().enumerate() {
            *acc += (mv[(i, k)] - lambda[k] * v[(i, k)]).norm_sqr();
        }
    }
    col_norm2.into_iter().fold(0.0, |a: f64, b| a.max(b.sqrt()))
}

fn solve(m: &ComplexDenseMatrix, want_vectors: bool) -> Result<HermitianSpectrum> {
    if !m.is_square() {
        return Err(Error::invalid("eigensolver needs a square matrix"));
    }
    let scale = m.max_abs().max(f64::MIN_POSITIVE);
    if !m.is_hermitian(1e-10 * scale.max(1.0)) {
        return Err(Error::invalid("matrix is not Hermitian to 1e-10"));
    }
    let n = m.rows();
    let a_priori = n as f64 * f64::EPSILON * m.frobenius_norm();
    if n == 0 {
        return Ok(HermitianSpectrum { eigenvalues: vec![], eigenvectors: None, residual: 0.0, residual_checked: false });
    }
    let mut a = m.clone();
    let mut reflectors: Vec<(usize, Vec<Complex64>, f64)> = Vec::new();
    for k in 0..n.saturating_sub(2) {
        let x: Vec<Complex64> = (k + 1..n).map(|i| a[(i, k)]).collect();
        let Some((u, beta, gamma)) = householder(&x) else {
            continue;
        };
        // A₂₂ ← P A₂₂ P via p = βAu, q = p − (β u*p/2) u, A₂₂ − u q* − q u*
        let off = k + 1;
        let mut p = vec![ZERO; u.len()];
        for (pi, i) in p.iter_mut().zip(off..n) {
            let row = &a.row(i)[off..];
            *pi = beta * row.iter().zip(&u).map(|(aij, uj)| aij * uj).sum::<Complex64>();
        }
        let upp: Complex64 = u.iter().zip(&p).map(|(ui, pi)| ui.conj() * pi).sum();
        let kk = 0.5 * beta * upp;
        let q: Vec<Complex64> = p.iter().zip(&u).map(|(pi, ui)| pi - kk * ui).collect();
        for (idx, i) in (off..n).enumerate() {
            let (ui, qi) = (u[idx], q[idx]);
            let row = &mut a.row_mut(i)[off..];
            for ((aij, uj), qj) in row.iter_mut().zip(&u).zip(&q) {
                *aij -= ui * qj.conj() + qi * uj.conj();
            }
        }
        a[(off, k)] = gamma;
        a[(k, off)] = gamma.conj();
        for i in off + 1..n {
            a[(i, k)] = ZERO;
            a[(k, i)] = ZERO;
        }
        reflectors.push((off, u, beta));
    }

    let mut d: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    let mut e = vec![0.0; n];
    let mut delta = vec![ONE; n];
    for k in 0..n - 1 {
        let ek = a[(k + 1, k)];
        let mag = ek.norm();
        e[k] = mag;
        delta[k + 1] = if mag > 0.0 { delta[k] * ek / mag } else { delta[k] };
    }

    // zt row k holds the k-th eigenvector of the real tridiagonal matrix
    let mut zt = if want_vectors { Some(identity_real(n)) } else { None };
    tql_implicit(&mut d, &mut e, zt.as_mut().map(|z| (z.as_mut_slice(), n)))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| d[i]).collect();

    let eigenvectors = zt.map(|zt| {
        // W = D Z, then V = Q W
        let mut w = ComplexDenseMatrix::zeros(n, n);
        for (col, &k) in order.iter().enumerate() {
            let zk = &zt[k * n..(k + 1) * n];
            for i in 0..n {
                w[(i, col)] = delta[i] * zk[i];
            }
        }
        for (off, u, beta) in reflectors.iter().rev() {
            super::haar::apply_left(&mut w, *off, 0, u, *beta);
        }
        w
    });
    Ok(HermitianSpectrum { eigenvalues, eigenvectors, residual: a_priori, residual_checked: false })
}

fn identity_real(n: usize) -> Vec<f64> {
    let mut z = vec![0.0; n * n];
    for i in 0..n {
        z[i * n + i] = 1.0;
    }
    z
}

/// Implicit QL with Wilkinson-type shifts on the symmetric tridiagonal
/// matrix with diagonal `d` and off-diagonal `e[i] = T[i+1][i]`.
fn tql_implicit(d: &mut [f64], e: &mut [f64], mut zt: Option<(&mut [f64], usize)>) -> Result<()> {
    let n = d.len();
    let limit = 30 * n.max(1);
    let mut total = 0usize;
    for l in 0..n {
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            total += 1;
            if total > limit {
                return Err(Error::NoConvergence {
                    context: "tridiagonal QL iteration".into(),
                    iterations: total,
                    residual: e[l].abs(),
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some((z, n)) = zt.as_mut() {
                    let (lo, hi) = z.split_at_mut((i + 1) * *n);
                    let zi = &mut lo[i * *n..];
                    let zi1 = &mut hi[..*n];
                    for (a, b) in zi.iter_mut().zip(zi1.iter_mut()) {
                        let f = *b;
                        *b = s * *a + c * f;
                        *a = c * *a - s * f;
                    }
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}
