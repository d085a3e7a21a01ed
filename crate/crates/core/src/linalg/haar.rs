use num_complex::Complex64;
use rand::Rng;

use super::{householder, ComplexDenseMatrix, ONE, ZERO};
use crate::rng::{complex_normal, standard_normal};

/// Haar-distributed unitary matrix: QR of a complex Gaussian matrix with the
/// columns of `Q` rotated by the phases of `diag(R)`.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexDenseMatrix {
    let g = ComplexDenseMatrix::from_fn(n, n, |_, _| complex_normal(rng));
    phase_corrected_q(g)
}

/// Haar-distributed orthogonal matrix, stored with zero imaginary parts.
pub fn haar_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexDenseMatrix {
    let g = ComplexDenseMatrix::from_fn(n, n, |_, _| Complex64::new(standard_normal(rng), 0.0));
    phase_corrected_q(g)
}

fn phase_corrected_q(mut a: ComplexDenseMatrix) -> ComplexDenseMatrix {
    let n = a.rows();
    let mut reflectors: Vec<(usize, Vec<Complex64>, f64)> = Vec::with_capacity(n);
    let mut phases = vec![ONE; n];
    for k in 0..n {
        let x: Vec<Complex64> = (k..n).map(|i| a[(i, k)]).collect();
        let Some((u, beta, gamma)) = householder(&x) else {
            continue;
        };
        // R_kk = γ
        phases[k] = gamma / gamma.norm();
        apply_left(&mut a, k, k, &u, beta);
        reflectors.push((k, u, beta));
    }
    let mut q = ComplexDenseMatrix::identity(n);
    for (k, u, beta) in reflectors.iter().rev() {
        apply_left(&mut q, *k, *k, u, *beta);
    }
    q.scale_columns(&phases);
    q
}

/// `A[k.., c0..] ← (I − β u u*) A[k.., c0..]`.
pub(crate) fn apply_left(a: &mut ComplexDenseMatrix, k: usize, c0: usize, u: &[Complex64], beta: f64) {
    let cols = a.cols();
    let mut s = vec![ZERO; cols - c0];
    for (ui, i) in u.iter().zip(k..) {
        let uc = ui.conj();
        for (sj, aij) in s.iter_mut().zip(&a.row(i)[c0..]) {
            *sj += uc * aij;
        }
    }
    for (ui, i) in u.iter().zip(k..) {
        let f = beta * ui;
        for (aij, sj) in a.row_mut(i)[c0..].iter_mut().zip(&s) {
            *aij -= f * sj;
        }
    }
}
