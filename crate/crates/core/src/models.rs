//! Random matrix models: `X = U Σ V*`, its hermitization `H^w`, and the block
//! additive model `H = A + 𝒰 B 𝒰*`.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    haar_orthogonal, haar_unitary, hermitian_eigenvalues, ComplexDenseMatrix, HermitianSpectrum,
};
use crate::measure::DiscreteMeasure;

/// Symmetry class of the Haar factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Symmetry {
    #[default]
    Unitary,
    Orthogonal,
}

impl Symmetry {
    pub fn sample<R: Rng + ?Sized>(self, n: usize, rng: &mut R) -> ComplexDenseMatrix {
        match self {
            Symmetry::Unitary => haar_unitary(n, rng),
            Symmetry::Orthogonal => haar_orthogonal(n, rng),
        }
    }
}

/// Deterministic singular values `Σ` with Haar factors of a symmetry class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingleRingEnsemble {
    pub sigma_diag: Vec<f64>,
    pub symmetry: Symmetry,
    pub seed: u64,
}

impl SingleRingEnsemble {
    pub fn new(sigma_diag: Vec<f64>, symmetry: Symmetry, seed: u64) -> Result<Self> {
        if sigma_diag.is_empty() {
            return Err(Error::invalid("ensemble needs N >= 1"));
        }
        if sigma_diag.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return Err(Error::invalid("singular values must be finite and nonnegative"));
        }
        Ok(SingleRingEnsemble { sigma_diag, symmetry, seed })
    }

    /// `Σ` of size `n` whose entries are the `(i − ½)/n` quantiles of `mu_sigma`.
    pub fn from_measure(mu_sigma: &DiscreteMeasure, n: usize, symmetry: Symmetry, seed: u64) -> Result<Self> {
        if !mu_sigma.is_nonnegative() {
            return Err(Error::invalid("singular-value measure must live on [0, inf)"));
        }
        Self::new(quantile_diag(mu_sigma, n), symmetry, seed)
    }

    pub fn n(&self) -> usize {
        self.sigma_diag.len()
    }

    /// Empirical singular-value measure `μ_Σ`.
    pub fn mu_sigma(&self) -> DiscreteMeasure {
        DiscreteMeasure::empirical(&self.sigma_diag).expect("nonempty finite sample")
    }

    /// `X = U Σ V*`.
    pub fn sample_x<R: Rng + ?Sized>(&self, rng: &mut R) -> ComplexDenseMatrix {
        let n = self.n();
        let mut u = self.symmetry.sample(n, rng);
        let v = self.symmetry.sample(n, rng);
        let s: Vec<Complex64> = self.sigma_diag.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        u.scale_columns(&s);
        u.matmul(&v.adjoint()).expect("square factors")
    }
}

/// Quantile midpoints of a measure as a length-`n` diagonal.
pub fn quantile_diag(mu: &DiscreteMeasure, n: usize) -> Vec<f64> {
    let mut cum = Vec::with_capacity(mu.len());
    let mut acc = 0.0;
    for &w in mu.weights() {
        acc += w;
        cum.push(acc);
    }
    (0..n)
        .map(|i| {
            let q = (i as f64 + 0.5) / n as f64;
            let k = cum.partition_point(|&c| c < q).min(mu.len() - 1);
            mu.atoms()[k]
        })
        .collect()
}

/// `H^w = [[0, X − w], [(X − w)*, 0]]`.
pub fn hermitization(x: &ComplexDenseMatrix, w: Complex64) -> Result<ComplexDenseMatrix> {
    if !x.is_square() {
        return Err(Error::invalid("hermitization needs a square matrix"));
    }
    Ok(chiral(&x.shifted(w)))
}

/// `[[0, Y], [Y*, 0]]`.
pub fn chiral(y: &ComplexDenseMatrix) -> ComplexDenseMatrix {
    let n = y.rows();
    let mut h = ComplexDenseMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            h[(i, n + j)] = y[(i, j)];
            h[(n + j, i)] = y[(i, j)].conj();
        }
    }
    h
}

/// Singular values of `X − w`, ascending, from the Gram matrix.
pub fn shifted_singular_values(x: &ComplexDenseMatrix, w: Complex64) -> Result<Vec<f64>> {
    let y = x.shifted(w);
    let mut gram = y.adjoint().matmul(&y)?;
    symmetrize_hermitian(&mut gram);
    Ok(hermitian_eigenvalues(&gram)?.into_iter().map(|l| l.max(0.0).sqrt()).collect())
}

fn symmetrize_hermitian(m: &mut ComplexDenseMatrix) {
    let n = m.rows();
    for i in 0..n {
        m[(i, i)].im = 0.0;
        for j in i + 1..n {
            let a = 0.5 * (m[(i, j)] + m[(j, i)].conj());
            m[(i, j)] = a;
            m[(j, i)] = a.conj();
        }
    }
}

/// `m^w(iη) = (1/2N) Tr (H^w − iη)⁻¹` from the `2N` eigenvalues of `H^w`.
pub fn m_w(eigenvalues: &[f64], eta: f64) -> Result<Complex64> {
    if !(eta > 0.0) {
        return Err(Error::domain(format!("m_w needs eta > 0, got {eta}")));
    }
    let z = Complex64::new(0.0, eta);
    let sum: Complex64 = eigenvalues.iter().map(|&l| 1.0 / (l - z)).sum();
    Ok(sum / eigenvalues.len() as f64)
}

/// `m^w(iη) = (i/N) Σ η/(s² + η²)` from the singular values of `X − w`.
pub fn m_w_from_singular_values(sv: &[f64], eta: f64) -> Result<Complex64> {
    if !(eta > 0.0) {
        return Err(Error::domain(format!("m_w needs eta > 0, got {eta}")));
    }
    let im: f64 = sv.iter().map(|s| eta / (s * s + eta * eta)).sum::<f64>() / sv.len() as f64;
    Ok(Complex64::new(0.0, im))
}

/// `min |λ|` over a spectrum symmetric about zero.
pub fn smallest_sv(spec: &HermitianSpectrum) -> f64 {
    spec.eigenvalues.iter().fold(f64::INFINITY, |m, l| m.min(l.abs()))
}

/// Block additive model with complex diagonals `Σ`, `Ξ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockAdditiveEnsemble {
    pub sigma_diag: Vec<Complex64>,
    pub xi_diag: Vec<Complex64>,
    pub symmetry: Symmetry,
    pub seed: u64,
}

/// One draw of the block model.
#[derive(Debug, Clone)]
pub struct BlockSample {
    /// `H = A + 𝒰 B 𝒰*`.
    pub h: ComplexDenseMatrix,
    /// `𝓗 = B + 𝒰* A 𝒰`.
    pub h_dual: ComplexDenseMatrix,
}

impl BlockAdditiveEnsemble {
    pub fn new(sigma_diag: Vec<Complex64>, xi_diag: Vec<Complex64>, symmetry: Symmetry, seed: u64) -> Result<Self> {
        if sigma_diag.is_empty() || sigma_diag.len() != xi_diag.len() {
            return Err(Error::invalid("Sigma and Xi must be nonempty and of equal length"));
        }
        if sigma_diag.iter().chain(&xi_diag).any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::invalid("Sigma and Xi entries must be finite"));
        }
        Ok(BlockAdditiveEnsemble { sigma_diag, xi_diag, symmetry, seed })
    }

    pub fn n(&self) -> usize {
        self.sigma_diag.len()
    }

    /// `μ_Ξ^sym`, the spectral measure of `A`.
    pub fn mu_a(&self) -> DiscreteMeasure {
        abs_measure(&self.xi_diag).symmetrize()
    }

    /// `μ_Σ^sym`, the spectral measure of `B`.
    pub fn mu_b(&self) -> DiscreteMeasure {
        abs_measure(&self.sigma_diag).symmetrize()
    }

    /// Diagonals of length `n` from the quantiles of two real profiles.
    pub fn from_profiles(
        sigma_profile: &DiscreteMeasure,
        xi_profile: &DiscreteMeasure,
        n: usize,
        symmetry: Symmetry,
        seed: u64,
    ) -> Result<Self> {
        let to_c = |v: Vec<f64>| v.into_iter().map(|x| Complex64::new(x, 0.0)).collect();
        Self::new(to_c(quantile_diag(sigma_profile, n)), to_c(quantile_diag(xi_profile, n)), symmetry, seed)
    }

    /// Off-diagonal blocks `Ξ + U Σ V*` of `H` and `Σ + U* Ξ V` of `𝓗`.
    pub fn sample_blocks<R: Rng + ?Sized>(&self, rng: &mut R) -> (ComplexDenseMatrix, ComplexDenseMatrix) {
        let n = self.n();
        let u = self.symmetry.sample(n, rng);
        let v = self.symmetry.sample(n, rng);
        let v_adj = v.adjoint();
        // off-diagonal block of H: Ξ + U Σ V*
        let mut us = u.clone();
        us.scale_columns(&self.sigma_diag);
        let mut y = us.matmul(&v_adj).expect("square factors");
        for (i, &x) in self.xi_diag.iter().enumerate() {
            y[(i, i)] += x;
        }
        // off-diagonal block of 𝓗: Σ + U* Ξ V
        let mut uxi = u.adjoint();
        uxi.scale_columns(&self.xi_diag);
        let mut yd = uxi.matmul(&v).expect("square factors");
        for (i, &s) in self.sigma_diag.iter().enumerate() {
            yd[(i, i)] += s;
        }
        (y, yd)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> BlockSample {
        let (y, yd) = self.sample_blocks(rng);
        BlockSample { h: chiral(&y), h_dual: chiral(&yd) }
    }
}

fn abs_measure(d: &[Complex64]) -> DiscreteMeasure {
    let a: Vec<f64> = d.iter().map(|z| z.norm()).collect();
    DiscreteMeasure::empirical(&a).expect("nonempty finite diagonal")
}

/// Spectral data of a chiral block matrix reused across spectral parameters.
#[derive(Debug, Clone)]
pub struct ResolventData {
    n: usize,
    lambda: Vec<f64>,
    /// `V`, eigenvectors as columns.
    v: ComplexDenseMatrix,
    xi: Vec<Complex64>,
    /// `v_k* A v_k`.
    a_diag: Vec<f64>,
    /// `v_k* B̃ v_k` with `B̃ = H − A`.
    b_diag: Vec<f64>,
    residual: f64,
}

/// Observables of `G = (H − z)⁻¹` at one spectral parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolventObservables {
    pub z: Complex64,
    pub m_h: Complex64,
    pub tau1: Complex64,
    pub tau2: Complex64,
    pub omega_a_c: Complex64,
    pub omega_b_c: Complex64,
    /// `max_i` of the four entrywise deviations against the supplied `ω_B`.
    pub lambda_d: f64,
    /// `√N max ‖u_k‖_∞` over eigenvalues in the bulk window.
    pub eigvec_sup: f64,
    /// `|ω_A^c + ω_B^c − z + 1/m_H|`.
    pub identity_defect: f64,
}

impl ResolventData {
    /// `h` must be `[[0, Y], [Y*, 0]]` with `A = [[0, Ξ], [Ξ*, 0]]`.
    pub fn new(h: &ComplexDenseMatrix, xi_diag: &[Complex64]) -> Result<Self> {
        let n = xi_diag.len();
        if h.rows() != 2 * n || !h.is_square() {
            return Err(Error::invalid(format!("H must be {0}x{0} for N = {n}", 2 * n)));
        }
        let spec = crate::linalg::hermitian_eigensystem_unchecked(h)?;
        let v = spec.eigenvectors.expect("vectors requested");
        // B̃ off-diagonal block Y − Ξ
        let mut bt = ComplexDenseMatrix::zeros(n, n);
        for i in 0..n {
            bt.row_mut(i).copy_from_slice(&h.row(i)[n..]);
            bt[(i, i)] -= xi_diag[i];
        }
        // lower half of V: rows n..2n
        let lower = ComplexDenseMatrix::from_fn(n, 2 * n, |i, k| v[(n + i, k)]);
        let bl = bt.matmul(&lower)?;
        let mut a_diag = vec![0.0; 2 * n];
        let mut b_diag = vec![0.0; 2 * n];
        for k in 0..2 * n {
            let mut a_acc = Complex64::new(0.0, 0.0);
            let mut b_acc = Complex64::new(0.0, 0.0);
            for i in 0..n {
                let top = v[(i, k)].conj();
                a_acc += top * xi_diag[i] * v[(n + i, k)];
                b_acc += top * bl[(i, k)];
            }
            // v* M v = 2 Re(a* Y b) for M = [[0, Y], [Y*, 0]]
            a_diag[k] = 2.0 * a_acc.re;
            b_diag[k] = 2.0 * b_acc.re;
        }
        Ok(ResolventData { n, lambda: spec.eigenvalues, v, xi: xi_diag.to_vec(), a_diag, b_diag, residual: spec.residual })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.lambda
    }

    pub fn residual_bound(&self) -> f64 {
        self.residual
    }

    /// `G_ab` from the spectral decomposition.
    pub fn green_entry(&self, a: usize, b: usize, z: Complex64) -> Complex64 {
        let (ra, rb) = (self.v.row(a), self.v.row(b));
        self.lambda
            .iter()
            .zip(ra.iter().zip(rb))
            .map(|(&l, (va, vb))| va * vb.conj() / (l - z))
            .sum()
    }

    /// `max ‖u_k‖_∞` over `λ_k ∈ window`; zero if the window is empty.
    pub fn eigvec_sup(&self, window: (f64, f64)) -> f64 {
        let mut sup: f64 = 0.0;
        for (k, &l) in self.lambda.iter().enumerate() {
            if l >= window.0 && l <= window.1 {
                for i in 0..2 * self.n {
                    sup = sup.max(self.v[(i, k)].norm());
                }
            }
        }
        sup
    }

    pub fn observables(&self, z: Complex64, omega_b: Complex64, window: (f64, f64)) -> Result<ResolventObservables> {
        if !(z.im > 0.0) {
            return Err(Error::domain(format!("resolvent observables need Im z > 0, got {z}")));
        }
        let n = self.n;
        let two_n = (2 * n) as f64;
        let inv: Vec<Complex64> = self.lambda.iter().map(|&l| 1.0 / (l - z)).collect();
        let m_h: Complex64 = inv.iter().sum::<Complex64>() / two_n;
        let tr_ag: Complex64 = inv.iter().zip(&self.a_diag).map(|(g, a)| g * a).sum::<Complex64>() / two_n;
        let tr_bg: Complex64 = inv.iter().zip(&self.b_diag).map(|(g, b)| g * b).sum::<Complex64>() / two_n;
        let omega_a_c = z - tr_ag / m_h;
        let omega_b_c = z - tr_bg / m_h;
        let identity_defect = (omega_a_c + omega_b_c - z + 1.0 / m_h).norm();

        let mut tau1 = Complex64::new(0.0, 0.0);
        let mut tau2 = Complex64::new(0.0, 0.0);
        let mut lambda_d: f64 = 0.0;
        let w2 = omega_b * omega_b;
        for i in 0..n {
            let ih = i + n;
            let (ri, rh) = (self.v.row(i), self.v.row(ih));
            let mut g = [Complex64::new(0.0, 0.0); 4];
            for k in 0..2 * n {
                let (a, b) = (ri[k], rh[k]);
                g[0] += a * a.conj() * inv[k];
                g[1] += b * b.conj() * inv[k];
                g[2] += a * b.conj() * inv[k];
                g[3] += b * a.conj() * inv[k];
            }
            tau1 += g[0];
            tau2 += g[1];
            let xi = self.xi[i];
            let den = xi.norm_sqr() - w2;
            let diag_target = omega_b / den;
            let devs = [
                (g[0] - diag_target).norm(),
                (g[1] - diag_target).norm(),
                (g[2] - xi / den).norm(),
                (g[3] - xi.conj() / den).norm(),
            ];
            lambda_d = devs.iter().fold(lambda_d, |m, &d| m.max(d));
        }
        Ok(ResolventObservables {
            z,
            m_h,
            tau1: tau1 / n as f64,
            tau2: tau2 / n as f64,
            omega_a_c,
            omega_b_c,
            lambda_d,
            eigvec_sup: (n as f64).sqrt() * self.eigvec_sup(window),
            identity_defect,
        })
    }
}

/// Observables of `(H − z)⁻¹` for a single spectral parameter.
pub fn resolvent_observables(
    h: &ComplexDenseMatrix,
    z: Complex64,
    xi_diag: &[Complex64],
    omega_b: Complex64,
    window: (f64, f64),
) -> Result<ResolventObservables> {
    if !(z.im > 0.0) {
        return Err(Error::domain(format!("resolvent observables need Im z > 0, got {z}")));
    }
    ResolventData::new(h, xi_diag)?.observables(z, omega_b, window)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::hermitian_eigensystem;
    use crate::rng::rng_from_seed;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn sample_has_prescribed_singular_values() {
        let e = SingleRingEnsemble::new(vec![1.0, 2.0, 0.5, 3.0], Symmetry::Unitary, 1).unwrap();
        let mut rng = rng_from_seed(5);
        let x = e.sample_x(&mut rng);
        let sv = shifted_singular_values(&x, c(0.0)).unwrap();
        for (a, b) in sv.iter().zip([0.5, 1.0, 2.0, 3.0]) {
            assert!((a - b).abs() < 1e-10);
        }
        let e2 = SingleRingEnsemble::new(vec![1.0, 2.0], Symmetry::Orthogonal, 1).unwrap();
        let x2 = e2.sample_x(&mut rng);
        let ld = crate::linalg::log_abs_det(&x2).unwrap().value;
        assert!((ld - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn quantile_diagonal_of_two_point() {
        let mu = DiscreteMeasure::new(vec![1.0, 2.0], vec![0.5, 0.5]).unwrap();
        assert_eq!(quantile_diag(&mu, 4), vec![1.0, 1.0, 2.0, 2.0]);
    }

    #[test]
    fn hermitization_examples() {
        let x = ComplexDenseMatrix::from_real_diag(&[3.0]);
        let h = hermitization(&x, c(1.0)).unwrap();
        let s = hermitian_eigensystem(&h, false).unwrap();
        assert!((s.eigenvalues[0] + 2.0).abs() < 1e-14 && (s.eigenvalues[1] - 2.0).abs() < 1e-14);
        assert!((smallest_sv(&s) - 2.0).abs() < 1e-14);
        let m = m_w(&[-1.0, 1.0], 1.0).unwrap();
        assert!((m - Complex64::new(0.0, 0.5)).norm() < 1e-15);
        let m2 = m_w_from_singular_values(&[1.0], 1.0).unwrap();
        assert!((m2 - m).norm() < 1e-15);
        assert!(m_w(&[1.0], 0.0).is_err());
    }

    #[test]
    fn one_by_one_block_closed_form() {
        let e = BlockAdditiveEnsemble::new(vec![c(1.5)], vec![Complex64::new(0.3, 0.4)], Symmetry::Unitary, 0).unwrap();
        let mut rng = rng_from_seed(2);
        let sample = e.sample(&mut rng);
        let y = sample.h[(0, 1)];
        let z = Complex64::new(0.2, 0.7);
        let det = z * z - y.norm_sqr();
        let g = [-z / det, -z / det, -y / det, -y.conj() / det];
        let data = ResolventData::new(&sample.h, &e.xi_diag).unwrap();
        for (idx, (a, b)) in [(0, 0), (1, 1), (0, 1), (1, 0)].into_iter().enumerate() {
            assert!((data.green_entry(a, b, z) - g[idx]).norm() < 1e-14);
        }
        let obs = data.observables(z, Complex64::new(0.0, 1.0), (-10.0, 10.0)).unwrap();
        assert!((obs.m_h - g[0]).norm() < 1e-14);
        assert!((obs.tau1 - obs.tau2).norm() < 1e-14);
        assert!(obs.identity_defect < 1e-12);
        assert!((obs.eigvec_sup - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    fn random_block(n: usize, seed: u64, xi_zero: bool) -> BlockAdditiveEnsemble {
        let mut rng = rng_from_seed(seed);
        let s = (0..n).map(|_| crate::rng::complex_normal(&mut rng)).collect();
        let x = (0..n)
            .map(|_| if xi_zero { c(0.0) } else { crate::rng::complex_normal(&mut rng) })
            .collect();
        BlockAdditiveEnsemble::new(s, x, Symmetry::Unitary, seed).unwrap()
    }

    #[test]
    fn block_degenerate_spectra() {
        let mut rng = rng_from_seed(9);
        let e = random_block(6, 1, true);
        let sample = e.sample(&mut rng);
        let got = hermitian_eigenvalues(&sample.h).unwrap();
        let mut want: Vec<f64> = e.sigma_diag.iter().flat_map(|z| [z.norm(), -z.norm()]).collect();
        want.sort_by(f64::total_cmp);
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).abs() < 1e-10);
        }
        let e2 = BlockAdditiveEnsemble::new(vec![c(0.0); 3], vec![c(1.0), c(-2.0), c(0.5)], Symmetry::Orthogonal, 0).unwrap();
        let got = hermitian_eigenvalues(&e2.sample(&mut rng).h).unwrap();
        for (a, b) in got.iter().zip([-2.0, -1.0, -0.5, 0.5, 1.0, 2.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn block_recovers_hermitization() {
        let w = Complex64::new(0.7, -0.4);
        let sigma = vec![0.5, 1.0, 1.5, 2.0, 2.5];
        let single = SingleRingEnsemble::new(sigma.clone(), Symmetry::Unitary, 0).unwrap();
        let block = BlockAdditiveEnsemble::new(sigma.iter().map(|&s| c(s)).collect(), vec![-w; 5], Symmetry::Unitary, 0)
            .unwrap();
        let x = single.sample_x(&mut rng_from_seed(4));
        let h = block.sample(&mut rng_from_seed(4)).h;
        assert!(hermitization(&x, w).unwrap().sub(&h).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn block_resolvent_identities() {
        let e = random_block(12, 3, false);
        let mut rng = rng_from_seed(8);
        for _ in 0..20 {
            let sample = e.sample(&mut rng);
            let z = Complex64::new(0.3, 0.2);
            let a = ResolventData::new(&sample.h, &e.xi_diag).unwrap().observables(z, z, (-1.0, 1.0)).unwrap();
            assert!((a.tau1 - a.tau2).norm() < 1e-10);
            assert!(a.identity_defect < 1e-10);
            let ld: Vec<f64> = hermitian_eigenvalues(&sample.h_dual).unwrap();
            let md: Complex64 = ld.iter().map(|&l| 1.0 / (l - z)).sum::<Complex64>() / ld.len() as f64;
            assert!((md - a.m_h).norm() < 1e-10);
        }
    }

    #[test]
    fn resolvent_matches_direct_inverse_trace() {
        let e = SingleRingEnsemble::new((1..=16).map(|i| i as f64 / 8.0).collect(), Symmetry::Unitary, 0).unwrap();
        let x = e.sample_x(&mut rng_from_seed(1));
        let h = hermitization(&x, c(0.5)).unwrap();
        let eta = 0.3;
        let eig = hermitian_eigenvalues(&h).unwrap();
        let m = m_w(&eig, eta).unwrap();
        assert!(m.re.abs() < 1e-12 && m.im > 0.0);
        // trace of (H − iη)⁻¹ column by column from Gaussian elimination
        let shifted = h.shifted(Complex64::new(0.0, eta));
        let n = shifted.rows();
        let mut tr = Complex64::new(0.0, 0.0);
        for j in 0..n {
            let mut a = shifted.clone();
            let mut b: Vec<Complex64> = (0..n).map(|i| if i == j { c(1.0) } else { c(0.0) }).collect();
            for k in 0..n {
                let p = (k..n).max_by(|&p, &q| a[(p, k)].norm().total_cmp(&a[(q, k)].norm())).unwrap();
                for col in 0..n {
                    let t = a[(k, col)];
                    a[(k, col)] = a[(p, col)];
                    a[(p, col)] = t;
                }
                b.swap(k, p);
                for i in k + 1..n {
                    let l = a[(i, k)] / a[(k, k)];
                    for col in k..n {
                        let t = a[(k, col)];
                        a[(i, col)] -= l * t;
                    }
                    let t = b[k];
                    b[i] -= l * t;
                }
            }
            let mut xs = vec![c(0.0); n];
            for i in (0..n).rev() {
                let s: Complex64 = (i + 1..n).map(|k| a[(i, k)] * xs[k]).sum();
                xs[i] = (b[i] - s) / a[(i, i)];
            }
            tr += xs[j];
        }
        assert!((tr / n as f64 - m).norm() < 1e-12);
        let sv = shifted_singular_values(&x, c(0.5)).unwrap();
        assert!((m_w_from_singular_values(&sv, eta).unwrap() - m).norm() < 1e-12);
        for (s, l) in sv.iter().zip(&eig[16..]) {
            assert!((s - l).abs() < 1e-10);
        }
        for k in 0..16 {
            assert!((eig[k] + eig[31 - k]).abs() < 1e-10);
        }
    }
}
