use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::DiscreteMeasure;
use crate::error::{Error, Result};

/// Finite nonnegative atomic measure (not normalized).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PositiveMeasure {
    pub atoms: Vec<f64>,
    pub weights: Vec<f64>,
}

impl PositiveMeasure {
    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// `∫ dμ(x)/(x − ω)`.
    pub fn cauchy(&self, omega: Complex64) -> Complex64 {
        self.atoms.iter().zip(&self.weights).map(|(x, w)| w / (x - omega)).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.atoms.iter().copied().zip(self.weights.iter().copied())
    }
}

/// Representing measure of `F_μ(ω) − ω` for a symmetric `μ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NevanlinnaRep {
    /// `μ̂`, with `F_μ(ω) − ω = ∫ dμ̂(x)/(x − ω)`.
    pub mu_hat: PositiveMeasure,
    /// `μ̂ − μ̂({0}) δ₀`.
    pub mu_tilde: PositiveMeasure,
    /// `μ̂({0})`; zero when `μ` has an atom at the origin.
    pub r_minus_sq: f64,
}

/// Position tolerance for the zeros of `m_μ`.
const ZERO_TOL: f64 = 1e-13;

/// Nevanlinna representing measure of a symmetric measure.
///
/// `m_μ` is strictly increasing between consecutive atoms and runs from −∞ to
/// +∞, so each gap holds exactly one zero `x₀`; the residue of `F_μ` there is
/// `1/m′_μ(x₀)`.
pub fn nevanlinna_rep(mu: &DiscreteMeasure) -> Result<NevanlinnaRep> {
    if mu.len() < 2 {
        return Err(Error::invalid("Nevanlinna representation needs at least two atoms"));
    }
    if !mu.is_symmetric() {
        return Err(Error::invalid("Nevanlinna representation needs a symmetric measure"));
    }
    let atoms = mu.atoms();
    let n = atoms.len();
    let has_zero_atom = n % 2 == 1;
    // gaps (atoms[k], atoms[k+1]) with atoms[k] >= 0
    let first_nonneg = atoms.partition_point(|&x| x < 0.0);

    let mut positive: Vec<(f64, f64)> = Vec::new();
    for k in first_nonneg..n - 1 {
        let x0 = gap_zero(mu, atoms[k], atoms[k + 1]);
        positive.push((x0, 1.0 / m_prime_real(mu, x0)));
    }

    let r_minus_sq = if has_zero_atom {
        0.0
    } else {
        // the central gap has its zero at the origin by symmetry
        1.0 / m_prime_real(mu, 0.0)
    };

    let mut tilde = PositiveMeasure::default();
    for &(x, w) in positive.iter().rev() {
        tilde.atoms.push(-x);
        tilde.weights.push(w);
    }
    for &(x, w) in &positive {
        tilde.atoms.push(x);
        tilde.weights.push(w);
    }

    let mut hat = PositiveMeasure::default();
    let mid = positive.len();
    hat.atoms.extend_from_slice(&tilde.atoms[..mid]);
    hat.weights.extend_from_slice(&tilde.weights[..mid]);
    if r_minus_sq > 0.0 {
        hat.atoms.push(0.0);
        hat.weights.push(r_minus_sq);
    }
    hat.atoms.extend_from_slice(&tilde.atoms[mid..]);
    hat.weights.extend_from_slice(&tilde.weights[mid..]);

    Ok(NevanlinnaRep { mu_hat: hat, mu_tilde: tilde, r_minus_sq })
}

fn m_real(mu: &DiscreteMeasure, x: f64) -> f64 {
    mu.iter().map(|(a, w)| w / (a - x)).sum()
}

fn m_prime_real(mu: &DiscreteMeasure, x: f64) -> f64 {
    mu.iter().map(|(a, w)| w / ((a - x) * (a - x))).sum()
}

/// Zero of the increasing function `m_μ` on `(a, b)`: Newton steps kept inside
/// a shrinking bracket, with bisection as fallback.
fn gap_zero(mu: &DiscreteMeasure, a: f64, b: f64) -> f64 {
    let (mut lo, mut hi) = (a, b);
    let mut x = 0.5 * (a + b);
    for _ in 0..200 {
        let f = m_real(mu, x);
        if f == 0.0 {
            return x;
        }
        if f < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        if hi - lo <= ZERO_TOL {
            break;
        }
        let step = f / m_prime_real(mu, x);
        if step.abs() <= 0.25 * ZERO_TOL {
            return x;
        }
        let candidate = x - step;
        x = if candidate > lo && candidate < hi { candidate } else { 0.5 * (lo + hi) };
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn bernoulli_has_point_mass_at_zero() {
        let mu = DiscreteMeasure::point_mass(1.0).symmetrize();
        let rep = nevanlinna_rep(&mu).unwrap();
        assert_eq!(rep.mu_hat.atoms, vec![0.0]);
        assert_relative_eq!(rep.mu_hat.weights[0], 1.0, epsilon = 1e-14);
        assert!(rep.mu_tilde.is_empty());
        assert_relative_eq!(rep.r_minus_sq, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn two_point_representation() {
        let mu = DiscreteMeasure::new(vec![1.0, 2.0], vec![0.5, 0.5]).unwrap().symmetrize();
        let rep = nevanlinna_rep(&mu).unwrap();
        let s = 2.5f64.sqrt();
        assert_eq!(rep.mu_hat.atoms.len(), 3);
        assert_relative_eq!(rep.mu_hat.atoms[0], -s, epsilon = 1e-13);
        assert_relative_eq!(rep.mu_hat.atoms[2], s, epsilon = 1e-13);
        assert_relative_eq!(rep.mu_hat.weights[0], 0.45, epsilon = 1e-12);
        assert_relative_eq!(rep.mu_hat.weights[1], 1.6, epsilon = 1e-12);
        assert_relative_eq!(rep.mu_hat.mass(), 2.5, epsilon = 1e-10);
        assert_relative_eq!(rep.mu_tilde.mass(), 0.9, epsilon = 1e-10);
    }

    #[test]
    fn atom_at_origin() {
        let mu = DiscreteMeasure::new(vec![0.0, 1.0], vec![0.5, 0.5]).unwrap().symmetrize();
        let rep = nevanlinna_rep(&mu).unwrap();
        assert_eq!(rep.r_minus_sq, 0.0);
        assert_relative_eq!(rep.mu_hat.mass(), mu.moment(2), epsilon = 1e-10);
        let omega = Complex64::new(0.3, 0.7);
        let lhs = -1.0 / mu.stieltjes(omega).unwrap() - omega;
        let rhs = rep.mu_hat.cauchy(omega);
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(nevanlinna_rep(&DiscreteMeasure::point_mass(0.0)).is_err());
        let asym = DiscreteMeasure::new(vec![1.0, 2.0], vec![0.5, 0.5]).unwrap();
        assert!(nevanlinna_rep(&asym).is_err());
    }

    #[test]
    fn zero_survives_converged_newton_step() {
        let mu = DiscreteMeasure::new(vec![0.1, 1.2730775148030267, 2.422861183195819], vec![0.45472262338987746, 0.15695753387057046, 0.38831984273955206])
            .unwrap()
            .symmetrize();
        let x0 = gap_zero(&mu, 0.1, 1.2730775148030267);
        assert!(m_real(&mu, x0).abs() < 1e-12, "{x0}");
    }
}
