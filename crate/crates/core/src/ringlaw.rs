//! Log-potential of `μ_{Σ,s} = μ_Σ^sym ⊞ δ_s^sym` and the radial density of
//! the single-ring law, `ρ(s) = (L″(s) + L′(s)/s)/(2π)`.
//!
//! `L(s) = ∫ log|u| dμ_{Σ,s}(u)` is split at height `K`:
//! `L = ∫ log|u − iK| dμ − ∫₀^K Im m(iη) dη`. The first term is expanded in
//! the even moments of `μ_{Σ,s}`; the second is integrated numerically up to
//! `η₀` and by its large-`η` series beyond.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::freeconv::ImaginaryAxis;
use crate::measure::{DiscreteMeasure, Radii};
use crate::numeric::{gauss_legendre, integrate_adaptive};

pub const DEFAULT_QUAD_TOL: f64 = 1e-10;
const MAX_PANELS: usize = 4000;

/// Even moments `(m₂, m₄, m₆)` of `μ ⊞ δ_s^sym` for symmetric `μ`, through
/// free cumulants.
fn convolved_moments(m2: f64, m4: f64, m6: f64, s: f64) -> (f64, f64, f64) {
    let k2 = m2;
    let k4 = m4 - 2.0 * m2 * m2;
    let k6 = m6 - 6.0 * k4 * k2 - 5.0 * k2 * k2 * k2;
    let s2 = s * s;
    let (c2, c4, c6) = (k2 + s2, k4 - s2 * s2, k6 + 2.0 * s2 * s2 * s2);
    (c2, c4 + 2.0 * c2 * c2, c6 + 6.0 * c4 * c2 + 5.0 * c2 * c2 * c2)
}

/// Evaluator of `L(s)` for a fixed singular-value profile.
#[derive(Debug, Clone)]
pub struct LogPotential {
    axis: ImaginaryAxis,
    m2: f64,
    m4: f64,
    m6: f64,
    s_plus: f64,
    radii: Radii,
    k: Option<f64>,
    quad_tol: f64,
}

/// One point of the radial density computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RingDensityPoint {
    pub s: f64,
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "dL")]
    pub dl: f64,
    #[serde(rename = "d2L")]
    pub d2l: f64,
    pub rho: f64,
}

/// `L` tabulated on a radial grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialPotentialProfile {
    pub s_grid: Vec<f64>,
    #[serde(rename = "L_values")]
    pub l_values: Vec<f64>,
    #[serde(rename = "K")]
    pub k: f64,
    pub m2_sigma: f64,
    pub quad_tol: f64,
}

impl LogPotential {
    /// Accepts either the singular-value measure on `[0, ∞)` or its symmetrization.
    pub fn new(mu_sigma: &DiscreteMeasure, quad_tol: f64) -> Result<Self> {
        let (sym, radii) = if mu_sigma.is_nonnegative() {
            (mu_sigma.symmetrize(), mu_sigma.radii()?)
        } else if mu_sigma.is_symmetric() {
            let axis = ImaginaryAxis::new(mu_sigma)?;
            let radii = Radii { r_minus: axis.r_minus(), r_plus: axis.r_plus(), degenerate: mu_sigma.len() < 3 };
            (mu_sigma.clone(), radii)
        } else {
            return Err(Error::invalid("singular-value measure must be nonnegative or symmetric"));
        };
        if !(quad_tol > 0.0) {
            return Err(Error::invalid(format!("quad_tol must be positive, got {quad_tol}")));
        }
        let axis = ImaginaryAxis::new(&sym)?;
        Ok(LogPotential {
            axis,
            m2: sym.moment(2),
            m4: sym.moment(4),
            m6: sym.moment(6),
            s_plus: sym.support_stats().s_plus,
            radii,
            k: None,
            quad_tol,
        })
    }

    /// Fixes the split height instead of choosing it per radius.
    pub fn with_k(mut self, k: f64) -> Self {
        self.k = Some(k);
        self
    }

    pub fn radii(&self) -> Radii {
        self.radii
    }

    pub fn s_plus(&self) -> f64 {
        self.s_plus
    }

    pub fn m2_sigma(&self) -> f64 {
        self.m2
    }

    pub fn quad_tol(&self) -> f64 {
        self.quad_tol
    }

    /// Split height used at radius `s`: the fixed one if set, otherwise
    /// `max(100, 20 s₊, 10 s)`.
    pub fn k_for(&self, s: f64) -> f64 {
        self.k.unwrap_or_else(|| 100f64.max(20.0 * self.s_plus).max(10.0 * s))
    }

    /// `Im m_{Σ,s}(iη)`.
    pub fn im_m(&self, s: f64, eta: f64) -> Result<f64> {
        Ok(self.axis.solve(s, eta)?.im_m())
    }

    /// `L(s)` at split height `k`.
    pub fn eval_with_k(&self, s: f64, k: f64) -> Result<f64> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::domain(format!("log-potential needs s > 0, got {s}")));
        }
        if !(k >= 10.0 * self.s_plus.max(s)) {
            return Err(Error::domain(format!(
                "split height K = {k} must be at least 10 max(s_plus, s) = {}",
                10.0 * self.s_plus.max(s)
            )));
        }
        let (c2, c4, c6) = convolved_moments(self.m2, self.m4, self.m6, s);
        let k2 = k * k;
        let t1 = k.ln() + 0.5 * (c2 / k2 - c4 / (2.0 * k2 * k2) + c6 / (3.0 * k2 * k2 * k2));

        let eta0 = (10.0 * (self.s_plus + s)).min(k);
        let quad = integrate_adaptive(|eta| self.im_m(s, eta), 0.0, eta0, self.quad_tol, MAX_PANELS)?;
        let tail = if eta0 < k {
            let (a2, b2) = (eta0 * eta0, k2);
            (k / eta0).ln() - c2 / 2.0 * (1.0 / a2 - 1.0 / b2) + c4 / 4.0 * (1.0 / (a2 * a2) - 1.0 / (b2 * b2))
                - c6 / 6.0 * (1.0 / (a2 * a2 * a2) - 1.0 / (b2 * b2 * b2))
        } else {
            0.0
        };
        Ok(t1 - quad.value - tail)
    }

    pub fn eval(&self, s: f64) -> Result<f64> {
        self.eval_with_k(s, self.k_for(s))
    }

    /// `L` on a radial grid, evaluated in parallel.
    pub fn profile(&self, s_grid: &[f64]) -> Result<RadialPotentialProfile> {
        let k = self.k.unwrap_or_else(|| s_grid.iter().fold(self.k_for(0.0), |acc, &s| acc.max(self.k_for(s))));
        let l_values = s_grid.par_iter().map(|&s| self.eval_with_k(s, k)).collect::<Result<Vec<_>>>()?;
        Ok(RadialPotentialProfile {
            s_grid: s_grid.to_vec(),
            l_values,
            k,
            m2_sigma: self.m2,
            quad_tol: self.quad_tol,
        })
    }

    /// Default finite-difference step: 1% of the ring width, at most `s/4`.
    pub fn default_step(&self, s: f64) -> f64 {
        (1e-2 * (self.radii.r_plus - self.radii.r_minus)).min(0.25 * s)
    }

    /// `L`, its radial derivatives and `ρ` at `s` with 5-point stencils of step `h`.
    pub fn density_point(&self, s: f64, h: f64) -> Result<RingDensityPoint> {
        if !(h > 0.0) || s - 2.0 * h <= 0.0 {
            return Err(Error::domain(format!("need h > 0 and s > 2h, got s = {s}, h = {h}")));
        }
        let k = self.k_for(s + 2.0 * h);
        let v = [-2.0, -1.0, 0.0, 1.0, 2.0]
            .iter()
            .map(|j| self.eval_with_k(s + j * h, k))
            .collect::<Result<Vec<_>>>()?;
        let dl = (v[0] - 8.0 * v[1] + 8.0 * v[3] - v[4]) / (12.0 * h);
        let d2l = (-v[0] + 16.0 * v[1] - 30.0 * v[2] + 16.0 * v[3] - v[4]) / (12.0 * h * h);
        Ok(RingDensityPoint { s, l: v[2], dl, d2l, rho: (d2l + dl / s) / (2.0 * PI) })
    }

    /// Density points on a radial grid with the default step, in parallel.
    pub fn density_profile(&self, s_grid: &[f64]) -> Result<Vec<RingDensityPoint>> {
        s_grid.par_iter().map(|&s| self.density_point(s, self.default_step(s))).collect()
    }

    /// `∫ ρ(s) 2πs ds` over `[r₋ + τ, r₊ − τ]` by Gauss-Legendre on `n_radii` nodes.
    pub fn ring_mass(&self, tau: f64, n_radii: usize) -> Result<f64> {
        if !(tau >= 0.0) {
            return Err(Error::domain(format!("tau must be nonnegative, got {tau}")));
        }
        if n_radii == 0 {
            return Err(Error::invalid("ring_mass needs at least one radius"));
        }
        let lo = self.radii.r_minus + tau;
        let hi = self.radii.r_plus - tau;
        if lo >= hi {
            return Ok(0.0);
        }
        let (nodes, weights) = gauss_legendre(n_radii);
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        let terms = nodes
            .par_iter()
            .zip(weights.par_iter())
            .map(|(&x, &w)| {
                let s = mid + half * x;
                let mut h = self.default_step(s);
                if tau > 0.0 {
                    h = h.min(0.5 * tau);
                }
                let rho = self.density_point(s, h)?.rho;
                Ok(w * half * 2.0 * PI * s * rho)
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(terms.iter().sum())
    }
}

/// `L(s)` for `mu_sigma` at split height `k`.
pub fn log_potential(mu_sigma: &DiscreteMeasure, s: f64, k: f64, quad_tol: f64) -> Result<f64> {
    LogPotential::new(mu_sigma, quad_tol)?.eval_with_k(s, k)
}

/// `ρ(s)` with step `h` and split height `k`.
pub fn ring_density(mu_sigma: &DiscreteMeasure, s: f64, h: f64, k: f64, quad_tol: f64) -> Result<f64> {
    Ok(LogPotential::new(mu_sigma, quad_tol)?.with_k(k).density_point(s, h)?.rho)
}

/// Mass of the single-ring law in the annulus `[r₋ + τ, r₊ − τ]`.
pub fn ring_mass(mu_sigma: &DiscreteMeasure, tau: f64, n_radii: usize) -> Result<f64> {
    LogPotential::new(mu_sigma, DEFAULT_QUAD_TOL)?.ring_mass(tau, n_radii)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn two_point() -> DiscreteMeasure {
        DiscreteMeasure::new(vec![1.0, 2.0], vec![0.5, 0.5]).unwrap()
    }

    #[test]
    fn moments_of_delta_convolution() {
        // μ = δ₀: μ ⊞ δ_s^sym = δ_s^sym
        let (a, b, c) = convolved_moments(0.0, 0.0, 0.0, 1.5);
        assert_relative_eq!(a, 1.5f64.powi(2), epsilon = 1e-14);
        assert_relative_eq!(b, 1.5f64.powi(4), epsilon = 1e-13);
        assert_relative_eq!(c, 1.5f64.powi(6), epsilon = 1e-12);
        // Bernoulli ⊞ Bernoulli is arcsine on [−2, 2]: moments 2, 6, 20
        let (a, b, c) = convolved_moments(1.0, 1.0, 1.0, 1.0);
        assert_relative_eq!(a, 2.0);
        assert_relative_eq!(b, 6.0);
        assert_relative_eq!(c, 20.0);
    }

    #[test]
    fn potential_is_log_outside_and_k_independent() {
        let lp = LogPotential::new(&two_point(), 1e-11).unwrap();
        let a = lp.eval_with_k(1.0, 40.0).unwrap();
        let b = lp.eval_with_k(1.0, 400.0).unwrap();
        assert!((a - b).abs() < 1e-8, "{a} {b}");
        let far = lp.eval(16.0).unwrap();
        assert!((far - 16f64.ln()).abs() < 5e-3);
        assert!(lp.eval_with_k(1.0, 5.0).is_err());
    }

    #[test]
    fn density_vanishes_outside_ring() {
        let lp = LogPotential::new(&two_point(), 1e-11).unwrap();
        let outer = lp.density_point(2.5, 0.01).unwrap();
        assert!(outer.rho.abs() < 1e-4, "{outer:?}");
        let inner = lp.density_point(0.6, 0.01).unwrap();
        assert!(inner.rho.abs() < 1e-4, "{inner:?}");
        let bulk = lp.density_point(1.4, 0.003).unwrap();
        assert!(bulk.rho > 0.1, "{bulk:?}");
    }

    #[test]
    fn empty_annulus_has_no_mass() {
        assert_eq!(ring_mass(&two_point(), 0.2, 8).unwrap(), 0.0);
    }
}
