//! Explicit lower and upper bounds on `ω₂(iη)` for `μ^sym ⊞ δ_r^sym`,
//! checked against the solver on a dyadic grid.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{AxisPoint, ImaginaryAxis};
use crate::error::{Error, Result};
use crate::measure::{nevanlinna_rep, DiscreteMeasure};

/// Largest empirical constant accepted by `lower_ok` and `upper_ok`.
pub const DEFAULT_CONSTANT_CAP: f64 = 10.0;

/// Bound margins at one height.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtaRecord {
    pub eta: f64,
    pub im_omega2: f64,
    /// `|ω₂(iη) − iη|`.
    pub deviation: f64,
    /// `σ₋s₋b₋ min{1, σ₋s₋/η}`.
    pub lower_base: f64,
    /// `min{σ₊s₊, r²/η}`.
    pub upper_base: f64,
    /// `r²/η`; infinite at `η = 0`.
    pub trivial_bound: f64,
    pub trivial_ok: bool,
}

/// Extremes of the subordination functions and of `m` over the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AppendixBounds {
    pub max_abs_omega1: f64,
    pub max_abs_omega2: f64,
    pub min_im_omega1: f64,
    pub min_im_omega2: f64,
    pub min_abs_m: f64,
    pub max_abs_m: f64,
}

impl AppendixBounds {
    pub fn ok(&self) -> bool {
        [self.max_abs_omega1, self.max_abs_omega2, self.max_abs_m].iter().all(|v| v.is_finite())
            && self.min_im_omega1 > 0.0
            && self.min_im_omega2 > 0.0
            && self.min_abs_m > 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub r: f64,
    pub r_minus: f64,
    pub r_plus: f64,
    pub s_plus: f64,
    pub sigma_minus: f64,
    pub sigma_plus: f64,
    pub s_minus: f64,
    pub t_minus: f64,
    pub a_minus: f64,
    pub b_minus: f64,
    pub omega_hat_abs: f64,
    pub a_minus_in_range: bool,
    pub omega_hat_ok: bool,
    pub im_omega2_zero: f64,
    /// `(√3/2) σ₋ s₋`.
    pub zero_threshold: f64,
    pub zero_ok: bool,
    pub eta_grid: Vec<EtaRecord>,
    pub best_upper_constant: f64,
    pub best_lower_constant: f64,
    pub best_constant: f64,
    pub constant_cap: f64,
    pub lower_ok: bool,
    pub upper_ok: bool,
    pub appendix: AppendixBounds,
    pub appendix_ok: bool,
}

/// Builds the bound certificate for `μ₁ = μ^sym` and `r ∈ (r₋, r₊)` on the
/// heights `eta_max·2^{-k}`, `k < grid`, plus `η = 0`.
pub fn bulk_bound_certificate(mu1_sym: &DiscreteMeasure, r: f64, eta_max: f64, grid: usize) -> Result<CertificateReport> {
    if !mu1_sym.is_symmetric() {
        return Err(Error::invalid("certificate needs a symmetric measure"));
    }
    if mu1_sym.len() < 3 {
        return Err(Error::invalid("certificate needs a measure supported on at least three points"));
    }
    if !(eta_max > 0.0) || grid == 0 {
        return Err(Error::invalid("certificate needs eta_max > 0 and a nonempty grid"));
    }
    let rep = nevanlinna_rep(mu1_sym)?;
    let r_minus_sq = rep.r_minus_sq;
    let r_plus_sq = mu1_sym.moment(2);
    let (r_minus, r_plus) = (r_minus_sq.sqrt(), r_plus_sq.sqrt());
    if !(r > r_minus && r < r_plus) {
        return Err(Error::domain(format!(
            "the bounds hold only for r strictly inside ({r_minus}, {r_plus}); got r = {r}"
        )));
    }
    let r2 = r * r;
    let s_plus = mu1_sym.support_stats().s_plus;
    let sigma_minus = ((r2 - r_minus_sq) / (r_plus_sq - r_minus_sq)).sqrt();
    let sigma_plus = (r_plus_sq / (r_plus_sq - r2)).sqrt();

    // μ̃([0, x)) ≤ (r² − r₋²)/8, half-open
    let threshold = (r2 - r_minus_sq) / 8.0;
    let mut cumulative = 0.0;
    let mut s_minus = s_plus;
    for (x, w) in rep.mu_tilde.iter().filter(|(x, _)| *x > 0.0) {
        cumulative += w;
        if cumulative > threshold {
            s_minus = x;
            break;
        }
    }
    let a_minus: f64 = rep
        .mu_tilde
        .iter()
        .filter(|(x, _)| x.abs() >= s_minus)
        .map(|(x, w)| w / (x * x))
        .sum();
    let t_minus = sigma_minus * s_minus;
    let b_minus = 1f64.min(a_minus).min(a_minus * t_minus * t_minus / r2);
    let omega_hat_abs = ((r2 - r_minus_sq) / a_minus).sqrt();
    let a_lo = 0.75 * (r2 - r_minus_sq) / (s_plus * s_plus);
    let a_hi = (r_plus_sq - r_minus_sq) / (s_minus * s_minus);
    let slack = 1e-12 * a_hi.abs().max(1.0);
    let a_minus_in_range = a_minus >= a_lo - slack && a_minus <= a_hi + slack;
    let omega_hat_ok = omega_hat_abs >= t_minus * (1.0 - 1e-12);

    let axis = ImaginaryAxis::new(mu1_sym)?;
    let at_zero = axis.solve(r, 0.0)?;
    let zero_threshold = 0.5 * 3f64.sqrt() * t_minus;

    let mut etas: Vec<f64> = (0..grid).map(|k| eta_max * 0.5f64.powi(k as i32)).collect();
    etas.push(0.0);
    let points: Vec<AxisPoint> = etas.par_iter().map(|&eta| axis.solve(r, eta)).collect::<Result<_>>()?;

    let upper_scale = sigma_plus * s_plus;
    let mut records = Vec::with_capacity(points.len());
    let mut best_upper: f64 = 0.0;
    let mut best_lower: f64 = 0.0;
    let mut appendix = AppendixBounds {
        max_abs_omega1: 0.0,
        max_abs_omega2: 0.0,
        min_im_omega1: f64::INFINITY,
        min_im_omega2: f64::INFINITY,
        min_abs_m: f64::INFINITY,
        max_abs_m: 0.0,
    };
    for pt in &points {
        let eta = pt.eta;
        let deviation = pt.y - eta;
        let trivial_bound = if eta > 0.0 { r2 / eta } else { f64::INFINITY };
        let upper_base = upper_scale.min(trivial_bound);
        let lower_base = if eta > 0.0 { t_minus * b_minus * 1f64.min(t_minus / eta) } else { t_minus * b_minus };
        best_upper = best_upper.max(deviation / upper_base);
        best_lower = best_lower.max(lower_base / deviation);
        let (w1, w2, m) = (pt.omega1(), pt.omega2(), pt.m());
        appendix.max_abs_omega1 = appendix.max_abs_omega1.max(w1.norm());
        appendix.max_abs_omega2 = appendix.max_abs_omega2.max(w2.norm());
        appendix.min_im_omega1 = appendix.min_im_omega1.min(w1.im);
        appendix.min_im_omega2 = appendix.min_im_omega2.min(w2.im);
        appendix.min_abs_m = appendix.min_abs_m.min(m.norm());
        appendix.max_abs_m = appendix.max_abs_m.max(m.norm());
        records.push(EtaRecord {
            eta,
            im_omega2: pt.y,
            deviation,
            lower_base,
            upper_base,
            trivial_bound,
            trivial_ok: deviation <= trivial_bound,
        });
    }
    let trivial_all = records.iter().all(|r| r.trivial_ok);
    let cap = DEFAULT_CONSTANT_CAP;
    Ok(CertificateReport {
        r,
        r_minus,
        r_plus,
        s_plus,
        sigma_minus,
        sigma_plus,
        s_minus,
        t_minus,
        a_minus,
        b_minus,
        omega_hat_abs,
        a_minus_in_range,
        omega_hat_ok,
        im_omega2_zero: at_zero.y,
        zero_threshold,
        zero_ok: at_zero.y > zero_threshold,
        eta_grid: records,
        best_upper_constant: best_upper,
        best_lower_constant: best_lower,
        best_constant: best_upper.max(best_lower),
        constant_cap: cap,
        lower_ok: best_lower.is_finite() && best_lower <= cap,
        upper_ok: trivial_all && best_upper <= cap,
        appendix_ok: appendix.ok(),
        appendix,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn two_point_certificate() {
        let mu = DiscreteMeasure::new(vec![1.0, 2.0], vec![0.5, 0.5]).unwrap().symmetrize();
        let c = bulk_bound_certificate(&mu, 1.4, 10.0, 24).unwrap();
        assert_relative_eq!(c.s_minus, 2.5f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(c.sigma_minus, 0.4f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(c.sigma_plus, (2.5f64 / 0.54).sqrt(), epsilon = 1e-12);
        assert_relative_eq!(c.a_minus, 0.36, epsilon = 1e-12);
        assert_relative_eq!(c.t_minus, 1.0, epsilon = 1e-12);
        assert_relative_eq!(c.b_minus, 0.36 / 1.96, epsilon = 1e-12);
        assert_relative_eq!(c.omega_hat_abs, 1.0, epsilon = 1e-12);
        assert_relative_eq!(c.im_omega2_zero, (5.0f64 / 3.0).sqrt(), epsilon = 1e-10);
        assert!(c.zero_ok && c.lower_ok && c.upper_ok && c.appendix_ok);
        assert!(c.a_minus_in_range && c.omega_hat_ok);
    }

    #[test]
    fn boundary_radius_is_rejected() {
        let mu = DiscreteMeasure::new(vec![1.0, 2.0], vec![0.5, 0.5]).unwrap().symmetrize();
        let err = bulk_bound_certificate(&mu, 2.5f64.sqrt(), 10.0, 8).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }
}
