//! Free additive convolution through the subordination equations
//! `F₁(ω₂) = F₂(ω₁) = ω₁ + ω₂ − z`.

mod certificate;

pub use certificate::{
    bulk_bound_certificate, AppendixBounds, CertificateReport, EtaRecord, DEFAULT_CONSTANT_CAP,
};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;
use crate::numeric::{brent, neville_to_zero};

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 10_000;

/// Solution of the subordination system at one spectral point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubordinationState {
    pub z: Complex64,
    pub omega1: Complex64,
    pub omega2: Complex64,
    /// Stieltjes transform of the convolution at `z`.
    pub m: Complex64,
    /// `F = −1/m`.
    #[serde(rename = "F")]
    pub f: Complex64,
    pub residual: f64,
    pub iterations: usize,
}

/// `h(ω) = F_μ(ω) − ω` and its derivative.
fn h_and_derivative(mu: &DiscreteMeasure, omega: Complex64) -> (Complex64, Complex64) {
    let (m, dm) = mu.stieltjes_with_derivative(omega);
    let f = -1.0 / m;
    let df = dm / (m * m);
    (f - omega, df - 1.0)
}

fn require_nondegenerate(mu: &DiscreteMeasure, label: &str) -> Result<()> {
    if mu.len() < 2 {
        return Err(Error::invalid(format!("{label} is a point mass; subordination needs at least two atoms")));
    }
    Ok(())
}

/// Fixed-point iteration `ω ← T(ω)` interleaved with Newton steps on a
/// residual `R` sharing the same zero. `T` maps the upper half-plane into
/// `Im ω ≥ Im z` and its iterates converge, so it carries the global phase;
/// Newton is only kept when it at least halves `|R|`. After a rejected Newton
/// step the number of plain map steps before the next attempt doubles.
struct HybridSolver<'a> {
    z: Complex64,
    map: &'a dyn Fn(Complex64) -> Complex64,
    residual: &'a dyn Fn(Complex64) -> (Complex64, Complex64),
}

impl HybridSolver<'_> {
    fn admissible(&self, omega: Complex64) -> bool {
        omega.re.is_finite() && omega.im.is_finite() && omega.im > 0.5 * self.z.im
    }

    fn run(&self, start: Complex64, tol: f64, max_iter: usize, context: &str) -> Result<(Complex64, usize)> {
        let mut omega = start;
        let (mut r, mut dr) = (self.residual)(omega);
        let mut burst = 1usize;
        let mut plain_left = 0usize;
        for it in 0..max_iter {
            let scale = 1.0 + omega.norm() + self.z.norm();
            if r.norm() <= tol.max(32.0 * f64::EPSILON * scale) {
                return Ok((omega, it));
            }
            if plain_left == 0 && dr.norm() > 0.0 {
                let candidate = omega - r / dr;
                if self.admissible(candidate) {
                    let (rc, drc) = (self.residual)(candidate);
                    if rc.norm() <= 0.5 * r.norm() {
                        omega = candidate;
                        r = rc;
                        dr = drc;
                        continue;
                    }
                }
                plain_left = burst;
                burst = (2 * burst).min(256);
            }
            omega = (self.map)(omega);
            (r, dr) = (self.residual)(omega);
            plain_left = plain_left.saturating_sub(1);
        }
        Err(Error::NoConvergence { context: context.into(), iterations: max_iter, residual: r.norm() })
    }
}

/// Solves the subordination system for `μ₁ ⊞ μ₂` at `Im z > 0`.
pub fn solve_phi_system(
    mu1: &DiscreteMeasure,
    mu2: &DiscreteMeasure,
    z: Complex64,
    tol: f64,
    max_iter: usize,
) -> Result<SubordinationState> {
    solve_phi_system_from(mu1, mu2, z, tol, max_iter, None)
}

/// As [`solve_phi_system`], optionally starting from a previous `ω₂`.
pub fn solve_phi_system_from(
    mu1: &DiscreteMeasure,
    mu2: &DiscreteMeasure,
    z: Complex64,
    tol: f64,
    max_iter: usize,
    warm_omega2: Option<Complex64>,
) -> Result<SubordinationState> {
    if !(z.im > 0.0) {
        return Err(Error::domain(format!("subordination needs Im z > 0, got {z}")));
    }
    require_nondegenerate(mu1, "mu1")?;
    require_nondegenerate(mu2, "mu2")?;
    let map = |w2: Complex64| {
        let w1 = z + h_and_derivative(mu1, w2).0;
        z + h_and_derivative(mu2, w1).0
    };
    let residual = |w2: Complex64| {
        let (h1, dh1) = h_and_derivative(mu1, w2);
        let w1 = z + h1;
        let (h2, dh2) = h_and_derivative(mu2, w1);
        (z + h2 - w2, dh2 * dh1 - 1.0)
    };
    let solver = HybridSolver { z, map: &map, residual: &residual };
    let start = warm_omega2
        .filter(|w| solver.admissible(*w))
        .unwrap_or_else(|| z + Complex64::i() * mu2.moment(2).sqrt().max(1e-3));
    let (omega2, iterations) = solver.run(start, tol, max_iter, "subordination system")?;
    Ok(finish_state(mu1, z, omega2, |w1| z + h_and_derivative(mu2, w1).0, iterations))
}

fn finish_state(
    mu1: &DiscreteMeasure,
    z: Complex64,
    omega2: Complex64,
    second_map: impl Fn(Complex64) -> Complex64,
    iterations: usize,
) -> SubordinationState {
    let m = mu1.stieltjes_unchecked(omega2);
    let f = -1.0 / m;
    let omega1 = z + f - omega2;
    let r1 = f - omega2 + z - omega1;
    let r2 = second_map(omega1) - omega2;
    SubordinationState { z, omega1, omega2, m, f, residual: r1.norm().max(r2.norm()), iterations }
}

/// Symmetric measure prepared for evaluations on the imaginary axis, where
/// only `x²` matters.
#[derive(Debug, Clone)]
pub struct ImaginaryAxis {
    x2: Vec<f64>,
    w: Vec<f64>,
    zero_weight: f64,
    r_minus_sq: f64,
    r_plus_sq: f64,
}

/// Solution of the `μ ⊞ δ_r^sym` equation at `z = iη`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisPoint {
    pub eta: f64,
    pub r: f64,
    /// `Im ω₂(iη)`.
    pub y: f64,
    /// `Σ w/(x² + y²)`.
    pub p: f64,
    /// `Σ w x²/(x² + y²)`.
    pub q: f64,
}

impl AxisPoint {
    /// `Im m(iη) = y·p`.
    pub fn im_m(&self) -> f64 {
        self.y * self.p
    }

    pub fn omega2(&self) -> Complex64 {
        Complex64::new(0.0, self.y)
    }

    pub fn omega1(&self) -> Complex64 {
        Complex64::new(0.0, self.r * self.r / (self.y - self.eta))
    }

    pub fn m(&self) -> Complex64 {
        Complex64::new(0.0, self.im_m())
    }
}

impl ImaginaryAxis {
    pub fn new(mu_sym: &DiscreteMeasure) -> Result<Self> {
        if mu_sym.len() < 2 {
            return Err(Error::invalid("measure must have at least two atoms"));
        }
        if !mu_sym.is_symmetric() {
            return Err(Error::invalid("measure must be symmetric"));
        }
        let mut x2 = Vec::new();
        let mut w = Vec::new();
        let mut zero_weight = 0.0;
        for (x, wt) in mu_sym.iter() {
            if x == 0.0 {
                zero_weight = wt;
            } else if x > 0.0 {
                x2.push(x * x);
                w.push(2.0 * wt);
            }
        }
        let r_plus_sq = x2.iter().zip(&w).map(|(a, b)| a * b).sum();
        let r_minus_sq = if zero_weight > 0.0 {
            0.0
        } else {
            1.0 / x2.iter().zip(&w).map(|(a, b)| b / a).sum::<f64>()
        };
        Ok(ImaginaryAxis { x2, w, zero_weight, r_minus_sq, r_plus_sq })
    }

    pub fn r_minus(&self) -> f64 {
        self.r_minus_sq.sqrt()
    }

    pub fn r_plus(&self) -> f64 {
        self.r_plus_sq.sqrt()
    }

    /// `(p, q)` at height `y`.
    pub fn pq(&self, y: f64) -> (f64, f64) {
        let y2 = y * y;
        let mut p = 0.0;
        let mut q = 0.0;
        for (&a, &b) in self.x2.iter().zip(&self.w) {
            let t = b / (a + y2);
            p += t;
            q += t * a;
        }
        if self.zero_weight > 0.0 {
            p += self.zero_weight / y2;
        }
        (p, q)
    }

    /// Solves `(h(y) + η)(y − η) = r²` for `y = Im ω₂(iη) > η`, where
    /// `h(y) = Im(F(iy) − iy) = q/(y p)`.
    pub fn solve(&self, r: f64, eta: f64) -> Result<AxisPoint> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::domain(format!("r must be positive, got {r}")));
        }
        if !(eta >= 0.0 && eta.is_finite()) {
            return Err(Error::domain(format!("eta must be nonnegative, got {eta}")));
        }
        let r2 = r * r;
        if eta == 0.0 && !(r2 > self.r_minus_sq && r2 < self.r_plus_sq) {
            return Err(Error::domain(format!(
                "at z = 0 the radius r = {r} must lie strictly inside ({}, {})",
                self.r_minus(),
                self.r_plus()
            )));
        }
        let phi = |y: f64| -> f64 {
            let (p, q) = self.pq(y);
            if eta == 0.0 {
                q / p - r2
            } else {
                (q / p) * (y - eta) / y + eta * (y - eta) - r2
            }
        };
        let mut hi = eta + r;
        let mut doublings = 0;
        while phi(hi) <= 0.0 {
            hi = eta + 2.0 * (hi - eta);
            doublings += 1;
            if doublings > 200 {
                return Err(Error::NoConvergence {
                    context: "bracketing Im omega2 on the imaginary axis".into(),
                    iterations: doublings,
                    residual: phi(hi).abs(),
                });
            }
        }
        let y = brent(phi, eta, hi, 4.0 * f64::EPSILON * hi, 300)?;
        let (p, q) = self.pq(y);
        Ok(AxisPoint { eta, r, y, p, q })
    }
}

/// Solves the `μ₁ ⊞ δ_r^sym` subordination equation
/// `F₁(ω₂) − ω₂ = −z − r²/(ω₂ − z)`, with `ω₁ = −r²/(ω₂ − z)`.
///
/// On the imaginary axis, including `z = 0`, `ω₂` is purely imaginary and a
/// monotone scalar equation is solved instead.
pub fn solve_delta_conv(mu1_sym: &DiscreteMeasure, r: f64, z: Complex64, tol: f64) -> Result<SubordinationState> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::domain(format!("r must be positive, got {r}")));
    }
    if !mu1_sym.is_symmetric() {
        return Err(Error::invalid("solve_delta_conv needs a symmetric measure"));
    }
    require_nondegenerate(mu1_sym, "mu1")?;
    if z.re == 0.0 && z.im >= 0.0 {
        let pt = ImaginaryAxis::new(mu1_sym)?.solve(r, z.im)?;
        return Ok(axis_state(mu1_sym, pt));
    }
    if !(z.im > 0.0) {
        return Err(Error::domain(format!("solve_delta_conv needs Im z > 0 or z on the imaginary axis, got {z}")));
    }
    let r2 = r * r;
    let map = |w: Complex64| z - r2 / (z + h_and_derivative(mu1_sym, w).0);
    let residual = |w: Complex64| {
        let (h, dh) = h_and_derivative(mu1_sym, w);
        let d = w - z;
        (h + z + r2 / d, dh - r2 / (d * d))
    };
    let solver = HybridSolver { z, map: &map, residual: &residual };
    let start = z + Complex64::i() * r;
    let (omega2, iterations) = solver.run(start, tol, DEFAULT_MAX_ITER, "delta convolution")?;
    let m = mu1_sym.stieltjes_unchecked(omega2);
    let f = -1.0 / m;
    let omega1 = -r2 / (omega2 - z);
    let residual = (f - omega2 + z + r2 / (omega2 - z)).norm();
    Ok(SubordinationState { z, omega1, omega2, m, f, residual, iterations })
}

fn axis_state(mu1_sym: &DiscreteMeasure, pt: AxisPoint) -> SubordinationState {
    let z = Complex64::new(0.0, pt.eta);
    let omega2 = pt.omega2();
    let omega1 = pt.omega1();
    let m = pt.m();
    let f = -1.0 / m;
    let residual = if pt.y > 0.0 && pt.eta > 0.0 {
        let r2 = pt.r * pt.r;
        let g = -1.0 / mu1_sym.stieltjes_unchecked(omega2) - omega2 + z + r2 / (omega2 - z);
        g.norm()
    } else {
        let lhs = (pt.q / pt.p) * (pt.y - pt.eta) / pt.y.max(f64::MIN_POSITIVE);
        (lhs + pt.eta * (pt.y - pt.eta) - pt.r * pt.r).abs()
    };
    SubordinationState { z, omega1, omega2, m, f, residual, iterations: 0 }
}

/// Boundary value of the density of `μ₁ ⊞ μ₂` at `E`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryDensity {
    pub density: f64,
    pub error_estimate: f64,
    /// False when successive extrapolation corrections fail to shrink.
    pub reliable: bool,
    /// `(η, Im m(E + iη)/π)` along the sequence.
    pub samples: Vec<(f64, f64)>,
}

/// Default height sequence for [`boundary_density`].
pub fn default_eta_seq() -> Vec<f64> {
    (0..6).map(|k| 0.08 * 0.5f64.powi(k)).collect()
}

/// Polynomial extrapolation of `Im m(E + iη)/π` to `η = 0`.
pub fn boundary_density(
    mu1: &DiscreteMeasure,
    mu2: &DiscreteMeasure,
    energy: f64,
    eta_seq: &[f64],
) -> Result<BoundaryDensity> {
    if eta_seq.len() < 2 {
        return Err(Error::invalid("eta_seq needs at least two heights"));
    }
    if eta_seq.windows(2).any(|p| p[1] >= p[0]) || eta_seq.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::invalid("eta_seq must be positive and strictly decreasing"));
    }
    let mut warm = None;
    let mut samples = Vec::with_capacity(eta_seq.len());
    for &eta in eta_seq {
        let z = Complex64::new(energy, eta);
        let st = solve_phi_system_from(mu1, mu2, z, DEFAULT_TOL, DEFAULT_MAX_ITER, warm)?;
        warm = Some(st.omega2);
        samples.push((eta, st.m.im / std::f64::consts::PI));
    }
    let xs: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let diag = neville_to_zero(&xs, &ys);
    let corrections: Vec<f64> = diag.windows(2).map(|p| (p[1] - p[0]).abs()).collect();
    let n = corrections.len();
    let error_estimate = corrections[n - 1];
    let tiny = 1e-14;
    let reliable = corrections.windows(2).all(|c| c[1] <= c[0] + tiny);
    Ok(BoundaryDensity { density: diag[diag.len() - 1], error_estimate, reliable, samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn bernoulli() -> DiscreteMeasure {
        DiscreteMeasure::point_mass(1.0).symmetrize()
    }

    fn two_point_sym() -> DiscreteMeasure {
        DiscreteMeasure::new(vec![1.0, 2.0], vec![0.5, 0.5]).unwrap().symmetrize()
    }

    #[test]
    fn golden_ratio_both_routes() {
        let golden = 0.5 * (1.0 + 5f64.sqrt());
        let i = Complex64::i();
        let st = solve_phi_system(&bernoulli(), &bernoulli(), i, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        assert_relative_eq!(st.omega2.im, golden, epsilon = 1e-10);
        assert_relative_eq!(st.m.im, 1.0 / 5f64.sqrt(), epsilon = 1e-10);
        let st = solve_delta_conv(&bernoulli(), 1.0, i, DEFAULT_TOL).unwrap();
        assert_eq!(st.omega2.re, 0.0);
        assert_relative_eq!(st.omega2.im, golden, epsilon = 1e-12);
        assert_relative_eq!(st.m.im, 1.0 / 5f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn arcsine_off_axis() {
        let z = Complex64::new(0.7, 0.3);
        let st = solve_phi_system(&bernoulli(), &bernoulli(), z, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        let exact = -1.0 / (z * z - 4.0).sqrt();
        assert!((st.m - exact).norm() < 1e-11, "{} vs {}", st.m, exact);
        assert!(st.residual <= 1e-11);
    }

    #[test]
    fn value_at_zero_for_two_point() {
        let st = solve_delta_conv(&two_point_sym(), 1.4, Complex64::new(0.0, 0.0), DEFAULT_TOL).unwrap();
        assert_relative_eq!(st.omega2.im, (5.0f64 / 3.0).sqrt(), epsilon = 1e-12);
        let y = st.omega2.im;
        assert_relative_eq!(st.m.im, y / (y * y + 1.96), epsilon = 1e-12);
        assert!(solve_delta_conv(&two_point_sym(), 1.6, Complex64::new(0.0, 0.0), DEFAULT_TOL).is_err());
        assert!(solve_delta_conv(&two_point_sym(), 0.0, Complex64::i(), DEFAULT_TOL).is_err());
    }

    #[test]
    fn off_axis_delta_matches_general_solver() {
        let mu = two_point_sym();
        let delta = DiscreteMeasure::point_mass(1.3).symmetrize();
        for z in [Complex64::new(0.4, 0.05), Complex64::new(-2.1, 0.5), Complex64::new(3.0, 1e-3)] {
            let a = solve_delta_conv(&mu, 1.3, z, DEFAULT_TOL).unwrap();
            let b = solve_phi_system(&mu, &delta, z, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
            assert!((a.omega2 - b.omega2).norm() < 1e-9);
            assert!((a.m - b.m).norm() < 1e-9);
        }
    }

    #[test]
    fn arcsine_boundary_density() {
        let bd = boundary_density(&bernoulli(), &bernoulli(), 0.0, &default_eta_seq()).unwrap();
        assert!((bd.density - 0.5 / std::f64::consts::PI).abs() < 1e-6, "{bd:?}");
        assert!(bd.reliable);
        let far = boundary_density(&bernoulli(), &bernoulli(), 5.0, &default_eta_seq()).unwrap();
        assert!(far.density.abs() < 1e-8, "{far:?}");
    }

    #[test]
    fn rejects_degenerate_and_real_z() {
        let pm = DiscreteMeasure::point_mass(0.0);
        assert!(solve_phi_system(&pm, &bernoulli(), Complex64::i(), 1e-12, 100).is_err());
        assert!(solve_phi_system(&bernoulli(), &bernoulli(), Complex64::new(1.0, 0.0), 1e-12, 100).is_err());
    }
}
