use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::task_seed;
use crate::error::{Error, Result};
use crate::linalg::{ComplexDenseMatrix, Hessenberg};
use crate::measure::{DiscreteMeasure, RingGeometry};
use crate::models::SingleRingEnsemble;
use crate::numeric::{integrate_adaptive, Chebyshev};
use crate::ringlaw::{LogPotential, DEFAULT_QUAD_TOL};
use crate::rng::rng_from_seed;

const CHEBYSHEV_NODES: usize = 24;

/// Radial bump `f(ζ) = (1 − |ζ/R|²)³` on `|ζ| ≤ R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub radius: f64,
}

impl Default for Bump {
    fn default() -> Self {
        Bump { radius: 1.0 }
    }
}

impl Bump {
    pub fn new(radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::invalid(format!("bump radius must be positive, got {radius}")));
        }
        Ok(Bump { radius })
    }

    pub fn value(&self, zeta: Complex64) -> f64 {
        let t2 = zeta.norm_sqr() / (self.radius * self.radius);
        if t2 >= 1.0 {
            0.0
        } else {
            (1.0 - t2).powi(3)
        }
    }

    /// `Δf(ζ) = R⁻² (−12(1 − t²)² + 24 t²(1 − t²))` with `t = |ζ|/R`.
    pub fn laplacian(&self, zeta: Complex64) -> f64 {
        let r2 = self.radius * self.radius;
        let t2 = zeta.norm_sqr() / r2;
        if t2 >= 1.0 {
            0.0
        } else {
            (-12.0 * (1.0 - t2).powi(2) + 24.0 * t2 * (1.0 - t2)) / r2
        }
    }

    /// `‖Δf‖_{L¹}` by radial quadrature; independent of `R`.
    pub fn laplacian_l1(&self) -> f64 {
        let g = |t: f64| -> Result<f64> { Ok(2.0 * PI * t * (12.0 * (1.0 - t * t) * (3.0 * t * t - 1.0)).abs()) };
        let knee = 1.0 / 3f64.sqrt();
        let a = integrate_adaptive(g, 0.0, knee, 1e-13, 200).expect("polynomial integrand").value;
        let b = integrate_adaptive(g, knee, 1.0, 1e-13, 200).expect("polynomial integrand").value;
        a + b
    }
}

/// Midpoint rule on the square `[−R, R]²` with `cells × cells` cells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadGrid {
    pub cells: usize,
}

impl Default for QuadGrid {
    fn default() -> Self {
        QuadGrid { cells: 64 }
    }
}

impl QuadGrid {
    /// Nodes `ζ` with nonzero `Δf`, their weights `Δf(ζ)·h²`, and the cell size `h`.
    /// Negative weights are rescaled so that the weights sum to zero, which
    /// makes the rule exact on constants like `∫ Δf = 0`.
    pub fn nodes(&self, bump: &Bump) -> (Vec<(Complex64, f64)>, f64) {
        let n = self.cells.max(1);
        let h = 2.0 * bump.radius / n as f64;
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let zeta = Complex64::new(-bump.radius + (i as f64 + 0.5) * h, -bump.radius + (j as f64 + 0.5) * h);
                let lap = bump.laplacian(zeta);
                if lap != 0.0 {
                    out.push((zeta, lap * h * h));
                }
            }
        }
        let pos: f64 = out.iter().map(|n| n.1.max(0.0)).sum();
        let neg: f64 = out.iter().map(|n| (-n.1).max(0.0)).sum();
        if neg > 0.0 {
            for node in out.iter_mut().filter(|n| n.1 < 0.0) {
                node.1 *= pos / neg;
            }
        }
        (out, h)
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..0.5).contains(&alpha) {
        return Err(Error::domain(format!("alpha must lie in [0, 1/2), got {alpha}")));
    }
    Ok(())
}

/// Left side with the number of nodes moved off a singular shift.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LhsResult {
    pub value: f64,
    pub jittered: usize,
}

/// `(1/2π) N^{2α} Σ Δf(ζ) (1/N) log|det(X − w(ζ))| h²` with `w(ζ) = w₀ + N^{−α} ζ`.
pub fn linear_statistic_lhs(
    x: &ComplexDenseMatrix,
    w0: Complex64,
    alpha: f64,
    bump: &Bump,
    quad: &QuadGrid,
) -> Result<LhsResult> {
    check_alpha(alpha)?;
    let hs = Hessenberg::new(x)?;
    let n = x.rows() as f64;
    let scale = n.powf(-alpha);
    let (nodes, h) = quad.nodes(bump);
    let terms: Vec<(f64, bool)> = nodes
        .par_iter()
        .map(|&(zeta, weight)| {
            let mut ld = hs.log_abs_det_shifted(w0 + scale * zeta);
            let mut jittered = false;
            if ld.singular {
                let shift = Complex64::new(0.5 * h, 0.5 * h);
                ld = hs.log_abs_det_shifted(w0 + scale * (zeta + shift));
                jittered = true;
            }
            (weight * ld.value / n, jittered)
        })
        .collect();
    let sum: f64 = terms.iter().map(|t| t.0).sum();
    Ok(LhsResult {
        value: n.powf(2.0 * alpha) * sum / (2.0 * PI),
        jittered: terms.iter().filter(|t| t.1).count(),
    })
}

/// `L_Σ(s)` interpolated on the radial range touched by the bump.
#[derive(Debug, Clone)]
pub struct RhsEvaluator {
    cheb: Chebyshev,
}

impl RhsEvaluator {
    pub fn new(mu_sigma: &DiscreteMeasure, s_lo: f64, s_hi: f64) -> Result<Self> {
        if !(s_lo > 0.0 && s_hi > s_lo) {
            return Err(Error::domain(format!("radial range [{s_lo}, {s_hi}] must be positive and nonempty")));
        }
        let pot = LogPotential::new(mu_sigma, DEFAULT_QUAD_TOL)?;
        let nodes = Chebyshev::nodes(s_lo, s_hi, CHEBYSHEV_NODES);
        let k = pot.k_for(s_hi);
        let values = nodes.par_iter().map(|&s| pot.eval_with_k(s, k)).collect::<Result<Vec<_>>>()?;
        Ok(RhsEvaluator { cheb: Chebyshev::from_values(s_lo, s_hi, values) })
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.cheb.eval(s)
    }
}

/// `(1/2π) N^{2α} Σ Δf(ζ) L_Σ(|w(ζ)|) h²` on the same nodes as the left side.
pub fn linear_statistic_rhs(
    mu_sigma: &DiscreteMeasure,
    w0: Complex64,
    alpha: f64,
    n: usize,
    bump: &Bump,
    quad: &QuadGrid,
) -> Result<f64> {
    check_alpha(alpha)?;
    let scale = (n as f64).powf(-alpha);
    let reach = scale * bump.radius;
    let eval = RhsEvaluator::new(mu_sigma, w0.norm() - reach, w0.norm() + reach)?;
    Ok(rhs_with(&eval, w0, alpha, n, bump, quad))
}

fn rhs_with(eval: &RhsEvaluator, w0: Complex64, alpha: f64, n: usize, bump: &Bump, quad: &QuadGrid) -> f64 {
    let scale = (n as f64).powf(-alpha);
    let (nodes, _) = quad.nodes(bump);
    let sum: f64 = nodes.iter().map(|&(zeta, weight)| weight * eval.eval((w0 + scale * zeta).norm())).sum();
    (n as f64).powf(2.0 * alpha) * sum / (2.0 * PI)
}

/// One trial of the optimal-scale linear statistic comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapRecord {
    pub n: usize,
    pub trial: usize,
    pub seed: u64,
    pub alpha: f64,
    pub w0: Complex64,
    pub lhs: f64,
    pub rhs: f64,
    /// `|lhs − rhs| N^{1−2α} / ‖Δf‖_{L¹}`.
    pub gap_norm: f64,
    pub jittered: usize,
}

/// Gap between the random linear statistic and its deterministic limit over
/// `trials` samples; `tau` is the annulus inset used for the support check.
#[allow(clippy::too_many_arguments)]
pub fn main_theorem_gap(
    ensemble: &SingleRingEnsemble,
    w0: Complex64,
    alpha: f64,
    bump: &Bump,
    quad: &QuadGrid,
    tau: f64,
    trials: usize,
    seed: u64,
) -> Result<Vec<GapRecord>> {
    check_alpha(alpha)?;
    let n = ensemble.n();
    let mu = ensemble.mu_sigma();
    let geometry = RingGeometry::new(&mu, tau)?;
    let reach = (n as f64).powf(-alpha) * bump.radius;
    let (lo, hi) = (w0.norm() - reach, w0.norm() + reach);
    if !(geometry.contains(lo) && geometry.contains(hi)) {
        return Err(Error::domain(format!(
            "bump support |w| in [{lo}, {hi}] leaves the annulus [{}, {}]",
            geometry.r_minus + tau,
            geometry.r_plus - tau
        )));
    }
    let eval = RhsEvaluator::new(&mu, lo, hi)?;
    let rhs = rhs_with(&eval, w0, alpha, n, bump, quad);
    let norm = bump.laplacian_l1();
    (0..trials)
        .into_par_iter()
        .map(|trial| {
            let s = task_seed(seed, n, trial);
            let x = ensemble.sample_x(&mut rng_from_seed(s));
            let lhs = linear_statistic_lhs(&x, w0, alpha, bump, quad)?;
            Ok(GapRecord {
                n,
                trial,
                seed: s,
                alpha,
                w0,
                lhs: lhs.value,
                rhs,
                gap_norm: (lhs.value - rhs).abs() * (n as f64).powf(1.0 - 2.0 * alpha) / norm,
                jittered: lhs.jittered,
            })
        })
        .collect()
}
