use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::task_seed;
use crate::error::{Error, Result};
use crate::measure::{levy_distance, DiscreteMeasure};
use crate::models::{shifted_singular_values, SingleRingEnsemble, Symmetry};
use crate::numeric::{linear_fit, quantile};
use crate::rng::{child_seed, rng_from_seed};

const BOOTSTRAP_RESAMPLES: usize = 1000;

/// Smallest singular value of `X − w` in one trial; `t = |w| λ₁`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SsvRecord {
    pub n: usize,
    pub trial: usize,
    pub seed: u64,
    pub w_abs: f64,
    pub t: f64,
    pub lambda1: f64,
}

/// `P(λ₁ ≤ t/|w|)` at one `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailPoint {
    pub t: f64,
    pub prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    pub records: Vec<SsvRecord>,
    pub tail: Vec<TailPoint>,
    /// Log-log slope of the tail over points with `0 < P < 1`.
    pub slope: Option<f64>,
    /// 95% percentile bootstrap interval for the slope.
    pub slope_ci: Option<(f64, f64)>,
}

fn tail_of(ts: &[f64], t_grid: &[f64]) -> Vec<TailPoint> {
    let n = ts.len() as f64;
    t_grid
        .iter()
        .map(|&t| TailPoint { t, prob: ts.iter().filter(|&&x| x <= t).count() as f64 / n })
        .collect()
}

fn tail_slope(tail: &[TailPoint]) -> Option<f64> {
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        tail.iter().filter(|p| p.prob > 0.0 && p.prob < 1.0).map(|p| (p.t.ln(), p.prob.ln())).unzip();
    if xs.len() < 2 {
        return None;
    }
    linear_fit(&xs, &ys).ok().map(|(s, _)| s)
}

/// Empirical tail of the smallest singular value of `X − w` with a fitted
/// exponent and bootstrap interval.
pub fn smallest_sv_tail(
    ensemble: &SingleRingEnsemble,
    w: Complex64,
    t_grid: &[f64],
    trials: usize,
    seed: u64,
) -> Result<TailReport> {
    if trials == 0 {
        return Err(Error::invalid("trials must be positive"));
    }
    if t_grid.is_empty() || t_grid.iter().any(|t| !(*t > 0.0)) || t_grid.windows(2).any(|p| p[1] <= p[0]) {
        return Err(Error::invalid("t grid must be positive and strictly increasing"));
    }
    if !(w.norm() > 0.0) {
        return Err(Error::domain("w must be nonzero"));
    }
    if ensemble.symmetry == Symmetry::Orthogonal
        && levy_distance(&ensemble.mu_sigma(), &DiscreteMeasure::point_mass(1.0)) < 1e-6
    {
        return Err(Error::domain("orthogonal class needs Sigma away from the identity"));
    }
    let n = ensemble.n();
    let records = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let s = task_seed(seed, n, trial);
            let x = ensemble.sample_x(&mut rng_from_seed(s));
            let lambda1 = shifted_singular_values(&x, w)?[0];
            Ok(SsvRecord { n, trial, seed: s, w_abs: w.norm(), t: w.norm() * lambda1, lambda1 })
        })
        .collect::<Result<Vec<_>>>()?;
    let ts: Vec<f64> = records.iter().map(|r| r.t).collect();
    let tail = tail_of(&ts, t_grid);
    let slope = tail_slope(&tail);

    let mut rng = rng_from_seed(child_seed(seed, u64::MAX));
    let mut boot = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    let mut resample = vec![0.0; ts.len()];
    for _ in 0..BOOTSTRAP_RESAMPLES {
        for r in resample.iter_mut() {
            *r = ts[rng.gen_range(0..ts.len())];
        }
        if let Some(b) = tail_slope(&tail_of(&resample, t_grid)) {
            boot.push(b);
        }
    }
    let slope_ci = (boot.len() >= BOOTSTRAP_RESAMPLES / 2).then(|| (quantile(&boot, 0.025), quantile(&boot, 0.975)));
    Ok(TailReport { records, tail, slope, slope_ci })
}
