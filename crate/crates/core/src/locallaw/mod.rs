//! Monte Carlo experiments: local law for `H^w`, linear statistics, smallest
//! singular value tails and the block model.

mod block;
mod linear;
mod ssv;

pub use block::{
    arcsine_stieltjes, block_local_law_scan, green_subordination_scan, BlockGrid, BlockTarget, SubordinationRecord,
};
pub use linear::{
    linear_statistic_lhs, linear_statistic_rhs, main_theorem_gap, Bump, GapRecord, LhsResult, QuadGrid, RhsEvaluator,
};
pub use ssv::{smallest_sv_tail, SsvRecord, TailPoint, TailReport};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::freeconv::ImaginaryAxis;
use crate::measure::{DiscreteMeasure, RingGeometry};
use crate::models::{m_w_from_singular_values, shifted_singular_values, SingleRingEnsemble, Symmetry};
use crate::numeric::{integrate_adaptive, linear_fit, quantile};
use crate::rng::{child_seed, rng_from_seed};

/// Default slope threshold for the domination fit.
pub const DEFAULT_SLOPE_PASS: f64 = 0.2;

/// Seed of trial `trial` at size `n`.
pub fn task_seed(seed: u64, n: usize, trial: usize) -> u64 {
    child_seed(child_seed(seed, n as u64), trial as u64)
}

/// `eta_max · 2^{−k}` for all `k` with the value `>= eta_min`.
pub fn dyadic_etas(eta_min: f64, eta_max: f64) -> Result<Vec<f64>> {
    if !(eta_min > 0.0 && eta_max >= eta_min && eta_max.is_finite()) {
        return Err(Error::invalid(format!("need 0 < eta_min <= eta_max, got [{eta_min}, {eta_max}]")));
    }
    let mut out = Vec::new();
    let mut eta = eta_max;
    while eta >= eta_min {
        out.push(eta);
        eta *= 0.5;
    }
    Ok(out)
}

/// Points, resolutions and sizes of a local law scan over the annulus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanGrid {
    /// Strictly decreasing and positive.
    pub eta_values: Vec<f64>,
    pub w_values: Vec<Complex64>,
    pub n_values: Vec<usize>,
    pub trials: usize,
    /// When set, size `N` only uses `η >= N^{−exponent}`.
    pub eta_floor_exponent: Option<f64>,
}

impl ScanGrid {
    pub fn new(
        eta_values: Vec<f64>,
        w_values: Vec<Complex64>,
        n_values: Vec<usize>,
        trials: usize,
        geometry: &RingGeometry,
    ) -> Result<Self> {
        validate_etas(&eta_values)?;
        let (lo, hi) = geometry.annulus().ok_or_else(|| {
            Error::domain(format!(
                "annulus [r_minus + tau, r_plus - tau] = [{}, {}] is empty",
                geometry.r_minus + geometry.tau,
                geometry.r_plus - geometry.tau
            ))
        })?;
        if w_values.is_empty() {
            return Err(Error::invalid("scan needs at least one w"));
        }
        for w in &w_values {
            if !geometry.contains(w.norm()) {
                return Err(Error::domain(format!("|w| = {} lies outside the annulus [{lo}, {hi}]", w.norm())));
            }
        }
        validate_sizes(&n_values, trials)?;
        Ok(ScanGrid { eta_values, w_values, n_values, trials, eta_floor_exponent: None })
    }

    pub fn with_eta_floor(mut self, exponent: f64) -> Self {
        self.eta_floor_exponent = Some(exponent);
        self
    }

    pub fn etas_for(&self, n: usize) -> Vec<f64> {
        eta_filter(&self.eta_values, self.eta_floor_exponent, n)
    }
}

pub(crate) fn validate_etas(etas: &[f64]) -> Result<()> {
    if etas.is_empty() {
        return Err(Error::invalid("eta grid is empty"));
    }
    if etas.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
        return Err(Error::domain("eta values must be positive and finite"));
    }
    if etas.windows(2).any(|p| p[1] >= p[0]) {
        return Err(Error::invalid("eta values must be strictly decreasing"));
    }
    Ok(())
}

pub(crate) fn validate_sizes(n_values: &[usize], trials: usize) -> Result<()> {
    if n_values.is_empty() || n_values.contains(&0) {
        return Err(Error::invalid("N values must be nonempty and positive"));
    }
    if trials == 0 {
        return Err(Error::invalid("trials must be positive"));
    }
    Ok(())
}

pub(crate) fn eta_filter(etas: &[f64], exponent: Option<f64>, n: usize) -> Vec<f64> {
    match exponent {
        Some(e) => {
            let floor = (n as f64).powf(-e);
            etas.iter().copied().filter(|&x| x >= floor * (1.0 - 1e-12)).collect()
        }
        None => etas.to_vec(),
    }
}

/// One scaled deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationRecord {
    pub n: usize,
    pub trial: usize,
    pub seed: u64,
    /// `w` for the single-ring scan, `E` for the block scan.
    pub point: Complex64,
    pub eta: f64,
    /// NaN when the record is flagged.
    pub dev: f64,
    pub flag: Option<String>,
}

/// Aggregates at one size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SizeSummary {
    pub n: usize,
    pub count: usize,
    pub flagged: usize,
    pub max: f64,
    pub q95: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DominationFit {
    pub slope: f64,
    pub intercept: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominationReport {
    pub records: Vec<DeviationRecord>,
    pub per_n: Vec<SizeSummary>,
    /// Present when at least three sizes are available.
    pub fit: Option<DominationFit>,
}

impl DominationReport {
    /// Aggregates records (already in deterministic order).
    pub fn from_records(records: Vec<DeviationRecord>, slope_pass: f64) -> Self {
        let mut sizes: Vec<usize> = records.iter().map(|r| r.n).collect();
        sizes.sort_unstable();
        sizes.dedup();
        let per_n = sizes
            .iter()
            .map(|&n| {
                let devs: Vec<f64> =
                    records.iter().filter(|r| r.n == n && r.flag.is_none()).map(|r| r.dev).collect();
                let count = records.iter().filter(|r| r.n == n).count();
                let (max, q95) = if devs.is_empty() {
                    (f64::NAN, f64::NAN)
                } else {
                    (devs.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b)), quantile(&devs, 0.95))
                };
                SizeSummary { n, count, flagged: count - devs.len(), max, q95 }
            })
            .collect();
        let mut report = DominationReport { records, per_n, fit: None };
        if report.per_n.len() >= 3 {
            report.fit = fit_domination(&report, slope_pass).ok();
        }
        report
    }

    pub fn flagged(&self) -> usize {
        self.per_n.iter().map(|s| s.flagged).sum()
    }
}

/// Least squares of `log q95` against `log N`; passes iff the slope is at most `slope_pass`.
pub fn fit_domination(report: &DominationReport, slope_pass: f64) -> Result<DominationFit> {
    if report.per_n.len() < 3 {
        return Err(Error::Degenerate(format!("domination fit needs >= 3 sizes, got {}", report.per_n.len())));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for s in &report.per_n {
        if !(s.q95 > 0.0 && s.q95.is_finite()) {
            return Err(Error::Degenerate(format!("0.95-quantile at N = {} is {}", s.n, s.q95)));
        }
        xs.push((s.n as f64).ln());
        ys.push(s.q95.ln());
    }
    let (slope, intercept) = linear_fit(&xs, &ys)?;
    Ok(DominationFit { slope, intercept, pass: slope <= slope_pass })
}

/// `N η |m^w(iη) − m_{Σ,|w|}(iη)|` over the grid, with `Σ` the quantile
/// diagonal of `mu_sigma` at each size.
pub fn local_law_scan(
    mu_sigma: &DiscreteMeasure,
    symmetry: Symmetry,
    grid: &ScanGrid,
    seed: u64,
    slope_pass: f64,
) -> Result<DominationReport> {
    let mut tasks = Vec::new();
    let mut axes = Vec::new();
    for &n in &grid.n_values {
        let ens = SingleRingEnsemble::from_measure(mu_sigma, n, symmetry, seed)?;
        axes.push(ImaginaryAxis::new(&ens.mu_sigma().symmetrize())?);
        for trial in 0..grid.trials {
            tasks.push((axes.len() - 1, ens.clone(), trial));
        }
    }
    let chunks: Vec<Vec<DeviationRecord>> = tasks
        .par_iter()
        .map(|(ai, ens, trial)| {
            let n = ens.n();
            let s = task_seed(seed, n, *trial);
            let x = ens.sample_x(&mut rng_from_seed(s));
            let etas = grid.etas_for(n);
            let mut out = Vec::with_capacity(grid.w_values.len() * etas.len());
            for &w in &grid.w_values {
                let sv = shifted_singular_values(&x, w);
                for &eta in &etas {
                    let rec = |dev: f64, flag: Option<String>| DeviationRecord {
                        n,
                        trial: *trial,
                        seed: s,
                        point: w,
                        eta,
                        dev,
                        flag,
                    };
                    let value = sv.as_ref().map_err(Clone::clone).and_then(|sv| {
                        let m = m_w_from_singular_values(sv, eta)?;
                        let target = axes[*ai].solve(w.norm(), eta)?.im_m();
                        Ok(n as f64 * eta * (m.im - target).abs())
                    });
                    out.push(match value {
                        Ok(d) => rec(d, None),
                        Err(e) => rec(f64::NAN, Some(e.to_string())),
                    });
                }
            }
            out
        })
        .collect();
    Ok(DominationReport::from_records(chunks.into_iter().flatten().collect(), slope_pass))
}

/// Both sides of `(1/2N) Tr log|H^w| = (1/2N) Tr log|H^w − iK| − ∫₀^K Im m^w(iη) dη`,
/// with the integral split at `η*`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceLogSplit {
    pub direct: f64,
    pub k: f64,
    pub shifted_term: f64,
    pub eta_star: f64,
    pub integral_below: f64,
    pub integral_above: f64,
    pub rhs: f64,
}

impl TraceLogSplit {
    pub fn defect(&self) -> f64 {
        (self.direct - self.rhs).abs()
    }
}

/// Evaluates both sides from the eigenvalues of `H^w`.
pub fn trace_log_split(eigenvalues: &[f64], k: f64, eta_star: f64, tol: f64) -> Result<TraceLogSplit> {
    if eigenvalues.is_empty() {
        return Err(Error::invalid("empty spectrum"));
    }
    if !(k > 0.0 && eta_star > 0.0 && eta_star < k) {
        return Err(Error::domain(format!("need 0 < eta_star < K, got eta_star = {eta_star}, K = {k}")));
    }
    let len = eigenvalues.len() as f64;
    let direct = eigenvalues.iter().map(|l| l.abs().ln()).sum::<f64>() / len;
    let shifted_term = eigenvalues.iter().map(|l| 0.5 * (l * l + k * k).ln()).sum::<f64>() / len;
    let im_m = |eta: f64| -> Result<f64> {
        Ok(eigenvalues.iter().map(|l| eta / (l * l + eta * eta)).sum::<f64>() / len)
    };
    let below = integrate_adaptive(im_m, 0.0, eta_star, tol, 20_000)?.value;
    let above = integrate_adaptive(im_m, eta_star, k, tol, 20_000)?.value;
    Ok(TraceLogSplit {
        direct,
        k,
        shifted_term,
        eta_star,
        integral_below: below,
        integral_above: above,
        rhs: shifted_term - below - above,
    })
}
