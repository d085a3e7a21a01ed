use num_complex::Complex64;
use ringlaw::locallaw::{
    block_local_law_scan, green_subordination_scan, local_law_scan, main_theorem_gap, smallest_sv_tail, BlockGrid, Bump,
    DominationReport, QuadGrid, ScanGrid,
};
use ringlaw::models::{BlockAdditiveEnsemble, SingleRingEnsemble};

use super::{Command, Outcome, RunContext};
use crate::config::{check_annulus, require, Config, Thresholds};
use crate::error::{CliError, CliResult};
use crate::output::Table;
use crate::row;

pub const DEFAULT_BUMP_RADIUS: f64 = 0.1;
pub const DEFAULT_GAP_MAX: f64 = 10.0;

/// Per-size summary and slope fit of a deviation report.
pub(crate) fn domination_outputs(report: &DominationReport, thresholds: &Thresholds, out: &mut Outcome) -> CliResult<()> {
    let mut t = Table::new(&["N", "count", "flagged", "max", "q95"])?;
    for s in &report.per_n {
        t.row(&row![s.n, s.count, s.flagged, s.max, s.q95])?;
        let within = thresholds.max_dev.map(|cap| if s.max <= cap { " (within cap)" } else { " (ABOVE cap)" });
        out.say(format!("N = {}: max {:.6}, q95 {:.6}, {} flagged{}", s.n, s.max, s.q95, s.flagged, within.unwrap_or("")));
    }
    out.file("summary.csv", t.into_bytes()?);
    match &report.fit {
        Some(fit) => {
            let mut f = Table::new(&["slope", "intercept", "slope_pass", "pass"])?;
            f.row(&row![fit.slope, fit.intercept, thresholds.slope_pass, fit.pass])?;
            out.file("fit.csv", f.into_bytes()?);
            out.say(format!(
                "slope {:.6} against limit {}: {}",
                fit.slope,
                thresholds.slope_pass,
                if fit.pass { "PASS" } else { "FAIL" }
            ));
        }
        None => out.say("slope omitted: fewer than three sizes"),
    }
    Ok(())
}

fn single_ring(cfg: &Config, n: usize, seed: u64) -> CliResult<SingleRingEnsemble> {
    let mu = cfg.measure()?;
    SingleRingEnsemble::from_measure(&mu, n, cfg.ensemble.symmetry, seed).map_err(|e| CliError::at("measure", e))
}

pub struct LocalLaw;

impl Command for LocalLaw {
    fn name(&self) -> &'static str {
        "local-law"
    }

    fn summary(&self) -> &'static str {
        "local law of the hermitized matrix on the imaginary axis"
    }

    fn run(&self, ctx: &RunContext) -> CliResult<Outcome> {
        let cfg = ctx.config;
        let mu = cfg.measure()?;
        let ns = cfg.n_values()?;
        let trials = cfg.trials()?;
        let etas = cfg.eta_values(&ns)?;
        let ws = match (&cfg.grid.w_values, cfg.ensemble.w) {
            (Some(ws), _) => ws.clone(),
            (None, Some(w)) => vec![w],
            (None, None) => return Err(CliError::validation("grid.w_values", "missing required field")),
        };
        let geometry = check_annulus(&mu, cfg.tau(&mu)?)?;
        let mut grid = ScanGrid::new(etas, ws, ns, trials, &geometry).map_err(|e| CliError::at("grid.w_values", e))?;
        if let Some(exp) = cfg.grid.eta_floor_exponent {
            grid = grid.with_eta_floor(exp);
        }
        let report = local_law_scan(&mu, cfg.ensemble.symmetry, &grid, ctx.seed, cfg.thresholds.slope_pass)
            .map_err(|e| CliError::at("measure", e))?;
        let mut t = Table::new(&["N", "trial", "w_re", "w_im", "eta", "dev"])?;
        for r in &report.records {
            t.row(&row![r.n, r.trial, r.point.re, r.point.im, r.eta, r.dev])?;
        }
        let mut out = Outcome::default();
        out.file("local_law.csv", t.into_bytes()?);
        domination_outputs(&report, &cfg.thresholds, &mut out)?;
        Ok(out)
    }
}

pub struct MainGap;

impl Command for MainGap {
    fn name(&self) -> &'static str {
        "main-gap"
    }

    fn summary(&self) -> &'static str {
        "mesoscopic linear statistic against its single-ring limit"
    }

    fn run(&self, ctx: &RunContext) -> CliResult<Outcome> {
        let cfg = ctx.config;
        let n = cfg.n()?;
        let trials = cfg.trials()?;
        let w0 = match cfg.grid.w0.or(cfg.ensemble.w) {
            Some(w) => w,
            None => return Err(CliError::validation("grid.w0", "missing required field")),
        };
        let alphas = require(&cfg.grid.alpha_values, "grid.alpha_values")?;
        let bump = Bump::new(cfg.grid.bump_radius.unwrap_or(DEFAULT_BUMP_RADIUS))
            .map_err(|e| CliError::at("grid.bump_radius", e))?;
        let quad = QuadGrid { cells: cfg.grid.cells.unwrap_or(QuadGrid::default().cells) };
        let ens = single_ring(cfg, n, ctx.seed)?;
        let tau = cfg.tau(&ens.mu_sigma())?;
        let cap = cfg.thresholds.gap_max.unwrap_or(DEFAULT_GAP_MAX);
        let mut t = Table::new(&["N", "trial", "alpha", "w0_re", "w0_im", "lhs", "rhs", "gap_norm"])?;
        let mut out = Outcome::default();
        for (i, &alpha) in alphas.iter().enumerate() {
            let recs = main_theorem_gap(&ens, w0, alpha, &bump, &quad, tau, trials, ctx.seed)
                .map_err(|e| CliError::at(&format!("grid.alpha_values[{i}]"), e))?;
            for r in &recs {
                t.row(&row![r.n, r.trial, r.alpha, r.w0.re, r.w0.im, r.lhs, r.rhs, r.gap_norm])?;
            }
            let within = recs.iter().filter(|r| r.gap_norm <= cap).count();
            let worst = recs.iter().map(|r| r.gap_norm).fold(0.0, f64::max);
            out.say(format!("alpha = {alpha}: {within}/{} trials with normalized gap <= {cap}, largest {worst:.6}", recs.len()));
        }
        out.file("gap.csv", t.into_bytes()?);
        Ok(out)
    }
}

pub struct SsvTail;

impl Command for SsvTail {
    fn name(&self) -> &'static str {
        "ssv-tail"
    }

    fn summary(&self) -> &'static str {
        "tail of the smallest singular value of X - w"
    }

    fn run(&self, ctx: &RunContext) -> CliResult<Outcome> {
        let cfg = ctx.config;
        let n = cfg.n()?;
        let trials = cfg.trials()?;
        let w = require(&cfg.ensemble.w, "ensemble.w")?;
        let t_grid = require(&cfg.grid.t_values, "grid.t_values")?;
        let ens = single_ring(cfg, n, ctx.seed)?;
        let report = smallest_sv_tail(&ens, w, &t_grid, trials, ctx.seed).map_err(|e| CliError::at("grid.t_values", e))?;
        let mut t = Table::new(&["N", "trial", "w_abs", "t", "lambda1"])?;
        for r in &report.records {
            t.row(&row![r.n, r.trial, r.w_abs, r.t, r.lambda1])?;
        }
        let mut tail = Table::new(&["t", "prob"])?;
        for p in &report.tail {
            tail.row(&row![p.t, p.prob])?;
        }
        let mut out = Outcome::default();
        out.file("ssv.csv", t.into_bytes()?);
        out.file("tail.csv", tail.into_bytes()?);
        match (report.slope, report.slope_ci) {
            (Some(s), Some((lo, hi))) => out.say(format!("tail slope {s:.6}, 95% bootstrap interval [{lo:.6}, {hi:.6}]")),
            (Some(s), None) => out.say(format!("tail slope {s:.6}, bootstrap interval unavailable")),
            _ => out.say("tail slope unavailable: fewer than two points with 0 < P < 1"),
        }
        Ok(out)
    }
}

fn block_ensemble(cfg: &Config, n: usize, seed: u64) -> CliResult<BlockAdditiveEnsemble> {
    BlockAdditiveEnsemble::from_profiles(&cfg.measure()?, &cfg.xi()?, n, cfg.ensemble.symmetry, seed)
        .map_err(|e| CliError::at("measure", e))
}

pub struct BlockLaw;

impl Command for BlockLaw {
    fn name(&self) -> &'static str {
        "block-law"
    }

    fn summary(&self) -> &'static str {
        "strong local law of the block additive model"
    }

    fn run(&self, ctx: &RunContext) -> CliResult<Outcome> {
        let cfg = ctx.config;
        let (sigma, xi) = (cfg.measure()?, cfg.xi()?);
        let ns = cfg.n_values()?;
        let trials = cfg.trials()?;
        let energies = require(&cfg.grid.energies, "grid.energies")?;
        let etas = cfg.eta_values(&ns)?;
        let interval = match cfg.grid.interval {
            Some(iv) => iv,
            None => (
                energies.iter().copied().fold(f64::INFINITY, f64::min),
                energies.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            ),
        };
        let mut grid = BlockGrid::new(energies, etas, ns, trials).map_err(|e| CliError::at("grid", e))?;
        if let Some(exp) = cfg.grid.eta_floor_exponent {
            grid = grid.with_eta_floor(exp);
        }
        let report = block_local_law_scan(
            &sigma,
            &xi,
            cfg.ensemble.symmetry,
            interval,
            &grid,
            cfg.grid.target.unwrap_or_default(),
            cfg.thresholds.density_threshold,
            ctx.seed,
            cfg.thresholds.slope_pass,
        )
        .map_err(|e| CliError::at("grid.interval", e))?;
        let mut t = Table::new(&["N", "trial", "E", "eta", "dev"])?;
        for r in &report.records {
            t.row(&row![r.n, r.trial, r.point.re, r.eta, r.dev])?;
        }
        let mut out = Outcome::default();
        out.file("block.csv", t.into_bytes()?);
        domination_outputs(&report, &cfg.thresholds, &mut out)?;
        Ok(out)
    }
}

pub struct GreenSub;

impl Command for GreenSub {
    fn name(&self) -> &'static str {
        "green-sub"
    }

    fn summary(&self) -> &'static str {
        "Green function subordination and eigenvector delocalization"
    }

    fn run(&self, ctx: &RunContext) -> CliResult<Outcome> {
        let cfg = ctx.config;
        let n = cfg.n()?;
        let trials = cfg.trials()?;
        let zs: Vec<Complex64> = require(&cfg.grid.z_values, "grid.z_values")?;
        let window = require(&cfg.grid.window, "grid.window")?;
        let ens = block_ensemble(cfg, n, ctx.seed)?;
        let recs = green_subordination_scan(&ens, &zs, window, trials, ctx.seed).map_err(|e| CliError::at("grid.z_values", e))?;
        let mut t = Table::new(&[
            "N",
            "trial",
            "z_re",
            "z_im",
            "lambda_d_scaled",
            "omegaB_gap",
            "omegaA_gap",
            "eigvec_sup",
        ])?;
        for r in &recs {
            t.row(&row![r.n, r.trial, r.z.re, r.z.im, r.lambda_d_scaled, r.omega_b_gap, r.omega_a_gap, r.eigvec_sup])?;
        }
        let max = |f: fn(&ringlaw::locallaw::SubordinationRecord) -> f64| recs.iter().map(f).fold(0.0, f64::max);
        let mut out = Outcome::default();
        out.file("subordination.csv", t.into_bytes()?);
        let lambda = max(|r| r.lambda_d_scaled);
        let sup = max(|r| r.eigvec_sup);
        let mark = |v: f64, cap: Option<f64>| match cap {
            Some(c) if v <= c => format!(" (within {c})"),
            Some(c) => format!(" (ABOVE {c})"),
            None => String::new(),
        };
        out.say(format!("max sqrt(N eta) Lambda_d: {lambda:.6}{}", mark(lambda, cfg.thresholds.lambda_d_max)));
        out.say(format!("max sqrt(N) eigenvector sup norm: {sup:.6}{}", mark(sup, cfg.thresholds.eigvec_max)));
        out.say(format!("max identity defect: {:.3e}", max(|r| r.identity_defect)));
        Ok(out)
    }
}
