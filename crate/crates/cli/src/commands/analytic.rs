use num_complex::Complex64;
use rayon::prelude::*;
use ringlaw::freeconv::{boundary_density, bulk_bound_certificate, default_eta_seq, solve_phi_system, DEFAULT_MAX_ITER, DEFAULT_TOL};
use ringlaw::ringlaw::{LogPotential, DEFAULT_QUAD_TOL};
use ringlaw::DiscreteMeasure;

use super::{Command, Outcome, RunContext};
use crate::config::{require, Config};
use crate::error::{CliError, CliResult};
use crate::output::Table;
use crate::row;

fn nonnegative_measure(config: &Config) -> CliResult<DiscreteMeasure> {
    let mu = config.measure()?;
    if !mu.is_nonnegative() {
        return Err(CliError::validation("measure.atoms", "singular values must be nonnegative"));
    }
    Ok(mu)
}

pub struct RadiiCmd;

impl Command for RadiiCmd {
    fn name(&self) -> &'static str {
        "radii"
    }

    fn summary(&self) -> &'static str {
        "inner and outer radius of the single ring"
    }

    fn run(&self, ctx: &RunContext) -> CliResult<Outcome> {
        let mu = nonnegative_measure(ctx.config)?;
        let r = mu.radii().map_err(|e| CliError::at("measure", e))?;
        let mut out = Outcome::default();
        out.say(format!("{:.6} {:.6}", r.r_minus, r.r_plus));
        let mut t = Table::new(&["r_minus", "r_plus"])?;
        t.row(&row![r.r_minus, r.r_plus])?;
        out.file("radii.csv", t.into_bytes()?);
        Ok(out)
    }
}

pub struct FreeConv;

impl Command for FreeConv {
    fn name(&self) -> &'static str {
        "freeconv"
    }

    fn summary(&self) -> &'static str {
        "subordination functions and boundary density of a free convolution"
    }

    fn run(&self, ctx: &RunContext) -> CliResult<Outcome> {
        let cfg = ctx.config;
        let mu1 = cfg.measure()?;
        let mu2 = match (&cfg.ensemble.partner, cfg.ensemble.r) {
            (Some(spec), _) => spec.build("ensemble.partner")?,
            (None, Some(r)) => DiscreteMeasure::point_mass(r).symmetrize(),
            (None, None) => return Err(CliError::validation("ensemble.partner", "give a partner measure or ensemble.r")),
        };
        let energies = require(&cfg.grid.energies, "grid.energies")?;
        let etas = cfg.eta_values(&[])?;
        let points: Vec<Complex64> =
            energies.iter().flat_map(|&e| etas.iter().map(move |&eta| Complex64::new(e, eta))).collect();
        let states = points
            .par_iter()
            .map(|&z| solve_phi_system(&mu1, &mu2, z, DEFAULT_TOL, DEFAULT_MAX_ITER))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::at("measure", e))?;
        let mut t = Table::new(&[
            "E", "eta", "m_re", "m_im", "omega1_re", "omega1_im", "omega2_re", "omega2_im", "residual", "iterations",
        ])?;
        for st in &states {
            t.row(&row![
                st.z.re,
                st.z.im,
                st.m.re,
                st.m.im,
                st.omega1.re,
                st.omega1.im,
                st.omega2.re,
                st.omega2.im,
                st.residual,
                st.iterations
            ])?;
        }
        let densities = energies
            .par_iter()
            .map(|&e| boundary_density(&mu1, &mu2, e, &default_eta_seq()))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::at("grid.energies", e))?;
        let mut d = Table::new(&["E", "density", "error_estimate", "reliable"])?;
        let mut out = Outcome::default();
        for (e, b) in energies.iter().zip(&densities) {
            d.row(&row![*e, b.density, b.error_estimate, b.reliable])?;
            out.say(format!("E = {e}: density {:.9} (error {:.1e}{})", b.density, b.error_estimate, if b.reliable { "" } else { ", unreliable" }));
        }
        out.file("freeconv.csv", t.into_bytes()?);
        out.file("density.csv", d.into_bytes()?);
        Ok(out)
    }
}

pub struct Certificate;

impl Command for Certificate {
    fn name(&self) -> &'static str {
        "certificate"
    }

    fn summary(&self) -> &'static str {
        "explicit bounds on the subordination function along the imaginary axis"
    }

    fn run(&self, ctx: &RunContext) -> CliResult<Outcome> {
        let cfg = ctx.config;
        let mu = nonnegative_measure(cfg)?;
        let r = require(&cfg.ensemble.r, "ensemble.r")?;
        let eta_max = cfg.grid.eta_max.unwrap_or(10.0);
        let count = cfg.grid.eta_count.unwrap_or(40);
        let report = bulk_bound_certificate(&mu.symmetrize(), r, eta_max, count).map_err(|e| CliError::at("ensemble.r", e))?;
        let json = serde_json::to_string_pretty(&report).map_err(|e| CliError::Io(e.to_string()))?;
        let mut t = Table::new(&["eta", "im_omega2", "deviation", "lower_base", "upper_base", "trivial_bound", "trivial_ok"])?;
        for rec in &report.eta_grid {
            t.row(&row![rec.eta, rec.im_omega2, rec.deviation, rec.lower_base, rec.upper_base, rec.trivial_bound, rec.trivial_ok])?;
        }
        let mut out = Outcome::default();
        out.say(&json);
        out.file("certificate.json", json.into_bytes());
        out.file("certificate_eta.csv", t.into_bytes()?);
        Ok(out)
    }
}

pub struct RingDensity;

impl Command for RingDensity {
    fn name(&self) -> &'static str {
        "ring-density"
    }

    fn summary(&self) -> &'static str {
        "log-potential and radial density of the single-ring law"
    }

    fn run(&self, ctx: &RunContext) -> CliResult<Outcome> {
        let cfg = ctx.config;
        let mu = nonnegative_measure(cfg)?;
        let s_values = require(&cfg.grid.s_values, "grid.s_values")?;
        let quad_tol = cfg.grid.quad_tol.unwrap_or(DEFAULT_QUAD_TOL);
        let mut lp = LogPotential::new(&mu, quad_tol).map_err(|e| CliError::at("grid.quad_tol", e))?;
        if let Some(k) = cfg.grid.k {
            lp = lp.with_k(k);
        }
        let points = lp.density_profile(&s_values).map_err(|e| CliError::at("grid.s_values", e))?;
        let mut t = Table::new(&["s", "L", "dL", "d2L", "rho"])?;
        for p in &points {
            t.row(&row![p.s, p.l, p.dl, p.d2l, p.rho])?;
        }
        let mut out = Outcome::default();
        out.file("ring_density.csv", t.into_bytes()?);
        if let Some(n_radii) = cfg.grid.mass_radii {
            let tau = cfg.tau(&mu)?;
            let mass = lp.ring_mass(tau, n_radii).map_err(|e| CliError::at("grid.mass_radii", e))?;
            out.say(format!("ring mass over the annulus with tau = {tau}: {mass:.9}"));
            let mut m = Table::new(&["tau", "n_radii", "mass"])?;
            m.row(&row![tau, n_radii, mass])?;
            out.file("ring_mass.csv", m.into_bytes()?);
        }
        for p in &points {
            out.say(format!("s = {}: L = {:.9}, rho = {:.9}", p.s, p.l, p.rho));
        }
        Ok(out)
    }
}
