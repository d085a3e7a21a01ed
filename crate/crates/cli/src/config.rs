//! Experiment configuration: `{"measure", "ensemble", "grid", "thresholds"}`.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;
use ringlaw::locallaw::{dyadic_etas, BlockTarget, DEFAULT_SLOPE_PASS};
use ringlaw::measure::{ReferenceParams, ReferenceRegistry, RingGeometry};
use ringlaw::models::Symmetry;
use ringlaw::DiscreteMeasure;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// Tolerance on the total mass of a user-supplied measure.
pub const WEIGHT_SUM_TOL: f64 = 1e-9;
pub const DEFAULT_REFERENCE_ATOMS: usize = 2000;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<MeasureSpec>,
    #[serde(default)]
    pub ensemble: EnsembleSpec,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub thresholds: Thresholds,
}

/// Either explicit `atoms` and `weights`, or a named reference family.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atoms: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<ReferenceParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_atoms: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default)]
    pub symmetry: Symmetry,
    #[serde(default)]
    pub seed: u64,
    /// Radius of the `δ_r^sym` partner.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<Complex64>,
    /// Profile of the `Ξ` block.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi: Option<MeasureSpec>,
    /// Second measure of a free convolution.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partner: Option<MeasureSpec>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_values: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta_values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta_max: Option<f64>,
    /// Size `N` only uses `η >= N^{−eta_floor_exponent}`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta_floor_exponent: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta_count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w_values: Option<Vec<Complex64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energies: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quad_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass_radii: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w0: Option<Complex64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bump_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cells: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_values: Option<Vec<Complex64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interval: Option<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<BlockTarget>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    #[serde(default = "default_slope_pass")]
    pub slope_pass: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_dev: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap_fraction: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density_threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_d_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eigvec_max: Option<f64>,
}

fn default_slope_pass() -> f64 {
    DEFAULT_SLOPE_PASS
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            slope_pass: DEFAULT_SLOPE_PASS,
            max_dev: None,
            gap_max: None,
            gap_fraction: None,
            density_threshold: None,
            lambda_d_max: None,
            eigvec_max: None,
        }
    }
}

/// Value of a required field or a validation error naming it.
pub fn require<T: Clone>(value: &Option<T>, path: &str) -> CliResult<T> {
    value.clone().ok_or_else(|| CliError::validation(path, "missing required field"))
}

impl MeasureSpec {
    /// Builds the measure; `path` is its location in the config.
    pub fn build(&self, path: &str) -> CliResult<DiscreteMeasure> {
        if let Some(name) = &self.reference {
            if self.atoms.is_some() || self.weights.is_some() {
                return Err(CliError::validation(
                    path,
                    format!("measure `{path}` gives both a reference family and explicit atoms"),
                ));
            }
            let params = self.params.unwrap_or_default();
            let n_atoms = self.n_atoms.unwrap_or(DEFAULT_REFERENCE_ATOMS);
            return ReferenceRegistry::default()
                .build(name, &params, n_atoms)
                .map_err(|e| CliError::validation(format!("{path}.reference"), e.to_string()));
        }
        let atoms = require(&self.atoms, &format!("{path}.atoms"))?;
        let weights = require(&self.weights, &format!("{path}.weights"))?;
        if atoms.len() != weights.len() {
            return Err(CliError::validation(
                format!("{path}.weights"),
                format!("measure `{path}` has {} atoms but {} weights", atoms.len(), weights.len()),
            ));
        }
        if let Some(i) = weights.iter().position(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(CliError::validation(
                format!("{path}.weights[{i}]"),
                format!("measure `{path}`: weight {} is not positive", weights[i]),
            ));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(CliError::validation(
                format!("{path}.weights"),
                format!("measure `{path}`: weights sum to {total}, expected 1"),
            ));
        }
        DiscreteMeasure::from_unsorted(&atoms, &weights).map_err(|e| CliError::validation(path, e.to_string()))
    }
}

impl Config {
    pub fn measure(&self) -> CliResult<DiscreteMeasure> {
        require(&self.measure, "measure")?.build("measure")
    }

    pub fn xi(&self) -> CliResult<DiscreteMeasure> {
        require(&self.ensemble.xi, "ensemble.xi")?.build("ensemble.xi")
    }

    pub fn n(&self) -> CliResult<usize> {
        positive(require(&self.ensemble.n, "ensemble.n")?, "ensemble.n")
    }

    pub fn trials(&self) -> CliResult<usize> {
        positive(require(&self.grid.trials, "grid.trials")?, "grid.trials")
    }

    pub fn n_values(&self) -> CliResult<Vec<usize>> {
        let ns = require(&self.grid.n_values, "grid.n_values")?;
        if ns.is_empty() {
            return Err(CliError::validation("grid.n_values", "needs at least one size"));
        }
        if let Some(i) = ns.iter().position(|n| *n == 0) {
            return Err(CliError::validation(format!("grid.n_values[{i}]"), "sizes must be positive"));
        }
        Ok(ns)
    }

    /// Explicit `eta_values`, or the dyadic grid on `[eta_min, eta_max]`.
    /// Without `eta_min`, the floor exponent and the largest size fix it.
    pub fn eta_values(&self, n_values: &[usize]) -> CliResult<Vec<f64>> {
        if let Some(etas) = &self.grid.eta_values {
            return Ok(etas.clone());
        }
        let eta_max = self.grid.eta_max.unwrap_or(1.0);
        let eta_min = match (self.grid.eta_min, self.grid.eta_floor_exponent) {
            (Some(e), _) => e,
            (None, Some(exp)) => {
                let n_max = n_values.iter().copied().max().unwrap_or(1);
                (n_max as f64).powf(-exp) * (1.0 - 1e-12)
            }
            (None, None) => return Err(CliError::validation("grid.eta_values", "missing required field")),
        };
        dyadic_etas(eta_min, eta_max).map_err(|e| CliError::validation("grid.eta_min", e.to_string()))
    }

    /// Annulus inset: `grid.tau` or the default 5% of the ring width.
    pub fn tau(&self, mu_sigma: &DiscreteMeasure) -> CliResult<f64> {
        match self.grid.tau {
            Some(t) => Ok(t),
            None => {
                let r = mu_sigma.radii().map_err(|e| CliError::at("measure", e))?;
                Ok(RingGeometry::default_tau(r.r_minus, r.r_plus))
            }
        }
    }

    /// Checks that need no numerics: measures, ring inset, grids. Returns
    /// every problem found.
    pub fn validate(&self) -> Vec<CliError> {
        let mut errors = Vec::new();
        let mut sigma = None;
        if let Some(spec) = &self.measure {
            match spec.build("measure") {
                Ok(mu) => sigma = Some(mu),
                Err(e) => errors.push(e),
            }
        }
        for (spec, path) in [(&self.ensemble.xi, "ensemble.xi"), (&self.ensemble.partner, "ensemble.partner")] {
            if let Some(Err(e)) = spec.as_ref().map(|s| s.build(path)) {
                errors.push(e);
            }
        }
        if let (Some(mu), Some(tau)) = (&sigma, self.grid.tau) {
            if mu.is_nonnegative() {
                if let Err(e) = check_annulus(mu, tau) {
                    errors.push(e);
                }
            }
        }
        if let Some(r) = self.ensemble.r {
            if !(r > 0.0 && r.is_finite()) {
                errors.push(CliError::validation("ensemble.r", format!("r must be positive, got {r}")));
            }
        }
        if let Some(etas) = &self.grid.eta_values {
            if etas.is_empty() || etas.iter().any(|e| !(*e > 0.0)) || etas.windows(2).any(|p| p[1] >= p[0]) {
                errors.push(CliError::validation("grid.eta_values", "must be positive and strictly decreasing"));
            }
        }
        if self.grid.trials == Some(0) {
            errors.push(CliError::validation("grid.trials", "must be positive"));
        }
        if !(self.thresholds.slope_pass.is_finite()) {
            errors.push(CliError::validation("thresholds.slope_pass", "must be finite"));
        }
        errors
    }
}

fn positive(v: usize, path: &str) -> CliResult<usize> {
    if v == 0 {
        Err(CliError::validation(path, "must be positive"))
    } else {
        Ok(v)
    }
}

/// Rejects an inset that leaves no annulus, citing the ring bounds.
pub fn check_annulus(mu_sigma: &DiscreteMeasure, tau: f64) -> CliResult<RingGeometry> {
    let g = RingGeometry::new(mu_sigma, tau).map_err(|e| CliError::validation("grid.tau", e.to_string()))?;
    if g.annulus().is_none() {
        return Err(CliError::validation(
            "grid.tau",
            format!(
                "tau = {tau} leaves an empty annulus: r_minus + tau = {} is not below r_plus - tau = {} \
                 (ring bounds r_minus = {}, r_plus = {})",
                g.r_minus + tau,
                g.r_plus - tau,
                g.r_minus,
                g.r_plus
            ),
        ));
    }
    Ok(g)
}

/// Parses a config or a run manifest (whose echoed `config` is used).
pub fn parse_config(text: &str) -> CliResult<Config> {
    let mut value: Value =
        serde_json::from_str(text).map_err(|e| CliError::validation("", format!("malformed JSON: {e}")))?;
    if let Value::Object(map) = &mut value {
        if map.contains_key("config_hash") {
            value = map.remove("config").ok_or_else(|| CliError::validation("config", "manifest has no config"))?;
        }
    }
    serde_path_to_error::deserialize(value).map_err(|e| {
        let parent = e.path().to_string();
        let message = e.inner().to_string();
        let path = match missing_field(&message) {
            Some(field) if parent == "." => field.to_string(),
            Some(field) => format!("{parent}.{field}"),
            None => parent,
        };
        CliError::validation(path, message)
    })
}

fn missing_field(message: &str) -> Option<&str> {
    let rest = message.strip_prefix("missing field `")?;
    rest.split('`').next()
}

pub fn load_config(path: &Path) -> CliResult<Config> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::validation("--config", format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

/// Sorted keys, no whitespace.
pub fn canonical_json(value: &Value) -> String {
    fn sorted(v: &Value) -> Value {
        match v {
            Value::Object(map) => {
                let ordered: BTreeMap<&String, Value> = map.iter().map(|(k, v)| (k, sorted(v))).collect();
                Value::Object(ordered.into_iter().map(|(k, v)| (k.clone(), v)).collect())
            }
            Value::Array(items) => Value::Array(items.iter().map(sorted).collect()),
            other => other.clone(),
        }
    }
    sorted(value).to_string()
}

pub fn config_hash(value: &Value) -> String {
    hex::encode(Sha256::digest(canonical_json(value).as_bytes()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_weights_names_path() {
        let cfg = parse_config(r#"{"measure": {"atoms": [1, 2]}}"#).unwrap();
        match cfg.measure() {
            Err(CliError::Validation { path, .. }) => assert_eq!(path, "measure.weights"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn type_errors_name_path() {
        match parse_config(r#"{"grid": {"n_values": [128, "x"]}}"#) {
            Err(CliError::Validation { path, .. }) => assert_eq!(path, "grid.n_values[1]"),
            other => panic!("{other:?}"),
        }
        match parse_config(r#"{"grid": {"bogus": 1}}"#) {
            Err(CliError::Validation { path, .. }) => assert_eq!(path, "grid.bogus"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn canonical_form_sorts_keys() {
        let a: Value = serde_json::from_str(r#"{"b": 1, "a": {"d": [1, 2], "c": 0.5}}"#).unwrap();
        assert_eq!(canonical_json(&a), r#"{"a":{"c":0.5,"d":[1,2]},"b":1}"#);
        let b: Value = serde_json::from_str(r#"{"a": {"c": 0.5, "d": [1, 2]}, "b": 1}"#).unwrap();
        assert_eq!(config_hash(&a), config_hash(&b));
    }

    #[test]
    fn annulus_check_cites_bounds() {
        let mu = DiscreteMeasure::new(vec![1.0, 2.0], vec![0.5, 0.5]).unwrap();
        let err = check_annulus(&mu, 0.2).unwrap_err().to_string();
        assert!(err.contains("r_minus = 1.2649") && err.contains("r_plus = 1.5811"), "{err}");
        assert!(check_annulus(&mu, 0.1).is_ok());
    }

    #[test]
    fn reference_measures_build() {
        let cfg = parse_config(r#"{"measure": {"reference": "quarter_circle", "n_atoms": 50}}"#).unwrap();
        assert_eq!(cfg.measure().unwrap().len(), 50);
        let cfg = parse_config(r#"{"measure": {"reference": "nope"}}"#).unwrap();
        assert!(matches!(cfg.measure(), Err(CliError::Validation { path, .. }) if path == "measure.reference"));
    }
}
