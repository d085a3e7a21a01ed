//! Named families of reference singular-value profiles, discretized by
//! quantiles with equal weights.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::DiscreteMeasure;
use crate::error::{Error, Result};
use crate::numeric::brent;

/// Family parameters. Each family reads only the fields it needs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ReferenceParams {
    #[serde(default)]
    pub a: Option<f64>,
    #[serde(default)]
    pub b: Option<f64>,
    #[serde(default)]
    pub p: Option<f64>,
}

pub trait ReferenceFamily: Send + Sync {
    fn name(&self) -> &'static str;
    fn build(&self, params: &ReferenceParams, n_atoms: usize) -> Result<DiscreteMeasure>;
}

/// Quantile midpoints `(i − ½)/n`, `i = 1..=n`.
fn midpoints(n: usize) -> impl Iterator<Item = f64> {
    (1..=n).map(move |i| (i as f64 - 0.5) / n as f64)
}

fn require(value: Option<f64>, family: &str, field: &str) -> Result<f64> {
    match value {
        Some(v) if v.is_finite() => Ok(v),
        Some(v) => Err(Error::invalid(format!("{family}: parameter {field} = {v} is not finite"))),
        None => Err(Error::invalid(format!("{family}: missing parameter {field}"))),
    }
}

/// Density `(1/π)√(4 − x²)` on `[0, 2]`.
pub struct QuarterCircle;

impl QuarterCircle {
    pub fn cdf(x: f64) -> f64 {
        let x = x.clamp(0.0, 2.0);
        (0.5 * x * (4.0 - x * x).sqrt() + 2.0 * (0.5 * x).asin()) / PI
    }

    pub fn quantile(p: f64) -> Result<f64> {
        brent(|x| Self::cdf(x) - p, 0.0, 2.0, 1e-15, 200)
    }
}

impl ReferenceFamily for QuarterCircle {
    fn name(&self) -> &'static str {
        "quarter_circle"
    }

    fn build(&self, _params: &ReferenceParams, n_atoms: usize) -> Result<DiscreteMeasure> {
        let atoms = midpoints(n_atoms).map(Self::quantile).collect::<Result<Vec<_>>>()?;
        DiscreteMeasure::from_unsorted(&atoms, &vec![1.0; n_atoms])
    }
}

/// `p δ_a + (1 − p) δ_b`; the atom count is ignored.
pub struct TwoPoint;

impl ReferenceFamily for TwoPoint {
    fn name(&self) -> &'static str {
        "two_point"
    }

    fn build(&self, params: &ReferenceParams, _n_atoms: usize) -> Result<DiscreteMeasure> {
        let a = require(params.a, self.name(), "a")?;
        let b = require(params.b, self.name(), "b")?;
        let p = require(params.p.or(Some(0.5)), self.name(), "p")?;
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::invalid(format!("two_point: p = {p} must lie in (0, 1)")));
        }
        DiscreteMeasure::from_unsorted(&[a, b], &[p, 1.0 - p])
    }
}

/// Uniform distribution on `[a, b]`.
pub struct Uniform;

impl ReferenceFamily for Uniform {
    fn name(&self) -> &'static str {
        "uniform"
    }

    fn build(&self, params: &ReferenceParams, n_atoms: usize) -> Result<DiscreteMeasure> {
        let a = require(params.a, self.name(), "a")?;
        let b = require(params.b, self.name(), "b")?;
        if !(a < b) {
            return Err(Error::invalid(format!("uniform: need a < b, got [{a}, {b}]")));
        }
        let atoms: Vec<f64> = midpoints(n_atoms).map(|q| a + (b - a) * q).collect();
        DiscreteMeasure::from_unsorted(&atoms, &vec![1.0; n_atoms])
    }
}

/// Name-keyed collection of reference families.
pub struct ReferenceRegistry {
    families: BTreeMap<&'static str, Box<dyn ReferenceFamily>>,
}

impl ReferenceRegistry {
    pub fn empty() -> Self {
        ReferenceRegistry { families: BTreeMap::new() }
    }

    pub fn register(&mut self, family: Box<dyn ReferenceFamily>) {
        self.families.insert(family.name(), family);
    }

    pub fn get(&self, name: &str) -> Option<&dyn ReferenceFamily> {
        self.families.get(name).map(|f| f.as_ref())
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.families.keys().copied()
    }

    pub fn build(&self, name: &str, params: &ReferenceParams, n_atoms: usize) -> Result<DiscreteMeasure> {
        if n_atoms < 2 {
            return Err(Error::invalid(format!("reference measures need n_atoms >= 2, got {n_atoms}")));
        }
        let family = self.get(name).ok_or_else(|| {
            let known: Vec<_> = self.names().collect();
            Error::invalid(format!("unknown reference measure '{name}' (known: {})", known.join(", ")))
        })?;
        family.build(params, n_atoms)
    }
}

impl Default for ReferenceRegistry {
    fn default() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(QuarterCircle));
        r.register(Box::new(TwoPoint));
        r.register(Box::new(Uniform));
        r
    }
}

/// Builds a reference measure from the default registry.
pub fn reference_measure(name: &str, params: &ReferenceParams, n_atoms: usize) -> Result<DiscreteMeasure> {
    ReferenceRegistry::default().build(name, params, n_atoms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn quarter_circle_quantiles() {
        let mu = reference_measure("quarter_circle", &ReferenceParams::default(), 4).unwrap();
        assert_eq!(mu.len(), 4);
        for (i, x) in mu.atoms().iter().enumerate() {
            assert_relative_eq!(QuarterCircle::cdf(*x), (i as f64 + 0.5) / 4.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn two_point_and_uniform() {
        let p = ReferenceParams { a: Some(1.0), b: Some(2.0), p: Some(0.5) };
        let mu = reference_measure("two_point", &p, 7).unwrap();
        assert_eq!(mu.atoms(), &[1.0, 2.0]);
        assert_eq!(mu.weights(), &[0.5, 0.5]);
        let u = reference_measure("uniform", &ReferenceParams { a: Some(0.0), b: Some(1.0), p: None }, 2).unwrap();
        assert_eq!(u.atoms(), &[0.25, 0.75]);
    }

    #[test]
    fn unknown_name_and_small_counts_fail() {
        assert!(reference_measure("semicircle", &ReferenceParams::default(), 4).is_err());
        assert!(reference_measure("quarter_circle", &ReferenceParams::default(), 1).is_err());
        assert!(reference_measure("two_point", &ReferenceParams::default(), 2).is_err());
    }
}
