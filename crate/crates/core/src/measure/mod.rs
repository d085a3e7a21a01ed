//! Atomic probability measures on the real line and their transforms.

mod nevanlinna;
mod reference;

pub use nevanlinna::{nevanlinna_rep, NevanlinnaRep, PositiveMeasure};
pub use reference::{
    reference_measure, ReferenceFamily, ReferenceParams, ReferenceRegistry, TwoPoint, Uniform,
    QuarterCircle,
};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the total mass of a probability measure.
pub const MASS_TOL: f64 = 1e-12;
/// Atoms closer than this are merged.
pub const MERGE_TOL: f64 = 1e-12;

/// Weighted atomic probability measure with strictly increasing atoms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMeasure")]
pub struct DiscreteMeasure {
    atoms: Vec<f64>,
    weights: Vec<f64>,
}

#[derive(Deserialize)]
struct RawMeasure {
    atoms: Vec<f64>,
    weights: Vec<f64>,
}

impl TryFrom<RawMeasure> for DiscreteMeasure {
    type Error = Error;
    fn try_from(raw: RawMeasure) -> Result<Self> {
        DiscreteMeasure::new(raw.atoms, raw.weights)
    }
}

impl DiscreteMeasure {
    /// Validating constructor.
    pub fn new(atoms: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::invalid("measure has no atoms"));
        }
        if atoms.len() != weights.len() {
            return Err(Error::invalid(format!(
                "{} atoms but {} weights",
                atoms.len(),
                weights.len()
            )));
        }
        if let Some(i) = atoms.iter().position(|x| !x.is_finite()) {
            return Err(Error::invalid(format!("atom {i} is not finite")));
        }
        if let Some(i) = weights.iter().position(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::invalid(format!("weight {i} is not a positive finite number")));
        }
        if let Some(i) = atoms.windows(2).position(|p| p[0] >= p[1]) {
            return Err(Error::invalid(format!(
                "atoms must be strictly increasing (atoms[{}] = {} >= atoms[{}] = {})",
                i,
                atoms[i],
                i + 1,
                atoms[i + 1]
            )));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::invalid(format!("weights sum to {total:.15}, expected 1")));
        }
        Ok(DiscreteMeasure { atoms, weights })
    }

    /// Builds a measure from unsorted atoms, merging near-coincident ones and
    /// renormalizing the weights.
    pub fn from_unsorted(atoms: &[f64], weights: &[f64]) -> Result<Self> {
        if atoms.len() != weights.len() {
            return Err(Error::invalid("atoms and weights differ in length"));
        }
        let mut pairs: Vec<(f64, f64)> = atoms.iter().copied().zip(weights.iter().copied()).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut xs: Vec<f64> = Vec::with_capacity(pairs.len());
        let mut ws: Vec<f64> = Vec::with_capacity(pairs.len());
        for (x, w) in pairs {
            match xs.last() {
                Some(&last) if (x - last).abs() <= MERGE_TOL => *ws.last_mut().unwrap() += w,
                _ => {
                    xs.push(x);
                    ws.push(w);
                }
            }
        }
        let total: f64 = ws.iter().sum();
        if !(total > 0.0) {
            return Err(Error::invalid("total weight must be positive"));
        }
        ws.iter_mut().for_each(|w| *w /= total);
        DiscreteMeasure::new(xs, ws)
    }

    /// Empirical measure of a sample (equal weights).
    pub fn empirical(samples: &[f64]) -> Result<Self> {
        let w = vec![1.0; samples.len()];
        Self::from_unsorted(samples, &w)
    }

    pub fn point_mass(x: f64) -> Self {
        DiscreteMeasure { atoms: vec![x], weights: vec![1.0] }
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.atoms.iter().copied().zip(self.weights.iter().copied())
    }

    /// Atoms closed under negation with equal weights, to 1e-12.
    pub fn is_symmetric(&self) -> bool {
        let n = self.atoms.len();
        (0..n).all(|i| {
            let j = n - 1 - i;
            (self.atoms[i] + self.atoms[j]).abs() <= 1e-12
                && (self.weights[i] - self.weights[j]).abs() <= 1e-12
        })
    }

    pub fn is_nonnegative(&self) -> bool {
        self.atoms[0] >= 0.0
    }

    /// `k`-th raw moment.
    pub fn moment(&self, k: i32) -> f64 {
        self.iter().map(|(x, w)| w * x.powi(k)).sum()
    }

    /// Image under `x -> c x`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::domain(format!("scale factor must be positive, got {c}")));
        }
        let atoms = self.atoms.iter().map(|x| c * x).collect();
        DiscreteMeasure::new(atoms, self.weights.clone())
    }

    /// `½[μ(A) + μ(−A)]`.
    pub fn symmetrize(&self) -> Self {
        let mut atoms = Vec::with_capacity(2 * self.len());
        let mut weights = Vec::with_capacity(2 * self.len());
        for (x, w) in self.iter() {
            if x == 0.0 {
                atoms.push(0.0);
                weights.push(w);
            } else {
                atoms.push(x);
                weights.push(0.5 * w);
                atoms.push(-x);
                weights.push(0.5 * w);
            }
        }
        let merged = Self::from_unsorted(&atoms, &weights)
            .expect("symmetrization of a valid measure is valid");
        merged.enforce_symmetry()
    }

    /// Replaces each mirrored pair by its exact average so `is_symmetric` holds
    /// bit for bit after merging.
    fn enforce_symmetry(mut self) -> Self {
        let n = self.atoms.len();
        if !self.is_symmetric() {
            return self;
        }
        for i in 0..n / 2 {
            let j = n - 1 - i;
            let x = 0.5 * (self.atoms[j] - self.atoms[i]);
            let w = 0.5 * (self.weights[i] + self.weights[j]);
            self.atoms[i] = -x;
            self.atoms[j] = x;
            self.weights[i] = w;
            self.weights[j] = w;
        }
        if n % 2 == 1 {
            self.atoms[n / 2] = 0.0;
        }
        self
    }

    /// Stieltjes transform `Σ w/(x − z)` for `Im z > 0`.
    pub fn stieltjes(&self, z: Complex64) -> Result<Complex64> {
        if !(z.im > 0.0) {
            return Err(Error::domain(format!("Stieltjes transform needs Im z > 0, got {z}")));
        }
        Ok(self.stieltjes_unchecked(z))
    }

    pub(crate) fn stieltjes_unchecked(&self, z: Complex64) -> Complex64 {
        self.iter().map(|(x, w)| w / (x - z)).sum()
    }

    /// Stieltjes transform together with its derivative in `z`.
    pub(crate) fn stieltjes_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut m = Complex64::new(0.0, 0.0);
        let mut dm = Complex64::new(0.0, 0.0);
        for (x, w) in self.iter() {
            let r = 1.0 / (x - z);
            m += w * r;
            dm += w * r * r;
        }
        (m, dm)
    }

    /// Negative reciprocal Stieltjes transform `F = −1/m`.
    pub fn neg_recip_stieltjes(&self, z: Complex64) -> Result<Complex64> {
        Ok(-1.0 / self.stieltjes(z)?)
    }

    /// `(s_plus, second_moment)`.
    pub fn support_stats(&self) -> SupportStats {
        let s_plus = self.atoms[0].abs().max(self.atoms[self.len() - 1].abs());
        SupportStats { s_plus, second_moment: self.moment(2) }
    }

    /// Inner and outer ring radii of a measure on `[0, ∞)`.
    pub fn radii(&self) -> Result<Radii> {
        if !self.is_nonnegative() {
            return Err(Error::domain("radii need a measure supported on [0, inf)"));
        }
        let r_plus = self.moment(2).sqrt();
        let r_minus = if self.atoms[0] == 0.0 { 0.0 } else { self.moment(-2).powf(-0.5) };
        Ok(Radii { r_minus, r_plus, degenerate: self.len() < 2 })
    }

    /// `μ((−∞, x])`.
    pub fn cdf(&self, x: f64) -> f64 {
        let k = self.atoms.partition_point(|&a| a <= x);
        self.weights[..k].iter().sum()
    }

    fn cumulative(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect()
    }
}

/// Output of [`DiscreteMeasure::support_stats`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupportStats {
    pub s_plus: f64,
    pub second_moment: f64,
}

/// Output of [`DiscreteMeasure::radii`]. `degenerate` flags a single-atom
/// measure, for which the ring collapses to a circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Radii {
    pub r_minus: f64,
    pub r_plus: f64,
    pub degenerate: bool,
}

/// Ring radii together with the support bound and an inset `tau`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RingGeometry {
    pub r_minus: f64,
    pub r_plus: f64,
    pub s_plus: f64,
    pub tau: f64,
}

impl RingGeometry {
    pub fn new(mu_sigma: &DiscreteMeasure, tau: f64) -> Result<Self> {
        let radii = mu_sigma.radii()?;
        if radii.degenerate {
            return Err(Error::invalid("ring geometry needs at least two distinct singular values"));
        }
        if !(tau >= 0.0 && tau.is_finite()) {
            return Err(Error::domain(format!("tau must be nonnegative, got {tau}")));
        }
        Ok(RingGeometry {
            r_minus: radii.r_minus,
            r_plus: radii.r_plus,
            s_plus: mu_sigma.support_stats().s_plus,
            tau,
        })
    }

    /// Default inset: 5% of the ring width.
    pub fn default_tau(r_minus: f64, r_plus: f64) -> f64 {
        0.05 * (r_plus - r_minus)
    }

    /// `[r_minus + tau, r_plus − tau]`, or `None` when empty.
    pub fn annulus(&self) -> Option<(f64, f64)> {
        let lo = self.r_minus + self.tau;
        let hi = self.r_plus - self.tau;
        (lo < hi).then_some((lo, hi))
    }

    pub fn contains(&self, radius: f64) -> bool {
        self.annulus().is_some_and(|(lo, hi)| radius >= lo && radius <= hi)
    }
}

/// Lévy distance between two measures.
///
/// The band condition is piecewise constant in `x` between breakpoints, so it
/// is checked exactly on the merged breakpoint set; `ε` is found by bisection.
pub fn levy_distance(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> f64 {
    let cmu = mu.cumulative();
    let cnu = nu.cumulative();
    let cdf = |atoms: &[f64], cum: &[f64], x: f64| -> f64 {
        let k = atoms.partition_point(|&a| a <= x);
        if k == 0 {
            0.0
        } else {
            cum[k - 1]
        }
    };
    let band_holds = |eps: f64| -> bool {
        // F_mu(x − ε) − ε ≤ F_nu(x) ≤ F_mu(x + ε) + ε
        for (i, &b) in nu.atoms.iter().enumerate() {
            let fnu = cnu[i];
            if cdf(&mu.atoms, &cmu, b - eps) - eps > fnu {
                return false;
            }
            if fnu > cdf(&mu.atoms, &cmu, b + eps) + eps {
                return false;
            }
        }
        for (i, &a) in mu.atoms.iter().enumerate() {
            // x = a + ε: F_mu(x − ε) = cmu[i]
            if cmu[i] - eps > cdf(&nu.atoms, &cnu, a + eps) {
                return false;
            }
            // x = a − ε: F_mu(x + ε) = cmu[i]
            if cdf(&nu.atoms, &cnu, a - eps) > cmu[i] + eps {
                return false;
            }
        }
        true
    };
    if band_holds(0.0) {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..64 {
        let mid = 0.5 * (lo + hi);
        if band_holds(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}
