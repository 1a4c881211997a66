//! Finite weighted atom spaces and scalar p-norms.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Neumaier compensated summation.
pub(crate) fn compensated_sum(terms: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for t in terms {
        let new_sum = sum + t;
        if sum.abs() >= t.abs() {
            comp += (sum - new_sum) + t;
        } else {
            comp += (t - new_sum) + sum;
        }
        sum = new_sum;
    }
    sum + comp
}

/// A finite measure space: positive atom weights, cached total mass.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeasureSpace {
    weights: Vec<f64>,
    total_mass: f64,
    normalized: bool,
}

impl MeasureSpace {
    /// Probability-normalized space: weights are rescaled to total mass 1.
    pub fn probability(weights: &[f64]) -> Result<Arc<Self>> {
        let raw = Self::validate(weights)?;
        let weights: Vec<f64> = weights.iter().map(|w| w / raw).collect();
        let total_mass = compensated_sum(weights.iter().copied());
        Ok(Arc::new(MeasureSpace {
            weights,
            total_mass,
            normalized: true,
        }))
    }

    /// Raw finite measure space, no renormalization.
    pub fn raw(weights: &[f64]) -> Result<Arc<Self>> {
        let total_mass = Self::validate(weights)?;
        Ok(Arc::new(MeasureSpace {
            weights: weights.to_vec(),
            total_mass,
            normalized: false,
        }))
    }

    /// Uniform probability space on `n` atoms.
    pub fn uniform(n: usize) -> Result<Arc<Self>> {
        if n == 0 {
            return Err(Error::EmptyInput("measure space needs at least one atom"));
        }
        Self::probability(&vec![1.0; n])
    }

    fn validate(weights: &[f64]) -> Result<f64> {
        if weights.is_empty() {
            return Err(Error::EmptyInput("measure space needs at least one atom"));
        }
        for (i, &w) in weights.iter().enumerate() {
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "weight {i} must be a positive finite real, got {w}"
                )));
            }
        }
        Ok(compensated_sum(weights.iter().copied()))
    }

    pub fn atom_count(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, atom: usize) -> f64 {
        self.weights[atom]
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// μ of the set of atoms flagged true.
    pub fn subset_measure(&self, mask: &[bool]) -> Result<f64> {
        if mask.len() != self.weights.len() {
            return Err(Error::LengthMismatch {
                expected: self.weights.len(),
                got: mask.len(),
            });
        }
        Ok(compensated_sum(
            self.weights
                .iter()
                .zip(mask)
                .filter(|(_, &m)| m)
                .map(|(&w, _)| w),
        ))
    }
}

/// A scalar function on the atoms of a measure space.
#[derive(Debug, Clone)]
pub struct ScalarSample {
    space: Arc<MeasureSpace>,
    values: Vec<f64>,
}

impl ScalarSample {
    pub fn new(space: Arc<MeasureSpace>, values: Vec<f64>) -> Result<Self> {
        if values.len() != space.atom_count() {
            return Err(Error::LengthMismatch {
                expected: space.atom_count(),
                got: values.len(),
            });
        }
        Ok(ScalarSample { space, values })
    }

    pub fn space(&self) -> &Arc<MeasureSpace> {
        &self.space
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Mask of atoms where |f| > r, strict inequality.
    pub fn strict_tail_mask(&self, r: f64) -> Vec<bool> {
        self.values.iter().map(|v| v.abs() > r).collect()
    }
}

/// (Σ_i μ_i |f_i|^p)^{1/p} for p >= 1.
pub fn lp_norm(f: &ScalarSample, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::InvalidExponent(p));
    }
    let sum = compensated_sum(
        f.space
            .weights()
            .iter()
            .zip(&f.values)
            .map(|(&w, &v)| w * v.abs().powf(p)),
    );
    Ok(sum.powf(1.0 / p))
}

/// μ of the atoms flagged true. Thin wrapper over [`MeasureSpace::subset_measure`].
pub fn subset_measure(space: &MeasureSpace, mask: &[bool]) -> Result<f64> {
    space.subset_measure(mask)
}
