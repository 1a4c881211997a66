//! The three compactness criteria as computable moduli and certificates.

use crate::ambient::CompactCover;
use crate::bochner::{bochner_norm, VectorFunction};
use crate::error::{Error, Result};
use crate::measure::{lp_norm, ScalarSample};
use serde::{Deserialize, Serialize};

/// Uniform-integrability certificate: for every prefix member,
/// ‖1_{‖f‖>r} f‖_p <= bound.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UICertificate {
    pub r: f64,
    pub bound: f64,
    pub p: f64,
}

/// Tightness certificate: for every prefix member, μ({f ∉ cover}) <= eps.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TightnessCertificate {
    pub cover: CompactCover,
    pub eps: f64,
}

/// Per-functional covering-number tables on a geometric ε-grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalarReport {
    pub functionals: Vec<Vec<f64>>,
    pub eps_grid: Vec<f64>,
    /// covering_tables[k][j] = covering number of {⟨f, x*_k⟩} at eps_grid[j]
    pub covering_tables: Vec<Vec<usize>>,
}

/// sup over the prefix of ‖1_{‖f‖>r} f‖_p (strict tail).
pub fn ui_modulus(prefix: &[VectorFunction], p: f64, r: f64) -> Result<f64> {
    if prefix.is_empty() {
        return Err(Error::EmptyInput("ui_modulus needs a nonempty prefix"));
    }
    if !(r > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "truncation radius must be positive, got {r}"
        )));
    }
    let mut sup = 0.0_f64;
    for f in prefix {
        let mask: Vec<bool> = f.values().iter().map(|v| f.ambient().norm(v) > r).collect();
        let tail = f.restrict(&mask)?;
        sup = sup.max(bochner_norm(&tail, p)?);
    }
    Ok(sup)
}

/// sup over the prefix of μ({f ∉ cover}).
pub fn tightness_deficiency(prefix: &[VectorFunction], cover: &CompactCover) -> Result<f64> {
    if prefix.is_empty() {
        return Err(Error::EmptyInput(
            "tightness_deficiency needs a nonempty prefix",
        ));
    }
    let mut sup = 0.0_f64;
    for f in prefix {
        let member_mask = f.membership_mask(cover)?;
        let outside: Vec<bool> = member_mask.iter().map(|&m| !m).collect();
        sup = sup.max(f.space().subset_measure(&outside)?);
    }
    Ok(sup)
}

impl UICertificate {
    /// Re-verify the certified inequality on a prefix.
    pub fn verify(&self, prefix: &[VectorFunction]) -> Result<bool> {
        Ok(ui_modulus(prefix, self.p, self.r)? <= self.bound + 1e-12)
    }
}

impl TightnessCertificate {
    pub fn verify(&self, prefix: &[VectorFunction]) -> Result<bool> {
        Ok(tightness_deficiency(prefix, &self.cover)? <= self.eps + 1e-12)
    }
}

/// ⟨f, x*⟩ atomwise (coordinate dot product).
pub fn pair_with_functional(f: &VectorFunction, functional: &[f64]) -> Result<ScalarSample> {
    if functional.len() != f.ambient().dim() {
        return Err(Error::DimensionMismatch {
            expected: f.ambient().dim(),
            got: functional.len(),
        });
    }
    let vals = f
        .values()
        .iter()
        .map(|v| v.iter().zip(functional).map(|(x, c)| x * c).sum())
        .collect();
    ScalarSample::new(f.space().clone(), vals)
}

/// Greedy net size of a set of scalar samples in lp_norm.
fn scalar_covering_number(samples: &[ScalarSample], p: f64, eps: f64) -> Result<usize> {
    let dist = |a: &ScalarSample, b: &ScalarSample| -> Result<f64> {
        let diff: Vec<f64> = a
            .values()
            .iter()
            .zip(b.values())
            .map(|(x, y)| x - y)
            .collect();
        lp_norm(&ScalarSample::new(a.space().clone(), diff)?, p)
    };
    let mut min_dist = vec![f64::INFINITY; samples.len()];
    let mut count = 0usize;
    let mut next = 0usize;
    loop {
        for (j, s) in samples.iter().enumerate() {
            let d = dist(&samples[next], s)?;
            if d < min_dist[j] {
                min_dist[j] = d;
            }
        }
        count += 1;
        let mut farthest = 0usize;
        let mut farthest_dist = 0.0_f64;
        for (j, &d) in min_dist.iter().enumerate() {
            if d > farthest_dist {
                farthest_dist = d;
                farthest = j;
            }
        }
        if farthest_dist <= eps {
            break;
        }
        next = farthest;
    }
    Ok(count)
}

/// Default geometric ε grid: start, start/2, ..., `levels` entries.
pub fn geometric_grid(start: f64, levels: usize) -> Vec<f64> {
    (0..levels).map(|k| start * 2.0_f64.powi(-(k as i32))).collect()
}

/// Canonical-coordinate functionals e_1..e_{min(d,16)}.
pub fn default_functionals(dim: usize) -> Vec<Vec<f64>> {
    (0..dim.min(16))
        .map(|j| (0..dim).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

pub fn scalar_compactness_report(
    prefix: &[VectorFunction],
    p: f64,
    functionals: &[Vec<f64>],
    eps_grid: &[f64],
) -> Result<ScalarReport> {
    if prefix.is_empty() {
        return Err(Error::EmptyInput("scalar report needs a nonempty prefix"));
    }
    if functionals.is_empty() {
        return Err(Error::EmptyInput("scalar report needs functionals"));
    }
    if eps_grid.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::InvalidParameter("ε grid must be positive".into()));
    }
    let mut covering_tables = Vec::with_capacity(functionals.len());
    for x_star in functionals {
        let samples: Vec<ScalarSample> = prefix
            .iter()
            .map(|f| pair_with_functional(f, x_star))
            .collect::<Result<_>>()?;
        let table: Vec<usize> = eps_grid
            .iter()
            .map(|&e| scalar_covering_number(&samples, p, e))
            .collect::<Result<_>>()?;
        covering_tables.push(table);
    }
    Ok(ScalarReport {
        functionals: functionals.to_vec(),
        eps_grid: eps_grid.to_vec(),
        covering_tables,
    })
}
