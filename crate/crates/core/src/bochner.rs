//! Vector-valued functions on atoms, families, and the L^p(μ;X) norm.

use crate::ambient::{AmbientSpace, CompactCover};
use crate::error::{Error, Result};
use crate::measure::{lp_norm, MeasureSpace, ScalarSample};
use std::sync::{Arc, Mutex};

/// A sampled function Ω → X as an atoms×dim table.
#[derive(Debug, Clone)]
pub struct VectorFunction {
    space: Arc<MeasureSpace>,
    ambient: Arc<AmbientSpace>,
    values: Vec<Vec<f64>>,
}

impl VectorFunction {
    pub fn new(
        space: Arc<MeasureSpace>,
        ambient: Arc<AmbientSpace>,
        values: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if values.len() != space.atom_count() {
            return Err(Error::LengthMismatch {
                expected: space.atom_count(),
                got: values.len(),
            });
        }
        for row in &values {
            if row.len() != ambient.dim() {
                return Err(Error::DimensionMismatch {
                    expected: ambient.dim(),
                    got: row.len(),
                });
            }
        }
        Ok(VectorFunction {
            space,
            ambient,
            values,
        })
    }

    pub fn zero(space: Arc<MeasureSpace>, ambient: Arc<AmbientSpace>) -> Self {
        let values = vec![vec![0.0; ambient.dim()]; space.atom_count()];
        VectorFunction {
            space,
            ambient,
            values,
        }
    }

    pub fn space(&self) -> &Arc<MeasureSpace> {
        &self.space
    }

    pub fn ambient(&self) -> &Arc<AmbientSpace> {
        &self.ambient
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn value(&self, atom: usize) -> &[f64] {
        &self.values[atom]
    }

    /// ω ↦ ‖f(ω)‖ as a scalar sample.
    pub fn norm_sample(&self) -> ScalarSample {
        let vals = self.values.iter().map(|v| self.ambient.norm(v)).collect();
        ScalarSample::new(self.space.clone(), vals).expect("dimensions checked at construction")
    }

    pub fn sub(&self, other: &VectorFunction) -> Result<VectorFunction> {
        if other.values.len() != self.values.len() || other.ambient.dim() != self.ambient.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.ambient.dim(),
                got: other.ambient.dim(),
            });
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect())
            .collect();
        VectorFunction::new(self.space.clone(), self.ambient.clone(), values)
    }

    pub fn add(&self, other: &VectorFunction) -> Result<VectorFunction> {
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect())
            .collect();
        VectorFunction::new(self.space.clone(), self.ambient.clone(), values)
    }

    /// Indicator restriction: keeps the atoms flagged true, zeroes the rest.
    pub fn restrict(&self, mask: &[bool]) -> Result<VectorFunction> {
        if mask.len() != self.values.len() {
            return Err(Error::LengthMismatch {
                expected: self.values.len(),
                got: mask.len(),
            });
        }
        let values = self
            .values
            .iter()
            .zip(mask)
            .map(|(v, &keep)| {
                if keep {
                    v.clone()
                } else {
                    vec![0.0; v.len()]
                }
            })
            .collect();
        VectorFunction::new(self.space.clone(), self.ambient.clone(), values)
    }

    /// Atomwise P_N.
    pub fn project(&self, n: usize) -> Result<VectorFunction> {
        let values = self
            .values
            .iter()
            .map(|v| self.ambient.partial_sum_projection(v, n))
            .collect::<Result<Vec<_>>>()?;
        VectorFunction::new(self.space.clone(), self.ambient.clone(), values)
    }

    /// Mask of atoms with ‖f(ω)‖ <= r.
    pub fn within_radius_mask(&self, r: f64) -> Vec<bool> {
        self.values
            .iter()
            .map(|v| self.ambient.norm(v) <= r)
            .collect()
    }

    /// Mask of atoms with f(ω) in the cover (closed balls).
    pub fn membership_mask(&self, cover: &CompactCover) -> Result<Vec<bool>> {
        self.values
            .iter()
            .map(|v| cover.contains(&self.ambient, v))
            .collect()
    }
}

/// ‖F‖_p = lp_norm of the atomwise X-norm sample.
pub fn bochner_norm(f: &VectorFunction, p: f64) -> Result<f64> {
    lp_norm(&f.norm_sample(), p)
}

pub fn bochner_distance(f: &VectorFunction, g: &VectorFunction, p: f64) -> Result<f64> {
    bochner_norm(&f.sub(g)?, p)
}

/// The indicator-restricted pieces used in the compactness inequality chain.
/// Pieces recombine exactly: inside + outside = original, atomwise.
#[derive(Debug, Clone)]
pub struct FamilyDecomposition {
    pub inside_radius: VectorFunction,
    pub outside_radius: VectorFunction,
    pub inside_cover: VectorFunction,
    pub outside_cover: VectorFunction,
    /// {‖f‖ <= r, f ∉ K} f
    pub in_radius_out_cover: VectorFunction,
    /// {‖f‖ <= r, f ∈ K} f
    pub in_radius_in_cover: VectorFunction,
    /// {‖f‖ > r, f ∈ K} f
    pub out_radius_in_cover: VectorFunction,
    pub radius_mask: Vec<bool>,
    pub cover_mask: Vec<bool>,
}

pub fn decompose(f: &VectorFunction, r: f64, cover: &CompactCover) -> Result<FamilyDecomposition> {
    if !(r > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "decomposition radius must be positive, got {r}"
        )));
    }
    let radius_mask = f.within_radius_mask(r);
    let cover_mask = f.membership_mask(cover)?;
    let not = |m: &[bool]| m.iter().map(|b| !b).collect::<Vec<_>>();
    let and = |a: &[bool], b: &[bool]| {
        a.iter()
            .zip(b)
            .map(|(&x, &y)| x && y)
            .collect::<Vec<_>>()
    };
    Ok(FamilyDecomposition {
        inside_radius: f.restrict(&radius_mask)?,
        outside_radius: f.restrict(&not(&radius_mask))?,
        inside_cover: f.restrict(&cover_mask)?,
        outside_cover: f.restrict(&not(&cover_mask))?,
        in_radius_out_cover: f.restrict(&and(&radius_mask, &not(&cover_mask)))?,
        in_radius_in_cover: f.restrict(&and(&radius_mask, &cover_mask))?,
        out_radius_in_cover: f.restrict(&and(&not(&radius_mask), &cover_mask))?,
        radius_mask,
        cover_mask,
    })
}

type Generator = Arc<dyn Fn(usize) -> VectorFunction + Send + Sync>;

/// A family V as a deterministic indexed generator with an append-only
/// prefix cache. The generator must be pure: a given index always yields the
/// identical function.
#[derive(Clone)]
pub struct FunctionFamily {
    generator: Generator,
    cache: Arc<Mutex<Vec<VectorFunction>>>,
}

impl std::fmt::Debug for FunctionFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let cached = self.cache.lock().unwrap().len();
        write!(f, "FunctionFamily {{ cached: {cached} }}")
    }
}

impl FunctionFamily {
    pub fn new(generator: impl Fn(usize) -> VectorFunction + Send + Sync + 'static) -> Self {
        FunctionFamily {
            generator: Arc::new(generator),
            cache: Arc::new(Mutex::new(Vec::new())),
        }
    }

    /// Member at 1-based index n (the sequences are indexed f_1, f_2, ...).
    pub fn member(&self, n: usize) -> VectorFunction {
        assert!(n >= 1, "family members are 1-indexed");
        (self.generator)(n)
    }

    /// Materialize the first `len` members, reusing the cache.
    pub fn prefix(&self, len: usize) -> Result<Vec<VectorFunction>> {
        if len == 0 {
            return Err(Error::EmptyInput("prefix length must be at least 1"));
        }
        let mut cache = self.cache.lock().unwrap();
        while cache.len() < len {
            let n = cache.len() + 1;
            cache.push((self.generator)(n));
        }
        Ok(cache[..len].to_vec())
    }
}

/// Greedy ε-net over the prefix, measured in the Bochner p-norm. Returns the
/// selected (0-based) indices; seed and ties follow the lowest index.
pub fn family_greedy_net(prefix: &[VectorFunction], p: f64, eps: f64) -> Result<Vec<usize>> {
    if prefix.is_empty() {
        return Err(Error::EmptyInput("family net needs a nonempty prefix"));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "net radius must be positive, got {eps}"
        )));
    }
    let mut min_dist = vec![f64::INFINITY; prefix.len()];
    let mut selected: Vec<usize> = Vec::new();
    let mut next = 0usize;
    loop {
        for (j, f) in prefix.iter().enumerate() {
            let d = bochner_distance(&prefix[next], f, p)?;
            if d < min_dist[j] {
                min_dist[j] = d;
            }
        }
        selected.push(next);
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
    Ok(selected)
}

/// Size of the greedy ε-net: an upper bound on the minimal net size and,
/// through separation, a proxy for the covering number.
pub fn covering_number(prefix: &[VectorFunction], p: f64, eps: f64) -> Result<usize> {
    Ok(family_greedy_net(prefix, p, eps)?.len())
}
