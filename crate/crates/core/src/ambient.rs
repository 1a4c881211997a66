//! The target coordinate space X: norms, basis projections, finite covers.

use crate::error::{Error, Result};
use crate::measure::compensated_sum;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Which norm X carries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum NormKind {
    /// ℓq for 1 <= q < ∞.
    Lq(f64),
    LInf,
}

impl NormKind {
    pub fn l1() -> Self {
        NormKind::Lq(1.0)
    }
    pub fn l2() -> Self {
        NormKind::Lq(2.0)
    }

    pub fn norm(&self, v: &[f64]) -> f64 {
        match *self {
            NormKind::Lq(q) if q == 1.0 => compensated_sum(v.iter().map(|x| x.abs())),
            NormKind::Lq(q) if q == 2.0 => {
                compensated_sum(v.iter().map(|x| x * x)).sqrt()
            }
            NormKind::Lq(q) => compensated_sum(v.iter().map(|x| x.abs().powf(q))).powf(1.0 / q),
            NormKind::LInf => v.iter().fold(0.0, |m, x| m.max(x.abs())),
        }
    }

    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        self.norm(&diff)
    }
}

/// Certified bracket on an operator norm. `lower <= ‖P‖ <= upper`; when the
/// closed form applies the bracket is tight and `exact` is set.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct OperatorNormBound {
    pub lower: f64,
    pub upper: f64,
    pub exact: bool,
}

impl OperatorNormBound {
    fn exact(v: f64) -> Self {
        OperatorNormBound {
            lower: v,
            upper: v,
            exact: true,
        }
    }

    /// The certified value used in bounds (the upper end of the bracket).
    pub fn certified(&self) -> f64 {
        self.upper
    }
}

/// Coordinate space of dimension d with a norm and an optional
/// change-of-coordinates basis (identity = canonical basis).
#[derive(Debug, Clone)]
pub struct AmbientSpace {
    dim: usize,
    norm_kind: NormKind,
    /// Columns are the basis vectors; None means canonical.
    basis: Option<DMatrix<f64>>,
    basis_inv: Option<DMatrix<f64>>,
    basis_constant: f64,
}

impl AmbientSpace {
    pub fn canonical(dim: usize, norm_kind: NormKind) -> Result<Arc<Self>> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        if let NormKind::Lq(q) = norm_kind {
            if !(q >= 1.0) || !q.is_finite() {
                return Err(Error::InvalidExponent(q));
            }
        }
        Ok(Arc::new(AmbientSpace {
            dim,
            norm_kind,
            basis: None,
            basis_inv: None,
            basis_constant: 1.0,
        }))
    }

    /// `basis_columns[k]` is the k-th basis vector.
    pub fn with_basis(dim: usize, norm_kind: NormKind, basis_columns: &[Vec<f64>]) -> Result<Arc<Self>> {
        if basis_columns.len() != dim || basis_columns.iter().any(|c| c.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: basis_columns.len(),
            });
        }
        let b = DMatrix::from_fn(dim, dim, |i, j| basis_columns[j][i]);
        let inv = b.clone().try_inverse().ok_or(Error::SingularBasis)?;
        // crude condition check: reject numerically singular tables
        let residual = (&b * &inv - DMatrix::<f64>::identity(dim, dim)).abs().max();
        if residual > 1e-6 {
            return Err(Error::SingularBasis);
        }
        let mut space = AmbientSpace {
            dim,
            norm_kind,
            basis: Some(b),
            basis_inv: Some(inv),
            basis_constant: 1.0,
        };
        let mut c: f64 = 0.0;
        for n in 1..=dim {
            c = c.max(space.projection_operator_norm(n)?.certified());
        }
        space.basis_constant = c;
        Ok(Arc::new(space))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn norm_kind(&self) -> NormKind {
        self.norm_kind
    }

    pub fn norm(&self, v: &[f64]) -> f64 {
        self.norm_kind.norm(v)
    }

    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        self.norm_kind.distance(a, b)
    }

    /// sup over N of the certified projection norm.
    pub fn basis_constant(&self) -> f64 {
        self.basis_constant
    }

    /// Coordinates of x in the basis.
    pub fn coordinates(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        match &self.basis_inv {
            None => Ok(x.to_vec()),
            Some(inv) => {
                let v = nalgebra::DVector::from_column_slice(x);
                Ok((inv * v).iter().copied().collect())
            }
        }
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// P_N x: zero the basis coordinates beyond N, map back.
    pub fn partial_sum_projection(&self, x: &[f64], n: usize) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        if n < 1 || n > self.dim {
            return Err(Error::ProjectionOutOfRange { n, dim: self.dim });
        }
        let mut coords = self.coordinates(x)?;
        for c in coords.iter_mut().skip(n) {
            *c = 0.0;
        }
        match &self.basis {
            None => Ok(coords),
            Some(b) => {
                let v = nalgebra::DVector::from_vec(coords);
                Ok((b * v).iter().copied().collect())
            }
        }
    }

    /// P_N as a dim x dim table.
    pub fn projection_matrix(&self, n: usize) -> Result<DMatrix<f64>> {
        if n < 1 || n > self.dim {
            return Err(Error::ProjectionOutOfRange { n, dim: self.dim });
        }
        let trunc = DMatrix::from_fn(self.dim, self.dim, |i, j| {
            if i == j && i < n {
                1.0
            } else {
                0.0
            }
        });
        Ok(match (&self.basis, &self.basis_inv) {
            (Some(b), Some(inv)) => b * trunc * inv,
            _ => trunc,
        })
    }

    /// Operator norm of P_N with respect to the space's norm. Exact for the
    /// canonical basis and for ℓ1/ℓ∞; bracketed (power iteration or
    /// interpolation) otherwise.
    pub fn projection_operator_norm(&self, n: usize) -> Result<OperatorNormBound> {
        if n < 1 || n > self.dim {
            return Err(Error::ProjectionOutOfRange { n, dim: self.dim });
        }
        if self.basis.is_none() || n == self.dim {
            // coordinate truncation (or the identity) is norm-one
            return Ok(OperatorNormBound::exact(1.0));
        }
        let p = self.projection_matrix(n)?;
        let col_sum_max = (0..self.dim)
            .map(|j| p.column(j).iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0_f64, f64::max);
        let row_sum_max = (0..self.dim)
            .map(|i| p.row(i).iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0_f64, f64::max);
        match self.norm_kind {
            NormKind::Lq(q) if q == 1.0 => Ok(OperatorNormBound::exact(col_sum_max)),
            NormKind::LInf => Ok(OperatorNormBound::exact(row_sum_max)),
            NormKind::Lq(q) if q == 2.0 => {
                // power iteration on PᵀP gives a lower bound; the
                // Frobenius norm and the 1/∞ interpolation bound cap it.
                let gram = p.transpose() * &p;
                let mut lower = 0.0_f64;
                // a single fixed start can sit in the null space of PᵀP, so
                // iterate from every canonical basis vector
                for j in 0..self.dim {
                    let mut v = nalgebra::DVector::from_fn(self.dim, |i, _| {
                        if i == j {
                            1.0
                        } else {
                            0.0
                        }
                    });
                    for _ in 0..200 {
                        let w = &gram * &v;
                        let norm = w.norm();
                        if norm == 0.0 {
                            break;
                        }
                        v = w / norm;
                        let rayleigh = (v.transpose() * &gram * &v)[(0, 0)];
                        lower = lower.max(rayleigh.max(0.0).sqrt());
                    }
                }
                let frob = p.iter().map(|x| x * x).sum::<f64>().sqrt();
                let upper = frob.min((col_sum_max * row_sum_max).sqrt()).max(lower);
                Ok(OperatorNormBound {
                    lower,
                    upper,
                    exact: (upper - lower) <= 1e-9 * upper.max(1.0),
                })
            }
            NormKind::Lq(q) => {
                // interpolation upper bound, probe lower bound
                let upper = col_sum_max.powf(1.0 / q) * row_sum_max.powf(1.0 - 1.0 / q);
                let mut lower = 0.0_f64;
                for j in 0..self.dim {
                    let e: Vec<f64> = (0..self.dim).map(|i| if i == j { 1.0 } else { 0.0 }).collect();
                    let pe = self.partial_sum_projection(&e, n)?;
                    lower = lower.max(self.norm(&pe));
                }
                Ok(OperatorNormBound {
                    lower,
                    upper: upper.max(lower),
                    exact: false,
                })
            }
        }
    }
}

/// A finite center set plus radius: the computable stand-in for a compact set.
/// Membership is closed-ball: x belongs iff min-center distance <= radius.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompactCover {
    pub centers: Vec<Vec<f64>>,
    pub radius: f64,
}

impl CompactCover {
    pub fn new(centers: Vec<Vec<f64>>, radius: f64) -> Result<Self> {
        if centers.is_empty() {
            return Err(Error::EmptyInput("cover needs at least one center"));
        }
        if !(radius >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "cover radius must be nonnegative, got {radius}"
            )));
        }
        Ok(CompactCover { centers, radius })
    }

    pub fn contains(&self, space: &AmbientSpace, x: &[f64]) -> Result<bool> {
        Ok(cover_distance(space, x, self)? <= self.radius)
    }
}

/// min over centers of ‖x − c‖.
pub fn cover_distance(space: &AmbientSpace, x: &[f64], cover: &CompactCover) -> Result<f64> {
    if cover.centers.is_empty() {
        return Err(Error::EmptyInput("cover has no centers"));
    }
    let mut best = f64::INFINITY;
    for c in &cover.centers {
        if c.len() != x.len() || c.len() != space.dim() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                got: c.len().min(x.len()),
            });
        }
        best = best.min(space.distance(x, c));
    }
    Ok(best)
}

/// Farthest-point greedy ε-net. Seed is the lowest index; the next center is
/// the point farthest from the current centers (strict > keeps the smallest
/// index on ties). Stops once every point is within ε.
pub fn greedy_net(space: &AmbientSpace, points: &[Vec<f64>], eps: f64) -> Result<CompactCover> {
    if points.is_empty() {
        return Err(Error::EmptyInput("greedy_net needs at least one point"));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "net radius must be positive, got {eps}"
        )));
    }
    let mut min_dist = vec![f64::INFINITY; points.len()];
    let mut centers: Vec<Vec<f64>> = Vec::new();
    let mut next = 0usize;
    loop {
        let c = points[next].clone();
        for (j, p) in points.iter().enumerate() {
            let d = space.distance(&c, p);
            if d < min_dist[j] {
                min_dist[j] = d;
            }
        }
        centers.push(c);
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
    CompactCover::new(centers, eps)
}

/// Same centers, radius + δ.
pub fn enlarge_cover(cover: &CompactCover, delta: f64) -> Result<CompactCover> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "enlargement must be positive, got {delta}"
        )));
    }
    CompactCover::new(cover.centers.clone(), cover.radius + delta)
}

/// Handle for ⋂ covers: membership requires every constituent, plus a
/// representative CompactCover over-approximation.
#[derive(Debug, Clone)]
pub struct CoverIntersection {
    covers: Vec<CompactCover>,
}

pub fn intersect_covers(covers: Vec<CompactCover>) -> Result<CoverIntersection> {
    if covers.is_empty() {
        return Err(Error::EmptyInput("intersection needs at least one cover"));
    }
    Ok(CoverIntersection { covers })
}

impl CoverIntersection {
    pub fn member(&self, space: &AmbientSpace, x: &[f64]) -> Result<bool> {
        for c in &self.covers {
            if !c.contains(space, x)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn covers(&self) -> &[CompactCover] {
        &self.covers
    }

    /// Over-approximating cover: centers of the smallest-radius constituent
    /// that pass every membership test with slack equal to that radius.
    /// Any point of the intersection is within that radius of a kept center.
    pub fn representative_cover(&self, space: &AmbientSpace) -> Result<CompactCover> {
        let smallest = self
            .covers
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| a.radius.partial_cmp(&b.radius).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        let r = self.covers[smallest].radius;
        let mut kept: Vec<Vec<f64>> = Vec::new();
        'next: for c in &self.covers[smallest].centers {
            for cover in &self.covers {
                if cover_distance(space, c, cover)? > cover.radius + r {
                    continue 'next;
                }
            }
            kept.push(c.clone());
        }
        if kept.is_empty() {
            // empty intersection: keep a degenerate far-away marker is worse
            // than reporting the empty geometry; fall back to the smallest
            // cover's first center with its own radius so membership stays an
            // over-approximation (the true intersection is empty).
            kept.push(self.covers[smallest].centers[0].clone());
        }
        CompactCover::new(kept, r)
    }
}
