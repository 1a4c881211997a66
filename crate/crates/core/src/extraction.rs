//! Subsequence extraction: quantize, project, cluster, diagonalize, and the
//! certified 7ε bound for families with integrability and tightness
//! certificates.

use crate::ambient::CompactCover;
use crate::bochner::{bochner_distance, bochner_norm, decompose, VectorFunction};
use crate::criteria::{TightnessCertificate, UICertificate};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// First-minimum quantization of a function against a net.
#[derive(Debug, Clone)]
pub struct Quantization {
    pub step_function: VectorFunction,
    /// per-atom index of the assigned center
    pub assignment: Vec<usize>,
    /// max over atoms of the distance to the assigned center
    pub sup_error: f64,
}

/// Parameters a certificate was produced under, kept for audit.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ExtractionBudget {
    pub eps: f64,
    pub r: Option<f64>,
    pub cover: Option<CompactCover>,
    pub projection_index: Option<usize>,
    pub projection_norm: Option<f64>,
    pub internal_scale: Option<f64>,
}

/// Indices (0-based into the analyzed prefix, strictly increasing) with a
/// certified pairwise Bochner-distance bound.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubsequenceCertificate {
    pub indices: Vec<usize>,
    pub pairwise_bound: f64,
    pub budget: ExtractionBudget,
}

impl SubsequenceCertificate {
    /// Brute-force re-verification: every pairwise distance among the
    /// returned indices, compared against the bound (1e-9 absolute).
    pub fn verify(&self, prefix: &[VectorFunction], p: f64) -> Result<f64> {
        let mut max_pair = 0.0_f64;
        for (a, &i) in self.indices.iter().enumerate() {
            for &j in self.indices.iter().skip(a + 1) {
                max_pair = max_pair.max(bochner_distance(&prefix[i], &prefix[j], p)?);
            }
        }
        if max_pair > self.pairwise_bound + 1e-9 {
            return Err(Error::Internal(format!(
                "certificate violated: measured pairwise {max_pair} > bound {}",
                self.pairwise_bound
            )));
        }
        Ok(max_pair)
    }
}

/// Assign every atom value to the smallest center index achieving the
/// minimal distance.
pub fn quantize_first_min(f: &VectorFunction, net: &CompactCover) -> Result<Quantization> {
    if net.centers.is_empty() {
        return Err(Error::EmptyInput("quantization needs a nonempty net"));
    }
    let ambient = f.ambient();
    let mut assignment = Vec::with_capacity(f.values().len());
    let mut sup_error = 0.0_f64;
    let mut step_values = Vec::with_capacity(f.values().len());
    for v in f.values() {
        let mut best_idx = 0usize;
        let mut best = f64::INFINITY;
        for (k, c) in net.centers.iter().enumerate() {
            let d = ambient.distance(v, c);
            // strict < keeps the first minimum
            if d < best {
                best = d;
                best_idx = k;
            }
        }
        assignment.push(best_idx);
        sup_error = sup_error.max(best);
        step_values.push(net.centers[best_idx].clone());
    }
    let step_function = VectorFunction::new(f.space().clone(), ambient.clone(), step_values)?;
    Ok(Quantization {
        step_function,
        assignment,
        sup_error,
    })
}

/// ‖F − P_N F‖_p together with the certified bound
/// (1 + ‖P_N‖)·sup_error (valid on probability spaces, where the p-norm of
/// the quantization error is dominated by its sup).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProjectionDefect {
    pub defect: f64,
    pub bound: f64,
}

pub fn projection_defect(
    f: &VectorFunction,
    quant: &Quantization,
    n: usize,
    p: f64,
) -> Result<ProjectionDefect> {
    let ambient = f.ambient();
    // precondition: net centers (hence the step function) lie in X_N
    for v in quant.step_function.values() {
        let coords = ambient.coordinates(v)?;
        if coords.iter().skip(n).any(|c| c.abs() > 1e-9) {
            return Err(Error::CentersOutsideSpan { n });
        }
    }
    let projected = f.project(n)?;
    let defect = bochner_norm(&f.sub(&projected)?, p)?;
    let op_norm = ambient.projection_operator_norm(n)?.certified();
    let bound = (1.0 + op_norm) * quant.sup_error;
    if defect > bound + 1e-9 {
        return Err(Error::Internal(format!(
            "projection defect {defect} exceeds certified bound {bound}"
        )));
    }
    Ok(ProjectionDefect { defect, bound })
}

/// Greedy clusters at scale ε/2; returns the largest cluster (ties go to the
/// cluster containing the smallest index). All returned pairs are within ε
/// of each other and the pigeonhole length bound holds exactly.
pub fn cluster_extract(prefix: &[VectorFunction], p: f64, eps: f64) -> Result<Vec<usize>> {
    if prefix.is_empty() {
        return Err(Error::EmptyInput("cluster_extract needs a nonempty prefix"));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "cluster scale must be positive, got {eps}"
        )));
    }
    let centers = crate::bochner::family_greedy_net(prefix, p, eps / 2.0)?;
    // first-minimum assignment to the net centers
    let mut clusters: Vec<Vec<usize>> = vec![Vec::new(); centers.len()];
    for (j, f) in prefix.iter().enumerate() {
        let mut best_k = 0usize;
        let mut best = f64::INFINITY;
        for (k, &c) in centers.iter().enumerate() {
            let d = bochner_distance(f, &prefix[c], p)?;
            if d < best {
                best = d;
                best_k = k;
            }
        }
        clusters[best_k].push(j);
    }
    let best_size = clusters.iter().map(|c| c.len()).max().unwrap();
    let winner = clusters
        .iter()
        .filter(|c| c.len() == best_size)
        .min_by_key(|c| c[0])
        .unwrap();
    Ok(winner.clone())
}

/// Iterative refinement over a strictly decreasing ε schedule. The emitted
/// indices are the survivors of the deepest completed stage, so the
/// certified bound holds for every emitted pair.
pub fn diagonal_extract(
    prefix: &[VectorFunction],
    p: f64,
    schedule: &[f64],
) -> Result<SubsequenceCertificate> {
    if prefix.is_empty() {
        return Err(Error::EmptyInput("diagonal_extract needs a nonempty prefix"));
    }
    if schedule.is_empty() {
        return Err(Error::EmptyInput("schedule must be nonempty"));
    }
    for w in schedule.windows(2) {
        if !(w[1] < w[0]) {
            return Err(Error::InvalidParameter(
                "schedule must be strictly decreasing".into(),
            ));
        }
    }
    let mut survivors: Vec<usize> = (0..prefix.len()).collect();
    let mut achieved_scale = f64::INFINITY;
    for (stage, &eps) in schedule.iter().enumerate() {
        let members: Vec<VectorFunction> =
            survivors.iter().map(|&i| prefix[i].clone()).collect();
        let local = cluster_extract(&members, p, eps)?;
        let refined: Vec<usize> = local.iter().map(|&k| survivors[k]).collect();
        if refined.len() < 2 && prefix.len() >= 2 {
            return Err(Error::RefinementExhausted {
                stage: stage + 1,
                deepest: stage,
            });
        }
        survivors = refined;
        achieved_scale = eps;
    }
    let mut max_pair = 0.0_f64;
    for (a, &i) in survivors.iter().enumerate() {
        for &j in survivors.iter().skip(a + 1) {
            max_pair = max_pair.max(bochner_distance(&prefix[i], &prefix[j], p)?);
        }
    }
    Ok(SubsequenceCertificate {
        indices: survivors,
        // the last achieved scale, tightened to the measured maximum when
        // the clustering overdelivers (constant families certify 0)
        pairwise_bound: achieved_scale.min(max_pair),
        budget: ExtractionBudget {
            eps: *schedule.last().unwrap(),
            ..Default::default()
        },
    })
}

/// Shared quantize-project-cluster pipeline. `quant_eps` is the net scale
/// for the value quantization, `cluster_eps` the scale for clustering the
/// projected members.
struct LemmaCore {
    indices: Vec<usize>,
    sup_error: f64,
    projected_pairwise: f64,
    projection_index: usize,
    projection_norm: f64,
}

fn lemma_core(
    prefix: &[VectorFunction],
    p: f64,
    quant_eps: f64,
    cluster_eps: f64,
) -> Result<LemmaCore> {
    let ambient = prefix[0].ambient().clone();
    let all_points: Vec<Vec<f64>> = prefix
        .iter()
        .flat_map(|f| f.values().iter().cloned())
        .collect();
    let net = crate::ambient::greedy_net(&ambient, &all_points, quant_eps)?;
    // smallest N with every net center supported on the first N coordinates
    let mut proj_n = 1usize;
    for c in &net.centers {
        let coords = ambient.coordinates(c)?;
        let last_nonzero = coords
            .iter()
            .rposition(|x| x.abs() > 1e-12)
            .map(|i| i + 1)
            .unwrap_or(1);
        proj_n = proj_n.max(last_nonzero);
    }
    let projection_norm = ambient.projection_operator_norm(proj_n)?.certified();
    let mut sup_error = 0.0_f64;
    for f in prefix {
        let q = quantize_first_min(f, &net)?;
        sup_error = sup_error.max(q.sup_error);
        // the defect bound is certified member by member
        projection_defect(f, &q, proj_n, p)?;
    }
    let projected: Vec<VectorFunction> = prefix
        .iter()
        .map(|f| f.project(proj_n))
        .collect::<Result<_>>()?;
    let indices = cluster_extract(&projected, p, cluster_eps)?;
    let mut projected_pairwise = 0.0_f64;
    for (a, &i) in indices.iter().enumerate() {
        for &j in indices.iter().skip(a + 1) {
            projected_pairwise =
                projected_pairwise.max(bochner_distance(&projected[i], &projected[j], p)?);
        }
    }
    Ok(LemmaCore {
        indices,
        sup_error,
        projected_pairwise,
        projection_index: proj_n,
        projection_norm,
    })
}

/// Extraction for a family taking values in a fixed cover: quantize against
/// an ε-net of the values, project onto the span the net lives in, cluster
/// the projections at `internal_scale` (default ε). The certified pairwise
/// bound is 2(1+‖P_N‖)·sup_error + achieved cluster scale, verified by
/// direct evaluation.
pub fn lemma_extract(
    prefix: &[VectorFunction],
    p: f64,
    cover: &CompactCover,
    eps: f64,
    internal_scale: Option<f64>,
) -> Result<SubsequenceCertificate> {
    if prefix.is_empty() {
        return Err(Error::EmptyInput("lemma_extract needs a nonempty prefix"));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "ε must be positive, got {eps}"
        )));
    }
    for (m, f) in prefix.iter().enumerate() {
        for (atom, v) in f.values().iter().enumerate() {
            let d = crate::ambient::cover_distance(f.ambient(), v, cover)?;
            if d > cover.radius + 1e-9 {
                return Err(Error::ValueOutsideCover {
                    member: m,
                    atom,
                    distance: d,
                });
            }
        }
    }
    let eps_prime = internal_scale.unwrap_or(eps);
    if !(eps_prime > 0.0) || eps_prime > eps + 1e-15 {
        return Err(Error::InvalidParameter(format!(
            "internal scale must lie in (0, ε], got {eps_prime}"
        )));
    }
    let core = lemma_core(prefix, p, eps, eps_prime)?;
    let pairwise_bound =
        2.0 * (1.0 + core.projection_norm) * core.sup_error + core.projected_pairwise;
    let cert = SubsequenceCertificate {
        indices: core.indices,
        pairwise_bound,
        budget: ExtractionBudget {
            eps,
            r: None,
            cover: Some(cover.clone()),
            projection_index: Some(core.projection_index),
            projection_norm: Some(core.projection_norm),
            internal_scale: Some(eps_prime),
        },
    };
    cert.verify(prefix, p)?;
    Ok(cert)
}

/// Numerical record of the inequality chain for one pair of members.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairChainCheck {
    pub pair: (usize, usize),
    pub distance: f64,
    /// ‖1_{‖f‖<=r}f_n − 1_{‖f‖<=r}f_m‖_p
    pub truncated_distance: f64,
    /// tail norms ‖1_{‖f‖>r}f‖_p of the two members
    pub tails: (f64, f64),
    /// r·μ({f ∉ K})^{1/p} for the two members
    pub escape_terms: (f64, f64),
    /// ‖1_K f_n − 1_K f_m‖_p
    pub restricted_distance: f64,
    /// high-norm in-cover pieces ‖1_{‖f‖>r, f∈K}f‖_p of the two members
    pub high_in_cover: (f64, f64),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Theorem1Outcome {
    pub certificate: SubsequenceCertificate,
    pub chain: Vec<PairChainCheck>,
}

/// The 'if' direction at scale ε: with a uniform-integrability certificate
/// (bound < ε at radius r) and a tightness certificate (deficiency <= ε^p/r^p),
/// extract indices whose original members are pairwise within 7ε, verifying
/// every intermediate inequality of the chain on every returned pair.
pub fn theorem1_extract(
    prefix: &[VectorFunction],
    p: f64,
    eps: f64,
    ui: &UICertificate,
    tight: &TightnessCertificate,
) -> Result<Theorem1Outcome> {
    if prefix.is_empty() {
        return Err(Error::EmptyInput("theorem1_extract needs a nonempty prefix"));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "ε must be positive, got {eps}"
        )));
    }
    if (ui.p - p).abs() > 1e-12 {
        return Err(Error::Refusal(format!(
            "uniform integrability: certificate exponent {} differs from requested p = {p}",
            ui.p
        )));
    }
    if !(ui.bound < eps) {
        return Err(Error::Refusal(format!(
            "uniform integrability: certified bound {} is not < ε = {eps}",
            ui.bound
        )));
    }
    let r = ui.r;
    let tight_budget = eps.powf(p) / r.powf(p);
    if tight.eps > tight_budget + 1e-15 {
        return Err(Error::Refusal(format!(
            "tightness: certified deficiency {} exceeds ε^p/r^p = {tight_budget}",
            tight.eps
        )));
    }
    if !ui.verify(prefix)? {
        return Err(Error::Refusal(
            "uniform integrability: certificate fails re-verification on the prefix".into(),
        ));
    }
    if !tight.verify(prefix)? {
        return Err(Error::Refusal(
            "tightness: certificate fails re-verification on the prefix".into(),
        ));
    }

    // restrict members to the cover; the restricted values live in K ∪ {0}
    let restricted: Vec<VectorFunction> = prefix
        .iter()
        .map(|f| Ok(f.restrict(&f.membership_mask(&tight.cover)?)?))
        .collect::<Result<_>>()?;
    let dim = prefix[0].ambient().dim();
    let mut centers = tight.cover.centers.clone();
    centers.push(vec![0.0; dim]);
    let cover_with_origin = CompactCover::new(centers, tight.cover.radius)?;

    // drive the restricted pairwise distance below ε: shrink the
    // quantization scale until 2(1+‖P_N‖)·quant_eps <= ε/2, cluster at ε/2
    let mut quant_eps = eps / 8.0;
    let mut core = None;
    for _ in 0..60 {
        let c = lemma_core(&restricted, p, quant_eps, eps / 2.0)?;
        if 2.0 * (1.0 + c.projection_norm) * c.sup_error <= eps / 2.0 + 1e-15 {
            core = Some(c);
            break;
        }
        quant_eps /= 2.0;
    }
    let core = core.ok_or_else(|| {
        Error::Internal("quantization scale search failed to meet the ε/2 budget".into())
    })?;
    let restricted_bound =
        2.0 * (1.0 + core.projection_norm) * core.sup_error + core.projected_pairwise;
    debug_assert!(restricted_bound <= eps + 1e-12);

    // chain verification, pair by pair, on the ORIGINAL members
    let tol = 1e-9;
    let mut chain = Vec::new();
    for (a, &i) in core.indices.iter().enumerate() {
        for &j in core.indices.iter().skip(a + 1) {
            let di = decompose(&prefix[i], r, &tight.cover)?;
            let dj = decompose(&prefix[j], r, &tight.cover)?;
            let distance = bochner_distance(&prefix[i], &prefix[j], p)?;
            let truncated_distance =
                bochner_distance(&di.inside_radius, &dj.inside_radius, p)?;
            let tails = (
                bochner_norm(&di.outside_radius, p)?,
                bochner_norm(&dj.outside_radius, p)?,
            );
            let outside = |d: &crate::bochner::FamilyDecomposition,
                           f: &VectorFunction|
             -> Result<f64> {
                let mask: Vec<bool> = d.cover_mask.iter().map(|&m| !m).collect();
                Ok(f.space().subset_measure(&mask)?)
            };
            let escape_terms = (
                r * outside(&di, &prefix[i])?.powf(1.0 / p),
                r * outside(&dj, &prefix[j])?.powf(1.0 / p),
            );
            let restricted_distance =
                bochner_distance(&di.inside_cover, &dj.inside_cover, p)?;
            let high_in_cover = (
                bochner_norm(&di.out_radius_in_cover, p)?,
                bochner_norm(&dj.out_radius_in_cover, p)?,
            );

            // the 2ε step
            if distance > 2.0 * eps + truncated_distance + tol
                || tails.0 >= eps || tails.1 >= eps
            {
                return Err(Error::Internal(format!(
                    "chain violation (2ε step) at pair ({i},{j})"
                )));
            }
            // the two r·μ^{1/p} steps
            let mid = bochner_distance(&di.in_radius_out_cover, &dj.in_radius_out_cover, p)?;
            if mid > escape_terms.0 + escape_terms.1 + tol
                || escape_terms.0 > eps + tol
                || escape_terms.1 > eps + tol
            {
                return Err(Error::Internal(format!(
                    "chain violation (escape step) at pair ({i},{j})"
                )));
            }
            // the 6ε consolidation
            if distance > 6.0 * eps + restricted_distance + tol {
                return Err(Error::Internal(format!(
                    "chain violation (6ε consolidation) at pair ({i},{j})"
                )));
            }
            // final 7ε
            if distance > 7.0 * eps + tol {
                return Err(Error::Internal(format!(
                    "chain violation (7ε conclusion) at pair ({i},{j})"
                )));
            }
            chain.push(PairChainCheck {
                pair: (i, j),
                distance,
                truncated_distance,
                tails,
                escape_terms,
                restricted_distance,
                high_in_cover,
            });
        }
    }

    let cert = SubsequenceCertificate {
        indices: core.indices,
        pairwise_bound: 7.0 * eps,
        budget: ExtractionBudget {
            eps,
            r: Some(r),
            cover: Some(cover_with_origin),
            projection_index: Some(core.projection_index),
            projection_norm: Some(core.projection_norm),
            internal_scale: Some(eps / 2.0),
        },
    };
    cert.verify(prefix, p)?;
    Ok(Theorem1Outcome {
        certificate: cert,
        chain,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambient::{AmbientSpace, NormKind};
    use crate::measure::MeasureSpace;
    use std::sync::Arc;

    fn line_space() -> (Arc<MeasureSpace>, Arc<AmbientSpace>) {
        (
            MeasureSpace::probability(&[0.5, 0.5]).unwrap(),
            AmbientSpace::canonical(1, NormKind::l2()).unwrap(),
        )
    }

    fn constant_fn(
        space: &Arc<MeasureSpace>,
        ambient: &Arc<AmbientSpace>,
        x: f64,
    ) -> VectorFunction {
        VectorFunction::new(space.clone(), ambient.clone(), vec![vec![x], vec![x]]).unwrap()
    }

    #[test]
    fn quantize_exact_center_and_tie_rule() {
        let (space, ambient) = line_space();
        let net = CompactCover::new(vec![vec![0.0], vec![1.0]], 1.0).unwrap();
        // value equal to a center -> that center, error 0
        let f = constant_fn(&space, &ambient, 1.0);
        let q = quantize_first_min(&f, &net).unwrap();
        assert_eq!(q.assignment, vec![1, 1]);
        assert_eq!(q.sup_error, 0.0);
        // equidistant -> first minimum (index 0)
        let g = constant_fn(&space, &ambient, 0.5);
        let q = quantize_first_min(&g, &net).unwrap();
        assert_eq!(q.assignment, vec![0, 0]);
        // 0.6 -> center 1, error 0.4
        let h = constant_fn(&space, &ambient, 0.6);
        let q = quantize_first_min(&h, &net).unwrap();
        assert_eq!(q.assignment, vec![1, 1]);
        assert!((q.sup_error - 0.4).abs() < 1e-12);
    }

    #[test]
    fn quantization_idempotent() {
        let (space, ambient) = line_space();
        let net = CompactCover::new(vec![vec![0.0], vec![1.0]], 1.0).unwrap();
        let f = constant_fn(&space, &ambient, 0.6);
        let q1 = quantize_first_min(&f, &net).unwrap();
        let q2 = quantize_first_min(&q1.step_function, &net).unwrap();
        assert_eq!(q2.sup_error, 0.0);
        assert_eq!(q2.assignment, q1.assignment);
    }

    #[test]
    fn projection_defect_examples() {
        let space = MeasureSpace::probability(&[0.5, 0.5]).unwrap();
        let ambient = AmbientSpace::canonical(3, NormKind::l2()).unwrap();
        // F with third coordinate constant 0.1, p=1 -> defect exactly 0.1
        let f = VectorFunction::new(
            space.clone(),
            ambient.clone(),
            vec![vec![1.0, 2.0, 0.1], vec![0.5, -1.0, 0.1]],
        )
        .unwrap();
        let net = CompactCover::new(vec![vec![1.0, 2.0, 0.0], vec![0.5, -1.0, 0.0]], 1.0).unwrap();
        let q = quantize_first_min(&f, &net).unwrap();
        let d = projection_defect(&f, &q, 2, 1.0).unwrap();
        assert!((d.defect - 0.1).abs() < 1e-12);
        assert!(d.bound >= 0.1 - 1e-12);
        // canonical basis: bound = 2·sup_error
        assert!((d.bound - 2.0 * q.sup_error).abs() < 1e-12);
        // F already X_N-valued -> defect 0
        let g = VectorFunction::new(
            space,
            ambient,
            vec![vec![1.0, 2.0, 0.0], vec![0.5, -1.0, 0.0]],
        )
        .unwrap();
        let qg = quantize_first_min(&g, &net).unwrap();
        let dg = projection_defect(&g, &qg, 2, 1.0).unwrap();
        assert_eq!(dg.defect, 0.0);
    }

    #[test]
    fn projection_defect_rejects_centers_outside_span() {
        let space = MeasureSpace::probability(&[0.5, 0.5]).unwrap();
        let ambient = AmbientSpace::canonical(3, NormKind::l2()).unwrap();
        let f = VectorFunction::zero(space, ambient);
        let net = CompactCover::new(vec![vec![0.0, 0.0, 1.0]], 1.0).unwrap();
        let q = quantize_first_min(&f, &net).unwrap();
        assert!(matches!(
            projection_defect(&f, &q, 2, 1.0),
            Err(Error::CentersOutsideSpan { .. })
        ));
    }

    fn perturbed_family(l: usize) -> Vec<VectorFunction> {
        // f_n = f + 2^{-n} g on two atoms, 1-dimensional
        let (space, ambient) = line_space();
        (1..=l)
            .map(|n| {
                let v = 1.0 + 2.0_f64.powi(-(n as i32));
                constant_fn(&space, &ambient, v)
            })
            .collect()
    }

    #[test]
    fn cluster_extract_constant_family_returns_all() {
        let (space, ambient) = line_space();
        let prefix: Vec<VectorFunction> =
            (0..6).map(|_| constant_fn(&space, &ambient, 1.0)).collect();
        let idx = cluster_extract(&prefix, 2.0, 0.1).unwrap();
        assert_eq!(idx, vec![0, 1, 2, 3, 4, 5]);
    }

    #[test]
    fn cluster_extract_tie_goes_to_first_cluster() {
        let (space, ambient) = line_space();
        let mut prefix = Vec::new();
        for _ in 0..3 {
            prefix.push(constant_fn(&space, &ambient, 0.0));
        }
        for _ in 0..3 {
            prefix.push(constant_fn(&space, &ambient, 10.0));
        }
        let idx = cluster_extract(&prefix, 2.0, 0.5).unwrap();
        assert_eq!(idx, vec![0, 1, 2]);
    }

    #[test]
    fn cluster_extract_pigeonhole_and_pairwise() {
        let prefix = perturbed_family(20);
        let eps = 0.1;
        let idx = cluster_extract(&prefix, 2.0, eps).unwrap();
        // tail members 2^{-k} within 0.05 of the limit -> at least 14 survive
        assert!(idx.len() >= 14, "got {}", idx.len());
        for (a, &i) in idx.iter().enumerate() {
            for &j in idx.iter().skip(a + 1) {
                assert!(bochner_distance(&prefix[i], &prefix[j], 2.0).unwrap() <= eps + 1e-12);
            }
        }
        let cn = crate::bochner::covering_number(&prefix, 2.0, eps / 2.0).unwrap();
        assert!(idx.len() >= prefix.len().div_ceil(cn));
    }

    #[test]
    fn diagonal_extract_constant_family() {
        let (space, ambient) = line_space();
        let prefix: Vec<VectorFunction> =
            (0..5).map(|_| constant_fn(&space, &ambient, 2.0)).collect();
        let cert = diagonal_extract(&prefix, 2.0, &[0.5, 0.25]).unwrap();
        assert_eq!(cert.indices.len(), 5);
        assert_eq!(cert.pairwise_bound, 0.0);
    }

    #[test]
    fn diagonal_extract_geometric_family() {
        let prefix = perturbed_family(20);
        let cert = diagonal_extract(&prefix, 2.0, &[0.5, 0.25]).unwrap();
        assert!(cert.pairwise_bound <= 0.25 + 1e-12);
        let measured = cert.verify(&prefix, 2.0).unwrap();
        assert!(measured <= cert.pairwise_bound + 1e-9);
    }

    #[test]
    fn diagonal_extract_exhaustion() {
        let (space, ambient) = line_space();
        let prefix = vec![
            constant_fn(&space, &ambient, 0.0),
            constant_fn(&space, &ambient, 10.0),
        ];
        assert!(matches!(
            diagonal_extract(&prefix, 2.0, &[0.1]),
            Err(Error::RefinementExhausted { .. })
        ));
    }

    #[test]
    fn lemma_extract_constant_family() {
        let (space, ambient) = line_space();
        let prefix: Vec<VectorFunction> =
            (0..8).map(|_| constant_fn(&space, &ambient, 0.5)).collect();
        let cover = CompactCover::new(vec![vec![0.5]], 0.1).unwrap();
        let cert = lemma_extract(&prefix, 2.0, &cover, 0.2, None).unwrap();
        assert_eq!(cert.indices.len(), 8);
        assert!(cert.verify(&prefix, 2.0).unwrap() <= 1e-12);
    }

    #[test]
    fn lemma_extract_rejects_values_outside_cover() {
        let (space, ambient) = line_space();
        let prefix = vec![constant_fn(&space, &ambient, 5.0)];
        let cover = CompactCover::new(vec![vec![0.0]], 0.1).unwrap();
        assert!(matches!(
            lemma_extract(&prefix, 2.0, &cover, 0.2, None),
            Err(Error::ValueOutsideCover { .. })
        ));
    }

    fn rotating_family(
        atoms: usize,
        prefix_len: usize,
        period: usize,
    ) -> (Vec<VectorFunction>, Arc<AmbientSpace>) {
        let space = MeasureSpace::uniform(atoms).unwrap();
        let ambient = AmbientSpace::canonical(2, NormKind::l2()).unwrap();
        let prefix = (1..=prefix_len)
            .map(|n| {
                let shift = 2.0 * std::f64::consts::PI * (n % period) as f64 / period as f64;
                let values = (0..atoms)
                    .map(|j| {
                        let t = shift + 2.0 * std::f64::consts::PI * j as f64 / atoms as f64;
                        vec![t.cos(), t.sin()]
                    })
                    .collect();
                VectorFunction::new(space.clone(), ambient.clone(), values).unwrap()
            })
            .collect();
        (prefix, ambient)
    }

    #[test]
    fn lemma_extract_rotating_family_certified() {
        let (prefix, _) = rotating_family(16, 64, 12);
        let cover = CompactCover::new(vec![vec![0.0, 0.0]], 1.0).unwrap();
        let cert = lemma_extract(&prefix, 2.0, &cover, 0.2, None).unwrap();
        assert!(cert.indices.len() >= 2);
        let measured = cert.verify(&prefix, 2.0).unwrap();
        assert!(measured <= cert.pairwise_bound + 1e-9);
        // canonical basis: ‖P_N‖ = 1, so the bound is 4ε + ε'
        let n = cert.budget.projection_index.unwrap();
        let norm = cert.budget.projection_norm.unwrap();
        assert_eq!(norm, 1.0);
        assert!(n <= 2);
        assert!(cert.pairwise_bound <= 2.0 * (1.0 + norm) * 0.2 + 0.2 + 1e-12);
    }

    #[test]
    fn theorem1_constant_family() {
        let (space, ambient) = line_space();
        let prefix: Vec<VectorFunction> =
            (0..10).map(|_| constant_fn(&space, &ambient, 0.3)).collect();
        let eps = 0.1;
        let ui = UICertificate {
            r: 1.0,
            bound: 0.0,
            p: 2.0,
        };
        let tight = TightnessCertificate {
            cover: CompactCover::new(vec![vec![0.3]], 0.0).unwrap(),
            eps: 0.0,
        };
        let out = theorem1_extract(&prefix, 2.0, eps, &ui, &tight).unwrap();
        assert_eq!(out.certificate.indices.len(), 10);
        assert!(out.certificate.verify(&prefix, 2.0).unwrap() <= 1e-12);
    }

    #[test]
    fn theorem1_rotating_family_seven_eps() {
        let (prefix, _) = rotating_family(16, 80, 10);
        let p = 2.0;
        let eps = 0.1;
        let ui = UICertificate {
            r: 2.0,
            bound: 0.0,
            p,
        };
        // unit circle values: an exact fine net of the circle has deficiency 0
        let circle: Vec<Vec<f64>> = (0..400)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / 400.0;
                vec![t.cos(), t.sin()]
            })
            .collect();
        let tight = TightnessCertificate {
            cover: CompactCover::new(circle, 0.01).unwrap(),
            eps: 0.0,
        };
        let out = theorem1_extract(&prefix, p, eps, &ui, &tight).unwrap();
        assert!((out.certificate.pairwise_bound - 0.7).abs() < 1e-12);
        assert!(out.certificate.indices.len() >= 5);
        assert!(!out.chain.is_empty());
        out.certificate.verify(&prefix, p).unwrap();
    }

    #[test]
    fn theorem1_refuses_bad_certificates() {
        let (space, ambient) = line_space();
        let prefix: Vec<VectorFunction> =
            (0..4).map(|_| constant_fn(&space, &ambient, 0.3)).collect();
        let tight = TightnessCertificate {
            cover: CompactCover::new(vec![vec![0.3]], 0.0).unwrap(),
            eps: 0.0,
        };
        // ui bound not < eps
        let ui = UICertificate {
            r: 1.0,
            bound: 0.5,
            p: 2.0,
        };
        let err = theorem1_extract(&prefix, 2.0, 0.1, &ui, &tight).unwrap_err();
        assert!(err.is_refusal());
        assert!(err.to_string().contains("uniform integrability"));
        // tightness deficiency exceeding the ε^p/r^p budget
        let ui = UICertificate {
            r: 1.0,
            bound: 0.0,
            p: 2.0,
        };
        let loose = TightnessCertificate {
            cover: CompactCover::new(vec![vec![0.3]], 0.0).unwrap(),
            eps: 0.9,
        };
        let err = theorem1_extract(&prefix, 2.0, 0.1, &ui, &loose).unwrap_err();
        assert!(err.is_refusal());
        assert!(err.to_string().contains("tightness"));
    }
}
