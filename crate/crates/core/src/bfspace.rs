//! Discrete Banach function spaces: weighted Lq and Orlicz/Luxemburg norms,
//! almost order boundedness, the indicator-norm infimum, and the
//! non-tightness divergence witness.

use crate::ambient::{cover_distance, CompactCover};
use crate::bochner::VectorFunction;
use crate::error::{Error, Result};
use crate::measure::{compensated_sum, MeasureSpace, ScalarSample};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Young function Φ: convex, nondecreasing, Φ(0)=0, finite-valued.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum OrliczPhi {
    /// t^a with a >= 1
    Power(f64),
    /// exp(t) - 1, with the exponent capped to avoid overflow
    ExpMinusOne,
    /// piecewise-linear table of (t, Φ(t)) pairs, extended by the last slope
    Table(Vec<(f64, f64)>),
}

impl OrliczPhi {
    pub fn validate(&self) -> Result<()> {
        match self {
            OrliczPhi::Power(a) => {
                if !(*a >= 1.0) || !a.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "power Orlicz exponent must be >= 1, got {a}"
                    )));
                }
            }
            OrliczPhi::ExpMinusOne => {}
            OrliczPhi::Table(pts) => {
                if pts.len() < 2 {
                    return Err(Error::InvalidParameter(
                        "Orlicz table needs at least two points".into(),
                    ));
                }
                if pts[0] != (0.0, 0.0) {
                    return Err(Error::InvalidParameter(
                        "Orlicz table must start at (0, 0)".into(),
                    ));
                }
                let mut prev_slope = f64::NEG_INFINITY;
                for w in pts.windows(2) {
                    let (t0, y0) = w[0];
                    let (t1, y1) = w[1];
                    if !(t1 > t0) || y1 < y0 {
                        return Err(Error::InvalidParameter(
                            "Orlicz table must be strictly increasing in t and nondecreasing in Φ"
                                .into(),
                        ));
                    }
                    let slope = (y1 - y0) / (t1 - t0);
                    // convexity as a finite-difference check on slopes
                    if slope < prev_slope - 1e-12 {
                        return Err(Error::InvalidParameter(
                            "Orlicz table fails the convexity check".into(),
                        ));
                    }
                    prev_slope = slope;
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, t: f64) -> f64 {
        let t = t.abs();
        match self {
            OrliczPhi::Power(a) => t.powf(*a),
            OrliczPhi::ExpMinusOne => {
                if t > 700.0 {
                    f64::INFINITY
                } else {
                    t.exp_m1()
                }
            }
            OrliczPhi::Table(pts) => {
                if t == 0.0 {
                    return 0.0;
                }
                for w in pts.windows(2) {
                    let (t0, y0) = w[0];
                    let (t1, y1) = w[1];
                    if t <= t1 {
                        return y0 + (y1 - y0) * (t - t0) / (t1 - t0);
                    }
                }
                let (t0, y0) = pts[pts.len() - 2];
                let (t1, y1) = pts[pts.len() - 1];
                y1 + (y1 - y0) / (t1 - t0) * (t - t1)
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum BfsNormKind {
    /// weighted Lq, 1 <= q < ∞
    WeightedLq(f64),
    Luxemburg(OrliczPhi),
}

/// A Banach function space over a finite atom space. The lattice property
/// and order continuity hold automatically in finite dimension.
#[derive(Debug, Clone)]
pub struct DiscreteBFS {
    space: Arc<MeasureSpace>,
    kind: BfsNormKind,
}

impl DiscreteBFS {
    pub fn weighted_lq(space: Arc<MeasureSpace>, q: f64) -> Result<Self> {
        if !(q >= 1.0) || !q.is_finite() {
            return Err(Error::InvalidExponent(q));
        }
        Ok(DiscreteBFS {
            space,
            kind: BfsNormKind::WeightedLq(q),
        })
    }

    pub fn luxemburg(space: Arc<MeasureSpace>, phi: OrliczPhi) -> Result<Self> {
        phi.validate()?;
        Ok(DiscreteBFS {
            space,
            kind: BfsNormKind::Luxemburg(phi),
        })
    }

    pub fn space(&self) -> &Arc<MeasureSpace> {
        &self.space
    }

    pub fn kind(&self) -> &BfsNormKind {
        &self.kind
    }

    fn modular(&self, phi: &OrliczPhi, values: &[f64], lambda: f64) -> f64 {
        compensated_sum(
            self.space
                .weights()
                .iter()
                .zip(values)
                .map(|(&w, &v)| w * phi.eval(v.abs() / lambda)),
        )
    }

    /// Norm of a scalar sample (the norm of |f|).
    pub fn e_norm(&self, f: &ScalarSample) -> Result<f64> {
        if f.values().len() != self.space.atom_count() {
            return Err(Error::LengthMismatch {
                expected: self.space.atom_count(),
                got: f.values().len(),
            });
        }
        match &self.kind {
            BfsNormKind::WeightedLq(q) => {
                let sum = compensated_sum(
                    self.space
                        .weights()
                        .iter()
                        .zip(f.values())
                        .map(|(&w, &v)| w * v.abs().powf(*q)),
                );
                Ok(sum.powf(1.0 / q))
            }
            BfsNormKind::Luxemburg(phi) => {
                let max_abs = f.values().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
                if max_abs == 0.0 {
                    return Ok(0.0);
                }
                // bracket the Luxemburg infimum: modular is nonincreasing
                // in λ, so find λ_lo with modular > 1 and λ_hi with <= 1
                let mut hi = max_abs;
                let mut guard = 0;
                while self.modular(phi, f.values(), hi) > 1.0 {
                    hi *= 2.0;
                    guard += 1;
                    if guard > 2000 {
                        return Err(Error::Internal(
                            "Luxemburg bracket failed to find an upper λ".into(),
                        ));
                    }
                }
                let mut lo = hi;
                loop {
                    let candidate = lo / 2.0;
                    if self.modular(phi, f.values(), candidate) > 1.0 {
                        lo = candidate;
                        break;
                    }
                    lo = candidate;
                    if lo < 1e-300 {
                        return Ok(0.0);
                    }
                }
                for _ in 0..200 {
                    if (hi - lo) <= 1e-12 * hi {
                        break;
                    }
                    let mid = 0.5 * (lo + hi);
                    if self.modular(phi, f.values(), mid) > 1.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                Ok(hi)
            }
        }
    }

    /// E(X) norm: e_norm of the atomwise X-norm sample.
    pub fn e_bochner_norm(&self, f: &VectorFunction) -> Result<f64> {
        if !Arc::ptr_eq(f.space(), &self.space)
            && f.space().atom_count() != self.space.atom_count()
        {
            return Err(Error::LengthMismatch {
                expected: self.space.atom_count(),
                got: f.space().atom_count(),
            });
        }
        self.e_norm(&f.norm_sample())
    }

    pub fn e_bochner_distance(&self, f: &VectorFunction, g: &VectorFunction) -> Result<f64> {
        self.e_bochner_norm(&f.sub(g)?)
    }

    /// Norm of the indicator of a mass-`m` set on an abstract one-set space
    /// (valid because both norm kinds depend on an indicator only through
    /// its measure).
    fn indicator_norm_at_mass(&self, mass: f64) -> Result<f64> {
        match &self.kind {
            BfsNormKind::WeightedLq(q) => Ok(mass.powf(1.0 / q)),
            BfsNormKind::Luxemburg(phi) => {
                let space = MeasureSpace::raw(&[mass])?;
                let bfs = DiscreteBFS {
                    space: space.clone(),
                    kind: BfsNormKind::Luxemburg(phi.clone()),
                };
                bfs.e_norm(&ScalarSample::new(space, vec![1.0])?)
            }
        }
    }
}

/// sup over the prefix of ‖1_{‖f‖>r} f‖_E.
pub fn ui_modulus_e(prefix: &[VectorFunction], e: &DiscreteBFS, r: f64) -> Result<f64> {
    if prefix.is_empty() {
        return Err(Error::EmptyInput("ui_modulus_e needs a nonempty prefix"));
    }
    if !(r > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "truncation radius must be positive, got {r}"
        )));
    }
    let mut sup = 0.0_f64;
    for f in prefix {
        let tail = f.restrict(&f.norm_sample().strict_tail_mask(r))?;
        sup = sup.max(e.e_bochner_norm(&tail)?);
    }
    Ok(sup)
}

/// Order interval [-x_ε, x_ε] + B(ε).
#[derive(Debug, Clone)]
pub struct OrderInterval {
    pub center: ScalarSample,
    pub slack: f64,
}

impl OrderInterval {
    /// Decompose y = u + v with |u| <= x_ε pointwise; returns e_norm(v).
    pub fn residual(&self, y: &ScalarSample, e: &DiscreteBFS) -> Result<f64> {
        let v: Vec<f64> = y
            .values()
            .iter()
            .zip(self.center.values())
            .map(|(&yv, &xv)| {
                let clamped = yv.clamp(-xv, xv);
                yv - clamped
            })
            .collect();
        e.e_norm(&ScalarSample::new(y.space().clone(), v)?)
    }
}

/// Construct x_ε as the pointwise envelope of the member norms truncated at
/// the smallest grid level making every residual norm < ε.
pub fn almost_order_bounded_gap(
    prefix: &[VectorFunction],
    e: &DiscreteBFS,
    eps: f64,
) -> Result<(OrderInterval, f64)> {
    let levels: Vec<f64> = (-40..=60).map(|k| 2.0_f64.powi(k)).collect();
    almost_order_bounded_gap_with_grid(prefix, e, eps, &levels)
}

pub fn almost_order_bounded_gap_with_grid(
    prefix: &[VectorFunction],
    e: &DiscreteBFS,
    eps: f64,
    levels: &[f64],
) -> Result<(OrderInterval, f64)> {
    if prefix.is_empty() {
        return Err(Error::EmptyInput(
            "almost_order_bounded_gap needs a nonempty prefix",
        ));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "ε must be positive, got {eps}"
        )));
    }
    let atoms = prefix[0].space().atom_count();
    let mut envelope = vec![0.0_f64; atoms];
    let norm_samples: Vec<ScalarSample> = prefix.iter().map(|f| f.norm_sample()).collect();
    for s in &norm_samples {
        for (env, &v) in envelope.iter_mut().zip(s.values()) {
            *env = env.max(v);
        }
    }
    let space = prefix[0].space().clone();
    let mut best_residual = f64::INFINITY;
    for &level in levels {
        let center = ScalarSample::new(
            space.clone(),
            envelope.iter().map(|&g| g.min(level)).collect(),
        )?;
        let interval = OrderInterval {
            center,
            slack: eps,
        };
        let mut worst = 0.0_f64;
        for s in &norm_samples {
            worst = worst.max(interval.residual(s, e)?);
        }
        best_residual = best_residual.min(worst);
        if worst < eps {
            return Ok((interval, worst));
        }
    }
    Err(Error::GridExhausted { best_residual })
}

/// Result of the indicator-norm infimum. `exact` is false only in the
/// greedy fallback, where the value is a certified under-approximation.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct IndicatorInfimum {
    pub value: f64,
    pub exact: bool,
}

/// inf { ‖1_A‖_E : μ(A) >= r }, exhaustive for up to 24 atoms.
pub fn indicator_norm_infimum(e: &DiscreteBFS, r: f64) -> Result<IndicatorInfimum> {
    let space = e.space();
    let total = space.total_mass();
    if !(r > 0.0) || r > total + 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "threshold must satisfy 0 < r <= total mass, got {r}"
        )));
    }
    let n = space.atom_count();
    if n <= 24 {
        let mut best = f64::INFINITY;
        for mask_bits in 1u32..(1u32 << n) {
            let mass = compensated_sum(
                (0..n)
                    .filter(|&i| mask_bits & (1 << i) != 0)
                    .map(|i| space.weight(i)),
            );
            if mass + 1e-12 >= r {
                best = best.min(e.indicator_norm_at_mass(mass)?);
            }
        }
        if !best.is_finite() || best <= 0.0 {
            return Err(Error::Internal(
                "indicator infimum failed to be strictly positive".into(),
            ));
        }
        Ok(IndicatorInfimum {
            value: best,
            exact: true,
        })
    } else {
        // both norm kinds are nondecreasing in the indicator's mass, so the
        // norm at mass exactly r under-approximates the subset minimum
        Ok(IndicatorInfimum {
            value: e.indicator_norm_at_mass(r)?,
            exact: false,
        })
    }
}

/// One certified pair of the divergence witness.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WitnessPair {
    /// positions within the selected member list
    pub m: usize,
    pub n: usize,
    /// prefix indices of the two members
    pub members: (usize, usize),
    pub omega_mass: f64,
    pub indicator_norm: f64,
    pub e_distance: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NontightWitness {
    pub selected: Vec<usize>,
    pub covers: Vec<CompactCover>,
    pub pairs: Vec<WitnessPair>,
    /// δ0 · indicator_norm_infimum(E, ε0/2): the uniform separation bound
    pub lower_bound: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum WitnessOutcome {
    Found(NontightWitness),
    /// Absence of a witness at these parameters; not a tightness proof.
    NotFound { covers_built: usize },
}

fn mass_selected_values(f: &VectorFunction, threshold: f64) -> Vec<Vec<f64>> {
    let weights = f.space().weights();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        weights[b]
            .partial_cmp(&weights[a])
            .unwrap()
            .then(a.cmp(&b))
    });
    let mut mass = 0.0;
    let mut values = Vec::new();
    for atom in order {
        values.push(f.value(atom).to_vec());
        mass += weights[atom];
        if mass >= threshold {
            break;
        }
    }
    values
}

/// Search for a non-tightness divergence witness: increasing covers K_m with
/// per-member deficiency <= ε0/2, members escaping the δ0-enlargement by
/// measure > ε0, and the certified pairwise lower bound
/// ‖f_n − f_m‖_{E(X)} >= δ0·‖1_Ω‖_E >= δ0·inf.
pub fn nontight_divergence_witness(
    prefix: &[VectorFunction],
    e: &DiscreteBFS,
    eps0: f64,
    delta0: f64,
) -> Result<WitnessOutcome> {
    if prefix.is_empty() {
        return Err(Error::EmptyInput("witness search needs a nonempty prefix"));
    }
    if !(eps0 > 0.0) || !(delta0 > 0.0) {
        return Err(Error::InvalidParameter(
            "ε0 and δ0 must be positive".into(),
        ));
    }
    let total = prefix[0].space().total_mass();
    let threshold = total - eps0 / 2.0;

    let mut selected = vec![0usize];
    let mut centers = mass_selected_values(&prefix[0], threshold);
    let mut covers = vec![CompactCover::new(centers.clone(), 0.0)?];

    loop {
        let current = covers.last().unwrap();
        let last_idx = *selected.last().unwrap();
        let mut found = None;
        for (idx, f) in prefix.iter().enumerate().skip(last_idx + 1) {
            // measure of {f ∉ K_m + B_{δ0}}; the ball is open, so the
            // escape condition is distance >= δ0
            let mask: Vec<bool> = f
                .values()
                .iter()
                .map(|v| cover_distance(f.ambient(), v, current).map(|d| d >= delta0))
                .collect::<Result<_>>()?;
            if f.space().subset_measure(&mask)? > eps0 {
                found = Some(idx);
                break;
            }
        }
        let Some(idx) = found else {
            break;
        };
        selected.push(idx);
        centers.extend(mass_selected_values(&prefix[idx], threshold));
        covers.push(CompactCover::new(centers.clone(), 0.0)?);
    }

    if selected.len() < 2 {
        return Ok(WitnessOutcome::NotFound {
            covers_built: covers.len(),
        });
    }

    let inf = indicator_norm_infimum(e, eps0 / 2.0)?;
    let lower_bound = delta0 * inf.value;
    let mut pairs = Vec::new();
    for m in 0..selected.len() {
        for n in (m + 1)..selected.len() {
            let fm = &prefix[selected[m]];
            let fn_ = &prefix[selected[n]];
            let k_m = &covers[m];
            let omega: Vec<bool> = (0..fm.space().atom_count())
                .map(|atom| {
                    let in_k = cover_distance(fm.ambient(), fm.value(atom), k_m)? <= 1e-12;
                    let escapes =
                        cover_distance(fn_.ambient(), fn_.value(atom), k_m)? >= delta0;
                    Ok(in_k && escapes)
                })
                .collect::<Result<_>>()?;
            let omega_mass = fm.space().subset_measure(&omega)?;
            if omega_mass + 1e-12 < eps0 / 2.0 {
                return Err(Error::Internal(format!(
                    "witness set Ω_{{{m},{n}}} has mass {omega_mass} < ε0/2"
                )));
            }
            let indicator = ScalarSample::new(
                fm.space().clone(),
                omega.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(),
            )?;
            let indicator_norm = e.e_norm(&indicator)?;
            let e_distance = e.e_bochner_distance(fn_, fm)?;
            if e_distance + 1e-9 < delta0 * indicator_norm
                || indicator_norm + 1e-9 < inf.value
            {
                return Err(Error::Internal(format!(
                    "witness lower bound violated at pair ({m},{n})"
                )));
            }
            pairs.push(WitnessPair {
                m,
                n,
                members: (selected[m], selected[n]),
                omega_mass,
                indicator_norm,
                e_distance,
            });
        }
    }
    Ok(WitnessOutcome::Found(NontightWitness {
        selected,
        covers,
        pairs,
        lower_bound,
    }))
}

/// Uniform-E-integrability certificate: ‖1_{‖f‖>r} f‖_E <= bound on the prefix.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UICertificateE {
    pub r: f64,
    pub bound: f64,
}

impl UICertificateE {
    pub fn verify(&self, prefix: &[VectorFunction], e: &DiscreteBFS) -> Result<bool> {
        Ok(ui_modulus_e(prefix, e, self.r)? <= self.bound + 1e-12)
    }
}

/// Greedy ε-net over the prefix in the E(X) norm.
pub fn e_family_greedy_net(
    prefix: &[VectorFunction],
    e: &DiscreteBFS,
    eps: f64,
) -> Result<Vec<usize>> {
    if prefix.is_empty() {
        return Err(Error::EmptyInput("family net needs a nonempty prefix"));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "net radius must be positive, got {eps}"
        )));
    }
    let mut min_dist = vec![f64::INFINITY; prefix.len()];
    let mut selected = Vec::new();
    let mut next = 0usize;
    loop {
        for (j, f) in prefix.iter().enumerate() {
            let d = e.e_bochner_distance(&prefix[next], f)?;
            if d < min_dist[j] {
                min_dist[j] = d;
            }
        }
        selected.push(next);
        let (mut farthest, mut farthest_dist) = (0usize, 0.0_f64);
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

/// Largest greedy cluster at scale ε/2 in the E(X) norm; same tie rules as
/// the p-norm version.
pub fn e_cluster_extract(
    prefix: &[VectorFunction],
    e: &DiscreteBFS,
    eps: f64,
) -> Result<Vec<usize>> {
    let centers = e_family_greedy_net(prefix, e, eps / 2.0)?;
    let mut clusters: Vec<Vec<usize>> = vec![Vec::new(); centers.len()];
    for (j, f) in prefix.iter().enumerate() {
        let (mut best_k, mut best) = (0usize, f64::INFINITY);
        for (k, &c) in centers.iter().enumerate() {
            let d = e.e_bochner_distance(f, &prefix[c])?;
            if d < best {
                best = d;
                best_k = k;
            }
        }
        clusters[best_k].push(j);
    }
    let best_size = clusters.iter().map(|c| c.len()).max().unwrap();
    Ok(clusters
        .iter()
        .filter(|c| c.len() == best_size)
        .min_by_key(|c| c[0])
        .unwrap()
        .clone())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Theorem2Certificate {
    pub indices: Vec<usize>,
    pub pairwise_bound: f64,
    pub r: f64,
    pub projection_index: usize,
    pub projection_norm: f64,
}

/// The 'if' direction with the p-norm replaced by an E-norm throughout: the
/// tail and escape pieces are controlled by the lattice bounds
/// ‖1_A f‖_E <= r·‖1_A‖_E, the restricted family is quantized, projected and
/// clustered in E(X), and every returned pair is verified pairwise within 7ε.
pub fn theorem2_extract(
    prefix: &[VectorFunction],
    e: &DiscreteBFS,
    eps: f64,
    ui: &UICertificateE,
    tight: &crate::criteria::TightnessCertificate,
) -> Result<Theorem2Certificate> {
    if prefix.is_empty() {
        return Err(Error::EmptyInput("theorem2_extract needs a nonempty prefix"));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "ε must be positive, got {eps}"
        )));
    }
    if !(ui.bound < eps) {
        return Err(Error::Refusal(format!(
            "uniform E-integrability: certified bound {} is not < ε = {eps}",
            ui.bound
        )));
    }
    if !ui.verify(prefix, e)? {
        return Err(Error::Refusal(
            "uniform E-integrability: certificate fails re-verification on the prefix".into(),
        ));
    }
    let r = ui.r;
    // escape budget: r·‖1_{f∉K}‖_E <= ε for every member
    for (idx, f) in prefix.iter().enumerate() {
        let outside: Vec<bool> = f
            .membership_mask(&tight.cover)?
            .iter()
            .map(|&m| !m)
            .collect();
        let indicator = ScalarSample::new(
            f.space().clone(),
            outside.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(),
        )?;
        let escape = r * e.e_norm(&indicator)?;
        if escape > eps + 1e-15 {
            return Err(Error::Refusal(format!(
                "tightness: member {idx} has escape term r·‖1_{{f∉K}}‖_E = {escape} > ε"
            )));
        }
    }

    let restricted: Vec<VectorFunction> = prefix
        .iter()
        .map(|f| Ok(f.restrict(&f.membership_mask(&tight.cover)?)?))
        .collect::<Result<_>>()?;
    let one = ScalarSample::new(
        e.space().clone(),
        vec![1.0; e.space().atom_count()],
    )?;
    let e_one = e.e_norm(&one)?;
    let ambient = prefix[0].ambient().clone();

    // quantize-project-cluster in E(X), shrinking the quantization scale
    // until the defect budget 2(1+‖P_N‖)·sup_err·‖1‖_E fits in ε/2
    let mut quant_eps = eps / (8.0 * e_one.max(1.0));
    let mut chosen = None;
    for _ in 0..60 {
        let all_points: Vec<Vec<f64>> = restricted
            .iter()
            .flat_map(|f| f.values().iter().cloned())
            .collect();
        let net = crate::ambient::greedy_net(&ambient, &all_points, quant_eps)?;
        let mut proj_n = 1usize;
        for c in &net.centers {
            let coords = ambient.coordinates(c)?;
            let last = coords
                .iter()
                .rposition(|x| x.abs() > 1e-12)
                .map(|i| i + 1)
                .unwrap_or(1);
            proj_n = proj_n.max(last);
        }
        let projection_norm = ambient.projection_operator_norm(proj_n)?.certified();
        let mut sup_error = 0.0_f64;
        for f in &restricted {
            let q = crate::extraction::quantize_first_min(f, &net)?;
            sup_error = sup_error.max(q.sup_error);
        }
        let defect_budget = 2.0 * (1.0 + projection_norm) * sup_error * e_one;
        if defect_budget <= eps / 2.0 + 1e-15 {
            chosen = Some((proj_n, projection_norm));
            break;
        }
        quant_eps /= 2.0;
    }
    let (proj_n, projection_norm) = chosen.ok_or_else(|| {
        Error::Internal("quantization scale search failed to meet the ε/2 budget".into())
    })?;
    let projected: Vec<VectorFunction> = restricted
        .iter()
        .map(|f| f.project(proj_n))
        .collect::<Result<_>>()?;
    let indices = e_cluster_extract(&projected, e, eps / 2.0)?;

    // pairwise verification of the chain and the 7ε conclusion
    let tol = 1e-9;
    for (a, &i) in indices.iter().enumerate() {
        for &j in indices.iter().skip(a + 1) {
            let di = crate::bochner::decompose(&prefix[i], r, &tight.cover)?;
            let dj = crate::bochner::decompose(&prefix[j], r, &tight.cover)?;
            let distance = e.e_bochner_distance(&prefix[i], &prefix[j])?;
            let trunc = e.e_bochner_distance(&di.inside_radius, &dj.inside_radius)?;
            if distance > 2.0 * eps + trunc + tol {
                return Err(Error::Internal(format!(
                    "chain violation (2ε step) at pair ({i},{j})"
                )));
            }
            let restr = e.e_bochner_distance(&di.inside_cover, &dj.inside_cover)?;
            if distance > 6.0 * eps + restr + tol || distance > 7.0 * eps + tol {
                return Err(Error::Internal(format!(
                    "chain violation (7ε conclusion) at pair ({i},{j})"
                )));
            }
        }
    }
    Ok(Theorem2Certificate {
        indices,
        pairwise_bound: 7.0 * eps,
        r,
        projection_index: proj_n,
        projection_norm,
    })
}
