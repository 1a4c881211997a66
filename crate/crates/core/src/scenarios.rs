//! Named synthetic families, the two-point counterexample family, and the
//! scenario runner behind the CLI.

use crate::ambient::{AmbientSpace, NormKind};
use crate::bfspace::{DiscreteBFS, OrliczPhi};
use crate::bochner::{FunctionFamily, VectorFunction};
use crate::error::{Error, Result};
use crate::measure::MeasureSpace;
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::path::Path;
use std::sync::Arc;

/// Lattice-point grid of the closed unit disk at spacing 2^{-level},
/// with rank/unrank support so family members can be addressed by index.
#[derive(Debug, Clone)]
pub struct DiskGrid {
    level: u32,
    half: i64,
    /// cumulative point count before each row (row index = i + half)
    row_start: Vec<u64>,
    count: u64,
}

impl DiskGrid {
    pub fn new(level: u32) -> Result<Self> {
        if level > 14 {
            return Err(Error::InvalidParameter(
                "disk grid level capped at 14 (pair indices must fit in 64 bits)".into(),
            ));
        }
        let half = 1i64 << level;
        let mut row_start = Vec::with_capacity((2 * half + 2) as usize);
        let mut acc = 0u64;
        for i in -half..=half {
            row_start.push(acc);
            acc += (2 * Self::jmax(half, i) + 1) as u64;
        }
        row_start.push(acc);
        Ok(DiskGrid {
            level,
            half,
            row_start,
            count: acc,
        })
    }

    fn jmax(half: i64, i: i64) -> i64 {
        let rem = half * half - i * i;
        let mut j = (rem as f64).sqrt() as i64;
        while (j + 1) * (j + 1) <= rem {
            j += 1;
        }
        while j * j > rem {
            j -= 1;
        }
        j
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn spacing(&self) -> f64 {
        2.0_f64.powi(-(self.level as i32))
    }

    /// Rank of the lattice point (i, j); the point must lie in the disk.
    pub fn rank(&self, i: i64, j: i64) -> Result<u64> {
        if i.abs() > self.half || j.abs() > Self::jmax(self.half, i) {
            return Err(Error::InvalidParameter(format!(
                "lattice point ({i},{j}) outside the disk at level {}",
                self.level
            )));
        }
        let row = (i + self.half) as usize;
        Ok(self.row_start[row] + (j + Self::jmax(self.half, i)) as u64)
    }

    pub fn unrank(&self, r: u64) -> (i64, i64) {
        debug_assert!(r < self.count);
        let row = match self.row_start.binary_search(&r) {
            Ok(mut k) => {
                // several rows may share a start only if widths were zero,
                // which cannot happen; still, walk to the defining row
                while k + 1 < self.row_start.len() && self.row_start[k + 1] == r {
                    k += 1;
                }
                k
            }
            Err(k) => k - 1,
        };
        let i = row as i64 - self.half;
        let j = (r - self.row_start[row]) as i64 - Self::jmax(self.half, i);
        (i, j)
    }

    pub fn point(&self, i: i64, j: i64) -> Vec<f64> {
        let h = self.spacing();
        vec![i as f64 * h, j as f64 * h]
    }
}

/// The two-point counterexample family: all nonzero grid functions from a
/// two-atom probability space into the closed unit ball of the plane.
pub struct RemarkFamily {
    pub space: Arc<MeasureSpace>,
    pub ambient: Arc<AmbientSpace>,
    pub family: FunctionFamily,
    pub grid: DiskGrid,
}

impl RemarkFamily {
    /// Number of members (all value pairs except the zero function).
    pub fn member_count(&self) -> u64 {
        self.count_pairs()
    }

    fn count_pairs(&self) -> u64 {
        self.grid.count() * self.grid.count() - 1
    }

    /// 1-based member index of the function with the given lattice values.
    pub fn index_of(&self, first: (i64, i64), second: (i64, i64)) -> Result<u64> {
        let r1 = self.grid.rank(first.0, first.1)?;
        let r2 = self.grid.rank(second.0, second.1)?;
        let raw = r1 * self.grid.count() + r2;
        let zero = self.grid.rank(0, 0)?;
        let zero_pair = zero * self.grid.count() + zero;
        if raw == zero_pair {
            return Err(Error::InvalidParameter(
                "the zero function is not a member".into(),
            ));
        }
        Ok(if raw > zero_pair { raw } else { raw + 1 })
    }
}

pub fn remark_family(level: u32) -> Result<RemarkFamily> {
    let space = MeasureSpace::probability(&[0.5, 0.5])?;
    let ambient = AmbientSpace::canonical(2, NormKind::l2())?;
    let grid = DiskGrid::new(level)?;
    let zero = grid.rank(0, 0)?;
    let zero_pair = zero * grid.count() + zero;
    let gen_grid = grid.clone();
    let gen_space = space.clone();
    let gen_ambient = ambient.clone();
    let family = FunctionFamily::new(move |n| {
        let mut idx = (n as u64) - 1;
        if idx >= zero_pair {
            idx += 1;
        }
        let (i1, j1) = gen_grid.unrank(idx / gen_grid.count());
        let (i2, j2) = gen_grid.unrank(idx % gen_grid.count());
        VectorFunction::new(
            gen_space.clone(),
            gen_ambient.clone(),
            vec![gen_grid.point(i1, j1), gen_grid.point(i2, j2)],
        )
        .expect("grid points are 2-dimensional")
    });
    Ok(RemarkFamily {
        space,
        ambient,
        family,
        grid,
    })
}

/// Outcome of checking the explicit scalar-image construction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RemarkImageCheck {
    pub c: Vec<f64>,
    pub y: f64,
    /// values of the constructed function at the two atoms
    pub function_values: Vec<Vec<f64>>,
    /// ⟨f(ω_i), c⟩ at each atom
    pub pairings: Vec<f64>,
    pub max_value_norm: f64,
    /// largest gap in [-|c|, |c|] left by the attainable scalar images of
    /// the disk grid at the requested resolution
    pub coverage_gap: f64,
}

/// Build the explicit function with ⟨f(ω_i), c⟩ = y (vector reading: each
/// value is a point of the unit ball), verify the pairing and the unit-ball
/// membership, and brute-force the attainable scalar-image range.
pub fn remark_scalar_image_check(c: &[f64], y: f64, resolution: f64) -> Result<RemarkImageCheck> {
    if c.len() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: c.len(),
        });
    }
    let norm_c = (c[0] * c[0] + c[1] * c[1]).sqrt();
    if norm_c == 0.0 {
        return Err(Error::InvalidParameter("c must be nonzero".into()));
    }
    if y.abs() > norm_c + 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "|y| = {} exceeds |c| = {norm_c}: unattainable by Cauchy-Schwarz",
            y.abs()
        )));
    }
    if !(resolution > 0.0) {
        return Err(Error::InvalidParameter("resolution must be positive".into()));
    }
    let function_values: Vec<Vec<f64>> = if y != 0.0 {
        let scale = y / (norm_c * norm_c);
        vec![
            vec![c[0] * scale, c[1] * scale],
            vec![c[0] * scale, c[1] * scale],
        ]
    } else {
        vec![
            vec![c[1] / norm_c, -c[0] / norm_c],
            vec![-c[1] / norm_c, c[0] / norm_c],
        ]
    };
    let pairings: Vec<f64> = function_values
        .iter()
        .map(|v| v[0] * c[0] + v[1] * c[1])
        .collect();
    for &p in &pairings {
        if (p - y).abs() > 1e-9 {
            return Err(Error::Internal(format!(
                "constructed pairing {p} misses target {y}"
            )));
        }
    }
    let max_value_norm = function_values
        .iter()
        .map(|v| (v[0] * v[0] + v[1] * v[1]).sqrt())
        .fold(0.0_f64, f64::max);
    if max_value_norm > 1.0 + 1e-9 {
        return Err(Error::Internal(
            "constructed value leaves the unit ball".into(),
        ));
    }

    // attainable scalar images over the disk grid
    let steps = (1.0 / resolution).ceil() as i64;
    let mut attained = Vec::new();
    for i in -steps..=steps {
        for j in -steps..=steps {
            let x = i as f64 * resolution;
            let z = j as f64 * resolution;
            if x * x + z * z <= 1.0 + 1e-12 {
                attained.push(x * c[0] + z * c[1]);
            }
        }
    }
    attained.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut coverage_gap = (attained[0] + norm_c)
        .max(norm_c - attained[attained.len() - 1])
        .max(0.0);
    for w in attained.windows(2) {
        coverage_gap = coverage_gap.max(w[1] - w[0]);
    }
    Ok(RemarkImageCheck {
        c: c.to_vec(),
        y,
        function_values,
        pairings,
        max_value_norm,
        coverage_gap,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct FamilyParams {
    #[serde(default)]
    pub atoms: Option<usize>,
    #[serde(default)]
    pub dim: Option<usize>,
    /// rotation classes for `rotating`
    #[serde(default)]
    pub period: Option<usize>,
    /// per-member mass for `mass_escape`, blow-up step for `scaled_blowup`
    #[serde(default)]
    pub scale: Option<f64>,
    /// base value for `constant`, `convergent`, `scaled_blowup`
    #[serde(default)]
    pub value: Option<Vec<f64>>,
}

/// A named family together with the space and ambient it lives on.
pub struct NamedFamily {
    pub space: Arc<MeasureSpace>,
    pub ambient: Arc<AmbientSpace>,
    pub family: FunctionFamily,
}

fn basis_vector(dim: usize, k: usize, scale: f64) -> Vec<f64> {
    (0..dim).map(|i| if i == k { scale } else { 0.0 }).collect()
}

/// Deterministic test-corpus generators realizing each criterion's failure
/// mode: `escaping_basis` fails tightness, `mass_escape` fails uniform
/// integrability, `scaled_blowup` is unbounded.
pub fn make_family(name: &str, params: &FamilyParams) -> Result<NamedFamily> {
    let atoms = params.atoms.unwrap_or(2);
    let dim = params.dim.unwrap_or(2);
    if atoms == 0 || dim == 0 {
        return Err(Error::InvalidParameter(
            "atoms and dim must be positive".into(),
        ));
    }
    match name {
        "constant" => {
            let space = MeasureSpace::uniform(atoms)?;
            let ambient = AmbientSpace::canonical(dim, NormKind::l2())?;
            let value = params
                .value
                .clone()
                .unwrap_or_else(|| basis_vector(dim, 0, 1.0));
            if value.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: value.len(),
                });
            }
            let (s, a) = (space.clone(), ambient.clone());
            let family = FunctionFamily::new(move |_| {
                VectorFunction::new(s.clone(), a.clone(), vec![value.clone(); atoms]).unwrap()
            });
            Ok(NamedFamily {
                space,
                ambient,
                family,
            })
        }
        "convergent" => {
            let space = MeasureSpace::uniform(atoms)?;
            let ambient = AmbientSpace::canonical(dim, NormKind::l2())?;
            let base = params
                .value
                .clone()
                .unwrap_or_else(|| basis_vector(dim, 0, 1.0));
            if base.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: base.len(),
                });
            }
            let dir = basis_vector(dim, dim.min(2) - 1, 1.0);
            let (s, a) = (space.clone(), ambient.clone());
            let family = FunctionFamily::new(move |n| {
                let t = 2.0_f64.powi(-(n.min(1000) as i32));
                let v: Vec<f64> = base.iter().zip(&dir).map(|(b, d)| b + t * d).collect();
                VectorFunction::new(s.clone(), a.clone(), vec![v; atoms]).unwrap()
            });
            Ok(NamedFamily {
                space,
                ambient,
                family,
            })
        }
        "rotating" => {
            if dim != 2 {
                return Err(Error::InvalidParameter(
                    "rotating family needs dim = 2".into(),
                ));
            }
            let period = params.period.unwrap_or(40);
            if period == 0 {
                return Err(Error::InvalidParameter("period must be positive".into()));
            }
            let space = MeasureSpace::uniform(atoms)?;
            let ambient = AmbientSpace::canonical(2, NormKind::l2())?;
            let (s, a) = (space.clone(), ambient.clone());
            let family = FunctionFamily::new(move |n| {
                let shift = 2.0 * std::f64::consts::PI * (n % period) as f64 / period as f64;
                let values = (0..atoms)
                    .map(|j| {
                        let t = shift + 2.0 * std::f64::consts::PI * j as f64 / atoms as f64;
                        vec![t.cos(), t.sin()]
                    })
                    .collect();
                VectorFunction::new(s.clone(), a.clone(), values).unwrap()
            });
            Ok(NamedFamily {
                space,
                ambient,
                family,
            })
        }
        "escaping_basis" => {
            let space = MeasureSpace::uniform(atoms)?;
            let ambient = AmbientSpace::canonical(dim, NormKind::l2())?;
            let (s, a) = (space.clone(), ambient.clone());
            let family = FunctionFamily::new(move |n| {
                let v = basis_vector(dim, (n - 1) % dim, 1.0);
                VectorFunction::new(s.clone(), a.clone(), vec![v; atoms]).unwrap()
            });
            Ok(NamedFamily {
                space,
                ambient,
                family,
            })
        }
        "mass_escape" => {
            // dyadic atom weights 2^{-1}..2^{-atoms} (last repeated to close
            // the mass); member n carries scale·2^n on the weight-2^{-n} atom,
            // so its L1 tail norm stays at `scale` for every radius below it
            let scale = params.scale.unwrap_or(1.0);
            if !(scale > 0.0) {
                return Err(Error::InvalidParameter("scale must be positive".into()));
            }
            let mut weights: Vec<f64> =
                (1..=atoms).map(|k| 2.0_f64.powi(-(k as i32))).collect();
            weights.push(2.0_f64.powi(-(atoms as i32)));
            let space = MeasureSpace::probability(&weights)?;
            let ambient = AmbientSpace::canonical(dim, NormKind::l2())?;
            let (s, a) = (space.clone(), ambient.clone());
            let family = FunctionFamily::new(move |n| {
                let k = (n - 1) % atoms + 1;
                let mut values = vec![vec![0.0; dim]; atoms + 1];
                values[k - 1] = basis_vector(dim, 0, scale * 2.0_f64.powi(k as i32));
                VectorFunction::new(s.clone(), a.clone(), values).unwrap()
            });
            Ok(NamedFamily {
                space,
                ambient,
                family,
            })
        }
        "scaled_blowup" => {
            let space = MeasureSpace::uniform(atoms)?;
            let ambient = AmbientSpace::canonical(dim, NormKind::l2())?;
            let base = params
                .value
                .clone()
                .unwrap_or_else(|| basis_vector(dim, 0, 1.0));
            if base.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: base.len(),
                });
            }
            let (s, a) = (space.clone(), ambient.clone());
            let family = FunctionFamily::new(move |n| {
                let v: Vec<f64> = base.iter().map(|b| b * n as f64).collect();
                VectorFunction::new(s.clone(), a.clone(), vec![v; atoms]).unwrap()
            });
            Ok(NamedFamily {
                space,
                ambient,
                family,
            })
        }
        other => Err(Error::InvalidParameter(format!(
            "unknown family name '{other}'"
        ))),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ENormSpec {
    /// "lq" or "luxemburg_power"
    pub kind: String,
    pub q: Option<f64>,
    pub exponent: Option<f64>,
}

impl ENormSpec {
    pub fn build(&self, space: Arc<MeasureSpace>) -> Result<DiscreteBFS> {
        match self.kind.as_str() {
            "lq" => DiscreteBFS::weighted_lq(
                space,
                self.q
                    .ok_or_else(|| Error::Scenario("e.q required for kind 'lq'".into()))?,
            ),
            "luxemburg_power" => DiscreteBFS::luxemburg(
                space,
                OrliczPhi::Power(self.exponent.ok_or_else(|| {
                    Error::Scenario("e.exponent required for kind 'luxemburg_power'".into())
                })?),
            ),
            other => Err(Error::Scenario(format!("unknown E-norm kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Analysis {
    UiModulus {
        p: f64,
        r_grid: Vec<f64>,
    },
    CertifyUi {
        p: f64,
        eps: f64,
    },
    CertifyTightness {
        p: f64,
        eps: f64,
        n_max: Option<usize>,
    },
    Theorem1 {
        p: f64,
        eps: f64,
        /// fixed truncation radius; when set the certificate carries the
        /// measured tail modulus at this radius, and extraction refuses if
        /// that modulus is not below ε
        #[serde(default)]
        r: Option<f64>,
    },
    LemmaExtract {
        p: f64,
        eps: f64,
    },
    Diagonal {
        p: f64,
        schedule: Vec<f64>,
    },
    ScalarReport {
        p: f64,
        eps_start: f64,
        levels: usize,
    },
    WitnessNontight {
        eps0: f64,
        delta0: f64,
        e: ENormSpec,
    },
    AlmostOrderBounded {
        eps: f64,
        e: ENormSpec,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilySpec {
    pub name: String,
    #[serde(default)]
    pub params: FamilyParams,
    pub prefix_length: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    pub family: FamilySpec,
    pub analyses: Vec<Analysis>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisResult {
    pub analysis: String,
    pub outcome: serde_json::Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioReport {
    pub schema_version: u32,
    pub family: FamilySpec,
    pub results: Vec<AnalysisResult>,
}

pub fn parse_scenario(text: &str) -> Result<ScenarioConfig> {
    let config: ScenarioConfig =
        serde_json::from_str(text).map_err(|e| Error::Scenario(format!("config: {e}")))?;
    if config.schema_version != 1 {
        return Err(Error::Scenario(format!(
            "unsupported schema_version {}",
            config.schema_version
        )));
    }
    if config.family.prefix_length == 0 {
        return Err(Error::Scenario("family.prefix_length must be >= 1".into()));
    }
    if config.analyses.is_empty() {
        return Err(Error::Scenario("analyses must be nonempty".into()));
    }
    Ok(config)
}

/// Execute a scenario and optionally write report.json and per-curve CSV
/// files into `out_dir`.
pub fn run_scenario(config: &ScenarioConfig, out_dir: Option<&Path>) -> Result<ScenarioReport> {
    let named = make_family(&config.family.name, &config.family.params)?;
    let prefix = named.family.prefix(config.family.prefix_length)?;
    let mut results = Vec::new();
    let mut csv_files: Vec<(String, String)> = Vec::new();

    for analysis in &config.analyses {
        let (label, outcome) = match analysis {
            Analysis::UiModulus { p, r_grid } => {
                let curve: Vec<(f64, f64)> = r_grid
                    .iter()
                    .map(|&r| Ok((r, crate::criteria::ui_modulus(&prefix, *p, r)?)))
                    .collect::<Result<_>>()?;
                let mut csv = String::from("r,modulus\n");
                for (r, m) in &curve {
                    csv.push_str(&format!("{r},{m}\n"));
                }
                csv_files.push(("ui_modulus.csv".into(), csv));
                ("ui_modulus", json!({ "curve": curve }))
            }
            Analysis::CertifyUi { p, eps } => {
                let cert = crate::converse::ui_from_net(&prefix, *p, *eps)?;
                let measured = crate::criteria::ui_modulus(&prefix, *p, cert.r)?;
                (
                    "certify_ui",
                    json!({ "certificate": cert, "measured_modulus": measured }),
                )
            }
            Analysis::CertifyTightness { p, eps, n_max } => {
                let (cert, audit) =
                    crate::converse::tightness_from_nets(&prefix, *p, *eps, *n_max)?;
                (
                    "certify_tightness",
                    json!({ "certificate": cert, "audit": audit }),
                )
            }
            Analysis::Theorem1 { p, eps, r } => {
                let ui = match r {
                    Some(r) => crate::criteria::UICertificate {
                        r: *r,
                        bound: crate::criteria::ui_modulus(&prefix, *p, *r)?,
                        p: *p,
                    },
                    None => crate::converse::ui_from_net(&prefix, *p, eps / 8.0)?,
                };
                let budget = eps.powf(*p) / ui.r.powf(*p);
                let (tight, audit) =
                    crate::converse::tightness_from_nets(&prefix, *p, budget, None)?;
                let out = crate::extraction::theorem1_extract(&prefix, *p, *eps, &ui, &tight)?;
                (
                    "theorem1",
                    json!({
                        "ui_certificate": ui,
                        "tightness_audit": audit,
                        "certificate": out.certificate,
                        "chain": out.chain,
                    }),
                )
            }
            Analysis::LemmaExtract { p, eps } => {
                let points: Vec<Vec<f64>> = prefix
                    .iter()
                    .flat_map(|f| f.values().iter().cloned())
                    .collect();
                let cover = crate::ambient::greedy_net(&named.ambient, &points, *eps)?;
                let cert = crate::extraction::lemma_extract(&prefix, *p, &cover, *eps, None)?;
                ("lemma_extract", json!({ "certificate": cert }))
            }
            Analysis::Diagonal { p, schedule } => {
                let cert = crate::extraction::diagonal_extract(&prefix, *p, schedule)?;
                ("diagonal", json!({ "certificate": cert }))
            }
            Analysis::ScalarReport {
                p,
                eps_start,
                levels,
            } => {
                let functionals = crate::criteria::default_functionals(named.ambient.dim());
                let grid = crate::criteria::geometric_grid(*eps_start, *levels);
                let report =
                    crate::criteria::scalar_compactness_report(&prefix, *p, &functionals, &grid)?;
                ("scalar_report", serde_json::to_value(&report)?)
            }
            Analysis::WitnessNontight { eps0, delta0, e } => {
                let bfs = e.build(named.space.clone())?;
                let out = crate::bfspace::nontight_divergence_witness(
                    &prefix, &bfs, *eps0, *delta0,
                )?;
                ("witness_nontight", serde_json::to_value(&out)?)
            }
            Analysis::AlmostOrderBounded { eps, e } => {
                let bfs = e.build(named.space.clone())?;
                let (interval, residual) =
                    crate::bfspace::almost_order_bounded_gap(&prefix, &bfs, *eps)?;
                (
                    "almost_order_bounded",
                    json!({
                        "envelope": interval.center.values(),
                        "slack": interval.slack,
                        "residual": residual,
                    }),
                )
            }
        };
        results.push(AnalysisResult {
            analysis: label.to_string(),
            outcome,
        });
    }

    let report = ScenarioReport {
        schema_version: config.schema_version,
        family: config.family.clone(),
        results,
    };
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
        std::fs::write(
            dir.join("report.json"),
            serde_json::to_string_pretty(&report)?,
        )?;
        for (name, body) in csv_files {
            std::fs::write(dir.join(name), body)?;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bochner::{bochner_norm, covering_number};

    #[test]
    fn disk_grid_rank_roundtrip() {
        let grid = DiskGrid::new(3).unwrap();
        for r in 0..grid.count() {
            let (i, j) = grid.unrank(r);
            assert_eq!(grid.rank(i, j).unwrap(), r);
            assert!(i * i + j * j <= 64);
        }
    }

    #[test]
    fn remark_family_members_in_unit_ball_and_nonzero() {
        let rf = remark_family(3).unwrap();
        let prefix = rf.family.prefix(200).unwrap();
        for f in &prefix {
            let mut all_zero = true;
            for v in f.values() {
                assert!((v[0] * v[0] + v[1] * v[1]).sqrt() <= 1.0 + 1e-12);
                if v.iter().any(|x| *x != 0.0) {
                    all_zero = false;
                }
            }
            assert!(!all_zero, "zero function must be excluded");
        }
    }

    #[test]
    fn remark_family_small_norm_member() {
        let rf = remark_family(11).unwrap();
        let idx = rf.index_of((1, 0), (1, 0)).unwrap();
        let member = rf.family.member(idx as usize);
        let norm = bochner_norm(&member, 2.0).unwrap();
        assert!(norm < 1e-3);
        assert!(norm > 0.0);
    }

    #[test]
    fn remark_family_zero_pair_rejected() {
        let rf = remark_family(4).unwrap();
        assert!(rf.index_of((0, 0), (0, 0)).is_err());
    }

    #[test]
    fn remark_image_check_extreme_point() {
        let out = remark_scalar_image_check(&[3.0, 4.0], 5.0, 1e-2).unwrap();
        assert!((out.function_values[0][0] - 0.6).abs() < 1e-12);
        assert!((out.function_values[0][1] - 0.8).abs() < 1e-12);
        assert!(out.pairings.iter().all(|p| (p - 5.0).abs() < 1e-9));
        assert!((out.max_value_norm - 1.0).abs() < 1e-9);
    }

    #[test]
    fn remark_image_check_zero_target() {
        let out = remark_scalar_image_check(&[3.0, 4.0], 0.0, 1e-2).unwrap();
        assert!(out.pairings.iter().all(|p| p.abs() < 1e-9));
        assert!((out.function_values[0][0] - 0.8).abs() < 1e-12);
        assert!((out.function_values[0][1] + 0.6).abs() < 1e-12);
    }

    #[test]
    fn remark_image_check_rejects_unattainable() {
        assert!(remark_scalar_image_check(&[3.0, 4.0], 5.5, 1e-2).is_err());
    }

    #[test]
    fn remark_image_coverage() {
        let out = remark_scalar_image_check(&[3.0, 4.0], 1.0, 1e-2).unwrap();
        assert!(out.coverage_gap <= 1e-2 + 1e-12);
    }

    #[test]
    fn make_family_known_names() {
        for name in [
            "constant",
            "convergent",
            "rotating",
            "escaping_basis",
            "mass_escape",
            "scaled_blowup",
        ] {
            let params = FamilyParams {
                atoms: Some(4),
                dim: Some(2),
                ..Default::default()
            };
            let named = make_family(name, &params).unwrap();
            let prefix = named.family.prefix(6).unwrap();
            assert_eq!(prefix.len(), 6);
        }
        assert!(make_family("nope", &FamilyParams::default()).is_err());
    }

    #[test]
    fn generator_determinism() {
        let params = FamilyParams {
            atoms: Some(8),
            dim: Some(2),
            period: Some(5),
            ..Default::default()
        };
        let a = make_family("rotating", &params).unwrap();
        let b = make_family("rotating", &params).unwrap();
        for n in 1..=10 {
            assert_eq!(a.family.member(n).values(), b.family.member(n).values());
        }
    }

    #[test]
    fn mass_escape_non_decaying_modulus() {
        let params = FamilyParams {
            atoms: Some(12),
            dim: Some(1),
            scale: Some(1.0),
            ..Default::default()
        };
        let named = make_family("mass_escape", &params).unwrap();
        let prefix = named.family.prefix(12).unwrap();
        // closed-form tail: member n contributes scale for every r below its
        // peak, so the modulus stays at scale along the prefix
        for r in [1.0, 2.0, 8.0, 64.0, 1024.0] {
            let m = crate::criteria::ui_modulus(&prefix, 1.0, r).unwrap();
            assert!((m - 1.0).abs() < 1e-12, "r = {r}: modulus {m}");
        }
    }

    #[test]
    fn remark_covering_numbers_finite() {
        let rf = remark_family(4).unwrap();
        let prefix = rf.family.prefix(300).unwrap();
        for eps in [1.0, 0.5, 0.25] {
            let cn = covering_number(&prefix, 2.0, eps).unwrap();
            assert!(cn >= 1 && cn < 300);
        }
    }

    #[test]
    fn scenario_roundtrip_constant_family() {
        let config = parse_scenario(
            r#"{
                "schema_version": 1,
                "family": {"name": "constant", "params": {"atoms": 4, "dim": 2}, "prefix_length": 8},
                "analyses": [
                    {"kind": "ui_modulus", "p": 2.0, "r_grid": [0.5, 1.0, 2.0]},
                    {"kind": "certify_tightness", "p": 1.0, "eps": 0.5}
                ]
            }"#,
        )
        .unwrap();
        let report = run_scenario(&config, None).unwrap();
        assert_eq!(report.results.len(), 2);
        let tight = &report.results[1].outcome;
        assert_eq!(tight["audit"]["measured_deficiency"], 0.0);
    }

    #[test]
    fn scenario_malformed_config_rejected() {
        assert!(parse_scenario("{").is_err());
        assert!(parse_scenario(r#"{"schema_version": 2, "family": {"name": "constant", "prefix_length": 1}, "analyses": []}"#).is_err());
    }

    #[test]
    fn scenario_reports_are_deterministic() {
        let config = parse_scenario(
            r#"{
                "schema_version": 1,
                "family": {"name": "rotating", "params": {"atoms": 16, "period": 8}, "prefix_length": 24},
                "analyses": [{"kind": "theorem1", "p": 2.0, "eps": 0.2}]
            }"#,
        )
        .unwrap();
        let a = serde_json::to_string(&run_scenario(&config, None).unwrap()).unwrap();
        let b = serde_json::to_string(&run_scenario(&config, None).unwrap()).unwrap();
        assert_eq!(a, b);
    }
}
