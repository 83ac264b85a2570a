//! Experiment configuration: parsing, defaults and validation.
//!
//! Budgets are read as signed integers so that a negative value is
//! rejected with the offending field named, instead of a bare serde
//! type error.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instances::InstanceSpec;
use crate::maximal::TestFunction;
use crate::point::Point;
use crate::sweep::SweepSpec;

pub const SCHEMA: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: u32,
    pub instance: InstanceSpec,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
    #[serde(default)]
    pub checks: ChecksConfig,
}

/// A present key enables its check; `{}` selects the defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChecksConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hypotheses: Option<HypothesesConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub global_height: Option<GlobalHeightConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub engulfing: Option<EngulfingConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub separating: Option<SeparatingConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dichotomy: Option<DichotomyConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub volume_growth: Option<GrowthConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub localization: Option<LocalizationConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub covering_lemma: Option<CoveringLemmaConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub covering_theorem: Option<CoveringTheoremConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub maximal: Option<MaximalConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quasimetric: Option<QuasimetricConfig>,
}

/// Center counts per stratum and heights, with signed counts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub interior: i64,
    pub near_boundary: i64,
    pub boundary: i64,
    pub heights: Vec<f64>,
}

impl SweepConfig {
    fn new(interior: i64, near_boundary: i64, boundary: i64, heights: &[f64]) -> Self {
        SweepConfig { interior, near_boundary, boundary, heights: heights.to_vec() }
    }

    pub fn resolve(&self, field: &str) -> Result<SweepSpec> {
        let s = SweepSpec::new(
            count(&format!("{field}.interior"), self.interior)?,
            count(&format!("{field}.near_boundary"), self.near_boundary)?,
            count(&format!("{field}.boundary"), self.boundary)?,
            heights(&format!("{field}.heights"), &self.heights)?.to_vec(),
        );
        if s.interior + s.near_boundary + s.boundary == 0 {
            return Err(Error::Config(format!("{field}: sweep has no centers")));
        }
        Ok(s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HypothesesConfig {
    pub budget: i64,
}

impl Default for HypothesesConfig {
    fn default() -> Self {
        HypothesesConfig { budget: 512 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GlobalHeightConfig {
    pub budget: i64,
}

impl Default for GlobalHeightConfig {
    fn default() -> Self {
        GlobalHeightConfig { budget: 4096 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngulfingConfig {
    pub sweep: SweepConfig,
    pub members: i64,
    pub member_budget: i64,
    pub directions: i64,
    pub climb_sweeps: i64,
    /// Budget multiplier of the stability rerun; 1 disables it.
    pub stability_factor: i64,
    pub stability_tol: f64,
    /// Base points `y` per section for the two-step inclusion.
    pub double_ys: i64,
}

impl Default for EngulfingConfig {
    fn default() -> Self {
        EngulfingConfig {
            sweep: SweepConfig::new(4, 4, 4, &[1e-3, 1e-2, 1e-1]),
            members: 64,
            member_budget: 4096,
            directions: 128,
            climb_sweeps: 200,
            stability_factor: 4,
            stability_tol: 0.05,
            double_ys: 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeparatingConfig {
    /// Outside points over the whole sweep.
    pub budget: i64,
    /// Defaults to the engulfing sweep.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    pub threshold_search: bool,
    /// Also run `θ = 1`, where a violation is expected on quadratics.
    pub control: bool,
}

impl Default for SeparatingConfig {
    fn default() -> Self {
        SeparatingConfig { budget: 100_000, sweep: None, threshold_search: true, control: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DichotomyConfig {
    pub sweep: SweepConfig,
    pub directions: i64,
    pub climb_sweeps: i64,
    pub stability_factor: i64,
    pub stability_tol: f64,
}

impl Default for DichotomyConfig {
    fn default() -> Self {
        DichotomyConfig {
            sweep: SweepConfig::new(8, 8, 8, &[0.01, 0.05, 0.25]),
            directions: 256,
            climb_sweeps: 200,
            stability_factor: 4,
            stability_tol: 0.1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GrowthConfig {
    pub budget: i64,
    /// Centers per stratum, classified at the smallest height.
    pub interior: i64,
    pub near_boundary: i64,
    pub boundary: i64,
    /// Extra explicit centers.
    pub centers: Vec<Point>,
    /// Defaults to `0.1·M_emp·4^{-k}`, `k = 0..=8`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub heights: Option<Vec<f64>>,
    pub exponent_tol: f64,
}

impl Default for GrowthConfig {
    fn default() -> Self {
        GrowthConfig {
            budget: 100_000,
            interior: 2,
            near_boundary: 2,
            boundary: 2,
            centers: Vec::new(),
            heights: None,
            exponent_tol: 0.1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LocalizationConfig {
    /// Quasi-random boundary base points.
    pub points: i64,
    pub heights: Vec<f64>,
    pub budget: i64,
    pub directions: i64,
}

impl Default for LocalizationConfig {
    fn default() -> Self {
        LocalizationConfig { points: 4, heights: vec![1e-3, 1e-2], budget: 20_000, directions: 64 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoveringLemmaConfig {
    pub families: i64,
    pub sections: i64,
    /// Log-uniform height range `[lo, hi)`.
    pub heights: (f64, f64),
    pub eps: Vec<f64>,
    pub probe_budget: i64,
    pub min_r_squared: f64,
}

impl Default for CoveringLemmaConfig {
    fn default() -> Self {
        CoveringLemmaConfig {
            families: 32,
            sections: 200,
            heights: (1e-5, 1e-2),
            eps: (1..=6).map(|k| 0.5f64.powi(k)).collect(),
            probe_budget: 1 << 16,
            min_r_squared: 0.8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BallConfig {
    pub center: Point,
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoveringTheoremConfig {
    pub eps: f64,
    /// Defaults to the radius-0.1 ball about the inner point of `Ω`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub open_set: Option<BallConfig>,
    pub centers: i64,
    pub extra_centers: Vec<Point>,
    pub ratio_budget: i64,
    pub ratio_tol: f64,
    pub union_budget: i64,
    pub probe_budget: i64,
}

impl Default for CoveringTheoremConfig {
    fn default() -> Self {
        CoveringTheoremConfig {
            eps: 0.25,
            open_set: None,
            centers: 32,
            extra_centers: Vec::new(),
            ratio_budget: 100_000,
            ratio_tol: 0.01,
            union_budget: 200_000,
            probe_budget: 20_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaximalConfig {
    /// Defaults to the constant 1 and indicators of radii 0.05, 0.1, 0.2
    /// about the inner point.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub functions: Option<Vec<TestFunction>>,
    pub p: Vec<f64>,
    pub budget: i64,
    pub x_samples: i64,
    /// Grid from `t_min_factor·M_emp` to `M_emp`.
    pub t_min_factor: f64,
    pub per_octave: i64,
    pub stability_factor: i64,
    pub stability_tol: f64,
}

impl Default for MaximalConfig {
    fn default() -> Self {
        MaximalConfig {
            functions: None,
            p: vec![2.0],
            budget: 2048,
            x_samples: 256,
            t_min_factor: 1e-4,
            per_octave: 4,
            stability_factor: 4,
            stability_tol: 0.2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuasimetricConfig {
    pub points: i64,
    pub triples: i64,
    pub climb_sweeps: i64,
    pub restarts: i64,
    pub sandwich_centers: i64,
    pub sandwich_radii: Vec<f64>,
    pub sandwich_budget: i64,
    pub doubling_sweep: SweepConfig,
    pub doubling_budget: i64,
    /// Pairs for the closed form against bisection.
    pub oracle_pairs: i64,
}

impl Default for QuasimetricConfig {
    fn default() -> Self {
        QuasimetricConfig {
            points: 128,
            triples: 20_000,
            climb_sweeps: 200,
            restarts: 4,
            sandwich_centers: 8,
            sandwich_radii: vec![1e-3, 1e-2, 1e-1, 1.0],
            sandwich_budget: 20_000,
            doubling_sweep: SweepConfig::new(3, 3, 3, &[1e-3, 1e-2, 1e-1]),
            doubling_budget: 20_000,
            oracle_pairs: 1000,
        }
    }
}

/// A strictly positive budget.
pub fn budget(field: &str, v: i64) -> Result<usize> {
    if v <= 0 {
        return Err(Error::Config(format!("`{field}` must be a positive integer, got {v}")));
    }
    Ok(v as usize)
}

/// A nonnegative count.
pub fn count(field: &str, v: i64) -> Result<usize> {
    if v < 0 {
        return Err(Error::Config(format!("`{field}` must be nonnegative, got {v}")));
    }
    Ok(v as usize)
}

/// A nonempty list of positive finite heights.
pub fn heights<'a>(field: &str, hs: &'a [f64]) -> Result<&'a [f64]> {
    if hs.is_empty() {
        return Err(Error::Config(format!("`{field}` is empty")));
    }
    if let Some(h) = hs.iter().find(|h| !(**h > 0.0 && h.is_finite())) {
        return Err(Error::Config(format!("`{field}` must hold positive heights, got {h}")));
    }
    Ok(hs)
}

pub fn fraction(field: &str, v: f64) -> Result<f64> {
    if !(v > 0.0 && v < 1.0) {
        return Err(Error::Config(format!("`{field}` must lie in (0,1), got {v}")));
    }
    Ok(v)
}

pub fn positive(field: &str, v: f64) -> Result<f64> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::Config(format!("`{field}` must be positive, got {v}")));
    }
    Ok(v)
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Checks everything decidable before any computation; heights are
    /// compared with `M_emp` once it is known.
    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA {
            return Err(Error::Config(format!("unsupported schema {} (expected {SCHEMA})", self.schema)));
        }
        self.instance.build()?;
        let c = &self.checks;
        if let Some(h) = &c.hypotheses {
            budget("checks.hypotheses.budget", h.budget)?;
        }
        if let Some(g) = &c.global_height {
            budget("checks.global_height.budget", g.budget)?;
        }
        if let Some(e) = &c.engulfing {
            e.sweep.resolve("checks.engulfing.sweep")?;
            budget("checks.engulfing.members", e.members)?;
            budget("checks.engulfing.member_budget", e.member_budget)?;
            budget("checks.engulfing.directions", e.directions)?;
            count("checks.engulfing.climb_sweeps", e.climb_sweeps)?;
            budget("checks.engulfing.stability_factor", e.stability_factor)?;
            positive("checks.engulfing.stability_tol", e.stability_tol)?;
            budget("checks.engulfing.double_ys", e.double_ys)?;
        }
        if let Some(s) = &c.separating {
            budget("checks.separating.budget", s.budget)?;
            if let Some(sw) = &s.sweep {
                sw.resolve("checks.separating.sweep")?;
            }
        }
        if let Some(d) = &c.dichotomy {
            d.sweep.resolve("checks.dichotomy.sweep")?;
            budget("checks.dichotomy.directions", d.directions)?;
            count("checks.dichotomy.climb_sweeps", d.climb_sweeps)?;
            budget("checks.dichotomy.stability_factor", d.stability_factor)?;
            positive("checks.dichotomy.stability_tol", d.stability_tol)?;
        }
        if let Some(g) = &c.volume_growth {
            budget("checks.volume_growth.budget", g.budget)?;
            let n = count("checks.volume_growth.interior", g.interior)?
                + count("checks.volume_growth.near_boundary", g.near_boundary)?
                + count("checks.volume_growth.boundary", g.boundary)?
                + g.centers.len();
            if n == 0 {
                return Err(Error::Config("checks.volume_growth: no centers".into()));
            }
            if let Some(hs) = &g.heights {
                if heights("checks.volume_growth.heights", hs)?.len() < 2 {
                    return Err(Error::Config("`checks.volume_growth.heights` needs two heights to fit".into()));
                }
            }
            positive("checks.volume_growth.exponent_tol", g.exponent_tol)?;
        }
        if let Some(l) = &c.localization {
            budget("checks.localization.points", l.points)?;
            heights("checks.localization.heights", &l.heights)?;
            budget("checks.localization.budget", l.budget)?;
            budget("checks.localization.directions", l.directions)?;
        }
        if let Some(l) = &c.covering_lemma {
            budget("checks.covering_lemma.families", l.families)?;
            budget("checks.covering_lemma.sections", l.sections)?;
            let (lo, hi) = l.heights;
            if !(lo > 0.0 && hi > lo && hi.is_finite()) {
                return Err(Error::Config(format!("`checks.covering_lemma.heights` needs 0 < lo < hi, got [{lo}, {hi})")));
            }
            if l.eps.is_empty() {
                return Err(Error::Config("`checks.covering_lemma.eps` is empty".into()));
            }
            for e in &l.eps {
                fraction("checks.covering_lemma.eps", *e)?;
            }
            budget("checks.covering_lemma.probe_budget", l.probe_budget)?;
        }
        if let Some(t) = &c.covering_theorem {
            fraction("checks.covering_theorem.eps", t.eps)?;
            if let Some(b) = &t.open_set {
                positive("checks.covering_theorem.open_set.radius", b.radius)?;
            }
            count("checks.covering_theorem.centers", t.centers)?;
            if t.centers == 0 && t.extra_centers.is_empty() {
                return Err(Error::Config("checks.covering_theorem: no centers".into()));
            }
            budget("checks.covering_theorem.ratio_budget", t.ratio_budget)?;
            fraction("checks.covering_theorem.ratio_tol", t.ratio_tol)?;
            budget("checks.covering_theorem.union_budget", t.union_budget)?;
            budget("checks.covering_theorem.probe_budget", t.probe_budget)?;
        }
        if let Some(m) = &c.maximal {
            if let Some(fs) = &m.functions {
                if fs.is_empty() {
                    return Err(Error::Config("`checks.maximal.functions` is empty".into()));
                }
            }
            if let Some(p) = m.p.iter().find(|p| !(**p > 1.0 && p.is_finite())) {
                return Err(Error::Config(format!("`checks.maximal.p` entries must exceed 1, got {p}")));
            }
            budget("checks.maximal.budget", m.budget)?;
            budget("checks.maximal.x_samples", m.x_samples)?;
            fraction("checks.maximal.t_min_factor", m.t_min_factor)?;
            budget("checks.maximal.per_octave", m.per_octave)?;
            budget("checks.maximal.stability_factor", m.stability_factor)?;
            positive("checks.maximal.stability_tol", m.stability_tol)?;
        }
        if let Some(q) = &c.quasimetric {
            budget("checks.quasimetric.points", q.points)?;
            budget("checks.quasimetric.triples", q.triples)?;
            count("checks.quasimetric.climb_sweeps", q.climb_sweeps)?;
            count("checks.quasimetric.restarts", q.restarts)?;
            count("checks.quasimetric.sandwich_centers", q.sandwich_centers)?;
            heights("checks.quasimetric.sandwich_radii", &q.sandwich_radii)?;
            budget("checks.quasimetric.sandwich_budget", q.sandwich_budget)?;
            q.doubling_sweep.resolve("checks.quasimetric.doubling_sweep")?;
            budget("checks.quasimetric.doubling_budget", q.doubling_budget)?;
            count("checks.quasimetric.oracle_pairs", q.oracle_pairs)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(body: &str) -> Result<ExperimentConfig> {
        ExperimentConfig::from_json(body)
    }

    #[test]
    fn minimal_config() {
        let c = parse(r#"{"schema":1,"instance":{"name":"quadratic_ball"},"seed":7,"checks":{"engulfing":{}}}"#).unwrap();
        assert_eq!(c.checks.engulfing, Some(EngulfingConfig::default()));
        assert!(c.checks.maximal.is_none());
    }

    #[test]
    fn rejections_name_the_field() {
        let e = parse(r#"{"schema":1,"instance":{"name":"quadratic_ball"},"seed":7,"checks":{"volume_growth":{"budget":-5}}}"#);
        assert!(e.unwrap_err().to_string().contains("checks.volume_growth.budget"));
        let e = parse(r#"{"schema":1,"instance":{"name":"quadratic_ball"},"seed":7,"checks":{"engulfing":{"budgett":5}}}"#);
        assert!(e.unwrap_err().to_string().contains("budgett"));
        let e = parse(r#"{"schema":1,"instance":{"name":"quadratic_ball"}}"#);
        assert!(e.unwrap_err().to_string().contains("seed"));
        let e = parse(r#"{"schema":1,"instance":{"name":"quadratic_ball"},"seed":1,"checks":{"covering_theorem":{"eps":1.0}}}"#);
        assert!(e.unwrap_err().to_string().contains("checks.covering_theorem.eps"));
        assert!(parse(r#"{"schema":2,"instance":{"name":"quadratic_ball"},"seed":1}"#).is_err());
    }
}
