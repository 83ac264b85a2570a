//! Experiment runner: executes the enabled checks of a config in
//! dependency order and renders the reports.
//!
//! `global_height` always runs, and `engulfing` runs whenever a check
//! consuming `θ_emp` is enabled. Configuration problems surface as
//! [`Error::Config`]; failures of the checks themselves are recorded in
//! the report.

pub mod catalog;
pub mod config;
mod render;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use crate::covering::{covering_lemma_run, covering_theorem_run, CoveringOptions, LemmaOptions, OpenBall, RatioOptions};
use crate::engulfing::{
    double_engulfing_ratio, engulf_to_separate, engulfing_constant, separating_check, smallest_separating_theta,
    EngulfingOptions, SeparatingOptions,
};
use crate::error::{Error, Result};
use crate::instances::Instance;
use crate::maximal::{strong_from_profile, weak_from_profile, HeightGrid, MaximalOperator, TestFunction};
use crate::point::Point;
use crate::potentials::{sample_closed, verify_hypotheses, ConvexDomain, Potential};
use crate::quasimetric::{
    global_height, homogeneous_space_certificate, quasi_distance, quasi_distance_bisection, CertificateOptions,
    TriangleOptions,
};
use crate::sampling::{derive_seed, label_key, QmcStream};
use crate::sections::{check_volume_growth, classify_dichotomy, localization_check, DichotomyOptions, DichotomyTag};
use crate::sweep::{stratified_sweep, SweepEntry, SweepSpec};

pub use config::ExperimentConfig;

/// Relative slack for comparisons of constants that are equal in exact
/// arithmetic.
const FLOAT_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn assertion(name: &str, passed: bool, detail: impl Into<String>) -> Assertion {
    Assertion { name: name.into(), passed, detail: detail.into() }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub citation: String,
    /// All hard assertions hold.
    pub passed: bool,
    pub hard: Vec<Assertion>,
    /// Reported, never failing the run.
    pub soft: Vec<Assertion>,
    pub constants: BTreeMap<String, f64>,
    pub details: Value,
}

impl CheckReport {
    fn new(name: &str) -> Self {
        let info = catalog::find(name).expect("catalogued check");
        CheckReport {
            name: name.into(),
            citation: info.citation.into(),
            passed: true,
            hard: Vec::new(),
            soft: Vec::new(),
            constants: BTreeMap::new(),
            details: Value::Null,
        }
    }

    fn hard(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.passed &= passed;
        self.hard.push(assertion(name, passed, detail));
    }

    fn soft(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.soft.push(assertion(name, passed, detail));
    }

    fn constant(&mut self, name: &str, v: f64) {
        self.constants.insert(name.into(), v);
    }

    fn details(&mut self, v: impl Serialize) {
        self.details = serde_json::to_value(v).unwrap_or(Value::Null);
    }

    /// Records a module error as a failed hard assertion.
    fn failed(mut self, e: Error) -> Self {
        self.hard("completed", false, e.to_string());
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub schema: u32,
    pub version: String,
    pub instance: String,
    pub config: ExperimentConfig,
    pub checks: Vec<CheckReport>,
    pub constants: BTreeMap<String, f64>,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Timing {
    pub check: String,
    pub seconds: f64,
}

pub struct RunOutcome {
    pub report: RunReport,
    pub timings: Vec<Timing>,
    /// File name and contents.
    pub csvs: Vec<(String, String)>,
}

impl RunOutcome {
    pub fn report_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.report).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn report_md(&self) -> String {
        render::markdown(&self.report)
    }

    /// Writes report.json, report.md, timings.json and the CSVs.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut files = vec![
            ("report.json".to_string(), self.report_json()),
            ("report.md".to_string(), self.report_md()),
            ("timings.json".to_string(), serde_json::to_string_pretty(&self.timings)? + "\n"),
        ];
        files.extend(self.csvs.iter().cloned());
        let mut out = Vec::new();
        for (name, body) in files {
            let p = dir.join(name);
            std::fs::write(&p, body)?;
            out.push(p);
        }
        Ok(out)
    }
}

fn check_seed(seed: u64, name: &str) -> u64 {
    derive_seed(seed, &[label_key(name)])
}

fn dim_check(field: &str, p: &Point, n: usize) -> Result<()> {
    if p.dim() != n || !p.is_finite() {
        return Err(Error::Config(format!("`{field}` must be a finite point of dimension {n}, got {:?}", p.coords())));
    }
    Ok(())
}

fn height_bound(field: &str, hs: &[f64], bound: f64, what: &str) -> Result<()> {
    if let Some(h) = hs.iter().find(|h| **h > bound) {
        return Err(Error::Config(format!("`{field}` height {h} exceeds {what} = {bound}")));
    }
    Ok(())
}

/// Config checks against the instance and `M_emp`.
fn validate_against(cfg: &ExperimentConfig, n: usize, m: f64) -> Result<()> {
    let c = &cfg.checks;
    if let Some(e) = &c.engulfing {
        height_bound("checks.engulfing.sweep.heights", &e.sweep.heights, m, "M_emp")?;
    }
    if let Some(sw) = c.separating.as_ref().and_then(|s| s.sweep.as_ref()) {
        height_bound("checks.separating.sweep.heights", &sw.heights, m, "M_emp")?;
    }
    if let Some(d) = &c.dichotomy {
        height_bound("checks.dichotomy.sweep.heights", &d.sweep.heights, m, "M_emp")?;
    }
    if let Some(g) = &c.volume_growth {
        if let Some(hs) = &g.heights {
            height_bound("checks.volume_growth.heights", hs, 0.1 * m, "0.1·M_emp")?;
        }
        for p in &g.centers {
            dim_check("checks.volume_growth.centers", p, n)?;
        }
    }
    if let Some(l) = &c.localization {
        height_bound("checks.localization.heights", &l.heights, m, "M_emp")?;
    }
    if let Some(l) = &c.covering_lemma {
        height_bound("checks.covering_lemma.heights", &[l.heights.1], m, "M_emp")?;
    }
    if let Some(t) = &c.covering_theorem {
        if let Some(b) = &t.open_set {
            dim_check("checks.covering_theorem.open_set.center", &b.center, n)?;
        }
        for p in &t.extra_centers {
            dim_check("checks.covering_theorem.extra_centers", p, n)?;
        }
    }
    if let Some(fs) = c.maximal.as_ref().and_then(|m| m.functions.as_ref()) {
        for f in fs {
            f.validate(n).map_err(|e| Error::Config(format!("checks.maximal.functions: {e}")))?;
        }
    }
    if let Some(q) = &c.quasimetric {
        height_bound("checks.quasimetric.doubling_sweep.heights", &q.doubling_sweep.heights, m, "M_emp")?;
    }
    Ok(())
}

struct Ctx<'a> {
    phi: &'a dyn Potential,
    omega: &'a dyn ConvexDomain,
    seed: u64,
}

pub fn run(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let inst = cfg.instance.build()?;
    run_instance(cfg, &inst)
}

fn run_instance(cfg: &ExperimentConfig, inst: &Instance) -> Result<RunOutcome> {
    let ctx = Ctx { phi: inst.phi.as_ref(), omega: inst.omega.as_ref(), seed: cfg.seed };
    let c = &cfg.checks;
    let mut checks = Vec::new();
    let mut timings = Vec::new();
    let mut csvs = Vec::new();
    let mut timed = |name: &str, start: Instant| timings.push(Timing { check: name.into(), seconds: start.elapsed().as_secs_f64() });

    if let Some(h) = &c.hypotheses {
        let t = Instant::now();
        checks.push(hypotheses(&ctx, inst, h));
        timed("hypotheses", t);
    }

    let t = Instant::now();
    let gh_cfg = c.global_height.clone().unwrap_or_default();
    let (gh_report, m) = global_height_check(&ctx, &gh_cfg);
    checks.push(gh_report);
    timed("global_height", t);
    let Some(m) = m else {
        return Ok(finish(cfg, inst, checks, timings, csvs));
    };
    validate_against(cfg, inst.dim(), m)?;

    let needs_theta = c.separating.is_some() || c.covering_lemma.is_some() || c.covering_theorem.is_some() || c.quasimetric.is_some();
    let mut theta = None;
    let mut engulf_sweep = None;
    if c.engulfing.is_some() || needs_theta {
        let t = Instant::now();
        let e = c.engulfing.clone().unwrap_or_default();
        let (r, th, sw) = engulfing(&ctx, &e);
        checks.push(r);
        theta = th;
        engulf_sweep = sw;
        timed("engulfing", t);
    }

    // Checks needing θ record a failure when it is unavailable.
    let no_theta = |name: &str| CheckReport::new(name).failed(Error::InvalidConstant("θ_emp unavailable".into()));

    if let Some(s) = &c.separating {
        let t = Instant::now();
        checks.push(match (theta, &engulf_sweep) {
            (Some(th), Some(sw)) => separating(&ctx, s, th, sw),
            _ => no_theta("separating"),
        });
        timed("separating", t);
    }
    if let Some(d) = &c.dichotomy {
        let t = Instant::now();
        checks.push(dichotomy(&ctx, d));
        timed("dichotomy", t);
    }
    if let Some(g) = &c.volume_growth {
        let t = Instant::now();
        let (r, csv) = volume_growth(&ctx, g, m);
        checks.push(r);
        csvs.extend(csv);
        timed("volume_growth", t);
    }
    if let Some(l) = &c.localization {
        let t = Instant::now();
        checks.push(localization(&ctx, l));
        timed("localization", t);
    }
    if let Some(l) = &c.covering_lemma {
        let t = Instant::now();
        match theta {
            Some(th) => {
                let (r, csv) = covering_lemma(&ctx, l, th);
                checks.push(r);
                csvs.extend(csv);
            }
            None => checks.push(no_theta("covering_lemma")),
        }
        timed("covering_lemma", t);
    }
    if let Some(ct) = &c.covering_theorem {
        let t = Instant::now();
        checks.push(match theta {
            Some(th) => covering_theorem(&ctx, ct, th, m),
            None => no_theta("covering_theorem"),
        });
        timed("covering_theorem", t);
    }
    if let Some(mx) = &c.maximal {
        let t = Instant::now();
        let (r, csv) = maximal(&ctx, mx, m);
        checks.push(r);
        csvs.extend(csv);
        timed("maximal", t);
    }
    if let Some(q) = &c.quasimetric {
        let t = Instant::now();
        match theta {
            Some(th) => {
                let (r, csv) = quasimetric(&ctx, q, th);
                checks.push(r);
                csvs.extend(csv);
            }
            None => checks.push(no_theta("quasimetric")),
        }
        timed("quasimetric", t);
    }
    Ok(finish(cfg, inst, checks, timings, csvs))
}

fn finish(
    cfg: &ExperimentConfig,
    inst: &Instance,
    checks: Vec<CheckReport>,
    timings: Vec<Timing>,
    csvs: Vec<(String, String)>,
) -> RunOutcome {
    let mut constants = BTreeMap::new();
    for c in &checks {
        for (k, v) in &c.constants {
            constants.insert(format!("{}.{k}", c.name), *v);
        }
    }
    let passed = checks.iter().all(|c| c.passed);
    let report = RunReport {
        schema: config::SCHEMA,
        version: env!("CARGO_PKG_VERSION").into(),
        instance: inst.to_string(),
        config: cfg.clone(),
        checks,
        constants,
        passed,
    };
    RunOutcome { report, timings, csvs }
}

fn hypotheses(ctx: &Ctx<'_>, inst: &Instance, h: &config::HypothesesConfig) -> CheckReport {
    let mut r = CheckReport::new("hypotheses");
    let rep = verify_hypotheses(ctx.phi, ctx.omega, &inst.hypotheses, h.budget as usize, check_seed(ctx.seed, "hypotheses"));
    for c in &rep.clauses {
        r.hard(&c.name, c.passed, format!("worst {}{}", c.value, if c.note.is_empty() { String::new() } else { format!("; {}", c.note) }));
    }
    r.constant("separation_min", rep.separation_min);
    r.constant("separation_max", rep.separation_max);
    r.details(&rep);
    r
}

fn global_height_check(ctx: &Ctx<'_>, g: &config::GlobalHeightConfig) -> (CheckReport, Option<f64>) {
    let r = CheckReport::new("global_height");
    match global_height(ctx.phi, ctx.omega, g.budget as usize, check_seed(ctx.seed, "global_height")) {
        Ok(gh) => {
            let mut r = r;
            let ok = gh.m_emp > 0.0 && gh.m_emp.is_finite();
            r.hard("positive_finite", ok, format!("M_emp = {}", gh.m_emp));
            r.constant("m_emp", gh.m_emp);
            r.details(&gh);
            (r, ok.then_some(gh.m_emp))
        }
        Err(e) => (r.failed(e), None),
    }
}

fn engulfing(ctx: &Ctx<'_>, e: &config::EngulfingConfig) -> (CheckReport, Option<f64>, Option<Vec<SweepEntry>>) {
    let r = CheckReport::new("engulfing");
    let seed = check_seed(ctx.seed, "engulfing");
    let spec = match e.sweep.resolve("checks.engulfing.sweep") {
        Ok(s) => s,
        Err(err) => return (r.failed(err), None, None),
    };
    let sweep = match stratified_sweep(ctx.phi, ctx.omega, &spec, derive_seed(seed, &[0])) {
        Ok(s) => s,
        Err(err) => return (r.failed(err), None, None),
    };
    let opts = EngulfingOptions {
        members: e.members as usize,
        member_budget: e.member_budget as usize,
        directions: e.directions as usize,
        climb_sweeps: e.climb_sweeps as usize,
    };
    let f = e.stability_factor as usize;
    let big = EngulfingOptions {
        members: opts.members * f,
        member_budget: opts.member_budget * f,
        directions: opts.directions * f,
        ..opts
    };
    let run = || -> Result<_> {
        let base = engulfing_constant(ctx.phi, ctx.omega, &sweep, &opts, derive_seed(seed, &[1]))?;
        let rerun = if f > 1 { Some(engulfing_constant(ctx.phi, ctx.omega, &sweep, &big, derive_seed(seed, &[2]))?) } else { None };
        let theta = rerun.as_ref().map_or(base.theta_emp, |b| b.theta_emp.max(base.theta_emp));
        let double = double_engulfing_ratio(ctx.phi, ctx.omega, &sweep, e.double_ys as usize, opts.directions, derive_seed(seed, &[3]))?;
        Ok((base, rerun, theta, double))
    };
    match run() {
        Err(err) => (r.failed(err), None, None),
        Ok((base, rerun, theta, double)) => {
            let mut r = r;
            r.hard("theta_at_least_one", base.theta_emp >= 1.0 - 1e-9, format!("θ_emp = {}", base.theta_emp));
            if let Some(b) = &rerun {
                let change = (b.theta_emp - base.theta_emp).abs() / base.theta_emp;
                r.hard(
                    "budget_stability",
                    change <= e.stability_tol,
                    format!("θ_emp {} at {f}× budget, relative change {change:.4} (tolerance {})", b.theta_emp, e.stability_tol),
                );
                r.constant("theta_emp_rerun", b.theta_emp);
            }
            let bound = theta * theta * (1.0 + FLOAT_SLACK);
            r.hard("two_step_inclusion", double <= bound, format!("sup b(w,x)/t = {double} against θ_emp² = {}", theta * theta));
            if base.skipped > 0 {
                r.soft("empty_sections", false, format!("{} sweep sections yielded no sample", base.skipped));
            }
            r.constant("theta_emp", theta);
            r.constant("two_step_ratio", double);
            r.details(serde_json::json!({ "sweep_size": sweep.len(), "base": base, "rerun": rerun }));
            (r, Some(theta), Some(sweep))
        }
    }
}

fn separating(ctx: &Ctx<'_>, s: &config::SeparatingConfig, theta: f64, engulf_sweep: &[SweepEntry]) -> CheckReport {
    let r = CheckReport::new("separating");
    let seed = check_seed(ctx.seed, "separating");
    let run = || -> Result<_> {
        let own;
        let sweep: &[SweepEntry] = match &s.sweep {
            Some(sw) => {
                own = stratified_sweep(ctx.phi, ctx.omega, &sw.resolve("checks.separating.sweep")?, derive_seed(seed, &[0]))?;
                &own
            }
            None => engulf_sweep,
        };
        let opts = SeparatingOptions::with_budget(s.budget as usize, sweep.len());
        let th = engulf_to_separate(theta)?;
        let main = separating_check(ctx.phi, ctx.omega, th, sweep, &opts, derive_seed(seed, &[1]))?;
        let threshold =
            if s.threshold_search { Some(smallest_separating_theta(ctx.phi, ctx.omega, sweep, &opts, derive_seed(seed, &[1]))?) } else { None };
        let control = if s.control { Some(separating_check(ctx.phi, ctx.omega, 1.0, sweep, &opts, derive_seed(seed, &[1]))?) } else { None };
        Ok((main, threshold, control))
    };
    match run() {
        Err(e) => r.failed(e),
        Ok((main, threshold, control)) => {
            let mut r = r;
            r.hard(
                "separating_with_theta_squared",
                main.passed(),
                format!("{} witnesses over {} pairs at θ = {}, min margin {}", main.violations.len(), main.pairs_checked, main.theta, main.min_margin),
            );
            r.constant("theta_checked", main.theta);
            r.constant("min_margin", main.min_margin);
            if let Some(t) = &threshold {
                match (t.theta_sep, t.engulfing_bound) {
                    (Some(ts), Some(eb)) => {
                        r.constant("theta_sep", ts);
                        r.soft(
                            "threshold_bounds_engulfing",
                            eb >= theta * (1.0 - FLOAT_SLACK),
                            format!("smallest separating θ = {ts}, squared {eb}, against θ_emp = {theta}"),
                        );
                    }
                    _ => r.soft("threshold_bounds_engulfing", false, "no grid value up to 64 separates"),
                }
            }
            if let Some(c) = &control {
                r.soft("theta_one_control", !c.passed(), format!("{} witnesses at θ = 1", c.violations.len()));
            }
            r.details(serde_json::json!({ "main": main, "threshold": threshold, "control_violations": control.map(|c| c.violations.len()) }));
            r
        }
    }
}

fn dichotomy_max(ctx: &Ctx<'_>, sweep: &[SweepEntry], opts: DichotomyOptions) -> Vec<Result<crate::sections::DichotomyResult>> {
    sweep.par_iter().map(|e| classify_dichotomy(ctx.phi, ctx.omega, &e.center, e.height, opts)).collect()
}

fn dichotomy(ctx: &Ctx<'_>, d: &config::DichotomyConfig) -> CheckReport {
    let r = CheckReport::new("dichotomy");
    let seed = check_seed(ctx.seed, "dichotomy");
    let sweep = match d.sweep.resolve("checks.dichotomy.sweep").and_then(|s| stratified_sweep(ctx.phi, ctx.omega, &s, seed)) {
        Ok(s) => s,
        Err(e) => return r.failed(e),
    };
    let opts = DichotomyOptions { directions: d.directions as usize, sweeps: d.climb_sweeps as usize };
    let results = dichotomy_max(ctx, &sweep, opts);
    let mut r = r;
    let failures: Vec<String> = results.iter().filter_map(|x| x.as_ref().err().map(|e| e.to_string())).collect();
    let ok: Vec<_> = results.into_iter().filter_map(|x| x.ok()).collect();
    r.hard(
        "all_classified",
        failures.is_empty(),
        format!("{} of {} entries classified{}", ok.len(), sweep.len(), failures.first().map(|f| format!("; first error: {f}")).unwrap_or_default()),
    );
    let c_max = |rs: &[crate::sections::DichotomyResult]| rs.iter().filter_map(|x| x.c_emp).fold(0.0, f64::max);
    let cm = c_max(&ok);
    let boundary = ok.iter().filter(|x| x.tag == DichotomyTag::Boundary).count();
    r.hard("c_emp_finite", cm.is_finite(), format!("max c_emp = {cm} over {boundary} boundary entries"));
    r.constant("c_emp_max", cm);
    r.constant("boundary_fraction", boundary as f64 / ok.len().max(1) as f64);
    let f = d.stability_factor as usize;
    if f > 1 {
        let big = DichotomyOptions { directions: opts.directions * f, ..opts };
        let rerun: Vec<_> = dichotomy_max(ctx, &sweep, big).into_iter().filter_map(|x| x.ok()).collect();
        let cm2 = c_max(&rerun);
        let change = if cm > 0.0 { (cm2 - cm).abs() / cm } else { (cm2 - cm).abs() };
        r.soft("budget_stability", change <= d.stability_tol, format!("max c_emp {cm2} at {f}× directions, relative change {change:.4}"));
        r.constant("c_emp_max_rerun", cm2);
    }
    r.details(&ok);
    r
}

fn volume_growth(ctx: &Ctx<'_>, g: &config::GrowthConfig, m: f64) -> (CheckReport, Vec<(String, String)>) {
    let r = CheckReport::new("volume_growth");
    let seed = check_seed(ctx.seed, "volume_growth");
    let hs: Vec<f64> = g.heights.clone().unwrap_or_else(|| (0..=8).map(|k| 0.1 * m / 4f64.powi(8 - k)).collect());
    let t_min = hs.iter().cloned().fold(f64::INFINITY, f64::min);
    let run = || -> Result<_> {
        let spec = SweepSpec::new(g.interior as usize, g.near_boundary as usize, g.boundary as usize, vec![t_min]);
        let mut centers: Vec<Point> = g.centers.clone();
        centers.extend(stratified_sweep(ctx.phi, ctx.omega, &spec, derive_seed(seed, &[0]))?.into_iter().map(|e| e.center));
        check_volume_growth(ctx.phi, ctx.omega, &centers, &hs, g.budget as usize, derive_seed(seed, &[1]))
    };
    match run() {
        Err(e) => (r.failed(e), Vec::new()),
        Ok(rep) => {
            let mut r = r;
            let err = rep.max_exponent_error();
            let fitted = rep.fits.iter().filter(|f| f.exponent.is_some()).count();
            r.hard("all_centers_fitted", fitted == rep.fits.len(), format!("{fitted} of {} centers fitted", rep.fits.len()));
            r.hard(
                "exponent",
                err <= g.exponent_tol,
                format!("max |exponent − n/2| = {err:.4} (tolerance {}) over t ∈ [{}, {}]", g.exponent_tol, rep.height_range.0, rep.height_range.1),
            );
            r.constant("c1_emp", rep.c1_emp);
            r.constant("c2_emp", rep.c2_emp);
            r.constant("max_exponent_error", err);
            let csv = render::growth_csv(&rep);
            r.details(&rep);
            (r, vec![("volume_growth.csv".into(), csv)])
        }
    }
}

fn localization(ctx: &Ctx<'_>, l: &config::LocalizationConfig) -> CheckReport {
    let mut r = CheckReport::new("localization");
    let seed = check_seed(ctx.seed, "localization");
    let s = QmcStream::new(crate::potentials::boundary_param_dim(ctx.omega), derive_seed(seed, &[0]));
    let jobs: Vec<(Point, f64)> = (0..l.points as u64)
        .flat_map(|k| {
            let z = ctx.omega.boundary_point(&s.point(k));
            l.heights.iter().map(move |&h| (z.clone(), h))
        })
        .collect();
    let reports: Vec<_> = jobs
        .par_iter()
        .enumerate()
        .map(|(k, (z, h))| localization_check(ctx.phi, ctx.omega, z, *h, l.budget as usize, l.directions as usize, derive_seed(seed, &[1, k as u64])))
        .collect();
    let errors: Vec<String> = reports.iter().filter_map(|x| x.as_ref().err().map(|e| e.to_string())).collect();
    let ok: Vec<_> = reports.into_iter().filter_map(|x| x.ok()).collect();
    r.hard("completed", errors.is_empty(), format!("{} of {} base points{}", ok.len(), jobs.len(), errors.first().map(|e| format!("; first error: {e}")).unwrap_or_default()));
    let k_lo = ok.iter().filter_map(|x| x.k_lo).fold(f64::INFINITY, f64::min);
    let k_hi = ok.iter().map(|x| x.k_hi).fold(f64::INFINITY, f64::min);
    let slide = ok.iter().map(|x| x.slide_residual).fold(0.0, f64::max);
    r.soft("k_bounded_below", k_hi > 0.0 && k_hi.is_finite(), format!("min k_lo {k_lo}, min k_hi {k_hi}, max slide residual {slide}"));
    if k_lo.is_finite() {
        r.constant("k_lo_min", k_lo);
    }
    r.constant("k_hi_min", k_hi);
    r.constant("slide_residual_max", slide);
    r.details(&ok);
    r
}

fn covering_lemma(ctx: &Ctx<'_>, l: &config::CoveringLemmaConfig, theta: f64) -> (CheckReport, Vec<(String, String)>) {
    let r = CheckReport::new("covering_lemma");
    let opts = LemmaOptions {
        families: l.families as usize,
        sections: l.sections as usize,
        heights: l.heights,
        eps: l.eps.clone(),
        probe_budget: l.probe_budget as usize,
        theta,
    };
    match covering_lemma_run(ctx.phi, ctx.omega, &opts, check_seed(ctx.seed, "covering_lemma")) {
        Err(e) => (r.failed(e), Vec::new()),
        Ok(rep) => {
            let mut r = r;
            let fams = &rep.families;
            let all = |f: fn(&crate::covering::FamilyOutcome) -> bool| fams.iter().filter(|x| !f(x)).count();
            r.hard("centers_covered", all(|f| f.all_covered) == 0, format!("{} families with an uncovered center", all(|f| f.all_covered)));
            r.hard("selection_order", all(|f| f.earlier_hits == 0) == 0, format!("{} families with a selected center in an earlier section", all(|f| f.earlier_hits == 0)));
            r.hard(
                "generation_heights",
                all(|f| f.generation_errors == 0 && f.generations_monotone) == 0,
                format!("{} families with generation errors", all(|f| f.generation_errors == 0 && f.generations_monotone)),
            );
            let witnesses: usize = fams.iter().map(|f| f.disjointness_witnesses).sum();
            let probes: usize = fams.iter().map(|f| f.probes).sum();
            r.hard("disjointness", witnesses == 0, format!("{witnesses} witnesses over {probes} probes with α = 2θ² = {}", 2.0 * theta * theta));
            r.hard("overlap_monotone", rep.monotone, "overlap counts non-decreasing in log(1/ε)");
            match &rep.fit {
                Some(fit) => {
                    r.soft(
                        "overlap_log_fit",
                        fit.slope >= 0.0 && fit.r_squared >= l.min_r_squared,
                        format!("a = {}, b = {}, R² = {} (target R² ≥ {}, b ≥ 0)", fit.intercept, fit.slope, fit.r_squared, l.min_r_squared),
                    );
                    r.constant("overlap_a", fit.intercept);
                    r.constant("overlap_b", fit.slope);
                    r.constant("overlap_r_squared", fit.r_squared);
                }
                None => r.soft("overlap_log_fit", false, "fewer than two distinct ε"),
            }
            let mean_sel = fams.iter().map(|f| f.selected as f64).sum::<f64>() / fams.len().max(1) as f64;
            r.constant("mean_selected", mean_sel);
            let csv = render::overlap_csv(&rep);
            r.details(&rep);
            (r, vec![("overlap_profile.csv".into(), csv)])
        }
    }
}

fn covering_theorem(ctx: &Ctx<'_>, ct: &config::CoveringTheoremConfig, theta: f64, m: f64) -> CheckReport {
    let r = CheckReport::new("covering_theorem");
    let ball = match &ct.open_set {
        Some(b) => OpenBall::new(b.center.clone(), b.radius),
        None => OpenBall::new(ctx.omega.inner_point(), 0.1),
    };
    let ball = match ball {
        Ok(b) => b,
        Err(e) => return r.failed(e),
    };
    let opts = CoveringOptions {
        centers: ct.centers as usize,
        extra_centers: ct.extra_centers.clone(),
        ratio: RatioOptions { budget: ct.ratio_budget as usize, ratio_tol: ct.ratio_tol, t_max: m, ..Default::default() },
        union_budget: ct.union_budget as usize,
        probe_budget: ct.probe_budget as usize,
        theta,
    };
    match covering_theorem_run(ctx.phi, ctx.omega, &ball, ct.eps, &opts, check_seed(ctx.seed, "covering_theorem")) {
        Err(e) => r.failed(e),
        Ok(rep) => {
            let mut r = r;
            r.hard("centers_covered", rep.centers_covered, format!("probe coverage of O {:.4}", rep.probe_coverage));
            r.hard(
                "density_inequality",
                rep.passed,
                format!("|O| = {}, |⋃| = {} ± {}, √ε|⋃| − |O| = {}", rep.o_volume, rep.union_volume, rep.union_stderr, rep.slack),
            );
            if !rep.failed_centers.is_empty() {
                r.soft("ratio_hypothesis", false, format!("{} centers without a ratio height", rep.failed_centers.len()));
            }
            r.constant("ratio", rep.ratio);
            r.constant("slack", rep.slack);
            r.constant("selected", rep.selected.len() as f64);
            r.details(&rep);
            r
        }
    }
}

struct MaximalRun {
    weak: Vec<crate::maximal::WeakReport>,
    strong: Vec<(f64, f64, String)>,
    below_average: usize,
    above_sup: usize,
    values: usize,
}

fn maximal_pass(ctx: &Ctx<'_>, fs: &[TestFunction], ps: &[f64], grid: &HeightGrid, budget: usize, xs: usize, seed: u64) -> Result<MaximalRun> {
    let mut run = MaximalRun { weak: Vec::new(), strong: ps.iter().map(|&p| (p, 0.0, String::new())).collect(), below_average: 0, above_sup: 0, values: 0 };
    for (k, f) in fs.iter().enumerate() {
        let key = derive_seed(seed, &[k as u64]);
        let op = MaximalOperator::new(ctx.phi, ctx.omega, f, grid, budget, key)?;
        let prof = op.profile(xs, key)?;
        let avg = op.global_average();
        let sup = f.sup_abs();
        for v in &prof.values {
            run.values += 1;
            run.below_average += (v.value < avg * (1.0 - FLOAT_SLACK)) as usize;
            run.above_sup += (v.value > sup * (1.0 + FLOAT_SLACK)) as usize;
        }
        let w = weak_from_profile(&prof, None)?;
        if w.l1_norm > 0.0 {
            for e in run.strong.iter_mut() {
                let c = strong_from_profile(&prof, f, ctx.omega, e.0, budget.max(1 << 16), derive_seed(key, &[1]))?;
                if c > e.1 {
                    e.1 = c;
                    e.2 = f.label();
                }
            }
        }
        run.weak.push(w);
    }
    Ok(run)
}

fn maximal(ctx: &Ctx<'_>, mx: &config::MaximalConfig, m: f64) -> (CheckReport, Vec<(String, String)>) {
    let r = CheckReport::new("maximal");
    let seed = check_seed(ctx.seed, "maximal");
    let fs = mx.functions.clone().unwrap_or_else(|| {
        let c = ctx.omega.inner_point();
        let mut v = vec![TestFunction::constant(1.0)];
        v.extend([0.05, 0.1, 0.2].map(|r| TestFunction::indicator(c.clone(), r)));
        v
    });
    let grid = match HeightGrid::new(mx.t_min_factor * m, m, mx.per_octave as u32) {
        Ok(g) => g,
        Err(e) => return (r.failed(e), Vec::new()),
    };
    let f = mx.stability_factor as usize;
    let run = || -> Result<_> {
        let base = maximal_pass(ctx, &fs, &mx.p, &grid, mx.budget as usize, mx.x_samples as usize, seed)?;
        let rerun = if f > 1 {
            Some(maximal_pass(ctx, &fs, &mx.p, &grid, f * mx.budget as usize, f * mx.x_samples as usize, derive_seed(seed, &[1]))?)
        } else {
            None
        };
        Ok((base, rerun))
    };
    match run() {
        Err(e) => (r.failed(e), Vec::new()),
        Ok((base, rerun)) => {
            let mut r = r;
            r.hard("at_least_global_average", base.below_average == 0, format!("{} of {} values below ‖f‖₁/|Ω|", base.below_average, base.values));
            r.hard("at_most_sup", base.above_sup == 0, format!("{} of {} values above sup|f|", base.above_sup, base.values));
            let weak = base.weak.iter().map(|w| w.constant).fold(0.0, f64::max);
            let finite = weak.is_finite() && base.strong.iter().all(|s| s.1.is_finite());
            r.hard("constants_finite", finite, format!("weak {weak}"));
            r.constant("weak_constant", weak);
            for (p, c, _) in &base.strong {
                r.constant(&format!("strong_p{p}"), *c);
            }
            if let Some(b) = &rerun {
                let weak2 = b.weak.iter().map(|w| w.constant).fold(0.0, f64::max);
                let rel = |a: f64, b: f64| if a > 0.0 { (b - a).abs() / a } else { (b - a).abs() };
                let mut worst = rel(weak, weak2);
                for (s1, s2) in base.strong.iter().zip(&b.strong) {
                    worst = worst.max(rel(s1.1, s2.1));
                }
                r.soft("budget_stability", worst <= mx.stability_tol, format!("largest relative change {worst:.4} at {f}× budget (tolerance {})", mx.stability_tol));
                r.constant("weak_constant_rerun", weak2);
                for (p, c, _) in &b.strong {
                    r.constant(&format!("strong_p{p}_rerun"), *c);
                }
            }
            let csv = render::superlevel_csv(&base.weak);
            r.details(serde_json::json!({
                "heights": grid.heights().len(),
                "weak": base.weak,
                "strong": base.strong.iter().map(|(p, c, f)| serde_json::json!({"p": p, "constant": c, "function": f})).collect::<Vec<_>>(),
            }));
            (r, vec![("superlevel.csv".into(), csv)])
        }
    }
}

fn quasimetric(ctx: &Ctx<'_>, q: &config::QuasimetricConfig, theta: f64) -> (CheckReport, Vec<(String, String)>) {
    let mut r = CheckReport::new("quasimetric");
    let seed = check_seed(ctx.seed, "quasimetric");
    let pts = sample_closed(ctx.omega, 2 * q.oracle_pairs as usize, derive_seed(seed, &[0]));
    let worst = pts
        .par_chunks(2)
        .filter(|c| c.len() == 2)
        .map(|c| (quasi_distance(ctx.phi, &c[0], &c[1]) - quasi_distance_bisection(ctx.phi, &c[0], &c[1])).abs())
        .reduce(|| 0.0, f64::max);
    r.hard("closed_form_oracle", worst <= 1e-12, format!("max |closed form − bisection| = {worst:e} over {} pairs", pts.len() / 2));
    let spec = match q.doubling_sweep.resolve("checks.quasimetric.doubling_sweep") {
        Ok(s) => s,
        Err(e) => return (r.failed(e), Vec::new()),
    };
    let opts = CertificateOptions {
        points: q.points as usize,
        triangle: TriangleOptions { triples: q.triples as usize, climb_sweeps: q.climb_sweeps as usize, restarts: q.restarts as usize },
        sandwich_centers: q.sandwich_centers as usize,
        sandwich_radii: q.sandwich_radii.clone(),
        sandwich_budget: q.sandwich_budget as usize,
        doubling_sweep: spec,
        doubling_budget: q.doubling_budget as usize,
    };
    let cert = homogeneous_space_certificate(ctx.phi, ctx.omega, theta, &opts, derive_seed(seed, &[1]));
    for c in &cert.clauses {
        r.hard(&c.name, c.passed, c.detail.clone());
    }
    for w in &cert.warnings {
        r.soft("warning", false, w.clone());
    }
    r.constant("theta_emp", theta);
    for (name, v) in [("k_emp", cert.k_emp), ("section_doubling", cert.section_doubling), ("ball_doubling", cert.ball_doubling)] {
        if let Some(v) = v {
            r.constant(name, v);
        }
    }
    let csv = render::doubling_csv(&cert.doubling_entries);
    r.details(&cert);
    (r, vec![("doubling.csv".into(), csv)])
}

/// Output directory: explicit, then the config, then `masec-out`.
pub fn output_dir(explicit: Option<&Path>, cfg: &ExperimentConfig) -> PathBuf {
    explicit
        .map(Path::to_path_buf)
        .or_else(|| cfg.output_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("masec-out"))
}
