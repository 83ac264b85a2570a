//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use masec::covering::{covering_theorem_run, find_ratio_height, CoveringOptions, OpenBall, RatioOptions};
use masec::engulfing::{section_engulfing, EngulfingOptions};
use masec::instances::{Instance, InstanceKind, InstanceSpec};
use masec::maximal::{strong_from_profile, weak_from_profile, x_sample, HeightGrid, MaximalOperator, TestFunction};
use masec::point::dist_sq;
use masec::potentials::{sample_closed, AxisEllipsoid, Quadratic};
use masec::quasimetric::{
    doubling_constant, global_height, homogeneous_space_certificate, quasi_distance, quasi_distance_bisection,
    triangle_ratio, CertificateOptions,
};
use masec::runner::{self, CheckReport, ExperimentConfig, RunReport};
use masec::sampling::derive_seed;
use masec::sections::volume::section_interval;
use masec::sections::{classify_dichotomy, estimate_volume, max_interior_height, DichotomyTag, SectionSpec, SectionView};
use masec::sweep::{stratified_sweep, Stratum, SweepEntry, SweepSpec};
use masec::Point;

const SEED: u64 = 20240601;
/// Relative slack for constants whose analytic value is the sharp bound.
const BOUND_SLACK: f64 = 1e-12;

type Verdict = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn check<'a>(rep: &'a RunReport, name: &str) -> Result<&'a CheckReport, String> {
    rep.checks.iter().find(|c| c.name == name).ok_or_else(|| format!("{}: no `{name}` check", rep.instance))
}

fn constant(c: &CheckReport, key: &str) -> Result<f64, String> {
    c.constants.get(key).copied().ok_or_else(|| format!("{}: missing constant `{key}`", c.name))
}

fn hard_ok(c: &CheckReport, instance: &str) -> Result<(), String> {
    match c.hard.iter().find(|a| !a.passed) {
        None => Ok(()),
        Some(a) => Err(format!("{instance}/{}: {} failed: {}", c.name, a.name, a.detail)),
    }
}

fn soft<'a>(c: &'a CheckReport, name: &str) -> Result<&'a masec::runner::Assertion, String> {
    c.soft.iter().find(|a| a.name == name).ok_or_else(|| format!("{}: no `{name}` assertion", c.name))
}

/// Area of the intersection of discs with radii `r1`, `r2` at distance `d`.
fn lens_area(r1: f64, r2: f64, d: f64) -> f64 {
    let a1 = ((d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1)).acos();
    let a2 = ((d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2)).acos();
    let k = ((-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2)).sqrt();
    r1 * r1 * a1 + r2 * r2 * a2 - 0.5 * k
}

/// Engulfing, separating, dichotomy, volume growth and the certificate on
/// one instance.
fn instance_run(kind: InstanceKind) -> Result<RunReport, String> {
    let control = kind == InstanceKind::QuadraticBall;
    let text = serde_json::json!({
        "schema": 1,
        "instance": { "name": kind.name() },
        "seed": SEED,
        "checks": {
            "engulfing": {},
            "separating": { "threshold_search": false, "control": control },
            "dichotomy": {},
            "volume_growth": {},
            "quasimetric": {},
        }
    })
    .to_string();
    let cfg = ExperimentConfig::from_json(&text).map_err(err)?;
    Ok(runner::run(&cfg).map_err(err)?.report)
}

struct Runs(BTreeMap<&'static str, Result<RunReport, String>>);

impl Runs {
    fn get(&self, kind: InstanceKind) -> Result<&RunReport, String> {
        self.0[kind.name()].as_ref().map_err(|e| format!("{}: run failed: {e}", kind.name()))
    }
}

fn c1_quasi_distance_closed_form() -> Verdict {
    let mut worst: f64 = 0.0;
    for (k, inst) in Instance::all().iter().enumerate() {
        let pts = sample_closed(inst.omega.as_ref(), 2000, derive_seed(SEED, &[1, k as u64]));
        for p in pts.chunks(2) {
            let a = quasi_distance(inst.phi.as_ref(), &p[0], &p[1]);
            let b = quasi_distance_bisection(inst.phi.as_ref(), &p[0], &p[1]);
            worst = worst.max((a - b).abs());
        }
    }
    ensure(worst <= 1e-12, format!("max deviation {worst:e}"))?;
    Ok(format!("1000 pairs on each of 4 instances, max |closed − bisection| = {worst:e}"))
}

fn c2_quadratic_ball(runs: &Runs) -> Verdict {
    let inst = Instance::builtin(InstanceKind::QuadraticBall, 0.0).map_err(err)?;
    let (phi, omega) = (inst.phi.as_ref(), inst.omega.as_ref());
    let pts = sample_closed(omega, 2000, derive_seed(SEED, &[2]));
    let mut d_err: f64 = 0.0;
    for p in pts.chunks(2) {
        d_err = d_err.max((quasi_distance(phi, &p[0], &p[1]) - dist_sq(&p[0], &p[1])).abs());
    }
    ensure(d_err <= 1e-15, format!("d(x,y) deviates from |x−y|² by {d_err:e}"))?;

    let rep = runs.get(InstanceKind::QuadraticBall)?;
    let theta = constant(check(rep, "engulfing")?, "theta_emp")?;
    ensure((3.9..=4.0 * (1.0 + BOUND_SLACK)).contains(&theta), format!("θ_emp = {theta}"))?;
    let k = constant(check(rep, "quasimetric")?, "k_emp")?;
    ensure((1.99..=2.0 * (1.0 + BOUND_SLACK)).contains(&k), format!("K_emp = {k}"))?;

    let mut vols = Vec::new();
    for (i, t) in [0.01, 0.04, 0.16].into_iter().enumerate() {
        let v = estimate_volume(phi, omega, &SectionSpec::new([0.0, 0.0], t).map_err(err)?, 100_000, derive_seed(SEED, &[3, i as u64]))
            .map_err(err)?;
        ensure(v.agrees_with(PI * t, 3.0), format!("|S(0,{t})| = {} ± {} against πt = {}", v.volume, v.stderr, PI * t))?;
        vols.push(format!("{:.3}σ", (v.volume - PI * t).abs() / v.stderr.max(1e-300)));
    }

    let m = global_height(phi, omega, 4096, SEED).map_err(err)?.m_emp;
    ensure((m - 4.0).abs() <= 1e-6, format!("M_emp = {m}"))?;

    // interior entries with 2t below h̄ = (1 − |x|)²
    let mut sweep = Vec::new();
    for c in [[0.0f64, 0.0], [0.3, -0.2], [-0.5, 0.1]] {
        let hbar = (1.0 - (c[0] * c[0] + c[1] * c[1]).sqrt()).powi(2);
        for t in [1e-3, 1e-2, 1e-1] {
            if 2.0 * t < hbar {
                sweep.push(SweepEntry { center: Point::from(c), height: t, stratum: Stratum::Interior, interior_height: hbar });
            }
        }
    }
    let dbl = doubling_constant(phi, omega, &sweep, 100_000, SEED).map_err(err)?;
    let mut worst: f64 = 0.0;
    for e in &dbl.entries {
        let r = e.section_ratio.ok_or("degenerate doubling entry")?;
        worst = worst.max((r - 2.0).abs());
    }
    ensure(worst <= 0.05, format!("interior doubling off 2 by {worst}"))?;
    Ok(format!(
        "d exact to {d_err:e}; θ_emp = {theta:.6}; K_emp = {k:.6}; |S(0,t)| within {}; M_emp = {m}; doubling |r−2| ≤ {worst:.4} over {} entries",
        vols.join("/"),
        dbl.entries.len()
    ))
}

fn c3_volume_growth(runs: &Runs) -> Verdict {
    let mut parts = Vec::new();
    for kind in InstanceKind::ALL {
        let rep = runs.get(kind)?;
        let c = check(rep, "volume_growth")?;
        hard_ok(c, kind.name())?;
        let e = constant(c, "max_exponent_error")?;
        ensure(e <= 0.1, format!("{}: exponent error {e}", kind.name()))?;
        let fits = c.details["fits"].as_array().map_or(0, |f| f.len());
        ensure(fits >= 3, format!("{}: only {fits} centers", kind.name()))?;
        parts.push(format!("{} {e:.3}", kind.name()));
    }
    let phi = Quadratic::isotropic(2);
    let omega = AxisEllipsoid::unit_ball(2);
    let truth = lens_area(1.0, 0.1, 1.0);
    // the quoted 0.015373 is the closed form 0.0153745… to within rounding
    ensure((truth - 0.015373).abs() < 2e-6, format!("lens oracle {truth}"))?;
    let v = estimate_volume(&phi, &omega, &SectionSpec::new([1.0, 0.0], 0.01).map_err(err)?, 200_000, SEED).map_err(err)?;
    for target in [truth, 0.015373] {
        ensure(v.agrees_with(target, 3.0), format!("lens |S((1,0),0.01)| = {} ± {} against {target}", v.volume, v.stderr))?;
    }
    Ok(format!("max |exponent − n/2|: {}; lens {:.6} ± {:.1e} against {truth:.6}", parts.join(", "), v.volume, v.stderr))
}

fn c4_separating(runs: &Runs) -> Verdict {
    let mut parts = Vec::new();
    for kind in InstanceKind::ALL {
        let rep = runs.get(kind)?;
        let theta = constant(check(rep, "engulfing")?, "theta_emp")?;
        let c = check(rep, "separating")?;
        hard_ok(c, kind.name())?;
        let checked = constant(c, "theta_checked")?;
        ensure(checked == theta * theta, format!("{}: checked θ = {checked}, θ_emp² = {}", kind.name(), theta * theta))?;
        parts.push(format!("{} θ²={checked:.3}", kind.name()));
    }
    let q = check(runs.get(InstanceKind::QuadraticBall)?, "separating")?;
    let control = soft(q, "theta_one_control")?;
    ensure(control.passed, format!("θ = 1 control: {}", control.detail))?;
    Ok(format!("zero witnesses at budget 1e5 ({}); θ = 1 control: {}", parts.join(", "), control.detail))
}

fn c5_dichotomy(runs: &Runs) -> Verdict {
    let mut parts = Vec::new();
    for kind in InstanceKind::ALL {
        let c = check(runs.get(kind)?, "dichotomy")?;
        hard_ok(c, kind.name())?;
        let base = constant(c, "c_emp_max")?;
        let rerun = constant(c, "c_emp_max_rerun")?;
        let change = (rerun - base).abs() / base;
        ensure(base.is_finite() && change <= 0.1, format!("{}: c_emp {base} → {rerun}", kind.name()))?;
        parts.push(format!("{} {base:.3}→{rerun:.3}", kind.name()));
    }
    let phi = Quadratic::isotropic(2);
    let omega = AxisEllipsoid::unit_ball(2);
    let r = classify_dichotomy(&phi, &omega, &[0.9, 0.0], 0.25, Default::default()).map_err(err)?;
    ensure(r.tag == DichotomyTag::Boundary, "(0.9,0), 0.25 not a boundary case")?;
    let c = r.c_emp.ok_or("no c_emp")?;
    // farthest point of the √0.5-disc about (0.9,0) from z = (1,0) lies on the axis
    let oracle = (0.5f64.sqrt() + 0.1).powi(2) / 0.25;
    ensure((c - 2.606).abs() <= 0.02 && (c - oracle).abs() <= 1e-6, format!("c_emp = {c}, oracle {oracle}"))?;
    Ok(format!("max c_emp base→4×: {}; worked c_emp = {c:.4}", parts.join(", ")))
}

fn c6_covering_lemma() -> Verdict {
    let text = serde_json::json!({
        "schema": 1,
        "instance": { "name": "quadratic_ball" },
        "seed": SEED,
        "checks": { "covering_lemma": { "families": 32, "sections": 200, "probe_budget": 65536 } }
    })
    .to_string();
    let cfg = ExperimentConfig::from_json(&text).map_err(err)?;
    let rep = runner::run(&cfg).map_err(err)?.report;
    let c = check(&rep, "covering_lemma")?;
    hard_ok(c, "quadratic_ball")?;
    let b = constant(c, "overlap_b")?;
    let r2 = constant(c, "overlap_r_squared")?;
    ensure(b >= 0.0 && r2 >= 0.8, format!("overlap fit b = {b}, R² = {r2}"))?;
    Ok(format!("32 families × 200 sections: coverage, order, generations, disjointness hold; b = {b:.4}, R² = {r2:.4}"))
}

fn c7_covering_theorem() -> Verdict {
    let phi = Quadratic::isotropic(1);
    let omega = AxisEllipsoid::unit_ball(1);
    let o = OpenBall::new([0.0], 0.1).map_err(err)?;
    let t = find_ratio_height(&phi, &omega, &[0.0], &o, 0.5, &RatioOptions::default(), SEED).map_err(err)?.t;
    ensure((t - 0.04).abs() <= 1e-3, format!("t_x = {t}"))?;
    let opts = CoveringOptions {
        centers: 16,
        extra_centers: vec![Point::from([0.0])],
        ratio: RatioOptions::default(),
        union_budget: 10_000,
        probe_budget: 1000,
        theta: 4.0,
    };
    let r1 = covering_theorem_run(&phi, &omega, &o, 0.5, &opts, SEED).map_err(err)?;
    ensure(r1.passed && 0.2 <= 0.5f64.sqrt() * r1.union_volume, format!("1-D: |union| = {}", r1.union_volume))?;

    let phi2 = Quadratic::isotropic(2);
    let omega2 = AxisEllipsoid::unit_ball(2);
    let o2 = OpenBall::new([0.0, 0.0], 0.1).map_err(err)?;
    let opts2 = CoveringOptions {
        centers: 32,
        extra_centers: Vec::new(),
        ratio: RatioOptions::default(),
        union_budget: 200_000,
        probe_budget: 20_000,
        theta: 4.0,
    };
    let r2 = covering_theorem_run(&phi2, &omega2, &o2, 0.25, &opts2, SEED).map_err(err)?;
    ensure(r2.passed, format!("2-D: |O| = {} against √ε|union| = {}", r2.o_volume, r2.sqrt_eps * r2.union_volume))?;
    Ok(format!(
        "1-D t_x = {t:.6}, 0.2 ≤ √0.5·{:.4}; 2-D |O| = {:.5} ≤ √0.25·{:.5}, slack {:.5}",
        r1.union_volume, r2.o_volume, r2.union_volume, r2.slack
    ))
}

fn c8_maximal() -> Verdict {
    let phi = Quadratic::isotropic(2);
    let omega = AxisEllipsoid::unit_ball(2);
    let m = global_height(&phi, &omega, 4096, SEED).map_err(err)?.m_emp;
    let grid = HeightGrid::new(1e-4 * m, m, 4).map_err(err)?;
    let one = TestFunction::constant(1.0);
    let op = MaximalOperator::new(&phi, &omega, &one, &grid, 2048, SEED).map_err(err)?;
    let xs = x_sample(&omega, &one, 256, op.domain_volume(), SEED);
    let mut one_err: f64 = 0.0;
    for (k, x) in xs.points.iter().enumerate() {
        one_err = one_err.max((op.eval(x, derive_seed(SEED, &[k as u64])).map_err(err)?.value - 1.0).abs());
    }
    ensure(one_err <= 1e-9, format!("|M(1) − 1| = {one_err:e}"))?;

    let spikes: Vec<TestFunction> = [0.05, 0.1, 0.2].iter().map(|&r| TestFunction::indicator([0.0, 0.0], r)).collect();
    let constants = |budget: usize, x_samples: usize, seed: u64| -> Result<(f64, f64, usize), String> {
        let (mut weak, mut strong, mut below) = (0.0f64, 0.0f64, 0usize);
        for (k, f) in spikes.iter().enumerate() {
            let key = derive_seed(seed, &[k as u64]);
            let op = MaximalOperator::new(&phi, &omega, f, &grid, budget, key).map_err(err)?;
            let prof = op.profile(x_samples, key).map_err(err)?;
            let avg = op.global_average();
            below += prof.values.iter().filter(|v| v.value < avg * (1.0 - BOUND_SLACK)).count();
            weak = weak.max(weak_from_profile(&prof, None).map_err(err)?.constant);
            strong = strong.max(strong_from_profile(&prof, f, &omega, 2.0, 1 << 16, derive_seed(key, &[1])).map_err(err)?);
        }
        Ok((weak, strong, below))
    };
    let (w1, s1, below) = constants(2048, 256, SEED)?;
    let (w4, s4, below4) = constants(4 * 2048, 4 * 256, derive_seed(SEED, &[1]))?;
    ensure(below + below4 == 0, format!("{} values below ‖f‖₁/|Ω|", below + below4))?;
    let (dw, ds) = ((w4 - w1).abs() / w1, (s4 - s1).abs() / s1);
    ensure(dw <= 0.2 && ds <= 0.2, format!("weak {w1} → {w4}, strong {s1} → {s4}"))?;
    Ok(format!(
        "|M(1) − 1| ≤ {one_err:e} on {} points; spike weak {w1:.3}→{w4:.3} ({:.1}%), strong p=2 {s1:.3}→{s4:.3} ({:.1}%); M f ≥ ‖f‖₁/|Ω| everywhere",
        xs.points.len(),
        100.0 * dw,
        100.0 * ds
    ))
}

fn c9_homogeneous_space(runs: &Runs) -> Verdict {
    let mut parts = Vec::new();
    for kind in InstanceKind::ALL {
        let rep = runs.get(kind)?;
        let c = check(rep, "quasimetric")?;
        hard_ok(c, kind.name())?;
        let theta = constant(check(rep, "engulfing")?, "theta_emp")?;
        let k = constant(c, "k_emp")?;
        let sd = constant(c, "section_doubling")?;
        ensure(k <= theta * theta * (1.0 + BOUND_SLACK), format!("{}: K_emp {k} above θ² {}", kind.name(), theta * theta))?;

        let slope = if kind.dim() == 1 { vec![0.5] } else { vec![0.3, -0.7] };
        let plain = Instance::builtin(kind, masec::instances::QUARTIC_EPS).map_err(err)?;
        let tilted = InstanceSpec { name: kind.name().into(), tilt: Some(slope), eps: None }.build().map_err(err)?;
        let opts = CertificateOptions::default();
        let a = homogeneous_space_certificate(plain.phi.as_ref(), plain.omega.as_ref(), theta, &opts, SEED);
        let b = homogeneous_space_certificate(tilted.phi.as_ref(), tilted.omega.as_ref(), theta, &opts, SEED);
        let (ja, jb) = (serde_json::to_string(&a).map_err(err)?, serde_json::to_string(&b).map_err(err)?);
        ensure(a.passed && ja == jb, format!("{}: tilted certificate differs or fails", kind.name()))?;
        parts.push(format!("{} K={k:.3}≤θ²={:.3} D={sd:.3}", kind.name(), theta * theta));
    }
    Ok(format!("{}; tilt reproduces each certificate byte-for-byte", parts.join(", ")))
}

fn c10_interval_oracle() -> Verdict {
    let phi = Quadratic::isotropic(1);
    let omega = AxisEllipsoid::unit_ball(1);
    let exact = |x: f64, t: f64| ((x - t.sqrt()).max(-1.0), (x + t.sqrt()).min(1.0));
    let xs: [f64; 9] = [-1.0, -0.9, -0.5, -0.05, 0.0, 0.3, 0.85, 0.99, 1.0];
    let ts = [1e-4, 1e-3, 0.01, 0.04, 0.1, 0.5, 1.0, 4.0];
    let mut worst: f64 = 0.0;
    let mut track = |what: &str, a: f64, b: f64| -> Result<(), String> {
        let e = (a - b).abs();
        worst = worst.max(e);
        ensure(e <= 1e-9, format!("{what}: {a} against exact {b}"))
    };

    for &x in &xs {
        if x.abs() < 1.0 {
            let h = max_interior_height(&phi, &omega, &[x]).map_err(err)?.height;
            track("h̄", h, (1.0 - x.abs()).powi(2))?;
        }
        for &y in &xs {
            track("quasi-distance", quasi_distance(&phi, &[x], &[y]), (x - y) * (x - y))?;
        }
        for &t in &ts {
            let view = SectionView::new(&phi, &omega, &[x], t).map_err(err)?;
            let (a, b) = section_interval(&view);
            let (ea, eb) = exact(x, t);
            track("section ends", a, ea)?;
            track("section ends", b, eb)?;
            let v = estimate_volume(&phi, &omega, &SectionSpec::new([x], t).map_err(err)?, 1000, SEED).map_err(err)?;
            track("volume", v.volume, eb - ea)?;
            // sup of b(z,y) = (z − y)² over the interval is its squared length
            let (theta, ..) = section_engulfing(&view, &EngulfingOptions::default(), SEED).ok_or("empty section")?;
            track("engulfing ratio", theta, (eb - ea).powi(2) / t)?;
        }
    }

    track("M_emp", global_height(&phi, &omega, 4096, SEED).map_err(err)?.m_emp, 4.0)?;

    for &x0 in &[0.5, 0.9, -0.95, 1.0] {
        for &t0 in &[0.01, 0.1, 0.3] {
            let r = classify_dichotomy(&phi, &omega, &[x0], t0, Default::default()).map_err(err)?;
            let (a, b) = exact(x0, 2.0 * t0);
            if x0.abs() < 1.0 && 2.0 * t0 <= (1.0 - x0.abs()).powi(2) {
                ensure(r.tag == DichotomyTag::Interior, format!("dichotomy at {x0}, {t0}"))?;
            } else {
                let z = x0.signum();
                let c = (a - z).powi(2).max((b - z).powi(2)) / t0;
                track("c_emp", r.c_emp.ok_or("no c_emp")?, c)?;
            }
        }
    }

    let sweep = stratified_sweep(&phi, &omega, &SweepSpec::new(3, 3, 3, vec![1e-3, 1e-2, 1e-1]), SEED).map_err(err)?;
    let dbl = doubling_constant(&phi, &omega, &sweep, 1000, SEED).map_err(err)?;
    for e in &dbl.entries {
        let x = e.center[0];
        let (a, b) = exact(x, 2.0 * e.height);
        let (c, d) = exact(x, e.height);
        track("doubling", e.section_ratio.ok_or("degenerate")?, (b - a) / (d - c))?;
    }

    let pool = sample_closed(&omega, 300, SEED);
    for w in pool.chunks(3) {
        let (x, y, z) = (w[0][0], w[1][0], w[2][0]);
        if let Some(r) = triangle_ratio(&phi, &w[0], &w[1], &w[2]) {
            track("triangle ratio", r, (x - y).powi(2) / ((x - z).powi(2) + (z - y).powi(2)))?;
        }
    }

    let o = OpenBall::new([0.0], 0.1).map_err(err)?;
    for &(x, eps) in &[(0.0, 0.5), (0.05, 0.5), (-0.08, 0.3), (0.02, 0.8)] {
        let got = find_ratio_height(&phi, &omega, &[x], &o, eps, &RatioOptions::default(), SEED).map_err(err)?.t;
        // exact ratio of |S ∩ O| to |S| by bisection in t
        let ratio = |t: f64| {
            let (a, b) = exact(x, t);
            ((b.min(0.1) - a.max(-0.1)).max(0.0)) / (b - a)
        };
        let (mut lo, mut hi) = (1e-12f64, 4.0f64);
        for _ in 0..200 {
            let mid = (lo * hi).sqrt();
            if ratio(mid) > eps {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        track("ratio height", got, hi)?;
    }

    for (k, f) in [TestFunction::indicator([0.0], 0.1), TestFunction::indicator([0.6], 0.2), TestFunction::constant(2.0)]
        .into_iter()
        .enumerate()
    {
        let grid = HeightGrid::new(4e-4, 4.0, 4).map_err(err)?;
        let op = MaximalOperator::new(&phi, &omega, &f, &grid, 1000, SEED).map_err(err)?;
        let integral = |a: f64, b: f64| match &f {
            TestFunction::Indicator { center, radius, .. } => {
                (b.min(center[0] + radius) - a.max(center[0] - radius)).max(0.0)
            }
            _ => 2.0 * (b - a),
        };
        let global = integral(-1.0, 1.0) / 2.0;
        for &x in &xs {
            let oracle = grid.heights().iter().fold(global, |m, &t| {
                let (a, b) = exact(x, t);
                m.max(integral(a, b) / (b - a))
            });
            track("maximal function", op.eval(&[x], derive_seed(SEED, &[k as u64])).map_err(err)?.value, oracle)?;
        }
    }
    Ok(format!("sections, volumes, h̄, M, d, engulfing, dichotomy, doubling, triangle, ratio heights, maximal: max error {worst:e}"))
}

fn c11_determinism() -> Verdict {
    let text = serde_json::json!({
        "schema": 1,
        "instance": { "name": "quadratic_ball" },
        "seed": 7,
        "checks": {
            "engulfing": { "sweep": { "interior": 2, "near_boundary": 2, "boundary": 2, "heights": [0.01] } },
            "volume_growth": { "budget": 20000 },
            "covering_lemma": { "families": 2, "sections": 40, "probe_budget": 4096 },
            "maximal": { "budget": 1024, "x_samples": 32, "stability_factor": 1 },
            "quasimetric": { "points": 32, "triples": 2000 },
        }
    })
    .to_string();
    let cfg = ExperimentConfig::from_json(&text).map_err(err)?;
    let a = runner::run(&cfg).map_err(err)?.report_json();
    let b = runner::run(&cfg).map_err(err)?.report_json();
    ensure(a == b, "report.json differs between identical runs")?;
    Ok(format!("two runs produced identical {}-byte reports", a.len()))
}

fn main() -> ExitCode {
    let start = Instant::now();
    let runs = Runs(InstanceKind::ALL.into_iter().map(|k| (k.name(), instance_run(k))).collect());
    let criteria: Vec<(&str, Box<dyn Fn() -> Verdict + '_>)> = vec![
        ("closed-form quasi-distance", Box::new(c1_quasi_distance_closed_form)),
        ("quadratic ball ground truth", Box::new(|| c2_quadratic_ball(&runs))),
        ("volume growth", Box::new(|| c3_volume_growth(&runs))),
        ("engulfing and separating", Box::new(|| c4_separating(&runs))),
        ("dichotomy", Box::new(|| c5_dichotomy(&runs))),
        ("covering lemma", Box::new(c6_covering_lemma)),
        ("covering theorem", Box::new(c7_covering_theorem)),
        ("maximal function", Box::new(c8_maximal)),
        ("homogeneous space", Box::new(|| c9_homogeneous_space(&runs))),
        ("1-D interval oracle", Box::new(c10_interval_oracle)),
        ("determinism", Box::new(c11_determinism)),
    ];
    let mut failures = 0;
    for (i, (title, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let verdict = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let (tag, detail) = match verdict {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failures += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {:>2} {tag} {title} [{:.1}s]: {detail}", i + 1, t.elapsed().as_secs_f64());
    }
    println!("acceptance: {} of {} criteria passed in {:.1}s", criteria.len() - failures, criteria.len(), start.elapsed().as_secs_f64());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
