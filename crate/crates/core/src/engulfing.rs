//! Engulfing constant `θ = sup b(z,y)/t` over `y, z ∈ S(x,t)`, the
//! separating property, and the maps `θ ↦ θ²` between the two.
//!
//! Suprema over a section are searched on its closure: `z` ranges over the
//! boundary of `S ∩ Ω̄` (where the convex `b(·,y)` peaks) and `y` over the
//! star-shaped closure, both reached from `x` by ray bisection.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::point::{lex_cmp, norm_sq, Point};
use crate::potentials::{retract, ConvexDomain, Potential, Tangent};
use crate::sampling::{derive_seed, QmcStream};
use crate::sections::explore::{golden_min, pattern_search, SectionView};
use crate::sweep::SweepEntry;

/// Separating thresholds are searched on `2^{k/8}`, `k = 0..=48`.
pub const THETA_GRID_STEPS: u32 = 48;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EngulfingOptions {
    /// Member samples drawn per section as starting points for `y`.
    pub members: usize,
    /// Stream points spent finding them.
    pub member_budget: usize,
    /// Boundary directions for `z` (and extra `y` candidates).
    pub directions: usize,
    pub climb_sweeps: usize,
}

impl Default for EngulfingOptions {
    fn default() -> Self {
        EngulfingOptions { members: 64, member_budget: 4096, directions: 128, climb_sweeps: 200 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EngulfingWitness {
    pub x: Point,
    pub t: f64,
    pub y: Point,
    pub z: Point,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EngulfingEstimate {
    pub theta_emp: f64,
    pub witness: Option<EngulfingWitness>,
    pub samples_used: usize,
    /// Sweep entries whose sections yielded no sample.
    pub skipped: usize,
}

/// `b(z,y)/t`.
pub fn pair_ratio(phi: &dyn Potential, y: &[f64], z: &[f64], t: f64) -> Result<f64> {
    Ok(crate::potentials::bregman_gap(phi, z, y)? / t)
}

fn witness_cmp(a: &(f64, Vec<f64>), b: &(f64, Vec<f64>)) -> Ordering {
    a.0.total_cmp(&b.0).then_with(|| lex_cmp(&b.1, &a.1))
}

/// Point of the closure reached from the center along `v`, shortened to
/// the section if `|v|` overshoots.
fn fold_into(view: &SectionView<'_>, v: &[f64]) -> Vec<f64> {
    let len = norm_sq(v).sqrt();
    if len == 0.0 {
        return view.center().to_vec();
    }
    let u: Vec<f64> = v.iter().map(|a| a / len).collect();
    let (r, _) = view.ray(&u);
    view.ray_point(&u, len.min(r))
}

fn onto_boundary(view: &SectionView<'_>, v: &[f64]) -> Vec<f64> {
    let len = norm_sq(v).sqrt();
    let u: Vec<f64> = if len == 0.0 {
        let mut e = vec![0.0; v.len()];
        e[0] = 1.0;
        e
    } else {
        v.iter().map(|a| a / len).collect()
    };
    let (r, _) = view.ray(&u);
    view.ray_point(&u, r)
}

/// `sup_{y,z ∈ S(x,t)} b(z,y)/t` and its maximizing pair.
pub fn section_engulfing(
    view: &SectionView<'_>,
    opts: &EngulfingOptions,
    seed: u64,
) -> Option<(f64, Vec<f64>, Vec<f64>, usize)> {
    let t = view.height;
    let x = view.center().to_vec();
    let mut ys = view.members(opts.member_budget, opts.members, seed);
    let zs = view.boundary_points(opts.directions);
    ys.extend(zs.iter().cloned());
    ys.push(x.clone());
    let tz: Vec<Vec<f64>> = zs.iter().map(|z| z.iter().zip(&x).map(|(a, b)| a - b).collect()).collect();
    let mut best: Option<(f64, usize, usize)> = None;
    for (i, y) in ys.iter().enumerate() {
        let tan = Tangent::new(view.phi, y);
        for (j, z) in zs.iter().enumerate() {
            let v = tan.gap(z) / t;
            if v.is_finite() && best.map_or(true, |b| v > b.0) {
                best = Some((v, i, j));
            }
        }
    }
    let (v0, i, j) = best?;
    let n = x.len();
    let mut p: Vec<f64> = ys[i].iter().zip(&x).map(|(a, b)| a - b).chain(tz[j].iter().cloned()).collect();
    let scale = tz.iter().map(|v| norm_sq(v).sqrt()).fold(0.0, f64::max).max(1e-300);
    let objective = |q: &mut Vec<f64>| {
        let y = fold_into(view, &q[..n]);
        let z = onto_boundary(view, &q[n..]);
        Tangent::new(view.phi, &y).gap(&z) / t
    };
    let v = pattern_search(&mut p, 0.25 * scale, opts.climb_sweeps, 1e-13 * scale, objective);
    let (v, y, z) = if v >= v0 {
        (v, fold_into(view, &p[..n]), onto_boundary(view, &p[n..]))
    } else {
        (v0, ys[i].clone(), zs[j].clone())
    };
    Some((v, y, z, ys.len() * zs.len()))
}

pub fn engulfing_constant(
    phi: &dyn Potential,
    omega: &dyn ConvexDomain,
    sweep: &[SweepEntry],
    opts: &EngulfingOptions,
    seed: u64,
) -> Result<EngulfingEstimate> {
    let per: Vec<Result<Option<(f64, EngulfingWitness, usize)>>> = sweep
        .par_iter()
        .enumerate()
        .map(|(k, e)| {
            let view = SectionView::new(phi, omega, &e.center, e.height)?;
            Ok(section_engulfing(&view, opts, derive_seed(seed, &[k as u64])).map(|(v, y, z, used)| {
                (v, EngulfingWitness { x: e.center.clone(), t: e.height, y: Point::new(y), z: Point::new(z) }, used)
            }))
        })
        .collect();
    let mut best: Option<(f64, Vec<f64>, EngulfingWitness)> = None;
    let (mut used, mut skipped) = (0, 0);
    for r in per {
        match r? {
            None => skipped += 1,
            Some((v, w, u)) => {
                used += u;
                let key: Vec<f64> = w.x.iter().chain(w.y.iter()).chain(w.z.iter()).cloned().chain([w.t]).collect();
                let replace = match &best {
                    None => true,
                    Some((bv, bk, _)) => witness_cmp(&(v, key.clone()), &(*bv, bk.clone())) == Ordering::Greater,
                };
                if replace {
                    best = Some((v, key, w));
                }
            }
        }
    }
    Ok(match best {
        Some((v, _, w)) => EngulfingEstimate { theta_emp: v, witness: Some(w), samples_used: used, skipped },
        None => EngulfingEstimate { theta_emp: 0.0, witness: None, samples_used: 0, skipped },
    })
}

pub fn engulf_to_separate(theta: f64) -> Result<f64> {
    if !(theta >= 1.0) {
        return Err(Error::InvalidConstant(format!("θ = {theta} is below 1")));
    }
    Ok(theta * theta)
}

pub fn separate_to_engulf(theta: f64) -> Result<f64> {
    engulf_to_separate(theta)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeparatingOptions {
    /// Outside points per section: just beyond the section along these
    /// many rays.
    pub directions: usize,
    /// Additional outside points from a stream over `Ω`.
    pub scattered: usize,
    pub climb_sweeps: usize,
}

impl Default for SeparatingOptions {
    fn default() -> Self {
        SeparatingOptions { directions: 64, scattered: 16, climb_sweeps: 100 }
    }
}

impl SeparatingOptions {
    /// Options spending about `budget` outside points over `sections`.
    pub fn with_budget(budget: usize, sections: usize) -> Self {
        let per = budget.div_ceil(sections.max(1)).max(2);
        SeparatingOptions { directions: per - per / 5, scattered: per / 5, ..Default::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeparationWitness {
    pub x: Point,
    pub t: f64,
    pub y: Point,
    /// A point of `S(x, t/θ²) ∩ S(y, t/θ²)`.
    pub w: Point,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeparatingReport {
    pub theta: f64,
    pub pairs_checked: usize,
    pub violations: Vec<SeparationWitness>,
    /// Smallest `max(b(w,x), b(w,y)) / (t/θ²)` found over all pairs; a
    /// value below 1 is a violation.
    pub min_margin: f64,
}

impl SeparatingReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

fn outside_points(view: &SectionView<'_>, opts: &SeparatingOptions, seed: u64) -> Vec<Vec<f64>> {
    let n = view.dim();
    let t = view.height;
    let mut out = Vec::new();
    for u in crate::directions::direction_grid(n, opts.directions) {
        let (_, r_out) = view.ray(&u);
        if !r_out.is_finite() {
            continue;
        }
        let y = view.ray_point(&u, r_out * (1.0 + 1e-9));
        if view.omega.contains_closed(&y) && view.gap(&y) >= t {
            out.push(y);
        }
    }
    let bbox = view.omega.bounding_box();
    let s = QmcStream::new(n, seed);
    let mut p = vec![0.0; n];
    let mut found = 0;
    for i in 0..(64 * opts.scattered as u64) {
        if found == opts.scattered {
            break;
        }
        bbox.map_unit(&s.point(i), &mut p);
        if view.omega.contains_closed(&p) && view.gap(&p) >= t {
            out.push(p.clone());
            found += 1;
        }
    }
    out
}

/// Minimizes `max(b(w,x), b(w,y))` over `w ∈ Ω̄`.
fn joint_min(
    phi: &dyn Potential,
    omega: &dyn ConvexDomain,
    tx: &Tangent<'_>,
    y: &[f64],
    sweeps: usize,
) -> (f64, Vec<f64>) {
    let ty = Tangent::new(phi, y);
    let x = tx.base().to_vec();
    let f = |w: &[f64]| tx.gap(w).max(ty.gap(w));
    let (s, v) = golden_min(0.0, 1.0, 80, |s| f(&crate::point::lerp(&x, y, s)));
    let mut w = crate::point::lerp(&x, y, s);
    let scale = crate::point::dist_sq(&x, y).sqrt().max(1e-300);
    pattern_search(&mut w, 0.1 * scale, sweeps, 1e-12 * scale, |q| {
        if !omega.contains_closed(q) {
            *q = retract(omega, q);
        }
        -f(q)
    });
    let fw = f(&w);
    if fw <= v {
        (fw, w)
    } else {
        (v, crate::point::lerp(&x, y, s))
    }
}

/// Searches for `w ∈ S(x,t/θ²) ∩ S(y,t/θ²)` with `y ∈ Ω̄ \ S(x,t)`.
pub fn separating_check(
    phi: &dyn Potential,
    omega: &dyn ConvexDomain,
    theta: f64,
    sweep: &[SweepEntry],
    opts: &SeparatingOptions,
    seed: u64,
) -> Result<SeparatingReport> {
    if !(theta >= 1.0) {
        return Err(Error::InvalidConstant(format!("θ = {theta} is below 1")));
    }
    let per: Vec<Result<(usize, f64, Vec<SeparationWitness>)>> = sweep
        .par_iter()
        .enumerate()
        .map(|(k, e)| {
            let view = SectionView::new(phi, omega, &e.center, e.height)?;
            let s = e.height / (theta * theta);
            let ys = outside_points(&view, opts, derive_seed(seed, &[k as u64]));
            let mut margin = f64::INFINITY;
            let mut found = Vec::new();
            for y in &ys {
                let (v, w) = joint_min(phi, omega, &view.tangent, y, opts.climb_sweeps);
                margin = margin.min(v / s);
                let ty = Tangent::new(phi, y);
                if omega.contains_closed(&w) && view.gap(&w) < s && ty.gap(&w) < s {
                    found.push(SeparationWitness {
                        x: e.center.clone(),
                        t: e.height,
                        y: Point::from(&y[..]),
                        w: Point::new(w),
                    });
                }
            }
            Ok((ys.len(), margin, found))
        })
        .collect();
    let mut report = SeparatingReport { theta, pairs_checked: 0, violations: Vec::new(), min_margin: f64::INFINITY };
    for r in per {
        let (c, m, w) = r?;
        report.pairs_checked += c;
        report.min_margin = report.min_margin.min(m);
        report.violations.extend(w);
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeparatingThreshold {
    /// Smallest grid value `2^{k/8}` passing the separating check, if any.
    pub theta_sep: Option<f64>,
    /// `theta_sep²` via `separate_to_engulf`.
    pub engulfing_bound: Option<f64>,
}

/// Binary search over the grid `2^{k/8}` (`k = 0..=48`), assuming that
/// passing is monotone in `θ`.
pub fn smallest_separating_theta(
    phi: &dyn Potential,
    omega: &dyn ConvexDomain,
    sweep: &[SweepEntry],
    opts: &SeparatingOptions,
    seed: u64,
) -> Result<SeparatingThreshold> {
    let grid = |k: u32| 2f64.powf(k as f64 / 8.0);
    let passes = |k: u32| -> Result<bool> { Ok(separating_check(phi, omega, grid(k), sweep, opts, seed)?.passed()) };
    if !passes(THETA_GRID_STEPS)? {
        return Ok(SeparatingThreshold { theta_sep: None, engulfing_bound: None });
    }
    let (mut lo, mut hi) = (0u32, THETA_GRID_STEPS);
    if passes(0)? {
        hi = 0;
    }
    // invariant: grid(hi) passes, grid(lo) fails unless lo == hi
    while hi > lo + 1 {
        let mid = (lo + hi) / 2;
        if passes(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let theta = grid(hi);
    Ok(SeparatingThreshold { theta_sep: Some(theta), engulfing_bound: Some(separate_to_engulf(theta)?) })
}

/// `sup b(w,x)/t` over `y ∈ S(x,t)` (sampled) and `w ∈ S(y,t)` (climbed);
/// bounded by `θ²` under engulfing.
pub fn double_engulfing_ratio(
    phi: &dyn Potential,
    omega: &dyn ConvexDomain,
    sweep: &[SweepEntry],
    ys_per_section: usize,
    directions: usize,
    seed: u64,
) -> Result<f64> {
    let per: Vec<Result<f64>> = sweep
        .par_iter()
        .enumerate()
        .map(|(k, e)| {
            let view = SectionView::new(phi, omega, &e.center, e.height)?;
            let mut ys = view.members(16 * ys_per_section.max(1) + 256, ys_per_section, derive_seed(seed, &[k as u64]));
            ys.push(e.center.to_vec());
            let mut best: f64 = 0.0;
            for y in ys {
                let vy = SectionView::new(phi, omega, &y, e.height)?;
                let (v, _) = vy.maximize_on_boundary(|w| view.gap(w), directions, 100);
                best = best.max(v / e.height);
            }
            Ok(best)
        })
        .collect();
    per.into_iter().try_fold(0.0, |m, r| Ok(f64::max(m, r?)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::{AxisEllipsoid, Quadratic};
    use crate::sweep::{stratified_sweep, SweepSpec};

    #[test]
    fn interval_pair_example() {
        let phi = Quadratic::isotropic(1);
        let r = pair_ratio(&phi, &[0.099], &[-0.099], 0.01).unwrap();
        assert!((r - 3.9204).abs() < 1e-12);
    }

    #[test]
    fn self_pair_stays_below_one() {
        let phi = Quadratic::isotropic(2);
        let omega = AxisEllipsoid::unit_ball(2);
        let view = SectionView::new(&phi, &omega, &[0.1, 0.2], 0.04).unwrap();
        let (v, _) = view.maximize_on_boundary(|z| view.gap(z), 64, 100);
        assert!(v / 0.04 < 1.0);
    }

    #[test]
    fn interval_exact_theta() {
        let phi = Quadratic::isotropic(1);
        let omega = AxisEllipsoid::unit_ball(1);
        let view = SectionView::new(&phi, &omega, &[0.0], 0.01).unwrap();
        let (v, ..) = section_engulfing(&view, &EngulfingOptions::default(), 1).unwrap();
        assert!((v - 4.0).abs() < 1e-9, "{v}");
        // clipped interval (0.9 − 0.1, 1]: endpoints 0.8 and 1
        let view = SectionView::new(&phi, &omega, &[0.9], 0.01).unwrap();
        let (v, ..) = section_engulfing(&view, &EngulfingOptions::default(), 1).unwrap();
        assert!((v - 0.04 / 0.01).abs() < 1e-9, "{v}");
    }

    #[test]
    fn ball_theta_near_four() {
        let phi = Quadratic::isotropic(2);
        let omega = AxisEllipsoid::unit_ball(2);
        let sweep = stratified_sweep(&phi, &omega, &SweepSpec::new(3, 3, 3, vec![0.01, 0.05]), 3).unwrap();
        let est = engulfing_constant(&phi, &omega, &sweep, &EngulfingOptions::default(), 5).unwrap();
        assert!(est.theta_emp >= 3.9 && est.theta_emp <= 4.0 * (1.0 + 1e-12), "{est:?}");
    }

    #[test]
    fn separation_on_ball() {
        let phi = Quadratic::isotropic(2);
        let omega = AxisEllipsoid::unit_ball(2);
        let sweep = stratified_sweep(&phi, &omega, &SweepSpec::new(2, 2, 2, vec![0.01, 0.05]), 3).unwrap();
        let opts = SeparatingOptions::default();
        for theta in [2.0, 4.0] {
            let r = separating_check(&phi, &omega, theta, &sweep, &opts, 1).unwrap();
            assert!(r.passed(), "θ={theta}: {:?}", r.violations.first());
        }
        let r = separating_check(&phi, &omega, 1.0, &sweep, &opts, 1).unwrap();
        assert!(!r.passed());
        let w = &r.violations[0];
        let m = crate::point::midpoint(&w.x, &w.y);
        assert!(crate::point::dist_sq(&m, &w.w).sqrt() < 0.5 * crate::point::dist_sq(&w.x, &w.y).sqrt());
    }

    #[test]
    fn theta_maps() {
        assert_eq!(engulf_to_separate(4.0).unwrap(), 16.0);
        assert_eq!(separate_to_engulf(1.0).unwrap(), 1.0);
        assert!(matches!(engulf_to_separate(0.5), Err(Error::InvalidConstant(_))));
    }

    #[test]
    fn threshold_search() {
        let phi = Quadratic::isotropic(2);
        let omega = AxisEllipsoid::unit_ball(2);
        let sweep = stratified_sweep(&phi, &omega, &SweepSpec::new(2, 1, 1, vec![0.02]), 3).unwrap();
        let th = smallest_separating_theta(&phi, &omega, &sweep, &SeparatingOptions::default(), 2).unwrap();
        // for |x|² the shrunk balls of radius √t/θ are disjoint iff θ ≥ 2
        assert_eq!(th.theta_sep, Some(2.0));
        let est = engulfing_constant(&phi, &omega, &sweep, &EngulfingOptions::default(), 5).unwrap();
        assert!(th.engulfing_bound.unwrap() >= est.theta_emp * (1.0 - 1e-12));
    }
}
