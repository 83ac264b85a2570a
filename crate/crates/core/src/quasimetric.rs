//! The quasi-distance `d(x,y) = max(b(x,y), b(y,x))` on `Ω̄` and empirical
//! checks of the structure it carries: ball sandwich, quasi-triangle
//! inequality, doubling, and the global height `M` above which every
//! section is all of `Ω̄`.

use rayon::prelude::*;
use serde::Serialize;

use crate::directions::{param_dim, param_grid, wrap_params};
use crate::error::{Error, Result};
use crate::point::{lex_cmp, Point};
use crate::potentials::{retract, sample_closed, ConvexDomain, Potential, Tangent};
use crate::sampling::{derive_seed, index_triples, QmcStream};
use crate::sections::explore::{golden_min, pattern_search, SectionView};
use crate::sections::volume::{check_budget, count_nested_hits, section_interval};
use crate::sweep::{stratified_sweep, Stratum, SweepEntry, SweepSpec};

/// Points closer than this in every coordinate count as equal.
pub const IDENTITY_TOL: f64 = 1e-9;

/// Triples whose denominator falls below this are skipped.
pub const DEGENERATE_DENOMINATOR: f64 = 1e-15;

/// Allowed excess of `K_emp` over `θ²`.
pub const K_SLACK: f64 = 1e-6;

fn gap(phi: &dyn Potential, y: &[f64], x: &[f64]) -> f64 {
    Tangent::new(phi, x).gap(y)
}

/// `d(x,y)`, the least `r` with `x ∈ S(y,r)` and `y ∈ S(x,r)`.
pub fn quasi_distance(phi: &dyn Potential, x: &[f64], y: &[f64]) -> f64 {
    gap(phi, x, y).max(gap(phi, y, x)).max(0.0)
}

/// `d(x,y)` from its definition as an infimum, by bisection on `r` over
/// the mutual membership predicate.
pub fn quasi_distance_bisection(phi: &dyn Potential, x: &[f64], y: &[f64]) -> f64 {
    let (tx, ty) = (Tangent::new(phi, x), Tangent::new(phi, y));
    let mutual = |r: f64| tx.gap(y) < r && ty.gap(x) < r;
    if mutual(f64::MIN_POSITIVE) {
        return 0.0;
    }
    let mut hi = 1.0;
    while !mutual(hi) {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return hi;
        }
        if mutual(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GlobalHeight {
    pub m_emp: f64,
    /// Center and far point attaining `m_emp = b(x, x₀)`.
    pub x0: Point,
    pub x: Point,
}

/// `M_emp = sup b(x, x₀)` over `x₀ ∈ Ω̄` and `x ∈ ∂Ω` (the convex gap peaks
/// on the boundary). Candidate centers are boundary-grid and stream
/// points; the best pair is refined jointly.
pub fn global_height(phi: &dyn Potential, omega: &dyn ConvexDomain, budget: usize, seed: u64) -> Result<GlobalHeight> {
    if budget == 0 {
        return Err(Error::InvalidInput("global height budget must be positive".into()));
    }
    let n = omega.dim();
    let pd = param_dim(n);
    let far_params = param_grid(n, budget);
    let far: Vec<Vec<f64>> = far_params.iter().map(|p| omega.boundary_point(p).into_inner()).collect();
    let mut centers = far.clone();
    centers.extend(sample_closed(omega, budget, seed));
    let best_far = |x0: &[f64]| -> (f64, usize) {
        let t = Tangent::new(phi, x0);
        far.iter()
            .enumerate()
            .map(|(k, z)| (t.gap(z), k))
            .fold((f64::NEG_INFINITY, 0), |a, b| if b.0 > a.0 { b } else { a })
    };
    let scored: Vec<(f64, usize)> = centers.par_iter().map(|c| best_far(c)).collect();
    let (ci, (mut m, fk)) = scored
        .iter()
        .cloned()
        .enumerate()
        .fold((0, (f64::NEG_INFINITY, 0)), |a, b| if b.1 .0 > a.1 .0 { b } else { a });
    let mut x0 = centers[ci].clone();
    let mut x = far[fk].clone();
    if n == 1 {
        // ∂Ω is two points; only the center moves
        let b = omega.bounding_box();
        let objective = |c: f64| -far.iter().map(|z| gap(phi, z, &[c])).fold(f64::NEG_INFINITY, f64::max);
        let span = (b.hi[0] - b.lo[0]) / budget.max(2) as f64;
        let (lo, hi) = ((x0[0] - span).max(b.lo[0]), (x0[0] + span).min(b.hi[0]));
        let (c, v) = golden_min(lo, hi, 200, objective);
        if -v > m {
            m = -v;
            x0 = vec![c];
            let (_, k) = best_far(&x0);
            x = far[k].clone();
        }
    } else {
        let diam = omega.bounding_box().diameter();
        let mut p: Vec<f64> = x0.iter().cloned().chain(far_params[fk].iter().cloned()).collect();
        let v = pattern_search(&mut p, 0.05 * diam, 200, 1e-13 * diam, |q| {
            let c = retract(omega, &q[..n]);
            q[..n].copy_from_slice(&c);
            wrap_params(n, &mut q[n..]);
            gap(phi, &omega.boundary_point(&q[n..n + pd]), &c)
        });
        if v > m {
            m = v;
            x0 = p[..n].to_vec();
            x = omega.boundary_point(&p[n..]).into_inner();
        }
    }
    Ok(GlobalHeight { m_emp: m, x0: Point::new(x0), x: Point::new(x) })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SandwichReport {
    pub center: Point,
    pub radius: f64,
    pub theta: f64,
    pub samples: usize,
    /// Points with `b(y,x) < r/(2θ²)` but `d(x,y) ≥ r`.
    pub inner_violations: Vec<Point>,
    /// Points with `d(x,y) < r` but `b(y,x) ≥ r`.
    pub outer_violations: Vec<Point>,
}

impl SandwichReport {
    pub fn passed(&self) -> bool {
        self.inner_violations.is_empty() && self.outer_violations.is_empty()
    }
}

/// `S(x, r/(2θ²)) ⊂ B_d(x,r) ⊂ S(x,r)` on samples of `Ω̄`: half the budget
/// spread over the domain box, half over the box of `S(x,r)`.
pub fn ball_sandwich_check(
    phi: &dyn Potential,
    omega: &dyn ConvexDomain,
    x: &[f64],
    r: f64,
    theta: f64,
    budget: usize,
    seed: u64,
) -> Result<SandwichReport> {
    if !(theta >= 1.0) {
        return Err(Error::InvalidConstant(format!("θ = {theta} is below 1")));
    }
    let view = SectionView::new(phi, omega, x, r)?;
    let boxes = [omega.bounding_box(), view.bounding_box()];
    let n = omega.dim();
    let inner_r = r / (2.0 * theta * theta);
    let half = budget.div_ceil(2) as u64;
    let found: Vec<(Vec<f64>, bool)> = boxes
        .iter()
        .enumerate()
        .flat_map(|(k, bbox)| {
            let s = QmcStream::new(n, derive_seed(seed, &[k as u64]));
            (0..half)
                .into_par_iter()
                .filter_map(|i| {
                    let mut y = vec![0.0; n];
                    bbox.map_unit(&s.point(i), &mut y);
                    if !omega.contains_closed(&y) {
                        return None;
                    }
                    let (down, up) = (view.gap(&y), gap(phi, x, &y));
                    let d = down.max(up);
                    if down < inner_r && d >= r {
                        Some((y, true))
                    } else if d < r && down >= r {
                        Some((y, false))
                    } else {
                        None
                    }
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let pick = |inner: bool| found.iter().filter(|w| w.1 == inner).map(|w| Point::from(&w.0[..])).collect();
    Ok(SandwichReport {
        center: Point::from(x),
        radius: r,
        theta,
        samples: 2 * half as usize,
        inner_violations: pick(true),
        outer_violations: pick(false),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TriangleOptions {
    pub triples: usize,
    pub climb_sweeps: usize,
    /// Best sampled triples used as climb starts.
    pub restarts: usize,
}

impl Default for TriangleOptions {
    fn default() -> Self {
        TriangleOptions { triples: 20_000, climb_sweeps: 200, restarts: 4 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TriangleReport {
    pub k_emp: f64,
    /// `(x, y, z)` with `d(x,y) = k_emp·(d(x,z) + d(z,y))`.
    pub witness: [Point; 3],
    pub triples_checked: usize,
    pub skipped: usize,
}

/// `d(x,y) / (d(x,z) + d(z,y))`, or `None` for `x = y` or a vanishing
/// denominator.
pub fn triangle_ratio(phi: &dyn Potential, x: &[f64], y: &[f64], z: &[f64]) -> Option<f64> {
    if x == y {
        return None;
    }
    let den = quasi_distance(phi, x, z) + quasi_distance(phi, z, y);
    if den < DEGENERATE_DENOMINATOR {
        return None;
    }
    Some(quasi_distance(phi, x, y) / den)
}

/// `K_emp` over index triples drawn from `pool`, refined by climbing from
/// the best few. `None` when every triple is degenerate.
pub fn triangle_constant_on(
    phi: &dyn Potential,
    omega: &dyn ConvexDomain,
    pool: &[Vec<f64>],
    opts: &TriangleOptions,
    seed: u64,
) -> Option<TriangleReport> {
    let n = omega.dim();
    let triples = index_triples(pool.len(), opts.triples, seed);
    let scored: Vec<Option<f64>> =
        triples.par_iter().map(|&[i, j, k]| triangle_ratio(phi, &pool[i], &pool[j], &pool[k])).collect();
    let skipped = scored.iter().filter(|s| s.is_none()).count();
    let mut ranked: Vec<(f64, usize)> = scored.iter().enumerate().filter_map(|(k, s)| s.map(|v| (v, k))).collect();
    if ranked.is_empty() {
        return None;
    }
    ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let diam = omega.bounding_box().diameter();
    let climbed: Vec<(f64, Vec<f64>)> = ranked
        .iter()
        .take(opts.restarts.max(1))
        .map(|&(v0, k)| {
            let [i, j, l] = triples[k];
            let mut p: Vec<f64> = [&pool[i], &pool[j], &pool[l]].into_iter().flatten().cloned().collect();
            let start = p.clone();
            let v = pattern_search(&mut p, 0.05 * diam, opts.climb_sweeps, 1e-12 * diam, |q| {
                for c in 0..3 {
                    let r = retract(omega, &q[c * n..(c + 1) * n]);
                    q[c * n..(c + 1) * n].copy_from_slice(&r);
                }
                triangle_ratio(phi, &q[..n], &q[n..2 * n], &q[2 * n..]).unwrap_or(f64::NEG_INFINITY)
            });
            if v >= v0 {
                (v, p)
            } else {
                (v0, start)
            }
        })
        .collect();
    let (k_emp, p) = climbed
        .into_iter()
        .reduce(|a, b| match b.0.total_cmp(&a.0).then_with(|| lex_cmp(&a.1, &b.1)) {
            std::cmp::Ordering::Greater => b,
            _ => a,
        })
        .unwrap();
    Some(TriangleReport {
        k_emp,
        witness: [Point::from(&p[..n]), Point::from(&p[n..2 * n]), Point::from(&p[2 * n..])],
        triples_checked: triples.len(),
        skipped,
    })
}

/// `K_emp` over random triples of `Ω̄`.
pub fn quasi_triangle_constant(
    phi: &dyn Potential,
    omega: &dyn ConvexDomain,
    opts: &TriangleOptions,
    seed: u64,
) -> Result<Option<TriangleReport>> {
    if opts.triples == 0 {
        return Err(Error::InvalidInput("triple budget must be positive".into()));
    }
    let pool = sample_closed(omega, opts.triples.clamp(16, 4096), derive_seed(seed, &[0]));
    Ok(triangle_constant_on(phi, omega, &pool, opts, derive_seed(seed, &[1])))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DoublingEntry {
    pub center: Point,
    pub height: f64,
    pub stratum: Stratum,
    /// `|S(x,2t)| / |S(x,t)|`.
    pub section_ratio: Option<f64>,
    /// `|B_d(x,2t)| / |B_d(x,t)|`.
    pub ball_ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DoublingReport {
    pub section_doubling: f64,
    pub ball_doubling: f64,
    pub entries: Vec<DoublingEntry>,
    pub warnings: Vec<String>,
}

/// Exit radius along `x + s u` of a star-shaped set given by `member`.
fn star_extent(x: &[f64], u: &[f64], reach: f64, member: impl Fn(&[f64]) -> bool) -> f64 {
    let at = |s: f64| member(&x.iter().zip(u).map(|(a, b)| a + s * b).collect::<Vec<_>>());
    let (mut lo, mut hi) = (0.0, reach);
    if at(hi) {
        return hi;
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return lo;
        }
        if at(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

fn ratio(outer: f64, inner: f64) -> Option<f64> {
    (inner > 0.0).then(|| outer / inner)
}

/// Doubling ratios of sections and of `d`-balls over a sweep. Both sets
/// at height `2t` contain those at `t`, so each pair is counted on the
/// same points of the box of `S(x,2t)`; in one dimension all four sets
/// are intervals measured exactly.
pub fn doubling_constant(
    phi: &dyn Potential,
    omega: &dyn ConvexDomain,
    sweep: &[SweepEntry],
    budget: usize,
    seed: u64,
) -> Result<DoublingReport> {
    check_budget(budget)?;
    let n = omega.dim();
    let mut entries = Vec::with_capacity(sweep.len());
    let mut warnings = Vec::new();
    for (k, e) in sweep.iter().enumerate() {
        let (x, t) = (&e.center[..], e.height);
        let big = SectionView::new(phi, omega, x, 2.0 * t)?;
        let in_ball = |y: &[f64], r: f64| omega.contains_closed(y) && big.gap(y) < r && gap(phi, x, y) < r;
        let (section_ratio, ball_ratio) = if n == 1 {
            let small = big.with_height(t);
            let (a, b) = section_interval(&big);
            let (c, d) = section_interval(&small);
            let reach = omega.bounding_box().diameter() * 2.0 + 1.0;
            let ball = |r: f64| {
                star_extent(x, &[1.0], reach, |y| in_ball(y, r)) + star_extent(x, &[-1.0], reach, |y| in_ball(y, r))
            };
            (ratio(b - a, d - c), ratio(ball(2.0 * t), ball(t)))
        } else {
            let bbox = big.bounding_box();
            let s = derive_seed(seed, &[k as u64]);
            let (o, i) = count_nested_hits(&bbox, budget, s, |y| big.contains(y), |y| big.gap(y) < t);
            let (bo, bi) = count_nested_hits(&bbox, budget, s, |y| in_ball(y, 2.0 * t), |y| in_ball(y, t));
            (ratio(o as f64, i as f64), ratio(bo as f64, bi as f64))
        };
        if section_ratio.is_none() || ball_ratio.is_none() {
            warnings.push(format!("degenerate volume at center {:?}, t = {t:e}; entry skipped", e.center.coords()));
        }
        entries.push(DoublingEntry { center: e.center.clone(), height: t, stratum: e.stratum, section_ratio, ball_ratio });
    }
    let max = |f: fn(&DoublingEntry) -> Option<f64>| entries.iter().filter_map(f).fold(1.0, f64::max);
    Ok(DoublingReport {
        section_doubling: max(|e| e.section_ratio),
        ball_doubling: max(|e| e.ball_ratio),
        entries,
        warnings,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CertificateOptions {
    /// Sampled points of `Ω̄` used for symmetry, identity and triples.
    pub points: usize,
    pub triangle: TriangleOptions,
    pub sandwich_centers: usize,
    pub sandwich_radii: Vec<f64>,
    pub sandwich_budget: usize,
    pub doubling_sweep: SweepSpec,
    pub doubling_budget: usize,
}

impl Default for CertificateOptions {
    fn default() -> Self {
        CertificateOptions {
            points: 128,
            triangle: TriangleOptions::default(),
            sandwich_centers: 8,
            sandwich_radii: vec![1e-3, 1e-2, 1e-1, 1.0],
            sandwich_budget: 20_000,
            doubling_sweep: SweepSpec::new(3, 3, 3, vec![1e-3, 1e-2, 1e-1]),
            doubling_budget: 20_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CertificateClause {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SandwichWitness {
    pub center: Point,
    pub radius: f64,
    pub point: Point,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpaceCertificate {
    pub theta_emp: f64,
    pub k_emp: Option<f64>,
    pub k_witness: Option<[Point; 3]>,
    pub doubling_c_emp: Option<f64>,
    pub section_doubling: Option<f64>,
    pub ball_doubling: Option<f64>,
    pub doubling_entries: Vec<DoublingEntry>,
    pub sandwich_checks: usize,
    pub sandwich_violations: Vec<SandwichWitness>,
    pub clauses: Vec<CertificateClause>,
    pub warnings: Vec<String>,
    pub passed: bool,
}

fn clause(name: &str, passed: bool, detail: String) -> CertificateClause {
    CertificateClause { name: name.into(), passed, detail }
}

/// Aggregates symmetry, identity, positivity, the quasi-triangle bound
/// `K_emp ≤ θ²`, the ball sandwich and finite doubling into one verdict.
pub fn homogeneous_space_certificate(
    phi: &dyn Potential,
    omega: &dyn ConvexDomain,
    theta: f64,
    opts: &CertificateOptions,
    seed: u64,
) -> SpaceCertificate {
    let n = omega.dim();
    let mut clauses = Vec::new();
    let mut warnings = Vec::new();
    let pool = sample_closed(omega, opts.points, derive_seed(seed, &[0]));

    // symmetry, identity and positivity on all pairs plus close neighbours
    let mut pairs: Vec<(usize, Vec<f64>)> = Vec::new();
    for (i, x) in pool.iter().enumerate() {
        for y in &pool[i..] {
            pairs.push((i, y.clone()));
        }
        for k in 0..n {
            for delta in [1e-3, 1e-6] {
                let mut y = x.clone();
                y[k] += delta;
                if omega.contains_closed(&y) {
                    pairs.push((i, y));
                }
            }
        }
    }
    let verdicts: Vec<(bool, bool, bool)> = pairs
        .par_iter()
        .map(|(i, y)| {
            let x = &pool[*i];
            let (dxy, dyx) = (quasi_distance(phi, x, y), quasi_distance(phi, y, x));
            let distinct = x.iter().zip(y).any(|(a, b)| (a - b).abs() > IDENTITY_TOL);
            let symmetric = dxy.to_bits() == dyx.to_bits();
            let identity = if x == y { dxy == 0.0 } else { dxy > 0.0 || !distinct };
            (symmetric, identity, !distinct || dxy > 0.0)
        })
        .collect();
    let count = |f: fn(&(bool, bool, bool)) -> bool| verdicts.iter().filter(|v| !f(v)).count();
    let (asym, ident, nonpos) = (count(|v| v.0), count(|v| v.1), count(|v| v.2));
    clauses.push(clause("symmetry", asym == 0, format!("{asym} asymmetric of {} pairs", pairs.len())));
    clauses.push(clause("identity", ident == 0, format!("{ident} identity failures of {} pairs", pairs.len())));
    clauses.push(clause("positivity", nonpos == 0, format!("{nonpos} distinct pairs at distance 0")));

    let tri = triangle_constant_on(phi, omega, &pool, &opts.triangle, derive_seed(seed, &[1]));
    let (k_emp, k_witness) = match tri {
        Some(r) => {
            let bound = theta * theta + K_SLACK;
            clauses.push(clause("quasi_triangle", r.k_emp <= bound, format!("K_emp = {} against θ² = {}", r.k_emp, theta * theta)));
            (Some(r.k_emp), Some(r.witness))
        }
        None => {
            warnings.push("every sampled triple is degenerate; quasi-triangle clause skipped".into());
            (None, None)
        }
    };

    let mut centers: Vec<Vec<f64>> = pool.iter().take(opts.sandwich_centers.div_ceil(2)).cloned().collect();
    let bs = QmcStream::new(param_dim(n), derive_seed(seed, &[2]));
    centers.extend((0..(opts.sandwich_centers / 2) as u64).map(|k| omega.boundary_point(&bs.point(k)).into_inner()));
    let mut violations = Vec::new();
    let mut checks = 0;
    let mut sandwich_error = None;
    for (ci, c) in centers.iter().enumerate() {
        for (ri, &r) in opts.sandwich_radii.iter().enumerate() {
            match ball_sandwich_check(phi, omega, c, r, theta, opts.sandwich_budget, derive_seed(seed, &[3, ci as u64, ri as u64]))
            {
                Ok(rep) => {
                    checks += 1;
                    for p in rep.inner_violations.into_iter().chain(rep.outer_violations) {
                        violations.push(SandwichWitness { center: Point::from(&c[..]), radius: r, point: p });
                    }
                }
                Err(e) => sandwich_error = Some(e.to_string()),
            }
        }
    }
    match sandwich_error {
        Some(e) => clauses.push(clause("ball_sandwich", false, e)),
        None => clauses.push(clause(
            "ball_sandwich",
            violations.is_empty(),
            format!("{} witnesses over {checks} (center, radius) pairs", violations.len()),
        )),
    }

    let doubling = stratified_sweep(phi, omega, &opts.doubling_sweep, derive_seed(seed, &[4]))
        .and_then(|sw| doubling_constant(phi, omega, &sw, opts.doubling_budget, derive_seed(seed, &[5])));
    let mut doubling_entries = Vec::new();
    let (section_doubling, ball_doubling) = match doubling {
        Ok(rep) => {
            let finite = rep.section_doubling.is_finite() && rep.ball_doubling.is_finite();
            clauses.push(clause(
                "doubling",
                finite,
                format!("section {} and d-ball {}", rep.section_doubling, rep.ball_doubling),
            ));
            warnings.extend(rep.warnings);
            doubling_entries = rep.entries;
            (Some(rep.section_doubling), Some(rep.ball_doubling))
        }
        Err(e) => {
            clauses.push(clause("doubling", false, e.to_string()));
            (None, None)
        }
    };
    let passed = clauses.iter().all(|c| c.passed);
    SpaceCertificate {
        theta_emp: theta,
        k_emp,
        k_witness,
        doubling_c_emp: section_doubling.zip(ball_doubling).map(|(a, b)| a.max(b)),
        section_doubling,
        ball_doubling,
        doubling_entries,
        sandwich_checks: checks,
        sandwich_violations: violations,
        clauses,
        warnings,
        passed,
    }
}
