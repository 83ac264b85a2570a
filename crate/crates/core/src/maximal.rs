//! The maximal function `M f(x) = sup_t ⨍_{S(x,t)} |f|` and empirical weak
//! `(1,1)` and strong `(p,p)` constants.
//!
//! The supremum runs over the geometric grid `t_min·2^{j/q} ≤ t_max` plus
//! the global average `‖f‖₁/|Ω|`, which every section attains once
//! `t ≥ M`. At a fixed center all heights share one sample stream.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point::{dist_sq, unit_ball_volume, BoundingBox, Point};
use crate::potentials::{ConvexDomain, Potential};
use crate::sampling::{derive_seed, QmcStream};
use crate::sections::explore::{ExtentProfile, SectionView};
use crate::sections::volume::{check_budget, count_hits, section_interval};

/// Test functions with closed-form integrals. All are piecewise constant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TestFunction {
    Constant {
        value: f64,
    },
    /// `value` on the open ball `|y − center| < radius`, zero elsewhere.
    Indicator {
        center: Point,
        radius: f64,
        #[serde(default = "unit")]
        value: f64,
    },
    /// `value` at a single point.
    Atom {
        point: Point,
        #[serde(default = "unit")]
        value: f64,
    },
    Sum {
        terms: Vec<TestFunction>,
    },
}

fn unit() -> f64 {
    1.0
}

impl TestFunction {
    pub fn constant(value: f64) -> Self {
        TestFunction::Constant { value }
    }

    pub fn indicator(center: impl Into<Point>, radius: f64) -> Self {
        TestFunction::Indicator { center: center.into(), radius, value: 1.0 }
    }

    pub fn scaled(&self, c: f64) -> Self {
        match self {
            TestFunction::Constant { value } => TestFunction::Constant { value: c * value },
            TestFunction::Indicator { center, radius, value } => {
                TestFunction::Indicator { center: center.clone(), radius: *radius, value: c * value }
            }
            TestFunction::Atom { point, value } => TestFunction::Atom { point: point.clone(), value: c * value },
            TestFunction::Sum { terms } => TestFunction::Sum { terms: terms.iter().map(|t| t.scaled(c)).collect() },
        }
    }

    pub fn label(&self) -> String {
        match self {
            TestFunction::Constant { value } => format!("const({value})"),
            TestFunction::Indicator { center, radius, value } => {
                format!("{value}·1[|y−{:?}|<{radius}]", center.coords())
            }
            TestFunction::Atom { point, value } => format!("{value}·1[{:?}]", point.coords()),
            TestFunction::Sum { terms } => terms.iter().map(|t| t.label()).collect::<Vec<_>>().join(" + "),
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidTestFunction(m));
        match self {
            TestFunction::Constant { value } if !value.is_finite() => bad(format!("constant {value} is not finite")),
            TestFunction::Indicator { center, radius, value } => {
                if center.dim() != n {
                    bad(format!("indicator center has dimension {}, expected {n}", center.dim()))
                } else if !(*radius > 0.0 && radius.is_finite()) || !value.is_finite() || !center.is_finite() {
                    bad(format!("indicator with radius {radius} and value {value} is not admissible"))
                } else {
                    Ok(())
                }
            }
            TestFunction::Atom { point, .. } if point.dim() != n => {
                bad(format!("atom has dimension {}, expected {n}", point.dim()))
            }
            TestFunction::Sum { terms } => terms.iter().try_for_each(|t| t.validate(n)),
            _ => Ok(()),
        }
    }

    pub fn eval(&self, y: &[f64]) -> f64 {
        match self {
            TestFunction::Constant { value } => *value,
            TestFunction::Indicator { center, radius, value } => {
                if dist_sq(y, center) < radius * radius {
                    *value
                } else {
                    0.0
                }
            }
            TestFunction::Atom { point, value } => {
                if y == &point[..] {
                    *value
                } else {
                    0.0
                }
            }
            TestFunction::Sum { terms } => terms.iter().map(|t| t.eval(y)).sum(),
        }
    }

    /// The value of `f` almost everywhere on `bbox`, when constant there.
    pub fn constant_on(&self, bbox: &BoundingBox) -> Option<f64> {
        match self {
            TestFunction::Constant { value } => Some(*value),
            TestFunction::Indicator { center, radius, value } => {
                let (mut near, mut far) = (0.0, 0.0);
                for ((c, lo), hi) in center.iter().zip(&bbox.lo).zip(&bbox.hi) {
                    let gap = (lo - c).max(c - hi).max(0.0);
                    let reach = (c - lo).abs().max((hi - c).abs());
                    near += gap * gap;
                    far += reach * reach;
                }
                let r2 = radius * radius;
                if far < r2 {
                    Some(*value)
                } else if near >= r2 {
                    Some(0.0)
                } else {
                    None
                }
            }
            TestFunction::Atom { .. } => Some(0.0),
            TestFunction::Sum { terms } => terms.iter().map(|t| t.constant_on(bbox)).sum(),
        }
    }

    /// An upper bound for `sup |f|`.
    pub fn sup_abs(&self) -> f64 {
        match self {
            TestFunction::Constant { value } | TestFunction::Indicator { value, .. } | TestFunction::Atom { value, .. } => {
                value.abs()
            }
            TestFunction::Sum { terms } => terms.iter().map(|t| t.sup_abs()).sum(),
        }
    }

    fn breakpoints(&self, out: &mut Vec<f64>) {
        match self {
            TestFunction::Indicator { center, radius, .. } => out.extend([center[0] - radius, center[0] + radius]),
            TestFunction::Sum { terms } => terms.iter().for_each(|t| t.breakpoints(out)),
            _ => {}
        }
    }

    /// `∫_a^b |f|^p` in one dimension, exact: `f` is constant between
    /// consecutive breakpoints and atoms carry no mass.
    pub fn interval_integral(&self, a: f64, b: f64, p: f64) -> f64 {
        if !(b > a) {
            return 0.0;
        }
        let mut cuts = vec![a, b];
        self.breakpoints(&mut cuts);
        cuts.retain(|c| *c >= a && *c <= b);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        cuts.windows(2)
            .map(|w| {
                let v = self.eval(&[0.5 * (w[0] + w[1])]).abs();
                if v == 0.0 {
                    0.0
                } else {
                    v.powf(p) * (w[1] - w[0])
                }
            })
            .sum()
    }

    /// `‖f‖_p^p` over `Ω` in closed form, when available.
    fn analytic_power_integral(&self, omega: &dyn ConvexDomain, p: f64) -> Option<f64> {
        if omega.dim() == 1 {
            let b = omega.bounding_box();
            return Some(self.interval_integral(b.lo[0], b.hi[0], p));
        }
        match self {
            TestFunction::Constant { value } => omega.volume().map(|v| value.abs().powf(p) * v),
            TestFunction::Indicator { center, radius, value } => match omega.contains_ball(center, *radius) {
                Some(true) => Some(value.abs().powf(p) * unit_ball_volume(omega.dim()) * radius.powi(omega.dim() as i32)),
                _ => None,
            },
            TestFunction::Atom { .. } => Some(0.0),
            TestFunction::Sum { terms } => match terms.as_slice() {
                [] => Some(0.0),
                [t] => t.analytic_power_integral(omega, p),
                _ => None,
            },
        }
    }

    /// `‖f‖_{L^p(Ω)}`: closed form when available, else sampled over the
    /// domain box.
    pub fn lp_norm(&self, omega: &dyn ConvexDomain, p: f64, budget: usize, seed: u64) -> f64 {
        let integral = self.analytic_power_integral(omega, p).unwrap_or_else(|| {
            let bbox = omega.bounding_box();
            let s = sampled_sum(&bbox, budget, seed, |y| {
                if omega.contains_closed(y) {
                    (1.0, self.eval(y).abs().powf(p))
                } else {
                    (0.0, 0.0)
                }
            });
            bbox.volume() * s.1 / budget as f64
        });
        integral.powf(1.0 / p)
    }
}

/// `|Ω|`, closed form or sampled.
pub fn domain_volume(omega: &dyn ConvexDomain, budget: usize, seed: u64) -> f64 {
    omega.volume().unwrap_or_else(|| {
        let bbox = omega.bounding_box();
        bbox.volume() * count_hits(&bbox, budget, seed, |y| omega.contains_closed(y)) as f64 / budget as f64
    })
}

const BLOCK: u64 = 4096;

/// Sums of `(weight, value)` over the first `budget` stream points mapped
/// into `bbox`, reduced blockwise in index order.
fn sampled_sum(bbox: &BoundingBox, budget: usize, seed: u64, f: impl Fn(&[f64]) -> (f64, f64) + Sync) -> (f64, f64) {
    let n = bbox.dim();
    let s = QmcStream::new(n, seed);
    let total = budget as u64;
    let parts: Vec<(f64, f64)> = (0..total.div_ceil(BLOCK))
        .into_par_iter()
        .map(|b| {
            let (mut u, mut y) = (vec![0.0; n], vec![0.0; n]);
            let mut acc = (0.0, 0.0);
            for i in b * BLOCK..((b + 1) * BLOCK).min(total) {
                s.fill(i, &mut u);
                bbox.map_unit(&u, &mut y);
                let (w, v) = f(&y);
                acc.0 += w;
                acc.1 += v;
            }
            acc
        })
        .collect();
    parts.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeightGrid {
    pub t_min: f64,
    pub t_max: f64,
    /// Heights per doubling of `t`.
    pub per_octave: u32,
}

impl HeightGrid {
    pub fn new(t_min: f64, t_max: f64, per_octave: u32) -> Result<Self> {
        if !(t_min > 0.0 && t_max >= t_min && t_max.is_finite()) || per_octave == 0 {
            return Err(Error::InvalidInput(format!(
                "height grid needs 0 < t_min ≤ t_max and a positive density, got [{t_min}, {t_max}] at {per_octave}"
            )));
        }
        Ok(HeightGrid { t_min, t_max, per_octave })
    }

    /// `1e−4·M` to `M` at four heights per octave.
    pub fn standard(m: f64) -> Self {
        HeightGrid { t_min: 1e-4 * m, t_max: m, per_octave: 4 }
    }

    pub fn refined(&self) -> Self {
        HeightGrid { per_octave: 2 * self.per_octave, ..self.clone() }
    }

    pub fn heights(&self) -> Vec<f64> {
        let q = self.per_octave as f64;
        (0..)
            .map(|j| self.t_min * 2f64.powf(j as f64 / q))
            .take_while(|t| *t <= self.t_max * (1.0 + 1e-12))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MaximalValue {
    pub value: f64,
    /// Height attaining `value`; `None` when the global average wins.
    pub height: Option<f64>,
    /// Heights whose section received no sample.
    pub skipped: usize,
}

/// `M` for one potential, domain and test function; caches the global
/// average.
pub struct MaximalOperator<'a> {
    phi: &'a dyn Potential,
    omega: &'a dyn ConvexDomain,
    f: &'a TestFunction,
    heights: Vec<f64>,
    budget: usize,
    l1: f64,
    volume: f64,
}

impl<'a> MaximalOperator<'a> {
    /// `budget` stream points per section average; the same budget sizes
    /// the sampled norms when no closed form exists.
    pub fn new(
        phi: &'a dyn Potential,
        omega: &'a dyn ConvexDomain,
        f: &'a TestFunction,
        grid: &HeightGrid,
        budget: usize,
        seed: u64,
    ) -> Result<Self> {
        check_budget(budget)?;
        f.validate(omega.dim())?;
        let norm_budget = budget.max(1 << 16);
        let l1 = f.lp_norm(omega, 1.0, norm_budget, derive_seed(seed, &[0]));
        let volume = domain_volume(omega, norm_budget, derive_seed(seed, &[1]));
        Ok(MaximalOperator { phi, omega, f, heights: grid.heights(), budget, l1, volume })
    }

    pub fn l1_norm(&self) -> f64 {
        self.l1
    }

    pub fn domain_volume(&self) -> f64 {
        self.volume
    }

    pub fn global_average(&self) -> f64 {
        self.l1 / self.volume
    }

    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    /// `M f(x)`; `seed` fixes the stream shared by all heights at `x`.
    pub fn eval(&self, x: &[f64], seed: u64) -> Result<MaximalValue> {
        let global = self.global_average();
        let mut best = MaximalValue { value: global, height: None, skipped: 0 };
        let Some(&top) = self.heights.last() else {
            return Ok(best);
        };
        let view = SectionView::new(self.phi, self.omega, x, top)?;
        let consider = |avg: Option<f64>, t: f64, best: &mut MaximalValue| match avg {
            Some(a) if a > best.value => {
                best.value = a;
                best.height = Some(t);
            }
            Some(_) => {}
            None => best.skipped += 1,
        };
        if self.omega.dim() == 1 {
            for &t in &self.heights {
                let (a, b) = section_interval(&view.with_height(t));
                let avg = (b > a).then(|| self.f.interval_integral(a, b, 1.0) / (b - a));
                consider(avg, t, &mut best);
            }
            return Ok(best);
        }
        let diam = self.omega.bounding_box().diameter();
        let profile = ExtentProfile::new(&view, 2f64.powf(0.125), 1e-7 * diam);
        for &t in &self.heights {
            let section = view.with_height(t);
            let bbox = profile.bounding_box(t);
            // S(x,t) ∋ x is nonempty, so a.e.-constant |f| has that average
            if let Some(c) = self.f.constant_on(&bbox) {
                consider(Some(c.abs()), t, &mut best);
                continue;
            }
            let (hits, mass) = sampled_sum(&bbox, self.budget, seed, |y| {
                if section.contains(y) {
                    (1.0, self.f.eval(y).abs())
                } else {
                    (0.0, 0.0)
                }
            });
            consider((hits > 0.0).then(|| mass / hits), t, &mut best);
        }
        Ok(best)
    }

    /// `M f` at every point, in parallel; point `k` uses stream key `k`.
    pub fn eval_all(&self, xs: &[Vec<f64>], seed: u64) -> Result<Vec<MaximalValue>> {
        xs.par_iter().enumerate().map(|(k, x)| self.eval(x, derive_seed(seed, &[k as u64]))).collect()
    }
}

pub fn maximal_function(
    phi: &dyn Potential,
    omega: &dyn ConvexDomain,
    f: &TestFunction,
    x: &[f64],
    grid: &HeightGrid,
    budget: usize,
    seed: u64,
) -> Result<MaximalValue> {
    MaximalOperator::new(phi, omega, f, grid, budget, seed)?.eval(x, derive_seed(seed, &[2]))
}

/// Points of `Ω` with weights summing to (an estimate of) `|Ω|`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeightedSample {
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

/// Shell samples and volume probes per stratum use this many stream points.
const SHELL_VOLUME_BUDGET: usize = 1 << 16;

impl TestFunction {
    /// Center and radius of the only non-constant feature, if any.
    fn focus(&self) -> Option<(&Point, f64)> {
        match self {
            TestFunction::Indicator { center, radius, .. } => Some((center, *radius)),
            TestFunction::Sum { terms } => match terms.as_slice() {
                [t] => t.focus(),
                _ => None,
            },
            _ => None,
        }
    }
}

/// `count` stream points of the open domain, each of weight `|Ω|/count`.
pub fn interior_samples(omega: &dyn ConvexDomain, count: usize, volume: f64, seed: u64) -> WeightedSample {
    let points = stream_points(omega, &omega.bounding_box(), count, seed, |_| true);
    let w = volume / points.len().max(1) as f64;
    WeightedSample { weights: vec![w; points.len()], points }
}

fn stream_points(
    omega: &dyn ConvexDomain,
    bbox: &BoundingBox,
    count: usize,
    seed: u64,
    keep: impl Fn(&[f64]) -> bool,
) -> Vec<Vec<f64>> {
    let n = omega.dim();
    let s = QmcStream::new(n, seed);
    let mut y = vec![0.0; n];
    let mut out = Vec::with_capacity(count);
    let mut i = 0u64;
    while out.len() < count && i < 256 * count as u64 {
        bbox.map_unit(&s.point(i), &mut y);
        if omega.contains_open(&y) && keep(&y) {
            out.push(y.clone());
        }
        i += 1;
    }
    out
}

/// Stratified sample adapted to `f`: for an indicator of `B(c,r)` the
/// strata are `Ω ∩ B(c,r)` and the dyadic shells `Ω ∩ B(c,2^k r) ∖
/// B(c,2^{k−1} r)` covering `Ω`, with equal counts and weights
/// `|stratum|/count`. Otherwise uniform.
pub fn x_sample(omega: &dyn ConvexDomain, f: &TestFunction, count: usize, volume: f64, seed: u64) -> WeightedSample {
    let Some((c, r)) = f.focus() else {
        return interior_samples(omega, count, volume, seed);
    };
    let n = omega.dim();
    let dbox = omega.bounding_box();
    let reach = dbox.diameter() + dist_sq(c, &dbox.center()).sqrt();
    let mut radii = vec![0.0, r];
    while *radii.last().unwrap() < reach {
        radii.push(2.0 * radii.last().unwrap());
    }
    let strata = radii.len() - 1;
    let per = count.div_ceil(strata).max(1);
    let mut out = WeightedSample { points: Vec::new(), weights: Vec::new() };
    for k in 0..strata {
        let (lo, hi) = (radii[k], radii[k + 1]);
        let shell = |y: &[f64]| {
            let d = dist_sq(y, c);
            d >= lo * lo && d < hi * hi
        };
        let bbox = BoundingBox::around(c, hi).intersect(&dbox);
        if bbox.volume() <= 0.0 {
            continue;
        }
        let ball = |rad: f64| unit_ball_volume(n) * rad.powi(n as i32);
        let vol = match omega.contains_ball(c, hi) {
            Some(true) => ball(hi) - ball(lo),
            _ => {
                let hits = count_hits(&bbox, SHELL_VOLUME_BUDGET, derive_seed(seed, &[k as u64, 0]), |y| {
                    omega.contains_closed(y) && shell(y)
                });
                bbox.volume() * hits as f64 / SHELL_VOLUME_BUDGET as f64
            }
        };
        if vol <= 0.0 {
            continue;
        }
        let pts = stream_points(omega, &bbox, per, derive_seed(seed, &[k as u64, 1]), shell);
        if pts.is_empty() {
            continue;
        }
        let w = vol / pts.len() as f64;
        out.weights.extend(std::iter::repeat(w).take(pts.len()));
        out.points.extend(pts);
    }
    out
}

/// `M f` on a weighted sample of `Ω`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MaximalProfile {
    pub function: String,
    pub l1_norm: f64,
    pub domain_volume: f64,
    pub values: Vec<MaximalValue>,
    pub weights: Vec<f64>,
}

impl MaximalOperator<'_> {
    pub fn profile(&self, x_samples: usize, seed: u64) -> Result<MaximalProfile> {
        let xs = x_sample(self.omega, self.f, x_samples, self.volume, derive_seed(seed, &[10]));
        let values = self.eval_all(&xs.points, derive_seed(seed, &[11]))?;
        Ok(MaximalProfile {
            function: self.f.label(),
            l1_norm: self.l1,
            domain_volume: self.volume,
            values,
            weights: xs.weights,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeakReport {
    pub function: String,
    pub constant: f64,
    /// `β` (approached from below) attaining the constant.
    pub beta: Option<f64>,
    /// `(β, |{M f > β}|)`.
    pub superlevel: Vec<(f64, f64)>,
    pub l1_norm: f64,
    pub x_samples: usize,
    pub skipped_heights: usize,
}

/// Rows kept in the reported superlevel curve.
const CURVE_ROWS: usize = 256;

/// `sup_β β·|{M f > β}| / ‖f‖₁`. Without an explicit grid, `β` runs
/// through the sampled values of `M f`, each approached from below where
/// the product is largest.
pub fn weak_from_profile(prof: &MaximalProfile, betas: Option<&[f64]>) -> Result<WeakReport> {
    let mut m: Vec<(f64, f64)> = prof.values.iter().map(|v| v.value).zip(prof.weights.iter().cloned()).collect();
    m.sort_by(|a, b| b.0.total_cmp(&a.0));
    let l1 = prof.l1_norm;
    let report = |constant, beta, superlevel| WeakReport {
        function: prof.function.clone(),
        constant,
        beta,
        superlevel,
        l1_norm: l1,
        x_samples: m.len(),
        skipped_heights: prof.values.iter().map(|v| v.skipped).sum(),
    };
    if !(l1 > 0.0) {
        if m.iter().all(|v| v.0 == 0.0) {
            return Ok(report(0.0, None, vec![]));
        }
        return Err(Error::InvalidTestFunction(format!("‖f‖₁ = 0 but M f > 0 somewhere for {}", prof.function)));
    }
    let curve: Vec<(f64, f64)> = match betas {
        Some(bs) => bs.iter().map(|&b| (b, m.iter().filter(|v| v.0 > b).map(|v| v.1).sum())).collect(),
        None => {
            let mut rows = Vec::new();
            let (mut k, mut mass) = (0, 0.0);
            while k < m.len() {
                let v = m[k].0;
                while k < m.len() && m[k].0 == v {
                    mass += m[k].1;
                    k += 1;
                }
                rows.push((v, mass));
            }
            rows
        }
    };
    let (beta, constant) = curve
        .iter()
        .map(|(b, s)| (*b, b * s / l1))
        .fold((None, 0.0), |acc, (b, c)| if c > acc.1 { (Some(b), c) } else { acc });
    let stride = curve.len().div_ceil(CURVE_ROWS).max(1);
    let superlevel = curve.iter().step_by(stride).cloned().collect();
    Ok(report(constant, beta, superlevel))
}

pub fn weak_1_1_constant(
    op: &MaximalOperator<'_>,
    betas: Option<&[f64]>,
    x_samples: usize,
    seed: u64,
) -> Result<WeakReport> {
    weak_from_profile(&op.profile(x_samples, seed)?, betas)
}

/// `‖M f‖_p / ‖f‖_p` from a profile.
pub fn strong_from_profile(
    prof: &MaximalProfile,
    f: &TestFunction,
    omega: &dyn ConvexDomain,
    p: f64,
    norm_budget: usize,
    seed: u64,
) -> Result<f64> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::InvalidInput(format!("strong-type exponent must exceed 1, got {p}")));
    }
    let norm = f.lp_norm(omega, p, norm_budget, seed);
    if !(norm > 0.0) {
        return Err(Error::InvalidTestFunction(format!("‖f‖_{p} = 0 for {}", f.label())));
    }
    let integral: f64 = prof.values.iter().zip(&prof.weights).map(|(v, w)| w * v.value.powf(p)).sum();
    Ok(integral.powf(1.0 / p) / norm)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StrongEntry {
    pub p: f64,
    pub constant: f64,
    /// Test function attaining the constant.
    pub function: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MaximalReport {
    pub weak: Vec<WeakReport>,
    pub weak_constant: f64,
    pub strong_constants: Vec<StrongEntry>,
    pub heights: Vec<f64>,
}

/// Weak and strong constants over a family, evaluating `M f` once per
/// function on its own weighted sample.
#[allow(clippy::too_many_arguments)]
pub fn maximal_report(
    phi: &dyn Potential,
    omega: &dyn ConvexDomain,
    fs: &[TestFunction],
    ps: &[f64],
    grid: &HeightGrid,
    budget: usize,
    x_samples: usize,
    seed: u64,
) -> Result<MaximalReport> {
    if let Some(p) = ps.iter().find(|p| !(**p > 1.0 && p.is_finite())) {
        return Err(Error::InvalidInput(format!("strong-type exponent must exceed 1, got {p}")));
    }
    let mut weak = Vec::new();
    let mut strong: Vec<StrongEntry> =
        ps.iter().map(|&p| StrongEntry { p, constant: 0.0, function: String::new() }).collect();
    for (k, f) in fs.iter().enumerate() {
        let key = derive_seed(seed, &[k as u64]);
        let op = MaximalOperator::new(phi, omega, f, grid, budget, key)?;
        let prof = op.profile(x_samples, key)?;
        let w = weak_from_profile(&prof, None)?;
        if w.l1_norm > 0.0 {
            for e in strong.iter_mut() {
                let c = strong_from_profile(&prof, f, omega, e.p, budget.max(1 << 16), derive_seed(key, &[1]))?;
                if c > e.constant {
                    e.constant = c;
                    e.function = f.label();
                }
            }
        }
        weak.push(w);
    }
    let weak_constant = weak.iter().map(|w| w.constant).fold(0.0, f64::max);
    Ok(MaximalReport { weak, weak_constant, strong_constants: strong, heights: grid.heights() })
}

/// `max_f ‖M f‖_p / ‖f‖_p` for every `p`.
#[allow(clippy::too_many_arguments)]
pub fn strong_pp_constant(
    phi: &dyn Potential,
    omega: &dyn ConvexDomain,
    fs: &[TestFunction],
    ps: &[f64],
    grid: &HeightGrid,
    budget: usize,
    x_samples: usize,
    seed: u64,
) -> Result<Vec<StrongEntry>> {
    Ok(maximal_report(phi, omega, fs, ps, grid, budget, x_samples, seed)?.strong_constants)
}
