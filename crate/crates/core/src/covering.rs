//! Besicovitch-type selection on finite section families, overlap
//! profiles, and the density covering `|O| ≤ √ε |⋃ S(x_k, t_k)|`.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::point::{dist_sq, lerp, midpoint, unit_ball_volume, BoundingBox, Point};
use crate::potentials::{retract, sample_closed, ConvexDomain, Potential, Tangent};
use crate::sampling::{derive_seed, rng, QmcStream};
use crate::sections::volume::{count_hits, count_nested_hits, section_interval, VolumeEstimate};
use crate::sections::explore::{golden_min, pattern_search};
use crate::sections::{SectionSpec, SectionView};
use crate::stats::{fit_line, LineFit};

/// An open set `O ⊂ R^n` given by membership.
pub trait OpenSet: Send + Sync {
    fn dim(&self) -> usize;
    fn contains(&self, y: &[f64]) -> bool;
    fn bounding_box(&self) -> BoundingBox;
    /// `|O|` when known in closed form.
    fn volume(&self) -> Option<f64>;
    /// `O` as an open interval, in one dimension.
    fn interval(&self) -> Option<(f64, f64)> {
        None
    }
    fn label(&self) -> String;
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OpenBall {
    pub center: Point,
    pub radius: f64,
}

impl OpenBall {
    pub fn new(center: impl Into<Point>, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidInput(format!("ball radius {radius} must be positive")));
        }
        Ok(OpenBall { center: center.into(), radius })
    }
}

impl OpenSet for OpenBall {
    fn dim(&self) -> usize {
        self.center.dim()
    }
    fn contains(&self, y: &[f64]) -> bool {
        crate::point::dist_sq(y, &self.center) < self.radius * self.radius
    }
    fn bounding_box(&self) -> BoundingBox {
        BoundingBox::around(&self.center, self.radius)
    }
    fn volume(&self) -> Option<f64> {
        Some(unit_ball_volume(self.dim()) * self.radius.powi(self.dim() as i32))
    }
    fn interval(&self) -> Option<(f64, f64)> {
        (self.dim() == 1).then(|| (self.center[0] - self.radius, self.center[0] + self.radius))
    }
    fn label(&self) -> String {
        format!("ball(center={:?}, r={})", self.center.coords(), self.radius)
    }
}

type Member = dyn Fn(&[f64]) -> bool + Send + Sync;

/// Open set from a predicate; `|O|` is estimated when not supplied.
#[derive(Clone)]
pub struct PredicateSet {
    label: String,
    member: Arc<Member>,
    bbox: BoundingBox,
    volume: Option<f64>,
}

impl PredicateSet {
    pub fn new(
        label: impl Into<String>,
        bbox: BoundingBox,
        member: impl Fn(&[f64]) -> bool + Send + Sync + 'static,
        volume: Option<f64>,
    ) -> Self {
        PredicateSet { label: label.into(), member: Arc::new(member), bbox, volume }
    }
}

impl OpenSet for PredicateSet {
    fn dim(&self) -> usize {
        self.bbox.dim()
    }
    fn contains(&self, y: &[f64]) -> bool {
        (self.member)(y)
    }
    fn bounding_box(&self) -> BoundingBox {
        self.bbox.clone()
    }
    fn volume(&self) -> Option<f64> {
        self.volume
    }
    fn label(&self) -> String {
        self.label.clone()
    }
}

/// `|O|`, closed form or hit-or-miss over its box.
pub fn open_set_volume(o: &dyn OpenSet, budget: usize, seed: u64) -> VolumeEstimate {
    match o.volume() {
        Some(v) => VolumeEstimate::exact(v),
        None => {
            let b = o.bounding_box();
            let hits = count_hits(&b, budget, seed, |p| o.contains(p));
            VolumeEstimate::from_hits(b.volume(), hits, budget as u64)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SectionFamily {
    pub entries: Vec<(usize, SectionSpec)>,
    pub m: f64,
}

impl SectionFamily {
    /// `M` defaults to the largest height.
    pub fn new(entries: Vec<(usize, SectionSpec)>, m: Option<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidInput("empty section family".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for (i, _) in &entries {
            if !seen.insert(*i) {
                return Err(Error::InvalidInput(format!("duplicate family index {i}")));
            }
        }
        let top = entries.iter().map(|(_, s)| s.height).fold(0.0, f64::max);
        let m = m.unwrap_or(top);
        if m < top {
            return Err(Error::InvalidInput(format!("M = {m} below the largest height {top}")));
        }
        Ok(SectionFamily { entries, m })
    }

    pub fn from_specs(specs: Vec<SectionSpec>) -> Result<Self> {
        Self::new(specs.into_iter().enumerate().collect(), None)
    }
}

/// The `k ≥ 0` with `M/2^{k+1} < t ≤ M/2^k`.
pub fn generation(t: f64, m: f64) -> u32 {
    let mut k = (m / t).log2().floor().max(0.0) as u32;
    while k > 0 && t > m / 2f64.powi(k as i32) {
        k -= 1;
    }
    while t <= m / 2f64.powi(k as i32 + 1) {
        k += 1;
    }
    k
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoverReport {
    /// Family indices in selection order.
    pub selected: Vec<usize>,
    pub generation_of: BTreeMap<usize, u32>,
    /// `α = 2θ²`.
    pub disjointness_alpha: f64,
    /// Overlap counts `(ε, max count)`, filled by [`overlap_profile`].
    pub overlap_profile: Vec<(f64, usize)>,
    /// Per family entry: its center lies in a selected section.
    pub covered: Vec<bool>,
}

fn center_in(phi: &dyn Potential, spec: &SectionSpec, y: &[f64]) -> bool {
    Tangent::new(phi, &spec.center).gap(y) < spec.height
}

/// Greedy selection by generations; inside a generation the uncovered
/// entry of largest height is taken next (lowest index on ties).
pub fn besicovitch_select(
    phi: &dyn Potential,
    omega: &dyn ConvexDomain,
    family: &SectionFamily,
    theta: f64,
) -> Result<CoverReport> {
    if !(theta >= 1.0) {
        return Err(Error::InvalidConstant(format!("θ = {theta} is below 1")));
    }
    for (_, s) in &family.entries {
        if !omega.contains_closed(&s.center) {
            return Err(Error::Domain { point: s.center.to_vec(), reason: "family center outside Ω̄".into() });
        }
    }
    let gens: Vec<u32> = family.entries.iter().map(|(_, s)| generation(s.height, family.m)).collect();
    let mut by_gen: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (pos, g) in gens.iter().enumerate() {
        by_gen.entry(*g).or_default().push(pos);
    }
    let mut chosen: Vec<usize> = Vec::new();
    let mut is_covered = vec![false; family.entries.len()];
    let mark = |sel: usize, covered: &mut Vec<bool>| {
        let spec = &family.entries[sel].1;
        let tan = Tangent::new(phi, &spec.center);
        for (pos, (_, s)) in family.entries.iter().enumerate() {
            if !covered[pos] && tan.gap(&s.center) < spec.height {
                covered[pos] = true;
            }
        }
    };
    for members in by_gen.values() {
        loop {
            let next = members
                .iter()
                .filter(|p| !is_covered[**p])
                .max_by(|a, b| {
                    let (ia, sa) = &family.entries[**a];
                    let (ib, sb) = &family.entries[**b];
                    sa.height.total_cmp(&sb.height).then(ib.cmp(ia))
                })
                .copied();
            let Some(p) = next else { break };
            chosen.push(p);
            mark(p, &mut is_covered);
        }
    }
    Ok(CoverReport {
        selected: chosen.iter().map(|p| family.entries[*p].0).collect(),
        generation_of: chosen.iter().map(|p| (family.entries[*p].0, gens[*p])).collect(),
        disjointness_alpha: 2.0 * theta * theta,
        overlap_profile: Vec::new(),
        covered: is_covered,
    })
}

fn selected_specs(family: &SectionFamily, report: &CoverReport) -> Vec<SectionSpec> {
    let by_index: BTreeMap<usize, &SectionSpec> = family.entries.iter().map(|(i, s)| (*i, s)).collect();
    report.selected.iter().map(|i| by_index[i].clone()).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SelectionAudit {
    /// Every family center lies in some selected section.
    pub all_covered: bool,
    /// Selected entries whose center lies in an earlier selected section.
    pub earlier_hits: Vec<usize>,
    /// Selected entries violating `M/2^{k+1} < t ≤ M/2^k`.
    pub generation_errors: Vec<usize>,
    pub generations_monotone: bool,
}

impl SelectionAudit {
    pub fn passed(&self) -> bool {
        self.all_covered && self.earlier_hits.is_empty() && self.generation_errors.is_empty() && self.generations_monotone
    }
}

/// Re-derives properties (i), (ii) and the generation bounds from scratch
/// by exact membership of centers.
pub fn audit_selection(phi: &dyn Potential, family: &SectionFamily, report: &CoverReport) -> SelectionAudit {
    let sel = selected_specs(family, report);
    let all_covered = family.entries.iter().all(|(_, s)| sel.iter().any(|k| center_in(phi, k, &s.center)));
    let earlier_hits = (1..sel.len())
        .filter(|&j| (0..j).any(|i| center_in(phi, &sel[i], &sel[j].center)))
        .map(|j| report.selected[j])
        .collect();
    let generation_errors = report
        .selected
        .iter()
        .zip(&sel)
        .filter(|(i, s)| {
            let k = report.generation_of[i] as i32;
            !(family.m / 2f64.powi(k + 1) < s.height && s.height <= family.m / 2f64.powi(k))
        })
        .map(|(i, _)| *i)
        .collect();
    let gens: Vec<u32> = report.selected.iter().map(|i| report.generation_of[i]).collect();
    SelectionAudit { all_covered, earlier_hits, generation_errors, generations_monotone: gens.windows(2).all(|w| w[0] <= w[1]) }
}

/// Largest normalized gap `max_k b(w,x_k)/t_k` over a subfamily.
fn depth(tangents: &[(Tangent<'_>, f64)], members: &[usize], w: &[f64]) -> f64 {
    members.iter().map(|k| tangents[*k].0.gap(w) / tangents[*k].1).fold(0.0, f64::max)
}

fn minimax(omega: &dyn ConvexDomain, tangents: &[(Tangent<'_>, f64)], members: &[usize], w: &mut Vec<f64>, scale: f64) -> f64 {
    -pattern_search(w, 0.25 * scale, 100, 1e-9 * scale, |q| {
        if !omega.contains_closed(q) {
            *q = retract(omega, q);
        }
        -depth(tangents, members, q)
    })
}

/// Deep intersection candidates: for every pair of overlapping sections
/// the point minimizing the larger normalized gap, then greedily grown
/// cliques (the next section is the one shallowest at the current point).
fn deep_probes(omega: &dyn ConvexDomain, tangents: &[(Tangent<'_>, f64)]) -> Vec<Vec<f64>> {
    let m = tangents.len();
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).collect();
    pairs
        .par_iter()
        .flat_map_iter(|&(i, j)| {
            let (xi, xj) = (tangents[i].0.base(), tangents[j].0.base());
            let (s, v) = golden_min(0.0, 1.0, 60, |s| depth(tangents, &[i, j], &lerp(xi, xj, s)));
            let mut out = Vec::new();
            if v >= 1.0 {
                return out;
            }
            let scale = dist_sq(xi, xj).sqrt().max(1e-12);
            let mut w = lerp(xi, xj, s);
            let mut clique = vec![i, j];
            minimax(omega, tangents, &clique, &mut w, 0.1 * scale);
            out.push(w.clone());
            while clique.len() < MAX_CLIQUE {
                let next = (0..m)
                    .filter(|k| !clique.contains(k))
                    .map(|k| (k, tangents[k].0.gap(&w) / tangents[k].1))
                    .min_by(|a, b| a.1.total_cmp(&b.1));
                let Some((k, g)) = next else { break };
                if g >= 2.0 {
                    break;
                }
                clique.push(k);
                let mut trial = w.clone();
                if minimax(omega, tangents, &clique, &mut trial, 0.1 * scale) >= 1.0 {
                    break;
                }
                w = trial;
                out.push(w.clone());
            }
            out
        })
        .collect()
}

/// Cliques grown by [`deep_probes`] stop at this size.
const MAX_CLIQUE: usize = 12;

/// Probe points: a stream over `Ω`, the centers, pairwise midpoints of
/// centers and the deep intersection candidates.
fn probes(
    omega: &dyn ConvexDomain,
    tangents: &[(Tangent<'_>, f64)],
    budget: usize,
    seed: u64,
) -> Vec<Vec<f64>> {
    let n = omega.dim();
    let bbox = omega.bounding_box();
    let s = QmcStream::new(n, seed);
    let mut p = vec![0.0; n];
    let mut out = Vec::with_capacity(budget + tangents.len() * tangents.len() / 2);
    for i in 0..budget as u64 {
        bbox.map_unit(&s.point(i), &mut p);
        if omega.contains_closed(&p) {
            out.push(p.clone());
        }
    }
    for (i, a) in tangents.iter().enumerate() {
        out.push(a.0.base().to_vec());
        for b in &tangents[i + 1..] {
            out.push(midpoint(a.0.base(), b.0.base()));
        }
    }
    out.extend(deep_probes(omega, tangents));
    out
}

fn max_overlap(tangents: &[(Tangent<'_>, f64)], pts: &[Vec<f64>]) -> usize {
    pts.par_iter().map(|p| tangents.iter().filter(|(t, h)| t.gap(p) < *h).count()).max().unwrap_or(0)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DisjointnessReport {
    pub alpha: f64,
    pub probes: usize,
    /// Probes lying in two or more shrunk sections `S(x_k, t_k/α)`.
    pub witnesses: Vec<Point>,
}

/// Probes the shrunk selected sections `S(x_k, t_k/α)` for common points.
pub fn check_disjointness(
    phi: &dyn Potential,
    omega: &dyn ConvexDomain,
    family: &SectionFamily,
    report: &CoverReport,
    probe_budget: usize,
    seed: u64,
) -> DisjointnessReport {
    let sel = selected_specs(family, report);
    let alpha = report.disjointness_alpha;
    let tangents: Vec<(Tangent<'_>, f64)> =
        sel.iter().map(|s| (Tangent::new(phi, &s.center), s.height / alpha)).collect();
    let pts = probes(omega, &tangents, probe_budget, seed);
    let witnesses: Vec<Point> = pts
        .par_iter()
        .filter(|p| omega.contains_closed(p) && tangents.iter().filter(|(t, h)| t.gap(p) < *h).take(2).count() >= 2)
        .map(|p| Point::from(&p[..]))
        .collect();
    DisjointnessReport { alpha, probes: pts.len(), witnesses }
}

/// `ε ↦ max_probe #{k : probe ∈ S(x_k, (1−ε)t_k)}`.
pub fn overlap_profile(
    phi: &dyn Potential,
    omega: &dyn ConvexDomain,
    selected: &[SectionSpec],
    eps_list: &[f64],
    probe_budget: usize,
    seed: u64,
) -> Result<Vec<(f64, usize)>> {
    if eps_list.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
        return Err(Error::InvalidInput("overlap ε must lie in (0,1)".into()));
    }
    let full: Vec<(Tangent<'_>, f64)> = selected.iter().map(|s| (Tangent::new(phi, &s.center), s.height)).collect();
    let pts = probes(omega, &full, probe_budget, seed);
    Ok(eps_list
        .iter()
        .map(|&e| {
            let tangents: Vec<(Tangent<'_>, f64)> =
                selected.iter().map(|s| (Tangent::new(phi, &s.center), (1.0 - e) * s.height)).collect();
            (e, max_overlap(&tangents, &pts))
        })
        .collect())
}

/// Least-squares fit of counts against `log(1/ε)`.
pub fn fit_overlap(profile: &[(f64, f64)]) -> Option<LineFit> {
    let xs: Vec<f64> = profile.iter().map(|(e, _)| (1.0 / e).ln()).collect();
    let ys: Vec<f64> = profile.iter().map(|(_, c)| *c).collect();
    fit_line(&xs, &ys)
}

/// `count` sections with centers uniform in `Ω̄` and heights log-uniform
/// in `[lo, hi)`.
pub fn random_family(omega: &dyn ConvexDomain, count: usize, (lo, hi): (f64, f64), seed: u64) -> Result<SectionFamily> {
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::InvalidInput(format!("family heights need 0 < lo < hi, got [{lo}, {hi})")));
    }
    let centers = sample_closed(omega, count, derive_seed(seed, &[0]));
    let mut r = rng(seed, &[1]);
    let specs = centers
        .into_iter()
        .map(|c| SectionSpec { center: Point::new(c), height: r.gen_range(lo.ln()..hi.ln()).exp() })
        .collect();
    SectionFamily::from_specs(specs)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LemmaOptions {
    pub families: usize,
    pub sections: usize,
    pub heights: (f64, f64),
    pub eps: Vec<f64>,
    pub probe_budget: usize,
    pub theta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FamilyOutcome {
    pub sections: usize,
    pub selected: usize,
    pub all_covered: bool,
    /// Selected centers lying in an earlier selected section.
    pub earlier_hits: usize,
    pub generation_errors: usize,
    pub generations_monotone: bool,
    pub disjointness_witnesses: usize,
    pub probes: usize,
    pub profile: Vec<(f64, usize)>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LemmaReport {
    pub families: Vec<FamilyOutcome>,
    /// Profile averaged over families.
    pub mean_profile: Vec<(f64, f64)>,
    pub fit: Option<LineFit>,
    /// Every family profile is non-decreasing in `log(1/ε)`.
    pub monotone: bool,
}

impl LemmaReport {
    /// Selection properties and disjointness, which must hold exactly.
    pub fn hard_passed(&self) -> bool {
        self.monotone
            && self.families.iter().all(|f| f.all_covered && f.earlier_hits == 0 && f.generation_errors == 0 && f.generations_monotone)
            && self.families.iter().all(|f| f.disjointness_witnesses == 0)
    }
}

/// Selection, audit, disjointness probe and overlap profile on
/// independent random families; the log model is fitted to the mean
/// profile.
pub fn covering_lemma_run(
    phi: &dyn Potential,
    omega: &dyn ConvexDomain,
    opts: &LemmaOptions,
    seed: u64,
) -> Result<LemmaReport> {
    let mut eps = opts.eps.clone();
    eps.sort_by(|a, b| b.total_cmp(a));
    let mut families = Vec::with_capacity(opts.families);
    for k in 0..opts.families as u64 {
        let fam = random_family(omega, opts.sections, opts.heights, derive_seed(seed, &[k, 0]))?;
        let rep = besicovitch_select(phi, omega, &fam, opts.theta)?;
        let audit = audit_selection(phi, &fam, &rep);
        let dis = check_disjointness(phi, omega, &fam, &rep, opts.probe_budget, derive_seed(seed, &[k, 1]));
        let sel = selected_specs(&fam, &rep);
        let profile = overlap_profile(phi, omega, &sel, &eps, opts.probe_budget, derive_seed(seed, &[k, 2]))?;
        families.push(FamilyOutcome {
            sections: fam.entries.len(),
            selected: sel.len(),
            all_covered: audit.all_covered,
            earlier_hits: audit.earlier_hits.len(),
            generation_errors: audit.generation_errors.len(),
            generations_monotone: audit.generations_monotone,
            disjointness_witnesses: dis.witnesses.len(),
            probes: dis.probes,
            profile,
        });
    }
    let count = families.len().max(1) as f64;
    let mean_profile: Vec<(f64, f64)> = eps
        .iter()
        .enumerate()
        .map(|(j, e)| (*e, families.iter().map(|f| f.profile[j].1 as f64).sum::<f64>() / count))
        .collect();
    let monotone = families.iter().all(|f| f.profile.windows(2).all(|w| w[1].1 >= w[0].1));
    Ok(LemmaReport { fit: fit_overlap(&mean_profile), mean_profile, families, monotone })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RatioOptions {
    pub budget: usize,
    /// Accepted `|r(t_x) − ε|`.
    pub ratio_tol: f64,
    /// Upper end of the height bracket (`M_emp`).
    pub t_max: f64,
    /// Lower end as a fraction of `t_max`.
    pub t_min_factor: f64,
}

impl Default for RatioOptions {
    fn default() -> Self {
        RatioOptions { budget: 100_000, ratio_tol: 0.01, t_max: 4.0, t_min_factor: 1e-10 }
    }
}

/// `|S(x,t) ∩ O| / |S(x,t)|`: exact for intervals, otherwise with the
/// same stream for both volumes.
pub fn density_ratio(view: &SectionView<'_>, o: &dyn OpenSet, budget: usize, seed: u64) -> f64 {
    if view.dim() == 1 {
        if let Some((a, b)) = o.interval() {
            let (lo, hi) = section_interval(view);
            let len = hi - lo;
            return if len > 0.0 { (hi.min(b) - lo.max(a)).max(0.0) / len } else { 1.0 };
        }
    }
    let bbox = view.bounding_box();
    let (s, so) = count_nested_hits(&bbox, budget, seed, |p| view.contains(p), |p| o.contains(p));
    if s == 0 {
        return if o.contains(view.center()) { 1.0 } else { 0.0 };
    }
    so as f64 / s as f64
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioHeight {
    pub center: Point,
    pub t: f64,
    pub ratio: f64,
}

/// Bisection in `log t` for `r(t) = ε`, run to bracket resolution and
/// accepted when `|r − ε| ≤ ratio_tol`.
pub fn find_ratio_height(
    phi: &dyn Potential,
    omega: &dyn ConvexDomain,
    x: &[f64],
    o: &dyn OpenSet,
    eps: f64,
    opts: &RatioOptions,
    seed: u64,
) -> Result<RatioHeight> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidInput(format!("ratio ε = {eps} must lie in (0,1)")));
    }
    if !o.contains(x) {
        return Err(Error::Domain { point: x.to_vec(), reason: "ratio center outside O".into() });
    }
    let view = SectionView::new(phi, omega, x, opts.t_max)?;
    let r = |t: f64| density_ratio(&view.with_height(t), o, opts.budget, seed);
    let (mut lo, mut hi) = (opts.t_max * opts.t_min_factor, opts.t_max);
    let (r_lo, r_hi) = (r(lo), r(hi));
    if !(r_lo > eps && r_hi < eps) {
        return Err(Error::NoRoot { at: x.to_vec() });
    }
    // invariant: r(lo) > ε > r(hi)
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if !(mid > lo && mid < hi) {
            break;
        }
        let rm = r(mid);
        if rm == eps {
            lo = mid;
            hi = mid;
            break;
        }
        if rm > eps {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (t, rt) = [(lo, r(lo)), (hi, r(hi))]
        .into_iter()
        .min_by(|a, b| (a.1 - eps).abs().total_cmp(&(b.1 - eps).abs()))
        .unwrap();
    if (rt - eps).abs() > opts.ratio_tol {
        return Err(Error::NoRoot { at: x.to_vec() });
    }
    Ok(RatioHeight { center: Point::from(x), t, ratio: rt })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoveringTheoremReport {
    pub open_set: String,
    pub eps: f64,
    pub centers: usize,
    pub failed_centers: Vec<Point>,
    pub family: Vec<RatioHeight>,
    pub selected: Vec<usize>,
    pub o_volume: f64,
    pub union_volume: f64,
    pub union_stderr: f64,
    /// `|O| / |⋃ selected|`.
    pub ratio: f64,
    pub sqrt_eps: f64,
    /// `√ε |⋃| − |O|`.
    pub slack: f64,
    pub centers_covered: bool,
    /// Fraction of extra probes of `O` inside the selected union.
    pub probe_coverage: f64,
    pub passed: bool,
}

/// Length of a union of intervals.
fn interval_union_length(mut iv: Vec<(f64, f64)>) -> f64 {
    iv.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut total = 0.0;
    let mut cur: Option<(f64, f64)> = None;
    for (a, b) in iv {
        cur = match cur {
            Some((c, d)) if a <= d => Some((c, d.max(b))),
            Some((c, d)) => {
                total += d - c;
                Some((a, b))
            }
            None => Some((a, b)),
        };
    }
    if let Some((c, d)) = cur {
        total += d - c;
    }
    total
}

/// `|⋃ S(x_k, t_k)|`.
pub fn union_volume(
    phi: &dyn Potential,
    omega: &dyn ConvexDomain,
    specs: &[SectionSpec],
    budget: usize,
    seed: u64,
) -> Result<VolumeEstimate> {
    let views: Vec<SectionView<'_>> = specs.iter().map(|s| s.view(phi, omega)).collect::<Result<_>>()?;
    if omega.dim() == 1 {
        return Ok(VolumeEstimate::exact(interval_union_length(views.iter().map(section_interval).collect())));
    }
    let bbox = views.iter().map(|v| v.bounding_box()).reduce(|a, b| a.union(&b)).expect("nonempty");
    let hits = count_hits(&bbox, budget, seed, |p| views.iter().any(|v| v.contains(p)));
    Ok(VolumeEstimate::from_hits(bbox.volume(), hits, budget as u64))
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoveringOptions {
    pub centers: usize,
    /// Explicit centers used before sampled ones.
    pub extra_centers: Vec<Point>,
    pub ratio: RatioOptions,
    pub union_budget: usize,
    pub probe_budget: usize,
    pub theta: f64,
}

pub fn covering_theorem_run(
    phi: &dyn Potential,
    omega: &dyn ConvexDomain,
    o: &dyn OpenSet,
    eps: f64,
    opts: &CoveringOptions,
    seed: u64,
) -> Result<CoveringTheoremReport> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidInput(format!("covering ε = {eps} must lie in (0,1)")));
    }
    let n = omega.dim();
    let ob = o.bounding_box();
    let stream = QmcStream::new(n, derive_seed(seed, &[1]));
    let mut centers: Vec<Point> = opts.extra_centers.clone();
    let mut p = vec![0.0; n];
    let mut i = 0u64;
    while centers.len() < opts.centers + opts.extra_centers.len() && i < 1000 * (opts.centers as u64 + 1) {
        ob.map_unit(&stream.point(i), &mut p);
        i += 1;
        if o.contains(&p) && omega.contains_closed(&p) {
            centers.push(Point::from(&p[..]));
        }
    }
    if centers.is_empty() {
        return Err(Error::InvalidInput("no centers inside O".into()));
    }
    let results: Vec<Result<RatioHeight>> = centers
        .par_iter()
        .map(|x| find_ratio_height(phi, omega, x, o, eps, &opts.ratio, derive_seed(seed, &[2])))
        .collect();
    let mut family = Vec::new();
    let mut failed = Vec::new();
    for (x, r) in centers.iter().zip(results) {
        match r {
            Ok(h) => family.push(h),
            Err(Error::NoRoot { .. }) => failed.push(x.clone()),
            Err(e) => return Err(e),
        }
    }
    if failed.len() * 10 > centers.len() {
        return Err(Error::HypothesisFailure(format!(
            "{} of {} centers admit no height with density ratio ε",
            failed.len(),
            centers.len()
        )));
    }
    let specs: Vec<SectionSpec> = family.iter().map(|h| SectionSpec { center: h.center.clone(), height: h.t }).collect();
    let fam = SectionFamily::from_specs(specs.clone())?;
    let cover = besicovitch_select(phi, omega, &fam, opts.theta)?;
    let sel = selected_specs(&fam, &cover);
    let union = union_volume(phi, omega, &sel, opts.union_budget, derive_seed(seed, &[3]))?;
    let o_vol = open_set_volume(o, opts.union_budget, derive_seed(seed, &[4])).volume;

    let tangents: Vec<(Tangent<'_>, f64)> = sel.iter().map(|s| (Tangent::new(phi, &s.center), s.height)).collect();
    let in_union = |q: &[f64]| tangents.iter().any(|(t, h)| t.gap(q) < *h);
    let centers_covered = family.iter().all(|h| in_union(&h.center));
    let ps = QmcStream::new(n, derive_seed(seed, &[5]));
    let (mut inside, mut total) = (0usize, 0usize);
    for k in 0..opts.probe_budget as u64 {
        ob.map_unit(&ps.point(k), &mut p);
        if o.contains(&p) && omega.contains_closed(&p) {
            total += 1;
            inside += in_union(&p) as usize;
        }
    }
    let sqrt_eps = eps.sqrt();
    Ok(CoveringTheoremReport {
        open_set: o.label(),
        eps,
        centers: centers.len(),
        failed_centers: failed,
        family,
        selected: cover.selected,
        o_volume: o_vol,
        union_volume: union.volume,
        union_stderr: union.stderr,
        ratio: o_vol / union.volume,
        sqrt_eps,
        slack: sqrt_eps * union.volume - o_vol,
        centers_covered,
        probe_coverage: if total == 0 { 1.0 } else { inside as f64 / total as f64 },
        passed: centers_covered && o_vol <= sqrt_eps * union.volume,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::{AxisEllipsoid, Quadratic};

    fn spec(c: &[f64], t: f64) -> SectionSpec {
        SectionSpec::new(Point::from(c), t).unwrap()
    }

    #[test]
    fn generations() {
        assert_eq!(generation(1.0, 1.0), 0);
        assert_eq!(generation(0.5, 1.0), 1);
        assert_eq!(generation(0.51, 1.0), 0);
        assert_eq!(generation(0.01, 0.04), 2);
        assert_eq!(generation(0.0099, 0.04), 2);
        assert_eq!(generation(0.00999, 0.04), 2);
        assert_eq!(generation(0.005, 0.04), 3);
    }

    #[test]
    fn interval_example() {
        let phi = Quadratic::isotropic(1);
        let omega = AxisEllipsoid::unit_ball(1);
        let fam = SectionFamily::from_specs(vec![spec(&[0.0], 0.04), spec(&[0.1], 0.04), spec(&[0.15], 0.01)]).unwrap();
        let r = besicovitch_select(&phi, &omega, &fam, 4.0).unwrap();
        assert_eq!(r.selected, vec![0]);
        assert!(r.covered.iter().all(|c| *c));
        assert!(audit_selection(&phi, &fam, &r).passed());
    }

    #[test]
    fn disjoint_family_keeps_everything() {
        let phi = Quadratic::isotropic(1);
        let omega = AxisEllipsoid::unit_ball(1);
        let fam =
            SectionFamily::from_specs(vec![spec(&[-0.5], 0.01), spec(&[0.0], 0.04), spec(&[0.5], 0.01)]).unwrap();
        let r = besicovitch_select(&phi, &omega, &fam, 1.0).unwrap();
        assert_eq!(r.selected, vec![1, 0, 2]);
        let single = SectionFamily::from_specs(vec![spec(&[0.3], 0.2)]).unwrap();
        assert_eq!(besicovitch_select(&phi, &omega, &single, 1.0).unwrap().selected, vec![0]);
        assert!(SectionFamily::from_specs(vec![]).is_err());
    }

    #[test]
    fn overlap_counter() {
        let phi = Quadratic::isotropic(2);
        let omega = AxisEllipsoid::unit_ball(2);
        let twice = vec![spec(&[0.0, 0.0], 0.04), spec(&[0.0, 0.0], 0.04)];
        let p = overlap_profile(&phi, &omega, &twice, &[0.5, 0.25], 1000, 1).unwrap();
        assert!(p.iter().all(|(_, c)| *c == 2));
        let apart = vec![spec(&[-0.5, 0.0], 0.04), spec(&[0.5, 0.0], 0.04)];
        let p = overlap_profile(&phi, &omega, &apart, &[0.5, 0.25], 1000, 1).unwrap();
        assert!(p.iter().all(|(_, c)| *c == 1));
    }

    #[test]
    fn ratio_height_interval() {
        let phi = Quadratic::isotropic(1);
        let omega = AxisEllipsoid::unit_ball(1);
        let o = OpenBall::new([0.0], 0.1).unwrap();
        let r = find_ratio_height(&phi, &omega, &[0.0], &o, 0.5, &RatioOptions::default(), 0).unwrap();
        assert!((r.t - 0.04).abs() < 1e-9, "{r:?}");
        assert!(find_ratio_height(&phi, &omega, &[0.0], &o, 1.0, &RatioOptions::default(), 0).is_err());
    }

    #[test]
    fn ratio_height_disc() {
        let phi = Quadratic::isotropic(2);
        let omega = AxisEllipsoid::unit_ball(2);
        let o = OpenBall::new([0.0, 0.0], 0.1).unwrap();
        let r = find_ratio_height(&phi, &omega, &[0.0, 0.0], &o, 0.25, &RatioOptions::default(), 0).unwrap();
        assert!((r.t - 0.04).abs() < 0.002, "{r:?}");
    }

    #[test]
    fn interval_union() {
        assert!((interval_union_length(vec![(0.0, 1.0), (0.5, 2.0), (3.0, 4.0)]) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn covering_theorem_interval() {
        let phi = Quadratic::isotropic(1);
        let omega = AxisEllipsoid::unit_ball(1);
        let o = OpenBall::new([0.0], 0.1).unwrap();
        let opts = CoveringOptions {
            centers: 16,
            extra_centers: vec![Point::from([0.0])],
            ratio: RatioOptions::default(),
            union_budget: 10_000,
            probe_budget: 1000,
            theta: 4.0,
        };
        let r = covering_theorem_run(&phi, &omega, &o, 0.5, &opts, 3).unwrap();
        assert!(r.passed && r.centers_covered);
        assert!(r.union_volume >= 0.4 - 1e-12, "{r:?}");
        assert!(0.2 <= 0.5f64.sqrt() * r.union_volume);
    }
}
