//! Hit-or-miss volume of sections.
//!
//! Samples come from a shifted Kronecker stream mapped into a box that is
//! certified to contain the section, so the estimator is unbiased for
//! `|S|`. In one dimension the section is an interval and its length is
//! computed exactly.

use rayon::prelude::*;
use serde::Serialize;

use super::explore::SectionView;
use crate::error::{Error, Result};
use crate::point::BoundingBox;
use crate::sampling::QmcStream;

/// Smallest accepted sample budget.
pub const MIN_BUDGET: usize = 1000;

const BLOCK: u64 = 4096;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VolumeEstimate {
    pub volume: f64,
    pub stderr: f64,
    pub hits: u64,
    pub samples: u64,
    /// No sample hit the section; `stderr` then bounds the volume.
    pub degenerate: bool,
    /// Computed by interval arithmetic rather than sampling.
    pub exact: bool,
}

impl VolumeEstimate {
    pub fn exact(volume: f64) -> Self {
        VolumeEstimate { volume, stderr: 0.0, hits: 0, samples: 0, degenerate: volume <= 0.0, exact: true }
    }

    pub fn from_hits(box_volume: f64, hits: u64, samples: u64) -> Self {
        let p = hits as f64 / samples as f64;
        if hits == 0 {
            return VolumeEstimate {
                volume: 0.0,
                stderr: box_volume / samples as f64,
                hits,
                samples,
                degenerate: true,
                exact: false,
            };
        }
        VolumeEstimate {
            volume: p * box_volume,
            stderr: box_volume * (p * (1.0 - p) / samples as f64).sqrt(),
            hits,
            samples,
            degenerate: false,
            exact: false,
        }
    }

    /// `|self − value| ≤ k·stderr`, with exact estimates compared to `1e−9`.
    pub fn agrees_with(&self, value: f64, k: f64) -> bool {
        let tol = if self.exact { 1e-9 * value.abs().max(1.0) } else { k * self.stderr };
        (self.volume - value).abs() <= tol
    }
}

pub fn check_budget(budget: usize) -> Result<()> {
    if budget < MIN_BUDGET {
        return Err(Error::InvalidInput(format!("sample budget {budget} below {MIN_BUDGET}")));
    }
    Ok(())
}

/// Number of the first `budget` stream points (mapped into `bbox`) that
/// satisfy `pred`. Counting is blockwise parallel with an integer
/// reduction, so the result is independent of the thread count.
pub fn count_hits(bbox: &BoundingBox, budget: usize, seed: u64, pred: impl Fn(&[f64]) -> bool + Sync) -> u64 {
    let n = bbox.dim();
    let stream = QmcStream::new(n, seed);
    let total = budget as u64;
    let blocks = total.div_ceil(BLOCK);
    (0..blocks)
        .into_par_iter()
        .map(|b| {
            let (mut u, mut p) = (vec![0.0; n], vec![0.0; n]);
            let mut hits = 0u64;
            for i in b * BLOCK..((b + 1) * BLOCK).min(total) {
                stream.fill(i, &mut u);
                bbox.map_unit(&u, &mut p);
                if pred(&p) {
                    hits += 1;
                }
            }
            hits
        })
        .sum()
}

/// Like [`count_hits`] with two nested predicates evaluated on the same
/// points: returns `(#outer, #(outer ∧ inner))`.
pub fn count_nested_hits(
    bbox: &BoundingBox,
    budget: usize,
    seed: u64,
    outer: impl Fn(&[f64]) -> bool + Sync,
    inner: impl Fn(&[f64]) -> bool + Sync,
) -> (u64, u64) {
    let n = bbox.dim();
    let stream = QmcStream::new(n, seed);
    let total = budget as u64;
    let blocks = total.div_ceil(BLOCK);
    (0..blocks)
        .into_par_iter()
        .map(|b| {
            let (mut u, mut p) = (vec![0.0; n], vec![0.0; n]);
            let (mut a, mut c) = (0u64, 0u64);
            for i in b * BLOCK..((b + 1) * BLOCK).min(total) {
                stream.fill(i, &mut u);
                bbox.map_unit(&u, &mut p);
                if outer(&p) {
                    a += 1;
                    if inner(&p) {
                        c += 1;
                    }
                }
            }
            (a, c)
        })
        .reduce(|| (0, 0), |x, y| (x.0 + y.0, x.1 + y.1))
}

/// The section as a closed-open interval `[lo, hi]` (exact up to bisection
/// resolution). Only for `n = 1`.
pub fn section_interval(view: &SectionView<'_>) -> (f64, f64) {
    debug_assert_eq!(view.dim(), 1);
    let x = view.center()[0];
    let (left, _) = view.ray(&[-1.0]);
    let (right, _) = view.ray(&[1.0]);
    (x - left, x + right)
}

pub fn section_volume(view: &SectionView<'_>, budget: usize, seed: u64) -> Result<VolumeEstimate> {
    check_budget(budget)?;
    if view.dim() == 1 {
        let (lo, hi) = section_interval(view);
        return Ok(VolumeEstimate::exact(hi - lo));
    }
    let bbox = view.bounding_box();
    Ok(volume_in_box(view, &bbox, budget, seed))
}

/// Estimate using a caller-supplied box, which must contain the section.
pub fn volume_in_box(view: &SectionView<'_>, bbox: &BoundingBox, budget: usize, seed: u64) -> VolumeEstimate {
    let hits = count_hits(bbox, budget, seed, |p| view.contains(p));
    VolumeEstimate::from_hits(bbox.volume(), hits, budget as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::{AxisEllipsoid, Quadratic};
    use std::f64::consts::PI;

    /// Area of the intersection of discs of radii `r1`, `r2` at distance `d`.
    fn lens_area(r1: f64, r2: f64, d: f64) -> f64 {
        let a1 = ((d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1)).acos();
        let a2 = ((d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2)).acos();
        let k = ((-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2)).sqrt();
        r1 * r1 * a1 + r2 * r2 * a2 - 0.5 * k
    }

    #[test]
    fn disc_area() {
        let phi = Quadratic::isotropic(2);
        let omega = AxisEllipsoid::unit_ball(2);
        let v = SectionView::new(&phi, &omega, &[0.0, 0.0], 0.25).unwrap();
        let e = section_volume(&v, 100_000, 7).unwrap();
        assert!(e.agrees_with(PI * 0.25, 3.0), "{e:?}");
    }

    #[test]
    fn boundary_lens() {
        let phi = Quadratic::isotropic(2);
        let omega = AxisEllipsoid::unit_ball(2);
        let v = SectionView::new(&phi, &omega, &[1.0, 0.0], 0.01).unwrap();
        let e = section_volume(&v, 200_000, 11).unwrap();
        let truth = lens_area(1.0, 0.1, 1.0);
        assert!((truth - 0.015373).abs() < 2e-6);
        assert!(e.agrees_with(truth, 3.0), "{e:?} vs {truth}");
    }

    #[test]
    fn whole_domain() {
        let phi = Quadratic::isotropic(2);
        let omega = AxisEllipsoid::unit_ball(2);
        let v = SectionView::new(&phi, &omega, &[0.3, -0.2], 4.5).unwrap();
        let e = section_volume(&v, 100_000, 3).unwrap();
        assert!(e.agrees_with(PI, 3.0), "{e:?}");
    }

    #[test]
    fn interval_is_exact() {
        let phi = Quadratic::isotropic(1);
        let omega = AxisEllipsoid::unit_ball(1);
        let v = SectionView::new(&phi, &omega, &[0.0], 0.04).unwrap();
        let e = section_volume(&v, 1000, 0).unwrap();
        assert!(e.exact && (e.volume - 0.4).abs() < 1e-12);
        let v = SectionView::new(&phi, &omega, &[0.9], 0.04).unwrap();
        assert!((section_volume(&v, 1000, 0).unwrap().volume - 0.3).abs() < 1e-12);
    }

    #[test]
    fn small_budget_rejected() {
        let phi = Quadratic::isotropic(1);
        let omega = AxisEllipsoid::unit_ball(1);
        let v = SectionView::new(&phi, &omega, &[0.0], 0.04).unwrap();
        assert!(section_volume(&v, 999, 0).is_err());
    }

    #[test]
    fn hit_count_is_thread_independent() {
        let b = BoundingBox::new(vec![-1.0, -1.0], vec![1.0, 1.0]);
        let pred = |p: &[f64]| p[0] * p[0] + p[1] * p[1] < 1.0;
        let a = count_hits(&b, 50_000, 5, pred);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let c = pool.install(|| count_hits(&b, 50_000, 5, pred));
        assert_eq!(a, c);
    }
}
