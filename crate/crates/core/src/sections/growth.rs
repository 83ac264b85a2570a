//! Volume growth `C₁ t^{n/2} ≤ |S(x,t)| ≤ C₂ t^{n/2}` across centers and
//! heights, with a log-log exponent fit per center.

use serde::Serialize;

use super::explore::SectionView;
use super::volume::section_volume;
use crate::error::{Error, Result};
use crate::point::Point;
use crate::potentials::{ConvexDomain, Potential};
use crate::sampling::derive_seed;
use crate::stats::fit_line;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthEntry {
    pub center: Point,
    pub height: f64,
    pub volume: f64,
    pub stderr: f64,
    /// `|S(x,t)| / t^{n/2}`.
    pub ratio: f64,
    pub degenerate: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CenterFit {
    pub center: Point,
    pub exponent: Option<f64>,
    pub r_squared: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthReport {
    pub entries: Vec<GrowthEntry>,
    pub c1_emp: f64,
    pub c2_emp: f64,
    pub fits: Vec<CenterFit>,
    pub expected_exponent: f64,
    pub height_range: (f64, f64),
}

impl GrowthReport {
    /// Largest deviation of a fitted exponent from `n/2`.
    pub fn max_exponent_error(&self) -> f64 {
        self.fits
            .iter()
            .filter_map(|f| f.exponent)
            .map(|e| (e - self.expected_exponent).abs())
            .fold(0.0, f64::max)
    }
}

pub fn check_volume_growth(
    phi: &dyn Potential,
    omega: &dyn ConvexDomain,
    centers: &[Point],
    heights: &[f64],
    budget: usize,
    seed: u64,
) -> Result<GrowthReport> {
    if centers.is_empty() || heights.is_empty() {
        return Err(Error::InvalidInput("volume growth needs centers and heights".into()));
    }
    let n = omega.dim();
    let half = n as f64 / 2.0;
    let mut entries = Vec::new();
    let mut fits = Vec::new();
    for (ci, x) in centers.iter().enumerate() {
        let base = SectionView::new(phi, omega, x, heights[0])?;
        let (mut lx, mut ly) = (Vec::new(), Vec::new());
        for &t in heights {
            let v = base.with_height(t);
            let e = section_volume(&v, budget, derive_seed(seed, &[ci as u64]))?;
            let ratio = e.volume / t.powf(half);
            if !e.degenerate {
                lx.push(t.ln());
                ly.push(e.volume.ln());
            }
            entries.push(GrowthEntry {
                center: x.clone(),
                height: t,
                volume: e.volume,
                stderr: e.stderr,
                ratio,
                degenerate: e.degenerate,
            });
        }
        let fit = fit_line(&lx, &ly);
        fits.push(CenterFit {
            center: x.clone(),
            exponent: fit.map(|f| f.slope),
            r_squared: fit.map(|f| f.r_squared),
        });
    }
    let live = entries.iter().filter(|e| !e.degenerate);
    let c1 = live.clone().map(|e| e.ratio).fold(f64::INFINITY, f64::min);
    let c2 = live.map(|e| e.ratio).fold(0.0, f64::max);
    let lo = heights.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = heights.iter().cloned().fold(0.0, f64::max);
    Ok(GrowthReport { entries, c1_emp: c1, c2_emp: c2, fits, expected_exponent: half, height_range: (lo, hi) })
}
