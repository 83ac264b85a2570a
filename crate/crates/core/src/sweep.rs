//! Stratified `(center, height)` sweeps.
//!
//! For each height `t` centers are drawn from three strata: interior
//! (`h̄(x) > 2t`), near-boundary (`0 < h̄(x) ≤ 2t`) and boundary (`x ∈ ∂Ω`).
//! Construction is deterministic given the seed.

use serde::{Deserialize, Serialize};

use crate::directions::param_dim;
use crate::error::{Error, Result};
use crate::point::{lerp, Point};
use crate::potentials::{ConvexDomain, Potential};
use crate::sampling::{derive_seed, QmcStream};
use crate::sections::boundary_argmin;

/// Coarse boundary sweep used to classify candidate centers.
const CLASSIFY_SWEEP: usize = 512;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stratum {
    Interior,
    NearBoundary,
    Boundary,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepEntry {
    pub center: Point,
    pub height: f64,
    pub stratum: Stratum,
    pub interior_height: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub interior: usize,
    pub near_boundary: usize,
    pub boundary: usize,
    pub heights: Vec<f64>,
}

impl SweepSpec {
    pub fn new(interior: usize, near_boundary: usize, boundary: usize, heights: Vec<f64>) -> Self {
        SweepSpec { interior, near_boundary, boundary, heights }
    }
}

fn hbar(phi: &dyn Potential, omega: &dyn ConvexDomain, x: &[f64]) -> Result<f64> {
    Ok(boundary_argmin(phi, omega, x, CLASSIFY_SWEEP)?.height)
}

pub fn stratified_sweep(
    phi: &dyn Potential,
    omega: &dyn ConvexDomain,
    spec: &SweepSpec,
    seed: u64,
) -> Result<Vec<SweepEntry>> {
    if spec.heights.iter().any(|t| !(*t > 0.0)) {
        return Err(Error::InvalidInput("sweep heights must be positive".into()));
    }
    let n = omega.dim();
    let pd = param_dim(n);
    let bbox = omega.bounding_box();
    let c = omega.inner_point();
    let mut out = Vec::new();
    for (ti, &t) in spec.heights.iter().enumerate() {
        let ti = ti as u64;
        // interior: rejection from the bounding box
        let s = QmcStream::new(n, derive_seed(seed, &[ti, 1]));
        let mut p = vec![0.0; n];
        let mut found = 0;
        for i in 0..(64 * spec.interior as u64) {
            if found == spec.interior {
                break;
            }
            bbox.map_unit(&s.point(i), &mut p);
            if !omega.contains_open(&p) {
                continue;
            }
            let h = hbar(phi, omega, &p)?;
            if h > 2.0 * t {
                out.push(SweepEntry { center: Point::from(&p[..]), height: t, stratum: Stratum::Interior, interior_height: h });
                found += 1;
            }
        }
        // near-boundary: pull boundary points inward by halving fractions
        let s = QmcStream::new(pd + 1, derive_seed(seed, &[ti, 2]));
        for k in 0..spec.near_boundary as u64 {
            let q = s.point(k);
            let z = omega.boundary_point(&q[..pd]);
            let jitter = 0.5 + 0.5 * q[pd];
            for j in 1..60 {
                let x = lerp(&z, &c, jitter * 0.5f64.powi(j));
                if !omega.contains_open(&x) {
                    break;
                }
                let h = hbar(phi, omega, &x)?;
                if h > 0.0 && h <= 2.0 * t {
                    out.push(SweepEntry { center: Point::new(x), height: t, stratum: Stratum::NearBoundary, interior_height: h });
                    break;
                }
            }
        }
        let s = QmcStream::new(pd, derive_seed(seed, &[ti, 3]));
        for k in 0..spec.boundary as u64 {
            let z = omega.boundary_point(&s.point(k));
            out.push(SweepEntry { center: z, height: t, stratum: Stratum::Boundary, interior_height: 0.0 });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::{AxisEllipsoid, Quadratic};

    #[test]
    fn strata_are_consistent() {
        let phi = Quadratic::isotropic(2);
        let omega = AxisEllipsoid::unit_ball(2);
        let spec = SweepSpec::new(4, 4, 4, vec![0.01, 0.1]);
        let sw = stratified_sweep(&phi, &omega, &spec, 9).unwrap();
        assert_eq!(sw.len(), 24);
        for e in &sw {
            let r = e.center.iter().map(|v| v * v).sum::<f64>().sqrt();
            let h = (1.0 - r).powi(2);
            match e.stratum {
                Stratum::Interior => assert!(h > 2.0 * e.height),
                Stratum::NearBoundary => assert!(h <= 2.0 * e.height * (1.0 + 1e-9) && r < 1.0),
                Stratum::Boundary => assert!((r - 1.0).abs() < 1e-12),
            }
        }
        assert_eq!(sw, stratified_sweep(&phi, &omega, &spec, 9).unwrap());
    }

    #[test]
    fn interval_sweep() {
        let phi = Quadratic::isotropic(1);
        let omega = AxisEllipsoid::unit_ball(1);
        let sw = stratified_sweep(&phi, &omega, &SweepSpec::new(2, 2, 2, vec![0.01]), 1).unwrap();
        assert_eq!(sw.len(), 6);
    }
}
