//! Interior/boundary dichotomy for doubled sections `S(x₀, 2t₀)`.

use serde::Serialize;

use super::explore::SectionView;
use super::interior::{boundary_argmin, DEFAULT_SWEEP};
use crate::error::Result;
use crate::point::Point;
use crate::potentials::{ConvexDomain, Potential, Tangent};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DichotomyTag {
    Interior,
    Boundary,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DichotomyResult {
    pub tag: DichotomyTag,
    pub center: Point,
    pub height: f64,
    /// `h̄(x₀)`, or 0 on the boundary.
    pub interior_height: f64,
    pub witness: Option<Point>,
    /// `sup_{y ∈ S(x₀,2t₀)} b(y,z) / t₀`.
    pub c_emp: Option<f64>,
}

/// Controls the climb for `c_emp`.
#[derive(Clone, Copy, Debug)]
pub struct DichotomyOptions {
    pub directions: usize,
    pub sweeps: usize,
}

impl Default for DichotomyOptions {
    fn default() -> Self {
        DichotomyOptions { directions: 256, sweeps: 200 }
    }
}

pub fn classify_dichotomy(
    phi: &dyn Potential,
    omega: &dyn ConvexDomain,
    x0: &[f64],
    t0: f64,
    opts: DichotomyOptions,
) -> Result<DichotomyResult> {
    let view = SectionView::new(phi, omega, x0, 2.0 * t0)?;
    let interior = omega.contains_open(x0);
    let (hbar, z) = if interior {
        let h = boundary_argmin(phi, omega, x0, DEFAULT_SWEEP)?;
        (h.height, h.argmin)
    } else {
        // on ∂Ω the boundary gap vanishes exactly at x₀
        (0.0, Point::from(x0))
    };
    if interior && 2.0 * t0 <= hbar {
        return Ok(DichotomyResult {
            tag: DichotomyTag::Interior,
            center: Point::from(x0),
            height: t0,
            interior_height: hbar,
            witness: None,
            c_emp: None,
        });
    }
    let tz = Tangent::checked(phi, &z)?;
    let (sup, _) = view.maximize_on_boundary(|y| tz.gap(y), opts.directions, opts.sweeps);
    Ok(DichotomyResult {
        tag: DichotomyTag::Boundary,
        center: Point::from(x0),
        height: t0,
        interior_height: hbar,
        witness: Some(z),
        c_emp: Some(sup / t0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::{AxisEllipsoid, Quadratic};

    /// Largest `|y − z|²` over the disc of radius `√0.5` about `(0.9, 0)`
    /// intersected with the unit disc, for `z = (1, 0)`: the far end of the
    /// small disc's diameter along the axis lies inside the unit disc.
    fn far_point_oracle() -> f64 {
        (0.5f64.sqrt() + 0.1).powi(2)
    }

    #[test]
    fn worked_examples() {
        let phi = Quadratic::isotropic(2);
        let omega = AxisEllipsoid::unit_ball(2);
        let r = classify_dichotomy(&phi, &omega, &[0.0, 0.0], 0.25, Default::default()).unwrap();
        assert_eq!(r.tag, DichotomyTag::Interior);
        let r = classify_dichotomy(&phi, &omega, &[0.9, 0.0], 0.25, Default::default()).unwrap();
        assert_eq!(r.tag, DichotomyTag::Boundary);
        let z = r.witness.unwrap();
        assert!((z[0] - 1.0).abs() < 1e-9 && z[1].abs() < 1e-6);
        let c = r.c_emp.unwrap();
        assert!((c - far_point_oracle() / 0.25).abs() < 1e-6, "{c}");
        assert!((c - 2.606).abs() < 0.02);
    }

    #[test]
    fn interval() {
        let phi = Quadratic::isotropic(1);
        let omega = AxisEllipsoid::unit_ball(1);
        let r = classify_dichotomy(&phi, &omega, &[0.0], 0.1, Default::default()).unwrap();
        assert_eq!(r.tag, DichotomyTag::Interior);
        // S(0.9, 0.2) = (0.9 − √0.2, 1]; farthest point from z = 1 is the left end
        let r = classify_dichotomy(&phi, &omega, &[0.9], 0.1, Default::default()).unwrap();
        assert_eq!(r.tag, DichotomyTag::Boundary);
        let truth = (0.1 + 0.2f64.sqrt()).powi(2) / 0.1;
        assert!((r.c_emp.unwrap() - truth).abs() < 1e-9);
    }

    #[test]
    fn boundary_center() {
        let phi = Quadratic::isotropic(2);
        let omega = AxisEllipsoid::unit_ball(2);
        let r = classify_dichotomy(&phi, &omega, &[0.0, 1.0], 0.01, Default::default()).unwrap();
        assert_eq!(r.tag, DichotomyTag::Boundary);
        // z = x₀, so c_emp = 2
        assert!((r.c_emp.unwrap() - 2.0).abs() < 1e-9);
    }
}
