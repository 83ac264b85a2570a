//! Maximal interior height `h̄(x) = inf_{z∈∂Ω} b(z,x)` and its minimizer.

use serde::Serialize;

use super::explore::golden_min;
use crate::directions::{param_dim, param_grid, wrap_params};
use crate::error::{Error, Result};
use crate::point::Point;
use crate::potentials::{ConvexDomain, Potential, Tangent};

/// Default number of coarse boundary samples in two dimensions.
pub const DEFAULT_SWEEP: usize = 1 << 12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InteriorHeight {
    pub height: f64,
    /// Boundary point attaining the infimum.
    pub argmin: Point,
    /// Boundary parameters of `argmin`.
    pub params: Vec<f64>,
}

fn sweep_size(n: usize, two_d: usize) -> usize {
    match n {
        1 => 2,
        2 => two_d,
        // comparable spacing per polar parameter
        _ => two_d * 4,
    }
}

/// Minimizes `b(·, x)` over `∂Ω` for any `x ∈ Ω̄`: a coarse parameter sweep
/// (lowest index wins ties) followed by golden-section refinement around
/// the best sample.
pub fn boundary_argmin(
    phi: &dyn Potential,
    omega: &dyn ConvexDomain,
    x: &[f64],
    sweep: usize,
) -> Result<InteriorHeight> {
    let n = omega.dim();
    if x.len() != n {
        return Err(Error::Dimension { expected: n, got: x.len() });
    }
    let tan = Tangent::checked(phi, x)?;
    let f = |p: &[f64]| tan.gap(omega.boundary_point(p).coords());
    let grid = param_grid(n, sweep_size(n, sweep));
    let (mut best, mut best_v) = (0usize, f64::INFINITY);
    for (i, p) in grid.iter().enumerate() {
        let v = f(p);
        if v < best_v {
            best = i;
            best_v = v;
        }
    }
    if !best_v.is_finite() {
        return Err(Error::Evaluation { what: "boundary gap".into(), at: x.to_vec() });
    }
    let mut params = grid[best].clone();
    if n >= 2 {
        let pd = param_dim(n);
        let spacing = if n == 2 { 1.0 / grid.len() as f64 } else { (grid.len() as f64).powf(-1.0 / pd as f64) };
        let mut width = spacing;
        for _round in 0..if n == 2 { 1 } else { 40 } {
            let before = best_v;
            for k in 0..pd {
                let center = params[k];
                let mut q = params.clone();
                let (arg, v) = golden_min(center - width, center + width, 80, |s| {
                    q[k] = s;
                    let mut w = q.clone();
                    wrap_params(n, &mut w);
                    f(&w)
                });
                if v < best_v {
                    best_v = v;
                    params[k] = arg;
                }
            }
            wrap_params(n, &mut params);
            if before - best_v <= 1e-15 * best_v.abs().max(1e-300) {
                width *= 0.5;
                if width < 1e-13 {
                    break;
                }
            }
        }
    }
    let argmin = omega.boundary_point(&params);
    Ok(InteriorHeight { height: best_v.max(0.0), argmin, params })
}

/// `h̄(x)` for `x` in the open domain.
pub fn max_interior_height(phi: &dyn Potential, omega: &dyn ConvexDomain, x: &[f64]) -> Result<InteriorHeight> {
    if !omega.contains_open(x) {
        return Err(Error::Domain { point: x.to_vec(), reason: "maximal interior height needs an interior point".into() });
    }
    boundary_argmin(phi, omega, x, DEFAULT_SWEEP)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::{AxisEllipsoid, Quadratic};

    #[test]
    fn ball_examples() {
        let phi = Quadratic::isotropic(2);
        let omega = AxisEllipsoid::unit_ball(2);
        let h = max_interior_height(&phi, &omega, &[0.0, 0.0]).unwrap();
        assert!((h.height - 1.0).abs() < 1e-12);
        let h = max_interior_height(&phi, &omega, &[0.5, 0.0]).unwrap();
        assert!((h.height - 0.25).abs() < 1e-12);
        assert!((h.argmin[0] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn off_axis_refinement() {
        let phi = Quadratic::isotropic(2);
        let omega = AxisEllipsoid::unit_ball(2);
        let a = 0.123_456_f64;
        let x = [0.7 * a.cos(), 0.7 * a.sin()];
        let h = max_interior_height(&phi, &omega, &x).unwrap();
        assert!((h.height - 0.09).abs() < 1e-12, "{}", h.height);
    }

    #[test]
    fn interval_example() {
        let phi = Quadratic::isotropic(1);
        let omega = AxisEllipsoid::unit_ball(1);
        let h = max_interior_height(&phi, &omega, &[0.9]).unwrap();
        assert!((h.height - 0.01).abs() < 1e-12);
        assert_eq!(h.argmin.coords(), &[1.0]);
    }

    #[test]
    fn ellipse_minimizer() {
        // b(z,0) = z1² + 4 z2² equals 1 on the whole boundary of the ellipse
        let phi = Quadratic::diagonal("e", &[1.0, 4.0]);
        let omega = AxisEllipsoid::new(vec![0.0, 0.0], vec![1.0, 0.5]).unwrap();
        let h = max_interior_height(&phi, &omega, &[0.0, 0.0]).unwrap();
        assert!((h.height - 1.0).abs() < 1e-12);
    }

    #[test]
    fn three_dimensions() {
        let phi = Quadratic::isotropic(3);
        let omega = AxisEllipsoid::unit_ball(3);
        let h = max_interior_height(&phi, &omega, &[0.1, 0.2, 0.3]).unwrap();
        let r = (0.14f64).sqrt();
        assert!((h.height - (1.0 - r).powi(2)).abs() < 1e-9, "{}", h.height);
    }

    #[test]
    fn boundary_point_rejected() {
        let phi = Quadratic::isotropic(2);
        let omega = AxisEllipsoid::unit_ball(2);
        assert!(matches!(max_interior_height(&phi, &omega, &[1.0, 0.0]), Err(Error::Domain { .. })));
    }
}
