//! Ellipsoidal normalization of boundary sections.
//!
//! Coordinates are moved rigidly so that `x₀ = 0` with inner normal `e_n`.
//! The ellipsoid `E_h` is the minimum-volume ellipsoid of the section
//! points together with their reflections through `x₀`, rescaled to volume
//! `ω_n h^{n/2}`. Writing its shape as `Q = AᵀA / h` with `A` upper
//! triangular, the sliding form `A y = y − τ y_n` holds exactly when the
//! tangential block of `A` is the identity and `A_nn = 1`.

use nalgebra::DMatrix;
use serde::Serialize;

use super::ellipsoid::{john_ellipsoid, Ellipsoid};
use super::explore::SectionView;
use crate::directions::direction_grid;
use crate::error::{Error, Result};
use crate::point::{unit_ball_volume, Point};
use crate::potentials::{ray_exit, ConvexDomain, Potential};

/// Largest admissible `boundary_residual` of the base point.
pub const BOUNDARY_POINT_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocalizationReport {
    pub base: Point,
    pub height: f64,
    /// Largest `k` with `k E_h ∩ Ω̄ ⊂ S(h)`; `None` when every ray of
    /// `S(h)` reaches `∂Ω`.
    pub k_lo: Option<f64>,
    /// Largest `k` with `S(h) ⊂ k⁻¹ E_h`.
    pub k_hi: f64,
    pub slide_residual: f64,
    pub tau: Vec<f64>,
    /// `|τ| / |log h|`, reported against the logarithmic bound.
    pub tau_over_log_h: f64,
    /// `E_h` in normalized coordinates.
    pub ellipsoid: Ellipsoid,
}

/// Reflection sending the unit vector `nu` to `e_n` (identity if equal).
fn normalizing_reflection(nu: &[f64]) -> DMatrix<f64> {
    let n = nu.len();
    let mut v = nu.to_vec();
    v[n - 1] -= 1.0;
    let vv: f64 = v.iter().map(|a| a * a).sum();
    let mut r = DMatrix::identity(n, n);
    if vv > 1e-30 {
        for i in 0..n {
            for j in 0..n {
                r[(i, j)] -= 2.0 * v[i] * v[j] / vv;
            }
        }
    }
    r
}

fn apply(r: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
    let n = v.len();
    (0..n).map(|i| (0..n).map(|j| r[(i, j)] * v[j]).sum()).collect()
}

pub fn localization_check(
    phi: &dyn Potential,
    omega: &dyn ConvexDomain,
    x0: &[f64],
    h: f64,
    budget: usize,
    directions: usize,
    seed: u64,
) -> Result<LocalizationReport> {
    let n = omega.dim();
    if x0.len() != n {
        return Err(Error::Dimension { expected: n, got: x0.len() });
    }
    let res = omega.boundary_residual(x0);
    if !(res <= BOUNDARY_POINT_TOL) {
        return Err(Error::Domain { point: x0.to_vec(), reason: format!("not a boundary point (residual {res:e})") });
    }
    let nu = omega
        .inner_normal(x0)
        .ok_or_else(|| Error::Domain { point: x0.to_vec(), reason: "no inner normal available".into() })?;
    let view = SectionView::new(phi, omega, x0, h)?;
    let r = normalizing_reflection(&nu);
    let to_local = |y: &[f64]| {
        let d: Vec<f64> = y.iter().zip(x0).map(|(a, b)| a - b).collect();
        apply(&r, &d)
    };

    let dirs = direction_grid(n, directions);
    let radii: Vec<f64> = dirs.iter().map(|u| view.ray(u).0).collect();
    let mut pts = Vec::new();
    for (u, rs) in dirs.iter().zip(&radii) {
        if *rs > 0.0 {
            pts.push(to_local(&view.ray_point(u, *rs)));
        }
    }
    for y in view.members(budget, 4096, seed) {
        pts.push(to_local(&y));
    }
    let mirrored: Vec<Vec<f64>> = pts.iter().map(|p| p.iter().map(|v| -v).collect()).collect();
    pts.extend(mirrored);
    let mvee = john_ellipsoid(&pts)?;
    let centered = Ellipsoid::new(Point::zeros(n), mvee.matrix())?;
    let target = unit_ball_volume(n) * h.powf(n as f64 / 2.0);
    let e = centered.with_volume(target);

    let mut k_lo: Option<f64> = None;
    let mut inv_k_hi: f64 = 0.0;
    for (u, rs) in dirs.iter().zip(&radii) {
        let re = e.radial(&apply(&r, u));
        inv_k_hi = inv_k_hi.max(rs / re);
        let (r_omega, _) = ray_exit(omega, x0, u);
        if *rs < r_omega * (1.0 - 1e-9) {
            let k = rs / re;
            k_lo = Some(k_lo.map_or(k, |m| m.min(k)));
        }
    }

    let p = e.matrix() * h;
    let a = p
        .clone()
        .cholesky()
        .ok_or(Error::RankDeficient { rank: 0, dim: n })?
        .l()
        .transpose();
    let mut residual = (a[(n - 1, n - 1)] - 1.0).abs();
    for i in 0..n - 1 {
        for j in 0..n - 1 {
            let want = if i == j { 1.0 } else { 0.0 };
            residual = residual.max((a[(i, j)] - want).abs());
        }
    }
    let tau: Vec<f64> = (0..n - 1).map(|i| -a[(i, n - 1)]).collect();
    let tau_norm = tau.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(LocalizationReport {
        base: Point::from(x0),
        height: h,
        k_lo,
        k_hi: 1.0 / inv_k_hi,
        slide_residual: residual,
        tau,
        tau_over_log_h: tau_norm / h.ln().abs(),
        ellipsoid: e,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::{AxisEllipsoid, Quadratic};

    #[test]
    fn ball_lens_is_nearly_a_disc() {
        let phi = Quadratic::isotropic(2);
        let omega = AxisEllipsoid::unit_ball(2);
        for h in [1e-3, 1e-2] {
            let rep = localization_check(&phi, &omega, &[1.0, 0.0], h, 20_000, 512, 1).unwrap();
            let ax = rep.ellipsoid.semi_axes();
            assert!((ax[1] / h.sqrt() - 1.0).abs() < 0.1, "{ax:?}");
            assert!(rep.k_lo.unwrap() > 0.5 && rep.k_hi > 0.5, "{rep:?}");
            assert!(rep.slide_residual < 0.1);
        }
    }

    #[test]
    fn ellipse_sliding_point() {
        let phi = Quadratic::diagonal("e", &[1.0, 4.0]);
        let omega = AxisEllipsoid::new(vec![0.0, 0.0], vec![1.0, 0.5]).unwrap();
        // tan² s = 1/2: the tangential metric matches the volume scaling
        let s = (0.5f64).sqrt().atan();
        let x0 = [s.cos(), 0.5 * s.sin()];
        for h in [1e-3, 1e-2] {
            let rep = localization_check(&phi, &omega, &x0, h, 20_000, 512, 2).unwrap();
            assert!(rep.slide_residual <= 0.1, "h={h} {rep:?}");
        }
        // on an axis point the tangential block is off by √2
        let rep = localization_check(&phi, &omega, &[1.0, 0.0], 1e-3, 20_000, 512, 2).unwrap();
        assert!((rep.slide_residual - (2f64.sqrt() - 1.0)).abs() < 0.05);
    }

    #[test]
    fn interval() {
        let phi = Quadratic::isotropic(1);
        let omega = AxisEllipsoid::unit_ball(1);
        let h = 0.01;
        let rep = localization_check(&phi, &omega, &[1.0], h, 1000, 2, 0).unwrap();
        assert!((rep.ellipsoid.volume - 2.0 * h.sqrt()).abs() < 1e-9);
        assert!((rep.k_lo.unwrap() - 1.0).abs() < 1e-9 && (rep.k_hi - 1.0).abs() < 1e-9);
        assert!(rep.slide_residual < 1e-9);
    }

    #[test]
    fn interior_base_rejected() {
        let phi = Quadratic::isotropic(2);
        let omega = AxisEllipsoid::unit_ball(2);
        assert!(matches!(
            localization_check(&phi, &omega, &[0.5, 0.0], 0.01, 1000, 64, 0),
            Err(Error::Domain { .. })
        ));
    }
}
