use std::fmt;
use std::sync::Arc;

use crate::directions::{direction, param_dim};
use crate::error::{Error, Result};
use crate::point::{dist_sq, lerp, norm_sq, unit_ball_volume, BoundingBox, Point};
use crate::sampling::QmcStream;

/// Relative slack on the defining inequality of analytic domains.
/// Boundary points produced by a parametrization carry rounding of this
/// order and must still count as members of the closure.
pub const BOUNDARY_TOL: f64 = 1e-12;

/// A bounded convex body `Ω ⊂ R^n`.
pub trait ConvexDomain: Send + Sync {
    fn name(&self) -> String;
    fn dim(&self) -> usize;

    /// Radius `ρ` of the interior/tangent balls, with `Ω ⊂ B_{1/ρ}`.
    fn inner_radius(&self) -> f64;

    fn contains_closed(&self, y: &[f64]) -> bool;
    fn contains_open(&self, y: &[f64]) -> bool;
    fn bounding_box(&self) -> BoundingBox;

    /// A point at distance at least `ρ` from `∂Ω`.
    fn inner_point(&self) -> Point;

    /// Point of `∂Ω` for parameters in `[0,1)^{param_dim}`.
    fn boundary_point(&self, params: &[f64]) -> Point;

    /// Unit inner normal at a boundary point, when known analytically.
    fn inner_normal(&self, _z: &[f64]) -> Option<Vec<f64>> {
        None
    }

    /// Nonnegative defect measuring how far `y` is from `∂Ω`; zero on the
    /// boundary.
    fn boundary_residual(&self, y: &[f64]) -> f64;

    /// `|Ω|` when known in closed form.
    fn volume(&self) -> Option<f64> {
        None
    }

    /// Whether the closed ball `B_r(c)` lies in `Ω`, when decidable.
    fn contains_ball(&self, _c: &[f64], _r: f64) -> Option<bool> {
        None
    }

    fn is_analytic(&self) -> bool {
        false
    }
}

impl fmt::Debug for dyn ConvexDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ConvexDomain({})", self.name())
    }
}

pub fn boundary_param_dim(omega: &dyn ConvexDomain) -> usize {
    param_dim(omega.dim())
}

/// Distance along the ray `c + r u` (r ≥ 0) at which the closure is left.
/// Returns `(r_in, r_out)` with `c + r_in u ∈ Ω̄` and `c + r_out u ∉ Ω̄`.
pub fn ray_exit(omega: &dyn ConvexDomain, c: &[f64], u: &[f64]) -> (f64, f64) {
    let mut hi = omega.bounding_box().diameter() * 2.0 + 1.0;
    let mut lo = 0.0;
    let mut p = vec![0.0; c.len()];
    let at = |r: f64, p: &mut Vec<f64>| {
        for i in 0..c.len() {
            p[i] = c[i] + r * u[i];
        }
        omega.contains_closed(p)
    };
    if !at(0.0, &mut p) {
        return (0.0, 0.0);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if at(mid, &mut p) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

/// Pulls a point back into `Ω̄` along the segment towards the inner point.
pub fn retract(omega: &dyn ConvexDomain, p: &[f64]) -> Vec<f64> {
    if omega.contains_closed(p) {
        return p.to_vec();
    }
    let c = omega.inner_point();
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if omega.contains_closed(&lerp(&c, p, mid)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lerp(&c, p, lo)
}

/// The first `count` points of `Ω̄` in a stream over the bounding box
/// (at most `64·count` stream points are examined).
pub fn sample_closed(omega: &dyn ConvexDomain, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let n = omega.dim();
    let bbox = omega.bounding_box();
    let s = QmcStream::new(n, seed);
    let (mut u, mut p) = (vec![0.0; n], vec![0.0; n]);
    let mut out = Vec::with_capacity(count);
    for i in 0..64 * count as u64 {
        if out.len() == count {
            break;
        }
        s.fill(i, &mut u);
        bbox.map_unit(&u, &mut p);
        if omega.contains_closed(&p) {
            out.push(p.clone());
        }
    }
    out
}

/// Axis-aligned solid ellipsoid `{ Σ ((y_i − c_i)/a_i)² < 1 }`. Balls and
/// intervals are special cases.
#[derive(Clone, Debug)]
pub struct AxisEllipsoid {
    center: Vec<f64>,
    semi_axes: Vec<f64>,
}

impl AxisEllipsoid {
    pub fn new(center: Vec<f64>, semi_axes: Vec<f64>) -> Result<Self> {
        if center.len() != semi_axes.len() || center.is_empty() {
            return Err(Error::InvalidInput("center and semi-axes must have equal positive length".into()));
        }
        if semi_axes.iter().any(|a| !(*a > 0.0) || !a.is_finite()) {
            return Err(Error::InvalidInput(format!("semi-axes must be positive, got {semi_axes:?}")));
        }
        Ok(AxisEllipsoid { center, semi_axes })
    }

    pub fn unit_ball(n: usize) -> Self {
        AxisEllipsoid { center: vec![0.0; n], semi_axes: vec![1.0; n] }
    }

    pub fn semi_axes(&self) -> &[f64] {
        &self.semi_axes
    }

    fn form(&self, y: &[f64]) -> f64 {
        y.iter()
            .zip(self.center.iter().zip(&self.semi_axes))
            .map(|(v, (c, a))| ((v - c) / a).powi(2))
            .sum()
    }

    fn a_min(&self) -> f64 {
        self.semi_axes.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    fn a_max(&self) -> f64 {
        self.semi_axes.iter().cloned().fold(0.0, f64::max)
    }
}

impl ConvexDomain for AxisEllipsoid {
    fn name(&self) -> String {
        if self.semi_axes.iter().all(|a| *a == self.semi_axes[0]) {
            format!("ball(r={}, n={})", self.semi_axes[0], self.dim())
        } else {
            format!("ellipsoid(semi_axes={:?})", self.semi_axes)
        }
    }

    fn dim(&self) -> usize {
        self.center.len()
    }

    /// Smallest radius of curvature `a_min²/a_max`, capped so that
    /// `Ω ⊂ B_{1/ρ}` about the origin.
    fn inner_radius(&self) -> f64 {
        let curv = self.a_min() * self.a_min() / self.a_max();
        let reach = norm_sq(&self.center).sqrt() + self.a_max();
        curv.min(1.0 / reach)
    }

    fn contains_closed(&self, y: &[f64]) -> bool {
        self.form(y) <= 1.0 + BOUNDARY_TOL
    }

    fn contains_open(&self, y: &[f64]) -> bool {
        self.form(y) < 1.0 - BOUNDARY_TOL
    }

    fn bounding_box(&self) -> BoundingBox {
        BoundingBox::new(
            self.center.iter().zip(&self.semi_axes).map(|(c, a)| c - a).collect(),
            self.center.iter().zip(&self.semi_axes).map(|(c, a)| c + a).collect(),
        )
    }

    fn inner_point(&self) -> Point {
        Point::new(self.center.clone())
    }

    fn boundary_point(&self, params: &[f64]) -> Point {
        let d = direction(self.dim(), params);
        Point::new(
            d.iter()
                .zip(self.center.iter().zip(&self.semi_axes))
                .map(|(u, (c, a))| c + a * u)
                .collect(),
        )
    }

    fn inner_normal(&self, z: &[f64]) -> Option<Vec<f64>> {
        let mut g: Vec<f64> = z
            .iter()
            .zip(self.center.iter().zip(&self.semi_axes))
            .map(|(v, (c, a))| -(v - c) / (a * a))
            .collect();
        let len = crate::point::normalize(&mut g);
        (len > 0.0).then_some(g)
    }

    fn boundary_residual(&self, y: &[f64]) -> f64 {
        (self.form(y) - 1.0).abs()
    }

    fn volume(&self) -> Option<f64> {
        Some(unit_ball_volume(self.dim()) * self.semi_axes.iter().product::<f64>())
    }

    fn contains_ball(&self, c: &[f64], r: f64) -> Option<bool> {
        let off = dist_sq(c, &self.center).sqrt();
        let is_ball = self.semi_axes.iter().all(|a| *a == self.semi_axes[0]);
        if off + r <= self.a_min() {
            Some(true)
        } else if is_ball {
            Some(false)
        } else {
            None
        }
    }

    fn is_analytic(&self) -> bool {
        true
    }
}

type MemberFn = dyn Fn(&[f64]) -> bool + Send + Sync;

/// Convex domain given by a membership predicate. The boundary is located
/// by bisection along rays from the inner point, and tangency of interior
/// balls can only be certified by sampling.
#[derive(Clone)]
pub struct FnDomain {
    name: String,
    dim: usize,
    member: Arc<MemberFn>,
    bbox: BoundingBox,
    inner: Point,
    rho: f64,
    volume: Option<f64>,
}

impl FnDomain {
    pub fn new(
        name: impl Into<String>,
        bbox: BoundingBox,
        inner: Point,
        rho: f64,
        member: impl Fn(&[f64]) -> bool + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(rho > 0.0) {
            return Err(Error::InvalidInput(format!("inner radius must be positive, got {rho}")));
        }
        if !member(&inner) {
            return Err(Error::InvalidInput("inner point is not a member".into()));
        }
        Ok(FnDomain {
            name: name.into(),
            dim: bbox.dim(),
            member: Arc::new(member),
            bbox,
            inner,
            rho,
            volume: None,
        })
    }

    pub fn with_volume(mut self, v: f64) -> Self {
        self.volume = Some(v);
        self
    }
}

impl ConvexDomain for FnDomain {
    fn name(&self) -> String {
        self.name.clone()
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn inner_radius(&self) -> f64 {
        self.rho
    }
    fn contains_closed(&self, y: &[f64]) -> bool {
        (self.member)(y)
    }
    fn contains_open(&self, y: &[f64]) -> bool {
        // a point is interior when a small cross of neighbours stays inside
        let h = 1e-9 * self.bbox.diameter();
        if !(self.member)(y) {
            return false;
        }
        let mut p = y.to_vec();
        for i in 0..self.dim {
            for s in [-h, h] {
                p[i] = y[i] + s;
                if !(self.member)(&p) {
                    return false;
                }
            }
            p[i] = y[i];
        }
        true
    }
    fn bounding_box(&self) -> BoundingBox {
        self.bbox.clone()
    }
    fn inner_point(&self) -> Point {
        self.inner.clone()
    }
    fn boundary_point(&self, params: &[f64]) -> Point {
        let u = direction(self.dim, params);
        let (r, _) = ray_exit(self, &self.inner, &u);
        self.inner.offset(&u, r)
    }
    fn boundary_residual(&self, y: &[f64]) -> f64 {
        if self.contains_closed(y) && !self.contains_open(y) {
            0.0
        } else {
            1.0
        }
    }
    fn volume(&self) -> Option<f64> {
        self.volume
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_membership() {
        let b = AxisEllipsoid::unit_ball(2);
        assert!(b.contains_closed(&[1.0, 0.0]));
        assert!(!b.contains_open(&[1.0, 0.0]));
        assert!(b.contains_open(&[0.5, 0.5]));
        assert!(!b.contains_closed(&[2.0, 0.0]));
        assert_eq!(b.inner_radius(), 1.0);
    }

    #[test]
    fn ellipse_radius() {
        let e = AxisEllipsoid::new(vec![0.0, 0.0], vec![1.0, 0.5]).unwrap();
        assert!((e.inner_radius() - 0.25).abs() < 1e-15);
        let z = e.boundary_point(&[0.1]);
        assert!(e.boundary_residual(&z) < 1e-14);
        let nu = e.inner_normal(&[1.0, 0.0]).unwrap();
        assert!((nu[0] + 1.0).abs() < 1e-15 && nu[1].abs() < 1e-15);
    }

    #[test]
    fn interval_boundary() {
        let i = AxisEllipsoid::unit_ball(1);
        assert_eq!(i.boundary_point(&[0.1]).coords(), &[-1.0]);
        assert_eq!(i.boundary_point(&[0.9]).coords(), &[1.0]);
        assert_eq!(i.volume(), Some(2.0));
    }

    #[test]
    fn ray_and_retract() {
        let b = AxisEllipsoid::unit_ball(2);
        let (lo, hi) = ray_exit(&b, &[0.0, 0.0], &[1.0, 0.0]);
        assert!(lo <= 1.0 + 1e-12 && hi > lo && hi - lo < 1e-14);
        let p = retract(&b, &[3.0, 4.0]);
        assert!(b.contains_closed(&p));
        assert!((norm_sq(&p) - 1.0).abs() <= 2.0 * BOUNDARY_TOL);
    }

    #[test]
    fn fn_domain_boundary() {
        let sq = FnDomain::new(
            "square",
            BoundingBox::new(vec![-1.0, -1.0], vec![1.0, 1.0]),
            Point::zeros(2),
            1.0,
            |y: &[f64]| y.iter().all(|c| c.abs() <= 1.0),
        )
        .unwrap();
        let z = sq.boundary_point(&[0.0]);
        assert!((z[0] - 1.0).abs() < 1e-12);
        assert_eq!(sq.boundary_residual(&z), 0.0);
        assert!(sq.contains_open(&[0.5, 0.5]));
    }
}
