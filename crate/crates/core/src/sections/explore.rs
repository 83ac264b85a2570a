//! Low-level access to a single section `S_φ(x,t)`: membership, exits
//! along rays, certified bounding boxes, member samples and hill-climbing
//! over its closure.
//!
//! Potentials are evaluated on the whole bounding box of `Ω`, not only on
//! `Ω̄`: bounding boxes are certified by minimizing the (convex) gap over
//! box faces.

use crate::directions::{direction, param_dim, param_grid, wrap_params};
use crate::error::{Error, Result};
use crate::point::BoundingBox;
use crate::potentials::{ConvexDomain, Potential, Tangent};
use crate::sampling::QmcStream;

const GOLDEN: f64 = 0.618_033_988_749_894_8;

/// Minimizes a convex function of one variable on `[a, b]`.
pub fn golden_min(mut a: f64, mut b: f64, iters: usize, mut f: impl FnMut(f64) -> f64) -> (f64, f64) {
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iters {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLDEN * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + GOLDEN * (b - a);
            fd = f(d);
        }
    }
    let (fa, fb) = (f(a), f(b));
    [(fc, c), (fd, d), (fa, a), (fb, b)]
        .into_iter()
        .min_by(|p, q| p.0.total_cmp(&q.0))
        .map(|(v, x)| (x, v))
        .unwrap()
}

/// Coordinate pattern search maximizing `f`, starting at `p` with step
/// `step`. Each sweep tries `±step` along every coordinate; the step halves
/// after a sweep without improvement. Returns the best value.
pub fn pattern_search(
    p: &mut Vec<f64>,
    mut step: f64,
    sweeps: usize,
    min_step: f64,
    mut f: impl FnMut(&mut Vec<f64>) -> f64,
) -> f64 {
    let mut best = f(p);
    let mut trial = p.clone();
    for _ in 0..sweeps {
        let mut improved = false;
        for k in 0..p.len() {
            for s in [step, -step] {
                trial.clone_from(p);
                trial[k] += s;
                let v = f(&mut trial);
                if v > best {
                    best = v;
                    p.clone_from(&trial);
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step *= 0.5;
            if step < min_step {
                break;
            }
        }
    }
    best
}

/// A section together with its cached supporting hyperplane.
pub struct SectionView<'a> {
    pub phi: &'a dyn Potential,
    pub omega: &'a dyn ConvexDomain,
    pub tangent: Tangent<'a>,
    pub height: f64,
    domain_box: BoundingBox,
    reach: f64,
}

impl<'a> SectionView<'a> {
    pub fn new(phi: &'a dyn Potential, omega: &'a dyn ConvexDomain, x: &[f64], t: f64) -> Result<Self> {
        if !(t > 0.0) {
            return Err(Error::InvalidHeight(t));
        }
        if x.len() != omega.dim() {
            return Err(Error::Dimension { expected: omega.dim(), got: x.len() });
        }
        if !omega.contains_closed(x) {
            return Err(Error::Domain { point: x.to_vec(), reason: "section center outside the closed domain".into() });
        }
        let tangent = Tangent::checked(phi, x)?;
        let domain_box = omega.bounding_box();
        let reach = domain_box.diameter() * 2.0 + 1.0;
        Ok(SectionView { phi, omega, tangent, height: t, domain_box, reach })
    }

    /// Same center, another height.
    pub fn with_height(&self, t: f64) -> SectionView<'a> {
        SectionView {
            phi: self.phi,
            omega: self.omega,
            tangent: self.tangent.clone(),
            height: t,
            domain_box: self.domain_box.clone(),
            reach: self.reach,
        }
    }

    pub fn center(&self) -> &[f64] {
        self.tangent.base()
    }

    pub fn dim(&self) -> usize {
        self.center().len()
    }

    #[inline]
    pub fn gap(&self, y: &[f64]) -> f64 {
        self.tangent.gap(y)
    }

    #[inline]
    pub fn contains(&self, y: &[f64]) -> bool {
        self.omega.contains_closed(y) && self.tangent.gap(y) < self.height
    }

    fn bisect(&self, u: &[f64], hi: f64, member: impl Fn(&[f64]) -> bool) -> (f64, f64) {
        let x = self.center();
        let mut p = x.to_vec();
        let (mut lo, mut hi) = (0.0, hi);
        let mut at = |r: f64| {
            for i in 0..x.len() {
                p[i] = x[i] + r * u[i];
            }
            member(&p)
        };
        if at(hi) {
            return (hi, f64::INFINITY);
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if at(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (lo, hi)
    }

    /// Exit radii of `S ∩ Ω̄` along `x + r u`: the point at `r_in` is a
    /// member, the point at `r_out` is not.
    pub fn ray(&self, u: &[f64]) -> (f64, f64) {
        self.bisect(u, self.reach, |p| self.contains(p))
    }

    /// Exit radii of the level set `{b(·,x) < t}` alone, ignoring `Ω`.
    pub fn level_ray(&self, u: &[f64], cap: f64) -> (f64, f64) {
        self.bisect(u, cap, |p| self.tangent.gap(p) < self.height)
    }

    pub fn ray_point(&self, u: &[f64], r: f64) -> Vec<f64> {
        self.center().iter().zip(u).map(|(a, b)| a + r * b).collect()
    }

    /// Points of `∂(S ∩ Ω̄)` (just inside) along a grid of directions.
    pub fn boundary_points(&self, count: usize) -> Vec<Vec<f64>> {
        let n = self.dim();
        param_grid(n, count)
            .iter()
            .map(|p| {
                let u = direction(n, p);
                let (r, _) = self.ray(&u);
                self.ray_point(&u, r)
            })
            .collect()
    }

    /// Minimum of the gap over the slice `{y_axis = c}` of the domain box.
    fn slice_min(&self, axis: usize, c: f64) -> f64 {
        let n = self.dim();
        let b = &self.domain_box;
        let mut y = self.center().to_vec();
        y[axis] = c;
        if n == 1 {
            return self.gap(&y);
        }
        for k in 0..n {
            if k != axis {
                y[k] = y[k].clamp(b.lo[k], b.hi[k]);
            }
        }
        let mut best = self.gap(&y);
        let sweeps = if n == 2 { 1 } else { 30 };
        for _ in 0..sweeps {
            let before = best;
            for k in (0..n).filter(|k| *k != axis) {
                let mut z = y.clone();
                let (arg, v) = golden_min(b.lo[k], b.hi[k], 70, |s| {
                    z[k] = s;
                    self.gap(&z)
                });
                if v < best {
                    best = v;
                    y[k] = arg;
                }
            }
            if before - best <= 1e-15 * before.abs().max(1e-300) {
                break;
            }
        }
        best
    }

    /// Whether the slice at offset `c` (in the domain box) misses `{b < t}`.
    fn slice_clear(&self, axis: usize, c: f64, t: f64) -> bool {
        self.slice_min(axis, c) >= t * (1.0 + 1e-9)
    }

    fn side_extent(&self, axis: usize, upward: bool, t: f64, iters: usize) -> f64 {
        let x = self.center()[axis];
        let edge = if upward { self.domain_box.hi[axis] } else { self.domain_box.lo[axis] };
        if (edge - x).abs() == 0.0 || !self.slice_clear(axis, edge, t) {
            return edge;
        }
        // invariant: slice at `far` is clear, slice at `near` is not known clear
        let (mut near, mut far) = (x, edge);
        for _ in 0..iters {
            let mid = 0.5 * (near + far);
            if self.slice_clear(axis, mid, t) {
                far = mid;
            } else {
                near = mid;
            }
        }
        far
    }

    /// Axis box certified to contain `S(x, t)`, obtained by bisecting the
    /// offset of clear slices on each side.
    pub fn bounding_box(&self) -> BoundingBox {
        let n = self.dim();
        let mut lo = vec![0.0; n];
        let mut hi = vec![0.0; n];
        for i in 0..n {
            lo[i] = self.side_extent(i, false, self.height, 14);
            hi[i] = self.side_extent(i, true, self.height, 14);
        }
        BoundingBox::new(lo, hi)
    }

    /// Up to `count` members of the section drawn from `budget` stream
    /// points in the section box.
    pub fn members(&self, budget: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
        let n = self.dim();
        let bbox = self.bounding_box();
        let s = QmcStream::new(n, seed);
        let (mut u, mut p) = (vec![0.0; n], vec![0.0; n]);
        let mut out = Vec::new();
        for i in 0..budget as u64 {
            s.fill(i, &mut u);
            bbox.map_unit(&u, &mut p);
            if self.contains(&p) {
                out.push(p.clone());
                if out.len() >= count {
                    break;
                }
            }
        }
        out
    }

    /// Maximizes `f` over the boundary of `S ∩ Ω̄`. Intended for convex `f`,
    /// whose maximum over the closure is attained there.
    pub fn maximize_on_boundary(&self, f: impl Fn(&[f64]) -> f64, grid: usize, sweeps: usize) -> (f64, Vec<f64>) {
        let n = self.dim();
        let at = |p: &[f64]| {
            let u = direction(n, p);
            let (r, _) = self.ray(&u);
            self.ray_point(&u, r)
        };
        let params = param_grid(n, grid);
        let mut best = (f64::NEG_INFINITY, params[0].clone());
        for p in &params {
            let v = f(&at(p));
            if v > best.0 {
                best = (v, p.clone());
            }
        }
        if n == 1 {
            return (best.0, at(&best.1));
        }
        let mut p = best.1.clone();
        let step = 0.5 / grid.max(1) as f64;
        let v = pattern_search(&mut p, step, sweeps, 1e-13, |q| {
            wrap_params(n, q);
            f(&at(q))
        });
        (v, at(&p))
    }
}

/// Extents of `S(x, t)` for every `t` at once: for each side of each axis,
/// the gap minimum over slices on a geometric grid of offsets. Supports
/// repeated box queries at a fixed center (maximal function sweeps).
pub struct ExtentProfile {
    center: Vec<f64>,
    domain_box: BoundingBox,
    // per (axis, side): (offset, slice minimum), offsets increasing
    sides: Vec<Vec<(f64, f64)>>,
}

impl ExtentProfile {
    pub fn new(view: &SectionView<'_>, ratio: f64, min_offset: f64) -> Self {
        let n = view.dim();
        let x = view.center().to_vec();
        let b = view.domain_box.clone();
        let mut sides = Vec::with_capacity(2 * n);
        for axis in 0..n {
            for upward in [false, true] {
                let room = if upward { b.hi[axis] - x[axis] } else { x[axis] - b.lo[axis] };
                let mut prof = Vec::new();
                if room > 0.0 {
                    let mut d = min_offset.min(room);
                    loop {
                        let c = if upward { x[axis] + d } else { x[axis] - d };
                        prof.push((d, view.slice_min(axis, c)));
                        if d >= room {
                            break;
                        }
                        d = (d * ratio).min(room);
                    }
                }
                sides.push(prof);
            }
        }
        ExtentProfile { center: x, domain_box: b, sides }
    }

    pub fn bounding_box(&self, t: f64) -> BoundingBox {
        let n = self.center.len();
        let mut lo = self.domain_box.lo.clone();
        let mut hi = self.domain_box.hi.clone();
        for axis in 0..n {
            for (k, upward) in [false, true].into_iter().enumerate() {
                let prof = &self.sides[2 * axis + k];
                if let Some((d, _)) = prof.iter().find(|(_, m)| *m >= t * (1.0 + 1e-9)) {
                    if upward {
                        hi[axis] = self.center[axis] + d;
                    } else {
                        lo[axis] = self.center[axis] - d;
                    }
                }
            }
        }
        BoundingBox::new(lo, hi)
    }
}

/// `param_dim` re-exported for callers building climbers.
pub fn direction_params(n: usize) -> usize {
    param_dim(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::{AxisEllipsoid, Quadratic};

    #[test]
    fn golden_finds_minimum() {
        let (x, v) = golden_min(-3.0, 5.0, 80, |s| (s - 1.25).powi(2) + 2.0);
        assert!((x - 1.25).abs() < 1e-6);
        assert!((v - 2.0).abs() < 1e-15);
    }

    #[test]
    fn ray_radius_matches_disc() {
        let phi = Quadratic::isotropic(2);
        let omega = AxisEllipsoid::unit_ball(2);
        let s = SectionView::new(&phi, &omega, &[0.0, 0.0], 0.25).unwrap();
        let (r_in, r_out) = s.ray(&[0.6, 0.8]);
        assert!((r_in - 0.5).abs() < 1e-14 && r_out > r_in);
        // near the boundary the domain cuts first
        let s = SectionView::new(&phi, &omega, &[0.9, 0.0], 0.25).unwrap();
        let (r_in, _) = s.ray(&[1.0, 0.0]);
        assert!((r_in - 0.1).abs() < 1e-12);
    }

    #[test]
    fn bounding_box_is_tight_and_safe() {
        let phi = Quadratic::isotropic(2);
        let omega = AxisEllipsoid::unit_ball(2);
        let s = SectionView::new(&phi, &omega, &[0.2, -0.1], 0.04).unwrap();
        let b = s.bounding_box();
        assert!(b.lo[0] <= 0.0 && b.hi[0] >= 0.4);
        assert!(b.hi[0] - b.lo[0] < 0.4 * 1.01);
        for p in s.boundary_points(256) {
            assert!(b.contains(&p));
        }
        // boundary center: box is clipped by the domain box on the right
        let s = SectionView::new(&phi, &omega, &[1.0, 0.0], 0.01).unwrap();
        let b = s.bounding_box();
        assert_eq!(b.hi[0], 1.0);
        assert!((b.lo[0] - 0.9).abs() < 1e-3);
    }

    #[test]
    fn profile_box_contains_section() {
        let phi = Quadratic::diagonal("e", &[1.0, 4.0]);
        let omega = AxisEllipsoid::new(vec![0.0, 0.0], vec![1.0, 0.5]).unwrap();
        let s = SectionView::new(&phi, &omega, &[0.3, 0.1], 0.01).unwrap();
        let prof = ExtentProfile::new(&s, 2f64.powf(0.125), 1e-4);
        for t in [1e-3, 1e-2, 0.1, 1.0] {
            let v = s.with_height(t);
            let b = prof.bounding_box(t);
            for p in v.boundary_points(128) {
                assert!(b.contains(&p), "t={t} {p:?} {b:?}");
            }
        }
    }

    #[test]
    fn boundary_maximization() {
        let phi = Quadratic::isotropic(2);
        let omega = AxisEllipsoid::unit_ball(2);
        let s = SectionView::new(&phi, &omega, &[0.0, 0.0], 0.25).unwrap();
        let (v, p) = s.maximize_on_boundary(|y| y[0] + 2.0 * y[1], 16, 200);
        // max of a linear function on the disc of radius 1/2
        assert!((v - 0.5 * 5f64.sqrt()).abs() < 1e-9, "{v} {p:?}");
    }
}
