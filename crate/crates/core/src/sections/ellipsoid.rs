//! Minimum-volume enclosing ellipsoids.
//!
//! Khachiyan's barycentric coordinate ascent with Todd–Yildirim away steps
//! on the lifted points `(p, 1)`. Points are first reduced to their convex
//! hull in dimensions 1 and 2. Iteration stops once every lifted Mahalanobis
//! value is within a factor `1 ± η` of `n + 1`, and the result is dilated so
//! every input point is contained.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::point::{lex_cmp, unit_ball_volume, Point};

/// Optimality tolerance; the volume is then within `(1+η)^{(n+1)/2}` of
/// the minimum.
pub const MVEE_TOL: f64 = 1e-5;
const MAX_ITERS: usize = 200_000;

/// `{ y : (y − c)ᵀ Q (y − c) ≤ 1 }`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Ellipsoid {
    pub center: Point,
    /// Row-major `n × n` symmetric positive-definite matrix `Q`.
    pub shape: Vec<f64>,
    pub volume: f64,
}

impl Ellipsoid {
    pub fn new(center: Point, shape: DMatrix<f64>) -> Result<Self> {
        let n = center.dim();
        if shape.nrows() != n || shape.ncols() != n {
            return Err(Error::Dimension { expected: n, got: shape.nrows() });
        }
        let sym = (&shape + shape.transpose()) * 0.5;
        let det = sym.determinant();
        if !(det > 0.0) || sym.clone().cholesky().is_none() {
            return Err(Error::RankDeficient { rank: 0, dim: n });
        }
        let volume = unit_ball_volume(n) / det.sqrt();
        Ok(Ellipsoid { center, shape: sym.as_slice().to_vec(), volume })
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_row_slice(n, n, &self.shape)
    }

    pub fn form(&self, y: &[f64]) -> f64 {
        let n = self.dim();
        let mut s = 0.0;
        for i in 0..n {
            let di = y[i] - self.center[i];
            for j in 0..n {
                s += di * self.shape[i * n + j] * (y[j] - self.center[j]);
            }
        }
        s
    }

    pub fn contains(&self, y: &[f64]) -> bool {
        self.form(y) <= 1.0
    }

    /// Distance from the center to the boundary along the unit vector `u`.
    pub fn radial(&self, u: &[f64]) -> f64 {
        let n = self.dim();
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += u[i] * self.shape[i * n + j] * u[j];
            }
        }
        1.0 / s.sqrt()
    }

    /// Dilation by `k` about the center.
    pub fn scaled(&self, k: f64) -> Ellipsoid {
        let n = self.dim() as i32;
        Ellipsoid {
            center: self.center.clone(),
            shape: self.shape.iter().map(|q| q / (k * k)).collect(),
            volume: self.volume * k.powi(n),
        }
    }

    pub fn with_volume(&self, v: f64) -> Ellipsoid {
        self.scaled((v / self.volume).powf(1.0 / self.dim() as f64))
    }

    /// Semi-axis lengths in increasing order.
    pub fn semi_axes(&self) -> Vec<f64> {
        let eig = self.matrix().symmetric_eigen();
        let mut ax: Vec<f64> = eig.eigenvalues.iter().map(|l| 1.0 / l.sqrt()).collect();
        ax.sort_by(f64::total_cmp);
        ax
    }
}

fn cross(o: &[f64], a: &[f64], b: &[f64]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Vertices of the planar convex hull (counter-clockwise, collinear points
/// dropped).
pub fn convex_hull_2d(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut pts: Vec<&Vec<f64>> = points.iter().collect();
    pts.sort_by(|a, b| lex_cmp(a, b));
    pts.dedup_by(|a, b| a == b);
    if pts.len() < 3 {
        return pts.into_iter().cloned().collect();
    }
    let mut hull: Vec<&Vec<f64>> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &&Vec<f64>>> =
            if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull.into_iter().cloned().collect()
}

fn affine_rank(points: &[Vec<f64>]) -> usize {
    let n = points[0].len();
    let m = points.len();
    let mean: Vec<f64> = (0..n).map(|k| points.iter().map(|p| p[k]).sum::<f64>() / m as f64).collect();
    let a = DMatrix::from_fn(m, n, |i, k| points[i][k] - mean[k]);
    let scale = a.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    if scale == 0.0 {
        return 0;
    }
    let sv = a.svd(false, false).singular_values;
    sv.iter().filter(|s| **s > 1e-10 * scale * (m as f64).sqrt()).count()
}

/// Minimum-volume enclosing ellipsoid of `points`.
pub fn john_ellipsoid(points: &[Vec<f64>]) -> Result<Ellipsoid> {
    let Some(first) = points.first() else {
        return Err(Error::InvalidInput("no points".into()));
    };
    let n = first.len();
    if points.iter().any(|p| p.len() != n) {
        return Err(Error::InvalidInput("points of mixed dimension".into()));
    }
    if points.iter().any(|p| p.iter().any(|v| !v.is_finite())) {
        return Err(Error::InvalidInput("non-finite point".into()));
    }
    let rank = if points.len() > n { affine_rank(points) } else { points.len().saturating_sub(1) };
    if rank < n {
        return Err(Error::RankDeficient { rank, dim: n });
    }
    let reduced: Vec<Vec<f64>> = match n {
        1 => {
            let lo = points.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
            let hi = points.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
            vec![vec![lo], vec![hi]]
        }
        2 => convex_hull_2d(points),
        _ => points.to_vec(),
    };
    khachiyan(&reduced)
}

fn khachiyan(points: &[Vec<f64>]) -> Result<Ellipsoid> {
    let n = points[0].len();
    let m = points.len();
    let d = (n + 1) as f64;
    let q: Vec<DVector<f64>> =
        points.iter().map(|p| DVector::from_iterator(n + 1, p.iter().cloned().chain(std::iter::once(1.0)))).collect();
    let mut u = vec![1.0 / m as f64; m];
    let mut mvals = vec![0.0; m];
    for _ in 0..MAX_ITERS {
        let mut x = DMatrix::zeros(n + 1, n + 1);
        for (qi, ui) in q.iter().zip(&u) {
            x.ger(*ui, qi, qi, 1.0);
        }
        let Some(xinv) = x.try_inverse() else {
            return Err(Error::RankDeficient { rank: n.saturating_sub(1), dim: n });
        };
        for (mi, qi) in mvals.iter_mut().zip(&q) {
            *mi = qi.dot(&(&xinv * qi));
        }
        let (j, mj) = argmax(&mvals);
        let (k, mk) = mvals
            .iter()
            .enumerate()
            .filter(|(i, _)| u[*i] > 0.0)
            .map(|(i, v)| (i, *v))
            .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
        if mj <= (1.0 + MVEE_TOL) * d && mk >= (1.0 - MVEE_TOL) * d {
            break;
        }
        if mj - d >= d - mk {
            let a = (mj - d) / (d * (mj - 1.0));
            for w in u.iter_mut() {
                *w *= 1.0 - a;
            }
            u[j] += a;
        } else {
            let a = ((d - mk) / (d * (mk - 1.0))).min(u[k] / (1.0 - u[k]));
            for w in u.iter_mut() {
                *w *= 1.0 + a;
            }
            u[k] -= a;
            if u[k] < 1e-300 {
                u[k] = 0.0;
            }
        }
    }
    let mut c = vec![0.0; n];
    for (p, w) in points.iter().zip(&u) {
        for k in 0..n {
            c[k] += w * p[k];
        }
    }
    let mut cov = DMatrix::zeros(n, n);
    for (p, w) in points.iter().zip(&u) {
        let v = DVector::from_iterator(n, p.iter().zip(&c).map(|(a, b)| a - b));
        cov.ger(*w, &v, &v, 1.0);
    }
    let Some(inv) = cov.try_inverse() else {
        return Err(Error::RankDeficient { rank: n.saturating_sub(1), dim: n });
    };
    let e = Ellipsoid::new(Point::new(c), inv / n as f64)?;
    let worst = points.iter().map(|p| e.form(p)).fold(0.0, f64::max);
    Ok(if worst > 1.0 { e.scaled(worst.sqrt()) } else { e })
}

fn argmax(v: &[f64]) -> (usize, f64) {
    v.iter().enumerate().fold((0, f64::NEG_INFINITY), |a, (i, x)| if *x > a.1 { (i, *x) } else { a })
}
