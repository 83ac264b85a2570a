use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// A convex potential `φ` with an analytic gradient.
///
/// Implementations must be pure: every evaluator may be called
/// concurrently from several threads.
pub trait Potential: Send + Sync {
    fn name(&self) -> String;
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64], out: &mut [f64]);

    /// Bounds `λ ≤ det D²φ ≤ Λ` guaranteed on the paired domain.
    fn hessian_det_bounds(&self) -> Option<(f64, f64)> {
        None
    }

    /// True for the built-in closed-form instances whose convexity and
    /// separation are known analytically.
    fn is_analytic(&self) -> bool {
        false
    }

    /// For `φ + affine`, the potential without the affine part. Bregman
    /// gaps are computed from the base so affine tilts leave them
    /// bit-identical.
    fn affine_base(&self) -> Option<&dyn Potential> {
        None
    }
}

impl fmt::Debug for dyn Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Potential({})", self.name())
    }
}

/// Follows `affine_base` to the potential that actually defines the gaps.
pub fn gap_source(phi: &dyn Potential) -> &dyn Potential {
    let mut p = phi;
    while let Some(b) = p.affine_base() {
        p = b;
    }
    p
}

/// The supporting hyperplane of `φ` at a base point, cached so that gaps
/// `b(·, x)` cost one evaluation of `φ` each.
#[derive(Clone)]
pub struct Tangent<'a> {
    phi: &'a dyn Potential,
    base: Vec<f64>,
    value: f64,
    grad: Vec<f64>,
}

impl<'a> Tangent<'a> {
    pub fn new(phi: &'a dyn Potential, x: &[f64]) -> Self {
        let phi = gap_source(phi);
        let mut grad = vec![0.0; x.len()];
        phi.gradient(x, &mut grad);
        Tangent {
            phi,
            base: x.to_vec(),
            value: phi.value(x),
            grad,
        }
    }

    pub fn checked(phi: &'a dyn Potential, x: &[f64]) -> Result<Self> {
        if x.len() != phi.dim() {
            return Err(Error::Dimension { expected: phi.dim(), got: x.len() });
        }
        let t = Tangent::new(phi, x);
        if !t.value.is_finite() || t.grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::Evaluation { what: "potential or gradient".into(), at: x.to_vec() });
        }
        Ok(t)
    }

    pub fn base(&self) -> &[f64] {
        &self.base
    }

    pub fn gradient(&self) -> &[f64] {
        &self.grad
    }

    pub fn potential(&self) -> &'a dyn Potential {
        self.phi
    }

    /// `b(y, x) = φ(y) − φ(x) − ∇φ(x)·(y − x)`.
    #[inline]
    pub fn gap(&self, y: &[f64]) -> f64 {
        let mut lin = 0.0;
        for i in 0..y.len() {
            lin += self.grad[i] * (y[i] - self.base[i]);
        }
        self.phi.value(y) - self.value - lin
    }
}

/// Bregman gap `b(y, x)`; non-finite results are reported as errors.
pub fn bregman_gap(phi: &dyn Potential, y: &[f64], x: &[f64]) -> Result<f64> {
    if y.len() != phi.dim() {
        return Err(Error::Dimension { expected: phi.dim(), got: y.len() });
    }
    let g = Tangent::checked(phi, x)?.gap(y);
    if !g.is_finite() {
        return Err(Error::Evaluation { what: "Bregman gap".into(), at: y.to_vec() });
    }
    Ok(g)
}

/// Bregman gap computed from `value` and `gradient` directly, ignoring
/// `affine_base`. Used to cross-check the symbolic handling of tilts.
pub fn bregman_gap_direct(phi: &dyn Potential, y: &[f64], x: &[f64]) -> f64 {
    let mut g = vec![0.0; x.len()];
    phi.gradient(x, &mut g);
    let lin: f64 = g.iter().zip(y.iter().zip(x)).map(|(gi, (a, b))| gi * (a - b)).sum();
    phi.value(y) - phi.value(x) - lin
}

/// `φ(x) = ⟨A x, x⟩` for a symmetric matrix `A`.
#[derive(Clone, Debug)]
pub struct Quadratic {
    name: String,
    n: usize,
    a: Vec<f64>,
}

impl Quadratic {
    pub fn new(name: impl Into<String>, n: usize, a: Vec<f64>) -> Result<Self> {
        if a.len() != n * n {
            return Err(Error::InvalidInput(format!("matrix has {} entries, expected {}", a.len(), n * n)));
        }
        for i in 0..n {
            for j in 0..i {
                if (a[i * n + j] - a[j * n + i]).abs() > 1e-12 {
                    return Err(Error::InvalidInput("quadratic form matrix is not symmetric".into()));
                }
            }
        }
        Ok(Quadratic { name: name.into(), n, a })
    }

    /// `|x|²` in `R^n`.
    pub fn isotropic(n: usize) -> Self {
        Self::diagonal("isotropic_quadratic", &vec![1.0; n])
    }

    pub fn diagonal(name: impl Into<String>, coeffs: &[f64]) -> Self {
        let n = coeffs.len();
        let mut a = vec![0.0; n * n];
        for (i, c) in coeffs.iter().enumerate() {
            a[i * n + i] = *c;
        }
        Quadratic { name: name.into(), n, a }
    }

    pub fn matrix(&self) -> &[f64] {
        &self.a
    }

    fn hessian_det(&self) -> f64 {
        let m = nalgebra::DMatrix::from_row_slice(self.n, self.n, &self.a) * 2.0;
        m.determinant()
    }

    fn is_positive_definite(&self) -> bool {
        nalgebra::DMatrix::from_row_slice(self.n, self.n, &self.a)
            .cholesky()
            .is_some()
    }
}

impl Potential for Quadratic {
    fn name(&self) -> String {
        self.name.clone()
    }
    fn dim(&self) -> usize {
        self.n
    }
    fn value(&self, x: &[f64]) -> f64 {
        let n = self.n;
        let mut s = 0.0;
        for i in 0..n {
            let mut row = 0.0;
            for j in 0..n {
                row += self.a[i * n + j] * x[j];
            }
            s += row * x[i];
        }
        s
    }
    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            let mut row = 0.0;
            for j in 0..n {
                row += self.a[i * n + j] * x[j];
            }
            out[i] = 2.0 * row;
        }
    }
    fn hessian_det_bounds(&self) -> Option<(f64, f64)> {
        if self.is_positive_definite() {
            let d = self.hessian_det();
            Some((d, d))
        } else {
            None
        }
    }
    fn is_analytic(&self) -> bool {
        true
    }
}

/// `φ(x) = |x|² + ε x₁⁴`, with `det D²φ = 2ⁿ (1 + 6 ε x₁²)`.
///
/// The determinant bounds assume the unit ball as domain (`x₁² ≤ 1`).
#[derive(Clone, Debug)]
pub struct QuarticPerturbed {
    n: usize,
    eps: f64,
}

impl QuarticPerturbed {
    pub fn new(n: usize, eps: f64) -> Result<Self> {
        if !(0.0..=0.25).contains(&eps) {
            return Err(Error::InvalidInput(format!("quartic weight must lie in [0, 0.25], got {eps}")));
        }
        Ok(QuarticPerturbed { n, eps })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }
}

impl Potential for QuarticPerturbed {
    fn name(&self) -> String {
        format!("quartic_perturbed(eps={})", self.eps)
    }
    fn dim(&self) -> usize {
        self.n
    }
    fn value(&self, x: &[f64]) -> f64 {
        let x1 = x[0];
        x.iter().map(|c| c * c).sum::<f64>() + self.eps * x1 * x1 * x1 * x1
    }
    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        for (o, c) in out.iter_mut().zip(x) {
            *o = 2.0 * c;
        }
        out[0] += 4.0 * self.eps * x[0] * x[0] * x[0];
    }
    fn hessian_det_bounds(&self) -> Option<(f64, f64)> {
        let base = 2f64.powi(self.n as i32);
        Some((base, base * (1.0 + 6.0 * self.eps)))
    }
    fn is_analytic(&self) -> bool {
        true
    }
}

/// `φ(x) + v·x + c`.
#[derive(Clone)]
pub struct AffineTilt {
    inner: Arc<dyn Potential>,
    slope: Vec<f64>,
    offset: f64,
}

impl AffineTilt {
    pub fn new(inner: Arc<dyn Potential>, slope: Vec<f64>, offset: f64) -> Result<Self> {
        if slope.len() != inner.dim() {
            return Err(Error::Dimension { expected: inner.dim(), got: slope.len() });
        }
        Ok(AffineTilt { inner, slope, offset })
    }
}

impl Potential for AffineTilt {
    fn name(&self) -> String {
        format!("{}+tilt{:?}", self.inner.name(), self.slope)
    }
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.inner.value(x) + crate::point::dot(&self.slope, x) + self.offset
    }
    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        self.inner.gradient(x, out);
        for (o, v) in out.iter_mut().zip(&self.slope) {
            *o += v;
        }
    }
    fn hessian_det_bounds(&self) -> Option<(f64, f64)> {
        self.inner.hessian_det_bounds()
    }
    fn is_analytic(&self) -> bool {
        self.inner.is_analytic()
    }
    fn affine_base(&self) -> Option<&dyn Potential> {
        Some(self.inner.as_ref())
    }
}

type ValueFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type GradFn = dyn Fn(&[f64], &mut [f64]) + Send + Sync;

/// User-supplied potential. Certification of such potentials is
/// sampling-only.
#[derive(Clone)]
pub struct FnPotential {
    name: String,
    n: usize,
    value: Arc<ValueFn>,
    grad: Arc<GradFn>,
    bounds: Option<(f64, f64)>,
}

impl FnPotential {
    pub fn new(
        name: impl Into<String>,
        n: usize,
        value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        grad: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        FnPotential {
            name: name.into(),
            n,
            value: Arc::new(value),
            grad: Arc::new(grad),
            bounds: None,
        }
    }

    pub fn with_hessian_det_bounds(mut self, lo: f64, hi: f64) -> Self {
        self.bounds = Some((lo, hi));
        self
    }
}

impl Potential for FnPotential {
    fn name(&self) -> String {
        self.name.clone()
    }
    fn dim(&self) -> usize {
        self.n
    }
    fn value(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }
    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        (self.grad)(x, out)
    }
    fn hessian_det_bounds(&self) -> Option<(f64, f64)> {
        self.bounds
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn isotropic_gap() {
        let phi = Quadratic::isotropic(2);
        let g = bregman_gap(&phi, &[0.3, 0.4], &[0.0, 0.0]).unwrap();
        assert!((g - 0.25).abs() < 1e-15);
    }

    #[test]
    fn gap_vanishes_at_base() {
        let phi = QuarticPerturbed::new(2, 0.1).unwrap();
        let x = [0.3, -0.7];
        assert_eq!(bregman_gap(&phi, &x, &x).unwrap(), 0.0);
    }

    #[test]
    fn anisotropic_gap() {
        let phi = Quadratic::diagonal("e", &[1.0, 4.0]);
        let g = bregman_gap(&phi, &[0.1, 0.1], &[0.0, 0.0]).unwrap();
        assert!((g - 0.05).abs() < 1e-15);
    }

    #[test]
    fn non_finite_is_an_error() {
        let phi = FnPotential::new("log", 1, |x| (x[0]).ln(), |x, g| g[0] = 1.0 / x[0]);
        assert!(matches!(bregman_gap(&phi, &[-1.0], &[1.0]), Err(Error::Evaluation { .. })));
        assert!(matches!(bregman_gap(&phi, &[1.0], &[0.0]), Err(Error::Evaluation { .. })));
    }

    #[test]
    fn dimension_mismatch() {
        let phi = Quadratic::isotropic(2);
        assert!(matches!(bregman_gap(&phi, &[0.0], &[0.0, 0.0]), Err(Error::Dimension { .. })));
    }

    #[test]
    fn tilt_uses_base_gaps() {
        let base: Arc<dyn Potential> = Arc::new(QuarticPerturbed::new(2, 0.2).unwrap());
        let tilted = AffineTilt::new(base.clone(), vec![0.7, -1.3], 2.5).unwrap();
        let (y, x) = ([0.2, 0.5], [-0.4, 0.1]);
        assert_eq!(
            bregman_gap(&tilted, &y, &x).unwrap(),
            bregman_gap(base.as_ref(), &y, &x).unwrap()
        );
        let direct = bregman_gap_direct(&tilted, &y, &x);
        assert!((direct - bregman_gap(base.as_ref(), &y, &x).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn quadratic_rejects_asymmetric() {
        assert!(Quadratic::new("bad", 2, vec![1.0, 2.0, 0.0, 1.0]).is_err());
        assert!(QuarticPerturbed::new(2, 0.3).is_err());
    }

    #[test]
    fn det_bounds() {
        assert_eq!(Quadratic::isotropic(2).hessian_det_bounds(), Some((4.0, 4.0)));
        let e = Quadratic::diagonal("e", &[1.0, 4.0]).hessian_det_bounds().unwrap();
        assert!((e.0 - 16.0).abs() < 1e-12);
        assert_eq!(Quadratic::diagonal("c", &[-1.0, -1.0]).hessian_det_bounds(), None);
    }
}
