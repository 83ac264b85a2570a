//! Built-in `(φ, Ω)` pairs with their standing constants in closed form.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potentials::{AffineTilt, AxisEllipsoid, ConvexDomain, Hypotheses, Potential, Quadratic, QuarticPerturbed};

/// Default weight of the quartic term.
pub const QUARTIC_EPS: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceKind {
    /// `|x|²` on the unit disc.
    QuadraticBall,
    /// `x₁² + 4x₂²` on the ellipse with semi-axes `1, 1/2`.
    EllipseQuadratic,
    /// `|x|² + ε x₁⁴` on the unit disc.
    QuarticBall,
    /// `x²` on `[−1, 1]`.
    IntervalQuadratic,
}

impl InstanceKind {
    pub const ALL: [InstanceKind; 4] =
        [InstanceKind::QuadraticBall, InstanceKind::EllipseQuadratic, InstanceKind::QuarticBall, InstanceKind::IntervalQuadratic];

    pub fn name(self) -> &'static str {
        match self {
            InstanceKind::QuadraticBall => "quadratic_ball",
            InstanceKind::EllipseQuadratic => "ellipse_quadratic",
            InstanceKind::QuarticBall => "quartic_ball",
            InstanceKind::IntervalQuadratic => "interval_quadratic",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        InstanceKind::ALL
            .into_iter()
            .find(|k| k.name() == name)
            .ok_or_else(|| Error::Config(format!("unknown instance `{name}`")))
    }

    pub fn dim(self) -> usize {
        match self {
            InstanceKind::IntervalQuadratic => 1,
            _ => 2,
        }
    }
}

/// Instance parameters as they appear in a config.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    pub name: String,
    /// Affine tilt `v` added as `φ + v·x`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tilt: Option<Vec<f64>>,
    /// Quartic weight, `quartic_ball` only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
}

impl InstanceSpec {
    pub fn named(name: &str) -> Self {
        InstanceSpec { name: name.into(), tilt: None, eps: None }
    }

    pub fn build(&self) -> Result<Instance> {
        let kind = InstanceKind::parse(&self.name)?;
        if self.eps.is_some() && kind != InstanceKind::QuarticBall {
            return Err(Error::Config(format!("`eps` applies to quartic_ball only, not {}", self.name)));
        }
        let mut inst = Instance::builtin(kind, self.eps.unwrap_or(QUARTIC_EPS))?;
        if let Some(v) = &self.tilt {
            inst = inst.tilted(v.clone())?;
        }
        Ok(inst)
    }
}

#[derive(Clone)]
pub struct Instance {
    pub kind: InstanceKind,
    pub phi: Arc<dyn Potential>,
    pub omega: Arc<dyn ConvexDomain>,
    pub hypotheses: Hypotheses,
    pub tilt: Option<Vec<f64>>,
}

impl Instance {
    pub fn builtin(kind: InstanceKind, eps: f64) -> Result<Self> {
        let (phi, omega, rho, det, sep): (Arc<dyn Potential>, Arc<dyn ConvexDomain>, f64, (f64, f64), f64) = match kind {
            InstanceKind::QuadraticBall => {
                (Arc::new(Quadratic::isotropic(2)), Arc::new(AxisEllipsoid::unit_ball(2)), 1.0, (4.0, 4.0), 1.0)
            }
            InstanceKind::EllipseQuadratic => (
                Arc::new(Quadratic::diagonal("ellipse_quadratic", &[1.0, 4.0])),
                Arc::new(AxisEllipsoid::new(vec![0.0, 0.0], vec![1.0, 0.5])?),
                0.25,
                (16.0, 16.0),
                0.25,
            ),
            InstanceKind::QuarticBall => {
                let q = QuarticPerturbed::new(2, eps)?;
                let det = q.hessian_det_bounds().unwrap();
                // D²φ ranges over [2, 2 + 12ε] on the disc: b/|x − x₀|² ∈ [1, 1 + 6ε]
                (Arc::new(q), Arc::new(AxisEllipsoid::unit_ball(2)), 1.0, det, 1.0 / (1.0 + 6.0 * eps))
            }
            InstanceKind::IntervalQuadratic => {
                (Arc::new(Quadratic::isotropic(1)), Arc::new(AxisEllipsoid::unit_ball(1)), 1.0, (2.0, 2.0), 1.0)
            }
        };
        let hypotheses = Hypotheses::new(rho, det.0, det.1, sep)?;
        Ok(Instance { kind, phi, omega, hypotheses, tilt: None })
    }

    pub fn tilted(self, slope: Vec<f64>) -> Result<Self> {
        let phi = Arc::new(AffineTilt::new(self.phi.clone(), slope.clone(), 0.0)?);
        Ok(Instance { phi, tilt: Some(slope), ..self })
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn dim(&self) -> usize {
        self.kind.dim()
    }

    pub fn all() -> Vec<Instance> {
        InstanceKind::ALL.into_iter().map(|k| Instance::builtin(k, QUARTIC_EPS).unwrap()).collect()
    }
}

impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let h = &self.hypotheses;
        let det = if h.lambda == h.big_lambda {
            format!("λ=Λ={}", h.lambda)
        } else {
            format!("λ={}, Λ={}", h.lambda, h.big_lambda)
        };
        write!(f, "{} (ρ={}, {det}, n={})", self.name(), h.rho, self.dim())
    }
}

/// One line per built-in instance with its constants and formula.
pub fn catalog() -> Vec<String> {
    Instance::all()
        .iter()
        .map(|i| {
            let what = match i.kind {
                InstanceKind::QuadraticBall => "φ = |x|² on the unit disc".to_string(),
                InstanceKind::EllipseQuadratic => "φ = x₁² + 4x₂² on the ellipse x₁² + 4x₂² < 1".to_string(),
                InstanceKind::QuarticBall => format!("φ = |x|² + {QUARTIC_EPS}·x₁⁴ on the unit disc"),
                InstanceKind::IntervalQuadratic => "φ = x² on [−1, 1]".to_string(),
            };
            format!("{i}: {what}")
        })
        .collect()
}
