//! Convex domains, convex potentials and the Bregman gap that defines
//! every section `S_φ(x,h) = { y ∈ Ω̄ : b(y,x) < h }`.

mod domain;
mod hypotheses;
mod potential;

pub use domain::{boundary_param_dim, ray_exit, retract, sample_closed, AxisEllipsoid, ConvexDomain, FnDomain, BOUNDARY_TOL};
pub use hypotheses::{verify_hypotheses, Certification, Clause, HypothesisReport, Hypotheses};
pub use potential::{
    bregman_gap, bregman_gap_direct, gap_source, AffineTilt, FnPotential, Potential, Quadratic, QuarticPerturbed,
    Tangent,
};

use crate::error::{Error, Result};

/// `y ∈ S_φ(x, h)`: `y ∈ Ω̄` and `b(y,x) < h`, with the strict inequality
/// evaluated as strict.
pub fn section_contains(
    phi: &dyn Potential,
    omega: &dyn ConvexDomain,
    x: &[f64],
    h: f64,
    y: &[f64],
) -> Result<bool> {
    if !(h > 0.0) {
        return Err(Error::InvalidHeight(h));
    }
    if !omega.contains_closed(x) {
        return Err(Error::Domain { point: x.to_vec(), reason: "section center outside the closed domain".into() });
    }
    if !omega.contains_closed(y) {
        return Ok(false);
    }
    Ok(bregman_gap(phi, y, x)? < h)
}
