//! Sections `S_φ(x,t)` as geometric objects: volumes, maximal interior
//! heights, the interior/boundary dichotomy, volume growth and the
//! ellipsoidal normalization of boundary sections.

pub mod dichotomy;
pub mod ellipsoid;
pub mod explore;
pub mod growth;
pub mod interior;
pub mod localization;
pub mod volume;

pub use dichotomy::{classify_dichotomy, DichotomyOptions, DichotomyResult, DichotomyTag};
pub use ellipsoid::{convex_hull_2d, john_ellipsoid, Ellipsoid};
pub use explore::SectionView;
pub use growth::{check_volume_growth, GrowthReport};
pub use localization::{localization_check, LocalizationReport};
pub use interior::{boundary_argmin, max_interior_height, InteriorHeight};
pub use volume::{section_volume, VolumeEstimate};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point::Point;
use crate::potentials::{ConvexDomain, Potential};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectionSpec {
    pub center: Point,
    pub height: f64,
}

impl SectionSpec {
    pub fn new(center: impl Into<Point>, height: f64) -> Result<Self> {
        if !(height > 0.0) {
            return Err(Error::InvalidHeight(height));
        }
        Ok(SectionSpec { center: center.into(), height })
    }

    pub fn view<'a>(&self, phi: &'a dyn Potential, omega: &'a dyn ConvexDomain) -> Result<SectionView<'a>> {
        SectionView::new(phi, omega, &self.center, self.height)
    }
}

/// A sampled realization of a section.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SectionGeometry {
    pub spec: SectionSpec,
    pub volume: VolumeEstimate,
    pub member_samples: Vec<Point>,
    /// `S ⊂ Ω`, decided by `t ≤ h̄(x)`.
    pub is_interior: bool,
    pub hull_vertices: Option<Vec<Point>>,
}

/// The JSON record of a section geometry.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SectionRecord {
    pub center: Point,
    pub height: f64,
    pub volume: f64,
    pub stderr: f64,
    pub is_interior: bool,
}

impl SectionGeometry {
    pub fn record(&self) -> SectionRecord {
        SectionRecord {
            center: self.spec.center.clone(),
            height: self.spec.height,
            volume: self.volume.volume,
            stderr: self.volume.stderr,
            is_interior: self.is_interior,
        }
    }
}

pub fn estimate_volume(
    phi: &dyn Potential,
    omega: &dyn ConvexDomain,
    spec: &SectionSpec,
    budget: usize,
    seed: u64,
) -> Result<VolumeEstimate> {
    section_volume(&spec.view(phi, omega)?, budget, seed)
}

/// Volume, up to `max_members` member samples, interiority and (in the
/// plane) the hull of the boundary rays and members.
pub fn section_geometry(
    phi: &dyn Potential,
    omega: &dyn ConvexDomain,
    spec: &SectionSpec,
    budget: usize,
    max_members: usize,
    seed: u64,
) -> Result<SectionGeometry> {
    let view = spec.view(phi, omega)?;
    let volume = section_volume(&view, budget, seed)?;
    let members = view.members(budget, max_members, seed);
    let is_interior = omega.contains_open(&spec.center)
        && spec.height <= boundary_argmin(phi, omega, &spec.center, interior::DEFAULT_SWEEP)?.height;
    let hull_vertices = (omega.dim() == 2).then(|| {
        let mut pts = view.boundary_points(256);
        pts.extend(members.iter().cloned());
        convex_hull_2d(&pts).into_iter().map(Point::new).collect()
    });
    Ok(SectionGeometry {
        spec: spec.clone(),
        volume,
        member_samples: members.into_iter().map(Point::new).collect(),
        is_interior,
        hull_vertices,
    })
}
