//! Caps, the minimal-cap function v, Macbeath regions and floating bodies.

pub mod level;
pub mod macbeath;
pub mod minimal;
pub mod volume;

use serde::Serialize;

use crate::linalg::{dot, norm};
use crate::polytope::Polytope;
use crate::{Error, Result, TAU_GEOM};

pub use level::{
    boundary_point_at_level, floating_body_contains, level_points, DryCertificate, segment_max_v_below, v_at_most, visibility_superset,
    visible_set_contains, wet_part_volume, Estimate,
};
pub use macbeath::{gauge, macbeath, macbeath_regions_intersect, u_value, MacbeathRegion};
pub use minimal::{cap_volume_through, minimal_cap, minimal_cap_hinted, v_or_zero, CapSearch, MinimalCapResult};

/// C = P ∩ {x : u·x ≥ h_P(u) − t}. The mother polytope is passed to the
/// functions that need it rather than stored.
#[derive(Debug, Clone, Serialize)]
pub struct Cap {
    pub direction: Vec<f64>,
    pub depth: f64,
    /// h_P(u).
    pub support: f64,
    /// A point of P attaining the support value.
    pub center: Vec<f64>,
    pub volume: f64,
}

impl Cap {
    pub(crate) fn through(p: &Polytope, u: &[f64], z: &[f64], volume: f64) -> Cap {
        let support = p.support(u);
        Cap { direction: u.to_vec(), depth: support - dot(u, z), support, center: p.support_point(u), volume }
    }

    /// Offset of the bounding hyperplane: the cap is {u·x ≥ threshold}.
    pub fn threshold(&self) -> f64 {
        self.support - self.depth
    }

    /// Membership in C^λ for a point already known to lie in P.
    #[inline]
    pub fn dilate_contains(&self, x: &[f64], lambda: f64) -> bool {
        dot(&self.direction, x) >= self.support - lambda * self.depth - TAU_GEOM
    }

    pub fn contains(&self, p: &Polytope, x: &[f64]) -> bool {
        p.contains(x) && self.dilate_contains(x, 1.0)
    }

    pub fn slice_vertices(&self, p: &Polytope) -> Vec<Vec<f64>> {
        volume::slice_vertices(p, &self.direction, self.threshold())
    }

    /// The slice as a polytope of its own.
    pub fn slice(&self, p: &Polytope) -> Result<Polytope> {
        Polytope::build_from_vertices(&self.slice_vertices(p))
    }
}

/// Cap with direction `u` (normalized here) and depth `t`.
pub fn make_cap(p: &Polytope, u: &[f64], t: f64) -> Result<Cap> {
    if !(t > 0.0) {
        return Err(Error::InvalidDepth(t));
    }
    let n = norm(u);
    if (n - 1.0).abs() > 1e-6 {
        return Err(Error::PreconditionViolated(format!("direction has norm {n}, expected 1")));
    }
    let u: Vec<f64> = u.iter().map(|x| x / n).collect();
    let support = p.support(&u);
    let center = p.support_point(&u);
    let volume = if t >= p.width(&u) { p.volume } else { volume::slice_volume(p, &u, support - t) };
    Ok(Cap { direction: u, depth: t, support, center, volume })
}

/// C^λ: same direction, depth λt.
pub fn dilate(p: &Polytope, cap: &Cap, lambda: f64) -> Result<Cap> {
    make_cap(p, &cap.direction, lambda * cap.depth)
}

/// v(z) with the default search for the dimension.
pub fn v_at(p: &Polytope, z: &[f64]) -> Result<f64> {
    Ok(minimal_cap(p, z, CapSearch::default_for(p.dim))?.value)
}
