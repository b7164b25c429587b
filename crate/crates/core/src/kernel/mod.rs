//! Gaussian similarity between road-user states and between traffic
//! situations.
//!
//! For states `R = (p, s, o)` and `R̄ = (p̄, s̄, ō)` the similarity is
//!
//! ```text
//! σ(R, R̄) = exp(-(a‖p − p̄‖² + b|s − s̄|² + c θ²))   if ‖p − p̄‖ ≤ r
//!          = 0                                      otherwise
//! ```
//!
//! where `θ ∈ [0, π]` is the unsigned angle between the two orientations in
//! radians. The exponent is exposed separately ([`state_exponent`]) so that
//! weighted averages can be normalised in log space.

mod params_file;

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::trajectory_data::{Category, RoadUserState};

pub use params_file::{read_params, read_params_file, write_params, write_params_file, ParamSet, TaggedParams};

/// Default cutoff radius in meters.
pub const DEFAULT_RADIUS: f64 = 15.0;

const UNIT_INPUT_TOLERANCE: f64 = 1e-6;

/// Kernel weights for position (1/m²), speed (s²/m²) and orientation
/// (1/rad²), plus the cutoff radius `r` in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityParams {
    pub a: f64,
    pub b: f64,
    pub c_orient: f64,
    pub r: f64,
}

impl SimilarityParams {
    pub fn new(a: f64, b: f64, c_orient: f64, r: f64) -> Result<Self> {
        let p = SimilarityParams { a, b, c_orient, r };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("a", self.a), ("b", self.b), ("c_orient", self.c_orient)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        if !(self.r > 0.0) {
            return Err(Error::invalid(format!("cutoff radius must be > 0, got {}", self.r)));
        }
        Ok(())
    }

    /// Multiplies `a`, `b` and `c_orient` by `factor`, keeping `r`.
    pub fn scaled(&self, factor: f64) -> Self {
        SimilarityParams {
            a: self.a * factor,
            b: self.b * factor,
            c_orient: self.c_orient * factor,
            r: self.r,
        }
    }

    /// Reference parameters learned on the two InD intersections (locations
    /// 1 and 2), with the default 15 m cutoff.
    pub fn reference(category: Category, location_id: i64) -> Option<Self> {
        let (a, b, c) = match (category.merged(), location_id) {
            (Category::Vehicle, 1) => (0.5, 1.0, 50.0),
            (Category::Vehicle, 2) => (0.5, 1.0, 200.0),
            (Category::Bicycle, 1) => (0.5, 20.0, 50.0),
            (Category::Bicycle, 2) => (0.25, 1.0, 100.0),
            (Category::Pedestrian, 1) => (0.25, 20.0, 50.0),
            (Category::Pedestrian, 2) => (0.1, 50.0, 50.0),
            _ => return None,
        };
        Some(SimilarityParams {
            a,
            b,
            c_orient: c,
            r: DEFAULT_RADIUS,
        })
    }
}

impl Default for SimilarityParams {
    /// Vehicle parameters of location 1.
    fn default() -> Self {
        SimilarityParams {
            a: 0.5,
            b: 1.0,
            c_orient: 50.0,
            r: DEFAULT_RADIUS,
        }
    }
}

/// Unsigned angle between two unit vectors, in `[0, π]`.
pub fn orientation_angle(o1: Vec2, o2: Vec2) -> Result<f64> {
    for o in [o1, o2] {
        if (o.norm() - 1.0).abs() > UNIT_INPUT_TOLERANCE {
            return Err(Error::invalid(format!("orientation {o} is not unit length")));
        }
    }
    Ok(angle_between(o1, o2))
}

#[inline]
pub(crate) fn angle_between(o1: Vec2, o2: Vec2) -> f64 {
    o1.cross(o2).abs().atan2(o1.dot(o2))
}

/// Squared differences between two states, independent of the weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateTerms {
    pub distance_squared: f64,
    pub speed_squared: f64,
    pub angle_squared: f64,
}

impl StateTerms {
    /// `None` when the positions are farther apart than `r`.
    #[inline]
    pub fn between(query: &RoadUserState, other: &RoadUserState, r: f64) -> Option<Self> {
        let d2 = query.position.distance_squared(other.position);
        if d2 > r * r {
            return None;
        }
        let ds = query.speed - other.speed;
        let theta = angle_between(query.orientation, other.orientation);
        Some(StateTerms {
            distance_squared: d2,
            speed_squared: ds * ds,
            angle_squared: theta * theta,
        })
    }

    #[inline]
    pub fn exponent(&self, params: &SimilarityParams) -> f64 {
        params.a * self.distance_squared + params.b * self.speed_squared + params.c_orient * self.angle_squared
    }
}

/// The quantity inside `exp(-…)`, or `None` outside the cutoff radius.
#[inline]
pub fn state_exponent(params: &SimilarityParams, query: &RoadUserState, other: &RoadUserState) -> Option<f64> {
    StateTerms::between(query, other, params.r).map(|t| t.exponent(params))
}

pub fn similarity(params: &SimilarityParams, query: &RoadUserState, other: &RoadUserState) -> f64 {
    state_exponent(params, query, other).map_or(0.0, |e| (-e).exp())
}

/// A target state plus the position of one other vehicle, if any.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrafficSituationState {
    pub target: RoadUserState,
    pub other_position: Option<Vec2>,
}

impl TrafficSituationState {
    pub fn new(target: RoadUserState, other_position: Option<Vec2>) -> Result<Self> {
        if other_position.is_some_and(|p| !p.is_finite()) {
            return Err(Error::invalid("other-vehicle position must be finite"));
        }
        Ok(TrafficSituationState { target, other_position })
    }
}

/// Base kernel plus the other-vehicle position weight `d` (1/m²).
///
/// `e` weighs the other vehicle's speed difference. Situations in this crate
/// carry no other-vehicle speed, so it is stored and round-tripped through
/// parameter files but does not enter the similarity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteractionParams {
    pub base: SimilarityParams,
    pub d: f64,
    pub e: f64,
}

impl InteractionParams {
    pub fn new(base: SimilarityParams, d: f64, e: f64) -> Result<Self> {
        base.validate()?;
        for (name, v) in [("d", d), ("e", e)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(InteractionParams { base, d, e })
    }
}

/// Exponent of the interaction kernel, or `None` when the similarity is zero:
/// outside the cutoff radius, or when exactly one of the two situations has
/// another vehicle.
#[inline]
pub fn situation_exponent(
    params: &InteractionParams,
    query: &TrafficSituationState,
    other: &TrafficSituationState,
) -> Option<f64> {
    let base = state_exponent(&params.base, &query.target, &other.target)?;
    match (query.other_position, other.other_position) {
        (None, None) => Some(base),
        (Some(p), Some(q)) => Some(base + params.d * p.distance_squared(q)),
        _ => None,
    }
}

pub fn interaction_similarity(
    params: &InteractionParams,
    query: &TrafficSituationState,
    other: &TrafficSituationState,
) -> f64 {
    situation_exponent(params, query, other).map_or(0.0, |e| (-e).exp())
}
