//! Trajectory corpus types and the preprocessing pipeline.
//!
//! Raw per-frame tracks are ingested at their native rate, downsampled,
//! given an orientation per sample, filtered and finally split by recording
//! into training and test corpora.

mod filter;
mod format;
mod ingest;
mod split;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::Vec2;

pub use filter::{filter_corpus, FilterConfig, FilterReport, FilterRule};
pub use format::{read_corpus, read_corpus_file, write_corpus, write_corpus_file, CORPUS_MAGIC};
pub use ingest::{ingest, ingest_ind_dir, IngestReport, SchemaAdapter};
pub use split::{split_by_recordings, SplitOutcome};

/// Native InD sampling period (25 Hz).
pub const NATIVE_SAMPLE_PERIOD: f64 = 0.04;
/// Default downsampling factor, 25 Hz to 2.5 Hz.
pub const DEFAULT_DOWNSAMPLE: usize = 10;

/// Tolerance on `‖orientation‖ = 1`.
pub const UNIT_TOLERANCE: f64 = 1e-9;

/// Road-user type. `Car` and `TruckBus` only exist before the merge step of
/// [`filter_corpus`]; afterwards every trajectory is one of the first three.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Category {
    Vehicle,
    Bicycle,
    Pedestrian,
    Car,
    TruckBus,
}

impl Category {
    pub const MODELLED: [Category; 3] = [Category::Vehicle, Category::Bicycle, Category::Pedestrian];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Vehicle => "vehicle",
            Category::Bicycle => "bicycle",
            Category::Pedestrian => "pedestrian",
            Category::Car => "car",
            Category::TruckBus => "truck_bus",
        }
    }

    /// Category after merging cars and trucks/buses into `Vehicle`.
    pub fn merged(self) -> Category {
        match self {
            Category::Car | Category::TruckBus => Category::Vehicle,
            other => other,
        }
    }

    pub fn is_modelled(self) -> bool {
        matches!(self, Category::Vehicle | Category::Bicycle | Category::Pedestrian)
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Category {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "vehicle" => Ok(Category::Vehicle),
            "bicycle" | "motorcycle" => Ok(Category::Bicycle),
            "pedestrian" => Ok(Category::Pedestrian),
            "car" => Ok(Category::Car),
            "truck_bus" | "truck/bus" | "truck" | "bus" => Ok(Category::TruckBus),
            other => Err(Error::invalid(format!("unknown road-user category '{other}'"))),
        }
    }
}

/// Position, speed and heading of one road user at one instant.
///
/// An orientation of `Vec2::ZERO` marks a sample whose heading has not been
/// derived yet (zero velocity at ingest). [`Trajectory::derive_orientations`]
/// replaces every such placeholder with a unit vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoadUserState {
    pub position: Vec2,
    pub speed: f64,
    pub orientation: Vec2,
}

impl RoadUserState {
    /// Checked constructor: speed must be non-negative and finite, the
    /// orientation unit-norm.
    pub fn new(position: Vec2, speed: f64, orientation: Vec2) -> Result<Self> {
        if !position.is_finite() {
            return Err(Error::invalid("position must be finite"));
        }
        if !(speed >= 0.0 && speed.is_finite()) {
            return Err(Error::invalid(format!("speed must be finite and >= 0, got {speed}")));
        }
        if (orientation.norm() - 1.0).abs() > UNIT_TOLERANCE {
            return Err(Error::invalid(format!("orientation {orientation} is not unit length")));
        }
        Ok(RoadUserState {
            position,
            speed,
            orientation,
        })
    }

    /// State with speed `‖v‖`, orientation `v/‖v‖` or pending when `v = 0`.
    pub fn from_velocity(position: Vec2, velocity: Vec2) -> Self {
        RoadUserState {
            position,
            speed: velocity.norm(),
            orientation: velocity.normalized().unwrap_or(Vec2::ZERO),
        }
    }

    pub fn velocity(&self) -> Vec2 {
        self.orientation * self.speed
    }

    pub fn has_orientation(&self) -> bool {
        (self.orientation.norm() - 1.0).abs() <= UNIT_TOLERANCE
    }
}

/// One uniformly sampled road-user track.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub recording_id: i64,
    pub track_id: i64,
    pub category: Category,
    pub location_id: i64,
    /// Seconds between consecutive samples.
    pub sample_period: f64,
    pub states: Vec<RoadUserState>,
    /// Position of one other vehicle per sample, for interaction-aware
    /// prediction. `None` when the trajectory carries no such annotation;
    /// `Some(v)` with `v[t] = None` when no other vehicle is present at `t`.
    pub other_positions: Option<Vec<Option<Vec2>>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Time between the first and the last sample.
    pub fn duration(&self) -> f64 {
        self.states.len().saturating_sub(1) as f64 * self.sample_period
    }

    pub fn key(&self) -> (i64, i64) {
        (self.recording_id, self.track_id)
    }

    pub fn orientations_complete(&self) -> bool {
        self.states.iter().all(RoadUserState::has_orientation)
    }

    /// Fills pending orientations in place; see [`derive_orientations`].
    pub fn derive_orientations(&mut self) -> Result<()> {
        let velocities: Vec<Vec2> = self.states.iter().map(RoadUserState::velocity).collect();
        let orientations = derive_orientations(&velocities)?;
        for (state, o) in self.states.iter_mut().zip(orientations) {
            state.orientation = o;
        }
        Ok(())
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.states.is_empty() {
            return Err(Error::Empty(format!(
                "trajectory (recording {}, track {}) has no states",
                self.recording_id, self.track_id
            )));
        }
        if !(self.sample_period > 0.0 && self.sample_period.is_finite()) {
            return Err(Error::invalid(format!(
                "sample period must be positive, got {}",
                self.sample_period
            )));
        }
        if let Some(others) = &self.other_positions {
            if others.len() != self.states.len() {
                return Err(Error::invalid(format!(
                    "trajectory (recording {}, track {}) has {} other-vehicle samples for {} states",
                    self.recording_id,
                    self.track_id,
                    others.len(),
                    self.states.len()
                )));
            }
            if others.iter().flatten().any(|p| !p.is_finite()) {
                return Err(Error::invalid("other-vehicle position must be finite"));
            }
        }
        Ok(())
    }
}

/// A collection of trajectories with unique `(recording_id, track_id)` keys.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Corpus {
    trajectories: Vec<Trajectory>,
    keys: BTreeSet<(i64, i64)>,
    /// recording id → source file
    pub provenance: BTreeMap<i64, String>,
}

impl Corpus {
    pub fn new(trajectories: Vec<Trajectory>) -> Result<Self> {
        let mut corpus = Corpus::default();
        for t in trajectories {
            corpus.push(t)?;
        }
        Ok(corpus)
    }

    pub fn push(&mut self, trajectory: Trajectory) -> Result<()> {
        trajectory.validate()?;
        let (recording_id, track_id) = trajectory.key();
        if !self.keys.insert((recording_id, track_id)) {
            return Err(Error::DuplicateKey { recording_id, track_id });
        }
        self.trajectories.push(trajectory);
        Ok(())
    }

    /// Appends all trajectories of `other`, failing on the first key clash.
    pub fn merge(&mut self, other: Corpus) -> Result<()> {
        for t in other.trajectories {
            self.push(t)?;
        }
        self.provenance.extend(other.provenance);
        Ok(())
    }

    pub fn trajectories(&self) -> &[Trajectory] {
        &self.trajectories
    }

    pub fn into_trajectories(self) -> Vec<Trajectory> {
        self.trajectories
    }

    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Trajectory> {
        self.trajectories.iter()
    }

    pub fn recording_ids(&self) -> BTreeSet<i64> {
        self.trajectories.iter().map(|t| t.recording_id).collect()
    }

    /// Keeps only trajectories satisfying `keep`; provenance of vanished
    /// recordings is dropped as well.
    pub fn filtered(&self, mut keep: impl FnMut(&Trajectory) -> bool) -> Corpus {
        let trajectories: Vec<Trajectory> = self.trajectories.iter().filter(|t| keep(t)).cloned().collect();
        let recordings: BTreeSet<i64> = trajectories.iter().map(|t| t.recording_id).collect();
        let keys = trajectories.iter().map(Trajectory::key).collect();
        Corpus {
            trajectories,
            keys,
            provenance: self
                .provenance
                .iter()
                .filter(|(r, _)| recordings.contains(r))
                .map(|(r, s)| (*r, s.clone()))
                .collect(),
        }
    }

    /// Distinct `(category, location)` cells, sorted.
    pub fn cells(&self) -> BTreeSet<(Category, i64)> {
        self.trajectories.iter().map(|t| (t.category, t.location_id)).collect()
    }

    pub fn cell(&self, category: Category, location_id: i64) -> Corpus {
        self.filtered(|t| t.category == category && t.location_id == location_id)
    }

    pub fn map_trajectories(self, f: impl FnMut(Trajectory) -> Result<Trajectory>) -> Result<Corpus> {
        let provenance = self.provenance;
        let trajectories = self.trajectories.into_iter().map(f).collect::<Result<Vec<_>>>()?;
        let mut corpus = Corpus::new(trajectories)?;
        corpus.provenance = provenance;
        Ok(corpus)
    }
}

impl<'a> IntoIterator for &'a Corpus {
    type Item = &'a Trajectory;
    type IntoIter = std::slice::Iter<'a, Trajectory>;

    fn into_iter(self) -> Self::IntoIter {
        self.trajectories.iter()
    }
}

/// Keeps samples `0, factor, 2·factor, …` and scales the sample period.
pub fn downsample(trajectory: &Trajectory, factor: usize) -> Result<Trajectory> {
    if factor == 0 {
        return Err(Error::invalid("downsample factor must be >= 1"));
    }
    let states = trajectory.states.iter().step_by(factor).copied().collect();
    let other_positions = trajectory
        .other_positions
        .as_ref()
        .map(|o| o.iter().step_by(factor).copied().collect());
    Ok(Trajectory {
        states,
        other_positions,
        sample_period: trajectory.sample_period * factor as f64,
        ..trajectory.clone()
    })
}

/// Unit headings from a velocity sequence.
///
/// A nonzero velocity gives its own direction. A zero velocity repeats the
/// most recent nonzero direction; zeros at the start of the sequence take the
/// first nonzero direction that follows them.
pub fn derive_orientations(velocities: &[Vec2]) -> Result<Vec<Vec2>> {
    if velocities.is_empty() {
        return Err(Error::Empty("velocity sequence".into()));
    }
    let first = velocities
        .iter()
        .find_map(|v| v.normalized())
        .ok_or(Error::StationaryTrajectory)?;
    let mut last = first;
    Ok(velocities
        .iter()
        .map(|v| {
            if let Some(o) = v.normalized() {
                last = o;
            }
            last
        })
        .collect())
}
