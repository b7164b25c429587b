//! Displacement database and predictors.
//!
//! The weighted average model predicts the `H`-step displacement of a query
//! state as the similarity-weighted mean of every stored `H`-step
//! displacement:
//!
//! ```text
//! d̂ = Σ σ(R, R̄ᵢ) d̄ᵢ / Σ σ(R, R̄ᵢ),      p̂ = p + d̂
//! ```
//!
//! which is the minimiser of `Σ σ(R, R̄ᵢ) ‖d − d̄ᵢ‖²`. Only entries inside the
//! cutoff radius contribute, so candidates come from a radius query on the
//! ball tree. Weights are normalised in log space (every exponent is shifted
//! by the smallest one) which keeps the average well defined for very large
//! kernel parameters, where the raw similarities all underflow.

mod database_file;

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::kernel::{self, InteractionParams, SimilarityParams, TrafficSituationState};
use crate::spatial_index::{RadiusIndex, DEFAULT_LEAF_CAPACITY};
use crate::trajectory_data::{Corpus, RoadUserState};

pub use database_file::{read_database, read_database_file, write_database, write_database_file};

/// Default warmup: 2.8 s at a 0.4 s sample period.
pub const DEFAULT_WARMUP_OFFSET: usize = 7;
/// Default horizons 1..=12 steps (0.4 s to 4.8 s).
pub const DEFAULT_MAX_HORIZON: usize = 12;

/// Shifted weights below this are treated as zero.
const WEIGHT_FLOOR: f64 = 1e-300;

/// First admissible 0-based sample index for a warmup offset.
///
/// The offset counts samples 1-based: an offset of `c` admits samples
/// `c, c+1, …` in 1-based numbering, so offsets 0 and 1 both admit every
/// sample.
pub fn first_query_index(warmup_offset: usize) -> usize {
    warmup_offset.saturating_sub(1)
}

/// Number of admissible query instants on a trajectory of `len` samples.
pub fn admissible_count(len: usize, horizon: usize, warmup_offset: usize) -> usize {
    len.saturating_sub(horizon + first_query_index(warmup_offset))
}

/// One database entry: a sampled state and where it came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entry {
    pub state: RoadUserState,
    /// Index of the source trajectory in the corpus the database was built from.
    pub trajectory: usize,
    /// 0-based sample index on that trajectory.
    pub time: usize,
    pub other_position: Option<Vec2>,
}

impl Entry {
    pub fn situation(&self) -> TrafficSituationState {
        TrafficSituationState {
            target: self.state,
            other_position: self.other_position,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DisplacementDatabase {
    entries: Vec<Entry>,
    horizons: Vec<usize>,
    /// Row-major: `displacements[i * horizons.len() + h]`.
    displacements: Vec<Vec2>,
    warmup_offset: usize,
    sample_period: f64,
    has_situations: bool,
    index: RadiusIndex,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub horizon_steps: usize,
    pub displacement: Vec2,
    pub position: Vec2,
    /// Sum of similarities before normalisation. May underflow to zero for
    /// very large kernel parameters even though the average is well defined.
    pub total_weight: f64,
    /// Entries that received a nonzero normalised weight.
    pub support_count: usize,
}

impl DisplacementDatabase {
    /// One entry per admissible `(trajectory, t)`: `t` past the warmup and
    /// `t + max(horizons)` still on the trajectory.
    pub fn build(corpus: &Corpus, horizons: &[usize], warmup_offset: usize) -> Result<Self> {
        let mut horizons = horizons.to_vec();
        horizons.sort_unstable();
        horizons.dedup();
        if horizons.is_empty() || horizons[0] == 0 {
            return Err(Error::invalid(
                "horizons must be a non-empty set of positive step counts",
            ));
        }
        if corpus.is_empty() {
            return Err(Error::Empty("corpus".into()));
        }
        let sample_period = corpus.trajectories()[0].sample_period;
        let annotated = corpus.iter().filter(|t| t.other_positions.is_some()).count();
        if annotated != 0 && annotated != corpus.len() {
            return Err(Error::invalid(
                "either every trajectory or none must carry other-vehicle annotations",
            ));
        }
        let has_situations = annotated != 0;
        let max_h = *horizons.last().unwrap();
        let first = first_query_index(warmup_offset);

        let mut entries = Vec::new();
        let mut displacements = Vec::new();
        for (n, traj) in corpus.iter().enumerate() {
            if (traj.sample_period - sample_period).abs() > 1e-9 {
                return Err(Error::invalid(format!(
                    "mixed sample periods: {} and {}",
                    sample_period, traj.sample_period
                )));
            }
            if !traj.orientations_complete() {
                return Err(Error::invalid(format!(
                    "trajectory (recording {}, track {}) has pending orientations",
                    traj.recording_id, traj.track_id
                )));
            }
            let len = traj.len();
            if len <= max_h + first {
                continue;
            }
            for t in first..len - max_h {
                let here = traj.states[t].position;
                entries.push(Entry {
                    state: traj.states[t],
                    trajectory: n,
                    time: t,
                    other_position: traj.other_positions.as_ref().and_then(|o| o[t]),
                });
                displacements.extend(horizons.iter().map(|&h| traj.states[t + h].position - here));
            }
        }
        Self::from_parts(
            entries,
            horizons,
            displacements,
            warmup_offset,
            sample_period,
            has_situations,
        )
    }

    pub(crate) fn from_parts(
        entries: Vec<Entry>,
        horizons: Vec<usize>,
        displacements: Vec<Vec2>,
        warmup_offset: usize,
        sample_period: f64,
        has_situations: bool,
    ) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Empty("no admissible (trajectory, time) pairs".into()));
        }
        debug_assert_eq!(displacements.len(), entries.len() * horizons.len());
        let index = RadiusIndex::build(
            entries.iter().map(|e| e.state.position).collect(),
            DEFAULT_LEAF_CAPACITY,
        )?;
        Ok(DisplacementDatabase {
            entries,
            horizons,
            displacements,
            warmup_offset,
            sample_period,
            has_situations,
            index,
        })
    }

    /// A new database holding only the entries for which `keep` is true.
    pub fn subset(&self, mut keep: impl FnMut(&Entry) -> bool) -> Result<Self> {
        let k = self.horizons.len();
        let mut entries = Vec::new();
        let mut displacements = Vec::new();
        for (i, e) in self.entries.iter().enumerate() {
            if keep(e) {
                entries.push(*e);
                displacements.extend_from_slice(&self.displacements[i * k..(i + 1) * k]);
            }
        }
        Self::from_parts(
            entries,
            self.horizons.clone(),
            displacements,
            self.warmup_offset,
            self.sample_period,
            self.has_situations,
        )
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn horizons(&self) -> &[usize] {
        &self.horizons
    }

    pub fn warmup_offset(&self) -> usize {
        self.warmup_offset
    }

    pub fn sample_period(&self) -> f64 {
        self.sample_period
    }

    pub fn has_situations(&self) -> bool {
        self.has_situations
    }

    pub fn index(&self) -> &RadiusIndex {
        &self.index
    }

    pub fn horizon_slot(&self, horizon: usize) -> Result<usize> {
        self.horizons
            .binary_search(&horizon)
            .map_err(|_| Error::UnknownHorizon(horizon))
    }

    /// Stored displacement of entry `i` at horizon slot `slot`.
    pub fn displacement(&self, i: usize, slot: usize) -> Vec2 {
        self.displacements[i * self.horizons.len() + slot]
    }

    /// Weighted average over candidates given as `(entry, exponent)`.
    fn average(
        &self,
        query: Vec2,
        horizon: usize,
        slot: usize,
        mut cands: Vec<(usize, f64)>,
        in_radius: usize,
    ) -> Result<Prediction> {
        if cands.is_empty() {
            return Err(Error::NoSimilarData { candidates: in_radius });
        }
        // fixed summation order, independent of the tree layout
        cands.sort_unstable_by_key(|c| c.0);
        let shift = cands.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
        let mut sum_w = 0.0;
        let mut acc = Vec2::ZERO;
        let mut support = 0;
        for &(i, e) in &cands {
            let w = (shift - e).exp();
            if w < WEIGHT_FLOOR {
                continue;
            }
            support += 1;
            sum_w += w;
            acc += self.displacement(i, slot) * w;
        }
        let displacement = acc / sum_w;
        Ok(Prediction {
            horizon_steps: horizon,
            displacement,
            position: query + displacement,
            total_weight: sum_w * (-shift).exp(),
            support_count: support,
        })
    }

    /// Weighted average prediction for a road-user state.
    pub fn predict(&self, params: &SimilarityParams, query: &RoadUserState, horizon: usize) -> Result<Prediction> {
        let slot = self.horizon_slot(horizon)?;
        let mut cands = Vec::new();
        self.index.for_each_in_radius(query.position, params.r, |i| {
            if let Some(e) = kernel::state_exponent(params, query, &self.entries[i].state) {
                cands.push((i, e));
            }
        })?;
        let n = cands.len();
        self.average(query.position, horizon, slot, cands, n)
    }

    /// Predictions for several parameter sets sharing one cutoff radius.
    /// Each element equals what [`predict`](Self::predict) returns for that
    /// parameter set; the state differences are computed once.
    pub fn predict_many(
        &self,
        params: &[SimilarityParams],
        query: &RoadUserState,
        horizon: usize,
    ) -> Result<Vec<Result<Prediction>>> {
        let slot = self.horizon_slot(horizon)?;
        let Some(r) = params.first().map(|p| p.r) else {
            return Ok(Vec::new());
        };
        if params.iter().any(|p| p.r != r) {
            return Err(Error::invalid("all parameter sets must share the cutoff radius"));
        }
        let mut terms = Vec::new();
        self.index.for_each_in_radius(query.position, r, |i| {
            if let Some(t) = kernel::StateTerms::between(query, &self.entries[i].state, r) {
                terms.push((i, t));
            }
        })?;
        terms.sort_unstable_by_key(|t| t.0);
        let n = terms.len();
        Ok(params
            .iter()
            .map(|p| {
                let cands = terms.iter().map(|(i, t)| (*i, t.exponent(p))).collect();
                self.average(query.position, horizon, slot, cands, n)
            })
            .collect())
    }

    /// Weighted average prediction with the interaction-aware kernel.
    pub fn interaction_predict(
        &self,
        params: &InteractionParams,
        query: &TrafficSituationState,
        horizon: usize,
    ) -> Result<Prediction> {
        if !self.has_situations {
            return Err(Error::MissingSituations);
        }
        let slot = self.horizon_slot(horizon)?;
        let mut cands = Vec::new();
        let mut in_radius = 0;
        self.index
            .for_each_in_radius(query.target.position, params.base.r, |i| {
                in_radius += 1;
                if let Some(e) = kernel::situation_exponent(params, query, &self.entries[i].situation()) {
                    cands.push((i, e));
                }
            })?;
        self.average(query.target.position, horizon, slot, cands, in_radius)
    }

    /// `Σ σ(R, R̄ᵢ) ‖d − d̄ᵢ‖²` over in-radius entries, with raw similarities.
    pub fn weighted_sse_objective(
        &self,
        params: &SimilarityParams,
        query: &RoadUserState,
        horizon: usize,
        d: Vec2,
    ) -> Result<f64> {
        let slot = self.horizon_slot(horizon)?;
        let mut total = 0.0;
        self.index.for_each_in_radius(query.position, params.r, |i| {
            let s = kernel::similarity(params, query, &self.entries[i].state);
            total += s * (d - self.displacement(i, slot)).norm_squared();
        })?;
        Ok(total)
    }
}

/// `p̂ = p + s·o·H·Δ`. The diagnostics are set to 1.
pub fn constant_velocity_predict(query: &RoadUserState, horizon: usize, sample_period: f64) -> Result<Prediction> {
    if horizon == 0 {
        return Err(Error::invalid("horizon must be >= 1"));
    }
    if !(sample_period > 0.0) {
        return Err(Error::invalid(format!(
            "sample period must be > 0, got {sample_period}"
        )));
    }
    let displacement = query.orientation * (query.speed * horizon as f64 * sample_period);
    Ok(Prediction {
        horizon_steps: horizon,
        displacement,
        position: query.position + displacement,
        total_weight: 1.0,
        support_count: 1,
    })
}
