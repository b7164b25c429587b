//! Displacement-error evaluation on a held-out corpus.
//!
//! Every admissible query instant of every test trajectory (past the warmup,
//! with the longest evaluated horizon still on the trajectory) is predicted
//! at every horizon, so all horizons are scored on the same query set.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::kernel::{ParamSet, TaggedParams, TrafficSituationState};
use crate::predictor::{constant_velocity_predict, first_query_index, DisplacementDatabase, Prediction};
use crate::stats::{mean, percentile_sorted};
use crate::trajectory_data::{Category, Corpus, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ModelKind {
    Wam,
    ConstantVelocity,
    Interaction,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Wam => "wam",
            ModelKind::ConstantVelocity => "cv",
            ModelKind::Interaction => "interaction",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Model to evaluate. Kernel models look their parameters up per
/// `(category, location)` cell.
#[derive(Debug, Clone)]
pub enum Model<'a> {
    Wam {
        db: &'a DisplacementDatabase,
        params: &'a ParamSet,
    },
    ConstantVelocity {
        sample_period: f64,
    },
    Interaction {
        db: &'a DisplacementDatabase,
        params: &'a ParamSet,
    },
}

impl Model<'_> {
    pub fn kind(&self) -> ModelKind {
        match self {
            Model::Wam { .. } => ModelKind::Wam,
            Model::ConstantVelocity { .. } => ModelKind::ConstantVelocity,
            Model::Interaction { .. } => ModelKind::Interaction,
        }
    }

    fn sample_period(&self) -> f64 {
        match self {
            Model::Wam { db, .. } | Model::Interaction { db, .. } => db.sample_period(),
            Model::ConstantVelocity { sample_period } => *sample_period,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    pub horizons: Vec<usize>,
    pub warmup_offset: usize,
    /// Replace a kernel prediction without similar data by the
    /// constant-velocity prediction instead of recording no error.
    pub fallback_to_cv: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            horizons: (1..=crate::predictor::DEFAULT_MAX_HORIZON).collect(),
            warmup_offset: crate::predictor::DEFAULT_WARMUP_OFFSET,
            fallback_to_cv: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRecord {
    pub model: ModelKind,
    pub recording_id: i64,
    pub track_id: i64,
    pub category: Category,
    pub location_id: i64,
    /// 0-based query sample index.
    pub time: usize,
    pub horizon_steps: usize,
    /// Query position, for error maps.
    pub position: Vec2,
    /// Euclidean position error in metres; `None` when the kernel model had
    /// no similar data and no fallback was requested.
    pub error: Option<f64>,
    pub fallback: bool,
}

/// Score `model` on every admissible query instant of `test`.
pub fn evaluate(model: &Model<'_>, test: &Corpus, cfg: &EvalConfig) -> Result<Vec<ErrorRecord>> {
    let mut horizons = cfg.horizons.clone();
    horizons.sort_unstable();
    horizons.dedup();
    let max_h = *horizons
        .last()
        .ok_or_else(|| Error::invalid("no horizons to evaluate"))?;
    if horizons[0] == 0 {
        return Err(Error::invalid("horizons must be >= 1"));
    }
    let mut out = Vec::new();
    for traj in test.iter() {
        if !traj.orientations_complete() {
            return Err(Error::invalid(format!(
                "trajectory {:?} has pending orientations",
                traj.key()
            )));
        }
        let start = first_query_index(cfg.warmup_offset);
        if traj.len() <= start + max_h {
            continue;
        }
        for t in start..traj.len() - max_h {
            for &h in &horizons {
                out.push(score_one(model, traj, t, h, cfg)?);
            }
        }
    }
    Ok(out)
}

fn lookup_cell<'p>(params: &'p ParamSet, traj: &Trajectory) -> Result<&'p TaggedParams> {
    params.lookup(traj.category, traj.location_id).ok_or_else(|| {
        Error::invalid(format!(
            "no parameters for {} at location {}",
            traj.category.as_str(),
            traj.location_id
        ))
    })
}

fn score_one(model: &Model<'_>, traj: &Trajectory, t: usize, h: usize, cfg: &EvalConfig) -> Result<ErrorRecord> {
    let state = traj.states[t];
    let lookup = |params| lookup_cell(params, traj);
    let predicted: Result<Prediction> = match model {
        Model::ConstantVelocity { sample_period } => constant_velocity_predict(&state, h, *sample_period),
        Model::Wam { db, params } => db.predict(&lookup(params)?.params, &state, h),
        Model::Interaction { db, params } => {
            let tagged = lookup(params)?;
            let ip = tagged.interaction().ok_or_else(|| {
                Error::invalid(format!(
                    "parameters for {} at location {} have no interaction weight",
                    traj.category.as_str(),
                    traj.location_id
                ))
            })?;
            let other = traj.other_positions.as_ref().and_then(|o| o[t]);
            db.interaction_predict(&ip, &TrafficSituationState::new(state, other)?, h)
        }
    };
    let (prediction, fallback) = match predicted {
        Ok(p) => (Some(p), false),
        Err(Error::NoSimilarData { .. }) if cfg.fallback_to_cv => {
            (Some(constant_velocity_predict(&state, h, model.sample_period())?), true)
        }
        Err(Error::NoSimilarData { .. }) => (None, false),
        Err(e) => return Err(e),
    };
    let truth = traj.states[t + h].position;
    Ok(ErrorRecord {
        model: model.kind(),
        recording_id: traj.recording_id,
        track_id: traj.track_id,
        category: traj.category,
        location_id: traj.location_id,
        time: t,
        horizon_steps: h,
        position: state.position,
        error: prediction.map(|p| (p.position - truth).norm()),
        fallback,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct HorizonStats {
    pub horizon_steps: usize,
    pub count: usize,
    /// Records without an error value.
    pub missing: usize,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub mean: f64,
    pub max: f64,
}

/// Per-horizon statistics of the given records, ascending by horizon.
/// Horizons whose records all lack an error are omitted.
pub fn horizon_stats<'r>(records: impl IntoIterator<Item = &'r ErrorRecord>) -> Vec<HorizonStats> {
    let mut by_h: BTreeMap<usize, (Vec<f64>, usize)> = BTreeMap::new();
    for r in records {
        let slot = by_h.entry(r.horizon_steps).or_default();
        match r.error {
            Some(e) => slot.0.push(e),
            None => slot.1 += 1,
        }
    }
    by_h.into_iter()
        .filter(|(_, (v, _))| !v.is_empty())
        .map(|(h, (mut v, missing))| {
            v.sort_by(f64::total_cmp);
            HorizonStats {
                horizon_steps: h,
                count: v.len(),
                missing,
                median: percentile_sorted(&v, 0.5),
                q1: percentile_sorted(&v, 0.25),
                q3: percentile_sorted(&v, 0.75),
                mean: mean(&v).expect("non-empty"),
                max: *v.last().expect("non-empty"),
            }
        })
        .collect()
}

/// Average and final displacement error over horizons `1..=max_horizon`.
/// ADE is the mean of the per-horizon mean errors, FDE the mean error at
/// `max_horizon`.
pub fn ade_fde(stats: &[HorizonStats], max_horizon: usize) -> Result<(f64, f64)> {
    if max_horizon == 0 {
        return Err(Error::invalid("max horizon must be >= 1"));
    }
    let missing: Vec<usize> = (1..=max_horizon)
        .filter(|h| !stats.iter().any(|s| s.horizon_steps == *h))
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingHorizons(missing));
    }
    let means: Vec<f64> = (1..=max_horizon)
        .map(|h| stats.iter().find(|s| s.horizon_steps == h).unwrap().mean)
        .collect();
    Ok((mean(&means).unwrap(), means[max_horizon - 1]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct GroupKey {
    pub location_id: i64,
    pub category: Category,
    pub model: ModelKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupSummary {
    pub key: GroupKey,
    pub stats: Vec<HorizonStats>,
    /// `None` when some horizon up to the maximum has no scored record.
    pub ade_fde: Option<(f64, f64)>,
}

/// Statistics per `(location, category, model)`.
pub fn summarize(records: &[ErrorRecord], max_horizon: usize) -> Vec<GroupSummary> {
    let mut groups: BTreeMap<GroupKey, Vec<&ErrorRecord>> = BTreeMap::new();
    for r in records {
        groups
            .entry(GroupKey {
                location_id: r.location_id,
                category: r.category,
                model: r.model,
            })
            .or_default()
            .push(r);
    }
    groups
        .into_iter()
        .map(|(key, rs)| {
            let stats = horizon_stats(rs);
            let ade_fde = ade_fde(&stats, max_horizon).ok();
            GroupSummary { key, stats, ade_fde }
        })
        .collect()
}

/// Mean error per square map cell of side `cell_size` at one horizon.
/// Keys are cell indices `(floor(x / cell), floor(y / cell))`, values
/// `(count, mean error)`.
pub fn error_map(
    records: &[ErrorRecord],
    horizon: usize,
    cell_size: f64,
) -> Result<BTreeMap<(i64, i64), (usize, f64)>> {
    if !(cell_size > 0.0 && cell_size.is_finite()) {
        return Err(Error::invalid(format!("cell size must be > 0, got {cell_size}")));
    }
    let mut acc: BTreeMap<(i64, i64), (usize, f64)> = BTreeMap::new();
    for r in records.iter().filter(|r| r.horizon_steps == horizon) {
        if let Some(e) = r.error {
            let cell = (
                (r.position.x / cell_size).floor() as i64,
                (r.position.y / cell_size).floor() as i64,
            );
            let slot = acc.entry(cell).or_insert((0, 0.0));
            slot.0 += 1;
            slot.1 += e;
        }
    }
    for v in acc.values_mut() {
        v.1 /= v.0 as f64;
    }
    Ok(acc)
}

pub fn records_csv(records: &[ErrorRecord]) -> String {
    let mut s =
        String::from("model,recording_id,track_id,category,location_id,time,horizon_steps,x,y,error,fallback\n");
    for r in records {
        let err = r.error.map(|e| e.to_string()).unwrap_or_default();
        writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.model,
            r.recording_id,
            r.track_id,
            r.category.as_str(),
            r.location_id,
            r.time,
            r.horizon_steps,
            r.position.x,
            r.position.y,
            err,
            r.fallback as u8
        )
        .unwrap();
    }
    s
}

pub fn summary_csv(summaries: &[GroupSummary]) -> String {
    let mut s = String::from("location_id,category,model,horizon_steps,count,missing,median,q1,q3,mean,max\n");
    for g in summaries {
        for h in &g.stats {
            writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{},{}",
                g.key.location_id,
                g.key.category.as_str(),
                g.key.model,
                h.horizon_steps,
                h.count,
                h.missing,
                h.median,
                h.q1,
                h.q3,
                h.mean,
                h.max
            )
            .unwrap();
        }
    }
    s
}

pub fn error_map_csv(map: &BTreeMap<(i64, i64), (usize, f64)>, cell_size: f64) -> String {
    let mut s = String::from("x_min,y_min,cell_size,count,mean_error\n");
    for (&(i, j), &(n, e)) in map {
        writeln!(
            s,
            "{},{},{},{},{}",
            i as f64 * cell_size,
            j as f64 * cell_size,
            cell_size,
            n,
            e
        )
        .unwrap();
    }
    s
}

/// ADE/FDE table: one block per location, one row per category and model.
pub fn ade_fde_table(summaries: &[GroupSummary], sample_period: f64) -> String {
    let mut s = String::new();
    let mut location = None;
    for g in summaries {
        if location != Some(g.key.location_id) {
            location = Some(g.key.location_id);
            writeln!(s, "location {}", g.key.location_id).unwrap();
            writeln!(
                s,
                "  {:<12} {:<12} {:>10} {:>10}",
                "category", "model", "ADE [m]", "FDE [m]"
            )
            .unwrap();
        }
        let (ade, fde) = match g.ade_fde {
            Some((a, f)) => (format!("{a:.2}"), format!("{f:.2}")),
            None => ("n/a".into(), "n/a".into()),
        };
        writeln!(
            s,
            "  {:<12} {:<12} {:>10} {:>10}",
            g.key.category.as_str(),
            g.key.model.as_str(),
            ade,
            fde
        )
        .unwrap();
    }
    if let Some(h) = summaries
        .iter()
        .flat_map(|g| g.stats.last())
        .map(|h| h.horizon_steps)
        .max()
    {
        writeln!(s, "horizon up to {h} steps ({:.1} s)", h as f64 * sample_period).unwrap();
    }
    s
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
