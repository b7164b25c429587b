use std::collections::BTreeMap;
use std::fmt;

use super::{Category, Corpus, Trajectory};
use crate::stats::percentile;

const KMH: f64 = 1.0 / 3.6;

/// Thresholds of the outlier filter. Speeds are in m/s, durations in seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterConfig {
    /// Warmup plus longest horizon: 2.8 s + 4.8 s.
    pub min_duration: f64,
    pub max_pedestrian_speed: f64,
    pub max_bicycle_speed: f64,
    /// A trajectory whose 95th-percentile speed is below this is stationary.
    pub stationary_speed: f64,
    pub stationary_percentile: f64,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            min_duration: 2.8 + 4.8,
            max_pedestrian_speed: 15.0 * KMH,
            max_bicycle_speed: 35.0 * KMH,
            stationary_speed: 0.36 * KMH,
            stationary_percentile: 0.95,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FilterRule {
    TooShort,
    SpeedOutlier,
    Stationary,
}

impl FilterRule {
    pub fn as_str(self) -> &'static str {
        match self {
            FilterRule::TooShort => "too_short",
            FilterRule::SpeedOutlier => "speed_outlier",
            FilterRule::Stationary => "stationary",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FilterReport {
    /// Trajectories relabelled from car or truck/bus to vehicle.
    pub merged: usize,
    pub dropped: BTreeMap<FilterRule, usize>,
    /// (category, location) → (count before, count after). Categories are
    /// taken after merging.
    pub cells: BTreeMap<(Category, i64), (usize, usize)>,
    pub cell_drops: BTreeMap<(Category, i64, FilterRule), usize>,
}

impl FilterReport {
    pub fn total_dropped(&self) -> usize {
        self.dropped.values().sum()
    }
}

impl fmt::Display for FilterReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "filter report")?;
        writeln!(f, "  merged into vehicle: {}", self.merged)?;
        for rule in [FilterRule::TooShort, FilterRule::SpeedOutlier, FilterRule::Stationary] {
            writeln!(
                f,
                "  dropped {:<14} {}",
                rule.as_str(),
                self.dropped.get(&rule).copied().unwrap_or(0)
            )?;
        }
        writeln!(
            f,
            "  category    location  before  after  too_short  speed_outlier  stationary"
        )?;
        for (&(cat, loc), &(before, after)) in &self.cells {
            let d = |r| self.cell_drops.get(&(cat, loc, r)).copied().unwrap_or(0);
            writeln!(
                f,
                "  {:<11} {:>8}  {:>6}  {:>5}  {:>9}  {:>13}  {:>10}",
                cat.as_str(),
                loc,
                before,
                after,
                d(FilterRule::TooShort),
                d(FilterRule::SpeedOutlier),
                d(FilterRule::Stationary)
            )?;
        }
        Ok(())
    }
}

fn rejection(t: &Trajectory, cfg: &FilterConfig) -> Option<FilterRule> {
    if t.duration() < cfg.min_duration - 1e-9 {
        return Some(FilterRule::TooShort);
    }
    let limit = match t.category {
        Category::Pedestrian => Some(cfg.max_pedestrian_speed),
        Category::Bicycle => Some(cfg.max_bicycle_speed),
        _ => None,
    };
    if let Some(limit) = limit {
        if t.states.iter().any(|s| s.speed > limit) {
            return Some(FilterRule::SpeedOutlier);
        }
    }
    let speeds: Vec<f64> = t.states.iter().map(|s| s.speed).collect();
    match percentile(&speeds, cfg.stationary_percentile) {
        Some(p) if p < cfg.stationary_speed => Some(FilterRule::Stationary),
        None => Some(FilterRule::Stationary),
        _ => None,
    }
}

/// Merges truck/bus and car into vehicle, then drops too-short trajectories,
/// pedestrian and bicycle speed outliers, and mostly stationary trajectories,
/// in that order.
pub fn filter_corpus(corpus: &Corpus, cfg: &FilterConfig) -> (Corpus, FilterReport) {
    let mut report = FilterReport::default();
    let mut kept = Vec::with_capacity(corpus.len());
    for t in corpus {
        let mut t = t.clone();
        if t.category != t.category.merged() {
            report.merged += 1;
            t.category = t.category.merged();
        }
        let cell = report.cells.entry((t.category, t.location_id)).or_default();
        cell.0 += 1;
        match rejection(&t, cfg) {
            Some(rule) => {
                *report.dropped.entry(rule).or_default() += 1;
                *report.cell_drops.entry((t.category, t.location_id, rule)).or_default() += 1;
            }
            None => {
                cell.1 += 1;
                kept.push(t);
            }
        }
    }
    let mut out = Corpus::new(kept).expect("keys were unique in the input corpus");
    let recordings = out.recording_ids();
    out.provenance = corpus
        .provenance
        .iter()
        .filter(|(r, _)| recordings.contains(r))
        .map(|(r, s)| (*r, s.clone()))
        .collect();
    (out, report)
}
