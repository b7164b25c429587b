use std::collections::{BTreeMap, BTreeSet};

use super::{Category, Corpus};
use crate::error::{Error, Result};

/// Largest number of recordings per location the exhaustive search accepts.
const MAX_RECORDINGS_PER_LOCATION: usize = 24;

#[derive(Debug, Clone)]
pub struct SplitOutcome {
    pub train: Corpus,
    pub test: Corpus,
    /// Sum over (category, location) cells of the squared deviation of the
    /// achieved training fraction from the target.
    pub deviation: f64,
    /// Achieved training fraction per cell.
    pub fractions: BTreeMap<(Category, i64), f64>,
    pub train_recordings: BTreeSet<i64>,
}

/// Assigns whole recordings to train or test.
///
/// Locations are handled independently. For each location every non-empty
/// proper subset of its recordings is tried as the training set, and the one
/// with the smallest summed squared deviation of the per-category trajectory
/// fraction from `target_fraction` wins. Ties go to the lexicographically
/// smallest sorted list of training recording ids.
pub fn split_by_recordings(corpus: &Corpus, target_fraction: f64) -> Result<SplitOutcome> {
    if !(target_fraction > 0.0 && target_fraction < 1.0) {
        return Err(Error::invalid(format!(
            "target fraction must lie in (0, 1), got {target_fraction}"
        )));
    }

    // location → recording → category → count
    let mut layout: BTreeMap<i64, BTreeMap<i64, BTreeMap<Category, usize>>> = BTreeMap::new();
    let mut recording_location: BTreeMap<i64, i64> = BTreeMap::new();
    for t in corpus {
        if let Some(&loc) = recording_location.get(&t.recording_id) {
            if loc != t.location_id {
                return Err(Error::invalid(format!(
                    "recording {} spans locations {loc} and {}",
                    t.recording_id, t.location_id
                )));
            }
        }
        recording_location.insert(t.recording_id, t.location_id);
        *layout
            .entry(t.location_id)
            .or_default()
            .entry(t.recording_id)
            .or_default()
            .entry(t.category)
            .or_default() += 1;
    }

    let mut train_recordings = BTreeSet::new();
    let mut deviation = 0.0;
    let mut fractions = BTreeMap::new();
    for (&location, recordings) in &layout {
        let ids: Vec<i64> = recordings.keys().copied().collect();
        let m = ids.len();
        if m < 2 {
            return Err(Error::NoValidSplit(format!(
                "location {location} has a single recording"
            )));
        }
        if m > MAX_RECORDINGS_PER_LOCATION {
            return Err(Error::invalid(format!(
                "location {location} has {m} recordings; exhaustive split supports at most {MAX_RECORDINGS_PER_LOCATION}"
            )));
        }
        let mut totals: BTreeMap<Category, usize> = BTreeMap::new();
        for per_cat in recordings.values() {
            for (&c, &n) in per_cat {
                *totals.entry(c).or_default() += n;
            }
        }
        let counts: Vec<&BTreeMap<Category, usize>> = recordings.values().collect();
        let objective = |mask: u32| -> f64 {
            totals
                .iter()
                .map(|(c, &total)| {
                    let train: usize = (0..m)
                        .filter(|&i| mask & (1 << i) != 0)
                        .map(|i| counts[i].get(c).copied().unwrap_or(0))
                        .sum();
                    let f = train as f64 / total as f64;
                    (f - target_fraction) * (f - target_fraction)
                })
                .sum()
        };
        let members = |mask: u32| -> Vec<i64> { (0..m).filter(|&i| mask & (1 << i) != 0).map(|i| ids[i]).collect() };

        let mut best: Option<(f64, Vec<i64>, u32)> = None;
        for mask in 1..((1u32 << m) - 1) {
            let value = objective(mask);
            let better = match &best {
                None => true,
                Some((v, set, _)) => value < *v || (value == *v && members(mask) < *set),
            };
            if better {
                best = Some((value, members(mask), mask));
            }
        }
        let (value, set, mask) = best.expect("at least one proper subset exists for m >= 2");
        deviation += value;
        train_recordings.extend(set);
        for (&c, &total) in &totals {
            let train: usize = (0..m)
                .filter(|&i| mask & (1 << i) != 0)
                .map(|i| counts[i].get(&c).copied().unwrap_or(0))
                .sum();
            fractions.insert((c, location), train as f64 / total as f64);
        }
    }

    let train = corpus.filtered(|t| train_recordings.contains(&t.recording_id));
    let test = corpus.filtered(|t| !train_recordings.contains(&t.recording_id));
    Ok(SplitOutcome {
        train,
        test,
        deviation,
        fractions,
        train_recordings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec2;
    use crate::trajectory_data::{RoadUserState, Trajectory};

    fn corpus(layout: &[(i64, i64, Category, usize)]) -> Corpus {
        let mut trajectories = Vec::new();
        let mut track = 0;
        for &(rec, loc, cat, n) in layout {
            for _ in 0..n {
                track += 1;
                trajectories.push(Trajectory {
                    recording_id: rec,
                    track_id: track,
                    category: cat,
                    location_id: loc,
                    sample_period: 0.4,
                    states: vec![RoadUserState {
                        position: Vec2::ZERO,
                        speed: 1.0,
                        orientation: Vec2::new(1.0, 0.0),
                    }],
                    other_positions: None,
                });
            }
        }
        Corpus::new(trajectories).unwrap()
    }

    /// Independent brute force: enumerate every assignment of every
    /// recording across all locations jointly.
    fn brute_force_best(c: &Corpus, target: f64) -> f64 {
        let recs: Vec<i64> = c.recording_ids().into_iter().collect();
        let cells = c.cells();
        let mut best = f64::INFINITY;
        for mask in 0u32..(1 << recs.len()) {
            let train: BTreeSet<i64> = (0..recs.len())
                .filter(|&i| mask & (1 << i) != 0)
                .map(|i| recs[i])
                .collect();
            let mut valid = true;
            let mut value = 0.0;
            for loc in c.iter().map(|t| t.location_id).collect::<BTreeSet<_>>() {
                let in_loc: BTreeSet<i64> = c
                    .iter()
                    .filter(|t| t.location_id == loc)
                    .map(|t| t.recording_id)
                    .collect();
                let n_train = in_loc.iter().filter(|r| train.contains(r)).count();
                if n_train == 0 || n_train == in_loc.len() {
                    valid = false;
                }
            }
            if !valid {
                continue;
            }
            for &(cat, loc) in &cells {
                let total = c.iter().filter(|t| t.category == cat && t.location_id == loc).count();
                let tr = c
                    .iter()
                    .filter(|t| t.category == cat && t.location_id == loc && train.contains(&t.recording_id))
                    .count();
                let f = tr as f64 / total as f64;
                value += (f - target) * (f - target);
            }
            best = best.min(value);
        }
        best
    }

    #[test]
    fn seven_three_split_is_exact() {
        let c = corpus(&[(1, 1, Category::Vehicle, 7), (2, 1, Category::Vehicle, 3)]);
        let s = split_by_recordings(&c, 0.7).unwrap();
        assert_eq!(s.train_recordings, BTreeSet::from([1]));
        assert_eq!(s.fractions[&(Category::Vehicle, 1)], 0.7);
        assert_eq!(s.deviation, 0.0);
        assert_eq!(s.train.len(), 7);
        assert_eq!(s.test.len(), 3);
    }

    #[test]
    fn three_equal_recordings_take_two() {
        let c = corpus(&[
            (1, 1, Category::Vehicle, 4),
            (2, 1, Category::Vehicle, 4),
            (3, 1, Category::Vehicle, 4),
        ]);
        let s = split_by_recordings(&c, 0.7).unwrap();
        assert_eq!(s.train_recordings, BTreeSet::from([1, 2]));
        assert!((s.fractions[&(Category::Vehicle, 1)] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_inputs() {
        let c = corpus(&[(1, 1, Category::Vehicle, 4), (2, 1, Category::Vehicle, 4)]);
        assert!(matches!(split_by_recordings(&c, 1.0), Err(Error::InvalidArgument(_))));
        assert!(matches!(split_by_recordings(&c, 0.0), Err(Error::InvalidArgument(_))));
        let single = corpus(&[(1, 1, Category::Vehicle, 4)]);
        assert!(matches!(split_by_recordings(&single, 0.7), Err(Error::NoValidSplit(_))));
    }

    #[test]
    fn matches_joint_brute_force() {
        let c = corpus(&[
            (1, 1, Category::Vehicle, 5),
            (1, 1, Category::Pedestrian, 2),
            (2, 1, Category::Vehicle, 9),
            (3, 1, Category::Pedestrian, 6),
            (3, 1, Category::Bicycle, 3),
            (4, 1, Category::Bicycle, 1),
            (5, 2, Category::Vehicle, 3),
            (6, 2, Category::Vehicle, 8),
            (7, 2, Category::Pedestrian, 4),
        ]);
        let s = split_by_recordings(&c, 0.7).unwrap();
        let best = brute_force_best(&c, 0.7);
        assert!((s.deviation - best).abs() < 1e-12, "{} vs {best}", s.deviation);
        // partition and no recording on both sides
        assert_eq!(s.train.len() + s.test.len(), c.len());
        let tr = s.train.recording_ids();
        assert!(s.test.recording_ids().is_disjoint(&tr));
    }
}
