//! Kernel parameter learning by trajectory-grouped K-fold cross-validation.
//!
//! All entries of one trajectory share a fold, so a held-out state is never
//! predicted from its own trajectory. The score of a parameter set is the
//! mean over folds of the mean squared displacement error on the held-out
//! fold, using the remaining folds as the database.

use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::kernel::{SimilarityParams, DEFAULT_RADIUS};
use crate::predictor::{DisplacementDatabase, DEFAULT_MAX_HORIZON, DEFAULT_WARMUP_OFFSET};
use crate::trajectory_data::Corpus;

pub const DEFAULT_FOLDS: usize = 5;

/// Fold of every trajectory. Folds are numbered `0..k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldAssignment {
    pub k: usize,
    /// trajectory index → fold
    pub assignment: Vec<usize>,
    /// Entries per fold.
    pub fold_sizes: Vec<usize>,
}

impl FoldAssignment {
    pub fn trajectories_in(&self, fold: usize) -> impl Iterator<Item = usize> + '_ {
        self.assignment
            .iter()
            .enumerate()
            .filter(move |(_, &f)| f == fold)
            .map(|(n, _)| n)
    }
}

/// Greedy balanced partition of whole trajectories into `k` folds.
///
/// Trajectories are visited by descending entry count (a seeded shuffle
/// decides the order among equal counts) and each goes to the fold that
/// currently holds the fewest entries, lowest fold number first.
pub fn partition_folds(entry_counts: &[usize], k: usize, seed: u64) -> Result<FoldAssignment> {
    if k == 0 {
        return Err(Error::invalid("number of folds must be >= 1"));
    }
    if entry_counts.len() < k {
        return Err(Error::invalid(format!(
            "{} trajectories cannot fill {k} folds",
            entry_counts.len()
        )));
    }
    let mut order: Vec<usize> = (0..entry_counts.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    order.sort_by(|&a, &b| entry_counts[b].cmp(&entry_counts[a]));

    let mut fold_sizes = vec![0usize; k];
    let mut assignment = vec![0usize; entry_counts.len()];
    for n in order {
        let (fold, _) = fold_sizes
            .iter()
            .enumerate()
            .min_by_key(|&(i, &s)| (s, i))
            .expect("k >= 1");
        assignment[n] = fold;
        fold_sizes[fold] += entry_counts[n];
    }
    Ok(FoldAssignment {
        k,
        assignment,
        fold_sizes,
    })
}

/// Entries per source trajectory of `db`, for a corpus of `n_trajectories`.
pub fn entry_counts(db: &DisplacementDatabase, n_trajectories: usize) -> Vec<usize> {
    let mut counts = vec![0; n_trajectories];
    for e in db.entries() {
        counts[e.trajectory] += 1;
    }
    counts
}

struct Fold {
    train: DisplacementDatabase,
    /// Indices into the full database.
    held_out: Vec<usize>,
}

/// Per-fold databases for one corpus and horizon, reusable across
/// parameter sets.
pub struct CrossValidation {
    full: DisplacementDatabase,
    folds: Vec<Fold>,
    horizon: usize,
    pub assignment: FoldAssignment,
}

impl CrossValidation {
    pub fn new(corpus: &Corpus, k: usize, seed: u64, horizon: usize, warmup_offset: usize) -> Result<Self> {
        let full = DisplacementDatabase::build(corpus, &[horizon], warmup_offset)?;
        let assignment = partition_folds(&entry_counts(&full, corpus.len()), k, seed)?;
        Self::with_assignment(full, assignment, horizon)
    }

    pub fn with_assignment(full: DisplacementDatabase, assignment: FoldAssignment, horizon: usize) -> Result<Self> {
        if assignment.k < 2 {
            return Err(Error::invalid("cross-validation needs at least 2 folds"));
        }
        full.horizon_slot(horizon)?;
        let mut folds = Vec::with_capacity(assignment.k);
        for k in 0..assignment.k {
            let held_out: Vec<usize> = full
                .entries()
                .iter()
                .enumerate()
                .filter(|(_, e)| assignment.assignment[e.trajectory] == k)
                .map(|(i, _)| i)
                .collect();
            if held_out.is_empty() {
                return Err(Error::Empty(format!("fold {k} holds no entries")));
            }
            let train = full.subset(|e| assignment.assignment[e.trajectory] != k)?;
            folds.push(Fold { train, held_out });
        }
        Ok(CrossValidation {
            full,
            folds,
            horizon,
            assignment,
        })
    }

    pub fn k(&self) -> usize {
        self.folds.len()
    }

    /// Mean squared error on fold `k`. A held-out state without similar
    /// training data is scored as if zero displacement had been predicted.
    pub fn fold_score(&self, k: usize, params: &SimilarityParams) -> Result<f64> {
        Ok(self.fold_scores(k, std::slice::from_ref(params))?[0])
    }

    /// [`fold_score`](Self::fold_score) for several parameter sets with a
    /// common cutoff radius.
    pub fn fold_scores(&self, k: usize, params: &[SimilarityParams]) -> Result<Vec<f64>> {
        let fold = self
            .folds
            .get(k)
            .ok_or_else(|| Error::invalid(format!("fold {k} out of range 0..{}", self.folds.len())))?;
        let slot = self.full.horizon_slot(self.horizon)?;
        let per_query: Vec<Result<Vec<f64>>> = fold
            .held_out
            .par_iter()
            .map(|&i| {
                let truth = self.full.displacement(i, slot);
                let state = &self.full.entries()[i].state;
                fold.train
                    .predict_many(params, state, self.horizon)?
                    .into_iter()
                    .map(|p| {
                        let predicted = match p {
                            Ok(p) => p.displacement,
                            Err(Error::NoSimilarData { .. }) => Vec2::ZERO,
                            Err(e) => return Err(e),
                        };
                        Ok((truth - predicted).norm_squared())
                    })
                    .collect()
            })
            .collect();
        // fixed summation order regardless of scheduling
        let mut sums = vec![0.0; params.len()];
        for errors in per_query {
            for (s, e) in sums.iter_mut().zip(errors?) {
                *s += e;
            }
        }
        let n = fold.held_out.len() as f64;
        Ok(sums.into_iter().map(|s| s / n).collect())
    }

    /// Mean of the fold scores.
    pub fn cv_loss(&self, params: &SimilarityParams) -> Result<f64> {
        Ok(self.cv_losses(std::slice::from_ref(params))?[0])
    }

    pub fn cv_losses(&self, params: &[SimilarityParams]) -> Result<Vec<f64>> {
        let mut totals = vec![0.0; params.len()];
        for k in 0..self.k() {
            for (t, s) in totals.iter_mut().zip(self.fold_scores(k, params)?) {
                *t += s;
            }
        }
        Ok(totals.into_iter().map(|t| t / self.k() as f64).collect())
    }
}

/// Fold score for one held-out fold, building the fold database on the fly.
pub fn fold_score(
    corpus: &Corpus,
    folds: &FoldAssignment,
    k: usize,
    params: &SimilarityParams,
    horizon: usize,
    warmup_offset: usize,
) -> Result<f64> {
    let full = DisplacementDatabase::build(corpus, &[horizon], warmup_offset)?;
    CrossValidation::with_assignment(full, folds.clone(), horizon)?.fold_score(k, params)
}

/// Training error when the evaluation set is the database itself. It keeps
/// falling as the kernel sharpens, which is why parameters are learned by
/// cross-validation instead.
pub fn in_sample_loss(db: &DisplacementDatabase, params: &SimilarityParams, horizon: usize) -> Result<f64> {
    let slot = db.horizon_slot(horizon)?;
    let mut sum = 0.0;
    for (i, e) in db.entries().iter().enumerate() {
        let p = db.predict(params, &e.state, horizon)?;
        sum += (db.displacement(i, slot) - p.displacement).norm_squared();
    }
    Ok(sum / db.len() as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grids {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c_orient: Vec<f64>,
}

impl Default for Grids {
    /// Coarse grids bracketing the reference parameter values.
    fn default() -> Self {
        Grids {
            a: vec![0.05, 0.1, 0.25, 0.5, 1.0, 2.0],
            b: vec![0.5, 1.0, 5.0, 20.0, 50.0, 100.0],
            c_orient: vec![10.0, 25.0, 50.0, 100.0, 200.0, 400.0],
        }
    }
}

impl Grids {
    fn validate(&self) -> Result<()> {
        for (name, g) in [("a", &self.a), ("b", &self.b), ("c_orient", &self.c_orient)] {
            if g.is_empty() {
                return Err(Error::invalid(format!("grid for {name} is empty")));
            }
            if g.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
                return Err(Error::invalid(format!(
                    "grid for {name} has negative or non-finite values"
                )));
            }
        }
        Ok(())
    }

    fn points(&self, r: f64) -> Vec<SimilarityParams> {
        let mut out = Vec::with_capacity(self.a.len() * self.b.len() * self.c_orient.len());
        for &a in &self.a {
            for &b in &self.b {
                for &c_orient in &self.c_orient {
                    out.push(SimilarityParams { a, b, c_orient, r });
                }
            }
        }
        out
    }

    /// Geometric grid of the same sizes around `best`, spanning a factor of
    /// `2^(1/2^(round-1))` either side.
    fn refined(&self, best: &SimilarityParams, round: usize) -> Grids {
        let span = 2f64.powf(1.0 / 2f64.powi(round as i32 - 1));
        let axis = |center: f64, m: usize| -> Vec<f64> {
            if center == 0.0 || m == 1 {
                return vec![center];
            }
            (0..m)
                .map(|i| center * span.powf(-1.0 + 2.0 * i as f64 / (m - 1) as f64))
                .collect()
        };
        Grids {
            a: axis(best.a, self.a.len()),
            b: axis(best.b, self.b.len()),
            c_orient: axis(best.c_orient, self.c_orient.len()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSearchConfig {
    pub k: usize,
    pub grids: Grids,
    pub refinement_rounds: usize,
    pub horizon: usize,
    pub warmup_offset: usize,
    pub r: f64,
    pub seed: u64,
}

impl Default for GridSearchConfig {
    fn default() -> Self {
        GridSearchConfig {
            k: DEFAULT_FOLDS,
            grids: Grids::default(),
            refinement_rounds: 1,
            horizon: DEFAULT_MAX_HORIZON,
            warmup_offset: DEFAULT_WARMUP_OFFSET,
            r: DEFAULT_RADIUS,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub params: SimilarityParams,
    pub cv_loss: f64,
    pub round: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSearchResult {
    pub best: SimilarityParams,
    pub cv_loss: f64,
    pub trace: Vec<TraceRow>,
    pub refinement_rounds: usize,
}

fn key(p: &SimilarityParams) -> (u64, u64, u64) {
    (p.a.to_bits(), p.b.to_bits(), p.c_orient.to_bits())
}

/// `(loss, a, b, c)` ordering: lower loss wins, ties go to the smaller
/// parameters.
fn better(candidate: &TraceRow, incumbent: &TraceRow) -> bool {
    let lex = |r: &TraceRow| (r.params.a, r.params.b, r.params.c_orient);
    match candidate.cv_loss.total_cmp(&incumbent.cv_loss) {
        std::cmp::Ordering::Less => true,
        std::cmp::Ordering::Greater => false,
        std::cmp::Ordering::Equal => lex(candidate) < lex(incumbent),
    }
}

/// Grid search over `(a, b, c_orient)` minimising the cross-validation loss,
/// followed by `refinement_rounds` geometric re-grids around the incumbent.
pub fn grid_search(corpus: &Corpus, cfg: &GridSearchConfig) -> Result<GridSearchResult> {
    cfg.grids.validate()?;
    let cv = CrossValidation::new(corpus, cfg.k, cfg.seed, cfg.horizon, cfg.warmup_offset)?;
    grid_search_with(&cv, cfg)
}

pub fn grid_search_with(cv: &CrossValidation, cfg: &GridSearchConfig) -> Result<GridSearchResult> {
    cfg.grids.validate()?;
    if !(cfg.r > 0.0) {
        return Err(Error::invalid("cutoff radius must be > 0"));
    }
    let mut trace: Vec<TraceRow> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    let mut grids = cfg.grids.clone();
    for round in 0..=cfg.refinement_rounds {
        if round > 0 {
            let best = best_of(&trace).expect("round 0 evaluated at least one point");
            grids = cfg.grids.refined(&best.params, round);
        }
        let fresh: Vec<SimilarityParams> = grids
            .points(cfg.r)
            .into_iter()
            .filter(|p| seen.insert(key(p)))
            .collect();
        if fresh.is_empty() {
            continue;
        }
        let losses = cv.cv_losses(&fresh)?;
        for (params, cv_loss) in fresh.into_iter().zip(losses) {
            trace.push(TraceRow { params, cv_loss, round });
        }
    }
    let best = best_of(&trace).expect("non-empty grid").clone();
    Ok(GridSearchResult {
        best: best.params,
        cv_loss: best.cv_loss,
        trace,
        refinement_rounds: cfg.refinement_rounds,
    })
}

fn best_of(trace: &[TraceRow]) -> Option<&TraceRow> {
    trace.iter().fold(None, |acc, row| match acc {
        Some(inc) if !better(row, inc) => Some(inc),
        _ => Some(row),
    })
}

/// CSV trace: one row per evaluated grid point.
pub fn format_trace(trace: &[TraceRow]) -> String {
    let mut s = String::from("a,b,c_orient,cv_loss,round\n");
    for row in trace {
        writeln!(
            s,
            "{},{},{},{},{}",
            row.params.a, row.params.b, row.params.c_orient, row.cv_loss, row.round
        )
        .unwrap();
    }
    s
}

pub fn write_trace_file(trace: &[TraceRow], path: &Path) -> Result<()> {
    std::fs::write(path, format_trace(trace)).map_err(|e| Error::io(path, e))
}
