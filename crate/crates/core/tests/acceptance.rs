//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.
//!
//! Criterion 10 needs the recorded intersection dataset and runs only when
//! `WAM_IND_DIR` points at a directory of its `*_tracks.csv` tables.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wam::evaluation::{self, EvalConfig, Model};
use wam::kernel::{self, InteractionParams, ParamSet, TaggedParams};
use wam::physics::{min_horizon, BrakingQuery};
use wam::predictor::DisplacementDatabase;
use wam::spatial_index::RadiusIndex;
use wam::synth::{self, Scenario, SynthConfig};
use wam::training::{self, CrossValidation, GridSearchConfig, Grids};
use wam::trajectory_data::{self as td, Category, Corpus, RoadUserState, Trajectory};
use wam::{SimilarityParams, TrafficSituationState, Vec2};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within_budget(start: Instant, budget: Duration) -> Result<(), String> {
    let t = start.elapsed();
    check(
        t < budget,
        format!("runtime {:.1} s exceeds {:.0} s", t.as_secs_f64(), budget.as_secs_f64()),
    )
}

/// Kernel exponent written out independently of the library.
fn oracle_exponent(p: &SimilarityParams, q: &RoadUserState, o: &RoadUserState) -> Option<f64> {
    let dx = q.position.x - o.position.x;
    let dy = q.position.y - o.position.y;
    let d2 = dx * dx + dy * dy;
    if d2 > p.r * p.r {
        return None;
    }
    let cos = (q.orientation.x * o.orientation.x + q.orientation.y * o.orientation.y).clamp(-1.0, 1.0);
    let theta = cos.acos();
    let ds = q.speed - o.speed;
    Some(p.a * d2 + p.b * ds * ds + p.c_orient * theta * theta)
}

fn random_state(rng: &mut ChaCha8Rng, half_width: f64) -> RoadUserState {
    RoadUserState {
        position: Vec2::new(
            rng.gen_range(-half_width..half_width),
            rng.gen_range(-half_width..half_width),
        ),
        speed: rng.gen_range(0.0..10.0),
        orientation: Vec2::from_angle(rng.gen_range(-PI..PI)),
    }
}

fn random_trajectory(rng: &mut ChaCha8Rng, track: i64, len: usize, half_width: f64) -> Trajectory {
    Trajectory {
        recording_id: 1,
        track_id: track,
        category: Category::Vehicle,
        location_id: 1,
        sample_period: 0.4,
        states: (0..len).map(|_| random_state(rng, half_width)).collect(),
        other_positions: None,
    }
}

/// Newton iterations with central-difference derivatives on the weighted
/// squared-error objective, evaluated from scratch over the database rows.
fn numeric_minimiser(db: &DisplacementDatabase, p: &SimilarityParams, q: &RoadUserState) -> Vec2 {
    let rows: Vec<(f64, Vec2)> = db
        .entries()
        .iter()
        .enumerate()
        .filter_map(|(i, e)| oracle_exponent(p, q, &e.state).map(|x| (x, db.displacement(i, 0))))
        .collect();
    // common factor exp(-min) keeps the objective representable; it does not
    // move the minimiser
    let m = rows.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
    let f = |x: f64, y: f64| -> f64 {
        rows.iter()
            .map(|(e, d)| (m - e).exp() * ((x - d.x).powi(2) + (y - d.y).powi(2)))
            .sum()
    };
    let (mut x, mut y) = (0.0, 0.0);
    let h = 1e-2;
    for _ in 0..4 {
        let gx = (f(x + h, y) - f(x - h, y)) / (2.0 * h);
        let gy = (f(x, y + h) - f(x, y - h)) / (2.0 * h);
        let hxx = (f(x + h, y) - 2.0 * f(x, y) + f(x - h, y)) / (h * h);
        let hyy = (f(x, y + h) - 2.0 * f(x, y) + f(x, y - h)) / (h * h);
        let hxy = (f(x + h, y + h) - f(x + h, y - h) - f(x - h, y + h) + f(x - h, y - h)) / (4.0 * h * h);
        let det = hxx * hyy - hxy * hxy;
        x -= (hyy * gx - hxy * gy) / det;
        y -= (hxx * gy - hxy * gx) / det;
    }
    Vec2::new(x, y)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for case in 0..100 {
        let n_traj = rng.gen_range(1..=10);
        let trajs = (0..n_traj)
            .map(|k| {
                let len = rng.gen_range(2..=6);
                random_trajectory(&mut rng, k, len, 5.0)
            })
            .collect();
        let corpus = Corpus::new(trajs).unwrap();
        let db = DisplacementDatabase::build(&corpus, &[1], 0).unwrap();
        check(db.len() <= 50, format!("case {case}: {} entries", db.len()))?;
        let p = SimilarityParams::new(
            rng.gen_range(0.0..1.0),
            rng.gen_range(0.0..0.5),
            rng.gen_range(0.0..5.0),
            15.0,
        )
        .unwrap();
        let q = random_state(&mut rng, 5.0);
        let pred = db.predict(&p, &q, 1).map_err(|e| format!("case {case}: {e}"))?;
        let oracle = numeric_minimiser(&db, &p, &q);
        let err = pred.displacement.distance(oracle);
        worst = worst.max(err);
        check(err <= 1e-6, format!("case {case}: |predict - argmin| = {err:.3e} m"))?;
    }
    within_budget(start, Duration::from_secs(10))?;
    Ok(format!("max |predict - argmin| = {worst:.2e} m over 100 databases"))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut hits = 0usize;
    for set in 0..50 {
        let n = rng.gen_range(1..=10_000);
        let clustered = set % 3 == 0;
        let points: Vec<Vec2> = (0..n)
            .map(|_| {
                if clustered {
                    // coarse lattice with many exact duplicates
                    Vec2::new(rng.gen_range(0..20) as f64, rng.gen_range(0..20) as f64)
                } else {
                    Vec2::new(rng.gen_range(-200.0..200.0), rng.gen_range(-200.0..200.0))
                }
            })
            .collect();
        let leaf = rng.gen_range(1..=64);
        let index = RadiusIndex::build(points.clone(), leaf).unwrap();
        for _ in 0..100 {
            let c = Vec2::new(rng.gen_range(-220.0..220.0), rng.gen_range(-220.0..220.0));
            let r = if rng.gen_bool(0.1) {
                1e-9
            } else {
                rng.gen_range(1e-3..60.0)
            };
            let got = index.query_radius(c, r).unwrap();
            let want: Vec<usize> = points
                .iter()
                .enumerate()
                .filter(|(_, p)| {
                    let (dx, dy) = (p.x - c.x, p.y - c.y);
                    dx * dx + dy * dy <= r * r
                })
                .map(|(i, _)| i)
                .collect();
            check(got == want, format!("set {set}: radius query differs from scan"))?;
            hits += got.len();
        }
    }
    within_budget(start, Duration::from_secs(30))?;
    Ok(format!("5000 queries equal to linear scan ({hits} hits)"))
}

fn criterion_3() -> Outcome {
    let p = SimilarityParams::new(0.5, 1.0, 50.0, 15.0).unwrap();
    let r0 = RoadUserState::new(Vec2::new(0.0, 0.0), 5.0, Vec2::new(1.0, 0.0)).unwrap();
    check(kernel::similarity(&p, &r0, &r0) == 1.0, "sigma(R, R) != 1")?;
    let one_m = RoadUserState {
        position: Vec2::new(1.0, 0.0),
        ..r0
    };
    let s = kernel::similarity(&p, &r0, &one_m);
    check((s - (-0.5f64).exp()).abs() <= 1e-12, format!("1 m example gives {s}"))?;
    let far = RoadUserState {
        position: Vec2::new(16.0, 0.0),
        ..r0
    };
    check(kernel::similarity(&p, &r0, &far) == 0.0, "16 m beyond r = 15 is not 0")?;

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for i in 0..1000 {
        let p = SimilarityParams::new(
            rng.gen_range(0.0..2.0),
            rng.gen_range(0.0..20.0),
            rng.gen_range(0.0..200.0),
            15.0,
        )
        .unwrap();
        let a = random_state(&mut rng, 8.0);
        let b = random_state(&mut rng, 8.0);
        let s_ab = kernel::similarity(&p, &a, &b);
        check(
            s_ab == kernel::similarity(&p, &b, &a),
            format!("triple {i}: asymmetric"),
        )?;
        check((0.0..=1.0).contains(&s_ab), format!("triple {i}: out of [0, 1]"))?;
        // moving the third state further away along a fixed direction in
        // position, speed and heading never increases similarity
        let c = random_state(&mut rng, 8.0);
        let dp = c.position - a.position;
        let ds = c.speed - a.speed;
        let dh = rng.gen_range(0.0..PI);
        let heading = a.orientation.y.atan2(a.orientation.x);
        let at = |t: f64| RoadUserState {
            position: a.position + dp * t,
            speed: (a.speed + ds * t).max(0.0),
            orientation: Vec2::from_angle(heading + dh * t),
        };
        let (t1, t2) = {
            let u: f64 = rng.gen_range(0.0..1.0);
            let v: f64 = rng.gen_range(0.0..1.0);
            (u.min(v), u.max(v))
        };
        // keep the speed path away from the clamp so it stays monotone
        if a.speed + ds * t2 >= 0.0 {
            let (s1, s2) = (kernel::similarity(&p, &a, &at(t1)), kernel::similarity(&p, &a, &at(t2)));
            check(
                s1 >= s2,
                format!("triple {i}: similarity grew with distance ({s1} < {s2})"),
            )?;
        }
    }
    Ok("identity, exp(-0.5) example, cutoff, 1000 random triples".into())
}

fn criterion_4() -> Outcome {
    let mut out = Vec::new();
    for (kmh, mu, want) in [
        (30.0, 0.8, 1.06),
        (50.0, 0.8, 1.77),
        (30.0, 0.5, 1.70),
        (50.0, 0.5, 2.83),
    ] {
        let h = min_horizon(&BrakingQuery::from_kmh(kmh, mu)).map_err(|e| e.to_string())?;
        check(
            (h - want).abs() <= 0.01,
            format!("{kmh} km/h, mu {mu}: {h:.4} s, expected {want}"),
        )?;
        out.push(format!("{h:.2}"));
    }
    Ok(format!("horizons {} s", out.join(", ")))
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let horizon = 12;
    let train = synth::synth_scenario(Scenario::Bifurcation, 5, 0.05).unwrap();
    let queries = synth::synth_scenario(Scenario::Bifurcation, 6, 0.05).unwrap();
    let db = DisplacementDatabase::build(&train, &[horizon], 7).unwrap();
    let base = SimilarityParams::reference(Category::Vehicle, 1).unwrap();
    let sharp = base.scaled(1e6);
    let flat = SimilarityParams::new(0.0, 0.0, 0.0, base.r).unwrap();
    let mut worst_nn: f64 = 0.0;
    let mut worst_mean: f64 = 0.0;
    let mut n = 0;
    let mut branch_gap: f64 = 0.0;
    for t in queries.iter() {
        for q in &t.states {
            let scored: Vec<(f64, Vec2)> = db
                .entries()
                .iter()
                .enumerate()
                .filter_map(|(i, e)| oracle_exponent(&sharp, q, &e.state).map(|x| (x, db.displacement(i, 0))))
                .collect();
            if scored.is_empty() {
                continue;
            }
            n += 1;
            let nn = scored.iter().min_by(|a, b| a.0.total_cmp(&b.0)).unwrap().1;
            let p = db.predict(&sharp, q, horizon).map_err(|e| e.to_string())?;
            worst_nn = worst_nn.max(p.displacement.distance(nn));

            let mean = scored.iter().fold(Vec2::ZERO, |acc, s| acc + s.1) / scored.len() as f64;
            let u = db.predict(&flat, q, horizon).map_err(|e| e.to_string())?;
            worst_mean = worst_mean.max(u.displacement.distance(mean));
            if q.position.x < synth::BIFURCATION_BRANCH_X - 5.0 {
                let xs: Vec<f64> = scored.iter().map(|s| s.1.x).collect();
                let spread = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
                    - xs.iter().cloned().fold(f64::INFINITY, f64::min);
                branch_gap = branch_gap.max(spread);
            }
        }
    }
    check(n > 500, format!("only {n} queries"))?;
    check(
        worst_nn <= 1e-3,
        format!("scaled 1e6: worst distance to nearest neighbour {worst_nn:.3e} m"),
    )?;
    check(
        worst_mean <= 1e-9,
        format!("zero parameters: worst distance to in-radius mean {worst_mean:.3e} m"),
    )?;
    // the two branches disagree before the branch point, so averaging there
    // cannot match both
    check(
        branch_gap > 1.0,
        format!("pre-branch displacement spread {branch_gap:.2} m"),
    )?;
    within_budget(start, Duration::from_secs(30))?;
    Ok(format!(
        "{n} queries: nn error {worst_nn:.1e} m, mean error {worst_mean:.1e} m, pre-branch spread {branch_gap:.1} m"
    ))
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let horizon = 10;
    let corpus = synth::synth_scenario(Scenario::StopYield, 0, 0.0).unwrap();
    let db = DisplacementDatabase::build(&corpus, &[horizon], 7).unwrap();
    let base = SimilarityParams::reference(Category::Vehicle, 1).unwrap();
    let ip = InteractionParams::new(base, 0.5, 0.0).unwrap();
    let target = &corpus.trajectories()[0];
    let others = target.other_positions.as_ref().unwrap();
    let braking_start = synth::STOP_YIELD_STOP_TIME - synth::STOP_YIELD_SPEED / synth::STOP_YIELD_ACCEL;

    let (mut before, mut waiting) = (Vec::new(), Vec::new());
    for t in db.entries().iter().filter(|e| e.trajectory == 0).map(|e| e.time) {
        let q = target.states[t];
        let truth = target.states[t + horizon].position;
        let base_err = db
            .predict(&base, &q, horizon)
            .map_err(|e| e.to_string())?
            .position
            .distance(truth);
        let time = t as f64 * target.sample_period;
        if time < braking_start {
            before.push(base_err);
        }
        if q.speed == 0.0 {
            let sit = TrafficSituationState::new(q, others[t]).unwrap();
            let int_err = db
                .interaction_predict(&ip, &sit, horizon)
                .map_err(|e| e.to_string())?
                .position
                .distance(truth);
            check(
                int_err < base_err,
                format!("t = {time:.1} s: interaction error {int_err:.3} m not below base error {base_err:.3} m"),
            )?;
            waiting.push(base_err);
        }
    }
    check(waiting.len() >= 5, format!("only {} waiting instants", waiting.len()))?;
    let median = |v: &[f64]| wam::stats::percentile(v, 0.5).unwrap();
    let (before_median, waiting_median) = (median(&before), median(&waiting));
    check(
        before_median < waiting_median,
        format!("base error median before braking {before_median:.2} m not below waiting median {waiting_median:.2} m"),
    )?;
    within_budget(start, Duration::from_secs(10))?;
    Ok(format!(
        "{} waiting instants; base error median {before_median:.2} m before braking, {waiting_median:.2} m while waiting",
        waiting.len()
    ))
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let cfg = SynthConfig {
        trajectories: Some(500),
        ..SynthConfig::new(Scenario::CurvedRoad, 7, 0.1)
    };
    let corpus = synth::generate(&cfg).unwrap();
    let split = td::split_by_recordings(&corpus, 0.7).map_err(|e| e.to_string())?;
    let gs = GridSearchConfig::default();
    let fit = training::grid_search(&split.train, &gs).map_err(|e| e.to_string())?;
    let db = DisplacementDatabase::build(&split.train, &[1, 12], gs.warmup_offset).map_err(|e| e.to_string())?;
    let params = ParamSet {
        blocks: vec![TaggedParams::new(None, None, fit.best)],
    };
    let ecfg = EvalConfig {
        horizons: vec![1, 12],
        ..EvalConfig::default()
    };
    let wam = evaluation::evaluate(
        &Model::Wam {
            db: &db,
            params: &params,
        },
        &split.test,
        &ecfg,
    )
    .map_err(|e| e.to_string())?;
    let cv = evaluation::evaluate(&Model::ConstantVelocity { sample_period: 0.4 }, &split.test, &ecfg)
        .map_err(|e| e.to_string())?;
    let median = |rs: &[evaluation::ErrorRecord], h: usize| -> Result<f64, String> {
        let st = evaluation::horizon_stats(rs.iter().filter(|r| r.horizon_steps == h));
        st.first()
            .map(|s| s.median)
            .ok_or_else(|| format!("no errors at horizon {h}"))
    };
    let (w12, c12) = (median(&wam, 12)?, median(&cv, 12)?);
    let (w1, c1) = (median(&wam, 1)?, median(&cv, 1)?);
    check(w12 < c12, format!("4.8 s medians: wam {w12:.3} m, cv {c12:.3} m"))?;
    check(
        w1 <= 2.0 * c1 && c1 <= 2.0 * w1,
        format!("0.4 s medians not within 2x: wam {w1:.3} m, cv {c1:.3} m"),
    )?;
    within_budget(start, Duration::from_secs(300))?;
    Ok(format!(
        "learned ({}, {}, {}); medians 0.4 s wam {w1:.3} / cv {c1:.3} m, 4.8 s wam {w12:.3} / cv {c12:.3} m; {:.0} s",
        fit.best.a,
        fit.best.b,
        fit.best.c_orient,
        start.elapsed().as_secs_f64()
    ))
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for case in 0..200 {
        let k = rng.gen_range(2..=6);
        let n = rng.gen_range(k..k + 40);
        let trajs = (0..n)
            .map(|i| {
                let len = rng.gen_range(1..30);
                random_trajectory(&mut rng, i as i64, len, 10.0)
            })
            .collect();
        let corpus = Corpus::new(trajs).unwrap();
        let horizon = rng.gen_range(1..4);
        let Ok(db) = DisplacementDatabase::build(&corpus, &[horizon], rng.gen_range(0..8)) else {
            continue;
        };
        let counts = training::entry_counts(&db, corpus.len());
        let folds = training::partition_folds(&counts, k, rng.gen()).map_err(|e| e.to_string())?;
        check(
            folds.assignment.len() == corpus.len(),
            format!("case {case}: assignment length"),
        )?;
        check(
            folds.assignment.iter().all(|&f| f < k),
            format!("case {case}: fold out of range"),
        )?;
        // entries assigned through their trajectory: each lands in exactly
        // one fold and the per-fold totals match
        let mut recount = vec![0usize; k];
        for e in db.entries() {
            recount[folds.assignment[e.trajectory]] += 1;
        }
        check(
            recount == folds.fold_sizes,
            format!("case {case}: fold sizes {:?} vs {recount:?}", folds.fold_sizes),
        )?;
        check(
            recount.iter().sum::<usize>() == db.len(),
            format!("case {case}: coverage"),
        )?;
        let largest = *counts.iter().max().unwrap();
        let (mx, mn) = (*recount.iter().max().unwrap(), *recount.iter().min().unwrap());
        check(
            mx - mn <= largest,
            format!("case {case}: imbalance {} > {largest}", mx - mn),
        )?;
    }
    Ok("200 corpora: disjoint, covering, grouped, balanced".into())
}

fn criterion_9() -> Outcome {
    let cfg = SynthConfig {
        trajectories: Some(30),
        ..SynthConfig::new(Scenario::Bifurcation, 9, 0.05)
    };
    let corpus = synth::generate(&cfg).unwrap();
    let gs = GridSearchConfig {
        grids: Grids {
            a: vec![0.1, 0.5, 2.0],
            b: vec![0.0, 1.0, 10.0],
            c_orient: vec![10.0, 100.0],
        },
        refinement_rounds: 2,
        seed: 4,
        ..GridSearchConfig::default()
    };
    let r1 = training::grid_search(&corpus, &gs).map_err(|e| e.to_string())?;
    let r2 = training::grid_search(&corpus, &gs).map_err(|e| e.to_string())?;
    check(
        r1.trace.iter().all(|row| r1.cv_loss <= row.cv_loss),
        "returned loss above a trace entry",
    )?;
    check(
        r1.trace
            .iter()
            .any(|row| row.params == r1.best && row.cv_loss == r1.cv_loss),
        "best not in trace",
    )?;
    let (t1, t2) = (training::format_trace(&r1.trace), training::format_trace(&r2.trace));
    check(t1.as_bytes() == t2.as_bytes(), "traces differ between identical runs")?;
    // an independent recomputation of the winning loss
    let cv = CrossValidation::new(&corpus, gs.k, gs.seed, gs.horizon, gs.warmup_offset).unwrap();
    check(cv.cv_loss(&r1.best).unwrap() == r1.cv_loss, "recomputed loss differs")?;
    Ok(format!(
        "{} trace rows, best loss {:.4}, traces byte-identical",
        r1.trace.len(),
        r1.cv_loss
    ))
}

/// Processed counts per (location, category): (before, after).
const PROCESSED_COUNTS: [(i64, Category, usize, usize); 6] = [
    (1, Category::Bicycle, 434, 360),
    (1, Category::Pedestrian, 801, 755),
    (1, Category::Vehicle, 2503, 959),
    (2, Category::Bicycle, 1700, 1601),
    (2, Category::Pedestrian, 2099, 2015),
    (2, Category::Vehicle, 2436, 2094),
];

fn criterion_10(dir: &str) -> Outcome {
    let (raw, _) =
        td::ingest_ind_dir(std::path::Path::new(dir), &td::SchemaAdapter::default()).map_err(|e| e.to_string())?;
    let mut kept = Vec::new();
    for t in raw.iter().filter(|t| t.location_id == 1 || t.location_id == 2) {
        let mut t = td::downsample(t, td::DEFAULT_DOWNSAMPLE).map_err(|e| e.to_string())?;
        // motionless tracks keep pending orientations; the filter drops them
        let _ = t.derive_orientations();
        kept.push(t);
    }
    let (_, report) = td::filter_corpus(&Corpus::new(kept).unwrap(), &td::FilterConfig::default());
    let mut mismatches = Vec::new();
    for (loc, cat, before, after) in PROCESSED_COUNTS {
        let got = report.cells.get(&(cat, loc)).copied().unwrap_or((0, 0));
        if got != (before, after) {
            mismatches.push(format!(
                "location {loc} {}: {got:?} vs ({before}, {after})",
                cat.as_str()
            ));
        }
    }
    check(mismatches.is_empty(), mismatches.join("; "))?;
    Ok("processed counts match for locations 1-2".into())
}

fn main() {
    // `cargo test -- --list` and filters are meaningless for this suite
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: Vec<Criterion> = vec![
        ("1 closed form equals numeric argmin", criterion_1),
        ("2 radius index equals linear scan", criterion_2),
        ("3 kernel numerics", criterion_3),
        ("4 braking horizons", criterion_4),
        ("5 bifurcation parameter limits", criterion_5),
        ("6 interaction scenario", criterion_6),
        ("7 curved road beats constant velocity", criterion_7),
        ("8 fold constraints", criterion_8),
        ("9 grid search soundness", criterion_9),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        match f() {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {name}: {why}");
            }
        }
    }
    match std::env::var("WAM_IND_DIR") {
        Ok(dir) => match criterion_10(&dir) {
            Ok(detail) => println!("PASS criterion 10 recorded-data counts: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion 10 recorded-data counts: {why}");
            }
        },
        Err(_) => println!("SKIP criterion 10 recorded-data counts: WAM_IND_DIR not set"),
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
