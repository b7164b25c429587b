//! Seeded synthetic scenarios standing in for recorded traffic data.
//!
//! Positions carry optional Gaussian noise; speed and orientation are the
//! exact generator kinematics, like the velocity columns of a recorded
//! dataset.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::trajectory_data::{Category, Corpus, RoadUserState, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Bifurcation,
    StopYield,
    ConstantVelocity,
    CurvedRoad,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [
        Scenario::Bifurcation,
        Scenario::StopYield,
        Scenario::ConstantVelocity,
        Scenario::CurvedRoad,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::Bifurcation => "bifurcation",
            Scenario::StopYield => "stop_yield",
            Scenario::ConstantVelocity => "constant_velocity",
            Scenario::CurvedRoad => "curved_road",
        }
    }

    pub fn default_count(self) -> usize {
        match self {
            Scenario::Bifurcation => 40,
            Scenario::StopYield => 2,
            Scenario::ConstantVelocity => 20,
            Scenario::CurvedRoad => 100,
        }
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|c| c.as_str() == s.replace('-', "_"))
            .ok_or_else(|| Error::invalid(format!("unknown scenario '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub scenario: Scenario,
    pub seed: u64,
    /// Standard deviation of the additive position noise, metres.
    pub noise: f64,
    /// Number of trajectories; `None` uses the scenario default. Ignored by
    /// `stop_yield`, which always has two.
    pub trajectories: Option<usize>,
    pub sample_period: f64,
}

impl SynthConfig {
    pub fn new(scenario: Scenario, seed: u64, noise: f64) -> Self {
        SynthConfig {
            scenario,
            seed,
            noise,
            trajectories: None,
            sample_period: 0.4,
        }
    }
}

pub fn synth_scenario(scenario: Scenario, seed: u64, noise: f64) -> Result<Corpus> {
    generate(&SynthConfig::new(scenario, seed, noise))
}

pub fn generate(cfg: &SynthConfig) -> Result<Corpus> {
    if !(cfg.noise >= 0.0 && cfg.noise.is_finite()) {
        return Err(Error::invalid(format!(
            "noise must be finite and >= 0, got {}",
            cfg.noise
        )));
    }
    if !(cfg.sample_period > 0.0 && cfg.sample_period.is_finite()) {
        return Err(Error::invalid(format!(
            "sample period must be > 0, got {}",
            cfg.sample_period
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let noise = Normal::new(0.0, cfg.noise).expect("noise validated");
    let n = cfg.trajectories.unwrap_or(cfg.scenario.default_count());
    let mut g = Gen {
        rng: &mut rng,
        noise,
        period: cfg.sample_period,
        out: Vec::new(),
    };
    match cfg.scenario {
        Scenario::Bifurcation => bifurcation(&mut g, n),
        Scenario::StopYield => stop_yield(&mut g),
        Scenario::ConstantVelocity => constant_velocity(&mut g, n),
        Scenario::CurvedRoad => curved_road(&mut g, n),
    }
    let mut corpus = Corpus::new(g.out)?;
    for rec in corpus.recording_ids() {
        corpus
            .provenance
            .insert(rec, format!("synth:{}:{}", cfg.scenario.as_str(), cfg.seed));
    }
    Ok(corpus)
}

struct Gen<'r> {
    rng: &'r mut ChaCha8Rng,
    noise: Normal<f64>,
    period: f64,
    out: Vec<Trajectory>,
}

impl Gen<'_> {
    /// Samples `motion(t)` → (position, velocity) at `t0 + iΔ` for
    /// `duration` seconds.
    fn track(
        &mut self,
        key: (i64, i64),
        duration: f64,
        t0: f64,
        motion: impl Fn(f64) -> (Vec2, Vec2),
    ) -> &mut Trajectory {
        let n = (duration / self.period).round() as usize + 1;
        let states = (0..n)
            .map(|i| {
                let (p, v) = motion(t0 + i as f64 * self.period);
                let jitter = Vec2::new(self.noise.sample(self.rng), self.noise.sample(self.rng));
                let speed = v.norm();
                // stopped samples keep the heading they stopped with
                let orientation = v.normalized().unwrap_or_else(|| {
                    let (_, v_prev) = motion(t0 + i as f64 * self.period - 1e-3);
                    v_prev.normalized().unwrap_or(Vec2::new(1.0, 0.0))
                });
                RoadUserState {
                    position: p + jitter,
                    speed,
                    orientation,
                }
            })
            .collect();
        self.out.push(Trajectory {
            recording_id: key.0,
            track_id: key.1,
            category: Category::Vehicle,
            location_id: 1,
            sample_period: self.period,
            states,
            other_positions: None,
        });
        self.out.last_mut().unwrap()
    }
}

pub const BIFURCATION_SPEED: f64 = 10.0;
/// Where the stopping vehicles start braking.
pub const BIFURCATION_BRANCH_X: f64 = 30.0;
/// Where the stopping vehicles come to rest.
pub const BIFURCATION_STOP_X: f64 = 60.0;
const BIFURCATION_DURATION: f64 = 10.0;

/// Noise-free `(x, speed)` at time `t` on either branch of the bifurcation
/// road. Both branches start at `x = 0` with the same speed.
pub fn bifurcation_motion(stopping: bool, t: f64) -> (f64, f64) {
    let v = BIFURCATION_SPEED;
    let x = v * t;
    if !stopping || x <= BIFURCATION_BRANCH_X {
        return (x, v);
    }
    let decel = v * v / (2.0 * (BIFURCATION_STOP_X - BIFURCATION_BRANCH_X));
    let tau = t - BIFURCATION_BRANCH_X / v;
    let t_stop = v / decel;
    if tau >= t_stop {
        return (BIFURCATION_STOP_X, 0.0);
    }
    (
        BIFURCATION_BRANCH_X + v * tau - 0.5 * decel * tau * tau,
        v - decel * tau,
    )
}

fn bifurcation(g: &mut Gen<'_>, n: usize) {
    for k in 0..n {
        let stopping = k % 2 == 0;
        // sub-sample start offset so the database covers the road densely
        let t0 = g.rng.gen_range(0.0..g.period);
        g.track(((k % 4) as i64 + 1, k as i64 + 1), BIFURCATION_DURATION, t0, |t| {
            let (x, v) = bifurcation_motion(stopping, t);
            (Vec2::new(x, 0.0), Vec2::new(v, 0.0))
        });
    }
}

pub const STOP_YIELD_SPEED: f64 = 8.0;
pub const STOP_YIELD_ACCEL: f64 = 2.0;
pub const STOP_YIELD_START_X: f64 = -100.0;
/// The target comes to rest at the stop line `x = 0` at this time.
pub const STOP_YIELD_STOP_TIME: f64 = 14.5;
/// The target departs once the crossing vehicle has passed.
pub const STOP_YIELD_DEPART_TIME: f64 = 18.6;
/// The crossing vehicle drives along `x = STOP_YIELD_CROSSING_X` and is at
/// `y = 0` at this time.
pub const STOP_YIELD_CROSSING_TIME: f64 = 18.0;
pub const STOP_YIELD_CROSSING_X: f64 = 6.0;
pub const STOP_YIELD_CROSSING_SPEED: f64 = 10.0;
const STOP_YIELD_DURATION: f64 = 28.0;

/// Noise-free `(x, speed)` of the yielding target at time `t`.
pub fn stop_yield_motion(t: f64) -> (f64, f64) {
    let (v, a) = (STOP_YIELD_SPEED, STOP_YIELD_ACCEL);
    let t_brake = STOP_YIELD_STOP_TIME - v / a;
    if t <= t_brake {
        return (STOP_YIELD_START_X + v * t, v);
    }
    if t <= STOP_YIELD_STOP_TIME {
        let tau = STOP_YIELD_STOP_TIME - t;
        return (-0.5 * a * tau * tau, a * tau);
    }
    if t <= STOP_YIELD_DEPART_TIME {
        return (0.0, 0.0);
    }
    let tau = t - STOP_YIELD_DEPART_TIME;
    if tau <= v / a {
        return (0.5 * a * tau * tau, a * tau);
    }
    (0.5 * v * v / a + v * (tau - v / a), v)
}

pub fn stop_yield_other_position(t: f64) -> Vec2 {
    Vec2::new(
        STOP_YIELD_CROSSING_X,
        STOP_YIELD_CROSSING_SPEED * (t - STOP_YIELD_CROSSING_TIME),
    )
}

/// Track 1 yields to a crossing vehicle annotated at every sample; track 2
/// drives through at constant speed with no other vehicle.
fn stop_yield(g: &mut Gen<'_>) {
    let period = g.period;
    let target = g.track((1, 1), STOP_YIELD_DURATION, 0.0, |t| {
        let (x, v) = stop_yield_motion(t);
        (Vec2::new(x, 0.0), Vec2::new(v, 0.0))
    });
    let others = (0..target.len())
        .map(|i| Some(stop_yield_other_position(i as f64 * period)))
        .collect();
    target.other_positions = Some(others);
    let free = g.track((2, 2), STOP_YIELD_DURATION, 0.0, |t| {
        (
            Vec2::new(STOP_YIELD_START_X + STOP_YIELD_SPEED * t, 0.0),
            Vec2::new(STOP_YIELD_SPEED, 0.0),
        )
    });
    free.other_positions = Some(vec![None; free.len()]);
}

fn constant_velocity(g: &mut Gen<'_>, n: usize) {
    for k in 0..n {
        let start = Vec2::new(g.rng.gen_range(-20.0..20.0), g.rng.gen_range(-20.0..20.0));
        let heading = g.rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
        let speed = g.rng.gen_range(2.0..12.0);
        let v = Vec2::from_angle(heading) * speed;
        g.track(((k % 4) as i64 + 1, k as i64 + 1), 10.0, 0.0, |t| (start + v * t, v));
    }
}

pub const CURVE_RADIUS: f64 = 30.0;
/// Turn angle of the curve, radians.
pub const CURVE_ANGLE: f64 = 1.5 * std::f64::consts::PI;
const CURVE_DURATION: f64 = 12.0;

/// Position and unit tangent at arc length `s` on a road that runs along
/// `+x` up to the origin, turns left on a circle of radius `radius` and
/// leaves on the exit tangent.
pub fn curve_point(radius: f64, s: f64) -> (Vec2, Vec2) {
    let center = Vec2::new(0.0, CURVE_RADIUS);
    let start = center + Vec2::new(0.0, -radius);
    if s <= 0.0 {
        return (start + Vec2::new(s, 0.0), Vec2::new(1.0, 0.0));
    }
    let arc = radius * CURVE_ANGLE;
    let phi = s.min(arc) / radius;
    let tangent = Vec2::from_angle(phi);
    let p = center + Vec2::new(radius * phi.sin(), -radius * phi.cos());
    if s <= arc {
        (p, tangent)
    } else {
        (p + tangent * (s - arc), tangent)
    }
}

fn curved_road(g: &mut Gen<'_>, n: usize) {
    for k in 0..n {
        let lane = g.rng.gen_range(-1.0..1.0);
        let speed = g.rng.gen_range(6.0..10.0);
        let s0 = g.rng.gen_range(-15.0..20.0);
        g.track(((k % 10) as i64 + 1, k as i64 + 1), CURVE_DURATION, 0.0, |t| {
            let (p, o) = curve_point(CURVE_RADIUS + lane, s0 + speed * t);
            (p, o * speed)
        });
    }
}

fn ind_class(c: Category) -> &'static str {
    match c {
        Category::Vehicle | Category::Car => "car",
        Category::TruckBus => "truck_bus",
        Category::Bicycle => "bicycle",
        Category::Pedestrian => "pedestrian",
    }
}

/// Writes the corpus as InD-style tables, one `NN_tracks.csv`,
/// `NN_tracksMeta.csv` and `NN_recordingMeta.csv` per recording. Frames are
/// sample indices; other-vehicle annotations are not exported.
pub fn write_ind_dir(corpus: &Corpus, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for rec in corpus.recording_ids() {
        let trajs: Vec<&Trajectory> = corpus.iter().filter(|t| t.recording_id == rec).collect();
        let mut tracks = String::from("recordingId,trackId,frame,xCenter,yCenter,xVelocity,yVelocity\n");
        let mut meta = String::from("recordingId,trackId,class\n");
        for t in &trajs {
            writeln!(meta, "{rec},{},{}", t.track_id, ind_class(t.category)).unwrap();
            for (i, s) in t.states.iter().enumerate() {
                let v = s.velocity();
                writeln!(
                    tracks,
                    "{rec},{},{i},{},{},{},{}",
                    t.track_id, s.position.x, s.position.y, v.x, v.y
                )
                .unwrap();
            }
        }
        let location = trajs[0].location_id;
        let recording_meta = format!(
            "recordingId,locationId,frameRate\n{rec},{location},{}\n",
            1.0 / trajs[0].sample_period
        );
        for (suffix, body) in [
            ("tracks", tracks),
            ("tracksMeta", meta),
            ("recordingMeta", recording_meta),
        ] {
            let path = dir.join(format!("{rec:02}_{suffix}.csv"));
            std::fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trajectory_data::{ingest_ind_dir, write_corpus, SchemaAdapter};

    fn write_corpus_to_string(c: &Corpus) -> String {
        let mut buf = Vec::new();
        write_corpus(c, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn bifurcation_branch_gap() {
        // from x = 0, 4.8 s ahead: the constant branch covers 48 m, the
        // stopping branch brakes over the last 1.8 s
        let (x_go, _) = bifurcation_motion(false, 4.8);
        let (x_stop, _) = bifurcation_motion(true, 4.8);
        assert!((x_go - 48.0).abs() < 1e-12);
        let decel = 100.0 / 60.0;
        assert!((x_go - x_stop - 0.5 * decel * 1.8 * 1.8).abs() < 1e-12);
        assert_eq!(bifurcation_motion(true, 9.0), (60.0, 0.0));

        let c = synth_scenario(Scenario::Bifurcation, 3, 0.0).unwrap();
        assert_eq!(c.len(), 40);
        let stopped = c.iter().filter(|t| t.states.last().unwrap().speed == 0.0).count();
        assert_eq!(stopped, 20);
        assert!(c.iter().all(|t| t.states.iter().all(|s| s.position.y == 0.0)));
    }

    #[test]
    fn stop_yield_shape() {
        let c = synth_scenario(Scenario::StopYield, 0, 0.0).unwrap();
        assert_eq!(c.len(), 2);
        let target = &c.trajectories()[0];
        let free = &c.trajectories()[1];
        assert!(target.other_positions.as_ref().unwrap().iter().all(Option::is_some));
        assert!(free.other_positions.as_ref().unwrap().iter().all(Option::is_none));
        assert!(free.states.iter().all(|s| s.speed == STOP_YIELD_SPEED));
        // continuous motion
        assert!(stop_yield_motion(STOP_YIELD_STOP_TIME - 1e-9).0.abs() < 1e-6);
        assert_eq!(stop_yield_motion(16.0), (0.0, 0.0));
        assert!((stop_yield_motion(0.0).0 - STOP_YIELD_START_X).abs() < 1e-12);
        // braking covers v²/2a = 16 m
        assert!((stop_yield_motion(STOP_YIELD_STOP_TIME - 4.0).0 + 16.0).abs() < 1e-12);
        let braking = STOP_YIELD_STOP_TIME - STOP_YIELD_SPEED / STOP_YIELD_ACCEL;
        assert!((stop_yield_motion(braking).0 - stop_yield_motion(braking + 1e-9).0).abs() < 1e-6);
        // the crossing vehicle has passed before the target departs
        assert!(stop_yield_other_position(STOP_YIELD_DEPART_TIME).y > 0.0);
        let waiting = target.states.iter().filter(|s| s.speed == 0.0).count();
        assert!(waiting >= 10, "{waiting}");
        assert!(target.states.iter().all(|s| s.orientation == Vec2::new(1.0, 0.0)));
    }

    #[test]
    fn curve_is_continuous() {
        for s in [0.0, CURVE_RADIUS * CURVE_ANGLE] {
            let (a, ta) = curve_point(CURVE_RADIUS, s - 1e-9);
            let (b, tb) = curve_point(CURVE_RADIUS, s + 1e-9);
            assert!(a.distance(b) < 1e-6 && ta.distance(tb) < 1e-6);
        }
        let (p, o) = curve_point(CURVE_RADIUS, CURVE_RADIUS * std::f64::consts::FRAC_PI_2);
        assert!(p.distance(Vec2::new(CURVE_RADIUS, CURVE_RADIUS)) < 1e-12);
        assert!(o.distance(Vec2::new(0.0, 1.0)) < 1e-12);
    }

    #[test]
    fn seeded_determinism() {
        for s in Scenario::ALL {
            let a = write_corpus_to_string(&synth_scenario(s, 7, 0.2).unwrap());
            let b = write_corpus_to_string(&synth_scenario(s, 7, 0.2).unwrap());
            let c = write_corpus_to_string(&synth_scenario(s, 8, 0.2).unwrap());
            assert_eq!(a, b);
            assert_ne!(a, c);
        }
        assert!(synth_scenario(Scenario::CurvedRoad, 0, -1.0).is_err());
        assert_eq!("stop-yield".parse::<Scenario>().unwrap(), Scenario::StopYield);
    }

    #[test]
    fn ind_round_trip() {
        let mut cfg = SynthConfig::new(Scenario::ConstantVelocity, 1, 0.0);
        cfg.sample_period = 0.04;
        cfg.trajectories = Some(6);
        let c = generate(&cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_ind_dir(&c, dir.path()).unwrap();
        let (back, report) = ingest_ind_dir(dir.path(), &SchemaAdapter::default()).unwrap();
        assert_eq!(report.tracks, 6);
        assert_eq!(back.len(), 6);
        for a in c.iter() {
            let b = back.iter().find(|b| b.key() == a.key()).unwrap();
            assert_eq!(b.category, Category::Car);
            assert_eq!(b.location_id, 1);
            assert_eq!(a.len(), b.len());
            assert!(a.states[3].position.distance(b.states[3].position) < 1e-9);
        }
    }
}
