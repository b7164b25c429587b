use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::Read;
use std::path::Path;

use log::warn;

use super::{Category, Corpus, RoadUserState, Trajectory, NATIVE_SAMPLE_PERIOD};
use crate::error::{Error, Result};
use crate::geometry::Vec2;

/// Column names of the per-frame, track-metadata and recording-metadata
/// tables. Defaults follow the InD file layout.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemaAdapter {
    pub recording_id: String,
    pub track_id: String,
    pub frame: String,
    pub x: String,
    pub y: String,
    pub vx: String,
    pub vy: String,
    pub class: String,
    pub location_id: String,
    pub sample_period: f64,
}

impl Default for SchemaAdapter {
    fn default() -> Self {
        SchemaAdapter {
            recording_id: "recordingId".into(),
            track_id: "trackId".into(),
            frame: "frame".into(),
            x: "xCenter".into(),
            y: "yCenter".into(),
            vx: "xVelocity".into(),
            vy: "yVelocity".into(),
            class: "class".into(),
            location_id: "locationId".into(),
            sample_period: NATIVE_SAMPLE_PERIOD,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct IngestReport {
    pub tracks: usize,
    pub rows: usize,
    /// Unknown class string → number of tracks skipped.
    pub skipped: BTreeMap<String, usize>,
}

struct Table {
    reader: csv::Reader<Box<dyn Read>>,
    columns: HashMap<String, usize>,
}

impl Table {
    fn open(source: Box<dyn Read>) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
        let columns = reader
            .headers()?
            .iter()
            .enumerate()
            .map(|(i, h)| (h.to_string(), i))
            .collect();
        Ok(Table { reader, columns })
    }

    fn column(&self, name: &str) -> Result<usize> {
        self.columns
            .get(name)
            .copied()
            .ok_or_else(|| Error::parse(1, format!("missing column '{name}'")))
    }
}

fn line_of(record: &csv::StringRecord) -> usize {
    record.position().map_or(0, |p| p.line() as usize)
}

fn field<T: std::str::FromStr>(record: &csv::StringRecord, idx: usize, name: &str) -> Result<T> {
    let raw = record.get(idx).unwrap_or("");
    raw.parse()
        .map_err(|_| Error::parse(line_of(record), format!("cannot parse {name} from '{raw}'")))
}

fn int_field(record: &csv::StringRecord, idx: usize, name: &str) -> Result<i64> {
    // InD writes some integer ids as floats ("3.0")
    let raw = record.get(idx).unwrap_or("");
    if let Ok(v) = raw.parse::<i64>() {
        return Ok(v);
    }
    match raw.parse::<f64>() {
        Ok(v) if v.fract() == 0.0 && v.is_finite() => Ok(v as i64),
        _ => Err(Error::parse(
            line_of(record),
            format!("cannot parse {name} from '{raw}'"),
        )),
    }
}

/// Reads one recording's tables into a corpus at the native sampling rate.
///
/// `tracks` holds one row per (track, frame); `tracks_meta` maps track id to
/// a class string and may carry a recording id column; `recording_meta`
/// maps recording id to location id. Without it every location is 0.
/// Orientations of zero-velocity samples are left pending.
pub fn ingest(
    tracks: impl Read + 'static,
    tracks_meta: impl Read + 'static,
    recording_meta: Option<Box<dyn Read>>,
    schema: &SchemaAdapter,
) -> Result<(Corpus, IngestReport)> {
    let mut report = IngestReport::default();

    let mut locations: HashMap<i64, i64> = HashMap::new();
    if let Some(src) = recording_meta {
        let mut table = Table::open(src)?;
        let rec = table.column(&schema.recording_id)?;
        let loc = table.column(&schema.location_id)?;
        for row in table.reader.records() {
            let row = row?;
            locations.insert(
                int_field(&row, rec, &schema.recording_id)?,
                int_field(&row, loc, &schema.location_id)?,
            );
        }
    }

    // class lookup keyed by (recording, track); a missing recording column
    // in the metadata is stored as None and matches any recording
    let mut classes: HashMap<(Option<i64>, i64), String> = HashMap::new();
    {
        let mut table = Table::open(Box::new(tracks_meta))?;
        let rec = table.columns.get(&schema.recording_id).copied();
        let track = table.column(&schema.track_id)?;
        let class = table.column(&schema.class)?;
        for row in table.reader.records() {
            let row = row?;
            let r = rec.map(|i| int_field(&row, i, &schema.recording_id)).transpose()?;
            let t = int_field(&row, track, &schema.track_id)?;
            classes.insert((r, t), row.get(class).unwrap_or("").to_string());
        }
    }

    type Sample = (i64, Vec2, Vec2);
    let mut samples: BTreeMap<(i64, i64), Vec<Sample>> = BTreeMap::new();
    {
        let mut table = Table::open(Box::new(tracks))?;
        let cols = [
            table.column(&schema.recording_id)?,
            table.column(&schema.track_id)?,
            table.column(&schema.frame)?,
            table.column(&schema.x)?,
            table.column(&schema.y)?,
            table.column(&schema.vx)?,
            table.column(&schema.vy)?,
        ];
        for row in table.reader.records() {
            let row = row?;
            let rec = int_field(&row, cols[0], &schema.recording_id)?;
            let track = int_field(&row, cols[1], &schema.track_id)?;
            let frame = int_field(&row, cols[2], &schema.frame)?;
            let pos = Vec2::new(field(&row, cols[3], &schema.x)?, field(&row, cols[4], &schema.y)?);
            let vel = Vec2::new(field(&row, cols[5], &schema.vx)?, field(&row, cols[6], &schema.vy)?);
            if !pos.is_finite() || !vel.is_finite() {
                return Err(Error::parse(line_of(&row), "non-finite position or velocity"));
            }
            samples.entry((rec, track)).or_default().push((frame, pos, vel));
            report.rows += 1;
        }
    }

    let mut corpus = Corpus::default();
    for ((rec, track), mut rows) in samples {
        rows.sort_by_key(|r| r.0);
        if rows.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::DuplicateKey {
                recording_id: rec,
                track_id: track,
            });
        }
        let class = classes
            .get(&(Some(rec), track))
            .or_else(|| classes.get(&(None, track)))
            .map(String::as_str)
            .unwrap_or("<missing>");
        let category = match class.parse::<Category>() {
            Ok(c) => c,
            Err(_) => {
                *report.skipped.entry(class.to_string()).or_default() += 1;
                continue;
            }
        };
        corpus.push(Trajectory {
            recording_id: rec,
            track_id: track,
            category,
            location_id: locations.get(&rec).copied().unwrap_or(0),
            sample_period: schema.sample_period,
            states: rows
                .iter()
                .map(|&(_, p, v)| RoadUserState::from_velocity(p, v))
                .collect(),
            other_positions: None,
        })?;
        report.tracks += 1;
    }
    for (class, n) in &report.skipped {
        warn!("skipped {n} track(s) with unknown class '{class}'");
    }
    Ok((corpus, report))
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

/// Ingests every `NN_tracks.csv` in `dir` together with its
/// `NN_tracksMeta.csv` and, when present, `NN_recordingMeta.csv`.
pub fn ingest_ind_dir(dir: &Path, schema: &SchemaAdapter) -> Result<(Corpus, IngestReport)> {
    let mut prefixes: Vec<String> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok())
        .filter_map(|e| {
            e.file_name()
                .to_str()
                .and_then(|n| n.strip_suffix("_tracks.csv"))
                .map(str::to_string)
        })
        .collect();
    prefixes.sort();
    if prefixes.is_empty() {
        return Err(Error::Empty(format!("no *_tracks.csv files in {}", dir.display())));
    }
    let mut corpus = Corpus::default();
    let mut report = IngestReport::default();
    for prefix in prefixes {
        let tracks_path = dir.join(format!("{prefix}_tracks.csv"));
        let meta_path = dir.join(format!("{prefix}_tracksMeta.csv"));
        let rec_path = dir.join(format!("{prefix}_recordingMeta.csv"));
        let rec_meta: Option<Box<dyn Read>> = if rec_path.exists() {
            Some(Box::new(open(&rec_path)?))
        } else {
            None
        };
        let (mut part, r) = ingest(open(&tracks_path)?, open(&meta_path)?, rec_meta, schema)?;
        for rec in part.recording_ids() {
            part.provenance.insert(rec, tracks_path.display().to_string());
        }
        corpus.merge(part)?;
        report.tracks += r.tracks;
        report.rows += r.rows;
        for (k, v) in r.skipped {
            *report.skipped.entry(k).or_default() += v;
        }
    }
    Ok((corpus, report))
}
