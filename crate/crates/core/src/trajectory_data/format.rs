//! Processed-corpus text format.
//!
//! ```text
//! wam-corpus 1
//! provenance <recording_id> <source>
//! trajectory <recording_id> <track_id> <category> <location_id> <sample_period> <n_states> <has_other>
//! x,y,speed,ox,oy[,other_x,other_y]      (n_states rows)
//! ```
//!
//! Floats are written in shortest round-trip form, so reading a written
//! corpus reproduces it exactly. When `has_other` is 1 every row carries two
//! more fields, both empty where no other vehicle is present.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use super::{Category, Corpus, RoadUserState, Trajectory};
use crate::error::{Error, Result};
use crate::geometry::Vec2;

pub const CORPUS_MAGIC: &str = "wam-corpus";
const VERSION: u32 = 1;

pub fn write_corpus(corpus: &Corpus, mut out: impl Write) -> Result<()> {
    let mut s = String::new();
    writeln!(s, "{CORPUS_MAGIC} {VERSION}").unwrap();
    for (rec, src) in &corpus.provenance {
        writeln!(s, "provenance {rec} {src}").unwrap();
    }
    for t in corpus {
        writeln!(
            s,
            "trajectory {} {} {} {} {} {} {}",
            t.recording_id,
            t.track_id,
            t.category,
            t.location_id,
            t.sample_period,
            t.states.len(),
            u8::from(t.other_positions.is_some())
        )
        .unwrap();
        for (i, st) in t.states.iter().enumerate() {
            write!(
                s,
                "{},{},{},{},{}",
                st.position.x, st.position.y, st.speed, st.orientation.x, st.orientation.y
            )
            .unwrap();
            if let Some(others) = &t.other_positions {
                match others[i] {
                    Some(p) => write!(s, ",{},{}", p.x, p.y).unwrap(),
                    None => s.push_str(",,"),
                }
            }
            s.push('\n');
        }
    }
    out.write_all(s.as_bytes()).map_err(|e| Error::io("<corpus>", e))
}

pub fn write_corpus_file(corpus: &Corpus, path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_corpus(corpus, std::io::BufWriter::new(file))
}

fn num<T: std::str::FromStr>(line: usize, raw: &str, what: &str) -> Result<T> {
    raw.trim()
        .parse()
        .map_err(|_| Error::parse(line, format!("cannot parse {what} from '{raw}'")))
}

pub fn read_corpus(input: impl Read) -> Result<Corpus> {
    let mut lines = BufReader::new(input).lines().enumerate().map(|(i, l)| (i + 1, l));
    let mut next = move || -> Result<Option<(usize, String)>> {
        match lines.next() {
            None => Ok(None),
            Some((n, Ok(l))) => Ok(Some((n, l))),
            Some((_, Err(e))) => Err(Error::io("<corpus>", e)),
        }
    };

    let (n, header) = next()?.ok_or_else(|| Error::Format("empty corpus file".into()))?;
    let mut parts = header.split_whitespace();
    if parts.next() != Some(CORPUS_MAGIC) {
        return Err(Error::parse(n, format!("expected '{CORPUS_MAGIC}' header")));
    }
    let version: u32 = num(n, parts.next().unwrap_or(""), "version")?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported corpus version {version}")));
    }

    let mut corpus = Corpus::default();
    while let Some((n, line)) = next()? {
        if line.trim().is_empty() {
            continue;
        }
        let (kind, rest) = line.split_once(' ').unwrap_or((line.as_str(), ""));
        match kind {
            "provenance" => {
                let (rec, src) = rest.split_once(' ').unwrap_or((rest, ""));
                corpus.provenance.insert(num(n, rec, "recording id")?, src.to_string());
            }
            "trajectory" => {
                let f: Vec<&str> = rest.split_whitespace().collect();
                if f.len() != 7 {
                    return Err(Error::parse(n, "trajectory header needs 7 fields"));
                }
                let category: Category = f[2].parse().map_err(|e: Error| Error::parse(n, e.to_string()))?;
                let count: usize = num(n, f[5], "state count")?;
                let has_other = match f[6] {
                    "0" => false,
                    "1" => true,
                    other => return Err(Error::parse(n, format!("bad situation flag '{other}'"))),
                };
                let mut states = Vec::with_capacity(count);
                let mut others = Vec::new();
                for _ in 0..count {
                    let (n, row) = next()?.ok_or_else(|| Error::Format("truncated trajectory block".into()))?;
                    let v: Vec<&str> = row.split(',').collect();
                    let expected = if has_other { 7 } else { 5 };
                    if v.len() != expected {
                        return Err(Error::parse(
                            n,
                            format!("expected {expected} fields, found {}", v.len()),
                        ));
                    }
                    states.push(RoadUserState {
                        position: Vec2::new(num(n, v[0], "x")?, num(n, v[1], "y")?),
                        speed: num(n, v[2], "speed")?,
                        orientation: Vec2::new(num(n, v[3], "ox")?, num(n, v[4], "oy")?),
                    });
                    if has_other {
                        others.push(if v[5].is_empty() && v[6].is_empty() {
                            None
                        } else {
                            Some(Vec2::new(num(n, v[5], "other x")?, num(n, v[6], "other y")?))
                        });
                    }
                }
                corpus.push(Trajectory {
                    recording_id: num(n, f[0], "recording id")?,
                    track_id: num(n, f[1], "track id")?,
                    category,
                    location_id: num(n, f[3], "location id")?,
                    sample_period: num(n, f[4], "sample period")?,
                    states,
                    other_positions: has_other.then_some(others),
                })?;
            }
            other => return Err(Error::parse(n, format!("unknown record '{other}'"))),
        }
    }
    Ok(corpus)
}

pub fn read_corpus_file(path: &Path) -> Result<Corpus> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_corpus(file)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample() -> Corpus {
        let st = |x: f64| RoadUserState {
            position: Vec2::new(x, -x / 3.0),
            speed: x.abs() * 0.1,
            orientation: Vec2::from_angle(x),
        };
        let mut c = Corpus::new(vec![
            Trajectory {
                recording_id: 3,
                track_id: 1,
                category: Category::Bicycle,
                location_id: 2,
                sample_period: 0.4,
                states: vec![st(0.1), st(1.7)],
                other_positions: None,
            },
            Trajectory {
                recording_id: 4,
                track_id: 1,
                category: Category::Vehicle,
                location_id: 2,
                sample_period: 0.4,
                states: vec![st(2.0), st(3.0), st(4.0)],
                other_positions: Some(vec![None, Some(Vec2::new(1.0 / 3.0, 2.5)), None]),
            },
        ])
        .unwrap();
        c.provenance.insert(3, "data/03_tracks.csv".into());
        c
    }

    #[test]
    fn round_trip_is_exact() {
        let c = sample();
        let mut buf = Vec::new();
        write_corpus(&c, &mut buf).unwrap();
        let back = read_corpus(buf.as_slice()).unwrap();
        assert_eq!(back, c);
        let mut again = Vec::new();
        write_corpus(&back, &mut again).unwrap();
        assert_eq!(buf, again);
    }

    #[test]
    fn rejects_bad_header_and_truncation() {
        assert!(read_corpus("nope 1\n".as_bytes()).is_err());
        assert!(read_corpus("wam-corpus 2\n".as_bytes()).is_err());
        let truncated = "wam-corpus 1\ntrajectory 1 1 vehicle 1 0.4 2 0\n0,0,1,1,0\n";
        assert!(matches!(read_corpus(truncated.as_bytes()), Err(Error::Format(_))));
    }

    proptest! {
        #[test]
        fn arbitrary_floats_round_trip(xs in proptest::collection::vec(-1e6f64..1e6, 1..20)) {
            let states = xs.iter().map(|&x| RoadUserState {
                position: Vec2::new(x, x * 1e-7),
                speed: x.abs(),
                orientation: Vec2::from_angle(x),
            }).collect();
            let c = Corpus::new(vec![Trajectory {
                recording_id: 1, track_id: 2, category: Category::Pedestrian, location_id: 1,
                sample_period: 0.04, states, other_positions: None,
            }]).unwrap();
            let mut buf = Vec::new();
            write_corpus(&c, &mut buf).unwrap();
            prop_assert_eq!(read_corpus(buf.as_slice()).unwrap(), c);
        }
    }
}
