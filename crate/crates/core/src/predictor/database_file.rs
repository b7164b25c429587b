//! Columnar text serialisation of a displacement database.
//!
//! ```text
//! wam-db 1
//! sample_period 0.4
//! warmup_offset 7
//! horizons 1 2 … 12
//! situations 0|1
//! entries N
//! trajectory,time,x,y,speed,ox,oy,dx_1,dy_1,…,dx_K,dy_K[,other_x,other_y]
//! ```
//!
//! The ball tree is not stored; it is rebuilt on load.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use super::{DisplacementDatabase, Entry};
use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::trajectory_data::RoadUserState;

const MAGIC: &str = "wam-db";
const VERSION: u32 = 1;

pub fn write_database(db: &DisplacementDatabase, mut out: impl Write) -> Result<()> {
    let mut s = String::new();
    writeln!(s, "{MAGIC} {VERSION}").unwrap();
    writeln!(s, "sample_period {}", db.sample_period).unwrap();
    writeln!(s, "warmup_offset {}", db.warmup_offset).unwrap();
    let hs: Vec<String> = db.horizons.iter().map(usize::to_string).collect();
    writeln!(s, "horizons {}", hs.join(" ")).unwrap();
    writeln!(s, "situations {}", u8::from(db.has_situations)).unwrap();
    writeln!(s, "entries {}", db.entries.len()).unwrap();
    for (i, e) in db.entries.iter().enumerate() {
        let st = &e.state;
        write!(
            s,
            "{},{},{},{},{},{},{}",
            e.trajectory, e.time, st.position.x, st.position.y, st.speed, st.orientation.x, st.orientation.y
        )
        .unwrap();
        for slot in 0..db.horizons.len() {
            let d = db.displacement(i, slot);
            write!(s, ",{},{}", d.x, d.y).unwrap();
        }
        if db.has_situations {
            match e.other_position {
                Some(p) => write!(s, ",{},{}", p.x, p.y).unwrap(),
                None => s.push_str(",,"),
            }
        }
        s.push('\n');
    }
    out.write_all(s.as_bytes()).map_err(|e| Error::io("<database>", e))
}

pub fn write_database_file(db: &DisplacementDatabase, path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_database(db, std::io::BufWriter::new(file))
}

fn header<'a>(line: Option<(usize, &'a str)>, key: &str) -> Result<(usize, &'a str)> {
    let (n, l) = line.ok_or_else(|| Error::Format(format!("missing '{key}' line")))?;
    let rest = l
        .strip_prefix(key)
        .ok_or_else(|| Error::parse(n, format!("expected '{key}'")))?;
    Ok((n, rest.trim()))
}

fn num<T: std::str::FromStr>(n: usize, raw: &str) -> Result<T> {
    raw.trim()
        .parse()
        .map_err(|_| Error::parse(n, format!("cannot parse number from '{raw}'")))
}

pub fn read_database(input: impl Read) -> Result<DisplacementDatabase> {
    let text: Vec<String> = BufReader::new(input)
        .lines()
        .collect::<std::io::Result<_>>()
        .map_err(|e| Error::io("<database>", e))?;
    let mut lines = text.iter().enumerate().map(|(i, l)| (i + 1, l.as_str()));

    let (n, version) = header(lines.next(), MAGIC)?;
    if num::<u32>(n, version)? != VERSION {
        return Err(Error::Format(format!("unsupported database version {version}")));
    }
    let (n, v) = header(lines.next(), "sample_period")?;
    let sample_period: f64 = num(n, v)?;
    let (n, v) = header(lines.next(), "warmup_offset")?;
    let warmup_offset: usize = num(n, v)?;
    let (n, v) = header(lines.next(), "horizons")?;
    let horizons = v
        .split_whitespace()
        .map(|h| num(n, h))
        .collect::<Result<Vec<usize>>>()?;
    if horizons.is_empty() || horizons.windows(2).any(|w| w[0] >= w[1]) || horizons[0] == 0 {
        return Err(Error::parse(
            n,
            "horizons must be strictly increasing positive integers",
        ));
    }
    let (n, v) = header(lines.next(), "situations")?;
    let has_situations = match v {
        "0" => false,
        "1" => true,
        _ => return Err(Error::parse(n, "situations flag must be 0 or 1")),
    };
    let (n, v) = header(lines.next(), "entries")?;
    let count: usize = num(n, v)?;

    let k = horizons.len();
    let width = 7 + 2 * k + if has_situations { 2 } else { 0 };
    let mut entries = Vec::with_capacity(count);
    let mut displacements = Vec::with_capacity(count * k);
    for _ in 0..count {
        let (n, row) = lines
            .next()
            .ok_or_else(|| Error::Format("truncated entry table".into()))?;
        let f: Vec<&str> = row.split(',').collect();
        if f.len() != width {
            return Err(Error::parse(n, format!("expected {width} fields, found {}", f.len())));
        }
        let x = |i: usize| -> Result<f64> { num(n, f[i]) };
        for slot in 0..k {
            displacements.push(Vec2::new(x(7 + 2 * slot)?, x(8 + 2 * slot)?));
        }
        let other_position = if has_situations && !(f[width - 2].is_empty() && f[width - 1].is_empty()) {
            Some(Vec2::new(x(width - 2)?, x(width - 1)?))
        } else {
            None
        };
        entries.push(Entry {
            trajectory: num(n, f[0])?,
            time: num(n, f[1])?,
            state: RoadUserState {
                position: Vec2::new(x(2)?, x(3)?),
                speed: x(4)?,
                orientation: Vec2::new(x(5)?, x(6)?),
            },
            other_position,
        });
    }
    DisplacementDatabase::from_parts(
        entries,
        horizons,
        displacements,
        warmup_offset,
        sample_period,
        has_situations,
    )
}

pub fn read_database_file(path: &Path) -> Result<DisplacementDatabase> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_database(file)
}
