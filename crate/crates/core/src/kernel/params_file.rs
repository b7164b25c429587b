//! Key-value parameter files.
//!
//! ```text
//! # comment
//! category = vehicle
//! location = 1
//! a = 0.5
//! b = 1
//! c_orient = 50
//! r = 15
//! d = 0.5        # optional
//! e = 0          # optional
//! ```
//!
//! Each `category` line starts a new block. `category = *` or `location = *`
//! makes the block a fallback for any value of that tag.

use std::fmt::Write as _;
use std::fs;
use std::io::Read;
use std::path::Path;

use super::{InteractionParams, SimilarityParams, DEFAULT_RADIUS};
use crate::error::{Error, Result};
use crate::trajectory_data::Category;

#[derive(Debug, Clone, PartialEq)]
pub struct TaggedParams {
    /// `None` matches any category.
    pub category: Option<Category>,
    /// `None` matches any location.
    pub location_id: Option<i64>,
    pub params: SimilarityParams,
    pub d: Option<f64>,
    pub e: Option<f64>,
}

impl TaggedParams {
    pub fn new(category: Option<Category>, location_id: Option<i64>, params: SimilarityParams) -> Self {
        TaggedParams {
            category,
            location_id,
            params,
            d: None,
            e: None,
        }
    }

    pub fn interaction(&self) -> Option<InteractionParams> {
        self.d.map(|d| InteractionParams {
            base: self.params,
            d,
            e: self.e.unwrap_or(0.0),
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamSet {
    pub blocks: Vec<TaggedParams>,
}

impl ParamSet {
    /// Most specific block for a cell: exact match first, then blocks with
    /// one wildcard, then the fully wildcarded block.
    pub fn lookup(&self, category: Category, location_id: i64) -> Option<&TaggedParams> {
        let score = |b: &TaggedParams| -> Option<u8> {
            let c = match b.category {
                Some(c) if c == category => 2,
                Some(_) => return None,
                None => 0,
            };
            let l = match b.location_id {
                Some(l) if l == location_id => 1,
                Some(_) => return None,
                None => 0,
            };
            Some(c + l)
        };
        self.blocks
            .iter()
            .filter_map(|b| score(b).map(|s| (s, b)))
            .max_by_key(|(s, _)| *s)
            .map(|(_, b)| b)
    }

    /// The reference per-type, per-location values.
    pub fn reference() -> Self {
        let mut blocks = Vec::new();
        for category in Category::MODELLED {
            for location in [1, 2] {
                let p = SimilarityParams::reference(category, location).expect("reference cell");
                blocks.push(TaggedParams::new(Some(category), Some(location), p));
            }
        }
        ParamSet { blocks }
    }
}

pub fn write_params(set: &ParamSet) -> String {
    let mut s = String::from("# wam similarity parameters\n");
    for b in &set.blocks {
        s.push('\n');
        let tag = |o: Option<String>| o.unwrap_or_else(|| "*".into());
        writeln!(s, "category = {}", tag(b.category.map(|c| c.to_string()))).unwrap();
        writeln!(s, "location = {}", tag(b.location_id.map(|l| l.to_string()))).unwrap();
        writeln!(s, "a = {}", b.params.a).unwrap();
        writeln!(s, "b = {}", b.params.b).unwrap();
        writeln!(s, "c_orient = {}", b.params.c_orient).unwrap();
        writeln!(s, "r = {}", b.params.r).unwrap();
        if let Some(d) = b.d {
            writeln!(s, "d = {d}").unwrap();
        }
        if let Some(e) = b.e {
            writeln!(s, "e = {e}").unwrap();
        }
    }
    s
}

pub fn write_params_file(set: &ParamSet, path: &Path) -> Result<()> {
    fs::write(path, write_params(set)).map_err(|e| Error::io(path, e))
}

#[derive(Default)]
struct Partial {
    category: Option<Category>,
    location: Option<i64>,
    a: Option<f64>,
    b: Option<f64>,
    c: Option<f64>,
    r: Option<f64>,
    d: Option<f64>,
    e: Option<f64>,
    line: usize,
}

impl Partial {
    fn finish(self) -> Result<TaggedParams> {
        let need =
            |v: Option<f64>, name: &str| v.ok_or_else(|| Error::parse(self.line, format!("block is missing '{name}'")));
        let params = SimilarityParams::new(
            need(self.a, "a")?,
            need(self.b, "b")?,
            need(self.c, "c_orient")?,
            self.r.unwrap_or(DEFAULT_RADIUS),
        )
        .map_err(|e| Error::parse(self.line, e.to_string()))?;
        for v in [self.d, self.e].into_iter().flatten() {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::parse(self.line, "d and e must be finite and >= 0"));
            }
        }
        Ok(TaggedParams {
            category: self.category,
            location_id: self.location,
            params,
            d: self.d,
            e: self.e,
        })
    }
}

pub fn read_params(mut input: impl Read) -> Result<ParamSet> {
    let mut text = String::new();
    input.read_to_string(&mut text).map_err(|e| Error::io("<params>", e))?;
    let mut set = ParamSet::default();
    let mut current: Option<Partial> = None;
    for (i, raw) in text.lines().enumerate() {
        let n = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| Error::parse(n, format!("expected 'key = value', found '{line}'")))?;
        let float = || {
            value
                .parse::<f64>()
                .map_err(|_| Error::parse(n, format!("bad number '{value}' for {key}")))
        };
        if key == "category" {
            if let Some(done) = current.take() {
                set.blocks.push(done.finish()?);
            }
            current = Some(Partial {
                category: if value == "*" {
                    None
                } else {
                    Some(value.parse().map_err(|e: Error| Error::parse(n, e.to_string()))?)
                },
                line: n,
                ..Partial::default()
            });
            continue;
        }
        let block = current
            .as_mut()
            .ok_or_else(|| Error::parse(n, "parameters must follow a 'category' line"))?;
        match key {
            "location" => {
                block.location = if value == "*" {
                    None
                } else {
                    Some(
                        value
                            .parse()
                            .map_err(|_| Error::parse(n, format!("bad location '{value}'")))?,
                    )
                }
            }
            "a" => block.a = Some(float()?),
            "b" => block.b = Some(float()?),
            "c_orient" | "c" => block.c = Some(float()?),
            "r" => block.r = Some(float()?),
            "d" => block.d = Some(float()?),
            "e" => block.e = Some(float()?),
            other => return Err(Error::parse(n, format!("unknown key '{other}'"))),
        }
    }
    if let Some(done) = current {
        set.blocks.push(done.finish()?);
    }
    Ok(set)
}

pub fn read_params_file(path: &Path) -> Result<ParamSet> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_params(file)
}
