//! The FLD1 field snapshot format: one ASCII header line
//! `FLD1 d=<dim> M=<points> t=<time>` followed by the node values as
//! little-endian f64 in row-major order.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{GridField, TorusGrid};
use crate::error::{Error, Result};

pub fn write_fld1<W: Write>(mut w: W, field: &GridField, t: f64) -> Result<()> {
    let grid = field.grid();
    writeln!(w, "FLD1 d={} M={} t={}", grid.dim(), grid.points(), t)?;
    for x in field.samples() {
        w.write_all(&x.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

fn header_value<'a>(token: Option<&'a str>, key: &str) -> Result<&'a str> {
    token
        .and_then(|tok| tok.strip_prefix(key))
        .ok_or_else(|| Error::Snapshot(format!("missing `{key}` in header")))
}

pub fn read_fld1<R: Read>(r: R) -> Result<(GridField, f64)> {
    let mut r = BufReader::new(r);
    let mut header = String::new();
    r.read_line(&mut header)?;
    let mut tokens = header.trim_end_matches('\n').split(' ');
    if tokens.next() != Some("FLD1") {
        return Err(Error::Snapshot("bad magic".into()));
    }
    let parse_err = |what: &str| Error::Snapshot(format!("unparsable {what}"));
    let dim: usize = header_value(tokens.next(), "d=")?.parse().map_err(|_| parse_err("dimension"))?;
    let points: usize = header_value(tokens.next(), "M=")?.parse().map_err(|_| parse_err("point count"))?;
    let t: f64 = header_value(tokens.next(), "t=")?.parse().map_err(|_| parse_err("time"))?;
    let grid = TorusGrid::new(dim, points).map_err(|e| Error::Snapshot(e.to_string()))?;
    let mut bytes = Vec::with_capacity(grid.len() * 8);
    r.read_to_end(&mut bytes)?;
    if bytes.len() != grid.len() * 8 {
        return Err(Error::Snapshot(format!("expected {} payload bytes, found {}", grid.len() * 8, bytes.len())));
    }
    let samples = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    Ok((GridField::new(grid, samples)?, t))
}

pub fn save_fld1(path: &Path, field: &GridField, t: f64) -> Result<()> {
    write_fld1(BufWriter::new(File::create(path)?), field, t)
}

pub fn load_fld1(path: &Path) -> Result<(GridField, f64)> {
    read_fld1(File::open(path)?)
}
