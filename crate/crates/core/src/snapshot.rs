//! Plain-text particle snapshots.
//!
//! ```text
//! n k
//! x_1 ... x_k h id
//! ```
//!
//! One row per particle, ASCII, space separated. Reals are written with 17
//! significant digits so a write/read cycle reproduces every bit.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{check_dim, ParticleSet};

pub fn write_snapshot<W: Write>(particles: &ParticleSet, out: W) -> Result<()> {
    let mut w = BufWriter::new(out);
    let k = particles.dim();
    writeln!(w, "{} {}", particles.len(), k)?;
    for i in 0..particles.len() {
        for l in 0..k {
            write!(w, "{:.16e} ", particles.coord(l)[i])?;
        }
        writeln!(w, "{:.16e} {}", particles.h()[i], particles.ids()[i])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_snapshot<R: Read>(input: R) -> Result<ParticleSet> {
    let mut lines = BufReader::new(input).lines();
    let header = lines.next().ok_or_else(|| parse_err(1, "missing header"))??;
    let mut fields = header.split_ascii_whitespace();
    let n: usize = parse_field(fields.next(), 1, "n")?;
    let k: usize = parse_field(fields.next(), 1, "k")?;
    check_dim(k)?;

    let mut coords = vec![Vec::with_capacity(n); k];
    let mut h = Vec::with_capacity(n);
    let mut ids = Vec::with_capacity(n);
    for row in 0..n {
        let line_no = row + 2;
        let line = lines
            .next()
            .ok_or_else(|| parse_err(line_no, "unexpected end of file"))??;
        let mut fields = line.split_ascii_whitespace();
        for col in coords.iter_mut() {
            col.push(parse_field(fields.next(), line_no, "coordinate")?);
        }
        h.push(parse_field(fields.next(), line_no, "h")?);
        ids.push(parse_field(fields.next(), line_no, "id")?);
        if fields.next().is_some() {
            return Err(parse_err(line_no, "trailing fields"));
        }
    }
    ParticleSet::new(coords, h, ids)
}

pub fn save_snapshot(particles: &ParticleSet, path: impl AsRef<Path>) -> Result<()> {
    write_snapshot(particles, File::create(path)?)
}

pub fn load_snapshot(path: impl AsRef<Path>) -> Result<ParticleSet> {
    read_snapshot(File::open(path)?)
}

fn parse_field<T: std::str::FromStr>(field: Option<&str>, line: usize, what: &str) -> Result<T> {
    let s = field.ok_or_else(|| parse_err(line, &format!("missing {what}")))?;
    s.parse()
        .map_err(|_| parse_err(line, &format!("bad {what} {s:?}")))
}

fn parse_err(line: usize, msg: &str) -> Error {
    Error::Parse {
        line,
        msg: msg.to_string(),
    }
}
