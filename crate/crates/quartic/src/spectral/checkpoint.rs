//! Field checkpoints: a UTF-8 `key: value` header closed by a blank line,
//! then little-endian `f64` pairs `(re, im)` in row-major order.

use std::fs;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;

use super::field::{ComplexField, Rep};
use super::grid::GridSpec;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub field: ComplexField,
    pub time: f64,
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

pub fn encode_checkpoint(field: &ComplexField, time: f64) -> Vec<u8> {
    let g = field.grid();
    let header = format!(
        "dim: {}\npoints: {}\nbox_length: {}\nrep: {}\ntime: {}\n\n",
        g.dim(),
        join(g.points()),
        join(g.box_length()),
        field.rep().as_str(),
        time
    );
    let mut out = Vec::with_capacity(header.len() + 16 * field.samples().len());
    out.extend_from_slice(header.as_bytes());
    for z in field.samples() {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

pub fn decode_checkpoint(bytes: &[u8]) -> Result<Checkpoint> {
    let bad = |m: &str| Error::Checkpoint(m.to_string());
    let end = bytes
        .windows(2)
        .position(|w| w == b"\n\n")
        .ok_or_else(|| bad("header is not terminated by a blank line"))?;
    let header = std::str::from_utf8(&bytes[..end]).map_err(|_| bad("header is not UTF-8"))?;
    let payload = &bytes[end + 2..];

    let (mut dim, mut points, mut lengths, mut rep, mut time) = (None, None, None, None, None);
    for line in header.lines() {
        let (k, v) = line.split_once(':').ok_or_else(|| bad("header line without ':'"))?;
        let v = v.trim();
        match k.trim() {
            "dim" => dim = Some(v.parse::<usize>().map_err(|_| bad("dim"))?),
            "points" => {
                points = Some(
                    v.split(',')
                        .map(|s| s.trim().parse::<usize>())
                        .collect::<std::result::Result<Vec<_>, _>>()
                        .map_err(|_| bad("points"))?,
                )
            }
            "box_length" => {
                lengths = Some(
                    v.split(',')
                        .map(|s| s.trim().parse::<f64>())
                        .collect::<std::result::Result<Vec<_>, _>>()
                        .map_err(|_| bad("box_length"))?,
                )
            }
            "rep" => {
                rep = Some(match v {
                    "position" => Rep::Position,
                    "spectrum" => Rep::Spectrum,
                    _ => return Err(bad("rep")),
                })
            }
            "time" => time = Some(v.parse::<f64>().map_err(|_| bad("time"))?),
            _ => return Err(bad("unknown header key")),
        }
    }
    let dim = dim.ok_or_else(|| bad("missing dim"))?;
    let points = points.ok_or_else(|| bad("missing points"))?;
    let lengths = lengths.ok_or_else(|| bad("missing box_length"))?;
    let rep = rep.ok_or_else(|| bad("missing rep"))?;
    let time = time.ok_or_else(|| bad("missing time"))?;
    if points.len() != dim {
        return Err(bad("points do not match dim"));
    }
    if !time.is_finite() {
        return Err(bad("time is not finite"));
    }
    let grid = GridSpec::new(&points, &lengths)?;
    // checked before allocating so a forged header cannot request a huge buffer
    if payload.len() != grid.len().checked_mul(16).ok_or_else(|| bad("size overflow"))? {
        return Err(bad("payload length does not match the grid"));
    }
    let samples = payload
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            Complex64::new(re, im)
        })
        .collect();
    Ok(Checkpoint { field: ComplexField::new(grid, rep, samples)?, time })
}

pub fn write_checkpoint(path: &Path, field: &ComplexField, time: f64) -> Result<u64> {
    let bytes = encode_checkpoint(field, time);
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&bytes).map_err(|e| Error::io(path, e))?;
    Ok(bytes.len() as u64)
}

pub fn read_checkpoint(path: &Path) -> Result<Checkpoint> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_checkpoint(&bytes)
}
