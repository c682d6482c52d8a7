//! Binary field dumps.
//!
//! Layout, all little endian: magic `FLD1`, `u8` dimension, `u32` points per
//! axis, `f64` half width, `u8` representation (0 physical, 1 frequency),
//! then `N^d` samples as interleaved `f64` real/imaginary pairs in the
//! field's storage order.

use std::io::{Read, Write};

use num_complex::Complex64;

use super::field::{Field, Representation};
use super::grid::GridSpec;
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"FLD1";

fn io_err(e: std::io::Error) -> Error {
    Error::Format(e.to_string())
}

pub fn write_field(field: &Field, mut out: impl Write) -> Result<()> {
    let grid = field.grid();
    let repr = match field.representation() {
        Representation::Physical => 0u8,
        Representation::Frequency => 1u8,
    };
    let mut buf = Vec::with_capacity(18 + 16 * field.samples().len());
    buf.extend_from_slice(MAGIC);
    buf.push(grid.dim() as u8);
    buf.extend_from_slice(&(grid.points() as u32).to_le_bytes());
    buf.extend_from_slice(&grid.half_width().to_le_bytes());
    buf.push(repr);
    for z in field.samples() {
        buf.extend_from_slice(&z.re.to_le_bytes());
        buf.extend_from_slice(&z.im.to_le_bytes());
    }
    out.write_all(&buf).map_err(io_err)
}

pub fn read_field(mut input: impl Read) -> Result<Field> {
    let mut header = [0u8; 18];
    input.read_exact(&mut header).map_err(io_err)?;
    if &header[..4] != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let dim = header[4] as usize;
    let points = u32::from_le_bytes(header[5..9].try_into().unwrap()) as usize;
    let half_width = f64::from_le_bytes(header[9..17].try_into().unwrap());
    let repr = match header[17] {
        0 => Representation::Physical,
        1 => Representation::Frequency,
        r => return Err(Error::Format(format!("unknown representation tag {r}"))),
    };
    let grid = GridSpec::new(dim, points, half_width)?;
    let mut raw = vec![0u8; 16 * grid.len()];
    input.read_exact(&mut raw).map_err(io_err)?;
    let samples = raw
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..].try_into().unwrap()),
            )
        })
        .collect();
    Field::new(grid, repr, samples)
}
