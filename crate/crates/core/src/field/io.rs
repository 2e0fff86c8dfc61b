//! Flat binary container and CSV export for scalar fields.
//!
//! Binary layout, all little-endian: `d: u64`, `M: u64`, `L: f64`, the
//! support box as `d` lower then `d` upper `f64` corners, then the `M^d`
//! values as `f64` in row-major order.

use std::io::{Read, Write};

use super::{Grid, ScalarField, SupportBox};
use crate::error::{Error, Result};

pub fn write_binary<W: Write>(field: &ScalarField, mut out: W) -> Result<()> {
    let g = field.grid();
    out.write_all(&(g.dim() as u64).to_le_bytes())?;
    out.write_all(&(g.points() as u64).to_le_bytes())?;
    out.write_all(&g.length().to_le_bytes())?;
    for v in field.support().lo.iter().chain(&field.support().hi) {
        out.write_all(&v.to_le_bytes())?;
    }
    for v in field.values() {
        out.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn read_u64<R: Read>(input: &mut R) -> Result<u64> {
    let mut buf = [0u8; 8];
    input.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

fn read_f64<R: Read>(input: &mut R) -> Result<f64> {
    let mut buf = [0u8; 8];
    input.read_exact(&mut buf)?;
    Ok(f64::from_le_bytes(buf))
}

pub fn read_binary<R: Read>(mut input: R) -> Result<ScalarField> {
    let dim = read_u64(&mut input)? as usize;
    let points = read_u64(&mut input)? as usize;
    if dim == 0 || dim > 8 || points > 1 << 20 {
        return Err(Error::Format(format!(
            "implausible header: d = {dim}, M = {points}"
        )));
    }
    let length = read_f64(&mut input)?;
    let grid = Grid::new(dim, points, length)?;
    let lo = (0..dim).map(|_| read_f64(&mut input)).collect::<Result<Vec<_>>>()?;
    let hi = (0..dim).map(|_| read_f64(&mut input)).collect::<Result<Vec<_>>>()?;
    let values = (0..grid.len())
        .map(|_| read_f64(&mut input))
        .collect::<Result<Vec<_>>>()?;
    ScalarField::new(grid, values, SupportBox::new(lo, hi)?)
}

/// One row per node: the index tuple followed by the value.
pub fn write_csv<W: Write>(field: &ScalarField, mut out: W) -> Result<()> {
    let g = field.grid();
    let header: Vec<String> = (0..g.dim()).map(|a| format!("i{a}")).collect();
    writeln!(out, "{},value", header.join(","))?;
    let mut idx = vec![0usize; g.dim()];
    for (flat, v) in field.values().iter().enumerate() {
        g.unravel(flat, &mut idx);
        let cols: Vec<String> = idx.iter().map(|i| i.to_string()).collect();
        writeln!(out, "{},{:.16e}", cols.join(","), v)?;
    }
    Ok(())
}
