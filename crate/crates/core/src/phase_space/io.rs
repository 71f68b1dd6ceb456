//! Flat binary container with a JSON header, and CSV export.
//!
//! Container layout: the 4 bytes `MFLB`, a little-endian `u32` header length,
//! the JSON header, then the raw little-endian payload.

use std::io::{Read, Write};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::grid::{FourierPhaseFunction, PhaseFunction, PhaseGrid};
use crate::error::{Error, Result};
use crate::fft::unravel;

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &[u8; 4] = b"MFLB";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContainerHeader {
    pub format_version: u32,
    pub kind: String,
    pub grid: PhaseGrid,
    pub endianness: String,
    pub layout: String,
    pub dtype: String,
    pub len: usize,
    #[serde(default)]
    pub meta: serde_json::Value,
}

fn header(kind: &str, grid: PhaseGrid, dtype: &str, len: usize, meta: serde_json::Value) -> ContainerHeader {
    ContainerHeader {
        format_version: FORMAT_VERSION,
        kind: kind.into(),
        grid,
        endianness: "little".into(),
        layout: "row-major (x_1..x_j, v_1..v_j)".into(),
        dtype: dtype.into(),
        len,
        meta,
    }
}

fn write_header(w: &mut impl Write, h: &ContainerHeader) -> Result<()> {
    let js = serde_json::to_vec(h)?;
    w.write_all(MAGIC)?;
    w.write_all(&(js.len() as u32).to_le_bytes())?;
    w.write_all(&js)?;
    Ok(())
}

pub fn read_header(r: &mut impl Read) -> Result<ContainerHeader> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Io("not a container file".into()));
    }
    let mut len = [0u8; 4];
    r.read_exact(&mut len)?;
    let mut js = vec![0u8; u32::from_le_bytes(len) as usize];
    r.read_exact(&mut js)?;
    let h: ContainerHeader = serde_json::from_slice(&js)?;
    if h.format_version != FORMAT_VERSION {
        return Err(Error::Io(format!("unsupported format_version {}", h.format_version)));
    }
    Ok(h)
}

pub fn write_phase_function(w: &mut impl Write, f: &PhaseFunction, meta: serde_json::Value) -> Result<()> {
    write_header(w, &header("phase_function", f.grid, "f64", f.values.len(), meta))?;
    for v in &f.values {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn write_fourier(w: &mut impl Write, f: &FourierPhaseFunction, meta: serde_json::Value) -> Result<()> {
    write_header(w, &header("fourier_phase_function", f.grid, "c128", f.coefficients.len(), meta))?;
    for c in &f.coefficients {
        w.write_all(&c.re.to_le_bytes())?;
        w.write_all(&c.im.to_le_bytes())?;
    }
    Ok(())
}

fn read_f64s(r: &mut impl Read, count: usize) -> Result<Vec<f64>> {
    let mut buf = vec![0u8; 8 * count];
    r.read_exact(&mut buf)?;
    Ok(buf.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
}

pub fn read_phase_function(r: &mut impl Read) -> Result<PhaseFunction> {
    let h = read_header(r)?;
    if h.kind != "phase_function" {
        return Err(Error::Io(format!("expected phase_function, found {}", h.kind)));
    }
    PhaseFunction::new(h.grid, read_f64s(r, h.len)?)
}

pub fn read_fourier(r: &mut impl Read) -> Result<FourierPhaseFunction> {
    let h = read_header(r)?;
    if h.kind != "fourier_phase_function" {
        return Err(Error::Io(format!("expected fourier_phase_function, found {}", h.kind)));
    }
    let raw = read_f64s(r, 2 * h.len)?;
    let coefficients = raw.chunks_exact(2).map(|c| C64::new(c[0], c[1])).collect();
    Ok(FourierPhaseFunction { grid: h.grid, coefficients })
}

/// CSV rows `(format_version, x, v, value)` of a 1-particle function.
pub fn write_phase_csv(w: impl Write, f: &PhaseFunction) -> Result<()> {
    if f.grid.particles != 1 {
        return Err(Error::Representation("CSV export is for 1-particle functions".into()));
    }
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["format_version", "x", "v", "value"])?;
    let g = f.grid;
    let mut ix = [0usize; 2];
    for (i, val) in f.values.iter().enumerate() {
        unravel(i, g.n(), &mut ix);
        let x = g.x(ix[0]);
        let v = g.v(ix[1]);
        wr.write_record(&[FORMAT_VERSION.to_string(), format!("{x:.17e}"), format!("{v:.17e}"), format!("{val:.17e}")])?;
    }
    wr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn container_roundtrip() {
        let g = PhaseGrid::new(1, 8, 2.0 * std::f64::consts::PI, 3.0).unwrap();
        let f = PhaseFunction::from_fn(g, |x, v| x[0] * v[0]).unwrap();
        let mut buf = Vec::new();
        write_phase_function(&mut buf, &f, serde_json::json!({"seed": 3})).unwrap();
        let back = read_phase_function(&mut buf.as_slice()).unwrap();
        assert_eq!(back, f);
        let ft = super::super::grid::symplectic_fourier(&f);
        let mut buf = Vec::new();
        write_fourier(&mut buf, &ft, serde_json::Value::Null).unwrap();
        assert_eq!(read_fourier(&mut buf.as_slice()).unwrap(), ft);
    }

    #[test]
    fn csv_has_one_row_per_cell() {
        let g = PhaseGrid::new(1, 8, 2.0 * std::f64::consts::PI, 3.0).unwrap();
        let f = PhaseFunction::from_fn(g, |_, v| v[0]).unwrap();
        let mut out = Vec::new();
        write_phase_csv(&mut out, &f).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().count(), 65);
        assert!(text.starts_with("format_version,x,v,value"));
    }
}
