//! Field snapshots: CSV (`x,y,value` or `r,theta,value`) and the `ENHD1`
//! binary layout.
//!
//! `ENHD1` is little-endian: the five magic bytes, a `u8` grid kind
//! (0 Cartesian, 1 polar), `u32` rows, `u32` cols, `f64` time, four `f64`
//! geometry parameters (`L_y, 0, 0, 0` or `r_min, r_max, 0, 0`), then
//! `rows × cols` `f64` values row-major.

use std::io::{Read, Write};

use super::{CartesianGrid, Geometry, PolarGrid, ScalarField};
use crate::{Error, Result};

const MAGIC: &[u8; 5] = b"ENHD1";

/// Grids that know how to describe themselves in a snapshot.
pub trait SnapshotGrid: Geometry {
    const KIND: u8;
    const COLUMNS: [&'static str; 3];
    /// Coordinates written in the first two CSV columns for node `(row, col)`.
    fn csv_coords(&self, row: usize, col: usize) -> (f64, f64);
    fn geometry(&self) -> [f64; 4];
    fn from_header(rows: usize, cols: usize, geometry: [f64; 4]) -> Result<Self>;
}

impl SnapshotGrid for CartesianGrid {
    const KIND: u8 = 0;
    const COLUMNS: [&'static str; 3] = ["x", "y", "value"];

    fn csv_coords(&self, row: usize, col: usize) -> (f64, f64) {
        (self.x(col), self.y(row))
    }

    fn geometry(&self) -> [f64; 4] {
        [self.ly, 0.0, 0.0, 0.0]
    }

    fn from_header(rows: usize, cols: usize, g: [f64; 4]) -> Result<Self> {
        CartesianGrid::new(cols, rows, g[0])
    }
}

impl SnapshotGrid for PolarGrid {
    const KIND: u8 = 1;
    const COLUMNS: [&'static str; 3] = ["r", "theta", "value"];

    fn csv_coords(&self, row: usize, col: usize) -> (f64, f64) {
        (self.r(row), self.theta(col))
    }

    fn geometry(&self) -> [f64; 4] {
        [self.r_min, self.r_max, 0.0, 0.0]
    }

    fn from_header(rows: usize, cols: usize, g: [f64; 4]) -> Result<Self> {
        PolarGrid::new(rows, cols, g[0], g[1])
    }
}

/// A snapshot read back without knowing its grid kind in advance.
#[derive(Clone, Debug, PartialEq)]
pub enum Snapshot {
    Cartesian(ScalarField<CartesianGrid>),
    Polar(ScalarField<PolarGrid>),
}

pub fn write_csv<G: SnapshotGrid, W: Write>(f: &ScalarField<G>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(G::COLUMNS)?;
    let (rows, cols) = f.grid.shape();
    for r in 0..rows {
        for c in 0..cols {
            let (a, b) = f.grid.csv_coords(r, c);
            w.write_record([a.to_string(), b.to_string(), f.get(r, c).to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Rows of a snapshot CSV, checked against the expected header.
pub fn read_csv<G: SnapshotGrid, R: Read>(input: R) -> Result<Vec<[f64; 3]>> {
    let mut rd = csv::Reader::from_reader(input);
    let header = rd.headers()?.clone();
    if header.iter().ne(G::COLUMNS.iter().copied()) {
        return Err(Error::Format(format!(
            "expected header {:?}, found {:?}",
            G::COLUMNS,
            header.iter().collect::<Vec<_>>()
        )));
    }
    let mut rows = Vec::new();
    for (k, rec) in rd.records().enumerate() {
        let rec = rec?;
        let mut row = [0.0; 3];
        for (slot, field) in row.iter_mut().zip(rec.iter()) {
            *slot = field
                .parse()
                .map_err(|_| Error::Format(format!("row {}: bad number {field:?}", k + 2)))?;
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn write_binary<G: SnapshotGrid, W: Write>(f: &ScalarField<G>, mut out: W) -> Result<()> {
    let (rows, cols) = f.grid.shape();
    let mut buf = Vec::with_capacity(50 + 8 * rows * cols);
    buf.extend_from_slice(MAGIC);
    buf.push(G::KIND);
    buf.extend_from_slice(&(rows as u32).to_le_bytes());
    buf.extend_from_slice(&(cols as u32).to_le_bytes());
    buf.extend_from_slice(&f.time.to_le_bytes());
    for g in f.grid.geometry() {
        buf.extend_from_slice(&g.to_le_bytes());
    }
    for v in &f.values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    out.write_all(&buf)?;
    Ok(())
}

fn take<const N: usize>(data: &[u8], pos: &mut usize) -> Result<[u8; N]> {
    let end = *pos + N;
    let s = data
        .get(*pos..end)
        .ok_or_else(|| Error::Format("truncated ENHD1 snapshot".into()))?;
    *pos = end;
    Ok(s.try_into().expect("slice length"))
}

fn decode<G: SnapshotGrid>(data: &[u8], mut pos: usize, rows: usize, cols: usize) -> Result<ScalarField<G>> {
    let time = f64::from_le_bytes(take(data, &mut pos)?);
    let mut geo = [0.0; 4];
    for g in &mut geo {
        *g = f64::from_le_bytes(take(data, &mut pos)?);
    }
    let grid = G::from_header(rows, cols, geo)?;
    let n = rows * cols;
    if data.len() != pos + 8 * n {
        return Err(Error::Format(format!(
            "ENHD1 payload has {} bytes, expected {}",
            data.len() - pos,
            8 * n
        )));
    }
    let values = data[pos..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk")))
        .collect();
    ScalarField::from_values(grid, values, time)
}

pub fn read_binary<R: Read>(mut input: R) -> Result<Snapshot> {
    let mut data = Vec::new();
    input.read_to_end(&mut data)?;
    let mut pos = 0;
    let magic: [u8; 5] = take(&data, &mut pos)?;
    if &magic != MAGIC {
        return Err(Error::Format("missing ENHD1 magic".into()));
    }
    let [kind] = take::<1>(&data, &mut pos)?;
    let rows = u32::from_le_bytes(take(&data, &mut pos)?) as usize;
    let cols = u32::from_le_bytes(take(&data, &mut pos)?) as usize;
    match kind {
        0 => Ok(Snapshot::Cartesian(decode(&data, pos, rows, cols)?)),
        1 => Ok(Snapshot::Polar(decode(&data, pos, rows, cols)?)),
        k => Err(Error::Format(format!("unknown ENHD1 grid kind {k}"))),
    }
}
