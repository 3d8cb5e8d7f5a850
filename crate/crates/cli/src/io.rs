//! On-disk formats: binary field snapshots, CSV tables and `report.meta`.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use vortex_core::grid::{GridField, GridGeometry};
use vortex_core::particles::{ParticleEnsemble, Species};
use vortex_core::pde::RefinementTable;

const MAGIC: &[u8; 4] = b"VSF1";

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{0}")]
    Io(#[from] io::Error),
    #[error("not a field snapshot: bad magic {0:?}")]
    Magic([u8; 4]),
    #[error("invalid snapshot grid: {0}")]
    Grid(#[from] vortex_core::Error),
    #[error("line {line}: {message}")]
    Csv { line: usize, message: String },
}

/// Writes `"VSF1"`, `n` as little-endian `u32`, `L` and the time stamp as
/// little-endian `f64`, then the `n²` values row by row.
pub fn write_field(path: &Path, field: &GridField) -> io::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_field_to(&mut out, field)?;
    out.flush()
}

pub fn write_field_to(out: &mut impl Write, field: &GridField) -> io::Result<()> {
    let g = field.geometry();
    out.write_all(MAGIC)?;
    out.write_all(&(g.n() as u32).to_le_bytes())?;
    out.write_all(&g.half_width().to_le_bytes())?;
    out.write_all(&field.time().to_le_bytes())?;
    for v in field.values() {
        out.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_field(path: &Path) -> Result<GridField, FormatError> {
    read_field_from(&mut BufReader::new(File::open(path)?))
}

pub fn read_field_from(input: &mut impl Read) -> Result<GridField, FormatError> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(FormatError::Magic(magic));
    }
    let mut word = [0u8; 4];
    input.read_exact(&mut word)?;
    let n = u32::from_le_bytes(word) as usize;
    let mut next = || -> io::Result<f64> {
        let mut b = [0u8; 8];
        input.read_exact(&mut b)?;
        Ok(f64::from_le_bytes(b))
    };
    let l = next()?;
    let time = next()?;
    let geometry = GridGeometry::new(n, l)?;
    let values = (0..geometry.len()).map(|_| next()).collect::<io::Result<Vec<_>>>()?;
    Ok(GridField::from_values(geometry, values)?.with_time(time))
}

fn write_csv(path: &Path, header: &str, rows: impl IntoIterator<Item = String>) -> io::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "{header}")?;
    for row in rows {
        writeln!(out, "{row}")?;
    }
    out.flush()
}

/// Norm table with header `t,eps,p,value`.
pub fn write_norm_table(path: &Path, rows: &[(f64, f64, f64, f64)]) -> io::Result<()> {
    write_csv(
        path,
        "t,eps,p,value",
        rows.iter().map(|(t, e, p, v)| format!("{t:?},{e:?},{p:?},{v:?}")),
    )
}

fn species_label(s: Species) -> &'static str {
    match s {
        Species::Plus => "plus",
        Species::Minus => "minus",
    }
}

/// Ensemble snapshot with header `i,x,y,weight,species`.
pub fn write_ensemble(path: &Path, ensemble: &ParticleEnsemble) -> io::Result<()> {
    let rows = ensemble
        .positions()
        .iter()
        .zip(ensemble.weights())
        .zip(ensemble.species())
        .enumerate()
        .map(|(i, ((x, w), s))| format!("{i},{:?},{:?},{w:?},{}", x[0], x[1], species_label(*s)));
    write_csv(path, "i,x,y,weight,species", rows)
}

pub fn read_ensemble(path: &Path, seed: u64) -> Result<ParticleEnsemble, FormatError> {
    let reader = BufReader::new(File::open(path)?);
    let (mut positions, mut weights, mut species) = (Vec::new(), Vec::new(), Vec::new());
    for (k, line) in reader.lines().enumerate() {
        let line = line?;
        if k == 0 {
            continue;
        }
        let bad = |message: String| FormatError::Csv { line: k + 1, message };
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 5 {
            return Err(bad(format!("expected 5 columns, found {}", cells.len())));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad(format!("not a number: {s:?}")));
        positions.push([num(cells[1])?, num(cells[2])?]);
        weights.push(num(cells[3])?);
        species.push(match cells[4] {
            "plus" => Species::Plus,
            "minus" => Species::Minus,
            other => return Err(bad(format!("unknown species {other:?}"))),
        });
    }
    Ok(ParticleEnsemble::new(positions, weights, species, seed)?)
}

/// Refinement table with header `n,dt,linf_diff`.
pub fn write_refinement(path: &Path, table: &RefinementTable) -> io::Result<()> {
    write_csv(
        path,
        "n,dt,linf_diff",
        table.rows.iter().map(|r| format!("{},{:?},{:?}", r.n, r.dt, r.linf_diff)),
    )
}

/// Any other table: a header and pre-formatted rows.
pub fn write_table(path: &Path, header: &str, rows: Vec<String>) -> io::Result<()> {
    write_csv(path, header, rows)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Everything needed to repeat a run: the command, the canonical config
/// text and its hash, the seeds, and the outcome of every assertion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub command: String,
    pub version: String,
    pub config_sha256: String,
    pub config: String,
    pub seeds: Vec<u64>,
    pub allow_inadmissible: bool,
    pub assertions: Vec<Assertion>,
    pub passed: bool,
}

pub fn write_meta(dir: &Path, meta: &ReportMeta) -> io::Result<()> {
    let mut out = BufWriter::new(File::create(dir.join("report.meta"))?);
    serde_json::to_writer_pretty(&mut out, meta)?;
    writeln!(out)?;
    out.flush()
}

pub fn read_meta(dir: &Path) -> Result<ReportMeta, FormatError> {
    let file = File::open(dir.join("report.meta"))?;
    serde_json::from_reader(BufReader::new(file)).map_err(|e| FormatError::Io(e.into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_header_layout() {
        let g = GridGeometry::new(16, 1.5).unwrap();
        let f = GridField::from_fn(g, |x| x[0] - 2.0 * x[1]).with_time(0.25);
        let mut bytes = Vec::new();
        write_field_to(&mut bytes, &f).unwrap();
        assert_eq!(bytes.len(), 4 + 4 + 8 + 8 + 8 * 256);
        assert_eq!(&bytes[..4], b"VSF1");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 16);
        assert_eq!(f64::from_le_bytes(bytes[8..16].try_into().unwrap()), 1.5);
        assert_eq!(f64::from_le_bytes(bytes[16..24].try_into().unwrap()), 0.25);
        assert_eq!(f64::from_le_bytes(bytes[24..32].try_into().unwrap()), f.values()[0]);
        let back = read_field_from(&mut bytes.as_slice()).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn rejects_foreign_bytes() {
        let bytes = b"VSF2\x10\0\0\0".to_vec();
        assert!(matches!(read_field_from(&mut bytes.as_slice()), Err(FormatError::Magic(_))));
        let truncated = b"VSF1\x10\0\0\0".to_vec();
        assert!(matches!(read_field_from(&mut truncated.as_slice()), Err(FormatError::Io(_))));
    }
}
