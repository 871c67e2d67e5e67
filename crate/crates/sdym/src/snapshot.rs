//! Binary field snapshots: a one-line JSON header followed by raw
//! little-endian complex128 samples.
//!
//! The header records the field name, simulation time, matrix dimension
//! (1 for scalar fields), grid sizes/periods, axis names, dtype, and data
//! ordering.  Samples follow in C order — for matrix fields, entry (i,j)
//! blocks in row-major entry order, each a full C-order grid.  Writing and
//! re-reading is bit-exact: doubles round-trip through `to_le_bytes`.

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;
use thiserror::Error;

use crate::fields::{FieldError, Grid, MatrixField, ScalarField};

/// Errors from snapshot I/O.
#[derive(Debug, Error)]
pub enum SnapshotError {
    /// Underlying filesystem failure.
    #[error("snapshot I/O: {0}")]
    Io(#[from] std::io::Error),
    /// The header line is missing or not valid JSON.
    #[error("snapshot header: {0}")]
    Header(String),
    /// Payload length does not match the header.
    #[error("snapshot payload truncated: expected {expected} bytes, got {got}")]
    Truncated { expected: usize, got: usize },
    /// The header describes an invalid grid or field.
    #[error("snapshot field: {0}")]
    Field(#[from] FieldError),
}

/// Metadata line preceding the binary payload.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct SnapshotHeader {
    /// Field name, e.g. "phi" or "s1"; groups snapshots across times.
    pub name: String,
    /// Simulation time the samples belong to.
    pub time: f64,
    /// Matrix dimension; 1 for scalar fields.
    pub dim: usize,
    /// Points per axis.
    pub sizes: Vec<usize>,
    /// Physical period per axis.
    pub lengths: Vec<f64>,
    /// Axis names, x first.
    pub axes: Vec<String>,
    /// Sample type; always "complex128".
    pub dtype: String,
    /// Grid ordering; always "C".
    pub order: String,
}

/// A decoded snapshot: scalar or matrix payload.
#[derive(Debug, Clone)]
pub enum SnapshotData {
    Scalar(ScalarField),
    Matrix(MatrixField),
}

fn axis_names(ndim: usize) -> Vec<String> {
    ["x", "y", "z"].iter().take(ndim).map(|s| s.to_string()).collect()
}

fn header_for(name: &str, time: f64, dim: usize, grid: &Grid) -> SnapshotHeader {
    SnapshotHeader {
        name: name.to_string(),
        time,
        dim,
        sizes: grid.sizes().to_vec(),
        lengths: grid.lengths().to_vec(),
        axes: axis_names(grid.ndim()),
        dtype: "complex128".to_string(),
        order: "C".to_string(),
    }
}

fn write_payload(out: &mut impl Write, blocks: &[&ScalarField]) -> Result<(), SnapshotError> {
    let mut buf = Vec::with_capacity(blocks.len() * blocks[0].data().len() * 16);
    for b in blocks {
        for z in b.data() {
            buf.extend_from_slice(&z.re.to_le_bytes());
            buf.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    out.write_all(&buf)?;
    Ok(())
}

/// Write a scalar field snapshot.
pub fn write_scalar(
    path: &Path,
    name: &str,
    time: f64,
    field: &ScalarField,
) -> Result<(), SnapshotError> {
    let header = header_for(name, time, 1, field.grid());
    let mut file = std::fs::File::create(path)?;
    let line = serde_json::to_string(&header).map_err(|e| SnapshotError::Header(e.to_string()))?;
    file.write_all(line.as_bytes())?;
    file.write_all(b"\n")?;
    write_payload(&mut file, &[field])
}

/// Write a matrix field snapshot.
pub fn write_matrix(
    path: &Path,
    name: &str,
    time: f64,
    field: &MatrixField,
) -> Result<(), SnapshotError> {
    let header = header_for(name, time, field.dim(), field.grid());
    let mut file = std::fs::File::create(path)?;
    let line = serde_json::to_string(&header).map_err(|e| SnapshotError::Header(e.to_string()))?;
    file.write_all(line.as_bytes())?;
    file.write_all(b"\n")?;
    let blocks: Vec<&ScalarField> = (0..field.dim())
        .flat_map(|i| (0..field.dim()).map(move |j| (i, j)))
        .map(|(i, j)| field.entry(i, j))
        .collect();
    write_payload(&mut file, &blocks)
}

/// Read any snapshot file.
pub fn read(path: &Path) -> Result<(SnapshotHeader, SnapshotData), SnapshotError> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    let newline = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| SnapshotError::Header("missing newline after header".into()))?;
    let header: SnapshotHeader = serde_json::from_slice(&bytes[..newline])
        .map_err(|e| SnapshotError::Header(e.to_string()))?;
    if header.dtype != "complex128" || header.order != "C" {
        return Err(SnapshotError::Header(format!(
            "unsupported dtype/order {}/{}",
            header.dtype, header.order
        )));
    }
    let grid = Grid::new(&header.sizes, &header.lengths)?;
    let n_points = grid.total_points();
    let n_blocks = header.dim * header.dim.max(1);
    let n_blocks = if header.dim == 1 { 1 } else { n_blocks };
    let payload = &bytes[newline + 1..];
    let expected = n_blocks * n_points * 16;
    if payload.len() != expected {
        return Err(SnapshotError::Truncated { expected, got: payload.len() });
    }
    let mut read_block = |b: usize| -> ScalarField {
        let mut data = Vec::with_capacity(n_points);
        let base = b * n_points * 16;
        for p in 0..n_points {
            let off = base + p * 16;
            let re = f64::from_le_bytes(payload[off..off + 8].try_into().expect("length checked"));
            let im =
                f64::from_le_bytes(payload[off + 8..off + 16].try_into().expect("length checked"));
            data.push(Complex64::new(re, im));
        }
        ScalarField::from_data(&grid, data).expect("length checked")
    };
    if header.dim == 1 {
        Ok((header, SnapshotData::Scalar(read_block(0))))
    } else {
        let dim = header.dim;
        let entries: Vec<ScalarField> = (0..dim * dim).map(&mut read_block).collect();
        let field = MatrixField::from_entries(dim, entries)?;
        Ok((header, SnapshotData::Matrix(field)))
    }
}

/// Read a snapshot that must be scalar.
pub fn read_scalar(path: &Path) -> Result<(SnapshotHeader, ScalarField), SnapshotError> {
    match read(path)? {
        (h, SnapshotData::Scalar(f)) => Ok((h, f)),
        (h, SnapshotData::Matrix(_)) => Err(SnapshotError::Header(format!(
            "expected scalar snapshot, found dim {}",
            h.dim
        ))),
    }
}

/// Read a snapshot that must be a matrix field.
pub fn read_matrix(path: &Path) -> Result<(SnapshotHeader, MatrixField), SnapshotError> {
    match read(path)? {
        (h, SnapshotData::Matrix(f)) => Ok((h, f)),
        (h, SnapshotData::Scalar(_)) => Err(SnapshotError::Header(format!(
            "expected matrix snapshot, found dim {}",
            h.dim
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::FieldSampler;

    fn tmp(name: &str) -> std::path::PathBuf {
        let mut p = std::env::temp_dir();
        p.push(format!("sdym-test-{}-{}", std::process::id(), name));
        p
    }

    #[test]
    fn scalar_round_trip_is_bit_exact() {
        let g = Grid::new(&[16, 8], &[2.5, 1.25]).unwrap();
        let f = FieldSampler::new(123).complex_field(&g, std::f64::consts::E);
        let path = tmp("scalar.snap");
        write_scalar(&path, "phi", 0.375, &f).unwrap();
        let (h, back) = read_scalar(&path).unwrap();
        std::fs::remove_file(&path).ok();
        assert_eq!(h.name, "phi");
        assert_eq!(h.time, 0.375, "time must round-trip exactly");
        assert_eq!(h.sizes, vec![16, 8]);
        assert_eq!(
            back.data(),
            f.data(),
            "every sample must round-trip bit-exactly through the file"
        );
        assert_eq!(back.grid(), f.grid(), "grid periods must round-trip exactly");
    }

    #[test]
    fn matrix_round_trip_is_bit_exact() {
        let g = Grid::new(&[8, 8], &[1.0, 3.0]).unwrap();
        let m = FieldSampler::new(5).matrix_field(&g, 2, 1.0);
        let path = tmp("matrix.snap");
        write_matrix(&path, "a1", 1.5, &m).unwrap();
        let (h, back) = read_matrix(&path).unwrap();
        std::fs::remove_file(&path).ok();
        assert_eq!(h.dim, 2);
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(
                    back.entry(i, j).data(),
                    m.entry(i, j).data(),
                    "matrix entry ({i},{j}) must round-trip bit-exactly"
                );
            }
        }
    }

    #[test]
    fn truncated_payload_is_rejected() {
        let g = Grid::new(&[8], &[1.0]).unwrap();
        let f = ScalarField::zeros(&g);
        let path = tmp("trunc.snap");
        write_scalar(&path, "phi", 0.0, &f).unwrap();
        let full = std::fs::read(&path).unwrap();
        std::fs::write(&path, &full[..full.len() - 7]).unwrap();
        let err = read(&path);
        std::fs::remove_file(&path).ok();
        assert!(
            matches!(err, Err(SnapshotError::Truncated { .. })),
            "short payload must be reported as truncation"
        );
    }

    #[test]
    fn scalar_reader_rejects_matrix_payload() {
        let g = Grid::new(&[8], &[1.0]).unwrap();
        let m = MatrixField::zeros(&g, 2);
        let path = tmp("kind.snap");
        write_matrix(&path, "a1", 0.0, &m).unwrap();
        let err = read_scalar(&path);
        std::fs::remove_file(&path).ok();
        assert!(err.is_err(), "scalar reader must refuse a matrix snapshot");
    }
}
