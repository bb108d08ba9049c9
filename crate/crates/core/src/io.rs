//! File formats shared by the command-line front end.
//!
//! * `SRT1` matrix container: the magic bytes `SRT1`, little-endian `u64`
//!   rows and cols, then `rows·cols` complex entries as interleaved
//!   little-endian `f64` pairs `(re, im)`, row-major. Axes, radar config and
//!   provenance live in a sidecar `<file>.json`.
//! * CSV: a `# config_sha256=… seed=…` provenance line, then the mandatory
//!   column header, `.` decimals and `,` separators.
//! * Binary greyscale PGM (`P5`) with the provenance as a header comment.
//!
//! Every write goes to a temporary file in the target directory and is
//! renamed into place.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{Complex64, ComplexMatrix};
use crate::sar_model::{Axis, DataMatrix, RadarConfig};

pub const SRT1_MAGIC: &[u8; 4] = b"SRT1";
const SRT1_HEADER: usize = 4 + 8 + 8;

/// Which configuration and seed produced an output.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_sha256: String,
    pub seed: u64,
}

impl Provenance {
    pub fn header_line(&self) -> String {
        format!("config_sha256={} seed={}", self.config_sha256, self.seed)
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn format_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

/// Writes `bytes` to a temporary sibling of `path`, then renames it over
/// `path`. Readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err(path))?;
    tmp.write_all(bytes).map_err(io_err(path))?;
    tmp.as_file().sync_all().map_err(io_err(path))?;
    tmp.persist(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e.error,
    })?;
    Ok(())
}

pub fn encode_srt1(m: &ComplexMatrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(SRT1_HEADER + 16 * m.as_slice().len());
    out.extend_from_slice(SRT1_MAGIC);
    out.extend_from_slice(&(m.rows() as u64).to_le_bytes());
    out.extend_from_slice(&(m.cols() as u64).to_le_bytes());
    for z in m.as_slice() {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

/// Parses an SRT1 byte stream; `path` only labels errors.
pub fn decode_srt1(bytes: &[u8], path: &Path) -> Result<ComplexMatrix> {
    if bytes.len() < SRT1_HEADER || &bytes[..4] != SRT1_MAGIC {
        return Err(format_err(path, "missing SRT1 magic"));
    }
    let word = |k: usize| u64::from_le_bytes(bytes[k..k + 8].try_into().expect("8 bytes"));
    let (rows, cols) = (word(4), word(12));
    let expected = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(16))
        .and_then(|n| n.checked_add(SRT1_HEADER as u64));
    if expected != Some(bytes.len() as u64) {
        return Err(format_err(
            path,
            format!(
                "{rows}x{cols} header does not match a payload of {} bytes",
                bytes.len() - SRT1_HEADER
            ),
        ));
    }
    let f = |b: &[u8]| f64::from_le_bytes(b.try_into().expect("8 bytes"));
    let data = bytes[SRT1_HEADER..]
        .chunks_exact(16)
        .map(|c| Complex64::new(f(&c[..8]), f(&c[8..])))
        .collect();
    ComplexMatrix::from_vec(rows as usize, cols as usize, data)
}

pub fn write_srt1(path: &Path, m: &ComplexMatrix) -> Result<()> {
    write_atomic(path, &encode_srt1(m))
}

pub fn read_srt1(path: &Path) -> Result<ComplexMatrix> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    decode_srt1(&bytes, path)
}

/// Contents of the `<file>.json` sidecar next to an SRT1 matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sidecar {
    pub format: String,
    pub rows: usize,
    pub cols: usize,
    /// Rows are slow time, columns fast time, both in seconds.
    pub slow_axis: Axis,
    pub fast_axis: Axis,
    pub radar: RadarConfig,
    pub provenance: Provenance,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// Writes the matrix and its sidecar.
pub fn write_data_matrix(path: &Path, d: &DataMatrix, provenance: &Provenance) -> Result<()> {
    let sidecar = Sidecar {
        format: "SRT1".into(),
        rows: d.values.rows(),
        cols: d.values.cols(),
        slow_axis: d.slow_axis,
        fast_axis: d.fast_axis,
        radar: d.config.clone(),
        provenance: provenance.clone(),
    };
    write_srt1(path, &d.values)?;
    write_json(&sidecar_path(path), &sidecar)
}

pub fn read_data_matrix(path: &Path) -> Result<(DataMatrix, Sidecar)> {
    let values = read_srt1(path)?;
    let sidecar: Sidecar = read_json(&sidecar_path(path))?;
    if (sidecar.rows, sidecar.cols) != values.shape() {
        return Err(format_err(
            path,
            format!(
                "sidecar describes {}x{} but the matrix is {}x{}",
                sidecar.rows,
                sidecar.cols,
                values.rows(),
                values.cols()
            ),
        ));
    }
    let d = DataMatrix::with_axes(values, sidecar.slow_axis, sidecar.fast_axis, sidecar.radar.clone())?;
    Ok((d, sidecar))
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| format_err(path, e.to_string()))?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    serde_json::from_slice(&bytes).map_err(|e| format_err(path, e.to_string()))
}

/// CSV with a provenance line and a column header. Each row must have as
/// many fields as the header.
pub fn write_csv(path: &Path, provenance: &Provenance, header: &str, rows: &[String]) -> Result<()> {
    let width = header.split(',').count();
    if let Some((i, _)) = rows.iter().enumerate().find(|(_, r)| r.split(',').count() != width) {
        return Err(format_err(path, format!("row {i} does not have {width} fields")));
    }
    let mut out = String::with_capacity(64 * (rows.len() + 2));
    out.push_str("# ");
    out.push_str(&provenance.header_line());
    out.push('\n');
    out.push_str(header);
    out.push('\n');
    for r in rows {
        out.push_str(r);
        out.push('\n');
    }
    write_atomic(path, out.as_bytes())
}

/// Greyscale PGM of `values` (row-major, `width` per row), linearly mapped
/// from `[min, max]` of the finite entries to `[0, 255]`. Non-finite
/// entries are black.
pub fn encode_pgm(values: &[f64], width: usize, provenance: &Provenance) -> Result<Vec<u8>> {
    if width == 0 || values.is_empty() || !values.len().is_multiple_of(width) {
        return Err(Error::Shape(format!(
            "{} values do not fill rows of width {width}",
            values.len()
        )));
    }
    let height = values.len() / width;
    let finite = values.iter().copied().filter(|v| v.is_finite());
    let (lo, hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let span = if hi > lo { hi - lo } else { 1.0 };
    let mut out = format!("P5\n# {}\n{width} {height}\n255\n", provenance.header_line()).into_bytes();
    out.extend(values.iter().map(|&v| {
        if v.is_finite() {
            (255.0 * (v - lo) / span).round().clamp(0.0, 255.0) as u8
        } else {
            0
        }
    }));
    Ok(out)
}

pub fn write_pgm(path: &Path, values: &[f64], width: usize, provenance: &Provenance) -> Result<()> {
    write_atomic(path, &encode_pgm(values, width, provenance)?)
}
