//! File formats.
//!
//! Permutations persist in two interchangeable forms:
//!  * binary — one line of header JSON terminated by `\n`, followed by the
//!    q targets as little-endian u64;
//!  * pure JSON — `{"header": …, "targets": […]}`, restricted to q ≤ 10⁵.
//!
//! Density curves and projections export as CSV (17 significant digits,
//! `.` decimal separator, LF line endings, provenance in a leading `#`
//! comment) or as JSON carrying the provenance object verbatim.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::discretizer::PermutationMap;
use crate::error::{Error, Result};
use crate::lattice::LatticePartition;

pub const PERM_FORMAT_VERSION: u32 = 1;

/// Maximum cell count for the pure-JSON permutation format.
pub const JSON_PERM_MAX_Q: usize = 100_000;

/// Header describing how a persisted permutation was built.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PermHeader {
    pub format_version: u32,
    pub m: usize,
    pub n_tilde: usize,
    pub map: String,
    pub params: serde_json::Value,
    /// "analytic" or "matching".
    pub mode: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub t_used: Option<u32>,
    /// Full run configuration of the producing command, if any.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub config: Option<serde_json::Value>,
}

impl PermHeader {
    fn validate_against(&self, perm: &PermutationMap) -> Result<()> {
        if self.m != perm.partition().dim() || self.n_tilde != perm.partition().n_tilde() {
            return Err(Error::Format(format!(
                "header grid {}^{} does not match permutation of size {}",
                self.n_tilde,
                self.m,
                perm.q()
            )));
        }
        Ok(())
    }
}

/// Write the binary format: header JSON line + q little-endian u64 targets.
pub fn write_permutation_binary(
    path: impl AsRef<Path>,
    perm: &PermutationMap,
    header: &PermHeader,
) -> Result<()> {
    header.validate_against(perm)?;
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer(&mut w, header).map_err(|e| Error::Format(e.to_string()))?;
    w.write_all(b"\n")?;
    for &t in perm.target() {
        w.write_all(&(t as u64).to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Write the pure-JSON format (q ≤ 10⁵).
pub fn write_permutation_json(
    path: impl AsRef<Path>,
    perm: &PermutationMap,
    header: &PermHeader,
) -> Result<()> {
    header.validate_against(perm)?;
    if perm.q() > JSON_PERM_MAX_Q {
        return Err(Error::TooLarge(format!(
            "JSON permutation format is limited to q ≤ {JSON_PERM_MAX_Q}, got {}",
            perm.q()
        )));
    }
    #[derive(Serialize)]
    struct Doc<'a> {
        header: &'a PermHeader,
        targets: &'a [u32],
    }
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer(&mut w, &Doc { header, targets: perm.target() })
        .map_err(|e| Error::Format(e.to_string()))?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

/// Read either permutation format, validating bijectivity.
pub fn read_permutation(path: impl AsRef<Path>) -> Result<(PermutationMap, PermHeader)> {
    let mut r = BufReader::new(File::open(&path)?);
    let mut first_line = Vec::new();
    r.read_until(b'\n', &mut first_line)?;
    let trimmed: &[u8] = first_line.strip_suffix(b"\n").unwrap_or(&first_line);

    // the JSON document form has a top-level "targets" field; the binary
    // form's first line is the bare header object
    if let Ok(value) = serde_json::from_slice::<serde_json::Value>(trimmed) {
        if value.get("targets").is_none() {
            let header: PermHeader =
                serde_json::from_value(value).map_err(|e| Error::Format(e.to_string()))?;
            if header.format_version != PERM_FORMAT_VERSION {
                return Err(Error::Format(format!(
                    "unsupported format version {}",
                    header.format_version
                )));
            }
            let partition = LatticePartition::new(header.m, header.n_tilde)?;
            let q = partition.q();
            let mut bytes = Vec::with_capacity(q * 8);
            r.read_to_end(&mut bytes)?;
            if bytes.len() != q * 8 {
                return Err(Error::Format(format!(
                    "expected {} target bytes, found {}",
                    q * 8,
                    bytes.len()
                )));
            }
            let mut target = Vec::with_capacity(q);
            for chunk in bytes.chunks_exact(8) {
                let v = u64::from_le_bytes(chunk.try_into().expect("chunk of 8"));
                if v > u32::MAX as u64 {
                    return Err(Error::Format(format!("target {v} out of range")));
                }
                target.push(v as u32);
            }
            let perm = PermutationMap::new(partition, target)?;
            return Ok((perm, header));
        }
    }

    // fall back to parsing the whole file as the JSON document form
    let mut rest = String::new();
    r.read_to_string(&mut rest)?;
    let full = format!("{}{rest}", String::from_utf8_lossy(&first_line));
    #[derive(Deserialize)]
    struct Doc {
        header: PermHeader,
        targets: Vec<u32>,
    }
    let doc: Doc = serde_json::from_str(&full).map_err(|e| Error::Format(e.to_string()))?;
    if doc.header.format_version != PERM_FORMAT_VERSION {
        return Err(Error::Format(format!(
            "unsupported format version {}",
            doc.header.format_version
        )));
    }
    let partition = LatticePartition::new(doc.header.m, doc.header.n_tilde)?;
    let perm = PermutationMap::new(partition, doc.targets)?;
    Ok((perm, doc.header))
}

/// 17 significant digits, enough to round-trip any f64.
pub fn format_g17(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV with columns theta, rho. The provenance object is embedded in a
/// leading comment line.
pub fn write_density_csv(
    path: impl AsRef<Path>,
    thetas: &[f64],
    rho: &[f64],
    provenance: &serde_json::Value,
) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "# {}", provenance).map_err(Error::Io)?;
    w.write_all(b"theta,rho\n")?;
    for (t, r) in thetas.iter().zip(rho) {
        writeln!(w, "{},{}", format_g17(*t), format_g17(*r)).map_err(Error::Io)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_density_json(
    path: impl AsRef<Path>,
    thetas: &[f64],
    rho: &[f64],
    provenance: &serde_json::Value,
) -> Result<()> {
    #[derive(Serialize)]
    struct Doc<'a> {
        config: &'a serde_json::Value,
        theta: &'a [f64],
        rho: &'a [f64],
    }
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer(&mut w, &Doc { config: provenance, theta: thetas, rho })
        .map_err(|e| Error::Format(e.to_string()))?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

/// CSV with columns linear_index, j_0..j_{m−1}, re, im.
pub fn write_projection_csv(
    path: impl AsRef<Path>,
    partition: &LatticePartition,
    values: &[Complex64],
    provenance: &serde_json::Value,
) -> Result<()> {
    if values.len() != partition.q() {
        return Err(Error::LengthMismatch { expected: partition.q(), got: values.len() });
    }
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "# {}", provenance).map_err(Error::Io)?;
    w.write_all(b"linear_index")?;
    for i in 0..partition.dim() {
        write!(w, ",j_{i}").map_err(Error::Io)?;
    }
    w.write_all(b",re,im\n")?;
    for (idx, v) in values.iter().enumerate() {
        write!(w, "{idx}").map_err(Error::Io)?;
        let multi = partition.delinearize(idx)?;
        for &c in multi.coords() {
            write!(w, ",{c}").map_err(Error::Io)?;
        }
        writeln!(w, ",{},{}", format_g17(v.re), format_g17(v.im)).map_err(Error::Io)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_projection_json(
    path: impl AsRef<Path>,
    partition: &LatticePartition,
    values: &[Complex64],
    provenance: &serde_json::Value,
) -> Result<()> {
    if values.len() != partition.q() {
        return Err(Error::LengthMismatch { expected: partition.q(), got: values.len() });
    }
    #[derive(Serialize)]
    struct Doc<'a> {
        config: &'a serde_json::Value,
        m: usize,
        n_tilde: usize,
        re: Vec<f64>,
        im: Vec<f64>,
    }
    let doc = Doc {
        config: provenance,
        m: partition.dim(),
        n_tilde: partition.n_tilde(),
        re: values.iter().map(|v| v.re).collect(),
        im: values.iter().map(|v| v.im).collect(),
    };
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer(&mut w, &doc).map_err(|e| Error::Format(e.to_string()))?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}
