//! Wire formats.
//!
//! * Flow CSV: header `origin,dest,flow`; codes written as quoted strings,
//!   flows as shortest round-trip decimals.
//! * Label file: one code per line, file order defining the matrix index.
//! * Matrix CSV: one header row with the n quoted region codes, then n rows
//!   of n entries.
//! * Matrix binary: magic `BSTM`, little-endian u64 n, n*n row-major IEEE-754
//!   doubles, then per label a little-endian u32 byte length and UTF-8 bytes.
//!
//! All writes go through a BufWriter and use `{}` formatting for floats,
//! which round-trips f64 exactly, so write-then-read reproduces a matrix
//! bit for bit.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::dense::Dense;
use crate::error::{Error, Result};
use crate::flowmatrix::{FlowMatrix, FlowRecord, RegionId};

const BIN_MAGIC: &[u8; 4] = b"BSTM";

/// Largest matrix order accepted from external files; keeps a corrupt header
/// from triggering an enormous allocation.
const MAX_WIRE_N: u64 = 100_000;

fn quote(code: &str) -> String {
    let mut out = String::with_capacity(code.len() + 2);
    out.push('"');
    for ch in code.chars() {
        if ch == '"' {
            out.push('"');
        }
        out.push(ch);
    }
    out.push('"');
    out
}

pub fn read_flow_csv(path: &Path) -> Result<Vec<FlowRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(csv_err)?;
    {
        let headers = rdr.headers().map_err(csv_err)?;
        let got: Vec<&str> = headers.iter().collect();
        if got != ["origin", "dest", "flow"] {
            return Err(Error::Format {
                msg: format!("expected header origin,dest,flow; found {}", got.join(",")),
            });
        }
    }
    let mut records = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        if rec.len() != 3 {
            return Err(Error::Parse {
                line,
                msg: format!("expected 3 fields, found {}", rec.len()),
            });
        }
        let flow: f64 = rec[2].parse().map_err(|e| Error::Parse {
            line,
            msg: format!("bad flow value {:?}: {e}", &rec[2]),
        })?;
        if flow < 0.0 {
            return Err(Error::Parse {
                line,
                msg: format!("negative flow {flow} for {} -> {}", &rec[0], &rec[1]),
            });
        }
        records.push(FlowRecord {
            origin: rec[0].to_string(),
            dest: rec[1].to_string(),
            flow,
        });
    }
    Ok(records)
}

fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    Error::Parse {
        line,
        msg: e.to_string(),
    }
}

/// Writes the strictly positive cells of `m` as flow records, row-major
/// order.
pub fn write_flow_csv(m: &FlowMatrix, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "origin,dest,flow")?;
    let n = m.n();
    for i in 0..n {
        for j in 0..n {
            let v = m.get(i, j);
            if v > 0.0 {
                writeln!(
                    w,
                    "{},{},{}",
                    quote(m.labels()[i].code()),
                    quote(m.labels()[j].code()),
                    v
                )?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_labels(path: &Path) -> Result<Vec<RegionId>> {
    let f = BufReader::new(File::open(path)?);
    let mut labels = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for line in f.lines() {
        let line = line?;
        let code = line.trim();
        if code.is_empty() {
            continue;
        }
        if !seen.insert(code.to_string()) {
            return Err(Error::DuplicateLabel {
                code: code.to_string(),
            });
        }
        labels.push(RegionId::new(code)?);
    }
    if labels.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(labels)
}

pub fn write_labels(labels: &[RegionId], path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for l in labels {
        writeln!(w, "{}", l.code())?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_matrix_csv(m: &FlowMatrix, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let n = m.n();
    let header: Vec<String> = m.labels().iter().map(|l| quote(l.code())).collect();
    writeln!(w, "{}", header.join(","))?;
    let mut line = String::new();
    for i in 0..n {
        line.clear();
        for (j, v) in m.dense().row(i).iter().enumerate() {
            if j > 0 {
                line.push(',');
            }
            line.push_str(&v.to_string());
        }
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_matrix_csv(path: &Path) -> Result<FlowMatrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(csv_err)?;
    let labels: Vec<RegionId> = {
        let headers = rdr.headers().map_err(csv_err)?;
        headers
            .iter()
            .map(RegionId::new)
            .collect::<Result<Vec<_>>>()?
    };
    let n = labels.len();
    let mut data = Vec::with_capacity(n * n);
    let mut rows = 0usize;
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        if rec.len() != n {
            return Err(Error::Parse {
                line,
                msg: format!("expected {n} entries, found {}", rec.len()),
            });
        }
        for field in rec.iter() {
            let v: f64 = field.parse().map_err(|e| Error::Parse {
                line,
                msg: format!("bad entry {field:?}: {e}"),
            })?;
            data.push(v);
        }
        rows += 1;
    }
    if rows != n {
        return Err(Error::Format {
            msg: format!("matrix has {n} labels but {rows} rows"),
        });
    }
    FlowMatrix::from_dense(Dense::from_vec(n, data)?, labels)
}

pub fn write_matrix_bin(m: &FlowMatrix, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(BIN_MAGIC)?;
    let n = m.n();
    w.write_all(&(n as u64).to_le_bytes())?;
    for &v in m.dense().as_slice() {
        w.write_all(&v.to_le_bytes())?;
    }
    for l in m.labels() {
        let bytes = l.code().as_bytes();
        w.write_all(&(bytes.len() as u32).to_le_bytes())?;
        w.write_all(bytes)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_matrix_bin(path: &Path) -> Result<FlowMatrix> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != BIN_MAGIC {
        return Err(Error::Format {
            msg: format!("bad magic {magic:?}, expected BSTM"),
        });
    }
    let mut nbuf = [0u8; 8];
    r.read_exact(&mut nbuf)?;
    let n64 = u64::from_le_bytes(nbuf);
    if n64 == 0 || n64 > MAX_WIRE_N {
        return Err(Error::Format {
            msg: format!("unreasonable matrix order {n64}"),
        });
    }
    let n = n64 as usize;
    let mut data = Vec::with_capacity(n * n);
    let mut vbuf = [0u8; 8];
    for _ in 0..n * n {
        r.read_exact(&mut vbuf)?;
        data.push(f64::from_le_bytes(vbuf));
    }
    let mut labels = Vec::with_capacity(n);
    let mut lbuf = [0u8; 4];
    for _ in 0..n {
        r.read_exact(&mut lbuf)?;
        let len = u32::from_le_bytes(lbuf) as usize;
        if len > 4096 {
            return Err(Error::Format {
                msg: format!("unreasonable label length {len}"),
            });
        }
        let mut sbuf = vec![0u8; len];
        r.read_exact(&mut sbuf)?;
        let code = String::from_utf8(sbuf).map_err(|e| Error::Format {
            msg: format!("label is not UTF-8: {e}"),
        })?;
        labels.push(RegionId::new(code)?);
    }
    FlowMatrix::from_dense(Dense::from_vec(n, data)?, labels)
}

/// Reads a matrix by extension: `.bstm` binary, anything else CSV.
pub fn read_matrix_auto(path: &Path) -> Result<FlowMatrix> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("bstm") => read_matrix_bin(path),
        _ => read_matrix_csv(path),
    }
}

/// Writes a matrix by extension: `.bstm` binary, anything else CSV.
pub fn write_matrix_auto(m: &FlowMatrix, path: &Path) -> Result<()> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("bstm") => write_matrix_bin(m, path),
        _ => write_matrix_csv(m, path),
    }
}
