use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::quantum::PauliString;

use super::{Architecture, SuperoperatorRow, SuperoperatorTable, N_DATA};

pub const SCHEMA_VERSION: &str = "1";

fn header(arch: Architecture) -> &'static str {
    match arch {
        Architecture::Wt4 => "error,ghz_success,meas_error,p_plaquette,p_vertex",
        Architecture::Wt3 => "error,ghz_success,meas_error,p_plaquette,p_vertex,p_idle",
    }
}

pub fn table_to_csv(table: &SuperoperatorTable) -> String {
    let mut out = String::new();
    let mut meta = table.metadata.clone();
    meta.insert("schema_version".into(), SCHEMA_VERSION.into());
    meta.insert("arch".into(), table.architecture.to_string());
    for (k, v) in &meta {
        let _ = writeln!(out, "# {k}={v}");
    }
    let _ = writeln!(out, "{}", header(table.architecture));
    for r in &table.rows {
        let _ = write!(
            out,
            "{},{},{},{:.16e},{:.16e}",
            r.error, r.ghz_success as u8, r.meas_error as u8, r.p_plaquette, r.p_vertex
        );
        if let Some(p) = r.p_idle {
            let _ = write!(out, ",{p:.16e}");
        }
        out.push('\n');
    }
    out
}

pub fn save_table(table: &SuperoperatorTable, path: &Path) -> Result<()> {
    table.validate()?;
    std::fs::write(path, table_to_csv(table))?;
    Ok(())
}

fn flag(s: &str, line: usize) -> Result<bool> {
    match s {
        "0" => Ok(false),
        "1" => Ok(true),
        _ => Err(Error::Schema(format!("line {line}: bad flag {s:?}"))),
    }
}

fn prob(s: &str, line: usize) -> Result<f64> {
    s.trim().parse().map_err(|_| Error::Schema(format!("line {line}: bad probability {s:?}")))
}

pub fn table_from_csv(text: &str) -> Result<SuperoperatorTable> {
    let mut metadata = BTreeMap::new();
    let mut header_line: Option<&str> = None;
    let mut rows = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(meta) = line.strip_prefix('#') {
            if let Some((k, v)) = meta.trim().split_once('=') {
                metadata.insert(k.trim().to_string(), v.trim().to_string());
            }
            continue;
        }
        if header_line.is_none() {
            header_line = Some(line);
            continue;
        }
        rows.push((i + 1, line));
    }
    match metadata.get("schema_version") {
        Some(v) if v == SCHEMA_VERSION => {}
        other => return Err(Error::Schema(format!("unsupported schema version {other:?}"))),
    }
    let arch = Architecture::parse(metadata.get("arch").ok_or_else(|| Error::Schema("missing arch".into()))?)?;
    if header_line != Some(header(arch)) {
        return Err(Error::Schema(format!("header {header_line:?} does not match {arch}")));
    }
    let n_cols = if arch == Architecture::Wt3 { 6 } else { 5 };
    let parsed = rows
        .into_iter()
        .map(|(ln, line)| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != n_cols {
                return Err(Error::Schema(format!("line {ln}: expected {n_cols} fields")));
            }
            let error: PauliString = f[0].parse().map_err(|_| Error::Schema(format!("line {ln}: bad error {:?}", f[0])))?;
            if error.len() != N_DATA {
                return Err(Error::Schema(format!("line {ln}: error must act on {N_DATA} qubits")));
            }
            Ok(SuperoperatorRow {
                error,
                ghz_success: flag(f[1], ln)?,
                meas_error: flag(f[2], ln)?,
                p_plaquette: prob(f[3], ln)?,
                p_vertex: prob(f[4], ln)?,
                p_idle: if n_cols == 6 { Some(prob(f[5], ln)?) } else { None },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let table = SuperoperatorTable { architecture: arch, rows: parsed, metadata };
    table.validate()?;
    Ok(table)
}

pub fn load_table(path: &Path) -> Result<SuperoperatorTable> {
    table_from_csv(&std::fs::read_to_string(path)?)
}
