use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::run::{Cell, Table};

/// Rendered manifest text: every resolved setting, one `key = value` line.
pub fn manifest_text(cfg: &RunConfig) -> String {
    let mut out = String::from("# hanle run manifest\n");
    let _ = writeln!(out, "version = {}", env!("CARGO_PKG_VERSION"));
    for (k, v) in &cfg.manifest {
        let _ = writeln!(out, "{k} = {v}");
    }
    out
}

pub fn sha256_hex(text: &str) -> String {
    Sha256::digest(text.as_bytes())
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

fn cell(c: &Cell) -> String {
    match c {
        Cell::Num(v) if v.is_nan() => "nan".into(),
        Cell::Num(v) => format!("{v:.16e}"),
        Cell::Int(n) => n.to_string(),
        Cell::Text(s) => s.clone(),
    }
}

pub fn csv_text(table: &Table, manifest_hash: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# manifest-sha256: {manifest_hash}");
    let _ = writeln!(out, "{}", table.columns.join(","));
    for row in &table.rows {
        let line: Vec<String> = row.iter().map(cell).collect();
        let _ = writeln!(out, "{}", line.join(","));
    }
    out
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Writes `<out>/<mode>.csv` and `<out>/manifest.txt`; returns the CSV path.
pub fn write_outputs(out_dir: &Path, cfg: &RunConfig, table: &Table) -> Result<PathBuf, CliError> {
    fs::create_dir_all(out_dir).map_err(|source| CliError::Io {
        path: out_dir.display().to_string(),
        source,
    })?;
    let manifest = manifest_text(cfg);
    let csv = csv_text(table, &sha256_hex(&manifest));
    let csv_path = out_dir.join(format!("{}.csv", cfg.mode));
    write(&out_dir.join("manifest.txt"), &manifest)?;
    write(&csv_path, &csv)?;
    Ok(csv_path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_keep_seventeen_digits() {
        assert_eq!(cell(&Cell::Num(0.1)), "1.0000000000000001e-1");
        assert_eq!(cell(&Cell::Num(-2.5)), "-2.5000000000000000e0");
        assert_eq!(cell(&Cell::Num(f64::NAN)), "nan");
        let back: f64 = cell(&Cell::Num(std::f64::consts::PI)).parse().unwrap();
        assert_eq!(back, std::f64::consts::PI);
    }

    #[test]
    fn csv_layout() {
        let t = Table {
            columns: vec!["a", "b"],
            rows: vec![vec![Cell::Num(1.0), Cell::Text("x".into())]],
        };
        let text = csv_text(&t, "abc");
        assert_eq!(text, "# manifest-sha256: abc\na,b\n1.0000000000000000e0,x\n");
    }

    #[test]
    fn known_digest() {
        assert_eq!(
            sha256_hex("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
