//! CSV emission: 17 significant digits, explicit infinity markers, LF rows.

use std::io::Write;
use std::path::Path;

/// Format a float with 17 significant digits (exact f64 round-trip).
/// Infinities render as `inf`/`-inf`, NaN as `nan-degenerate`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan-degenerate".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.16e}")
    }
}

pub fn write_csv(path: &Path, header: &[String], rows: &[Vec<String>]) -> std::io::Result<()> {
    let mut out = Vec::new();
    writeln!(out, "{}", header.join(","))?;
    for row in rows {
        writeln!(out, "{}", row.join(","))?;
    }
    std::fs::write(path, out)
}
