//! CSV and JSON output helpers shared by the experiments and the CLI.
//!
//! Floats are emitted with 17 significant digits so that files round-trip
//! bit-exactly; reruns from the same manifest must be byte-identical.

use std::fmt::Write as _;

/// Format a float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Render one CSV line from float cells.
pub fn csv_line(cells: &[f64]) -> String {
    let mut s = String::new();
    for (i, c) in cells.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        let _ = write!(s, "{}", fmt_f64(*c));
    }
    s.push('\n');
    s
}

/// Render a full CSV document with the given header.
pub fn csv_document(header: &str, rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut doc = String::from(header);
    doc.push('\n');
    for row in rows {
        doc.push_str(&csv_line(&row));
    }
    doc
}
