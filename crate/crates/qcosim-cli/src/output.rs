//! Result serialization: CSV (primary, 17-significant-digit floats), JSON,
//! and the run manifest.

use crate::Format;
use qcosim_core::analyses::Table;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::Path;
use std::time::Duration;

pub struct TaggedTable {
    pub tag: String,
    pub table: Table,
}

fn fmt_float(v: f64) -> String {
    if v == 0.0 {
        // Avoid "-0" vs "0" nondeterminism across code paths.
        "0.0000000000000000e0".to_string()
    } else {
        format!("{v:.16e}")
    }
}

pub fn render_csv(table: &Table) -> String {
    let mut out = String::new();
    out.push_str(&table.columns.join(","));
    out.push('\n');
    for row in &table.rows {
        let mut first = true;
        for v in row {
            if !first {
                out.push(',');
            }
            out.push_str(&fmt_float(*v));
            first = false;
        }
        out.push('\n');
    }
    out
}

pub fn render_json(table: &Table) -> String {
    // Numbers as strings keep the 17-digit round-trip guarantee and NaN
    // representable.
    let rows: Vec<Vec<String>> =
        table.rows.iter().map(|r| r.iter().map(|v| fmt_float(*v)).collect()).collect();
    let doc = serde_json::json!({
        "columns": table.columns,
        "rows": rows,
    });
    serde_json::to_string_pretty(&doc).expect("json render") + "\n"
}

pub fn render_table(t: &TaggedTable, format: Format) -> String {
    match format {
        Format::Csv => render_csv(&t.table),
        Format::Json => render_json(&t.table),
    }
}

pub fn render_all(tables: &[TaggedTable], format: Format) -> Vec<String> {
    tables.iter().map(|t| render_table(t, format)).collect()
}

pub fn manifest(
    input: &Path,
    text: &str,
    overrides: &BTreeMap<String, f64>,
    outputs: &[String],
    wall: Duration,
) -> String {
    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    let hash = hasher.finalize();
    let hex: String = hash.iter().map(|b| format!("{b:02x}")).collect();
    let doc = serde_json::json!({
        "tool": "qcosim",
        "version": env!("CARGO_PKG_VERSION"),
        "input": input.display().to_string(),
        "input_sha256": hex,
        "overrides": overrides,
        "outputs": outputs,
        "wall_ms": wall.as_millis() as u64,
    });
    serde_json::to_string_pretty(&doc).expect("manifest render") + "\n"
}
