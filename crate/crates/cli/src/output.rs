//! Number formatting and the CSV / text artefacts.

use std::fs;
use std::io;
use std::path::Path;

use multilayer_fv::{FullState, Mesh};

/// Shortest representation that round-trips the value rounded to 12
/// significant digits.
pub fn fmt_num(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    if rounded == 0.0 {
        return "0".to_string();
    }
    let a = rounded.abs();
    if (1e-4..1e15).contains(&a) {
        rounded.to_string()
    } else {
        format!("{rounded:e}")
    }
}

/// Rows `layer, j, x, u` over every node, interface duplicates included.
/// Layers are numbered from 1.
pub fn write_profile(path: &Path, mesh: &Mesh, state: &FullState) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["layer", "j", "x", "u"])?;
    for node in mesh.nodes() {
        w.write_record([
            (node.layer + 1).to_string(),
            node.j.to_string(),
            fmt_num(mesh.x(node)),
            fmt_num(state.get(node)),
        ])?;
    }
    w.flush()
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
    text.push('\n');
    fs::write(path, text)
}

/// Left-align the first column and right-align the rest.
pub fn aligned_table(header: &[String], rows: &[Vec<String>]) -> String {
    let cols = header.len();
    let mut width = header.iter().map(|h| h.len()).collect::<Vec<_>>();
    for row in rows {
        for (w, cell) in width.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let line = |cells: &[String]| {
        let mut s = String::new();
        for (k, cell) in cells.iter().enumerate().take(cols) {
            if k == 0 {
                s.push_str(&format!("{cell:<w$}", w = width[k]));
            } else {
                s.push_str(&format!("  {cell:>w$}", w = width[k]));
            }
        }
        s.trim_end().to_string()
    };
    let mut out = line(header);
    out.push('\n');
    out.push_str(&"-".repeat(width.iter().sum::<usize>() + 2 * (cols - 1)));
    out.push('\n');
    for row in rows {
        out.push_str(&line(row));
        out.push('\n');
    }
    out
}
