use std::fmt::Write as _;

use crate::scattering::DiagnosticSeries;
use crate::{Error, Result};

/// One CSV block: `label,reference_exponent,fit_window`, the column names, then
/// one row per sample. Missing reference or window are written as `none`.
pub fn write_csv_block(s: &DiagnosticSeries) -> String {
    let mut out = String::new();
    let reference = s.reference_exponent.map_or("none".to_string(), |r| r.to_string());
    let window = s.window.map_or("none".to_string(), |(a, b)| format!("{a}:{b}"));
    let _ = writeln!(out, "{},{reference},{window}", s.label);
    let mut names = vec!["t".to_string(), "value".to_string()];
    names.extend(s.extra.iter().map(|(n, _)| n.clone()));
    let _ = writeln!(out, "{}", names.join(","));
    for i in 0..s.times.len() {
        let _ = write!(out, "{},{}", s.times[i], s.values[i]);
        for (_, c) in &s.extra {
            let _ = write!(out, ",{}", c[i]);
        }
        out.push('\n');
    }
    out
}

/// Blocks separated by blank lines.
pub fn write_csv_blocks(series: &[DiagnosticSeries]) -> String {
    series.iter().map(write_csv_block).collect::<Vec<_>>().join("\n")
}

fn parse_num(line: usize, s: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| Error::Parse { line, msg: format!("{s:?} is not a number") })
}

pub fn parse_csv_blocks(text: &str) -> Result<Vec<DiagnosticSeries>> {
    let mut out = Vec::new();
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l)).peekable();
    loop {
        while lines.peek().is_some_and(|(_, l)| l.trim().is_empty()) {
            lines.next();
        }
        let Some((hl, header)) = lines.next() else { break };
        let parts: Vec<&str> = header.split(',').collect();
        if parts.len() != 3 || parts[0].trim().is_empty() {
            return Err(Error::Parse { line: hl, msg: "expected label,reference_exponent,fit_window".into() });
        }
        let mut s = DiagnosticSeries::new(parts[0].trim());
        if parts[1].trim() != "none" {
            s.reference_exponent = Some(parse_num(hl, parts[1])?);
        }
        if parts[2].trim() != "none" {
            let w = super::config::parse_window(parts[2].trim())
                .map_err(|e| Error::Parse { line: hl, msg: e.to_string() })?;
            s.window = Some(w);
        }
        let (cl, cols) = lines.next().ok_or(Error::Parse { line: hl + 1, msg: "missing column names".into() })?;
        let names: Vec<&str> = cols.split(',').map(str::trim).collect();
        if names.len() < 2 || names[0] != "t" || names[1] != "value" {
            return Err(Error::Parse { line: cl, msg: "columns must start with t,value".into() });
        }
        let mut extra: Vec<Vec<f64>> = vec![Vec::new(); names.len() - 2];
        while let Some((rl, row)) = lines.next_if(|(_, l)| !l.trim().is_empty()) {
            let cells: Vec<&str> = row.split(',').collect();
            if cells.len() != names.len() {
                return Err(Error::Parse { line: rl, msg: format!("{} cells, expected {}", cells.len(), names.len()) });
            }
            s.push(parse_num(rl, cells[0])?, parse_num(rl, cells[1])?);
            for (c, cell) in extra.iter_mut().zip(&cells[2..]) {
                c.push(parse_num(rl, cell)?);
            }
        }
        for (name, c) in names[2..].iter().zip(extra) {
            s.add_column(*name, c)?;
        }
        out.push(s);
    }
    Ok(out)
}
