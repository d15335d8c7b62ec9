//! CSV persistence for spectra and residuals.
//!
//! ```text
//! # label=synthetic:on
//! # live_time_s=1000
//! energy_kev_lo,energy_kev_hi,counts
//! 2,2.05,17
//! ```
//!
//! Numbers are written with Rust's shortest round-trip formatting, so a
//! written file reads back to the identical value and rewrites byte for byte.

use std::path::Path;

use crate::error::{Error, Result};
use crate::spectrum::{ResidualSpectrum, Spectrum};

pub const SPECTRUM_HEADER: &str = "energy_kev_lo,energy_kev_hi,counts";
pub const RESIDUAL_HEADER: &str = "energy_kev_lo,energy_kev_hi,value,variance";

pub fn write_spectrum(s: &Spectrum) -> String {
    let mut out = String::with_capacity(32 * s.n_bins() + 64);
    out.push_str(&format!("# label={}\n", s.label()));
    out.push_str(&format!("# live_time_s={}\n", s.live_time()));
    out.push_str(SPECTRUM_HEADER);
    out.push('\n');
    let e = s.bin_edges();
    for (i, c) in s.counts().iter().enumerate() {
        out.push_str(&format!("{},{},{}\n", e[i], e[i + 1], c));
    }
    out
}

pub fn write_residual(r: &ResidualSpectrum, label: &str) -> String {
    let mut out = String::new();
    out.push_str(&format!("# label={label}\n"));
    out.push_str(RESIDUAL_HEADER);
    out.push('\n');
    let e = r.bin_edges();
    for i in 0..r.values().len() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            e[i],
            e[i + 1],
            r.values()[i],
            r.variances()[i]
        ));
    }
    out
}

struct Table {
    meta: Vec<(String, String, usize)>,
    edges: Vec<f64>,
    rows: Vec<(usize, Vec<String>)>,
}

fn parse_table(text: &str, header: &str, source: &str) -> Result<Table> {
    let err = |line: usize, reason: String| Error::Parse {
        source_name: source.to_string(),
        line,
        reason,
    };
    let mut meta = Vec::new();
    let mut seen_header = false;
    let mut edges: Vec<f64> = Vec::new();
    let mut rows = Vec::new();
    let n_cols = header.split(',').count();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim_end_matches('\r');
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((k, v)) = comment.trim_start().split_once('=') {
                meta.push((k.trim().to_string(), v.to_string(), lineno));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        if !seen_header {
            if line.trim() != header {
                return Err(err(lineno, format!("expected header `{header}`")));
            }
            seen_header = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != n_cols {
            return Err(err(lineno, format!("expected {n_cols} fields, found {}", fields.len())));
        }
        let lo: f64 = fields[0]
            .parse()
            .map_err(|_| err(lineno, format!("bad energy `{}`", fields[0])))?;
        let hi: f64 = fields[1]
            .parse()
            .map_err(|_| err(lineno, format!("bad energy `{}`", fields[1])))?;
        if !(hi > lo) {
            return Err(err(lineno, format!("bin edges not increasing: {lo} >= {hi}")));
        }
        match edges.last() {
            None => edges.push(lo),
            Some(&prev_hi) if prev_hi == lo => {}
            Some(&prev_hi) => {
                return Err(err(
                    lineno,
                    format!("bin starts at {lo} but previous bin ended at {prev_hi}"),
                ))
            }
        }
        edges.push(hi);
        rows.push((lineno, fields[2..].iter().map(|s| s.to_string()).collect()));
    }
    if !seen_header {
        return Err(err(text.lines().count().max(1), format!("missing header `{header}`")));
    }
    if rows.is_empty() {
        return Err(err(text.lines().count().max(1), "no bins".into()));
    }
    Ok(Table { meta, edges, rows })
}

fn meta_value<'a>(t: &'a Table, key: &str, source: &str) -> Result<Option<&'a str>> {
    let mut found: Option<&(String, String, usize)> = None;
    for m in t.meta.iter().filter(|m| m.0 == key) {
        if found.is_some() {
            return Err(Error::Parse {
                source_name: source.to_string(),
                line: m.2,
                reason: format!("duplicate `{key}` comment"),
            });
        }
        found = Some(m);
    }
    Ok(found.map(|m| m.1.as_str()))
}

pub fn read_spectrum(text: &str, source: &str) -> Result<Spectrum> {
    let t = parse_table(text, SPECTRUM_HEADER, source)?;
    let err = |line: usize, reason: String| Error::Parse {
        source_name: source.to_string(),
        line,
        reason,
    };
    let mut counts = Vec::with_capacity(t.rows.len());
    for (lineno, fields) in &t.rows {
        let f = &fields[0];
        if f.starts_with('-') {
            return Err(err(*lineno, format!("negative count `{f}`")));
        }
        counts.push(f.parse::<u64>().map_err(|_| err(*lineno, format!("bad count `{f}`")))?);
    }
    let live =
        meta_value(&t, "live_time_s", source)?.ok_or_else(|| err(1, "missing `# live_time_s=` comment".into()))?;
    let live_time: f64 = live
        .trim()
        .parse()
        .map_err(|_| err(1, format!("bad live_time_s `{live}`")))?;
    let label = meta_value(&t, "label", source)?.unwrap_or("").to_string();
    Spectrum::new(t.edges, counts, live_time, label)
}

pub fn read_residual(text: &str, source: &str) -> Result<(ResidualSpectrum, String)> {
    let t = parse_table(text, RESIDUAL_HEADER, source)?;
    let err = |line: usize, reason: String| Error::Parse {
        source_name: source.to_string(),
        line,
        reason,
    };
    let mut values = Vec::with_capacity(t.rows.len());
    let mut variances = Vec::with_capacity(t.rows.len());
    for (lineno, fields) in &t.rows {
        let v: f64 = fields[0]
            .parse()
            .map_err(|_| err(*lineno, format!("bad value `{}`", fields[0])))?;
        let var: f64 = fields[1]
            .parse()
            .map_err(|_| err(*lineno, format!("bad variance `{}`", fields[1])))?;
        if !(var >= 0.0) {
            return Err(err(*lineno, format!("negative variance `{}`", fields[1])));
        }
        values.push(v);
        variances.push(var);
    }
    let label = meta_value(&t, "label", source)?.unwrap_or("").to_string();
    Ok((ResidualSpectrum::new(t.edges, values, variances)?, label))
}

pub fn load_spectrum(path: &Path) -> Result<Spectrum> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    read_spectrum(&text, &path.display().to_string())
}

pub fn save_spectrum(path: &Path, s: &Spectrum) -> Result<()> {
    std::fs::write(path, write_spectrum(s)).map_err(|e| Error::io(path, e))
}
