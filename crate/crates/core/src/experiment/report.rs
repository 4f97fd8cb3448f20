//! Long-format study reports and the files they are written to.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One `(setting, method, statistic)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub setting: String,
    pub method: String,
    pub statistic: String,
    pub value: f64,
    pub stderr: Option<f64>,
}

/// A unit of work that failed; its values are missing from the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub setting: String,
    pub replicate: usize,
    pub method: String,
    pub error: String,
}

pub(crate) fn create(dir: &Path, file: &str) -> Result<BufWriter<File>> {
    let path = dir.join(file);
    let f = File::create(&path).map_err(|e| Error::io(&path, e))?;
    Ok(BufWriter::new(f))
}

pub(crate) fn finish<W: Write>(mut w: csv::Writer<W>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

pub(crate) fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_summary_csv<W: Write>(rows: &[SummaryRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["setting", "method", "statistic", "value", "stderr"])?;
    for r in rows {
        w.write_record([
            r.setting.as_str(),
            &r.method,
            &r.statistic,
            &r.value.to_string(),
            &fmt_opt(r.stderr),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<csv output>", e))?;
    Ok(())
}

pub fn write_failures_csv<W: Write>(failures: &[Failure], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["setting", "replicate", "method", "error"])?;
    for f in failures {
        w.write_record([f.setting.as_str(), &f.replicate.to_string(), &f.method, &f.error])?;
    }
    w.flush().map_err(|e| Error::io("<csv output>", e))?;
    Ok(())
}

/// Text table with settings as row groups, methods as rows and the chosen
/// statistics as columns. Values are taken from `rows` verbatim.
pub fn render_table(rows: &[SummaryRow], statistics: &[&str], decimals: usize) -> String {
    let mut keys: Vec<(&str, &str)> = Vec::new();
    for r in rows {
        if !keys.contains(&(r.setting.as_str(), r.method.as_str())) {
            keys.push((&r.setting, &r.method));
        }
    }
    let cell = |setting: &str, method: &str, stat: &str| -> String {
        rows.iter()
            .find(|r| r.setting == setting && r.method == method && r.statistic == stat)
            .map(|r| match r.stderr {
                Some(se) => format!("{:.*} ({:.*})", decimals, r.value, decimals, se),
                None => format!("{:.*}", decimals, r.value),
            })
            .unwrap_or_else(|| "-".into())
    };
    let mut table: Vec<Vec<String>> = vec![["setting", "method"]
        .iter()
        .map(|s| s.to_string())
        .chain(statistics.iter().map(|s| s.to_string()))
        .collect()];
    for (setting, method) in keys {
        let mut line = vec![setting.to_string(), method.to_string()];
        line.extend(statistics.iter().map(|s| cell(setting, method, s)));
        table.push(line);
    }
    let widths: Vec<usize> = (0..table[0].len())
        .map(|c| table.iter().map(|l| l[c].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for line in &table {
        let cells: Vec<String> = line
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(c, (s, w))| if c < 2 { format!("{s:<w$}") } else { format!("{s:>w$}") })
            .collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
    }
    out
}

pub(crate) fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation; `None` below two values.
pub(crate) fn sd(xs: &[f64]) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    let m = mean(xs);
    Some((xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt())
}

pub(crate) fn stderr(xs: &[f64]) -> Option<f64> {
    sd(xs).map(|s| s / (xs.len() as f64).sqrt())
}

/// Linear-interpolation quantile of sorted data (`(n - 1) q` position).
pub(crate) fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}
