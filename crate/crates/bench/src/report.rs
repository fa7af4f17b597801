//! `results.csv`, `results.json` and one SVG line chart per objective and
//! slack setting. Output depends only on the records, never on the clock.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::experiment::{Algorithm, ReportFormat, RunRecord};
use crate::{io_err, BenchError, Result};

/// Shortest text that parses back to the same `f64`; infinities as `inf`.
pub fn format_value(v: f64) -> String {
    format!("{v}")
}

pub fn parse_value(s: &str) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|_| BenchError::Config(format!("not a number: `{s}`")))
}

/// Slack setting as `1;3`.
pub fn format_slack(slack: &[f64]) -> String {
    slack.iter().map(|&d| format_value(d)).collect::<Vec<_>>().join(";")
}

pub fn csv_header(objectives: &[String]) -> Vec<String> {
    let mut h: Vec<String> = ["algorithm", "k", "slack", "seed"].map(String::from).to_vec();
    h.extend(objectives.iter().enumerate().map(|(i, o)| format!("o{}_{o}", i + 1)));
    h.push("wall_ms".into());
    h.push("error".into());
    h
}

pub fn csv_row(r: &RunRecord, objectives: usize) -> Vec<String> {
    let mut row = vec![
        r.algorithm.to_string(),
        r.k.to_string(),
        format_slack(&r.slack),
        r.seed.to_string(),
    ];
    for i in 0..objectives {
        row.push(r.values.get(i).map(|&v| format_value(v)).unwrap_or_default());
    }
    row.push(format_value(r.wall_ms));
    row.push(r.error.clone().unwrap_or_default());
    row
}

/// The scalar columns of a CSV row, parsed back.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvRecord {
    pub algorithm: Algorithm,
    pub k: usize,
    pub slack: Vec<f64>,
    pub seed: u64,
    pub values: Vec<f64>,
    pub wall_ms: f64,
    pub error: Option<String>,
}

impl CsvRecord {
    pub fn of(r: &RunRecord) -> Self {
        CsvRecord {
            algorithm: r.algorithm,
            k: r.k,
            slack: r.slack.clone(),
            seed: r.seed,
            values: r.values.clone(),
            wall_ms: r.wall_ms,
            error: r.error.clone(),
        }
    }
}

fn field(row: &csv::StringRecord, i: usize) -> Result<&str> {
    row.get(i)
        .ok_or_else(|| BenchError::Config(format!("csv row lacks column {i}")))
}

fn parse_int<T: std::str::FromStr>(s: &str) -> Result<T> {
    s.parse()
        .map_err(|_| BenchError::Config(format!("not an integer: `{s}`")))
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<Vec<CsvRecord>> {
    let mut rd = csv::Reader::from_path(path)?;
    let width = rd.headers()?.len();
    if width < 6 {
        return Err(BenchError::Config("results.csv has too few columns".into()));
    }
    let m = width - 6;
    let mut out = Vec::new();
    for row in rd.records() {
        let row = row?;
        let slack = field(&row, 2)?;
        let values: Vec<&str> = (0..m).map(|i| field(&row, 4 + i)).collect::<Result<_>>()?;
        let error = field(&row, 5 + m)?;
        out.push(CsvRecord {
            algorithm: field(&row, 0)?.parse()?,
            k: parse_int(field(&row, 1)?)?,
            slack: if slack.is_empty() {
                Vec::new()
            } else {
                slack.split(';').map(parse_value).collect::<Result<_>>()?
            },
            seed: parse_int(field(&row, 3)?)?,
            values: if values.iter().all(|v| v.is_empty()) {
                Vec::new()
            } else {
                values.into_iter().map(parse_value).collect::<Result<_>>()?
            },
            wall_ms: parse_value(field(&row, 4 + m)?)?,
            error: (!error.is_empty()).then(|| error.to_string()),
        });
    }
    Ok(out)
}

pub fn read_json(path: impl AsRef<Path>) -> Result<Vec<RunRecord>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    Ok(serde_json::from_str(&text)?)
}

fn write(path: PathBuf, bytes: &[u8]) -> Result<PathBuf> {
    fs::write(&path, bytes).map_err(io_err(&path))?;
    Ok(path)
}

/// Writes the requested formats into `outdir` and returns the file paths.
pub fn emit_report(records: &[RunRecord], formats: &[ReportFormat], outdir: &Path) -> Result<Vec<PathBuf>> {
    let first = records
        .first()
        .ok_or_else(|| BenchError::Config("no records to report".into()))?;
    let objectives = &first.objectives;
    if records.iter().any(|r| &r.objectives != objectives) {
        return Err(BenchError::Config("records disagree on the objective list".into()));
    }
    fs::create_dir_all(outdir).map_err(io_err(outdir))?;
    let mut files = Vec::new();
    if formats.contains(&ReportFormat::Csv) {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(csv_header(objectives))?;
        for r in records {
            w.write_record(csv_row(r, objectives.len()))?;
        }
        let bytes = w.into_inner().map_err(|e| BenchError::Config(e.to_string()))?;
        files.push(write(outdir.join("results.csv"), &bytes)?);
    }
    if formats.contains(&ReportFormat::Json) {
        let mut text = serde_json::to_string_pretty(records)?;
        text.push('\n');
        files.push(write(outdir.join("results.json"), text.as_bytes())?);
    }
    if formats.contains(&ReportFormat::Svg) {
        let mut slacks: Vec<&Vec<f64>> = Vec::new();
        for r in records {
            if !slacks.iter().any(|s| same_slack(s, &r.slack)) {
                slacks.push(&r.slack);
            }
        }
        for (i, name) in objectives.iter().enumerate() {
            for slack in &slacks {
                let svg = chart(records, i, name, slack);
                let file = format!(
                    "o{}_{}_slack_{}.svg",
                    i + 1,
                    sanitize(name),
                    slack.iter().map(|&d| format_value(d)).collect::<Vec<_>>().join("-")
                );
                files.push(write(outdir.join(file), svg.as_bytes())?);
            }
        }
    }
    Ok(files)
}

fn same_slack(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
}

fn sanitize(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    }
}

const PALETTE: [&str; 5] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#7f7f7f"];
const W: f64 = 640.0;
const H: f64 = 400.0;
const PAD: f64 = 60.0;

/// Line chart of the median value over seeds against `k`, one series per
/// algorithm. Failed cells and infinite values are left out.
fn chart(records: &[RunRecord], obj: usize, name: &str, slack: &[f64]) -> String {
    let mut series: Vec<(Algorithm, BTreeMap<usize, Vec<f64>>)> = Vec::new();
    for r in records.iter().filter(|r| same_slack(&r.slack, slack)) {
        let pos = match series.iter().position(|s| s.0 == r.algorithm) {
            Some(p) => p,
            None => {
                series.push((r.algorithm, BTreeMap::new()));
                series.len() - 1
            }
        };
        let slot = series[pos].1.entry(r.k).or_default();
        if let Some(&v) = r.values.get(obj).filter(|v| v.is_finite()) {
            slot.push(v);
        }
    }
    let lines: Vec<(Algorithm, Vec<(usize, f64)>)> = series
        .into_iter()
        .map(|(a, pts)| {
            let pts = pts
                .into_iter()
                .filter(|(_, v)| !v.is_empty())
                .map(|(k, v)| (k, median(v)))
                .collect();
            (a, pts)
        })
        .collect();
    let ks: Vec<usize> = records.iter().map(|r| r.k).collect();
    let (mut x0, mut x1) = (
        *ks.iter().min().unwrap_or(&0) as f64,
        *ks.iter().max().unwrap_or(&1) as f64,
    );
    if x1 <= x0 {
        x0 -= 1.0;
        x1 += 1.0;
    }
    let ys = lines.iter().flat_map(|l| l.1.iter().map(|p| p.1));
    let (mut y0, mut y1) = (
        ys.clone().fold(f64::INFINITY, f64::min),
        ys.fold(f64::NEG_INFINITY, f64::max),
    );
    if !y0.is_finite() {
        (y0, y1) = (0.0, 1.0);
    }
    if y1 <= y0 {
        let d = if y0 == 0.0 { 1.0 } else { y0.abs() * 0.1 };
        y0 -= d;
        y1 += d;
    }
    let px = |k: f64| PAD + (k - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let py = |v: f64| H - PAD - (v - y0) / (y1 - y0) * (H - 2.0 * PAD);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{} (slack {})</text>"#,
        W / 2.0,
        escape(name),
        slack.iter().map(|&d| format_value(d)).collect::<Vec<_>>().join(", ")
    );
    let _ = writeln!(
        s,
        r#"<line x1="{PAD}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/><line x1="{PAD}" y1="{PAD}" x2="{PAD}" y2="{b}" stroke="black"/>"#,
        b = H - PAD,
        r = W - PAD
    );
    let mut kticks = ks.clone();
    kticks.sort_unstable();
    kticks.dedup();
    for k in kticks {
        let x = px(k as f64);
        let _ = writeln!(
            s,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{k}</text>"#,
            H - PAD + 18.0
        );
    }
    for t in 0..=4 {
        let v = y0 + (y1 - y0) * t as f64 / 4.0;
        let y = py(v);
        let _ = writeln!(
            s,
            r##"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text><line x1="{PAD}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd"/>"##,
            PAD - 6.0,
            y + 4.0,
            tick_label(v),
            W - PAD
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">k</text>"#,
        W / 2.0,
        H - 16.0
    );
    for (idx, (alg, pts)) in lines.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let path: Vec<String> = pts
            .iter()
            .map(|&(k, v)| format!("{:.2},{:.2}", px(k as f64), py(v)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            path.join(" ")
        );
        for &(k, v) in pts {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                px(k as f64),
                py(v)
            );
        }
        let ly = PAD + 16.0 * idx as f64;
        let _ = writeln!(
            s,
            r#"<rect x="{:.2}" y="{:.2}" width="10" height="10" fill="{color}"/><text x="{:.2}" y="{:.2}">{alg}</text>"#,
            W - PAD + 6.0,
            ly - 9.0,
            W - PAD + 20.0,
            ly
        );
    }
    s.push_str("</svg>\n");
    s
}

fn tick_label(v: f64) -> String {
    let t = format!("{v:.3}");
    let t = t.trim_end_matches('0').trim_end_matches('.');
    if t == "-0" {
        "0".into()
    } else {
        t.into()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_round_trip_as_text() {
        for v in [0.1 + 0.2, 1.0 / 3.0, 8.0, f64::INFINITY, 1e-300, 2.5e17] {
            assert_eq!(parse_value(&format_value(v)).unwrap().to_bits(), v.to_bits());
        }
        assert_eq!(format_value(f64::INFINITY), "inf");
    }

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(vec![4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn tick_labels_are_short() {
        assert_eq!(tick_label(0.5), "0.5");
        assert_eq!(tick_label(2.0), "2");
        assert_eq!(tick_label(-0.0001), "0");
    }
}
