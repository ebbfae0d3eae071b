//! CSV and SVG emission for sweep results. The CSV is the source of truth;
//! both outputs are byte-deterministic (no timestamps, shortest round-trip
//! float formatting).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "family,m,n,d,eps,s,trials,failures,delta_hat,ci_low,ci_high,seed";

/// One (family, m) measurement of a sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRecord {
    pub family: String,
    pub m: usize,
    pub n: usize,
    pub d: usize,
    pub eps: f64,
    pub s: usize,
    pub trials: u64,
    pub failures: u64,
    pub delta_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
}

pub fn records_to_csv(records: &[SweepRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.family,
            r.m,
            r.n,
            r.d,
            r.eps,
            r.s,
            r.trials,
            r.failures,
            r.delta_hat,
            r.ci_low,
            r.ci_high,
            r.seed
        );
    }
    out
}

pub fn records_from_csv(text: &str) -> Result<Vec<SweepRecord>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        other => return Err(Error::Parse(format!("bad CSV header: {other:?}"))),
    }
    let mut records = Vec::new();
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 12 {
            return Err(Error::Parse(format!("bad CSV row: {line:?}")));
        }
        fn field<T: std::str::FromStr>(s: &str, what: &str) -> Result<T> {
            s.parse()
                .map_err(|_| Error::Parse(format!("bad {what}: {s:?}")))
        }
        records.push(SweepRecord {
            family: f[0].to_string(),
            m: field(f[1], "m")?,
            n: field(f[2], "n")?,
            d: field(f[3], "d")?,
            eps: field(f[4], "eps")?,
            s: field(f[5], "s")?,
            trials: field(f[6], "trials")?,
            failures: field(f[7], "failures")?,
            delta_hat: field(f[8], "delta_hat")?,
            ci_low: field(f[9], "ci_low")?,
            ci_high: field(f[10], "ci_high")?,
            seed: field(f[11], "seed")?,
        });
    }
    Ok(records)
}

const SVG_W: f64 = 640.0;
const SVG_H: f64 = 420.0;
const MARGIN: f64 = 56.0;
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

/// Line chart of delta_hat against log2(m), one polyline per family.
pub fn records_to_svg(records: &[SweepRecord]) -> String {
    let mut families: Vec<String> = Vec::new();
    for r in records {
        if !families.contains(&r.family) {
            families.push(r.family.clone());
        }
    }
    let log2 = |m: usize| (m.max(1) as f64).log2();
    let (mut x_lo, mut x_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for r in records {
        x_lo = x_lo.min(log2(r.m));
        x_hi = x_hi.max(log2(r.m));
    }
    if !x_lo.is_finite() || x_hi <= x_lo {
        x_lo = 0.0;
        x_hi = 1.0;
    }
    let x_of = |m: usize| MARGIN + (log2(m) - x_lo) / (x_hi - x_lo) * (SVG_W - 2.0 * MARGIN);
    let y_of = |v: f64| SVG_H - MARGIN - v.clamp(0.0, 1.0) * (SVG_H - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {SVG_W} {SVG_H}\">"
    );
    let _ = writeln!(s, "<rect width=\"{SVG_W}\" height=\"{SVG_H}\" fill=\"white\"/>");
    let _ = writeln!(
        s,
        "<line x1=\"{MARGIN}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>",
        SVG_H - MARGIN,
        SVG_W - MARGIN,
        SVG_H - MARGIN
    );
    let _ = writeln!(
        s,
        "<line x1=\"{MARGIN}\" y1=\"{MARGIN}\" x2=\"{MARGIN}\" y2=\"{}\" stroke=\"black\"/>",
        SVG_H - MARGIN
    );
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">log2(m)</text>",
        SVG_W / 2.0,
        SVG_H - MARGIN / 3.0
    );
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">delta_hat</text>",
        16.0,
        SVG_H / 2.0,
        SVG_H / 2.0
    );
    for tick in 0..=4 {
        let v = tick as f64 / 4.0;
        let y = y_of(v);
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" font-size=\"10\" text-anchor=\"end\">{v}</text>",
            MARGIN - 6.0,
            y + 3.0
        );
        let _ = writeln!(
            s,
            "<line x1=\"{}\" y1=\"{y}\" x2=\"{MARGIN}\" y2=\"{y}\" stroke=\"black\"/>",
            MARGIN - 4.0
        );
    }
    for (fi, fam) in families.iter().enumerate() {
        let color = PALETTE[fi % PALETTE.len()];
        let pts: Vec<String> = records
            .iter()
            .filter(|r| &r.family == fam)
            .map(|r| format!("{},{}", x_of(r.m), y_of(r.delta_hat)))
            .collect();
        let _ = writeln!(
            s,
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>",
            pts.join(" ")
        );
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" font-size=\"11\" fill=\"{color}\">{fam}</text>",
            SVG_W - MARGIN - 140.0,
            MARGIN + 14.0 * (fi as f64 + 1.0)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Writes `sweep.csv` and `sweep.svg` under `out_dir`.
pub fn emit_report(records: &[SweepRecord], out_dir: &Path) -> Result<(PathBuf, PathBuf)> {
    if records.is_empty() {
        return Err(Error::InvalidParameter("no records to report".into()));
    }
    std::fs::create_dir_all(out_dir)?;
    let csv_path = out_dir.join("sweep.csv");
    let svg_path = out_dir.join("sweep.svg");
    std::fs::write(&csv_path, records_to_csv(records))?;
    std::fs::write(&svg_path, records_to_svg(records))?;
    Ok((csv_path, svg_path))
}
