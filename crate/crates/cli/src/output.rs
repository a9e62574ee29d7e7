//! Report writers. Every JSON report starts with `schema_version`; every CSV with a
//! `# schema_version=1` comment line.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use marclab::noncompactness::TraceRow;
use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema_version: u32,
    command: &'a str,
    #[serde(flatten)]
    body: &'a T,
}

/// Where the main report goes.
pub struct Sink {
    path: Option<PathBuf>,
}

impl Sink {
    pub fn new(path: Option<PathBuf>) -> Self {
        Sink { path }
    }

    pub fn write_bytes(&self, bytes: &[u8]) -> Result<()> {
        match &self.path {
            Some(p) => write_file(p, bytes),
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(bytes).context("writing to stdout")?;
                out.flush().context("writing to stdout")
            }
        }
    }

    pub fn json<T: Serialize>(&self, command: &str, body: &T) -> Result<()> {
        let env = Envelope {
            schema_version: SCHEMA_VERSION,
            command,
            body,
        };
        let mut text = serde_json::to_string_pretty(&env)?;
        text.push('\n');
        self.write_bytes(text.as_bytes())
    }
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

/// CSV text with the schema comment line and the given header.
pub fn csv_text<I, R>(header: &[&str], rows: I) -> Result<String>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    let body = String::from_utf8(w.into_inner().context("flushing CSV")?)?;
    Ok(format!("# schema_version={SCHEMA_VERSION}\n{body}"))
}

/// One `label,quantity,value` line per traced number.
pub fn trace_csv(trace: &[TraceRow]) -> Result<String> {
    let rows = trace.iter().flat_map(|row| {
        row.values
            .iter()
            .map(move |(k, v)| vec![row.label.clone(), k.clone(), format_float(*v)])
    });
    csv_text(&["label", "quantity", "value"], rows)
}

/// Round-trip formatting, with `inf`/`-inf`/`nan` spelled out.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:?}")
    }
}

/// A bare polyline of `(x, y)` scaled into a 240x60 box.
pub fn sparkline_svg(points: &[(f64, f64)]) -> String {
    const W: f64 = 240.0;
    const H: f64 = 60.0;
    let finite: Vec<(f64, f64)> = points.iter().copied().filter(|(x, y)| x.is_finite() && y.is_finite()).collect();
    let (x0, x1) = bounds(finite.iter().map(|p| p.0));
    let (y0, y1) = bounds(finite.iter().map(|p| p.1));
    let coords: Vec<String> = finite
        .iter()
        .map(|(x, y)| {
            let px = (x - x0) / (x1 - x0) * W;
            let py = H - (y - y0) / (y1 - y0) * H;
            format!("{px:.2},{py:.2}")
        })
        .collect();
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"-2 -2 {} {}\">\n\
         <polyline fill=\"none\" stroke=\"black\" stroke-width=\"1.5\" points=\"{}\"/>\n</svg>\n",
        W + 4.0,
        H + 4.0,
        coords.join(" ")
    )
}

fn bounds(xs: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, lo + 0.5)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_schema_line_and_header() {
        let text = csv_text(&["a", "b"], vec![vec!["1".to_string(), "2".to_string()]]).unwrap();
        assert_eq!(text, "# schema_version=1\na,b\n1,2\n");
    }

    #[test]
    fn floats_round_trip() {
        assert_eq!(format_float(0.1), "0.1");
        assert_eq!(format_float(f64::INFINITY), "inf");
        assert_eq!(format_float(2.0), "2.0");
    }

    #[test]
    fn sparkline_handles_flat_and_empty_series() {
        assert!(sparkline_svg(&[]).contains("points=\"\""));
        let s = sparkline_svg(&[(1.0, 2.0), (2.0, 2.0)]);
        assert!(s.contains("0.00,30.00 240.00,30.00"));
    }
}
