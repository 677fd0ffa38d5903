//! Sweep tables, the sweep chart and structured run reports.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::bounds::{Sweep, SweepRow};
use crate::error::Result;
use crate::rng::GENERATOR;
use crate::sim::HASH_ALGORITHM;

pub const SWEEP_COLUMNS: [&str; 8] = [
    "d",
    "rif_lower",
    "rif_upper",
    "dif_lower",
    "dif_upper",
    "ts_lower",
    "ts_upper",
    "feasible",
];

/// `v` with nine significant digits in positional notation.
pub fn sig9(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let mag = v.abs().log10().floor() as i32;
    if !(-5..=9).contains(&mag) {
        return format!("{v:.8e}");
    }
    let decimals = (8 - mag).max(0) as usize;
    let s = format!("{v:.decimals$}");
    let s = if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    };
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

fn record(r: &SweepRow) -> [String; 8] {
    [
        sig9(r.d),
        sig9(r.rif_lower),
        sig9(r.rif_upper),
        sig9(r.dif_lower),
        sig9(r.dif_upper),
        sig9(r.ts_lower),
        sig9(r.ts_upper),
        r.feasible.to_string(),
    ]
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(SWEEP_COLUMNS)?;
    for r in rows {
        w.write_record(record(r))?;
    }
    w.flush()?;
    Ok(())
}

pub fn sweep_csv_string(rows: &[SweepRow]) -> Result<String> {
    let mut buf = Vec::new();
    write_sweep_csv(rows, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is ASCII"))
}

pub fn save_sweep_csv(rows: &[SweepRow], path: &Path) -> Result<()> {
    std::fs::write(path, sweep_csv_string(rows)?)?;
    Ok(())
}

/// Reads back a table written by [`write_sweep_csv`].
pub fn read_sweep_csv(text: &str) -> Result<Vec<SweepRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let f = |k: usize| -> Result<f64> {
            rec[k].parse().map_err(|_| crate::Error::Parse {
                line: rows.len() + 2,
                message: format!("column `{}` is not a number", SWEEP_COLUMNS[k]),
            })
        };
        rows.push(SweepRow {
            d: f(0)?,
            rif_lower: f(1)?,
            rif_upper: f(2)?,
            dif_lower: f(3)?,
            dif_upper: f(4)?,
            ts_lower: f(5)?,
            ts_upper: f(6)?,
            feasible: &rec[7] == "true",
            possibly_suboptimal: false,
        });
    }
    Ok(rows)
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;

/// Line chart of the six curves against the distortion budget.
pub fn sweep_svg(sweep: &Sweep, title: &str) -> String {
    let rows = &sweep.rows;
    let series: [(&str, &str, &str, fn(&SweepRow) -> f64); 6] = [
        ("rif lower", "#1f77b4", "", |r| r.rif_lower),
        ("rif upper", "#1f77b4", "6 4", |r| r.rif_upper),
        ("dif lower", "#d62728", "", |r| r.dif_lower),
        ("dif upper", "#d62728", "6 4", |r| r.dif_upper),
        ("ts lower", "#7f7f7f", "2 3", |r| r.ts_lower),
        ("ts upper", "#7f7f7f", "8 3 2 3", |r| r.ts_upper),
    ];
    let (x0, x1) = rows
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), r| (a.min(r.d), b.max(r.d)));
    let (x0, x1) = if x1 > x0 { (x0, x1) } else { (x0 - 0.5, x0 + 0.5) };
    let y1 = rows
        .iter()
        .flat_map(|r| series.iter().map(move |s| (s.3)(r)))
        .filter(|v| v.is_finite())
        .fold(0.0f64, f64::max);
    let y1 = if y1 > 0.0 { y1 * 1.05 } else { 1.0 };
    let px = |d: f64| MARGIN + (d - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let py = |v: f64| HEIGHT - MARGIN - v / y1 * (HEIGHT - 2.0 * MARGIN);
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    );
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s += &format!(
        "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">{}</text>\n",
        WIDTH / 2.0,
        escape(title)
    );
    s += &format!(
        "<line x1=\"{m}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n<line x1=\"{m}\" y1=\"{m}\" x2=\"{m}\" y2=\"{b}\" stroke=\"black\"/>\n",
        m = MARGIN,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN
    );
    for k in 0..=5 {
        let d = x0 + (x1 - x0) * k as f64 / 5.0;
        let v = y1 * k as f64 / 5.0;
        s += &format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
            px(d),
            HEIGHT - MARGIN + 16.0,
            sig3(d)
        );
        s += &format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
            MARGIN - 6.0,
            py(v) + 4.0,
            sig3(v)
        );
    }
    s += &format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">distortion budget D</text>\n",
        WIDTH / 2.0,
        HEIGHT - 18.0
    );
    s += &format!(
        "<text x=\"18\" y=\"{y}\" transform=\"rotate(-90 18 {y})\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">rate (bits per channel use)</text>\n",
        y = HEIGHT / 2.0
    );
    for (i, (label, color, dash, f)) in series.iter().enumerate() {
        let pts: Vec<String> = rows
            .iter()
            .filter(|r| f(r).is_finite())
            .map(|r| format!("{:.2},{:.2}", px(r.d), py(f(r))))
            .collect();
        let dash = if dash.is_empty() {
            String::new()
        } else {
            format!(" stroke-dasharray=\"{dash}\"")
        };
        s += &format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.6\"{dash} points=\"{}\"/>\n",
            pts.join(" ")
        );
        let ly = MARGIN + 14.0 + 16.0 * i as f64;
        let lx = WIDTH - MARGIN - 120.0;
        s += &format!(
            "<line x1=\"{lx}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{color}\" stroke-width=\"1.6\"{dash}/>\n",
            lx + 24.0
        );
        s += &format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\">{label}</text>\n",
            lx + 30.0,
            ly + 4.0
        );
    }
    s += "</svg>\n";
    s
}

fn sig3(v: f64) -> String {
    let s = format!("{v:.3}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Envelope for every structured report: the resolved configuration, the
/// seed, the generator and hash names, and the payload.
#[derive(Debug, Clone, Serialize)]
pub struct Report<'a, C: Serialize, P: Serialize> {
    pub command: &'a str,
    pub version: &'a str,
    pub seed: u64,
    pub generator: &'a str,
    pub hash_algorithm: &'a str,
    pub config: &'a C,
    pub result: &'a P,
}

impl<'a, C: Serialize, P: Serialize> Report<'a, C, P> {
    pub fn new(command: &'a str, seed: u64, config: &'a C, result: &'a P) -> Self {
        Self {
            command,
            version: env!("CARGO_PKG_VERSION"),
            seed,
            generator: GENERATOR,
            hash_algorithm: HASH_ALGORITHM,
            config,
            result,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(sig9(0.0), "0");
        assert_eq!(sig9(0.5), "0.5");
        assert_eq!(sig9(1.0 / 3.0), "0.333333333");
        assert_eq!(sig9(12.3456789012), "12.3456789");
        assert_eq!(sig9(-0.000123456789123), "-0.000123456789");
        assert_eq!(sig9(1e-12), "1.00000000e-12");
    }

    #[test]
    fn csv_round_trip() {
        let rows = vec![SweepRow {
            d: 0.1,
            rif_lower: 0.25,
            rif_upper: 0.5,
            dif_lower: 0.125,
            dif_upper: 0.5,
            ts_lower: 0.2,
            ts_upper: 0.4,
            feasible: true,
            possibly_suboptimal: false,
        }];
        let text = sweep_csv_string(&rows).unwrap();
        assert_eq!(text.lines().next().unwrap(), SWEEP_COLUMNS.join(","));
        assert!(!text.contains('\r'));
        assert_eq!(read_sweep_csv(&text).unwrap(), rows);
    }
}
