//! Time-series and keyword reports, plus a minimal SVG line chart.

use std::fmt::Write as _;

use chrono::{Datelike, Months, NaiveDate, NaiveDateTime, TimeDelta};

use crate::features::FeatureSet;
use crate::stance::Stance;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Granularity {
    Month,
    Day,
}

impl std::str::FromStr for Granularity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "month" => Ok(Granularity::Month),
            "day" => Ok(Granularity::Day),
            other => Err(format!(
                "unknown granularity `{other}` (expected month or day)"
            )),
        }
    }
}

impl Granularity {
    fn floor(self, ts: &NaiveDateTime) -> NaiveDate {
        let d = ts.date();
        match self {
            Granularity::Month => d.with_day(1).expect("day 1 exists"),
            Granularity::Day => d,
        }
    }

    fn next(self, d: NaiveDate) -> NaiveDate {
        match self {
            Granularity::Month => d + Months::new(1),
            Granularity::Day => d + TimeDelta::days(1),
        }
    }

    fn label(self, d: NaiveDate) -> String {
        match self {
            Granularity::Month => d.format("%Y-%m").to_string(),
            Granularity::Day => d.format("%Y-%m-%d").to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimeBucket {
    /// `YYYY-MM` or `YYYY-MM-DD`.
    pub period: String,
    pub count_support: usize,
    pub count_oppose: usize,
}

/// Counts predictions per calendar period, chronologically, including
/// empty periods between the first and last observation.
pub fn timeseries(items: &[(NaiveDateTime, Stance)], granularity: Granularity) -> Vec<TimeBucket> {
    let Some(first) = items.iter().map(|(t, _)| granularity.floor(t)).min() else {
        return Vec::new();
    };
    let last = items
        .iter()
        .map(|(t, _)| granularity.floor(t))
        .max()
        .expect("non-empty");
    let mut periods = Vec::new();
    let mut d = first;
    while d <= last {
        periods.push(d);
        d = granularity.next(d);
    }
    let mut buckets: Vec<TimeBucket> = periods
        .iter()
        .map(|&d| TimeBucket {
            period: granularity.label(d),
            count_support: 0,
            count_oppose: 0,
        })
        .collect();
    for (t, s) in items {
        let idx = periods
            .binary_search(&granularity.floor(t))
            .expect("period lies within the observed range");
        match s {
            Stance::Supporting => buckets[idx].count_support += 1,
            Stance::Opposing => buckets[idx].count_oppose += 1,
        }
    }
    buckets
}

fn log10_cell(count: usize) -> String {
    if count == 0 {
        String::new()
    } else {
        format!("{:.4}", (count as f64).log10())
    }
}

/// `period,count_support,count_oppose,log10_support,log10_oppose`; the log
/// of a zero count is an empty cell.
pub fn timeseries_csv(buckets: &[TimeBucket]) -> String {
    let mut out = String::from("period,count_support,count_oppose,log10_support,log10_oppose\n");
    for b in buckets {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            b.period,
            b.count_support,
            b.count_oppose,
            log10_cell(b.count_support),
            log10_cell(b.count_oppose)
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct KeywordReport {
    pub support: Vec<(String, f64)>,
    pub oppose: Vec<(String, f64)>,
}

/// Splits the ranked features by class association and keeps the top
/// `top_n` of each, highest chi-square first.
pub fn keyword_report(fs: &FeatureSet, top_n: usize) -> KeywordReport {
    let take = |stance: Stance| -> Vec<(String, f64)> {
        fs.entries()
            .iter()
            .filter(|e| e.direction == stance)
            .take(top_n)
            .map(|e| (e.term.clone(), e.score))
            .collect()
    };
    KeywordReport {
        support: take(Stance::Supporting),
        oppose: take(Stance::Opposing),
    }
}

/// `class,rank,term,chi2` rows, Supporting first.
pub fn keywords_csv(report: &KeywordReport) -> String {
    let mut out = String::from("class,rank,term,chi2\n");
    for (stance, list) in [
        (Stance::Supporting, &report.support),
        (Stance::Opposing, &report.oppose),
    ] {
        for (rank, (term, score)) in list.iter().enumerate() {
            let _ = writeln!(out, "{stance},{},{term},{score:.6}", rank + 1);
        }
    }
    out
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 420.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 150.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 60.0;
const COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
];
const MAX_X_TICKS: usize = 12;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// A line chart with one polyline per series over shared x labels.
/// Output is a standalone SVG document and depends only on the inputs.
pub fn line_chart(title: &str, x_labels: &[String], series: &[(&str, Vec<f64>)]) -> String {
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let values = series
        .iter()
        .flat_map(|(_, v)| v.iter().copied())
        .filter(|v| v.is_finite());
    let (mut lo, mut hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if !lo.is_finite() {
        (lo, hi) = (0.0, 1.0);
    } else if hi - lo < 1e-12 {
        lo -= 0.5;
        hi += 0.5;
    }
    let n = x_labels.len();
    let x_at = |i: usize| {
        if n <= 1 {
            MARGIN_LEFT + plot_w / 2.0
        } else {
            MARGIN_LEFT + plot_w * i as f64 / (n - 1) as f64
        }
    };
    let y_at = |v: f64| MARGIN_TOP + plot_h * (hi - v) / (hi - lo);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        escape(title)
    );
    let (x0, x1, y0, y1) = (
        MARGIN_LEFT,
        MARGIN_LEFT + plot_w,
        MARGIN_TOP,
        MARGIN_TOP + plot_h,
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{x0:.2}" y1="{y1:.2}" x2="{x1:.2}" y2="{y1:.2}" stroke="black"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{x0:.2}" y1="{y0:.2}" x2="{x0:.2}" y2="{y1:.2}" stroke="black"/>"#
    );
    for k in 0..=4 {
        let v = lo + (hi - lo) * k as f64 / 4.0;
        let y = y_at(v);
        let _ = writeln!(
            svg,
            r##"<line x1="{:.2}" y1="{y:.2}" x2="{x1:.2}" y2="{y:.2}" stroke="#dddddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
            x0,
            x0 - 6.0,
            y + 4.0,
            format_tick(v)
        );
    }
    let step = n.div_ceil(MAX_X_TICKS).max(1);
    for (i, label) in x_labels.iter().enumerate() {
        if i % step == 0 || i + 1 == n {
            let x = x_at(i);
            let _ = writeln!(
                svg,
                r#"<text x="{x:.2}" y="{:.2}" text-anchor="end" transform="rotate(-40 {x:.2} {:.2})">{}</text>"#,
                y1 + 16.0,
                y1 + 16.0,
                escape(label)
            );
        }
    }
    for (s, (name, vals)) in series.iter().enumerate() {
        let color = COLORS[s % COLORS.len()];
        let points: Vec<String> = vals
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_finite())
            .map(|(i, &v)| format!("{:.2},{:.2}", x_at(i), y_at(v)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            points.join(" ")
        );
        let ly = MARGIN_TOP + 18.0 * s as f64;
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            x1 + 15.0,
            x1 + 40.0,
            x1 + 46.0,
            ly + 4.0,
            escape(name)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn format_tick(v: f64) -> String {
    if v.abs() >= 100.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}
