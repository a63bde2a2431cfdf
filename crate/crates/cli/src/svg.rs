// SPDX-License-Identifier: MIT OR Apache-2.0

//! Segmentation plot: minute counts, smoothed curve, threshold and shaded
//! activity/rest bands over the cleaned time axis.

use std::fmt::Write;

use actiscope::segmentation::{SegmentKind, Segmentation};

const WIDTH: f64 = 1200.0;
const HEIGHT: f64 = 320.0;
const LEFT: f64 = 50.0;
const RIGHT: f64 = 10.0;
const TOP: f64 = 24.0;
const BOTTOM: f64 = 30.0;
/// Counts and smoothed curve are reduced to at most this many points.
const MAX_POINTS: usize = 1200;

struct Frame {
    n: usize,
    y_max: f64,
}

impl Frame {
    fn x(&self, i: f64) -> f64 {
        LEFT + i / self.n.max(1) as f64 * (WIDTH - LEFT - RIGHT)
    }

    fn y(&self, v: f64) -> f64 {
        let h = HEIGHT - TOP - BOTTOM;
        TOP + h - (v / self.y_max).clamp(0.0, 1.0) * h
    }
}

/// `(bucket centre, reduced value)` pairs.
fn reduce(values: &[f64], pick: impl Fn(&[f64]) -> f64) -> Vec<(f64, f64)> {
    let step = values.len().div_ceil(MAX_POINTS).max(1);
    values
        .chunks(step)
        .enumerate()
        .map(|(b, chunk)| ((b * step) as f64 + chunk.len() as f64 / 2.0, pick(chunk)))
        .collect()
}

fn polyline(out: &mut String, class: &str, frame: &Frame, pts: &[(f64, f64)]) {
    let mut coords = String::new();
    for (i, &(x, v)) in pts.iter().enumerate() {
        if i > 0 {
            coords.push(' ');
        }
        let _ = write!(coords, "{:.1},{:.1}", frame.x(x), frame.y(v));
    }
    let _ = writeln!(out, r#"<polyline class="{class}" points="{coords}"/>"#);
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

pub fn render(sg: &Segmentation) -> String {
    let values = &sg.cleaned.values;
    let y_max = values.iter().chain(&sg.smoothed).fold(0.0f64, |a, &b| a.max(b));
    let frame = Frame {
        n: values.len(),
        y_max: if y_max > 0.0 { y_max } else { 1.0 },
    };
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    out.push_str(
        "<style>\
         .band.activity{fill:#f4a259;fill-opacity:0.25}\
         .band.rest{fill:#5b8e7d;fill-opacity:0.25}\
         .counts{fill:none;stroke:#555;stroke-width:0.6}\
         .smoothed{fill:none;stroke:#1d3557;stroke-width:1.6}\
         .threshold{stroke:#c1121f;stroke-width:1.2;stroke-dasharray:6 4}\
         .axis{stroke:#000;stroke-width:1}\
         text{font-family:sans-serif;font-size:11px}\
         </style>\n",
    );
    let _ = writeln!(
        out,
        r#"<text x="{LEFT}" y="16">{} ({} segments, threshold {:.2})</text>"#,
        escape(&sg.participant_id),
        sg.segments.len(),
        sg.threshold
    );
    let (top, bottom) = (frame.y(frame.y_max), frame.y(0.0));
    out.push_str("<g class=\"bands\">\n");
    for seg in &sg.segments {
        let kind = match seg.kind {
            SegmentKind::Activity => "activity",
            SegmentKind::Rest => "rest",
        };
        let (x0, x1) = (frame.x(seg.start as f64), frame.x(seg.end as f64));
        let (a, b) = sg.original_span(seg);
        let _ = writeln!(
            out,
            r#"<rect class="band {kind}" x="{x0:.1}" y="{top:.1}" width="{:.1}" height="{:.1}" data-start="{a}" data-end="{b}"/>"#,
            x1 - x0,
            bottom - top
        );
    }
    out.push_str("</g>\n");
    polyline(
        &mut out,
        "counts",
        &frame,
        &reduce(values, |c| c.iter().fold(0.0f64, |a, &b| a.max(b))),
    );
    polyline(
        &mut out,
        "smoothed",
        &frame,
        &reduce(&sg.smoothed, |c| c.iter().sum::<f64>() / c.len() as f64),
    );
    let ty = frame.y(sg.threshold);
    let _ = writeln!(
        out,
        r#"<line class="threshold" x1="{LEFT}" y1="{ty:.1}" x2="{:.1}" y2="{ty:.1}"/>"#,
        WIDTH - RIGHT
    );
    let _ = writeln!(
        out,
        r#"<line class="axis" x1="{LEFT}" y1="{bottom:.1}" x2="{:.1}" y2="{bottom:.1}"/>"#,
        WIDTH - RIGHT
    );
    let _ = writeln!(out, r#"<line class="axis" x1="{LEFT}" y1="{top:.1}" x2="{LEFT}" y2="{bottom:.1}"/>"#);
    let _ = writeln!(out, r#"<text x="4" y="{:.1}">{:.0}</text>"#, top + 4.0, frame.y_max);
    let _ = writeln!(out, r#"<text x="4" y="{bottom:.1}">0</text>"#);
    for day in 0..=frame.n / 1440 {
        let x = frame.x((day * 1440) as f64);
        let _ = writeln!(out, r#"<text x="{x:.1}" y="{:.1}">{}h</text>"#, bottom + 14.0, day * 24);
    }
    out.push_str("</svg>\n");
    out
}
