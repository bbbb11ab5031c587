//! CSV tables and SVG drawings of orbits and portraits.
//!
//! CSV files are UTF-8, LF-terminated, with a fixed header. Floats carry 17
//! significant digits so a row reproduces its state bit for bit. Metadata
//! (seed, field, termination) goes in trailing `#` comment lines.

use std::fmt::Write as _;
use std::io::{self, Write};

use crate::analysis::{OrbitTrace, Portrait};
use crate::geometry::{arc_to_point, Rotation, Vec2};

pub const ORBIT_HEADER: &str = "n,s_exit,theta_exit,x_exit,y_exit,side_exit,s_entry,theta_entry,x_entry,y_entry,side_entry,corners_turned,sweep,chord_length";
pub const PORTRAIT_HEADER: &str = "orbit_id,n,s,u";

/// 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_orbit_csv<W: Write>(mut w: W, trace: &OrbitTrace, seed: u64) -> io::Result<()> {
    writeln!(w, "{ORBIT_HEADER}")?;
    for r in &trace.records {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.n,
            fmt_f64(r.exit.s),
            fmt_f64(r.exit.theta),
            fmt_f64(r.exit_point.x),
            fmt_f64(r.exit_point.y),
            r.exit_side,
            fmt_f64(r.entry.s),
            fmt_f64(r.entry.theta),
            fmt_f64(r.entry_point.x),
            fmt_f64(r.entry_point.y),
            r.entry_side,
            r.corners_turned,
            fmt_f64(r.arc.sweep),
            fmt_f64(r.chord_length),
        )?;
    }
    writeln!(
        w,
        "# seed={seed} field={} radius={} s0={} theta0={}",
        fmt_f64(trace.cfg.field()),
        fmt_f64(trace.cfg.radius()),
        fmt_f64(trace.initial.s),
        fmt_f64(trace.initial.theta),
    )?;
    writeln!(w, "# termination: {}", trace.termination)?;
    Ok(())
}

pub fn write_portrait_csv<W: Write>(mut w: W, portrait: &Portrait, seed: u64) -> io::Result<()> {
    writeln!(w, "{PORTRAIT_HEADER}")?;
    for p in &portrait.points {
        writeln!(w, "{},{},{},{}", p.orbit_id, p.n, fmt_f64(p.s), fmt_f64(p.u))?;
    }
    writeln!(w, "# seed={seed} orbits={}", portrait.terminations.len())?;
    for (id, t) in portrait.terminations.iter().enumerate() {
        if !t.is_completed() {
            writeln!(w, "# orbit {id} truncated: {t}")?;
        }
    }
    Ok(())
}

const ORBIT_PX: f64 = 600.0;

/// Trajectory drawing in square coordinates with the y axis pointing up.
///
/// Arc paths are written in the unflipped square frame and flipped by the
/// enclosing group, so an `A` command with sweep flag 1 is counterclockwise
/// in the square's own coordinates.
pub fn orbit_svg(trace: &OrbitTrace, seed: u64) -> String {
    // Bounding box of the square and every full circle touched.
    let (mut lo, mut hi) = (Vec2::new(0.0, 0.0), Vec2::new(1.0, 1.0));
    for r in &trace.records {
        let c = r.arc.center;
        let rad = r.arc.radius;
        lo = Vec2::new(lo.x.min(c.x - rad), lo.y.min(c.y - rad));
        hi = Vec2::new(hi.x.max(c.x + rad), hi.y.max(c.y + rad));
    }
    let pad = 0.05 * (hi.x - lo.x).max(hi.y - lo.y);
    let (lo, hi) = (Vec2::new(lo.x - pad, lo.y - pad), Vec2::new(hi.x + pad, hi.y + pad));
    let scale = ORBIT_PX / (hi.x - lo.x).max(hi.y - lo.y);
    let width = (hi.x - lo.x) * scale;
    let height = (hi.y - lo.y) * scale;
    let stroke = 1.5 / scale;
    let dot = 2.5 / scale;

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width:.3}" height="{height:.3}" viewBox="0 0 {width:.3} {height:.3}">"#
    );
    let _ = writeln!(
        svg,
        "<!-- seed={seed} radius={} s0={} theta0={} steps={} termination: {} -->",
        trace.cfg.radius(),
        trace.initial.s,
        trace.initial.theta,
        trace.records.len(),
        trace.termination
    );
    let _ = writeln!(
        svg,
        r#"<g transform="matrix({scale} 0 0 {neg} {tx} {ty})" fill="none" stroke-width="{stroke}">"#,
        neg = -scale,
        tx = -lo.x * scale,
        ty = hi.y * scale,
    );
    let _ = writeln!(
        svg,
        r##"<path id="square" d="M 0 0 L 1 0 L 1 1 L 0 1 Z" stroke="#000000"/>"##
    );

    let mut start = arc_to_point(trace.initial.s).0;
    for r in &trace.records {
        let _ = writeln!(
            svg,
            r##"<line class="chord" x1="{:.9}" y1="{:.9}" x2="{:.9}" y2="{:.9}" stroke="#1f77b4"/>"##,
            start.x, start.y, r.exit_point.x, r.exit_point.y
        );
        let large = u8::from(r.arc.sweep > std::f64::consts::PI);
        let sweep_flag = u8::from(r.arc.rotation == Rotation::Ccw);
        let _ = writeln!(
            svg,
            r##"<path class="arc" data-n="{}" d="M {:.9} {:.9} A {:.9} {:.9} 0 {large} {sweep_flag} {:.9} {:.9}" stroke="#d62728"/>"##,
            r.n,
            r.exit_point.x,
            r.exit_point.y,
            r.arc.radius,
            r.arc.radius,
            r.entry_point.x,
            r.entry_point.y,
        );
        start = r.entry_point;
    }
    for r in &trace.records {
        let _ = writeln!(
            svg,
            r##"<circle class="exit" cx="{:.9}" cy="{:.9}" r="{dot}" fill="#d62728" stroke="none"/>"##,
            r.exit_point.x, r.exit_point.y
        );
        let _ = writeln!(
            svg,
            r##"<circle class="entry" cx="{:.9}" cy="{:.9}" r="{dot}" fill="#2ca02c" stroke="none"/>"##,
            r.entry_point.x, r.entry_point.y
        );
    }
    let _ = writeln!(svg, "</g>");
    let _ = writeln!(svg, "</svg>");
    svg
}

const PORTRAIT_W: f64 = 800.0;
const PORTRAIT_H: f64 = 400.0;
const MARGIN: f64 = 50.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

/// Scatter of `(s, u)` over `[0,4] x [-1,1]`, u increasing upwards.
pub fn portrait_svg(portrait: &Portrait, seed: u64) -> String {
    let px = |s: f64| MARGIN + s / 4.0 * PORTRAIT_W;
    let py = |u: f64| MARGIN + (1.0 - u) / 2.0 * PORTRAIT_H;
    let total_w = PORTRAIT_W + 2.0 * MARGIN;
    let total_h = PORTRAIT_H + 2.0 * MARGIN;

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{total_w}" height="{total_h}" viewBox="0 0 {total_w} {total_h}">"#
    );
    let _ = writeln!(
        svg,
        "<!-- seed={seed} orbits={} points={} -->",
        portrait.terminations.len(),
        portrait.points.len()
    );
    let _ = writeln!(
        svg,
        r##"<rect id="frame" x="{MARGIN}" y="{MARGIN}" width="{PORTRAIT_W}" height="{PORTRAIT_H}" fill="none" stroke="#000000"/>"##
    );
    // Side boundaries and the u = 0 line.
    for s in 1..4 {
        let x = px(s as f64);
        let _ = writeln!(
            svg,
            r##"<line x1="{x}" y1="{MARGIN}" x2="{x}" y2="{}" stroke="#bbbbbb"/>"##,
            MARGIN + PORTRAIT_H
        );
    }
    let _ = writeln!(
        svg,
        r##"<line x1="{MARGIN}" y1="{y}" x2="{}" y2="{y}" stroke="#bbbbbb"/>"##,
        MARGIN + PORTRAIT_W,
        y = py(0.0)
    );
    for s in 0..=4 {
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">{s}</text>"#,
            px(s as f64),
            MARGIN + PORTRAIT_H + 16.0
        );
    }
    for u in [-1, 0, 1] {
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-size="12" text-anchor="end">{u}</text>"#,
            MARGIN - 6.0,
            py(u as f64) + 4.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-size="14" text-anchor="middle">s</text>"#,
        MARGIN + PORTRAIT_W / 2.0,
        total_h - 8.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{}" font-size="14" text-anchor="middle">u = cos(theta)</text>"#,
        MARGIN - 16.0
    );
    let _ = writeln!(svg, r#"<g stroke="none">"#);
    for p in &portrait.points {
        let _ = writeln!(
            svg,
            r#"<circle cx="{:.3}" cy="{:.3}" r="0.8" fill="{}"/>"#,
            px(p.s),
            py(p.u),
            PALETTE[p.orbit_id % PALETTE.len()]
        );
    }
    let _ = writeln!(svg, "</g>");
    let _ = writeln!(svg, "</svg>");
    svg
}
