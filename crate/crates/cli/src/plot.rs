// SPDX-License-Identifier: Apache-2.0

//! CSV tables and the static SVG figure.

use std::f64::consts::{PI, TAU};
use std::fmt::Write;

use chiralwalk_core::fredholm::SpectralCloud;
use chiralwalk_core::{Arc, Band, EigenstateBundle};

use crate::report::format_float;

/// Band table followed by arc table, each with its own header.
pub fn bands_csv(bands: &[Band], arcs: &[Arc]) -> String {
    let mut s = String::from("band_lo,band_hi\n");
    for b in bands {
        let _ = writeln!(s, "{},{}", format_float(b.lo), format_float(b.hi));
    }
    s.push_str("arc_theta_lo,arc_theta_hi\n");
    for a in arcs {
        let _ = writeln!(s, "{},{}", format_float(a.theta_lo), format_float(a.theta_hi));
    }
    s
}

/// Parses the output of [`bands_csv`].
pub fn parse_bands_csv(text: &str) -> Option<(Vec<Band>, Vec<Arc>)> {
    let mut lines = text.lines();
    if lines.next()? != "band_lo,band_hi" {
        return None;
    }
    let pair = |line: &str| -> Option<(f64, f64)> {
        let (a, b) = line.split_once(',')?;
        Some((a.parse().ok()?, b.parse().ok()?))
    };
    let mut bands = Vec::new();
    let mut arcs = Vec::new();
    let mut in_arcs = false;
    for line in lines {
        if line == "arc_theta_lo,arc_theta_hi" {
            in_arcs = true;
            continue;
        }
        let (lo, hi) = pair(line)?;
        if in_arcs {
            arcs.push(Arc { theta_lo: lo, theta_hi: hi });
        } else {
            bands.push(Band { lo, hi });
        }
    }
    in_arcs.then_some((bands, arcs))
}

pub fn cloud_csv(cloud: &SpectralCloud) -> String {
    let mut s = String::from("side,theta,value_re,value_im\n");
    for p in &cloud.points {
        let theta = p.z.arg().rem_euclid(TAU);
        let _ = writeln!(s, "{},{},{},{}", p.side, format_float(theta), format_float(p.value.re), format_float(p.value.im));
    }
    s
}

/// One row per site; ψ and Ψ are real, so the imaginary columns are zero.
pub fn eigenstate_csv(bundle: &EigenstateBundle) -> String {
    let mut s = String::from("x,psi_re,psi_im,Psi1_re,Psi1_im,Psi2_re,Psi2_im,norm_sq\n");
    let zero = format_float(0.0);
    for x in bundle.sites() {
        let [c1, c2] = bundle.state_at(x);
        let _ = writeln!(
            s,
            "{x},{},{zero},{},{zero},{},{zero},{}",
            format_float(bundle.psi_at(x)),
            format_float(c1),
            format_float(c2),
            format_float(bundle.log_norm_sq_at(x).exp()),
        );
    }
    s
}

const SIZE: f64 = 400.0;
const RADIUS: f64 = 160.0;

fn point(theta: f64) -> (f64, f64) {
    (SIZE / 2.0 + RADIUS * theta.cos(), SIZE / 2.0 - RADIUS * theta.sin())
}

/// The unit circle with the given arcs stroked on top.
pub fn spectrum_svg(arcs: &[Arc]) -> String {
    let c = SIZE / 2.0;
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#);
    let _ = writeln!(s, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##);
    let _ = writeln!(s, r##"<line x1="20" y1="{c}" x2="380" y2="{c}" stroke="#bbbbbb" stroke-width="1"/>"##);
    let _ = writeln!(s, r##"<line x1="{c}" y1="20" x2="{c}" y2="380" stroke="#bbbbbb" stroke-width="1"/>"##);
    let _ = writeln!(s, r##"<circle cx="{c}" cy="{c}" r="{RADIUS}" fill="none" stroke="#888888" stroke-width="1.5"/>"##);
    for a in arcs {
        let span = a.theta_hi - a.theta_lo;
        if span >= TAU - 1e-12 {
            let _ = writeln!(s, r##"<circle cx="{c}" cy="{c}" r="{RADIUS}" fill="none" stroke="#c0392b" stroke-width="6"/>"##);
        } else if span <= 1e-9 {
            let (x, y) = point(a.theta_lo);
            let _ = writeln!(s, r##"<circle cx="{x:.6}" cy="{y:.6}" r="5" fill="#c0392b"/>"##);
        } else {
            let (x0, y0) = point(a.theta_lo);
            let (x1, y1) = point(a.theta_hi);
            let large = u8::from(span > PI);
            let _ = writeln!(
                s,
                r##"<path d="M {x0:.6} {y0:.6} A {RADIUS} {RADIUS} 0 {large} 0 {x1:.6} {y1:.6}" fill="none" stroke="#c0392b" stroke-width="6" stroke-linecap="round"/>"##
            );
        }
    }
    let _ = writeln!(s, r##"<text x="385" y="{}" font-size="12" font-family="sans-serif" fill="#444444">1</text>"##, c - 4.0);
    s.push_str("</svg>\n");
    s
}
