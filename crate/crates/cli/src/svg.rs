//! Dependency-free SVG plots of response curves.

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::CliError;

/// Which part of the response to draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    Re,
    Im,
    Abs2,
}

impl Channel {
    pub fn parse(s: &str) -> Option<Channel> {
        match s.trim() {
            "re" => Some(Channel::Re),
            "im" => Some(Channel::Im),
            "abs2" => Some(Channel::Abs2),
            _ => None,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Channel::Re => "re",
            Channel::Im => "im",
            Channel::Abs2 => "abs2",
        }
    }

    fn color(self) -> &'static str {
        match self {
            Channel::Re => "#1f77b4",
            Channel::Im => "#d62728",
            Channel::Abs2 => "#2ca02c",
        }
    }

    fn value(self, z: Complex64) -> f64 {
        match self {
            Channel::Re => z.re.clamp(-Y_LIMIT, Y_LIMIT),
            Channel::Im => z.im.clamp(-Y_LIMIT, Y_LIMIT),
            Channel::Abs2 => z.norm_sqr().clamp(0.0, Y_LIMIT),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SvgStyle {
    pub channels: Vec<Channel>,
    pub width: u32,
    pub height: u32,
    pub title: Option<String>,
}

impl Default for SvgStyle {
    fn default() -> Self {
        SvgStyle { channels: vec![Channel::Re, Channel::Im, Channel::Abs2], width: 640, height: 400, title: None }
    }
}

const Y_LIMIT: f64 = 1.0 + 1e-9;
const MARGIN: f64 = 40.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders `curve` on a fixed `[-1, 1]` value axis, one polyline per channel.
pub fn emit_svg(curve: &[(f64, Complex64)], style: &SvgStyle) -> Result<String, CliError> {
    if curve.is_empty() {
        return Err(CliError::EmptyCurve);
    }
    let (w, h) = (style.width as f64, style.height as f64);
    let x_lo = curve.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let x_hi = curve.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let span = if x_hi > x_lo { x_hi - x_lo } else { 1.0 };
    let px = |x: f64| MARGIN + (x - x_lo) / span * (w - 2.0 * MARGIN);
    let py = |y: f64| h / 2.0 - y / Y_LIMIT * (h / 2.0 - MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">"##,
        style.width, style.height, style.width, style.height
    );
    let _ = writeln!(s, r##"<rect width="100%" height="100%" fill="white"/>"##);
    let _ = writeln!(
        s,
        r##"<g stroke="#888" stroke-width="1"><line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}"/><line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}"/></g>"##,
        MARGIN,
        py(0.0),
        w - MARGIN,
        py(0.0),
        MARGIN,
        py(1.0),
        MARGIN,
        py(-1.0)
    );
    let _ = writeln!(s, r##"<g font-family="sans-serif" font-size="11" fill="#444">"##);
    for y in [-1.0, 0.0, 1.0] {
        let _ = writeln!(s, r##"<text x="{:.3}" y="{:.3}" text-anchor="end">{y}</text>"##, MARGIN - 4.0, py(y) + 4.0);
    }
    for x in [x_lo, x_hi] {
        let _ = writeln!(s, r##"<text x="{:.3}" y="{:.3}" text-anchor="middle">{x}</text>"##, px(x), h - MARGIN / 2.0);
    }
    if let Some(t) = &style.title {
        let _ = writeln!(s, r##"<text x="{:.3}" y="{:.3}" text-anchor="middle">{}</text>"##, w / 2.0, MARGIN / 2.0, escape(t));
    }
    let _ = writeln!(s, "</g>");
    for (k, ch) in style.channels.iter().enumerate() {
        let points: Vec<String> =
            curve.iter().map(|&(a, z)| format!("{:.3},{:.3}", px(a), py(ch.value(z)))).collect();
        let _ = writeln!(
            s,
            r##"<polyline data-channel="{}" fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"##,
            ch.name(),
            ch.color(),
            points.join(" ")
        );
        let _ = writeln!(
            s,
            r##"<text x="{:.3}" y="{:.3}" font-family="sans-serif" font-size="11" fill="{}">{}</text>"##,
            w - MARGIN - 40.0,
            MARGIN + 14.0 * k as f64,
            ch.color(),
            ch.name()
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}
