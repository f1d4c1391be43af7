//! Self-contained SVG line plots with fixed-precision coordinates, so equal
//! inputs give equal bytes.

use std::fmt::Write as _;

const W: f64 = 640.0;
const H: f64 = 440.0;
const LEFT: f64 = 78.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 110.0;
const COLORS: [&str; 6] = ["#1f5fa8", "#c4432b", "#2e8b57", "#8a4fb0", "#b8860b", "#444444"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

impl Scale {
    fn map(self, v: f64) -> f64 {
        match self {
            Scale::Linear => v,
            Scale::Log => v.log10(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Line {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
    /// Draw point markers.
    pub markers: bool,
}

#[derive(Clone, Debug)]
pub struct Plot {
    pub title: String,
    pub caption: Vec<String>,
    pub x_label: String,
    pub y_label: String,
    pub x_scale: Scale,
    pub y_scale: Scale,
    pub lines: Vec<Line>,
    pub annotation: Option<String>,
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn fmt(v: f64) -> String {
    format!("{v:.2}")
}

/// Nice linear ticks on `[lo, hi]`, labelled to the precision of the step.
fn linear_ticks(lo: f64, hi: f64) -> Vec<(f64, String)> {
    let span = hi - lo;
    let mag = 10f64.powf((span / 5.0).log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| span / s <= 6.0).unwrap_or(10.0 * mag);
    let decimals = (-step.log10().floor()).max(0.0) as usize;
    let mut out = Vec::new();
    let mut k = (lo / step).ceil();
    while k * step <= hi + 1e-9 * span {
        let v = k * step;
        let label = format!("{v:.decimals$}");
        out.push((v, if label.trim_start_matches('-').trim_matches(|c| c == '0' || c == '.').is_empty() { "0".into() } else { label }));
        k += 1.0;
    }
    out
}

/// Tick positions in mapped (possibly log10) units, with labels.
fn ticks(lo: f64, hi: f64, scale: Scale) -> Vec<(f64, String)> {
    if scale == Scale::Linear {
        return linear_ticks(lo, hi);
    }
    // Decades, then 1-2-5, then every mantissa, whichever gives 3 to 8.
    let mantissas: [&[f64]; 3] = [&[1.0], &[1.0, 2.0, 5.0], &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0]];
    for m in mantissas {
        let out: Vec<f64> = (lo.floor() as i32..=hi.ceil() as i32)
            .flat_map(|d| m.iter().map(move |k| d as f64 + k.log10()))
            .filter(|t| *t >= lo - 1e-9 && *t <= hi + 1e-9)
            .collect();
        if (3..=8).contains(&out.len()) || out.len() > 8 {
            let step = out.len().div_ceil(8);
            return out.into_iter().step_by(step).map(|t| (t, short(10f64.powf(t)))).collect();
        }
    }
    // Less than a factor of about three: linear ticks in value space.
    linear_ticks(10f64.powf(lo), 10f64.powf(hi))
        .into_iter()
        .filter(|(v, _)| *v > 0.0)
        .map(|(v, l)| (v.log10(), l))
        .collect()
}

/// Three significant digits, plain notation between 1e-3 and 1e4.
fn short(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let mag = v.abs().log10().floor();
    if !(-3.0..4.0).contains(&mag) {
        return format!("{v:.1e}");
    }
    let digits = (2.0 - mag).max(0.0) as usize;
    let s = format!("{v:.digits$}");
    let s = if s.contains('.') { s.trim_end_matches('0').trim_end_matches('.') } else { &s };
    if s == "-0" { "0".into() } else { s.to_string() }
}

impl Plot {
    fn range(&self, axis: usize, scale: Scale) -> (f64, f64) {
        let vals = self
            .lines
            .iter()
            .flat_map(|l| l.points.iter())
            .map(|p| if axis == 0 { p.0 } else { p.1 })
            .filter(|v| v.is_finite() && (scale == Scale::Linear || *v > 0.0))
            .map(|v| scale.map(v));
        let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        if !lo.is_finite() {
            return (0.0, 1.0);
        }
        if hi - lo < 1e-12 {
            let pad = if lo.abs() > 0.0 { 0.1 * lo.abs() } else { 1.0 };
            return (lo - pad, hi + pad);
        }
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    }

    pub fn render(&self) -> String {
        let (x0, x1) = self.range(0, self.x_scale);
        let (y0, y1) = self.range(1, self.y_scale);
        let pw = W - LEFT - RIGHT;
        let ph = H - TOP - BOTTOM;
        let px = |v: f64| LEFT + (v - x0) / (x1 - x0) * pw;
        let py = |v: f64| TOP + ph - (v - y0) / (y1 - y0) * ph;
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, "<title>{}</title>", esc(&self.title));
        let _ = writeln!(s, "<desc>{}</desc>", esc(&self.caption.join(" ")));
        let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
            fmt(W / 2.0),
            esc(&self.title)
        );
        let _ = writeln!(
            s,
            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            fmt(LEFT),
            fmt(TOP),
            fmt(pw),
            fmt(ph)
        );
        for (t, label) in ticks(x0, x1, self.x_scale) {
            let x = fmt(px(t));
            let yb = fmt(TOP + ph);
            let _ = writeln!(s, r##"<line x1="{x}" y1="{}" x2="{x}" y2="{yb}" stroke="#dddddd"/>"##, fmt(TOP));
            let _ = writeln!(
                s,
                r#"<text x="{x}" y="{}" text-anchor="middle">{}</text>"#,
                fmt(TOP + ph + 16.0),
                label
            );
        }
        for (t, label) in ticks(y0, y1, self.y_scale) {
            let y = fmt(py(t));
            let _ = writeln!(s, r##"<line x1="{}" y1="{y}" x2="{}" y2="{y}" stroke="#dddddd"/>"##, fmt(LEFT), fmt(LEFT + pw));
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{y}" text-anchor="end" dominant-baseline="middle">{}</text>"#,
                fmt(LEFT - 6.0),
                label
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            fmt(LEFT + pw / 2.0),
            fmt(TOP + ph + 36.0),
            esc(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
            fmt(TOP + ph / 2.0),
            fmt(TOP + ph / 2.0),
            esc(&self.y_label)
        );
        let legend_x = LEFT + pw - 196.0;
        let mut legend = format!(
            r##"<rect x="{}" y="{}" width="190" height="{}" fill="white" fill-opacity="0.85" stroke="#bbbbbb"/>"##,
            fmt(legend_x),
            fmt(TOP + 4.0),
            fmt(16.0 * self.lines.len() as f64 + 4.0)
        );
        legend.push('\n');
        for (k, line) in self.lines.iter().enumerate() {
            let color = COLORS[k % COLORS.len()];
            let pts: Vec<(f64, f64)> = line
                .points
                .iter()
                .filter(|p| {
                    p.0.is_finite()
                        && p.1.is_finite()
                        && (self.x_scale == Scale::Linear || p.0 > 0.0)
                        && (self.y_scale == Scale::Linear || p.1 > 0.0)
                })
                .map(|p| (px(self.x_scale.map(p.0)), py(self.y_scale.map(p.1))))
                .collect();
            let path: Vec<String> = pts.iter().map(|(x, y)| format!("{},{}", fmt(*x), fmt(*y))).collect();
            let dash = if line.dashed { r#" stroke-dasharray="6 4""# } else { "" };
            let _ = writeln!(
                s,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.8"{dash}/>"#,
                path.join(" ")
            );
            if line.markers {
                for (x, y) in &pts {
                    let _ = writeln!(s, r#"<circle cx="{}" cy="{}" r="3" fill="{color}"/>"#, fmt(*x), fmt(*y));
                }
            }
            let ly = TOP + 14.0 + 16.0 * k as f64;
            let lx = legend_x + 6.0;
            let _ = writeln!(
                legend,
                r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{color}" stroke-width="1.8"{dash}/>"#,
                fmt(lx),
                fmt(ly),
                fmt(lx + 22.0),
                fmt(ly)
            );
            let _ = writeln!(
                legend,
                r#"<text x="{}" y="{}" dominant-baseline="middle">{}</text>"#,
                fmt(lx + 28.0),
                fmt(ly),
                esc(&line.label)
            );
        }
        s.push_str(&legend);
        if let Some(a) = &self.annotation {
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" font-style="italic">{}</text>"#,
                fmt(LEFT + 10.0),
                fmt(TOP + ph - 10.0),
                esc(a)
            );
        }
        for (i, c) in self.caption.iter().enumerate() {
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" font-size="11">{}</text>"#,
                fmt(LEFT),
                fmt(TOP + ph + 58.0 + 15.0 * i as f64),
                esc(c)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}
