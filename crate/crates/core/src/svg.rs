//! Static SVG rendering of an uncertainty diagram.

use std::fmt::Write as _;
use std::path::Path;

use crate::diagram::{Classification, Diagram};
use crate::error::Result;

const SIZE: f64 = 600.0;
const MARGIN: f64 = 70.0;
const MARKER_R: f64 = 9.0;

struct Frame {
    d: f64,
}

impl Frame {
    fn span(&self) -> f64 {
        SIZE - 2.0 * MARGIN
    }

    /// Plot coordinates run from 0.5 to d + 0.5 on both axes.
    fn x(&self, n_a: f64) -> f64 {
        MARGIN + (n_a - 0.5) / self.d * self.span()
    }

    fn y(&self, n_b: f64) -> f64 {
        SIZE - MARGIN - (n_b - 0.5) / self.d * self.span()
    }
}

/// XML comments may not contain `--`.
fn comment_safe(text: &str) -> String {
    let mut out = text.replace("--", "- -");
    while out.contains("--") {
        out = out.replace("--", "- -");
    }
    out
}

fn polygon(cx: f64, cy: f64, r: f64, sides: usize, rotation: f64) -> String {
    (0..sides)
        .map(|k| {
            let a = rotation + 2.0 * std::f64::consts::PI * k as f64 / sides as f64;
            format!("{:.2},{:.2}", cx + r * a.cos(), cy + r * a.sin())
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn marker(class: Classification, cx: f64, cy: f64) -> Option<String> {
    use std::f64::consts::FRAC_PI_4;
    let (name, fill, points) = match class {
        Classification::Classical => ("classical", "#d62728", polygon(cx, cy, MARKER_R * 1.1, 4, FRAC_PI_4)),
        Classification::Nonclassical => ("nonclassical", "#1f77b4", polygon(cx, cy, MARKER_R * 1.2, 4, 0.0)),
        Classification::Mixed => ("mixed", "#c71585", polygon(cx, cy, MARKER_R, 6, 0.0)),
        Classification::Empty => return None,
    };
    Some(format!(
        "<polygon class=\"marker {name}\" points=\"{points}\" style=\"fill:{fill};stroke:#000;stroke-width:0.8\"/>"
    ))
}

/// Renders `diagram` as a 600×600 self-contained SVG document. `header`
/// lines go into a leading comment.
pub fn render_svg(diagram: &Diagram, header: &[String]) -> String {
    let f = Frame { d: diagram.d as f64 };
    let d = diagram.d;
    let lo = 0.5;
    let hi = d as f64 + 0.5;
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    s.push_str("<!--\n");
    for line in header {
        let _ = writeln!(s, "  {}", comment_safe(line));
    }
    s.push_str("-->\n");
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">"
    );
    s.push_str("<rect x=\"0\" y=\"0\" width=\"600\" height=\"600\" style=\"fill:#fff\"/>\n");

    let _ = writeln!(
        s,
        "<rect class=\"frame\" x=\"{MARGIN}\" y=\"{MARGIN}\" width=\"{w}\" height=\"{w}\" style=\"fill:none;stroke:#000;stroke-width:1\"/>",
        w = f.span()
    );
    for n in 1..=d {
        let (x, y) = (f.x(n as f64), f.y(n as f64));
        let _ = writeln!(
            s,
            "<line class=\"tick\" x1=\"{x:.2}\" y1=\"{b:.2}\" x2=\"{x:.2}\" y2=\"{b2:.2}\" style=\"stroke:#000\"/>\
             <text x=\"{x:.2}\" y=\"{t:.2}\" style=\"font:14px sans-serif;text-anchor:middle\">{n}</text>",
            b = SIZE - MARGIN,
            b2 = SIZE - MARGIN + 6.0,
            t = SIZE - MARGIN + 24.0,
        );
        let _ = writeln!(
            s,
            "<line class=\"tick\" x1=\"{a:.2}\" y1=\"{y:.2}\" x2=\"{m:.2}\" y2=\"{y:.2}\" style=\"stroke:#000\"/>\
             <text x=\"{tx:.2}\" y=\"{ty:.2}\" style=\"font:14px sans-serif;text-anchor:end\">{n}</text>",
            a = MARGIN - 6.0,
            m = MARGIN,
            tx = MARGIN - 10.0,
            ty = y + 5.0,
        );
    }
    let _ = writeln!(
        s,
        "<text x=\"300\" y=\"{y:.2}\" style=\"font:16px sans-serif;text-anchor:middle\">n_A</text>",
        y = SIZE - 20.0
    );
    let _ = writeln!(
        s,
        "<text x=\"22\" y=\"300\" transform=\"rotate(-90 22 300)\" style=\"font:16px sans-serif;text-anchor:middle\">n_B</text>"
    );

    // n_a·n_b = c, clipped to the plot box
    let c = diagram.hyperbola_constant;
    let start = (c / hi).max(lo);
    let end = (c / lo).min(hi);
    if start < end {
        let pts: Vec<String> = (0..=200)
            .map(|k| {
                let a = start + (end - start) * k as f64 / 200.0;
                format!("{:.2},{:.2}", f.x(a), f.y(c / a))
            })
            .collect();
        let _ = writeln!(
            s,
            "<polyline class=\"hyperbola\" points=\"{}\" style=\"fill:none;stroke:#555;stroke-width:1.5;stroke-dasharray:8 5\"/>",
            pts.join(" ")
        );
    }
    let e = diagram.edge as f64;
    let _ = writeln!(
        s,
        "<line class=\"edge\" x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" style=\"stroke:#555;stroke-width:1.5;stroke-dasharray:10 4 2 4\"/>",
        f.x(lo),
        f.y(e - lo),
        f.x(e - lo),
        f.y(lo)
    );

    for p in &diagram.points {
        if let Some(m) = marker(p.classification, f.x(p.n_a as f64), f.y(p.n_b as f64)) {
            s.push_str(&m);
            s.push('\n');
        }
    }
    s.push_str("</svg>\n");
    s
}

pub fn emit_svg(diagram: &Diagram, header: &[String], path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, render_svg(diagram, header))?;
    Ok(())
}
