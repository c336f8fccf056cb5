//! Standalone SVG plot of the two fingertip ratio traces with the controller band.

use std::fmt::Write as _;

use crate::trace::TraceRow;

const WIDTH: f64 = 900.0;
const PANEL: f64 = 220.0;
const MARGIN: f64 = 50.0;

/// Two stacked panels (left, right finger). The band `[mu - band/2, mu + band/2]`
/// is shaded; spans where a ratio crosses above the band are highlighted.
pub fn ratio_plot(rows: &[TraceRow], mu: f64, band: f64, title: &str) -> String {
    let (lo, hi) = (mu - band / 2.0, mu + band / 2.0);
    let t0 = rows.first().map_or(0.0, |r| r.t);
    let t1 = rows.last().map_or(1.0, |r| r.t).max(t0 + 1e-9);
    let finite_max = rows.iter().flat_map(|r| r.ratio).filter(|x| x.is_finite()).fold(hi, f64::max);
    let y_max = (finite_max * 1.1).max(hi + band);
    let height = 2.0 * PANEL + 3.0 * MARGIN;
    let plot_w = WIDTH - 2.0 * MARGIN;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{MARGIN}" y="20" font-size="14">{}</text>"#, escape(title));

    for (f, name) in ["left", "right"].iter().enumerate() {
        let top = MARGIN + f as f64 * (PANEL + MARGIN);
        let x = |t: f64| MARGIN + (t - t0) / (t1 - t0) * plot_w;
        let y = |r: f64| top + PANEL - (r.clamp(0.0, y_max) / y_max) * PANEL;

        let _ = writeln!(s, r##"<rect x="{MARGIN}" y="{:.2}" width="{plot_w}" height="{:.2}" fill="#8fbc8f" fill-opacity="0.35"/>"##, y(hi), y(lo) - y(hi));
        // crossover spans above the band
        let mut start: Option<f64> = None;
        for (k, r) in rows.iter().enumerate() {
            let above = r.ratio[f].is_finite() && r.ratio[f] > hi;
            match (above, start) {
                (true, None) => start = Some(r.t),
                (false, Some(a)) => {
                    span(&mut s, x(a), x(r.t), top);
                    start = None;
                }
                _ => {}
            }
            if k + 1 == rows.len() {
                if let Some(a) = start {
                    span(&mut s, x(a), x(r.t), top);
                }
            }
        }
        let _ = writeln!(s, r#"<rect x="{MARGIN}" y="{top}" width="{plot_w}" height="{PANEL}" fill="none" stroke="black"/>"#);
        for level in [lo, mu, hi] {
            let _ = writeln!(
                s,
                r##"<line x1="{MARGIN}" x2="{:.2}" y1="{:.2}" y2="{:.2}" stroke="#2e6b2e" stroke-dasharray="4 3"/>"##,
                MARGIN + plot_w,
                y(level),
                y(level)
            );
            let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{level:.3}</text>"#, MARGIN - 4.0, y(level) + 4.0);
        }

        let mut path = String::new();
        let mut pen_down = false;
        for r in rows {
            let v = r.ratio[f];
            if !v.is_finite() {
                pen_down = false;
                continue;
            }
            let _ = write!(path, "{}{:.2},{:.2} ", if pen_down { "L" } else { "M" }, x(r.t), y(v));
            pen_down = true;
        }
        let _ = writeln!(s, r##"<path d="{}" fill="none" stroke="#1f4e9c" stroke-width="1.5"/>"##, path.trim_end());
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}">{name} ratio f_t/f_n</text>"#, MARGIN + 6.0, top + 16.0);
        let _ = writeln!(s, r#"<text x="{MARGIN}" y="{:.2}">{t0:.2} s</text>"#, top + PANEL + 16.0);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{t1:.2} s</text>"#, MARGIN + plot_w, top + PANEL + 16.0);
    }
    s.push_str("</svg>\n");
    s
}

fn span(s: &mut String, x0: f64, x1: f64, top: f64) {
    let _ = writeln!(
        s,
        r##"<rect x="{x0:.2}" y="{top}" width="{:.2}" height="{PANEL}" fill="#d9534f" fill-opacity="0.2"/>"##,
        (x1 - x0).max(1.0)
    );
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plot_is_well_formed() {
        let rows: Vec<TraceRow> = (0..50)
            .map(|k| TraceRow { t: k as f64 * 0.1, ratio: [0.3 + 0.01 * k as f64, f64::NAN], slip: false })
            .collect();
        let svg = ratio_plot(&rows, 0.6, 0.2, "a < b");
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("a &lt; b"));
        assert!(svg.contains("#d9534f"));
        assert_eq!(svg.matches("<path").count(), 2);
    }
}
