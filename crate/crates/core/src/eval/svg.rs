use std::fmt::Write as _;
use std::path::Path;

use super::calibration::CalibrationBins;
use crate::error::{Error, Result};

const SIZE: f64 = 360.0;
const MARGIN: f64 = 50.0;

fn px(v: f64) -> String {
    format!("{v:.2}")
}

/// Static reliability diagram: per-bin accuracy bars, the identity diagonal,
/// a shaded gap between accuracy and mean confidence, and the ECE value.
/// Output depends only on `bins`.
pub fn reliability_svg(bins: &CalibrationBins, title: &str) -> String {
    let total = SIZE + 2.0 * MARGIN;
    let x = |v: f64| MARGIN + v * SIZE;
    let y = |v: f64| MARGIN + (1.0 - v) * SIZE;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{t}" height="{t}" viewBox="0 0 {t} {t}">"#,
        t = px(total)
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
        px(total / 2.0),
        px(MARGIN / 2.0),
        escape(title)
    );
    for b in &bins.bins {
        let acc = b.accuracy.unwrap_or(0.0);
        let w = x(b.hi) - x(b.lo);
        let _ = writeln!(
            s,
            r#"<rect class="bar" x="{}" y="{}" width="{}" height="{}" fill="steelblue" stroke="black" stroke-width="0.5"/>"#,
            px(x(b.lo)),
            px(y(acc)),
            px(w),
            px(acc * SIZE)
        );
        if let (Some(a), Some(c)) = (b.accuracy, b.confidence) {
            let (top, bottom) = (a.max(c), a.min(c));
            if top > bottom {
                let _ = writeln!(
                    s,
                    r#"<rect class="gap" x="{}" y="{}" width="{}" height="{}" fill="red" fill-opacity="0.35" stroke="red" stroke-width="0.5"/>"#,
                    px(x(b.lo)),
                    px(y(top)),
                    px(w),
                    px((top - bottom) * SIZE)
                );
            }
        }
    }
    let _ = writeln!(
        s,
        r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="gray" stroke-dasharray="4 3"/>"#,
        px(x(0.0)),
        px(y(0.0)),
        px(x(1.0)),
        px(y(1.0))
    );
    let _ = writeln!(
        s,
        r#"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        px(MARGIN),
        px(MARGIN),
        px(SIZE),
        px(SIZE)
    );
    for k in 0..=5 {
        let v = k as f64 / 5.0;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="10" text-anchor="middle">{v:.1}</text>"#,
            px(x(v)),
            px(y(0.0) + 14.0)
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="10" text-anchor="end">{v:.1}</text>"#,
            px(x(0.0) - 4.0),
            px(y(v) + 3.0)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">Confidence</text>"#,
        px(total / 2.0),
        px(total - 12.0)
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle" transform="rotate(-90 14 {})">Accuracy</text>"#,
        px(total / 2.0),
        px(total / 2.0)
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12">ECE = {:.4}</text>"#,
        px(x(0.04)),
        px(y(0.92)),
        bins.ece
    );
    s.push_str("</svg>\n");
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

pub fn render_reliability_svg(bins: &CalibrationBins, title: &str, path: &Path) -> Result<()> {
    std::fs::write(path, reliability_svg(bins, title)).map_err(|e| Error::io(path, e))
}
