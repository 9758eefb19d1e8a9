//! Report writers: JSON and CSV with 17 significant digits, and SVG plots
//! on a fixed 800 × 600 canvas.

use exotic_curv::scan::{CurvatureRecord, PLANE_PARAMS};
use exotic_curv::verify::CheckReport;
use serde::Serialize;
use serde_json::Value;
use std::fmt::Write as _;
use std::str::FromStr;

/// `x` with 17 significant digits in scientific notation; `NaN`, `inf` and
/// `-inf` for non-finite values.
pub fn fmt17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Rewrites every non-integer number of a JSON tree with 17 significant
/// digits.
fn reformat(v: &mut Value) {
    match v {
        Value::Number(n) if !(n.is_i64() || n.is_u64()) => {
            if let Some(x) = n.as_f64() {
                *n = serde_json::Number::from_str(&fmt17(x)).expect("formatted float is a JSON number");
            }
        }
        Value::Array(items) => items.iter_mut().for_each(reformat),
        Value::Object(map) => map.values_mut().for_each(reformat),
        _ => {}
    }
}

/// Pretty JSON of `value` with floats printed to 17 significant digits.
pub fn to_json<T: Serialize>(value: &T) -> serde_json::Result<String> {
    let mut tree = serde_json::to_value(value)?;
    reformat(&mut tree);
    let mut s = serde_json::to_string_pretty(&tree)?;
    s.push('\n');
    Ok(s)
}

/// CSV header of the scan record stream.
pub fn record_header() -> Vec<String> {
    let mut h: Vec<String> = [
        "stage", "cell", "t", "theta", "alpha_x", "alpha_y", "alpha_z", "p_w", "p_x", "p_y", "p_z",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    h.extend((0..PLANE_PARAMS).map(|k| format!("plane_{k}")));
    h.extend(["sec", "area", "residual", "refined"].iter().map(|s| s.to_string()));
    h
}

/// One CSV row of a scan record.
pub fn record_row(r: &CurvatureRecord) -> Vec<String> {
    let mut row = vec![r.stage.name().to_string(), r.cell.to_string()];
    for x in [
        r.t, r.theta, r.alpha.x, r.alpha.y, r.alpha.z, r.p.w, r.p.x, r.p.y, r.p.z,
    ] {
        row.push(fmt17(x));
    }
    row.extend(r.plane_params.iter().map(|x| fmt17(*x)));
    for x in [r.sec, r.area, r.residual] {
        row.push(fmt17(x));
    }
    row.push(u8::from(r.refined).to_string());
    row
}

/// Writes scan records as CSV.
pub fn write_records<W: std::io::Write>(out: W, records: &[CurvatureRecord]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(record_header())?;
    for r in records {
        w.write_record(record_row(r))?;
    }
    w.flush()?;
    Ok(())
}

/// Writes one CSV row per part of every report.
pub fn write_report_parts<W: std::io::Write>(out: W, reports: &[CheckReport]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "suite", "part", "measure", "value", "bound", "pass", "samples", "t", "theta", "detail",
    ])?;
    for r in reports {
        if let Some(reason) = &r.skipped {
            w.write_record([
                r.id.as_str(),
                "skipped",
                "",
                "",
                "",
                "true",
                "0",
                "",
                "",
                reason.as_str(),
            ])?;
        }
        for p in &r.parts {
            let loc = p.worst_location.as_ref();
            let opt = |x: Option<f64>| x.map(fmt17).unwrap_or_default();
            w.write_record([
                r.id.clone(),
                p.name.clone(),
                serde_json::to_value(p.measure)
                    .ok()
                    .and_then(|v| v.as_str().map(String::from))
                    .unwrap_or_default(),
                fmt17(p.value),
                fmt17(p.bound),
                p.pass.to_string(),
                p.samples.to_string(),
                opt(loc.and_then(|l| l.t)),
                opt(loc.and_then(|l| l.theta)),
                loc.map(|l| l.detail.clone()).unwrap_or_default(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes named columns as CSV.
pub fn write_columns<W: std::io::Write>(out: W, names: &[&str], columns: &[Vec<f64>]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(names)?;
    let n = columns.iter().map(Vec::len).min().unwrap_or(0);
    for i in 0..n {
        w.write_record(columns.iter().map(|c| fmt17(c[i])))?;
    }
    w.flush()?;
    Ok(())
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const LEFT: f64 = 90.0;
const RIGHT: f64 = 130.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 70.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn svg_open(title: &str, x_label: &str, y_label: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="800" height="600" viewBox="0 0 800 600" font-family="sans-serif" font-size="13">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="800" height="600" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="400" y="28" text-anchor="middle" font-size="16">{}</text>"#,
        escape(title)
    );
    let _ = writeln!(
        s,
        r#"<text class="axis-label" x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        LEFT + (WIDTH - LEFT - RIGHT) / 2.0,
        HEIGHT - 20.0,
        escape(x_label)
    );
    let _ = writeln!(
        s,
        r#"<text class="axis-label" x="24" y="{:.1}" text-anchor="middle" transform="rotate(-90 24 {:.1})">{}</text>"#,
        TOP + (HEIGHT - TOP - BOTTOM) / 2.0,
        TOP + (HEIGHT - TOP - BOTTOM) / 2.0,
        escape(y_label)
    );
    s
}

fn axes(s: &mut String, x_range: (f64, f64), y_range: (f64, f64)) {
    let (x0, x1) = (LEFT, WIDTH - RIGHT);
    let (y0, y1) = (HEIGHT - BOTTOM, TOP);
    let _ = writeln!(s, r#"<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>"#);
    let _ = writeln!(s, r#"<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>"#);
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let xv = x_range.0 + f * (x_range.1 - x_range.0);
        let yv = y_range.0 + f * (y_range.1 - y_range.0);
        let px = x0 + f * (x1 - x0);
        let py = y0 + f * (y1 - y0);
        let _ = writeln!(
            s,
            r#"<text x="{px:.1}" y="{:.1}" text-anchor="middle">{xv:.3}</text>"#,
            y0 + 18.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{yv:.3e}</text>"#,
            x0 - 6.0,
            py + 4.0
        );
    }
}

fn color(f: f64) -> String {
    let f = f.clamp(0.0, 1.0);
    let (r, g, b) = if f < 0.5 {
        let u = f / 0.5;
        (40.0 + 215.0 * u, 70.0 + 185.0 * u, 200.0 + 55.0 * u)
    } else {
        let u = (f - 0.5) / 0.5;
        (255.0, 255.0 - 175.0 * u, 255.0 - 215.0 * u)
    };
    format!("rgb({},{},{})", r.round() as u8, g.round() as u8, b.round() as u8)
}

/// A heatmap of `values[i * n_y + j]` over an `n_x × n_y` grid covering
/// `x_range × y_range`, one `rect` of class `cell` per grid cell. `NaN`
/// cells are drawn grey.
pub fn heatmap(
    title: &str,
    x_label: &str,
    y_label: &str,
    x_range: (f64, f64),
    y_range: (f64, f64),
    n_x: usize,
    n_y: usize,
    values: &[f64],
) -> String {
    let mut s = svg_open(title, x_label, y_label);
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    let lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let cw = (WIDTH - LEFT - RIGHT) / n_x as f64;
    let ch = (HEIGHT - TOP - BOTTOM) / n_y as f64;
    for i in 0..n_x {
        for j in 0..n_y {
            let v = values[i * n_y + j];
            let fill = if v.is_finite() {
                color((v - lo) / span)
            } else {
                "rgb(160,160,160)".into()
            };
            let _ = writeln!(
                s,
                r#"<rect class="cell" x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{fill}"><title>{}</title></rect>"#,
                LEFT + i as f64 * cw,
                HEIGHT - BOTTOM - (j + 1) as f64 * ch,
                cw,
                ch,
                fmt17(v)
            );
        }
    }
    axes(&mut s, x_range, y_range);
    let lx = WIDTH - RIGHT + 30.0;
    for k in 0..20 {
        let f = k as f64 / 19.0;
        let _ = writeln!(
            s,
            r#"<rect x="{lx}" y="{:.1}" width="20" height="{:.1}" fill="{}"/>"#,
            HEIGHT - BOTTOM - (k + 1) as f64 * (HEIGHT - TOP - BOTTOM) / 20.0,
            (HEIGHT - TOP - BOTTOM) / 20.0,
            color(f)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}">{}</text>"#,
        lx + 24.0,
        HEIGHT - BOTTOM,
        fmt_short(lo)
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}">{}</text>"#,
        lx + 24.0,
        TOP + 10.0,
        fmt_short(hi)
    );
    s.push_str("</svg>\n");
    s
}

fn fmt_short(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.2e}")
    } else {
        "n/a".into()
    }
}

/// A labelled point marked on a line plot.
pub struct Annotation {
    /// Abscissa.
    pub x: f64,
    /// Ordinate.
    pub y: f64,
    /// Label text.
    pub label: String,
}

/// A line plot of several series against a common abscissa, with
/// annotations.
pub fn line_plot(
    title: &str,
    x_label: &str,
    y_label: &str,
    x: &[f64],
    series: &[(&str, &[f64])],
    annotations: &[Annotation],
) -> String {
    let mut s = svg_open(title, x_label, y_label);
    let xs = x.iter().copied().filter(|v| v.is_finite());
    let x_range = (
        xs.clone().fold(f64::INFINITY, f64::min),
        xs.fold(f64::NEG_INFINITY, f64::max),
    );
    let ys = series
        .iter()
        .flat_map(|(_, v)| v.iter().copied())
        .chain(annotations.iter().map(|a| a.y))
        .filter(|v| v.is_finite());
    let mut y_range = (
        ys.clone().fold(f64::INFINITY, f64::min),
        ys.fold(f64::NEG_INFINITY, f64::max),
    );
    if !(y_range.1 > y_range.0) {
        y_range = (y_range.0 - 1.0, y_range.0 + 1.0);
    }
    let px = |v: f64| LEFT + (v - x_range.0) / (x_range.1 - x_range.0) * (WIDTH - LEFT - RIGHT);
    let py = |v: f64| HEIGHT - BOTTOM - (v - y_range.0) / (y_range.1 - y_range.0) * (HEIGHT - TOP - BOTTOM);
    if y_range.0 < 0.0 && y_range.1 > 0.0 {
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT}" y1="{:.2}" x2="{}" y2="{:.2}" stroke="#999" stroke-dasharray="4 3"/>"##,
            py(0.0),
            WIDTH - RIGHT,
            py(0.0)
        );
    }
    let palette = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];
    for (k, (name, ys)) in series.iter().enumerate() {
        let mut d = String::new();
        let mut pen_down = false;
        for (xv, yv) in x.iter().zip(ys.iter()) {
            if xv.is_finite() && yv.is_finite() {
                let _ = write!(d, "{}{:.2},{:.2} ", if pen_down { "L" } else { "M" }, px(*xv), py(*yv));
                pen_down = true;
            } else {
                pen_down = false;
            }
        }
        let c = palette[k % palette.len()];
        let _ = writeln!(
            s,
            r#"<path class="series" d="{}" fill="none" stroke="{c}" stroke-width="1.5"/>"#,
            d.trim_end()
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" fill="{c}">{}</text>"#,
            WIDTH - RIGHT + 8.0,
            TOP + 16.0 * (k + 1) as f64,
            escape(name)
        );
    }
    for a in annotations {
        let _ = writeln!(
            s,
            r#"<circle class="annotation" cx="{:.2}" cy="{:.2}" r="4" fill="none" stroke="black"/>"#,
            px(a.x),
            py(a.y)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
            px(a.x) + 6.0,
            py(a.y) - 6.0,
            escape(&a.label)
        );
    }
    axes(&mut s, x_range, y_range);
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_keep_seventeen_digits() {
        let x = 0.1f64 + 0.2;
        assert_eq!(fmt17(x).parse::<f64>().unwrap(), x);
        assert_eq!(fmt17(x), "3.0000000000000004e-1");
        let json = to_json(&serde_json::json!({"a": 1.0f64 / 3.0, "n": 4})).unwrap();
        assert!(json.contains("3.3333333333333331e-1"), "{json}");
        assert!(json.contains("\"n\": 4"));
    }

    #[test]
    fn heatmap_has_one_rect_per_cell() {
        let v: Vec<f64> = (0..12).map(|k| k as f64).collect();
        let svg = heatmap("h", "t", "theta", (0.0, 1.0), (0.0, 3.0), 3, 4, &v);
        assert_eq!(svg.matches(r#"class="cell""#).count(), 12);
        assert!(svg.contains(r#"viewBox="0 0 800 600""#));
    }
}
