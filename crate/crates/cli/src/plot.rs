//! Static SVG line charts of logged signals.

use std::fmt::Write;

use dualbuck::engine::TimeSeries;

const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 420.0;
const MARGIN: (f64, f64, f64, f64) = (70.0, 20.0, 40.0, 50.0); // left, right, top, bottom
const COLOURS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

pub struct Chart {
    pub title: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

/// Keeps the minimum and maximum of each bucket so short spikes survive
/// decimation to roughly `max_points` vertices.
pub fn decimate(points: &[(f64, f64)], max_points: usize) -> Vec<(f64, f64)> {
    let buckets = (max_points / 2).max(1);
    if points.len() <= max_points {
        return points.to_vec();
    }
    let size = points.len().div_ceil(buckets);
    let mut out = Vec::with_capacity(2 * buckets);
    for chunk in points.chunks(size) {
        let lo = chunk.iter().enumerate().min_by(|a, b| a.1 .1.total_cmp(&b.1 .1)).map(|(i, _)| i);
        let hi = chunk.iter().enumerate().max_by(|a, b| a.1 .1.total_cmp(&b.1 .1)).map(|(i, _)| i);
        if let (Some(lo), Some(hi)) = (lo, hi) {
            let (first, second) = if lo <= hi { (lo, hi) } else { (hi, lo) };
            out.push(chunk[first]);
            if second != first {
                out.push(chunk[second]);
            }
        }
    }
    out
}

/// Round tick spacing giving about `target` intervals over `span`.
fn tick_step(span: f64, target: f64) -> f64 {
    let raw = span / target;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let nice = if norm < 1.5 {
        1.0
    } else if norm < 3.5 {
        2.0
    } else if norm < 7.5 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Chart {
    pub fn new(title: &str, y_label: &str) -> Self {
        Self { title: title.to_owned(), y_label: y_label.to_owned(), series: Vec::new() }
    }

    /// Adds a column of the time series, scaled by `scale`.
    pub fn column(mut self, ts: &TimeSeries, name: &str, label: &str, scale: f64, max_points: usize) -> Self {
        let points: Vec<(f64, f64)> =
            ts.records.iter().zip(ts.column(name)).map(|(r, v)| (r.t_seconds, v * scale)).collect();
        self.series.push(Series { label: label.to_owned(), points: decimate(&points, max_points) });
        self
    }

    pub fn to_svg(&self) -> String {
        let all = self.series.iter().flat_map(|s| s.points.iter()).filter(|p| p.0.is_finite() && p.1.is_finite());
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y) in all {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if !(x0 < x1) {
            x1 = x0 + 1.0;
        }
        if !x0.is_finite() {
            (x0, x1) = (0.0, 1.0);
        }
        if !y0.is_finite() {
            (y0, y1) = (0.0, 1.0);
        }
        let pad = if y1 > y0 { 0.05 * (y1 - y0) } else { y0.abs().max(1.0) * 0.05 };
        let (y0, y1) = (y0 - pad, y1 + pad);

        let (ml, mr, mt, mb) = MARGIN;
        let pw = WIDTH - ml - mr;
        let ph = HEIGHT - mt - mb;
        let sx = |x: f64| ml + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| mt + (y1 - y) / (y1 - y0) * ph;

        let mut svg = String::new();
        let w = &mut svg;
        let _ = writeln!(
            w,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(w, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            w,
            r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
            WIDTH / 2.0,
            escape(&self.title)
        );

        let xs = tick_step(x1 - x0, 8.0);
        let mut t = (x0 / xs).ceil() * xs;
        while t <= x1 + 1e-9 * xs {
            let x = sx(t);
            let _ = writeln!(w, r##"<line x1="{x:.1}" y1="{mt}" x2="{x:.1}" y2="{:.1}" stroke="#e5e5e5"/>"##, mt + ph);
            let _ = writeln!(
                w,
                r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
                mt + ph + 16.0,
                fmt_tick(t, xs)
            );
            t += xs;
        }
        let ys = tick_step(y1 - y0, 6.0);
        let mut t = (y0 / ys).ceil() * ys;
        while t <= y1 + 1e-9 * ys {
            let y = sy(t);
            let _ = writeln!(w, r##"<line x1="{ml}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#e5e5e5"/>"##, ml + pw);
            let _ = writeln!(
                w,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
                ml - 6.0,
                y + 4.0,
                fmt_tick(t, ys)
            );
            t += ys;
        }
        let _ = writeln!(w, r#"<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
        let _ = writeln!(
            w,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">time [s]</text>"#,
            ml + pw / 2.0,
            HEIGHT - 10.0
        );
        let _ = writeln!(
            w,
            r#"<text transform="translate(16 {:.1}) rotate(-90)" text-anchor="middle">{}</text>"#,
            mt + ph / 2.0,
            escape(&self.y_label)
        );

        for (k, s) in self.series.iter().enumerate() {
            let colour = COLOURS[k % COLOURS.len()];
            let path: Vec<String> = s
                .points
                .iter()
                .filter(|p| p.0.is_finite() && p.1.is_finite())
                .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                .collect();
            let _ = writeln!(
                w,
                r#"<polyline fill="none" stroke="{colour}" stroke-width="1.2" points="{}"/>"#,
                path.join(" ")
            );
            let ly = mt + 14.0 + 16.0 * k as f64;
            let lx = ml + pw - 170.0;
            let _ = writeln!(
                w,
                r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{colour}" stroke-width="2"/>"#,
                lx + 20.0
            );
            let _ = writeln!(w, r#"<text x="{}" y="{}">{}</text>"#, lx + 26.0, ly + 4.0, escape(&s.label));
        }
        let _ = writeln!(w, "</svg>");
        svg
    }
}

fn fmt_tick(v: f64, step: f64) -> String {
    let decimals = if step >= 1.0 { 0 } else { (-step.log10()).ceil() as usize };
    format!("{v:.decimals$}")
}

/// One chart per signal family of a run.
pub fn charts(ts: &TimeSeries, max_points: usize) -> Vec<(&'static str, Chart)> {
    let n = max_points;
    vec![
        ("wind", Chart::new("Wind speed", "v_wind [m/s]").column(ts, "v_wind_mps", "wind speed", 1.0, n)),
        (
            "torque",
            Chart::new("Generator torque", "torque [kN·m]")
                .column(ts, "t_mech_newton_meters", "aerodynamic", 1e-3, n)
                .column(ts, "t_e_cmd_newton_meters", "commanded", 1e-3, n)
                .column(ts, "t_e_newton_meters", "electrical", 1e-3, n),
        ),
        (
            "powers",
            Chart::new("Power flows", "power [kW]")
                .column(ts, "p_wt_watts", "turbine", 1e-3, n)
                .column(ts, "p_grid_watts", "grid", 1e-3, n)
                .column(ts, "p_dispatch_watts", "dispatch", 1e-3, n)
                .column(ts, "p_batt_watts", "battery", 1e-3, n)
                .column(ts, "p_sc_watts", "supercapacitor", 1e-3, n),
        ),
        ("dc_link", Chart::new("DC-link voltage", "v_dc [V]").column(ts, "v_dc_volts", "v_dc", 1.0, n)),
        (
            "currents",
            Chart::new("Storage currents", "current [A]")
                .column(ts, "i_batt_amps", "battery", 1.0, n)
                .column(ts, "i_batt_ref_amps", "battery reference", 1.0, n)
                .column(ts, "i_sc_amps", "supercapacitor", 1.0, n),
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimation_keeps_extremes() {
        let mut pts: Vec<(f64, f64)> = (0..10_000).map(|i| (i as f64, 0.0)).collect();
        pts[4321].1 = 7.0;
        pts[8000].1 = -3.0;
        let d = decimate(&pts, 100);
        assert!(d.len() <= 100);
        assert!(d.contains(&(4321.0, 7.0)));
        assert!(d.contains(&(8000.0, -3.0)));
        assert!(d.windows(2).all(|w| w[0].0 < w[1].0));
    }

    #[test]
    fn ticks_are_round() {
        assert_eq!(tick_step(25.0, 8.0), 2.0);
        assert_eq!(tick_step(1.2, 6.0), 0.2);
        assert_eq!(tick_step(1000.0, 6.0), 200.0);
    }

    #[test]
    fn svg_is_well_formed_for_flat_data() {
        let mut c = Chart::new("flat <test>", "y");
        c.series.push(Series { label: "a".into(), points: vec![(0.0, 1.0), (1.0, 1.0)] });
        let svg = c.to_svg();
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("flat &lt;test&gt;"));
        assert!(!svg.contains("NaN"));
    }
}
