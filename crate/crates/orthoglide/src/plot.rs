//! Self-contained SVG line charts for the simulation time series.

use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::sim::{parse_csv, SimulationRow};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_LEFT: f64 = 78.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 42.0;
const MARGIN_BOTTOM: f64 = 52.0;

type Series = (&'static str, &'static str, &'static str, fn(&SimulationRow) -> f64);

/// Render the six standard charts (slider displacement and actuator power
/// per leg, versus time) from a simulation CSV into `out_dir`. Returns the
/// written paths.
pub fn render_plots(csv: &Path, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let text = std::fs::read_to_string(csv)?;
    let rows = parse_csv(&text)?;
    std::fs::create_dir_all(out_dir)?;

    let series: [Series; 6] = [
        ("plot_lamA.svg", "Slider displacement, leg A", "lambda_A [m]", |r| r.lambda.x),
        ("plot_lamB.svg", "Slider displacement, leg B", "lambda_B [m]", |r| r.lambda.y),
        ("plot_lamC.svg", "Slider displacement, leg C", "lambda_C [m]", |r| r.lambda.z),
        ("plot_pA.svg", "Actuator power, leg A", "p_A [W]", |r| r.power.x),
        ("plot_pB.svg", "Actuator power, leg B", "p_B [W]", |r| r.power.y),
        ("plot_pC.svg", "Actuator power, leg C", "p_C [W]", |r| r.power.z),
    ];

    let mut written = Vec::with_capacity(series.len());
    for (file, title, ylabel, pick) in series {
        let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.t, pick(r))).collect();
        let svg = line_chart(title, "t [s]", ylabel, &points);
        let path = out_dir.join(file);
        std::fs::write(&path, svg)?;
        written.push(path);
    }
    Ok(written)
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let a = v.abs();
    if (1e-3..1e4).contains(&a) {
        let s = format!("{v:.4}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        s.to_string()
    } else {
        format!("{v:.2e}")
    }
}

/// Build one SVG 1.1 document with axes, ticks and a polyline through the
/// data points.
pub fn line_chart(title: &str, xlabel: &str, ylabel: &str, points: &[(f64, f64)]) -> String {
    let (x0, x1) = span(points.iter().map(|p| p.0));
    let (mut y0, mut y1) = span(points.iter().map(|p| p.1));
    if (y1 - y0).abs() < 1e-15 {
        y0 -= 1.0;
        y1 += 1.0;
    } else {
        let pad = 0.05 * (y1 - y0);
        y0 -= pad;
        y1 += pad;
    }

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let map_x = |x: f64| MARGIN_LEFT + (x - x0) / (x1 - x0) * plot_w;
    let map_y = |y: f64| MARGIN_TOP + (y1 - y) / (y1 - y0) * plot_h;

    let mut svg = String::with_capacity(4096 + points.len() * 16);
    svg.push_str(&format!(
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">
<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>
<text x="{:.1}" y="24" font-family="sans-serif" font-size="16" text-anchor="middle">{title}</text>
"#,
        WIDTH / 2.0
    ));

    // frame
    svg.push_str(&format!(
        r#"<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black" stroke-width="1"/>
"#
    ));

    // ticks
    const TICKS: usize = 5;
    for i in 0..=TICKS {
        let fx = i as f64 / TICKS as f64;
        let xv = x0 + fx * (x1 - x0);
        let px = map_x(xv);
        svg.push_str(&format!(
            r#"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/>
<text x="{px:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="middle">{}</text>
"#,
            MARGIN_TOP + plot_h,
            MARGIN_TOP + plot_h + 5.0,
            MARGIN_TOP + plot_h + 19.0,
            fmt_tick(xv)
        ));
        let yv = y0 + fx * (y1 - y0);
        let py = map_y(yv);
        svg.push_str(&format!(
            r#"<line x1="{:.2}" y1="{py:.2}" x2="{MARGIN_LEFT}" y2="{py:.2}" stroke="black"/>
<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="end">{}</text>
"#,
            MARGIN_LEFT - 5.0,
            MARGIN_LEFT - 8.0,
            py + 4.0,
            fmt_tick(yv)
        ));
    }

    // axis labels
    svg.push_str(&format!(
        r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="13" text-anchor="middle">{xlabel}</text>
<text x="16" y="{:.1}" font-family="sans-serif" font-size="13" text-anchor="middle" transform="rotate(-90 16 {:.1})">{ylabel}</text>
"#,
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 12.0,
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0
    ));

    // data polyline
    let mut path = String::with_capacity(points.len() * 16);
    for (i, (x, y)) in points.iter().enumerate() {
        path.push_str(if i == 0 { "" } else { " " });
        path.push_str(&format!("{:.2},{:.2}", map_x(*x), map_y(*y)));
    }
    svg.push_str(&format!(
        r#"<polyline points="{path}" fill="none" stroke="steelblue" stroke-width="1.6"/>
</svg>
"#
    ));
    svg
}

fn span(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() || !hi.is_finite() {
        (0.0, 1.0)
    } else {
        (lo, hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::RobotModel;
    use crate::sim::{emit_csv, simulate};
    use crate::trajectory::CosineTrajectory;

    #[test]
    fn renders_six_nonempty_files() {
        let dir = std::env::temp_dir().join(format!("orthoglide_plot_{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let csv = dir.join("run.csv");
        let rows = simulate(&RobotModel::default(), &CosineTrajectory::default(), 2.0, 41)
            .unwrap();
        emit_csv(&rows, &csv).unwrap();

        let files = render_plots(&csv, &dir).unwrap();
        assert_eq!(files.len(), 6);
        for f in &files {
            let data = std::fs::read_to_string(f).unwrap();
            assert!(data.starts_with("<svg"));
            assert!(data.contains("polyline"));
            assert!(data.len() > 500);
        }

        // plotted data: rising displacement on leg A, powers starting at rest
        assert!(rows.windows(2).all(|w| w[1].lambda.x >= w[0].lambda.x));
        assert!(rows.last().unwrap().lambda.x > rows[0].lambda.x);
        assert_eq!(rows[0].power, crate::math::Vec3::ZERO);

        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn flat_series_still_renders() {
        let svg = line_chart("flat", "t [s]", "v", &[(0.0, 1.0), (1.0, 1.0)]);
        assert!(svg.contains("polyline"));
    }

    #[test]
    fn missing_csv_is_an_io_error() {
        let err = render_plots(Path::new("/nonexistent/run.csv"), Path::new("/tmp")).unwrap_err();
        assert!(matches!(err, crate::error::Error::Io(_)));
    }
}
