//! Static SVG line plots of CSV columns.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use plotters::prelude::*;

/// Which columns to draw. Rows are grouped into one series per value of the
/// `algorithm` column when the table has one.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub x: String,
    pub y: String,
    pub log_x: bool,
    pub title: String,
}

const COLORS: [RGBColor; 6] = [
    RGBColor(31, 119, 180),
    RGBColor(214, 39, 40),
    RGBColor(44, 160, 44),
    RGBColor(148, 103, 189),
    RGBColor(255, 127, 14),
    RGBColor(23, 190, 207),
];

type Series = BTreeMap<String, Vec<(f64, f64)>>;

fn load<R: Read>(input: R, spec: &PlotSpec) -> anyhow::Result<Series> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(input);
    let headers = reader.headers()?.clone();
    let column = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| {
            anyhow::anyhow!(
                "no column {name:?}; have {}",
                headers.iter().collect::<Vec<_>>().join(",")
            )
        })
    };
    let (xi, yi) = (column(&spec.x)?, column(&spec.y)?);
    let group = headers.iter().position(|h| h == "algorithm");
    let mut series = Series::new();
    for record in reader.records() {
        let record = record?;
        let key = group.map_or_else(|| spec.y.clone(), |g| record[g].to_string());
        let x: f64 = record[xi].parse()?;
        let y: f64 = record[yi].parse()?;
        series.entry(key).or_default().push((x, y));
    }
    Ok(series)
}

/// Renders `spec` from a CSV table to an SVG file. On a log x axis a zero
/// abscissa is drawn one decade below the smallest positive one.
pub fn plot_table<R: Read>(input: R, spec: &PlotSpec, out: &Path) -> anyhow::Result<()> {
    let mut series = load(input, spec)?;
    if spec.log_x {
        let min_pos = series
            .values()
            .flatten()
            .map(|p| p.0)
            .filter(|x| *x > 0.0)
            .fold(f64::INFINITY, f64::min);
        let floor = if min_pos.is_finite() {
            min_pos / 10.0
        } else {
            1.0
        };
        for points in series.values_mut() {
            for p in points.iter_mut() {
                if p.0 <= 0.0 {
                    p.0 = floor;
                }
            }
        }
    }
    for points in series.values_mut() {
        points.retain(|(x, y)| x.is_finite() && y.is_finite());
    }
    let all: Vec<(f64, f64)> = series.values().flatten().copied().collect();
    if all.is_empty() {
        anyhow::bail!("nothing to plot: no finite ({}, {}) pairs", spec.x, spec.y);
    }
    let (mut x0, mut x1, mut y0, mut y1) = all.iter().fold(
        (
            f64::INFINITY,
            f64::NEG_INFINITY,
            f64::INFINITY,
            f64::NEG_INFINITY,
        ),
        |(a, b, c, d), (x, y)| (a.min(*x), b.max(*x), c.min(*y), d.max(*y)),
    );
    if x1 <= x0 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    let pad = if y1 > y0 { 0.05 * (y1 - y0) } else { 0.5 };
    y0 -= pad;
    y1 += pad;

    let root = SVGBackend::new(out, (800, 500)).into_drawing_area();
    root.fill(&WHITE)?;
    let mut builder = ChartBuilder::on(&root);
    builder
        .caption(&spec.title, ("sans-serif", 20))
        .margin(15)
        .x_label_area_size(40)
        .y_label_area_size(60);

    macro_rules! draw {
        ($chart:expr) => {{
            let mut chart = $chart;
            chart
                .configure_mesh()
                .x_desc(spec.x.as_str())
                .y_desc(spec.y.as_str())
                .draw()?;
            for (i, (name, points)) in series.iter().enumerate() {
                let color = COLORS[i % COLORS.len()];
                chart
                    .draw_series(LineSeries::new(
                        points.iter().copied(),
                        color.stroke_width(2),
                    ))?
                    .label(name.as_str())
                    .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color));
            }
            chart
                .configure_series_labels()
                .background_style(WHITE.mix(0.8))
                .border_style(BLACK)
                .draw()?;
        }};
    }
    if spec.log_x {
        draw!(builder.build_cartesian_2d((x0..x1).log_scale(), y0..y1)?);
    } else {
        draw!(builder.build_cartesian_2d(x0..x1, y0..y1)?);
    }
    root.present()?;
    Ok(())
}
