//! Presentation layer: rounding conventions, text/CSV/Markdown tables, and
//! deterministic SVG bar charts. All rounding happens here; the metrics keep
//! full precision.

use std::str::FromStr;

use crate::error::{Error, Result};

/// Round half-up to `decimals` places (values are non-negative).
pub fn round_half_up(value: f64, decimals: u32) -> f64 {
    let factor = 10f64.powi(decimals as i32);
    (value * factor + 0.5).floor() / factor
}

/// Risk display: two decimals, half-up.
pub fn fmt_risk(value: f64) -> String {
    format!("{:.2}", round_half_up(value, 2))
}

/// Probability display: two decimals, three when the value is below 0.01.
pub fn fmt_prob(value: f64) -> String {
    if value < 0.01 {
        format!("{:.3}", round_half_up(value, 3))
    } else {
        format!("{:.2}", round_half_up(value, 2))
    }
}

/// Output format selector for report-emitting commands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Table,
    Csv,
    Md,
    Svg,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<OutputFormat> {
        match s.to_ascii_lowercase().as_str() {
            "table" => Ok(OutputFormat::Table),
            "csv" => Ok(OutputFormat::Csv),
            "md" => Ok(OutputFormat::Md),
            "svg" => Ok(OutputFormat::Svg),
            other => Err(Error::InvalidFlag {
                what: "format".to_string(),
                value: other.to_string(),
                reason: "expected table, csv, md, or svg".to_string(),
            }),
        }
    }
}

fn csv_field(field: &str) -> String {
    if field.contains(',') || field.contains('"') || field.contains('\n') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// Comma-separated output with a header row.
pub fn csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    out.push_str(&header.iter().map(|h| csv_field(h)).collect::<Vec<_>>().join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&row.iter().map(|f| csv_field(f)).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    out
}

/// GitHub-style Markdown table.
pub fn markdown_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    out.push_str(&format!("| {} |\n", header.join(" | ")));
    out.push_str(&format!(
        "|{}\n",
        header.iter().map(|_| " --- |").collect::<String>()
    ));
    for row in rows {
        out.push_str(&format!("| {} |\n", row.join(" | ")));
    }
    out
}

/// Plain aligned text table.
pub fn text_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (i, field) in row.iter().enumerate() {
            if i < widths.len() {
                widths[i] = widths[i].max(field.len());
            }
        }
    }
    let render = |fields: &[String]| -> String {
        fields
            .iter()
            .enumerate()
            .map(|(i, f)| format!("{:<width$}", f, width = widths[i]))
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };
    let mut out = String::new();
    out.push_str(&render(&header.iter().map(|h| h.to_string()).collect::<Vec<_>>()));
    out.push('\n');
    out.push_str(&widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().join("  "));
    out.push('\n');
    for row in rows {
        out.push_str(&render(row));
        out.push('\n');
    }
    out
}

/// One labeled series of a grouped bar chart; `values` holds one bar per
/// group.
#[derive(Debug, Clone, PartialEq)]
pub struct BarSeries {
    pub label: String,
    pub values: Vec<f64>,
}

const CHART_WIDTH: f64 = 640.0;
const CHART_HEIGHT: f64 = 400.0;
const MARGIN_LEFT: f64 = 64.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 48.0;
const MARGIN_BOTTOM: f64 = 56.0;
const SERIES_COLORS: [&str; 6] = [
    "#4472c4", "#ed7d31", "#70ad47", "#ffc000", "#5b9bd5", "#a5a5a5",
];

/// Render a standalone SVG 1.1 grouped bar chart. Output bytes are a pure
/// function of the inputs.
pub fn render_bar_chart(
    groups: &[String],
    series: &[BarSeries],
    x_label: &str,
    y_label: &str,
) -> Result<String> {
    if series.is_empty() || groups.is_empty() {
        return Err(Error::Chart("no series to draw".to_string()));
    }
    for s in series {
        if s.values.len() != groups.len() {
            return Err(Error::Chart(format!(
                "series `{}` has {} values for {} groups",
                s.label,
                s.values.len(),
                groups.len()
            )));
        }
        for v in &s.values {
            if !v.is_finite() || *v < 0.0 {
                return Err(Error::Chart(format!(
                    "series `{}` contains a non-finite or negative value",
                    s.label
                )));
            }
        }
    }

    let max_value = series
        .iter()
        .flat_map(|s| s.values.iter().copied())
        .fold(0.0, f64::max);
    let scale_max = if max_value > 0.0 { max_value * 1.1 } else { 1.0 };

    let plot_w = CHART_WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = CHART_HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let group_w = plot_w / groups.len() as f64;
    let bar_w = (group_w * 0.8) / series.len() as f64;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{CHART_WIDTH}\" height=\"{CHART_HEIGHT}\" viewBox=\"0 0 {CHART_WIDTH} {CHART_HEIGHT}\">\n"
    ));
    svg.push_str("  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    // Horizontal grid lines and y-axis ticks.
    for tick in 0..=5 {
        let value = scale_max * tick as f64 / 5.0;
        let y = MARGIN_TOP + plot_h - (value / scale_max) * plot_h;
        svg.push_str(&format!(
            "  <line x1=\"{MARGIN_LEFT}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n",
            MARGIN_LEFT + plot_w
        ));
        svg.push_str(&format!(
            "  <text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{}</text>\n",
            MARGIN_LEFT - 6.0,
            y + 4.0,
            fmt_risk(value)
        ));
    }

    // Bars.
    for (gi, group) in groups.iter().enumerate() {
        let group_x = MARGIN_LEFT + gi as f64 * group_w + group_w * 0.1;
        for (si, s) in series.iter().enumerate() {
            let value = s.values[gi];
            let height = (value / scale_max) * plot_h;
            let x = group_x + si as f64 * bar_w;
            let y = MARGIN_TOP + plot_h - height;
            let color = SERIES_COLORS[si % SERIES_COLORS.len()];
            svg.push_str(&format!(
                "  <rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{bar_w:.2}\" height=\"{height:.2}\" fill=\"{color}\"/>\n"
            ));
        }
        svg.push_str(&format!(
            "  <text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{}</text>\n",
            MARGIN_LEFT + gi as f64 * group_w + group_w / 2.0,
            MARGIN_TOP + plot_h + 16.0,
            xml_escape(group)
        ));
    }

    // Axes.
    svg.push_str(&format!(
        "  <line x1=\"{MARGIN_LEFT}\" y1=\"{MARGIN_TOP}\" x2=\"{MARGIN_LEFT}\" y2=\"{:.2}\" stroke=\"black\" stroke-width=\"1\"/>\n",
        MARGIN_TOP + plot_h
    ));
    svg.push_str(&format!(
        "  <line x1=\"{MARGIN_LEFT}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"black\" stroke-width=\"1\"/>\n",
        MARGIN_TOP + plot_h,
        MARGIN_LEFT + plot_w,
        MARGIN_TOP + plot_h
    ));
    svg.push_str(&format!(
        "  <text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">{}</text>\n",
        MARGIN_LEFT + plot_w / 2.0,
        CHART_HEIGHT - 12.0,
        xml_escape(x_label)
    ));
    svg.push_str(&format!(
        "  <text x=\"16\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.2})\">{}</text>\n",
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0,
        xml_escape(y_label)
    ));

    // Legend.
    for (si, s) in series.iter().enumerate() {
        let x = MARGIN_LEFT + si as f64 * 140.0;
        let color = SERIES_COLORS[si % SERIES_COLORS.len()];
        svg.push_str(&format!(
            "  <rect x=\"{x:.2}\" y=\"16\" width=\"12\" height=\"12\" fill=\"{color}\"/>\n"
        ));
        svg.push_str(&format!(
            "  <text x=\"{:.2}\" y=\"26\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
            x + 16.0,
            xml_escape(&s.label)
        ));
    }

    svg.push_str("</svg>\n");
    Ok(svg)
}

fn xml_escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_is_half_up() {
        assert_eq!(fmt_risk(4.994), "4.99");
        assert_eq!(fmt_risk(4.995), "5.00");
        assert_eq!(fmt_risk(6.8894), "6.89");
        assert_eq!(fmt_risk(0.0), "0.00");
        assert_eq!(fmt_risk(2.301), "2.30");
    }

    #[test]
    fn probability_gets_three_decimals_when_small() {
        assert_eq!(fmt_prob(0.0064776), "0.006");
        assert_eq!(fmt_prob(0.1092), "0.11");
        assert_eq!(fmt_prob(0.28), "0.28");
        assert_eq!(fmt_prob(1.0), "1.00");
    }

    #[test]
    fn csv_quotes_fields_with_commas() {
        let out = csv(&["a", "b"], &[vec!["x,y".to_string(), "z".to_string()]]);
        assert_eq!(out, "a,b\n\"x,y\",z\n");
    }

    #[test]
    fn chart_is_deterministic() {
        let groups = vec!["S".to_string(), "T".to_string()];
        let series = vec![BarSeries {
            label: "risk".to_string(),
            values: vec![0.62, 1.23],
        }];
        let a = render_bar_chart(&groups, &series, "threat", "risk").unwrap();
        let b = render_bar_chart(&groups, &series, "threat", "risk").unwrap();
        assert_eq!(a, b);
        assert!(a.starts_with("<svg"));
        assert!(a.contains("</svg>"));
    }

    #[test]
    fn chart_with_six_groups_draws_six_bars() {
        let groups: Vec<String> = ["S", "T", "R", "I", "D", "E"].iter().map(|s| s.to_string()).collect();
        let series = vec![BarSeries {
            label: "app-servers".to_string(),
            values: vec![0.62, 1.23, 0.0, 0.46, 0.44, 2.26],
        }];
        let svg = render_bar_chart(&groups, &series, "threat", "risk").unwrap();
        let bar_count = svg.matches("<rect").count();
        // background + legend swatch + six bars
        assert_eq!(bar_count, 8);
    }

    #[test]
    fn single_bar_is_valid() {
        let svg = render_bar_chart(
            &["only".to_string()],
            &[BarSeries {
                label: "one".to_string(),
                values: vec![1.0],
            }],
            "x",
            "y",
        )
        .unwrap();
        assert!(svg.contains("only"));
    }

    #[test]
    fn nan_and_empty_inputs_error() {
        let err = render_bar_chart(
            &["g".to_string()],
            &[BarSeries {
                label: "bad".to_string(),
                values: vec![f64::NAN],
            }],
            "x",
            "y",
        )
        .unwrap_err();
        assert!(matches!(err, Error::Chart(_)));
        assert!(render_bar_chart(&[], &[], "x", "y").is_err());
    }

    #[test]
    fn tables_render() {
        let header = ["target", "risk"];
        let rows = vec![vec!["P-CSCF".to_string(), "2.30".to_string()]];
        let md = markdown_table(&header, &rows);
        assert!(md.contains("| P-CSCF | 2.30 |"));
        let txt = text_table(&header, &rows);
        assert!(txt.contains("P-CSCF"));
    }
}
