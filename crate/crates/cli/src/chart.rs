//! A small grouped-bar SVG rendering of a result table: one group per
//! scenario, one bar per method.

use npeb_core::sim::MethodSummary;

use crate::formats::ScenarioLabel;

const PALETTE: [&str; 5] = ["#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3"];

pub fn result_chart_svg(rows: &[(ScenarioLabel, Vec<MethodSummary>)]) -> String {
    let groups = rows.len().max(1);
    let bars_per_group = rows.first().map(|(_, s)| s.len()).unwrap_or(1).max(1);
    let bar_w = 18.0;
    let group_gap = 30.0;
    let group_w = bars_per_group as f64 * bar_w + group_gap;
    let plot_h = 260.0;
    let margin_left = 50.0;
    let margin_top = 20.0;
    let width = margin_left + groups as f64 * group_w + 20.0;
    let height = margin_top + plot_h + 70.0;

    let max_rate = rows
        .iter()
        .flat_map(|(_, s)| s.iter().map(|m| m.mean_rate))
        .fold(0.05f64, f64::max);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" \
         font-family=\"sans-serif\" font-size=\"10\">\n"
    ));
    // Axis and gridlines.
    for tick in 0..=5 {
        let frac = tick as f64 / 5.0;
        let y = margin_top + plot_h * (1.0 - frac);
        svg.push_str(&format!(
            "<line x1=\"{margin_left}\" y1=\"{y:.1}\" x2=\"{:.1}\" y2=\"{y:.1}\" stroke=\"#ddd\"/>\n",
            width - 10.0
        ));
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{:.2}</text>\n",
            margin_left - 4.0,
            y + 3.0,
            frac * max_rate
        ));
    }
    for (gi, (label, summaries)) in rows.iter().enumerate() {
        let gx = margin_left + gi as f64 * group_w;
        for (bi, summary) in summaries.iter().enumerate() {
            let x = gx + bi as f64 * bar_w;
            let h = (summary.mean_rate / max_rate).clamp(0.0, 1.0) * plot_h;
            let y = margin_top + plot_h - h;
            let color = PALETTE[bi % PALETTE.len()];
            svg.push_str(&format!(
                "<rect x=\"{x:.1}\" y=\"{y:.1}\" width=\"{:.1}\" height=\"{h:.1}\" fill=\"{color}\">\
                 <title>{}: {:.4}</title></rect>\n",
                bar_w - 3.0,
                summary.method.name(),
                summary.mean_rate
            ));
        }
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" transform=\"rotate(30 {:.1} {:.1})\">{}</text>\n",
            gx + group_w / 2.0 - group_gap / 2.0,
            margin_top + plot_h + 14.0,
            gx + group_w / 2.0 - group_gap / 2.0,
            margin_top + plot_h + 14.0,
            scenario_caption(label)
        ));
    }
    // Legend.
    if let Some((_, first)) = rows.first() {
        for (bi, summary) in first.iter().enumerate() {
            let x = margin_left + bi as f64 * 90.0;
            let y = height - 14.0;
            let color = PALETTE[bi % PALETTE.len()];
            svg.push_str(&format!(
                "<rect x=\"{x:.1}\" y=\"{:.1}\" width=\"10\" height=\"10\" fill=\"{color}\"/>\n\
                 <text x=\"{:.1}\" y=\"{y:.1}\">{}</text>\n",
                y - 9.0,
                x + 14.0,
                summary.method.name()
            ));
        }
    }
    svg.push_str("</svg>\n");
    svg
}

fn scenario_caption(label: &ScenarioLabel) -> String {
    if label.mu1 == "fixed_vector" {
        format!("N={} {}", label.n_features, label.noise)
    } else {
        format!("N={} ({},{})", label.n_features, label.m, label.delta)
    }
}
