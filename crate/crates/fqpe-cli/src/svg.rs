//! Self-contained SVG output: cost heatmaps and line plots.

use fqpe::sweep::LandscapeGrid;
use std::fmt::Write;

const VIRIDIS: [(f64, f64, f64); 5] =
    [(68.0, 1.0, 84.0), (59.0, 82.0, 139.0), (33.0, 145.0, 140.0), (94.0, 201.0, 98.0), (253.0, 231.0, 37.0)];

fn color(t: f64) -> String {
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.0 };
    let s = t * (VIRIDIS.len() - 1) as f64;
    let i = (s.floor() as usize).min(VIRIDIS.len() - 2);
    let f = s - i as f64;
    let (a, b) = (VIRIDIS[i], VIRIDIS[i + 1]);
    let mix = |x: f64, y: f64| (x + (y - x) * f).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

pub fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn header(w: f64, h: f64) -> String {
    format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" \
         width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\" font-family=\"sans-serif\" font-size=\"12\">\n\
         <rect x=\"0\" y=\"0\" width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n"
    )
}

fn num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let a = x.abs();
    if (1e-2..1e4).contains(&a) {
        let s = format!("{x:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{x:.2e}")
    }
}

/// Heatmap of relative cost over (bias, width) in gap units, log color scale.
pub fn heatmap(grid: &LandscapeGrid, title: &str) -> String {
    let (nb, nw) = (grid.bias.len(), grid.width.len());
    let (left, top, pw, ph) = (70.0, 40.0, 600.0, 400.0);
    let (cw, ch) = (pw / nb as f64, ph / nw as f64);
    let logs: Vec<Option<f64>> =
        grid.cells.iter().map(|c| c.relative_cost.filter(|v| *v > 0.0 && v.is_finite()).map(f64::log10)).collect();
    let lo = logs.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    let hi = logs.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
    let flat = !(hi > lo);
    let t = |v: f64| if flat { 0.5 } else { (v - lo) / (hi - lo) };

    let mut s = header(left + pw + 150.0, top + ph + 60.0);
    let _ = writeln!(s, "<text x=\"{}\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">{}</text>", left + pw / 2.0, escape(title));
    s.push_str("<g shape-rendering=\"crispEdges\">\n");
    for iw in 0..nw {
        // widths increase upwards
        let y = top + ph - (iw + 1) as f64 * ch;
        for ib in 0..nb {
            let x = left + ib as f64 * cw;
            let fill = match logs[iw * nb + ib] {
                Some(v) => color(t(v)),
                None => "#bdbdbd".into(),
            };
            let _ = writeln!(s, "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{fill}\"/>", cw + 0.01, ch + 0.01);
        }
    }
    s.push_str("</g>\n");
    let _ = writeln!(s, "<rect x=\"{left}\" y=\"{top}\" width=\"{pw}\" height=\"{ph}\" fill=\"none\" stroke=\"black\"/>");

    for idx in ticks(nb) {
        let x = left + (idx as f64 + 0.5) * cw;
        let _ = writeln!(
            s,
            "<text x=\"{x:.2}\" y=\"{}\" text-anchor=\"middle\" font-size=\"10\">{}</text>",
            top + ph + 14.0,
            num(grid.bias[idx])
        );
    }
    for idx in ticks(nw) {
        let y = top + ph - (idx as f64 + 0.5) * ch;
        let _ = writeln!(s, "<text x=\"{}\" y=\"{:.2}\" text-anchor=\"end\" font-size=\"10\">{}</text>", left - 4.0, y + 3.0, num(grid.width[idx]));
    }
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">bias (tilde E0 - E0) / gap</text>",
        left + pw / 2.0,
        top + ph + 34.0
    );
    let _ = writeln!(
        s,
        "<text x=\"16\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">width (tilde E1 - tilde E0) / gap</text>",
        top + ph / 2.0,
        top + ph / 2.0
    );

    if let Some((i, c)) = grid
        .cells
        .iter()
        .enumerate()
        .filter(|(_, c)| c.relative_cost.is_some())
        .min_by(|a, b| a.1.relative_cost.unwrap().total_cmp(&b.1.relative_cost.unwrap()))
    {
        let (ib, iw) = (i % nb, i / nb);
        let cx = left + (ib as f64 + 0.5) * cw;
        let cy = top + ph - (iw as f64 + 0.5) * ch;
        let _ = writeln!(s, "<circle cx=\"{cx:.2}\" cy=\"{cy:.2}\" r=\"{:.2}\" fill=\"none\" stroke=\"red\" stroke-width=\"2\"/>", cw.min(ch).max(6.0));
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" fill=\"red\" id=\"minimum\">min {} at bias {}, width {}</text>",
            left,
            top - 6.0,
            num(c.relative_cost.unwrap()),
            num(c.bias),
            num(c.width)
        );
    }

    let lx = left + pw + 30.0;
    if lo.is_finite() && flat {
        let _ = writeln!(s, "<g id=\"legend\"><rect x=\"{lx}\" y=\"{top}\" width=\"20\" height=\"20\" fill=\"{}\"/>", color(0.5));
        let _ = writeln!(s, "<text x=\"{}\" y=\"{}\">{}</text></g>", lx + 26.0, top + 14.0, num(10f64.powf(lo)));
    } else if lo.is_finite() {
        s.push_str("<g id=\"legend\">\n");
        let steps = 50;
        let bh = ph / steps as f64;
        for k in 0..steps {
            let y = top + ph - (k + 1) as f64 * bh;
            let _ = writeln!(
                s,
                "<rect x=\"{lx}\" y=\"{y:.2}\" width=\"20\" height=\"{:.2}\" fill=\"{}\"/>",
                bh + 0.01,
                color((k as f64 + 0.5) / steps as f64)
            );
        }
        for k in 0..=4 {
            let v = lo + (hi - lo) * k as f64 / 4.0;
            let y = top + ph - ph * k as f64 / 4.0;
            let _ = writeln!(s, "<text x=\"{}\" y=\"{:.2}\" font-size=\"10\">{}</text>", lx + 24.0, y + 3.0, num(10f64.powf(v)));
        }
        s.push_str("</g>\n");
    }
    if logs.iter().any(|v| v.is_none()) {
        let y = top + ph + 20.0;
        let _ = writeln!(s, "<rect x=\"{lx}\" y=\"{y}\" width=\"12\" height=\"12\" fill=\"#bdbdbd\"/>");
        let _ = writeln!(s, "<text x=\"{}\" y=\"{}\" font-size=\"10\">no cost</text>", lx + 16.0, y + 10.0);
    }
    s.push_str("</svg>\n");
    s
}

fn ticks(n: usize) -> Vec<usize> {
    if n <= 1 {
        return (0..n).collect();
    }
    let k = 6.min(n);
    let mut v: Vec<usize> = (0..k).map(|i| (i * (n - 1) + (k - 1) / 2) / (k - 1)).collect();
    v.dedup();
    v
}

pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

pub struct LinePlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_y: bool,
    pub series: Vec<Series>,
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Line plot; points that are not finite (or not positive on a log axis) are dropped.
pub fn lines(plot: &LinePlot) -> String {
    let (left, top, pw, ph) = (80.0, 40.0, 560.0, 360.0);
    let ty = |y: f64| if plot.log_y { y.log10() } else { y };
    let keep = |&(x, y): &(f64, f64)| x.is_finite() && y.is_finite() && (!plot.log_y || y > 0.0);
    let pts: Vec<(f64, f64)> = plot.series.iter().flat_map(|s| s.points.iter().copied().filter(keep)).map(|(x, y)| (x, ty(y))).collect();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if pts.is_empty() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if !(x1 > x0) {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if !(y1 > y0) {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let px = |x: f64| left + (x - x0) / (x1 - x0) * pw;
    let py = |y: f64| top + ph - (y - y0) / (y1 - y0) * ph;

    let mut s = header(left + pw + 170.0, top + ph + 60.0);
    let _ = writeln!(s, "<text x=\"{}\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">{}</text>", left + pw / 2.0, escape(&plot.title));
    let _ = writeln!(s, "<rect x=\"{left}\" y=\"{top}\" width=\"{pw}\" height=\"{ph}\" fill=\"none\" stroke=\"black\"/>");
    for k in 0..=4 {
        let x = x0 + (x1 - x0) * k as f64 / 4.0;
        let _ = writeln!(s, "<text x=\"{:.2}\" y=\"{}\" text-anchor=\"middle\" font-size=\"10\">{}</text>", px(x), top + ph + 14.0, num(x));
        let y = y0 + (y1 - y0) * k as f64 / 4.0;
        let label = if plot.log_y { num(10f64.powf(y)) } else { num(y) };
        let _ = writeln!(s, "<text x=\"{}\" y=\"{:.2}\" text-anchor=\"end\" font-size=\"10\">{label}</text>", left - 4.0, py(y) + 3.0);
    }
    let _ = writeln!(s, "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>", left + pw / 2.0, top + ph + 34.0, escape(&plot.x_label));
    let _ = writeln!(
        s,
        "<text x=\"16\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{}</text>",
        top + ph / 2.0,
        top + ph / 2.0,
        escape(&plot.y_label)
    );
    for (k, ser) in plot.series.iter().enumerate() {
        let c = PALETTE[k % PALETTE.len()];
        let path: Vec<String> = ser.points.iter().copied().filter(keep).map(|(x, y)| format!("{:.2},{:.2}", px(x), py(ty(y)))).collect();
        if path.len() > 1 {
            let _ = writeln!(s, "<polyline fill=\"none\" stroke=\"{c}\" stroke-width=\"1.5\" points=\"{}\"/>", path.join(" "));
        }
        if path.len() <= 60 {
            for p in &path {
                let (x, y) = p.split_once(',').unwrap();
                let _ = writeln!(s, "<circle cx=\"{x}\" cy=\"{y}\" r=\"2.5\" fill=\"{c}\"/>");
            }
        }
        let ly = top + 10.0 + 18.0 * k as f64;
        let lx = left + pw + 14.0;
        let _ = writeln!(s, "<line x1=\"{lx}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{c}\" stroke-width=\"2\"/>", lx + 20.0);
        let _ = writeln!(s, "<text x=\"{}\" y=\"{}\" font-size=\"11\">{}</text>", lx + 26.0, ly + 4.0, escape(&ser.name));
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use fqpe::filter::Basis;
    use fqpe::sweep::LandscapeCell;

    fn grid(costs: &[Option<f64>], nb: usize) -> LandscapeGrid {
        let nw = costs.len() / nb;
        let cells = costs
            .iter()
            .enumerate()
            .map(|(i, c)| LandscapeCell {
                bias: (i % nb) as f64,
                width: 1.0 + (i / nb) as f64,
                relative_cost: *c,
                order: c.map(|_| 10),
                p_f: *c,
                overlap: *c,
                invalid: c.is_none().then(|| "x".to_string()),
            })
            .collect();
        LandscapeGrid {
            eps_over_gap: 1e-3,
            basis: Basis::Trig,
            bias: (0..nb).map(|i| i as f64).collect(),
            width: (0..nw).map(|i| 1.0 + i as f64).collect(),
            cells,
        }
    }

    #[test]
    fn two_by_two_is_well_formed() {
        let s = heatmap(&grid(&[Some(0.1), Some(1.0), None, Some(10.0)], 2), "t <&>");
        let doc = roxmltree::Document::parse(&s).unwrap();
        assert_eq!(doc.root_element().tag_name().name(), "svg");
        assert!(s.contains("min 0.1 at bias 0, width 1"));
        assert!(s.contains("no cost"));
    }

    #[test]
    fn equal_values_give_single_swatch() {
        let s = heatmap(&grid(&[Some(0.5); 4], 2), "flat");
        roxmltree::Document::parse(&s).unwrap();
        let legend = &s[s.find("id=\"legend\"").unwrap()..];
        let legend = &legend[..legend.find("</g>").unwrap()];
        assert_eq!(legend.matches("<rect").count(), 1);
    }

    #[test]
    fn full_default_grid_is_small() {
        let costs: Vec<Option<f64>> = (0..61 * 41).map(|i| Some(1e-3 * (1.0 + i as f64))).collect();
        let s = heatmap(&grid(&costs, 61), "full");
        assert!(s.len() < 2_000_000, "{}", s.len());
        roxmltree::Document::parse(&s).unwrap();
    }

    #[test]
    fn line_plot_drops_nonpositive_on_log_axis() {
        let p = LinePlot {
            title: "x".into(),
            x_label: "N".into(),
            y_label: "cost".into(),
            log_y: true,
            series: vec![Series { name: "a".into(), points: vec![(1.0, 1.0), (2.0, 0.0), (3.0, 1e-3), (4.0, f64::NAN)] }],
        };
        let s = lines(&p);
        roxmltree::Document::parse(&s).unwrap();
        assert_eq!(s.matches("<circle").count(), 2);
    }

    #[test]
    fn colormap_endpoints() {
        assert_eq!(color(0.0), "#440154");
        assert_eq!(color(1.0), "#fde725");
    }
}
