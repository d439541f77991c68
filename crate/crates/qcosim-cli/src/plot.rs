//! Minimal static SVG rendering of result tables. Convenience output only;
//! CSV/JSON carry the data of record.

use qcosim_core::analyses::Table;

const W: f64 = 720.0;
const H: f64 = 480.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn finite_range(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in vals.filter(|v| v.is_finite()) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

/// Line plot: first column is x, remaining columns are traces.
pub fn render_lines(table: &Table) -> String {
    let ncols = table.columns.len();
    let (x0, x1) = finite_range(table.rows.iter().map(|r| r[0]));
    let (y0, y1) = finite_range(table.rows.iter().flat_map(|r| r[1..].iter().copied()));
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (W - 2.0 * MARGIN);
    let sy = |y: f64| H - MARGIN - (y - y0) / (y1 - y0) * (H - 2.0 * MARGIN);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n\
         <rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n\
         <rect x=\"{MARGIN}\" y=\"{MARGIN}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#999\"/>\n",
        W - 2.0 * MARGIN,
        H - 2.0 * MARGIN
    ));
    for (k, name) in table.columns.iter().enumerate().skip(1).take(COLORS.len()) {
        let color = COLORS[(k - 1) % COLORS.len()];
        let mut path = String::new();
        let mut pen_up = true;
        for r in &table.rows {
            let (x, y) = (r[0], r[k.min(ncols - 1)]);
            if !x.is_finite() || !y.is_finite() {
                pen_up = true;
                continue;
            }
            path.push_str(if pen_up { "M" } else { "L" });
            path.push_str(&format!("{:.2},{:.2} ", sx(x), sy(y)));
            pen_up = false;
        }
        svg.push_str(&format!(
            "<path d=\"{path}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.3\"/>\n\
             <text x=\"{}\" y=\"{}\" font-size=\"12\" fill=\"{color}\">{name}</text>\n",
            W - MARGIN + 4.0,
            MARGIN + 14.0 * k as f64
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">{}</text>\n\
         <text x=\"12\" y=\"{}\" font-size=\"12\" transform=\"rotate(-90 12 {})\">{}</text>\n\
         <text x=\"{MARGIN}\" y=\"{}\" font-size=\"10\">{:.4e}</text>\n\
         <text x=\"{}\" y=\"{}\" font-size=\"10\" text-anchor=\"end\">{:.4e}</text>\n\
         <text x=\"{}\" y=\"{MARGIN}\" font-size=\"10\">{:.4e}</text>\n\
         <text x=\"{}\" y=\"{}\" font-size=\"10\">{:.4e}</text>\n",
        W / 2.0,
        H - 18.0,
        table.columns[0],
        H / 2.0,
        H / 2.0,
        table.columns.get(1).cloned().unwrap_or_default(),
        H - MARGIN + 14.0,
        x0,
        W - MARGIN,
        H - MARGIN + 14.0,
        x1,
        8.0,
        y1,
        8.0,
        H - MARGIN,
        y0,
    ));
    svg.push_str("</svg>\n");
    svg
}

/// Heatmap of the last column over the first two (gridded) columns.
pub fn render_heatmap(table: &Table) -> String {
    let mut xs: Vec<f64> = table.rows.iter().map(|r| r[0]).collect();
    let mut ys: Vec<f64> = table.rows.iter().map(|r| r[1]).collect();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs.dedup();
    ys.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ys.dedup();
    let vcol = table.columns.len() - 1;
    let (v0, v1) = finite_range(table.rows.iter().map(|r| r[vcol]));
    let cw = (W - 2.0 * MARGIN) / xs.len() as f64;
    let ch = (H - 2.0 * MARGIN) / ys.len() as f64;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n\
         <rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n"
    ));
    for r in &table.rows {
        let v = r[vcol];
        if !v.is_finite() {
            continue;
        }
        let xi = xs.iter().position(|&x| x == r[0]).unwrap_or(0);
        let yi = ys.iter().position(|&y| y == r[1]).unwrap_or(0);
        let t = ((v - v0) / (v1 - v0)).clamp(0.0, 1.0);
        let red = (255.0 * t) as u8;
        let blue = (255.0 * (1.0 - t)) as u8;
        let green = (120.0 * (1.0 - (2.0 * t - 1.0).abs())) as u8;
        svg.push_str(&format!(
            "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"rgb({red},{green},{blue})\"/>\n",
            MARGIN + xi as f64 * cw,
            H - MARGIN - (yi as f64 + 1.0) * ch,
            cw + 0.5,
            ch + 0.5,
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">{}</text>\n\
         <text x=\"12\" y=\"{}\" font-size=\"12\" transform=\"rotate(-90 12 {})\">{}</text>\n\
         <text x=\"{}\" y=\"16\" font-size=\"11\">{}: {:.3e} (blue) .. {:.3e} (red)</text>\n",
        W / 2.0,
        H - 18.0,
        table.columns[0],
        H / 2.0,
        H / 2.0,
        table.columns[1],
        MARGIN,
        table.columns[vcol],
        v0,
        v1,
    ));
    svg.push_str("</svg>\n");
    svg
}

/// Picks a representation: tables whose first two columns look like a 2-D
/// grid (few unique values each, many rows) render as heatmaps, everything
/// else as lines.
pub fn render_auto(table: &Table) -> String {
    if table.columns.len() >= 3 && table.rows.len() >= 16 {
        let uniq = |k: usize| {
            let mut v: Vec<f64> = table.rows.iter().map(|r| r[k]).collect();
            v.sort_by(|a, b| a.partial_cmp(b).unwrap());
            v.dedup();
            v.len()
        };
        let (ux, uy) = (uniq(0), uniq(1));
        if ux > 1 && uy > 1 && ux * uy == table.rows.len() {
            return render_heatmap(table);
        }
    }
    render_lines(table)
}
