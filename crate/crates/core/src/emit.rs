// SPDX-License-Identifier: Apache-2.0

//! CSV and SVG writers. Output is locale-free and byte-stable: floats are
//! written with 17 significant digits so they round-trip.

use std::fmt::Write as _;

use crate::constants::Figure1Row;

/// `x` with 17 significant digits in scientific notation.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// A header line followed by one line per row.
pub fn csv<R, I>(header: &[&str], rows: I) -> String
where
    I: IntoIterator<Item = R>,
    R: AsRef<[f64]>,
{
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.as_ref().iter().map(|&x| fmt_f64(x)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn figure1_csv(rows: &[Figure1Row]) -> String {
    csv(
        &["p", "phi", "psi"],
        rows.iter().map(|r| [r.p, r.phi, r.psi]),
    )
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 56.0;

/// A line plot of `φ` and `ψ` against `p` on a logarithmic `p`-axis. The
/// vertical axis is logarithmic too, since `φ` blows up as `p → 1+`.
pub fn figure1_svg(rows: &[Figure1Row]) -> String {
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    if rows.is_empty() {
        svg.push_str("</svg>\n");
        return svg;
    }
    let lx: Vec<f64> = rows.iter().map(|r| r.p.ln()).collect();
    let (x0, x1) = (lx[0], lx[lx.len() - 1]);
    let ys = rows.iter().flat_map(|r| [r.phi.ln(), r.psi.ln()]);
    let (y0, y1) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), y| {
        (lo.min(y), hi.max(y))
    });
    let span = |lo: f64, hi: f64| if hi > lo { hi - lo } else { 1.0 };
    let px = |x: f64| MARGIN + (x - x0) / span(x0, x1) * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - (y - y0) / span(y0, y1) * (HEIGHT - 2.0 * MARGIN);

    let _ = writeln!(
        svg,
        "<path d=\"M{m} {b} H{r} M{m} {b} V{m}\" stroke=\"black\" fill=\"none\"/>",
        m = MARGIN,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN
    );
    let decades = (x0 / std::f64::consts::LN_10).ceil() as i32
        ..=(x1 / std::f64::consts::LN_10).floor() as i32;
    for d in decades {
        let x = px(d as f64 * std::f64::consts::LN_10);
        let _ = writeln!(
            svg,
            "<line x1=\"{x:.2}\" y1=\"{b}\" x2=\"{x:.2}\" y2=\"{t}\" stroke=\"black\"/><text x=\"{x:.2}\" y=\"{l}\" font-size=\"12\" text-anchor=\"middle\">1e{d}</text>",
            b = HEIGHT - MARGIN,
            t = HEIGHT - MARGIN + 5.0,
            l = HEIGHT - MARGIN + 20.0
        );
    }
    for (label, color, pick) in [
        (
            "phi",
            "#c0392b",
            (|r: &Figure1Row| r.phi) as fn(&Figure1Row) -> f64,
        ),
        ("psi", "#2471a3", |r: &Figure1Row| r.psi),
    ] {
        let mut d = String::new();
        for (i, (row, &x)) in rows.iter().zip(&lx).enumerate() {
            let _ = write!(
                d,
                "{}{:.2} {:.2}",
                if i == 0 { "M" } else { " L" },
                px(x),
                py(pick(row).ln())
            );
        }
        let _ = writeln!(svg, "<path d=\"{d}\" stroke=\"{color}\" fill=\"none\" stroke-width=\"1.5\"><title>{label}</title></path>");
    }
    let _ = writeln!(
        svg,
        "<text x=\"{x}\" y=\"{y}\" font-size=\"13\" text-anchor=\"middle\">p (log scale)</text>",
        x = WIDTH / 2.0,
        y = HEIGHT - 12.0
    );
    let _ = writeln!(
        svg,
        "<text x=\"{x}\" y=\"24\" font-size=\"13\" fill=\"#c0392b\">phi(p)</text><text x=\"{x2}\" y=\"24\" font-size=\"13\" fill=\"#2471a3\">psi(p)</text>",
        x = WIDTH - MARGIN - 110.0,
        x2 = WIDTH - MARGIN - 50.0
    );
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::figure1_data;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, 6.75, -2.5e-300, 1e300] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f64(2.0), "2.0000000000000000e0");
    }

    #[test]
    fn csv_layout() {
        let out = csv(&["a", "b"], [[1.0, 2.0], [3.0, 4.0]]);
        assert_eq!(out.lines().count(), 3);
        assert!(out.starts_with("a,b\n"));
    }

    #[test]
    fn figure_outputs_are_deterministic() {
        let rows = figure1_data(1.1, 10.0, 50).unwrap();
        assert_eq!(figure1_svg(&rows), figure1_svg(&rows));
        let text = figure1_csv(&rows);
        assert_eq!(text.lines().count(), 51);
        assert!(figure1_svg(&rows).contains("<title>phi</title>"));
    }
}
