//! Plain static SVG charts. Decorative only: the CSV files carry the data.

use std::fmt::Write;

use gender_trends::cohort::CohortObservation;
use gender_trends::trends::{ShareBasis, TrendReport};

const W: f64 = 720.0;
const H: f64 = 480.0;
const MARGIN: f64 = 60.0;
const LEGEND: f64 = 140.0;

const PALETTE: [&str; 13] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22",
    "#17becf", "#393b79", "#637939", "#843c39",
];

struct Axis {
    lo: f64,
    hi: f64,
    from: f64,
    to: f64,
}

impl Axis {
    fn new(lo: f64, hi: f64, from: f64, to: f64) -> Self {
        let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 1.0, hi + 1.0) };
        let pad = (hi - lo) * 0.05;
        Axis {
            lo: lo - pad,
            hi: hi + pad,
            from,
            to,
        }
    }

    fn map(&self, v: f64) -> f64 {
        self.from + (v - self.lo) / (self.hi - self.lo) * (self.to - self.from)
    }
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn open(out: &mut String, title: &str, x_label: &str, y_label: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{H}" viewBox="0 0 {w} {H}" font-family="sans-serif" font-size="12">"#,
        w = W + LEGEND
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        W / 2.0,
        escape(title)
    );
    let _ = writeln!(
        out,
        r#"<line x1="{m}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/><line x1="{m}" y1="{m}" x2="{m}" y2="{b}" stroke="black"/>"#,
        m = MARGIN,
        b = H - MARGIN,
        r = W - MARGIN
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        W / 2.0,
        H - 20.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="18" y="{y}" text-anchor="middle" transform="rotate(-90 18 {y})">{}</text>"#,
        escape(y_label),
        y = H / 2.0
    );
}

fn legend(out: &mut String, i: usize, name: &str) {
    let y = MARGIN + 18.0 * i as f64;
    let _ = writeln!(
        out,
        r#"<circle cx="{}" cy="{y}" r="5" fill="{}"/><text x="{}" y="{}">{}</text>"#,
        W + 4.0,
        PALETTE[i % PALETTE.len()],
        W + 14.0,
        y + 4.0,
        escape(name)
    );
}

/// Women's share over time per group; bubble area tracks cohort size.
pub fn bubble_chart(obs: &[CohortObservation], basis: ShareBasis) -> String {
    let pct = |o: &CohortObservation| match basis {
        ShareBasis::All => Some(o.pct_women_all),
        ShareBasis::Identified => o.pct_women_identified,
    };
    let (x0, x1) = bounds(obs.iter().map(|o| f64::from(o.year)));
    let (_, y1) = bounds(obs.iter().filter_map(pct));
    let (_, nmax) = bounds(obs.iter().map(|o| o.n_total as f64));
    let xa = Axis::new(x0, x1, MARGIN, W - MARGIN);
    let ya = Axis::new(0.0, y1.max(1.0), H - MARGIN, MARGIN);

    let mut out = String::new();
    open(&mut out, "Women's share of authors by group", "year", "women (%)");
    let mut groups: Vec<&str> = obs.iter().map(|o| o.group_id.as_str()).collect();
    groups.dedup();
    for (i, g) in groups.iter().enumerate() {
        legend(&mut out, i, g);
        for o in obs.iter().filter(|o| o.group_id == *g) {
            let Some(p) = pct(o) else { continue };
            let r = 3.0 + 17.0 * (o.n_total as f64 / nmax).sqrt();
            let _ = writeln!(
                out,
                r#"<circle cx="{:.2}" cy="{:.2}" r="{r:.2}" fill="{}" fill-opacity="0.45" stroke="{1}"><title>{} {}: {p:.1}% of {}</title></circle>"#,
                xa.map(f64::from(o.year)),
                ya.map(p),
                PALETTE[i % PALETTE.len()],
                escape(g),
                o.year,
                o.n_total
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

/// Group median against curvature, with the composite as the crosshair.
pub fn quadrant_chart(report: &TrendReport) -> String {
    let c = &report.composite;
    let (x0, x1) = bounds(report.groups.iter().map(|g| g.a_scaled).chain([c.a_scaled]));
    let (y0, y1) = bounds(report.groups.iter().map(|g| g.median).chain([c.median_weighted]));
    let xa = Axis::new(x0, x1, MARGIN, W - MARGIN);
    let ya = Axis::new(y0, y1, H - MARGIN, MARGIN);

    let mut out = String::new();
    open(&mut out, "Median share vs. trend curvature", "curvature (scaled a)", "median women (%)");
    let _ = writeln!(
        out,
        r##"<line x1="{cx:.2}" y1="{}" x2="{cx:.2}" y2="{}" stroke="#999" stroke-dasharray="4 3"/><line x1="{}" y1="{cy:.2}" x2="{}" y2="{cy:.2}" stroke="#999" stroke-dasharray="4 3"/>"##,
        MARGIN,
        H - MARGIN,
        MARGIN,
        W - MARGIN,
        cx = xa.map(c.a_scaled),
        cy = ya.map(c.median_weighted)
    );
    for (i, g) in report.groups.iter().enumerate() {
        legend(&mut out, i, &g.group_id);
        let _ = writeln!(
            out,
            r#"<circle cx="{:.2}" cy="{:.2}" r="6" fill="{}"><title>{}: median {:.1}%, a {:.0} ({})</title></circle>"#,
            xa.map(g.a_scaled),
            ya.map(g.median),
            PALETTE[i % PALETTE.len()],
            escape(&g.group_id),
            g.median,
            g.a_scaled,
            g.quadrant.as_str()
        );
    }
    out.push_str("</svg>\n");
    out
}
