//! Minimal hand-rolled SVG charts: axes, ticks, polylines, scatter points,
//! and optional log₁₀ scales. No styling beyond what a result figure needs,
//! and every coordinate is formatted with fixed precision so identical data
//! produces identical bytes.

use stx::scalefree::{PowerLawFit, SizeDistribution};
use stx::stats::{ComponentStats, CumulativeShareCurve};

const W: f64 = 640.0;
const H: f64 = 420.0;
const ML: f64 = 72.0; // margins: left, right, top, bottom
const MR: f64 = 24.0;
const MT: f64 = 36.0;
const MB: f64 = 56.0;

/// One chart axis: a data range, optionally in log₁₀ space.
#[derive(Copy, Clone)]
struct Axis {
    min: f64,
    max: f64,
    log: bool,
}

impl Axis {
    fn linear(values: impl Iterator<Item = f64>) -> Axis {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for v in values.filter(|v| v.is_finite()) {
            min = min.min(v);
            max = max.max(v);
        }
        if !min.is_finite() {
            min = 0.0;
            max = 1.0;
        }
        if min == max {
            min -= 0.5;
            max += 0.5;
        }
        Axis { min, max, log: false }
    }

    /// Log axis over positive values; falls back to linear when any value
    /// is non-positive.
    fn log_or_linear(values: impl Iterator<Item = f64> + Clone) -> Axis {
        if values.clone().any(|v| v.is_finite() && v <= 0.0) {
            return Axis::linear(values);
        }
        let mut a = Axis::linear(values.map(f64::log10));
        a.log = true;
        a
    }

    fn project(&self, v: f64, lo_px: f64, hi_px: f64) -> f64 {
        let v = if self.log { v.log10() } else { v };
        let t = (v - self.min) / (self.max - self.min);
        lo_px + t * (hi_px - lo_px)
    }

    /// Five evenly spaced tick values (in data space).
    fn ticks(&self) -> Vec<f64> {
        (0..=4)
            .map(|i| {
                let t = self.min + (self.max - self.min) * f64::from(i) / 4.0;
                if self.log {
                    10f64.powf(t)
                } else {
                    t
                }
            })
            .collect()
    }
}

fn tick_label(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 {
        "0".to_string()
    } else if !(1e-3..1e5).contains(&a) {
        format!("{v:.2e}")
    } else if a >= 100.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.3}")
    }
}

/// A single-panel chart builder.
struct Panel {
    x: Axis,
    y: Axis,
    body: String,
}

impl Panel {
    fn new(x: Axis, y: Axis) -> Panel {
        Panel {
            x,
            y,
            body: String::new(),
        }
    }

    fn px(&self, v: f64) -> f64 {
        self.x.project(v, ML, W - MR)
    }

    fn py(&self, v: f64) -> f64 {
        self.y.project(v, H - MB, MT) // SVG y grows downward
    }

    fn polyline(&mut self, pts: &[(f64, f64)], color: &str) {
        let coords: Vec<String> = pts
            .iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", self.px(x), self.py(y)))
            .collect();
        self.body.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            color,
            coords.join(" ")
        ));
    }

    fn scatter(&mut self, pts: &[(f64, f64)], color: &str) {
        for &(x, y) in pts.iter().filter(|(x, y)| x.is_finite() && y.is_finite()) {
            self.body.push_str(&format!(
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.5\" fill=\"{}\"/>\n",
                self.px(x),
                self.py(y),
                color
            ));
        }
    }

    fn finish(self, title: &str, x_label: &str, y_label: &str) -> String {
        let mut s = format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" \
             viewBox=\"0 0 {W} {H}\" font-family=\"monospace\" font-size=\"12\">\n\
             <rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n\
             <text x=\"{:.2}\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
            (ML + W - MR) / 2.0,
            escape(title)
        );
        // Axes.
        s.push_str(&format!(
            "<line x1=\"{ML}\" y1=\"{MT}\" x2=\"{ML}\" y2=\"{:.2}\" stroke=\"black\"/>\n\
             <line x1=\"{ML}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"black\"/>\n",
            H - MB,
            H - MB,
            W - MR,
            H - MB
        ));
        // Ticks and labels.
        for v in self.x.ticks() {
            let px = self.x.project(v, ML, W - MR);
            s.push_str(&format!(
                "<line x1=\"{px:.2}\" y1=\"{:.2}\" x2=\"{px:.2}\" y2=\"{:.2}\" stroke=\"black\"/>\n\
                 <text x=\"{px:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>\n",
                H - MB,
                H - MB + 5.0,
                H - MB + 20.0,
                tick_label(v)
            ));
        }
        for v in self.y.ticks() {
            let py = self.y.project(v, H - MB, MT);
            s.push_str(&format!(
                "<line x1=\"{:.2}\" y1=\"{py:.2}\" x2=\"{ML}\" y2=\"{py:.2}\" stroke=\"black\"/>\n\
                 <text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>\n",
                ML - 5.0,
                ML - 8.0,
                py + 4.0,
                tick_label(v)
            ));
        }
        s.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>\n\
             <text x=\"16\" y=\"{:.2}\" text-anchor=\"middle\" \
             transform=\"rotate(-90 16 {:.2})\">{}</text>\n",
            (ML + W - MR) / 2.0,
            H - 12.0,
            escape(x_label),
            (MT + H - MB) / 2.0,
            (MT + H - MB) / 2.0,
            escape(y_label)
        ));
        s.push_str(&self.body);
        s.push_str("</svg>\n");
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Ranked magnitudes: |carbon integral| and affected area against rank.
/// The two series live on one log (or linear) scale after normalizing the
/// area series into the loss range is avoided by plotting area separately —
/// here both are drawn against rank with the y-axis spanning their union in
/// log space, each labeled by color.
pub fn ranked_loss_chart(stats: &[ComponentStats]) -> String {
    let loss: Vec<(f64, f64)> = stats
        .iter()
        .map(|s| (s.rank as f64, s.carbon_integral_pg.abs()))
        .collect();
    let area: Vec<(f64, f64)> = stats
        .iter()
        .map(|s| (s.rank as f64, s.affected_area_m2 / 1e12)) // million km²
        .collect();
    let x = Axis::linear(loss.iter().map(|p| p.0));
    let y = Axis::log_or_linear(loss.iter().chain(area.iter()).map(|p| p.1));
    let mut panel = Panel::new(x, y);
    panel.polyline(&loss, "#b2182b");
    panel.scatter(&loss, "#b2182b");
    panel.polyline(&area, "#2166ac");
    panel.scatter(&area, "#2166ac");
    let mut svg = panel.finish(
        "Ranked extremes: loss (red, Pg C) and affected area (blue, million km2)",
        "rank",
        "magnitude",
    );
    let legend = format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" fill=\"#b2182b\">|carbon integral| [Pg C]</text>\n\
         <text x=\"{:.2}\" y=\"{:.2}\" fill=\"#2166ac\">affected area [1e6 km2]</text>\n</svg>\n",
        ML + 12.0,
        MT + 16.0,
        ML + 12.0,
        MT + 32.0
    );
    svg.truncate(svg.len() - "</svg>\n".len());
    svg.push_str(&legend);
    svg
}

/// Cumulative share of total loss against the number of top components.
pub fn cumulative_share_chart(curve: &CumulativeShareCurve) -> String {
    let pts: Vec<(f64, f64)> = curve
        .points
        .iter()
        .map(|p| (p.k as f64, p.share))
        .collect();
    let x = Axis::linear(pts.iter().map(|p| p.0));
    let y = Axis {
        min: 0.0,
        max: 1.0,
        log: false,
    };
    let mut panel = Panel::new(x, y);
    panel.polyline(&pts, "#b2182b");
    panel.finish(
        "Cumulative share of total carbon loss",
        "top components included",
        "share of total |loss|",
    )
}

/// Log-log size distribution with the fitted power law.
pub fn powerlaw_chart(dist: &SizeDistribution, fit: &PowerLawFit) -> String {
    let pts: Vec<(f64, f64)> = dist
        .pairs
        .iter()
        .map(|&(n, c)| (n as f64, c as f64 / dist.total as f64))
        .collect();
    let x = Axis::log_or_linear(pts.iter().map(|p| p.0));
    let y = Axis::log_or_linear(pts.iter().map(|p| p.1));
    let mut panel = Panel::new(x, y);
    panel.scatter(&pts, "#2166ac");
    let line: Vec<(f64, f64)> = (0..=64)
        .map(|i| {
            let ln_n = (dist.n_min as f64).ln()
                + ((dist.n_max as f64).ln() - (dist.n_min as f64).ln()) * f64::from(i) / 64.0;
            (ln_n.exp(), (fit.log_c - fit.gamma * ln_n).exp())
        })
        .collect();
    panel.polyline(&line, "#b2182b");
    panel.finish(
        &format!(
            "Component size distribution (gamma = {:.3}, r2 = {:.3})",
            fit.gamma, fit.r_squared
        ),
        "size [voxels]",
        "probability",
    )
}
