//! Self-contained log-log CCDF plots as SVG, built by plain string
//! assembly so output bytes depend only on the input values.

use crate::distfit::{LogNormalFit, PowerLawFit};
use crate::report::fmt_sig;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 24.0;
const MARGIN_BOTTOM: f64 = 56.0;
const CURVE_SAMPLES: usize = 128;

const POINT_COLOR: &str = "#1f77b4";
const POWERLAW_COLOR: &str = "#d62728";
const LOGNORMAL_COLOR: &str = "#2ca02c";

/// Fitted models to overlay on the empirical points. The power-law curve
/// is drawn as the unconditional CCDF, so the tail fraction n_tail/n is
/// carried alongside the fit.
#[derive(Default)]
pub struct PlotModels<'a> {
    pub powerlaw: Option<(&'a PowerLawFit, f64)>,
    pub lognormal: Option<&'a LogNormalFit>,
}

/// Renders a log-log CCDF chart. Points with nonpositive x or g cannot be
/// placed on log axes; they are dropped and counted in the returned skip
/// count. Identical inputs produce byte-identical SVG.
pub fn render_ccdf_svg(
    points: &[(f64, f64)],
    models: &PlotModels<'_>,
    title: Option<&str>,
) -> (String, usize) {
    let mut usable: Vec<(f64, f64)> = Vec::with_capacity(points.len());
    let mut skipped = 0;
    for &(x, g) in points {
        if x > 0.0 && g > 0.0 && x.is_finite() && g.is_finite() {
            usable.push((libm::log10(x), libm::log10(g)));
        } else {
            skipped += 1;
        }
    }

    let mut svg = String::with_capacity(8 * 1024);
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"monospace\" font-size=\"12\">\n"
    ));
    svg.push_str(&format!(
        "<rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
    ));

    if usable.is_empty() {
        svg.push_str(
            "<text x=\"320\" y=\"240\" text-anchor=\"middle\">no plottable points</text>\n</svg>\n",
        );
        return (svg, skipped);
    }

    let frame = Frame::around(&usable);
    frame.draw_axes(&mut svg);

    if let Some((fit, tail_fraction)) = models.powerlaw {
        frame.draw_curve(&mut svg, POWERLAW_COLOR, |x| {
            if x < fit.x0 {
                None
            } else {
                Some(tail_fraction * fit.tail_ccdf(x))
            }
        });
    }
    if let Some(fit) = models.lognormal {
        frame.draw_curve(&mut svg, LOGNORMAL_COLOR, |x| Some(fit.ccdf(x)));
    }

    for &(lx, lg) in &usable {
        svg.push_str(&format!(
            "<circle cx=\"{}\" cy=\"{}\" r=\"2.5\" fill=\"{POINT_COLOR}\"/>\n",
            px(frame.x_px(lx)),
            px(frame.y_px(lg))
        ));
    }

    frame.draw_legend(&mut svg, models, usable.len());
    if let Some(title) = title {
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"16\" text-anchor=\"middle\">{}</text>\n",
            px(MARGIN_LEFT + frame.plot_width() / 2.0),
            escape_text(title)
        ));
    }
    svg.push_str("</svg>\n");
    (svg, skipped)
}

struct Frame {
    lx0: f64,
    lx1: f64,
    ly0: f64,
    ly1: f64,
}

impl Frame {
    fn around(log_points: &[(f64, f64)]) -> Frame {
        let mut lx0 = f64::INFINITY;
        let mut lx1 = f64::NEG_INFINITY;
        let mut ly0 = f64::INFINITY;
        let mut ly1 = f64::NEG_INFINITY;
        for &(lx, ly) in log_points {
            lx0 = lx0.min(lx);
            lx1 = lx1.max(lx);
            ly0 = ly0.min(ly);
            ly1 = ly1.max(ly);
        }
        let pad = |a: &mut f64, b: &mut f64| {
            let span = *b - *a;
            let pad = if span == 0.0 { 0.5 } else { span * 0.04 };
            *a -= pad;
            *b += pad;
        };
        pad(&mut lx0, &mut lx1);
        pad(&mut ly0, &mut ly1);
        Frame { lx0, lx1, ly0, ly1 }
    }

    fn plot_width(&self) -> f64 {
        WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    }

    fn plot_height(&self) -> f64 {
        HEIGHT - MARGIN_TOP - MARGIN_BOTTOM
    }

    fn x_px(&self, lx: f64) -> f64 {
        MARGIN_LEFT + (lx - self.lx0) / (self.lx1 - self.lx0) * self.plot_width()
    }

    fn y_px(&self, ly: f64) -> f64 {
        MARGIN_TOP + (self.ly1 - ly) / (self.ly1 - self.ly0) * self.plot_height()
    }

    fn draw_axes(&self, svg: &mut String) {
        svg.push_str(&format!(
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
            px(MARGIN_LEFT),
            px(MARGIN_TOP),
            px(self.plot_width()),
            px(self.plot_height())
        ));
        for k in decades(self.lx0, self.lx1) {
            let x = px(self.x_px(k as f64));
            svg.push_str(&format!(
                "<line x1=\"{x}\" y1=\"{}\" x2=\"{x}\" y2=\"{}\" stroke=\"#cccccc\"/>\n",
                px(MARGIN_TOP),
                px(MARGIN_TOP + self.plot_height())
            ));
            svg.push_str(&format!(
                "<text x=\"{x}\" y=\"{}\" text-anchor=\"middle\">1e{k}</text>\n",
                px(HEIGHT - MARGIN_BOTTOM + 18.0)
            ));
        }
        for k in decades(self.ly0, self.ly1) {
            let y = px(self.y_px(k as f64));
            svg.push_str(&format!(
                "<line x1=\"{}\" y1=\"{y}\" x2=\"{}\" y2=\"{y}\" stroke=\"#cccccc\"/>\n",
                px(MARGIN_LEFT),
                px(MARGIN_LEFT + self.plot_width())
            ));
            svg.push_str(&format!(
                "<text x=\"{}\" y=\"{y}\" text-anchor=\"end\" dy=\"4\">1e{k}</text>\n",
                px(MARGIN_LEFT - 6.0)
            ));
        }
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">x</text>\n",
            px(MARGIN_LEFT + self.plot_width() / 2.0),
            px(HEIGHT - 12.0)
        ));
        svg.push_str(&format!(
            "<text x=\"16\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">G(x)</text>\n",
            px(MARGIN_TOP + self.plot_height() / 2.0),
            px(MARGIN_TOP + self.plot_height() / 2.0)
        ));
    }

    /// Samples `model_g` at log-spaced x across the frame and draws a
    /// polyline through the usable values.
    fn draw_curve(&self, svg: &mut String, color: &str, model_g: impl Fn(f64) -> Option<f64>) {
        let mut coords = String::new();
        for i in 0..=CURVE_SAMPLES {
            let lx = self.lx0 + (self.lx1 - self.lx0) * i as f64 / CURVE_SAMPLES as f64;
            let x = libm::exp10(lx);
            let Some(g) = model_g(x) else { continue };
            if g <= 0.0 || !g.is_finite() {
                continue;
            }
            let ly = libm::log10(g);
            if ly < self.ly0 || ly > self.ly1 {
                continue;
            }
            if !coords.is_empty() {
                coords.push(' ');
            }
            coords.push_str(&format!("{},{}", px(self.x_px(lx)), px(self.y_px(ly))));
        }
        if !coords.is_empty() {
            svg.push_str(&format!(
                "<polyline points=\"{coords}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n"
            ));
        }
    }

    fn draw_legend(&self, svg: &mut String, models: &PlotModels<'_>, n_points: usize) {
        let x = px(MARGIN_LEFT + 12.0);
        let mut y = MARGIN_TOP + 18.0;
        let mut line = |svg: &mut String, color: &str, text: String| {
            svg.push_str(&format!(
                "<circle cx=\"{x}\" cy=\"{}\" r=\"4\" fill=\"{color}\"/>\n",
                px(y - 4.0)
            ));
            svg.push_str(&format!(
                "<text x=\"{}\" y=\"{}\">{}</text>\n",
                px(MARGIN_LEFT + 22.0),
                px(y),
                escape_text(&text)
            ));
            y += 16.0;
        };
        line(
            svg,
            POINT_COLOR,
            format!("empirical CCDF ({n_points} points)"),
        );
        if let Some((fit, _)) = models.powerlaw {
            line(
                svg,
                POWERLAW_COLOR,
                format!(
                    "power law: alpha={}, x0={}, KS D={}",
                    fmt_sig(fit.alpha),
                    fmt_sig(fit.x0),
                    fmt_sig(fit.ks_d)
                ),
            );
        }
        if let Some(fit) = models.lognormal {
            line(
                svg,
                LOGNORMAL_COLOR,
                format!(
                    "lognormal: mu={}, sigma={}, R2={}",
                    fmt_sig(fit.mu),
                    fmt_sig(fit.sigma),
                    fmt_sig(fit.r2_loglog)
                ),
            );
        }
    }
}

fn decades(lo: f64, hi: f64) -> impl Iterator<Item = i64> {
    let start = lo.ceil() as i64;
    let end = hi.floor() as i64;
    start..=end
}

fn px(v: f64) -> String {
    let s = format!("{v:.2}");
    let trimmed = s.trim_end_matches('0').trim_end_matches('.');
    // Normalize negative zero so coordinates have one spelling.
    if trimmed == "-0" {
        "0".to_string()
    } else {
        trimmed.to_string()
    }
}

fn escape_text(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
