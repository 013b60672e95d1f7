//! Grid sweeps behind the command-line tool, with CSV and SVG output.
//!
//! CSV files are comma-separated with a header row and LF line endings.
//! Floats use the shortest decimal form that parses back to the same value.
//! Rows are computed in parallel and emitted in grid order, so output is
//! byte-identical across runs.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::analytic::{self, AnalyticPoint};
use crate::error::{Error, Result};
use crate::info_theory::{capacity_pie, RateResult, Scheme};
use crate::optimize::{enhancement_ratio, optimize_rate, OptimizeProblem, SourceFamily};
use crate::photon_stats::ChannelParams;

/// Dark-count probability per bin relative to the mean output photon number
/// for the "quarter" rule.
pub const QUARTER_DARK_FRACTION: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub spacing: Spacing,
}

impl Grid {
    pub fn new(min: f64, max: f64, points: usize, spacing: Spacing) -> Result<Self> {
        if !(min > 0.0 && min.is_finite() && max.is_finite()) {
            return Err(Error::InvalidGrid(format!("endpoints must be positive, got [{min}, {max}]")));
        }
        if !(min < max) {
            return Err(Error::InvalidGrid(format!("endpoints out of order: [{min}, {max}]")));
        }
        if points < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 points, got {points}")));
        }
        Ok(Grid {
            min,
            max,
            points,
            spacing,
        })
    }

    pub fn values(&self) -> Vec<f64> {
        let last = (self.points - 1) as f64;
        let mut values: Vec<f64> = (0..self.points)
            .map(|i| {
                let t = i as f64 / last;
                match self.spacing {
                    Spacing::Linear => self.min + (self.max - self.min) * t,
                    Spacing::Log => self.min * (self.max / self.min).powf(t),
                }
            })
            .collect();
        values[self.points - 1] = self.max;
        values
    }

    /// Default output photon number axis, `[1e-4, 1e-1]`, 61 log-spaced points.
    pub fn default_eta_nbar() -> Self {
        Grid {
            min: 1e-4,
            max: 1e-1,
            points: 61,
            spacing: Spacing::Log,
        }
    }

    /// Default transmission axis, `[0.01, 1]`, 50 linear points.
    pub fn default_eta() -> Self {
        Grid {
            min: 0.01,
            max: 1.0,
            points: 50,
            spacing: Spacing::Linear,
        }
    }

    /// Default average photon number axis, `[1e-3, 0.2]`, 50 log-spaced points.
    pub fn default_nbar() -> Self {
        Grid {
            min: 1e-3,
            max: 0.2,
            points: 50,
            spacing: Spacing::Log,
        }
    }
}

/// A record that can be written as one CSV line.
pub trait CsvRow {
    const HEADER: &'static [&'static str];

    fn fields(&self) -> Vec<String>;
}

fn num(x: f64) -> String {
    format!("{x}")
}

pub fn write_csv<R: CsvRow, W: Write>(rows: &[R], mut out: W) -> io::Result<()> {
    writeln!(out, "{}", R::HEADER.join(","))?;
    for row in rows {
        writeln!(out, "{}", row.fields().join(","))?;
    }
    out.flush()
}

pub fn write_csv_file<R: CsvRow>(rows: &[R], path: &Path) -> Result<()> {
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = fs::File::create(path).map_err(io_err)?;
    write_csv(rows, io::BufWriter::new(file)).map_err(io_err)
}

/// Photon information efficiency of the Poissonian schemes against the
/// output photon number per bin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PieCurveRow {
    pub eta_nbar: f64,
    /// Closed-form PPM efficiency from the second-order expansion.
    pub pie_analytic: f64,
    pub pie_ppm_poisson: f64,
    pub pie_ook_poisson: f64,
    /// OOK with dark-count probability `0.25 eta nbar` per bin.
    pub pie_ook_dark: f64,
    pub capacity_pie: f64,
    pub inv_p_analytic: f64,
    pub inv_p_ppm: f64,
    pub inv_p_ook: f64,
    /// False when the closed form was evaluated outside its small-signal
    /// domain.
    pub analytic_valid: bool,
}

impl CsvRow for PieCurveRow {
    const HEADER: &'static [&'static str] = &[
        "eta_nbar",
        "pie_analytic_Pi",
        "pie_ppm_poisson",
        "pie_ook_poisson",
        "pie_ook_dark",
        "capacity_pie",
        "inv_p_analytic",
        "inv_p_ppm",
        "inv_p_ook",
        "analytic_valid",
    ];

    fn fields(&self) -> Vec<String> {
        vec![
            num(self.eta_nbar),
            num(self.pie_analytic),
            num(self.pie_ppm_poisson),
            num(self.pie_ook_poisson),
            num(self.pie_ook_dark),
            num(self.capacity_pie),
            num(self.inv_p_analytic),
            num(self.inv_p_ppm),
            num(self.inv_p_ook),
            self.analytic_valid.to_string(),
        ]
    }
}

/// Poissonian results depend on `eta nbar` only, so the curve is computed at
/// unit transmission.
pub fn pie_curve_row(eta_nbar: f64) -> Result<PieCurveRow> {
    let lossless = ChannelParams::lossy(1.0)?;
    let dark = ChannelParams::new(1.0, QUARTER_DARK_FRACTION * eta_nbar)?;
    let solve = |scheme, channel| -> Result<RateResult> {
        optimize_rate(&OptimizeProblem::new(scheme, SourceFamily::Poisson, eta_nbar, channel)?)
    };
    let ppm = solve(Scheme::Ppm, lossless)?;
    let ook = solve(Scheme::Ook, lossless)?;
    let ook_dark = solve(Scheme::Ook, dark)?;

    let point = AnalyticPoint::new(eta_nbar, 1.0, 1.0)?;
    let pie = analytic::pie_approx(eta_nbar)?;
    let mi = analytic::ppm_mi_classical_opt(&point)?;
    let mu = analytic::mu_opt_classical(&point)?;

    Ok(PieCurveRow {
        eta_nbar,
        pie_analytic: pie.value,
        pie_ppm_poisson: ppm.pie,
        pie_ook_poisson: ook.pie,
        pie_ook_dark: ook_dark.pie,
        capacity_pie: capacity_pie(eta_nbar)?,
        inv_p_analytic: mu.value / eta_nbar,
        inv_p_ppm: ppm.opt_inv_p,
        inv_p_ook: ook.opt_inv_p,
        analytic_valid: pie.valid && mi.valid,
    })
}

pub fn pie_curve(grid: &Grid) -> Result<Vec<PieCurveRow>> {
    grid.values().into_par_iter().map(pie_curve_row).collect()
}

/// Fock-mixture enhancement over Poissonian pulses at one `(eta, nbar)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioMapRow {
    pub eta: f64,
    pub nbar: f64,
    pub ratio_ppm: f64,
    pub ratio_ook: f64,
    pub fock_mu_opt_ppm: f64,
    pub fock_mu_opt_ook: f64,
    pub single_photon_optimal_ppm: bool,
    pub single_photon_optimal_ook: bool,
}

impl CsvRow for RatioMapRow {
    const HEADER: &'static [&'static str] = &[
        "eta",
        "nbar",
        "ratio_ppm",
        "ratio_ook",
        "fock_mu_opt_ppm",
        "fock_mu_opt_ook",
        "single_photon_optimal_ppm",
        "single_photon_optimal_ook",
    ];

    fn fields(&self) -> Vec<String> {
        vec![
            num(self.eta),
            num(self.nbar),
            num(self.ratio_ppm),
            num(self.ratio_ook),
            num(self.fock_mu_opt_ppm),
            num(self.fock_mu_opt_ook),
            self.single_photon_optimal_ppm.to_string(),
            self.single_photon_optimal_ook.to_string(),
        ]
    }
}

pub fn ratio_map_row(eta: f64, nbar: f64) -> Result<RatioMapRow> {
    let ppm = enhancement_ratio(Scheme::Ppm, nbar, eta)?;
    let ook = enhancement_ratio(Scheme::Ook, nbar, eta)?;
    Ok(RatioMapRow {
        eta,
        nbar,
        ratio_ppm: ppm.ratio,
        ratio_ook: ook.ratio,
        fock_mu_opt_ppm: ppm.fock_mu_opt,
        fock_mu_opt_ook: ook.fock_mu_opt,
        single_photon_optimal_ppm: ppm.single_photon_optimal(),
        single_photon_optimal_ook: ook.single_photon_optimal(),
    })
}

/// Rows ordered by `eta`, then `nbar`.
pub fn ratio_map(eta_grid: &Grid, nbar_grid: &Grid) -> Result<Vec<RatioMapRow>> {
    let nbars = nbar_grid.values();
    let cells: Vec<(f64, f64)> = eta_grid
        .values()
        .into_iter()
        .flat_map(|eta| nbars.iter().map(move |&nbar| (eta, nbar)))
        .collect();
    cells
        .into_par_iter()
        .map(|(eta, nbar)| ratio_map_row(eta, nbar))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DarkRule {
    None,
    /// `0.25 eta nbar` per bin.
    Quarter,
}

impl DarkRule {
    pub fn dark_prob(&self, eta: f64, nbar: f64) -> f64 {
        match self {
            DarkRule::None => 0.0,
            DarkRule::Quarter => QUARTER_DARK_FRACTION * eta * nbar,
        }
    }
}

/// Single optimized operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointRow {
    pub scheme: Scheme,
    pub family: SourceFamily,
    pub nbar: f64,
    pub eta: f64,
    pub dark_prob: f64,
    pub result: RateResult,
}

impl CsvRow for PointRow {
    const HEADER: &'static [&'static str] = &[
        "scheme",
        "family",
        "nbar",
        "eta",
        "dark_prob",
        "mi_per_bin",
        "pie",
        "opt_mu",
        "opt_inv_p",
    ];

    fn fields(&self) -> Vec<String> {
        vec![
            self.scheme.to_string(),
            self.family.to_string(),
            num(self.nbar),
            num(self.eta),
            num(self.dark_prob),
            num(self.result.mi_per_bin),
            num(self.result.pie),
            num(self.result.opt_mu),
            num(self.result.opt_inv_p),
        ]
    }
}

impl PointRow {
    pub fn to_text(&self) -> String {
        let r = &self.result;
        let mut s = String::new();
        let _ = writeln!(s, "scheme      {}", self.scheme);
        let _ = writeln!(s, "family      {}", self.family);
        let _ = writeln!(s, "nbar        {}", self.nbar);
        let _ = writeln!(s, "eta         {}", self.eta);
        let _ = writeln!(s, "dark_prob   {}", self.dark_prob);
        let _ = writeln!(s, "mi_per_bin  {} bits/bin", r.mi_per_bin);
        let _ = writeln!(s, "pie         {} bits/photon", r.pie);
        let _ = writeln!(s, "opt_mu      {} photons", r.opt_mu);
        let _ = write!(s, "opt_inv_p   {} bins", r.opt_inv_p);
        s
    }
}

pub fn optimize_point(
    scheme: Scheme,
    family: SourceFamily,
    nbar: f64,
    eta: f64,
    dark: DarkRule,
) -> Result<PointRow> {
    let dark_prob = dark.dark_prob(eta, nbar);
    let channel = ChannelParams::new(eta, dark_prob)?;
    let result = optimize_rate(&OptimizeProblem::new(scheme, family, nbar, channel)?)?;
    Ok(PointRow {
        scheme,
        family,
        nbar,
        eta,
        dark_prob,
        result,
    })
}

/// Log-x line chart of the efficiency curves as a standalone SVG document.
pub fn pie_curve_svg(rows: &[PieCurveRow]) -> String {
    const W: f64 = 720.0;
    const H: f64 = 480.0;
    const LEFT: f64 = 70.0;
    const RIGHT: f64 = 180.0;
    const TOP: f64 = 20.0;
    const BOTTOM: f64 = 50.0;

    type Series = (&'static str, &'static str, &'static str, fn(&PieCurveRow) -> f64);
    let series: [Series; 5] = [
        ("capacity", "#888888", "", |r| r.capacity_pie),
        ("Pi (closed form)", "#d62728", "", |r| r.pie_analytic),
        ("PPM Poisson", "#000000", "", |r| r.pie_ppm_poisson),
        ("OOK Poisson", "#1f77b4", "", |r| r.pie_ook_poisson),
        ("OOK dark", "#1f77b4", "4 3", |r| r.pie_ook_dark),
    ];

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    if rows.len() < 2 {
        svg.push_str("</svg>\n");
        return svg;
    }

    let x_lo = rows[0].eta_nbar.log10();
    let x_hi = rows[rows.len() - 1].eta_nbar.log10();
    let y_hi = rows
        .iter()
        .flat_map(|r| series.iter().map(move |s| (s.3)(r)))
        .filter(|v| v.is_finite())
        .fold(0.0f64, f64::max)
        .ceil();
    let plot_w = W - LEFT - RIGHT;
    let plot_h = H - TOP - BOTTOM;
    let px = |x: f64| LEFT + (x.log10() - x_lo) / (x_hi - x_lo) * plot_w;
    let py = |y: f64| TOP + (1.0 - y.max(0.0) / y_hi) * plot_h;

    let _ = writeln!(
        svg,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    for decade in (x_lo.ceil() as i32)..=(x_hi.floor() as i32) {
        let x = px(10f64.powi(decade));
        let _ = writeln!(
            svg,
            r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">1e{decade}</text>"#,
            TOP + plot_h,
            TOP + plot_h + 5.0,
            TOP + plot_h + 20.0
        );
    }
    let y_step = if y_hi > 10.0 { 2.0 } else { 1.0 };
    let mut y = 0.0;
    while y <= y_hi {
        let yy = py(y);
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{yy:.2}" x2="{LEFT}" y2="{yy:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{y}</text>"#,
            LEFT - 5.0,
            LEFT - 8.0,
            yy + 4.0
        );
        y += y_step;
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">mean output photons per bin</text>"#,
        LEFT + plot_w / 2.0,
        H - 10.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="15" y="{:.2}" text-anchor="middle" transform="rotate(-90 15 {:.2})">bits per photon</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );

    for (i, (label, color, dash, value)) in series.iter().enumerate() {
        let points: Vec<String> = rows
            .iter()
            .map(|r| format!("{:.2},{:.2}", px(r.eta_nbar), py(value(r))))
            .collect();
        let dash_attr = if dash.is_empty() {
            String::new()
        } else {
            format!(r#" stroke-dasharray="{dash}""#)
        };
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"{dash_attr}/>"#,
            points.join(" ")
        );
        let ly = TOP + 15.0 + 18.0 * i as f64;
        let lx = W - RIGHT + 10.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx}" y1="{ly}" x2="{:.2}" y2="{ly}" stroke="{color}" stroke-width="1.5"{dash_attr}/><text x="{:.2}" y="{:.2}">{label}</text>"#,
            lx + 25.0,
            lx + 30.0,
            ly + 4.0
        );
    }
    svg.push_str("</svg>\n");
    svg
}
