//! Metastability diagnostics: `∥Λ_N∥_2` and the window deviation
//! `sup_{N ≤ N' ≤ LN} ∥Λ_N − Λ_N'∥_2` on a grid of `N`.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::average::{
    check_inputs, exact_term, l2_norm_sq, point_term, sample_points, sampled_norm, values_at,
    Estimator,
};
use super::{DynSystem, Observable};
use crate::error::{Error, Result};
use crate::exact::{self, Rational};
use crate::nilseq::GSystem;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    #[serde(rename = "N")]
    pub n: u64,
    pub window_sup_dev: f64,
    pub l2_norm: f64,
    /// Standard error of `l2_norm`; zero in exact mode.
    pub stderr: f64,
    pub below_epsilon: bool,
    /// Exact squared values, finite systems in exact mode only.
    #[serde(
        default,
        skip_serializing_if = "Option::is_none",
        with = "exact::text_opt"
    )]
    pub window_sup_dev_sq: Option<Rational>,
    #[serde(
        default,
        skip_serializing_if = "Option::is_none",
        with = "exact::text_opt"
    )]
    pub l2_norm_sq: Option<Rational>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AverageReport {
    pub grid: Vec<u64>,
    pub window: f64,
    pub epsilon: f64,
    pub estimator: Estimator,
    pub rows: Vec<ReportRow>,
}

pub const CSV_HEADER: &str = "N,window_sup_dev,l2_norm,estimator,stderr";

impl AverageReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            writeln!(
                out,
                "{},{:e},{:e},{},{:e}",
                r.n,
                r.window_sup_dev,
                r.l2_norm,
                self.estimator.label(),
                r.stderr
            )
            .expect("writing to a string");
        }
        out
    }

    /// Line chart of the window deviation against `N`.
    pub fn to_svg(&self) -> String {
        let (w, h, pad) = (640.0, 400.0, 48.0);
        let max_n = self.rows.iter().map(|r| r.n).max().unwrap_or(1).max(1) as f64;
        let min_n = self.rows.iter().map(|r| r.n).min().unwrap_or(0) as f64;
        let max_y = self
            .rows
            .iter()
            .map(|r| r.window_sup_dev)
            .fold(0.0, f64::max);
        let max_y = if max_y > 0.0 { max_y } else { 1.0 };
        let span_n = if max_n > min_n { max_n - min_n } else { 1.0 };
        let sx = |n: f64| pad + (n - min_n) / span_n * (w - 2.0 * pad);
        let sy = |y: f64| h - pad - y / max_y * (h - 2.0 * pad);
        let points: Vec<String> = self
            .rows
            .iter()
            .map(|r| format!("{:.2},{:.2}", sx(r.n as f64), sy(r.window_sup_dev)))
            .collect();
        let mut out = String::new();
        writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
        )
        .unwrap();
        writeln!(out, r#"<rect width="{w}" height="{h}" fill="white"/>"#).unwrap();
        writeln!(
            out,
            r#"<line x1="{pad}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>"#,
            y0 = h - pad,
            x1 = w - pad
        )
        .unwrap();
        writeln!(
            out,
            r#"<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{y0}" stroke="black"/>"#,
            y0 = h - pad
        )
        .unwrap();
        writeln!(
            out,
            r#"<text x="{x}" y="{y}" font-size="12" text-anchor="middle">N</text>"#,
            x = w / 2.0,
            y = h - 12.0
        )
        .unwrap();
        writeln!(
            out,
            r#"<text x="12" y="{pad}" font-size="12">window_sup_dev (max {max_y:e})</text>"#
        )
        .unwrap();
        if !points.is_empty() {
            writeln!(
                out,
                r#"<polyline fill="none" stroke="steelblue" stroke-width="2" points="{}"/>"#,
                points.join(" ")
            )
            .unwrap();
        }
        out.push_str("</svg>\n");
        out
    }
}

/// Window deviations and norms of `Λ_N` on an increasing grid.
///
/// Exact mode needs a finite system; in sampled mode every `Λ_N` is
/// evaluated on the same seeded points.
pub fn convergence_report(
    sys: &DynSystem,
    gsys: &GSystem,
    fs: &[Observable],
    grid: &[u64],
    window: f64,
    epsilon: f64,
    estimator: &Estimator,
) -> Result<AverageReport> {
    check_inputs(sys, gsys, fs)?;
    if window.is_nan() || window <= 1.0 || !window.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "window factor {window} must exceed 1"
        )));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) || grid.first() == Some(&0) {
        return Err(Error::InvalidParameter(
            "grid must be strictly increasing and positive".into(),
        ));
    }
    let upper = |n: u64| (window * n as f64).floor() as u64;
    let n_max = grid.last().map_or(0, |&n| upper(n));

    let rows = match *estimator {
        Estimator::Exact => {
            if !sys.is_finite() {
                return Err(Error::Unsupported(
                    "exact reports need a finite system; use sampling on the torus".into(),
                ));
            }
            let tables: Vec<Vec<Rational>> =
                fs.iter().map(|f| f.table(sys)).collect::<Result<_>>()?;
            let count = sys.state_count().expect("finite");
            // averages[n - 1] = Λ_n for n = 1..=n_max
            let mut averages: Vec<Vec<Rational>> = Vec::with_capacity(n_max as usize);
            let mut acc = vec![Rational::zero(); count];
            for n in 1..=n_max {
                for (a, t) in acc
                    .iter_mut()
                    .zip(exact_term(sys, gsys, &tables, n as i64)?)
                {
                    *a += t;
                }
                let d = BigInt::from(n);
                averages.push(acc.iter().map(|a| a / &d).collect());
            }
            grid.iter()
                .map(|&n| {
                    let base = &averages[n as usize - 1];
                    let dev_sq = (n..=upper(n))
                        .map(|m| {
                            let diff: Vec<Rational> = averages[m as usize - 1]
                                .iter()
                                .zip(base)
                                .map(|(a, b)| a - b)
                                .collect();
                            l2_norm_sq(&diff)
                        })
                        .max()
                        .unwrap_or_else(Rational::zero);
                    let norm_sq = l2_norm_sq(base);
                    let dev = exact::to_f64(&dev_sq).sqrt();
                    ReportRow {
                        n,
                        window_sup_dev: dev,
                        l2_norm: exact::to_f64(&norm_sq).sqrt(),
                        stderr: 0.0,
                        below_epsilon: dev < epsilon,
                        window_sup_dev_sq: Some(dev_sq),
                        l2_norm_sq: Some(norm_sq),
                    }
                })
                .collect()
        }
        Estimator::MonteCarlo { samples, seed } => {
            if samples == 0 {
                return Err(Error::InvalidParameter("need at least one sample".into()));
            }
            let points = sample_points(sys, samples, seed);
            let mut averages: Vec<Vec<Complex64>> = Vec::with_capacity(n_max as usize);
            let mut acc = vec![Complex64::zero(); samples];
            for n in 1..=n_max {
                let vals = values_at(gsys, n as i64)?;
                for (a, x) in acc.iter_mut().zip(&points) {
                    *a += point_term(sys, &vals, fs, x)?;
                }
                averages.push(acc.iter().map(|a| a / n as f64).collect());
            }
            grid.iter()
                .map(|&n| {
                    let base = &averages[n as usize - 1];
                    let dev = (n..=upper(n))
                        .map(|m| {
                            let sq: Vec<f64> = averages[m as usize - 1]
                                .iter()
                                .zip(base)
                                .map(|(a, b)| (a - b).norm_sqr())
                                .collect();
                            sampled_norm(&sq).0
                        })
                        .fold(0.0, f64::max);
                    let sq: Vec<f64> = base.iter().map(|v| v.norm_sqr()).collect();
                    let (norm, se) = sampled_norm(&sq);
                    ReportRow {
                        n,
                        window_sup_dev: dev,
                        l2_norm: norm,
                        stderr: se,
                        below_epsilon: dev < epsilon,
                        window_sup_dev_sq: None,
                        l2_norm_sq: None,
                    }
                })
                .collect()
        }
    };
    Ok(AverageReport {
        grid: grid.to_vec(),
        window,
        epsilon,
        estimator: *estimator,
        rows,
    })
}
