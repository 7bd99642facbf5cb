//! Per-ρ aggregates of a sweep CSV, ready for an external plotter.

use std::io::Write;

use crate::error::{invalid, Result};
use crate::sweep::{format_real, SweepRow};

pub const PLOT_HEADER: [&str; 10] = [
    "rho",
    "runs",
    "converged_fraction",
    "objective_min",
    "objective_max",
    "objective_median",
    "converged_spread",
    "log10_delta_min",
    "log10_delta_median",
    "log10_delta_max",
];

#[derive(Clone, Debug, PartialEq)]
pub struct PlotRow {
    pub rho: f64,
    pub runs: usize,
    pub converged_fraction: f64,
    /// Over runs with a finite objective; `NaN` when there are none.
    pub objective_min: f64,
    pub objective_max: f64,
    pub objective_median: f64,
    /// `max - min` over converged runs; `NaN` when none converged.
    pub converged_spread: f64,
    pub log10_delta_min: f64,
    pub log10_delta_median: f64,
    pub log10_delta_max: f64,
}

fn median(sorted: &[f64]) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        n if n % 2 == 1 => sorted[n / 2],
        n => 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]),
    }
}

fn sorted_finite(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.filter(|x| x.is_finite()).collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Groups rows with identical `ρ` (in order of first appearance).
pub fn aggregate(rows: &[SweepRow]) -> Result<Vec<PlotRow>> {
    if rows.is_empty() {
        return Err(invalid("sweep contains no rows"));
    }
    let mut keys: Vec<f64> = Vec::new();
    for r in rows {
        if !keys.iter().any(|k| k.to_bits() == r.rho.to_bits()) {
            keys.push(r.rho);
        }
    }
    Ok(keys
        .into_iter()
        .map(|rho| {
            let group: Vec<&SweepRow> = rows
                .iter()
                .filter(|r| r.rho.to_bits() == rho.to_bits())
                .collect();
            let objectives = sorted_finite(group.iter().map(|r| r.objective));
            let converged =
                sorted_finite(group.iter().filter(|r| r.converged).map(|r| r.objective));
            let deltas = sorted_finite(
                group
                    .iter()
                    .filter(|r| r.delta_final > 0.0)
                    .map(|r| r.delta_final.log10()),
            );
            let ends = |v: &[f64]| {
                (
                    v.first().copied().unwrap_or(f64::NAN),
                    v.last().copied().unwrap_or(f64::NAN),
                )
            };
            let (omin, omax) = ends(&objectives);
            let (cmin, cmax) = ends(&converged);
            let (dmin, dmax) = ends(&deltas);
            PlotRow {
                rho,
                runs: group.len(),
                converged_fraction: group.iter().filter(|r| r.converged).count() as f64
                    / group.len() as f64,
                objective_min: omin,
                objective_max: omax,
                objective_median: median(&objectives),
                converged_spread: cmax - cmin,
                log10_delta_min: dmin,
                log10_delta_median: median(&deltas),
                log10_delta_max: dmax,
            }
        })
        .collect())
}

pub fn write_plot_csv<W: Write>(rows: &[PlotRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(PLOT_HEADER)?;
    for r in rows {
        w.write_record([
            format_real(r.rho),
            r.runs.to_string(),
            format_real(r.converged_fraction),
            format_real(r.objective_min),
            format_real(r.objective_max),
            format_real(r.objective_median),
            format_real(r.converged_spread),
            format_real(r.log10_delta_min),
            format_real(r.log10_delta_median),
            format_real(r.log10_delta_max),
        ])?;
    }
    w.flush().map_err(|e| crate::error::Error::Csv(e.into()))?;
    Ok(())
}
