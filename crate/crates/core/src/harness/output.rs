use std::fmt::Write;
use std::path::Path;

use super::activations::ActivationTable;
use super::converge::ConvergeReport;
use super::median;
use super::phase::ResultGrid;
use super::reweight::{ReweightTable, Variant};
use super::svg::{heatmaps, line_plot, Heatmap, LinePlot, Series};
use crate::error::{Error, Result};
use crate::model::TraceRecord;

/// Reals as 17 significant digits; `nan`/`inf` spelled out.
pub fn fmt_real(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "nan".into(), fmt_real)
}

/// `t_over_tau,energy,rel_err,gap,lambda_now`
pub fn trace_csv(trace: &[TraceRecord]) -> String {
    let mut out = String::from("t_over_tau,energy,rel_err,gap,lambda_now\n");
    for r in trace {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fmt_real(r.t_over_tau),
            fmt_real(r.energy),
            opt(r.rel_err),
            opt(r.gap),
            fmt_real(r.lambda_now)
        );
    }
    out
}

/// Results that render to a CSV table and an SVG figure.
pub trait Tabular {
    fn csv(&self) -> String;
    fn svg(&self) -> String;
}

fn write(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub fn emit_csv(results: &impl Tabular, path: &Path) -> Result<()> {
    write(path, &results.csv())
}

pub fn emit_svg(results: &impl Tabular, path: &Path) -> Result<()> {
    write(path, &results.svg())
}

impl Tabular for ResultGrid {
    /// `delta,rho,solver,trials,mean_rel_mse,mean_energy,mean_cross_dist,mean_time`
    fn csv(&self) -> String {
        let mut out = String::from(
            "delta,rho,solver,trials,mean_rel_mse,mean_energy,mean_cross_dist,mean_time\n",
        );
        for c in &self.cells {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                fmt_real(c.delta),
                fmt_real(c.rho),
                c.solver.name(),
                c.trials,
                fmt_real(c.mean_rel_mse),
                fmt_real(c.mean_energy),
                fmt_real(c.mean_cross_dist),
                fmt_real(c.mean_time)
            );
        }
        out
    }

    /// One heatmap of mean rel-MSE per solver, `δ` across and `ρ` up.
    fn svg(&self) -> String {
        let panels: Vec<Heatmap> = self
            .solvers
            .iter()
            .map(|&s| Heatmap {
                title: format!("{} mean rel. MSE", s.name()),
                xs: self.deltas.clone(),
                ys: self.rhos.clone(),
                values: (0..self.deltas.len())
                    .flat_map(|i| (0..self.rhos.len()).map(move |j| (i, j)))
                    .map(|(i, j)| self.cell(i, j, s).map_or(f64::NAN, |c| c.mean_rel_mse))
                    .collect(),
            })
            .collect();
        heatmaps(&panels, "delta = M/N", "rho = S/M", -4.0, 0.0)
    }
}

impl ConvergeReport {
    /// Long-format traces: `preset,n,trial,t_over_tau,rel_dist`.
    pub fn traces_csv(&self) -> String {
        let mut out = String::from("preset,n,trial,t_over_tau,rel_dist\n");
        for r in &self.runs {
            for (t, d) in r.t_over_tau.iter().zip(&r.rel_dist) {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    r.preset,
                    r.n,
                    r.trial,
                    fmt_real(*t),
                    fmt_real(*d)
                );
            }
        }
        out
    }
}

impl Tabular for ConvergeReport {
    /// `preset,n,trials,median_time_to_2x,median_converge_time,median_terminal_rel_dist`
    fn csv(&self) -> String {
        let mut out = String::from(
            "preset,n,trials,median_time_to_2x,median_converge_time,median_terminal_rel_dist\n",
        );
        for s in &self.summary {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                s.preset,
                s.n,
                s.trials,
                fmt_real(s.median_time_to_2x),
                fmt_real(s.median_converge_time),
                fmt_real(s.median_terminal)
            );
        }
        out
    }

    /// Median distance to truth against `t/τ` (log axis), one line per preset and size.
    fn svg(&self) -> String {
        let series = self
            .summary
            .iter()
            .map(|s| {
                let runs: Vec<_> = self.runs_for(&s.preset, s.n).collect();
                let len = runs.iter().map(|r| r.t_over_tau.len()).max().unwrap_or(0);
                // runs share the sampling grid; shorter (converged) runs hold their last value
                let points = (0..len)
                    .filter_map(|k| {
                        let longest = runs.iter().find(|r| r.t_over_tau.len() == len)?;
                        let vals: Vec<f64> = runs
                            .iter()
                            .map(|r| {
                                r.rel_dist
                                    .get(k)
                                    .or(r.rel_dist.last())
                                    .copied()
                                    .unwrap_or(f64::NAN)
                            })
                            .collect();
                        Some((longest.t_over_tau[k], median(&vals)))
                    })
                    .collect();
                Series {
                    name: format!("{} N={}", s.preset, s.n),
                    points,
                }
            })
            .collect();
        line_plot(&LinePlot {
            title: "LCA convergence (median over trials)".into(),
            x_label: "t / tau".into(),
            y_label: "relative distance to truth".into(),
            log_x: true,
            log_y: true,
            series,
        })
    }
}

impl Tabular for ReweightTable {
    /// `rho,variant,trials,mean_rel_mse,median_time`
    fn csv(&self) -> String {
        let mut out = String::from("rho,variant,trials,mean_rel_mse,median_time\n");
        for p in &self.points {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                fmt_real(p.rho),
                p.variant.name(),
                p.outcomes.iter().flatten().count(),
                fmt_real(p.mean_rel_mse()),
                fmt_real(p.median_time())
            );
        }
        out
    }

    fn svg(&self) -> String {
        let series = Variant::ALL
            .iter()
            .map(|&v| Series {
                name: v.name().into(),
                points: self
                    .points
                    .iter()
                    .filter(|p| p.variant == v)
                    .map(|p| (p.rho, p.mean_rel_mse()))
                    .collect(),
            })
            .collect();
        line_plot(&LinePlot {
            title: format!("Re-weighted l1, N={}, delta={}", self.n, self.delta),
            x_label: "rho = S/M".into(),
            y_label: "mean relative MSE".into(),
            log_x: false,
            log_y: true,
            series,
        })
    }
}

impl Tabular for ActivationTable {
    /// Long format: `family,u,activation,cost`.
    fn csv(&self) -> String {
        let mut out = String::from("family,u,activation,cost\n");
        for col in &self.columns {
            for (k, u) in self.u.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{},{},{},{}",
                    col.family,
                    fmt_real(*u),
                    fmt_real(col.activation[k]),
                    fmt_real(col.cost[k])
                );
            }
        }
        out
    }

    fn svg(&self) -> String {
        let series = self
            .columns
            .iter()
            .map(|col| Series {
                name: col.family.clone(),
                points: self
                    .u
                    .iter()
                    .copied()
                    .zip(col.activation.iter().copied())
                    .collect(),
            })
            .collect();
        line_plot(&LinePlot {
            title: format!("Activation functions, lambda = {}", self.lambda),
            x_label: "u".into(),
            y_label: "a = T(u)".into(),
            log_x: false,
            log_y: false,
            series,
        })
    }
}
