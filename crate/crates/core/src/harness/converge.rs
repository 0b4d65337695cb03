use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ExperimentKind};
use super::median;
use crate::costs::ActivationSpec;
use crate::dynamics::solve_lca;
use crate::error::{Error, Result};
use crate::model::TraceRecord;
use crate::synth::{derive_stream, generate, ProblemParams};

/// One LCA run from rest, reduced to its distance-to-truth trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergeRun {
    pub preset: String,
    pub n: usize,
    pub trial: usize,
    pub t_over_tau: Vec<f64>,
    /// `‖a(t) − a₀‖ / ‖a₀‖`
    pub rel_dist: Vec<f64>,
    /// First sample within twice the terminal distance.
    pub time_to_2x: f64,
    /// Time at which the stopping rule fired; `inf` if the budget ran out.
    pub converge_time: f64,
    pub terminal: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergeSummary {
    pub preset: String,
    pub n: usize,
    pub trials: usize,
    pub median_time_to_2x: f64,
    pub median_converge_time: f64,
    pub median_terminal: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergeReport {
    pub runs: Vec<ConvergeRun>,
    pub summary: Vec<ConvergeSummary>,
}

impl ConvergeReport {
    pub fn summary_for(&self, preset: &str, n: usize) -> Option<&ConvergeSummary> {
        self.summary.iter().find(|s| s.preset == preset && s.n == n)
    }

    pub fn runs_for<'a>(
        &'a self,
        preset: &'a str,
        n: usize,
    ) -> impl Iterator<Item = &'a ConvergeRun> {
        self.runs
            .iter()
            .filter(move |r| r.preset == preset && r.n == n)
    }
}

/// First recorded time at which `rel_err` is within `factor` times its terminal value.
pub fn time_to_within(trace: &[TraceRecord], factor: f64) -> Option<f64> {
    let terminal = trace.last()?.rel_err?;
    trace
        .iter()
        .find(|r| r.rel_err.is_some_and(|e| e <= factor * terminal))
        .map(|r| r.t_over_tau)
}

/// Plain-L1 LCA traces for every preset, size and trial.
pub fn run_converge(config: &ExperimentConfig) -> Result<ConvergeReport> {
    config.validate()?;
    if config.kind != ExperimentKind::Converge {
        return Err(Error::InvalidParameter(format!(
            "run_converge needs kind = converge, got {:?}",
            config.kind
        )));
    }
    let c = &config.converge;
    let items: Vec<(usize, usize, usize)> = (0..c.presets.len())
        .flat_map(|p| (0..c.sizes.len()).flat_map(move |s| (0..c.trials).map(move |t| (p, s, t))))
        .collect();
    let runs: Vec<Option<ConvergeRun>> = super::with_threads(config.threads, || {
        items
            .par_iter()
            .map(|&(p, s, t)| {
                let preset = &c.presets[p];
                let params = ProblemParams::new(c.sizes[s], preset.delta, preset.rho)
                    .with_noise_var(config.noise_var)
                    .with_stream(derive_stream(config.seed, t, (p, s)));
                let (problem, _) = generate(&params).ok()?;
                let spec = ActivationSpec::l1(problem.lambda()).ok()?;
                let sol = solve_lca(&problem, &spec, &config.lca).ok()?;
                let rel_dist: Vec<f64> = sol
                    .trace
                    .iter()
                    .map(|r| r.rel_err.unwrap_or(f64::NAN))
                    .collect();
                Some(ConvergeRun {
                    preset: preset.name.clone(),
                    n: c.sizes[s],
                    trial: t,
                    t_over_tau: sol.trace.iter().map(|r| r.t_over_tau).collect(),
                    time_to_2x: time_to_within(&sol.trace, 2.0).unwrap_or(f64::NAN),
                    converge_time: if sol.converged {
                        sol.simulated_time
                    } else {
                        f64::INFINITY
                    },
                    terminal: rel_dist.last().copied().unwrap_or(f64::NAN),
                    rel_dist,
                })
            })
            .collect()
    })?;

    let mut summary = Vec::new();
    for (group, chunk) in runs.chunks(c.trials).enumerate() {
        let (p, s) = (group / c.sizes.len(), group % c.sizes.len());
        let ok: Vec<&ConvergeRun> = chunk.iter().flatten().collect();
        let pick =
            |f: fn(&ConvergeRun) -> f64| median(&ok.iter().map(|r| f(r)).collect::<Vec<_>>());
        summary.push(ConvergeSummary {
            preset: c.presets[p].name.clone(),
            n: c.sizes[s],
            trials: ok.len(),
            median_time_to_2x: pick(|r| r.time_to_2x),
            median_converge_time: pick(|r| r.converge_time),
            median_terminal: pick(|r| r.terminal),
        });
    }
    Ok(ConvergeReport {
        runs: runs.into_iter().flatten().collect(),
        summary,
    })
}
