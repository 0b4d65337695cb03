use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ExperimentKind, SolverKind};
use super::mean;
use crate::baseline::{solve_fista, solve_reweighted_iterative, InnerSolver};
use crate::costs::ActivationSpec;
use crate::dynamics::{solve_lca, solve_lca_reweighted};
use crate::error::{Error, Result};
use crate::model::{energy, rel_mse, MeasurementProblem, Solution};
use crate::synth::{derive_stream, generate, ProblemParams};

/// Run one configured solver on a problem at the problem's `λ`.
pub(crate) fn solve_with(
    kind: SolverKind,
    problem: &MeasurementProblem,
    config: &ExperimentConfig,
) -> Result<Solution> {
    let lambda = problem.lambda();
    let rw = &config.reweight;
    match kind {
        SolverKind::Lca => solve_lca(problem, &ActivationSpec::l1(lambda)?, &config.lca),
        SolverKind::Fista => solve_fista(problem, None, &config.fista),
        SolverKind::LcaReweighted => solve_lca_reweighted(
            problem,
            &config.lca,
            rw.gamma,
            lambda * rw.gamma,
            rw.tau_ratio,
        ),
        SolverKind::FistaReweighted => solve_reweighted_iterative(
            problem,
            rw.outer_iters,
            rw.gamma,
            lambda * rw.gamma,
            InnerSolver::Fista,
            &config.lca,
            &config.fista,
        ),
    }
}

/// Simulated time in τ for LCA variants, iterations for the digital ones.
pub(crate) fn solve_time(kind: SolverKind, sol: &Solution) -> f64 {
    match kind {
        SolverKind::Lca | SolverKind::LcaReweighted => sol.simulated_time,
        SolverKind::Fista | SolverKind::FistaReweighted => sol.steps as f64,
    }
}

/// Aggregates for one `(δ, ρ)` cell and solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellStats {
    pub delta: f64,
    pub rho: f64,
    pub solver: SolverKind,
    /// Trials that produced a solution.
    pub trials: usize,
    /// Trials lost to divergence or an invalid instance.
    pub failures: usize,
    pub mean_rel_mse: f64,
    /// Mean BPDN objective `½‖y − Φa‖² + λ‖a‖₁` at termination.
    pub mean_energy: f64,
    /// Mean relative squared distance to the other solvers' solutions on the same instance.
    pub mean_cross_dist: f64,
    pub mean_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultGrid {
    pub deltas: Vec<f64>,
    pub rhos: Vec<f64>,
    pub solvers: Vec<SolverKind>,
    /// Ordered by δ index, then ρ index, then solver.
    pub cells: Vec<CellStats>,
}

impl ResultGrid {
    pub fn cell(&self, i_delta: usize, j_rho: usize, solver: SolverKind) -> Option<&CellStats> {
        let s = self.solvers.iter().position(|k| *k == solver)?;
        self.cells
            .get((i_delta * self.rhos.len() + j_rho) * self.solvers.len() + s)
    }

    /// Grid indices of the point closest to `(delta, rho)`; ties go to the lower index.
    pub fn nearest(&self, delta: f64, rho: f64) -> (usize, usize) {
        let closest = |axis: &[f64], x: f64| {
            axis.iter()
                .enumerate()
                .fold((0, f64::INFINITY), |(bi, bd), (i, v)| {
                    let d = (v - x).abs();
                    if d < bd - 1e-12 {
                        (i, d)
                    } else {
                        (bi, bd)
                    }
                })
                .0
        };
        (closest(&self.deltas, delta), closest(&self.rhos, rho))
    }
}

struct TrialOutcome {
    rel_mse: f64,
    energy: f64,
    time: f64,
    a: Vec<f64>,
}

fn run_trial(config: &ExperimentConfig, params: ProblemParams) -> Vec<Option<TrialOutcome>> {
    let Ok((problem, truth)) = generate(&params) else {
        return config.solvers.iter().map(|_| None).collect();
    };
    let l1 = ActivationSpec::l1(problem.lambda()).expect("generated lambda is positive");
    config
        .solvers
        .iter()
        .map(|&kind| {
            let sol = solve_with(kind, &problem, config).ok()?;
            Some(TrialOutcome {
                rel_mse: rel_mse(&sol.a, &truth).ok()?,
                energy: energy(&problem, &l1, &sol.a).ok()?,
                time: solve_time(kind, &sol),
                a: sol.a,
            })
        })
        .collect()
}

/// Phase-transition grid: every `(δ, ρ)` cell, `trials` seeded instances, every solver.
pub fn run_phase(config: &ExperimentConfig) -> Result<ResultGrid> {
    config.validate()?;
    if config.kind != ExperimentKind::Phase {
        return Err(Error::InvalidParameter(format!(
            "run_phase needs kind = phase, got {:?}",
            config.kind
        )));
    }
    let deltas = ExperimentConfig::axis(config.delta_range, config.grid);
    let rhos = ExperimentConfig::axis(config.rho_range, config.grid);
    let items: Vec<(usize, usize, usize)> = (0..deltas.len())
        .flat_map(|i| (0..rhos.len()).flat_map(move |j| (0..config.trials).map(move |t| (i, j, t))))
        .collect();
    let outcomes: Vec<Vec<Option<TrialOutcome>>> = super::with_threads(config.threads, || {
        items
            .par_iter()
            .map(|&(i, j, t)| {
                let params = ProblemParams::new(config.n, deltas[i], rhos[j])
                    .with_noise_var(config.noise_var)
                    .with_stream(derive_stream(config.seed, t, (i, j)));
                run_trial(config, params)
            })
            .collect()
    })?;

    let ns = config.solvers.len();
    let mut cells = Vec::with_capacity(deltas.len() * rhos.len() * ns);
    for (cell_idx, trials) in outcomes.chunks(config.trials).enumerate() {
        let (i, j) = (cell_idx / rhos.len(), cell_idx % rhos.len());
        for (s, &solver) in config.solvers.iter().enumerate() {
            let ok: Vec<&TrialOutcome> = trials.iter().filter_map(|t| t[s].as_ref()).collect();
            let cross: Vec<f64> = trials
                .iter()
                .filter_map(|t| {
                    let mine = t[s].as_ref()?;
                    let others: Vec<f64> = (0..ns)
                        .filter(|&o| o != s)
                        .filter_map(|o| t[o].as_ref())
                        .map(|other| rel_mse(&mine.a, &other.a).unwrap_or(f64::NAN))
                        .collect();
                    Some(mean(&others))
                })
                .collect();
            cells.push(CellStats {
                delta: deltas[i],
                rho: rhos[j],
                solver,
                trials: ok.len(),
                failures: trials.len() - ok.len(),
                mean_rel_mse: mean(&ok.iter().map(|o| o.rel_mse).collect::<Vec<_>>()),
                mean_energy: mean(&ok.iter().map(|o| o.energy).collect::<Vec<_>>()),
                mean_cross_dist: mean(&cross),
                mean_time: mean(&ok.iter().map(|o| o.time).collect::<Vec<_>>()),
            });
        }
    }
    Ok(ResultGrid {
        deltas,
        rhos,
        solvers: config.solvers.clone(),
        cells,
    })
}
