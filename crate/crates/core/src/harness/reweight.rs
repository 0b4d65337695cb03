use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ExperimentKind};
use super::{mean, median};
use crate::baseline::{solve_reweighted_iterative, InnerSolver};
use crate::costs::ActivationSpec;
use crate::dynamics::{solve_lca, solve_lca_reweighted, weight_residual, SolverOptions};
use crate::error::{Error, Result};
use crate::model::rel_mse;
use crate::synth::{derive_stream, generate, ProblemParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Plain L1 LCA, the reference.
    PlainL1,
    IterativeFista,
    IterativeLca,
    Dynamic,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::PlainL1,
        Variant::IterativeFista,
        Variant::IterativeLca,
        Variant::Dynamic,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Variant::PlainL1 => "plain_l1",
            Variant::IterativeFista => "iterative_fista",
            Variant::IterativeLca => "iterative_lca",
            Variant::Dynamic => "dynamic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReweightOutcome {
    pub rel_mse: f64,
    /// Total simulated time in τ (`NaN` for the digital variant).
    pub time: f64,
    pub converged: bool,
    /// `max_i |λ_i − ν/(|a_i|+γ)|` relative to `ν/γ`, dynamic variant only.
    pub weight_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReweightPoint {
    pub rho: f64,
    pub variant: Variant,
    /// Indexed by trial; `None` where the solver failed.
    pub outcomes: Vec<Option<ReweightOutcome>>,
}

impl ReweightPoint {
    pub fn mean_rel_mse(&self) -> f64 {
        mean(
            &self
                .outcomes
                .iter()
                .flatten()
                .map(|o| o.rel_mse)
                .collect::<Vec<_>>(),
        )
    }

    pub fn median_time(&self) -> f64 {
        median(
            &self
                .outcomes
                .iter()
                .flatten()
                .map(|o| o.time)
                .collect::<Vec<_>>(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReweightTable {
    pub n: usize,
    pub delta: f64,
    /// Ordered by ρ, then [`Variant::ALL`].
    pub points: Vec<ReweightPoint>,
}

impl ReweightTable {
    pub fn point(&self, rho_index: usize, variant: Variant) -> &ReweightPoint {
        let v = Variant::ALL
            .iter()
            .position(|x| *x == variant)
            .expect("known variant");
        &self.points[rho_index * Variant::ALL.len() + v]
    }

    pub fn rhos(&self) -> Vec<f64> {
        self.points
            .iter()
            .step_by(Variant::ALL.len())
            .map(|p| p.rho)
            .collect()
    }
}

fn run_variants(config: &ExperimentConfig, params: ProblemParams) -> Vec<Option<ReweightOutcome>> {
    let rw = &config.reweight;
    let Ok((problem, truth)) = generate(&params) else {
        return vec![None; Variant::ALL.len()];
    };
    let lambda = problem.lambda();
    let (gamma, nu) = (rw.gamma, lambda * rw.gamma);
    let lca = SolverOptions {
        max_time: rw.max_time,
        ..config.lca
    };
    Variant::ALL
        .iter()
        .map(|variant| {
            let sol = match variant {
                Variant::PlainL1 => solve_lca(&problem, &ActivationSpec::l1(lambda).ok()?, &lca),
                Variant::IterativeFista => solve_reweighted_iterative(
                    &problem,
                    rw.outer_iters,
                    gamma,
                    nu,
                    InnerSolver::Fista,
                    &lca,
                    &config.fista,
                ),
                Variant::IterativeLca => solve_reweighted_iterative(
                    &problem,
                    rw.outer_iters,
                    gamma,
                    nu,
                    InnerSolver::Lca,
                    &lca,
                    &config.fista,
                ),
                Variant::Dynamic => solve_lca_reweighted(&problem, &lca, gamma, nu, rw.tau_ratio),
            }
            .ok()?;
            let weight_residual = match variant {
                Variant::Dynamic => sol
                    .weights
                    .as_ref()
                    .map(|w| weight_residual(w, &sol.a, gamma, nu) / (nu / gamma)),
                _ => None,
            };
            Some(ReweightOutcome {
                rel_mse: rel_mse(&sol.a, &truth).ok()?,
                time: match variant {
                    Variant::IterativeFista => f64::NAN,
                    _ => sol.simulated_time,
                },
                converged: sol.converged,
                weight_residual,
            })
        })
        .collect()
}

/// Sweep `ρ` at fixed `(n, δ)`, comparing plain L1, iterative and dynamic re-weighting.
pub fn run_reweight(config: &ExperimentConfig) -> Result<ReweightTable> {
    config.validate()?;
    if config.kind != ExperimentKind::Reweight {
        return Err(Error::InvalidParameter(format!(
            "run_reweight needs kind = reweight, got {:?}",
            config.kind
        )));
    }
    let rw = &config.reweight;
    let items: Vec<(usize, usize)> = (0..rw.rhos.len())
        .flat_map(|r| (0..rw.trials).map(move |t| (r, t)))
        .collect();
    let outcomes: Vec<Vec<Option<ReweightOutcome>>> = super::with_threads(config.threads, || {
        items
            .par_iter()
            .map(|&(r, t)| {
                let params = ProblemParams::new(config.n, rw.delta, rw.rhos[r])
                    .with_noise_var(config.noise_var)
                    .with_stream(derive_stream(config.seed, t, (r, 0)));
                run_variants(config, params)
            })
            .collect()
    })?;
    let mut points = Vec::new();
    for (r, trials) in outcomes.chunks(rw.trials).enumerate() {
        for (v, &variant) in Variant::ALL.iter().enumerate() {
            points.push(ReweightPoint {
                rho: rw.rhos[r],
                variant,
                outcomes: trials.iter().map(|t| t[v]).collect(),
            });
        }
    }
    Ok(ReweightTable {
        n: config.n,
        delta: rw.delta,
        points,
    })
}
