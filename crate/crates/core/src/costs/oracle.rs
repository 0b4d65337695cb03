//! Brute-force proximal oracle: ground truth for the activation functions.
//!
//! `prox(u) = argmin_a ½(u − a)² + λ C(a)` searched over the grid of multiples of
//! `resolution` inside `[−2|u|, 2|u|]`, which contains every minimizer when `C(a) ≥ C(0)`.
//! Costs that are infinite at the origin (the log barrier) search the whole tabulated range
//! instead. Ties go to the candidate of smaller magnitude. This module is verification
//! tooling; the solvers never call it.

use super::ActivationSpec;
use crate::error::{Error, Result};

/// Grid minimizer for one node of a separable spec.
///
/// The penalty `λ C(k·resolution)` is tabulated once, so repeated queries only pay for the
/// quadratic term.
#[derive(Debug, Clone)]
pub struct ProxOracle {
    resolution: f64,
    /// `λ C(k·res)` for `k = 0..=K` (nonnegative side) and `k = 0..=K` (negative side).
    pos: Vec<f64>,
    neg: Vec<f64>,
}

impl ProxOracle {
    /// Tabulate the penalty for queries with `|u| ≤ u_max`.
    pub fn new(spec: &ActivationSpec, node: usize, resolution: f64, u_max: f64) -> Result<Self> {
        if !(resolution > 0.0 && resolution <= 1e-3) {
            return Err(Error::InvalidParameter(format!(
                "oracle resolution must lie in (0, 1e-3], got {resolution}"
            )));
        }
        if !spec.is_separable() {
            return Err(Error::InvalidParameter(
                "scalar oracle needs a separable family".into(),
            ));
        }
        let k_max = (2.0 * u_max.abs() / resolution).floor() as usize;
        let lambda = spec.lambda();
        let table = |sign: f64| -> Vec<f64> {
            (0..=k_max)
                .map(|k| lambda * spec.scalar_cost(sign * k as f64 * resolution, node))
                .collect()
        };
        Ok(ProxOracle {
            resolution,
            pos: table(1.0),
            neg: table(-1.0),
        })
    }

    pub fn prox(&self, u: f64) -> f64 {
        let k_max = if self.pos[0].is_finite() {
            ((2.0 * u.abs() / self.resolution).floor() as usize).min(self.pos.len() - 1)
        } else {
            self.pos.len() - 1
        };
        let objective = |a: f64, penalty: f64| 0.5 * (u - a) * (u - a) + penalty;
        let mut best_a = 0.0;
        let mut best = objective(0.0, self.pos[0]);
        for k in 1..=k_max {
            let a = k as f64 * self.resolution;
            for (cand, penalty) in [(a, self.pos[k]), (-a, self.neg[k])] {
                let v = objective(cand, penalty);
                if v < best {
                    best = v;
                    best_a = cand;
                }
            }
        }
        best_a
    }
}

/// One-off oracle query for node 0 of a separable spec.
pub fn prox_oracle(spec: &ActivationSpec, u: f64, resolution: f64) -> Result<f64> {
    Ok(ProxOracle::new(spec, 0, resolution, u.abs().max(1.0))?.prox(u))
}
