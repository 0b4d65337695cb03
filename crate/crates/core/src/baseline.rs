//! Digital reference solvers: ISTA/FISTA for (weighted) BPDN, the duality-gap certificate,
//! and the iterative re-weighted ℓ1 outer loop.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::costs::{soft_threshold, weight_update_l1, ActivationSpec, Family};
use crate::dynamics::{solve_lca, SolverOptions};
use crate::error::{Error, Result};
use crate::model::{check_len, dot, rel_dist, residual, MeasurementProblem, Solution, TraceRecord};

pub const POWER_ITERS: usize = 200;
pub const POWER_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BaselineOptions {
    pub max_iters: usize,
    pub gap_tol: f64,
    /// Fixed step; `None` uses `1/L` with `L = ‖Φ‖₂²` from power iteration.
    pub step: Option<f64>,
    /// FISTA momentum; plain ISTA when off.
    pub acceleration: bool,
}

impl Default for BaselineOptions {
    fn default() -> Self {
        BaselineOptions {
            max_iters: 20_000,
            gap_tol: 1e-4,
            step: None,
            acceleration: true,
        }
    }
}

impl BaselineOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.gap_tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "gap_tol must be positive, got {}",
                self.gap_tol
            )));
        }
        if let Some(step) = self.step {
            if !(step > 0.0 && step.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "step must be positive, got {step}"
                )));
            }
        }
        Ok(())
    }
}

/// The ℓ1-type penalty whose dual certificate is being computed.
#[derive(Debug, Clone, Copy)]
pub enum Penalty<'a> {
    Uniform(f64),
    /// Absolute per-node thresholds `λ_i`.
    PerNode(&'a [f64]),
    Block {
        groups: &'a [Vec<usize>],
        lambda: f64,
    },
}

impl Penalty<'_> {
    fn value(&self, a: &[f64]) -> f64 {
        match *self {
            Penalty::Uniform(lambda) => lambda * a.iter().map(|v| v.abs()).sum::<f64>(),
            Penalty::PerNode(lambdas) => lambdas.iter().zip(a).map(|(l, v)| l * v.abs()).sum(),
            Penalty::Block { groups, lambda } => {
                lambda
                    * groups
                        .iter()
                        .map(|g| g.iter().map(|&i| a[i] * a[i]).sum::<f64>().sqrt())
                        .sum::<f64>()
            }
        }
    }

    /// Largest `s ≤ 1` making `s·r` dual feasible, given `corr = Φᵀr`.
    fn dual_scale(&self, corr: &[f64]) -> f64 {
        let mut scale: f64 = 1.0;
        match *self {
            Penalty::Uniform(lambda) => {
                for c in corr {
                    if c.abs() > 0.0 {
                        scale = scale.min(lambda / c.abs());
                    }
                }
            }
            Penalty::PerNode(lambdas) => {
                for (l, c) in lambdas.iter().zip(corr) {
                    if c.abs() > 0.0 {
                        scale = scale.min(l / c.abs());
                    }
                }
            }
            Penalty::Block { groups, lambda } => {
                for g in groups {
                    let norm = g.iter().map(|&i| corr[i] * corr[i]).sum::<f64>().sqrt();
                    if norm > 0.0 {
                        scale = scale.min(lambda / norm);
                    }
                }
            }
        }
        scale
    }

    fn check(&self, n: usize) -> Result<()> {
        match *self {
            Penalty::PerNode(lambdas) => check_len(lambdas, n, "per-node thresholds"),
            Penalty::Block { groups, .. } => {
                let covered: usize = groups.iter().map(Vec::len).sum();
                if covered != n || groups.iter().flatten().any(|&i| i >= n) {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        got: covered,
                        context: "group partition",
                    });
                }
                Ok(())
            }
            Penalty::Uniform(_) => Ok(()),
        }
    }
}

/// Gap from precomputed pieces: `corr = Φᵀr`, `rr = ‖r‖²`, `ry = ⟨r, y⟩` with `r = y − Φa`.
pub(crate) fn gap_from_parts(
    penalty: Penalty<'_>,
    a: &[f64],
    corr: &[f64],
    rr: f64,
    ry: f64,
) -> (f64, f64) {
    let primal = 0.5 * rr + penalty.value(a);
    let s = penalty.dual_scale(corr);
    let dual = s * ry - 0.5 * s * s * rr;
    let gap = (primal - dual).max(0.0);
    (gap, gap / primal.abs().max(1.0))
}

/// `(gap, rel_gap)` for a penalty, evaluated from scratch.
pub fn penalty_duality_gap(
    problem: &MeasurementProblem,
    penalty: Penalty<'_>,
    a: &[f64],
) -> Result<(f64, f64)> {
    check_len(a, problem.n(), "coefficient vector")?;
    penalty.check(problem.n())?;
    let r = residual(problem, a);
    let corr = problem.phi().matvec_t(&r);
    Ok(gap_from_parts(
        penalty,
        a,
        &corr,
        dot(&r, &r),
        dot(&r, problem.y()),
    ))
}

/// Duality gap of `½‖y − Φa‖² + Σ λ_i |a_i|`; `weights` are absolute thresholds, and
/// `None` means `λ_i = problem.lambda()`.
pub fn duality_gap(
    problem: &MeasurementProblem,
    weights: Option<&[f64]>,
    a: &[f64],
) -> Result<(f64, f64)> {
    let penalty = match weights {
        Some(w) => Penalty::PerNode(w),
        None => Penalty::Uniform(problem.lambda()),
    };
    penalty_duality_gap(problem, penalty, a)
}

/// Duality gap of the group-lasso objective `½‖y − Φa‖² + λ Σ_g ‖a_g‖₂`.
pub fn block_duality_gap(
    problem: &MeasurementProblem,
    groups: &[Vec<usize>],
    lambda: f64,
    a: &[f64],
) -> Result<(f64, f64)> {
    penalty_duality_gap(problem, Penalty::Block { groups, lambda }, a)
}

/// Penalty for a spec whose family has a gap certificate, with the weight multipliers resolved.
pub(crate) fn spec_penalty(spec: &ActivationSpec) -> Option<PenaltyBuf> {
    let lambda = spec.lambda();
    match spec.family() {
        Family::L1 => Some(PenaltyBuf::Uniform(lambda)),
        Family::WeightedL1 { weights } => Some(PenaltyBuf::PerNode(
            weights.iter().map(|w| lambda * w).collect(),
        )),
        Family::BlockL1 { groups } => Some(PenaltyBuf::Block(groups.clone(), lambda)),
        _ => None,
    }
}

/// Owned form of [`Penalty`].
#[derive(Debug, Clone)]
pub(crate) enum PenaltyBuf {
    Uniform(f64),
    PerNode(Vec<f64>),
    Block(Vec<Vec<usize>>, f64),
}

impl PenaltyBuf {
    pub(crate) fn borrow(&self) -> Penalty<'_> {
        match self {
            PenaltyBuf::Uniform(l) => Penalty::Uniform(*l),
            PenaltyBuf::PerNode(ls) => Penalty::PerNode(ls),
            PenaltyBuf::Block(groups, lambda) => Penalty::Block {
                groups,
                lambda: *lambda,
            },
        }
    }
}

/// Relative gap for specs that admit one (L1, weighted L1, block L1).
pub fn spec_duality_gap(
    problem: &MeasurementProblem,
    spec: &ActivationSpec,
    a: &[f64],
) -> Result<Option<f64>> {
    match spec_penalty(spec) {
        Some(p) => Ok(Some(penalty_duality_gap(problem, p.borrow(), a)?.1)),
        None => Ok(None),
    }
}

/// ISTA/FISTA on `½‖y − Φa‖² + Σ λ_i |a_i|`, started from zero.
///
/// The trace has one record per iteration, with the iteration index in `t_over_tau`.
pub fn solve_fista(
    problem: &MeasurementProblem,
    weights: Option<&[f64]>,
    opts: &BaselineOptions,
) -> Result<Solution> {
    opts.validate()?;
    let start = Instant::now();
    let n = problem.n();
    let lambdas: Vec<f64> = match weights {
        Some(w) => {
            check_len(w, n, "per-node thresholds")?;
            if w.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
                return Err(Error::InvalidParameter(
                    "thresholds must be positive".into(),
                ));
            }
            w.to_vec()
        }
        None => vec![problem.lambda(); n],
    };
    let penalty = Penalty::PerNode(&lambdas);
    let step = match opts.step {
        Some(s) => s,
        None => {
            let l = problem.phi().gram_spectral_norm(POWER_ITERS, POWER_TOL);
            if l == 0.0 {
                1.0
            } else {
                1.0 / l
            }
        }
    };
    let truth = problem.truth().filter(|t| t.iter().any(|v| *v != 0.0));
    let phi = problem.phi();
    let y = problem.y();

    let mut x = vec![0.0; n];
    let mut z = x.clone();
    let mut t_k = 1.0f64;
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iters = 0;

    // state at x: residual, correlation, gap
    let evaluate = |x: &[f64], k: usize, trace: &mut Vec<TraceRecord>| -> Result<(f64, Vec<f64>)> {
        let r = residual(problem, x);
        let corr = phi.matvec_t(&r);
        let rr = dot(&r, &r);
        let (_, rel) = gap_from_parts(penalty, x, &corr, rr, dot(&r, y));
        let energy = 0.5 * rr + penalty.value(x);
        if !energy.is_finite() {
            return Err(Error::Divergence {
                eta: step,
                t_over_tau: k as f64,
            });
        }
        trace.push(TraceRecord {
            t_over_tau: k as f64,
            energy,
            rel_err: truth.map(|t| rel_dist(x, t)).transpose()?,
            gap: Some(rel),
            lambda_now: problem.lambda(),
        });
        Ok((rel, corr))
    };

    let (rel, mut corr) = evaluate(&x, 0, &mut trace)?;
    if rel <= opts.gap_tol {
        converged = true;
    }
    while !converged && iters < opts.max_iters {
        // gradient step at the extrapolated point z (z = x for plain ISTA)
        let grad_corr = if opts.acceleration && iters > 0 {
            phi.matvec_t(&residual(problem, &z))
        } else {
            corr.clone()
        };
        let base: &[f64] = if opts.acceleration { &z } else { &x };
        let next: Vec<f64> = base
            .iter()
            .zip(&grad_corr)
            .zip(&lambdas)
            .map(|((b, g), l)| soft_threshold(b + step * g, step * l))
            .collect();
        let x_prev = std::mem::replace(&mut x, next);
        iters += 1;
        if opts.acceleration {
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t_k * t_k).sqrt());
            let beta = (t_k - 1.0) / t_next;
            for ((zi, xi), pi) in z.iter_mut().zip(&x).zip(&x_prev) {
                *zi = xi + beta * (xi - pi);
            }
            t_k = t_next;
        }
        let (rel, c) = evaluate(&x, iters, &mut trace)?;
        corr = c;
        converged = rel <= opts.gap_tol;
    }
    Ok(Solution {
        a: x,
        trace,
        converged,
        wallclock: start.elapsed().as_secs_f64(),
        simulated_time: 0.0,
        steps: iters,
        weights: weights.map(<[f64]>::to_vec),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InnerSolver {
    Fista,
    Lca,
}

/// Alternate weighted-ℓ1 solves with the update `λ_i = ν / (|a_i| + γ)`.
///
/// Every node starts at `λ_i = problem.lambda()`. Each inner LCA solve restarts from rest
/// (with the options' continuation, if enabled) at the current weights. The returned trace
/// concatenates the inner traces on a single time axis, simulated time for the LCA and
/// cumulative iterations for FISTA; `weights` holds the thresholds used in the final solve.
pub fn solve_reweighted_iterative(
    problem: &MeasurementProblem,
    outer_iters: usize,
    gamma: f64,
    nu: f64,
    inner: InnerSolver,
    lca_opts: &SolverOptions,
    fista_opts: &BaselineOptions,
) -> Result<Solution> {
    if outer_iters == 0 {
        return Err(Error::InvalidParameter(
            "outer_iters must be at least 1".into(),
        ));
    }
    let start = Instant::now();
    let lambda = problem.lambda();
    let mut thresholds = vec![lambda; problem.n()];
    let mut trace = Vec::new();
    let mut offset = 0.0;
    let mut simulated = 0.0;
    let mut steps = 0;
    let mut last = None;
    for outer in 0..outer_iters {
        if outer > 0 {
            let a: &Solution = last.as_ref().expect("previous solve");
            thresholds = weight_update_l1(&a.a, gamma, nu)?;
        }
        let sol = match inner {
            InnerSolver::Fista => solve_fista(problem, Some(&thresholds), fista_opts)?,
            InnerSolver::Lca => {
                let multipliers = thresholds.iter().map(|t| t / lambda).collect();
                let spec = ActivationSpec::new(
                    Family::WeightedL1 {
                        weights: multipliers,
                    },
                    lambda,
                )?;
                solve_lca(problem, &spec, lca_opts)?
            }
        };
        let span = match inner {
            InnerSolver::Fista => sol.steps as f64,
            InnerSolver::Lca => sol.simulated_time,
        };
        trace.extend(sol.trace.iter().map(|r| TraceRecord {
            t_over_tau: r.t_over_tau + offset,
            ..*r
        }));
        offset += span;
        simulated += sol.simulated_time;
        steps += sol.steps;
        last = Some(sol);
    }
    let last = last.expect("at least one outer iteration");
    Ok(Solution {
        a: last.a,
        trace,
        converged: last.converged,
        wallclock: start.elapsed().as_secs_f64(),
        simulated_time: simulated,
        steps,
        weights: Some(thresholds),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{energy, DenseMatrix};

    fn rotation() -> DenseMatrix {
        let (c, s) = (0.6, 0.8);
        DenseMatrix::from_rows(&[vec![c, -s], vec![s, c]]).unwrap()
    }

    #[test]
    fn orthonormal_closed_form() {
        let p = MeasurementProblem::new(rotation(), vec![1.0, -0.3], 0.2, None, None).unwrap();
        let sol = solve_fista(
            &p,
            None,
            &BaselineOptions {
                gap_tol: 1e-14,
                ..Default::default()
            },
        )
        .unwrap();
        let expect: Vec<f64> = p.drive().iter().map(|b| soft_threshold(*b, 0.2)).collect();
        for (a, e) in sol.a.iter().zip(&expect) {
            assert!((a - e).abs() <= 1e-10);
        }
        let (gap, _) = duality_gap(&p, None, &expect).unwrap();
        assert!(gap <= 1e-10);
    }

    #[test]
    fn large_lambda_gives_zero() {
        let p = MeasurementProblem::new(rotation(), vec![1.0, -0.3], 5.0, None, None).unwrap();
        let (gap, rel) = duality_gap(&p, None, &[0.0, 0.0]).unwrap();
        assert_eq!((gap, rel), (0.0, 0.0));
        let sol = solve_fista(&p, None, &BaselineOptions::default()).unwrap();
        assert_eq!(sol.a, vec![0.0, 0.0]);
        assert!(sol.converged);
        assert_eq!(sol.steps, 0);
    }

    #[test]
    fn ista_energy_is_monotone() {
        let phi = DenseMatrix::from_rows(&[
            vec![1.0, 0.5, -0.2, 0.3],
            vec![0.1, 0.8, 0.4, -0.6],
            vec![-0.3, 0.2, 0.9, 0.5],
        ])
        .unwrap();
        let p = MeasurementProblem::new(phi, vec![0.7, -0.2, 0.4], 0.05, None, None).unwrap();
        let opts = BaselineOptions {
            acceleration: false,
            gap_tol: 1e-12,
            ..Default::default()
        };
        let sol = solve_fista(&p, None, &opts).unwrap();
        assert!(sol.converged);
        for w in sol.trace.windows(2) {
            assert!(w[1].energy <= w[0].energy + 1e-15);
        }
        let spec = ActivationSpec::l1(0.05).unwrap();
        let e = energy(&p, &spec, &sol.a).unwrap();
        assert!((e - sol.trace.last().unwrap().energy).abs() <= 1e-12);
    }

    #[test]
    fn block_gap_at_zero() {
        let p = MeasurementProblem::new(rotation(), vec![1.0, -0.3], 2.0, None, None).unwrap();
        let groups = vec![vec![0, 1]];
        let (gap, _) = block_duality_gap(&p, &groups, 2.0, &[0.0, 0.0]).unwrap();
        assert_eq!(gap, 0.0);
        let (gap, _) = block_duality_gap(&p, &groups, 0.5, &[0.0, 0.0]).unwrap();
        assert!(gap > 0.0);
    }

    #[test]
    fn one_outer_iteration_is_plain_weighted_solve() {
        let p = MeasurementProblem::new(rotation(), vec![1.0, -0.3], 0.2, None, None).unwrap();
        let opts = BaselineOptions::default();
        let rw = solve_reweighted_iterative(
            &p,
            1,
            0.01,
            0.002,
            InnerSolver::Fista,
            &SolverOptions::default(),
            &opts,
        )
        .unwrap();
        let plain = solve_fista(&p, Some(&[0.2, 0.2]), &opts).unwrap();
        assert_eq!(rw.a, plain.a);
    }
}
