//! The LCA as an integrated ODE.
//!
//! `u̇ = Φᵀy − u − (ΦᵀΦ − I) a`, `a = T_λ(u)`, integrated by forward Euler with step `η = dt/τ`.
//! Time is measured in units of the node time constant `τ`.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::baseline::{
    gap_from_parts, penalty_duality_gap, spec_duality_gap, spec_penalty, Penalty,
};
use crate::costs::{soft_threshold, ActivationSpec, Family};
use crate::error::{Error, Result};
use crate::model::{
    dot, energy, gram_minus_identity, norm_inf, rel_dist, DenseMatrix, MeasurementProblem,
    Solution, TraceRecord,
};

/// `λ = 0.01‖Φᵀy‖∞`
pub const LAMBDA_RULE_FRACTION: f64 = 0.01;
/// Step halvings allowed before a run is declared divergent.
pub const MAX_HALVINGS: u32 = 10;
/// `‖Δa‖∞` per unit `τ` below which a run without a gap certificate is stationary.
pub const STATIONARY_RATE: f64 = 1e-9;
/// Re-weighted steady state: weight residual relative to `ν/γ`.
pub const WEIGHT_RESIDUAL_TOL: f64 = 1e-6;
/// Lower clamp on re-weighted thresholds, relative to `ν/γ`.
pub const WEIGHT_FLOOR: f64 = 1e-9;

/// `0.01‖Φᵀy‖∞`; zero measurements have no meaningful tradeoff.
pub fn lambda_rule(problem: &MeasurementProblem) -> Result<f64> {
    let peak = norm_inf(&problem.drive());
    if peak == 0.0 {
        return Err(Error::Domain("lambda rule needs Φᵀy ≠ 0".into()));
    }
    Ok(LAMBDA_RULE_FRACTION * peak)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cadence {
    /// Decay once per Euler step.
    PerStep,
    /// Decay once per elapsed `τ`.
    PerTau,
}

/// Geometric decay of `λ` from `‖Φᵀy‖∞` down to a floor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Continuation {
    pub enabled: bool,
    pub decay: f64,
    /// Target `λ`; `None` uses `ActivationSpec::lambda`.
    pub floor: Option<f64>,
    pub cadence: Cadence,
}

impl Default for Continuation {
    fn default() -> Self {
        Continuation {
            enabled: true,
            decay: 0.9,
            floor: None,
            cadence: Cadence::PerStep,
        }
    }
}

impl Continuation {
    pub fn off() -> Self {
        Continuation {
            enabled: false,
            ..Default::default()
        }
    }

    fn next(&self, lambda: f64, floor: f64, t_before: f64, t_after: f64) -> f64 {
        if !self.enabled || lambda <= floor {
            return floor;
        }
        let due = match self.cadence {
            Cadence::PerStep => true,
            Cadence::PerTau => t_after.floor() > t_before.floor(),
        };
        if due {
            (lambda * self.decay).max(floor)
        } else {
            lambda
        }
    }
}

/// How the lateral inhibition `(ΦᵀΦ − I) a` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interaction {
    /// Precompute `ΦᵀΦ − I` once; each step costs `O(N·nnz(a))`.
    Gram,
    /// `Φᵀ(Φa) − a` each step; `O(MN)` per step, no `N²` storage.
    MatVec,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    pub eta: f64,
    pub max_time: f64,
    pub gap_tol: f64,
    pub continuation: Continuation,
    /// Halve `η` (and retry the step) when the energy rises at fixed `λ`.
    pub adaptive: bool,
    pub record_every: f64,
    pub interaction: Interaction,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            eta: 0.05,
            max_time: 200.0,
            gap_tol: 1e-4,
            continuation: Continuation::default(),
            adaptive: true,
            record_every: 0.5,
            interaction: Interaction::Gram,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.eta > 0.0 && self.eta <= 0.5) {
            return bad(format!("eta must lie in (0, 0.5], got {}", self.eta));
        }
        if !(self.max_time > 0.0 && self.max_time.is_finite()) {
            return bad(format!("max_time must be positive, got {}", self.max_time));
        }
        if !(self.gap_tol > 0.0) {
            return bad(format!("gap_tol must be positive, got {}", self.gap_tol));
        }
        if !(self.record_every > 0.0) {
            return bad(format!(
                "record_every must be positive, got {}",
                self.record_every
            ));
        }
        let c = &self.continuation;
        if !(c.decay > 0.0 && c.decay < 1.0) {
            return bad(format!("decay must lie in (0, 1), got {}", c.decay));
        }
        if let Some(f) = c.floor {
            if !(f > 0.0 && f.is_finite()) {
                return bad(format!("continuation floor must be positive, got {f}"));
            }
        }
        Ok(())
    }
}

/// Thresholds currently applied by the activation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Thresholds {
    Uniform(f64),
    /// Absolute per-node thresholds for soft-threshold nodes (re-weighted mode).
    PerNode(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LcaState {
    pub u: Vec<f64>,
    pub a: Vec<f64>,
    pub lambda_now: Thresholds,
    pub t_over_tau: f64,
    /// `τ_λ / τ`, re-weighted mode only.
    pub tau_lambda_over_tau: Option<f64>,
}

impl LcaState {
    /// `u = 0` with `a = T(0)` (zero for every family except the one-sided log barrier).
    pub fn at_rest(spec: &ActivationSpec, n: usize, lambda_now: Thresholds) -> Result<Self> {
        let u = vec![0.0; n];
        let mut a = vec![0.0; n];
        activate(spec, &lambda_now, &u, &mut a)?;
        Ok(LcaState {
            u,
            a,
            lambda_now,
            t_over_tau: 0.0,
            tau_lambda_over_tau: None,
        })
    }
}

fn activate(spec: &ActivationSpec, th: &Thresholds, u: &[f64], out: &mut [f64]) -> Result<()> {
    match th {
        Thresholds::Uniform(l) if *l == spec.lambda() => spec.activate_into(u, out),
        Thresholds::Uniform(l) => spec.with_lambda(*l)?.activate_into(u, out),
        Thresholds::PerNode(ls) => {
            if !matches!(spec.family(), Family::L1 | Family::WeightedL1 { .. }) {
                return Err(Error::InvalidParameter(format!(
                    "per-node thresholds need a soft-threshold family, got {}",
                    spec.family().name()
                )));
            }
            for (s, v) in [
                (ls.len(), "per-node thresholds"),
                (out.len(), "activation output"),
            ] {
                if s != u.len() {
                    return Err(Error::DimensionMismatch {
                        expected: u.len(),
                        got: s,
                        context: v,
                    });
                }
            }
            for ((o, &v), &l) in out.iter_mut().zip(u).zip(ls) {
                *o = soft_threshold(v, l);
            }
            Ok(())
        }
    }
}

/// `u + η((Φᵀy − inter) − u)`; the grouping keeps exact fixed points exact.
fn euler(u: &[f64], b: &[f64], inter: &[f64], eta: f64, out: &mut [f64]) -> bool {
    let mut finite = true;
    for (((o, &ui), &bi), &gi) in out.iter_mut().zip(u).zip(b).zip(inter) {
        *o = ui + eta * ((bi - gi) - ui);
        finite &= o.is_finite();
    }
    finite
}

/// One forward-Euler step of the network, evaluating `(ΦᵀΦ − I)a` as `Φᵀ(Φa) − a`.
pub fn lca_step(
    state: &LcaState,
    problem: &MeasurementProblem,
    spec: &ActivationSpec,
    eta: f64,
) -> Result<LcaState> {
    if !(eta > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "eta must be positive, got {eta}"
        )));
    }
    let n = problem.n();
    for (len, context) in [(state.u.len(), "state u"), (state.a.len(), "state a")] {
        if len != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: len,
                context,
            });
        }
    }
    let engine = Engine::new(problem, Interaction::MatVec)?;
    let mut inter = vec![0.0; n];
    engine.interaction(&state.a, &mut inter);
    let mut u = vec![0.0; n];
    if !euler(&state.u, &engine.b, &inter, eta, &mut u) {
        return Err(Error::Divergence {
            eta,
            t_over_tau: state.t_over_tau,
        });
    }
    let mut a = vec![0.0; n];
    activate(spec, &state.lambda_now, &u, &mut a)?;
    Ok(LcaState {
        u,
        a,
        lambda_now: state.lambda_now.clone(),
        t_over_tau: state.t_over_tau + eta,
        tau_lambda_over_tau: state.tau_lambda_over_tau,
    })
}

/// `(ΦᵀΦ − I)a` on either path. Exposed so callers can cross-check the two.
pub fn interaction(problem: &MeasurementProblem, a: &[f64], path: Interaction) -> Result<Vec<f64>> {
    crate::model::check_len(a, problem.n(), "coefficient vector")?;
    let engine = Engine::new(problem, path)?;
    let mut out = vec![0.0; a.len()];
    engine.interaction(a, &mut out);
    Ok(out)
}

struct Engine<'p> {
    problem: &'p MeasurementProblem,
    b: Vec<f64>,
    yy: f64,
    gram: Option<DenseMatrix>,
}

impl<'p> Engine<'p> {
    fn new(problem: &'p MeasurementProblem, path: Interaction) -> Result<Self> {
        let gram = match path {
            Interaction::Gram => Some(gram_minus_identity(problem.phi())?),
            Interaction::MatVec => None,
        };
        Ok(Engine {
            problem,
            b: problem.drive(),
            yy: dot(problem.y(), problem.y()),
            gram,
        })
    }

    fn interaction(&self, a: &[f64], out: &mut [f64]) {
        match &self.gram {
            Some(g) => {
                out.fill(0.0);
                for (j, &aj) in a.iter().enumerate() {
                    if aj != 0.0 {
                        for (o, &gij) in out.iter_mut().zip(g.row(j)) {
                            *o += aj * gij;
                        }
                    }
                }
            }
            None => {
                let phi = self.problem.phi();
                let back = phi.matvec_t(&phi.matvec(a));
                for ((o, v), ai) in out.iter_mut().zip(back).zip(a) {
                    *o = v - ai;
                }
            }
        }
    }

    /// `(‖r‖², ⟨r, y⟩)` with `Φᵀr` written to `corr`, from `a` and `inter = (ΦᵀΦ − I)a`.
    fn residual_parts(&self, a: &[f64], inter: &[f64], corr: &mut [f64]) -> (f64, f64) {
        let ba = dot(&self.b, a);
        let quad = dot(a, inter) + dot(a, a);
        for (((c, &bi), &gi), &ai) in corr.iter_mut().zip(&self.b).zip(inter).zip(a) {
            *c = bi - gi - ai;
        }
        ((self.yy - 2.0 * ba + quad).max(0.0), self.yy - ba)
    }

    fn fast_energy(&self, spec: &ActivationSpec, a: &[f64], inter: &[f64]) -> Result<f64> {
        let quad = dot(a, inter) + dot(a, a);
        let rr = (self.yy - 2.0 * dot(&self.b, a) + quad).max(0.0);
        Ok(0.5 * rr + spec.lambda() * spec.cost_value(a)?)
    }
}

struct Recorder<'p> {
    problem: &'p MeasurementProblem,
    truth: Option<&'p [f64]>,
    every: f64,
    next: f64,
    trace: Vec<TraceRecord>,
}

impl<'p> Recorder<'p> {
    fn new(problem: &'p MeasurementProblem, every: f64) -> Self {
        Recorder {
            problem,
            truth: problem.truth().filter(|t| t.iter().any(|v| *v != 0.0)),
            every,
            next: 0.0,
            trace: Vec::new(),
        }
    }

    fn due(&self, t: f64) -> bool {
        t >= self.next
    }

    fn push(
        &mut self,
        t: f64,
        energy: f64,
        a: &[f64],
        gap: Option<f64>,
        lambda_now: f64,
    ) -> Result<()> {
        self.trace.push(TraceRecord {
            t_over_tau: t,
            energy,
            rel_err: self.truth.map(|tr| rel_dist(a, tr)).transpose()?,
            gap,
            lambda_now,
        });
        while self.next <= t {
            self.next += self.every;
        }
        Ok(())
    }

    fn record_spec(&mut self, t: f64, spec: &ActivationSpec, a: &[f64], eta: f64) -> Result<()> {
        let e = match energy(self.problem, spec, a) {
            // a finite state so large that the data term overflows
            Err(Error::Domain(_)) if spec.cost_value(a).is_ok_and(f64::is_finite) => {
                return Err(Error::Divergence { eta, t_over_tau: t })
            }
            e => e?,
        };
        let gap = spec_duality_gap(self.problem, spec, a)?;
        self.push(t, e, a, gap, spec.lambda())
    }

    fn last_t(&self) -> Option<f64> {
        self.trace.last().map(|r| r.t_over_tau)
    }
}

fn halve(eta: &mut f64, halvings: &mut u32, t: f64) -> Result<()> {
    *halvings += 1;
    if *halvings > MAX_HALVINGS {
        return Err(Error::Divergence {
            eta: *eta,
            t_over_tau: t,
        });
    }
    *eta *= 0.5;
    Ok(())
}

/// Integrate from rest until the stopping rule fires or `max_time` elapses.
///
/// With continuation on, `λ` starts at `‖Φᵀy‖∞` and decays to the floor (the activation's `λ`
/// unless overridden). Once at the floor, L1-type families stop on the relative duality gap
/// and every other family on `‖Δa‖∞/η ≤ 1e-9`.
pub fn solve_lca(
    problem: &MeasurementProblem,
    spec: &ActivationSpec,
    opts: &SolverOptions,
) -> Result<Solution> {
    opts.validate()?;
    let n = problem.n();
    if let Some(len) = spec.required_len() {
        if len != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: len,
                context: "activation spec size",
            });
        }
    }
    let start = Instant::now();
    let engine = Engine::new(problem, opts.interaction)?;
    let cont = opts.continuation;
    let floor = cont.floor.unwrap_or(spec.lambda());
    let floor_spec = spec.with_lambda(floor)?;
    let penalty = spec_penalty(&floor_spec);
    let b_peak = norm_inf(&engine.b);

    let mut lambda = if cont.enabled {
        b_peak.max(floor)
    } else {
        floor
    };
    let mut cur = spec.with_lambda(lambda)?;
    let mut rec = Recorder::new(problem, opts.record_every);

    let mut u = vec![0.0; n];
    let mut a = vec![0.0; n];
    cur.activate_into(&u, &mut a)?;
    let mut inter = vec![0.0; n];
    engine.interaction(&a, &mut inter);
    let mut corr = vec![0.0; n];

    let mut t = 0.0;
    let mut eta = opts.eta;
    let mut halvings = 0;
    let mut steps = 0;
    let mut converged = false;
    let mut energy_now: Option<f64> = None;

    let gap_converged = |a: &[f64], inter: &[f64], corr: &mut [f64]| -> Result<bool> {
        let Some(p) = &penalty else { return Ok(false) };
        let (rr, ry) = engine.residual_parts(a, inter, corr);
        if gap_from_parts(p.borrow(), a, corr, rr, ry).1 > opts.gap_tol {
            return Ok(false);
        }
        Ok(penalty_duality_gap(problem, p.borrow(), a)?.1 <= opts.gap_tol)
    };

    if b_peak == 0.0 || (lambda == floor && gap_converged(&a, &inter, &mut corr)?) {
        converged = true;
    }

    let mut u_new = vec![0.0; n];
    let mut a_new = vec![0.0; n];
    let mut inter_new = vec![0.0; n];
    while !converged && t < opts.max_time {
        if rec.due(t) {
            rec.record_spec(t, &cur, &a, eta)?;
        }
        // descent is only expected while λ holds still: `a` was produced at the current λ
        let check_energy = opts.adaptive && cur.is_continuous();
        let e_old = if check_energy { energy_now } else { None };
        let e_new = loop {
            if !euler(&u, &engine.b, &inter, eta, &mut u_new) {
                if opts.adaptive {
                    halve(&mut eta, &mut halvings, t)?;
                    continue;
                }
                return Err(Error::Divergence { eta, t_over_tau: t });
            }
            cur.activate_into(&u_new, &mut a_new)?;
            engine.interaction(&a_new, &mut inter_new);
            if !check_energy {
                break None;
            }
            let e_new = engine.fast_energy(&cur, &a_new, &inter_new)?;
            let Some(e_old) = e_old else {
                break Some(e_new);
            };
            if e_new > e_old + 1e-12 * (1.0 + e_old.abs()) {
                halve(&mut eta, &mut halvings, t)?;
                continue;
            }
            break Some(e_new);
        };
        let t_next = t + eta;
        steps += 1;
        let da = a
            .iter()
            .zip(&a_new)
            .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        std::mem::swap(&mut u, &mut u_new);
        std::mem::swap(&mut a, &mut a_new);
        std::mem::swap(&mut inter, &mut inter_new);
        energy_now = e_new;

        if lambda == floor {
            converged = if penalty.is_some() {
                gap_converged(&a, &inter, &mut corr)?
            } else {
                da / eta <= STATIONARY_RATE
            };
        }
        let next = cont.next(lambda, floor, t, t_next);
        if next != lambda {
            lambda = next;
            cur = spec.with_lambda(lambda)?;
            energy_now = None;
        }
        t = t_next;
    }
    if rec.last_t() != Some(t) {
        rec.record_spec(t, &cur, &a, eta)?;
    }
    Ok(Solution {
        a,
        trace: rec.trace,
        converged,
        wallclock: start.elapsed().as_secs_f64(),
        simulated_time: t,
        steps,
        weights: None,
    })
}

pub const DEFAULT_GAMMA: f64 = 0.2;
pub const DEFAULT_TAU_RATIO: f64 = 10.0;

/// Defaults for the dynamically re-weighted LCA.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReweightParams {
    pub gamma: f64,
    pub nu: f64,
    /// `τ_λ / τ`
    pub tau_ratio: f64,
}

impl ReweightParams {
    /// `γ = 0.2`, `ν = λ_rule·γ` (zero coefficients start at the plain-L1 threshold),
    /// `τ_λ = 10τ`.
    ///
    /// `γ` is kept above `λ_rule` so that the quasi-static map `a = T_{ν/(|a|+γ)}(u)` has no
    /// jump: with `ν/γ² > 1` nodes that switch on during the transient lower their own
    /// threshold and stay on.
    pub fn for_problem(problem: &MeasurementProblem) -> Result<Self> {
        let gamma = DEFAULT_GAMMA;
        Ok(ReweightParams {
            gamma,
            nu: lambda_rule(problem)? * gamma,
            tau_ratio: DEFAULT_TAU_RATIO,
        })
    }
}

/// Semi-implicit step of `τ_λ λ̇ = 1/λ − k`: solves `λ' = λ + h(1/λ' − k)` for the positive root.
fn weight_step(lambda: f64, k: f64, h: f64) -> f64 {
    let p = lambda - h * k;
    if p >= 0.0 {
        0.5 * (p + (p * p + 4.0 * h).sqrt())
    } else {
        2.0 * h / ((p * p + 4.0 * h).sqrt() - p)
    }
}

/// LCA co-integrated with per-node thresholds `τ_λ λ̇_i = 1/λ_i − (|a_i| + γ)/ν`.
///
/// The weight equation is stiff when `λ_i` is small, so it is advanced semi-implicitly; the
/// discrete update keeps the exact steady state `λ_i = ν/(|a_i| + γ)`. Thresholds start at
/// `ν/γ` and are clamped to `[1e-9·ν/γ, ν/γ]`. With continuation on, all thresholds are
/// scaled by a factor that decays from `‖Φᵀy‖∞/(ν/γ)` to one. The run stops once the scale is
/// one, `‖Δa‖∞/η ≤ 1e-9` and `max_i |λ_i − ν/(|a_i|+γ)| ≤ 1e-6·ν/γ`. The energy is not a
/// Lyapunov function while the weights move, so `adaptive` only guards non-finite states.
pub fn solve_lca_reweighted(
    problem: &MeasurementProblem,
    opts: &SolverOptions,
    gamma: f64,
    nu: f64,
    tau_ratio: f64,
) -> Result<Solution> {
    opts.validate()?;
    for (name, v) in [("gamma", gamma), ("nu", nu), ("tau_ratio", tau_ratio)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "{name} must be positive, got {v}"
            )));
        }
    }
    let start = Instant::now();
    let n = problem.n();
    let engine = Engine::new(problem, opts.interaction)?;
    let top = nu / gamma;
    let bottom = WEIGHT_FLOOR * top;
    let cont = opts.continuation;
    let b_peak = norm_inf(&engine.b);
    let mut scale = if cont.enabled {
        (b_peak / top).max(1.0)
    } else {
        1.0
    };

    let mut weights = vec![top; n];
    let mut thresholds = vec![top * scale; n];
    let mut u = vec![0.0; n];
    let mut a = vec![0.0; n];
    let mut inter = vec![0.0; n];
    let mut u_new = vec![0.0; n];
    let mut a_new = vec![0.0; n];
    let mut corr = vec![0.0; n];
    let mut rec = Recorder::new(problem, opts.record_every);

    let mut record = |rec: &mut Recorder,
                      t: f64,
                      a: &[f64],
                      inter: &[f64],
                      th: &[f64],
                      top_now: f64|
     -> Result<()> {
        let (rr, ry) = engine.residual_parts(a, inter, &mut corr);
        let penalty = Penalty::PerNode(th);
        let e = 0.5 * rr + th.iter().zip(a).map(|(l, v)| l * v.abs()).sum::<f64>();
        let (_, rel) = gap_from_parts(penalty, a, &corr, rr, ry);
        rec.push(t, e, a, Some(rel), top_now)
    };

    let mut t = 0.0;
    let mut eta = opts.eta;
    let mut halvings = 0;
    let mut steps = 0;
    let mut converged = b_peak == 0.0;
    while !converged && t < opts.max_time {
        if rec.due(t) {
            record(&mut rec, t, &a, &inter, &thresholds, top * scale)?;
        }
        while !euler(&u, &engine.b, &inter, eta, &mut u_new) {
            if !opts.adaptive {
                return Err(Error::Divergence { eta, t_over_tau: t });
            }
            halve(&mut eta, &mut halvings, t)?;
        }
        for ((o, &v), &l) in a_new.iter_mut().zip(&u_new).zip(&thresholds) {
            *o = soft_threshold(v, l);
        }
        let h = eta / tau_ratio;
        for (w, &ai) in weights.iter_mut().zip(&a_new) {
            *w = weight_step(*w, (ai.abs() + gamma) / nu, h).clamp(bottom, top);
        }
        let t_next = t + eta;
        steps += 1;
        let da = a
            .iter()
            .zip(&a_new)
            .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        std::mem::swap(&mut u, &mut u_new);
        std::mem::swap(&mut a, &mut a_new);
        engine.interaction(&a, &mut inter);

        if scale == 1.0 && da / eta <= STATIONARY_RATE {
            converged = weight_residual(&weights, &a, gamma, nu) <= WEIGHT_RESIDUAL_TOL * top;
        }
        scale = cont.next(scale, 1.0, t, t_next);
        for (th, w) in thresholds.iter_mut().zip(&weights) {
            *th = w * scale;
        }
        t = t_next;
    }
    if rec.last_t() != Some(t) {
        record(&mut rec, t, &a, &inter, &thresholds, top * scale)?;
    }
    Ok(Solution {
        a,
        trace: rec.trace,
        converged,
        wallclock: start.elapsed().as_secs_f64(),
        simulated_time: t,
        steps,
        weights: Some(weights),
    })
}

/// `max_i |λ_i − ν/(|a_i| + γ)|`
pub fn weight_residual(weights: &[f64], a: &[f64], gamma: f64, nu: f64) -> f64 {
    weights.iter().zip(a).fold(0.0f64, |m, (w, ai)| {
        m.max((w - nu / (ai.abs() + gamma)).abs())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate, ProblemParams};

    fn rotation3() -> DenseMatrix {
        // orthonormal: a rotation about the z axis composed with one about x
        let (c1, s1) = (0.6f64, 0.8f64);
        let (c2, s2) = (0.28f64, 0.96f64);
        DenseMatrix::from_rows(&[
            vec![c1, -s1 * c2, s1 * s2],
            vec![s1, c1 * c2, -c1 * s2],
            vec![0.0, s2, c2],
        ])
        .unwrap()
    }

    #[test]
    fn first_step_from_rest() {
        let p =
            MeasurementProblem::new(rotation3(), vec![1.0, -0.5, 0.25], 0.1, None, None).unwrap();
        let spec = ActivationSpec::l1(0.1).unwrap();
        let s0 = LcaState::at_rest(&spec, 3, Thresholds::Uniform(0.1)).unwrap();
        let s1 = lca_step(&s0, &p, &spec, 0.05).unwrap();
        let b = p.drive();
        for (u, bi) in s1.u.iter().zip(&b) {
            assert_eq!(*u, 0.05 * bi);
        }
        assert_eq!(s1.t_over_tau, 0.05);
    }

    #[test]
    fn fixed_point_is_preserved() {
        let phi = DenseMatrix::identity(3);
        let y = vec![1.0, -0.05, 0.3];
        let p = MeasurementProblem::new(phi, y.clone(), 0.1, None, None).unwrap();
        let spec = ActivationSpec::l1(0.1).unwrap();
        let a = spec.activation(&y).unwrap();
        let state = LcaState {
            u: y,
            a,
            lambda_now: Thresholds::Uniform(0.1),
            t_over_tau: 3.0,
            tau_lambda_over_tau: None,
        };
        let next = lca_step(&state, &p, &spec, 0.05).unwrap();
        assert_eq!(next.u, state.u);
        assert_eq!(next.a, state.a);
    }

    #[test]
    fn orthonormal_converges_to_soft_threshold() {
        let p =
            MeasurementProblem::new(rotation3(), vec![1.0, -0.5, 0.25], 0.1, None, None).unwrap();
        let spec = ActivationSpec::l1(0.1).unwrap();
        let mut state = LcaState::at_rest(&spec, 3, Thresholds::Uniform(0.1)).unwrap();
        while state.t_over_tau < 50.0 {
            state = lca_step(&state, &p, &spec, 0.05).unwrap();
        }
        for (a, b) in state.a.iter().zip(p.drive()) {
            assert!((a - soft_threshold(b, 0.1)).abs() <= 1e-8);
        }
    }

    #[test]
    fn zero_input_converges_immediately() {
        let p = MeasurementProblem::new(rotation3(), vec![0.0; 3], 0.1, None, None).unwrap();
        let sol = solve_lca(
            &p,
            &ActivationSpec::l1(0.1).unwrap(),
            &SolverOptions::default(),
        )
        .unwrap();
        assert!(sol.converged);
        assert_eq!(sol.a, vec![0.0; 3]);
        assert_eq!(sol.steps, 0);
    }

    #[test]
    fn lambda_rule_cases() {
        let p = MeasurementProblem::new(
            DenseMatrix::identity(3),
            vec![1.0, 0.0, 0.0],
            0.1,
            None,
            None,
        )
        .unwrap();
        assert_eq!(lambda_rule(&p).unwrap(), 0.01);
        let p10 = MeasurementProblem::new(
            DenseMatrix::identity(3),
            vec![10.0, 0.0, 0.0],
            0.1,
            None,
            None,
        )
        .unwrap();
        assert!((lambda_rule(&p10).unwrap() - 0.1).abs() <= 1e-15);
        let zero = MeasurementProblem::new(DenseMatrix::identity(3), vec![0.0; 3], 0.1, None, None)
            .unwrap();
        assert!(lambda_rule(&zero).is_err());
    }

    #[test]
    fn interaction_paths_agree() {
        let (p, truth) = generate(&ProblemParams::new(80, 0.5, 0.2).with_seed(1)).unwrap();
        let g = interaction(&p, &truth, Interaction::Gram).unwrap();
        let m = interaction(&p, &truth, Interaction::MatVec).unwrap();
        for (x, y) in g.iter().zip(&m) {
            assert!((x - y).abs() <= 1e-10);
        }
    }

    #[test]
    fn weight_step_keeps_fixed_point() {
        for &k in &[0.5, 3.0, 100.0] {
            for &h in &[1e-3, 0.005, 1.0] {
                let w = weight_step(1.0 / k, k, h);
                assert!((w - 1.0 / k).abs() <= 1e-15 * (1.0 / k).max(1.0));
            }
        }
        // a frozen at zero: thresholds relax to ν/γ
        let (gamma, nu) = (0.01, 0.002);
        let mut w = 0.01;
        for _ in 0..10_000 {
            w = weight_step(w, gamma / nu, 0.005);
        }
        assert!((w - nu / gamma).abs() <= 1e-12);
    }

    #[test]
    fn easy_instance_matches_fista() {
        let (p, truth) = generate(&ProblemParams::new(100, 0.6, 0.15).with_seed(7)).unwrap();
        let spec = ActivationSpec::l1(p.lambda()).unwrap();
        let sol = solve_lca(&p, &spec, &SolverOptions::default()).unwrap();
        assert!(sol.converged, "t = {}", sol.simulated_time);
        assert!(crate::model::rel_mse(&sol.a, &truth).unwrap() <= 1e-2);
        let fista = crate::baseline::solve_fista(&p, None, &Default::default()).unwrap();
        assert!(crate::model::rel_mse(&sol.a, &fista.a).unwrap() <= 1e-3);
    }
}
