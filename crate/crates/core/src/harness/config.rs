use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::baseline::BaselineOptions;
use crate::dynamics::{SolverOptions, DEFAULT_GAMMA, DEFAULT_TAU_RATIO};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    #[default]
    Phase,
    Converge,
    Reweight,
    Activations,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Lca,
    Fista,
    /// Dynamically re-weighted LCA.
    LcaReweighted,
    /// Iterative re-weighting with FISTA inner solves.
    FistaReweighted,
}

impl SolverKind {
    pub fn name(&self) -> &'static str {
        match self {
            SolverKind::Lca => "lca",
            SolverKind::Fista => "fista",
            SolverKind::LcaReweighted => "lca_reweighted",
            SolverKind::FistaReweighted => "fista_reweighted",
        }
    }
}

/// A named `(δ, ρ)` operating point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preset {
    pub name: String,
    pub delta: f64,
    pub rho: f64,
}

impl Preset {
    pub fn new(name: &str, delta: f64, rho: f64) -> Self {
        Preset {
            name: name.into(),
            delta,
            rho,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvergeConfig {
    pub sizes: Vec<usize>,
    pub trials: usize,
    pub presets: Vec<Preset>,
}

impl Default for ConvergeConfig {
    fn default() -> Self {
        ConvergeConfig {
            sizes: vec![100, 200, 400],
            trials: 10,
            presets: vec![
                Preset::new("easy", 0.6, 0.15),
                Preset::new("medium", 0.5, 0.3),
                Preset::new("hard", 0.3, 0.6),
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReweightConfig {
    pub delta: f64,
    pub rhos: Vec<f64>,
    pub trials: usize,
    pub gamma: f64,
    pub tau_ratio: f64,
    pub outer_iters: usize,
    /// Simulated-time budget per LCA solve, in τ.
    pub max_time: f64,
}

impl Default for ReweightConfig {
    fn default() -> Self {
        ReweightConfig {
            delta: 0.5,
            rhos: vec![0.05, 0.1, 0.2, 0.3, 0.4],
            trials: 15,
            gamma: DEFAULT_GAMMA,
            tau_ratio: DEFAULT_TAU_RATIO,
            outer_iters: 4,
            max_time: 1000.0,
        }
    }
}

/// Everything needed to reproduce an experiment. Missing JSON fields take their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub n: usize,
    /// Cells per axis.
    pub grid: usize,
    pub delta_range: [f64; 2],
    pub rho_range: [f64; 2],
    pub trials: usize,
    pub solvers: Vec<SolverKind>,
    pub seed: u64,
    pub noise_var: f64,
    pub lca: SolverOptions,
    pub fista: BaselineOptions,
    pub converge: ConvergeConfig,
    pub reweight: ReweightConfig,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub svg: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            kind: ExperimentKind::Phase,
            n: 100,
            grid: 10,
            delta_range: [0.1, 0.9],
            rho_range: [0.1, 0.9],
            trials: 5,
            solvers: vec![SolverKind::Lca, SolverKind::Fista],
            seed: 0,
            noise_var: 1e-4,
            lca: SolverOptions::default(),
            fista: BaselineOptions::default(),
            converge: ConvergeConfig::default(),
            reweight: ReweightConfig::default(),
            threads: None,
            out: None,
            svg: None,
        }
    }
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind) -> Self {
        ExperimentConfig {
            kind,
            ..Default::default()
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.n == 0 {
            return bad("n must be positive".into());
        }
        if self.grid == 0 || self.trials == 0 {
            return bad("grid and trials must be at least 1".into());
        }
        for (name, [lo, hi]) in [
            ("delta_range", self.delta_range),
            ("rho_range", self.rho_range),
        ] {
            if !(lo > 0.0 && hi < 1.0 && lo <= hi) {
                return bad(format!(
                    "{name} must satisfy 0 < lo <= hi < 1, got [{lo}, {hi}]"
                ));
            }
        }
        if self.solvers.is_empty() {
            return bad("at least one solver is required".into());
        }
        if !(self.noise_var >= 0.0 && self.noise_var.is_finite()) {
            return bad(format!(
                "noise_var must be nonnegative, got {}",
                self.noise_var
            ));
        }
        self.lca.validate()?;
        self.fista.validate()?;
        let c = &self.converge;
        if c.sizes.is_empty() || c.trials == 0 || c.presets.is_empty() {
            return bad("converge needs sizes, presets and at least one trial".into());
        }
        let r = &self.reweight;
        if r.rhos.is_empty() || r.trials == 0 || r.outer_iters == 0 {
            return bad("reweight needs rhos, trials and outer_iters >= 1".into());
        }
        if !(r.gamma > 0.0 && r.tau_ratio > 0.0 && r.max_time > 0.0) {
            return bad("reweight gamma, tau_ratio and max_time must be positive".into());
        }
        if self.threads == Some(0) {
            return bad("threads must be at least 1".into());
        }
        Ok(())
    }

    /// Grid values along one axis: `grid` evenly spaced points including both ends.
    pub fn axis(range: [f64; 2], grid: usize) -> Vec<f64> {
        let [lo, hi] = range;
        if grid == 1 {
            return vec![lo];
        }
        (0..grid)
            .map(|i| lo + (hi - lo) * i as f64 / (grid - 1) as f64)
            .collect()
    }
}
