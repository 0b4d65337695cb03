//! Experiment orchestration: phase grids, convergence studies, re-weighting sweeps and the
//! activation catalog, with deterministic CSV and SVG output.
//!
//! Every trial draws its problem from [`derive_stream`](crate::synth::derive_stream), work
//! items may run on a rayon pool in any order, and aggregates are reduced in trial-index
//! order, so outputs depend only on the configuration.

mod activations;
mod config;
mod converge;
mod output;
mod phase;
mod reweight;
pub mod svg;

pub use activations::{
    activation_catalog, activation_table, catalog_family, ActivationColumn, ActivationTable,
};
pub use config::{
    ConvergeConfig, ExperimentConfig, ExperimentKind, Preset, ReweightConfig, SolverKind,
};
pub use converge::{run_converge, time_to_within, ConvergeReport, ConvergeRun, ConvergeSummary};
pub use output::{emit_csv, emit_svg, fmt_real, trace_csv, Tabular};
pub use phase::{run_phase, CellStats, ResultGrid};
pub use reweight::{run_reweight, ReweightOutcome, ReweightPoint, ReweightTable, Variant};

use crate::error::{Error, Result};

/// Run `f` on a dedicated pool of `threads` workers, or on the global pool when `None`.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(Error::InvalidParameter("threads must be at least 1".into())),
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Median of the finite entries (`NaN` when there are none); even counts average the middle pair.
pub fn median(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| !x.is_nan()).collect();
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let k = v.len() / 2;
    if v.len() % 2 == 1 {
        v[k]
    } else {
        0.5 * (v[k - 1] + v[k])
    }
}

/// Mean of the non-`NaN` entries, summed in order.
pub fn mean(values: &[f64]) -> f64 {
    let (sum, count) = values
        .iter()
        .filter(|x| !x.is_nan())
        .fold((0.0, 0usize), |(s, c), x| (s + x, c + 1));
    if count == 0 {
        f64::NAN
    } else {
        sum / count as f64
    }
}
