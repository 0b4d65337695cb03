//! Least-squares fit of the two-parameter log families to `|a|^p` on `[0, 2]`.

use serde::{Deserialize, Serialize};

use super::{ActivationSpec, Family};
use crate::error::{Error, Result};

/// Points of the uniform grid on `[0, 2]` used by the fit.
pub const FIT_GRID_POINTS: usize = 2001;

const LOG_S_RANGE: (f64, f64) = (-30.0, 30.0);
const SCAN_STEP: f64 = 0.25;
const MAX_REFINE: usize = 200;

/// `s` used for the `p = 1` limit (`c = 1, s → 0`).
const S_VANISHING: f64 = 1e-12;
/// `s` used for the `p = 2` limit (`c = 2s, s → ∞`) and, inverted, for `p = 0`.
const S_DIVERGENT: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpRegime {
    /// `cs·log(1 + |a|/s)`, for `p < 1`.
    Low,
    /// `c|a| − cs·log(1 + |a|/s)`, for `p ≥ 1`.
    High,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LpFit {
    pub p: f64,
    pub c: f64,
    pub s: f64,
    /// `Σ h (C_{c,s}(a_k) − a_k^p)²` over the fit grid, `h = 2/2000`.
    pub fit_residual: f64,
    pub regime: LpRegime,
}

impl LpFit {
    pub fn family(&self) -> Family {
        match self.regime {
            LpRegime::Low => Family::ApproxLpLow {
                c: self.c,
                s: self.s,
            },
            LpRegime::High => Family::ApproxLpHigh {
                c: self.c,
                s: self.s,
            },
        }
    }

    pub fn spec(&self, lambda: f64) -> Result<ActivationSpec> {
        ActivationSpec::new(self.family(), lambda)
    }
}

struct FitGrid {
    a: Vec<f64>,
    target: Vec<f64>,
    h: f64,
}

impl FitGrid {
    fn new(p: f64) -> Self {
        let h = 2.0 / (FIT_GRID_POINTS - 1) as f64;
        let a: Vec<f64> = (0..FIT_GRID_POINTS).map(|k| k as f64 * h).collect();
        let target = a
            .iter()
            .map(|&x| if x == 0.0 { 0.0 } else { x.powf(p) })
            .collect();
        FitGrid { a, target, h }
    }

    fn basis(&self, regime: LpRegime, s: f64) -> Vec<f64> {
        self.a
            .iter()
            .map(|&x| {
                let log_term = s * (x / s).ln_1p();
                match regime {
                    LpRegime::Low => log_term,
                    LpRegime::High => x - log_term,
                }
            })
            .collect()
    }

    fn residual(&self, regime: LpRegime, c: f64, s: f64) -> f64 {
        let g = self.basis(regime, s);
        self.h
            * g.iter()
                .zip(&self.target)
                .map(|(gi, ti)| (c * gi - ti).powi(2))
                .sum::<f64>()
    }

    /// Optimal `c` for fixed `s` (the cost is linear in `c`) and the resulting residual.
    fn profile(&self, regime: LpRegime, s: f64) -> (f64, f64) {
        let g = self.basis(regime, s);
        let gg: f64 = g.iter().map(|v| v * v).sum();
        let gt: f64 = g.iter().zip(&self.target).map(|(a, b)| a * b).sum();
        let c = gt / gg;
        let r = self.h
            * g.iter()
                .zip(&self.target)
                .map(|(gi, ti)| (c * gi - ti).powi(2))
                .sum::<f64>();
        (c, r)
    }
}

/// Fit `(c, s)` so that the regime's log cost best matches `|a|^p` on `[0, 2]`.
///
/// `p = 1` and `p = 2` return the analytic limits (`c = 1, s → 0` and `c = 2s, s → ∞`);
/// `p = 0` uses a vanishing `s` with the matching least-squares `c`. Other values minimize the
/// squared error over `(c, log s)`: `c` enters linearly and is solved exactly for each `s`,
/// `log s` is located by a scan and refined by safeguarded parabolic steps.
pub fn fit_lp_params(p: f64) -> Result<LpFit> {
    if !(0.0..=2.0).contains(&p) {
        return Err(Error::InvalidParameter(format!(
            "p must lie in [0, 2], got {p}"
        )));
    }
    let grid = FitGrid::new(p);
    let finish = |regime, c: f64, s: f64| LpFit {
        p,
        c,
        s,
        fit_residual: grid.residual(regime, c, s),
        regime,
    };
    if p == 1.0 {
        return Ok(finish(LpRegime::High, 1.0, S_VANISHING));
    }
    if p == 2.0 {
        return Ok(finish(LpRegime::High, 2.0 * S_DIVERGENT, S_DIVERGENT));
    }
    if p == 0.0 {
        let s = 1.0 / S_DIVERGENT;
        let (c, _) = grid.profile(LpRegime::Low, s);
        return Ok(finish(LpRegime::Low, c, s));
    }
    let regime = if p < 1.0 {
        LpRegime::Low
    } else {
        LpRegime::High
    };
    let phi = |x: f64| grid.profile(regime, x.exp()).1;

    let n_scan = ((LOG_S_RANGE.1 - LOG_S_RANGE.0) / SCAN_STEP).round() as usize;
    let xs: Vec<f64> = (0..=n_scan)
        .map(|k| LOG_S_RANGE.0 + k as f64 * SCAN_STEP)
        .collect();
    let vals: Vec<f64> = xs.iter().map(|&x| phi(x)).collect();
    let best = (0..xs.len())
        .min_by(|&i, &j| vals[i].total_cmp(&vals[j]))
        .expect("scan is non-empty");
    if best == 0 || best == xs.len() - 1 {
        let s = xs[best].exp();
        let (c, _) = grid.profile(regime, s);
        return Err(Error::FitNotConverged {
            best: finish(regime, c, s),
        });
    }

    let (mut lo, mut hi) = (xs[best - 1], xs[best + 1]);
    let mut x = xs[best];
    let mut fx = vals[best];
    let mut converged = false;
    for _ in 0..MAX_REFINE {
        let (f_lo, f_hi) = (phi(lo), phi(hi));
        let denom = (x - lo) * (fx - f_hi) - (x - hi) * (fx - f_lo);
        let numer = (x - lo).powi(2) * (fx - f_hi) - (x - hi).powi(2) * (fx - f_lo);
        let golden = |x: f64| {
            if x - lo > hi - x {
                x - 0.381966 * (x - lo)
            } else {
                x + 0.381966 * (hi - x)
            }
        };
        let mut trial = if denom != 0.0 {
            x - 0.5 * numer / denom
        } else {
            golden(x)
        };
        if !(trial > lo && trial < hi) || (trial - x).abs() < 1e-14 {
            trial = golden(x);
        }
        let ft = phi(trial);
        if ft < fx {
            if trial < x {
                hi = x;
            } else {
                lo = x;
            }
            x = trial;
            fx = ft;
        } else if trial < x {
            lo = trial;
        } else {
            hi = trial;
        }
        if hi - lo <= 1e-10 * (1.0 + x.abs()) {
            converged = true;
            break;
        }
    }
    let s = x.exp();
    let (c, _) = grid.profile(regime, s);
    let fit = finish(regime, c, s);
    if converged {
        Ok(fit)
    } else {
        Err(Error::FitNotConverged { best: fit })
    }
}
