//! Pointwise cost and activation formulas, written for `u ≥ 0` / `a ≥ 0` and extended by
//! odd (activation) or even (cost) symmetry by the callers in `costs::mod`.

/// Two-sided soft threshold.
pub fn soft_threshold(u: f64, lambda: f64) -> f64 {
    if u > lambda {
        u - lambda
    } else if u < -lambda {
        u + lambda
    } else {
        0.0
    }
}

/// Two-sided hard threshold: keeps `u` when `|u| > λ`.
pub fn hard_threshold(u: f64, lambda: f64) -> f64 {
    if u.abs() > lambda {
        u
    } else {
        0.0
    }
}

/// Invertible activation of the log-barrier relaxation of the nonnegative ℓ1 program.
///
/// `½(√((4 + γ(λ−u)²)/γ) − (λ−u))`, strictly positive and increasing in `u`; tends to the
/// one-sided soft threshold `max(0, u − λ)` as `γ → ∞`.
pub fn log_barrier_activation(u: f64, lambda: f64, gamma: f64) -> f64 {
    let d = lambda - u;
    let root = (4.0 / gamma + d * d).sqrt();
    if d > 0.0 {
        // root − d loses everything to cancellation when d ≫ 1/√γ.
        (2.0 / gamma) / (root + d)
    } else {
        0.5 * (root - d)
    }
}

/// Group shrinkage: zero when `‖u_g‖ ≤ λ`, otherwise `u_g (1 − λ/‖u_g‖)`.
pub fn activation_block(u_g: &[f64], lambda: f64) -> Vec<f64> {
    let mut out = vec![0.0; u_g.len()];
    block_into(u_g, lambda, &mut out);
    out
}

pub(crate) fn block_into(u_g: &[f64], lambda: f64, out: &mut [f64]) {
    let norm = u_g.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm <= lambda {
        out.iter_mut().for_each(|o| *o = 0.0);
    } else {
        let gain = 1.0 - lambda / norm;
        for (o, &v) in out.iter_mut().zip(u_g) {
            *o = v * gain;
        }
    }
}

pub(crate) fn scad_activation(u: f64, lambda: f64, kappa: f64) -> f64 {
    if u <= lambda {
        0.0
    } else if u <= 2.0 * lambda {
        u - lambda
    } else if u <= kappa * lambda {
        ((kappa - 1.0) * u - kappa * lambda) / (kappa - 2.0)
    } else {
        u
    }
}

pub(crate) fn scad_cost(a: f64, lambda: f64, kappa: f64) -> f64 {
    if a <= lambda {
        a
    } else if a <= kappa * lambda {
        (a * kappa * lambda - 0.5 * a * a - 0.5 * lambda * lambda) / ((kappa - 1.0) * lambda)
    } else {
        0.5 * lambda * (1.0 + kappa)
    }
}

pub(crate) fn huber_activation(u: f64, lambda: f64, epsilon: f64) -> f64 {
    if u <= epsilon + lambda {
        epsilon * u / (epsilon + lambda)
    } else {
        u - lambda
    }
}

pub(crate) fn huber_cost(a: f64, epsilon: f64) -> f64 {
    if a <= epsilon {
        a * a / (2.0 * epsilon)
    } else {
        a - 0.5 * epsilon
    }
}

pub(crate) fn asib_activation(u: f64, lambda: f64) -> f64 {
    if u <= lambda {
        0.0
    } else {
        (u * u - lambda * lambda) / u
    }
}

/// Jeffreys-prior shrinkage cost, shifted so that `C(0) = 0`.
pub(crate) fn asib_cost(a: f64, lambda: f64) -> f64 {
    let r = (a * a + 4.0 * lambda * lambda).sqrt();
    -a * a / (4.0 * lambda) + a * r / (4.0 * lambda) + lambda * ((a + r) / (2.0 * lambda)).ln()
}

/// Positive root of `a² + (s + λc − u) a − u s = 0`, i.e. the inverse of
/// `u = a + λ c a / (s + a)`.
pub(crate) fn lp_high_activation(u: f64, lambda: f64, c: f64, s: f64) -> f64 {
    let b = u - s - lambda * c;
    let disc = (b * b + 4.0 * u * s).sqrt();
    if b >= 0.0 {
        0.5 * (b + disc)
    } else {
        2.0 * u * s / (disc - b)
    }
}

pub(crate) fn lp_high_cost(a: f64, c: f64, s: f64) -> f64 {
    c * a - c * s * (a / s).ln_1p()
}

pub(crate) fn lp_low_cost(a: f64, c: f64, s: f64) -> f64 {
    c * s * (a / s).ln_1p()
}

/// Larger root of `a + λcs/(s + a) = u`; `None` when no real root exists.
pub(crate) fn lp_low_branch(u: f64, lambda: f64, c: f64, s: f64) -> Option<f64> {
    let disc = (u + s) * (u + s) - 4.0 * lambda * c * s;
    if disc < 0.0 {
        return None;
    }
    let a = 0.5 * (u - s + disc.sqrt());
    (a >= 0.0).then_some(a)
}

/// Dead-zone edge of the approximate ℓp (p < 1) activation.
///
/// When `λc ≤ s` the branch leaves zero continuously at `u = λc`. Otherwise the branch only
/// exists for `u ≥ 2√(λcs) − s` and the output jumps; the edge is where the branch's scalar
/// energy `½(u−a)² + λC(a)` drops below that of `a = 0`.
pub(crate) fn lp_low_dead_zone(lambda: f64, c: f64, s: f64) -> f64 {
    if lambda * c <= s {
        return lambda * c;
    }
    let exists_from = 2.0 * (lambda * c * s).sqrt() - s;
    let excess = |u: f64| {
        let a = lp_low_branch(u, lambda, c, s).unwrap_or(0.0);
        0.5 * (u - a) * (u - a) + lambda * lp_low_cost(a, c, s) - 0.5 * u * u
    };
    energy_crossing(excess, exists_from.max(0.0))
}

pub(crate) fn transformed_l1_cost(a: f64, beta: f64) -> f64 {
    beta * a / (1.0 + beta * a)
}

/// `u(a) = a + λβ/(1 + βa)²` and its derivative.
fn tl1_forward(a: f64, lambda: f64, beta: f64) -> (f64, f64) {
    let q = 1.0 + beta * a;
    (
        a + lambda * beta / (q * q),
        1.0 - 2.0 * lambda * beta * beta / (q * q * q),
    )
}

/// Smallest `a ≥ 0` from which `u(a)` is increasing.
fn tl1_monotone_from(lambda: f64, beta: f64) -> f64 {
    let k = 2.0 * lambda * beta * beta;
    if k <= 1.0 {
        0.0
    } else {
        (k.cbrt() - 1.0) / beta
    }
}

/// Increasing root of `a + λβ/(1 + βa)² = u`, by Newton's method safeguarded with bisection
/// on the bracket `[a_min, u]`. `None` when `u` lies below the branch.
pub(crate) fn tl1_branch(u: f64, lambda: f64, beta: f64) -> Option<f64> {
    let mut lo = tl1_monotone_from(lambda, beta);
    let (g_lo, _) = tl1_forward(lo, lambda, beta);
    if u < g_lo {
        return None;
    }
    if u == g_lo {
        return Some(lo);
    }
    // u(a) ≥ a, so the root lies at or below u.
    let mut hi = u.max(lo);
    let mut a = 0.5 * (lo + hi);
    for _ in 0..200 {
        let (g, dg) = tl1_forward(a, lambda, beta);
        let f = g - u;
        if f == 0.0 {
            return Some(a);
        }
        if f > 0.0 {
            hi = a;
        } else {
            lo = a;
        }
        let newton = a - f / dg;
        let next = if dg > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - a).abs() <= 1e-15 * (1.0 + a.abs()) || hi - lo <= 1e-15 * (1.0 + hi) {
            return Some(next);
        }
        a = next;
    }
    Some(a)
}

pub(crate) fn transformed_l1_dead_zone(lambda: f64, beta: f64) -> f64 {
    if 2.0 * lambda * beta * beta <= 1.0 {
        return lambda * beta;
    }
    let a_min = tl1_monotone_from(lambda, beta);
    let exists_from = tl1_forward(a_min, lambda, beta).0;
    let excess = |u: f64| {
        let a = tl1_branch(u, lambda, beta).unwrap_or(0.0);
        0.5 * (u - a) * (u - a) + lambda * transformed_l1_cost(a, beta) - 0.5 * u * u
    };
    energy_crossing(excess, exists_from)
}

/// Root of a decreasing `excess(u)` on `[from, ∞)` by bisection; `from` if it is already ≤ 0.
fn energy_crossing(excess: impl Fn(f64) -> f64, from: f64) -> f64 {
    if excess(from) <= 0.0 {
        return from;
    }
    let mut lo = from;
    let mut step = from.abs().max(1e-3);
    let mut hi = from + step;
    while excess(hi) > 0.0 {
        lo = hi;
        step *= 2.0;
        hi += step;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if excess(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}
