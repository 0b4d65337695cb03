//! Acceptance suite: one PASS/FAIL line per criterion, with the measured quantity and the
//! pinned tolerance. Runs without the libtest harness so the lines always reach stdout.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use lca_core::baseline::{duality_gap, solve_fista, BaselineOptions};
use lca_core::costs::oracle::ProxOracle;
use lca_core::costs::{
    fit_lp_params, log_barrier_activation, soft_threshold, ActivationSpec, Family,
};
use lca_core::dynamics::{solve_lca, Continuation, SolverOptions};
use lca_core::harness::{
    activation_catalog, run_converge, run_phase, run_reweight, ExperimentConfig, ExperimentKind,
    Preset, Variant,
};
use lca_core::model::rel_mse;
use lca_core::synth::{generate, ProblemParams};

// Pinned tolerances.
const PAIRING_TOL: f64 = 1e-6;
const ORACLE_TOL: f64 = 5e-4;
const BLOCK_ORACLE_TOL: f64 = 1e-3;
const ORACLE_RESOLUTION: f64 = 1e-4;
const DESCENT_TOL: f64 = 1e-9;
const AGREEMENT_TOL: f64 = 1e-3;
const GAP_TOL: f64 = 1e-4;
const TIME_TO_2X_MAX: f64 = 100.0;
const SIZE_RATIO_MAX: f64 = 2.0;
const BASELINE_GROWTH_MIN: f64 = 4.0;
const RECOVERED_MAX: f64 = 1e-2;
const FAILED_MIN: f64 = 0.5;
const BARRIER_TOL_1E4: f64 = 0.1;
const BARRIER_TOL_1E8: f64 = 1e-3;
const LP_LIMIT_TOL: f64 = 1e-2;
const WEIGHT_RESIDUAL_TOL: f64 = 1e-6;
const REWEIGHT_MSE_TOL: f64 = 2e-2;

const U_MAX: f64 = 5.0;
const U_STEP: f64 = 1e-3;
const CATALOG_LAMBDA: f64 = 1.0;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn u_grid() -> impl Iterator<Item = f64> {
    let k = (2.0 * U_MAX / U_STEP).round() as i64;
    (0..=k).map(|i| -U_MAX + i as f64 * U_STEP)
}

fn scalar(spec: &ActivationSpec, u: f64) -> f64 {
    spec.activation(&[u]).unwrap()[0]
}

fn cost(spec: &ActivationSpec, a: f64) -> f64 {
    spec.cost_value(&[a]).unwrap_or(f64::INFINITY)
}

/// `|u − a − λ C'(a)|` with `C'` from a central difference of the cost. The step is small
/// enough that a window straddling a kink of `C'` stays far inside the tolerance.
fn pairing_residual(spec: &ActivationSpec, u: f64) -> Option<f64> {
    let a = scalar(spec, u);
    if a.abs() < 1e-5 {
        // dead zone, or the kink of the cost at the origin
        return None;
    }
    let h = 1e-6 * (100.0 * a.abs()).min(1.0);
    let d = (cost(spec, a + h) - cost(spec, a - h)) / (2.0 * h);
    Some((u - a - spec.lambda() * d).abs())
}

fn c1_pairing() -> Outcome {
    let mut worst = (0.0, String::new());
    for spec in activation_catalog(CATALOG_LAMBDA).unwrap() {
        let r = u_grid()
            .filter_map(|u| pairing_residual(&spec, u))
            .fold(0.0, f64::max);
        if r >= worst.0 {
            worst = (r, spec.family().name().to_string());
        }
    }
    outcome(
        worst.0 <= PAIRING_TOL,
        format!(
            "max residual {:.2e} ({}) over 12 families (tol {PAIRING_TOL:.0e})",
            worst.0, worst.1
        ),
    )
}

/// Brute-force `argmin ½‖u − a‖² + λ‖a‖` on nested 2-D grids (1e-2, 1e-3, 1e-4).
fn block_oracle(u: [f64; 2], lambda: f64) -> [f64; 2] {
    let f = |a: [f64; 2]| {
        let (d0, d1) = (u[0] - a[0], u[1] - a[1]);
        0.5 * (d0 * d0 + d1 * d1) + lambda * a[0].hypot(a[1])
    };
    let r = 2.0 * u[0].hypot(u[1]);
    let mut center = [0.0, 0.0];
    let mut half = r;
    for res in [1e-2, 1e-3, 1e-4] {
        let k = (half / res).ceil() as i64;
        let snap = |x: f64| (x / res).round() * res;
        let c = [snap(center[0]), snap(center[1])];
        let mut best = (f(c), c);
        for i in -k..=k {
            for j in -k..=k {
                let a = [c[0] + i as f64 * res, c[1] + j as f64 * res];
                let v = f(a);
                if v < best.0 {
                    best = (v, a);
                }
            }
        }
        center = best.1;
        half = 5.0 * res;
    }
    center
}

fn c2_oracle() -> Outcome {
    let specs: Vec<ActivationSpec> = activation_catalog(CATALOG_LAMBDA)
        .unwrap()
        .into_iter()
        .filter(|s| s.is_separable())
        .collect();
    let mut worst = (0.0, String::new());
    let mut skipped = 0usize;
    for spec in &specs {
        let oracle = ProxOracle::new(spec, 0, ORACLE_RESOLUTION, U_MAX).unwrap();
        let jump = (!spec.is_continuous()).then(|| spec.dead_zone());
        let mut err: f64 = 0.0;
        for u in u_grid() {
            let x = u.abs();
            // The L0 unit hard-thresholds at λ; the exact prox of the counting cost at √(2λ).
            let l0_band = matches!(spec.family(), Family::L0)
                && x > spec.lambda()
                && x <= (2.0 * spec.lambda()).sqrt() + 2e-3;
            // At a jump the prox is set-valued; the grid may pick either branch.
            let at_jump = jump.is_some_and(|t| (x - t).abs() <= 2e-3);
            if l0_band || at_jump {
                skipped += 1;
                continue;
            }
            err = err.max((scalar(spec, u) - oracle.prox(u)).abs());
        }
        if err >= worst.0 {
            worst = (err, spec.family().name().to_string());
        }
    }

    let block = ActivationSpec::new(
        Family::BlockL1 {
            groups: vec![vec![0, 1]],
        },
        CATALOG_LAMBDA,
    )
    .unwrap();
    let mut block_err: f64 = 0.0;
    for i in 0..15 {
        for j in 0..15 {
            let u = [
                -3.0 + 6.0 * i as f64 / 14.0 + 0.013,
                -3.0 + 6.0 * j as f64 / 14.0 - 0.007,
            ];
            let a = block.activation(&u).unwrap();
            let o = block_oracle(u, CATALOG_LAMBDA);
            block_err = block_err.max((a[0] - o[0]).abs().max((a[1] - o[1]).abs()));
        }
    }
    outcome(
        worst.0 <= ORACLE_TOL && block_err <= BLOCK_ORACLE_TOL,
        format!(
            "pointwise max |T − prox| {:.2e} ({}; tol {ORACLE_TOL:.0e}, {skipped} jump/L0-band points skipped), \
             block 2-D max {:.2e} (tol {BLOCK_ORACLE_TOL:.0e})",
            worst.0, worst.1, block_err
        ),
    )
}

fn convex_spec(k: usize, n: usize, lambda: f64) -> ActivationSpec {
    let family = match k % 5 {
        0 => Family::L1,
        1 => Family::Huber { epsilon: lambda },
        2 => Family::WeightedL2 {
            weights: vec![1.0; n],
        },
        3 => fit_lp_params(1.5).unwrap().family(),
        _ => Family::BlockL1 {
            groups: (0..n / 2).map(|g| vec![2 * g, 2 * g + 1]).collect(),
        },
    };
    ActivationSpec::new(family, lambda).unwrap()
}

fn c3_descent() -> Outcome {
    let opts = SolverOptions {
        continuation: Continuation::off(),
        ..Default::default()
    };
    let mut worst_rise = f64::NEG_INFINITY;
    let mut families = Vec::new();
    for seed in 0..20u64 {
        let (p, _) = generate(&ProblemParams::new(200, 0.5, 0.2).with_seed(seed)).unwrap();
        let spec = convex_spec(seed as usize, p.n(), p.lambda());
        if !families.contains(&spec.family().name()) {
            families.push(spec.family().name());
        }
        let sol = solve_lca(&p, &spec, &opts).unwrap();
        for w in sol.trace.windows(2) {
            let rise = (w[1].energy - w[0].energy) / (1.0 + w[0].energy.abs());
            worst_rise = worst_rise.max(rise);
        }
    }
    outcome(
        worst_rise <= DESCENT_TOL,
        format!(
            "largest relative energy increase between samples {worst_rise:.2e} over 20 instances \
             ({}; tol {DESCENT_TOL:.0e})",
            families.join("/")
        ),
    )
}

fn c4_agreement() -> Outcome {
    let (mut worst_dist, mut worst_gap) = (0.0f64, 0.0f64);
    let mut all_converged = true;
    for seed in 0..20u64 {
        let (p, _) = generate(&ProblemParams::new(200, 0.5, 0.2).with_seed(seed)).unwrap();
        let lca = solve_lca(
            &p,
            &ActivationSpec::l1(p.lambda()).unwrap(),
            &SolverOptions::default(),
        )
        .unwrap();
        let fista = solve_fista(&p, None, &BaselineOptions::default()).unwrap();
        all_converged &= lca.converged && fista.converged;
        worst_dist = worst_dist.max(rel_mse(&lca.a, &fista.a).unwrap());
        for a in [&lca.a, &fista.a] {
            worst_gap = worst_gap.max(duality_gap(&p, None, a).unwrap().1);
        }
    }
    outcome(
        worst_dist <= AGREEMENT_TOL && worst_gap <= GAP_TOL && all_converged,
        format!(
            "max LCA–FISTA rel-MSE distance {worst_dist:.2e} (tol {AGREEMENT_TOL:.0e}), \
             max relative gap {worst_gap:.2e} (tol {GAP_TOL:.0e}), all converged: {all_converged}"
        ),
    )
}

fn easy_converge_config() -> ExperimentConfig {
    let mut config = ExperimentConfig::new(ExperimentKind::Converge);
    config.converge.presets = vec![Preset::new("easy", 0.6, 0.15)];
    config
}

fn c5_c6_convergence() -> (Outcome, Outcome) {
    let config = easy_converge_config();
    let report = run_converge(&config).unwrap();
    let sizes = &config.converge.sizes;
    let t2x: Vec<f64> = sizes
        .iter()
        .map(|&n| report.summary_for("easy", n).unwrap().median_time_to_2x)
        .collect();
    let conv: Vec<f64> = sizes
        .iter()
        .map(|&n| report.summary_for("easy", n).unwrap().median_converge_time)
        .collect();
    let list = |v: &[f64]| {
        sizes
            .iter()
            .zip(v)
            .map(|(n, t)| format!("N={n}: {t:.1}τ"))
            .collect::<Vec<_>>()
            .join(", ")
    };
    let c5 = outcome(
        t2x.iter().all(|&t| t <= TIME_TO_2X_MAX),
        format!(
            "easy preset median time to 2× terminal distance {} (max {TIME_TO_2X_MAX}τ)",
            list(&t2x)
        ),
    );

    let (lo, hi) = conv
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(l, h), &t| (l.min(t), h.max(t)));
    let ratio = hi / lo;
    // Per-iteration cost of the digital baseline, best of five timings per size.
    let per_iter = |n: usize| {
        let (p, _) = generate(&ProblemParams::new(n, 0.6, 0.15).with_seed(7)).unwrap();
        let opts = BaselineOptions {
            max_iters: 400,
            gap_tol: 1e-300,
            ..Default::default()
        };
        (0..5)
            .map(|_| {
                let start = Instant::now();
                let sol = solve_fista(&p, None, &opts).unwrap();
                start.elapsed().as_secs_f64() / sol.steps as f64
            })
            .fold(f64::INFINITY, f64::min)
    };
    let growth = per_iter(400) / per_iter(100);
    let c6 = outcome(
        ratio.is_finite() && ratio <= SIZE_RATIO_MAX && growth >= BASELINE_GROWTH_MIN,
        format!(
            "median convergence time {} → max/min {ratio:.2} (band {SIZE_RATIO_MAX}); \
             FISTA per-iteration cost grows {growth:.1}× from N=100 to N=400 (min {BASELINE_GROWTH_MIN}, measured)",
            list(&conv)
        ),
    );
    (c5, c6)
}

fn c7_phase() -> Outcome {
    let config = ExperimentConfig::new(ExperimentKind::Phase);
    let grid = run_phase(&config).unwrap();
    let (good, bad) = (grid.nearest(0.7, 0.15), grid.nearest(0.2, 0.8));
    let mid = grid.nearest(0.5, 0.5).0;
    let mut pass = true;
    let mut parts = Vec::new();
    for &solver in &grid.solvers {
        let mse = |(i, j): (usize, usize)| grid.cell(i, j, solver).unwrap().mean_rel_mse;
        let (g, b) = (mse(good), mse(bad));
        let column: Vec<f64> = (0..grid.rhos.len()).map(|j| mse((mid, j))).collect();
        let inversions = column
            .windows(2)
            .filter(|w| w[1] < w[0] || w[1].is_nan())
            .count();
        pass &= g <= RECOVERED_MAX && b >= FAILED_MIN && inversions <= 1;
        parts.push(format!(
            "{}: {g:.2e} at (δ,ρ)=({:.3},{:.3}), {b:.2} at ({:.3},{:.3}), {inversions} inversion(s) along δ={:.3}",
            solver.name(),
            grid.deltas[good.0],
            grid.rhos[good.1],
            grid.deltas[bad.0],
            grid.rhos[bad.1],
            grid.deltas[mid],
        ));
    }
    outcome(
        pass,
        format!(
            "{} (need ≤ {RECOVERED_MAX:.0e}, ≥ {FAILED_MIN}, ≤ 1 inversion; 10×10 grid, N=100)",
            parts.join("; ")
        ),
    )
}

fn c8_log_barrier() -> Outcome {
    let sup = |gamma: f64| {
        [0.5, 1.0]
            .iter()
            .flat_map(|&lambda| {
                (0..=6000).map(move |k| {
                    let u = -3.0 + k as f64 * 1e-3;
                    (log_barrier_activation(u, lambda, gamma) - soft_threshold(u, lambda).max(0.0))
                        .abs()
                })
            })
            .fold(0.0, f64::max)
    };
    let (d4, d8) = (sup(1e4), sup(1e8));
    outcome(
        d4 <= BARRIER_TOL_1E4 && d8 <= BARRIER_TOL_1E8,
        format!(
            "sup distance to one-sided soft threshold: {d4:.2e} at γ=1e4 (tol {BARRIER_TOL_1E4}), \
             {d8:.2e} at γ=1e8 (tol {BARRIER_TOL_1E8:.0e})"
        ),
    )
}

fn c9_lp_limits() -> Outcome {
    let (fit1, fit2) = (fit_lp_params(1.0).unwrap(), fit_lp_params(2.0).unwrap());
    let (mut d1, mut d2) = (0.0f64, 0.0f64);
    for lambda in [0.25, 0.5, 1.0] {
        let (s1, s2) = (fit1.spec(lambda).unwrap(), fit2.spec(lambda).unwrap());
        for k in 0..=2000 {
            let u = k as f64 * 1e-3;
            d1 = d1.max((scalar(&s1, u) - soft_threshold(u, lambda)).abs());
            d2 = d2.max((scalar(&s2, u) - u / (1.0 + 2.0 * lambda)).abs());
        }
    }
    outcome(
        d1 <= LP_LIMIT_TOL && d2 <= LP_LIMIT_TOL,
        format!(
            "sup distance on [0,2], λ∈{{0.25,0.5,1}}: p=1 vs soft threshold {d1:.2e}, \
             p=2 vs gain 1/(1+2λ) {d2:.2e} (tol {LP_LIMIT_TOL:.0e})"
        ),
    )
}

fn c10_reweight() -> Outcome {
    let mut config = ExperimentConfig::new(ExperimentKind::Reweight);
    config.n = 200;
    let table = run_reweight(&config).unwrap();
    let mut pass = true;
    let mut worst_residual = 0.0f64;
    let mut missing = 0usize;
    let mut rows = Vec::new();
    for (r, rho) in table.rhos().into_iter().enumerate() {
        let dynamic = table.point(r, Variant::Dynamic);
        for o in &dynamic.outcomes {
            match o.and_then(|o| o.weight_residual) {
                Some(w) => worst_residual = worst_residual.max(w),
                None => missing += 1,
            }
        }
        let d = dynamic.mean_rel_mse();
        let iter_fista = table.point(r, Variant::IterativeFista).mean_rel_mse();
        let iter_lca = table.point(r, Variant::IterativeLca);
        let (td, ti) = (dynamic.median_time(), iter_lca.median_time());
        let diff = (d - iter_fista)
            .abs()
            .max((d - iter_lca.mean_rel_mse()).abs());
        pass &= diff <= REWEIGHT_MSE_TOL && td <= ti;
        rows.push(format!("ρ={rho}: Δmse {diff:.1e}, {td:.0}τ vs {ti:.0}τ"));
    }
    pass &= worst_residual <= WEIGHT_RESIDUAL_TOL && missing == 0;
    outcome(
        pass,
        format!(
            "max weight residual {worst_residual:.1e}·ν/γ (tol {WEIGHT_RESIDUAL_TOL:.0e}, {missing} failed runs); \
             dynamic vs iterative {} (mse tol {REWEIGHT_MSE_TOL:.0e}, dynamic time ≤ iterative; N=200, 15 seeds)",
            rows.join("; ")
        ),
    )
}

fn lca(args: &[&str], dir: &Path) -> std::process::Output {
    let out = Command::new(env!("CARGO_BIN_EXE_lca"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("lca binary runs");
    assert!(
        out.status.success(),
        "lca {args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn c11_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("phase.json"),
        r#"{"kind":"phase","n":60,"grid":3,"trials":2}"#,
    )
    .unwrap();
    std::fs::write(
        d.join("converge.json"),
        r#"{"kind":"converge","converge":{"sizes":[50,100],"trials":2}}"#,
    )
    .unwrap();
    std::fs::write(
        d.join("reweight.json"),
        r#"{"kind":"reweight","n":60,"reweight":{"rhos":[0.1,0.2],"trials":2}}"#,
    )
    .unwrap();
    let mut files = Vec::new();
    for run in ["a", "b"] {
        let threads = if run == "a" { "2" } else { "1" };
        let f = |stem: &str, ext: &str| format!("{stem}_{run}.{ext}");
        for kind in ["phase", "converge", "reweight"] {
            let (csv, svg) = (f(kind, "csv"), f(kind, "svg"));
            lca(
                &[
                    kind,
                    "--config",
                    &format!("{kind}.json"),
                    "--seed",
                    "11",
                    "--threads",
                    threads,
                    "--out",
                    &csv,
                    "--svg",
                    &svg,
                ],
                d,
            );
            files.extend([csv, svg]);
        }
        let (act, act_svg) = (f("act", "csv"), f("act", "svg"));
        lca(
            &[
                "activations",
                "--points",
                "101",
                "--out",
                &act,
                "--svg",
                &act_svg,
            ],
            d,
        );
        let problem = f("problem", "json");
        lca(&["gen", "--n", "80", "--seed", "11", "--out", &problem], d);
        let (sol, trace) = (f("solution", "json"), f("trace", "csv"));
        lca(
            &[
                "solve",
                "--problem",
                &problem,
                "--trace",
                &trace,
                "--out",
                &sol,
            ],
            d,
        );
        files.extend([act, act_svg, problem, sol, trace]);
    }
    let half = files.len() / 2;
    let mut differing = Vec::new();
    for (a, b) in files[..half].iter().zip(&files[half..]) {
        if std::fs::read(d.join(a)).unwrap() != std::fs::read(d.join(b)).unwrap() {
            differing.push(a.clone());
        }
    }
    outcome(
        differing.is_empty(),
        format!(
            "{half} CLI outputs (CSV/SVG/JSON from every subcommand) compared across two runs with \
             different thread counts; differing: {differing:?}"
        ),
    )
}

fn main() {
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    let guard = |f: &dyn Fn() -> Outcome| {
        catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        })
    };
    let mut run = |id: u32, name: &'static str, o: Outcome| {
        println!(
            "criterion {id:>2} {} {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        results.push((id, name, o));
    };
    let start = Instant::now();
    run(1, "activation/cost pairing", guard(&c1_pairing));
    run(2, "prox-oracle equivalence", guard(&c2_oracle));
    run(3, "energy descent", guard(&c3_descent));
    run(4, "LCA/FISTA agreement", guard(&c4_agreement));
    let (c5, c6) = catch_unwind(c5_c6_convergence).unwrap_or_else(|_| {
        (
            outcome(false, "panicked".into()),
            outcome(false, "panicked".into()),
        )
    });
    run(5, "convergence in τ units", c5);
    run(6, "size invariance", c6);
    run(7, "phase-transition shape", guard(&c7_phase));
    run(8, "log-barrier limit", guard(&c8_log_barrier));
    run(9, "ℓp endpoint limits", guard(&c9_lp_limits));
    run(10, "re-weighted steady state", guard(&c10_reweight));
    run(11, "determinism", guard(&c11_determinism));
    let failed: Vec<u32> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    println!(
        "acceptance: {}/{} criteria passed in {:.1} s",
        results.len() - failed.len(),
        results.len(),
        start.elapsed().as_secs_f64()
    );
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
