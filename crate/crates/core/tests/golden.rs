//! Seeded 2×2 phase grid against a checked-in CSV. Set `LCA_UPDATE_GOLDEN=1` to regenerate
//! after an intentional numerical change.

use std::path::PathBuf;

use lca_core::harness::{run_phase, ExperimentConfig, ExperimentKind, Tabular};

fn config() -> ExperimentConfig {
    let mut c = ExperimentConfig::new(ExperimentKind::Phase);
    c.n = 40;
    c.grid = 2;
    c.trials = 2;
    c.delta_range = [0.3, 0.8];
    c.rho_range = [0.1, 0.3];
    c.seed = 5;
    c
}

#[test]
fn phase_grid_matches_golden_csv() {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/phase_2x2.csv");
    let csv = run_phase(&config()).unwrap().csv();
    if std::env::var_os("LCA_UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, &csv).unwrap();
    }
    let expected = std::fs::read_to_string(&path).unwrap();
    assert_eq!(csv, expected);
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let mut one = config();
    one.threads = Some(1);
    let mut three = config();
    three.threads = Some(3);
    let (a, b) = (run_phase(&one).unwrap(), run_phase(&three).unwrap());
    assert_eq!(a.csv(), b.csv());
    assert_eq!(a.svg(), b.svg());
}
