//! Frozen outputs of the bias study and the fitter.

use std::fs::File;

use rho_lite::complexity::EstimatorKind;
use rho_lite::montecarlo::{parse_csv, run_bias_experiment, BiasRow, ExperimentConfig};
use rho_lite::pwl_fit::{fit_piecewise, kedem_target, FitConfig};

fn golden() -> Vec<BiasRow> {
    parse_csv(
        File::open(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/tests/golden/bias_full_scale.csv"
        ))
        .unwrap(),
    )
    .unwrap()
}

fn bias(rows: &[BiasRow], rho: f64, kind: EstimatorKind) -> &BiasRow {
    rows.iter()
        .find(|r| r.rho == rho && r.estimator == kind)
        .unwrap()
}

#[test]
fn golden_file_shape() {
    let rows = golden();
    assert_eq!(rows.len(), 147);
    for r in &rows {
        assert!(r.ci_lo <= r.mean_error && r.mean_error <= r.ci_hi);
        assert!(r.stderr > 0.0);
    }
}

#[test]
fn subset_run_reproduces_golden_rows() {
    let cfg = ExperimentConfig {
        rho_grid: vec![-0.96, 0.0, 0.96],
        ..ExperimentConfig::default()
    };
    let fresh = run_bias_experiment(&cfg).unwrap();
    let rows = golden();
    for r in &fresh.rows {
        assert_eq!(r, bias(&rows, r.rho, r.estimator));
    }
}

#[test]
fn sign_based_estimators_underestimate_near_one() {
    let rows = golden();
    let kedem = bias(&rows, 0.96, EstimatorKind::Kedem);
    let proposed = bias(&rows, 0.96, EstimatorKind::Proposed);
    assert!(kedem.ci_hi < 0.0 && proposed.ci_hi < 0.0);
    assert!(
        (kedem.mean_error - -1.8928e-3).abs() < 1e-7,
        "{}",
        kedem.mean_error
    );
    assert!(
        (proposed.mean_error - -7.6747e-3).abs() < 1e-7,
        "{}",
        proposed.mean_error
    );
}

#[test]
fn acf_bias_pulls_toward_zero_at_large_correlation() {
    let rows = golden();
    for rho in [0.88, 0.92, 0.96] {
        assert!(bias(&rows, rho, EstimatorKind::Acf).ci_hi < 0.0, "{rho}");
        assert!(bias(&rows, -rho, EstimatorKind::Acf).ci_lo > 0.0, "{rho}");
    }
    assert!((bias(&rows, 0.96, EstimatorKind::Acf).mean_error - -4.9562e-3).abs() < 1e-7);
    assert!((bias(&rows, -0.96, EstimatorKind::Acf).mean_error - 6.5371e-3).abs() < 1e-7);
}

#[test]
fn single_segment_fit_error() {
    // independent bounded scalar search over the symmetric line family gives 0.13821686
    let out = fit_piecewise(
        kedem_target,
        &FitConfig {
            n_segments: 1,
            ..FitConfig::default()
        },
    )
    .unwrap();
    assert!(
        (out.max_error - 0.1382169).abs() < 1e-6,
        "{}",
        out.max_error
    );
}
