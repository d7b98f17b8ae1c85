use transonic::config::{Perturbation, RunConfig};
use transonic::gas::GasState;
use transonic::riemann::FrontKind;
use transonic::run;
use transonic::verifier::{l1_distance, sup_boundary_distance};

fn explicit(states: Vec<GasState>, breakpoints: Vec<f64>) -> RunConfig {
    RunConfig {
        perturbation: Perturbation::Explicit { breakpoints, states },
        x_max: 10.0,
        weak_t: 5.0,
        ..RunConfig::default()
    }
}

#[test]
fn pressure_rise_at_infinity_gives_far_rarefaction() {
    let cfg = explicit(
        vec![GasState::new(2.0, 0.0, 1.0, 1.0), GasState::new(2.0, 0.0, 1.02, 1.0)],
        vec![0.5],
    );
    let (st, err) = run::execute(&cfg, 0.01).unwrap();
    assert!(err.is_none());
    let a = run::far_field(&cfg, &st).unwrap();
    assert_eq!(a.predicted_kind, Some(FrontKind::Rarefaction));
    assert!(a.kind_matches());
    assert!(a.slope_error < 1e-9);
    assert!(a.top_is_tail);
    assert!((a.net_four_strength - a.predicted_strength).abs() < 1e-6);
}

#[test]
fn entropy_and_vorticity_perturbation_leaves_no_far_wave() {
    let cfg = explicit(
        vec![
            GasState::new(2.0, 0.0, 1.0, 1.0),
            GasState::new(2.02, 0.0, 1.0, 1.03),
            GasState::new(1.99, 0.0, 1.0, 0.98),
        ],
        vec![0.3, 0.8],
    );
    let (st, err) = run::execute(&cfg, 0.01).unwrap();
    assert!(err.is_none());
    let a = run::far_field(&cfg, &st).unwrap();
    assert_eq!(a.predicted_kind, None);
    assert_eq!(a.measured_kind, None);
    assert_eq!(a.predicted_slope, 0.0);
    assert_eq!(a.slope_error, 0.0);
    assert!(st.events.iter().all(|e| e.kind != transonic::glimm::EventKind::Reflection));
}

#[test]
fn unperturbed_study_is_exact() {
    let cfg = RunConfig {
        perturbation: Perturbation::None,
        deltas: vec![0.04, 0.02, 0.01],
        x_max: 5.0,
        slices: vec![1.0, 5.0],
        ..RunConfig::default()
    };
    let rep = run::study(&cfg).unwrap();
    assert_eq!(rep.rows.len(), 3);
    for r in &rep.rows {
        assert_eq!(r.max_residual, 0.0);
        assert_eq!(r.events, 0);
        assert!(r.l1_to_next.iter().all(|&d| d == 0.0));
    }
    assert!(rep.residual_slope.is_nan());
}

#[test]
fn distances_vanish_on_identical_runs() {
    let cfg = RunConfig {
        seed: 4,
        x_max: 8.0,
        ..RunConfig::default()
    };
    let (a, _) = run::execute(&cfg, 0.01).unwrap();
    let (b, _) = run::execute(&cfg, 0.01).unwrap();
    assert_eq!(a, b);
    assert_eq!(l1_distance(&a, &b, 4.0, 10.0).unwrap(), 0.0);
    assert_eq!(sup_boundary_distance(&a, &b, 8.0), 0.0);
}

#[test]
fn aborted_runs_keep_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig {
        seed: 1,
        max_events: 50,
        x_max: 10.0,
        out: dir.path().to_path_buf(),
        ..RunConfig::default()
    };
    let rep = run::run(&cfg).unwrap();
    assert!(rep.failed());
    assert!(rep.abort.as_deref().unwrap().contains("ceiling"));
    for f in ["fronts.csv", "boundary.csv", "glimm.csv", "slices.csv", "reports.json", "state.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}
