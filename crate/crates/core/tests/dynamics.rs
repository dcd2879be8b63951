use starnls::dynamics::{
    instability_experiment, Direction, EvolutionTrace, ExperimentSettings, StopReason,
};
use starnls::{BranchParams, GraphConfig};

/// Growth rate between the first crossings of 3 and 10 times the initial
/// distance.
fn early_rate(trace: &EvolutionTrace) -> f64 {
    let t3 = trace.time_to_growth(3.0).unwrap();
    let t10 = trace.time_to_growth(10.0).unwrap();
    (10.0f64 / 3.0).ln() / (t10 - t3)
}

#[test]
fn early_growth_rate_does_not_depend_on_amplitude() {
    let c = GraphConfig {
        n: 3,
        alpha: 1.0,
        p: 1.0,
    };
    let b = BranchParams::new(4.0, 0);
    let run = |eps| {
        let s = ExperimentSettings {
            eps,
            t_final: 2.0,
            record_every: 5,
            ..Default::default()
        };
        instability_experiment(&c, &b, &s).unwrap()
    };
    let (r1, r2) = (early_rate(&run(1e-3)), early_rate(&run(2.5e-4)));
    assert!(r1 > 0.0 && r2 > 0.0);
    assert!((r1 - r2).abs() <= 0.2 * r2, "rates {r1} {r2}");
}

#[test]
fn stable_branch_conserves_mass_and_energy() {
    let c = GraphConfig {
        n: 3,
        alpha: -1.0,
        p: 1.0,
    };
    let b = BranchParams::new(1.0, 0);
    let s = ExperimentSettings {
        t_final: 10.0,
        direction: Direction::Random,
        seed: 7,
        ..Default::default()
    };
    let trace = instability_experiment(&c, &b, &s).unwrap();
    assert_eq!(trace.stop, StopReason::Completed);
    assert!((trace.times.last().unwrap() - 10.0).abs() < 1e-9);
    assert!(trace.max_relative_mass_drift() < 1e-10);
    assert!(
        trace.max_relative_energy_drift() < 1e-6,
        "{}",
        trace.max_relative_energy_drift()
    );
    assert!(trace.orbital_distance.iter().all(|&d| d < 10.0 * s.eps));
}
