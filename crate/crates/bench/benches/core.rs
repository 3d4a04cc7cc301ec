use std::hint::black_box;

use considerate_core::analysis::{fit_hierarchical, synthetic_trend_data, McmcConfig, SyntheticSpec};
use considerate_core::model::{
    estimate_internal, BehaviorParams, CognitiveParams, EstimatedState, Pose, WindowObservation,
};
use considerate_core::sim::{run_trial, Condition, ParticipantPreset, TrialConfig};
use criterion::{criterion_group, criterion_main, Criterion};

fn estimator(c: &mut Criterion) {
    let phi = BehaviorParams::default();
    let cog = CognitiveParams::default();
    let obs = WindowObservation {
        observer: Pose::new(0.0, 0.0, 0.0),
        other_start: Pose::new(3.0, 0.5, 3.0),
        other_end: Pose::new(2.75, 0.55, 2.9),
    };
    let prev = EstimatedState::default();
    c.bench_function("estimate_internal 21x21", |b| {
        b.iter(|| estimate_internal(black_box(&obs), &phi, &cog, &prev))
    });
}

fn trial(c: &mut Criterion) {
    let mut group = c.benchmark_group("run_trial");
    group.sample_size(20);
    for condition in [Condition::Psi0001, Condition::RandomWalk] {
        let cfg = TrialConfig::new(condition, ParticipantPreset::Rejecting);
        group.bench_function(condition.label(), |b| b.iter(|| run_trial(&cfg, black_box(7))));
    }
    group.finish();
}

fn mcmc(c: &mut Criterion) {
    let data = synthetic_trend_data(&SyntheticSpec {
        conditions: vec![
            ("a".into(), 0.2, 0.02),
            ("b".into(), 0.2, 0.0),
            ("c".into(), 0.2, 0.0),
            ("d".into(), 0.2, 0.0),
        ],
        trials: 20,
        movements: 8,
        sigma: [0.03, 0.005, 0.03],
        antithetic: false,
        seed: 1,
    });
    let cfg = McmcConfig::default();
    let mut group = c.benchmark_group("fit_hierarchical");
    group.sample_size(10);
    group.bench_function("4x10000, 640 obs", |b| {
        b.iter(|| fit_hierarchical(black_box(&data), &cfg).unwrap())
    });
    group.finish();
}

criterion_group!(benches, estimator, trial, mcmc);
criterion_main!(benches);
