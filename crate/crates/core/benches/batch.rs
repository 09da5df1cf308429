use criterion::{criterion_group, criterion_main, Criterion};

use carrier_landing::sim::{run_scenario, ControllerKind, NullSink, RunMetrics, Scenario, ScenarioConfig};
use carrier_landing::sweep::{map_parallel, map_sequential, seed_configs};

fn run(_: usize, c: &ScenarioConfig) -> RunMetrics {
    run_scenario(c, &mut NullSink).expect("run").metrics
}

fn batch(c: &mut Criterion) {
    let mut base = ScenarioConfig::new(Scenario::PitchStep, ControllerKind::Opd).with_disturbances(true);
    base.duration = 2.0;
    let configs = seed_configs(&base, 0, 16);

    let mut group = c.benchmark_group("pitch_step_16_seeds");
    group.sample_size(10);
    group.bench_function("sequential", |b| b.iter(|| map_sequential(&configs, run)));
    group.bench_function("parallel", |b| b.iter(|| map_parallel(&configs, run)));
    group.finish();
}

criterion_group!(benches, batch);
criterion_main!(benches);
