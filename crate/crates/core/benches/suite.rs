//! Suite throughput with the rayon pool against the plain loop.

use criterion::{criterion_group, criterion_main, Criterion};
use objnav_core::config::Params;
use objnav_core::episode::EpisodeConfig;
use objnav_core::scenegen::{generate_suite, LayoutSpec};
use objnav_core::suite::{run_suite, Execution};

fn suite(c: &mut Criterion) {
    let scenes = generate_suite(&LayoutSpec::default(), 4, 2024).expect("suite");
    let mut params = Params::default();
    params.episode.max_steps = 150;
    let config = EpisodeConfig::new(params).expect("config");
    let seeds = [0, 1];

    let mut g = c.benchmark_group("suite_4x2");
    g.sample_size(10);
    g.bench_function("parallel", |b| b.iter(|| run_suite(&scenes, &config, &seeds, Execution::Auto).unwrap()));
    g.bench_function("sequential", |b| b.iter(|| run_suite(&scenes, &config, &seeds, Execution::Sequential).unwrap()));
    g.finish();
}

criterion_group!(benches, suite);
criterion_main!(benches);
