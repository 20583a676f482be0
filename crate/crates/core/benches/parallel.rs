use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rayon::ThreadPoolBuilder;
use std::time::Duration;

use distlab_core::discrimination::{kind_preservation_fuzz, ppt_distinguishability};
use distlab_core::povm::{random_povm, verify_povm, Cuts, PovmKind};
use distlab_core::sdp::SdpOptions;
use distlab_core::states::domino_states;
use distlab_core::DimVector;

fn pools() -> Vec<(&'static str, rayon::ThreadPool)> {
    vec![
        ("sequential", ThreadPoolBuilder::new().num_threads(1).build().unwrap()),
        ("parallel", ThreadPoolBuilder::new().build().unwrap()),
    ]
}

fn bench_fuzz(c: &mut Criterion) {
    let mut group = c.benchmark_group("kind preservation fuzz");
    group.measurement_time(Duration::from_secs(10));
    let dims = DimVector::new(vec![3, 3]).unwrap();
    let sub = DimVector::new(vec![2, 2]).unwrap();
    let kinds = [PovmKind::General, PovmKind::Ppt, PovmKind::Sep, PovmKind::Locc1];
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::new(name, "20 trials"), |b| {
            b.iter(|| pool.install(|| kind_preservation_fuzz(&kinds, &dims, &sub, 20, 7, 1e-9).unwrap()))
        });
    }
    group.finish();
}

fn bench_verify(c: &mut Criterion) {
    let mut group = c.benchmark_group("verify_povm");
    let dims = DimVector::new(vec![4, 4]).unwrap();
    let povm = random_povm(&dims, 16, 3).unwrap();
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::new(name, "16 x 16x16"), |b| {
            b.iter(|| pool.install(|| verify_povm(&povm, 1e-9).unwrap()))
        });
    }
    group.finish();
}

fn bench_sdp(c: &mut Criterion) {
    let mut group = c.benchmark_group("ppt sdp");
    group.sample_size(10);
    group.measurement_time(Duration::from_secs(20));
    let set = domino_states().embed(&DimVector::new(vec![4, 3]).unwrap()).unwrap();
    let opts = SdpOptions::default();
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::new(name, "domino (4,3)"), |b| {
            b.iter(|| pool.install(|| ppt_distinguishability(&set, &Cuts::AllOneVsRest, &opts).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_fuzz, bench_verify, bench_sdp);
criterion_main!(benches);
