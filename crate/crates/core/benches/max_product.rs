use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lqca_core::merge::{all_pairs_max_product_with, DirectDistances, MaxProductOptions, MentionId};
use lqca_core::Execution;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Sparse random mention graph: each node links to a few nearby nodes, as
/// mentions in overlapping chunks do.
fn graph(n: usize, seed: u64) -> DirectDistances {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut direct = DirectDistances::new();
    for a in 0..n {
        for b in a + 1..(a + 12).min(n) {
            if rng.gen_bool(0.5) {
                direct.insert((MentionId(a), MentionId(b)), 1.0 - rng.gen::<f64>());
            }
        }
    }
    direct
}

fn max_product(c: &mut Criterion) {
    let mut group = c.benchmark_group("all_pairs_max_product");
    group.sample_size(20);
    for n in [200, 800] {
        let direct = graph(n, n as u64);
        for (label, execution) in [
            ("sequential", Execution::Sequential),
            ("parallel", Execution::Parallel(0)),
        ] {
            let options = MaxProductOptions {
                floor: 0.0,
                execution,
            };
            group.bench_with_input(BenchmarkId::new(label, n), &direct, |b, d| {
                b.iter(|| all_pairs_max_product_with(d, &options))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, max_product);
criterion_main!(benches);
