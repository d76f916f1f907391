use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ontoserv_core::catalog::{Catalog, IndexedCatalog, ServiceIndex};
use ontoserv_core::reformulate::EnrichedQuery;
use ontoserv_core::search::{rank_batch, RankOptions};
use ontoserv_core::text::Analyzer;
use ontoserv_core::Execution;
use ontoserv_testkit::gen;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const STRATEGIES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn catalog(n: usize) -> Catalog {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let pool = gen::concept_pool();
    Catalog::from_records((0..n).map(|i| gen::record(&mut rng, &format!("s{i:05}"), &pool))).unwrap()
}

fn queries(n: usize) -> Vec<EnrichedQuery> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    (0..n).map(|_| gen::enriched_query(&mut rng)).collect()
}

fn build_index(c: &mut Criterion) {
    let analyzer = Analyzer::default();
    let mut group = c.benchmark_group("build_index");
    for size in [1_000, 10_000] {
        let cat = catalog(size);
        for (name, exec) in STRATEGIES {
            group.bench_with_input(BenchmarkId::new(name, size), &cat, |b, cat| {
                b.iter(|| ServiceIndex::build(cat, &analyzer, exec))
            });
        }
    }
    group.finish();
}

fn rank_queries(c: &mut Criterion) {
    let store = IndexedCatalog::new(catalog(10_000), Analyzer::default(), Execution::Parallel);
    let batch = queries(64);
    let options = RankOptions::default();
    let mut group = c.benchmark_group("rank_batch");
    for (name, exec) in STRATEGIES {
        group.bench_function(BenchmarkId::new(name, batch.len()), |b| {
            b.iter(|| rank_batch(&batch, &store, None, &options, exec))
        });
    }
    group.finish();
}

criterion_group!(benches, build_index, rank_queries);
criterion_main!(benches);
