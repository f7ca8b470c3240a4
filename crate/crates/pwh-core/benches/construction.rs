//! Synopsis construction: default thread pool vs. a single-thread pool.
//!
//! With the `parallel` feature disabled there is no pool to compare against,
//! so only the sequential build is measured.

use criterion::{criterion_group, criterion_main, Criterion};
use pwh_core::construct::build_pairwise_hist;
use pwh_core::{ColumnKind, ColumnSpec, EncodedTable, Params};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn synthetic_table(rows: usize, cols: usize) -> EncodedTable {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let specs = (0..cols)
        .map(|i| ColumnSpec {
            column_id: i,
            name: format!("c{i}"),
            kind: ColumnKind::Integer,
            offset: 0,
            scale: 1,
            category_ranks: vec![],
            null_code: None,
            byte_depth: 2,
        })
        .collect();
    let columns = (0..cols)
        .map(|i| {
            (0..rows)
                .map(|_| {
                    // Alternate uniform and skewed columns so refinement depth varies.
                    if i % 2 == 0 {
                        rng.gen_range(0..10_000u64)
                    } else {
                        let x: f64 = rng.gen();
                        (x * x * 10_000.0) as u64
                    }
                })
                .collect()
        })
        .collect();
    EncodedTable { specs, columns }
}

fn bench_construction(c: &mut Criterion) {
    let rows = 40_000;
    let table = synthetic_table(rows, 6);
    let params = Params::new(rows as u64, rows as u64, rows as u32 / 100, 0.001, 6).unwrap();

    let mut group = c.benchmark_group("construction");
    group.sample_size(10);
    group.bench_function("default_pool", |b| {
        b.iter(|| build_pairwise_hist(&table, &params, None, 42).unwrap())
    });
    #[cfg(feature = "parallel")]
    {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        group.bench_function("single_thread", |b| {
            b.iter(|| pool.install(|| build_pairwise_hist(&table, &params, None, 42).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_construction);
criterion_main!(benches);
