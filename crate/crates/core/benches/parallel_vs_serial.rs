//! Compares the rayon-backed batch loops against their sequential twins.
//!
//! Built with default features both paths are available side by side; with
//! `--no-default-features` only the sequential functions exist and the
//! parallel groups are skipped.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rsids_core::entropy;
use rsids_core::kdd::{AttackClass, NumericInstance};
use rsids_core::mask::FeatureMask;
use rsids_core::rough_set;
use rsids_core::svm::{self, TrainConfig};
use rsids_core::table::DecisionTable;

fn synth_instances(n: usize, seed: u64) -> Vec<NumericInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let attack = rng.gen_bool(0.5);
            let mut features = [0.0f64; 41];
            for f in features.iter_mut() {
                *f = rng.gen_range(0.0..100.0);
            }
            // separable-ish signal on a few columns
            if attack {
                features[4] += 500.0;
                features[22] += 300.0;
                features[24] = 1.0;
            }
            let class = if attack {
                AttackClass::DoS
            } else {
                AttackClass::Normal
            };
            NumericInstance { features, class }
        })
        .collect()
}

fn synth_table(rows: usize, attrs: usize, seed: u64) -> DecisionTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let columns: Vec<Vec<u32>> = (0..attrs)
        .map(|_| (0..rows).map(|_| rng.gen_range(0..10)).collect())
        .collect();
    let decisions: Vec<u8> = (0..rows).map(|_| rng.gen_range(0..2)).collect();
    DecisionTable::new((1..=attrs as u16).collect(), columns, decisions).unwrap()
}

fn bench_predict_batch(c: &mut Criterion) {
    let train = synth_instances(400, 1);
    let test = synth_instances(2000, 2);
    let mask = FeatureMask::full();
    let cfg = TrainConfig {
        seed: 7,
        ..TrainConfig::for_feature_count(mask.len())
    };
    let (model, _) = svm::train_instances(&train, &mask, &cfg).unwrap();

    let mut group = c.benchmark_group("predict_batch");
    group.bench_function("serial", |b| {
        b.iter(|| black_box(model.predict_batch(black_box(&test))))
    });
    #[cfg(feature = "parallel")]
    group.bench_function("parallel", |b| {
        b.iter(|| black_box(model.par_predict_batch(black_box(&test))))
    });
    group.finish();
}

fn bench_entropy_gains(c: &mut Criterion) {
    let table = synth_table(20_000, 41, 3);
    let mut group = c.benchmark_group("entropy_gains");
    group.bench_function("serial", |b| {
        b.iter(|| black_box(entropy::feature_gains(black_box(&table)).unwrap()))
    });
    #[cfg(feature = "parallel")]
    group.bench_function("parallel", |b| {
        b.iter(|| black_box(entropy::par_feature_gains(black_box(&table)).unwrap()))
    });
    group.finish();
}

fn bench_reduct_scan(c: &mut Criterion) {
    let table = synth_table(20_000, 41, 4);
    let candidates: Vec<u16> = (2..=41).collect();
    let mut group = c.benchmark_group("reduct_candidate_scan");
    group.bench_function("serial", |b| {
        b.iter(|| {
            black_box(
                rough_set::candidate_positive_counts(black_box(&table), &[1], &candidates).unwrap(),
            )
        })
    });
    #[cfg(feature = "parallel")]
    group.bench_function("parallel", |b| {
        b.iter(|| {
            black_box(
                rough_set::par_candidate_positive_counts(black_box(&table), &[1], &candidates)
                    .unwrap(),
            )
        })
    });
    group.finish();
}

fn bench_smo_train(c: &mut Criterion) {
    let train = synth_instances(600, 5);
    let mask = FeatureMask::full();
    let cfg = TrainConfig {
        seed: 11,
        ..TrainConfig::for_feature_count(mask.len())
    };
    let mut group = c.benchmark_group("smo_train");
    group.sample_size(10);
    group.bench_function("default_path", |b| {
        b.iter(|| black_box(svm::train_instances(black_box(&train), &mask, &cfg).unwrap()))
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_predict_batch,
    bench_entropy_gains,
    bench_reduct_scan,
    bench_smo_train
);
criterion_main!(benches);
