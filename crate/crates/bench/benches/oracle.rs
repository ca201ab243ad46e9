use criterion::{criterion_group, criterion_main, Criterion};
use sos_core::oracle::{
    enumerate_partition_function, verify_marginalization, verify_spike_identity,
};
use sos_core::{CappedSpace, Parameters};

fn enumeration(c: &mut Criterion) {
    let params = Parameters::critical(1.0, 3).unwrap();
    let space = CappedSpace::new(3, 2).unwrap();
    c.bench_function("partition_function_n3_cap2", |b| {
        b.iter(|| enumerate_partition_function(&space, &params).unwrap())
    });
    c.bench_function("marginalization_n2_cap2_depth1", |b| {
        b.iter(|| verify_marginalization(2, 2, 1, 1.0).unwrap())
    });
}

fn spike(c: &mut Criterion) {
    c.bench_function("spike_identity_grid", |b| {
        b.iter(|| {
            let mut worst = 0.0f64;
            for i in 0..6u32.pow(4) {
                let x = [i % 6, (i / 6) % 6, (i / 36) % 6, i / 216];
                worst = worst.max(verify_spike_identity(x, 1.0).relative_error());
            }
            worst
        })
    });
}

criterion_group!(benches, enumeration, spike);
criterion_main!(benches);
