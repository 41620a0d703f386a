use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use surya_core::data::{gen_synthetic, one_hot, FRAME_DIM, WINDOW_LEN};
use surya_core::nn::{init_params, Network};
use surya_core::train::{adam_step, train_network, AdamConfig, AdamState, TrainConfig};

fn window() -> Vec<f32> {
    (0..WINDOW_LEN * FRAME_DIM).map(|i| ((i * 7919) % 1000) as f32 / 1000.0).collect()
}

fn forward(c: &mut Criterion) {
    let net = init_params(42);
    let x = window();
    c.bench_function("forward/canonical", |b| b.iter(|| net.forward(black_box(&x)).unwrap()));
}

fn backward(c: &mut Criterion) {
    let net = init_params(42);
    let x = window();
    let y = one_hot(3, 8).unwrap();
    c.bench_function("loss_and_gradients/canonical", |b| {
        b.iter(|| net.loss_and_gradients(black_box(&x), black_box(&y)).unwrap())
    });
}

fn optimizer(c: &mut Criterion) {
    let net = init_params(42);
    let (_, _, grads) = net.loss_and_gradients(&window(), &one_hot(3, 8).unwrap()).unwrap();
    let config = AdamConfig::default();
    c.bench_function("adam_step/canonical", |b| {
        b.iter_batched(
            || (net.clone(), AdamState::new(&net)),
            |(mut n, mut s): (Network<f32>, _)| adam_step(&mut n, &grads, &mut s, &config).unwrap(),
            BatchSize::LargeInput,
        )
    });
}

fn train_batch(c: &mut Criterion) {
    // One epoch over 32 sequences is exactly one mini-batch.
    let data = gen_synthetic(4, 0.1, 1).unwrap();
    let config = TrainConfig { epochs: 1, ..TrainConfig::default() };
    let mut group = c.benchmark_group("train");
    group.sample_size(10);
    group.bench_function("batch_of_32", |b| {
        b.iter_batched(
            || init_params(42),
            |net| train_network(net, &data, None, &config).unwrap(),
            BatchSize::LargeInput,
        )
    });
    group.finish();
}

criterion_group!(benches, forward, backward, optimizer, train_batch);
criterion_main!(benches);
