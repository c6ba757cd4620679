use criterion::{criterion_group, criterion_main, Criterion};
use curl_lab_core::net::{
    sample_inputs, sample_teacher, Activation, Architecture, Dataset, SignPattern, INPUT_STD,
};

fn bench_forward(c: &mut Criterion) {
    let arch = Architecture::new(100, 10, Activation::Linear).unwrap();
    let net = sample_teacher(&arch, 1.0, 1);
    let inputs = sample_inputs(100, 250, INPUT_STD, 2);
    c.bench_function("forward_batch_100x10_p250", |b| {
        b.iter(|| curl_lab_core::net::forward_batch(&net, &inputs, Activation::Linear).unwrap())
    });
}

fn bench_curl_step(c: &mut Criterion) {
    let arch = Architecture::new(100, 10, Activation::Tanh).unwrap();
    let teacher = sample_teacher(&arch, 1.0, 1);
    let net = sample_teacher(&arch, 2.0, 2);
    let data = Dataset::from_teacher(
        &teacher,
        sample_inputs(100, 2000, INPUT_STD, 3),
        Activation::Tanh,
    )
    .unwrap();
    let signs = SignPattern::single_readout_flip(100, 10, 0);
    c.bench_function("curl_step_tanh_100x10_p2000", |b| {
        b.iter(|| curl_lab_core::dynamics::curl_step(&net, &data, Activation::Tanh, &signs).unwrap())
    });
}

fn bench_manifold_spectrum(c: &mut Criterion) {
    let arch = Architecture::new(200, 100, Activation::Linear).unwrap();
    let net = sample_teacher(&arch, 1.0, 5);
    let signs = SignPattern::with_fractions(200, 100, 0.5, 0.0, 6);
    c.bench_function("manifold_spectrum_closed_200x100", |b| {
        b.iter(|| {
            curl_lab_core::stability::manifold_spectrum_closed(&net.w1, &net.w2, &signs, None)
                .unwrap()
        })
    });
}

fn bench_spectral_edges(c: &mut Criterion) {
    c.bench_function("spectral_edges_c05_alpha05", |b| {
        b.iter(|| curl_lab_core::rmt::spectral_edges(0.5, 0.5).unwrap())
    });
}

criterion_group!(
    benches,
    bench_forward,
    bench_curl_step,
    bench_manifold_spectrum,
    bench_spectral_edges
);
criterion_main!(benches);
