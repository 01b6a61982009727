#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spraylab::jets::{SampleBox, Sampler, TangentSample};
use spraylab::oneform::OneFormCoefficients;

/// `count` coefficient sets with `C = AA^T + I/2` positive definite, small
/// `c'` and `c` large enough that the metric is defined on every fiber.
pub fn random_coefficients(n: usize, count: usize, seed: u64) -> Vec<OneFormCoefficients> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let a: Vec<f64> = (0..n * n).map(|_| rng.random_range(-0.6..0.6)).collect();
            let mut c = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..n {
                    c[i * n + j] = (0..n).map(|k| a[i * n + k] * a[j * n + k]).sum::<f64>()
                        + if i == j { 0.5 } else { 0.0 };
                }
            }
            let cv: Vec<f64> = (0..n).map(|_| rng.random_range(-0.3..0.3)).collect();
            let c0 = rng.random_range(0.8..1.5);
            OneFormCoefficients::new(&c, &cv, c0).unwrap()
        })
        .collect()
}

pub fn samples_where(
    n: usize,
    count: usize,
    seed: u64,
    accept: impl FnMut(&TangentSample) -> bool,
) -> Vec<TangentSample> {
    let mut s = Sampler::new(SampleBox::cube(n, 0.5), seed);
    let set = s.draw_valid(count, accept);
    assert!(
        set.samples.len() == count,
        "only {} of {count} samples accepted",
        set.samples.len()
    );
    set.samples
}

pub fn sample(x: &[f64], y: &[f64]) -> TangentSample {
    TangentSample::new(x.to_vec(), y.to_vec()).unwrap()
}
