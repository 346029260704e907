#![allow(dead_code)]

use expcap::grid::{Shape, WeightedGrid};
use expcap::kernels::KernelSet;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn kernels(shape: Shape, n: usize) -> KernelSet {
    KernelSet::assemble(WeightedGrid::build(shape, n).unwrap()).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent exponential pair, written from the closed forms.
pub fn big_p(t: f64) -> f64 {
    t.abs().exp_m1() - t.abs()
}

pub fn big_pstar(t: f64) -> f64 {
    let a = t.abs();
    (a + 1.0) * a.ln_1p() - a
}

/// Plain bisection for `Σ N(v/k) w = 1`.
pub fn luxemburg_oracle(values: &[f64], weights: &[f64], n: impl Fn(f64) -> f64) -> f64 {
    let m = |k: f64| values.iter().zip(weights).map(|(v, w)| n(v / k) * w).sum::<f64>();
    let (mut lo, mut hi) = (1e-9, 1.0);
    while m(hi) > 1.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if m(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}
