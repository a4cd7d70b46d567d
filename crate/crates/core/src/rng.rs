//! Seeded random sources. Every randomized routine takes an explicit seed so
//! runs are reproducible bit for bit.

use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::C64;

pub type Rand = ChaCha8Rng;

/// Independent stream for `(seed, stream)`; used to give each multistart its own
/// generator regardless of execution order.
pub fn seeded(seed: u64, stream: u64) -> Rand {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn uniform(rng: &mut Rand) -> f64 {
    rng.random::<f64>()
}

/// Standard normal via Box–Muller.
pub fn normal(rng: &mut Rand) -> f64 {
    let u1 = 1.0 - rng.random::<f64>();
    let u2 = rng.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

pub fn complex_normal(rng: &mut Rand) -> C64 {
    C64::new(normal(rng), normal(rng)) * core::f64::consts::FRAC_1_SQRT_2
}
