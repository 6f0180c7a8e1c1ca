//! Seeded random inputs for the randomized checks.
//!
//! Each trial draws from its own ChaCha stream keyed by `(seed, trial)`, so a
//! run is reproducible trial by trial no matter how trials are scheduled.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::carnot::{FreePoint, GroupPoint};
use crate::combinatorics::binomial;
use crate::exterior::KForm;
use crate::rational::frac;
use crate::Rational;

pub const DEFAULT_SEED: u64 = 0x5eed_2024;

pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// A small rational `p/q` with `|p| <= 6`, `1 <= q <= 4`.
pub fn rational<R: Rng>(rng: &mut R) -> Rational {
    frac(rng.gen_range(-6..=6), rng.gen_range(1..=4))
}

/// A small nonzero rational.
pub fn nonzero_rational<R: Rng>(rng: &mut R) -> Rational {
    loop {
        let v = rational(rng);
        if v != frac(0, 1) {
            return v;
        }
    }
}

pub fn vector<R: Rng>(rng: &mut R, len: usize) -> Vec<Rational> {
    (0..len).map(|_| rational(rng)).collect()
}

pub fn nonzero_vector<R: Rng>(rng: &mut R, len: usize) -> Vec<Rational> {
    loop {
        let v = vector(rng, len);
        if v.iter().any(|x| *x != frac(0, 1)) {
            return v;
        }
    }
}

pub fn kform<R: Rng>(rng: &mut R, n: usize, k: usize) -> KForm {
    KForm::from_coords(n, k, &vector(rng, binomial(n, k))).expect("coordinate count matches")
}

pub fn free_point<R: Rng>(rng: &mut R, n: usize) -> FreePoint {
    FreePoint::new(kform(rng, n, 1), kform(rng, n, 2)).expect("grades are 1 and 2")
}

pub fn group_point<R: Rng>(rng: &mut R, r: usize, m: usize) -> GroupPoint {
    GroupPoint::new(vector(rng, r), vector(rng, m))
}
