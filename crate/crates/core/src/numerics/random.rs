//! Seeded randomness.
//!
//! All draws come from ChaCha8, a counter-based generator. A `(seed, stream)` pair
//! selects an independent keystream; [`rng_for`] is the only constructor used in the
//! crate. Independent objects (samples, restarts, bases within a sample) get their
//! own seed through [`derive_seed`], a SplitMix64 finalizer over `seed` and the
//! object index, so any single object can be regenerated without replaying the
//! ones before it. Stream numbers above 0 are reserved for resampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{c64, unitarity_deviation, CMatrix};

pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Child seed for object `index` under `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed
        .wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `d x d` complex matrix with real and imaginary parts i.i.d. uniform on `[0, 1)`.
pub fn ginibre_uniform(d: usize, seed: u64) -> CMatrix {
    ginibre_from(&mut rng_for(seed, 0), d)
}

pub(crate) fn ginibre_from<R: Rng>(rng: &mut R, d: usize) -> CMatrix {
    // filled row by row
    let mut m = CMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            let re = rng.gen::<f64>();
            let im = rng.gen::<f64>();
            m[(i, j)] = c64(re, im);
        }
    }
    m
}

/// Unitary whose columns are the left singular vectors of a [`ginibre_uniform`] draw.
///
/// A draw whose `U` factor misses unitarity by more than `1e-10` is discarded and
/// redrawn from the next stream of the same seed.
pub fn random_unitary(d: usize, seed: u64) -> CMatrix {
    let mut stream = 0u64;
    loop {
        let a = ginibre_from(&mut rng_for(seed, stream), d);
        if let Some(u) = a.svd(true, false).u {
            if unitarity_deviation(&u) <= 1e-10 {
                return u;
            }
        }
        log::warn!("random_unitary: degenerate draw (seed {seed}, stream {stream}), resampling");
        stream += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_by_one_in_unit_square() {
        let m = ginibre_uniform(1, 17);
        assert!((0.0..1.0).contains(&m[(0, 0)].re));
        assert!((0.0..1.0).contains(&m[(0, 0)].im));
    }

    #[test]
    fn ginibre_is_deterministic() {
        assert_eq!(ginibre_uniform(6, 5), ginibre_uniform(6, 5));
        assert_ne!(ginibre_uniform(6, 5), ginibre_uniform(6, 6));
    }

    #[test]
    fn ginibre_mean_converges() {
        let mut rng = rng_for(123, 0);
        let mut sum = c64(0.0, 0.0);
        let count = 100_000;
        for _ in 0..count {
            sum += ginibre_from(&mut rng, 1)[(0, 0)];
        }
        let mean = sum / count as f64;
        assert!((mean.re - 0.5).abs() < 0.01);
        assert!((mean.im - 0.5).abs() < 0.01);
    }

    #[test]
    fn unitaries_are_unitary_and_stable() {
        for d in 1..=16 {
            for seed in 0..100 {
                let u = random_unitary(d, seed);
                assert!(unitarity_deviation(&u) <= 1e-10, "d={d} seed={seed}");
            }
        }
        assert_eq!(random_unitary(5, 42), random_unitary(5, 42));
    }

    #[test]
    fn qubit_overlap_statistics() {
        // Average |<0|u_0>|^2 over draws: each column is a unit vector in C^2.
        let draws = 10_000;
        let mut acc = 0.0;
        for seed in 0..draws {
            let u = random_unitary(2, seed);
            acc += u[(0, 0)].norm_sqr();
        }
        let mean = acc / draws as f64;
        assert!((mean - 0.5).abs() < 0.02, "mean overlap {mean}");
    }

    #[test]
    fn derived_seeds_differ() {
        let a: Vec<u64> = (0..100).map(|i| derive_seed(7, i)).collect();
        let mut b = a.clone();
        b.sort();
        b.dedup();
        assert_eq!(b.len(), 100);
    }
}
