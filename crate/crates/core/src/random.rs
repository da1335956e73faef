//! Seeded random streams and the basic samplers built on them.
//!
//! A [`Seed`] is a plain 64-bit value. Independent streams for a given purpose
//! are obtained with [`Seed::derive`], which mixes a path of integers into the
//! seed, so that e.g. trial 7 of grid cell (2, 3) always sees the same numbers
//! no matter in which order cells are executed.

use nalgebra::DVector;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Seed(pub u64);

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl Seed {
    /// Child seed for the given derivation path. Distinct paths give
    /// statistically independent streams.
    pub fn derive(self, path: &[u64]) -> Seed {
        let mut h = splitmix64(self.0);
        for &p in path {
            h = splitmix64(h ^ splitmix64(p.wrapping_add(0x632B_E59B_D9B4_E019)));
        }
        Seed(h)
    }

    pub fn stream(self) -> SeedStream {
        SeedStream(ChaCha8Rng::seed_from_u64(self.0))
    }
}

impl From<u64> for Seed {
    fn from(v: u64) -> Self {
        Seed(v)
    }
}

/// Deterministic random stream. Owned by exactly one worker at a time.
#[derive(Debug, Clone)]
pub struct SeedStream(ChaCha8Rng);

impl SeedStream {
    pub fn new(seed: Seed) -> Self {
        seed.stream()
    }

    /// Draws a fresh seed from this stream, e.g. to fan out parallel work.
    pub fn fork(&mut self) -> Seed {
        Seed(self.0.next_u64())
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.0.sample(StandardNormal)
    }
}

impl RngCore for SeedStream {
    fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.0.fill_bytes(dst)
    }
}

/// `dim` i.i.d. draws from N(0, variance).
pub fn sample_gaussian_vector(dim: usize, variance: f64, stream: &mut SeedStream) -> DVector<f64> {
    assert!(dim >= 1, "dim must be positive");
    assert!(variance > 0.0, "variance must be positive");
    let sd = variance.sqrt();
    DVector::from_fn(dim, |_, _| sd * stream.standard_normal())
}

/// Uniform draw from the unit sphere in R^dim (normalized Gaussian).
pub fn sample_unit_sphere(dim: usize, stream: &mut SeedStream) -> DVector<f64> {
    loop {
        let v = sample_gaussian_vector(dim, 1.0, stream);
        let norm = v.norm();
        if norm > 1e-300 {
            return v / norm;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_norm_squared_has_unit_mean() {
        let d = 7;
        let mut s = Seed(11).stream();
        let mean: f64 = (0..10_000)
            .map(|_| sample_gaussian_vector(d, 1.0 / d as f64, &mut s).norm_squared())
            .sum::<f64>()
            / 10_000.0;
        assert!((mean - 1.0).abs() < 0.05, "mean {mean}");
    }

    #[test]
    fn scalar_gaussian_has_unit_variance() {
        let mut s = Seed(12).stream();
        let xs: Vec<f64> = (0..10_000)
            .map(|_| sample_gaussian_vector(1, 1.0, &mut s)[0])
            .collect();
        let mu = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
        assert!((var - 1.0).abs() < 0.05, "var {var}");
    }

    #[test]
    fn fresh_streams_repeat() {
        let a = sample_gaussian_vector(5, 0.3, &mut Seed(5).stream());
        let b = sample_gaussian_vector(5, 0.3, &mut Seed(5).stream());
        assert_eq!(a, b);
        let c = sample_gaussian_vector(5, 0.3, &mut Seed(6).stream());
        assert_ne!(a, c);
    }

    #[test]
    fn sphere_draws_are_unit_and_symmetric() {
        let mut s = Seed(3).stream();
        let mut positive = 0usize;
        let mut mean = DVector::zeros(2);
        for _ in 0..10_000 {
            let v = sample_unit_sphere(2, &mut s);
            assert!((v.norm() - 1.0).abs() < 1e-12);
            if v[0] > 0.0 {
                positive += 1;
            }
            mean += v;
        }
        mean /= 10_000.0;
        assert!((positive as f64 / 10_000.0 - 0.5).abs() < 0.02);
        assert!(mean.norm() <= 0.05);
    }

    #[test]
    fn derived_seeds_differ_by_path() {
        let s = Seed(42);
        assert_ne!(s.derive(&[0, 1]), s.derive(&[1, 0]));
        assert_ne!(s.derive(&[0]), s.derive(&[0, 0]));
        assert_eq!(s.derive(&[3, 4]), s.derive(&[3, 4]));
    }
}
