//! Seeded Gaussian noise for synthetic data.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// `n` independent N(0, σ²) samples, reproducible for a given seed.
pub fn gaussian(n: usize, sigma: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = Normal::new(0.0, sigma.abs()).expect("finite sigma");
    (0..n).map(|_| dist.sample(&mut rng)).collect()
}

/// Adds N(0, σ²) noise to each value in place.
pub fn add_gaussian(values: &mut [f64], sigma: f64, seed: u64) {
    let noise = gaussian(values.len(), sigma, seed);
    for (v, e) in values.iter_mut().zip(noise) {
        *v += e;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproducible_and_seed_dependent() {
        assert_eq!(gaussian(10, 1.0, 7), gaussian(10, 1.0, 7));
        assert_ne!(gaussian(10, 1.0, 7), gaussian(10, 1.0, 8));
        assert!(gaussian(5, 0.0, 1).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn roughly_unit_variance() {
        let x = gaussian(20000, 2.0, 3);
        let var = x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64;
        assert!((var.sqrt() - 2.0).abs() < 0.05);
    }
}
