//! Input generators shared by the benchmarks.

use gaudin_rsk::combinatorics::{NatMatrix, Permutation};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `count` random `r x n` matrices with entries `<= max_entry`.
pub fn random_matrices(r: usize, n: usize, max_entry: u32, count: usize, seed: u64) -> Vec<NatMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let rows: Vec<Vec<u32>> = (0..r).map(|_| (0..n).map(|_| rng.random_range(0..=max_entry)).collect()).collect();
            NatMatrix::from_rows(&rows).expect("rectangular")
        })
        .collect()
}

/// `count` random permutations of `1..=n`.
pub fn random_permutations(n: usize, count: usize, seed: u64) -> Vec<Permutation> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut v: Vec<usize> = (1..=n).collect();
            v.shuffle(&mut rng);
            Permutation::new(v).expect("permutation")
        })
        .collect()
}

/// Increasing points used for flows.
pub fn flow_points(len: usize, shift: f64) -> Vec<f64> {
    (0..len).map(|i| 1.0 + i as f64 + 0.37 * (i * i) as f64 + shift).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_seeded() {
        assert_eq!(random_matrices(3, 4, 2, 5, 7), random_matrices(3, 4, 2, 5, 7));
        assert!(random_permutations(6, 5, 1).iter().all(|w| w.len() == 6));
        assert!(flow_points(4, 0.0).windows(2).all(|w| w[0] < w[1]));
    }
}
