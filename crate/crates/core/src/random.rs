//! Seeded generators for random states and channels, used by the property
//! suites and the additivity probe.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::channels::{CqChannel, WiretapChannel};
use crate::linalg::{DensityMatrix, HermitianMatrix, C64};

/// `rows × cols` matrix of i.i.d. standard complex Gaussians, row-major.
pub fn gaussian_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> Vec<C64> {
    (0..rows * cols)
        .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect()
}

/// `A A†` for a `dim × k` matrix `A` stored row-major.
pub(crate) fn gram(a: &[C64], dim: usize, k: usize) -> HermitianMatrix {
    let mut data = vec![C64::new(0.0, 0.0); dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            data[i * dim + j] = (0..k).map(|l| a[i * k + l] * a[j * k + l].conj()).sum();
        }
    }
    HermitianMatrix::from_raw(dim, data).hermitize()
}

/// Random state of the given rank (induced Ginibre measure).
pub fn random_density_matrix(rng: &mut impl Rng, dim: usize, rank: usize) -> DensityMatrix {
    let rank = rank.clamp(1, dim);
    let g = gram(&gaussian_matrix(rng, dim, rank), dim, rank);
    let tr = g.trace();
    DensityMatrix::from_hermitian_unchecked(g.scaled(1.0 / tr))
}

/// Random cq channel with outputs of random rank.
pub fn random_cq_channel(rng: &mut impl Rng, inputs: usize, dim: usize) -> CqChannel {
    let outputs = (0..inputs)
        .map(|_| {
            let rank = rng.random_range(1..=dim);
            random_density_matrix(rng, dim, rank)
        })
        .collect();
    CqChannel::new(outputs).expect("outputs share one dimension")
}

/// Random binary-input wiretap channel with qubit or qutrit reductions.
pub fn random_binary_wiretap(rng: &mut impl Rng) -> WiretapChannel {
    let db = rng.random_range(2..=3);
    let dc = rng.random_range(2..=3);
    let bob = random_cq_channel(rng, 2, db);
    let charlie = random_cq_channel(rng, 2, dc);
    WiretapChannel::new(bob, charlie).expect("both reductions take two letters")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::hermitian_eigenvalues;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_states_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for dim in 1..6 {
            for rank in 1..=dim {
                let rho = random_density_matrix(&mut rng, dim, rank);
                let again = DensityMatrix::new(rho.as_hermitian().clone()).unwrap();
                let ev = hermitian_eigenvalues(again.as_hermitian());
                let nonzero = ev.iter().filter(|&&v| v > 1e-10).count();
                assert_eq!(nonzero, rank);
            }
        }
    }

    #[test]
    fn generators_are_deterministic() {
        let a = random_binary_wiretap(&mut ChaCha8Rng::seed_from_u64(1));
        let b = random_binary_wiretap(&mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(a, b);
    }
}
