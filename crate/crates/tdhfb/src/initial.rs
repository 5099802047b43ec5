//! Initial data: closed-form wave packets, rank-one pair excitations and
//! seeded random ensembles for the estimate verifiers.

use std::ops::Range;
use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::bogoliubov::{quasifree_state, PairExcitation};
use crate::dynamics::SystemState;
use crate::error::Result;
use crate::grid::{Field, Kernel, SpatialGrid, Symmetry};
use crate::potential::PotentialTable;

/// `e^{-(x-c)²/(2w²)} e^{ipx}`, normalized to unit L² norm.
pub fn gaussian_packet(grid: &SpatialGrid, center: f64, width: f64, momentum: f64) -> Field {
    let f = Field::from_fn(grid, |x| {
        let u = (x - center) / width;
        C64::from_polar((-0.5 * u * u).exp(), momentum * x)
    });
    let n = f.l2_norm();
    f.scaled(C64::from(1.0 / n))
}

/// Quasifree state from a condensate `φ` and the pair excitation `k`.
pub fn quasifree(
    phi: &Field,
    k: &PairExcitation,
    table: Arc<PotentialTable>,
    tol: f64,
) -> Result<SystemState> {
    let (gamma, lambda) = quasifree_state(phi, k, table.n(), tol)?;
    SystemState::new(0.0, phi.clone(), gamma, lambda, table)
}

/// Parameter ranges for random wave packets.
#[derive(Clone, Debug, PartialEq)]
pub struct PacketRanges {
    pub center: Range<f64>,
    pub width: Range<f64>,
    pub momentum: Range<f64>,
}

impl Default for PacketRanges {
    fn default() -> Self {
        PacketRanges {
            center: -2.0..2.0,
            width: 0.8..1.6,
            momentum: -1.0..1.0,
        }
    }
}

pub fn random_packet<R: Rng>(rng: &mut R, grid: &SpatialGrid, r: &PacketRanges) -> Field {
    let c = rng.random_range(r.center.clone());
    let w = rng.random_range(r.width.clone());
    let p = rng.random_range(r.momentum.clone());
    gaussian_packet(grid, c, w, p)
}

fn gauss_c<R: Rng>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Hermitian positive kernel `Σ_i λ_i f_i ⊗ f̄_i` with random packets `f_i`.
pub fn random_gamma<R: Rng>(rng: &mut R, grid: &SpatialGrid, rank: usize, r: &PacketRanges) -> Kernel {
    let m = grid.points();
    let mut a = Array2::<C64>::zeros((m, m));
    for _ in 0..rank {
        let lam: f64 = rng.random_range(0.1..1.0);
        let f = random_packet(rng, grid, r);
        let v = f.values();
        for ((j, l), e) in a.indexed_iter_mut() {
            *e += lam * v[j] * v[l].conj();
        }
    }
    Kernel::from_raw(grid, a, Symmetry::Hermitian)
}

/// Symmetric kernel `Σ_{ij} c_ij f_i ⊗ f_j` with `c` symmetric complex Gaussian.
pub fn random_lambda<R: Rng>(rng: &mut R, grid: &SpatialGrid, rank: usize, r: &PacketRanges) -> Kernel {
    let m = grid.points();
    let fs: Vec<Field> = (0..rank).map(|_| random_packet(rng, grid, r)).collect();
    let mut a = Array2::<C64>::zeros((m, m));
    for i in 0..rank {
        for j in i..rank {
            let c = gauss_c(rng) * if i == j { 1.0 } else { 0.5 };
            let (u, v) = (fs[i].values(), fs[j].values());
            for ((x, y), e) in a.indexed_iter_mut() {
                *e += c * (u[x] * v[y] + v[x] * u[y]);
            }
        }
    }
    Kernel::from_raw(grid, a, Symmetry::Symmetric)
}

/// Random symmetric smooth `k` rescaled to L² norm `norm`.
pub fn random_pair_excitation<R: Rng>(rng: &mut R, grid: &SpatialGrid, rank: usize, norm: f64) -> PairExcitation {
    let mut k = random_lambda(rng, grid, rank, &PacketRanges::default());
    let s = norm / k.l2_norm();
    k.values_mut().mapv_inplace(|v| v * s);
    k.symmetrize();
    PairExcitation::new(k).expect("symmetric by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn packets_are_normalized() {
        let g = SpatialGrid::new(8.0, 128).unwrap();
        let f = gaussian_packet(&g, 0.5, 1.2, 0.7);
        assert!((f.l2_norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn random_kernels_have_their_classes() {
        let g = SpatialGrid::new(8.0, 64).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r = PacketRanges::default();
        assert!(random_gamma(&mut rng, &g, 3, &r).hermiticity_residual() < 1e-15);
        assert!(random_lambda(&mut rng, &g, 3, &r).symmetry_residual() < 1e-15);
        let k = random_pair_excitation(&mut rng, &g, 2, 0.4);
        assert!((k.kernel().l2_norm() - 0.4).abs() < 1e-12);
    }

    #[test]
    fn ensembles_are_reproducible() {
        let g = SpatialGrid::new(8.0, 32).unwrap();
        let r = PacketRanges::default();
        let a = random_gamma(&mut ChaCha8Rng::seed_from_u64(11), &g, 2, &r);
        let b = random_gamma(&mut ChaCha8Rng::seed_from_u64(11), &g, 2, &r);
        assert_eq!(a.values(), b.values());
    }
}
