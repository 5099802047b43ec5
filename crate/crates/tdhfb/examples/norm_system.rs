//! Space-time norms of a trajectory, component by component.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use tdhfb::bogoliubov::PairExcitation;
use tdhfb::diagnostics::{norm_nt, sigma_for_beta, NORM_COMPONENTS};
use tdhfb::grid::SpatialGrid;
use tdhfb::initial::{gaussian_packet, quasifree};
use tdhfb::integrator::{evolve, StepConfig};
use tdhfb::potential::{Discretization, InteractionPotential, PotentialTable, Profile};

fn main() -> tdhfb::Result<()> {
    let beta = 0.5;
    let g = SpatialGrid::new(8.0, 64)?;
    let pot = InteractionPotential::new(Profile::Gaussian, beta, 16.0)?.with_discretization(Discretization::BandLimited);
    let table = Arc::new(PotentialTable::new(&pot, &g)?);
    let phi = gaussian_packet(&g, 0.0, 1.0, 0.0);
    let s0 = quasifree(&phi, &PairExcitation::rank_one(&phi, C64::from(0.3)), table, 1e-15)?;

    let mut cfg = StepConfig::new(4e-3, 0.25);
    cfg.snapshot_stride = 2;
    let tr = evolve(&s0, &cfg)?;
    let p = sigma_for_beta(beta, 0.1)?;
    println!("epsilon {} sigma {:.4}", p.epsilon, p.sigma);
    let norms = norm_nt(&tr, &p)?;
    for name in NORM_COMPONENTS {
        println!("{name:>24} {:.6e}", norms.get(name));
    }
    Ok(())
}
