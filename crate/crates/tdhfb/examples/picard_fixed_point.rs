//! Duhamel fixed-point iteration and its contraction factors.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use tdhfb::bogoliubov::PairExcitation;
use tdhfb::grid::SpatialGrid;
use tdhfb::initial::{gaussian_packet, quasifree};
use tdhfb::integrator::picard_solve;
use tdhfb::potential::{Discretization, InteractionPotential, PotentialTable, Profile};

fn main() -> tdhfb::Result<()> {
    let g = SpatialGrid::new(8.0, 64)?;
    let pot = InteractionPotential::new(Profile::Gaussian, 0.5, 16.0)?.with_discretization(Discretization::BandLimited);
    let table = Arc::new(PotentialTable::new(&pot, &g)?);
    let phi = gaussian_packet(&g, 0.0, 1.0, 0.0);
    let s0 = quasifree(&phi, &PairExcitation::rank_one(&phi, C64::from(0.3)), table, 1e-15)?;

    let r = picard_solve(&s0, 0.1, 8, 21)?;
    for (i, d) in r.differences.iter().enumerate() {
        let ratio = if i > 0 { d / r.differences[i - 1] } else { f64::NAN };
        println!("iteration {:>2}: difference {d:.3e}, ratio {ratio:.3}", i + 1);
    }
    println!("final time {}", r.trajectory.final_state.t);
    Ok(())
}
