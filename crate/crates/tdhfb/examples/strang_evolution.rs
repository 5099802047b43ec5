//! Time stepping the coupled system and watching the conserved quantities.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use tdhfb::bogoliubov::PairExcitation;
use tdhfb::grid::SpatialGrid;
use tdhfb::initial::{gaussian_packet, quasifree};
use tdhfb::integrator::{evolve, StepConfig};
use tdhfb::potential::{Discretization, InteractionPotential, PotentialTable, Profile};

fn main() -> tdhfb::Result<()> {
    let g = SpatialGrid::new(8.0, 64)?;
    let pot = InteractionPotential::new(Profile::Gaussian, 0.5, 16.0)?.with_discretization(Discretization::BandLimited);
    let table = Arc::new(PotentialTable::new(&pot, &g)?);
    let phi = gaussian_packet(&g, -1.0, 1.0, 1.0);
    let s0 = quasifree(&phi, &PairExcitation::rank_one(&phi, C64::from(0.3)), table, 1e-15)?;

    for dt in [4e-3, 2e-3] {
        let mut cfg = StepConfig::new(dt, 0.5);
        cfg.snapshot_stride = 25;
        cfg.record_states = false;
        let tr = evolve(&s0, &cfg)?;
        println!(
            "dt = {dt:e}: N drift {:.2e}, E drift {:.2e}, symmetry drift {:.2e}",
            tr.series.number_drift(),
            tr.series.energy_drift(),
            tr.max_symmetry_drift
        );
        for (t, e) in tr.series.times.iter().zip(&tr.series.energy) {
            println!("  t = {t:.3}  E = {e:.10}");
        }
    }
    Ok(())
}
