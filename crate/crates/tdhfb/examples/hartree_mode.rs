//! Hartree-only evolution: a rank-one density matrix stays rank one.

use tdhfb::grid::{Kernel, SpatialGrid};
use tdhfb::initial::gaussian_packet;
use tdhfb::integrator::{solve_hartree, StepConfig};
use tdhfb::potential::{Discretization, InteractionPotential, PotentialTable, Profile};

fn main() -> tdhfb::Result<()> {
    let g = SpatialGrid::new(8.0, 64)?;
    let pot = InteractionPotential::new(Profile::Gaussian, 0.5, 16.0)?.with_discretization(Discretization::BandLimited);
    let table = PotentialTable::new(&pot, &g)?;
    let phi = gaussian_packet(&g, 0.0, 1.0, 0.5);
    let mut cfg = StepConfig::new(2e-3, 0.5);
    cfg.snapshot_stride = 50;
    let h = solve_hartree(&Kernel::projector(&phi), &table, &cfg)?;
    for i in 0..h.times.len() {
        println!("t = {:.2}  trace {:.12}  hermiticity {:.1e}", h.times[i], h.trace[i], h.hermiticity[i]);
    }
    // for a pure state Tr Γ² = (Tr Γ)²
    let purity = h.final_gamma.l2_norm().powi(2);
    println!("Tr Γ² = {purity:.12}");
    Ok(())
}
