//! Bogoliubov kernels and the quasifree state they generate.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use tdhfb::bogoliubov::{compose, delta, sh, sh2k, PairExcitation};
use tdhfb::diagnostics::{energy, energy_from_k, particle_number};
use tdhfb::grid::{Kernel, SpatialGrid, Symmetry};
use tdhfb::initial::{gaussian_packet, quasifree};
use tdhfb::potential::{Discretization, InteractionPotential, PotentialTable, Profile};

fn main() -> tdhfb::Result<()> {
    let g = SpatialGrid::new(6.0, 64)?;
    let pot = InteractionPotential::new(Profile::Gaussian, 0.5, 8.0)?.with_discretization(Discretization::BandLimited);
    let table = Arc::new(PotentialTable::new(&pot, &g)?);

    let phi = gaussian_packet(&g, 0.0, 1.0, 0.3);
    let k = PairExcitation::rank_one(&phi, C64::new(0.4, 0.2));
    let s = sh(&k, 1e-15)?;
    let c = tdhfb::bogoliubov::ch(&k, 1e-15)?;
    let res = compose(&c, &c)?.values() - compose(&s.conj(), &s)?.values() - delta(&g).values();
    println!("ch∘ch − s̄∘s − δ: {:.2e}", Kernel::from_raw(&g, res, Symmetry::None).l2_norm());
    let (direct, product) = sh2k(&k, 1e-15)?;
    let d = Kernel::from_raw(&g, direct.values() - product.values(), Symmetry::None).l2_norm();
    println!("sh(2k) − 2 sh∘ch: {d:.2e}");

    let state = quasifree(&phi, &k, table.clone(), 1e-15)?;
    let e = energy(&state)?;
    println!("particle number {:.6}", particle_number(&state)?);
    println!("energy {:.8} (from k directly {:.8})", e.total, energy_from_k(&phi, &k, &table, 1e-15)?);
    Ok(())
}
