//! Interaction tables: point samples versus the band-limited projection.

use tdhfb::grid::SpatialGrid;
use tdhfb::potential::{Discretization, InteractionPotential, PotentialTable, Profile};

fn main() -> tdhfb::Result<()> {
    let g = SpatialGrid::new(8.0, 128)?;
    for (profile, beta, n) in [(Profile::Gaussian, 0.5, 4.0), (Profile::Sech2, 0.5, 4.0), (Profile::Gaussian, 1.0, 64.0)] {
        let pot = InteractionPotential::new(profile.clone(), beta, n)?;
        let ppw = pot.points_per_width(&g);
        let sampled = PotentialTable::new(&pot, &g);
        let bl = PotentialTable::new(&pot.clone().with_discretization(Discretization::BandLimited), &g)?;
        println!("{profile:?} beta={beta} N={n}: {ppw:.1} points per width");
        match sampled {
            Ok(t) => println!("  sampled:      integral {:.6}, max |v| {:.4}", t.integral(), t.max_abs()),
            Err(e) => println!("  sampled:      rejected ({e})"),
        }
        println!("  band-limited: integral {:.6}, max |v| {:.4}, L^2 {:.4}", bl.integral(), bl.max_abs(), bl.lp_norm(2.0));
    }
    Ok(())
}
