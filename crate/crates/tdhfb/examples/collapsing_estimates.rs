//! Collapsing-estimate ratios over a small random ensemble.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tdhfb::diagnostics::{collapsing_ratio_gamma, collapsing_ratio_lambda};
use tdhfb::grid::SpatialGrid;
use tdhfb::initial::{random_gamma, random_lambda, PacketRanges};

fn main() -> tdhfb::Result<()> {
    let g = SpatialGrid::new(24.0, 128)?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let ranges = PacketRanges::default();
    let (window, samples) = (2.0, 129);
    println!("member  gamma  lambda_quarter  lambda_l4l2");
    for i in 0..8 {
        let gamma0 = random_gamma(&mut rng, &g, 2, &ranges);
        let lambda0 = random_lambda(&mut rng, &g, 2, &ranges);
        let rg = collapsing_ratio_gamma(&gamma0, window, samples)?;
        let (lq, l4) = collapsing_ratio_lambda(&lambda0, window, samples)?;
        println!("{i:>6}  {rg:.4}  {lq:.4}  {l4:.4}");
    }
    Ok(())
}
