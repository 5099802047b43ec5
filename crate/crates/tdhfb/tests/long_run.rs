//! Longer evolution on a small resolved grid.

mod common;

use num_complex::Complex64 as C64;

use common::*;
use tdhfb::bogoliubov::PairExcitation;
use tdhfb::initial::{gaussian_packet, quasifree};
use tdhfb::integrator::{evolve, StepConfig};

#[test]
fn five_time_units_conserve_number_and_energy() {
    let r = resolved(64);
    let g = r.grid().clone();
    let phi = gaussian_packet(&g, 0.0, 1.0, 0.5);
    let k = PairExcitation::rank_one(&gaussian_packet(&g, 0.0, 1.2, 0.0), C64::new(0.2, 0.1));
    let s0 = quasifree(&phi, &k, r.table.clone(), 1e-15).unwrap();
    let mut cfg = StepConfig::new(2e-3, 5.0);
    cfg.snapshot_stride = 50;
    cfg.record_states = false;
    let tr = evolve(&s0, &cfg).unwrap();
    assert!((tr.final_state.t - 5.0).abs() < 1e-12);
    assert_eq!(tr.series.len(), 51);
    assert!(tr.series.number_drift() < 1e-10, "N drift {:e}", tr.series.number_drift());
    assert!(tr.series.energy_drift() < 1e-6, "E drift {:e}", tr.series.energy_drift());
    assert!(tr.max_symmetry_drift < 1e-10);
}
