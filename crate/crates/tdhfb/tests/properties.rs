//! Invariants checked over generated inputs.

mod common;

use num_complex::Complex64 as C64;
use proptest::prelude::*;

use common::*;
use tdhfb::bogoliubov::{ch, compose, delta, sh};
use tdhfb::diagnostics::{collapsing_ratio_gamma, collapsing_ratio_lambda, energy, norm_nt_samples, particle_number, sigma_for_beta, NORM_COMPONENTS};
use tdhfb::dynamics::{rhs_gamma, rhs_lambda, rhs_phi, SystemState};
use tdhfb::grid::{fft1, ifft1, Field, Kernel, SpatialGrid, Symmetry};
use tdhfb::initial::{quasifree, random_gamma, random_lambda, random_packet, random_pair_excitation, PacketRanges};
use tdhfb::integrator::{evolve, free_gamma, free_lambda, free_phi, StepConfig};
use tdhfb::snapshot::Snapshot;

fn grid() -> SpatialGrid {
    SpatialGrid::new(6.0, 32).unwrap()
}

fn diff_norm(a: &Kernel, b: &Kernel) -> f64 {
    Kernel::from_raw(a.grid(), a.values() - b.values(), Symmetry::None).l2_norm()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn fft_round_trip(seed in any::<u64>()) {
        let g = grid();
        let f = random_packet(&mut rng(seed), &g, &PacketRanges::default());
        let back = ifft1(&fft1(&f));
        prop_assert!(rel_max(back.values().iter(), f.values().iter()) < 1e-13);
    }

    #[test]
    fn hyperbolic_identity(seed in any::<u64>(), norm in 0.01f64..1.5) {
        let g = grid();
        let k = random_pair_excitation(&mut rng(seed), &g, 3, norm);
        let s = sh(&k, 1e-15).unwrap();
        let c = ch(&k, 1e-15).unwrap();
        // ch∘ch − s̄∘s = δ; the δ·δ part carries 1/dx so compare the residual to it
        let lhs = Kernel::from_raw(&g, compose(&c, &c).unwrap().values() - compose(&s.conj(), &s).unwrap().values(), Symmetry::None);
        let d = delta(&g);
        prop_assert!(diff_norm(&lhs, &d) < 1e-11 * d.l2_norm());
    }

    #[test]
    fn sh_is_symmetric_and_odd(seed in any::<u64>(), norm in 0.01f64..1.0) {
        let g = grid();
        let k = random_pair_excitation(&mut rng(seed), &g, 2, norm);
        let s = sh(&k, 1e-15).unwrap();
        prop_assert!(s.symmetry_residual() < 1e-12);
        let minus = tdhfb::bogoliubov::PairExcitation::new(Kernel::from_raw(&g, -k.kernel().values(), Symmetry::Symmetric)).unwrap();
        let sm = sh(&minus, 1e-15).unwrap();
        prop_assert!(rel_max(sm.values().iter(), s.values().mapv(|v| -v).iter()) < 1e-13);
    }

    #[test]
    fn free_flows_are_unitary_and_reversible(seed in any::<u64>(), t in -2.0f64..2.0) {
        let g = grid();
        let mut r = rng(seed);
        let ranges = PacketRanges::default();
        let phi = random_packet(&mut r, &g, &ranges);
        let gamma = random_gamma(&mut r, &g, 2, &ranges);
        let lambda = random_lambda(&mut r, &g, 2, &ranges);
        let p = free_phi(&phi, t);
        prop_assert!((p.l2_norm() - phi.l2_norm()).abs() < 1e-12);
        let gt = free_gamma(&gamma, t);
        prop_assert!((gt.l2_norm() - gamma.l2_norm()).abs() < 1e-12 * gamma.l2_norm());
        let tr = |k: &Kernel| k.diagonal().values().iter().sum::<C64>() * g.dx();
        prop_assert!((tr(&gt) - tr(&gamma)).norm() < 1e-12 * tr(&gamma).norm());
        prop_assert!(gt.hermiticity_residual() < 1e-12);
        let back = free_lambda(&free_lambda(&lambda, t), -t);
        prop_assert!(rel_max(back.values().iter(), lambda.values().iter()) < 1e-12);
        prop_assert!(free_lambda(&lambda, t).symmetry_residual() < 1e-12);
    }

    #[test]
    fn forcings_are_cubic(seed in any::<u64>(), a in 0.2f64..3.0) {
        let r = resolved(16);
        let s = random_state(&mut rng(seed), r.table.clone());
        let g = r.grid();
        let scaled = SystemState::new(
            0.0,
            s.phi.scaled(C64::from(a)),
            Kernel::from_raw(g, s.gamma.values() * C64::from(a * a), Symmetry::Hermitian),
            Kernel::from_raw(g, s.lambda.values() * C64::from(a * a), Symmetry::Symmetric),
            r.table.clone(),
        ).unwrap();
        let a3 = C64::from(a * a * a);
        let a4 = C64::from(a * a * a * a);
        prop_assert!(rel_max(rhs_phi(&scaled).unwrap().values().iter(), (rhs_phi(&s).unwrap().values() * a3).iter()) < 1e-12);
        prop_assert!(rel_max(rhs_gamma(&scaled).unwrap().values().iter(), (rhs_gamma(&s).unwrap().values() * a4).iter()) < 1e-12);
        prop_assert!(rel_max(rhs_lambda(&scaled).unwrap().values().iter(), (rhs_lambda(&s).unwrap().values() * a4).iter()) < 1e-12);
    }

    #[test]
    fn quasifree_energy_is_nonnegative(seed in any::<u64>(), norm in 0.0f64..1.0) {
        let r = resolved(32);
        let g = r.grid().clone();
        let mut rg = rng(seed);
        let phi = random_packet(&mut rg, &g, &PacketRanges::default());
        let k = random_pair_excitation(&mut rg, &g, 2, norm);
        let s = quasifree(&phi, &k, r.table.clone(), 1e-15).unwrap();
        let e = energy(&s).unwrap();
        prop_assert!(e.total >= 0.0);
        prop_assert!(e.condensate_kinetic >= 0.0 && e.pair_kinetic >= -1e-12);
        prop_assert!(particle_number(&s).unwrap() >= 0.0);
    }

    #[test]
    fn snapshot_round_trip(seed in any::<u64>()) {
        let r = resolved(16);
        let s = random_state(&mut rng(seed), r.table.clone());
        let snap = Snapshot::of(&s);
        let back = Snapshot::decode(&snap.encode()).unwrap();
        prop_assert_eq!(&back, &snap);
        let s2 = back.into_state(r.table.clone()).unwrap();
        prop_assert_eq!(s2.gamma.values(), s.gamma.values());
    }

    #[test]
    fn symmetrize_is_idempotent(seed in any::<u64>()) {
        let g = grid();
        let mut r = rng(seed);
        let f = random_packet(&mut r, &g, &PacketRanges::default());
        let h = random_packet(&mut r, &g, &PacketRanges::default());
        let mut k = Kernel::outer(&f, &h, Symmetry::None).unwrap().with_symmetry(Symmetry::Hermitian);
        k.symmetrize();
        prop_assert!(k.hermiticity_residual() < 1e-15);
        let once = k.values().clone();
        k.symmetrize();
        prop_assert_eq!(k.values(), &once);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn verifier_ratios_are_scale_free(seed in any::<u64>(), a in 0.1f64..10.0, phase in 0.0f64..std::f64::consts::TAU) {
        let g = SpatialGrid::new(12.0, 64).unwrap();
        let mut r = rng(seed);
        let ranges = PacketRanges::default();
        let gamma = random_gamma(&mut r, &g, 2, &ranges);
        let lambda = random_lambda(&mut r, &g, 2, &ranges);
        let c = C64::from_polar(a, phase);
        let g2 = Kernel::from_raw(&g, gamma.values() * C64::from(a), Symmetry::Hermitian);
        let l2 = Kernel::from_raw(&g, lambda.values() * c, Symmetry::Symmetric);
        let (x, y) = (collapsing_ratio_gamma(&gamma, 1.0, 65).unwrap(), collapsing_ratio_gamma(&g2, 1.0, 65).unwrap());
        prop_assert!((x - y).abs() < 1e-12 * x);
        let (p, q) = (collapsing_ratio_lambda(&lambda, 1.0, 65).unwrap(), collapsing_ratio_lambda(&l2, 1.0, 65).unwrap());
        prop_assert!((p.0 - q.0).abs() < 1e-12 * p.0 && (p.1 - q.1).abs() < 1e-12 * p.1);
    }
}

#[test]
fn norm_components_grow_with_the_window() {
    let r = resolved(32);
    let s0 = random_state(&mut rng(21), r.table.clone());
    let mut cfg = StepConfig::new(5e-3, 0.2);
    cfg.snapshot_stride = 2;
    let tr = evolve(&s0, &cfg).unwrap();
    let p = sigma_for_beta(r.table.beta(), 0.1).unwrap();
    let h = tr.states[1].t - tr.states[0].t;
    let norms = |k: usize| {
        let st = &tr.states[..k];
        let phis: Vec<_> = st.iter().map(|s| s.phi.clone()).collect();
        let gs: Vec<_> = st.iter().map(|s| s.gamma.clone()).collect();
        let ls: Vec<_> = st.iter().map(|s| s.lambda.clone()).collect();
        norm_nt_samples(h, &phis, &gs, &ls, &p).unwrap()
    };
    let mut prev = norms(4);
    for k in 5..=tr.states.len() {
        let next = norms(k);
        for name in NORM_COMPONENTS {
            assert!(next.get(name) >= prev.get(name) * (1.0 - 1e-12), "{name} shrank at k = {k}");
        }
        prev = next;
    }
}

#[test]
fn field_grid_checks_reject_mismatch() {
    let a = grid();
    let b = SpatialGrid::new(6.0, 16).unwrap();
    let f = Field::zeros(&a);
    assert!(Field::new(&b, f.into_values()).is_err());
}
