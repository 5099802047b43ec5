//! Time evolution: exact free propagators, the interaction-picture RK4
//! stepper, the Duhamel-Picard iteration and the Γ-only Hartree mode.

use std::sync::Arc;

use ndarray::{Array1, Array2, Zip};
use num_complex::Complex64 as C64;

use crate::diagnostics::{self, DiagnosticSeries, EstimateParams};
use crate::dynamics::{forcing_raw, SystemState};
use crate::error::{Error, Result};
use crate::grid::{Field, Kernel, SpatialGrid, Symmetry};
use crate::potential::{convolve_vn, PotentialTable};

/// Symmetry drift that aborts a run.
pub const SYMMETRY_ABORT: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    StrangIprk4,
    Picard,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepConfig {
    pub dt: f64,
    pub t_final: f64,
    pub scheme: Scheme,
    pub picard_iters: usize,
    pub picard_nodes: usize,
    pub snapshot_stride: usize,
    pub resym_every: usize,
    /// Keep full states at snapshot times, not only diagnostics.
    pub record_states: bool,
}

impl StepConfig {
    pub fn new(dt: f64, t_final: f64) -> Self {
        StepConfig {
            dt,
            t_final,
            scheme: Scheme::StrangIprk4,
            picard_iters: 8,
            picard_nodes: 21,
            snapshot_stride: 8,
            resym_every: 16,
            record_states: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_final >= self.dt * (1.0 - 1e-12)) {
            return Err(Error::InvalidParameter(format!(
                "final time {} must be at least dt {}",
                self.t_final, self.dt
            )));
        }
        if self.snapshot_stride == 0 || self.resym_every == 0 {
            return Err(Error::InvalidParameter("stride and resym cadence must be positive".into()));
        }
        if self.scheme == Scheme::Picard && self.picard_nodes < 2 {
            return Err(Error::InvalidParameter("Picard needs at least 2 nodes".into()));
        }
        Ok(())
    }

    /// Number of steps; the run ends at `steps() * dt`.
    pub fn steps(&self) -> usize {
        ((self.t_final / self.dt) - 1e-9).ceil().max(1.0) as usize
    }
}

fn phases(grid: &SpatialGrid, dt: f64, sign: f64) -> Vec<C64> {
    grid.modes()
        .iter()
        .map(|&xi| C64::from_polar(1.0, -sign * xi * xi * dt))
        .collect()
}

/// `φ̂ ← e^{-iξ²dt} φ̂`.
pub fn free_phi(phi: &Field, dt: f64) -> Field {
    let a = phases(phi.grid(), dt, 1.0);
    Field::new(phi.grid(), phi.grid().apply_multiplier1(phi.values(), &a)).expect("same grid")
}

/// `Γ̂ ← e^{-i(ξ²-η²)dt} Γ̂`.
pub fn free_gamma(gamma: &Kernel, dt: f64) -> Kernel {
    let g = gamma.grid();
    let (a, b) = (phases(g, dt, 1.0), phases(g, dt, -1.0));
    Kernel::from_raw(g, g.apply_separable2(gamma.values(), &a, &b), gamma.symmetry())
}

/// `Λ̂ ← e^{-i(ξ²+η²)dt} Λ̂`.
pub fn free_lambda(lambda: &Kernel, dt: f64) -> Kernel {
    let g = lambda.grid();
    let a = phases(g, dt, 1.0);
    Kernel::from_raw(g, g.apply_separable2(lambda.values(), &a, &a), lambda.symmetry())
}

fn lambda_phase_table(table: &PotentialTable, dt: f64) -> Array2<C64> {
    let inv_n = 1.0 / table.n();
    table.pair_table().mapv(|v| C64::from_polar(1.0, -dt * v * inv_n))
}

/// Entrywise `e^{-i dt v_N(x-y)/N}`.
pub fn lambda_potential_phase(lambda: &Kernel, table: &PotentialTable, dt: f64) -> Result<Kernel> {
    table.grid().check(lambda.grid())?;
    let mut out = lambda.values().clone();
    Zip::from(&mut out)
        .and(&lambda_phase_table(table, dt))
        .for_each(|o, &p| *o *= p);
    Ok(Kernel::from_raw(lambda.grid(), out, lambda.symmetry()))
}

/// Raw state arrays for the steppers.
#[derive(Clone)]
struct Arrays {
    phi: Array1<C64>,
    gamma: Array2<C64>,
    lambda: Array2<C64>,
}

impl Arrays {
    fn of(s: &SystemState) -> Self {
        Arrays {
            phi: s.phi.values().clone(),
            gamma: s.gamma.values().clone(),
            lambda: s.lambda.values().clone(),
        }
    }

    fn axpy(&self, a: f64, d: &Arrays) -> Arrays {
        let ia = C64::new(0.0, a);
        Arrays {
            phi: &self.phi + &(&d.phi * ia),
            gamma: &self.gamma + &(&d.gamma * ia),
            lambda: &self.lambda + &(&d.lambda * ia),
        }
    }

    fn into_state(self, t: f64, table: &Arc<PotentialTable>) -> SystemState {
        let g = table.grid();
        SystemState {
            t,
            phi: Field::new(g, self.phi).expect("grid length"),
            gamma: Kernel::from_raw(g, self.gamma, Symmetry::Hermitian),
            lambda: Kernel::from_raw(g, self.lambda, Symmetry::Symmetric),
            potential: table.clone(),
        }
    }
}

/// Nonlinear forcing `F` as arrays (the stepper integrates `y' = iF(y)`).
fn force(table: &PotentialTable, y: &Arrays) -> Arrays {
    let f = forcing_raw(table, &y.phi, &y.gamma, &y.lambda);
    Arrays {
        phi: f.phi,
        gamma: f.gamma,
        lambda: f.lambda,
    }
}

/// Cached multipliers for steps of one size.
pub struct Stepper {
    table: Arc<PotentialTable>,
    dt: f64,
    half: Vec<C64>,
    half_conj: Vec<C64>,
    lambda_quarter_phase: Array2<C64>,
}

impl Stepper {
    pub fn new(table: Arc<PotentialTable>, dt: f64) -> Self {
        let g = table.grid().clone();
        let half = phases(&g, 0.5 * dt, 1.0);
        let half_conj = phases(&g, 0.5 * dt, -1.0);
        let lambda_quarter_phase = lambda_phase_table(&table, 0.25 * dt);
        Stepper {
            table,
            dt,
            half,
            half_conj,
            lambda_quarter_phase,
        }
    }

    /// Linear half step. For `Λ` the free flow is sandwiched between two
    /// quarter phases so the half step stays symmetric.
    fn lin_half(&self, y: &Arrays) -> Arrays {
        let g = self.table.grid();
        let mut lambda = &y.lambda * &self.lambda_quarter_phase;
        lambda = g.apply_separable2(&lambda, &self.half, &self.half);
        lambda *= &self.lambda_quarter_phase;
        Arrays {
            phi: g.apply_multiplier1(&y.phi, &self.half),
            gamma: g.apply_separable2(&y.gamma, &self.half, &self.half_conj),
            lambda,
        }
    }

    /// One step: linear half step, an interaction-picture RK4 stage for the
    /// nonlinearity, linear half step.
    pub fn step(&self, s: &SystemState) -> SystemState {
        let h = self.dt;
        let f = |y: &Arrays| force(&self.table, y);
        let y = Arrays::of(s);
        let yi = self.lin_half(&y);
        let k1 = self.lin_half(&f(&y));
        let k2 = f(&yi.axpy(0.5 * h, &k1));
        let k3 = f(&yi.axpy(0.5 * h, &k2));
        let k4 = f(&self.lin_half(&yi.axpy(h, &k3)));
        let mut sum = k1;
        for (k, w) in [(k2, 2.0), (k3, 2.0)] {
            sum.phi.scaled_add(C64::from(w), &k.phi);
            sum.gamma.scaled_add(C64::from(w), &k.gamma);
            sum.lambda.scaled_add(C64::from(w), &k.lambda);
        }
        let out = self.lin_half(&yi.axpy(h / 6.0, &sum)).axpy(h / 6.0, &k4);
        out.into_state(s.t + h, &self.table)
    }
}

/// Single step of size `dt`. The name predates the switch from plain Strang
/// splitting; the linear part is still split symmetrically around the stages.
pub fn step_strang(s: &SystemState, dt: f64) -> SystemState {
    Stepper::new(s.potential.clone(), dt).step(s)
}

/// Snapshots and diagnostics of one run.
#[derive(Clone, Debug)]
pub struct Trajectory {
    /// Full states at snapshot times (empty unless recorded).
    pub states: Vec<SystemState>,
    pub series: DiagnosticSeries,
    pub final_state: SystemState,
    /// Largest symmetry residual seen right before a re-symmetrization.
    pub max_symmetry_drift: f64,
}

impl Trajectory {
    pub fn times(&self) -> &[f64] {
        &self.series.times
    }
}

fn snapshot_record(series: &mut DiagnosticSeries, s: &SystemState) -> Result<()> {
    let (h, sym) = s.symmetry_residuals();
    series.push(
        s.t,
        diagnostics::particle_number(s)?,
        diagnostics::energy(s)?.total,
        h,
        sym,
    );
    Ok(())
}

/// Runs the configured scheme from `s0` for a duration of `cfg.t_final`;
/// recorded times continue from `s0.t`.
pub fn evolve(s0: &SystemState, cfg: &StepConfig) -> Result<Trajectory> {
    cfg.validate()?;
    match cfg.scheme {
        Scheme::StrangIprk4 => evolve_strang(s0, cfg, |_| {}),
        Scheme::Picard => {
            let r = picard_solve(s0, cfg.t_final, cfg.picard_iters, cfg.picard_nodes)?;
            Ok(r.trajectory)
        }
    }
}

/// Stepper run with a hook called on every snapshot state.
pub fn evolve_strang<F: FnMut(&SystemState)>(
    s0: &SystemState,
    cfg: &StepConfig,
    mut hook: F,
) -> Result<Trajectory> {
    cfg.validate()?;
    let stepper = Stepper::new(s0.potential.clone(), cfg.dt);
    let mut series = DiagnosticSeries::default();
    let mut states = Vec::new();
    let mut s = s0.clone();
    let mut drift: f64 = 0.0;
    snapshot_record(&mut series, &s)?;
    hook(&s);
    if cfg.record_states {
        states.push(s.clone());
    }
    let n = cfg.steps();
    for step in 1..=n {
        s = stepper.step(&s);
        s.t = s0.t + step as f64 * cfg.dt;
        if step % cfg.resym_every == 0 {
            let (h, sym) = s.symmetry_residuals();
            let d = h.max(sym);
            drift = drift.max(d);
            if !(d <= SYMMETRY_ABORT) {
                return Err(Error::SymmetryDrift { drift: d, t: s.t });
            }
            s.gamma.symmetrize();
            s.lambda.symmetrize();
        }
        if step % cfg.snapshot_stride == 0 {
            snapshot_record(&mut series, &s)?;
            hook(&s);
            if cfg.record_states {
                states.push(s.clone());
            }
        }
    }
    Ok(Trajectory {
        states,
        series,
        final_state: s,
        max_symmetry_drift: drift,
    })
}

/// Outcome of [`picard_solve`].
#[derive(Clone, Debug)]
pub struct PicardResult {
    /// Final iterate sampled on the quadrature nodes.
    pub trajectory: Trajectory,
    /// `N_T(X_{n+1} - X_n)` summed over the three components, per iteration.
    pub differences: Vec<f64>,
}

struct Linear {
    grid: SpatialGrid,
    a: Vec<C64>,
    b: Vec<C64>,
}

impl Linear {
    fn new(grid: &SpatialGrid, t: f64) -> Self {
        Linear {
            grid: grid.clone(),
            a: phases(grid, t, 1.0),
            b: phases(grid, t, -1.0),
        }
    }

    fn apply(&self, y: &Arrays) -> Arrays {
        Arrays {
            phi: self.grid.apply_multiplier1(&y.phi, &self.a),
            gamma: self.grid.apply_separable2(&y.gamma, &self.a, &self.b),
            lambda: self.grid.apply_separable2(&y.lambda, &self.a, &self.a),
        }
    }
}

/// `F` with the Λ potential term moved into the forcing.
fn force_extended(table: &PotentialTable, y: &Arrays) -> Arrays {
    let mut f = force(table, y);
    let inv_n = 1.0 / table.n();
    Zip::from(&mut f.lambda)
        .and(&y.lambda)
        .and(table.pair_table())
        .for_each(|o, &l, &v| *o -= l * v * inv_n);
    f
}

fn diff_states(a: &[Arrays], b: &[Arrays]) -> Vec<Arrays> {
    a.iter()
        .zip(b)
        .map(|(x, y)| Arrays {
            phi: &x.phi - &y.phi,
            gamma: &x.gamma - &y.gamma,
            lambda: &x.lambda - &y.lambda,
        })
        .collect()
}

fn nt_total(grid: &SpatialGrid, h: f64, xs: &[Arrays], p: &EstimateParams) -> Result<f64> {
    let phis: Vec<Field> = xs.iter().map(|x| Field::new(grid, x.phi.clone()).unwrap()).collect();
    let gammas: Vec<Kernel> = xs.iter().map(|x| Kernel::from_raw(grid, x.gamma.clone(), Symmetry::Hermitian)).collect();
    let lambdas: Vec<Kernel> = xs.iter().map(|x| Kernel::from_raw(grid, x.lambda.clone(), Symmetry::Symmetric)).collect();
    let r = diagnostics::norm_nt_samples(h, &phis, &gammas, &lambdas, p)?;
    Ok(r.total_phi() + r.total_gamma() + r.total_lambda())
}

/// Relative size of successive differences treated as converged to rounding.
const PICARD_FLOOR: f64 = 1e-13;

/// Duhamel-Picard iteration on `n_quad` uniform nodes in `[0, T]`.
pub fn picard_solve(s0: &SystemState, t_final: f64, n_iters: usize, n_quad: usize) -> Result<PicardResult> {
    if n_quad < 2 || !(t_final > 0.0) {
        return Err(Error::InvalidParameter("Picard needs T > 0 and at least 2 nodes".into()));
    }
    let table = s0.potential.clone();
    let g = table.grid().clone();
    let h = t_final / (n_quad - 1) as f64;
    let params = diagnostics::sigma_for_beta(table.beta(), 0.1)?;
    let x0 = Arrays::of(s0);
    let step = Linear::new(&g, h);
    // zeroth iterate: free evolution
    let mut free = vec![x0.clone()];
    for m in 1..n_quad {
        let prev = free[m - 1].clone();
        free.push(step.apply(&prev));
    }
    let mut xs = free.clone();
    let mut diffs = Vec::new();
    let scale = nt_total(&g, h, &xs, &params)?;
    let mut rising = 0;
    for _ in 0..n_iters {
        let gs: Vec<Arrays> = xs.iter().map(|x| force_extended(&table, x)).collect();
        let mut next = Vec::with_capacity(n_quad);
        let zero = Arrays {
            phi: Array1::zeros(x0.phi.len()),
            gamma: Array2::zeros(x0.gamma.dim()),
            lambda: Array2::zeros(x0.lambda.dim()),
        };
        let mut integral = zero;
        next.push(free[0].clone());
        for m in 1..n_quad {
            let carried = step.apply(&integral.axpy(0.5 * h, &gs[m - 1]));
            integral = carried.axpy(0.5 * h, &gs[m]);
            let f = &free[m];
            next.push(Arrays {
                phi: &f.phi + &integral.phi,
                gamma: &f.gamma + &integral.gamma,
                lambda: &f.lambda + &integral.lambda,
            });
        }
        let d = nt_total(&g, h, &diff_states(&next, &xs), &params)?;
        if let Some(&last) = diffs.last() {
            if d >= last {
                rising += 1;
            } else {
                rising = 0;
            }
        }
        diffs.push(d);
        xs = next;
        if rising >= 3 {
            return Err(Error::NoContraction(diffs));
        }
        if d <= PICARD_FLOOR * scale {
            break;
        }
    }
    let mut series = DiagnosticSeries::default();
    let mut states = Vec::with_capacity(n_quad);
    for (m, x) in xs.into_iter().enumerate() {
        let s = x.into_state(s0.t + m as f64 * h, &table);
        snapshot_record(&mut series, &s)?;
        states.push(s);
    }
    let final_state = states.last().unwrap().clone();
    Ok(PicardResult {
        trajectory: Trajectory {
            states,
            series,
            final_state,
            max_symmetry_drift: 0.0,
        },
        differences: diffs,
    })
}

/// Γ-only Hartree run.
#[derive(Clone, Debug)]
pub struct HartreeTrajectory {
    pub times: Vec<f64>,
    /// Γ at snapshot times (empty unless recorded).
    pub gammas: Vec<Kernel>,
    /// `dx Σ ρ_Γ`.
    pub trace: Vec<f64>,
    pub l2_norm: Vec<f64>,
    pub hermiticity: Vec<f64>,
    pub final_gamma: Kernel,
}

/// Strang evolution of `(1/i)∂_t Γ = [Δ − v_N*ρ_Γ, Γ]`; the potential
/// substep is the exact phase `e^{-i(V(x)-V(y))dt}` with ρ frozen.
pub fn solve_hartree(gamma0: &Kernel, table: &PotentialTable, cfg: &StepConfig) -> Result<HartreeTrajectory> {
    cfg.validate()?;
    table.grid().check(gamma0.grid())?;
    let g = table.grid().clone();
    let half = phases(&g, 0.5 * cfg.dt, 1.0);
    let half_conj = phases(&g, 0.5 * cfg.dt, -1.0);
    let mut gamma = gamma0.values().clone();
    let mut out = HartreeTrajectory {
        times: Vec::new(),
        gammas: Vec::new(),
        trace: Vec::new(),
        l2_norm: Vec::new(),
        hermiticity: Vec::new(),
        final_gamma: gamma0.clone(),
    };
    let record = |out: &mut HartreeTrajectory, t: f64, a: &Array2<C64>| {
        let k = Kernel::from_raw(&g, a.clone(), Symmetry::Hermitian);
        out.times.push(t);
        out.trace.push(g.dx() * a.diag().iter().map(|v| v.re).sum::<f64>());
        out.l2_norm.push(k.l2_norm());
        out.hermiticity.push(k.hermiticity_residual());
        if cfg.record_states {
            out.gammas.push(k);
        }
    };
    record(&mut out, 0.0, &gamma);
    for step in 1..=cfg.steps() {
        gamma = g.apply_separable2(&gamma, &half, &half_conj);
        let rho = Field::new(&g, gamma.diag().mapv(|v| C64::from(v.re)))?;
        let v: Vec<f64> = convolve_vn(table, &rho)?.values().iter().map(|c| c.re).collect();
        for ((j, l), e) in gamma.indexed_iter_mut() {
            *e *= C64::from_polar(1.0, -(v[j] - v[l]) * cfg.dt);
        }
        gamma = g.apply_separable2(&gamma, &half, &half_conj);
        if step % cfg.resym_every == 0 {
            let mut k = Kernel::from_raw(&g, gamma, Symmetry::Hermitian);
            let d = k.hermiticity_residual();
            if !(d <= SYMMETRY_ABORT) {
                return Err(Error::SymmetryDrift { drift: d, t: step as f64 * cfg.dt });
            }
            k.symmetrize();
            gamma = k.into_values();
        }
        if step % cfg.snapshot_stride == 0 {
            record(&mut out, step as f64 * cfg.dt, &gamma);
        }
    }
    out.final_gamma = Kernel::from_raw(&g, gamma, Symmetry::Hermitian);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{Discretization, InteractionPotential, Profile};

    fn table(l: f64, m: usize, n: f64) -> Arc<PotentialTable> {
        let g = SpatialGrid::new(l, m).unwrap();
        let pot = InteractionPotential::new(Profile::Gaussian, 1.0, n)
            .unwrap()
            .with_discretization(Discretization::BandLimited);
        Arc::new(PotentialTable::new(&pot, &g).unwrap())
    }

    #[test]
    fn plane_wave_pins_sign() {
        let g = SpatialGrid::new(5.0, 32).unwrap();
        let xi = g.modes()[3];
        let w = Field::from_fn(&g, |x| C64::from_polar(1.0, xi * x));
        let out = free_phi(&w, 0.37);
        for (a, b) in out.values().iter().zip(w.values()) {
            assert!((a - b * C64::from_polar(1.0, -xi * xi * 0.37)).norm() < 1e-12);
        }
    }

    #[test]
    fn free_gaussian_closed_form() {
        let g = SpatialGrid::new(16.0, 256).unwrap();
        let f0 = Field::from_fn(&g, |x| C64::from((-x * x / 2.0).exp()));
        for t in [0.1, 0.25, 0.5] {
            let out = free_phi(&f0, t);
            for (j, &x) in g.x().iter().enumerate() {
                let z = C64::new(1.0, 2.0 * t);
                let want = z.powf(-0.5) * (-(x * x) / (2.0 * z)).exp();
                assert!((out.values()[j] - want).norm() < 1e-9, "t={t} x={x}");
            }
        }
    }

    #[test]
    fn free_propagators_are_unitary() {
        let g = SpatialGrid::new(3.0, 32).unwrap();
        let m = 32;
        let a = Array2::from_shape_fn((m, m), |(j, l)| C64::new((j as f64 * 0.3).sin() * l as f64, (j + 2 * l) as f64 * 0.01));
        let mut k = Kernel::from_raw(&g, a, Symmetry::Hermitian);
        k.symmetrize();
        let fg = free_gamma(&k, 0.3);
        assert!((fg.l2_norm() - k.l2_norm()).abs() < 1e-12 * k.l2_norm());
        assert!(fg.hermiticity_residual() < 1e-13);
        let ks = k.clone().with_symmetry(Symmetry::Symmetric);
        let mut ks = ks;
        ks.symmetrize();
        let fl = free_lambda(&ks, 0.3);
        assert!((fl.l2_norm() - ks.l2_norm()).abs() < 1e-12 * ks.l2_norm());
        assert!(fl.symmetry_residual() < 1e-13);
    }

    #[test]
    fn lambda_phase_cases() {
        let t = table(3.0, 16, 4.0);
        let g = t.grid();
        let a = Array2::from_shape_fn((16, 16), |(j, l)| C64::new((j + l) as f64, (j * l) as f64 * 0.1));
        let lam = Kernel::from_raw(g, a.clone(), Symmetry::Symmetric);
        let same = lambda_potential_phase(&lam, &t, 0.0).unwrap();
        assert_eq!(same.values(), lam.values());
        let dt = 0.2;
        let out = lambda_potential_phase(&lam, &t, dt).unwrap();
        assert!((out.l2_norm() - lam.l2_norm()).abs() < 1e-12 * lam.l2_norm());
        for j in 0..16 {
            for l in 0..16 {
                let v = t.pair_table()[[j, l]];
                assert!((out.values()[[j, l]] - a[[j, l]] * C64::from_polar(1.0, -dt * v / 4.0)).norm() < 1e-13);
            }
        }
        let diff = Kernel::from_raw(g, out.values() - lam.values(), Symmetry::None).l2_norm();
        assert!(diff <= dt * t.max_abs() / 4.0 * lam.l2_norm());
    }

    #[test]
    fn step_counts_and_snapshots() {
        let t = table(4.0, 16, 4.0);
        let g = t.grid().clone();
        let phi = Field::from_fn(&g, |x| C64::from((-x * x).exp()));
        let s = SystemState::new(0.0, phi.clone(), Kernel::projector(&phi), Kernel::pair(&phi), t).unwrap();
        let mut cfg = StepConfig::new(1e-3, 1e-3);
        cfg.snapshot_stride = 1;
        let tr = evolve(&s, &cfg).unwrap();
        assert_eq!(tr.states.len(), 2);
        assert_eq!(tr.times(), &[0.0, 1e-3]);
        assert!(StepConfig::new(1e-2, 1e-3).validate().is_err());
        assert!(StepConfig::new(-1.0, 1.0).validate().is_err());
        assert_eq!(StepConfig::new(0.1, 1.0).steps(), 10);
    }

    #[test]
    fn hartree_without_interaction_is_free() {
        let g = SpatialGrid::new(4.0, 16).unwrap();
        let t = Arc::new(PotentialTable::free(&g, 4.0).unwrap());
        let f = Field::from_fn(&g, |x| C64::from_polar((-x * x).exp(), 0.5 * x));
        let gamma = Kernel::projector(&f);
        let mut cfg = StepConfig::new(0.01, 0.1);
        cfg.snapshot_stride = 5;
        let h = solve_hartree(&gamma, &t, &cfg).unwrap();
        let free = free_gamma(&gamma, 0.1);
        let err = (h.final_gamma.values() - free.values()).iter().fold(0.0f64, |m, v| m.max(v.norm()));
        assert!(err < 1e-13);
        assert_eq!(h.times.len(), 3);
    }

    #[test]
    fn zero_state_stays_zero() {
        let t = table(4.0, 16, 4.0);
        let g = t.grid().clone();
        let s = SystemState::new(0.0, Field::zeros(&g), Kernel::zeros(&g, Symmetry::Hermitian), Kernel::zeros(&g, Symmetry::Symmetric), t).unwrap();
        let tr = evolve(&s, &StepConfig::new(0.01, 0.05)).unwrap();
        let f = &tr.final_state;
        assert_eq!(f.phi.max_abs() + f.gamma.l2_norm() + f.lambda.l2_norm(), 0.0);
        assert!((f.t - 0.05).abs() < 1e-15);
    }

    #[test]
    fn hartree_preserves_trace_and_norm() {
        let t = table(4.0, 32, 4.0);
        let g = t.grid().clone();
        let f = Field::from_fn(&g, |x| C64::from_polar((-x * x).exp(), 0.5 * x));
        let h = solve_hartree(&Kernel::projector(&f), &t, &StepConfig::new(0.01, 0.2)).unwrap();
        let (tr0, n0) = (h.trace[0], h.l2_norm[0]);
        for (a, b) in h.trace.iter().zip(&h.l2_norm) {
            assert!((a - tr0).abs() < 1e-12 * tr0);
            assert!((b - n0).abs() < 1e-12 * n0);
        }
        assert!(h.hermiticity.iter().all(|&r| r < 1e-12));
    }
}
