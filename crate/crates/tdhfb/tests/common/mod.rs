//! Independent oracles and fixtures shared by the integration tests and the
//! acceptance suite. Everything here is written from the continuous formulas
//! with plain loops; nothing goes through the library's FFT or GEMM paths.

#![allow(dead_code)]
// the oracles mirror the index notation of the formulas
#![allow(clippy::needless_range_loop)]

use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use tdhfb::bogoliubov::PairExcitation;
use tdhfb::dynamics::SystemState;
use tdhfb::grid::{Field, Kernel, SpatialGrid, Symmetry};
use tdhfb::initial::{gaussian_packet, quasifree, random_gamma, random_lambda, random_packet, PacketRanges};
use tdhfb::potential::{Discretization, InteractionPotential, PotentialTable, Profile};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Small grid on which point samples of `v_N` are resolved: the oracles can
/// then evaluate `v_N` in closed form.
pub struct Resolved {
    pub table: Arc<PotentialTable>,
    pub scale: f64,
}

pub fn resolved(m: usize) -> Resolved {
    let l = 3.0 * m as f64 / 32.0;
    let g = SpatialGrid::new(l, m).unwrap();
    let pot = InteractionPotential::new(Profile::Gaussian, 0.25, 2.0).unwrap();
    let scale = pot.scale();
    Resolved {
        table: Arc::new(PotentialTable::new(&pot, &g).unwrap()),
        scale,
    }
}

impl Resolved {
    pub fn grid(&self) -> &SpatialGrid {
        self.table.grid()
    }

    /// `v_N` at the periodic representative of `x_j − x_l`.
    pub fn v(&self, j: usize, l: usize) -> f64 {
        let g = self.grid();
        let two_l = 2.0 * g.half_length();
        let mut d = g.x()[j] - g.x()[l];
        d -= two_l * ((d + g.half_length()) / two_l).floor();
        let y = self.scale * d;
        self.scale * (-y * y).exp() / PI.sqrt()
    }
}

/// The reference problem: normalized Gaussian with rank-one `k`, `c = 0.3`,
/// Gaussian `v` at `β = 1`, `N = 64`, `L = 16`, `M = 256`.
pub fn reference_table() -> Arc<PotentialTable> {
    reference_table_n(64.0)
}

pub fn reference_table_n(n: f64) -> Arc<PotentialTable> {
    let g = SpatialGrid::new(16.0, 256).unwrap();
    let pot = InteractionPotential::new(Profile::Gaussian, 1.0, n)
        .unwrap()
        .with_discretization(Discretization::BandLimited);
    Arc::new(PotentialTable::new(&pot, &g).unwrap())
}

pub fn reference_state(table: Arc<PotentialTable>) -> SystemState {
    let phi = gaussian_packet(table.grid(), 0.0, 1.0, 0.0);
    let k = PairExcitation::rank_one(&phi, C64::from(0.3));
    quasifree(&phi, &k, table, 1e-14).unwrap()
}

/// Generic state: random packet condensate, hermitian `Γ`, symmetric `Λ`.
pub fn random_state<R: Rng>(rng: &mut R, table: Arc<PotentialTable>) -> SystemState {
    let g = table.grid().clone();
    let r = PacketRanges {
        center: -1.0..1.0,
        width: 0.5..1.0,
        momentum: -2.0..2.0,
    };
    let amp = rng.random_range(0.5..1.5);
    let phi = random_packet(rng, &g, &r).scaled(C64::from(amp));
    let gamma = random_gamma(rng, &g, 2, &r);
    let lambda = random_lambda(rng, &g, 2, &r);
    SystemState::new(0.0, phi, gamma, lambda, table).unwrap()
}

pub struct OracleForcing {
    pub phi: Array1<C64>,
    pub gamma: Array2<C64>,
    pub lambda: Array2<C64>,
}

/// Dense quadrature of the three forcings.
pub fn oracle_forcing(r: &Resolved, s: &SystemState) -> OracleForcing {
    let m = r.grid().points();
    let dx = r.grid().dx();
    let phi = s.phi.values();
    let gam = s.gamma.values();
    let lam = s.lambda.values();
    let v = Array2::from_shape_fn((m, m), |(j, l)| r.v(j, l));

    let mut big_v = vec![0.0; m];
    let mut big_w = vec![0.0; m];
    for j in 0..m {
        for l in 0..m {
            big_v[j] += dx * v[[j, l]] * gam[[l, l]].re;
            big_w[j] += dx * v[[j, l]] * phi[l].norm_sqr();
        }
    }

    let mut f_phi = Array1::<C64>::zeros(m);
    for j in 0..m {
        let mut acc = -big_v[j] * phi[j];
        for l in 0..m {
            let gp = gam[[j, l]] - phi[j] * phi[l].conj();
            let lp = lam[[j, l]] - phi[j] * phi[l];
            acc -= dx * v[[j, l]] * (gp * phi[l] + lp * phi[l].conj());
        }
        f_phi[j] = acc;
    }

    // A(x,y) = ∫ v(x−z)[Λ(x,z)Λ̄(z,y) + Γ(x,z)Γ(z,y)] dz
    // B(x,y) = ∫ [v(x−z)Γ(x,z)Λ(z,y) + Γ(x,z)v(z−y)Λ(z,y)] dz
    let mut a = Array2::<C64>::zeros((m, m));
    let mut b = Array2::<C64>::zeros((m, m));
    for j in 0..m {
        for l in 0..m {
            let (mut sa, mut sb) = (C64::from(0.0), C64::from(0.0));
            for z in 0..m {
                sa += v[[j, z]] * (lam[[j, z]] * lam[[z, l]].conj() + gam[[j, z]] * gam[[z, l]]);
                sb += v[[j, z]] * gam[[j, z]] * lam[[z, l]] + gam[[j, z]] * v[[z, l]] * lam[[z, l]];
            }
            a[[j, l]] = dx * sa;
            b[[j, l]] = dx * sb;
        }
    }
    let f_gamma = Array2::from_shape_fn((m, m), |(j, l)| {
        -(a[[j, l]] - a[[l, j]].conj()) - (big_v[j] - big_v[l]) * gam[[j, l]]
            + 2.0 * (big_w[j] - big_w[l]) * phi[j] * phi[l].conj()
    });
    let f_lambda = Array2::from_shape_fn((m, m), |(j, l)| {
        -(b[[j, l]] + b[[l, j]]) - (big_v[j] + big_v[l]) * lam[[j, l]]
            + 2.0 * (big_w[j] + big_w[l]) * phi[j] * phi[l]
    });
    OracleForcing {
        phi: f_phi,
        gamma: f_gamma,
        lambda: f_lambda,
    }
}

/// `max |a − b| / max |b|`.
pub fn rel_max<'a, I: IntoIterator<Item = &'a C64> + Clone>(a: I, b: I) -> f64 {
    let scale = b.clone().into_iter().fold(0.0f64, |m, v| m.max(v.norm()));
    let diff = a
        .into_iter()
        .zip(b)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).norm()));
    diff / scale
}

/// Spectral Laplacian by explicit trigonometric sums (no FFT).
pub struct DenseLaplacian {
    /// `D[j][l]` with `(Δf)_j = Σ_l D[j][l] f_l`.
    pub d: Array2<C64>,
}

impl DenseLaplacian {
    pub fn new(g: &SpatialGrid) -> Self {
        let m = g.points();
        let x = g.x();
        let xi = g.modes();
        let d = Array2::from_shape_fn((m, m), |(j, l)| {
            let mut s = C64::from(0.0);
            for k in 0..m {
                s += -(xi[k] * xi[k]) * C64::from_polar(1.0, xi[k] * (x[j] - x[l]));
            }
            s / m as f64
        });
        DenseLaplacian { d }
    }

    pub fn apply(&self, f: &Array1<C64>) -> Array1<C64> {
        self.d.dot(f)
    }

    /// `(Δ_x ± Δ_y) K`.
    pub fn apply2(&self, k: &Array2<C64>, sign: f64) -> Array2<C64> {
        let left = self.d.dot(k);
        let right = k.dot(&self.d.t());
        left + &(right * sign)
    }
}

/// Split-step reference for `i∂_tψ = −Δψ + (v_N * |ψ|²)ψ` with the Laplacian
/// as a dense matrix exponential applied through explicit mode sums.
pub struct ScalarHartree {
    modes: Vec<f64>,
    x: Vec<f64>,
    v: Array2<f64>,
    dx: f64,
}

impl ScalarHartree {
    /// `v[j][l] = v_N(x_j − x_l)` supplied by the caller.
    pub fn new(g: &SpatialGrid, v: Array2<f64>) -> Self {
        ScalarHartree {
            modes: g.modes().to_vec(),
            x: g.x().to_vec(),
            v,
            dx: g.dx(),
        }
    }

    fn kinetic(&self, psi: &[C64], dt: f64) -> Vec<C64> {
        let m = psi.len();
        let mut hat = vec![C64::from(0.0); m];
        for k in 0..m {
            let mut s = C64::from(0.0);
            for j in 0..m {
                s += psi[j] * C64::from_polar(1.0, -self.modes[k] * self.x[j]);
            }
            hat[k] = s * C64::from_polar(1.0, -self.modes[k] * self.modes[k] * dt);
        }
        (0..m)
            .map(|j| {
                let mut s = C64::from(0.0);
                for k in 0..m {
                    s += hat[k] * C64::from_polar(1.0, self.modes[k] * self.x[j]);
                }
                s / m as f64
            })
            .collect()
    }

    pub fn step(&self, psi: &[C64], dt: f64) -> Vec<C64> {
        let half = self.kinetic(psi, 0.5 * dt);
        let m = half.len();
        let rho: Vec<f64> = half.iter().map(|p| p.norm_sqr()).collect();
        let phased: Vec<C64> = (0..m)
            .map(|j| {
                let vj: f64 = (0..m).map(|l| self.dx * self.v[[j, l]] * rho[l]).sum();
                half[j] * C64::from_polar(1.0, -vj * dt)
            })
            .collect();
        self.kinetic(&phased, 0.5 * dt)
    }
}

/// Distance between two states: `‖δφ‖ + ‖δΓ‖ + ‖δΛ‖` in L².
pub fn state_distance(a: &SystemState, b: &SystemState) -> f64 {
    let g = a.phi.grid();
    let dphi = Field::new(g, a.phi.values() - b.phi.values()).unwrap().l2_norm();
    let dg = Kernel::from_raw(g, a.gamma.values() - b.gamma.values(), Symmetry::None).l2_norm();
    let dl = Kernel::from_raw(g, a.lambda.values() - b.lambda.values(), Symmetry::None).l2_norm();
    dphi + dg + dl
}
