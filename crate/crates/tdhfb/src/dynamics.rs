//! Right-hand sides of the coupled `(φ, Γ, Λ)` kernel equations.
//!
//! The system is written as
//!
//! ```text
//! (1/i)∂_t φ − Δφ                            = F_φ
//! (1/i)∂_t Γ − (Δ_x − Δ_y)Γ                  = F_Γ
//! (1/i)∂_t Λ − (Δ_x + Δ_y)Λ + N^{-1} v_N(x−y)Λ = F_Λ
//! ```
//!
//! With `V = v_N * ρ_Γ`, `W = v_N * |φ|²`, `Γ^φ = Γ − φ⊗φ̄`, `Λ^φ = Λ − φ⊗φ`:
//!
//! ```text
//! F_φ = −Vφ − ∫ v_N(x−y) Γ^φ(x,y) φ(y) dy − ∫ v_N(x−y) Λ^φ(x,y) φ̄(y) dy
//! F_Γ = −(A − A*) − (V(x)−V(y))Γ + 2(W(x)−W(y)) φ(x)φ̄(y),  A = κ(Λ)∘Λ̄ + κ(Γ)∘Γ
//! F_Λ = −(B + Bᵀ) − (V(x)+V(y))Λ + 2(W(x)+W(y)) φ(x)φ(y),  B = κ(Γ)∘Λ + Γ∘κ(Λ)
//! ```

use std::sync::Arc;

use ndarray::{Array1, Array2, Zip};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::grid::{Field, Kernel, Symmetry};
use crate::linalg::matmul_sum;
use crate::potential::{convolve_vn, PotentialTable};

/// Tolerance on declared symmetry classes when a state is assembled.
pub const STATE_SYMMETRY_TOL: f64 = 1e-8;
/// Relative size of `Im ρ_Γ` beyond which [`rho`] fails.
pub const RHO_IMAG_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct SystemState {
    pub t: f64,
    pub phi: Field,
    pub gamma: Kernel,
    pub lambda: Kernel,
    pub potential: Arc<PotentialTable>,
}

impl SystemState {
    pub fn new(
        t: f64,
        phi: Field,
        gamma: Kernel,
        lambda: Kernel,
        potential: Arc<PotentialTable>,
    ) -> Result<Self> {
        let g = potential.grid();
        g.check(phi.grid())?;
        g.check(gamma.grid())?;
        g.check(lambda.grid())?;
        let gamma = Kernel::with_tolerance(g, gamma.into_values(), Symmetry::Hermitian, STATE_SYMMETRY_TOL)?;
        let lambda = Kernel::with_tolerance(g, lambda.into_values(), Symmetry::Symmetric, STATE_SYMMETRY_TOL)?;
        Ok(SystemState {
            t,
            phi,
            gamma,
            lambda,
            potential,
        })
    }

    pub fn n(&self) -> f64 {
        self.potential.n()
    }

    /// `(Γ hermiticity, Λ symmetry)` relative residuals.
    pub fn symmetry_residuals(&self) -> (f64, f64) {
        (self.gamma.hermiticity_residual(), self.lambda.symmetry_residual())
    }
}

/// `ρ_Γ(x) = Γ(x, x)`, real after checking the imaginary part.
pub fn rho(gamma: &Kernel) -> Result<Field> {
    let d = gamma.values().diag();
    let scale = d.iter().fold(0.0f64, |m, v| m.max(v.norm()));
    let imag = d.iter().fold(0.0f64, |m, v| m.max(v.im.abs()));
    if scale > 0.0 && imag > RHO_IMAG_TOL * scale {
        return Err(Error::NonHermitianDiagonal(imag / scale));
    }
    Field::new(gamma.grid(), d.mapv(|v| C64::from(v.re)))
}

/// `K(x_{j+z}, x_j)` with periodic wrap.
pub fn shifted_diagonal(k: &Kernel, z: i64) -> Field {
    let m = k.grid().points();
    let zz = z.rem_euclid(m as i64) as usize;
    let v = k.values();
    let values = Array1::from_shape_fn(m, |j| v[[(j + zz) % m, j]]);
    Field::new(k.grid(), values).expect("length matches grid")
}

/// All three forcings evaluated on one state.
#[derive(Clone, Debug)]
pub struct Forcing {
    pub phi: Array1<C64>,
    pub gamma: Array2<C64>,
    pub lambda: Array2<C64>,
}

fn real_diag(gamma: &Array2<C64>) -> Array1<C64> {
    gamma.diag().mapv(|v| C64::from(v.re))
}

fn conv(table: &PotentialTable, f: Array1<C64>) -> Array1<C64> {
    let out = convolve_vn(table, &Field::new(table.grid(), f).expect("grid length"))
        .expect("same grid")
        .into_values();
    out.mapv(|v| C64::from(v.re))
}

fn kappa_raw(table: &PotentialTable, a: &Array2<C64>) -> Array2<C64> {
    let mut out = a.clone();
    Zip::from(&mut out)
        .and(table.pair_table())
        .for_each(|o, &v| *o *= v);
    out
}

/// `Σ_y D(x−y) X(x,y) f(y)`, without the dx weight.
fn kappa_apply(table: &PotentialTable, x: &Array2<C64>, f: &Array1<C64>) -> Array1<C64> {
    let d = table.pair_table();
    let m = f.len();
    Array1::from_shape_fn(m, |j| {
        let mut s = C64::from(0.0);
        for l in 0..m {
            s += d[[j, l]] * x[[j, l]] * f[l];
        }
        s
    })
}

pub(crate) fn forcing_phi_raw(
    table: &PotentialTable,
    phi: &Array1<C64>,
    gamma: &Array2<C64>,
    lambda: &Array2<C64>,
    v_rho: &Array1<C64>,
) -> Array1<C64> {
    let m = phi.len();
    let dx = table.grid().dx();
    let gphi = Array2::from_shape_fn((m, m), |(j, l)| gamma[[j, l]] - phi[j] * phi[l].conj());
    let lphi = Array2::from_shape_fn((m, m), |(j, l)| lambda[[j, l]] - phi[j] * phi[l]);
    let a = kappa_apply(table, &gphi, phi);
    let b = kappa_apply(table, &lphi, &phi.mapv(|v| v.conj()));
    Array1::from_shape_fn(m, |j| -v_rho[j] * phi[j] - dx * (a[j] + b[j]))
}

pub(crate) fn forcing_raw(
    table: &PotentialTable,
    phi: &Array1<C64>,
    gamma: &Array2<C64>,
    lambda: &Array2<C64>,
) -> Forcing {
    let dx = table.grid().dx();
    let m = phi.len();
    let v = conv(table, real_diag(gamma));
    let w = conv(table, phi.mapv(|p| C64::from(p.norm_sqr())));
    let k_gamma = kappa_raw(table, gamma);
    let k_lambda = kappa_raw(table, lambda);
    let lambda_bar = lambda.mapv(|v| v.conj());

    let f_phi = forcing_phi_raw(table, phi, gamma, lambda, &v);

    let a = matmul_sum(&[(&k_lambda, &lambda_bar), (&k_gamma, gamma)], dx);
    let f_gamma = Array2::from_shape_fn((m, m), |(j, l)| {
        -(a[[j, l]] - a[[l, j]].conj()) - (v[j] - v[l]) * gamma[[j, l]]
            + 2.0 * (w[j] - w[l]) * phi[j] * phi[l].conj()
    });

    let b = matmul_sum(&[(&k_gamma, lambda), (gamma, &k_lambda)], dx);
    let f_lambda = Array2::from_shape_fn((m, m), |(j, l)| {
        -(b[[j, l]] + b[[l, j]]) - (v[j] + v[l]) * lambda[[j, l]]
            + 2.0 * (w[j] + w[l]) * phi[j] * phi[l]
    });

    Forcing {
        phi: f_phi,
        gamma: f_gamma,
        lambda: f_lambda,
    }
}

/// Evaluates all three forcings at once, sharing the convolutions.
pub fn forcing(s: &SystemState) -> Forcing {
    forcing_raw(&s.potential, s.phi.values(), s.gamma.values(), s.lambda.values())
}

pub fn rhs_phi(s: &SystemState) -> Result<Field> {
    let v = conv(&s.potential, rho(&s.gamma)?.into_values());
    let f = forcing_phi_raw(&s.potential, s.phi.values(), s.gamma.values(), s.lambda.values(), &v);
    Field::new(s.phi.grid(), f)
}

pub fn rhs_gamma(s: &SystemState) -> Result<Kernel> {
    rho(&s.gamma)?;
    Ok(Kernel::from_raw(s.gamma.grid(), forcing(s).gamma, Symmetry::None))
}

pub fn rhs_lambda(s: &SystemState) -> Result<Kernel> {
    rho(&s.gamma)?;
    Ok(Kernel::from_raw(s.lambda.grid(), forcing(s).lambda, Symmetry::Symmetric))
}

/// Relative skew-hermiticity residual `‖F + F*‖ / ‖F‖`.
pub fn skew_residual(f: &Kernel) -> f64 {
    let v = f.values();
    let m = v.nrows();
    let (mut num, mut den) = (0.0, 0.0);
    for j in 0..m {
        for l in 0..m {
            num += (v[[j, l]] + v[[l, j]].conj()).norm_sqr();
            den += v[[j, l]].norm_sqr();
        }
    }
    if den == 0.0 {
        0.0
    } else {
        (num / den).sqrt()
    }
}
