//! Pair-excitation calculus: kernel composition, `sh(k)`, `ch(k)` and the
//! quasifree data `(Γ, Λ)` generated by `(φ, k)`.
//!
//! With `s = sh(k)` and `c = ch(k)`:
//!
//! ```text
//! Γ = φ(x) conj(φ(y)) + N^{-1} (s ∘ conj(s))
//! Λ = φ(x) φ(y)       + N^{-1} (s ∘ c)
//! ```

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::grid::{Field, Kernel, SpatialGrid, Symmetry};
use crate::linalg::matmul;

/// Default truncation tolerance for the `sh`/`ch` series.
pub const DEFAULT_SERIES_TOL: f64 = 1e-14;
/// Maximum number of series terms before giving up.
pub const MAX_SERIES_TERMS: usize = 64;

/// `(A ∘ B)(x, z) = dx Σ_y A(x, y) B(y, z)`.
pub fn compose(a: &Kernel, b: &Kernel) -> Result<Kernel> {
    a.grid().check(b.grid())?;
    let dx = a.grid().dx();
    Ok(Kernel::from_raw(
        a.grid(),
        matmul(a.values(), b.values(), dx),
        Symmetry::None,
    ))
}

/// Discrete identity kernel `δ`, `1/dx` on the diagonal.
pub fn delta(grid: &SpatialGrid) -> Kernel {
    let m = grid.points();
    let mut a = Array2::<C64>::zeros((m, m));
    a.diag_mut().fill(C64::from(1.0 / grid.dx()));
    Kernel::from_raw(grid, a, Symmetry::Hermitian)
}

/// Symmetric pair-excitation kernel `k(x, y) = k(y, x)`.
#[derive(Clone, Debug)]
pub struct PairExcitation {
    k: Kernel,
}

impl PairExcitation {
    pub fn new(k: Kernel) -> Result<Self> {
        let g = k.grid().clone();
        let k = Kernel::new(&g, k.into_values(), Symmetry::Symmetric)?;
        Ok(PairExcitation { k })
    }

    pub fn zero(grid: &SpatialGrid) -> Self {
        PairExcitation {
            k: Kernel::zeros(grid, Symmetry::Symmetric),
        }
    }

    /// `c u(x) u(y)`.
    pub fn rank_one(u: &Field, c: C64) -> Self {
        let mut k = Kernel::pair(u);
        k.values_mut().mapv_inplace(|v| v * c);
        PairExcitation { k }
    }

    pub fn kernel(&self) -> &Kernel {
        &self.k
    }

    pub fn grid(&self) -> &SpatialGrid {
        self.k.grid()
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("series tolerance must be positive, got {tol}")));
    }
    Ok(())
}

/// Sums `first + Σ_n first ∘ q^n / d_n` where `d_n` is given by `denom(n)`.
fn series<F: Fn(usize) -> f64>(
    first: Kernel,
    q: &Kernel,
    denom: F,
    tol: f64,
) -> Result<Kernel> {
    let mut sum = first.values().clone();
    let mut term = first;
    let mut last = term.l2_norm();
    if last < tol {
        return Ok(Kernel::from_raw(term.grid(), sum, Symmetry::None));
    }
    for n in 1..MAX_SERIES_TERMS {
        let mut next = compose(&term, q)?;
        let d = denom(n);
        next.values_mut().mapv_inplace(|v| v / d);
        sum += next.values();
        last = next.l2_norm();
        term = next;
        if last < tol {
            return Ok(Kernel::from_raw(term.grid(), sum, Symmetry::None));
        }
    }
    Err(Error::NonConvergence {
        terms: MAX_SERIES_TERMS,
        tol,
        last,
    })
}

/// `sh(k) = k + k∘k̄∘k/3! + …`, symmetric.
pub fn sh(k: &PairExcitation, tol: f64) -> Result<Kernel> {
    check_tol(tol)?;
    let q = compose(&k.k.conj(), &k.k)?;
    let s = series(k.k.clone(), &q, |n| ((2 * n) * (2 * n + 1)) as f64, tol)?;
    Ok(s.with_symmetry(Symmetry::Symmetric))
}

/// `ch(k) = δ + k̄∘k/2! + …`, hermitian.
pub fn ch(k: &PairExcitation, tol: f64) -> Result<Kernel> {
    check_tol(tol)?;
    ch_with(k, &compose(&k.k.conj(), &k.k)?, tol)
}

fn ch_with(k: &PairExcitation, q: &Kernel, tol: f64) -> Result<Kernel> {
    let mut first = q.clone();
    first.values_mut().mapv_inplace(|v| v * 0.5);
    let p = series(first, q, |n| ((2 * n + 1) * (2 * n + 2)) as f64, tol)?;
    let mut out = p.into_values();
    out += delta(k.grid()).values();
    Ok(Kernel::from_raw(k.grid(), out, Symmetry::Hermitian))
}

/// `p(k) = ch(k) - δ`.
pub fn p_of_k(k: &PairExcitation, tol: f64) -> Result<Kernel> {
    let mut c = ch(k, tol)?;
    *c.values_mut() -= delta(k.grid()).values();
    Ok(c)
}

/// Returns `(sh(2k), 2 sh(k)∘ch(k))`.
pub fn sh2k(k: &PairExcitation, tol: f64) -> Result<(Kernel, Kernel)> {
    let mut doubled = k.k.clone();
    doubled.values_mut().mapv_inplace(|v| v * 2.0);
    let direct = sh(&PairExcitation { k: doubled }, tol)?;
    let mut product = compose(&sh(k, tol)?, &ch(k, tol)?)?;
    product.values_mut().mapv_inplace(|v| v * 2.0);
    Ok((direct, product.with_symmetry(Symmetry::Symmetric)))
}

/// Tolerance on the hermiticity of the assembled `Γ`.
const QUASIFREE_HERMITICITY_TOL: f64 = 1e-10;

/// Quasifree `(Γ, Λ)` generated by `(φ, k)` at particle number `N`.
pub fn quasifree_state(
    phi: &Field,
    k: &PairExcitation,
    n: f64,
    tol: f64,
) -> Result<(Kernel, Kernel)> {
    phi.grid().check(k.grid())?;
    check_tol(tol)?;
    let s = sh(k, tol)?;
    let q = compose(&k.k.conj(), &k.k)?;
    let c = ch_with(k, &q, tol)?;
    let gamma_pair = compose(&s, &s.conj())?;
    let lambda_pair = compose(&s, &c)?;
    let inv_n = 1.0 / n;
    let gamma = Kernel::projector(phi).values() + &(gamma_pair.values() * inv_n);
    let lambda = Kernel::pair(phi).values() + &(lambda_pair.values() * inv_n);
    let gamma = Kernel::with_tolerance(phi.grid(), gamma, Symmetry::Hermitian, QUASIFREE_HERMITICITY_TOL)?;
    let lambda = Kernel::with_tolerance(phi.grid(), lambda, Symmetry::Symmetric, QUASIFREE_HERMITICITY_TOL)?;
    Ok((gamma, lambda))
}
