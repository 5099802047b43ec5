//! Periodic grid on `[-L, L)`, spectral transforms and derivative multipliers.
//!
//! Spectral coefficients are stored in the usual FFT layout: storage index
//! `i` holds mode `k = i` for `i < M/2` and `k = i - M` otherwise, with
//! `ξ_k = π k / L`. The forward transform is the dx-weighted sum
//! `f̂(ξ_k) = dx Σ_j f(x_j) e^{-i ξ_k x_j}`, the inverse carries `1/(2L)`,
//! so that `f(x_j) = (1/2L) Σ_k f̂(ξ_k) e^{i ξ_k x_j}`.

use std::fmt;
use std::sync::Arc;

use ndarray::{Array1, Array2, Zip};
use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

struct GridInner {
    half_length: f64,
    points: usize,
    dx: f64,
    x: Vec<f64>,
    modes: Vec<f64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

/// Uniform periodic grid. Cloning is cheap; FFT plans are shared.
#[derive(Clone)]
pub struct SpatialGrid(Arc<GridInner>);

impl fmt::Debug for SpatialGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpatialGrid")
            .field("half_length", &self.0.half_length)
            .field("points", &self.0.points)
            .finish()
    }
}

impl PartialEq for SpatialGrid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.points == other.0.points && self.0.half_length == other.0.half_length)
    }
}

impl SpatialGrid {
    pub fn new(half_length: f64, points: usize) -> Result<Self> {
        if !(half_length > 0.0) || !half_length.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "half-length must be positive, got {half_length}"
            )));
        }
        if points < 8 || !points.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "point count must be even and >= 8, got {points}"
            )));
        }
        let dx = 2.0 * half_length / points as f64;
        let x = (0..points).map(|j| -half_length + j as f64 * dx).collect();
        let modes = (0..points)
            .map(|i| std::f64::consts::PI * signed_index(i, points) as f64 / half_length)
            .collect();
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(points);
        let inv = planner.plan_fft_inverse(points);
        Ok(SpatialGrid(Arc::new(GridInner {
            half_length,
            points,
            dx,
            x,
            modes,
            fwd,
            inv,
        })))
    }

    pub fn half_length(&self) -> f64 {
        self.0.half_length
    }

    pub fn points(&self) -> usize {
        self.0.points
    }

    pub fn dx(&self) -> f64 {
        self.0.dx
    }

    /// Sample points `x_j = -L + j dx`.
    pub fn x(&self) -> &[f64] {
        &self.0.x
    }

    /// Mode table `ξ` in storage order.
    pub fn modes(&self) -> &[f64] {
        &self.0.modes
    }

    /// Storage index of the Nyquist mode `k = -M/2`.
    pub fn nyquist(&self) -> usize {
        self.0.points / 2
    }

    /// Periodic image of `d dx` in `[-L, L)`.
    pub fn wrapped_offset(&self, d: usize) -> f64 {
        let m = self.0.points;
        let d = d % m;
        let s = if d < m / 2 { d as f64 } else { d as f64 - m as f64 };
        s * self.0.dx
    }

    pub(crate) fn check(&self, other: &SpatialGrid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Unnormalized in-place DFT of every contiguous length-M chunk.
    pub(crate) fn dft_batch(&self, data: &mut [C64], forward: bool) {
        if forward {
            self.0.fwd.process(data);
        } else {
            self.0.inv.process(data);
        }
    }

    /// Unnormalized 2D DFT of a standard-layout square array.
    pub(crate) fn dft2(&self, a: &mut Array2<C64>, forward: bool) {
        let data = a.as_slice_mut().expect("standard layout kernel");
        self.dft_batch(data, forward);
        transpose_square(data, self.0.points);
        self.dft_batch(data, forward);
        transpose_square(data, self.0.points);
    }

    /// Applies a spectral multiplier given per storage index.
    pub(crate) fn apply_multiplier1(&self, values: &Array1<C64>, m: &[C64]) -> Array1<C64> {
        let mut buf = values.to_vec();
        self.dft_batch(&mut buf, true);
        let scale = 1.0 / self.0.points as f64;
        for (b, mk) in buf.iter_mut().zip(m) {
            *b *= mk * scale;
        }
        self.dft_batch(&mut buf, false);
        Array1::from(buf)
    }

    /// Applies a spectral multiplier `m(k, l)` to a two-variable array.
    pub(crate) fn apply_multiplier2<F>(&self, values: &Array2<C64>, m: F) -> Array2<C64>
    where
        F: Fn(usize, usize) -> C64,
    {
        let mut a = values.as_standard_layout().into_owned();
        self.dft2(&mut a, true);
        let scale = 1.0 / (self.0.points * self.0.points) as f64;
        for ((k, l), v) in a.indexed_iter_mut() {
            *v *= m(k, l) * scale;
        }
        self.dft2(&mut a, false);
        a
    }

    /// Separable multiplier `a_k b_l`.
    pub(crate) fn apply_separable2(
        &self,
        values: &Array2<C64>,
        a_k: &[C64],
        b_l: &[C64],
    ) -> Array2<C64> {
        self.apply_multiplier2(values, |k, l| a_k[k] * b_l[l])
    }

    fn sign(&self, i: usize) -> f64 {
        if i.is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }
}

fn signed_index(i: usize, m: usize) -> i64 {
    if i < m / 2 {
        i as i64
    } else {
        i as i64 - m as i64
    }
}

fn transpose_square(data: &mut [C64], m: usize) {
    for i in 0..m {
        for j in (i + 1)..m {
            data.swap(i * m + j, j * m + i);
        }
    }
}

/// Symmetry class carried by a [`Kernel`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Symmetry {
    Hermitian,
    Symmetric,
    None,
}

/// Complex samples of a one-variable function.
#[derive(Clone, Debug)]
pub struct Field {
    grid: SpatialGrid,
    values: Array1<C64>,
}

impl Field {
    pub fn new(grid: &SpatialGrid, values: Array1<C64>) -> Result<Self> {
        if values.len() != grid.points() {
            return Err(Error::ShapeMismatch {
                expected: grid.points(),
                got: values.len(),
            });
        }
        Ok(Field {
            grid: grid.clone(),
            values,
        })
    }

    pub fn zeros(grid: &SpatialGrid) -> Self {
        Field {
            grid: grid.clone(),
            values: Array1::zeros(grid.points()),
        }
    }

    pub fn from_fn<F: Fn(f64) -> C64>(grid: &SpatialGrid, f: F) -> Self {
        let values = grid.x().iter().map(|&x| f(x)).collect();
        Field {
            grid: grid.clone(),
            values,
        }
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn values(&self) -> &Array1<C64> {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut Array1<C64> {
        &mut self.values
    }

    pub fn into_values(self) -> Array1<C64> {
        self.values
    }

    pub(crate) fn with_values(&self, values: Array1<C64>) -> Field {
        Field {
            grid: self.grid.clone(),
            values,
        }
    }

    /// `sqrt(dx Σ |f|²)`.
    pub fn l2_norm(&self) -> f64 {
        (self.grid.dx() * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    pub fn conj(&self) -> Field {
        self.with_values(self.values.mapv(|v| v.conj()))
    }

    pub fn scaled(&self, a: C64) -> Field {
        self.with_values(&self.values * a)
    }
}

/// Complex samples of a two-variable function, entry `(j, l)` at `(x_j, x_l)`.
#[derive(Clone, Debug)]
pub struct Kernel {
    grid: SpatialGrid,
    values: Array2<C64>,
    symmetry: Symmetry,
}

/// Tolerance used by [`Kernel::new`] when checking the declared class.
pub const KERNEL_SYMMETRY_TOL: f64 = 1e-10;

impl Kernel {
    /// Builds a kernel and checks the declared symmetry to [`KERNEL_SYMMETRY_TOL`].
    pub fn new(grid: &SpatialGrid, values: Array2<C64>, symmetry: Symmetry) -> Result<Self> {
        Self::with_tolerance(grid, values, symmetry, KERNEL_SYMMETRY_TOL)
    }

    pub fn with_tolerance(
        grid: &SpatialGrid,
        values: Array2<C64>,
        symmetry: Symmetry,
        tol: f64,
    ) -> Result<Self> {
        let m = grid.points();
        if values.dim() != (m, m) {
            return Err(Error::ShapeMismatch {
                expected: m * m,
                got: values.len(),
            });
        }
        let k = Kernel::from_raw(grid, values, symmetry);
        let (what, r) = match symmetry {
            Symmetry::Hermitian => ("hermiticity", k.hermiticity_residual()),
            Symmetry::Symmetric => ("symmetry", k.symmetry_residual()),
            Symmetry::None => return Ok(k),
        };
        if r > tol {
            return Err(Error::SymmetryViolation {
                what,
                residual: r,
                tolerance: tol,
            });
        }
        Ok(k)
    }

    /// Builds a kernel without checking the declared class.
    pub fn from_raw(grid: &SpatialGrid, values: Array2<C64>, symmetry: Symmetry) -> Self {
        debug_assert_eq!(values.dim(), (grid.points(), grid.points()));
        let values = if values.is_standard_layout() {
            values
        } else {
            values.as_standard_layout().into_owned()
        };
        Kernel {
            grid: grid.clone(),
            values,
            symmetry,
        }
    }

    pub fn zeros(grid: &SpatialGrid, symmetry: Symmetry) -> Self {
        let m = grid.points();
        Kernel::from_raw(grid, Array2::zeros((m, m)), symmetry)
    }

    /// `f(x) g(y)`.
    pub fn outer(f: &Field, g: &Field, symmetry: Symmetry) -> Result<Self> {
        f.grid.check(&g.grid)?;
        let m = f.grid.points();
        let values = Array2::from_shape_fn((m, m), |(j, l)| f.values[j] * g.values[l]);
        Ok(Kernel::from_raw(&f.grid, values, symmetry))
    }

    /// `φ(x) conj(φ(y))`.
    pub fn projector(phi: &Field) -> Self {
        let m = phi.grid.points();
        let v = &phi.values;
        let values = Array2::from_shape_fn((m, m), |(j, l)| v[j] * v[l].conj());
        Kernel::from_raw(&phi.grid, values, Symmetry::Hermitian)
    }

    /// `φ(x) φ(y)`.
    pub fn pair(phi: &Field) -> Self {
        let m = phi.grid.points();
        let v = &phi.values;
        let values = Array2::from_shape_fn((m, m), |(j, l)| v[j] * v[l]);
        Kernel::from_raw(&phi.grid, values, Symmetry::Symmetric)
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn values(&self) -> &Array2<C64> {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut Array2<C64> {
        &mut self.values
    }

    pub fn into_values(self) -> Array2<C64> {
        self.values
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    pub fn with_symmetry(mut self, symmetry: Symmetry) -> Self {
        self.symmetry = symmetry;
        self
    }

    pub(crate) fn with_values(&self, values: Array2<C64>, symmetry: Symmetry) -> Kernel {
        Kernel::from_raw(&self.grid, values, symmetry)
    }

    /// `sqrt(dx² Σ |K|²)`.
    pub fn l2_norm(&self) -> f64 {
        let dx = self.grid.dx();
        dx * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn conj(&self) -> Kernel {
        self.with_values(self.values.mapv(|v| v.conj()), self.symmetry)
    }

    pub fn transpose(&self) -> Kernel {
        self.with_values(self.values.t().to_owned(), self.symmetry)
    }

    pub fn adjoint(&self) -> Kernel {
        self.with_values(self.values.t().mapv(|v| v.conj()), self.symmetry)
    }

    pub fn diagonal(&self) -> Field {
        Field {
            grid: self.grid.clone(),
            values: self.values.diag().to_owned(),
        }
    }

    /// Relative residual `‖K - K*‖ / ‖K‖` (zero for the zero kernel).
    pub fn hermiticity_residual(&self) -> f64 {
        relative_residual(&self.values, |a, b| a - b.conj())
    }

    /// Relative residual `‖K - Kᵀ‖ / ‖K‖`.
    pub fn symmetry_residual(&self) -> f64 {
        relative_residual(&self.values, |a, b| a - b)
    }

    /// Residual for the declared class; zero for [`Symmetry::None`].
    pub fn class_residual(&self) -> f64 {
        match self.symmetry {
            Symmetry::Hermitian => self.hermiticity_residual(),
            Symmetry::Symmetric => self.symmetry_residual(),
            Symmetry::None => 0.0,
        }
    }

    /// Projects onto the declared class: `(K + K*)/2` or `(K + Kᵀ)/2`.
    pub fn symmetrize(&mut self) {
        let m = self.grid.points();
        let herm = match self.symmetry {
            Symmetry::Hermitian => true,
            Symmetry::Symmetric => false,
            Symmetry::None => return,
        };
        for j in 0..m {
            for l in j..m {
                let a = self.values[[j, l]];
                let b = self.values[[l, j]];
                if herm {
                    let s = 0.5 * (a + b.conj());
                    self.values[[j, l]] = s;
                    self.values[[l, j]] = s.conj();
                } else {
                    let s = 0.5 * (a + b);
                    self.values[[j, l]] = s;
                    self.values[[l, j]] = s;
                }
            }
        }
    }
}

fn relative_residual<F: Fn(C64, C64) -> C64>(a: &Array2<C64>, op: F) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    let m = a.nrows();
    for j in 0..m {
        for l in 0..m {
            num += op(a[[j, l]], a[[l, j]]).norm_sqr();
            den += a[[j, l]].norm_sqr();
        }
    }
    if den == 0.0 {
        0.0
    } else {
        (num / den).sqrt()
    }
}

/// Forward transform with the dx-weighted normalization.
pub fn fft1(f: &Field) -> Field {
    let g = &f.grid;
    let mut buf = f.values.to_vec();
    g.dft_batch(&mut buf, true);
    let dx = g.dx();
    for (i, b) in buf.iter_mut().enumerate() {
        *b *= dx * g.sign(i);
    }
    f.with_values(Array1::from(buf))
}

/// Inverse of [`fft1`].
pub fn ifft1(fhat: &Field) -> Field {
    let g = &fhat.grid;
    let mut buf: Vec<C64> = fhat
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| v * g.sign(i))
        .collect();
    g.dft_batch(&mut buf, false);
    let scale = 1.0 / (2.0 * g.half_length());
    fhat.with_values(Array1::from(buf).mapv(|v| v * scale))
}

/// Two-variable forward transform in `(ξ, η)`.
pub fn fft2(k: &Kernel) -> Kernel {
    let g = &k.grid;
    let mut a = k.values.clone();
    g.dft2(&mut a, true);
    let dx2 = g.dx() * g.dx();
    Zip::indexed(&mut a).for_each(|(i, j), v| *v *= dx2 * g.sign(i) * g.sign(j));
    k.with_values(a, Symmetry::None)
}

/// Inverse of [`fft2`]; the result carries no declared symmetry.
pub fn ifft2(khat: &Kernel) -> Kernel {
    let g = &khat.grid;
    let mut a = khat.values.clone();
    Zip::indexed(&mut a).for_each(|(i, j), v| *v *= g.sign(i) * g.sign(j));
    g.dft2(&mut a, false);
    let s = 1.0 / (2.0 * g.half_length()).powi(2);
    a.mapv_inplace(|v| v * s);
    khat.with_values(a, Symmetry::None)
}

fn check_order(s: f64) -> Result<()> {
    if s < 0.0 || !s.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "derivative order must be nonnegative, got {s}"
        )));
    }
    Ok(())
}

/// `|∇|^s` in x, multiplier `|ξ|^s`.
pub fn frac_deriv_x(f: &Field, s: f64) -> Result<Field> {
    check_order(s)?;
    let m: Vec<C64> = f
        .grid
        .modes()
        .iter()
        .map(|&xi| C64::from(if xi == 0.0 { 0.0 } else { xi.abs().powf(s) }))
        .collect();
    Ok(f.with_values(f.grid.apply_multiplier1(&f.values, &m)))
}

/// `⟨∇⟩^s`, multiplier `(1 + ξ²)^{s/2}`.
pub fn bessel_deriv(f: &Field, s: f64) -> Result<Field> {
    check_order(s)?;
    if s == 0.0 {
        return Ok(f.clone());
    }
    let m: Vec<C64> = f
        .grid
        .modes()
        .iter()
        .map(|&xi| C64::from((1.0 + xi * xi).powf(0.5 * s)))
        .collect();
    Ok(f.with_values(f.grid.apply_multiplier1(&f.values, &m)))
}

/// `⟨∇_{x,y}⟩^s`, multiplier `(1 + ξ² + η²)^{s/2}`; keeps the symmetry class.
pub fn bessel_deriv2(k: &Kernel, s: f64) -> Result<Kernel> {
    check_order(s)?;
    if s == 0.0 {
        return Ok(k.clone());
    }
    let xi = k.grid.modes();
    let a = k
        .grid
        .apply_multiplier2(&k.values, |i, j| {
            C64::from((1.0 + xi[i] * xi[i] + xi[j] * xi[j]).powf(0.5 * s))
        });
    Ok(k.with_values(a, k.symmetry))
}
