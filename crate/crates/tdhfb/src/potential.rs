//! The scaled interaction `v_N(x) = N^β v(N^β x)` and the operations built on it.
//!
//! A [`PotentialTable`] holds the discretized potential for one grid: the
//! periodic difference table `D_d = v_N(d dx)` (with `d dx` wrapped into
//! `[-L, L)`), its spectrum, and the full two-point table `v_N(x_j - x_l)`.

use std::f64::consts::PI;
use std::path::Path;

use ndarray::{Array1, Array2, Zip};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::grid::{Field, Kernel, SpatialGrid};

/// Minimum number of grid points across the e^-1 width of `v_N` for sampling.
pub const MIN_POINTS_PER_WIDTH: f64 = 8.0;

/// Uniformly sampled even profile, `samples[i] = v(i h)` for `i >= 0`.
///
/// Evaluated off the table by Whittaker-Shannon interpolation, so the
/// profile is band-limited to `|ξ| < π/h`.
#[derive(Clone, Debug, PartialEq)]
pub struct TabulatedProfile {
    h: f64,
    samples: Vec<f64>,
}

impl TabulatedProfile {
    /// Builds a profile from `(x, v(x))` pairs. Either a half table starting
    /// at `x = 0` or a table symmetric about zero is accepted.
    pub fn from_points(points: &[(f64, f64)]) -> Result<Self> {
        if points.len() < 3 {
            return Err(Error::InvalidProfile("need at least 3 samples".into()));
        }
        let h = points[1].0 - points[0].0;
        if !(h > 0.0) {
            return Err(Error::InvalidProfile("x must be increasing".into()));
        }
        for w in points.windows(2) {
            if ((w[1].0 - w[0].0) - h).abs() > 1e-9 * h.max(1.0) {
                return Err(Error::InvalidProfile("x spacing must be uniform".into()));
            }
        }
        if points.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
            return Err(Error::InvalidProfile("non-finite sample".into()));
        }
        if points.iter().any(|p| p.1 < 0.0) {
            return Err(Error::InvalidProfile("profile must be nonnegative".into()));
        }
        let zero = points
            .iter()
            .position(|p| p.0.abs() < 1e-9 * h)
            .ok_or_else(|| Error::InvalidProfile("table must contain x = 0".into()))?;
        let right = &points[zero..];
        let left = &points[..zero];
        if !left.is_empty() {
            if left.len() != right.len() - 1 {
                return Err(Error::InvalidProfile(
                    "two-sided table must be symmetric about x = 0".into(),
                ));
            }
            for (i, p) in left.iter().rev().enumerate() {
                let q = right[i + 1];
                if (p.0 + q.0).abs() > 1e-9 * h || (p.1 - q.1).abs() > 1e-12 * q.1.abs().max(1.0) {
                    return Err(Error::InvalidProfile(format!(
                        "profile is not even at x = {}",
                        q.0
                    )));
                }
            }
        }
        let samples: Vec<f64> = right.iter().map(|p| p.1).collect();
        let peak = samples.iter().cloned().fold(0.0, f64::max);
        if peak == 0.0 {
            return Err(Error::InvalidProfile("profile is identically zero".into()));
        }
        if *samples.last().unwrap() > 1e-6 * peak {
            return Err(Error::InvalidProfile(
                "profile must decay to zero at the table edge".into(),
            ));
        }
        Ok(TabulatedProfile { h, samples })
    }

    /// Parses whitespace-separated two-column text; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut pts = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split_whitespace().collect();
            let bad = || Error::InvalidProfile(format!("line {}: expected two numbers", n + 1));
            if cols.len() != 2 {
                return Err(bad());
            }
            let x: f64 = cols[0].parse().map_err(|_| bad())?;
            let v: f64 = cols[1].parse().map_err(|_| bad())?;
            pts.push((x, v));
        }
        Self::from_points(&pts)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    fn value(&self, x: f64) -> f64 {
        let u = x.abs() / self.h;
        let n = self.samples.len();
        if u.fract() == 0.0 && (u as usize) < n {
            return self.samples[u as usize];
        }
        let mut s = self.samples[0] * sinc(u);
        for (i, &v) in self.samples.iter().enumerate().skip(1) {
            s += v * (sinc(u - i as f64) + sinc(u + i as f64));
        }
        s
    }

    fn transform(&self, xi: f64) -> f64 {
        if xi.abs() >= PI / self.h {
            return 0.0;
        }
        let mut s = self.samples[0];
        for (i, &v) in self.samples.iter().enumerate().skip(1) {
            s += 2.0 * v * (xi * self.h * i as f64).cos();
        }
        self.h * s
    }

    fn e1_half_width(&self) -> f64 {
        let target = self.samples[0] / std::f64::consts::E;
        for (i, w) in self.samples.windows(2).enumerate() {
            if w[1] <= target {
                let frac = if w[0] == w[1] { 0.0 } else { (w[0] - target) / (w[0] - w[1]) };
                return (i as f64 + frac) * self.h;
            }
        }
        (self.samples.len() - 1) as f64 * self.h
    }
}

fn sinc(u: f64) -> f64 {
    if u == 0.0 {
        1.0
    } else {
        let a = PI * u;
        a.sin() / a
    }
}

/// Unscaled profile `v`.
#[derive(Clone, Debug, PartialEq)]
pub enum Profile {
    /// `π^{-1/2} e^{-x²}`
    Gaussian,
    /// `½ sech²(x)`
    Sech2,
    Tabulated(TabulatedProfile),
}

impl Profile {
    pub fn value(&self, x: f64) -> f64 {
        match self {
            Profile::Gaussian => (-x * x).exp() / PI.sqrt(),
            Profile::Sech2 => {
                let c = x.cosh();
                0.5 / (c * c)
            }
            Profile::Tabulated(t) => t.value(x),
        }
    }

    /// `v̂(ξ) = ∫ v(x) e^{-iξx} dx` (real, even).
    pub fn transform(&self, xi: f64) -> f64 {
        match self {
            Profile::Gaussian => (-0.25 * xi * xi).exp(),
            Profile::Sech2 => {
                let a = 0.5 * PI * xi;
                if a.abs() < 1e-8 {
                    1.0 - a * a / 6.0
                } else if a.abs() > 700.0 {
                    0.0
                } else {
                    a / a.sinh()
                }
            }
            Profile::Tabulated(t) => t.transform(xi),
        }
    }

    /// Half-width at which `v` falls to `v(0)/e`.
    pub fn e1_half_width(&self) -> f64 {
        match self {
            Profile::Gaussian => 1.0,
            // sech²(x) = e^{-1}  <=>  cosh(x) = e^{1/2}
            Profile::Sech2 => 0.5f64.exp().acosh(),
            Profile::Tabulated(t) => t.e1_half_width(),
        }
    }
}

/// How `v_N` is put on the grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Discretization {
    /// Point samples `v_N(x_j)`; requires the resolution guard.
    #[default]
    Sampled,
    /// Grid projection with spectrum `v̂(ξ_k / N^β)` on the resolved modes.
    /// Valid at any `(N, β)`; the samples may take small negative values.
    BandLimited,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InteractionPotential {
    pub profile: Profile,
    pub beta: f64,
    pub n: f64,
    pub discretization: Discretization,
}

impl InteractionPotential {
    pub fn new(profile: Profile, beta: f64, n: f64) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::InvalidParameter(format!("beta must be positive, got {beta}")));
        }
        if !(n >= 1.0) || !n.is_finite() {
            return Err(Error::InvalidParameter(format!("N must be >= 1, got {n}")));
        }
        Ok(InteractionPotential {
            profile,
            beta,
            n,
            discretization: Discretization::Sampled,
        })
    }

    pub fn with_discretization(mut self, d: Discretization) -> Self {
        self.discretization = d;
        self
    }

    /// `N^β`.
    pub fn scale(&self) -> f64 {
        self.n.powf(self.beta)
    }

    pub fn vn(&self, x: f64) -> f64 {
        let s = self.scale();
        s * self.profile.value(s * x)
    }

    pub fn vn_hat(&self, xi: f64) -> f64 {
        self.profile.transform(xi / self.scale())
    }

    /// Grid points across the e^-1 width of `v_N`.
    pub fn points_per_width(&self, grid: &SpatialGrid) -> f64 {
        2.0 * self.profile.e1_half_width() / self.scale() / grid.dx()
    }

    pub fn check_resolution(&self, grid: &SpatialGrid) -> Result<()> {
        if self.discretization == Discretization::BandLimited {
            return Ok(());
        }
        let points = self.points_per_width(grid);
        if points < MIN_POINTS_PER_WIDTH {
            return Err(Error::UnderresolvedPotential {
                points,
                required: MIN_POINTS_PER_WIDTH,
            });
        }
        Ok(())
    }
}

/// `v_N` discretized on one grid.
#[derive(Clone, Debug)]
pub struct PotentialTable {
    grid: SpatialGrid,
    potential: InteractionPotential,
    diff: Vec<f64>,
    spectrum: Vec<C64>,
    pair: Array2<f64>,
}

impl PotentialTable {
    pub fn new(potential: &InteractionPotential, grid: &SpatialGrid) -> Result<Self> {
        potential.check_resolution(grid)?;
        let m = grid.points();
        let (diff, spectrum) = match potential.discretization {
            Discretization::Sampled => {
                let diff: Vec<f64> = (0..m).map(|d| potential.vn(grid.wrapped_offset(d))).collect();
                let mut buf: Vec<C64> = diff.iter().map(|&v| C64::from(v)).collect();
                grid.dft_batch(&mut buf, true);
                let spectrum = buf.iter().map(|c| C64::from(c.re * grid.dx())).collect();
                (diff, spectrum)
            }
            Discretization::BandLimited => {
                let spectrum: Vec<C64> = grid
                    .modes()
                    .iter()
                    .map(|&xi| C64::from(potential.vn_hat(xi)))
                    .collect();
                let mut buf = spectrum.clone();
                grid.dft_batch(&mut buf, false);
                let s = 1.0 / (2.0 * grid.half_length());
                (buf.iter().map(|c| c.re * s).collect(), spectrum)
            }
        };
        let pair = Array2::from_shape_fn((m, m), |(j, l)| diff[(j + m - l) % m]);
        Ok(PotentialTable {
            grid: grid.clone(),
            potential: potential.clone(),
            diff,
            spectrum,
            pair,
        })
    }

    /// Interaction switched off (`v ≡ 0`) at particle number `n`.
    pub fn free(grid: &SpatialGrid, n: f64) -> Result<Self> {
        let potential = InteractionPotential::new(Profile::Gaussian, 1.0, n)?
            .with_discretization(Discretization::BandLimited);
        let m = grid.points();
        Ok(PotentialTable {
            grid: grid.clone(),
            potential,
            diff: vec![0.0; m],
            spectrum: vec![C64::from(0.0); m],
            pair: Array2::zeros((m, m)),
        })
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn potential(&self) -> &InteractionPotential {
        &self.potential
    }

    pub fn n(&self) -> f64 {
        self.potential.n
    }

    pub fn beta(&self) -> f64 {
        self.potential.beta
    }

    /// `D_d = v_N(d dx)` with wrapped offsets.
    pub fn difference_table(&self) -> &[f64] {
        &self.diff
    }

    /// Two-point table `v_N(x_j - x_l)`.
    pub fn pair_table(&self) -> &Array2<f64> {
        &self.pair
    }

    /// Grid spectrum of `v_N`, real and even, in storage order.
    pub fn spectrum(&self) -> Vec<f64> {
        self.spectrum.iter().map(|c| c.re).collect()
    }

    /// `dx Σ_d D_d`, the discrete `∫ v_N`.
    pub fn integral(&self) -> f64 {
        self.grid.dx() * self.diff.iter().sum::<f64>()
    }

    pub fn max_abs(&self) -> f64 {
        self.diff.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `(Σ dx |v_N|^p)^{1/p}`.
    pub fn lp_norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.max_abs();
        }
        (self.grid.dx() * self.diff.iter().map(|v| v.abs().powf(p)).sum::<f64>()).powf(1.0 / p)
    }
}

/// Samples of `v_N` at the grid points `x_j`.
pub fn sample_vn(potential: &InteractionPotential, grid: &SpatialGrid) -> Result<Field> {
    let table = PotentialTable::new(potential, grid)?;
    let m = grid.points();
    let values = Array1::from_shape_fn(m, |j| C64::from(table.diff[(j + m / 2) % m]));
    Field::new(grid, values)
}

/// Periodic convolution `(v_N * ρ)(x_j) = dx Σ_l v_N(x_j - x_l) ρ(x_l)`, done spectrally.
pub fn convolve_vn(table: &PotentialTable, rho: &Field) -> Result<Field> {
    table.grid.check(rho.grid())?;
    Field::new(&table.grid, table.grid.apply_multiplier1(rho.values(), &table.spectrum))
}

/// `κ(α)(x, y) = v_N(x - y) α(x, y)`.
pub fn kappa(table: &PotentialTable, alpha: &Kernel) -> Result<Kernel> {
    table.grid.check(alpha.grid())?;
    let mut out = alpha.values().clone();
    Zip::from(&mut out).and(&table.pair).for_each(|o, &v| *o *= v);
    Ok(Kernel::from_raw(&table.grid, out, alpha.symmetry()))
}
