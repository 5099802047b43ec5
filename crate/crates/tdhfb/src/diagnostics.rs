//! Conserved quantities, the mixed spacetime norm system and the
//! collapsing-estimate verifiers.
//!
//! The energy is the expectation of the many-body Hamiltonian in the
//! quasifree state described by `(φ, Γ, Λ)`:
//!
//! ```text
//! ℰ/N = tr(−ΔΓ) + ½ ∫∫ v_N(x−y) { |Γ(x,y)|² + ρ(x)ρ(y) + |Λ(x,y)|² − 2|φ(x)|²|φ(y)|² }
//! ```

use std::collections::BTreeMap;

use ndarray::Array2;
use num_complex::Complex64 as C64;
use rustfft::FftPlanner;

use crate::bogoliubov::{ch, compose, sh, PairExcitation};
use crate::dynamics::{rho, SystemState};
use crate::error::{Error, Result};
use crate::grid::{bessel_deriv, bessel_deriv2, fft1, fft2, Field, Kernel, SpatialGrid};
use crate::integrator::Trajectory;
use crate::potential::PotentialTable;

/// Time series recorded along a run plus scalar summaries.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DiagnosticSeries {
    pub times: Vec<f64>,
    pub number: Vec<f64>,
    pub energy: Vec<f64>,
    pub gamma_hermiticity: Vec<f64>,
    pub lambda_symmetry: Vec<f64>,
    pub norms: BTreeMap<String, f64>,
    pub estimate_ratios: BTreeMap<String, f64>,
}

impl DiagnosticSeries {
    pub fn push(&mut self, t: f64, number: f64, energy: f64, herm: f64, sym: f64) {
        debug_assert!(self.times.last().is_none_or(|&s| t > s));
        self.times.push(t);
        self.number.push(number);
        self.energy.push(energy);
        self.gamma_hermiticity.push(herm);
        self.lambda_symmetry.push(sym);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `max_t |q(t) − q(0)| / |q(0)|`.
    pub fn relative_drift(series: &[f64]) -> f64 {
        let q0 = match series.first() {
            Some(&q) => q,
            None => return 0.0,
        };
        let d = series.iter().fold(0.0f64, |m, &q| m.max((q - q0).abs()));
        if q0 == 0.0 {
            d
        } else {
            d / q0.abs()
        }
    }

    pub fn number_drift(&self) -> f64 {
        Self::relative_drift(&self.number)
    }

    pub fn energy_drift(&self) -> f64 {
        Self::relative_drift(&self.energy)
    }
}

/// `𝒩 = N dx Σ ρ_Γ`.
pub fn particle_number(s: &SystemState) -> Result<f64> {
    let r = rho(&s.gamma)?;
    Ok(s.n() * s.gamma.grid().dx() * r.values().iter().map(|v| v.re).sum::<f64>())
}

/// Energy split into its parts (all already multiplied by `N`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyBreakdown {
    pub condensate_kinetic: f64,
    pub pair_kinetic: f64,
    pub interaction: f64,
    pub total: f64,
    /// Imaginary part of `tr(−ΔΓ^φ)` relative to its modulus.
    pub pair_kinetic_imag: f64,
}

/// Relative imaginary part of the pair kinetic term that triggers a warning.
pub const PAIR_KINETIC_IMAG_TOL: f64 = 1e-8;

fn kinetic_trace(gamma: &Kernel) -> C64 {
    let g = gamma.grid();
    let xi = g.modes();
    let kg = g.apply_multiplier2(gamma.values(), |k, _| C64::from(xi[k] * xi[k]));
    kg.diag().sum() * g.dx()
}

fn dirichlet(phi: &Field) -> f64 {
    let g = phi.grid();
    let c = fft1(phi);
    c.values()
        .iter()
        .zip(g.modes())
        .map(|(v, xi)| xi * xi * v.norm_sqr())
        .sum::<f64>()
        / (2.0 * g.half_length())
}

pub fn energy(s: &SystemState) -> Result<EnergyBreakdown> {
    let g = s.gamma.grid();
    let dx = g.dx();
    let n = s.n();
    let r: Vec<f64> = rho(&s.gamma)?.values().iter().map(|v| v.re).collect();
    let tr = kinetic_trace(&s.gamma);
    let cond = dirichlet(&s.phi);
    let pair = C64::new(tr.re - cond, tr.im);
    let pair_imag = if pair.norm() > 0.0 { pair.im.abs() / pair.norm() } else { 0.0 };
    if pair_imag > PAIR_KINETIC_IMAG_TOL {
        log::warn!("pair kinetic term has relative imaginary part {pair_imag:e}");
    }
    let d = s.potential.pair_table();
    let phi2: Vec<f64> = s.phi.values().iter().map(|v| v.norm_sqr()).collect();
    let (gv, lv) = (s.gamma.values(), s.lambda.values());
    let m = g.points();
    let mut acc = 0.0;
    for j in 0..m {
        let mut row = 0.0;
        for l in 0..m {
            row += d[[j, l]]
                * (gv[[j, l]].norm_sqr() + r[j] * r[l] + lv[[j, l]].norm_sqr()
                    - 2.0 * phi2[j] * phi2[l]);
        }
        acc += row;
    }
    let interaction = 0.5 * dx * dx * acc;
    Ok(EnergyBreakdown {
        condensate_kinetic: n * cond,
        pair_kinetic: n * pair.re,
        interaction: n * interaction,
        total: n * (tr.re + interaction),
        pair_kinetic_imag: pair_imag,
    })
}

/// Energy of the quasifree state generated by `(φ, k)`, evaluated directly
/// from `s = sh(k)`, `c = ch(k)`:
///
/// ```text
/// ℰ = N∫|∇φ|² + ½∫|∇_{x,y} s|²
///   + ½∫∫∫ v_N(x−y) |φ(x)s(y,z) + φ(y)s(x,z)|²
///   + (N/2)∫∫ v_N |φ(x)|²|φ(y)|² + ∫∫ v_N Re(φ̄(x)φ̄(y)(s∘c)(x,y))
///   + (1/2N)∫∫ v_N { |(s∘s̄)(x,y)|² + (s∘s̄)(x,x)(s∘s̄)(y,y) + |(s∘c)(x,y)|² }
/// ```
pub fn energy_from_k(phi: &Field, k: &PairExcitation, table: &PotentialTable, tol: f64) -> Result<f64> {
    let g = table.grid();
    g.check(phi.grid())?;
    g.check(k.grid())?;
    let n = table.n();
    let dx = g.dx();
    let m = g.points();
    let s = sh(k, tol)?;
    let c = ch(k, tol)?;
    let ss = compose(&s, &s.conj())?;
    let sc = compose(&s, &c)?;
    let d = table.pair_table();
    let (p, sv) = (phi.values(), s.values());

    let kin_phi = n * dirichlet(phi);
    let shat = fft2(&s);
    let xi = g.modes();
    let mut kin_s = 0.0;
    for ((a, b), v) in shat.values().indexed_iter() {
        kin_s += (xi[a] * xi[a] + xi[b] * xi[b]) * v.norm_sqr();
    }
    kin_s *= 0.5 / (2.0 * g.half_length()).powi(2);

    let mut cross = 0.0;
    for x in 0..m {
        for y in 0..m {
            let mut inner = 0.0;
            for z in 0..m {
                inner += (p[x] * sv[[y, z]] + p[y] * sv[[x, z]]).norm_sqr();
            }
            cross += d[[x, y]] * inner;
        }
    }
    cross *= 0.5 * dx * dx * dx;

    let (ssv, scv) = (ss.values(), sc.values());
    let (mut cond, mut mixed, mut pairs) = (0.0, 0.0, 0.0);
    for x in 0..m {
        for y in 0..m {
            let v = d[[x, y]];
            cond += v * p[x].norm_sqr() * p[y].norm_sqr();
            mixed += v * (p[x].conj() * p[y].conj() * scv[[x, y]]).re;
            pairs += v * (ssv[[x, y]].norm_sqr() + ssv[[x, x]].re * ssv[[y, y]].re + scv[[x, y]].norm_sqr());
        }
    }
    let dx2 = dx * dx;
    Ok(kin_phi + kin_s + cross + 0.5 * n * cond * dx2 + mixed * dx2 + pairs * dx2 / (2.0 * n))
}

/// Regularity parameters `ε` and `σ = (3/2 − ε)ε` for a given `β`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EstimateParams {
    pub epsilon: f64,
    pub sigma: f64,
    pub beta: f64,
    pub epsilon_requested: f64,
}

/// Upper bound on `σβ`.
pub const SIGMA_BETA_MAX: f64 = 0.9;

pub fn sigma_for_beta(beta: f64, epsilon_request: f64) -> Result<EstimateParams> {
    if !(beta > 0.0) || !(epsilon_request > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need beta > 0 and epsilon > 0, got beta = {beta}, epsilon = {epsilon_request}"
        )));
    }
    let sigma_of = |e: f64| (1.5 - e) * e;
    let mut eps = epsilon_request.min(0.2 - 1e-6);
    if sigma_of(eps) * beta >= SIGMA_BETA_MAX {
        // smaller root of (3/2 − ε)ε = target
        let target = SIGMA_BETA_MAX / beta * (1.0 - 1e-9);
        eps = 0.5 * (1.5 - (2.25 - 4.0 * target).sqrt());
    }
    Ok(EstimateParams {
        epsilon: eps,
        sigma: sigma_of(eps),
        beta,
        epsilon_requested: epsilon_request,
    })
}

/// Named components of the norm system, including per-block totals.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct NormReport(pub BTreeMap<String, f64>);

impl NormReport {
    pub fn get(&self, name: &str) -> f64 {
        self.0.get(name).copied().unwrap_or(f64::NAN)
    }

    pub fn total_phi(&self) -> f64 {
        self.get("n_phi")
    }

    pub fn total_gamma(&self) -> f64 {
        self.get("n_gamma")
    }

    pub fn total_lambda(&self) -> f64 {
        self.get("n_lambda")
    }
}

/// Component names in reporting order.
pub const NORM_COMPONENTS: [&str; 13] = [
    "phi_l4_linf",
    "phi_linf_l2",
    "gamma_l4_linf_l2",
    "gamma_linf_l2",
    "gamma_supz_half",
    "gamma_supz_half_minus_eps",
    "lambda_l4_linf_l2",
    "lambda_linf_l2",
    "lambda_supz_l4_l2",
    "n_phi",
    "n_gamma",
    "n_lambda",
    "n_total",
];

fn trapezoid(n: usize, h: f64) -> Vec<f64> {
    (0..n)
        .map(|i| if i == 0 || i + 1 == n { 0.5 * h } else { h })
        .collect()
}

fn lq_time(w: &[f64], values: &[f64], q: f64) -> f64 {
    w.iter()
        .zip(values)
        .map(|(w, v)| w * v.powf(q))
        .sum::<f64>()
        .powf(1.0 / q)
}

fn max_row_l2(k: &Array2<C64>, dx: f64) -> f64 {
    k.rows()
        .into_iter()
        .map(|r| (dx * r.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt())
        .fold(0.0, f64::max)
}

/// `‖m(∇) K(·+z, ·)‖²_{L²(dx)}` for every shift `z`, with multiplier `m(ξ)`.
fn shifted_diag_norms(k: &Kernel, mult: &[f64]) -> Vec<f64> {
    let g = k.grid();
    let m = g.points();
    let v = k.values();
    let mut rows = vec![C64::from(0.0); m * m];
    for z in 0..m {
        for j in 0..m {
            rows[z * m + j] = v[[(j + z) % m, j]];
        }
    }
    g.dft_batch(&mut rows, true);
    // Parseval for the unnormalized DFT: dx Σ|f|² = dx/M Σ|DFT f|²
    let scale = g.dx() / m as f64;
    (0..m)
        .map(|z| {
            scale
                * rows[z * m..(z + 1) * m]
                    .iter()
                    .zip(mult)
                    .map(|(c, w)| w * w * c.norm_sqr())
                    .sum::<f64>()
        })
        .collect()
}

/// Norm system on uniformly spaced samples `h` apart.
pub fn norm_nt_samples(
    h: f64,
    phis: &[Field],
    gammas: &[Kernel],
    lambdas: &[Kernel],
    p: &EstimateParams,
) -> Result<NormReport> {
    let n = phis.len();
    if n < 4 {
        return Err(Error::InsufficientSnapshots(n));
    }
    if gammas.len() != n || lambdas.len() != n {
        return Err(Error::InvalidParameter("snapshot series of unequal length".into()));
    }
    let g = phis[0].grid().clone();
    let dx = g.dx();
    let sigma = p.sigma;
    let w = trapezoid(n, h);
    let xi = g.modes();
    let half: Vec<f64> = xi.iter().map(|x| x.abs().sqrt()).collect();
    let half_eps: Vec<f64> = xi
        .iter()
        .map(|x| if *x == 0.0 { 0.0 } else { x.abs().powf(0.5 - p.epsilon) })
        .collect();
    let bessel: Vec<f64> = xi.iter().map(|x| (1.0 + x * x).powf(0.5 * sigma)).collect();

    let m = g.points();
    let mut phi_inf = Vec::with_capacity(n);
    let mut phi_l2: f64 = 0.0;
    let mut gam_rows = Vec::with_capacity(n);
    let mut gam_l2: f64 = 0.0;
    let mut lam_rows = Vec::with_capacity(n);
    let mut lam_l2: f64 = 0.0;
    let mut gz_half = vec![0.0; m];
    let mut gz_eps = vec![0.0; m];
    let mut lz = vec![0.0; m];
    for i in 0..n {
        let bp = bessel_deriv(&phis[i], sigma)?;
        phi_inf.push(bp.max_abs());
        phi_l2 = phi_l2.max(bp.l2_norm());

        let bg = bessel_deriv2(&gammas[i], sigma)?;
        gam_rows.push(max_row_l2(bg.values(), dx));
        gam_l2 = gam_l2.max(bg.l2_norm());
        let bl = bessel_deriv2(&lambdas[i], sigma)?;
        lam_rows.push(max_row_l2(bl.values(), dx));
        lam_l2 = lam_l2.max(bl.l2_norm());

        for (z, v) in shifted_diag_norms(&gammas[i], &half).into_iter().enumerate() {
            gz_half[z] += w[i] * v;
        }
        for (z, v) in shifted_diag_norms(&gammas[i], &half_eps).into_iter().enumerate() {
            gz_eps[z] += w[i] * v;
        }
        for (z, v) in shifted_diag_norms(&lambdas[i], &bessel).into_iter().enumerate() {
            lz[z] += w[i] * v * v;
        }
    }
    let sup = |v: &[f64], root: f64| v.iter().fold(0.0f64, |m, &x| m.max(x)).powf(root);
    let mut r = BTreeMap::new();
    r.insert("phi_l4_linf".to_string(), lq_time(&w, &phi_inf, 4.0));
    r.insert("phi_linf_l2".to_string(), phi_l2);
    r.insert("gamma_l4_linf_l2".to_string(), lq_time(&w, &gam_rows, 4.0));
    r.insert("gamma_linf_l2".to_string(), gam_l2);
    r.insert("gamma_supz_half".to_string(), sup(&gz_half, 0.5));
    r.insert("gamma_supz_half_minus_eps".to_string(), sup(&gz_eps, 0.5));
    r.insert("lambda_l4_linf_l2".to_string(), lq_time(&w, &lam_rows, 4.0));
    r.insert("lambda_linf_l2".to_string(), lam_l2);
    r.insert("lambda_supz_l4_l2".to_string(), sup(&lz, 0.25));
    let total = |keys: &[&str]| keys.iter().map(|k| r[*k]).sum::<f64>();
    let n_phi = total(&["phi_l4_linf", "phi_linf_l2"]);
    let n_gamma = total(&["gamma_l4_linf_l2", "gamma_linf_l2", "gamma_supz_half", "gamma_supz_half_minus_eps"]);
    let n_lambda = total(&["lambda_l4_linf_l2", "lambda_linf_l2", "lambda_supz_l4_l2"]);
    r.insert("n_phi".to_string(), n_phi);
    r.insert("n_gamma".to_string(), n_gamma);
    r.insert("n_lambda".to_string(), n_lambda);
    r.insert("n_total".to_string(), n_phi * n_phi + n_gamma + n_lambda);
    Ok(NormReport(r))
}

/// Norm system over the recorded states of a trajectory.
pub fn norm_nt(traj: &Trajectory, p: &EstimateParams) -> Result<NormReport> {
    let states = &traj.states;
    if states.len() < 4 {
        return Err(Error::InsufficientSnapshots(states.len()));
    }
    let h = states[1].t - states[0].t;
    for w in states.windows(2) {
        if ((w[1].t - w[0].t) - h).abs() > 1e-9 * h.max(1e-300) {
            return Err(Error::NonUniformTimes);
        }
    }
    let phis: Vec<Field> = states.iter().map(|s| s.phi.clone()).collect();
    let gammas: Vec<Kernel> = states.iter().map(|s| s.gamma.clone()).collect();
    let lambdas: Vec<Kernel> = states.iter().map(|s| s.lambda.clone()).collect();
    norm_nt_samples(h, &phis, &gammas, &lambdas, p)
}

/// Diagonal spectrum `ρ̂(t, p) = (1/2L) Σ_{k+l≡p} K̂(k,l) e^{-i(ξ_k² ± ξ_l²)t}`
/// of a freely evolved kernel, with `+` for the Λ flow and `−` for Γ.
fn free_trace_spectrum(khat: &Array2<C64>, grid: &SpatialGrid, t: f64, plus: bool) -> Vec<C64> {
    let m = grid.points();
    let xi = grid.modes();
    let sgn = if plus { 1.0 } else { -1.0 };
    let a: Vec<C64> = xi.iter().map(|x| C64::from_polar(1.0, -x * x * t)).collect();
    let b: Vec<C64> = xi.iter().map(|x| C64::from_polar(1.0, -sgn * x * x * t)).collect();
    let mut out = vec![C64::from(0.0); m];
    for k in 0..m {
        let row = khat.row(k);
        let ak = a[k];
        for l in 0..m {
            out[(k + l) % m] += ak * b[l] * row[l];
        }
    }
    let s = 1.0 / (2.0 * grid.half_length());
    out.iter_mut().for_each(|v| *v *= s);
    out
}

fn check_window(t_final: f64, n_t: usize) -> Result<f64> {
    if !(t_final > 0.0) || n_t < 4 {
        return Err(Error::InvalidParameter(format!(
            "need T > 0 and at least 4 time samples, got T = {t_final}, n_t = {n_t}"
        )));
    }
    Ok(t_final / (n_t - 1) as f64)
}

/// `‖∇^{1/2} ρ_Γ(t)‖_{L²(dt dx)} / ‖Γ₀‖_{L²}` over the free flow on `[0, T]`.
pub fn collapsing_ratio_gamma(gamma0: &Kernel, t_final: f64, n_t: usize) -> Result<f64> {
    let h = check_window(t_final, n_t)?;
    let g = gamma0.grid();
    let khat = fft2(gamma0);
    let w = trapezoid(n_t, h);
    let xi = g.modes();
    let mut acc = 0.0;
    for (i, wi) in w.iter().enumerate() {
        let rh = free_trace_spectrum(khat.values(), g, i as f64 * h, false);
        let s: f64 = rh.iter().zip(xi).map(|(v, x)| x.abs() * v.norm_sqr()).sum();
        acc += wi * s / (2.0 * g.half_length());
    }
    Ok(acc.sqrt() / gamma0.l2_norm())
}

/// Hann window `sin²(π t / T)` on `n` samples spanning `[0, T]`.
fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| (std::f64::consts::PI * i as f64 / (n - 1) as f64).sin().powi(2))
        .collect()
}

/// `(‖|τ+ξ²/2|^{1/4} F̃‖ / ‖Λ₀‖, ‖F‖_{L⁴(dt)L²(dx)} / ‖|τ+ξ²/2|^{1/4} F̃‖)` where
/// `F` is the Hann-tapered trace `Λ(t, x, x)` of the free flow on `[0, T]`.
pub fn collapsing_ratio_lambda(lambda0: &Kernel, t_final: f64, n_t: usize) -> Result<(f64, f64)> {
    let h = check_window(t_final, n_t)?;
    let g = lambda0.grid();
    let m = g.points();
    let two_l = 2.0 * g.half_length();
    let khat = fft2(lambda0);
    let taper = hann(n_t);
    // F̂(t_i, p) laid out as columns of an n_t × M array
    let mut f = Array2::<C64>::zeros((n_t, m));
    for i in 0..n_t {
        let rh = free_trace_spectrum(khat.values(), g, i as f64 * h, true);
        for (p, v) in rh.into_iter().enumerate() {
            f[[i, p]] = v * taper[i];
        }
    }
    let w = trapezoid(n_t, h);
    let l2_sq: Vec<f64> = f
        .rows()
        .into_iter()
        .map(|r| r.iter().map(|v| v.norm_sqr()).sum::<f64>() / two_l)
        .collect();
    let l4l2 = lq_time(&w, &l2_sq.iter().map(|v| v.sqrt()).collect::<Vec<_>>(), 4.0);

    let fft = FftPlanner::new().plan_fft_forward(n_t);
    let xi = g.modes();
    let mut col = vec![C64::from(0.0); n_t];
    let mut sym = 0.0;
    for p in 0..m {
        for i in 0..n_t {
            col[i] = f[[i, p]];
        }
        fft.process(&mut col);
        for (n, c) in col.iter().enumerate() {
            let ni = if n < n_t / 2 { n as f64 } else { n as f64 - n_t as f64 };
            let tau = 2.0 * std::f64::consts::PI * ni / (n_t as f64 * h);
            // a diagonal mode of total momentum ξ oscillates at ξ²/2 + 2u² for
            // relative momentum u, so the weight vanishes at the bottom of the band
            sym += (tau + 0.5 * xi[p] * xi[p]).abs().sqrt() * (c * h).norm_sqr();
        }
    }
    let quarter = (sym / (n_t as f64 * h * two_l)).sqrt();
    Ok((quarter / lambda0.l2_norm(), l4l2 / quarter))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bogoliubov::quasifree_state;
    use crate::grid::Symmetry;
    use crate::potential::{Discretization, InteractionPotential, Profile};
    use approx::assert_relative_eq;
    use std::sync::Arc;

    fn table(l: f64, m: usize, n: f64) -> Arc<PotentialTable> {
        let g = SpatialGrid::new(l, m).unwrap();
        let pot = InteractionPotential::new(Profile::Gaussian, 1.0, n)
            .unwrap()
            .with_discretization(Discretization::BandLimited);
        Arc::new(PotentialTable::new(&pot, &g).unwrap())
    }

    fn unit_gaussian(g: &SpatialGrid) -> Field {
        let f = Field::from_fn(g, |x| C64::from((-x * x / 2.0).exp()));
        let n = f.l2_norm();
        f.scaled(C64::from(1.0 / n))
    }

    #[test]
    fn sigma_examples() {
        let p = sigma_for_beta(1.0, 0.1).unwrap();
        assert_relative_eq!(p.sigma, 0.14, epsilon = 1e-15);
        let p = sigma_for_beta(0.5, 0.19).unwrap();
        assert_relative_eq!(p.sigma, 1.31 * 0.19, epsilon = 1e-15);
        let p = sigma_for_beta(10.0, 0.1).unwrap();
        assert!(p.sigma < 0.09 && p.sigma * 10.0 < 0.9 && p.epsilon < 0.1);
        let p = sigma_for_beta(1.0, 0.5).unwrap();
        assert!(p.epsilon < 0.2 && p.sigma < 0.5);
        assert!(sigma_for_beta(0.0, 0.1).is_err());
    }

    #[test]
    fn number_of_pure_condensate() {
        let t = table(6.0, 32, 8.0);
        let phi = unit_gaussian(t.grid());
        let s = SystemState::new(0.0, phi.clone(), Kernel::projector(&phi), Kernel::pair(&phi), t.clone()).unwrap();
        assert_relative_eq!(particle_number(&s).unwrap(), 8.0, epsilon = 1e-12);
        let g = t.grid();
        let z = SystemState::new(0.0, Field::zeros(g), Kernel::zeros(g, Symmetry::Hermitian), Kernel::zeros(g, Symmetry::Symmetric), t).unwrap();
        assert_eq!(particle_number(&z).unwrap(), 0.0);
        assert_eq!(energy(&z).unwrap().total, 0.0);
    }

    #[test]
    fn free_gaussian_energy() {
        let g = SpatialGrid::new(8.0, 64).unwrap();
        let t = PotentialTable::free(&g, 4.0).unwrap();
        let phi = unit_gaussian(&g);
        let s = SystemState::new(0.0, phi.clone(), Kernel::projector(&phi), Kernel::pair(&phi), Arc::new(t)).unwrap();
        // ∫|∇φ|² = 1/2 for the unit gaussian
        let e = energy(&s).unwrap();
        assert_relative_eq!(e.total / 4.0, 0.5, epsilon = 1e-12);
        assert!(e.pair_kinetic.abs() < 1e-12);
    }

    #[test]
    fn energy_matches_sh_form_on_rank_one() {
        let t = table(6.0, 32, 16.0);
        let g = t.grid();
        let phi = unit_gaussian(g);
        let u = Field::from_fn(g, |x| C64::new(x * (-x * x / 2.0).exp(), 0.2 * (-x * x).exp()));
        let k = PairExcitation::rank_one(&u, C64::new(0.3, 0.1));
        let (gam, lam) = quasifree_state(&phi, &k, 16.0, 1e-15).unwrap();
        let s = SystemState::new(0.0, phi.clone(), gam, lam, t.clone()).unwrap();
        let a = energy(&s).unwrap().total;
        let b = energy_from_k(&phi, &k, &t, 1e-15).unwrap();
        assert!((a - b).abs() < 1e-10 * a.abs(), "{a} vs {b}");
    }

    #[test]
    fn frozen_plane_wave_norms() {
        let g = SpatialGrid::new(4.0, 32).unwrap();
        let xi = g.modes()[2];
        let f = Field::from_fn(&g, |x| C64::from_polar(1.0, xi * x));
        let p = sigma_for_beta(1.0, 0.1).unwrap();
        let z = Kernel::zeros(&g, Symmetry::Hermitian);
        let r = norm_nt_samples(0.1, &vec![f; 5], &vec![z.clone(); 5], &vec![z.with_symmetry(Symmetry::Symmetric); 5], &p).unwrap();
        let want = (2.0 * 4.0f64).sqrt() * (1.0 + xi * xi).powf(p.sigma / 2.0);
        assert_relative_eq!(r.get("phi_linf_l2"), want, epsilon = 1e-12);
        assert!(norm_nt_samples(0.1, &[], &[], &[], &p).is_err());
    }

    #[test]
    fn collapsing_ratios_are_homogeneous() {
        let g = SpatialGrid::new(8.0, 64).unwrap();
        let phi = unit_gaussian(&g);
        let gam = Kernel::projector(&phi);
        let a = collapsing_ratio_gamma(&gam, 1.0, 65).unwrap();
        let scaled = Kernel::from_raw(&g, gam.values() * 3.7, Symmetry::Hermitian);
        let b = collapsing_ratio_gamma(&scaled, 1.0, 65).unwrap();
        assert_relative_eq!(a, b, epsilon = 1e-12 * a);
        let lam = Kernel::pair(&phi);
        let (p, q) = collapsing_ratio_lambda(&lam, 1.0, 65).unwrap();
        let (p2, q2) = collapsing_ratio_lambda(&Kernel::from_raw(&g, lam.values() * 0.2, Symmetry::Symmetric), 1.0, 65).unwrap();
        assert_relative_eq!(p, p2, epsilon = 1e-12 * p);
        assert_relative_eq!(q, q2, epsilon = 1e-12 * q);
        assert!(p.is_finite() && q.is_finite() && p > 0.0 && q > 0.0);
    }
}
