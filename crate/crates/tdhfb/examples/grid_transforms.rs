//! Spectral grid basics: FFT round trip, fractional derivatives and Parseval.

use num_complex::Complex64 as C64;
use tdhfb::grid::{bessel_deriv, fft1, frac_deriv_x, ifft1, Field, SpatialGrid};

fn main() -> tdhfb::Result<()> {
    let g = SpatialGrid::new(8.0, 64)?;
    println!("L = {}, M = {}, dx = {}", g.half_length(), g.points(), g.dx());

    let f = Field::from_fn(&g, |x| C64::from_polar((-x * x).exp(), 2.0 * x));
    let back = ifft1(&fft1(&f));
    let err = (back.values() - f.values()).iter().map(|v| v.norm()).fold(0.0, f64::max);
    println!("round trip error {err:.2e}");

    // ‖|∇|^{1/2} f‖² = Σ |ξ| |f̂|² / 2L
    let half = frac_deriv_x(&f, 0.5)?;
    let bessel = bessel_deriv(&f, 1.0)?;
    println!("‖f‖ = {:.6}", f.l2_norm());
    println!("‖|∇|^(1/2) f‖ = {:.6}", half.l2_norm());
    println!("‖<∇> f‖ = {:.6}", bessel.l2_norm());
    Ok(())
}
