//! Dense complex products on top of real GEMM.

use ndarray::linalg::general_mat_mul;
use ndarray::{Array2, Zip};
use num_complex::Complex64 as C64;

fn split(x: &Array2<C64>) -> (Array2<f64>, Array2<f64>) {
    (x.mapv(|v| v.re), x.mapv(|v| v.im))
}

/// `alpha Σ_i a_i · b_i` for square complex matrices.
///
/// Each product uses three real GEMMs: `ArBr - AiBi` and
/// `(Ar + Ai)(Br + Bi) - ArBr - AiBi`.
pub(crate) fn matmul_sum(pairs: &[(&Array2<C64>, &Array2<C64>)], alpha: f64) -> Array2<C64> {
    let (n, m) = (pairs[0].0.nrows(), pairs[0].1.ncols());
    let mut rr = Array2::<f64>::zeros((n, m));
    let mut ii = Array2::<f64>::zeros((n, m));
    let mut ss = Array2::<f64>::zeros((n, m));
    for (i, (a, b)) in pairs.iter().enumerate() {
        let beta = if i == 0 { 0.0 } else { 1.0 };
        let (ar, ai) = split(a);
        let (br, bi) = split(b);
        general_mat_mul(1.0, &ar, &br, beta, &mut rr);
        general_mat_mul(1.0, &ai, &bi, beta, &mut ii);
        general_mat_mul(1.0, &(&ar + &ai), &(&br + &bi), beta, &mut ss);
    }
    let mut out = Array2::<C64>::zeros((n, m));
    Zip::from(&mut out)
        .and(&rr)
        .and(&ii)
        .and(&ss)
        .for_each(|o, &r, &i, &s| *o = C64::new(alpha * (r - i), alpha * (s - r - i)));
    out
}

pub(crate) fn matmul(a: &Array2<C64>, b: &Array2<C64>, alpha: f64) -> Array2<C64> {
    matmul_sum(&[(a, b)], alpha)
}
