//! Special-function kernel: Gauss hypergeometric, (incomplete) beta, gamma
//! in the complex plane, generalized binomial coefficients and adaptive
//! quadrature. Everything here is pure and reentrant.

mod beta;
mod gamma;
mod hyp2f1;
mod quad;

use num_complex::Complex;

pub use beta::{beta_complex, beta_real, ln_beta, reg_inc_beta};
pub use gamma::{gamma_complex, gamma_real, ln_gamma, ln_gamma_complex, ln_gamma_signed};
pub use hyp2f1::{gauss2f1, gauss2f1_direct, gauss2f1_pfaff, MAX_TERMS as GAUSS2F1_MAX_TERMS};
pub use quad::{quad_adaptive, QuadEstimate, QuadValue, Quadrature};

use crate::Scalar;

/// Generalized binomial coefficient `b(b-1)...(b-k+1)/k!`.
pub fn gen_binomial<T: Scalar>(b: Complex<T>, k: usize) -> Complex<T> {
    let mut acc = Complex::new(T::one(), T::zero());
    for i in 0..k {
        let fi = T::from_count(i);
        acc = acc * (b - fi) / (fi + T::one());
    }
    acc
}

/// `e^w - 1` without cancellation for small `|w|`.
pub(crate) fn expm1_complex<T: Scalar>(w: Complex<T>) -> Complex<T> {
    let half = T::lit(0.5);
    let s = (w.im * half).sin();
    let re = w.re.exp_m1() * w.im.cos() - T::lit(2.0) * s * s;
    let im = w.re.exp() * w.im.sin();
    Complex::new(re, im)
}

/// `ln(1 + w)` on the principal branch without cancellation for small `w`.
pub(crate) fn ln1p_complex<T: Scalar>(w: Complex<T>) -> Complex<T> {
    let re = T::lit(0.5) * (T::lit(2.0) * w.re + w.norm_sqr()).ln_1p();
    let im = w.im.atan2(T::one() + w.re);
    Complex::new(re, im)
}
