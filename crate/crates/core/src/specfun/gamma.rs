//! Gamma and log-gamma on the real line and in the complex plane.
//!
//! Lanczos approximation with g = 607/128 and 15 terms, reflected through
//! `Γ(z)Γ(1-z) = π / sin(πz)` for `Re z < 1/2`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::Scalar;

const LANCZOS_SHIFT: f64 = 5.242_187_5; // g + 1/2
const LANCZOS_C0: f64 = 0.999_999_999_999_997_092;
const LANCZOS: [f64; 14] = [
    57.156_235_665_862_923_5,
    -59.597_960_355_475_491_2,
    14.136_097_974_741_747_1,
    -0.491_913_816_097_620_199,
    0.339_946_499_848_118_887e-4,
    0.465_236_289_270_485_756e-4,
    -0.983_744_753_048_795_646e-4,
    0.158_088_703_224_912_494e-3,
    -0.210_264_441_724_104_883e-3,
    0.217_439_618_115_212_643e-3,
    -0.164_318_106_536_763_890e-3,
    0.844_182_239_838_527_433e-4,
    -0.261_908_384_015_814_087e-4,
    0.368_991_826_595_316_234e-5,
];
const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

fn is_nonpositive_integer<T: Scalar>(x: T) -> bool {
    x <= T::zero() && x == x.round()
}

fn ln_gamma_lanczos_real<T: Scalar>(x: T) -> T {
    let tmp = x + T::lit(LANCZOS_SHIFT);
    let tmp = (x + T::lit(0.5)) * tmp.ln() - tmp;
    let mut ser = T::lit(LANCZOS_C0);
    let mut y = x;
    for &c in LANCZOS.iter() {
        y += T::one();
        ser += T::lit(c) / y;
    }
    tmp + (T::lit(SQRT_2PI) * ser / x).ln()
}

fn ln_gamma_lanczos_complex<T: Scalar>(z: Complex<T>) -> Complex<T> {
    let tmp = z + T::lit(LANCZOS_SHIFT);
    let tmp = (z + T::lit(0.5)) * tmp.ln() - tmp;
    let mut ser = Complex::new(T::lit(LANCZOS_C0), T::zero());
    let mut y = z;
    for &c in LANCZOS.iter() {
        y += T::one();
        ser += Complex::new(T::lit(c), T::zero()) / y;
    }
    tmp + (ser * T::lit(SQRT_2PI) / z).ln()
}

/// `ln |Γ(x)|` together with the sign of `Γ(x)` for real `x`.
pub fn ln_gamma_signed<T: Scalar>(x: T) -> Result<(T, T)> {
    if x.is_nan() || is_nonpositive_integer(x) {
        return Err(Error::Pole {
            re: x.as_f64(),
            im: 0.0,
        });
    }
    if x >= T::lit(0.5) {
        return Ok((ln_gamma_lanczos_real(x), T::one()));
    }
    // reflection: Γ(x) = π / (sin(πx) Γ(1-x))
    let s = (T::PI() * x).sin();
    let ln_abs = T::PI().ln() - s.abs().ln() - ln_gamma_lanczos_real(T::one() - x);
    Ok((ln_abs, s.signum()))
}

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma<T: Scalar>(x: T) -> Result<T> {
    if !(x > T::zero()) {
        return Err(Error::Domain(format!("ln_gamma requires x > 0, got {x}")));
    }
    Ok(ln_gamma_lanczos_real(x))
}

/// `Γ(x)` for real `x` off the poles.
pub fn gamma_real<T: Scalar>(x: T) -> Result<T> {
    let (l, s) = ln_gamma_signed(x)?;
    Ok(s * l.exp())
}

/// A logarithm of `Γ(z)` (not necessarily the principal branch; `exp` of it
/// is `Γ(z)`).
pub fn ln_gamma_complex<T: Scalar>(z: Complex<T>) -> Result<Complex<T>> {
    if z.im == T::zero() && is_nonpositive_integer(z.re) {
        return Err(Error::Pole {
            re: z.re.as_f64(),
            im: 0.0,
        });
    }
    if z.re >= T::lit(0.5) {
        return Ok(ln_gamma_lanczos_complex(z));
    }
    let one = Complex::new(T::one(), T::zero());
    let pi = Complex::new(T::PI(), T::zero());
    let s = (z * T::PI()).sin();
    Ok(pi.ln() - s.ln() - ln_gamma_lanczos_complex(one - z))
}

/// `Γ(z)` for complex `z`.
pub fn gamma_complex<T: Scalar>(z: Complex<T>) -> Result<Complex<T>> {
    Ok(ln_gamma_complex(z)?.exp())
}
