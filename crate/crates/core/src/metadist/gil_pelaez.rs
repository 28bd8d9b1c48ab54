//! Gil-Pelaez inversion of the imaginary moments:
//! `F̄(x) = ½ + (1/π) ∫₀^∞ Im(e^{−jt ln x} M_{jt}) / t dt`.
//!
//! The integral is split at multiples of the half-period `π/ω`, `ω = −ln x`,
//! each piece is integrated adaptively, and the partial sums are accelerated
//! with Wynn's epsilon algorithm. The number of pieces doubles until three
//! successive doublings move the accelerated value by less than the
//! tolerance.

use std::cell::RefCell;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::specfun::Quadrature;
use crate::Scalar;

/// Inversion settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GilPelaez<T> {
    /// Lower integration limit (the integrand is bounded at 0).
    pub epsilon: T,
    /// Change between successive doublings regarded as converged.
    pub tolerance: T,
    /// Pieces used before the first doubling.
    pub initial_pieces: usize,
    /// Hard cap on the number of pieces.
    pub max_pieces: usize,
    /// Tail bounds above this attach a warning.
    pub warn_above: T,
    /// Relative tolerance of each piece.
    pub piece_rel_tol: T,
}

impl<T: Scalar> Default for GilPelaez<T> {
    fn default() -> Self {
        Self {
            epsilon: T::lit(1e-6),
            tolerance: T::lit(1e-4),
            initial_pieces: 4,
            max_pieces: 4096,
            warn_above: T::lit(1e-3),
            piece_rel_tol: T::tol(1e-7),
        }
    }
}

/// One inverted value.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactMetaPoint<T> {
    /// `F̄(x)` clamped to `[0, 1]`.
    pub value: T,
    /// Unclamped inversion result.
    pub raw: T,
    /// Size of the last accepted change, a proxy for the truncation error.
    pub tail_bound: T,
    /// Upper limit of integration actually used.
    pub t_max: T,
    pub warning: Option<String>,
}

/// Wynn's epsilon acceleration of a sequence of partial sums.
///
/// Returns the deepest even-column entry that stayed finite.
pub fn wynn_epsilon<T: Scalar>(s: &[T]) -> T {
    let n = s.len();
    if n == 0 {
        return T::zero();
    }
    if n < 3 {
        return s[n - 1];
    }
    let mut prev: Vec<T> = vec![T::zero(); n + 1];
    let mut cur: Vec<T> = s.to_vec();
    let mut best = s[n - 1];
    for k in 1..n {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for i in 0..cur.len() - 1 {
            let d = cur[i + 1] - cur[i];
            if d == T::zero() || !d.is_finite() {
                return best;
            }
            next.push(prev[i + 1] + d.recip());
        }
        if k % 2 == 0 {
            match next.last() {
                Some(v) if v.is_finite() => best = *v,
                _ => return best,
            }
        }
        prev = cur;
        cur = next;
        if cur.len() < 2 {
            break;
        }
    }
    best
}

/// `F̄(x)` from `t ↦ M_{jt}`.
pub fn exact_meta<T, F>(mut moment: F, x: T, opts: &GilPelaez<T>) -> Result<ExactMetaPoint<T>>
where
    T: Scalar,
    F: FnMut(T) -> Result<Complex<T>>,
{
    let one = T::one();
    if x.is_nan() {
        return Err(Error::Domain("reliability must be a number".into()));
    }
    if x <= T::zero() || x >= one {
        let v = if x <= T::zero() { one } else { T::zero() };
        return Ok(ExactMetaPoint {
            value: v,
            raw: v,
            tail_bound: T::zero(),
            t_max: T::zero(),
            warning: None,
        });
    }
    let omega = -x.ln();
    let h = T::PI() / omega;

    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let mut integrand = |t: T| -> T {
        if failure.borrow().is_some() {
            return T::zero();
        }
        match moment(t) {
            Ok(mv) => {
                let phase = Complex::new(T::zero(), omega * t).exp();
                (phase * mv).im / t
            }
            Err(e) => {
                *failure.borrow_mut() = Some(e);
                T::zero()
            }
        }
    };
    let quad = Quadrature::new(opts.piece_rel_tol * T::lit(0.01), opts.piece_rel_tol)
        .with_max_subdivisions(500);

    let mut partial: Vec<T> = Vec::new();
    let mut running = T::zero();
    let piece = |k: usize, integrand: &mut dyn FnMut(T) -> T| -> T {
        let lo = if k == 0 {
            opts.epsilon
        } else {
            h * T::from_count(k)
        };
        let hi = h * T::from_count(k + 1);
        quad.integrate_best_effort(integrand, lo, hi).value
    };

    let mut pieces = opts.initial_pieces.max(2);
    let mut estimates: Vec<T> = Vec::new();
    loop {
        while partial.len() < pieces {
            let k = partial.len();
            running += piece(k, &mut integrand);
            if let Some(e) = failure.borrow_mut().take() {
                return Err(e);
            }
            partial.push(running);
        }
        let window = &partial[partial.len().saturating_sub(40)..];
        estimates.push(wynn_epsilon(window));
        let converged = estimates.len() >= 4 && {
            let l = estimates.len();
            (1..=3).all(|i| (estimates[l - i] - estimates[l - i - 1]).abs() < opts.tolerance)
        };
        if converged || pieces >= opts.max_pieces {
            let l = estimates.len();
            let tail = if l >= 2 {
                (estimates[l - 1] - estimates[l - 2]).abs()
            } else {
                T::infinity()
            };
            let raw = T::lit(0.5) + estimates[l - 1] / T::PI();
            let tail_bound = tail / T::PI();
            let warning = if !converged || tail_bound > opts.warn_above {
                Some(format!(
                    "Gil-Pelaez inversion at x={x}: tail bound {tail_bound} after {pieces} pieces"
                ))
            } else {
                None
            };
            return Ok(ExactMetaPoint {
                value: raw.max(T::zero()).min(one),
                raw,
                tail_bound,
                t_max: h * T::from_count(pieces),
                warning,
            });
        }
        pieces *= 2;
    }
}
