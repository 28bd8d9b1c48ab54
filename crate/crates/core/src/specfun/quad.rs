//! Adaptive Gauss–Kronrod quadrature on finite and semi-infinite ranges.
//!
//! The integrator bisects the interval carrying the largest local error
//! estimate until the global estimate drops below
//! `max(abs_tol, rel_tol * |I|)`. Upper limits of `+inf` are handled with
//! the reciprocal map `x = lo + (1 - u) / u`, `u in (0, 1]`.
//!
//! Integrands may be real or complex valued (see [`QuadValue`]).

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::Scalar;

/// Values that can be integrated: real scalars and complex numbers.
pub trait QuadValue<T: Scalar>:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<T, Output = Self>
{
    fn zero() -> Self;
    fn magnitude(&self) -> T;
}

impl<T: Scalar> QuadValue<T> for T {
    #[inline]
    fn zero() -> Self {
        T::zero()
    }
    #[inline]
    fn magnitude(&self) -> T {
        self.abs()
    }
}

impl<T: Scalar> QuadValue<T> for Complex<T> {
    #[inline]
    fn zero() -> Self {
        Complex::new(T::zero(), T::zero())
    }
    #[inline]
    fn magnitude(&self) -> T {
        self.norm()
    }
}

// Gauss–Kronrod 7/15 abscissae and weights (QUADPACK qk15).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Tolerances and subdivision cap for [`Quadrature::integrate`].
#[derive(Debug, Clone, Copy)]
pub struct Quadrature<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    pub max_subdivisions: usize,
}

impl<T: Scalar> Default for Quadrature<T> {
    fn default() -> Self {
        Self {
            abs_tol: T::lit(1e-10),
            rel_tol: T::lit(1e-10),
            max_subdivisions: 2000,
        }
    }
}

/// Integral estimate with its error bound.
#[derive(Debug, Clone, Copy)]
pub struct QuadEstimate<V, T> {
    pub value: V,
    pub error: T,
    pub evaluations: usize,
}

#[derive(Clone, Copy)]
struct Segment<V, T> {
    lo: T,
    hi: T,
    value: V,
    error: T,
}

// Heap order: largest local error first.
impl<V, T: PartialOrd> PartialEq for Segment<V, T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl<V, T: PartialOrd> Eq for Segment<V, T> {}

impl<V, T: PartialOrd> PartialOrd for Segment<V, T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<V, T: PartialOrd> Ord for Segment<V, T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .partial_cmp(&other.error)
            .unwrap_or(Ordering::Equal)
    }
}

fn kronrod15<T, V, F>(f: &mut F, lo: T, hi: T) -> (V, T)
where
    T: Scalar,
    V: QuadValue<T>,
    F: FnMut(T) -> V,
{
    let half = T::lit(0.5);
    let center = half * (lo + hi);
    let half_len = half * (hi - lo);
    let abs_half = half_len.abs();

    let fc = f(center);
    let mut res_g = fc * T::lit(WG[3]);
    let mut res_k = fc * T::lit(WGK[7]);
    let mut res_abs = fc.magnitude() * T::lit(WGK[7]);
    let mut fv1 = [V::zero(); 7];
    let mut fv2 = [V::zero(); 7];

    // index-parallel over the node and weight tables
    #[allow(clippy::needless_range_loop)]
    for j in 0..3 {
        let jtw = 2 * j + 1;
        let dx = half_len * T::lit(XGK[jtw]);
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[jtw] = f1;
        fv2[jtw] = f2;
        let sum = f1 + f2;
        res_g = res_g + sum * T::lit(WG[j]);
        res_k = res_k + sum * T::lit(WGK[jtw]);
        res_abs += T::lit(WGK[jtw]) * (f1.magnitude() + f2.magnitude());
    }
    for j in 0..4 {
        let jtwm1 = 2 * j;
        let dx = half_len * T::lit(XGK[jtwm1]);
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[jtwm1] = f1;
        fv2[jtwm1] = f2;
        res_k = res_k + (f1 + f2) * T::lit(WGK[jtwm1]);
        res_abs += T::lit(WGK[jtwm1]) * (f1.magnitude() + f2.magnitude());
    }

    let mean = res_k * half;
    let mut res_asc = T::lit(WGK[7]) * (fc - mean).magnitude();
    for j in 0..7 {
        res_asc += T::lit(WGK[j]) * ((fv1[j] - mean).magnitude() + (fv2[j] - mean).magnitude());
    }

    let value = res_k * half_len;
    let res_abs = res_abs * abs_half;
    let res_asc = res_asc * abs_half;
    let mut err = ((res_k - res_g) * half_len).magnitude();
    if res_asc > T::zero() && err > T::zero() {
        let scale = (T::lit(200.0) * err / res_asc).powf(T::lit(1.5));
        err = res_asc * if scale < T::one() { scale } else { T::one() };
    }
    let round_off = T::lit(50.0) * T::epsilon() * res_abs;
    if res_abs > T::min_positive_value() / (T::lit(50.0) * T::epsilon()) && err < round_off {
        err = round_off;
    }
    (value, err)
}

impl<T: Scalar> Quadrature<T> {
    pub fn new(abs_tol: T, rel_tol: T) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }

    pub fn with_max_subdivisions(mut self, n: usize) -> Self {
        self.max_subdivisions = n.max(1);
        self
    }

    /// Integrates `f` over `[lo, hi]`; `hi` may be `+inf`.
    pub fn integrate<V, F>(&self, mut f: F, lo: T, hi: T) -> Result<QuadEstimate<V, T>>
    where
        V: QuadValue<T>,
        F: FnMut(T) -> V,
    {
        if lo.is_nan() || hi.is_nan() || lo.is_infinite() {
            return Err(Error::Domain(format!(
                "integration limits [{lo}, {hi}] not supported"
            )));
        }
        if hi.is_infinite() {
            if hi < T::zero() {
                return Err(Error::Domain("lower-unbounded ranges not supported".into()));
            }
            let mapped = |u: T| {
                let x = lo + (T::one() - u) / u;
                f(x) * (T::one() / (u * u))
            };
            return self.adapt(mapped, T::zero(), T::one());
        }
        if hi < lo {
            let est = self.adapt(&mut f, hi, lo)?;
            return Ok(QuadEstimate {
                value: est.value * -T::one(),
                ..est
            });
        }
        self.adapt(f, lo, hi)
    }

    /// Like [`Quadrature::integrate`] but returns the best estimate even if
    /// the tolerance was not met; the reported error says how far off it is.
    pub fn integrate_best_effort<V, F>(&self, mut f: F, lo: T, hi: T) -> QuadEstimate<V, T>
    where
        V: QuadValue<T>,
        F: FnMut(T) -> V,
    {
        if hi.is_infinite() {
            let mapped = |u: T| {
                let x = lo + (T::one() - u) / u;
                f(x) * (T::one() / (u * u))
            };
            return self.adapt_raw(mapped, T::zero(), T::one());
        }
        self.adapt_raw(f, lo, hi)
    }

    fn adapt<V, F>(&self, f: F, lo: T, hi: T) -> Result<QuadEstimate<V, T>>
    where
        V: QuadValue<T>,
        F: FnMut(T) -> V,
    {
        let est = self.adapt_raw(f, lo, hi);
        if est.error <= self.threshold(est.value.magnitude()) {
            Ok(est)
        } else {
            Err(Error::Quadrature {
                estimate: est.value.magnitude().as_f64(),
                error_bound: est.error.as_f64(),
            })
        }
    }

    #[inline]
    pub(crate) fn threshold(&self, magnitude: T) -> T {
        self.abs_tol.max(self.rel_tol * magnitude)
    }

    fn adapt_raw<V, F>(&self, mut f: F, lo: T, hi: T) -> QuadEstimate<V, T>
    where
        V: QuadValue<T>,
        F: FnMut(T) -> V,
    {
        let (value, error) = kronrod15(&mut f, lo, hi);
        let mut evaluations = 15;
        let mut heap = BinaryHeap::new();
        heap.push(Segment {
            lo,
            hi,
            value,
            error,
        });
        let mut total = value;
        let mut total_err = error;
        let mut splits = 0usize;

        while total_err > self.threshold(total.magnitude()) && heap.len() < self.max_subdivisions {
            let Some(seg) = heap.pop() else { break };
            let mid = T::lit(0.5) * (seg.lo + seg.hi);
            if !(mid > seg.lo && mid < seg.hi) {
                // interval exhausted at machine precision
                heap.push(seg);
                break;
            }
            let (v1, e1) = kronrod15(&mut f, seg.lo, mid);
            let (v2, e2) = kronrod15(&mut f, mid, seg.hi);
            evaluations += 30;
            total = total - seg.value + v1 + v2;
            total_err = total_err - seg.error + e1 + e2;
            heap.push(Segment {
                lo: seg.lo,
                hi: mid,
                value: v1,
                error: e1,
            });
            heap.push(Segment {
                lo: mid,
                hi: seg.hi,
                value: v2,
                error: e2,
            });
            splits += 1;
            if splits.is_multiple_of(64) {
                // resum now and then so the running totals cannot drift
                total = heap.iter().fold(V::zero(), |acc, s| acc + s.value);
                total_err = heap.iter().map(|s| s.error).sum();
            }
        }
        total = heap.iter().fold(V::zero(), |acc, s| acc + s.value);
        total_err = heap.iter().map(|s| s.error).sum();

        QuadEstimate {
            value: total,
            error: total_err,
            evaluations,
        }
    }
}

/// Convenience wrapper around [`Quadrature::integrate`] with an absolute and
/// relative tolerance of `tol`.
pub fn quad_adaptive<T, F>(f: F, lo: T, hi: T, tol: T) -> Result<QuadEstimate<T, T>>
where
    T: Scalar,
    F: FnMut(T) -> T,
{
    Quadrature::new(tol, tol).integrate(f, lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_on_unit_interval() {
        let r = quad_adaptive(|t: f64| t, 0.0, 1.0, 1e-12).unwrap();
        assert!((r.value - 0.5).abs() < 1e-14);
        assert!(r.error <= 1e-12);
    }

    #[test]
    fn exponential_tail() {
        let r = quad_adaptive(|t: f64| (-t).exp(), 0.0, f64::INFINITY, 1e-10).unwrap();
        assert!((r.value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn rayleigh_normalization() {
        let r =
            quad_adaptive(|r: f64| 2.0 * r * (-r * r).exp(), 0.0, f64::INFINITY, 1e-10).unwrap();
        assert!((r.value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let r = quad_adaptive(|t: f64| t * t, 1.0, 0.0, 1e-12).unwrap();
        assert!((r.value + 1.0 / 3.0).abs() < 1e-13);
    }

    #[test]
    fn complex_integrand() {
        // int_0^pi e^{i t} dt = 2i
        let q = Quadrature::<f64>::default();
        let r = q
            .integrate(
                |t: f64| Complex::new(0.0, t).exp(),
                0.0,
                std::f64::consts::PI,
            )
            .unwrap();
        assert!(r.value.re.abs() < 1e-12);
        assert!((r.value.im - 2.0).abs() < 1e-12);
    }

    #[test]
    fn endpoint_singularity() {
        // int_0^1 t^{-1/2} dt = 2
        let r = quad_adaptive(|t: f64| t.powf(-0.5), 0.0, 1.0, 1e-9).unwrap();
        assert!((r.value - 2.0).abs() < 1e-8);
    }

    #[test]
    fn subdivision_cap_reports_best_estimate() {
        let q = Quadrature::new(1e-15, 1e-15).with_max_subdivisions(2);
        let err = q
            .integrate(|t: f64| (50.0 * t).sin() / t.sqrt(), 1e-9, 10.0)
            .unwrap_err();
        assert!(matches!(err, Error::Quadrature { .. }));
    }

    #[test]
    fn f32_instantiation() {
        let r = quad_adaptive(|t: f32| (-t).exp(), 0.0, f32::INFINITY, 1e-5).unwrap();
        assert!((r.value - 1.0).abs() < 1e-5);
    }
}
