//! Distribution-free bounds on `F̄(x)` from a few real moments.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::Scalar;

/// Tightest available band `lower ≤ F̄(x) ≤ upper` and where each end came
/// from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetaBounds<T> {
    pub lower: T,
    pub upper: T,
    pub lower_source: &'static str,
    pub upper_source: &'static str,
}

fn lookup<T: Scalar>(moments: &[(T, T)], order: T) -> Option<T> {
    moments
        .iter()
        .find(|(b, _)| (*b - order).abs() < T::tol(1e-12))
        .map(|(_, v)| *v)
}

/// Bounds from moments given as `(order, M_order)` pairs.
///
/// * Markov on `P` for every positive order (upper).
/// * Markov on `1 − P` with `E[(1−P)^k]` built from `M₁..M_k` (lower).
/// * Cantelli on both sides when `M₂` is present.
/// * Paley–Zygmund (lower) when `M₂` is present.
pub fn meta_bounds<T: Scalar>(moments: &[(T, T)], x: T) -> Result<MetaBounds<T>> {
    let one = T::one();
    let m1 = lookup(moments, one).ok_or_else(|| Error::MissingMoment("1".into()))?;
    let m2 = lookup(moments, T::lit(2.0));
    let mut out = MetaBounds {
        lower: T::zero(),
        upper: one,
        lower_source: "trivial",
        upper_source: "trivial",
    };
    if x <= T::zero() || x >= one {
        let v = if x <= T::zero() { one } else { T::zero() };
        // F̄(0) can be below one only if P_s = 0 has mass; keep the trivial band
        if x >= one {
            out.upper = v;
            out.upper_source = "support";
        }
        return Ok(out);
    }
    let raise_lower = |v: T, src: &'static str, o: &mut MetaBounds<T>| {
        if v > o.lower {
            o.lower = v;
            o.lower_source = src;
        }
    };
    let lower_upper = |v: T, src: &'static str, o: &mut MetaBounds<T>| {
        if v < o.upper {
            o.upper = v;
            o.upper_source = src;
        }
    };

    for &(b, mb) in moments {
        if b > T::zero() && mb.is_finite() {
            lower_upper(mb / x.powf(b), "markov", &mut out);
        }
    }
    // E[(1−P)^k] = Σ_i C(k,i) (−1)^i M_i
    let mut k = 1usize;
    loop {
        let mut acc = T::zero();
        let mut binom = one;
        let mut complete = true;
        for i in 0..=k {
            let mi = if i == 0 {
                Some(one)
            } else {
                lookup(moments, T::from_count(i))
            };
            match mi {
                Some(v) => {
                    let sign = if i % 2 == 0 { one } else { -one };
                    acc += sign * binom * v;
                }
                None => {
                    complete = false;
                    break;
                }
            }
            binom = binom * T::from_count(k - i) / T::from_count(i + 1);
        }
        if !complete {
            break;
        }
        raise_lower(
            one - acc.max(T::zero()) / (one - x).powi(k as i32),
            "markov-complement",
            &mut out,
        );
        k += 1;
    }
    if let Some(m2) = m2 {
        let var = (m2 - m1 * m1).max(T::zero());
        let d = x - m1;
        if d > T::zero() {
            lower_upper(var / (var + d * d), "cantelli", &mut out);
        } else if d < T::zero() {
            raise_lower(one - var / (var + d * d), "cantelli", &mut out);
            if m2 > T::zero() {
                raise_lower(d * d / m2, "paley-zygmund", &mut out);
            }
        }
    }
    out.lower = out.lower.max(T::zero());
    out.upper = out.upper.min(one).max(out.lower);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metadist::BetaShape;

    #[test]
    fn missing_first_moment() {
        assert!(matches!(
            meta_bounds(&[(2.0, 0.3)], 0.4),
            Err(Error::MissingMoment(_))
        ));
    }

    #[test]
    fn beta_law_inside_band() {
        let (m1, m2) = (0.62, 0.44);
        let s = BetaShape::fit(m1, m2).unwrap();
        let (a, b) = match s {
            BetaShape::Beta { a, b } => (a, b),
            _ => unreachable!(),
        };
        // third and fourth raw moments of the same law
        let m3 = m2 * (a + 2.0) / (a + b + 2.0);
        let m4 = m3 * (a + 3.0) / (a + b + 3.0);
        let ms = [(1.0, m1), (2.0, m2), (3.0, m3), (4.0, m4)];
        for i in 1..20 {
            let x = i as f64 / 20.0;
            let bd = meta_bounds(&ms, x).unwrap();
            let v = s.ccdf(x).unwrap();
            assert!(
                bd.lower <= v + 1e-12 && v <= bd.upper + 1e-12,
                "x={x}: {bd:?} vs {v}"
            );
        }
    }

    #[test]
    fn band_collapses_with_variance() {
        let m1 = 0.5;
        let bd_lo = meta_bounds(&[(1.0, m1), (2.0, m1 * m1 + 1e-10)], 0.45).unwrap();
        let bd_hi = meta_bounds(&[(1.0, m1), (2.0, m1 * m1 + 1e-10)], 0.55).unwrap();
        assert!(bd_lo.upper - bd_lo.lower < 1e-6);
        assert!(bd_hi.upper - bd_hi.lower < 1e-6);
    }

    #[test]
    fn paley_zygmund_nonnegative_near_zero() {
        let bd = meta_bounds(&[(1.0, 0.3), (2.0, 0.2)], 1e-9).unwrap();
        assert!(bd.lower >= 0.3 * 0.3 / 0.2 - 1e-6);
    }
}
