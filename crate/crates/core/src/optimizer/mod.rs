//! Downlink power allocation under per-rank success targets and optional
//! finite-mean-delay requirements.
//!
//! All problems are phrased through `1/c_k = β_k/θ − Σ_{i<k} β_i`: a success
//! target `M₁,(k) ≥ t` is the linear bound `1/c_k ≥ 1/c_k^t`, and a finite
//! mean local delay for rank `k` is `1/c_k > δ/((1−δ)(N−k+1))`.
//!
//! Strict inequalities are closed with an interior margin of
//! [`STRICT_MARGIN`] on `c`.

pub mod simplex;

use serde::{Deserialize, Serialize};

use crate::downlink::{a_coefficient, moment_downlink};
use crate::error::{Error, Result};
use crate::model::{MomentOrder, NetworkParams, PowerAllocation};
use crate::Scalar;

use simplex::{irreducible_infeasible_subset, maximize_lexmin, Constraint, LpOutcome, Relation};

/// Interior margin applied to strict constraints.
pub const STRICT_MARGIN: f64 = 1e-9;

/// Targets of the general N-user problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
#[serde(bound(
    serialize = "T: Scalar + Serialize",
    deserialize = "T: Scalar + Deserialize<'de>"
))]
pub struct OptTargets<T> {
    /// Minimum `M₁` per rank; `None` (or a short list) means no requirement.
    #[serde(default)]
    pub success_targets: Vec<Option<T>>,
    #[serde(default)]
    pub delay_constrained: bool,
    /// Rank whose success probability is maximized (1-based).
    pub rank_to_maximize: usize,
}

impl<T: Scalar> OptTargets<T> {
    fn target(&self, k: usize) -> T {
        self.success_targets
            .get(k - 1)
            .copied()
            .flatten()
            .unwrap_or(T::zero())
    }
}

/// Solver outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
#[serde(bound(
    serialize = "T: Scalar + Serialize",
    deserialize = "T: Scalar + Deserialize<'de>"
))]
pub struct OptResult<T> {
    /// Optimal allocation; absent when infeasible.
    pub betas: Option<PowerAllocation<T>>,
    pub feasible: bool,
    /// `M₁,(k)` for every rank at the returned allocation.
    pub achieved: Vec<T>,
    /// Active constraints at the optimum, or the conflicting set when
    /// infeasible.
    pub binding: Vec<String>,
    /// `β_m/θ − Σ_{i<m} β_i` for the maximized rank.
    pub surrogate: Option<T>,
    /// `c_k^target` per rank; `None` when the rank has no success target.
    pub c_targets: Vec<Option<T>>,
}

impl<T: Scalar> OptResult<T> {
    fn infeasible(binding: Vec<String>, c_targets: Vec<Option<T>>) -> Self {
        Self {
            betas: None,
            feasible: false,
            achieved: Vec::new(),
            binding,
            surrogate: None,
            c_targets,
        }
    }

    /// Allocation, or all zeros when infeasible (tabular output convention).
    pub fn betas_or_zeros(&self, n: usize) -> Vec<T> {
        match &self.betas {
            Some(b) => b.betas().to_vec(),
            None => vec![T::zero(); n],
        }
    }
}

/// `M₁,(k)` of a rank whose coefficient is `c`, in product form.
pub fn success_from_c<T: Scalar>(c: T, k: usize, params: &NetworkParams<T>) -> Result<T> {
    params.check_rank(k)?;
    if c.is_infinite() {
        return Ok(T::zero());
    }
    let a = a_coefficient(MomentOrder::Real(T::one()), c, params.delta())?.re;
    let n = params.n_users;
    let mut m = T::one();
    for i in 1..=k {
        let s = T::from_count(n - i + 1);
        m *= s / (a + s);
    }
    Ok(m)
}

/// `c^target` solving `M₁,(k)(c) = target`.
///
/// The left side decreases strictly from 1 (at `c = 0`) to 0, so the root is
/// unique; it is bracketed by doubling and refined by bisection.
pub fn solve_c_target<T: Scalar>(target: T, k: usize, params: &NetworkParams<T>) -> Result<T> {
    params.validate()?;
    params.check_rank(k)?;
    if target.is_nan() || target < T::zero() {
        return Err(Error::Domain(format!(
            "success target must lie in [0, 1), got {target}"
        )));
    }
    if target == T::zero() {
        return Ok(T::infinity());
    }
    if target >= T::one() {
        return Err(Error::Unachievable {
            target: target.as_f64(),
            supremum: 1.0,
        });
    }
    let f = |c: T| -> Result<T> { Ok(success_from_c(c, k, params)? - target) };
    let mut lo = T::zero();
    let mut hi = T::one();
    while f(hi)? > T::zero() {
        lo = hi;
        hi *= T::lit(2.0);
        if !hi.is_finite() {
            return Err(Error::Unachievable {
                target: target.as_f64(),
                supremum: 1.0,
            });
        }
    }
    let rel = T::tol(1e-13);
    for _ in 0..400 {
        if hi - lo <= rel * hi {
            break;
        }
        let mid = lo + (hi - lo) * T::lit(0.5);
        if f(mid)? > T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo + (hi - lo) * T::lit(0.5))
}

/// `M₁,(k)` for every rank under `betas`.
pub fn achieved_success<T: Scalar>(
    betas: &PowerAllocation<T>,
    theta: T,
    params: &NetworkParams<T>,
) -> Result<Vec<T>> {
    (1..=params.n_users)
        .map(|k| Ok(moment_downlink(MomentOrder::Real(T::one()), k, params, betas, theta)?.re()))
        .collect()
}

/// Largest `c_k` compatible with a finite mean local delay, after the
/// interior margin.
pub fn delay_cap<T: Scalar>(k: usize, params: &NetworkParams<T>) -> T {
    let d = params.delta();
    (T::one() - d) / d * T::from_count(params.n_users - k + 1) - T::lit(STRICT_MARGIN)
}

fn require_two_users<T: Scalar>(theta: T, params: &NetworkParams<T>) -> Result<()> {
    params.validate()?;
    if params.n_users != 2 {
        return Err(Error::Domain(format!(
            "this solver is for two users, got N={}",
            params.n_users
        )));
    }
    if !(theta > T::zero()) || !theta.is_finite() {
        return Err(Error::Domain(format!(
            "threshold must be positive, got {theta}"
        )));
    }
    Ok(())
}

// Shared tail of the closed-form two-user solvers.
fn two_user_result<T: Scalar>(
    beta1: T,
    bounds: &[(T, &str)],
    active: &str,
    theta: T,
    params: &NetworkParams<T>,
    c_target: T,
) -> Result<OptResult<T>> {
    let c_targets = vec![finite_or_none(c_target), None];
    let margin = T::lit(STRICT_MARGIN);
    let violated: Vec<String> = bounds
        .iter()
        .filter(|(b, _)| !(beta1 <= *b - margin))
        .map(|(_, n)| n.to_string())
        .collect();
    if !violated.is_empty() {
        return Ok(OptResult::infeasible(violated, c_targets));
    }
    let betas = PowerAllocation::new(vec![beta1, T::one() - beta1])?;
    let achieved = achieved_success(&betas, theta, params)?;
    Ok(OptResult {
        surrogate: Some((T::one() - beta1) / theta - beta1),
        betas: Some(betas),
        feasible: true,
        achieved,
        binding: vec![active.to_string()],
        c_targets,
    })
}

fn finite_or_none<T: Scalar>(c: T) -> Option<T> {
    if c.is_finite() {
        Some(c)
    } else {
        None
    }
}

/// Two users, no delay requirement: maximize the rank-2 success probability
/// subject to `M₁,(1) ≥ target`. The optimum is `β₁ = θ / c₁^target`.
pub fn solve_p1<T: Scalar>(theta: T, target: T, params: &NetworkParams<T>) -> Result<OptResult<T>> {
    require_two_users(theta, params)?;
    let c = solve_c_target(target, 1, params)?;
    let beta1 = if c.is_infinite() {
        T::zero()
    } else {
        theta / c
    };
    let bounds = [
        (T::lit(0.5), "order(1,2)"),
        ((T::one() + theta).recip(), "decode(2)"),
    ];
    two_user_result(beta1, &bounds, "success(1)", theta, params, c)
}

/// Two users with finite mean local delay for both: as [`solve_p1`] but
/// `c₁` is additionally capped by `2(1−δ)/δ` and rank 2 must keep
/// `c₂ < (1−δ)/δ`.
pub fn solve_p2<T: Scalar>(theta: T, target: T, params: &NetworkParams<T>) -> Result<OptResult<T>> {
    require_two_users(theta, params)?;
    let c = solve_c_target(target, 1, params)?;
    let cap1 = delay_cap(1, params);
    let cap2 = delay_cap(2, params);
    let (c_eff, active) = if cap1 < c {
        (cap1, "delay(1)")
    } else {
        (c, "success(1)")
    };
    let beta1 = theta / c_eff;
    // (1 − β₁)/θ − β₁ ≥ 1/cap₂, i.e. β₁ ≤ (1 − θ/cap₂)/(1 + θ); the margin is
    // already inside cap₂, so undo the generic one applied to every bound.
    let margin = T::lit(STRICT_MARGIN);
    let bounds = [
        (T::lit(0.5), "order(1,2)"),
        (
            (T::one() - theta / cap2) / (T::one() + theta) + margin,
            "delay(2)",
        ),
    ];
    two_user_result(beta1, &bounds, active, theta, params, c)
}

/// General N-user problem as a linear program in `β`.
pub fn solve_p3<T: Scalar>(
    theta: T,
    targets: &OptTargets<T>,
    params: &NetworkParams<T>,
) -> Result<OptResult<T>> {
    params.validate()?;
    let n = params.n_users;
    if n < 2 {
        return Err(Error::Domain(
            "the allocation problem needs at least two users".into(),
        ));
    }
    if !(theta > T::zero()) || !theta.is_finite() {
        return Err(Error::Domain(format!(
            "threshold must be positive, got {theta}"
        )));
    }
    let m = targets.rank_to_maximize;
    params.check_rank(m)?;
    if targets.success_targets.len() > n {
        return Err(Error::Domain(format!(
            "{} targets for {n} users",
            targets.success_targets.len()
        )));
    }

    let inv_theta = theta.recip();
    let row = |k: usize| -> Vec<T> {
        (1..=n)
            .map(|i| match i.cmp(&k) {
                std::cmp::Ordering::Less => -T::one(),
                std::cmp::Ordering::Equal => inv_theta,
                std::cmp::Ordering::Greater => T::zero(),
            })
            .collect()
    };

    let mut constraints = Vec::new();
    let mut c_targets = Vec::with_capacity(n);
    for k in 1..=n {
        let t = targets.target(k);
        let ct = solve_c_target(t, k, params)?;
        c_targets.push(finite_or_none(ct));
        let (c_eff, name) = if targets.delay_constrained && delay_cap(k, params) < ct {
            (delay_cap(k, params), format!("delay({k})"))
        } else if t > T::zero() {
            (ct, format!("success({k})"))
        } else {
            (T::infinity(), format!("decode({k})"))
        };
        constraints.push(Constraint::new(name, row(k), Relation::Ge, c_eff.recip()));
    }
    for k in 2..=n {
        let mut c = vec![T::zero(); n];
        c[k - 2] = -T::one();
        c[k - 1] = T::one();
        constraints.push(Constraint::new(
            format!("order({},{k})", k - 1),
            c,
            Relation::Ge,
            T::zero(),
        ));
    }
    let mut first = vec![T::zero(); n];
    first[0] = T::one();
    constraints.push(Constraint::new("nonneg(1)", first, Relation::Ge, T::zero()));
    constraints.push(Constraint::new(
        "sum",
        vec![T::one(); n],
        Relation::Eq,
        T::one(),
    ));

    let objective = row(m);
    let tol = T::tol(1e-12);
    match maximize_lexmin(&objective, &constraints, tol)? {
        LpOutcome::Optimal { x, value } => {
            let betas = PowerAllocation::new(clean_simplex_point(x))?;
            let binding = constraints
                .iter()
                .filter(|c| {
                    c.relation != Relation::Eq && c.slack(betas.betas()).abs() <= T::tol(1e-9)
                })
                .map(|c| c.name.clone())
                .collect();
            let achieved = achieved_success(&betas, theta, params)?;
            Ok(OptResult {
                betas: Some(betas),
                feasible: true,
                achieved,
                binding,
                surrogate: Some(value),
                c_targets,
            })
        }
        LpOutcome::Infeasible => {
            let iis = irreducible_infeasible_subset(n, &constraints)?;
            Ok(OptResult::infeasible(iis, c_targets))
        }
        LpOutcome::Unbounded => Err(Error::Undefined("allocation program is unbounded".into())),
    }
}

// Round-off from pivoting can leave −1e-17 entries or a sum off by an ulp.
fn clean_simplex_point<T: Scalar>(mut x: Vec<T>) -> Vec<T> {
    let mut prev = T::zero();
    for v in x.iter_mut() {
        *v = v.max(prev);
        prev = *v;
    }
    let s: T = x.iter().copied().sum();
    x.iter_mut().for_each(|v| *v /= s);
    x
}
