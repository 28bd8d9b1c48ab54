//! Small dense two-phase simplex for problems with a handful of variables.
//!
//! Variables are free; sign restrictions are ordinary named constraints so
//! that they can take part in infeasibility diagnosis. Pivoting follows
//! Bland's rule (lowest eligible index for both entering and leaving
//! variables), which rules out cycling on degenerate vertices.

use crate::error::{Error, Result};
use crate::Scalar;

/// Relation of a linear constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

/// `coeffs · x (rel) rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint<T> {
    pub name: String,
    pub coeffs: Vec<T>,
    pub relation: Relation,
    pub rhs: T,
}

impl<T: Scalar> Constraint<T> {
    pub fn new(name: impl Into<String>, coeffs: Vec<T>, relation: Relation, rhs: T) -> Self {
        Self {
            name: name.into(),
            coeffs,
            relation,
            rhs,
        }
    }

    /// Signed slack: non-negative when satisfied (for `Eq`, minus the gap).
    pub fn slack(&self, x: &[T]) -> T {
        let lhs: T = self.coeffs.iter().zip(x).map(|(a, v)| *a * *v).sum();
        match self.relation {
            Relation::Le => self.rhs - lhs,
            Relation::Ge => lhs - self.rhs,
            Relation::Eq => -(lhs - self.rhs).abs(),
        }
    }
}

/// Outcome of [`maximize`].
#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome<T> {
    Optimal { x: Vec<T>, value: T },
    Infeasible,
    Unbounded,
}

/// Maximize `objective · x` over free `x` subject to `constraints`.
pub fn maximize<T: Scalar>(objective: &[T], constraints: &[Constraint<T>]) -> Result<LpOutcome<T>> {
    let n = objective.len();
    if let Some(c) = constraints.iter().find(|c| c.coeffs.len() != n) {
        return Err(Error::Domain(format!(
            "constraint {} has {} coefficients, expected {n}",
            c.name,
            c.coeffs.len()
        )));
    }
    Tableau::build(objective, constraints).solve()
}

/// Lexicographically smallest optimal point: the optimum of `objective` is
/// fixed (within `tol`), then `x₀`, `x₁`, … are minimized in turn.
pub fn maximize_lexmin<T: Scalar>(
    objective: &[T],
    constraints: &[Constraint<T>],
    tol: T,
) -> Result<LpOutcome<T>> {
    let (mut x, value) = match maximize(objective, constraints)? {
        LpOutcome::Optimal { x, value } => (x, value),
        other => return Ok(other),
    };
    let mut pinned = constraints.to_vec();
    pinned.push(Constraint::new(
        "objective",
        objective.to_vec(),
        Relation::Ge,
        value - tol,
    ));
    let pin = T::epsilon() * T::lit(64.0);
    for i in 0..objective.len() {
        let mut unit = vec![T::zero(); objective.len()];
        unit[i] = -T::one();
        match maximize(&unit, &pinned)? {
            LpOutcome::Optimal { x: xi, .. } => {
                let mut fix = vec![T::zero(); objective.len()];
                fix[i] = T::one();
                pinned.push(Constraint::new(
                    format!("lex{i}"),
                    fix,
                    Relation::Le,
                    xi[i] + pin,
                ));
                x = xi;
            }
            // Numerical loss of the pinned face; keep the last good point.
            _ => break,
        }
    }
    let value = objective.iter().zip(&x).map(|(a, v)| *a * *v).sum();
    Ok(LpOutcome::Optimal { x, value })
}

/// Deletion filter: a subset of constraint names that is infeasible on its
/// own but becomes feasible when any single member is dropped.
pub fn irreducible_infeasible_subset<T: Scalar>(
    n: usize,
    constraints: &[Constraint<T>],
) -> Result<Vec<String>> {
    let zero = vec![T::zero(); n];
    let infeasible = |set: &[Constraint<T>]| -> Result<bool> {
        Ok(matches!(maximize(&zero, set)?, LpOutcome::Infeasible))
    };
    if !infeasible(constraints)? {
        return Err(Error::Domain("constraint set is feasible".into()));
    }
    let mut kept: Vec<Constraint<T>> = constraints.to_vec();
    let mut i = 0;
    while i < kept.len() {
        let mut trial = kept.clone();
        trial.remove(i);
        if infeasible(&trial)? {
            kept = trial;
        } else {
            i += 1;
        }
    }
    Ok(kept.into_iter().map(|c| c.name).collect())
}

struct Tableau<T> {
    // rows × (cols + 1); last column is the right-hand side
    a: Vec<Vec<T>>,
    basis: Vec<usize>,
    cols: usize,
    n_struct: usize,
    artificial_from: usize,
    objective: Vec<T>,
    eps: T,
}

impl<T: Scalar> Tableau<T> {
    fn build(objective: &[T], constraints: &[Constraint<T>]) -> Self {
        let n = objective.len();
        let n_struct = 2 * n;
        let m = constraints.len();
        let n_slack = constraints
            .iter()
            .filter(|c| c.relation != Relation::Eq)
            .count();
        let artificial_from = n_struct + n_slack;
        let cols = artificial_from + m;
        let mut a = vec![vec![T::zero(); cols + 1]; m];
        let mut basis = vec![0; m];
        let mut slack = n_struct;
        for (r, c) in constraints.iter().enumerate() {
            let flip = c.rhs < T::zero();
            let s = if flip { -T::one() } else { T::one() };
            for j in 0..n {
                a[r][2 * j] = s * c.coeffs[j];
                a[r][2 * j + 1] = -s * c.coeffs[j];
            }
            a[r][cols] = s * c.rhs;
            let rel = match (c.relation, flip) {
                (Relation::Le, true) => Relation::Ge,
                (Relation::Ge, true) => Relation::Le,
                (r, _) => r,
            };
            match rel {
                Relation::Le => {
                    a[r][slack] = T::one();
                    slack += 1;
                }
                Relation::Ge => {
                    a[r][slack] = -T::one();
                    slack += 1;
                }
                Relation::Eq => {}
            }
            // Every row starts on its artificial; cheap and uniform.
            a[r][artificial_from + r] = T::one();
            basis[r] = artificial_from + r;
        }
        let mut obj = vec![T::zero(); cols];
        for j in 0..n {
            obj[2 * j] = objective[j];
            obj[2 * j + 1] = -objective[j];
        }
        let scale = constraints
            .iter()
            .flat_map(|c| c.coeffs.iter().copied().chain(std::iter::once(c.rhs)))
            .fold(T::one(), |m, v| m.max(v.abs()));
        Self {
            a,
            basis,
            cols,
            n_struct,
            artificial_from,
            objective: obj,
            eps: T::epsilon() * T::lit(1e3) * scale,
        }
    }

    fn solve(mut self) -> Result<LpOutcome<T>> {
        // Phase I: maximize −Σ artificials.
        let phase1: Vec<T> = (0..self.cols)
            .map(|j| {
                if j >= self.artificial_from {
                    -T::one()
                } else {
                    T::zero()
                }
            })
            .collect();
        self.run(&phase1, self.cols)?;
        if self.value(&phase1) < -self.eps * T::lit(10.0) {
            return Ok(LpOutcome::Infeasible);
        }
        self.drive_out_artificials();
        // Phase II over structural and slack columns only.
        let objective = self.objective.clone();
        if !self.run(&objective, self.artificial_from)? {
            return Ok(LpOutcome::Unbounded);
        }
        let n = self.n_struct / 2;
        let mut x = vec![T::zero(); n];
        for (r, &b) in self.basis.iter().enumerate() {
            if b < self.n_struct {
                let v = self.a[r][self.cols];
                if b % 2 == 0 {
                    x[b / 2] += v;
                } else {
                    x[b / 2] -= v;
                }
            }
        }
        let value = self.value(&objective);
        Ok(LpOutcome::Optimal { x, value })
    }

    fn value(&self, obj: &[T]) -> T {
        self.basis
            .iter()
            .enumerate()
            .map(|(r, &b)| obj[b] * self.a[r][self.cols])
            .sum()
    }

    fn reduced_cost(&self, obj: &[T], j: usize) -> T {
        let mut z = obj[j];
        for (r, &b) in self.basis.iter().enumerate() {
            z -= obj[b] * self.a[r][j];
        }
        z
    }

    // Returns false when the objective is unbounded.
    fn run(&mut self, obj: &[T], allowed: usize) -> Result<bool> {
        let limit = 50 * (self.cols + self.a.len() + 10);
        for _ in 0..limit {
            let entering = (0..allowed)
                .find(|&j| !self.basis.contains(&j) && self.reduced_cost(obj, j) > self.eps);
            let Some(e) = entering else { return Ok(true) };
            let mut leave: Option<(usize, T)> = None;
            for r in 0..self.a.len() {
                let p = self.a[r][e];
                if p > self.eps {
                    let ratio = self.a[r][self.cols] / p;
                    leave = match leave {
                        None => Some((r, ratio)),
                        Some((lr, lv)) => {
                            if ratio < lv - self.eps
                                || ((ratio - lv).abs() <= self.eps
                                    && self.basis[r] < self.basis[lr])
                            {
                                Some((r, ratio))
                            } else {
                                Some((lr, lv))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = leave else {
                return Ok(false);
            };
            self.pivot(r, e);
        }
        Err(Error::NoConvergence {
            what: "simplex",
            partial: f64::NAN,
            terms: limit,
        })
    }

    fn pivot(&mut self, r: usize, e: usize) {
        let p = self.a[r][e];
        for v in self.a[r].iter_mut() {
            *v /= p;
        }
        let row = self.a[r].clone();
        for (i, line) in self.a.iter_mut().enumerate() {
            if i != r {
                let f = line[e];
                if f != T::zero() {
                    for (v, w) in line.iter_mut().zip(&row) {
                        *v -= f * *w;
                    }
                }
            }
        }
        self.basis[r] = e;
    }

    // Artificials left in the basis at level zero are pivoted out where a
    // non-artificial column allows it; otherwise the row is redundant.
    fn drive_out_artificials(&mut self) {
        for r in 0..self.a.len() {
            if self.basis[r] >= self.artificial_from {
                if let Some(j) = (0..self.artificial_from).find(|&j| self.a[r][j].abs() > self.eps)
                {
                    self.pivot(r, j);
                }
            }
        }
    }
}
