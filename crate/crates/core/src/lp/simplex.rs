//! Dense two-phase primal simplex with bounded variables.
//!
//! Nonbasic variables rest at a finite bound; an entering variable may simply
//! flip to its opposite bound instead of pivoting. Bland's rule is used for
//! both entering and leaving choices, so the method terminates on degenerate
//! problems. Intended for small instances (tens of variables and rows).

use crate::Scalar;

use super::LpError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowKind {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row<S> {
    pub coeffs: Vec<S>,
    pub kind: RowKind,
    pub rhs: S,
}

/// `minimize c·x` subject to the rows and `lower <= x <= upper`.
/// Lower bounds must be finite; upper bounds may be `+inf`.
#[derive(Clone, Debug, PartialEq)]
pub struct Problem<S> {
    pub cost: Vec<S>,
    pub lower: Vec<S>,
    pub upper: Vec<S>,
    pub rows: Vec<Row<S>>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Outcome<S> {
    Optimal { x: Vec<S>, objective: S },
    Infeasible,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum At {
    Lower,
    Upper,
    Basic,
}

struct Tableau<S> {
    m: usize,
    /// Row-major `m x total` matrix holding `B^-1 A`.
    t: Vec<S>,
    total: usize,
    lower: Vec<S>,
    upper: Vec<S>,
    basis: Vec<usize>,
    at: Vec<At>,
    /// Values of basic variables, by row.
    beta: Vec<S>,
    tol: S,
}

impl<S: Scalar> Tableau<S> {
    fn value(&self, j: usize) -> S {
        match self.at[j] {
            At::Lower => self.lower[j],
            At::Upper => self.upper[j],
            At::Basic => {
                let r = self.basis.iter().position(|&b| b == j).expect("basic variable in basis");
                self.beta[r]
            }
        }
    }

    fn reduced_costs(&self, cost: &[S]) -> Vec<S> {
        let mut d = cost.to_vec();
        for r in 0..self.m {
            let cb = cost[self.basis[r]];
            if cb != S::zero() {
                let row = &self.t[r * self.total..(r + 1) * self.total];
                for (dj, &a) in d.iter_mut().zip(row) {
                    *dj -= cb * a;
                }
            }
        }
        d
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let n = self.total;
        let p = self.t[r * n + j];
        for k in 0..n {
            self.t[r * n + k] = self.t[r * n + k] / p;
        }
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.t[i * n + j];
            if f != S::zero() {
                for k in 0..n {
                    let v = self.t[r * n + k];
                    self.t[i * n + k] -= f * v;
                }
            }
        }
    }

    /// Runs simplex iterations for `cost` until optimal.
    fn optimize(&mut self, cost: &[S], max_iter: usize) -> Result<(), LpError> {
        let n = self.total;
        for _ in 0..max_iter {
            let d = self.reduced_costs(cost);
            // Bland: lowest-index improving variable.
            let entering = (0..n).find(|&j| {
                if self.upper[j] - self.lower[j] <= self.tol {
                    return false;
                }
                match self.at[j] {
                    At::Lower => d[j] < -self.tol,
                    At::Upper => d[j] > self.tol,
                    At::Basic => false,
                }
            });
            let Some(j) = entering else { return Ok(()) };
            let dir = if self.at[j] == At::Lower { S::one() } else { -S::one() };

            // Ratio test; Bland tie-break on the leaving variable's index.
            let mut best: Option<(S, usize, At)> = None;
            for r in 0..self.m {
                let alpha = dir * self.t[r * n + j];
                let b = self.basis[r];
                let limit = if alpha > self.tol {
                    ((self.beta[r] - self.lower[b]) / alpha, At::Lower)
                } else if alpha < -self.tol && self.upper[b].is_finite() {
                    ((self.upper[b] - self.beta[r]) / -alpha, At::Upper)
                } else {
                    continue;
                };
                let lim = limit.0.max(S::zero());
                let replace = match best {
                    None => true,
                    Some((bl, br, _)) => lim < bl || (lim == bl && b < self.basis[br]),
                };
                if replace {
                    best = Some((lim, r, limit.1));
                }
            }
            let flip = self.upper[j] - self.lower[j];
            let (step, leave) = match best {
                Some((lim, r, bound)) if lim < flip => (lim, Some((r, bound))),
                _ => (flip, None),
            };
            if step.is_infinite() {
                return Err(LpError::Unbounded);
            }
            for r in 0..self.m {
                let a = self.t[r * n + j];
                self.beta[r] -= step * dir * a;
            }
            let start = if self.at[j] == At::Lower { self.lower[j] } else { self.upper[j] };
            match leave {
                None => {
                    self.at[j] = if self.at[j] == At::Lower { At::Upper } else { At::Lower };
                }
                Some((r, bound)) => {
                    let out = self.basis[r];
                    self.at[out] = bound;
                    self.pivot(r, j);
                    self.basis[r] = j;
                    self.at[j] = At::Basic;
                    self.beta[r] = start + dir * step;
                }
            }
        }
        Err(LpError::IterationLimit(max_iter))
    }
}

pub fn solve<S: Scalar>(p: &Problem<S>) -> Result<Outcome<S>, LpError> {
    let n = p.cost.len();
    let m = p.rows.len();
    if p.lower.len() != n || p.upper.len() != n || p.rows.iter().any(|r| r.coeffs.len() != n) {
        return Err(LpError::Malformed("dimension mismatch".into()));
    }
    for j in 0..n {
        if !p.lower[j].is_finite() || p.upper[j] < p.lower[j] || p.upper[j].is_nan() {
            return Err(LpError::Malformed(format!("bad bounds on variable {j}")));
        }
    }
    let tol = S::tolerance();

    // Columns: structural, one slack per row, one artificial per row.
    let total = n + 2 * m;
    let mut lower = p.lower.clone();
    let mut upper = p.upper.clone();
    for r in &p.rows {
        lower.push(S::zero());
        upper.push(if r.kind == RowKind::Eq { S::zero() } else { S::infinity() });
    }
    lower.extend(std::iter::repeat_n(S::zero(), m));
    upper.extend(std::iter::repeat_n(S::infinity(), m));

    let mut t = vec![S::zero(); m * total];
    let mut beta = vec![S::zero(); m];
    for (i, row) in p.rows.iter().enumerate() {
        let activity: S = row.coeffs.iter().zip(&p.lower).map(|(&a, &l)| a * l).sum();
        let resid = row.rhs - activity;
        let sign = if resid < S::zero() { -S::one() } else { S::one() };
        for j in 0..n {
            t[i * total + j] = sign * row.coeffs[j];
        }
        let slack = match row.kind {
            RowKind::Le => S::one(),
            RowKind::Ge => -S::one(),
            RowKind::Eq => S::zero(),
        };
        t[i * total + n + i] = sign * slack;
        t[i * total + n + m + i] = S::one();
        beta[i] = resid.abs();
    }
    let mut at = vec![At::Lower; total];
    let basis: Vec<usize> = (0..m).map(|i| n + m + i).collect();
    for &b in &basis {
        at[b] = At::Basic;
    }
    let mut tab = Tableau { m, t, total, lower, upper, basis, at, beta, tol };
    let max_iter = 50 * (total + m + 10);

    let mut phase1 = vec![S::zero(); total];
    for c in phase1.iter_mut().skip(n + m) {
        *c = S::one();
    }
    tab.optimize(&phase1, max_iter)?;
    let infeas: S = (0..m)
        .filter(|&r| tab.basis[r] >= n + m)
        .map(|r| tab.beta[r])
        .sum();
    let scale = p
        .rows
        .iter()
        .map(|r| r.rhs.abs())
        .fold(S::one(), |a, b| a.max(b));
    if infeas > tol * scale * S::lit(10.0) {
        return Ok(Outcome::Infeasible);
    }

    // Pin artificials at zero for phase two.
    for j in n + m..total {
        tab.upper[j] = S::zero();
        if tab.at[j] == At::Upper {
            tab.at[j] = At::Lower;
        }
    }
    let mut phase2 = p.cost.clone();
    phase2.extend(std::iter::repeat_n(S::zero(), 2 * m));
    tab.optimize(&phase2, max_iter)?;

    let x: Vec<S> = (0..n)
        .map(|j| {
            let v = tab.value(j);
            // Snap round-off onto the nearest bound.
            if (v - p.lower[j]).abs() <= tol * S::lit(10.0) {
                p.lower[j]
            } else if p.upper[j].is_finite() && (v - p.upper[j]).abs() <= tol * S::lit(10.0) {
                p.upper[j]
            } else {
                v.max(p.lower[j]).min(p.upper[j])
            }
        })
        .collect();
    if x.iter().any(|v| !v.is_finite()) {
        return Err(LpError::Numerical("non-finite solution".into()));
    }
    let objective = p.cost.iter().zip(&x).map(|(&c, &v)| c * v).sum();
    Ok(Outcome::Optimal { x, objective })
}
