//! Dense two-phase primal simplex over exact rationals with Bland's
//! anti-cycling rule.
//!
//! Solves `maximize c·x` subject to `A x {≤,=} b`, `x ≥ 0`. Sized for
//! the problems in this crate: a handful of variables and rows, where a
//! full tableau with fresh reduced costs each iteration is simpler and
//! safer than factorization updates.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{LpError, Relation};

pub(crate) type Rat = BigRational;

pub(crate) struct RawConstraint {
    pub coeffs: Vec<Rat>,
    pub relation: Relation,
    pub rhs: Rat,
}

#[derive(Debug)]
pub(crate) struct Solution {
    pub value: Rat,
    pub point: Vec<Rat>,
    /// One multiplier per input row, in input order; nonnegative for
    /// `≤` rows, free for `=` rows.
    pub duals: Vec<Rat>,
}

struct Tableau {
    rows: Vec<Vec<Rat>>,
    rhs: Vec<Rat>,
    basis: Vec<usize>,
    num_vars: usize,
    num_cols: usize,
    /// Column of the slack for each input row, if any.
    slack_col: Vec<Option<usize>>,
    /// Column of the artificial for each input row, if any.
    art_col: Vec<Option<usize>>,
    /// -1 where the input row was negated to make the rhs nonnegative.
    row_sign: Vec<Rat>,
    first_art: usize,
}

pub(crate) fn solve(objective: &[Rat], constraints: &[RawConstraint]) -> Result<Solution, LpError> {
    let mut t = Tableau::new(objective.len(), constraints);

    if t.first_art < t.num_cols {
        // Phase 1: drive the artificials to zero.
        let mut cost = vec![Rat::zero(); t.num_cols];
        for c in cost.iter_mut().skip(t.first_art) {
            *c = -Rat::one();
        }
        t.optimize(&cost, t.num_cols)?;
        if t.objective_value(&cost) < Rat::zero() {
            return Err(LpError::Infeasible);
        }
        t.evict_artificials();
    }

    let mut cost = vec![Rat::zero(); t.num_cols];
    cost[..t.num_vars].clone_from_slice(objective);
    t.optimize(&cost, t.first_art)?;

    let point = t.point();
    let value = objective
        .iter()
        .zip(&point)
        .map(|(c, x)| c * x)
        .fold(Rat::zero(), |acc, v| acc + v);
    let duals = t.duals(&cost);
    Ok(Solution {
        value,
        point,
        duals,
    })
}

impl Tableau {
    fn new(num_vars: usize, constraints: &[RawConstraint]) -> Tableau {
        let m = constraints.len();
        let num_slacks = constraints
            .iter()
            .filter(|c| c.relation == Relation::Le)
            .count();
        // Rows whose slack cannot start basic (`=` rows, negated `≤`
        // rows) get an artificial column instead.
        let mut slack_col = vec![None; m];
        let mut art_col = vec![None; m];
        let mut row_sign = vec![Rat::one(); m];

        let mut rows: Vec<Vec<Rat>> = Vec::with_capacity(m);
        let mut rhs: Vec<Rat> = Vec::with_capacity(m);
        let mut basis = vec![usize::MAX; m];

        let mut next_slack = num_vars;
        let mut needs_art = Vec::new();
        for (i, c) in constraints.iter().enumerate() {
            assert_eq!(c.coeffs.len(), num_vars, "ragged constraint row");
            let negate = c.rhs.is_negative();
            if negate {
                row_sign[i] = -Rat::one();
            }
            let mut row: Vec<Rat> = c
                .coeffs
                .iter()
                .map(|v| if negate { -v } else { v.clone() })
                .collect();
            row.resize(num_vars + num_slacks, Rat::zero());
            if c.relation == Relation::Le {
                row[next_slack] = if negate { -Rat::one() } else { Rat::one() };
                slack_col[i] = Some(next_slack);
                if !negate {
                    basis[i] = next_slack;
                }
                next_slack += 1;
            }
            if basis[i] == usize::MAX {
                needs_art.push(i);
            }
            rows.push(row);
            rhs.push(if negate { -&c.rhs } else { c.rhs.clone() });
        }

        let first_art = num_vars + num_slacks;
        let num_cols = first_art + needs_art.len();
        for row in &mut rows {
            row.resize(num_cols, Rat::zero());
        }
        for (k, &i) in needs_art.iter().enumerate() {
            let col = first_art + k;
            rows[i][col] = Rat::one();
            art_col[i] = Some(col);
            basis[i] = col;
        }

        Tableau {
            rows,
            rhs,
            basis,
            num_vars,
            num_cols,
            slack_col,
            art_col,
            row_sign,
            first_art,
        }
    }

    fn reduced_cost(&self, cost: &[Rat], col: usize) -> Rat {
        let mut z = -&cost[col];
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            if !cost[b].is_zero() && !row[col].is_zero() {
                z += &cost[b] * &row[col];
            }
        }
        z
    }

    fn objective_value(&self, cost: &[Rat]) -> Rat {
        self.basis
            .iter()
            .zip(&self.rhs)
            .map(|(&b, v)| &cost[b] * v)
            .fold(Rat::zero(), |acc, v| acc + v)
    }

    /// Bland's rule: entering column is the lowest-index one with a
    /// negative reduced cost among columns `< col_limit`; the leaving
    /// row breaks ratio ties by lowest basic column index.
    fn optimize(&mut self, cost: &[Rat], col_limit: usize) -> Result<(), LpError> {
        // Bland's rule cannot cycle; the cap is a defect detector only.
        for _ in 0..100_000 {
            // Basic columns have reduced cost exactly zero, so they are
            // skipped without an explicit basis check.
            let entering =
                (0..col_limit).find(|&j| self.reduced_cost(cost, j).is_negative());
            let Some(e) = entering else {
                return Ok(());
            };
            let mut leave: Option<(usize, Rat)> = None;
            for i in 0..self.rows.len() {
                if self.rows[i][e].is_positive() {
                    let ratio = &self.rhs[i] / &self.rows[i][e];
                    let better = match &leave {
                        None => true,
                        Some((r, best)) => {
                            ratio < *best || (ratio == *best && self.basis[i] < self.basis[*r])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((r, _)) = leave else {
                return Err(LpError::Unbounded);
            };
            self.pivot(r, e);
        }
        Err(LpError::PivotLimit)
    }

    fn pivot(&mut self, r: usize, e: usize) {
        let p = self.rows[r][e].clone();
        for v in self.rows[r].iter_mut() {
            *v /= &p;
        }
        self.rhs[r] /= &p;
        let pivot_row = self.rows[r].clone();
        let pivot_rhs = self.rhs[r].clone();
        for i in 0..self.rows.len() {
            if i == r || self.rows[i][e].is_zero() {
                continue;
            }
            let factor = self.rows[i][e].clone();
            for (v, pv) in self.rows[i].iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &factor * pv;
                }
            }
            self.rhs[i] -= &factor * &pivot_rhs;
        }
        self.basis[r] = e;
    }

    /// After phase 1, pivot zero-level artificials out of the basis
    /// where possible. Rows that cannot be pivoted are redundant: their
    /// artificial stays basic at zero and no real column can change it.
    fn evict_artificials(&mut self) {
        for r in 0..self.rows.len() {
            if self.basis[r] < self.first_art {
                continue;
            }
            let col = (0..self.first_art).find(|&j| !self.rows[r][j].is_zero());
            if let Some(e) = col {
                self.pivot(r, e);
            }
        }
    }

    fn point(&self) -> Vec<Rat> {
        let mut x = vec![Rat::zero(); self.num_vars];
        for (&b, v) in self.basis.iter().zip(&self.rhs) {
            if b < self.num_vars {
                x[b] = v.clone();
            }
        }
        x
    }

    fn duals(&self, cost: &[Rat]) -> Vec<Rat> {
        (0..self.slack_col.len())
            .map(|i| match (self.slack_col[i], self.art_col[i]) {
                (Some(col), _) => self.reduced_cost(cost, col),
                (None, Some(col)) => &self.row_sign[i] * self.reduced_cost(cost, col),
                (None, None) => unreachable!("every row has a slack or an artificial"),
            })
            .collect()
    }
}
