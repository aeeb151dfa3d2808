//! Brute-force reference maximizer: enumerate every basic point of an
//! LP and keep the best feasible one.
//!
//! Independent of the simplex path on purpose: it solves n×n linear
//! systems over all choices of n active constraints (rows plus the
//! implicit `x ≥ 0` bounds), so it is exponentially slower but has no
//! pivoting logic to share bugs with. Only meaningful for bounded
//! feasible programs, where some vertex attains the optimum.

use itertools::Itertools;
use num_traits::Zero;

use super::simplex::Rat;
use super::{LinearProgram, Relation};
use crate::scalar::Scalar;

struct Row {
    coeffs: Vec<Rat>,
    rhs: Rat,
    relation: Relation,
}

/// Exact maximum of the objective over all feasible vertices, or
/// `None` when no choice of active constraints yields a feasible point
/// (the program is infeasible, or has no vertex at all).
pub fn maximize(lp: &LinearProgram) -> Option<Scalar> {
    let n = lp.objective.len();
    let objective: Vec<Rat> = lp.objective.iter().map(Scalar::to_rational).collect();
    let rows: Vec<Row> = lp
        .constraints
        .iter()
        .map(|c| Row {
            coeffs: c.coeffs.iter().map(Scalar::to_rational).collect(),
            rhs: c.rhs.to_rational(),
            relation: c.relation,
        })
        .collect();

    // Candidate active sets draw from the rows and the n bound planes
    // x_j = 0 (encoded as indices rows.len()..rows.len()+n).
    let total = rows.len() + n;
    let mut best: Option<Rat> = None;
    for active in (0..total).combinations(n) {
        let mut matrix: Vec<Vec<Rat>> = Vec::with_capacity(n);
        let mut rhs: Vec<Rat> = Vec::with_capacity(n);
        for &k in &active {
            if k < rows.len() {
                matrix.push(rows[k].coeffs.clone());
                rhs.push(rows[k].rhs.clone());
            } else {
                let mut unit = vec![Rat::zero(); n];
                unit[k - rows.len()] = Rat::from_integer(1.into());
                matrix.push(unit);
                rhs.push(Rat::zero());
            }
        }
        let Some(point) = solve_square(matrix, rhs) else {
            continue;
        };
        if !feasible(&rows, &point) {
            continue;
        }
        let value: Rat = objective
            .iter()
            .zip(&point)
            .map(|(c, x)| c * x)
            .fold(Rat::zero(), |acc, v| acc + v);
        if best.as_ref().is_none_or(|b| value > *b) {
            best = Some(value);
        }
    }
    best.map(Scalar::Exact)
}

fn feasible(rows: &[Row], point: &[Rat]) -> bool {
    if point.iter().any(|x| *x < Rat::zero()) {
        return false;
    }
    rows.iter().all(|row| {
        let lhs: Rat = row
            .coeffs
            .iter()
            .zip(point)
            .map(|(a, x)| a * x)
            .fold(Rat::zero(), |acc, v| acc + v);
        match row.relation {
            Relation::Le => lhs <= row.rhs,
            Relation::Eq => lhs == row.rhs,
        }
    })
}

/// Exact Gaussian elimination; `None` when the system is singular.
fn solve_square(mut m: Vec<Vec<Rat>>, mut b: Vec<Rat>) -> Option<Vec<Rat>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, pivot);
        b.swap(col, pivot);
        let p = m[col][col].clone();
        for v in m[col].iter_mut() {
            *v /= &p;
        }
        b[col] /= &p;
        let pivot_row = m[col].clone();
        let pivot_b = b[col].clone();
        for r in 0..n {
            if r == col || m[r][col].is_zero() {
                continue;
            }
            let f = m[r][col].clone();
            for (v, pv) in m[r].iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
            b[r] -= &f * &pivot_b;
        }
    }
    Some(b)
}
