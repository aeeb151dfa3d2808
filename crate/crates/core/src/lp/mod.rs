//! Branch-LP maximizer over the equilibrium condition system.
//!
//! The necessary conditions an equilibrium decomposition must satisfy
//! are linear in the eight group loads once two kinds of choices are
//! fixed: whether each of a1, a2, c1, c2 is zero or carries its
//! single-deviation constraint, and which side of each coalition-swap
//! disjunction holds. Enumerating those choices gives a family of small
//! linear programs whose union of feasible regions contains every true
//! equilibrium decomposition, so the maximum of `ℓ1` over all branches
//! is a certified upper bound on the anarchy ratio, and the certificate
//! instances show it is attained.
//!
//! Everything is solved in exact rational arithmetic; float inputs are
//! converted losslessly (every finite `f64` is a dyadic rational).

mod simplex;
pub mod vertex;

use num_traits::{One, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::scalar::Scalar;

pub(crate) use simplex::Rat;

/// The eight decomposition variables, in canonical order.
pub const VAR_NAMES: [&str; 8] = ["a1", "a2", "b1", "b2", "c1", "c2", "d1", "d2"];

const A1: usize = 0;
const A2: usize = 1;
const B1: usize = 2;
const B2: usize = 3;
const C1: usize = 4;
const C2: usize = 5;
const D1: usize = 6;
const D2: usize = 7;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LpError {
    #[error("linear program is infeasible (construction bug for this system)")]
    Infeasible,
    #[error("linear program is unbounded (construction bug for this system)")]
    Unbounded,
    #[error("pivot limit reached")]
    PivotLimit,
    #[error("slowdown factor must be ≥ 1")]
    SBelowOne,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
}

/// One labeled linear constraint.
#[derive(Clone, Debug)]
pub struct Constraint {
    pub label: String,
    pub coeffs: Vec<Scalar>,
    pub relation: Relation,
    pub rhs: Scalar,
}

/// Maximize a linear objective over labeled constraints; all variables
/// carry implicit `≥ 0` bounds. The systems built from the equilibrium
/// conditions always have the eight group-load variables of
/// [`VAR_NAMES`] and objective `ℓ1 = a1 + a2 + c1 + c2`.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    pub objective: Vec<Scalar>,
    pub constraints: Vec<Constraint>,
}

impl LinearProgram {
    /// Exact feasibility of a candidate point (including the implicit
    /// nonnegativity bounds).
    pub fn admits(&self, point: &[Scalar]) -> bool {
        if point.len() != self.objective.len() {
            return false;
        }
        if point.iter().any(|v| v.to_rational() < Rat::zero()) {
            return false;
        }
        self.constraints.iter().all(|c| {
            let lhs: Rat = c
                .coeffs
                .iter()
                .zip(point)
                .map(|(a, x)| a.to_rational() * x.to_rational())
                .fold(Rat::zero(), |acc, v| acc + v);
            let rhs = c.rhs.to_rational();
            match c.relation {
                Relation::Le => lhs <= rhs,
                Relation::Eq => lhs == rhs,
            }
        })
    }
}

/// Which equilibrium notion the condition system describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Strong equilibria: adds the minimum-load bound and the five
    /// coalition-swap disjunctions.
    StrongNash,
    /// Plain Nash: optimal-load bounds and single deviations only.
    Nash,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Zero,
    Active,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    First,
    Second,
}

/// One branch: a zero/active choice for each of a1, a2, c1, c2 and a
/// side choice for each of the five swap disjunctions. Nash mode uses
/// the sign choices only.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BranchSpec {
    pub signs: [Sign; 4],
    pub swaps: [Side; 5],
}

/// All branches of a mode: 2⁴ sign patterns, times 2⁵ swap-side
/// choices for strong equilibria.
pub fn branches(mode: Mode) -> Vec<BranchSpec> {
    let mut out = Vec::new();
    for signs_bits in 0..16u32 {
        let signs = std::array::from_fn(|i| {
            if signs_bits >> i & 1 == 1 {
                Sign::Active
            } else {
                Sign::Zero
            }
        });
        match mode {
            Mode::Nash => out.push(BranchSpec {
                signs,
                swaps: [Side::First; 5],
            }),
            Mode::StrongNash => {
                for swap_bits in 0..32u32 {
                    let swaps = std::array::from_fn(|i| {
                        if swap_bits >> i & 1 == 1 {
                            Side::Second
                        } else {
                            Side::First
                        }
                    });
                    out.push(BranchSpec { signs, swaps });
                }
            }
        }
    }
    out
}

struct RatRow {
    label: String,
    coeffs: [Rat; 8],
    relation: Relation,
    rhs: Rat,
}

fn l1_minus_l2() -> [Rat; 8] {
    let mut v: [Rat; 8] = std::array::from_fn(|_| Rat::zero());
    for i in [A1, A2, C1, C2] {
        v[i] = Rat::one();
    }
    for i in [B1, B2, D1, D2] {
        v[i] = -Rat::one();
    }
    v
}

fn negated(v: &[Rat; 8]) -> [Rat; 8] {
    std::array::from_fn(|i| -&v[i])
}

fn build_rows(s: &Rat, mode: Mode, branch: &BranchSpec) -> Vec<RatRow> {
    let inv_s = Rat::one() / s;
    let zero = || -> [Rat; 8] { std::array::from_fn(|_| Rat::zero()) };
    let le = |label: &str, coeffs: [Rat; 8], rhs: Rat| RatRow {
        label: label.to_string(),
        coeffs,
        relation: Relation::Le,
        rhs,
    };
    let mut rows = Vec::new();

    // Optimal-load budgets: the reference loads after the moved groups
    // swap are at most the (normalized) optimum.
    let mut l1_star = zero();
    l1_star[A1] = Rat::one();
    l1_star[B2] = inv_s.clone();
    l1_star[C2] = Rat::one();
    l1_star[D1] = s.clone();
    rows.push(le("l1_star_le_1", l1_star, Rat::one()));

    let mut l2_star = zero();
    l2_star[A2] = inv_s.clone();
    l2_star[B1] = Rat::one();
    l2_star[C1] = s.clone();
    l2_star[D2] = Rat::one();
    rows.push(le("l2_star_le_1", l2_star, Rat::one()));

    // Machine 1 carries the makespan.
    rows.push(le("l2_le_l1", negated(&l1_minus_l2()), Rat::zero()));

    if mode == Mode::StrongNash {
        let mut l2 = zero();
        for i in [B1, B2, D1, D2] {
            l2[i] = Rat::one();
        }
        rows.push(le("l2_le_1", l2, Rat::one()));
    }

    // Sign pattern: each of a1, a2, c1, c2 is either pinned to zero or
    // keeps its single-job deviation refusal.
    let singles = [(A1, "a1"), (A2, "a2"), (C1, "c1"), (C2, "c2")];
    for (k, (var, name)) in singles.into_iter().enumerate() {
        match branch.signs[k] {
            Sign::Zero => {
                let mut coeffs = zero();
                coeffs[var] = Rat::one();
                rows.push(RatRow {
                    label: format!("{name}_zero"),
                    coeffs,
                    relation: Relation::Eq,
                    rhs: Rat::zero(),
                });
            }
            Sign::Active => {
                let mut coeffs = l1_minus_l2();
                // Cost of the deviating group on machine 2: off-favorite
                // groups divide by s, favorite groups multiply.
                match var {
                    A1 | A2 => coeffs[var] -= &inv_s,
                    _ => coeffs[var] -= s,
                }
                rows.push(le(&format!("single_{name}"), coeffs, Rat::zero()));
            }
        }
    }

    if mode == Mode::StrongNash {
        // Five swap disjunctions; exactly one side is imposed per branch.
        let swaps: [(&str, [Rat; 8], [Rat; 8]); 5] = {
            let pair_a2_b2 = {
                let mut first = l1_minus_l2();
                first[B2] += Rat::one();
                first[A2] -= &inv_s;
                let mut second = negated(&l1_minus_l2());
                second[A2] += Rat::one();
                second[B2] -= &inv_s;
                ("swap_a2_b2", first, second)
            };
            let pair_a2_d1 = {
                let mut first = l1_minus_l2();
                first[D1] += Rat::one();
                first[A2] -= &inv_s;
                let mut second = negated(&l1_minus_l2());
                second[A2] += Rat::one();
                second[D1] -= s;
                ("swap_a2_d1", first, second)
            };
            let pair_a2_b1d2 = {
                let mut first = l1_minus_l2();
                first[B1] += Rat::one();
                first[D2] += Rat::one();
                first[A2] -= &inv_s;
                let mut second = negated(&l1_minus_l2());
                second[A2] += Rat::one();
                second[B1] -= &inv_s;
                second[D2] -= s;
                ("swap_a2_b1d2", first, second)
            };
            let pair_a2c2_m2 = {
                let mut first = zero();
                for i in [A1, A2, C1, C2] {
                    first[i] = Rat::one();
                }
                first[A2] -= &inv_s;
                first[C2] -= s;
                let mut second = zero();
                for i in [B1, B2, D1, D2] {
                    second[i] = Rat::one();
                }
                second[A1] -= Rat::one();
                second[C1] -= Rat::one();
                second[B1] -= &inv_s;
                second[B2] -= &inv_s;
                second[D1] -= s;
                second[D2] -= s;
                ("swap_a2c2_m2", first, second)
            };
            let pair_m1_m2 = {
                let mut first = zero();
                for i in [A1, A2, C1, C2] {
                    first[i] = Rat::one();
                }
                first[A1] -= &inv_s;
                first[A2] -= &inv_s;
                first[C1] -= s;
                first[C2] -= s;
                let mut second = zero();
                for i in [B1, B2, D1, D2] {
                    second[i] = Rat::one();
                }
                second[B1] -= &inv_s;
                second[B2] -= &inv_s;
                second[D1] -= s;
                second[D2] -= s;
                ("swap_m1_m2", first, second)
            };
            [pair_a2_b2, pair_a2_d1, pair_a2_b1d2, pair_a2c2_m2, pair_m1_m2]
        };
        for ((name, first, second), side) in swaps.into_iter().zip(branch.swaps) {
            let (coeffs, tag) = match side {
                Side::First => (first, "first"),
                Side::Second => (second, "second"),
            };
            rows.push(le(&format!("{name}_{tag}"), coeffs, Rat::zero()));
        }
    }

    rows
}

/// The branch LP over the condition system at slowdown `s`.
pub fn build_system(s: &Scalar, mode: Mode, branch: &BranchSpec) -> LinearProgram {
    let sr = s.to_rational();
    let rows = build_rows(&sr, mode, branch);
    let mut objective = vec![Scalar::zero(); 8];
    for i in [A1, A2, C1, C2] {
        objective[i] = Scalar::one();
    }
    LinearProgram {
        objective,
        constraints: rows
            .into_iter()
            .map(|r| Constraint {
                label: r.label,
                coeffs: r.coeffs.into_iter().map(Scalar::Exact).collect(),
                relation: r.relation,
                rhs: Scalar::Exact(r.rhs),
            })
            .collect(),
    }
}

/// Exact optimum of a branch LP: value, maximizing point, and dual
/// multipliers (one per constraint, in constraint order).
#[derive(Clone, Debug)]
pub struct LpResult {
    pub optimum: Scalar,
    pub point: Vec<Scalar>,
    pub duals: Vec<Scalar>,
}

pub fn solve_lp(lp: &LinearProgram) -> Result<LpResult, LpError> {
    let objective: Vec<Rat> = lp.objective.iter().map(Scalar::to_rational).collect();
    let constraints: Vec<simplex::RawConstraint> = lp
        .constraints
        .iter()
        .map(|c| simplex::RawConstraint {
            coeffs: c.coeffs.iter().map(Scalar::to_rational).collect(),
            relation: c.relation,
            rhs: c.rhs.to_rational(),
        })
        .collect();
    let sol = simplex::solve(&objective, &constraints)?;
    Ok(LpResult {
        optimum: Scalar::Exact(sol.value),
        point: sol.point.into_iter().map(Scalar::Exact).collect(),
        duals: sol.duals.into_iter().map(Scalar::Exact).collect(),
    })
}

/// Maximum of `ℓ1` over every branch of the mode. The result
/// upper-bounds the strong price of anarchy (StrongNash mode) or the
/// price of anarchy (Nash mode) at `s`, and the certificate instances
/// attain it.
pub fn max_l1(s: &Scalar, mode: Mode) -> Result<Scalar, LpError> {
    if *s < Scalar::one() {
        return Err(LpError::SBelowOne);
    }
    let sr = s.to_rational();
    let solve_branch = |mode: Mode, branch: &BranchSpec| -> Result<Rat, LpError> {
        let rows = build_rows(&sr, mode, branch);
        let mut objective = vec![Rat::zero(); 8];
        for i in [A1, A2, C1, C2] {
            objective[i] = Rat::one();
        }
        let constraints: Vec<simplex::RawConstraint> = rows
            .into_iter()
            .map(|r| simplex::RawConstraint {
                coeffs: r.coeffs.to_vec(),
                relation: r.relation,
                rhs: r.rhs,
            })
            .collect();
        Ok(simplex::solve(&objective, &constraints)?.value)
    };

    // Solve the 16 sign-pattern relaxations first; in Nash mode they
    // are the branches themselves, in StrongNash mode they bound their
    // 32 children, which prunes most of the 512 branches.
    let sign_patterns: Vec<BranchSpec> = branches(Mode::Nash);
    let mut relaxed: Vec<(Rat, BranchSpec)> = sign_patterns
        .par_iter()
        .map(|b| solve_branch(Mode::Nash, b).map(|v| (v, *b)))
        .collect::<Result<_, _>>()?;
    relaxed.sort_by(|a, b| b.0.cmp(&a.0));

    let mut best: Option<Rat> = None;
    match mode {
        Mode::Nash => best = relaxed.into_iter().map(|(v, _)| v).reduce(Rat::max),
        Mode::StrongNash => {
            for (bound, pattern) in relaxed {
                if best.as_ref().is_some_and(|b| bound <= *b) {
                    continue;
                }
                let local = (0..32u32)
                    .into_par_iter()
                    .map(|swap_bits| {
                        let swaps = std::array::from_fn(|i| {
                            if swap_bits >> i & 1 == 1 {
                                Side::Second
                            } else {
                                Side::First
                            }
                        });
                        solve_branch(
                            Mode::StrongNash,
                            &BranchSpec {
                                signs: pattern.signs,
                                swaps,
                            },
                        )
                    })
                    .try_reduce_with(|a, b| Ok(a.max(b)))
                    .expect("32 branches")?;
                if best.as_ref().is_none_or(|b| local > *b) {
                    best = Some(local);
                }
            }
        }
    }
    let best = best.expect("at least one branch");
    Ok(if s.is_exact() {
        Scalar::Exact(best)
    } else {
        Scalar::Float(Scalar::Exact(best).to_f64())
    })
}

/// Dual multipliers of one branch, labeled by constraint. The weights
/// reproduce the branch bound as a nonnegative combination of the
/// constraints (diagnostic: duals of degenerate optima are not unique).
#[derive(Clone, Debug)]
pub struct DualReport {
    pub optimum: Scalar,
    pub weights: Vec<(String, Scalar)>,
}

pub fn dual_weights(s: &Scalar, mode: Mode, branch: &BranchSpec) -> Result<DualReport, LpError> {
    let lp = build_system(s, mode, branch);
    let result = solve_lp(&lp)?;
    Ok(DualReport {
        optimum: result.optimum,
        weights: lp
            .constraints
            .iter()
            .map(|c| c.label.clone())
            .zip(result.duals)
            .collect(),
    })
}
