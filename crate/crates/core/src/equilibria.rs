//! Exact detection of pure Nash and strong Nash equilibria by exhaustive
//! unilateral and coalitional deviation checking.
//!
//! With two machines, changing strategy means switching machines, so a
//! deviation is fully described by the set of switching jobs. All members
//! of a coalition that leave the same machine share the same cost before
//! and after the switch, which makes checking a coalition O(|J|).
//!
//! Internally all processing times of an exact instance are scaled by a
//! common denominator to integers, so the hot loops compare `BigInt`
//! sums instead of reducing fractions. Instances carrying floats fall
//! back to `f64` with a relative strictness tolerance.

use std::collections::BTreeSet;
use std::ops::{AddAssign, SubAssign};

use itertools::Itertools;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::model::{machine_loads, makespan, processing_time, Allocation, Instance, Machine, ModelError};
use crate::scalar::{Scalar, DEFAULT_REL_TOL};
use crate::Caps;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EquilibriaError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{jobs} jobs exceed the coalition-search cap of {cap}")]
    CapExceeded { jobs: usize, cap: usize },
    #[error("job index {index} out of range for {len} jobs")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("coalition is empty")]
    EmptyCoalition,
    #[error("no pure Nash equilibrium found")]
    NoNashFound,
    #[error("no strong equilibrium found")]
    NoStrongEquilibrium,
    #[error("ratio undefined: optimum is zero")]
    UndefinedRatio,
}

/// A set of deviating jobs (0-based indices into the instance job list).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coalition {
    pub members: BTreeSet<usize>,
}

impl Coalition {
    pub fn new<I: IntoIterator<Item = usize>>(members: I) -> Coalition {
        Coalition {
            members: members.into_iter().collect(),
        }
    }
}

/// Knobs for the exhaustive analysis.
#[derive(Clone, Copy, Debug)]
pub struct Options {
    pub caps: Caps,
    /// Relative tolerance for strict improvement when the instance
    /// carries floats; exact instances compare exactly.
    pub rel_tol: f64,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            caps: Caps::default(),
            rel_tol: DEFAULT_REL_TOL,
        }
    }
}

/// Everything `analyze` finds on one instance.
#[derive(Clone, Debug)]
pub struct EquilibriumReport {
    pub nash_allocations: Vec<Allocation>,
    pub strong_allocations: Vec<Allocation>,
    pub opt: Scalar,
    pub worst_ne_makespan: Scalar,
    pub worst_se_makespan: Scalar,
}

/// Cost of job `j` under `x`: the load of the machine it chose.
pub fn job_cost(inst: &Instance, x: &Allocation, j: usize) -> Result<Scalar, EquilibriaError> {
    if j >= inst.len() {
        return Err(EquilibriaError::IndexOutOfRange {
            index: j,
            len: inst.len(),
        });
    }
    let (l1, l2) = machine_loads(inst, x)?;
    Ok(match x.choice(j) {
        Machine::M1 => l1,
        Machine::M2 => l2,
    })
}

/// Switches every coalition member to the other machine.
pub fn deviate(x: &Allocation, coalition: &Coalition) -> Result<Allocation, EquilibriaError> {
    if coalition.members.is_empty() {
        return Err(EquilibriaError::EmptyCoalition);
    }
    let mut moved = x.clone();
    for &j in &coalition.members {
        if j >= x.len() {
            return Err(EquilibriaError::IndexOutOfRange {
                index: j,
                len: x.len(),
            });
        }
        moved.set(j, x.choice(j).other());
    }
    Ok(moved)
}

pub fn is_nash(inst: &Instance, x: &Allocation) -> Result<bool, EquilibriaError> {
    is_nash_with(inst, x, &Options::default())
}

pub fn is_nash_with(
    inst: &Instance,
    x: &Allocation,
    opts: &Options,
) -> Result<bool, EquilibriaError> {
    let engine = Engine::new(inst, opts);
    let mask = engine.mask_of(x)?;
    Ok(engine.dispatch(|t| {
        let (l1, l2) = t.loads(mask);
        t.is_nash(mask, &l1, &l2)
    }))
}

/// The improving coalition minimal in (cardinality, lexicographic)
/// order, or `None` if no coalition lets every member strictly improve.
pub fn improving_coalition(
    inst: &Instance,
    x: &Allocation,
) -> Result<Option<Coalition>, EquilibriaError> {
    improving_coalition_with(inst, x, &Options::default())
}

pub fn improving_coalition_with(
    inst: &Instance,
    x: &Allocation,
    opts: &Options,
) -> Result<Option<Coalition>, EquilibriaError> {
    if inst.len() > opts.caps.coalitions {
        return Err(EquilibriaError::CapExceeded {
            jobs: inst.len(),
            cap: opts.caps.coalitions,
        });
    }
    let engine = Engine::new(inst, opts);
    let mask = engine.mask_of(x)?;
    Ok(engine
        .dispatch(|t| {
            let (l1, l2) = t.loads(mask);
            t.improving_coalition(mask, &l1, &l2)
        })
        .map(Coalition::new))
}

pub fn is_strong_nash(inst: &Instance, x: &Allocation) -> Result<bool, EquilibriaError> {
    is_strong_nash_with(inst, x, &Options::default())
}

pub fn is_strong_nash_with(
    inst: &Instance,
    x: &Allocation,
    opts: &Options,
) -> Result<bool, EquilibriaError> {
    Ok(improving_coalition_with(inst, x, opts)?.is_none())
}

/// Enumerates all allocations, filters Nash and strong equilibria, and
/// records the optimum and the worst equilibrium makespans.
pub fn analyze(inst: &Instance) -> Result<EquilibriumReport, EquilibriaError> {
    analyze_with(inst, &Options::default())
}

pub fn analyze_with(inst: &Instance, opts: &Options) -> Result<EquilibriumReport, EquilibriaError> {
    let n = inst.len();
    let cap = opts.caps.coalitions.min(opts.caps.enumeration);
    if n > cap {
        return Err(EquilibriaError::CapExceeded { jobs: n, cap });
    }
    let engine = Engine::new(inst, opts);
    let scan = engine.dispatch(|t| t.scan_all(n));

    let mut found: Vec<(Allocation, bool)> = scan
        .nash
        .iter()
        .map(|&(mask, strong)| (engine.allocation_of(mask, n), strong))
        .collect();
    found.sort_by(|a, b| a.0.choices().cmp(b.0.choices()));
    let mut nash_allocations = Vec::with_capacity(found.len());
    let mut strong_allocations = Vec::new();
    for (x, strong) in found {
        if strong {
            strong_allocations.push(x.clone());
        }
        nash_allocations.push(x);
    }
    if strong_allocations.is_empty() {
        return Err(EquilibriaError::NoStrongEquilibrium);
    }

    let opt = makespan(inst, &engine.allocation_of(scan.opt_mask, n)).map_err(EquilibriaError::from)?;
    let worst_ne_makespan = makespan(inst, &engine.allocation_of(scan.worst_ne_mask, n))?;
    let worst_se_makespan = makespan(inst, &engine.allocation_of(scan.worst_se_mask, n))?;

    Ok(EquilibriumReport {
        nash_allocations,
        strong_allocations,
        opt,
        worst_ne_makespan,
        worst_se_makespan,
    })
}

/// Worst NE makespan over the optimum.
pub fn poa_of_instance(inst: &Instance) -> Result<Scalar, EquilibriaError> {
    let report = analyze(inst)?;
    ratio(&report.worst_ne_makespan, &report.opt)
}

/// Worst SE makespan over the optimum.
pub fn spoa_of_instance(inst: &Instance) -> Result<Scalar, EquilibriaError> {
    let report = analyze(inst)?;
    ratio(&report.worst_se_makespan, &report.opt)
}

fn ratio(worst: &Scalar, opt: &Scalar) -> Result<Scalar, EquilibriaError> {
    if opt.is_zero() {
        return Err(EquilibriaError::UndefinedRatio);
    }
    Ok(worst / opt)
}

// ---------------------------------------------------------------------
// Engine: scaled-integer (or f64) deviation checking over bitmasks.
// Bit j of a mask is set iff job j sits on machine 2.
// ---------------------------------------------------------------------

enum Engine {
    Exact(Table<BigInt>),
    Float(Table<f64>, f64),
}

struct Table<T> {
    w1: Vec<T>,
    w2: Vec<T>,
}

struct Scan {
    /// NE masks in ascending mask order, each flagged strong or not.
    nash: Vec<(u64, bool)>,
    opt_mask: u64,
    worst_ne_mask: u64,
    worst_se_mask: u64,
}

impl Engine {
    fn new(inst: &Instance, opts: &Options) -> Engine {
        if inst.is_exact() {
            let p1: Vec<BigRational> = inst
                .jobs
                .iter()
                .map(|j| processing_time(j, Machine::M1, &inst.s).to_rational())
                .collect();
            let p2: Vec<BigRational> = inst
                .jobs
                .iter()
                .map(|j| processing_time(j, Machine::M2, &inst.s).to_rational())
                .collect();
            let mut scale = BigInt::one();
            for p in p1.iter().chain(&p2) {
                scale = scale.lcm(p.denom());
            }
            let to_int = |p: &BigRational| (p * BigRational::from_integer(scale.clone())).to_integer();
            Engine::Exact(Table {
                w1: p1.iter().map(to_int).collect(),
                w2: p2.iter().map(to_int).collect(),
            })
        } else {
            Engine::Float(
                Table {
                    w1: inst
                        .jobs
                        .iter()
                        .map(|j| processing_time(j, Machine::M1, &inst.s).to_f64())
                        .collect(),
                    w2: inst
                        .jobs
                        .iter()
                        .map(|j| processing_time(j, Machine::M2, &inst.s).to_f64())
                        .collect(),
                },
                opts.rel_tol,
            )
        }
    }

    fn dispatch<R>(&self, f: impl Fn(&dyn DeviationChecks) -> R) -> R {
        match self {
            Engine::Exact(t) => f(&ExactChecks(t)),
            Engine::Float(t, tol) => f(&FloatChecks(t, *tol)),
        }
    }

    fn mask_of(&self, x: &Allocation) -> Result<u64, EquilibriaError> {
        let n = match self {
            Engine::Exact(t) => t.w1.len(),
            Engine::Float(t, _) => t.w1.len(),
        };
        if x.len() != n {
            return Err(ModelError::LengthMismatch {
                expected: n,
                got: x.len(),
            }
            .into());
        }
        let mut mask = 0u64;
        for (j, &m) in x.choices().iter().enumerate() {
            if m == Machine::M2 {
                mask |= 1 << j;
            }
        }
        Ok(mask)
    }

    fn allocation_of(&self, mask: u64, n: usize) -> Allocation {
        Allocation::new(
            (0..n)
                .map(|j| {
                    if mask >> j & 1 == 1 {
                        Machine::M2
                    } else {
                        Machine::M1
                    }
                })
                .collect(),
        )
    }
}

/// Type-erased view so `analyze` and friends are written once for both
/// numeric modes.
trait DeviationChecks: Sync {
    fn loads(&self, mask: u64) -> (LoadPair, LoadPair);
    fn is_nash(&self, mask: u64, l1: &LoadPair, l2: &LoadPair) -> bool;
    fn improving_coalition(&self, mask: u64, l1: &LoadPair, l2: &LoadPair) -> Option<Vec<usize>>;
    fn scan_all(&self, n: usize) -> Scan;
}

/// A machine load in either numeric mode.
#[derive(Clone, PartialEq, PartialOrd)]
enum LoadPair {
    Int(BigInt),
    Real(f64),
}

struct ExactChecks<'a>(&'a Table<BigInt>);
struct FloatChecks<'a>(&'a Table<f64>, f64);

impl Table<BigInt> {
    fn raw_loads(&self, mask: u64) -> (BigInt, BigInt) {
        let mut l1 = BigInt::zero();
        let mut l2 = BigInt::zero();
        for j in 0..self.w1.len() {
            if mask >> j & 1 == 1 {
                l2 += &self.w2[j];
            } else {
                l1 += &self.w1[j];
            }
        }
        (l1, l2)
    }
}

impl Table<f64> {
    fn raw_loads(&self, mask: u64) -> (f64, f64) {
        let mut l1 = 0.0;
        let mut l2 = 0.0;
        for j in 0..self.w1.len() {
            if mask >> j & 1 == 1 {
                l2 += self.w2[j];
            } else {
                l1 += self.w1[j];
            }
        }
        (l1, l2)
    }
}

/// Shared search logic, generic over the numeric type.
///
/// `improves(new, old)` must implement strict improvement: plain `<`
/// for integers, tolerance-strict for floats.
fn nash_check<T>(
    t: &Table<T>,
    mask: u64,
    l1: &T,
    l2: &T,
    improves: &dyn Fn(&T, &T) -> bool,
) -> bool
where
    T: Clone + for<'b> AddAssign<&'b T>,
{
    for j in 0..t.w1.len() {
        // Cost after j switches alone: the other machine's load plus j.
        let (old, mut new, w) = if mask >> j & 1 == 1 {
            (l2, l1.clone(), &t.w1[j])
        } else {
            (l1, l2.clone(), &t.w2[j])
        };
        new += w;
        if improves(&new, old) {
            return false;
        }
    }
    true
}

/// Minimal-(cardinality, lex) improving coalition.
///
/// A job can only ever improve if its processing time on the other
/// machine is below its current cost, so the search is restricted to
/// those candidates; this never changes the outcome because a coalition
/// must improve every member.
fn coalition_search<T>(
    t: &Table<T>,
    mask: u64,
    l1: &T,
    l2: &T,
    improves: &dyn Fn(&T, &T) -> bool,
) -> Option<Vec<usize>>
where
    T: Clone + for<'b> AddAssign<&'b T> + for<'b> SubAssign<&'b T>,
{
    let n = t.w1.len();
    let candidates: Vec<usize> = (0..n)
        .filter(|&j| {
            let (other_w, old) = if mask >> j & 1 == 1 {
                (&t.w1[j], l2)
            } else {
                (&t.w2[j], l1)
            };
            improves(other_w, old)
        })
        .collect();

    for size in 1..=candidates.len() {
        for combo in candidates.iter().copied().combinations(size) {
            let mut new_l1 = l1.clone();
            let mut new_l2 = l2.clone();
            let mut from_m1 = false;
            let mut from_m2 = false;
            for &j in &combo {
                if mask >> j & 1 == 1 {
                    from_m2 = true;
                    new_l2 -= &t.w2[j];
                    new_l1 += &t.w1[j];
                } else {
                    from_m1 = true;
                    new_l1 -= &t.w1[j];
                    new_l2 += &t.w2[j];
                }
            }
            let m1_gain = !from_m1 || improves(&new_l2, l1);
            let m2_gain = !from_m2 || improves(&new_l1, l2);
            if m1_gain && m2_gain {
                return Some(combo);
            }
        }
    }
    None
}

fn scan_all<T>(t: &Table<T>, n: usize, improves: &(dyn Fn(&T, &T) -> bool + Sync)) -> Scan
where
    T: Clone + Send + Sync + Zero + PartialOrd + for<'b> AddAssign<&'b T> + for<'b> SubAssign<&'b T>,
    Table<T>: Sync,
{
    struct Part<T> {
        nash: Vec<(u64, bool)>,
        opt: Option<(T, u64)>,
        worst_ne: Option<(T, u64)>,
        worst_se: Option<(T, u64)>,
    }

    let raw_loads = |mask: u64| -> (T, T) {
        let mut l1 = T::zero();
        let mut l2 = T::zero();
        for j in 0..n {
            if mask >> j & 1 == 1 {
                l2 += &t.w2[j];
            } else {
                l1 += &t.w1[j];
            }
        }
        (l1, l2)
    };

    let total: u64 = 1 << n;
    let chunks: Vec<(u64, u64)> = {
        let workers = rayon::current_num_threads().max(1) as u64 * 4;
        let step = total.div_ceil(workers).max(1);
        (0..total)
            .step_by(step as usize)
            .map(|lo| (lo, (lo + step).min(total)))
            .collect()
    };

    let better_min = |cur: &Option<(T, u64)>, val: &T| cur.as_ref().is_none_or(|(v, _)| val < v);
    let better_max = |cur: &Option<(T, u64)>, val: &T| cur.as_ref().is_none_or(|(v, _)| val > v);

    let parts: Vec<Part<T>> = chunks
        .into_par_iter()
        .map(|(lo, hi)| {
            let mut part = Part {
                nash: Vec::new(),
                opt: None,
                worst_ne: None,
                worst_se: None,
            };
            for mask in lo..hi {
                let (l1, l2) = raw_loads(mask);
                let mk = if l1 >= l2 { l1.clone() } else { l2.clone() };
                if better_min(&part.opt, &mk) {
                    part.opt = Some((mk.clone(), mask));
                }
                if !nash_check(t, mask, &l1, &l2, improves) {
                    continue;
                }
                let strong = coalition_search(t, mask, &l1, &l2, improves).is_none();
                part.nash.push((mask, strong));
                if better_max(&part.worst_ne, &mk) {
                    part.worst_ne = Some((mk.clone(), mask));
                }
                if strong && better_max(&part.worst_se, &mk) {
                    part.worst_se = Some((mk, mask));
                }
            }
            part
        })
        .collect();

    let mut nash = Vec::new();
    let mut opt: Option<(T, u64)> = None;
    let mut worst_ne: Option<(T, u64)> = None;
    let mut worst_se: Option<(T, u64)> = None;
    for part in parts {
        nash.extend(part.nash);
        for (src, dst, max) in [
            (part.opt, &mut opt, false),
            (part.worst_ne, &mut worst_ne, true),
            (part.worst_se, &mut worst_se, true),
        ] {
            if let Some((v, m)) = src {
                let take = if max {
                    better_max(dst, &v)
                } else {
                    better_min(dst, &v)
                };
                if take {
                    *dst = Some((v, m));
                }
            }
        }
    }

    let (_, opt_mask) = opt.expect("nonempty mask space");
    Scan {
        worst_ne_mask: worst_ne.map(|(_, m)| m).unwrap_or(opt_mask),
        worst_se_mask: worst_se.map(|(_, m)| m).unwrap_or(opt_mask),
        nash,
        opt_mask,
    }
}

impl DeviationChecks for ExactChecks<'_> {
    fn loads(&self, mask: u64) -> (LoadPair, LoadPair) {
        let (l1, l2) = self.0.raw_loads(mask);
        (LoadPair::Int(l1), LoadPair::Int(l2))
    }

    fn is_nash(&self, mask: u64, l1: &LoadPair, l2: &LoadPair) -> bool {
        let (LoadPair::Int(l1), LoadPair::Int(l2)) = (l1, l2) else {
            unreachable!()
        };
        nash_check(self.0, mask, l1, l2, &|new, old| new < old)
    }

    fn improving_coalition(&self, mask: u64, l1: &LoadPair, l2: &LoadPair) -> Option<Vec<usize>> {
        let (LoadPair::Int(l1), LoadPair::Int(l2)) = (l1, l2) else {
            unreachable!()
        };
        coalition_search(self.0, mask, l1, l2, &|new, old| new < old)
    }

    fn scan_all(&self, n: usize) -> Scan {
        scan_all(self.0, n, &|new, old| new < old)
    }
}

impl DeviationChecks for FloatChecks<'_> {
    fn loads(&self, mask: u64) -> (LoadPair, LoadPair) {
        let (l1, l2) = self.0.raw_loads(mask);
        (LoadPair::Real(l1), LoadPair::Real(l2))
    }

    fn is_nash(&self, mask: u64, l1: &LoadPair, l2: &LoadPair) -> bool {
        let (LoadPair::Real(l1), LoadPair::Real(l2)) = (l1, l2) else {
            unreachable!()
        };
        let tol = self.1;
        nash_check(self.0, mask, l1, l2, &move |new, old| {
            float_improves(*new, *old, tol)
        })
    }

    fn improving_coalition(&self, mask: u64, l1: &LoadPair, l2: &LoadPair) -> Option<Vec<usize>> {
        let (LoadPair::Real(l1), LoadPair::Real(l2)) = (l1, l2) else {
            unreachable!()
        };
        let tol = self.1;
        coalition_search(self.0, mask, l1, l2, &move |new, old| {
            float_improves(*new, *old, tol)
        })
    }

    fn scan_all(&self, n: usize) -> Scan {
        let tol = self.1;
        scan_all(self.0, n, &move |new, old| float_improves(*new, *old, tol))
    }
}

fn float_improves(new: f64, old: f64, rel_tol: f64) -> bool {
    old - new > rel_tol * 1f64.max(new.abs()).max(old.abs())
}
