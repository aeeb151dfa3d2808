//! Game model: two machines, jobs with a favorite machine, allocations,
//! loads, makespan, exhaustive optimum, and the eight-group decomposition
//! of an allocation against a reference optimum.
//!
//! A job of size `q` runs in `q` time units on its favorite machine and
//! `s·q` on the other one, for a common slowdown factor `s ≥ 1`.

use std::fmt;

use thiserror::Error;

use crate::scalar::Scalar;
use crate::Caps;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("allocation has {got} choices but the instance has {expected} jobs")]
    LengthMismatch { expected: usize, got: usize },
    #[error("{jobs} jobs exceed the enumeration cap of {cap}")]
    CapExceeded { jobs: usize, cap: usize },
    #[error("group {name} is negative")]
    NegativeGroup { name: &'static str },
}

/// One of the two machines.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Machine {
    M1,
    M2,
}

impl Machine {
    pub fn other(self) -> Machine {
        match self {
            Machine::M1 => Machine::M2,
            Machine::M2 => Machine::M1,
        }
    }

    /// 1-based machine number, as used in instance files.
    pub fn number(self) -> u8 {
        match self {
            Machine::M1 => 1,
            Machine::M2 => 2,
        }
    }
}

impl fmt::Display for Machine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "M{}", self.number())
    }
}

/// A job: positive size plus favorite machine.
#[derive(Clone, Debug, PartialEq)]
pub struct Job {
    pub size: Scalar,
    pub favorite: Machine,
}

impl Job {
    /// Panics if `size ≤ 0`; callers parsing external input validate first.
    pub fn new(size: Scalar, favorite: Machine) -> Job {
        assert!(
            size > Scalar::zero(),
            "job size must be positive, got {size}"
        );
        Job { size, favorite }
    }
}

/// A game instance: the slowdown factor `s ≥ 1` and an ordered job list.
#[derive(Clone, Debug)]
pub struct Instance {
    pub s: Scalar,
    pub jobs: Vec<Job>,
}

impl Instance {
    /// Panics if `s < 1`; callers parsing external input validate first.
    pub fn new(s: Scalar, jobs: Vec<Job>) -> Instance {
        assert!(s >= Scalar::one(), "slowdown factor must be ≥ 1, got {s}");
        Instance { s, jobs }
    }

    pub fn len(&self) -> usize {
        self.jobs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jobs.is_empty()
    }

    /// True when every quantity (s and all sizes) is an exact rational.
    pub fn is_exact(&self) -> bool {
        self.s.is_exact() && self.jobs.iter().all(|j| j.size.is_exact())
    }

    fn check(&self, x: &Allocation) -> Result<(), ModelError> {
        if x.len() != self.len() {
            return Err(ModelError::LengthMismatch {
                expected: self.len(),
                got: x.len(),
            });
        }
        Ok(())
    }
}

/// One machine choice per job, in job order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Allocation {
    choices: Vec<Machine>,
}

impl Allocation {
    pub fn new(choices: Vec<Machine>) -> Allocation {
        Allocation { choices }
    }

    /// The `index`-th allocation of `n` jobs in lexicographic order
    /// (M1 < M2, first job most significant).
    pub fn from_index(index: u64, n: usize) -> Allocation {
        let choices = (0..n)
            .map(|j| {
                if index >> (n - 1 - j) & 1 == 1 {
                    Machine::M2
                } else {
                    Machine::M1
                }
            })
            .collect();
        Allocation { choices }
    }

    /// Every job on its favorite machine.
    pub fn favorites(inst: &Instance) -> Allocation {
        Allocation {
            choices: inst.jobs.iter().map(|j| j.favorite).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.choices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.choices.is_empty()
    }

    pub fn choice(&self, job: usize) -> Machine {
        self.choices[job]
    }

    pub fn choices(&self) -> &[Machine] {
        &self.choices
    }

    pub fn set(&mut self, job: usize, m: Machine) {
        self.choices[job] = m;
    }
}

impl fmt::Display for Allocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.choices.is_empty() {
            return write!(f, "()");
        }
        let parts: Vec<String> = self.choices.iter().map(|m| m.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// The eight nonnegative group loads of an allocation `x` measured
/// against a reference allocation `y`, in `x`'s load units.
///
/// Naming: `a`/`c` live on machine 1 in `x`, `b`/`d` on machine 2;
/// `a`/`b` are bad (off-favorite) in `x`, `c`/`d` good. The groups that
/// move between `x` and `y` are a2, b2, c1 and d1.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupDecomposition {
    pub a1: Scalar,
    pub a2: Scalar,
    pub b1: Scalar,
    pub b2: Scalar,
    pub c1: Scalar,
    pub c2: Scalar,
    pub d1: Scalar,
    pub d2: Scalar,
}

impl GroupDecomposition {
    pub fn zero() -> GroupDecomposition {
        GroupDecomposition {
            a1: Scalar::zero(),
            a2: Scalar::zero(),
            b1: Scalar::zero(),
            b2: Scalar::zero(),
            c1: Scalar::zero(),
            c2: Scalar::zero(),
            d1: Scalar::zero(),
            d2: Scalar::zero(),
        }
    }

    pub fn groups(&self) -> [(&'static str, &Scalar); 8] {
        [
            ("a1", &self.a1),
            ("a2", &self.a2),
            ("b1", &self.b1),
            ("b2", &self.b2),
            ("c1", &self.c1),
            ("c2", &self.c2),
            ("d1", &self.d1),
            ("d2", &self.d2),
        ]
    }
}

/// Processing time of `job` on `machine`: its size on the favorite,
/// `s` times the size on the other machine.
pub fn processing_time(job: &Job, machine: Machine, s: &Scalar) -> Scalar {
    if machine == job.favorite {
        job.size.clone()
    } else {
        s * &job.size
    }
}

/// Loads `(ℓ1, ℓ2)` of the two machines under allocation `x`.
pub fn machine_loads(inst: &Instance, x: &Allocation) -> Result<(Scalar, Scalar), ModelError> {
    inst.check(x)?;
    let mut l1 = Scalar::zero();
    let mut l2 = Scalar::zero();
    for (job, &m) in inst.jobs.iter().zip(x.choices()) {
        let p = processing_time(job, m, &inst.s);
        match m {
            Machine::M1 => l1 = l1 + p,
            Machine::M2 => l2 = l2 + p,
        }
    }
    Ok((l1, l2))
}

/// Maximum machine load under `x`.
pub fn makespan(inst: &Instance, x: &Allocation) -> Result<Scalar, ModelError> {
    let (l1, l2) = machine_loads(inst, x)?;
    Ok(l1.max(l2))
}

/// All `2^n` allocations of `n` jobs in lexicographic order.
pub fn enumerate_allocations(
    n: usize,
    caps: &Caps,
) -> Result<impl Iterator<Item = Allocation>, ModelError> {
    if n > caps.enumeration {
        return Err(ModelError::CapExceeded {
            jobs: n,
            cap: caps.enumeration,
        });
    }
    Ok((0..1u64 << n).map(move |index| Allocation::from_index(index, n)))
}

/// Minimum makespan over all allocations and the lexicographically
/// first allocation attaining it.
pub fn optimum(inst: &Instance) -> Result<(Scalar, Allocation), ModelError> {
    optimum_with(inst, &Caps::default())
}

pub fn optimum_with(inst: &Instance, caps: &Caps) -> Result<(Scalar, Allocation), ModelError> {
    let mut best: Option<(Scalar, Allocation)> = None;
    for x in enumerate_allocations(inst.len(), caps)? {
        let value = makespan(inst, &x)?;
        match &best {
            Some((incumbent, _)) if *incumbent <= value => {}
            _ => best = Some((value, x)),
        }
    }
    Ok(best.expect("at least the empty allocation exists"))
}

/// Classifies each job by (machine in `x`, good/bad in `x`, moved or
/// unmoved between `x` and `y`) and sums its `x`-load into the matching
/// group. A job is good when it sits on its favorite machine.
pub fn decompose(
    inst: &Instance,
    x: &Allocation,
    y: &Allocation,
) -> Result<GroupDecomposition, ModelError> {
    inst.check(x)?;
    inst.check(y)?;
    let mut d = GroupDecomposition::zero();
    for (j, job) in inst.jobs.iter().enumerate() {
        let here = x.choice(j);
        let load = processing_time(job, here, &inst.s);
        let good = here == job.favorite;
        let moved = here != y.choice(j);
        let slot = match (here, good, moved) {
            (Machine::M1, false, true) => &mut d.a2,
            (Machine::M1, false, false) => &mut d.a1,
            (Machine::M1, true, true) => &mut d.c1,
            (Machine::M1, true, false) => &mut d.c2,
            (Machine::M2, false, true) => &mut d.b2,
            (Machine::M2, false, false) => &mut d.b1,
            (Machine::M2, true, true) => &mut d.d1,
            (Machine::M2, true, false) => &mut d.d2,
        };
        *slot = slot.clone() + load;
    }
    Ok(d)
}

/// Reconstructs `(ℓ1, ℓ2, ℓ1*, ℓ2*)` from group loads: the machine loads
/// of the source allocation and of the reference allocation the moved
/// groups swap into.
pub fn loads_from_decomposition(
    d: &GroupDecomposition,
    s: &Scalar,
) -> Result<(Scalar, Scalar, Scalar, Scalar), ModelError> {
    for (name, g) in d.groups() {
        if g.is_negative() {
            return Err(ModelError::NegativeGroup { name });
        }
    }
    let l1 = &(&d.a1 + &d.a2) + &(&d.c1 + &d.c2);
    let l2 = &(&d.b1 + &d.b2) + &(&d.d1 + &d.d2);
    let l1_star = &(&d.a1 + &(&d.b2 / s)) + &(&d.c2 + &(s * &d.d1));
    let l2_star = &(&(&d.a2 / s) + &d.b1) + &(&(s * &d.c1) + &d.d2);
    Ok((l1, l2, l1_star, l2_star))
}
