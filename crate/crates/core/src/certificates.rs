//! Worst-case certificate instances: for each segment of the SPoA
//! curve a small instance whose designated allocation is a strong
//! equilibrium attaining the curve exactly, the matching construction
//! for the PoA curve, and the classic two-job bad Nash example.
//!
//! The segment instances are generated from a table of group loads
//! (rational functions of `s`); the table entries are loads measured in
//! the equilibrium allocation, so off-favorite jobs have size load/s.
//! A zero load produces no job at all, since sizes must be positive.

use thiserror::Error;

use crate::bounds::{self, poly_eval, BoundsError};
use crate::equilibria::{self, EquilibriaError};
use crate::model::{
    machine_loads, makespan, optimum_with, Allocation, GroupDecomposition, Instance, Job, Machine,
    ModelError,
};
use crate::scalar::Scalar;
use crate::Caps;

#[derive(Debug, Error, PartialEq)]
pub enum CertificateError {
    #[error("segment index {0} out of range 1..=8")]
    SegmentOutOfRange(u8),
    #[error("s={s} lies outside segment {segment} = [{lo}, {hi}]")]
    SOutsideSegment {
        segment: u8,
        s: f64,
        lo: f64,
        hi: f64,
    },
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Equilibria(#[from] EquilibriaError),
}

/// Which equilibrium notion the designated allocation attains.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CertificateKind {
    Nash,
    StrongNash,
}

/// Where the certificate comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CertificateFamily {
    /// Lower bound for one of the eight SPoA curve segments.
    SpoaSegment(u8),
    /// Lower bound for the PoA curve.
    Poa,
    /// The two-unit-job bad Nash equilibrium with ratio `s`.
    Example1,
}

/// A concrete instance with its designated equilibrium, reference
/// optimum, and the values the construction is supposed to attain.
#[derive(Clone, Debug)]
pub struct Certificate {
    pub instance: Instance,
    pub equilibrium: Allocation,
    pub reference_opt: Allocation,
    pub expected_l1: Scalar,
    pub expected_l2: Scalar,
    pub expected_ratio: Scalar,
    pub kind: CertificateKind,
    pub family: CertificateFamily,
    pub s_interval: (Scalar, Scalar),
}

/// Outcome of re-deriving everything a certificate claims.
#[derive(Clone, Debug)]
pub struct CertificateReport {
    pub loads_match: bool,
    pub opt_is_one: bool,
    pub equilibrium_kind_holds: bool,
    pub ratio_matches: bool,
    pub details: String,
}

impl CertificateReport {
    pub fn pass(&self) -> bool {
        self.loads_match && self.opt_is_one && self.equilibrium_kind_holds && self.ratio_matches
    }
}

/// Group-load columns (a2, b2, c2, d1, d2) of the eight segment rows,
/// each a polynomial ratio in `s` with the constant term first.
type Entry = (&'static [i64], &'static [i64]);
const NONE: Entry = (&[0], &[1]);
const ROWS: [[Entry; 5]; 8] = [
    // [1, s1]: common denominator s³+2
    [
        (&[0, 0, 1, 1], &[2, 0, 0, 1]),
        (&[0, 1], &[2, 0, 0, 1]),
        (&[1, 1], &[2, 0, 0, 1]),
        (&[-1, 0, 1], &[2, 0, 0, 1]),
        (&[2, -1, -1, 1], &[2, 0, 0, 1]),
    ],
    // [s1, s2]: common denominator 2s+1
    [
        (&[0, 1, 1], &[1, 2]),
        (&[0, 0, 1], &[1, 2]),
        (&[1, 1], &[1, 2]),
        NONE,
        (&[0, 1], &[1, 2]),
    ],
    // [s2, s3]
    [
        (&[1], &[1]),
        (&[-1, 1], &[1]),
        (&[1], &[0, 1]),
        NONE,
        (&[2, -1], &[1]),
    ],
    // [s3, s4]
    [
        (&[0, 0, 1], &[-1, 1, -1, 1]),
        (&[0, 0, 1], &[1, 0, 1]),
        (&[1, -1, 1], &[1, 0, 1]),
        NONE,
        (&[1], &[1, 0, 1]),
    ],
    // [s4, s5]
    [
        (&[0, 1], &[2]),
        (&[0, 1], &[2]),
        (&[1], &[2]),
        NONE,
        (&[2, -1], &[2]),
    ],
    // [s5, s6]
    [
        (&[1], &[-1, 1]),
        (&[1], &[1]),
        (&[-1, 1], &[0, 1]),
        NONE,
        NONE,
    ],
    // [s6, s7]
    [
        (&[0, 0, 1], &[-1, 2]),
        NONE,
        NONE,
        (&[1, -2, 1], &[-1, 2]),
        (&[-1, 1], &[-1, 2]),
    ],
    // [s7, ∞)
    [
        (&[1, 1], &[0, 1]),
        NONE,
        NONE,
        (&[1], &[0, 1]),
        (&[-1, -1, 1], &[0, 0, 1]),
    ],
];

/// (equilibrium machine, reference machine, favorite) per column.
const ROLES: [(Machine, Machine, Machine); 5] = [
    (Machine::M1, Machine::M2, Machine::M2), // a2
    (Machine::M2, Machine::M1, Machine::M1), // b2
    (Machine::M1, Machine::M1, Machine::M1), // c2
    (Machine::M2, Machine::M1, Machine::M2), // d1
    (Machine::M2, Machine::M2, Machine::M2), // d2
];

fn assemble(
    s: &Scalar,
    loads: &[(Scalar, Machine, Machine, Machine)],
) -> (Instance, Allocation, Allocation, Scalar, Scalar) {
    let mut jobs = Vec::new();
    let mut eq = Vec::new();
    let mut opt = Vec::new();
    let mut l1 = Scalar::zero();
    let mut l2 = Scalar::zero();
    for (load, eq_machine, ref_machine, favorite) in loads {
        if load.is_zero() {
            continue;
        }
        let size = if eq_machine == favorite {
            load.clone()
        } else {
            load / s
        };
        jobs.push(Job::new(size, *favorite));
        eq.push(*eq_machine);
        opt.push(*ref_machine);
        match eq_machine {
            Machine::M1 => l1 = l1 + load.clone(),
            Machine::M2 => l2 = l2 + load.clone(),
        }
    }
    (
        Instance::new(s.clone(), jobs),
        Allocation::new(eq),
        Allocation::new(opt),
        l1,
        l2,
    )
}

/// The lower-bound instance for SPoA curve segment `k` evaluated at
/// `s` (which must lie in the segment's closed interval).
pub fn spoa_certificate(k: u8, s: &Scalar) -> Result<Certificate, CertificateError> {
    if !(1..=8).contains(&k) {
        return Err(CertificateError::SegmentOutOfRange(k));
    }
    let piece = &bounds::pieces()[k as usize - 1];
    let (lo, hi) = (piece.lo.clone(), piece.hi.clone());
    let sf = s.to_f64();
    let outside = || CertificateError::SOutsideSegment {
        segment: k,
        s: sf,
        lo: lo.to_f64(),
        hi: hi.to_f64(),
    };
    if sf < lo.to_f64() - 1e-9 || sf > hi.to_f64() + 1e-9 {
        return Err(outside());
    }

    let mut loads = Vec::new();
    for (entry, role) in ROWS[k as usize - 1].iter().zip(ROLES) {
        let load = poly_eval(entry.0, s) / poly_eval(entry.1, s);
        if load.is_negative() {
            return Err(outside());
        }
        loads.push((load, role.0, role.1, role.2));
    }
    let (instance, equilibrium, reference_opt, expected_l1, expected_l2) = assemble(s, &loads);
    Ok(Certificate {
        instance,
        equilibrium,
        reference_opt,
        expected_l1,
        expected_l2,
        expected_ratio: piece.eval(s),
        kind: CertificateKind::StrongNash,
        family: CertificateFamily::SpoaSegment(k),
        s_interval: (lo, hi),
    })
}

/// The worst-Nash construction attaining the PoA curve at `s`.
pub fn poa_certificate(s: &Scalar) -> Result<Certificate, CertificateError> {
    let expected_ratio = bounds::poa_formula(s)?;
    let den = poly_eval(&[1, 1, 1], s); // s²+s+1
    let loads = [
        (
            poly_eval(&[0, 0, 1, 1], s) / den.clone(), // a2 = (s³+s²)/(s²+s+1)
            Machine::M1,
            Machine::M2,
            Machine::M2,
        ),
        (
            Scalar::one() / den.clone(), // b1 stays on machine 2
            Machine::M2,
            Machine::M2,
            Machine::M1,
        ),
        (
            poly_eval(&[0, 0, 0, 1], s) / den.clone(), // b2 = s³/(s²+s+1)
            Machine::M2,
            Machine::M1,
            Machine::M1,
        ),
        (
            poly_eval(&[1, 1], s) / den, // c2 = (s+1)/(s²+s+1)
            Machine::M1,
            Machine::M1,
            Machine::M1,
        ),
    ];
    let (instance, equilibrium, reference_opt, expected_l1, expected_l2) = assemble(s, &loads);
    Ok(Certificate {
        instance,
        equilibrium,
        reference_opt,
        expected_l1,
        expected_l2,
        expected_ratio,
        kind: CertificateKind::Nash,
        family: CertificateFamily::Poa,
        s_interval: (Scalar::one(), Scalar::Float(f64::INFINITY)),
    })
}

/// Two unit jobs with opposite favorites, each on the wrong machine: a
/// Nash equilibrium with makespan `s` against an optimum of 1.
pub fn bad_ne_example(s: &Scalar) -> Result<Certificate, CertificateError> {
    if *s < Scalar::one() {
        return Err(BoundsError::SBelowOne(s.to_f64()).into());
    }
    let jobs = vec![
        Job::new(Scalar::one(), Machine::M1),
        Job::new(Scalar::one(), Machine::M2),
    ];
    Ok(Certificate {
        instance: Instance::new(s.clone(), jobs),
        equilibrium: Allocation::new(vec![Machine::M2, Machine::M1]),
        reference_opt: Allocation::new(vec![Machine::M1, Machine::M2]),
        expected_l1: s.clone(),
        expected_l2: s.clone(),
        expected_ratio: s.clone(),
        kind: CertificateKind::Nash,
        family: CertificateFamily::Example1,
        s_interval: (Scalar::one(), Scalar::Float(f64::INFINITY)),
    })
}

/// Recomputes everything the certificate claims: equilibrium loads,
/// brute-force optimum equal to 1, the designated equilibrium property,
/// and the anarchy ratio.
pub fn verify(cert: &Certificate) -> Result<CertificateReport, CertificateError> {
    verify_with(cert, &Caps::default())
}

pub fn verify_with(cert: &Certificate, caps: &Caps) -> Result<CertificateReport, CertificateError> {
    // Exact instances verify with exact equality; irrational s falls
    // back to a float tolerance.
    let rel = 1e-9;
    let inst = &cert.instance;
    let (l1, l2) = machine_loads(inst, &cert.equilibrium)?;
    let loads_match =
        l1.approx_eq(&cert.expected_l1, rel) && l2.approx_eq(&cert.expected_l2, rel);

    let (opt, _) = optimum_with(inst, caps)?;
    let opt_is_one = opt.approx_eq(&Scalar::one(), rel);

    let opts = equilibria::Options {
        caps: *caps,
        ..equilibria::Options::default()
    };
    let nash = equilibria::is_nash_with(inst, &cert.equilibrium, &opts)?;
    let equilibrium_kind_holds = match cert.kind {
        CertificateKind::Nash => nash,
        CertificateKind::StrongNash => {
            nash && equilibria::is_strong_nash_with(inst, &cert.equilibrium, &opts)?
        }
    };

    let mk = makespan(inst, &cert.equilibrium)?;
    let ratio = &mk / &opt;
    let ratio_matches = !opt.is_zero() && ratio.approx_eq(&cert.expected_ratio, rel);

    let details = format!(
        "family {:?} at s={}: loads ({l1}, {l2}) vs expected ({}, {}); opt {opt}; \
         kind {:?} holds: {equilibrium_kind_holds}; ratio {ratio} vs expected {}",
        cert.family,
        inst.s,
        cert.expected_l1,
        cert.expected_l2,
        cert.kind,
        cert.expected_ratio,
    );
    Ok(CertificateReport {
        loads_match,
        opt_is_one,
        equilibrium_kind_holds,
        ratio_matches,
        details,
    })
}

/// Truth value of each equilibrium condition (non-strict, exactly as
/// the condition system states them) at a given decomposition.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SwapFlags {
    pub first: bool,
    pub second: bool,
}

impl SwapFlags {
    pub fn either(self) -> bool {
        self.first || self.second
    }
}

#[derive(Clone, Debug)]
pub struct SeConditionFlags {
    /// ℓ1* ≤ 1 and ℓ2* ≤ 1: the reference loads fit the optimum.
    pub opt_load_m1: bool,
    pub opt_load_m2: bool,
    /// ℓ2 ≤ 1: the smaller load is at most the optimum.
    pub min_load: bool,
    /// No single group of machine 1 gains by moving to machine 2.
    pub single_a1: bool,
    pub single_a2: bool,
    pub single_c1: bool,
    pub single_c2: bool,
    /// The five swap disjunctions, both branches each.
    pub swap_a2_b2: SwapFlags,
    pub swap_a2_d1: SwapFlags,
    pub swap_a2_b1d2: SwapFlags,
    pub swap_a2c2_m2: SwapFlags,
    pub swap_m1_m2: SwapFlags,
}

pub fn se_condition_flags(d: &GroupDecomposition, s: &Scalar) -> SeConditionFlags {
    let one = Scalar::one();
    let l1 = &(&d.a1 + &d.a2) + &(&d.c1 + &d.c2);
    let l2 = &(&d.b1 + &d.b2) + &(&d.d1 + &d.d2);
    let l1_star = &(&d.a1 + &(&d.b2 / s)) + &(&d.c2 + &(s * &d.d1));
    let l2_star = &(&(&d.a2 / s) + &d.b1) + &(&(s * &d.c1) + &d.d2);

    SeConditionFlags {
        opt_load_m1: l1_star <= one,
        opt_load_m2: l2_star <= one,
        min_load: l2 <= one,
        single_a1: l1 <= &l2 + &(&d.a1 / s),
        single_a2: l1 <= &l2 + &(&d.a2 / s),
        single_c1: l1 <= &l2 + &(s * &d.c1),
        single_c2: l1 <= &l2 + &(s * &d.c2),
        swap_a2_b2: SwapFlags {
            first: l1 <= &(&l2 - &d.b2) + &(&d.a2 / s),
            second: l2 <= &(&l1 - &d.a2) + &(&d.b2 / s),
        },
        swap_a2_d1: SwapFlags {
            first: l1 <= &(&l2 - &d.d1) + &(&d.a2 / s),
            second: l2 <= &(&l1 - &d.a2) + &(s * &d.d1),
        },
        swap_a2_b1d2: SwapFlags {
            first: l1 <= &(&(&l2 - &d.b1) - &d.d2) + &(&d.a2 / s),
            second: l2 <= &(&(&l1 - &d.a2) + &(&d.b1 / s)) + &(s * &d.d2),
        },
        swap_a2c2_m2: SwapFlags {
            first: l1 <= &(&d.a2 / s) + &(s * &d.c2),
            second: l2
                <= &(&(&d.a1 + &d.c1) + &(&(&d.b1 + &d.b2) / s)) + &(s * &(&d.d1 + &d.d2)),
        },
        swap_m1_m2: SwapFlags {
            first: l1 <= &(&(&d.a1 + &d.a2) / s) + &(s * &(&d.c1 + &d.c2)),
            second: l2 <= &(&(&d.b1 + &d.b2) / s) + &(s * &(&d.d1 + &d.d2)),
        },
    }
}
