//! Property tests for the model/equilibria invariants and the
//! cross-checks tying certificates to the branch-LP relaxation.

use proptest::prelude::*;

use favgame_core::bounds;
use favgame_core::certificates::{
    poa_certificate, se_condition_flags, spoa_certificate, SwapFlags,
};
use favgame_core::equilibria::{
    self, deviate, is_nash, is_strong_nash, job_cost, Coalition,
};
use favgame_core::lp::{self, BranchSpec, Mode, Side, Sign};
use favgame_core::model::{
    decompose, enumerate_allocations, loads_from_decomposition, machine_loads, makespan, optimum,
    Allocation, GroupDecomposition, Instance, Job, Machine,
};
use favgame_core::scalar::Scalar;
use favgame_core::Caps;

fn job_strategy() -> impl Strategy<Value = Job> {
    ((1i64..=60, 1i64..=12), any::<bool>()).prop_map(|((p, q), fav)| {
        Job::new(
            Scalar::ratio(p, q),
            if fav { Machine::M1 } else { Machine::M2 },
        )
    })
}

fn instance_strategy(max_jobs: usize) -> impl Strategy<Value = Instance> {
    ((10i64..=40), proptest::collection::vec(job_strategy(), 0..=max_jobs))
        .prop_map(|(s10, jobs)| Instance::new(Scalar::ratio(s10, 10), jobs))
}

fn flipped(inst: &Instance) -> Instance {
    Instance::new(
        inst.s.clone(),
        inst.jobs
            .iter()
            .map(|j| Job::new(j.size.clone(), j.favorite.other()))
            .collect(),
    )
}

fn flipped_allocation(x: &Allocation) -> Allocation {
    Allocation::new(x.choices().iter().map(|m| m.other()).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    /// Group loads reconstruct the machine loads of both allocations.
    #[test]
    fn decomposition_reconstructs_loads(
        inst in instance_strategy(6),
        bits in proptest::collection::vec(any::<(bool, bool)>(), 6),
    ) {
        let n = inst.len();
        let x = Allocation::new(bits.iter().take(n).map(|b| if b.0 { Machine::M2 } else { Machine::M1 }).collect());
        let y = Allocation::new(bits.iter().take(n).map(|b| if b.1 { Machine::M2 } else { Machine::M1 }).collect());
        let d = decompose(&inst, &x, &y).unwrap();
        let (l1, l2, l1s, l2s) = loads_from_decomposition(&d, &inst.s).unwrap();
        let (xl1, xl2) = machine_loads(&inst, &x).unwrap();
        let (yl1, yl2) = machine_loads(&inst, &y).unwrap();
        prop_assert_eq!(l1, xl1);
        prop_assert_eq!(l2, xl2);
        prop_assert_eq!(l1s, yl1);
        prop_assert_eq!(l2s, yl2);
    }

    /// The exhaustive optimum really is a lower bound, attained first
    /// in lexicographic order.
    #[test]
    fn optimum_is_lex_first_minimum(inst in instance_strategy(5)) {
        let (value, arg) = optimum(&inst).unwrap();
        let mut first_attaining = None;
        for x in enumerate_allocations(inst.len(), &Caps::default()).unwrap() {
            let mk = makespan(&inst, &x).unwrap();
            prop_assert!(value <= mk);
            if first_attaining.is_none() && mk == value {
                first_attaining = Some(x);
            }
        }
        prop_assert_eq!(first_attaining.unwrap(), arg);
    }

    /// Relabeling machines together with favorites preserves makespan
    /// and both equilibrium predicates.
    #[test]
    fn machine_relabel_invariance(
        inst in instance_strategy(5),
        bits in proptest::collection::vec(any::<bool>(), 5),
    ) {
        let n = inst.len();
        let x = Allocation::new(bits.iter().take(n).map(|&b| if b { Machine::M2 } else { Machine::M1 }).collect());
        let mirrored = flipped(&inst);
        let mx = flipped_allocation(&x);
        prop_assert_eq!(makespan(&inst, &x).unwrap(), makespan(&mirrored, &mx).unwrap());
        prop_assert_eq!(is_nash(&inst, &x).unwrap(), is_nash(&mirrored, &mx).unwrap());
        prop_assert_eq!(
            is_strong_nash(&inst, &x).unwrap(),
            is_strong_nash(&mirrored, &mx).unwrap()
        );
    }

    /// Multiplying every size by a positive constant changes no
    /// equilibrium decision and neither anarchy ratio.
    #[test]
    fn scaling_invariance(
        inst in instance_strategy(5),
        bits in proptest::collection::vec(any::<bool>(), 5),
        scale in (1i64..=30, 1i64..=30),
    ) {
        let n = inst.len();
        let c = Scalar::ratio(scale.0, scale.1);
        let scaled = Instance::new(
            inst.s.clone(),
            inst.jobs.iter().map(|j| Job::new(&j.size * &c, j.favorite)).collect(),
        );
        let x = Allocation::new(bits.iter().take(n).map(|&b| if b { Machine::M2 } else { Machine::M1 }).collect());
        prop_assert_eq!(is_nash(&inst, &x).unwrap(), is_nash(&scaled, &x).unwrap());
        prop_assert_eq!(
            is_strong_nash(&inst, &x).unwrap(),
            is_strong_nash(&scaled, &x).unwrap()
        );
        if n > 0 {
            prop_assert_eq!(
                equilibria::poa_of_instance(&inst).unwrap(),
                equilibria::poa_of_instance(&scaled).unwrap()
            );
            prop_assert_eq!(
                equilibria::spoa_of_instance(&inst).unwrap(),
                equilibria::spoa_of_instance(&scaled).unwrap()
            );
        }
    }

    /// Strong equilibria are Nash equilibria, and the worst-case
    /// ratios are ordered accordingly.
    #[test]
    fn strong_subset_of_nash(inst in instance_strategy(5)) {
        let report = equilibria::analyze(&inst).unwrap();
        for x in &report.strong_allocations {
            prop_assert!(report.nash_allocations.contains(x));
            prop_assert!(is_nash(&inst, x).unwrap());
        }
        prop_assert!(report.worst_se_makespan <= report.worst_ne_makespan);
        if !report.opt.is_zero() {
            prop_assert!(
                equilibria::spoa_of_instance(&inst).unwrap()
                    <= equilibria::poa_of_instance(&inst).unwrap()
            );
        }
    }
}

/// All improving coalitions of an allocation, by plain enumeration.
fn all_improving_coalitions(inst: &Instance, x: &Allocation) -> Vec<Coalition> {
    use itertools::Itertools;
    let n = inst.len();
    let mut found = Vec::new();
    for size in 1..=n {
        for combo in (0..n).combinations(size) {
            let coalition = Coalition::new(combo.clone());
            let moved = deviate(x, &coalition).unwrap();
            let improves = combo.iter().all(|&j| {
                job_cost(inst, &moved, j).unwrap() < job_cost(inst, x, j).unwrap()
            });
            if improves {
                found.push(coalition);
            }
        }
    }
    found
}

/// Growing the off-favorite machine-1 job of a segment certificate
/// breaks the equilibrium; every improving coalition of the broken
/// allocation must contain that job (it is job 0 by construction).
#[test]
fn broken_certificate_coalitions_contain_the_bad_m1_job() {
    for (k, s) in [(3u8, Scalar::ratio(17, 10)), (5, Scalar::ratio(39, 20))] {
        let cert = spoa_certificate(k, &s).unwrap();
        let mut inst = cert.instance.clone();
        inst.jobs[0].size = &inst.jobs[0].size * &Scalar::ratio(11, 10);
        let x = &cert.equilibrium;
        assert!(
            !is_strong_nash(&inst, x).unwrap(),
            "perturbation too small to break segment {k}"
        );
        let coalitions = all_improving_coalitions(&inst, x);
        assert!(!coalitions.is_empty());
        for c in coalitions {
            assert!(c.members.contains(&0), "coalition {c:?} avoids the bad job");
        }
    }
}

/// The certificate decompositions respect the optimal-load budgets.
#[test]
fn certificate_reference_loads_fit_the_optimum() {
    for k in 1..=8u8 {
        let s = sample_interior(k);
        let cert = spoa_certificate(k, &s).unwrap();
        let d = decompose(&cert.instance, &cert.equilibrium, &cert.reference_opt).unwrap();
        let (_, _, l1s, l2s) = loads_from_decomposition(&d, &s).unwrap();
        assert!(l1s <= Scalar::one(), "segment {k}");
        assert!(l2s <= Scalar::one(), "segment {k}");
        let flags = se_condition_flags(&d, &s);
        assert!(flags.opt_load_m1 && flags.opt_load_m2 && flags.min_load);
        // A strong equilibrium satisfies at least one side of every pair.
        for (name, pair) in pairs(&flags) {
            assert!(pair.either(), "segment {k}: no side of {name} holds");
        }
    }
}

fn pairs(flags: &favgame_core::certificates::SeConditionFlags) -> [(&'static str, SwapFlags); 5] {
    [
        ("a2-b2", flags.swap_a2_b2),
        ("a2-d1", flags.swap_a2_d1),
        ("a2-{b1,d2}", flags.swap_a2_b1d2),
        ("{a2,c2}-m2", flags.swap_a2c2_m2),
        ("m1-m2", flags.swap_m1_m2),
    ]
}

fn sample_interior(k: u8) -> Scalar {
    let piece = &bounds::pieces()[k as usize - 1];
    let lo = piece.lo.to_f64();
    let hi = if k == 8 { lo + 2.0 } else { piece.hi.to_f64() };
    Scalar::ratio(((lo + 0.45 * (hi - lo)) * 1e4).round() as i64, 10_000)
}

/// Each certificate decomposition is feasible for the branch that
/// matches its sign pattern and satisfied disjunction sides, and its
/// makespan never exceeds the branch-union maximum.
#[test]
fn certificates_are_feasible_for_their_branch() {
    for k in 1..=8u8 {
        let s = sample_interior(k);
        let cert = spoa_certificate(k, &s).unwrap();
        let d = decompose(&cert.instance, &cert.equilibrium, &cert.reference_opt).unwrap();
        let flags = se_condition_flags(&d, &s);
        let branch = BranchSpec {
            signs: [&d.a1, &d.a2, &d.c1, &d.c2].map(|g| {
                if g.is_zero() {
                    Sign::Zero
                } else {
                    Sign::Active
                }
            }),
            swaps: pairs(&flags).map(|(_, pair)| {
                if pair.first {
                    Side::First
                } else {
                    Side::Second
                }
            }),
        };
        let lp = lp::build_system(&s, Mode::StrongNash, &branch);
        let point = [
            d.a1.clone(),
            d.a2.clone(),
            d.b1.clone(),
            d.b2.clone(),
            d.c1.clone(),
            d.c2.clone(),
            d.d1.clone(),
            d.d2.clone(),
        ];
        assert!(lp.admits(&point), "segment {k} infeasible for its own branch");
        let max = lp::max_l1(&s, Mode::StrongNash).unwrap();
        assert!(cert.expected_l1 <= max, "segment {k}: {} > {max}", cert.expected_l1);
    }

    // Same soundness for the worst-NE construction in Nash mode.
    let s = Scalar::from_int(2);
    let cert = poa_certificate(&s).unwrap();
    let d = decompose(&cert.instance, &cert.equilibrium, &cert.reference_opt).unwrap();
    let max = lp::max_l1(&s, Mode::Nash).unwrap();
    let (l1, _, _, _) = loads_from_decomposition(&d, &s).unwrap();
    assert!(l1 <= max);
}

/// Tightening a branch never raises its optimum.
#[test]
fn extra_constraint_never_helps() {
    use lp::{Constraint, Relation};
    let s = Scalar::ratio(9, 5);
    for branch in lp::branches(Mode::StrongNash).into_iter().step_by(37) {
        let lp0 = lp::build_system(&s, Mode::StrongNash, &branch);
        let base = lp::solve_lp(&lp0).unwrap().optimum;
        let mut tightened = lp0.clone();
        let mut coeffs = vec![Scalar::zero(); 8];
        coeffs[1] = Scalar::one();
        coeffs[5] = Scalar::from_int(2);
        tightened.constraints.push(Constraint {
            label: "extra".into(),
            coeffs,
            relation: Relation::Le,
            rhs: Scalar::ratio(1, 2),
        });
        let tightened_value = lp::solve_lp(&tightened).unwrap().optimum;
        assert!(tightened_value <= base);
    }
}

/// The empty decomposition trivially satisfies every condition, and a
/// decomposition in which machine 2 carries more than machine 1 is
/// rejected by the WLOG row.
#[test]
fn branch_system_orientation() {
    let s = Scalar::from_int(2);
    let branch = BranchSpec {
        signs: [Sign::Zero; 4],
        swaps: [Side::First; 5],
    };
    let lp0 = lp::build_system(&s, Mode::StrongNash, &branch);
    let zeros = vec![Scalar::zero(); 8];
    assert!(lp0.admits(&zeros));
    let mut m2_heavy = zeros.clone();
    m2_heavy[2] = Scalar::one(); // b1 = 1 while machine 1 is empty
    assert!(!lp0.admits(&m2_heavy));
}

/// The analysis must not depend on how the allocation space is split
/// across workers.
#[test]
fn analyze_is_independent_of_worker_count() {
    let inst = Instance::new(
        Scalar::ratio(9, 4),
        vec![
            Job::new(Scalar::ratio(2, 3), Machine::M1),
            Job::new(Scalar::ratio(1, 2), Machine::M2),
            Job::new(Scalar::ratio(5, 4), Machine::M2),
            Job::new(Scalar::ratio(7, 5), Machine::M1),
            Job::new(Scalar::ratio(1, 7), Machine::M1),
        ],
    );
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| equilibria::analyze(&inst).unwrap())
    };
    let single = run(1);
    let several = run(4);
    assert_eq!(single.nash_allocations, several.nash_allocations);
    assert_eq!(single.strong_allocations, several.strong_allocations);
    assert_eq!(single.opt, several.opt);
    assert_eq!(single.worst_ne_makespan, several.worst_ne_makespan);
    assert_eq!(single.worst_se_makespan, several.worst_se_makespan);
}

/// Primal feasibility, nonnegative duals on `≤` rows, and strong
/// duality hold at every solver answer.
#[test]
fn solver_solutions_carry_their_certificates() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
    for _ in 0..100 {
        let n = rng.gen_range(2..=6usize);
        let m = rng.gen_range(2..=8usize);
        let mut constraints = vec![lp::Constraint {
            label: "bounding".into(),
            coeffs: (0..n).map(|_| Scalar::from_int(rng.gen_range(1..=3))).collect(),
            relation: lp::Relation::Le,
            rhs: Scalar::from_int(rng.gen_range(1..=9)),
        }];
        for i in 1..m {
            constraints.push(lp::Constraint {
                label: format!("r{i}"),
                coeffs: (0..n)
                    .map(|_| Scalar::from_int(rng.gen_range(-3..=4)))
                    .collect(),
                relation: lp::Relation::Le,
                rhs: Scalar::from_int(rng.gen_range(0..=9)),
            });
        }
        let problem = lp::LinearProgram {
            objective: (0..n)
                .map(|_| Scalar::from_int(rng.gen_range(-4..=5)))
                .collect(),
            constraints,
        };
        let sol = lp::solve_lp(&problem).unwrap();
        assert!(problem.admits(&sol.point), "returned point infeasible");
        let mut dual_value = Scalar::zero();
        for (c, y) in problem.constraints.iter().zip(&sol.duals) {
            assert!(*y >= Scalar::zero(), "negative dual on a <= row");
            dual_value = &dual_value + &(y * &c.rhs);
        }
        assert_eq!(dual_value, sol.optimum, "strong duality violated");
    }
}

/// Group decomposition of a certificate matches the generating column
/// values at a hand-checked point.
#[test]
fn segment2_decomposition_at_known_point() {
    let s = Scalar::ratio(3, 2);
    let cert = spoa_certificate(2, &s).unwrap();
    let d = decompose(&cert.instance, &cert.equilibrium, &cert.reference_opt).unwrap();
    let want = GroupDecomposition {
        a2: Scalar::ratio(15, 16),
        b2: Scalar::ratio(9, 16),
        c2: Scalar::ratio(5, 8),
        d2: Scalar::ratio(3, 8),
        ..GroupDecomposition::zero()
    };
    assert_eq!(d, want);
}
