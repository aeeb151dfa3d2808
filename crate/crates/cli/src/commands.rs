//! The six subcommands.

use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use favgame_core::bounds;
use favgame_core::certificates::{self, Certificate, CertificateFamily};
use favgame_core::equilibria::{self, EquilibriaError, Options};
use favgame_core::lp;
use favgame_core::model::{Instance, Job, Machine};
use favgame_core::scalar::Scalar;

use crate::format::{caps_from_env, parse_s, sig12};
use crate::instance_file::parse_instance;
use crate::{CertKind, Failure, LpMode, SizeDist};

const LP_TOLERANCE: f64 = 1e-9;

pub fn curve(s_min: f64, s_max: f64, step: f64, out: Option<&Path>) -> Result<(), Failure> {
    if !(1.0 <= s_min && s_min < s_max) || step <= 0.0 {
        return Err(Failure::Usage(format!(
            "need 1 <= s-min < s-max and step > 0, got s-min={s_min} s-max={s_max} step={step}"
        )));
    }
    let mut rows = String::from("s,poa,spoa,spoa_simple,segment\n");
    let mut i = 0u64;
    loop {
        let s = s_min + i as f64 * step;
        if s > s_max + step * 1e-9 {
            break;
        }
        let sv = Scalar::Float(s);
        let poa = bounds::poa_formula(&sv).expect("s >= 1");
        let spoa = bounds::spoa_formula(&sv).expect("s >= 1");
        let simple = bounds::spoa_simple(&sv).expect("s >= 1");
        let segment = bounds::segment_of(&sv).expect("s >= 1");
        rows.push_str(&format!(
            "{},{},{},{},{segment}\n",
            sig12(s),
            sig12(poa.to_f64()),
            sig12(spoa.to_f64()),
            sig12(simple.to_f64()),
        ));
        i += 1;
    }
    match out {
        None => print!("{rows}"),
        Some(path) => std::fs::write(path, rows)
            .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?,
    }
    Ok(())
}

pub fn breakpoints() -> Result<(), Failure> {
    let bp = bounds::breakpoints();
    for (i, value) in bp.as_array().iter().enumerate() {
        println!("s{} = {:.12}", i + 1, value.to_f64());
    }
    Ok(())
}

pub fn certify(kind: CertKind, segment: Option<u8>, s_raw: &str) -> Result<(), Failure> {
    let s = parse_s(s_raw)?;
    let cert = match kind {
        CertKind::Spoa => {
            let k = segment.ok_or_else(|| {
                Failure::Usage("--kind spoa requires --segment 1..=8".to_string())
            })?;
            certificates::spoa_certificate(k, &s)
        }
        CertKind::Poa => {
            reject_segment(segment)?;
            certificates::poa_certificate(&s)
        }
        CertKind::Example1 => {
            reject_segment(segment)?;
            certificates::bad_ne_example(&s)
        }
    }
    .map_err(|e| Failure::Usage(e.to_string()))?;

    let caps = caps_from_env()?;
    let report = certificates::verify_with(&cert, &caps).map_err(|e| match e {
        certificates::CertificateError::Model(
            favgame_core::model::ModelError::CapExceeded { .. },
        )
        | certificates::CertificateError::Equilibria(EquilibriaError::CapExceeded { .. }) => {
            Failure::Cap(e.to_string())
        }
        other => Failure::Usage(other.to_string()),
    })?;

    print_certificate(&cert);
    println!("loads match expected:    {}", tick(report.loads_match));
    println!("optimum equals 1:        {}", tick(report.opt_is_one));
    println!("equilibrium kind holds:  {}", tick(report.equilibrium_kind_holds));
    println!("ratio matches formula:   {}", tick(report.ratio_matches));
    println!("{}", if report.pass() { "PASS" } else { "FAIL" });

    let machine = json!({
        "kind": format!("{:?}", cert.kind),
        "family": family_name(&cert.family),
        "segment": match cert.family {
            CertificateFamily::SpoaSegment(k) => Some(k),
            _ => None,
        },
        "s": cert.instance.s.to_string(),
        "expected_ratio": cert.expected_ratio.to_string(),
        "loads_match": report.loads_match,
        "opt_is_one": report.opt_is_one,
        "equilibrium_kind_holds": report.equilibrium_kind_holds,
        "ratio_matches": report.ratio_matches,
        "pass": report.pass(),
    });
    println!("{machine}");

    if report.pass() {
        Ok(())
    } else {
        Err(Failure::Verification(report.details))
    }
}

fn reject_segment(segment: Option<u8>) -> Result<(), Failure> {
    match segment {
        None => Ok(()),
        Some(_) => Err(Failure::Usage(
            "--segment only applies to --kind spoa".to_string(),
        )),
    }
}

fn family_name(family: &CertificateFamily) -> String {
    match family {
        CertificateFamily::SpoaSegment(_) => "spoa".to_string(),
        CertificateFamily::Poa => "poa".to_string(),
        CertificateFamily::Example1 => "example1".to_string(),
    }
}

fn print_certificate(cert: &Certificate) {
    let inst = &cert.instance;
    println!(
        "certificate {} at s = {} ({} jobs)",
        match cert.family {
            CertificateFamily::SpoaSegment(k) => format!("spoa segment {k}"),
            CertificateFamily::Poa => "poa".to_string(),
            CertificateFamily::Example1 => "example1".to_string(),
        },
        inst.s,
        inst.len()
    );
    for (i, job) in inst.jobs.iter().enumerate() {
        println!(
            "  job {}: size {}, favorite {}, equilibrium {}, reference {}",
            i + 1,
            job.size,
            job.favorite,
            cert.equilibrium.choice(i),
            cert.reference_opt.choice(i)
        );
    }
    println!(
        "expected loads ({}, {}), expected ratio {}",
        cert.expected_l1, cert.expected_l2, cert.expected_ratio
    );
}

fn tick(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "NO"
    }
}

pub fn lp_check(s_raw: &str, mode: LpMode) -> Result<(), Failure> {
    let s = parse_s(s_raw)?;
    let (lp_mode, label) = match mode {
        LpMode::Se => (lp::Mode::StrongNash, "se"),
        LpMode::Ne => (lp::Mode::Nash, "ne"),
    };
    let max = lp::max_l1(&s, lp_mode).map_err(|e| Failure::Solver(e.to_string()))?;
    let formula = match mode {
        LpMode::Se => bounds::spoa_formula(&s),
        LpMode::Ne => bounds::poa_formula(&s),
    }
    .map_err(|e| Failure::Usage(e.to_string()))?;
    let diff = &max - &formula;
    println!("mode {label}, s = {s}");
    println!("lp maximum = {} ({})", max, sig12(max.to_f64()));
    println!("formula    = {} ({})", formula, sig12(formula.to_f64()));
    println!("difference = {}", diff.to_f64());
    if diff.abs().to_f64() <= LP_TOLERANCE {
        println!("PASS (|difference| <= 1e-9)");
        Ok(())
    } else {
        println!("FAIL (|difference| > 1e-9)");
        Err(Failure::Verification(format!(
            "lp maximum {max} differs from formula {formula}"
        )))
    }
}

pub fn analyze(file: &Path, coalitions: bool) -> Result<(), Failure> {
    let text = std::fs::read_to_string(file)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", file.display())))?;
    let inst = parse_instance(&text).map_err(Failure::Usage)?;
    let opts = Options {
        caps: caps_from_env()?,
        ..Options::default()
    };
    let report = equilibria::analyze_with(&inst, &opts).map_err(|e| match e {
        EquilibriaError::CapExceeded { .. } => Failure::Cap(e.to_string()),
        other => Failure::Verification(other.to_string()),
    })?;

    println!("s = {}, jobs = {}", inst.s, inst.len());
    println!("opt = {}", report.opt);
    println!("NE count = {}", report.nash_allocations.len());
    println!("SE count = {}", report.strong_allocations.len());
    for x in &report.nash_allocations {
        let strong = report.strong_allocations.contains(x);
        let mk = favgame_core::model::makespan(&inst, x).expect("allocation matches");
        let mark = if strong { " [SE]" } else { "" };
        println!("  {x}  makespan {mk}{mark}");
        if coalitions && !strong {
            let coalition = equilibria::improving_coalition_with(&inst, x, &opts)
                .expect("cap already checked")
                .expect("non-strong NE has an improving coalition");
            let members: Vec<String> =
                coalition.members.iter().map(|j| (j + 1).to_string()).collect();
            println!("    improving coalition: jobs {{{}}}", members.join(","));
        }
    }
    let ratio = |worst: &Scalar| {
        if report.opt.is_zero() {
            "undefined".to_string()
        } else {
            let r = worst / &report.opt;
            format!("{r} ({})", sig12(r.to_f64()))
        }
    };
    println!("worst NE makespan = {}", report.worst_ne_makespan);
    println!("worst SE makespan = {}", report.worst_se_makespan);
    println!("poa  = {}", ratio(&report.worst_ne_makespan));
    println!("spoa = {}", ratio(&report.worst_se_makespan));
    Ok(())
}

pub fn search(
    s_raw: &str,
    jobs: usize,
    trials: u64,
    seed: u64,
    size_dist: SizeDist,
) -> Result<(), Failure> {
    let s = parse_s(s_raw)?;
    let caps = caps_from_env()?;
    let cap = caps.enumeration.min(caps.coalitions);
    if jobs > cap {
        return Err(Failure::Cap(format!("{jobs} jobs exceed the cap of {cap}")));
    }
    println!(
        "search: s = {s}, jobs = {jobs}, trials = {trials}, seed = {seed}, sizes {:?}",
        size_dist
    );
    if trials == 0 {
        println!("no trials");
        return Ok(());
    }

    let poa_bound = bounds::poa_formula(&s).expect("s >= 1");
    let spoa_bound = bounds::spoa_formula(&s).expect("s >= 1");

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let instances: Vec<Instance> = (0..trials)
        .map(|_| random_instance(&mut rng, &s, jobs, size_dist))
        .collect();

    let opts = Options {
        caps,
        ..Options::default()
    };
    let results: Vec<Result<(Scalar, Scalar), EquilibriaError>> = instances
        .par_iter()
        .map(|inst| {
            let report = equilibria::analyze_with(inst, &opts)?;
            if report.opt.is_zero() {
                return Err(EquilibriaError::UndefinedRatio);
            }
            Ok((
                &report.worst_ne_makespan / &report.opt,
                &report.worst_se_makespan / &report.opt,
            ))
        })
        .collect();

    let mut max_poa = Scalar::zero();
    let mut max_spoa = Scalar::zero();
    let mut offender: Option<usize> = None;
    for (i, result) in results.iter().enumerate() {
        let (poa, spoa) = match result {
            Ok(pair) => pair,
            Err(e) => {
                return Err(Failure::Verification(format!("trial {}: {e}", i + 1)));
            }
        };
        if *poa > max_poa {
            max_poa = poa.clone();
        }
        if *spoa > max_spoa {
            max_spoa = spoa.clone();
        }
        let beats_poa = poa.to_f64() > poa_bound.to_f64() + LP_TOLERANCE;
        let beats_spoa = spoa.to_f64() > spoa_bound.to_f64() + LP_TOLERANCE;
        if (beats_poa || beats_spoa) && offender.is_none() {
            offender = Some(i);
        }
    }

    println!(
        "max poa ratio  = {} ({}), curve {} ({})",
        max_poa,
        sig12(max_poa.to_f64()),
        poa_bound,
        sig12(poa_bound.to_f64())
    );
    println!(
        "max spoa ratio = {} ({}), curve {} ({})",
        max_spoa,
        sig12(max_spoa.to_f64()),
        spoa_bound,
        sig12(spoa_bound.to_f64())
    );

    match offender {
        None => {
            println!("PASS: no ratio exceeds its curve by more than 1e-9");
            Ok(())
        }
        Some(i) => {
            let inst = &instances[i];
            let mut msg = format!("counterexample at trial {}: s = {}, jobs:", i + 1, inst.s);
            for job in &inst.jobs {
                msg.push_str(&format!(" ({}, {})", job.size, job.favorite));
            }
            let _ = writeln!(std::io::stderr(), "{msg}");
            Err(Failure::Verification(
                "a sampled instance beats the closed-form curve".to_string(),
            ))
        }
    }
}

/// Sizes are rationalized to denominator 10⁶ so equilibrium checks
/// stay exact when s is rational.
fn random_instance(rng: &mut ChaCha8Rng, s: &Scalar, jobs: usize, dist: SizeDist) -> Instance {
    const DENOM: i64 = 1_000_000;
    let jobs = (0..jobs)
        .map(|_| {
            let numer = match dist {
                SizeDist::Uniform => rng.gen_range(1..=DENOM),
                SizeDist::Exp => {
                    let u: f64 = rng.gen();
                    let v = -(1.0 - u).ln();
                    ((v * DENOM as f64).round() as i64).max(1)
                }
            };
            let favorite = if rng.gen() { Machine::M1 } else { Machine::M2 };
            Job::new(Scalar::ratio(numer, DENOM), favorite)
        })
        .collect();
    Instance::new(s.clone(), jobs)
}
