//! Acceptance gate. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any failed. Built with `harness = false` so the lines
//! show up in plain `cargo test` output.

use std::process::Command;
use std::time::{Duration, Instant};

use num::BigRational;
use rand::Rng;

use gptlab::dependency::{check_factorization, formal_posterior_check, UselessnessPremise};
use gptlab::gpt::{EffectVec, StateVec};
use gptlab::interference::{standard_slits, ProjectorFamily, SlitSet};
use gptlab::linalg::{self, CMat, RVec};
use gptlab::oracles::{all_functions, build_phase_oracle_family, build_with_phases, numeric_domain, Realization};
use gptlab::query::{
    classical_useless, deutsch_parity_algorithm, generalized_useless_sample, parity_problem, posterior, run_algorithm,
    success_probabilities, LearningProblem,
};
use gptlab::subroutine::{amplify, build_oracle_from_algorithm, repetitions_for, verify_subroutine_bound, ToyAlgorithm};
use gptlab::Config;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn cfg() -> Config {
    Config::default()
}

fn interference_order() -> Outcome {
    let mut worst_k2: f64 = 0.0;
    let mut least_k1 = f64::INFINITY;
    for n in [3, 4, 5] {
        let q = ProjectorFamily::new(&standard_slits(true, n, &cfg()).map_err(|e| e.to_string())?);
        let r2 = q.coherence_identity_residual(2).map_err(|e| e.to_string())?;
        let r1 = q.coherence_identity_residual(1).map_err(|e| e.to_string())?;
        ensure(r2 < 1e-9, || format!("quantum N={n}: k=2 residual {r2:e}"))?;
        ensure(r1 > 0.1, || format!("quantum N={n}: k=1 residual {r1:e}"))?;
        let c = ProjectorFamily::new(&standard_slits(false, n, &cfg()).map_err(|e| e.to_string())?);
        let c1 = c.coherence_identity_residual(1).map_err(|e| e.to_string())?;
        ensure(c1 == 0.0, || format!("classical N={n}: k=1 residual {c1:e}"))?;
        worst_k2 = worst_k2.max(r2);
        least_k1 = least_k1.min(r1);
    }
    Ok(format!("quantum k=2 residual ≤ {worst_k2:.1e}, k=1 ≥ {least_k1:.3}; classical k=1 exactly 0"))
}

fn qutrit_displays() -> Outcome {
    let fam = ProjectorFamily::new(&standard_slits(true, 3, &cfg()).map_err(|e| e.to_string())?);
    let sys = fam.slits().system().clone();
    let set = SlitSet::from_indices(&[0, 1]);
    let p01 = fam.face_projector(set).map_err(|e| e.to_string())?;
    let w01 = fam.coherence_projector(set).map_err(|e| e.to_string())?;
    let mut rng = linalg::rng_for(2, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let s = StateVec::new(&sys, sys.sample_state(&mut rng)).map_err(|e| e.to_string())?;
        let rho = s.to_density();
        // the displayed actions, entry by entry
        let keep_block = CMat::from_fn(3, 3, |i, j| if i < 2 && j < 2 { rho[(i, j)] } else { linalg::ZERO });
        let keep_coherence = CMat::from_fn(3, 3, |i, j| if i < 2 && j < 2 && i != j { rho[(i, j)] } else { linalg::ZERO });
        let got_p = p01.apply(&s).map_err(|e| e.to_string())?.to_density();
        let got_w = w01.apply(&s).map_err(|e| e.to_string())?.to_density();
        worst = worst.max(linalg::sup_norm_c(&(got_p - keep_block)));
        worst = worst.max(linalg::sup_norm_c(&(got_w - keep_coherence)));
    }
    ensure(worst < 1e-12, || format!("entrywise deviation {worst:e}"))?;
    Ok(format!("100 random qutrit states, max entrywise deviation {worst:.1e}"))
}

fn sorkin_functionals() -> Outcome {
    let fam = ProjectorFamily::new(&standard_slits(true, 3, &cfg()).map_err(|e| e.to_string())?);
    let sys = fam.slits().system().clone();
    let full = SlitSet::full(3);
    let mut rng = linalg::rng_for(3, 0);
    let (mut max_i3, mut max_i2): (f64, f64) = (0.0, 0.0);
    for _ in 0..1000 {
        let s = StateVec::new(&sys, sys.sample_state(&mut rng)).map_err(|e| e.to_string())?;
        let e = EffectVec::from_ket(&sys, &linalg::haar_state(3, &mut rng)).map_err(|e| e.to_string())?;
        max_i3 = max_i3.max(fam.sorkin_functional(&s, &e, full).map_err(|e| e.to_string())?.abs());
        for pair in [[0, 1], [0, 2], [1, 2]] {
            let i2 = fam.sorkin_functional(&s, &e, SlitSet::from_indices(&pair)).map_err(|e| e.to_string())?;
            max_i2 = max_i2.max(i2.abs());
        }
    }
    ensure(max_i3 < 1e-9, || format!("max |I_3| = {max_i3:e}"))?;
    ensure(max_i2 > 0.4, || format!("max |I_2| only {max_i2}"))?;

    let cfam = ProjectorFamily::new(&standard_slits(false, 3, &cfg()).map_err(|e| e.to_string())?);
    let csys = cfam.slits().system().clone();
    for _ in 0..1000 {
        let s = StateVec::new(&csys, csys.sample_state(&mut rng)).map_err(|e| e.to_string())?;
        let e = EffectVec::new(&csys, RVec::from_fn(3, |_, _| rng.random::<f64>())).map_err(|e| e.to_string())?;
        for pair in [[0, 1], [0, 2], [1, 2]] {
            let i2 = cfam.sorkin_functional(&s, &e, SlitSet::from_indices(&pair)).map_err(|e| e.to_string())?;
            ensure(i2 == 0.0, || format!("classical I_2 on {pair:?} is {i2:e}"))?;
        }
    }
    Ok(format!("max |I_3| = {max_i3:.1e}, max |I_2| = {max_i2:.3}, classical I_2 = 0 on 1000 pairs"))
}

fn projector_algebra() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut products = 0;
    for quantum in [true, false] {
        for n in 1..=5 {
            let fam = ProjectorFamily::new(&standard_slits(quantum, n, &cfg()).map_err(|e| e.to_string())?);
            let full = SlitSet::full(n);
            for i in full.subsets() {
                let pi = fam.face_projector(i).map_err(|e| e.to_string())?;
                for j in full.subsets() {
                    let pj = fam.face_projector(j).map_err(|e| e.to_string())?;
                    let pij = fam.face_projector(i.intersection(j)).map_err(|e| e.to_string())?;
                    let prod = pi.matrix() * pj.matrix();
                    worst = worst.max(linalg::sup_norm(&(prod - pij.matrix())));
                    products += 1;
                }
            }
        }
    }
    ensure(worst < 1e-9, || format!("‖P_I P_J − P_(I∩J)‖ = {worst:e}"))?;
    Ok(format!("{products} products, max deviation {worst:.1e}"))
}

fn deutsch_parity() -> Outcome {
    let mut detail = Vec::new();
    for n in 1..=8 {
        let (problem, oracles, alg) = deutsch_parity_algorithm(n, &cfg()).map_err(|e| e.to_string())?;
        ensure(alg.queries() == n.div_ceil(2), || format!("N={n}: {} queries", alg.queries()))?;
        ensure(problem.len() == 1 << n, || format!("N={n}: {} functions", problem.len()))?;
        let states = run_algorithm(&problem, &oracles, &alg).map_err(|e| e.to_string())?;
        let worst = success_probabilities(&problem, &states, &alg)
            .map_err(|e| e.to_string())?
            .into_iter()
            .fold(1.0, f64::min);
        ensure((1.0 - worst).abs() < 1e-9, || format!("N={n}: success {worst}"))?;
        if n == 2 {
            detail.push("N=2 single query".to_string());
        }
    }
    Ok(format!("N=1..8 succeed with ⌈N/2⌉ queries on every function ({})", detail.join(", ")))
}

fn classical_uselessness() -> Outcome {
    for n in 1..=6 {
        let p = parity_problem(n).map_err(|e| e.to_string())?;
        ensure(classical_useless(&p, n - 1).useless || n == 1, || format!("N={n}: N−1 queries informative"))?;
        ensure(!classical_useless(&p, n).useless, || format!("N={n}: N queries useless"))?;
    }
    Ok("N−1 useless and N informative for N=1..6 (exact rationals)".into())
}

fn quantum_uselessness() -> Outcome {
    let p5 = parity_problem(5).map_err(|e| e.to_string())?;
    let os5 = build_phase_oracle_family(p5.oracle_domain(), p5.oracle_functions(), None, &cfg()).map_err(|e| e.to_string())?;
    let sampled = generalized_useless_sample(&p5, &os5, 2, 500, 7, 1e-7, 2).map_err(|e| e.to_string())?;
    ensure(sampled.max_deviation < 1e-7, || format!("N=5 n=2 deviation {:e}", sampled.max_deviation))?;

    let p2 = parity_problem(2).map_err(|e| e.to_string())?;
    let os2 = build_phase_oracle_family(p2.oracle_domain(), p2.oracle_functions(), None, &cfg()).map_err(|e| e.to_string())?;
    let random = generalized_useless_sample(&p2, &os2, 1, 500, 7, 1e-7, 2).map_err(|e| e.to_string())?;
    let (problem, oracles, alg) = deutsch_parity_algorithm(2, &cfg()).map_err(|e| e.to_string())?;
    let states = run_algorithm(&problem, &oracles, &alg).map_err(|e| e.to_string())?;
    let deutsch = posterior(&problem, &states, &alg.measurement).map_err(|e| e.to_string())?.max_deviation;
    let found = random.max_deviation.max(deutsch);
    ensure(found >= 0.49, || format!("N=2 n=1 best deviation {found}"))?;
    Ok(format!(
        "N=5 n=2 max deviation {:.1e} over 500 algorithms; N=2 n=1 deviation {:.3} random, {:.3} Deutsch",
        sampled.max_deviation, random.max_deviation, deutsch
    ))
}

/// Every problem on two inputs: each nonempty set of value vectors, each
/// two-class labelling, uniform weights.
fn small_problems() -> Vec<LearningProblem> {
    let rows: [[u8; 2]; 4] = [[0, 0], [0, 1], [1, 0], [1, 1]];
    let mut out = Vec::new();
    for subset in 1u32..16 {
        let members: Vec<usize> = (0..4).filter(|i| subset >> i & 1 == 1).collect();
        let w = BigRational::new(1.into(), (members.len() as i64).into());
        for labels in 0u32..(1 << members.len()) {
            let functions = members
                .iter()
                .enumerate()
                .map(|(slot, &r)| {
                    let class = if labels >> slot & 1 == 1 { "b" } else { "a" };
                    (format!("f{r}"), rows[r].to_vec(), class.to_string(), w.clone())
                })
                .collect();
            out.push(LearningProblem::new(vec!["x".into(), "y".into()], functions).expect("valid problem"));
        }
    }
    out
}

fn symbolic_uselessness() -> Outcome {
    let mut verdicts = 0;
    for n_slits in 2..=8 {
        let problem = parity_problem(n_slits).map_err(|e| e.to_string())?;
        let premise = UselessnessPremise::new(&problem, n_slits - 1).map_err(|e| e.to_string())?;
        for k in 1..=6 {
            for n in 1..=(n_slits - 1) / k {
                let v = formal_posterior_check(&premise, k, n).map_err(|e| e.to_string())?;
                ensure(v.is_valid(), || format!("N={n_slits} k={k} n={n}: {}", v.verdict))?;
                verdicts += 1;
            }
        }
    }
    let family = small_problems();
    ensure(family.len() >= 50, || format!("only {} small problems", family.len()))?;
    let mut compared = 0;
    for p in &family {
        for n in 1..=3 {
            let formal = check_factorization(p, 1, n).map_err(|e| e.to_string())?.holds();
            let exact = classical_useless(p, n).useless;
            ensure(formal == exact, || format!("k=1 n={n} disagrees with the classical check"))?;
            compared += 1;
        }
    }
    Ok(format!(
        "{verdicts} parity verdicts proof-valid; k=1 agrees with classical on {} problems ({compared} cases)",
        family.len()
    ))
}

fn subroutine_theorem() -> Outcome {
    let cfg = cfg();
    let raw = ToyAlgorithm::bounded_error(&[0, 1], &[2.0 / 3.0, 2.0 / 3.0]).map_err(|e| e.to_string())?;
    let target = 1.0 - 2f64.powi(-5);
    let r = repetitions_for(2.0 / 3.0, target).map_err(|e| e.to_string())?;
    let amplified = amplify(&raw, r).map_err(|e| e.to_string())?;
    let oracle = build_oracle_from_algorithm(&amplified).map_err(|e| e.to_string())?;
    for b in oracle.per_x() {
        ensure(b.p_acc >= target, || format!("x={}: amplified P(acc) {}", b.x, b.p_acc))?;
        ensure((b.closed_circuit - b.p_acc * b.p_acc).abs() < 1e-9, || {
            format!("x={}: closed circuit {} vs P(acc)² {}", b.x, b.closed_circuit, b.p_acc * b.p_acc)
        })?;
    }
    let unamplified = verify_subroutine_bound(&raw, 3, &cfg).map_err(|e| e.to_string())?;
    ensure(!unamplified.pass, || "unamplified 2/3 algorithm passed q=3".into())?;
    let report = verify_subroutine_bound(&amplified, 3, &cfg).map_err(|e| e.to_string())?;
    ensure(report.pass, || format!("amplified min fidelity {}", report.min_fidelity))?;
    let exact = build_oracle_from_algorithm(&ToyAlgorithm::exact(&[0, 1]).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let exact_min = exact.per_x().iter().map(|b| b.fidelity).fold(1.0, f64::min);
    ensure((exact_min - 1.0).abs() < 1e-12, || format!("exact fidelity {exact_min}"))?;
    Ok(format!(
        "r={r}: P(acc)={:.5}, min fidelity {:.5} ≥ {:.3}; exact fidelity 1",
        oracle.per_x()[0].p_acc, report.min_fidelity, report.threshold
    ))
}

fn oracle_locality() -> Outcome {
    let mut pairs = 0;
    for n in 1..=5 {
        let os = build_phase_oracle_family(numeric_domain(n), all_functions(n), None, &cfg()).map_err(|e| e.to_string())?;
        let report = os.verify_locality(1e-12).map_err(|e| e.to_string())?;
        ensure(report.exhaustive, || format!("|X|={n}: not exhaustive"))?;
        ensure(report.passed(), || format!("|X|={n}: {} violations", report.violations.len()))?;
        pairs += report.pairs_checked;

        // independent density-matrix check: (O_f − O_g)ω_I vanishes entrywise
        let control = os.control().clone();
        let mut rng = linalg::rng_for(10, n as u64);
        let omega = |set: SlitSet, rho: &CMat| {
            CMat::from_fn(rho.nrows(), rho.ncols(), |i, j| {
                let pair = SlitSet::from_indices(&[i, j]);
                if pair == set {
                    rho[(i, j)]
                } else {
                    linalg::ZERO
                }
            })
        };
        for _ in 0..4 {
            let rho = StateVec::new(&control, control.sample_state(&mut rng)).map_err(|e| e.to_string())?.to_density();
            for set in SlitSet::full(n).subsets().filter(|s| (1..=2).contains(&s.len())) {
                let masked = omega(set, &rho);
                let s = StateVec::from_density(&control, &masked).map_err(|e| e.to_string())?;
                for (f, of) in os.oracles().iter().enumerate() {
                    let signs: Vec<f64> =
                        os.functions()[f].values.iter().map(|&v| if v == 1 { -1.0 } else { 1.0 }).collect();
                    let expected = CMat::from_fn(n, n, |i, j| masked[(i, j)] * signs[i] * signs[j]);
                    let got = of.matrix().apply(&s).map_err(|e| e.to_string())?.to_density();
                    let dev = linalg::sup_norm_c(&(got - expected));
                    ensure(dev < 1e-12, || format!("|X|={n}: oracle {f} differs from diag-sign action by {dev:e}"))?;
                }
            }
        }
    }

    // a phase at input 0 that also depends on f(2)
    let bad = build_with_phases(numeric_domain(4), all_functions(4), Realization::Phase, None, false, &cfg(), |f, x| {
        (f.values[x] == 1) ^ (x == 0 && f.values[2] == 1)
    })
    .map_err(|e| e.to_string())?;
    let report = bad.verify_locality(1e-12).map_err(|e| e.to_string())?;
    ensure(!report.passed(), || "injected violation not detected".into())?;
    Ok(format!(
        "{pairs} agreeing pairs clean for |X| ≤ 5; injected violation caught ({} hits)",
        report.violations.len()
    ))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let problem_path = dir.path().join("parity4.json");
    std::fs::write(&problem_path, parity_problem(4).and_then(|p| p.to_json()).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let problem_arg = problem_path.display().to_string();
    let runs: [Vec<&str>; 4] = [
        vec!["useless-check", "--in", &problem_arg, "--n", "1", "--samples", "60", "--seed", "9"],
        vec!["parity", "--N", "5", "--k", "2"],
        vec!["interference", "--N", "4", "--format", "csv"],
        vec!["subroutine", "--p", "3/4", "--q", "4"],
    ];
    for args in &runs {
        let once = || {
            Command::new(env!("CARGO_BIN_EXE_gptlab"))
                .args(args)
                .env("GPTLAB_THREADS", "3")
                .output()
                .map_err(|e| e.to_string())
        };
        let a = once()?;
        let b = Command::new(env!("CARGO_BIN_EXE_gptlab")).args(args).output().map_err(|e| e.to_string())?;
        ensure(a.status.code() == Some(0), || format!("{args:?} exited with {:?}", a.status.code()))?;
        ensure(!a.stdout.is_empty() && a.stdout == b.stdout, || format!("{args:?}: outputs differ"))?;
    }
    Ok(format!("{} commands byte-identical across runs and thread counts", runs.len()))
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome, Option<u64>);
    let criteria: [Criterion; 11] = [
        ("interference order", interference_order, Some(10)),
        ("qutrit projector displays", qutrit_displays, None),
        ("Sorkin functionals", sorkin_functionals, Some(30)),
        ("projector algebra", projector_algebra, None),
        ("Deutsch/parity", deutsch_parity, Some(60)),
        ("classical uselessness", classical_uselessness, None),
        ("useless queries, sampled k=2", quantum_uselessness, Some(300)),
        ("useless queries, symbolic k", symbolic_uselessness, Some(120)),
        ("subroutine", subroutine_theorem, Some(60)),
        ("oracle locality", oracle_locality, None),
        ("determinism", determinism, None),
    ];
    let mut failed = 0;
    for (i, (name, check, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let outcome = match (outcome, limit) {
            (Ok(_), Some(secs)) if elapsed > Duration::from_secs(*secs) => {
                Err(format!("took {:.1} s, limit {secs} s", elapsed.as_secs_f64()))
            }
            (o, _) => o,
        };
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("{tag} {:>2} {name:<30} {:>7.2}s  {detail}", i + 1, elapsed.as_secs_f64());
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
