use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::gpt::{Measurement, StateVec, System, TransformMat};
use crate::linalg;
use crate::oracles::OracleSystem;

use super::algorithm::{posterior, run_algorithm, QueryAlgorithm};
use super::problem::LearningProblem;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "GPTLAB_THREADS";

/// Runs `f` on a pool limited by `GPTLAB_THREADS` when it is set.
pub fn with_thread_cap<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    let cap = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()).filter(|&n| n > 0);
    match cap.and_then(|n| rayon::ThreadPoolBuilder::new().num_threads(n).build().ok()) {
        Some(pool) => pool.install(f),
        None => f(),
    }
}

/// A random n-query algorithm on control ⊗ quantum(workspace_dim): Haar
/// pure σ, Haar unitary interleaves, and a Haar-rotated rank-one
/// projective measurement. A workspace dimension of 1 drops the workspace.
pub fn random_algorithm<R: rand::Rng + ?Sized>(
    control: &System,
    workspace_dim: usize,
    n: usize,
    rng: &mut R,
) -> Result<QueryAlgorithm> {
    let sys = if workspace_dim <= 1 {
        control.clone()
    } else {
        System::composite(control, &System::quantum(workspace_dim))
    };
    let h = sys.hilbert_dim();
    let initial = StateVec::from_ket(&sys, &linalg::haar_state(h, rng))?;
    let interleave = (0..n)
        .map(|_| TransformMat::from_unitary(&sys, &linalg::haar_unitary(h, rng)))
        .collect::<Result<Vec<_>>>()?;
    let measurement = Measurement::from_basis(&sys, &linalg::haar_unitary(h, rng), 1e-9)?;
    QueryAlgorithm::new(initial, interleave, measurement)
}

/// Statistical evidence for (or against) n useless generalised queries.
#[derive(Clone, Debug, Serialize)]
pub struct SampledUselessness {
    pub check: &'static str,
    pub n: usize,
    /// Maximal order of interference of the oracle's control slits.
    pub k: usize,
    pub samples: usize,
    pub workspace_dim: usize,
    pub max_deviation: f64,
    pub excluded_outcomes: usize,
    pub tolerance: f64,
    pub pass: bool,
    pub seed: u64,
    pub evidence: &'static str,
}

/// Max over random algorithms and outcomes of |μ(C_j|s) − μ(C_j)|. Trial t
/// draws from its own stream of `seed`, so the result does not depend on
/// scheduling.
#[allow(clippy::too_many_arguments)]
pub fn generalized_useless_sample(
    problem: &LearningProblem,
    oracles: &OracleSystem,
    n: usize,
    samples: usize,
    seed: u64,
    tol: f64,
    workspace_dim: usize,
) -> Result<SampledUselessness> {
    let k = oracles.projectors().max_interference_order(1e-9)?.order;
    let control = oracles.control().clone();
    let trials: Vec<Result<(f64, usize)>> = with_thread_cap(|| {
        (0..samples)
            .into_par_iter()
            .map(|t| {
                let mut rng = linalg::rng_for(seed, t as u64);
                let alg = random_algorithm(&control, workspace_dim, n, &mut rng)?;
                let states = run_algorithm(problem, oracles, &alg)?;
                let report = posterior(problem, &states, &alg.measurement)?;
                Ok((report.max_deviation, report.excluded_outcomes))
            })
            .collect()
    });
    let mut max_deviation: f64 = 0.0;
    let mut excluded = 0;
    for t in trials {
        let (d, e) = t?;
        max_deviation = max_deviation.max(d);
        excluded += e;
    }
    Ok(SampledUselessness {
        check: "generalized-useless",
        n,
        k,
        samples,
        workspace_dim,
        max_deviation,
        excluded_outcomes: excluded,
        tolerance: tol,
        pass: max_deviation < tol,
        seed,
        evidence: "sampled",
    })
}
