//! Learning problems, exact classical uselessness, generalised query
//! algorithms with Bayesian posteriors, sampled uselessness, and parity.

mod algorithm;
mod classical;
mod parity;
mod problem;
mod sampling;

pub use algorithm::{
    posterior, posterior_exact, run_algorithm, success_probabilities, ExactPosterior, OutcomePosterior,
    PosteriorReport, QueryAlgorithm, NEGLIGIBLE_OUTCOME,
};
pub use classical::{classical_useless, max_useless_classical, Certificate, ClassicalVerdict};
pub use parity::{deutsch_parity_algorithm, parity_problem, useless_bound, MAX_PARITY_INPUTS};
pub use problem::{parse_rational, rational_to_f64, LearningProblem, ProblemFunction};
pub use sampling::{generalized_useless_sample, random_algorithm, with_thread_cap, SampledUselessness, THREADS_ENV};
