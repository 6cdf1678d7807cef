use num::{BigRational, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gpt::{probability, Measurement, StateVec, System, TransformMat};
use crate::linalg::{RMat, RVec};
use crate::oracles::OracleSystem;

use super::problem::{rational_to_f64, LearningProblem};

/// Outcomes whose total probability falls below this are left out of the
/// posterior statistics.
pub const NEGLIGIBLE_OUTCOME: f64 = 1e-12;

/// σ, then n rounds of (O_f, G_i), then a measurement.
///
/// The algorithm's system is either the oracle's control system or a
/// composite with the control as its left factor and a workspace on the
/// right; oracle calls then act on the control alone.
#[derive(Clone, Debug)]
pub struct QueryAlgorithm {
    pub initial: StateVec,
    pub interleave: Vec<TransformMat>,
    pub measurement: Measurement,
    /// Outcome index to class index, when the algorithm announces a class.
    pub answer_map: Option<Vec<usize>>,
}

impl QueryAlgorithm {
    pub fn new(initial: StateVec, interleave: Vec<TransformMat>, measurement: Measurement) -> Result<Self> {
        let sys = initial.system();
        for (i, g) in interleave.iter().enumerate() {
            if g.input() != sys || g.output() != sys {
                return Err(Error::SystemMismatch {
                    expected: sys.label().to_string(),
                    found: format!("G_{} on {}", i + 1, g.input().label()),
                });
            }
        }
        if measurement.system() != sys {
            return Err(Error::SystemMismatch {
                expected: sys.label().to_string(),
                found: measurement.system().label().to_string(),
            });
        }
        Ok(QueryAlgorithm {
            initial,
            interleave,
            measurement,
            answer_map: None,
        })
    }

    pub fn with_answer_map(mut self, map: Vec<usize>) -> Self {
        self.answer_map = Some(map);
        self
    }

    pub fn queries(&self) -> usize {
        self.interleave.len()
    }

    pub fn system(&self) -> &System {
        self.initial.system()
    }
}

/// Size of the workspace factor for an algorithm system, given the control.
fn workspace_dim(alg_sys: &System, control: &System) -> Result<usize> {
    if alg_sys == control {
        return Ok(1);
    }
    match alg_sys.factors() {
        Some((left, right)) if left == control => Ok(right.dim()),
        _ => Err(Error::SystemMismatch {
            expected: control.label().to_string(),
            found: alg_sys.label().to_string(),
        }),
    }
}

/// (O ⊗ id) on a coefficient vector laid out control-major.
fn apply_on_control(o: &RMat, coeffs: &RVec, dr: usize) -> RVec {
    if dr == 1 {
        return o * coeffs;
    }
    let dc = o.ncols();
    let c = RMat::from_row_slice(dc, dr, coeffs.as_slice());
    let out = o * c;
    RVec::from_fn(dc * dr, |k, _| out[(k / dr, k % dr)])
}

fn check_family(problem: &LearningProblem, oracles: &OracleSystem) -> Result<()> {
    if oracles.input_count() != problem.inputs().len() || oracles.functions().len() != problem.len() {
        return Err(Error::Oracle("oracle family does not match the problem's domain".into()));
    }
    for (f, o) in problem.functions().iter().zip(oracles.functions()) {
        if f.values != o.values {
            return Err(Error::Oracle(format!("oracle for {} realises a different function", f.id)));
        }
    }
    Ok(())
}

/// ρ_f = G_n O_f ⋯ G_1 O_f σ for every function of the problem.
pub fn run_algorithm(problem: &LearningProblem, oracles: &OracleSystem, alg: &QueryAlgorithm) -> Result<Vec<StateVec>> {
    check_family(problem, oracles)?;
    let sys = alg.system();
    let dr = workspace_dim(sys, oracles.control())?;
    (0..problem.len())
        .map(|f| {
            let o = oracles.oracle(f).matrix().matrix();
            let mut state = alg.initial.coeffs().clone();
            for g in &alg.interleave {
                state = g.matrix() * apply_on_control(o, &state, dr);
            }
            StateVec::new(sys, state)
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct OutcomePosterior {
    pub probability: f64,
    /// Class posterior; absent for outcomes of negligible probability.
    pub posterior: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PosteriorReport {
    pub classes: Vec<String>,
    pub prior: Vec<f64>,
    pub outcomes: Vec<OutcomePosterior>,
    pub max_deviation: f64,
    pub excluded_outcomes: usize,
    /// max_f |Σ_s μ(s,f) − μ(f)|.
    pub joint_consistency: f64,
}

/// Bayes update μ(f|s) ∝ (s|ρ_f)μ(f), aggregated over classes.
pub fn posterior(problem: &LearningProblem, states: &[StateVec], measurement: &Measurement) -> Result<PosteriorReport> {
    if states.len() != problem.len() {
        return Err(Error::Dimension(format!("{} states for {} functions", states.len(), problem.len())));
    }
    let weights = problem.weights_f64();
    let prior = problem.class_priors_f64();
    let nclasses = prior.len();
    let mut marginal_check = vec![0.0; problem.len()];
    let mut outcomes = Vec::with_capacity(measurement.len());
    let mut max_deviation: f64 = 0.0;
    let mut excluded = 0;
    for e in measurement.effects() {
        let mut per_class = vec![0.0; nclasses];
        let mut total = 0.0;
        for (fi, (f, s)) in problem.functions().iter().zip(states).enumerate() {
            let joint = probability(e, s)? * weights[fi];
            marginal_check[fi] += joint;
            per_class[f.class] += joint;
            total += joint;
        }
        if total < NEGLIGIBLE_OUTCOME {
            excluded += 1;
            outcomes.push(OutcomePosterior {
                probability: total,
                posterior: None,
            });
            continue;
        }
        let post: Vec<f64> = per_class.iter().map(|w| w / total).collect();
        for (p, q) in post.iter().zip(&prior) {
            max_deviation = max_deviation.max((p - q).abs());
        }
        outcomes.push(OutcomePosterior {
            probability: total,
            posterior: Some(post),
        });
    }
    let joint_consistency = marginal_check
        .iter()
        .zip(&weights)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(PosteriorReport {
        classes: problem.classes().to_vec(),
        prior,
        outcomes,
        max_deviation,
        excluded_outcomes: excluded,
        joint_consistency,
    })
}

/// Posterior computed in exact arithmetic from the (exactly represented)
/// floating-point outcome probabilities. Identical states give identical
/// probabilities, so the posterior then equals the prior exactly.
#[derive(Clone, Debug)]
pub struct ExactPosterior {
    pub prior: Vec<BigRational>,
    pub posteriors: Vec<Option<Vec<BigRational>>>,
}

impl ExactPosterior {
    pub fn equals_prior(&self) -> bool {
        self.posteriors.iter().flatten().all(|p| *p == self.prior)
    }

    pub fn max_deviation(&self) -> f64 {
        self.posteriors
            .iter()
            .flatten()
            .flat_map(|p| p.iter().zip(&self.prior).map(|(a, b)| rational_to_f64(&(a - b).abs())))
            .fold(0.0, f64::max)
    }
}

pub fn posterior_exact(problem: &LearningProblem, states: &[StateVec], measurement: &Measurement) -> Result<ExactPosterior> {
    if states.len() != problem.len() {
        return Err(Error::Dimension(format!("{} states for {} functions", states.len(), problem.len())));
    }
    let prior = problem.class_priors();
    let mut posteriors = Vec::with_capacity(measurement.len());
    for e in measurement.effects() {
        let mut per_class = vec![BigRational::zero(); prior.len()];
        let mut total = BigRational::zero();
        for (f, s) in problem.functions().iter().zip(states) {
            let p = probability(e, s)?;
            let p = BigRational::from_float(p).ok_or_else(|| Error::InvalidState(format!("probability {p}")))?;
            let joint = p * &f.weight;
            per_class[f.class] += &joint;
            total += joint;
        }
        if !total.is_positive() {
            posteriors.push(None);
            continue;
        }
        posteriors.push(Some(per_class.into_iter().map(|w| w / &total).collect()));
    }
    Ok(ExactPosterior { prior, posteriors })
}

/// Probability that the announced class is f's class, for every f.
pub fn success_probabilities(problem: &LearningProblem, states: &[StateVec], alg: &QueryAlgorithm) -> Result<Vec<f64>> {
    let map = alg
        .answer_map
        .as_ref()
        .ok_or_else(|| Error::InvalidState("algorithm has no answer map".into()))?;
    if map.len() != alg.measurement.len() {
        return Err(Error::Dimension("answer map does not cover every outcome".into()));
    }
    problem
        .functions()
        .iter()
        .zip(states)
        .map(|(f, s)| {
            let mut p = 0.0;
            for (e, &class) in alg.measurement.effects().iter().zip(map) {
                if class == f.class {
                    p += probability(e, s)?;
                }
            }
            Ok(p)
        })
        .collect()
}
