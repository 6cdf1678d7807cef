use std::collections::BTreeSet;

use num::{BigInt, BigRational, One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracles::OracleFunction;

/// One function of a learning problem with its class and prior weight.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemFunction {
    pub id: String,
    pub values: Vec<u8>,
    pub class: usize,
    pub weight: BigRational,
}

/// A learning problem (C, {C_j}, μ) over a finite input set X.
#[derive(Clone, Debug, PartialEq)]
pub struct LearningProblem {
    inputs: Vec<String>,
    classes: Vec<String>,
    functions: Vec<ProblemFunction>,
}

#[derive(Serialize, Deserialize)]
struct RawFunction {
    id: String,
    values: Vec<u8>,
    class: String,
    weight: String,
}

#[derive(Serialize, Deserialize)]
struct RawProblem {
    inputs: Vec<String>,
    functions: Vec<RawFunction>,
}

fn problem_err(field: String, msg: impl std::fmt::Display) -> Error {
    Error::Problem(format!("{field}: {msg}"))
}

/// Parses "p/q" or an integer into an exact rational.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let text = text.trim();
    match text.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().ok()?;
            let q: BigInt = q.trim().parse().ok()?;
            (!q.is_zero()).then(|| BigRational::new(p, q))
        }
        None => text.parse::<BigInt>().ok().map(BigRational::from_integer),
    }
}

impl LearningProblem {
    /// Builds and validates a problem. Classes are numbered by first
    /// appearance in `functions`.
    pub fn new(inputs: Vec<String>, functions: Vec<(String, Vec<u8>, String, BigRational)>) -> Result<Self> {
        let mut classes: Vec<String> = Vec::new();
        let mut out = Vec::with_capacity(functions.len());
        for (id, values, class, weight) in functions {
            let idx = match classes.iter().position(|c| *c == class) {
                Some(i) => i,
                None => {
                    classes.push(class);
                    classes.len() - 1
                }
            };
            out.push(ProblemFunction {
                id,
                values,
                class: idx,
                weight,
            });
        }
        let problem = LearningProblem {
            inputs,
            classes,
            functions: out,
        };
        problem.validate()?;
        Ok(problem)
    }

    fn validate(&self) -> Result<()> {
        if self.inputs.is_empty() {
            return Err(problem_err("inputs".into(), "at least one input is required"));
        }
        if self.functions.is_empty() {
            return Err(problem_err("functions".into(), "at least one function is required"));
        }
        let mut ids = BTreeSet::new();
        let mut rows = BTreeSet::new();
        let mut total = BigRational::zero();
        for (i, f) in self.functions.iter().enumerate() {
            let at = |field: &str| format!("functions[{i}].{field}");
            if f.values.len() != self.inputs.len() {
                return Err(problem_err(
                    at("values"),
                    format!("{} values for {} inputs", f.values.len(), self.inputs.len()),
                ));
            }
            if let Some(v) = f.values.iter().find(|&&v| v > 1) {
                return Err(problem_err(at("values"), format!("value {v} is not 0 or 1")));
            }
            if !f.weight.is_positive() {
                return Err(problem_err(at("weight"), format!("{} is not strictly positive", f.weight)));
            }
            if !ids.insert(f.id.as_str()) {
                return Err(problem_err(at("id"), format!("duplicate id {}", f.id)));
            }
            if !rows.insert(f.values.as_slice()) {
                return Err(problem_err(at("values"), "duplicates the value vector of an earlier function"));
            }
            total += &f.weight;
        }
        if !total.is_one() {
            return Err(problem_err("functions[*].weight".into(), format!("weights sum to {total}, not 1")));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawProblem = serde_json::from_str(text)
            .map_err(|e| Error::Problem(format!("line {} column {}: {e}", e.line(), e.column())))?;
        let mut functions = Vec::with_capacity(raw.functions.len());
        for (i, f) in raw.functions.into_iter().enumerate() {
            let weight = parse_rational(&f.weight)
                .ok_or_else(|| problem_err(format!("functions[{i}].weight"), format!("cannot parse {:?} as p/q", f.weight)))?;
            functions.push((f.id, f.values, f.class, weight));
        }
        Self::new(raw.inputs, functions)
    }

    pub fn to_json(&self) -> Result<String> {
        let raw = RawProblem {
            inputs: self.inputs.clone(),
            functions: self
                .functions
                .iter()
                .map(|f| RawFunction {
                    id: f.id.clone(),
                    values: f.values.clone(),
                    class: self.classes[f.class].clone(),
                    weight: f.weight.to_string(),
                })
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&raw)?)
    }

    pub fn inputs(&self) -> &[String] {
        &self.inputs
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn functions(&self) -> &[ProblemFunction] {
        &self.functions
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    /// μ(C_j) for every class.
    pub fn class_priors(&self) -> Vec<BigRational> {
        let mut priors = vec![BigRational::zero(); self.classes.len()];
        for f in &self.functions {
            priors[f.class] += &f.weight;
        }
        priors
    }

    pub fn class_priors_f64(&self) -> Vec<f64> {
        self.class_priors().iter().map(rational_to_f64).collect()
    }

    pub fn weights_f64(&self) -> Vec<f64> {
        self.functions.iter().map(|f| rational_to_f64(&f.weight)).collect()
    }

    /// The function list in the form used to build oracle families.
    pub fn oracle_functions(&self) -> Vec<OracleFunction> {
        self.functions
            .iter()
            .map(|f| OracleFunction {
                id: f.id.clone(),
                values: f.values.clone(),
            })
            .collect()
    }

    pub fn oracle_domain(&self) -> Vec<serde_json::Value> {
        self.inputs.iter().map(|x| serde_json::Value::String(x.clone())).collect()
    }
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    use num::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}
