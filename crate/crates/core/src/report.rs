//! Experiment reports behind the command-line tool.
//!
//! Each report carries the [`RunConfig`] that produced it and serialises
//! deterministically: no hash-ordered containers, and every random draw
//! comes from a stream derived from the configured seed.

use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dependency::{symbolic_verdict, Verdict};
use crate::error::{Error, Result};
use crate::gpt::{EffectVec, StateVec, System};
use crate::interference::{standard_slits, ProjectorFamily, SlitSet, MAX_SLITS};
use crate::linalg;
use crate::oracles::{build_oracle_family, Realization};
use crate::query::{
    classical_useless, deutsch_parity_algorithm, generalized_useless_sample, max_useless_classical, parity_problem,
    parse_rational, rational_to_f64, run_algorithm, success_probabilities, useless_bound, ClassicalVerdict,
    LearningProblem, SampledUselessness,
};
use crate::subroutine::{amplify, repetitions_for, verify_subroutine_bound, SubroutineReport, ToyAlgorithm};
use crate::theories::Theory;
use crate::Config;

pub const MAX_SAMPLES: usize = 1_000_000;
pub const MAX_K: usize = 12;
/// Floor on the tolerance used for sampled posterior deviations.
pub const SAMPLED_TOL_FLOOR: f64 = 1e-7;
const WORKSPACE_DIM: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub tol: f64,
    pub seed: u64,
    pub samples: usize,
    #[serde(rename = "N")]
    pub slits: usize,
    pub k: usize,
    pub n: usize,
    pub theory: Theory,
    /// Unamplified acceptance probability for the subroutine demo, as p/q.
    pub p_acc: String,
    pub q: u32,
    pub input: Option<String>,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: String::new(),
            tol: 1e-9,
            seed: 42,
            samples: 200,
            slits: 4,
            k: 2,
            n: 1,
            theory: Theory::Quantum,
            p_acc: "2/3".into(),
            q: 3,
            input: None,
            format: Format::Json,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::OutOfRange(format!("tol = {} must lie in (0, 1)", self.tol)));
        }
        let caps = [
            ("N", self.slits, MAX_SLITS),
            ("k", self.k, MAX_K),
            ("samples", self.samples, MAX_SAMPLES),
        ];
        for (what, value, cap) in caps {
            if value > cap {
                return Err(Error::CapExceeded { what, value, cap });
            }
        }
        if self.slits == 0 || self.k == 0 {
            return Err(Error::OutOfRange("N and k must be at least 1".into()));
        }
        if self.q > 30 {
            return Err(Error::OutOfRange(format!("q = {} must be at most 30", self.q)));
        }
        Ok(())
    }

    fn numeric(&self) -> Config {
        Config {
            tol: self.tol,
            seed: self.seed,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct InterferenceRow {
    #[serde(rename = "N")]
    pub slits: usize,
    pub k: usize,
    pub residual: f64,
    pub i2: f64,
    pub i3: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct InterferenceReport {
    pub config: RunConfig,
    pub check: &'static str,
    pub theory: Theory,
    pub rows: Vec<InterferenceRow>,
    pub pass: bool,
}

fn random_effect<R: Rng + ?Sized>(sys: &System, rng: &mut R) -> Result<EffectVec> {
    if sys.is_quantum() {
        EffectVec::from_ket(sys, &linalg::haar_state(sys.hilbert_dim(), rng))
    } else {
        EffectVec::new(sys, linalg::RVec::from_fn(sys.dim(), |_, _| rng.random::<f64>()))
    }
}

/// Coherence residuals for k = 1..N and one Sorkin sample per N, for every
/// N from 2 up to the configured N.
pub fn interference_report(cfg: &RunConfig) -> Result<InterferenceReport> {
    cfg.validate()?;
    let numeric = cfg.numeric();
    let quantum = cfg.theory == Theory::Quantum;
    let expected_order = |n: usize| if quantum { n.min(2) } else { 1 };
    let mut rows = Vec::new();
    let mut pass = true;
    for n in 2..=cfg.slits.max(2) {
        let slits = standard_slits(quantum, n, &numeric)?;
        let family = ProjectorFamily::new(&slits);
        let sys = slits.system().clone();
        let mut rng = linalg::rng_for(cfg.seed, n as u64);
        let s = StateVec::new(&sys, sys.sample_state(&mut rng))?;
        let e = random_effect(&sys, &mut rng)?;
        let i2 = family.sorkin_functional(&s, &e, SlitSet::from_indices(&[0, 1]))?;
        let i3 = if n >= 3 {
            Some(family.sorkin_functional(&s, &e, SlitSet::from_indices(&[0, 1, 2]))?)
        } else {
            None
        };
        if !quantum && i2.abs() > cfg.tol {
            pass = false;
        }
        if i3.is_some_and(|v| v.abs() > cfg.tol) {
            pass = false;
        }
        let order = expected_order(n);
        for k in 1..=n {
            let residual = family.coherence_identity_residual(k)?;
            if (k >= order && residual >= cfg.tol) || (k < order && residual < cfg.tol) {
                pass = false;
            }
            rows.push(InterferenceRow {
                slits: n,
                k,
                residual,
                i2,
                i3,
            });
        }
    }
    Ok(InterferenceReport {
        config: cfg.clone(),
        check: "interference",
        theory: cfg.theory,
        rows,
        pass,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ParityReport {
    pub config: RunConfig,
    pub check: &'static str,
    #[serde(rename = "N")]
    pub slits: usize,
    pub k: usize,
    pub classical_useless_max: usize,
    pub useless_queries: usize,
    pub min_queries: usize,
    pub quantum_alg_queries: Option<usize>,
    pub success: Option<f64>,
    pub symbolic: Vec<Verdict>,
    pub pass: bool,
}

/// The parity problem on N inputs: classical frontier, the query lower bound
/// at order k, the explicit algorithm (k = 2) and symbolic verdicts for every
/// n up to the bound.
pub fn parity_report(cfg: &RunConfig) -> Result<ParityReport> {
    cfg.validate()?;
    let numeric = cfg.numeric();
    let problem = parity_problem(cfg.slits)?;
    let classical_max = max_useless_classical(&problem, cfg.slits);
    let (useless, min_queries) = useless_bound(classical_max, cfg.k)?;

    let mut pass = true;
    let (quantum_alg_queries, success) = if cfg.k == 2 {
        let (problem, oracles, alg) = deutsch_parity_algorithm(cfg.slits, &numeric)?;
        let states = run_algorithm(&problem, &oracles, &alg)?;
        let worst = success_probabilities(&problem, &states, &alg)?.into_iter().fold(1.0, f64::min);
        pass &= (1.0 - worst).abs() <= cfg.tol && alg.queries() == min_queries;
        (Some(alg.queries()), Some(worst))
    } else {
        (None, None)
    };

    let mut symbolic = Vec::with_capacity(min_queries);
    for n in 1..=min_queries {
        let v = symbolic_verdict(&problem, cfg.k, n)?;
        pass &= if n <= useless { v.is_valid() } else { v.verdict == "premise-failed" };
        symbolic.push(v);
    }
    Ok(ParityReport {
        config: cfg.clone(),
        check: "parity",
        slits: cfg.slits,
        k: cfg.k,
        classical_useless_max: classical_max,
        useless_queries: useless,
        min_queries,
        quantum_alg_queries,
        success,
        symbolic,
        pass,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct UselessCheckReport {
    pub config: RunConfig,
    pub check: &'static str,
    pub inputs: usize,
    pub functions: usize,
    pub classes: Vec<String>,
    /// Exact classical verdict at kn queries.
    pub classical: ClassicalVerdict,
    pub symbolic: Verdict,
    /// Sampled random quantum algorithms; present for k = 2 only.
    pub quantum: Option<SampledUselessness>,
    pub pass: bool,
}

/// Classical, symbolic and (for k = 2) sampled quantum verdicts on whether n
/// queries of order k are useless for the given problem. The sampler runs
/// even when the classical premise fails, so the report shows what a failed
/// premise allows.
pub fn useless_check_report(problem: &LearningProblem, cfg: &RunConfig) -> Result<UselessCheckReport> {
    cfg.validate()?;
    let numeric = cfg.numeric();
    let classical = classical_useless(problem, cfg.k * cfg.n);
    let symbolic = symbolic_verdict(problem, cfg.k, cfg.n)?;
    let quantum = if cfg.k == 2 {
        let oracles =
            build_oracle_family(problem.oracle_domain(), problem.oracle_functions(), Realization::Phase, None, false, &numeric)?;
        Some(generalized_useless_sample(
            problem,
            &oracles,
            cfg.n,
            cfg.samples,
            cfg.seed,
            cfg.tol.max(SAMPLED_TOL_FLOOR),
            WORKSPACE_DIM,
        )?)
    } else {
        None
    };
    let pass = classical.useless && symbolic.is_valid() && quantum.as_ref().is_none_or(|q| q.pass);
    Ok(UselessCheckReport {
        config: cfg.clone(),
        check: "useless-check",
        inputs: problem.inputs().len(),
        functions: problem.len(),
        classes: problem.classes().to_vec(),
        classical,
        symbolic,
        quantum,
        pass,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SubroutineDemoReport {
    pub config: RunConfig,
    pub check: &'static str,
    pub p_acc: f64,
    /// Acceptance the amplification aims for, 1 − 2^{−(q+1)}.
    pub target: f64,
    pub repetitions: usize,
    pub unamplified: SubroutineReport,
    pub amplified: SubroutineReport,
    pub pass: bool,
}

/// Two-input toy decision problem d(x) = x answered correctly with the
/// configured probability, before and after majority amplification.
pub fn subroutine_report(cfg: &RunConfig) -> Result<SubroutineDemoReport> {
    cfg.validate()?;
    let numeric = cfg.numeric();
    let p = parse_rational(&cfg.p_acc)
        .map(|r| rational_to_f64(&r))
        .ok_or_else(|| Error::OutOfRange(format!("cannot parse acceptance {:?} as p/q", cfg.p_acc)))?;
    let alg = ToyAlgorithm::bounded_error(&[0, 1], &[p, p])?;
    let target = 1.0 - 0.5f64.powi(cfg.q as i32 + 1);
    let repetitions = repetitions_for(p, target)?;
    let amplified_alg = amplify(&alg, repetitions)?;
    let unamplified = verify_subroutine_bound(&alg, cfg.q, &numeric)?;
    let amplified = verify_subroutine_bound(&amplified_alg, cfg.q, &numeric)?;
    Ok(SubroutineDemoReport {
        config: cfg.clone(),
        check: "subroutine-demo",
        p_acc: p,
        target,
        repetitions,
        pass: amplified.pass,
        unamplified,
        amplified,
    })
}

#[derive(Clone, Debug, Serialize)]
#[serde(untagged)]
#[allow(clippy::large_enum_variant)]
pub enum Report {
    Interference(InterferenceReport),
    Parity(ParityReport),
    UselessCheck(UselessCheckReport),
    Subroutine(SubroutineDemoReport),
}

impl Report {
    pub fn pass(&self) -> bool {
        match self {
            Report::Interference(r) => r.pass,
            Report::Parity(r) => r.pass,
            Report::UselessCheck(r) => r.pass,
            Report::Subroutine(r) => r.pass,
        }
    }

    pub fn config(&self) -> &RunConfig {
        match self {
            Report::Interference(r) => &r.config,
            Report::Parity(r) => &r.config,
            Report::UselessCheck(r) => &r.config,
            Report::Subroutine(r) => &r.config,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }

    /// CSV with the configuration as leading `#` comment lines. The
    /// interference report is a table; the others are flattened into
    /// `field,value` rows.
    pub fn to_csv(&self) -> Result<String> {
        let mut out = String::new();
        if let serde_json::Value::Object(map) = serde_json::to_value(self.config())? {
            for (key, value) in map {
                writeln!(out, "# {key}={}", scalar(&value)).expect("writing to a String");
            }
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        match self {
            Report::Interference(r) => {
                w.write_record(["N", "k", "residual", "I2", "I3"]).map_err(csv_err)?;
                for row in &r.rows {
                    let i3 = row.i3.map(|v| v.to_string()).unwrap_or_default();
                    w.write_record([row.slits.to_string(), row.k.to_string(), row.residual.to_string(), row.i2.to_string(), i3])
                        .map_err(csv_err)?;
                }
            }
            other => {
                w.write_record(["field", "value"]).map_err(csv_err)?;
                let mut value = serde_json::to_value(other)?;
                if let serde_json::Value::Object(map) = &mut value {
                    map.remove("config");
                }
                let mut rows = Vec::new();
                flatten(String::new(), &value, &mut rows);
                for row in rows {
                    w.write_record(row).map_err(csv_err)?;
                }
            }
        }
        let body = w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
        out.push_str(&String::from_utf8(body).expect("csv output is UTF-8"));
        if let Report::Interference(r) = self {
            writeln!(out, "# pass={}", r.pass).expect("writing to a String");
        }
        Ok(out)
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => self.to_json(),
            Format::Csv => self.to_csv(),
        }
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}

fn scalar(v: &serde_json::Value) -> String {
    match v {
        serde_json::Value::String(s) => s.clone(),
        serde_json::Value::Null => String::new(),
        other => other.to_string(),
    }
}

/// Dotted paths to every leaf of a JSON value, with array indices as path
/// segments.
fn flatten(prefix: String, v: &serde_json::Value, rows: &mut Vec<[String; 2]>) {
    let join = |key: &str| if prefix.is_empty() { key.to_string() } else { format!("{prefix}.{key}") };
    match v {
        serde_json::Value::Object(map) => {
            for (key, inner) in map {
                flatten(join(key), inner, rows);
            }
        }
        serde_json::Value::Array(items) => {
            for (i, inner) in items.iter().enumerate() {
                flatten(join(&i.to_string()), inner, rows);
            }
        }
        leaf => rows.push([prefix, scalar(leaf)]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(command: &str) -> RunConfig {
        RunConfig {
            command: command.into(),
            ..RunConfig::default()
        }
    }

    #[test]
    fn parity_examples() {
        let r = parity_report(&RunConfig { slits: 5, ..cfg("parity") }).unwrap();
        assert_eq!(r.classical_useless_max, 4);
        assert_eq!(r.min_queries, 3);
        assert_eq!(r.quantum_alg_queries, Some(3));
        assert!((r.success.unwrap() - 1.0).abs() < 1e-9);
        assert!(r.pass);

        let r = parity_report(&RunConfig { slits: 2, ..cfg("parity") }).unwrap();
        assert_eq!(r.min_queries, 1);
        assert_eq!(r.quantum_alg_queries, Some(1));

        let r = parity_report(&RunConfig { slits: 6, k: 5, ..cfg("parity") }).unwrap();
        assert_eq!(r.min_queries, 2);
        assert_eq!(r.symbolic[0].verdict, "proof-valid");
        assert_eq!(r.symbolic[1].verdict, "premise-failed");
        assert!(r.pass);
    }

    #[test]
    fn interference_table() {
        let r = interference_report(&RunConfig { slits: 4, ..cfg("interference") }).unwrap();
        assert!(r.pass);
        for row in &r.rows {
            match row.k {
                1 => assert!(row.residual > 0.1),
                _ => assert!(row.residual < 1e-9),
            }
            assert!(row.i3.is_none_or(|v| v.abs() < 1e-9));
        }
        let r = interference_report(&RunConfig {
            slits: 4,
            theory: Theory::Classical,
            ..cfg("interference")
        })
        .unwrap();
        assert!(r.pass);
        assert!(r.rows.iter().all(|row| row.residual == 0.0 && row.i2 == 0.0));
    }

    #[test]
    fn useless_check_parity_four() {
        let problem = parity_problem(4).unwrap();
        let r = useless_check_report(&problem, &RunConfig { n: 1, samples: 40, ..cfg("useless-check") }).unwrap();
        assert!(r.classical.useless && r.symbolic.is_valid() && r.quantum.as_ref().unwrap().pass);
        assert!(r.pass);

        let r = useless_check_report(&problem, &RunConfig { n: 2, samples: 40, ..cfg("useless-check") }).unwrap();
        assert_eq!(r.symbolic.verdict, "premise-failed");
        assert!(!r.quantum.as_ref().unwrap().pass);
        assert!(!r.pass);
    }

    #[test]
    fn subroutine_demo_passes_after_amplification() {
        let r = subroutine_report(&cfg("subroutine")).unwrap();
        assert!(!r.unamplified.pass);
        assert!(r.amplified.pass);
        assert!(r.repetitions % 2 == 1);
    }

    #[test]
    fn caps_and_rendering() {
        assert!(RunConfig { slits: 13, ..cfg("parity") }.validate().is_err());
        assert!(RunConfig { tol: 0.0, ..cfg("parity") }.validate().is_err());
        let r = Report::Parity(parity_report(&RunConfig { slits: 3, ..cfg("parity") }).unwrap());
        let csv = r.to_csv().unwrap();
        assert!(csv.contains("# seed=42"));
        assert!(csv.contains("min_queries,2"));
        assert_eq!(r.to_json().unwrap(), r.to_json().unwrap());
    }
}
