//! A laboratory for oracles and query lower bounds in generalised
//! probabilistic theories.
//!
//! Classical and quantum theories are realised as concrete GPT systems
//! ([`gpt`], [`theories`]). On top of them sit slit structures with face and
//! coherence projectors ([`interference`]), phase and controlled oracles
//! ([`oracles`]), learning problems with exact and sampled uselessness checks
//! ([`query`]), a symbolic replay of the useless-query argument for any
//! interference order ([`dependency`]), and a toy-scale construction of an
//! oracle from a bounded-error algorithm ([`subroutine`]).

pub mod dependency;
pub mod error;
pub mod gpt;
pub mod interference;
pub mod linalg;
pub mod oracles;
pub mod query;
pub mod report;
pub mod subroutine;
pub mod theories;

pub use error::{Error, Result};

use serde::{Deserialize, Serialize};

/// Tolerance and seed shared by every numerical check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Config {
    pub tol: f64,
    pub seed: u64,
}

impl Default for Config {
    fn default() -> Self {
        Config { tol: 1e-9, seed: 42 }
    }
}

impl Config {
    pub fn with_tol(self, tol: f64) -> Self {
        Config { tol, ..self }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Config { seed, ..self }
    }
}
