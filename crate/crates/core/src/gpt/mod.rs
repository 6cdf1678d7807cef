//! Systems, states, effects, transformations and measurements for the
//! classical and quantum back-ends, with sequential and parallel composition.

mod compose;
mod system;
mod transform;
mod vectors;

pub use compose::{act_on, apply_partial_effect, compose_parallel, marginalize, Device, Parallel, Side};
pub use system::{System, SystemKind};
pub use transform::{diagonal_unitary, TransformMat};
pub use vectors::{probability, probability_clamped, EffectVec, Measurement, StateVec};
