use crate::error::{Error, Result};
use crate::linalg::RVec;

use super::system::System;
use super::transform::TransformMat;
use super::vectors::{check_same, EffectVec, StateVec};

/// Which factor of a composite system.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Parallel composition of like devices. Coefficients compose by Kronecker
/// product with the left factor's index major.
pub trait Parallel: Sized {
    fn parallel(&self, other: &Self) -> Self;
}

impl Parallel for StateVec {
    fn parallel(&self, other: &Self) -> Self {
        let sys = System::composite(self.system(), other.system());
        StateVec::new(&sys, self.coeffs().kronecker(other.coeffs())).expect("product dimension")
    }
}

impl Parallel for EffectVec {
    fn parallel(&self, other: &Self) -> Self {
        let sys = System::composite(self.system(), other.system());
        EffectVec::new(&sys, self.coeffs().kronecker(other.coeffs())).expect("product dimension")
    }
}

impl Parallel for TransformMat {
    fn parallel(&self, other: &Self) -> Self {
        let input = System::composite(self.input(), other.input());
        let output = System::composite(self.output(), other.output());
        TransformMat::new(&input, &output, self.matrix().kronecker(other.matrix()))
            .expect("product dimension")
            .with_reversible(self.is_reversible() && other.is_reversible())
    }
}

/// A device of any role, for call sites that only know the role at run time.
#[derive(Clone, Debug)]
pub enum Device {
    State(StateVec),
    Effect(EffectVec),
    Transform(TransformMat),
}

impl Device {
    fn role(&self) -> &'static str {
        match self {
            Device::State(_) => "state",
            Device::Effect(_) => "effect",
            Device::Transform(_) => "transformation",
        }
    }
}

pub fn compose_parallel(a: &Device, b: &Device) -> Result<Device> {
    match (a, b) {
        (Device::State(x), Device::State(y)) => Ok(Device::State(x.parallel(y))),
        (Device::Effect(x), Device::Effect(y)) => Ok(Device::Effect(x.parallel(y))),
        (Device::Transform(x), Device::Transform(y)) => Ok(Device::Transform(x.parallel(y))),
        _ => Err(Error::RoleMismatch {
            left: a.role(),
            right: b.role(),
        }),
    }
}

/// Applies an effect to one factor of a composite state, returning the
/// (subnormalized) conditional state of the other factor.
pub fn apply_partial_effect(e: &EffectVec, s: &StateVec, side: Side) -> Result<StateVec> {
    let (left, right) = s
        .system()
        .factors()
        .ok_or_else(|| Error::NotComposite(s.system().label().to_string()))?;
    let (acted, kept) = match side {
        Side::Left => (left, right),
        Side::Right => (right, left),
    };
    check_same(acted, e.system())?;
    let dr = right.dim();
    let coeffs = s.coeffs();
    let out = match side {
        Side::Left => RVec::from_fn(dr, |b, _| (0..left.dim()).map(|a| e.coeffs()[a] * coeffs[a * dr + b]).sum()),
        Side::Right => RVec::from_fn(left.dim(), |a, _| (0..dr).map(|b| e.coeffs()[b] * coeffs[a * dr + b]).sum()),
    };
    StateVec::new(kept, out)
}

/// Discards one factor by applying its unit effect.
pub fn marginalize(s: &StateVec, keep: Side) -> Result<StateVec> {
    let (left, right) = s
        .system()
        .factors()
        .ok_or_else(|| Error::NotComposite(s.system().label().to_string()))?;
    match keep {
        Side::Left => apply_partial_effect(&EffectVec::unit(right), s, Side::Right),
        Side::Right => apply_partial_effect(&EffectVec::unit(left), s, Side::Left),
    }
}

/// T ⊗ id or id ⊗ T on a composite.
pub fn act_on(t: &TransformMat, other: &System, side: Side) -> TransformMat {
    let id = TransformMat::identity(other);
    match side {
        Side::Left => t.parallel(&id),
        Side::Right => id.parallel(t),
    }
}
