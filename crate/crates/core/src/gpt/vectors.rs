use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec, RVec};

use super::system::{System, SystemKind};

pub(crate) fn check_same(expected: &System, found: &System) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::SystemMismatch {
            expected: expected.label().to_string(),
            found: found.label().to_string(),
        })
    }
}

fn check_len(system: &System, coeffs: &RVec) -> Result<()> {
    if coeffs.len() == system.dim() {
        Ok(())
    } else {
        Err(Error::Dimension(format!(
            "{} expects {} coefficients, got {}",
            system.label(),
            system.dim(),
            coeffs.len()
        )))
    }
}

/// A (possibly unnormalized) state vector |s).
#[derive(Clone, Debug, PartialEq)]
pub struct StateVec {
    system: System,
    coeffs: RVec,
}

impl StateVec {
    pub fn new(system: &System, coeffs: RVec) -> Result<Self> {
        check_len(system, &coeffs)?;
        Ok(StateVec {
            system: system.clone(),
            coeffs,
        })
    }

    /// Vectorised density operator.
    pub fn from_density(system: &System, rho: &CMat) -> Result<Self> {
        if rho.nrows() != system.hilbert_dim() || !rho.is_square() {
            return Err(Error::Dimension(format!(
                "{}x{} operator for {}",
                rho.nrows(),
                rho.ncols(),
                system.label()
            )));
        }
        Ok(StateVec {
            system: system.clone(),
            coeffs: system.from_operator(rho),
        })
    }

    /// |ψ⟩⟨ψ| for a ket on the embedding space (normalized here).
    pub fn from_ket(system: &System, psi: &CVec) -> Result<Self> {
        let n = psi.norm();
        if n == 0.0 {
            return Err(Error::InvalidState("zero ket".into()));
        }
        Self::from_density(system, &linalg::outer(&(psi / linalg::c(n, 0.0))))
    }

    /// The i-th basis state |i⟩⟨i| (a simplex vertex for classical systems).
    pub fn basis(system: &System, i: usize) -> Result<Self> {
        let h = system.hilbert_dim();
        if i >= h {
            return Err(Error::OutOfRange(format!("basis index {i} on {}", system.label())));
        }
        Self::from_ket(system, &linalg::basis_ket(h, i))
    }

    pub fn maximally_mixed(system: &System) -> Self {
        StateVec {
            system: system.clone(),
            coeffs: system.maximally_mixed_coeffs(),
        }
    }

    pub fn system(&self) -> &System {
        &self.system
    }

    pub fn coeffs(&self) -> &RVec {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> RVec {
        self.coeffs
    }

    pub fn to_density(&self) -> CMat {
        self.system.to_operator(&self.coeffs)
    }

    /// (1|s).
    pub fn norm_weight(&self) -> f64 {
        self.system.unit_coeffs().dot(&self.coeffs)
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm_weight() - 1.0).abs() <= tol
    }

    pub fn in_cone(&self, tol: f64) -> bool {
        self.system.in_state_cone(&self.coeffs, tol)
    }

    /// Per-theory purity test: a simplex vertex for classical systems, largest
    /// eigenvalue ≥ 1 − tol otherwise (on a normalized cone state).
    pub fn is_pure(&self, tol: f64) -> bool {
        if !self.is_normalized(tol) || !self.in_cone(tol) {
            return false;
        }
        match self.system.kind() {
            SystemKind::Classical(_) => self.coeffs.iter().any(|&x| x >= 1.0 - tol),
            _ => linalg::max_eigenvalue(&self.to_density()) >= 1.0 - tol,
        }
    }

    pub fn scale(&self, factor: f64) -> Self {
        StateVec {
            system: self.system.clone(),
            coeffs: &self.coeffs * factor,
        }
    }

    pub fn add(&self, other: &StateVec) -> Result<Self> {
        check_same(&self.system, &other.system)?;
        Ok(StateVec {
            system: self.system.clone(),
            coeffs: &self.coeffs + &other.coeffs,
        })
    }

    pub fn sub(&self, other: &StateVec) -> Result<Self> {
        check_same(&self.system, &other.system)?;
        Ok(StateVec {
            system: self.system.clone(),
            coeffs: &self.coeffs - &other.coeffs,
        })
    }

    pub fn distance(&self, other: &StateVec) -> Result<f64> {
        Ok(linalg::sup_norm_vec(self.sub(other)?.coeffs()))
    }
}

/// An effect covector (e|.
#[derive(Clone, Debug, PartialEq)]
pub struct EffectVec {
    system: System,
    coeffs: RVec,
}

impl EffectVec {
    pub fn new(system: &System, coeffs: RVec) -> Result<Self> {
        check_len(system, &coeffs)?;
        Ok(EffectVec {
            system: system.clone(),
            coeffs,
        })
    }

    /// Effect with operator E, so that (e|s) = Tr(E ρ).
    pub fn from_operator(system: &System, op: &CMat) -> Result<Self> {
        if op.nrows() != system.hilbert_dim() {
            return Err(Error::Dimension(format!("effect operator for {}", system.label())));
        }
        Ok(EffectVec {
            system: system.clone(),
            coeffs: system.from_operator(op),
        })
    }

    /// Rank-one effect |ψ⟩⟨ψ| (ψ normalized here).
    pub fn from_ket(system: &System, psi: &CVec) -> Result<Self> {
        let n = psi.norm();
        if n == 0.0 {
            return Err(Error::InvalidState("zero ket".into()));
        }
        Self::from_operator(system, &linalg::outer(&(psi / linalg::c(n, 0.0))))
    }

    pub fn basis(system: &System, i: usize) -> Result<Self> {
        let h = system.hilbert_dim();
        if i >= h {
            return Err(Error::OutOfRange(format!("basis index {i} on {}", system.label())));
        }
        Self::from_ket(system, &linalg::basis_ket(h, i))
    }

    /// The unique deterministic effect (1|.
    pub fn unit(system: &System) -> Self {
        EffectVec {
            system: system.clone(),
            coeffs: system.unit_coeffs(),
        }
    }

    pub fn system(&self) -> &System {
        &self.system
    }

    pub fn coeffs(&self) -> &RVec {
        &self.coeffs
    }

    pub fn to_operator(&self) -> CMat {
        self.system.to_operator(&self.coeffs)
    }

    pub fn in_cone(&self, tol: f64) -> bool {
        self.system.in_effect_cone(&self.coeffs, tol)
    }

    pub fn scale(&self, factor: f64) -> Self {
        EffectVec {
            system: self.system.clone(),
            coeffs: &self.coeffs * factor,
        }
    }
}

/// Raw probability e·s. The caller is responsible for `s` being normalized
/// when a genuine probability is wanted; subnormalized and signed vectors
/// (e.g. projector images) are evaluated linearly.
pub fn probability(e: &EffectVec, s: &StateVec) -> Result<f64> {
    check_same(&e.system, &s.system)?;
    Ok(e.coeffs.dot(&s.coeffs))
}

/// Probability clamped into [0, 1] for reporting.
pub fn probability_clamped(e: &EffectVec, s: &StateVec) -> Result<f64> {
    Ok(probability(e, s)?.clamp(0.0, 1.0))
}

/// A measurement: effects summing to the unit effect.
#[derive(Clone, Debug)]
pub struct Measurement {
    system: System,
    effects: Vec<EffectVec>,
}

impl Measurement {
    pub fn new(system: &System, effects: Vec<EffectVec>, tol: f64) -> Result<Self> {
        let mut total = RVec::zeros(system.dim());
        for e in &effects {
            check_same(system, e.system())?;
            total += e.coeffs();
        }
        let gap = linalg::sup_norm_vec(&(total - system.unit_coeffs()));
        if gap > tol {
            return Err(Error::InvalidState(format!(
                "measurement effects miss the unit effect by {gap:e}"
            )));
        }
        Ok(Measurement {
            system: system.clone(),
            effects,
        })
    }

    /// Projective measurement onto the columns of a unitary.
    pub fn from_basis(system: &System, u: &CMat, tol: f64) -> Result<Self> {
        let effects = (0..u.ncols())
            .map(|j| EffectVec::from_ket(system, &u.column(j).into_owned()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(system, effects, tol)
    }

    pub fn computational(system: &System, tol: f64) -> Result<Self> {
        let h = system.hilbert_dim();
        Self::from_basis(system, &CMat::identity(h, h), tol)
    }

    pub fn system(&self) -> &System {
        &self.system
    }

    pub fn effects(&self) -> &[EffectVec] {
        &self.effects
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn probabilities(&self, s: &StateVec) -> Result<Vec<f64>> {
        self.effects.iter().map(|e| probability(e, s)).collect()
    }
}
