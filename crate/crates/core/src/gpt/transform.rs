use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, RMat, RVec};
use crate::Config;

use super::system::System;
use super::vectors::{check_same, EffectVec, StateVec};

/// A linear map between the state spaces of two systems.
#[derive(Clone, Debug, PartialEq)]
pub struct TransformMat {
    input: System,
    output: System,
    matrix: RMat,
    reversible: bool,
}

impl TransformMat {
    pub fn new(input: &System, output: &System, matrix: RMat) -> Result<Self> {
        if matrix.nrows() != output.dim() || matrix.ncols() != input.dim() {
            return Err(Error::Dimension(format!(
                "{}x{} matrix for {} -> {}",
                matrix.nrows(),
                matrix.ncols(),
                input.label(),
                output.label()
            )));
        }
        Ok(TransformMat {
            input: input.clone(),
            output: output.clone(),
            matrix,
            reversible: false,
        })
    }

    /// Flags the map as reversible. Validity is checked by [`Self::validate`].
    pub fn with_reversible(mut self, reversible: bool) -> Self {
        self.reversible = reversible;
        self
    }

    pub fn identity(system: &System) -> Self {
        let d = system.dim();
        TransformMat {
            input: system.clone(),
            output: system.clone(),
            matrix: RMat::identity(d, d),
            reversible: true,
        }
    }

    pub fn zero(system: &System) -> Self {
        let d = system.dim();
        TransformMat {
            input: system.clone(),
            output: system.clone(),
            matrix: RMat::zeros(d, d),
            reversible: false,
        }
    }

    /// Compiles ρ ↦ UρU† into the real coefficient representation.
    pub fn from_unitary(system: &System, u: &CMat) -> Result<Self> {
        let h = system.hilbert_dim();
        if u.nrows() != h || u.ncols() != h {
            return Err(Error::Dimension(format!(
                "{}x{} unitary for {}",
                u.nrows(),
                u.ncols(),
                system.label()
            )));
        }
        let v = system.vectorizer();
        // row-major vec(UρU†) = (U ⊗ Ū) vec(ρ)
        let superop = u.kronecker(&u.map(|z| z.conj()));
        let m = v.adjoint() * superop * v.as_ref();
        let matrix = m.map(|z| z.re);
        Ok(TransformMat {
            input: system.clone(),
            output: system.clone(),
            matrix,
            reversible: true,
        })
    }

    /// Builds the matrix of an arbitrary linear map on embedded operators by
    /// evaluating it on the input basis.
    pub fn from_operator_map<F>(input: &System, output: &System, f: F) -> Result<Self>
    where
        F: Fn(&CMat) -> CMat,
    {
        let basis = input.operator_basis();
        let mut matrix = RMat::zeros(output.dim(), input.dim());
        for (b, op) in basis.iter().enumerate() {
            let image = f(op);
            if image.nrows() != output.hilbert_dim() {
                return Err(Error::Dimension("operator map output size".into()));
            }
            matrix.set_column(b, &output.from_operator(&image));
        }
        TransformMat::new(input, output, matrix)
    }

    /// Relabelling of the outcomes of a classical system: basis i ↦ perm[i].
    pub fn permutation(system: &System, perm: &[usize]) -> Result<Self> {
        let h = system.hilbert_dim();
        let mut seen = vec![false; h];
        if perm.len() != h || perm.iter().any(|&p| p >= h || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::InvalidTransform(format!("{perm:?} is not a permutation of {h}")));
        }
        let mut u = CMat::zeros(h, h);
        for (i, &p) in perm.iter().enumerate() {
            u[(p, i)] = linalg::ONE;
        }
        if system.is_fully_quantum() {
            return Self::from_unitary(system, &u);
        }
        let ud = u.adjoint();
        Ok(Self::from_operator_map(system, system, |op| &u * op * &ud)?.with_reversible(true))
    }

    pub fn input(&self) -> &System {
        &self.input
    }

    pub fn output(&self) -> &System {
        &self.output
    }

    pub fn matrix(&self) -> &RMat {
        &self.matrix
    }

    pub fn is_reversible(&self) -> bool {
        self.reversible
    }

    pub fn apply(&self, s: &StateVec) -> Result<StateVec> {
        check_same(&self.input, s.system())?;
        StateVec::new(&self.output, &self.matrix * s.coeffs())
    }

    /// Sequential composition: `self` first, then `next`.
    pub fn then(&self, next: &TransformMat) -> Result<TransformMat> {
        check_same(&self.output, &next.input)?;
        Ok(TransformMat {
            input: self.input.clone(),
            output: next.output.clone(),
            matrix: &next.matrix * &self.matrix,
            reversible: self.reversible && next.reversible,
        })
    }

    /// Effect (e| ∘ T on the input system.
    pub fn pull_back(&self, e: &EffectVec) -> Result<EffectVec> {
        check_same(&self.output, e.system())?;
        EffectVec::new(&self.input, self.matrix.transpose() * e.coeffs())
    }

    pub fn add(&self, other: &TransformMat) -> Result<TransformMat> {
        self.combine(other, 1.0)
    }

    pub fn sub(&self, other: &TransformMat) -> Result<TransformMat> {
        self.combine(other, -1.0)
    }

    fn combine(&self, other: &TransformMat, sign: f64) -> Result<TransformMat> {
        check_same(&self.input, &other.input)?;
        check_same(&self.output, &other.output)?;
        TransformMat::new(&self.input, &self.output, &self.matrix + &other.matrix * sign)
    }

    pub fn scale(&self, factor: f64) -> TransformMat {
        TransformMat {
            input: self.input.clone(),
            output: self.output.clone(),
            matrix: &self.matrix * factor,
            reversible: false,
        }
    }

    /// Largest absolute entry of the difference of the two matrices.
    pub fn distance(&self, other: &TransformMat) -> Result<f64> {
        Ok(linalg::sup_norm(self.sub(other)?.matrix()))
    }

    pub fn inverse(&self) -> Result<TransformMat> {
        if self.input != self.output {
            return Err(Error::InvalidTransform("inverse of a map between different systems".into()));
        }
        let inv = self
            .matrix
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::InvalidTransform("matrix is singular".into()))?;
        Ok(TransformMat {
            input: self.output.clone(),
            output: self.input.clone(),
            matrix: inv,
            reversible: self.reversible,
        })
    }

    pub fn is_idempotent(&self, tol: f64) -> bool {
        linalg::sup_norm(&(&self.matrix * &self.matrix - &self.matrix)) < tol
    }

    /// (1|∘T = (1|.
    pub fn preserves_unit(&self, tol: f64) -> bool {
        let pulled = self.matrix.transpose() * self.output.unit_coeffs();
        linalg::sup_norm_vec(&(pulled - self.input.unit_coeffs())) < tol
    }

    /// Checks that basis states and `samples` random states map into the
    /// output cone.
    pub fn preserves_cone(&self, cfg: &Config, samples: usize) -> bool {
        let mut rng = linalg::rng_for(cfg.seed, 0x7a5f);
        let h = self.input.hilbert_dim();
        let basis_ok = (0..h).all(|i| {
            let s = StateVec::basis(&self.input, i).expect("index in range");
            self.output.in_state_cone(&(&self.matrix * s.coeffs()), cfg.tol)
        });
        basis_ok
            && (0..samples).all(|_| {
                let s: RVec = self.input.sample_state(&mut rng);
                self.output.in_state_cone(&(&self.matrix * s), cfg.tol)
            })
    }

    /// Checks the invariants of the type: cone preservation, and for
    /// reversible maps invertibility, a cone-preserving inverse and
    /// preservation of the unit effect.
    pub fn validate(&self, cfg: &Config) -> Result<()> {
        const SAMPLES: usize = 24;
        if !self.preserves_cone(cfg, SAMPLES) {
            return Err(Error::InvalidTransform("does not preserve the state cone".into()));
        }
        if self.reversible {
            let inv = self.inverse()?;
            if !inv.preserves_cone(cfg, SAMPLES) {
                return Err(Error::InvalidTransform("inverse does not preserve the state cone".into()));
            }
            if !self.preserves_unit(cfg.tol.max(1e-12) * 10.0) {
                return Err(Error::InvalidTransform("reversible map changes the unit effect".into()));
            }
        }
        Ok(())
    }
}

/// Operator for a diagonal phase unitary Σ_x e^{iθ_x}|x⟩⟨x|.
pub fn diagonal_unitary(phases: &[f64]) -> CMat {
    let d = phases.len();
    let mut u = CMat::zeros(d, d);
    for (i, &t) in phases.iter().enumerate() {
        u[(i, i)] = c(t.cos(), t.sin());
    }
    u
}
