//! Classical and quantum back-ends, plus checkers for purification,
//! dynamically faithful states, strong symmetry, composition and the unique
//! distinguishing measurement of a complete frame.

use nalgebra::SymmetricEigen;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gpt::{act_on, EffectVec, Measurement, Parallel, Side, StateVec, System, SystemKind, TransformMat};
use crate::interference::SlitStructure;
use crate::linalg::{self, c, CMat, CVec, RMat, RVec};
use crate::Config;

/// The two implemented theories.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Theory {
    Classical,
    Quantum,
}

impl Theory {
    pub fn name(self) -> &'static str {
        match self {
            Theory::Classical => "classical",
            Theory::Quantum => "quantum",
        }
    }

    /// The elementary system with `n` perfectly distinguishable states.
    pub fn system(self, n: usize) -> System {
        match self {
            Theory::Classical => System::classical(n),
            Theory::Quantum => System::quantum(n),
        }
    }

    pub fn owns(self, system: &System) -> bool {
        match self {
            Theory::Classical => fully_classical(system),
            Theory::Quantum => system.is_fully_quantum(),
        }
    }

    fn require(self, system: &System, op: &'static str) -> Result<()> {
        if self.owns(system) {
            Ok(())
        } else {
            Err(Error::WrongTheory {
                op,
                expected: self.name(),
                found: system.label().to_string(),
            })
        }
    }

    /// A random pure state: a uniformly chosen vertex, or a Haar ket.
    pub fn sample_pure<R: Rng + ?Sized>(self, system: &System, rng: &mut R) -> Result<StateVec> {
        self.require(system, "sample_pure")?;
        let h = system.hilbert_dim();
        match self {
            Theory::Classical => StateVec::basis(system, rng.random_range(0..h)),
            Theory::Quantum => StateVec::from_ket(system, &linalg::haar_state(h, rng)),
        }
    }

    /// A random reversible transformation: a uniform permutation, or Haar
    /// unitary conjugation.
    pub fn sample_reversible<R: Rng + ?Sized>(self, system: &System, rng: &mut R) -> Result<TransformMat> {
        self.require(system, "sample_reversible")?;
        let h = system.hilbert_dim();
        match self {
            Theory::Classical => {
                let mut perm: Vec<usize> = (0..h).collect();
                perm.shuffle(rng);
                TransformMat::permutation(system, &perm)
            }
            Theory::Quantum => TransformMat::from_unitary(system, &linalg::haar_unitary(h, rng)),
        }
    }
}

fn fully_classical(system: &System) -> bool {
    match system.kind() {
        SystemKind::Classical(_) => true,
        SystemKind::Quantum(_) => false,
        SystemKind::Composite(l, r) => fully_classical(l) && fully_classical(r),
    }
}

fn require_quantum(system: &System, op: &'static str) -> Result<()> {
    Theory::Quantum.require(system, op)
}

/// The ket of a pure quantum state (its top eigenvector).
pub fn pure_ket(s: &StateVec, tol: f64) -> Result<CVec> {
    if !s.is_pure(tol) {
        return Err(Error::InvalidState(format!("state of {} is not pure", s.system().label())));
    }
    let (_, vecs) = linalg::hermitian_eigen(&s.to_density());
    Ok(vecs.column(vecs.ncols() - 1).into_owned())
}

/// Purifies a quantum state on the system doubled with a purifying copy of
/// the same dimension: Σ_i √p_i |v_i⟩|i⟩.
pub fn purify(s: &StateVec, cfg: &Config) -> Result<StateVec> {
    let sys = s.system();
    require_quantum(sys, "purify")?;
    if !s.is_normalized(cfg.tol) || !s.in_cone(cfg.tol) {
        return Err(Error::InvalidState("purify needs a normalized state".into()));
    }
    let d = sys.hilbert_dim();
    let (vals, vecs) = linalg::hermitian_eigen(&s.to_density());
    let mut psi = CVec::zeros(d * d);
    // eigenvalues ascending; the purifying index counts from the largest
    for (slot, idx) in (0..d).rev().enumerate() {
        let p = vals[idx];
        if p <= cfg.tol {
            continue;
        }
        let amp = p.sqrt();
        for a in 0..d {
            psi[a * d + slot] += vecs[(a, idx)] * c(amp, 0.0);
        }
    }
    StateVec::from_ket(&System::composite(sys, sys), &psi)
}

/// Dynamically faithful state: the purification Σ_i √p_i |ii⟩ of the
/// completely mixed Σ p_i |i⟩⟨i|.
pub fn faithful_state(p: &[f64], system: &System, cfg: &Config) -> Result<StateVec> {
    require_quantum(system, "faithful_state")?;
    let d = system.hilbert_dim();
    if p.len() != d {
        return Err(Error::Dimension(format!("{} weights for {}", p.len(), system.label())));
    }
    if let Some(i) = p.iter().position(|&x| x <= 0.0) {
        return Err(Error::InvalidState(format!("weight p_{i} = {} is not strictly positive", p[i])));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > cfg.tol.max(1e-12) {
        return Err(Error::InvalidState(format!("weights sum to {total}")));
    }
    let mut psi = CVec::zeros(d * d);
    for (i, &pi) in p.iter().enumerate() {
        psi[i * d + i] = c(pi.sqrt(), 0.0);
    }
    StateVec::from_ket(&System::composite(system, system), &psi)
}

/// Whether (T⊗id)ψ and (T2⊗id)ψ agree within `tol` in sup-norm.
pub fn check_faithful(t: &TransformMat, t2: &TransformMat, psi: &StateVec, tol: f64) -> Result<bool> {
    let (a, r) = psi
        .system()
        .factors()
        .ok_or_else(|| Error::NotComposite(psi.system().label().to_string()))?;
    if t.input() != a || t2.input() != a || t.output() != t2.output() {
        return Err(Error::SystemMismatch {
            expected: a.label().to_string(),
            found: format!("{} / {}", t.input().label(), t2.input().label()),
        });
    }
    let left = act_on(t, r, Side::Left).apply(psi)?;
    let right = act_on(t2, r, Side::Left).apply(psi)?;
    Ok(left.distance(&right)? < tol)
}

fn check_frame(states: &[StateVec], tol: f64) -> Result<()> {
    for (i, s) in states.iter().enumerate() {
        if !s.is_pure(tol) {
            return Err(Error::NotDistinguishable(format!("state {i} is not pure")));
        }
    }
    for i in 0..states.len() {
        for j in (i + 1)..states.len() {
            let overlap = states[i].coeffs().dot(states[j].coeffs());
            if overlap.abs() > tol {
                return Err(Error::NotDistinguishable(format!("states {i} and {j} overlap by {overlap:e}")));
            }
        }
    }
    Ok(())
}

/// A reversible transformation mapping each `src[i]` to `dst[i]`.
pub fn check_strong_symmetry_witness(src: &[StateVec], dst: &[StateVec], cfg: &Config) -> Result<TransformMat> {
    if src.len() != dst.len() {
        return Err(Error::Dimension(format!("{} source states, {} targets", src.len(), dst.len())));
    }
    let Some(first) = src.first() else {
        return Err(Error::InvalidState("empty tuples".into()));
    };
    let sys = first.system().clone();
    for s in src.iter().chain(dst) {
        if s.system() != &sys {
            return Err(Error::SystemMismatch {
                expected: sys.label().to_string(),
                found: s.system().label().to_string(),
            });
        }
    }
    check_frame(src, cfg.tol)?;
    check_frame(dst, cfg.tol)?;
    let h = sys.hilbert_dim();
    let witness = if fully_classical(&sys) {
        let vertex = |s: &StateVec| s.coeffs().iter().position(|&x| x >= 1.0 - cfg.tol).expect("pure vertex");
        let mut perm = vec![usize::MAX; h];
        let mut used = vec![false; h];
        for (s, t) in src.iter().zip(dst) {
            let (from, to) = (vertex(s), vertex(t));
            perm[from] = to;
            used[to] = true;
        }
        let mut free = (0..h).filter(|&i| !used[i]);
        for p in perm.iter_mut().filter(|p| **p == usize::MAX) {
            *p = free.next().expect("as many free targets as free sources");
        }
        TransformMat::permutation(&sys, &perm)?
    } else {
        require_quantum(&sys, "check_strong_symmetry_witness")?;
        let kets = |xs: &[StateVec]| xs.iter().map(|s| pure_ket(s, cfg.tol)).collect::<Result<Vec<_>>>();
        let us = linalg::complete_unitary(&kets(src)?, h, 1e-6)
            .ok_or_else(|| Error::NotDistinguishable("source kets are not orthonormal".into()))?;
        let ud = linalg::complete_unitary(&kets(dst)?, h, 1e-6)
            .ok_or_else(|| Error::NotDistinguishable("target kets are not orthonormal".into()))?;
        TransformMat::from_unitary(&sys, &(ud * us.adjoint()))?
    };
    for (s, t) in src.iter().zip(dst) {
        let gap = witness.apply(s)?.distance(t)?;
        if gap > cfg.tol.max(1e-10) {
            return Err(Error::InvalidTransform(format!("witness misses a target by {gap:e}")));
        }
    }
    Ok(witness)
}

/// Outcome of sampling the composition axioms.
#[derive(Clone, Debug, Serialize)]
pub struct CompositionReport {
    pub theory: Theory,
    pub trials: usize,
    pub failures: Vec<String>,
}

impl CompositionReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Samples products of pure states (which must stay pure) and checks that
/// maximally mixed states compose to the maximally mixed state.
pub fn check_composition_axioms(theory: Theory, trials: usize, seed: u64) -> CompositionReport {
    const TOL: f64 = 1e-9;
    let mut failures = Vec::new();
    for trial in 0..trials {
        let mut rng = linalg::rng_for(seed, trial as u64);
        let a = theory.system(rng.random_range(2..=4));
        let b = theory.system(rng.random_range(2..=4));
        let sa = theory.sample_pure(&a, &mut rng).expect("own system");
        let sb = theory.sample_pure(&b, &mut rng).expect("own system");
        let prod = sa.parallel(&sb);
        if !prod.is_pure(TOL) {
            failures.push(format!("trial {trial}: product of pure states on {}", prod.system().label()));
        }
    }
    for da in 1..=4 {
        for db in 1..=4 {
            let a = theory.system(da);
            let b = theory.system(db);
            let prod = StateVec::maximally_mixed(&a).parallel(&StateVec::maximally_mixed(&b));
            let target = StateVec::maximally_mixed(prod.system());
            let gap = prod.distance(&target).expect("same system");
            if gap > TOL {
                failures.push(format!("maximally mixed {da}x{db} off by {gap:e}"));
            }
        }
    }
    CompositionReport {
        theory,
        trials,
        failures,
    }
}

/// Orthonormal basis of the real directions orthogonal to all rows of `a`.
fn kernel_basis(a: &RMat) -> Vec<RVec> {
    let dim = a.ncols();
    if a.nrows() == 0 {
        return (0..dim).map(|i| RVec::from_fn(dim, |r, _| if r == i { 1.0 } else { 0.0 })).collect();
    }
    let gram = a * a.transpose();
    let Some(gram_inv) = gram.try_inverse() else {
        return Vec::new();
    };
    let proj = RMat::identity(dim, dim) - a.transpose() * gram_inv * a;
    let eig = SymmetricEigen::new((&proj + proj.transpose()) * 0.5);
    (0..dim)
        .filter(|&i| eig.eigenvalues[i] > 0.5)
        .map(|i| eig.eigenvectors.column(i).into_owned())
        .collect()
}

/// Solves (e_j|i) = δ_ij on a complete frame and verifies that no direction
/// of the solution space keeps a candidate inside the effect cone, for the
/// solution itself and for scaled targets α·δ_ij.
pub fn check_unique_distinguishing(slits: &SlitStructure, cfg: &Config) -> Result<Measurement> {
    let sys = slits.system();
    let n = slits.len();
    if n < sys.capacity() {
        return Err(Error::IncompleteFrame {
            slits: n,
            capacity: sys.capacity(),
        });
    }
    let dim = sys.dim();
    let a = RMat::from_fn(n, dim, |i, col| slits.states()[i].coeffs()[col]);
    let gram_inv = (&a * a.transpose())
        .try_inverse()
        .ok_or_else(|| Error::NotDistinguishable("slit states are linearly dependent".into()))?;
    let solve = a.transpose() * gram_inv;
    let effects: Vec<EffectVec> = (0..n)
        .map(|j| EffectVec::new(sys, solve.column(j).into_owned()))
        .collect::<Result<_>>()?;

    for (j, e) in effects.iter().enumerate() {
        if !e.in_cone(cfg.tol) {
            return Err(Error::NotDistinguishable(format!("solution for slit {j} is not an effect")));
        }
        for (i, s) in slits.states().iter().enumerate() {
            let expect = if i == j { 1.0 } else { 0.0 };
            if (e.coeffs().dot(s.coeffs()) - expect).abs() > cfg.tol.max(1e-12) {
                return Err(Error::NotDistinguishable(format!("(e_{j}|{i}) misses δ")));
            }
        }
    }
    let measurement = Measurement::new(sys, effects, cfg.tol.max(1e-12))?;

    let mut directions = kernel_basis(&a);
    let mut rng = linalg::rng_for(cfg.seed, 0xd157);
    if !directions.is_empty() {
        for _ in 0..8 {
            let mut mix = RVec::zeros(dim);
            for k in &directions {
                mix += k * rng.random_range(-1.0..1.0);
            }
            let norm = mix.norm();
            if norm > 1e-6 {
                directions.push(mix / norm);
            }
        }
    }
    // a feasible direction would keep e ± t·k inside the cone for small t
    const STEP: f64 = 1e-3;
    const STRICT: f64 = 1e-12;
    for alpha in [1.0, 0.5, 0.25] {
        for (j, e) in measurement.effects().iter().enumerate() {
            let base = e.coeffs() * alpha;
            for k in &directions {
                for sign in [1.0, -1.0] {
                    if sys.in_effect_cone(&(&base + k * (sign * STEP)), STRICT) {
                        return Err(Error::NotDistinguishable(format!(
                            "the effect for slit {j} (scale {alpha}) is not unique"
                        )));
                    }
                }
            }
        }
    }
    Ok(measurement)
}

/// Fourier matrix F_{jk} = ω^{jk}/√d.
pub fn fourier(d: usize) -> CMat {
    let norm = (d as f64).sqrt();
    CMat::from_fn(d, d, |j, k| {
        let theta = 2.0 * std::f64::consts::PI * (j * k) as f64 / d as f64;
        c(theta.cos() / norm, theta.sin() / norm)
    })
}
