//! Slit structures, face projectors P_I, coherence projectors ω_I, the
//! C(k,|I|,N) decomposition of the identity, maximal interference order and
//! Sorkin's hierarchy of interference functionals.
//!
//! Slits are pure, perfectly distinguishable states |i⟩. The face projector
//! P_I acts as ρ ↦ Π_I ρ Π_I with Π_I = Σ_{i∈I}|i⟩⟨i| (for classical systems
//! this zeroes the coordinates outside I). P_∅ is the zero map. The coherence
//! projector is the Möbius inverse ω_I = Σ_{J⊆I} (−1)^{|I|−|J|} P_J.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::gpt::{probability, EffectVec, Measurement, StateVec, System, TransformMat};
use crate::linalg::{self, c, CMat, CVec, RMat};
use crate::Config;

/// Largest slit count for which subsets are enumerated.
pub const MAX_SLITS: usize = 12;

/// Projector families up to this many slits are cached eagerly.
const EAGER_CACHE_SLITS: usize = 6;

/// A subset of slit indices, stored as a bitmask.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct SlitSet(u64);

impl SlitSet {
    pub const EMPTY: SlitSet = SlitSet(0);

    pub fn from_mask(mask: u64) -> Self {
        SlitSet(mask)
    }

    pub fn full(n: usize) -> Self {
        SlitSet(if n >= 64 { u64::MAX } else { (1u64 << n) - 1 })
    }

    pub fn from_indices(indices: &[usize]) -> Self {
        SlitSet(indices.iter().fold(0u64, |m, &i| m | (1u64 << i)))
    }

    pub fn singleton(i: usize) -> Self {
        SlitSet(1u64 << i)
    }

    pub fn mask(self) -> u64 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, i: usize) -> bool {
        i < 64 && self.0 & (1u64 << i) != 0
    }

    pub fn is_subset_of(self, other: SlitSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn intersection(self, other: SlitSet) -> SlitSet {
        SlitSet(self.0 & other.0)
    }

    pub fn union(self, other: SlitSet) -> SlitSet {
        SlitSet(self.0 | other.0)
    }

    pub fn max_index(self) -> Option<usize> {
        (self.0 != 0).then(|| 63 - self.0.leading_zeros() as usize)
    }

    pub fn indices(self) -> impl Iterator<Item = usize> {
        (0..64).filter(move |&i| self.0 & (1u64 << i) != 0)
    }

    /// Every subset of `self`, the empty set first.
    pub fn subsets(self) -> impl Iterator<Item = SlitSet> {
        // standard submask enumeration, reversed into increasing order
        let full = self.0;
        let mut subs = Vec::with_capacity(1usize << self.len());
        let mut s = full;
        loop {
            subs.push(SlitSet(s));
            if s == 0 {
                break;
            }
            s = (s - 1) & full;
        }
        subs.into_iter().rev()
    }
}

impl fmt::Display for SlitSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.indices().map(|i| i.to_string()).collect();
        write!(f, "{{{}}}", items.join(","))
    }
}

/// All subsets of {0..n} with size in `1..=max_size`, in mask order.
pub fn subsets_up_to(n: usize, max_size: usize) -> Vec<SlitSet> {
    (1u64..(1u64 << n))
        .map(SlitSet)
        .filter(|s| s.len() <= max_size)
        .collect()
}

/// N pure perfectly distinguishable states with their distinguishing effects.
#[derive(Clone, Debug)]
pub struct SlitStructure {
    system: System,
    kets: Vec<CVec>,
    states: Vec<StateVec>,
    distinguishing: Measurement,
}

impl SlitStructure {
    /// Slits given by orthonormal kets on the embedding space of `system`.
    pub fn from_kets(system: &System, kets: Vec<CVec>, cfg: &Config) -> Result<Self> {
        let n = kets.len();
        if n == 0 {
            return Err(Error::InvalidSubset("a slit structure needs at least one slit".into()));
        }
        if n > MAX_SLITS {
            return Err(Error::CapExceeded {
                what: "slits",
                value: n,
                cap: MAX_SLITS,
            });
        }
        let states = kets
            .iter()
            .map(|k| StateVec::from_ket(system, k))
            .collect::<Result<Vec<_>>>()?;
        for (i, s) in states.iter().enumerate() {
            if !s.is_pure(cfg.tol) {
                return Err(Error::InvalidState(format!(
                    "slit {i} is not a pure state of {}",
                    system.label()
                )));
            }
        }
        // self-dual inner product: Tr(ρ_i ρ_j)
        for i in 0..n {
            for j in (i + 1)..n {
                let overlap = states[i].coeffs().dot(states[j].coeffs());
                if overlap.abs() > cfg.tol {
                    return Err(Error::NotDistinguishable(format!(
                        "slits {i} and {j} overlap by {overlap:e}"
                    )));
                }
            }
        }
        let kets: Vec<CVec> = kets.into_iter().map(|k| {
            let n = k.norm();
            k / c(n, 0.0)
        }).collect();
        let mut effects: Vec<EffectVec> = kets
            .iter()
            .map(|k| EffectVec::from_ket(system, k))
            .collect::<Result<_>>()?;
        if n < system.capacity() {
            // "no slit" outcome completes the measurement on sub-capacity frames
            let mut rest = system.unit_coeffs();
            for e in &effects {
                rest -= e.coeffs();
            }
            effects.push(EffectVec::new(system, rest)?);
        }
        let distinguishing = Measurement::new(system, effects, cfg.tol.max(1e-12))?;
        Ok(SlitStructure {
            system: system.clone(),
            kets,
            states,
            distinguishing,
        })
    }

    /// The basis states |0⟩..|N−1⟩ of `system`.
    pub fn computational(system: &System, n: usize, cfg: &Config) -> Result<Self> {
        let h = system.hilbert_dim();
        if n > h {
            return Err(Error::OutOfRange(format!("{n} slits on {}", system.label())));
        }
        Self::from_kets(system, (0..n).map(|i| linalg::basis_ket(h, i)).collect(), cfg)
    }

    /// All N basis states of a quantum(N) system.
    pub fn quantum(n: usize, cfg: &Config) -> Result<Self> {
        Self::computational(&System::quantum(n), n, cfg)
    }

    /// All N vertices of a classical(N) system.
    pub fn classical(n: usize, cfg: &Config) -> Result<Self> {
        Self::computational(&System::classical(n), n, cfg)
    }

    /// Columns of `u` as slits on quantum(d).
    pub fn rotated(u: &CMat, cfg: &Config) -> Result<Self> {
        let d = u.nrows();
        let kets = (0..u.ncols()).map(|j| u.column(j).into_owned()).collect();
        Self::from_kets(&System::quantum(d), kets, cfg)
    }

    pub fn system(&self) -> &System {
        &self.system
    }

    pub fn len(&self) -> usize {
        self.kets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kets.is_empty()
    }

    pub fn states(&self) -> &[StateVec] {
        &self.states
    }

    pub fn kets(&self) -> &[CVec] {
        &self.kets
    }

    /// Distinguishing effects (j| for j < N. A trailing complement effect is
    /// present when the frame is incomplete.
    pub fn distinguishing(&self) -> &Measurement {
        &self.distinguishing
    }

    pub fn effect(&self, j: usize) -> &EffectVec {
        &self.distinguishing.effects()[j]
    }

    pub fn is_complete(&self) -> bool {
        self.len() == self.system.capacity()
    }

    pub fn full_set(&self) -> SlitSet {
        SlitSet::full(self.len())
    }

    fn check_subset(&self, set: SlitSet) -> Result<()> {
        if set.is_subset_of(self.full_set()) {
            Ok(())
        } else {
            Err(Error::InvalidSubset(format!("{set} is not a subset of {} slits", self.len())))
        }
    }
}

/// Face projectors of a slit structure.
///
/// With A the vectoriser rotated into the slit basis, every P_I is
/// A†·diag(m_I)·A where m_I marks the operator entries (i,j) with i,j ∈ I.
/// Linear combinations of projectors therefore reduce to combining masks.
#[derive(Clone, Debug)]
pub struct ProjectorFamily {
    slits: SlitStructure,
    // rows indexed by (i,j) in the slit basis, columns by system coefficients
    aligned: CMat,
    cache: BTreeMap<SlitSet, TransformMat>,
}

impl ProjectorFamily {
    pub fn new(slits: &SlitStructure) -> Self {
        let system = slits.system();
        let h = system.hilbert_dim();
        let n = slits.len();
        let w = linalg::complete_unitary(slits.kets(), h, 1e-9).expect("slit kets are orthonormal");
        // vec(W† ρ W) = (W† ⊗ W^T) vec(ρ) in row-major convention
        let rot = w.adjoint().kronecker(&w.transpose());
        let full = &rot * system.vectorizer().as_ref();
        // only rows with both indices among the slits can be selected by a mask
        let rows: Vec<usize> = (0..n).flat_map(|i| (0..n).map(move |j| i * h + j)).collect();
        let aligned = CMat::from_fn(rows.len(), system.dim(), |r, col| full[(rows[r], col)]);
        let mut family = ProjectorFamily {
            slits: slits.clone(),
            aligned,
            cache: BTreeMap::new(),
        };
        if n <= EAGER_CACHE_SLITS {
            for set in SlitSet::full(n).subsets() {
                let p = family.build(|i, j| if set.contains(i) && set.contains(j) { 1.0 } else { 0.0 });
                family.cache.insert(set, p);
            }
        }
        family
    }

    pub fn slits(&self) -> &SlitStructure {
        &self.slits
    }

    /// A†·diag(weight(i,j))·A.
    fn build<F: Fn(usize, usize) -> f64>(&self, weight: F) -> TransformMat {
        let n = self.slits.len();
        let mut weighted = self.aligned.clone();
        for i in 0..n {
            for j in 0..n {
                let w = weight(i, j);
                let mut row = weighted.row_mut(i * n + j);
                row *= c(w, 0.0);
            }
        }
        let m: CMat = self.aligned.adjoint() * weighted;
        let sys = self.slits.system();
        TransformMat::new(sys, sys, m.map(|z| z.re)).expect("square on the slit system")
    }

    /// Σ_I coefficient(I)·P_I over the given subsets.
    pub fn combination(&self, terms: &[(SlitSet, f64)]) -> Result<TransformMat> {
        let n = self.slits.len();
        let mut weights = RMat::zeros(n, n);
        for &(set, coeff) in terms {
            self.slits.check_subset(set)?;
            for i in set.indices() {
                for j in set.indices() {
                    weights[(i, j)] += coeff;
                }
            }
        }
        Ok(self.build(|i, j| weights[(i, j)]))
    }

    /// The face projector P_I.
    pub fn face_projector(&self, set: SlitSet) -> Result<TransformMat> {
        self.slits.check_subset(set)?;
        if let Some(p) = self.cache.get(&set) {
            return Ok(p.clone());
        }
        Ok(self.build(|i, j| if set.contains(i) && set.contains(j) { 1.0 } else { 0.0 }))
    }

    /// P_I |s) without materialising the projector.
    pub fn project_state(&self, set: SlitSet, s: &StateVec) -> Result<StateVec> {
        self.slits.check_subset(set)?;
        let n = self.slits.len();
        let mut amp = &self.aligned * s.coeffs().map(|x| c(x, 0.0));
        for i in 0..n {
            for j in 0..n {
                if !(set.contains(i) && set.contains(j)) {
                    amp[i * n + j] = linalg::ZERO;
                }
            }
        }
        let back: CVec = self.aligned.adjoint() * amp;
        StateVec::new(self.slits.system(), back.map(|z| z.re))
    }

    /// ω_I = Σ_{J⊆I} (−1)^{|I|−|J|} P_J.
    pub fn coherence_projector(&self, set: SlitSet) -> Result<TransformMat> {
        if set.is_empty() {
            return Err(Error::InvalidSubset("coherence projector of the empty set".into()));
        }
        self.slits.check_subset(set)?;
        let terms: Vec<(SlitSet, f64)> = set
            .subsets()
            .map(|sub| (sub, alternating_sign(set.len() - sub.len())))
            .collect();
        self.combination(&terms)
    }

    /// The identity on the face-complete space, P_{all slits}.
    pub fn face_identity(&self) -> TransformMat {
        self.face_projector(self.slits.full_set()).expect("full set is valid")
    }

    /// ‖P_full − Σ_{1≤|I|≤k} C(k,|I|,N) P_I‖∞.
    pub fn identity_residual(&self, k: usize) -> Result<f64> {
        let n = self.slits.len();
        if k == 0 || k > n {
            return Err(Error::OutOfRange(format!("order k = {k} for N = {n}")));
        }
        let mut terms = Vec::new();
        for set in subsets_up_to(n, k) {
            terms.push((set, decomposition_coefficient(k, set.len(), n)? as f64));
        }
        let sum = self.combination(&terms)?;
        self.face_identity().distance(&sum)
    }

    /// ‖P_full − Σ_{1≤|I|≤k} ω_I‖∞.
    pub fn coherence_identity_residual(&self, k: usize) -> Result<f64> {
        let n = self.slits.len();
        if k == 0 || k > n {
            return Err(Error::OutOfRange(format!("order k = {k} for N = {n}")));
        }
        // Σ_I ω_I expanded into face projectors
        let mut coeffs: BTreeMap<SlitSet, f64> = BTreeMap::new();
        for set in subsets_up_to(n, k) {
            for sub in set.subsets().filter(|s| !s.is_empty()) {
                *coeffs.entry(sub).or_default() += alternating_sign(set.len() - sub.len());
            }
        }
        let terms: Vec<(SlitSet, f64)> = coeffs.into_iter().collect();
        let sum = self.combination(&terms)?;
        self.face_identity().distance(&sum)
    }

    /// Components ω_I|s) for 1 ≤ |I| ≤ k, which sum to |s) when k is at least
    /// the maximal order of interference.
    pub fn coherence_decompose(&self, k: usize, s: &StateVec, tol: f64) -> Result<BTreeMap<SlitSet, StateVec>> {
        let residual = self.coherence_identity_residual(k)?;
        if residual >= tol {
            return Err(Error::OrderTooLow { k, residual });
        }
        let mut out = BTreeMap::new();
        for set in subsets_up_to(self.slits.len(), k) {
            out.insert(set, self.coherence_projector(set)?.apply(s)?);
        }
        Ok(out)
    }

    /// I_n(I) = Σ_{∅≠J⊆I} (−1)^{n−|J|} (e|P_J|s), n = |I|.
    pub fn sorkin_functional(&self, s: &StateVec, e: &EffectVec, set: SlitSet) -> Result<f64> {
        if set.is_empty() {
            return Err(Error::InvalidSubset("Sorkin functional of the empty set".into()));
        }
        self.slits.check_subset(set)?;
        let n = set.len();
        let mut total = 0.0;
        for sub in set.subsets().filter(|j| !j.is_empty()) {
            total += alternating_sign(n - sub.len()) * probability(e, &self.project_state(sub, s)?)?;
        }
        Ok(total)
    }

    /// Residuals for k = 1..N and the smallest k whose residual is below `tol`.
    pub fn max_interference_order(&self, tol: f64) -> Result<OrderScan> {
        let n = self.slits.len();
        let residuals = (1..=n).map(|k| self.coherence_identity_residual(k)).collect::<Result<Vec<_>>>()?;
        let monotone = residuals.windows(2).all(|w| w[1] <= w[0] + tol);
        let order = residuals
            .iter()
            .position(|&r| r < tol)
            .map(|i| i + 1)
            .unwrap_or(n);
        Ok(OrderScan {
            order,
            residuals,
            monotone,
        })
    }
}

/// Result of scanning the coherence residual over k.
#[derive(Clone, Debug)]
pub struct OrderScan {
    pub order: usize,
    pub residuals: Vec<f64>,
    /// Whether the residual is non-increasing in k (within tolerance).
    pub monotone: bool,
}

fn alternating_sign(exponent: usize) -> f64 {
    if exponent.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// C(k, m, N) = (−1)^{k−m} · binom(N−m−1, k−m), with binom(−1, 0) = 1 for the
/// k = m = N corner.
pub fn decomposition_coefficient(k: usize, m: usize, n: usize) -> Result<i64> {
    if m == 0 || m > k || k > n {
        return Err(Error::OutOfRange(format!("C(k={k}, m={m}, N={n}) needs 1 ≤ m ≤ k ≤ N")));
    }
    let r = k - m;
    let magnitude = if n == m {
        // only reachable with k = m = N
        1
    } else {
        binomial(n - m - 1, r)
    };
    Ok(if r.is_multiple_of(2) { magnitude } else { -magnitude })
}

fn binomial(n: usize, k: usize) -> i64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: i64 = 1;
    for i in 0..k {
        acc = acc * (n - i) as i64 / (i + 1) as i64;
    }
    acc
}

/// The N basis-state slits of quantum(N) or classical(N).
pub fn standard_slits(theory_quantum: bool, n: usize, cfg: &Config) -> Result<SlitStructure> {
    if n > MAX_SLITS {
        return Err(Error::CapExceeded {
            what: "N",
            value: n,
            cap: MAX_SLITS,
        });
    }
    if theory_quantum {
        SlitStructure::quantum(n, cfg)
    } else {
        SlitStructure::classical(n, cfg)
    }
}

/// Uniform superposition ket over the slits in `set`.
pub fn uniform_ket(slits: &SlitStructure, set: SlitSet) -> CVec {
    let h = slits.system().hilbert_dim();
    let mut v = CVec::zeros(h);
    for i in set.indices() {
        v += &slits.kets()[i];
    }
    let n = v.norm();
    v / c(n, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    fn cfg() -> Config {
        Config::default()
    }

    #[test]
    fn slit_set_subsets_in_order() {
        let s = SlitSet::from_indices(&[0, 2]);
        let subs: Vec<u64> = s.subsets().map(|x| x.mask()).collect();
        assert_eq!(subs, vec![0, 1, 4, 5]);
        assert_eq!(s.to_string(), "{0,2}");
    }

    #[test]
    fn coefficient_examples() {
        for k in 1..6 {
            for m in 1..=k {
                let expect = if (k - m) % 2 == 0 { 1 } else { -1 };
                assert_eq!(decomposition_coefficient(k, m, k + 1).unwrap(), expect);
            }
        }
        for n in 3..8 {
            assert_eq!(decomposition_coefficient(3, 3, n).unwrap(), 1);
        }
        assert_eq!(decomposition_coefficient(2, 1, 4).unwrap(), -2);
        assert_eq!(decomposition_coefficient(2, 2, 2).unwrap(), 1);
        assert_eq!(decomposition_coefficient(2, 1, 2).unwrap(), 0);
        assert!(decomposition_coefficient(3, 0, 4).is_err());
        assert!(decomposition_coefficient(5, 2, 4).is_err());
    }

    #[test]
    fn empty_projector_is_zero_and_full_is_identity() {
        for slits in [SlitStructure::quantum(3, &cfg()).unwrap(), SlitStructure::classical(4, &cfg()).unwrap()] {
            let fam = ProjectorFamily::new(&slits);
            let zero = fam.face_projector(SlitSet::EMPTY).unwrap();
            assert!(linalg::sup_norm(zero.matrix()) < 1e-15);
            let full = fam.face_identity();
            let id = TransformMat::identity(slits.system());
            assert!(full.distance(&id).unwrap() < 1e-12);
        }
    }

    #[test]
    fn singleton_omega_is_face_projector() {
        let fam = ProjectorFamily::new(&SlitStructure::quantum(3, &cfg()).unwrap());
        let w = fam.coherence_projector(SlitSet::singleton(2)).unwrap();
        let p = fam.face_projector(SlitSet::singleton(2)).unwrap();
        assert!(w.distance(&p).unwrap() < 1e-14);
        assert!(fam.coherence_projector(SlitSet::EMPTY).is_err());
    }

    #[test]
    fn invalid_subset_rejected() {
        let fam = ProjectorFamily::new(&SlitStructure::quantum(3, &cfg()).unwrap());
        assert!(matches!(fam.face_projector(SlitSet::singleton(5)), Err(Error::InvalidSubset(_))));
    }

    #[test]
    fn quantum_k1_residual_is_large() {
        let fam = ProjectorFamily::new(&SlitStructure::quantum(3, &cfg()).unwrap());
        assert!(fam.identity_residual(1).unwrap() > 0.5);
        assert!(fam.identity_residual(2).unwrap() < 1e-9);
        // N = 2, k = 1: the full coherence block survives
        let fam2 = ProjectorFamily::new(&SlitStructure::quantum(2, &cfg()).unwrap());
        let r = fam2.coherence_identity_residual(1).unwrap();
        let omega01 = fam2.coherence_projector(SlitSet::full(2)).unwrap();
        assert!((r - linalg::sup_norm(omega01.matrix())).abs() < 1e-12);
        assert!(r > 0.0);
    }

    #[test]
    fn classical_k1_is_exact() {
        for n in 1..=6 {
            let fam = ProjectorFamily::new(&SlitStructure::classical(n, &cfg()).unwrap());
            assert_eq!(fam.identity_residual(1).unwrap(), 0.0);
            assert_eq!(fam.coherence_identity_residual(1).unwrap(), 0.0);
        }
    }

    #[test]
    fn order_scan() {
        let q3 = ProjectorFamily::new(&SlitStructure::quantum(3, &cfg()).unwrap());
        let scan = q3.max_interference_order(1e-9).unwrap();
        assert_eq!(scan.order, 2);
        assert!(scan.monotone);
        let c4 = ProjectorFamily::new(&SlitStructure::classical(4, &cfg()).unwrap());
        assert_eq!(c4.max_interference_order(1e-9).unwrap().order, 1);
        let q4 = ProjectorFamily::new(&SlitStructure::quantum(4, &cfg()).unwrap());
        assert_eq!(q4.max_interference_order(1e-9).unwrap().order, 2);
    }

    #[test]
    fn decompose_rejects_low_order() {
        let fam = ProjectorFamily::new(&SlitStructure::quantum(3, &cfg()).unwrap());
        let s = StateVec::maximally_mixed(fam.slits().system());
        assert!(matches!(fam.coherence_decompose(1, &s, 1e-9), Err(Error::OrderTooLow { .. })));
    }

    #[test]
    fn basis_state_has_single_component() {
        let fam = ProjectorFamily::new(&SlitStructure::quantum(3, &cfg()).unwrap());
        let s = StateVec::basis(fam.slits().system(), 1).unwrap();
        let parts = fam.coherence_decompose(2, &s, 1e-9).unwrap();
        for (set, part) in parts {
            let size = linalg::sup_norm_vec(part.coeffs());
            if set == SlitSet::singleton(1) {
                assert!(part.distance(&s).unwrap() < 1e-12);
            } else {
                assert!(size < 1e-12, "{set} has weight {size}");
            }
        }
    }

    #[test]
    fn qubit_plus_sorkin_two() {
        let fam = ProjectorFamily::new(&SlitStructure::quantum(2, &cfg()).unwrap());
        let q = fam.slits().system().clone();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let plus = CVec::from_vec(vec![c(h, 0.0), c(h, 0.0)]);
        let s = StateVec::from_ket(&q, &plus).unwrap();
        let e = EffectVec::from_ket(&q, &plus).unwrap();
        let i2 = fam.sorkin_functional(&s, &e, SlitSet::full(2)).unwrap();
        assert!((i2 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn uniform_qutrit_has_no_third_order_term() {
        let fam = ProjectorFamily::new(&SlitStructure::quantum(3, &cfg()).unwrap());
        let q = fam.slits().system().clone();
        let psi = uniform_ket(fam.slits(), SlitSet::full(3));
        let s = StateVec::from_ket(&q, &psi).unwrap();
        let e = EffectVec::from_ket(&q, &psi).unwrap();
        assert!(fam.sorkin_functional(&s, &e, SlitSet::full(3)).unwrap().abs() < 1e-9);
    }

    #[test]
    fn classical_second_order_vanishes_exactly() {
        let fam = ProjectorFamily::new(&SlitStructure::classical(3, &cfg()).unwrap());
        let sys = fam.slits().system().clone();
        let s = StateVec::new(&sys, linalg::RVec::from_vec(vec![0.2, 0.3, 0.5])).unwrap();
        let e = EffectVec::new(&sys, linalg::RVec::from_vec(vec![0.7, 0.1, 0.4])).unwrap();
        for pair in [[0, 1], [0, 2], [1, 2]] {
            assert_eq!(fam.sorkin_functional(&s, &e, SlitSet::from_indices(&pair)).unwrap(), 0.0);
        }
    }

    #[test]
    fn sub_capacity_frame_has_complement_effect() {
        let slits = SlitStructure::computational(&System::quantum(4), 2, &cfg()).unwrap();
        assert!(!slits.is_complete());
        assert_eq!(slits.distinguishing().len(), 3);
    }

    #[test]
    fn overlapping_slits_rejected() {
        let q = System::quantum(2);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let kets = vec![linalg::basis_ket(2, 0), CVec::from_vec(vec![c(h, 0.0), c(h, 0.0)])];
        assert!(matches!(
            SlitStructure::from_kets(&q, kets, &cfg()),
            Err(Error::NotDistinguishable(_))
        ));
    }
}
