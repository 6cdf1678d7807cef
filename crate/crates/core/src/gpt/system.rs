use std::fmt;
use std::sync::{Arc, OnceLock};

use rand::Rng;

use crate::linalg::{self, c, CMat, CVec, RVec, ONE};

/// Which back-end a system belongs to.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SystemKind {
    /// Probability simplex on `n` outcomes.
    Classical(usize),
    /// Hermitian operators on C^d.
    Quantum(usize),
    Composite(System, System),
}

struct Inner {
    label: String,
    kind: SystemKind,
    basis: OnceLock<Arc<Vec<CMat>>>,
    vectorizer: OnceLock<Arc<CMat>>,
}

/// A GPT system: a real vector space of states with its cones and unit effect.
///
/// Every system is realised inside the Hermitian operators of some C^h
/// (h = [`System::hilbert_dim`]) by an orthonormal operator basis {B_a}
/// under the trace inner product. State coefficients are c_a = Tr(B_a ρ);
/// effect coefficients e_a satisfy E = Σ_a e_a B_a, so (e|s) = Tr(Eρ) = e·c.
///
/// Basis order for `quantum(d)`:
/// 1. I/√d
/// 2. for each pair i<j (lexicographic): (|i⟩⟨j|+|j⟩⟨i|)/√2, then (−i|i⟩⟨j|+i|j⟩⟨i|)/√2
/// 3. for l = 1..d−1: (Σ_{m<l}|m⟩⟨m| − l|l⟩⟨l|)/√(l(l+1))
///
/// `classical(n)` uses the diagonal matrix units |i⟩⟨i|. A composite uses the
/// Kronecker products B_a ⊗ B_b with the left index major, so coefficient
/// vectors of product devices are plain Kronecker products.
#[derive(Clone)]
pub struct System(Arc<Inner>);

impl System {
    fn build(label: String, kind: SystemKind) -> Self {
        System(Arc::new(Inner {
            label,
            kind,
            basis: OnceLock::new(),
            vectorizer: OnceLock::new(),
        }))
    }

    pub fn classical(n: usize) -> Self {
        assert!(n > 0, "classical system needs at least one outcome");
        Self::build(format!("C{n}"), SystemKind::Classical(n))
    }

    pub fn quantum(d: usize) -> Self {
        assert!(d > 0, "quantum system needs positive dimension");
        Self::build(format!("Q{d}"), SystemKind::Quantum(d))
    }

    pub fn composite(left: &System, right: &System) -> Self {
        Self::build(
            format!("({}⊗{})", left.label(), right.label()),
            SystemKind::Composite(left.clone(), right.clone()),
        )
    }

    pub fn with_label(&self, label: impl Into<String>) -> Self {
        Self::build(label.into(), self.0.kind.clone())
    }

    pub fn label(&self) -> &str {
        &self.0.label
    }

    pub fn kind(&self) -> &SystemKind {
        &self.0.kind
    }

    /// Real vector-space dimension.
    pub fn dim(&self) -> usize {
        match &self.0.kind {
            SystemKind::Classical(n) => *n,
            SystemKind::Quantum(d) => d * d,
            SystemKind::Composite(l, r) => l.dim() * r.dim(),
        }
    }

    /// Dimension of the ambient Hilbert space the system is embedded in.
    pub fn hilbert_dim(&self) -> usize {
        match &self.0.kind {
            SystemKind::Classical(n) => *n,
            SystemKind::Quantum(d) => *d,
            SystemKind::Composite(l, r) => l.hilbert_dim() * r.hilbert_dim(),
        }
    }

    /// Maximal number of perfectly distinguishable states.
    pub fn capacity(&self) -> usize {
        self.hilbert_dim()
    }

    pub fn is_classical(&self) -> bool {
        matches!(self.0.kind, SystemKind::Classical(_))
    }

    pub fn is_quantum(&self) -> bool {
        matches!(self.0.kind, SystemKind::Quantum(_))
    }

    /// True when every leaf factor is quantum, so arbitrary unitaries act on
    /// the whole embedding space.
    pub fn is_fully_quantum(&self) -> bool {
        match &self.0.kind {
            SystemKind::Classical(_) => false,
            SystemKind::Quantum(_) => true,
            SystemKind::Composite(l, r) => l.is_fully_quantum() && r.is_fully_quantum(),
        }
    }

    pub fn factors(&self) -> Option<(&System, &System)> {
        match &self.0.kind {
            SystemKind::Composite(l, r) => Some((l, r)),
            _ => None,
        }
    }

    /// Orthonormal Hermitian operator basis, in the documented order.
    pub fn operator_basis(&self) -> Arc<Vec<CMat>> {
        self.0
            .basis
            .get_or_init(|| Arc::new(self.compute_basis()))
            .clone()
    }

    fn compute_basis(&self) -> Vec<CMat> {
        match &self.0.kind {
            SystemKind::Classical(n) => (0..*n)
                .map(|i| {
                    let mut m = CMat::zeros(*n, *n);
                    m[(i, i)] = ONE;
                    m
                })
                .collect(),
            SystemKind::Quantum(d) => hermitian_basis(*d),
            SystemKind::Composite(l, r) => {
                let lb = l.operator_basis();
                let rb = r.operator_basis();
                let mut out = Vec::with_capacity(lb.len() * rb.len());
                for a in lb.iter() {
                    for b in rb.iter() {
                        out.push(a.kronecker(b));
                    }
                }
                out
            }
        }
    }

    /// h²×dim matrix whose column a is the row-major vectorisation of B_a.
    pub fn vectorizer(&self) -> Arc<CMat> {
        self.0
            .vectorizer
            .get_or_init(|| {
                let basis = self.operator_basis();
                let h = self.hilbert_dim();
                let mut v = CMat::zeros(h * h, basis.len());
                for (a, b) in basis.iter().enumerate() {
                    for i in 0..h {
                        for j in 0..h {
                            v[(i * h + j, a)] = b[(i, j)];
                        }
                    }
                }
                Arc::new(v)
            })
            .clone()
    }

    /// Σ_a coeffs_a B_a.
    pub fn to_operator(&self, coeffs: &RVec) -> CMat {
        let h = self.hilbert_dim();
        let vec = self.vectorizer().as_ref() * coeffs.map(|x| c(x, 0.0));
        CMat::from_row_slice(h, h, vec.as_slice())
    }

    /// Coefficients Re Tr(B_a op). For systems with classical factors this is
    /// the pinching onto the embedded subspace.
    pub fn from_operator(&self, op: &CMat) -> RVec {
        let h = self.hilbert_dim();
        assert_eq!(op.nrows(), h, "operator dimension does not match system");
        let flat = CVec::from_iterator(h * h, (0..h).flat_map(|i| (0..h).map(move |j| op[(i, j)])));
        let coeffs = self.vectorizer().adjoint() * flat;
        coeffs.map(|z| z.re)
    }

    /// Coefficients of the deterministic effect: u_a = Tr(B_a).
    pub fn unit_coeffs(&self) -> RVec {
        match &self.0.kind {
            SystemKind::Classical(n) => RVec::from_element(*n, 1.0),
            SystemKind::Quantum(d) => {
                let mut u = RVec::zeros(d * d);
                u[0] = (*d as f64).sqrt();
                u
            }
            SystemKind::Composite(l, r) => l.unit_coeffs().kronecker(&r.unit_coeffs()),
        }
    }

    /// Coefficients of I/h computed from the operator directly (not as a
    /// product), so composition axioms can compare against it.
    pub fn maximally_mixed_coeffs(&self) -> RVec {
        let h = self.hilbert_dim();
        let op = CMat::identity(h, h).map(|z| z / c(h as f64, 0.0));
        self.from_operator(&op)
    }

    /// State cone: the embedded operator is positive semidefinite.
    pub fn in_state_cone(&self, coeffs: &RVec, tol: f64) -> bool {
        match &self.0.kind {
            SystemKind::Classical(_) => coeffs.iter().all(|&x| x >= -tol),
            _ => linalg::min_eigenvalue(&self.to_operator(coeffs)) >= -tol,
        }
    }

    /// Effect cone: 0 ≤ E ≤ I for the embedded operator.
    pub fn in_effect_cone(&self, coeffs: &RVec, tol: f64) -> bool {
        match &self.0.kind {
            SystemKind::Classical(_) => coeffs.iter().all(|&x| x >= -tol && x <= 1.0 + tol),
            _ => {
                let (vals, _) = linalg::hermitian_eigen(&self.to_operator(coeffs));
                vals.first().is_none_or(|&v| v >= -tol) && vals.last().is_none_or(|&v| v <= 1.0 + tol)
            }
        }
    }

    /// Random normalized state in the cone: a Haar pure state on the
    /// embedding space, pinched onto the system.
    pub fn sample_state<R: Rng + ?Sized>(&self, rng: &mut R) -> RVec {
        let psi = linalg::haar_state(self.hilbert_dim(), rng);
        self.from_operator(&linalg::outer(&psi))
    }

    /// Coefficients of a pure state |ψ⟩⟨ψ| (ψ normalized by the caller).
    pub fn ket_coeffs(&self, psi: &CVec) -> RVec {
        self.from_operator(&linalg::outer(psi))
    }
}

impl PartialEq for System {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.kind == other.0.kind
    }
}

impl Eq for System {}

impl std::hash::Hash for System {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.0.kind.hash(state)
    }
}

impl fmt::Debug for System {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "System({}, dim={})", self.label(), self.dim())
    }
}

impl fmt::Display for System {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

fn hermitian_basis(d: usize) -> Vec<CMat> {
    let mut out = Vec::with_capacity(d * d);
    let s = (d as f64).sqrt();
    out.push(CMat::identity(d, d).map(|z| z / c(s, 0.0)));
    let r = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..d {
        for j in (i + 1)..d {
            let mut sym = CMat::zeros(d, d);
            sym[(i, j)] = c(r, 0.0);
            sym[(j, i)] = c(r, 0.0);
            out.push(sym);
            let mut anti = CMat::zeros(d, d);
            anti[(i, j)] = c(0.0, -r);
            anti[(j, i)] = c(0.0, r);
            out.push(anti);
        }
    }
    for l in 1..d {
        let norm = ((l * (l + 1)) as f64).sqrt();
        let mut m = CMat::zeros(d, d);
        for k in 0..l {
            m[(k, k)] = c(1.0 / norm, 0.0);
        }
        m[(l, l)] = c(-(l as f64) / norm, 0.0);
        out.push(m);
    }
    out
}
