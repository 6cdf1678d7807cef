//! Controlled transformations, phase transformations, phase kick-back and
//! oracle systems.
//!
//! An oracle system assigns to every function f: X → {0,1} a phase
//! transformation O_f on a control system whose slits are labelled by X. The
//! locality condition asks that O_f and O_g agree on every coherence sector
//! ω_I on which f and g agree.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::gpt::{EffectVec, Parallel, StateVec, System, TransformMat};
use crate::interference::{subsets_up_to, ProjectorFamily, SlitSet, SlitStructure};
use crate::linalg::{self, CMat, RMat};
use crate::Config;

/// Number of sampled target states used to check the control equation.
const CONTROL_SAMPLES: usize = 4;

/// Up to this many control slits the locality check covers every subset.
const EXHAUSTIVE_LOCALITY_SLITS: usize = 8;

/// A branch of a controlled transformation. Quantum controls need the
/// unitary itself, since conjugation maps forget the global phase that
/// becomes a relative phase once the branch is controlled.
#[derive(Clone, Debug)]
pub enum Branch {
    Unitary(CMat),
    Map(TransformMat),
}

/// C{T_i}: applies T_i to the target when the control is in slit state i.
#[derive(Clone, Debug)]
pub struct ControlledTransform {
    control: SlitStructure,
    target: System,
    branches: Vec<TransformMat>,
    matrix: TransformMat,
}

impl ControlledTransform {
    pub fn control(&self) -> &SlitStructure {
        &self.control
    }

    pub fn target(&self) -> &System {
        &self.target
    }

    pub fn branches(&self) -> &[TransformMat] {
        &self.branches
    }

    pub fn matrix(&self) -> &TransformMat {
        &self.matrix
    }
}

pub fn build_controlled(control: &SlitStructure, target: &System, branches: Vec<Branch>, cfg: &Config) -> Result<ControlledTransform> {
    let n = control.len();
    if branches.len() != n {
        return Err(Error::Dimension(format!("{} branches for {n} control slits", branches.len())));
    }
    let csys = control.system();
    let joint = System::composite(csys, target);
    let ht = target.hilbert_dim();

    let mut maps = Vec::with_capacity(n);
    let matrix = if csys.is_classical() {
        let mut m = RMat::zeros(joint.dim(), joint.dim());
        let mut covered = vec![false; csys.dim()];
        for (i, b) in branches.iter().enumerate() {
            let t = branch_map(b, target)?;
            let v = vertex_of(&control.states()[i]);
            covered[v] = true;
            add_block(&mut m, csys.dim(), v, t.matrix());
            maps.push(t);
        }
        let id = RMat::identity(target.dim(), target.dim());
        for v in (0..csys.dim()).filter(|&v| !covered[v]) {
            add_block(&mut m, csys.dim(), v, &id);
        }
        TransformMat::new(&joint, &joint, m)?.with_reversible(true)
    } else {
        if !joint.is_fully_quantum() {
            return Err(Error::WrongTheory {
                op: "build_controlled",
                expected: "quantum",
                found: joint.label().to_string(),
            });
        }
        let hc = csys.hilbert_dim();
        let mut u = CMat::zeros(hc * ht, hc * ht);
        let mut rest = CMat::identity(hc, hc);
        for (i, b) in branches.iter().enumerate() {
            let Branch::Unitary(ui) = b else {
                return Err(Error::InvalidTransform(
                    "a quantum control needs unitary branches, not conjugation maps".into(),
                ));
            };
            if ui.nrows() != ht || !linalg::is_unitary(ui, 1e-9) {
                return Err(Error::InvalidTransform(format!("branch {i} is not a unitary on {}", target.label())));
            }
            let proj = linalg::outer(&control.kets()[i]);
            rest -= &proj;
            u += linalg::kron_c(&proj, ui);
            maps.push(TransformMat::from_unitary(target, ui)?);
        }
        u += linalg::kron_c(&rest, &CMat::identity(ht, ht));
        TransformMat::from_unitary(&joint, &u)?
    };

    let ct = ControlledTransform {
        control: control.clone(),
        target: target.clone(),
        branches: maps,
        matrix,
    };
    verify_control_equation(&ct, cfg)?;
    Ok(ct)
}

fn branch_map(b: &Branch, target: &System) -> Result<TransformMat> {
    let t = match b {
        Branch::Map(t) => t.clone(),
        Branch::Unitary(u) => TransformMat::from_unitary(target, u)?,
    };
    if t.input() != target || t.output() != target {
        return Err(Error::SystemMismatch {
            expected: target.label().to_string(),
            found: t.input().label().to_string(),
        });
    }
    if !t.is_reversible() {
        return Err(Error::InvalidTransform("branches must be reversible".into()));
    }
    Ok(t)
}

fn vertex_of(s: &StateVec) -> usize {
    s.coeffs()
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0)
}

/// Adds |v)(v| ⊗ block to a matrix on classical(n) ⊗ target.
fn add_block(m: &mut RMat, _n: usize, v: usize, block: &RMat) {
    let dt = block.nrows();
    let mut view = m.view_mut((v * dt, v * dt), (dt, dt));
    view += block;
}

/// Checks C(|i) ⊗ |σ)) = |i) ⊗ T_i|σ) on sampled σ.
fn verify_control_equation(ct: &ControlledTransform, cfg: &Config) -> Result<()> {
    let mut rng = linalg::rng_for(cfg.seed, 0xc0);
    let tol = cfg.tol.max(1e-10);
    for _ in 0..CONTROL_SAMPLES {
        let sigma = StateVec::new(&ct.target, ct.target.sample_state(&mut rng))?;
        for (i, slit) in ct.control.states().iter().enumerate() {
            let got = ct.matrix.apply(&slit.parallel(&sigma))?;
            let want = slit.parallel(&ct.branches[i].apply(&sigma)?);
            let gap = got.distance(&want)?;
            if gap > tol {
                return Err(Error::InvalidTransform(format!("control equation fails on slit {i} by {gap:e}")));
            }
        }
    }
    Ok(())
}

/// A reversible Q with (i|∘Q = (i| for every distinguishing effect.
#[derive(Clone, Debug)]
pub struct PhaseTransform {
    slits: SlitStructure,
    matrix: TransformMat,
}

impl PhaseTransform {
    pub fn new(slits: &SlitStructure, matrix: TransformMat, tol: f64) -> Result<Self> {
        if matrix.input() != slits.system() || matrix.output() != slits.system() {
            return Err(Error::SystemMismatch {
                expected: slits.system().label().to_string(),
                found: matrix.input().label().to_string(),
            });
        }
        if !matrix.is_reversible() {
            return Err(Error::InvalidTransform("phase transformations are reversible".into()));
        }
        for (i, e) in slits.distinguishing().effects().iter().enumerate() {
            let pulled = matrix.pull_back(e)?;
            let gap = linalg::sup_norm_vec(&(pulled.coeffs() - e.coeffs()));
            if gap > tol {
                return Err(Error::InvalidTransform(format!("(e_{i}|Q differs from (e_{i}| by {gap:e}")));
            }
        }
        Ok(PhaseTransform {
            slits: slits.clone(),
            matrix,
        })
    }

    pub fn slits(&self) -> &SlitStructure {
        &self.slits
    }

    pub fn matrix(&self) -> &TransformMat {
        &self.matrix
    }
}

/// Phase kick-back: with `s` fixed by every branch, C{T_i} acting on σ ⊗ s
/// factorises as Qσ ⊗ s. Returns Q.
pub fn kick_back(ct: &ControlledTransform, s: &StateVec, cfg: &Config) -> Result<PhaseTransform> {
    let tol = cfg.tol.max(1e-10);
    if s.system() != &ct.target {
        return Err(Error::SystemMismatch {
            expected: ct.target.label().to_string(),
            found: s.system().label().to_string(),
        });
    }
    for (i, t) in ct.branches.iter().enumerate() {
        let gap = t.apply(s)?.distance(s)?;
        if gap > tol {
            return Err(Error::KickBack(format!("target state is moved by branch {i} ({gap:e})")));
        }
    }
    let csys = ct.control.system();
    let dc = csys.dim();
    let embed = linalg::kron_r(&RMat::identity(dc, dc), &RMat::from_column_slice(s.coeffs().len(), 1, s.coeffs().as_slice()));
    let unit = ct.target.unit_coeffs();
    let trace = linalg::kron_r(&RMat::identity(dc, dc), &RMat::from_row_slice(1, unit.len(), unit.as_slice()));
    let q = &trace * ct.matrix.matrix() * &embed;
    let q = TransformMat::new(csys, csys, q)?.with_reversible(true);

    let mut rng = linalg::rng_for(cfg.seed, 0x6b);
    let basis = (0..csys.hilbert_dim()).map(|i| StateVec::basis(csys, i));
    let samples = (0..CONTROL_SAMPLES).map(|_| StateVec::new(csys, csys.sample_state(&mut rng)));
    for sigma in basis.chain(samples) {
        let sigma = sigma?;
        let joint = ct.matrix.apply(&sigma.parallel(s))?;
        let product = q.apply(&sigma)?.parallel(s);
        let gap = joint.distance(&product)?;
        if gap > tol {
            return Err(Error::KickBack(format!("output does not factorise ({gap:e})")));
        }
    }
    q.validate(cfg).map_err(|e| Error::KickBack(format!("kicked-back map is not reversible: {e}")))?;
    PhaseTransform::new(&ct.control, q, tol)
}

/// How oracle transformations are produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Realization {
    /// ρ ↦ D_f ρ D_f with D_f = diag((−1)^{f(x)}).
    Phase,
    /// Kick-back of C{X^{f(x)}} with the target in |−⟩.
    Controlled,
}

/// A named Boolean function on the domain.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleFunction {
    pub id: String,
    pub values: Vec<u8>,
}

/// Serialised form of an oracle family.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OracleFamilySpec {
    pub domain: Vec<Value>,
    pub functions: Vec<OracleFunction>,
    pub realization: Realization,
}

/// The family {O_f} over a function class, with an optional null query.
#[derive(Clone, Debug)]
pub struct OracleSystem {
    domain: Vec<Value>,
    functions: Vec<OracleFunction>,
    realization: Realization,
    null_query: bool,
    capacity: usize,
    family: ProjectorFamily,
    oracles: Vec<PhaseTransform>,
}

/// Label used for the null-query input.
pub const NULL_SYMBOL: &str = "•";

fn validate_functions(domain_len: usize, functions: &[OracleFunction]) -> Result<()> {
    let mut ids = std::collections::BTreeSet::new();
    for f in functions {
        if f.values.len() != domain_len {
            return Err(Error::Oracle(format!(
                "function {} has {} values for a domain of {domain_len}",
                f.id,
                f.values.len()
            )));
        }
        if let Some(v) = f.values.iter().find(|&&v| v > 1) {
            return Err(Error::Oracle(format!("function {} takes the non-binary value {v}", f.id)));
        }
        if !ids.insert(f.id.as_str()) {
            return Err(Error::Oracle(format!("duplicate function id {}", f.id)));
        }
    }
    Ok(())
}

/// Builds the canonical phase oracles on a quantum control of the given
/// capacity (|X| when `None`).
pub fn build_phase_oracle_family(
    domain: Vec<Value>,
    functions: Vec<OracleFunction>,
    capacity: Option<usize>,
    cfg: &Config,
) -> Result<OracleSystem> {
    build_oracle_family(domain, functions, Realization::Phase, capacity, false, cfg)
}

pub fn build_oracle_family(
    domain: Vec<Value>,
    functions: Vec<OracleFunction>,
    realization: Realization,
    capacity: Option<usize>,
    null_query: bool,
    cfg: &Config,
) -> Result<OracleSystem> {
    build_with_phases(domain, functions, realization, capacity, null_query, cfg, |f, x| f.values[x] == 1)
}

/// Like [`build_oracle_family`], with the sign at input x decided by
/// `flips(f, x)`. Lets callers realise non-local families for testing the
/// locality checker.
pub fn build_with_phases<F>(
    domain: Vec<Value>,
    functions: Vec<OracleFunction>,
    realization: Realization,
    capacity: Option<usize>,
    null_query: bool,
    cfg: &Config,
    flips: F,
) -> Result<OracleSystem>
where
    F: Fn(&OracleFunction, usize) -> bool,
{
    let nx = domain.len();
    if nx == 0 {
        return Err(Error::Oracle("empty domain".into()));
    }
    validate_functions(nx, &functions)?;
    let slits_needed = nx + usize::from(null_query);
    let capacity = capacity.unwrap_or(slits_needed);
    if slits_needed > capacity {
        return Err(Error::CapExceeded {
            what: "control slits",
            value: slits_needed,
            cap: capacity,
        });
    }
    let control = System::quantum(capacity);
    let slits = SlitStructure::computational(&control, slits_needed, cfg)?;
    let family = ProjectorFamily::new(&slits);

    let oracles = functions
        .iter()
        .map(|f| {
            let signs: Vec<bool> = (0..capacity).map(|x| x < nx && flips(f, x)).collect();
            let q = match realization {
                Realization::Phase => {
                    let phases: Vec<f64> = signs.iter().map(|&s| if s { std::f64::consts::PI } else { 0.0 }).collect();
                    TransformMat::from_unitary(&control, &crate::gpt::diagonal_unitary(&phases))?
                }
                Realization::Controlled => {
                    let target = System::quantum(2);
                    let x = linalg::pauli_x();
                    let id = CMat::identity(2, 2);
                    let branches = (0..slits_needed)
                        .map(|i| Branch::Unitary(if signs[i] { x.clone() } else { id.clone() }))
                        .collect();
                    let ct = build_controlled(&slits, &target, branches, cfg)?;
                    let minus = StateVec::from_ket(&target, &(linalg::hadamard().column(1).into_owned()))?;
                    // levels outside the slits are untouched by C, so Q is the full phase map
                    kick_back(&ct, &minus, cfg)?.matrix().clone()
                }
            };
            PhaseTransform::new(&slits, q, cfg.tol.max(1e-10))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut domain = domain;
    if null_query {
        domain.push(Value::String(NULL_SYMBOL.into()));
    }
    Ok(OracleSystem {
        domain,
        functions,
        realization,
        null_query,
        capacity,
        family,
        oracles,
    })
}

/// Extends the domain with the null input •, on which every O_f acts as
/// the identity.
pub fn add_null_query(os: &OracleSystem, cfg: &Config) -> Result<OracleSystem> {
    if os.null_query {
        return Ok(os.clone());
    }
    let nx = os.domain.len();
    if os.capacity < nx + 1 {
        return Err(Error::CapExceeded {
            what: "control slits",
            value: nx + 1,
            cap: os.capacity,
        });
    }
    build_oracle_family(os.domain.clone(), os.functions.clone(), os.realization, Some(os.capacity), true, cfg)
}

/// A failure of the locality condition.
#[derive(Clone, Debug, Serialize)]
pub struct LocalityViolation {
    pub f: String,
    pub g: String,
    pub subset: Vec<usize>,
    pub norm: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LocalityReport {
    pub subsets_checked: usize,
    pub pairs_checked: usize,
    /// Whether every subset of the control slits was examined.
    pub exhaustive: bool,
    pub violations: Vec<LocalityViolation>,
}

impl LocalityReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

impl OracleSystem {
    pub fn domain(&self) -> &[Value] {
        &self.domain
    }

    /// Number of real inputs, excluding •.
    pub fn input_count(&self) -> usize {
        self.domain.len() - usize::from(self.null_query)
    }

    pub fn functions(&self) -> &[OracleFunction] {
        &self.functions
    }

    pub fn realization(&self) -> Realization {
        self.realization
    }

    pub fn has_null_query(&self) -> bool {
        self.null_query
    }

    /// Control slit index of •, when present.
    pub fn null_index(&self) -> Option<usize> {
        self.null_query.then(|| self.input_count())
    }

    pub fn control(&self) -> &System {
        self.family.slits().system()
    }

    pub fn slits(&self) -> &SlitStructure {
        self.family.slits()
    }

    pub fn projectors(&self) -> &ProjectorFamily {
        &self.family
    }

    pub fn oracle(&self, f: usize) -> &PhaseTransform {
        &self.oracles[f]
    }

    pub fn oracles(&self) -> &[PhaseTransform] {
        &self.oracles
    }

    pub fn to_spec(&self) -> OracleFamilySpec {
        let nx = self.input_count();
        OracleFamilySpec {
            domain: self.domain[..nx].to_vec(),
            functions: self.functions.clone(),
            realization: self.realization,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_spec())?)
    }

    pub fn from_json(text: &str, capacity: Option<usize>, cfg: &Config) -> Result<Self> {
        let spec: OracleFamilySpec = serde_json::from_str(text)?;
        build_oracle_family(spec.domain, spec.functions, spec.realization, capacity, false, cfg)
    }

    /// Whether f and g agree on every input in `set` (• always agrees).
    fn agree_on(&self, f: usize, g: usize, set: SlitSet) -> bool {
        let nx = self.input_count();
        set.indices()
            .filter(|&x| x < nx)
            .all(|x| self.functions[f].values[x] == self.functions[g].values[x])
    }

    fn locality_subsets(&self) -> (Vec<SlitSet>, bool) {
        let n = self.slits().len();
        if n <= EXHAUSTIVE_LOCALITY_SLITS {
            return (subsets_up_to(n, n), true);
        }
        // larger controls: stop at the order where ω_I vanishes
        let order = (1..=n)
            .find(|&k| self.family.coherence_identity_residual(k).is_ok_and(|r| r < 1e-9))
            .unwrap_or(n);
        (subsets_up_to(n, order), order == n)
    }

    /// ‖(O_f − O_g)ω_I‖∞ < tol for all f, g, I with f|_I = g|_I.
    pub fn verify_locality(&self, tol: f64) -> Result<LocalityReport> {
        let (subsets, exhaustive) = self.locality_subsets();
        let nf = self.functions.len();
        let per_subset: Vec<(usize, Vec<LocalityViolation>)> = subsets
            .par_iter()
            .map(|&set| {
                let omega = self.family.coherence_projector(set).expect("subset of the slits");
                let products: Vec<RMat> = self.oracles.iter().map(|o| o.matrix().matrix() * omega.matrix()).collect();
                let mut pairs = 0;
                let mut found = Vec::new();
                for f in 0..nf {
                    for g in (f + 1)..nf {
                        if !self.agree_on(f, g, set) {
                            continue;
                        }
                        pairs += 1;
                        let norm = linalg::sup_norm(&(&products[f] - &products[g]));
                        if norm >= tol {
                            found.push(LocalityViolation {
                                f: self.functions[f].id.clone(),
                                g: self.functions[g].id.clone(),
                                subset: set.indices().collect(),
                                norm,
                            });
                        }
                    }
                }
                (pairs, found)
            })
            .collect();
        let mut report = LocalityReport {
            subsets_checked: subsets.len(),
            pairs_checked: 0,
            exhaustive,
            violations: Vec::new(),
        };
        for (pairs, found) in per_subset {
            report.pairs_checked += pairs;
            report.violations.extend(found);
        }
        Ok(report)
    }

    /// The face form of locality: O_f|s) = O_g|s) for sampled states with
    /// P_I|s) = |s), whenever f|_I = g|_I.
    pub fn verify_locality_on_faces(&self, tol: f64, samples: usize, seed: u64) -> Result<bool> {
        let (subsets, _) = self.locality_subsets();
        let control = self.control().clone();
        let nf = self.functions.len();
        for (k, &set) in subsets.iter().enumerate() {
            let mut rng = linalg::rng_for(seed, k as u64);
            for _ in 0..samples {
                let raw = StateVec::new(&control, control.sample_state(&mut rng))?;
                let s = self.family.project_state(set, &raw)?;
                let images: Vec<StateVec> = self.oracles.iter().map(|o| o.matrix().apply(&s)).collect::<Result<_>>()?;
                for f in 0..nf {
                    for g in (f + 1)..nf {
                        if self.agree_on(f, g, set) && images[f].distance(&images[g])? >= tol {
                            return Ok(false);
                        }
                    }
                }
            }
        }
        Ok(true)
    }
}

/// Every Boolean function on `n` inputs, ids given by the value string.
pub fn all_functions(n: usize) -> Vec<OracleFunction> {
    (0..(1u64 << n))
        .map(|bits| {
            let values: Vec<u8> = (0..n).map(|x| ((bits >> x) & 1) as u8).collect();
            OracleFunction {
                id: values.iter().map(|v| v.to_string()).collect(),
                values,
            }
        })
        .collect()
}

/// Domain labels 0..n as JSON numbers.
pub fn numeric_domain(n: usize) -> Vec<Value> {
    (0..n).map(|x| Value::from(x as u64)).collect()
}

/// The |±⟩ measurement on a pair of control levels, completed by the
/// projector onto the remaining levels.
pub fn pair_measurement(control: &System, a: usize, b: usize, tol: f64) -> Result<Vec<EffectVec>> {
    let h = control.hilbert_dim();
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut plus = linalg::basis_ket(h, a) * linalg::c(r, 0.0);
    plus += linalg::basis_ket(h, b) * linalg::c(r, 0.0);
    let mut minus = linalg::basis_ket(h, a) * linalg::c(r, 0.0);
    minus -= linalg::basis_ket(h, b) * linalg::c(r, 0.0);
    let ep = EffectVec::from_ket(control, &plus)?;
    let em = EffectVec::from_ket(control, &minus)?;
    let rest = EffectVec::new(control, control.unit_coeffs() - ep.coeffs() - em.coeffs())?;
    if !rest.in_cone(tol) {
        return Err(Error::InvalidState("pair measurement is not valid".into()));
    }
    Ok(vec![ep, em, rest])
}
