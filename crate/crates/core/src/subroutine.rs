//! Compiling a bounded-error decision algorithm into an oracle-like
//! reversible circuit, at toy scale in the quantum back-end.
//!
//! An algorithm is kept in dilated form: for each input x a unitary W_x acts
//! on a register (work wires followed by the answer wire) prepared in a fixed
//! basis state, so the full dilation is U = Σ_x |x⟩⟨x| ⊗ W_x. The oracle
//! candidate is G = (U⁻¹ ⊗ id)·C·(U ⊗ id), where C flips an external wire
//! whenever the internal answer wire reads 1.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gpt::{System, TransformMat};
use crate::linalg::{self, c, CMat, CVec, ONE, ZERO};
use crate::theories::{check_faithful, faithful_state};
use crate::Config;

pub const MAX_INPUTS: usize = 8;
/// Largest register dimension an algorithm (or its amplification) may have.
pub const MAX_REGISTER: usize = 1024;
/// Largest Hilbert dimension for which G is compiled to a coefficient matrix.
pub const MAX_TRANSFORM_HILBERT: usize = 32;
const MAX_REPETITIONS: usize = 401;

#[derive(Clone, Debug)]
pub struct ToyAlgorithm {
    branches: Vec<CMat>,
    initial: usize,
    answer: Vec<u8>,
    decision: Vec<u8>,
}

impl ToyAlgorithm {
    /// `branches[x]` is W_x; `answer[i]` is the answer-wire value of register
    /// basis state i; `decision[x]` is the correct answer on x.
    pub fn new(branches: Vec<CMat>, initial: usize, answer: Vec<u8>, decision: Vec<u8>, tol: f64) -> Result<Self> {
        if branches.is_empty() || branches.len() > MAX_INPUTS {
            return Err(Error::CapExceeded {
                what: "toy inputs",
                value: branches.len(),
                cap: MAX_INPUTS,
            });
        }
        if decision.len() != branches.len() {
            return Err(Error::Register(format!("{} decisions for {} inputs", decision.len(), branches.len())));
        }
        let m = answer.len();
        if m > MAX_REGISTER {
            return Err(Error::CapExceeded {
                what: "register dimension",
                value: m,
                cap: MAX_REGISTER,
            });
        }
        if initial >= m {
            return Err(Error::Register(format!("initial index {initial} outside a register of {m}")));
        }
        if answer.iter().chain(&decision).any(|&b| b > 1) {
            return Err(Error::Register("answers and decisions must be bits".into()));
        }
        for (x, w) in branches.iter().enumerate() {
            if w.nrows() != m || !linalg::is_unitary(w, tol.max(1e-10)) {
                return Err(Error::InvalidTransform(format!("W_{x} is not a {m}x{m} unitary")));
            }
        }
        Ok(ToyAlgorithm {
            branches,
            initial,
            answer,
            decision,
        })
    }

    /// One answer qubit and no work wires: W_x rotates |0⟩ onto
    /// √p_x |d(x)⟩ + √(1−p_x) |1−d(x)⟩.
    pub fn bounded_error(decision: &[u8], p: &[f64]) -> Result<Self> {
        Self::with_work(decision, p, 0, 0)
    }

    /// The algorithm that always answers correctly.
    pub fn exact(decision: &[u8]) -> Result<Self> {
        Self::bounded_error(decision, &vec![1.0; decision.len()])
    }

    /// Like [`bounded_error`](Self::bounded_error) but with `work` extra
    /// qubits left in seeded random garbage states that differ between the
    /// correct and incorrect branches.
    pub fn with_work(decision: &[u8], p: &[f64], work: usize, seed: u64) -> Result<Self> {
        if p.len() != decision.len() {
            return Err(Error::Register(format!("{} probabilities for {} inputs", p.len(), decision.len())));
        }
        if let Some(bad) = p.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Register(format!("acceptance probability {bad} outside [0, 1]")));
        }
        let wd = 1usize << work;
        let m = 2 * wd;
        let mut rng = linalg::rng_for(seed, 0);
        let mut branches = Vec::with_capacity(decision.len());
        for (&d, &px) in decision.iter().zip(p) {
            let (good, bad) = if work == 0 {
                (CVec::from_element(1, ONE), CVec::from_element(1, ONE))
            } else {
                (linalg::haar_state(wd, &mut rng), linalg::haar_state(wd, &mut rng))
            };
            let mut col = CVec::zeros(m);
            for w in 0..wd {
                col[2 * w + d as usize] = good[w] * c(px.sqrt(), 0.0);
                col[2 * w + 1 - d as usize] = bad[w] * c((1.0 - px).sqrt(), 0.0);
            }
            let w = linalg::complete_unitary(&[col], m, 1e-12)
                .ok_or_else(|| Error::InvalidTransform("could not complete the first column".into()))?;
            branches.push(w);
        }
        let answer = (0..m).map(|i| (i & 1) as u8).collect();
        Self::new(branches, 0, answer, decision.to_vec(), 1e-10)
    }

    pub fn inputs(&self) -> usize {
        self.branches.len()
    }

    pub fn register_dim(&self) -> usize {
        self.answer.len()
    }

    pub fn decision(&self) -> &[u8] {
        &self.decision
    }

    pub fn answer_bits(&self) -> &[u8] {
        &self.answer
    }

    pub fn branch(&self, x: usize) -> &CMat {
        &self.branches[x]
    }

    /// W_x applied to the initial register state.
    pub fn output_ket(&self, x: usize) -> CVec {
        self.branches[x].column(self.initial).into_owned()
    }

    /// Probability that the answer wire reads d(x) after running on x.
    pub fn p_acc(&self, x: usize) -> f64 {
        let out = self.output_ket(x);
        let d = self.decision[x];
        out.iter().zip(&self.answer).filter(|(_, &a)| a == d).map(|(z, _)| z.norm_sqr()).sum()
    }

    /// The dilation U on input ⊗ register.
    pub fn unitary(&self) -> CMat {
        let m = self.register_dim();
        let n = self.inputs();
        let mut u = CMat::zeros(n * m, n * m);
        for (x, w) in self.branches.iter().enumerate() {
            u.view_mut((x * m, x * m), (m, m)).copy_from(w);
        }
        u
    }

    pub fn system(&self) -> System {
        System::quantum(self.inputs() * self.register_dim())
    }

    /// U as a reversible coefficient-space transformation.
    pub fn dilation_transform(&self) -> Result<TransformMat> {
        let h = self.inputs() * self.register_dim();
        cap_transform(h)?;
        TransformMat::from_unitary(&self.system(), &self.unitary())
    }

    /// Index of |x⟩ ⊗ |initial⟩ in the input ⊗ register basis.
    pub fn start_index(&self, x: usize) -> usize {
        x * self.register_dim() + self.initial
    }
}

fn cap_transform(h: usize) -> Result<()> {
    if h > MAX_TRANSFORM_HILBERT {
        return Err(Error::CapExceeded {
            what: "Hilbert dimension for coefficient matrices",
            value: h,
            cap: MAX_TRANSFORM_HILBERT,
        });
    }
    Ok(())
}

/// Probability that a majority of r independent runs is correct.
pub fn majority_probability(p: f64, r: usize) -> f64 {
    ((r / 2 + 1)..=r)
        .map(|i| linalg::binomial_f64(r as u64, i as u64) * p.powi(i as i32) * (1.0 - p).powi((r - i) as i32))
        .sum()
}

/// Smallest odd r whose majority vote reaches `target`.
pub fn repetitions_for(p: f64, target: f64) -> Result<usize> {
    (1..=MAX_REPETITIONS)
        .step_by(2)
        .find(|&r| majority_probability(p, r) >= target)
        .ok_or_else(|| Error::Amplify(format!("p = {p} does not reach {target} within {MAX_REPETITIONS} repetitions")))
}

/// Occupation-number basis of the symmetric subspace of r copies of C^m.
fn occupations(m: usize, r: usize) -> Vec<Vec<u16>> {
    fn rec(slot: usize, left: usize, cur: &mut Vec<u16>, out: &mut Vec<Vec<u16>>) {
        if slot + 1 == cur.len() {
            cur[slot] = left as u16;
            out.push(cur.clone());
            return;
        }
        for k in (0..=left).rev() {
            cur[slot] = k as u16;
            rec(slot + 1, left - k, cur, out);
        }
    }
    let mut out = Vec::new();
    rec(0, r, &mut vec![0; m], &mut out);
    out
}

fn sqrt_factorial_product(n: &[u16]) -> f64 {
    n.iter().map(|&k| (1..=k as u64).map(|v| v as f64).product::<f64>().sqrt()).product()
}

/// W^{⊗r} restricted to the symmetric subspace, in the normalised
/// occupation basis. Uses the correspondence |n⟩ ↔ z^n / √(n!) under which
/// W^{⊗r} substitutes z_j ↦ Σ_i W_ij z_i.
fn symmetric_power(w: &CMat, basis: &[Vec<u16>], index: &HashMap<Vec<u16>, usize>) -> CMat {
    let m = w.nrows();
    let dim = basis.len();
    let mut out = CMat::zeros(dim, dim);
    for (col, n_in) in basis.iter().enumerate() {
        let mut poly: HashMap<Vec<u16>, linalg::C64> = HashMap::from([(vec![0u16; m], ONE)]);
        for (j, &times) in n_in.iter().enumerate() {
            for _ in 0..times {
                let mut next: HashMap<Vec<u16>, linalg::C64> = HashMap::with_capacity(poly.len() * m);
                for (mono, coef) in &poly {
                    for i in 0..m {
                        let wij = w[(i, j)];
                        if wij == ZERO {
                            continue;
                        }
                        let mut key = mono.clone();
                        key[i] += 1;
                        *next.entry(key).or_insert(ZERO) += coef * wij;
                    }
                }
                poly = next;
            }
        }
        let denom = sqrt_factorial_product(n_in);
        for (mono, coef) in poly {
            let row = index[&mono];
            out[(row, col)] = coef * c(sqrt_factorial_product(&mono) / denom, 0.0);
        }
    }
    out
}

/// Runs r copies of the algorithm in parallel and writes their majority
/// answer onto a fresh answer qubit.
///
/// The copies start in a product of identical states and every W_x^{⊗r} is
/// permutation symmetric, so the register is kept in the symmetric subspace
/// (occupation numbers) instead of the full r-fold tensor power. The new
/// register is that subspace followed by the majority qubit.
pub fn amplify(alg: &ToyAlgorithm, r: usize) -> Result<ToyAlgorithm> {
    if r.is_multiple_of(2) {
        return Err(Error::Amplify(format!("majority vote needs an odd repetition count, got {r}")));
    }
    if r == 1 {
        return Ok(alg.clone());
    }
    let m = alg.register_dim();
    let sym_dim = linalg::binomial_f64((r + m - 1) as u64, (m - 1) as u64);
    if sym_dim * 2.0 > MAX_REGISTER as f64 {
        return Err(Error::CapExceeded {
            what: "amplified register dimension",
            value: (sym_dim * 2.0) as usize,
            cap: MAX_REGISTER,
        });
    }
    let basis = occupations(m, r);
    let index: HashMap<Vec<u16>, usize> = basis.iter().cloned().enumerate().map(|(i, n)| (n, i)).collect();
    let majority: Vec<usize> = basis
        .iter()
        .map(|n| {
            let ones: usize = n.iter().zip(alg.answer_bits()).filter(|(_, &a)| a == 1).map(|(&k, _)| k as usize).sum();
            usize::from(2 * ones > r)
        })
        .collect();

    let branches: Vec<CMat> = alg
        .branches
        .par_iter()
        .map(|w| {
            let s = symmetric_power(w, &basis, &index);
            let dim = basis.len();
            let mut out = CMat::zeros(2 * dim, 2 * dim);
            for row in 0..dim {
                for b in 0..2 {
                    // the majority gate sends (n, b) to (n, b ⊕ maj(n))
                    let target = 2 * row + (b ^ majority[row]);
                    for col in 0..dim {
                        out[(target, 2 * col + b)] = s[(row, col)];
                    }
                }
            }
            out
        })
        .collect();

    let mut start = vec![0u16; m];
    start[alg.initial] = r as u16;
    let answer = (0..2 * basis.len()).map(|i| (i & 1) as u8).collect();
    ToyAlgorithm::new(branches, 2 * index[&start], answer, alg.decision.clone(), 1e-8)
}

/// How G behaves on one input.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleBehaviour {
    pub x: usize,
    pub decision: u8,
    pub p_acc: f64,
    /// (σ|σ) for the normalised post-acceptance state σ of the remaining wires.
    pub sigma_norm: f64,
    /// P_x(acc)² (σ|σ), the value of the closed circuit by self-duality.
    pub chain: f64,
    /// (x|(0…0|(d(x)| G |x)|0…0)|0) by direct simulation.
    pub closed_circuit: f64,
    /// Worst case over external basis inputs b of the probability that G
    /// maps |x, 0…0, b) to |x, 0…0, b ⊕ d(x)).
    pub fidelity: f64,
}

#[derive(Clone, Debug)]
pub struct OracleApproximation {
    g: CMat,
    inputs: usize,
    register: usize,
    per_x: Vec<OracleBehaviour>,
}

impl OracleApproximation {
    /// G on input ⊗ register ⊗ external wire.
    pub fn g(&self) -> &CMat {
        &self.g
    }

    pub fn per_x(&self) -> &[OracleBehaviour] {
        &self.per_x
    }

    pub fn system(&self) -> System {
        System::quantum(self.g.nrows())
    }

    pub fn transform(&self) -> Result<TransformMat> {
        cap_transform(self.g.nrows())?;
        TransformMat::from_unitary(&self.system(), &self.g)
    }

    /// The oracle a perfect algorithm would give: flip the external wire
    /// iff d(x) = 1, with the register left alone.
    pub fn ideal(decision: &[u8], register: usize) -> CMat {
        let n = decision.len();
        let dim = n * register * 2;
        let mut o = CMat::zeros(dim, dim);
        for (x, &d) in decision.iter().enumerate() {
            for r in 0..register {
                for b in 0..2 {
                    let base = (x * register + r) * 2;
                    o[(base + (b ^ d as usize), base + b)] = ONE;
                }
            }
        }
        o
    }

    /// G restricted to inputs whose register starts in the initial state.
    pub fn max_deviation_from_ideal(&self, alg: &ToyAlgorithm) -> f64 {
        let ideal = Self::ideal(alg.decision(), self.register);
        let mut worst: f64 = 0.0;
        for x in 0..self.inputs {
            for b in 0..2 {
                let col = alg.start_index(x) * 2 + b;
                let diff = self.g.column(col) - ideal.column(col);
                worst = worst.max(diff.iter().map(|z| z.norm()).fold(0.0, f64::max));
            }
        }
        worst
    }
}

pub fn build_oracle_from_algorithm(alg: &ToyAlgorithm) -> Result<OracleApproximation> {
    let m = alg.register_dim();
    let n = alg.inputs();
    if alg.answer_bits().iter().filter(|&&a| a == 1).count() == 0 {
        return Err(Error::Register("the register has no basis state with answer 1".into()));
    }
    let u = alg.unitary();
    let dim = n * m * 2;
    let mut cflip = CMat::zeros(dim, dim);
    for i in 0..n * m {
        let a = alg.answer_bits()[i % m] as usize;
        for b in 0..2 {
            cflip[(2 * i + (b ^ a), 2 * i + b)] = ONE;
        }
    }
    let u_ext = linalg::kron_c(&u, &CMat::identity(2, 2));
    let g = u_ext.adjoint() * cflip * &u_ext;

    let per_x = (0..n)
        .into_par_iter()
        .map(|x| {
            let d = alg.decision()[x] as usize;
            let p_acc = alg.p_acc(x);
            let amp = |b: usize| g[(alg.start_index(x) * 2 + (b ^ d), alg.start_index(x) * 2 + b)].norm_sqr();
            let closed_circuit = amp(0);
            let fidelity = amp(0).min(amp(1));

            // Effect (d| on the answer wire leaves p_acc·σ on the remaining
            // wires; its self-inner-product is the closed-circuit value.
            let out = alg.output_ket(x);
            let kept: Vec<_> = out
                .iter()
                .zip(alg.answer_bits())
                .filter(|(_, &a)| a as usize == d)
                .map(|(z, _)| *z)
                .collect();
            let v = CVec::from_vec(kept);
            let rho = &v * v.adjoint();
            let self_inner = (&rho * &rho).trace().re;
            let sigma_norm = if p_acc > 0.0 { self_inner / (p_acc * p_acc) } else { 1.0 };
            OracleBehaviour {
                x,
                decision: d as u8,
                p_acc,
                sigma_norm,
                chain: self_inner,
                closed_circuit,
                fidelity,
            }
        })
        .collect();

    Ok(OracleApproximation {
        g,
        inputs: n,
        register: m,
        per_x,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubroutineReport {
    pub check: &'static str,
    pub q: u32,
    pub threshold: f64,
    pub per_x: Vec<OracleBehaviour>,
    pub min_fidelity: f64,
    /// Largest |closed circuit − P_x(acc)²(σ|σ)| over x.
    pub chain_error: f64,
    pub pass: bool,
}

/// Whether G behaves as an oracle for the decision problem with probability
/// at least 1 − 2^{−q} on every input.
///
/// When (σ|σ) < 1 the closed circuit carries that factor, so the bound is
/// compared against the product P_x(acc)²(σ|σ) rather than P_x(acc)² alone.
pub fn verify_subroutine_bound(alg: &ToyAlgorithm, q: u32, cfg: &Config) -> Result<SubroutineReport> {
    let oracle = build_oracle_from_algorithm(alg)?;
    let threshold = 1.0 - 0.5f64.powi(q as i32);
    let per_x = oracle.per_x().to_vec();
    let min_fidelity = per_x.iter().map(|b| b.fidelity).fold(f64::INFINITY, f64::min);
    let chain_error = per_x.iter().map(|b| (b.closed_circuit - b.chain).abs()).fold(0.0, f64::max);
    Ok(SubroutineReport {
        check: "subroutine",
        q,
        threshold,
        min_fidelity,
        chain_error,
        pass: min_fidelity >= threshold && chain_error <= cfg.tol,
        per_x,
    })
}

/// ρ ↦ (0|_a C(|a0)⊗ρ) on the external wire, where C flips the external
/// wire when the control reads 1 and the control starts in |a0).
pub fn controlled_flip_channel(a0: usize) -> Result<TransformMat> {
    let q = System::quantum(2);
    let mut cnot = CMat::zeros(4, 4);
    for a in 0..2 {
        for b in 0..2 {
            cnot[(2 * a + (a ^ b), 2 * a + b)] = ONE;
        }
    }
    let prep = linalg::outer(&linalg::basis_ket(2, a0));
    TransformMat::from_operator_map(&q, &q, |rho| {
        let joint = &cnot * linalg::kron_c(&prep, rho) * cnot.adjoint();
        // control is the major index, so (0| keeps the leading 2x2 block
        joint.view((0, 0), (2, 2)).into_owned()
    })
}

/// Tests, on a dynamically faithful state with weights `p`, that the
/// controlled flip with its control prepared in |0) and post-selected on
/// (0| acts as the identity on the external wire.
pub fn check_controlled_flip_identity(p: &[f64], cfg: &Config) -> Result<bool> {
    let q = System::quantum(2);
    let psi = faithful_state(p, &q, cfg)?;
    check_faithful(&controlled_flip_channel(0)?, &TransformMat::identity(&q), &psi, cfg.tol)
}
