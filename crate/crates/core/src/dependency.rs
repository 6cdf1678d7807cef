//! Symbolic replay of the useless-query argument for any interference
//! order k.
//!
//! After m generalised queries in a theory of order k, the final state of an
//! algorithm is a sum of terms Q_T(f|_T) whose coefficient vectors depend on
//! f only through its values on a dependency set T with |T| ≤ km. The Q_T are
//! never evaluated. What the argument needs is that the prior factorises on
//! every such T:
//!
//!   μ(f ∈ C_j ∧ f|_T = y) = μ(C_j) · μ(f|_T = y)
//!
//! which makes Σ_{f∈C_j} μ(f)|ρ_f) = μ(C_j) Σ_f μ(f)|ρ_f) and so the
//! posterior equal to the prior for every outcome. The identities are checked
//! in exact integer arithmetic.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::{AddAssign, Mul};

use num::{BigInt, BigRational, Integer, One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::interference::{subsets_up_to, SlitSet};
use crate::oracles::{build_oracle_family, OracleSystem, Realization};
use crate::query::{
    classical_useless, generalized_useless_sample, posterior, run_algorithm, LearningProblem, QueryAlgorithm,
    SampledUselessness,
};
use crate::Config;

/// Largest input set handled symbolically.
pub const MAX_INPUTS: usize = 12;

/// Opaque coefficient family Q_T, identified by a counter.
pub type Symbol = usize;

/// Dependency sets reached after some number of formal queries.
#[derive(Clone, Debug)]
pub struct FormalState {
    k: usize,
    inputs: usize,
    queries_done: usize,
    terms: BTreeMap<SlitSet, Symbol>,
    next_symbol: Symbol,
    saturated: bool,
}

impl FormalState {
    /// The state before any query: one term that depends on nothing.
    pub fn new(k: usize, inputs: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::OutOfRange("interference order k must be at least 1".into()));
        }
        if inputs > MAX_INPUTS {
            return Err(Error::CapExceeded {
                what: "inputs",
                value: inputs,
                cap: MAX_INPUTS,
            });
        }
        let mut terms = BTreeMap::new();
        terms.insert(SlitSet::EMPTY, 0);
        Ok(FormalState {
            k,
            inputs,
            queries_done: 0,
            terms,
            next_symbol: 1,
            saturated: false,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn queries_done(&self) -> usize {
        self.queries_done
    }

    /// Whether the size bound km has exceeded |X|, so sets stopped growing.
    pub fn is_saturated(&self) -> bool {
        self.saturated
    }

    pub fn terms(&self) -> &BTreeMap<SlitSet, Symbol> {
        &self.terms
    }

    pub fn dependency_sets(&self) -> impl Iterator<Item = SlitSet> + '_ {
        self.terms.keys().copied()
    }

    pub fn max_set_size(&self) -> usize {
        self.terms.keys().map(|t| t.len()).max().unwrap_or(0)
    }
}

/// One generalised query: the oracle splits each term over the coherence
/// sectors ω_I with 1 ≤ |I| ≤ k, and the sector for I may pick up any
/// dependence on f|_I. Sets smaller than k cover the padded sectors.
pub fn formal_query(state: &FormalState) -> FormalState {
    let sectors = subsets_up_to(state.inputs, state.k);
    let mut reached: BTreeSet<SlitSet> = BTreeSet::new();
    for &t in state.terms.keys() {
        for &i in &sectors {
            reached.insert(t.union(i));
        }
    }
    let mut next = state.next_symbol;
    let terms = reached
        .into_iter()
        .map(|t| {
            next += 1;
            (t, next - 1)
        })
        .collect();
    let queries_done = state.queries_done + 1;
    FormalState {
        k: state.k,
        inputs: state.inputs,
        queries_done,
        terms,
        next_symbol: next,
        saturated: state.saturated || state.k * queries_done > state.inputs,
    }
}

/// A pattern on which the prior fails to factorise.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Counterexample {
    /// Dependency set, as input indices.
    pub set: Vec<usize>,
    pub pattern: Vec<u8>,
    pub class: String,
    /// μ(C_j | f|_T = y) and μ(C_j).
    pub conditional: String,
    pub prior: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Factorization {
    pub identities_checked: usize,
    pub counterexample: Option<Counterexample>,
}

impl Factorization {
    pub fn holds(&self) -> bool {
        self.counterexample.is_none()
    }
}

/// Integer weights over a common denominator: u128 when the products fit,
/// arbitrary precision otherwise.
enum Numerators {
    Small(Vec<u128>),
    Big(Vec<BigInt>),
}

fn numerators(problem: &LearningProblem) -> Numerators {
    let denom = problem
        .functions()
        .iter()
        .fold(BigInt::one(), |acc, f| acc.lcm(f.weight.denom()));
    let nums: Vec<BigInt> = problem
        .functions()
        .iter()
        .map(|f| f.weight.numer() * (&denom / f.weight.denom()))
        .collect();
    // every partial sum is at most the denominator, so products stay below denom²
    match denom.to_u64() {
        Some(_) => Numerators::Small(nums.iter().map(|n| n.to_u128().expect("fits below denominator")).collect()),
        None => Numerators::Big(nums),
    }
}

/// Checks the factorisation identity on every dependency set and pattern,
/// plus the sum over classes. `sets` must be nonempty subsets of the inputs.
fn check_sets<T>(problem: &LearningProblem, weights: &[T], sets: &[SlitSet]) -> Factorization
where
    T: Clone + Zero + PartialEq + Send + Sync + for<'a> AddAssign<&'a T>,
    for<'a> &'a T: Mul<&'a T, Output = T>,
{
    let nclasses = problem.classes().len();
    let mut class_totals = vec![T::zero(); nclasses];
    let mut grand = T::zero();
    for (f, w) in problem.functions().iter().zip(weights) {
        class_totals[f.class] += w;
        grand += w;
    }
    let per_set: Vec<(usize, Option<Counterexample>)> = sets
        .par_iter()
        .map(|&set| {
            let idx: Vec<usize> = set.indices().collect();
            let mut buckets: BTreeMap<Vec<u8>, (T, Vec<T>)> = BTreeMap::new();
            for (f, w) in problem.functions().iter().zip(weights) {
                let pattern: Vec<u8> = idx.iter().map(|&x| f.values[x]).collect();
                let entry = buckets.entry(pattern).or_insert_with(|| (T::zero(), vec![T::zero(); nclasses]));
                entry.0 += w;
                entry.1[f.class] += w;
            }
            let mut checked = 0;
            for (pattern, (total, per_class)) in buckets {
                let mut summed = T::zero();
                for (j, wj) in per_class.iter().enumerate() {
                    checked += 1;
                    summed += wj;
                    // μ(C_j ∧ y)·μ(C) = μ(C_j)·μ(y), all over the same denominator
                    if (wj * &grand) != (&class_totals[j] * &total) {
                        return (
                            checked,
                            Some(Counterexample {
                                set: idx.clone(),
                                pattern,
                                class: problem.classes()[j].clone(),
                                conditional: String::new(),
                                prior: String::new(),
                            }),
                        );
                    }
                }
                checked += 1;
                if summed != total {
                    return (
                        checked,
                        Some(Counterexample {
                            set: idx.clone(),
                            pattern,
                            class: "*".into(),
                            conditional: String::new(),
                            prior: String::new(),
                        }),
                    );
                }
            }
            (checked, None)
        })
        .collect();
    let mut identities_checked = 0;
    let mut counterexample = None;
    for (n, cx) in per_set {
        identities_checked += n;
        if counterexample.is_none() {
            counterexample = cx;
        }
    }
    Factorization {
        identities_checked,
        counterexample: counterexample.map(|cx| fill_ratios(problem, cx)),
    }
}

/// Fills in the exact conditional and prior of a counterexample.
fn fill_ratios(problem: &LearningProblem, mut cx: Counterexample) -> Counterexample {
    let Some(j) = problem.classes().iter().position(|c| *c == cx.class) else {
        return cx;
    };
    let mut total = BigRational::zero();
    let mut within = BigRational::zero();
    for f in problem.functions() {
        if cx.set.iter().zip(&cx.pattern).all(|(&x, &y)| f.values[x] == y) {
            total += &f.weight;
            if f.class == j {
                within += &f.weight;
            }
        }
    }
    cx.conditional = (within / total).to_string();
    cx.prior = problem.class_priors()[j].to_string();
    cx
}

/// Runs n formal queries of order k and checks the factorisation identity on
/// every dependency set reached.
pub fn check_factorization(problem: &LearningProblem, k: usize, n: usize) -> Result<Factorization> {
    let mut state = FormalState::new(k, problem.inputs().len())?;
    for _ in 0..n {
        state = formal_query(&state);
    }
    let sets: Vec<SlitSet> = state.dependency_sets().filter(|t| !t.is_empty()).collect();
    Ok(match numerators(problem) {
        Numerators::Small(w) => check_sets(problem, &w, &sets),
        Numerators::Big(w) => check_sets(problem, &w, &sets),
    })
}

/// A problem together with a verified count of useless classical queries.
#[derive(Clone, Debug)]
pub struct UselessnessPremise {
    problem: LearningProblem,
    n_classical: usize,
}

impl UselessnessPremise {
    pub fn new(problem: &LearningProblem, n_classical: usize) -> Result<Self> {
        let verdict = classical_useless(problem, n_classical);
        if !verdict.useless {
            let detail = verdict
                .certificate
                .map(|c| format!(" (inputs {:?} with values {:?} move class {} to {})", c.xs, c.ys, c.class, c.conditional))
                .unwrap_or_default();
            return Err(Error::Premise(format!("{n_classical} classical queries are not useless{detail}")));
        }
        Ok(UselessnessPremise {
            problem: problem.clone(),
            n_classical,
        })
    }

    pub fn problem(&self) -> &LearningProblem {
        &self.problem
    }

    pub fn n_classical(&self) -> usize {
        self.n_classical
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub theorem: &'static str,
    pub k: usize,
    pub n: usize,
    pub premise_n: usize,
    pub identities_checked: usize,
    /// "proof-valid", "identity-failed" or "premise-failed".
    pub verdict: &'static str,
    pub counterexample: Option<Counterexample>,
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        self.verdict == "proof-valid"
    }
}

/// Verifies that n generalised queries of order k are useless, given the
/// premise that `premise.n_classical ≥ kn` classical queries are.
pub fn formal_posterior_check(premise: &UselessnessPremise, k: usize, n: usize) -> Result<Verdict> {
    if k * n > premise.n_classical {
        return Err(Error::Premise(format!(
            "kn = {} exceeds the {} useless classical queries",
            k * n,
            premise.n_classical
        )));
    }
    let fact = check_factorization(&premise.problem, k, n)?;
    Ok(Verdict {
        theorem: "useless-queries",
        k,
        n,
        premise_n: premise.n_classical,
        identities_checked: fact.identities_checked,
        verdict: if fact.holds() { "proof-valid" } else { "identity-failed" },
        counterexample: fact.counterexample,
    })
}

/// Like [`formal_posterior_check`] with premise kn, reporting a failed
/// premise as a verdict instead of an error.
pub fn symbolic_verdict(problem: &LearningProblem, k: usize, n: usize) -> Result<Verdict> {
    let premise_n = k * n;
    let classical = classical_useless(problem, premise_n.max(1));
    if premise_n == 0 || classical.useless {
        let premise = UselessnessPremise {
            problem: problem.clone(),
            n_classical: premise_n,
        };
        return formal_posterior_check(&premise, k, n);
    }
    let counterexample = classical.certificate.map(|c| Counterexample {
        set: c.xs,
        pattern: c.ys,
        class: c.class,
        conditional: c.conditional,
        prior: c.prior,
    });
    Ok(Verdict {
        theorem: "useless-queries",
        k,
        n,
        premise_n,
        identities_checked: 0,
        verdict: "premise-failed",
        counterexample,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CrossValidation {
    pub symbolic: Verdict,
    pub sampled: SampledUselessness,
    /// Posterior deviation reached by a supplied explicit algorithm.
    pub explicit_deviation: Option<f64>,
    /// A valid symbolic verdict must come with a passing sample.
    pub agree: bool,
}

/// Runs the symbolic check at k = 2 and the sampled quantum check on the
/// same problem and query count.
pub fn cross_validate_with_quantum(
    problem: &LearningProblem,
    n: usize,
    samples: usize,
    explicit: Option<(&OracleSystem, &QueryAlgorithm)>,
    cfg: &Config,
) -> Result<CrossValidation> {
    const K: usize = 2;
    let symbolic = symbolic_verdict(problem, K, n)?;
    let oracles = build_oracle_family(problem.oracle_domain(), problem.oracle_functions(), Realization::Phase, None, false, cfg)?;
    let sampled = generalized_useless_sample(problem, &oracles, n, samples, cfg.seed, 1e-7, 2)?;
    let explicit_deviation = match explicit {
        Some((os, alg)) => {
            let states = run_algorithm(problem, os, alg)?;
            Some(posterior(problem, &states, &alg.measurement)?.max_deviation)
        }
        None => None,
    };
    let agree = !symbolic.is_valid() || sampled.pass;
    Ok(CrossValidation {
        symbolic,
        sampled,
        explicit_deviation,
        agree,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::{deutsch_parity_algorithm, parity_problem};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn classical_order_gives_singletons() {
        let s = formal_query(&FormalState::new(1, 4).unwrap());
        assert_eq!(s.max_set_size(), 1);
        assert_eq!(s.terms().len(), 4);
    }

    #[test]
    fn order_two_growth() {
        let s1 = formal_query(&FormalState::new(2, 3).unwrap());
        assert_eq!(s1.max_set_size(), 2);
        assert_eq!(s1.terms().len(), 6);
        assert!(!s1.is_saturated());
        let s2 = formal_query(&s1);
        assert_eq!(s2.max_set_size(), 3);
        assert!(s2.is_saturated());
        let wide = formal_query(&formal_query(&FormalState::new(2, 6).unwrap()));
        assert_eq!(wide.max_set_size(), 4);
        assert!(!wide.is_saturated());
    }

    #[test]
    fn symbols_are_fresh() {
        let s1 = formal_query(&FormalState::new(2, 3).unwrap());
        let s2 = formal_query(&s1);
        let old: BTreeSet<Symbol> = s1.terms().values().copied().collect();
        assert!(s2.terms().values().all(|v| !old.contains(v)));
    }

    #[test]
    fn parity_examples() {
        let p4 = parity_problem(4).unwrap();
        let v = formal_posterior_check(&UselessnessPremise::new(&p4, 3).unwrap(), 3, 1).unwrap();
        assert!(v.is_valid());
        assert!(v.identities_checked > 0);
        let p3 = parity_problem(3).unwrap();
        assert!(formal_posterior_check(&UselessnessPremise::new(&p3, 2).unwrap(), 2, 1).unwrap().is_valid());
        let p2 = parity_problem(2).unwrap();
        assert!(matches!(UselessnessPremise::new(&p2, 2), Err(Error::Premise(_))));
        assert_eq!(symbolic_verdict(&p2, 2, 1).unwrap().verdict, "premise-failed");
        let premise = UselessnessPremise::new(&p3, 2).unwrap();
        assert!(matches!(formal_posterior_check(&premise, 2, 2), Err(Error::Premise(_))));
    }

    #[test]
    fn factorization_failure_has_counterexample() {
        let p3 = parity_problem(3).unwrap();
        let f = check_factorization(&p3, 3, 1).unwrap();
        let cx = f.counterexample.unwrap();
        assert_eq!(cx.set, vec![0, 1, 2]);
        assert!(cx.conditional == "0" || cx.conditional == "1");
        assert_eq!(cx.prior, "1/2");
    }

    #[test]
    fn verdict_json_shape() {
        let v = symbolic_verdict(&parity_problem(3).unwrap(), 2, 1).unwrap();
        let json: serde_json::Value = serde_json::to_value(&v).unwrap();
        let keys: Vec<&str> = json.as_object().unwrap().keys().map(|s| s.as_str()).collect();
        for key in ["theorem", "k", "n", "premise_n", "identities_checked", "verdict", "counterexample"] {
            assert!(keys.contains(&key), "{key}");
        }
        assert_eq!(json["counterexample"], serde_json::Value::Null);
    }

    #[test]
    fn large_denominators_use_exact_fallback() {
        let w = |p: i64, q: i64| BigRational::new(p.into(), q.into());
        let big = BigInt::from(1u64 << 63) * 4u32;
        let tiny = BigRational::new(1.into(), big.clone());
        let rest = BigRational::one() - &tiny - w(1, 2);
        let p = LearningProblem::new(
            vec!["a".into(), "b".into()],
            vec![
                ("x".into(), vec![0, 0], "c".into(), w(1, 2)),
                ("y".into(), vec![1, 0], "d".into(), rest),
                ("z".into(), vec![1, 1], "c".into(), tiny),
            ],
        )
        .unwrap();
        assert!(matches!(numerators(&p), Numerators::Big(_)));
        assert!(!check_factorization(&p, 1, 1).unwrap().holds());
    }

    #[test]
    fn cross_validation_agrees() {
        let cfg = Config::default();
        let p5 = parity_problem(5).unwrap();
        let cv = cross_validate_with_quantum(&p5, 2, 12, None, &cfg).unwrap();
        assert!(cv.symbolic.is_valid() && cv.sampled.pass && cv.agree);

        let (p, os, alg) = deutsch_parity_algorithm(5, &cfg).unwrap();
        let cv = cross_validate_with_quantum(&p, 3, 4, Some((&os, &alg)), &cfg).unwrap();
        assert_eq!(cv.symbolic.verdict, "premise-failed");
        assert!((cv.explicit_deviation.unwrap() - 0.5).abs() < 1e-9);

        let p2 = parity_problem(2).unwrap();
        let cv = cross_validate_with_quantum(&p2, 1, 12, None, &cfg).unwrap();
        assert!(!cv.symbolic.is_valid() && !cv.sampled.pass && cv.agree);
    }

    fn random_problem(rng: &mut impl Rng) -> LearningProblem {
        let nx = rng.random_range(1..=5);
        let rows = 1u32 << nx;
        let count = rng.random_range(1..=rows.min(32));
        let mut picked: Vec<u32> = (0..rows).collect();
        for i in 0..picked.len() {
            let j = rng.random_range(i..picked.len());
            picked.swap(i, j);
        }
        picked.truncate(count as usize);
        let ws: Vec<i64> = picked.iter().map(|_| rng.random_range(1..4)).collect();
        let total: i64 = ws.iter().sum();
        let nclass = rng.random_range(1..=3);
        let fs = picked
            .iter()
            .zip(&ws)
            .map(|(&r, &w)| {
                let values: Vec<u8> = (0..nx).map(|i| ((r >> i) & 1) as u8).collect();
                let class = format!("c{}", rng.random_range(0..nclass));
                (format!("f{r}"), values, class, BigRational::new(w.into(), total.into()))
            })
            .collect();
        LearningProblem::new((0..nx).map(|i| i.to_string()).collect(), fs).unwrap()
    }

    #[test]
    fn order_one_matches_classical_check() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
        let mut cases = 0;
        while cases < 60 {
            let p = random_problem(&mut rng);
            for n in 1..=p.inputs().len() {
                let symbolic = check_factorization(&p, 1, n).unwrap().holds();
                assert_eq!(symbolic, classical_useless(&p, n).useless);
            }
            cases += 1;
        }
    }

    #[test]
    fn parity_symbolic_verdicts_are_monotone() {
        for nx in 2..=6 {
            let p = parity_problem(nx).unwrap();
            for k in 1..=3 {
                let mut seen_invalid = false;
                for n in 1..=nx {
                    let valid = symbolic_verdict(&p, k, n).unwrap().is_valid();
                    assert!(!(seen_invalid && valid));
                    seen_invalid |= !valid;
                    assert_eq!(valid, k * n < nx);
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn dependency_growth_is_additive(k in 1usize..4, nx in 1usize..7, m in 0usize..4) {
            let mut s = FormalState::new(k, nx).unwrap();
            for _ in 0..m {
                s = formal_query(&s);
            }
            prop_assert_eq!(s.max_set_size(), (k * m).min(nx));
            prop_assert!(s.dependency_sets().all(|t| t.len() <= k * m));
            prop_assert_eq!(s.queries_done(), m);
        }

        #[test]
        fn factorization_verdict_is_monotone(seed in any::<u64>(), k in 1usize..3) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let p = random_problem(&mut rng);
            let mut seen_fail = false;
            for n in 0..=p.inputs().len() {
                let holds = check_factorization(&p, k, n).unwrap().holds();
                prop_assert!(!(seen_fail && holds));
                seen_fail |= !holds;
            }
        }
    }
}
