use num::{BigInt, BigRational};

use crate::error::{Error, Result};
use crate::gpt::{Measurement, StateVec, System, TransformMat};
use crate::linalg::{c, CVec};
use crate::oracles::{build_oracle_family, pair_measurement, OracleSystem, Realization};
use crate::Config;

use super::algorithm::QueryAlgorithm;
use super::problem::LearningProblem;

/// Enumeration cap on the number of parity inputs.
pub const MAX_PARITY_INPUTS: usize = 12;

/// All functions {1..N} → {0,1}, uniform prior, split by parity into the
/// classes "even" and "odd".
pub fn parity_problem(n: usize) -> Result<LearningProblem> {
    if n == 0 {
        return Err(Error::OutOfRange("parity needs at least one input".into()));
    }
    if n > MAX_PARITY_INPUTS {
        return Err(Error::CapExceeded {
            what: "N",
            value: n,
            cap: MAX_PARITY_INPUTS,
        });
    }
    let weight = BigRational::new(BigInt::from(1), BigInt::from(1u64 << n));
    let functions = (0..(1u64 << n))
        .map(|bits| {
            let values: Vec<u8> = (0..n).map(|x| ((bits >> x) & 1) as u8).collect();
            let id: String = values.iter().map(|v| char::from(b'0' + v)).collect();
            let class = if bits.count_ones() % 2 == 0 { "even" } else { "odd" };
            (format!("f{id}"), values, class.to_string(), weight.clone())
        })
        .collect();
    LearningProblem::new((1..=n).map(|x| x.to_string()).collect(), functions)
}

/// (useless generalised queries, minimal number of queries) given that
/// `n_classical` classical queries are useless in a theory of order `k`.
pub fn useless_bound(n_classical: usize, k: usize) -> Result<(usize, usize)> {
    if k == 0 {
        return Err(Error::OutOfRange("interference order k must be at least 1".into()));
    }
    let useless = n_classical / k;
    Ok((useless, useless + 1))
}

fn plus_ket(h: usize, a: usize, b: usize) -> CVec {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut v = CVec::zeros(h);
    v[a] = c(r, 0.0);
    v[b] = c(r, 0.0);
    v
}

/// Parity with ⌈N/2⌉ phase queries.
///
/// The control starts in |+⟩ on the first pair of inputs. Each query
/// multiplies the relative phase of the pair by (−1)^{f(a)⊕f(b)}, and the
/// interleaved permutation moves the superposition to the next pair with
/// its relative phase intact. For odd N the last pair is (•, N), so that
/// query contributes f(N) alone. The final ± measurement on the last pair
/// reads off the accumulated parity.
pub fn deutsch_parity_algorithm(n: usize, cfg: &Config) -> Result<(LearningProblem, OracleSystem, QueryAlgorithm)> {
    let problem = parity_problem(n)?;
    let odd = n % 2 == 1;
    let capacity = n + usize::from(odd);
    let oracles = build_oracle_family(
        problem.oracle_domain(),
        problem.oracle_functions(),
        Realization::Phase,
        Some(capacity),
        odd,
        cfg,
    )?;
    let mut pairs: Vec<(usize, usize)> = (0..n / 2).map(|i| (2 * i, 2 * i + 1)).collect();
    if let Some(null) = oracles.null_index() {
        pairs.push((null, n - 1));
    }
    let control: System = oracles.control().clone();
    let h = control.hilbert_dim();
    let initial = StateVec::from_ket(&control, &plus_ket(h, pairs[0].0, pairs[0].1))?;

    let mut interleave = Vec::with_capacity(pairs.len());
    for w in pairs.windows(2) {
        let ((a0, b0), (a1, b1)) = (w[0], w[1]);
        let mut perm: Vec<usize> = (0..h).collect();
        perm.swap(a0, a1);
        perm.swap(b0, b1);
        interleave.push(TransformMat::permutation(&control, &perm)?);
    }
    interleave.push(TransformMat::identity(&control));

    let (a, b) = *pairs.last().expect("at least one pair");
    let measurement = Measurement::new(&control, pair_measurement(&control, a, b, cfg.tol)?, cfg.tol.max(1e-12))?;
    let even = problem.classes().iter().position(|c| c == "even").expect("class present");
    let odd_class = problem.classes().iter().position(|c| c == "odd").unwrap_or(even);
    let alg = QueryAlgorithm::new(initial, interleave, measurement)?.with_answer_map(vec![even, odd_class, even]);
    Ok((problem, oracles, alg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::algorithm::{run_algorithm, success_probabilities};
    use crate::query::classical::classical_useless;
    use num::Zero;

    #[test]
    fn parity_problem_shape() {
        let p1 = parity_problem(1).unwrap();
        assert_eq!(p1.len(), 2);
        assert_eq!(p1.classes(), &["even".to_string(), "odd".to_string()]);
        let p3 = parity_problem(3).unwrap();
        assert_eq!(p3.len(), 8);
        let half = BigRational::new(1.into(), 2.into());
        assert_eq!(p3.class_priors(), vec![half.clone(), half]);
        assert_eq!(p3.functions().iter().filter(|f| f.class == 0).count(), 4);
        assert!(matches!(parity_problem(13), Err(Error::CapExceeded { .. })));
        assert!(parity_problem(0).is_err());
        let total: BigRational = p3.functions().iter().fold(BigRational::zero(), |a, f| a + &f.weight);
        assert_eq!(total, BigRational::from_integer(1.into()));
    }

    #[test]
    fn n_minus_one_classical_queries_are_useless() {
        for n in 1..=6 {
            let p = parity_problem(n).unwrap();
            if n > 1 {
                assert!(classical_useless(&p, n - 1).useless);
            }
            assert!(!classical_useless(&p, n).useless);
        }
    }

    #[test]
    fn bound_examples() {
        assert_eq!(useless_bound(4, 2).unwrap(), (2, 3));
        assert_eq!(useless_bound(7, 1).unwrap(), (7, 8));
        assert_eq!(useless_bound(5, 3).unwrap(), (1, 2));
        assert!(useless_bound(3, 0).is_err());
    }

    #[test]
    fn algorithm_solves_parity() {
        let cfg = Config::default();
        for n in 1..=8 {
            let (p, os, alg) = deutsch_parity_algorithm(n, &cfg).unwrap();
            assert_eq!(alg.queries(), n.div_ceil(2));
            let states = run_algorithm(&p, &os, &alg).unwrap();
            let success = success_probabilities(&p, &states, &alg).unwrap();
            for (f, s) in p.functions().iter().zip(&success) {
                assert!((1.0 - s).abs() < 1e-9, "N={n} {}: {s}", f.id);
            }
        }
    }

    #[test]
    fn four_bit_states_depend_on_pair_parities() {
        let (p, os, alg) = deutsch_parity_algorithm(4, &Config::default()).unwrap();
        let states = run_algorithm(&p, &os, &alg).unwrap();
        for (f, s) in p.functions().iter().zip(&states) {
            for (g, t) in p.functions().iter().zip(&states) {
                let key = |v: &[u8]| (v[0] ^ v[1], v[2] ^ v[3]);
                let same_total = key(&f.values).0 ^ key(&f.values).1 == key(&g.values).0 ^ key(&g.values).1;
                if key(&f.values) == key(&g.values) || same_total {
                    // the state only records the total parity
                    assert!(s.distance(t).unwrap() < 1e-12);
                }
            }
        }
    }
}
