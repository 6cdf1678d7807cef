use std::collections::BTreeMap;

use num::{BigRational, Zero};
use serde::Serialize;

use super::problem::LearningProblem;

/// A query outcome whose conditional class distribution differs from the
/// prior.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Certificate {
    /// Queried inputs, as indices into the input list.
    pub xs: Vec<usize>,
    pub ys: Vec<u8>,
    pub class: String,
    pub conditional: String,
    pub prior: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassicalVerdict {
    pub n: usize,
    pub useless: bool,
    pub events_checked: usize,
    pub certificate: Option<Certificate>,
}

/// Exact check that n classical queries reveal nothing about the class.
///
/// An x-tuple with repeated entries constrains the same inputs as its set of
/// distinct entries, and the event for a smaller set is a disjoint union of
/// events for any superset. Conditioning is therefore uninformative on all
/// tuples exactly when it is uninformative on every set of min(n, |X|)
/// inputs, which is what gets enumerated.
pub fn classical_useless(problem: &LearningProblem, n: usize) -> ClassicalVerdict {
    let nx = problem.inputs().len();
    let m = n.min(nx);
    let priors = problem.class_priors();
    let nclasses = priors.len();
    let mut events = 0;

    for set in sets_of_size(nx, m) {
        // pattern of f on the set -> (total weight, per-class weight)
        let mut buckets: BTreeMap<Vec<u8>, (BigRational, Vec<BigRational>)> = BTreeMap::new();
        for f in problem.functions() {
            let pattern: Vec<u8> = set.iter().map(|&x| f.values[x]).collect();
            let entry = buckets
                .entry(pattern)
                .or_insert_with(|| (BigRational::zero(), vec![BigRational::zero(); nclasses]));
            entry.0 += &f.weight;
            entry.1[f.class] += &f.weight;
        }
        for (pattern, (total, per_class)) in buckets {
            events += 1;
            for (j, w) in per_class.iter().enumerate() {
                if w != &(&priors[j] * &total) {
                    let mut xs = set.clone();
                    let mut ys = pattern.clone();
                    // pad to n queries by repeating the last one
                    while xs.len() < n {
                        xs.push(*set.last().expect("nonempty set"));
                        ys.push(*pattern.last().expect("nonempty pattern"));
                    }
                    return ClassicalVerdict {
                        n,
                        useless: false,
                        events_checked: events,
                        certificate: Some(Certificate {
                            xs,
                            ys,
                            class: problem.classes()[j].clone(),
                            conditional: (w / &total).to_string(),
                            prior: priors[j].to_string(),
                        }),
                    };
                }
            }
        }
    }
    ClassicalVerdict {
        n,
        useless: true,
        events_checked: events,
        certificate: None,
    }
}

/// Largest n ≤ `limit` for which n classical queries are useless.
pub fn max_useless_classical(problem: &LearningProblem, limit: usize) -> usize {
    (1..=limit).take_while(|&n| classical_useless(problem, n).useless).last().unwrap_or(0)
}

/// Increasing index sets of the given size.
pub(crate) fn sets_of_size(n: usize, size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(size);
    fn rec(start: usize, n: usize, size: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == size {
            out.push(current.clone());
            return;
        }
        for x in start..n {
            if n - x < size - current.len() {
                break;
            }
            current.push(x);
            rec(x + 1, n, size, current, out);
            current.pop();
        }
    }
    rec(0, n, size, &mut current, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::parity::parity_problem;
    use num::BigInt;

    /// Direct enumeration over every x-tuple and y-tuple, used as an oracle
    /// for the set-based shortcut.
    fn brute_force(problem: &LearningProblem, n: usize) -> bool {
        let nx = problem.inputs().len();
        let priors = problem.class_priors();
        let tuples = nx.pow(n as u32);
        for t in 0..tuples {
            let xs: Vec<usize> = (0..n).map(|i| (t / nx.pow(i as u32)) % nx).collect();
            for ybits in 0..(1u32 << n) {
                let ys: Vec<u8> = (0..n).map(|i| ((ybits >> i) & 1) as u8).collect();
                let mut total = BigRational::zero();
                let mut per = vec![BigRational::zero(); priors.len()];
                for f in problem.functions() {
                    if xs.iter().zip(&ys).all(|(&x, &y)| f.values[x] == y) {
                        total += &f.weight;
                        per[f.class] += &f.weight;
                    }
                }
                if total.is_zero() {
                    continue;
                }
                for (j, w) in per.iter().enumerate() {
                    if w / &total != priors[j] {
                        return false;
                    }
                }
            }
        }
        true
    }

    #[test]
    fn parity_examples() {
        let p3 = parity_problem(3).unwrap();
        assert!(classical_useless(&p3, 2).useless);
        let v = classical_useless(&p3, 3);
        assert!(!v.useless);
        let cert = v.certificate.unwrap();
        assert_eq!(cert.xs, vec![0, 1, 2]);
        assert!(cert.conditional == "0" || cert.conditional == "1");
    }

    #[test]
    fn constant_class_information_is_absent() {
        // all functions agree on X: conditioning never changes anything
        let h = BigRational::new(BigInt::from(1), BigInt::from(2));
        let p = LearningProblem::new(
            vec!["a".into(), "b".into()],
            vec![("only".into(), vec![1, 0], "c".into(), h.clone() * BigRational::from_integer(2.into()))],
        )
        .unwrap();
        for n in 1..5 {
            assert!(classical_useless(&p, n).useless);
        }
    }

    #[test]
    fn monotone_on_parity() {
        for n_slits in 1..=6 {
            let p = parity_problem(n_slits).unwrap();
            let mut seen_useful = false;
            for n in 1..=n_slits + 1 {
                let useless = classical_useless(&p, n).useless;
                assert!(!(seen_useful && useless), "N={n_slits} n={n}");
                seen_useful |= !useless;
                assert_eq!(useless, n < n_slits);
            }
        }
    }

    #[test]
    fn shortcut_matches_brute_force() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..40 {
            let nx = rng.random_range(1..=3);
            let mut rows: Vec<u32> = (0..(1u32 << nx)).collect();
            rows.retain(|_| rng.random_bool(0.7));
            if rows.is_empty() {
                rows.push(0);
            }
            let weights: Vec<i64> = rows.iter().map(|_| rng.random_range(1..4)).collect();
            let total: i64 = weights.iter().sum();
            let fs = rows
                .iter()
                .zip(&weights)
                .map(|(&r, &w)| {
                    let values: Vec<u8> = (0..nx).map(|i| ((r >> i) & 1) as u8).collect();
                    let class = if rng.random_bool(0.5) { "a" } else { "b" };
                    (format!("f{r}"), values, class.to_string(), BigRational::new(w.into(), total.into()))
                })
                .collect();
            let p = LearningProblem::new((0..nx).map(|i| i.to_string()).collect(), fs).unwrap();
            for n in 1..=3 {
                assert_eq!(classical_useless(&p, n).useless, brute_force(&p, n));
            }
        }
    }
}
