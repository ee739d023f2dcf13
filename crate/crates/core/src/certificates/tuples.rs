//! Exhaustive counting of descendant tuples that admit a complementary tuple.

use rayon::prelude::*;
use serde::Serialize;

use super::Budget;
use crate::error::{Error, Result};
use crate::measure::Measure;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TupleCount {
    pub matched: u64,
    pub total: u64,
    pub diagonal_matched: u64,
    pub diagonal_total: u64,
}

impl TupleCount {
    pub fn fraction(&self) -> Measure {
        Measure::ratio(self.matched, self.total)
    }

    pub fn diagonal_fraction(&self) -> Measure {
        Measure::ratio(self.diagonal_matched, self.diagonal_total)
    }
}

struct Lookup {
    lo: i64,
    bits: Vec<bool>,
}

impl Lookup {
    fn new(d: &[i64]) -> Self {
        let lo = *d.iter().min().unwrap();
        let hi = *d.iter().max().unwrap();
        let mut bits = vec![false; (hi - lo + 1) as usize];
        for &x in d {
            bits[(x - lo) as usize] = true;
        }
        Lookup { lo, bits }
    }

    fn contains(&self, x: i64) -> bool {
        x >= self.lo
            && ((x - self.lo) as usize) < self.bits.len()
            && self.bits[(x - self.lo) as usize]
    }
}

/// Counts tuples `a ∈ D^v` for which some `d ∈ D^v` and integer `n` satisfy
/// `a_ℓ - d_ℓ - b_ℓ = α_ℓ n` for every `ℓ`, with `n ≠ 0` when `nonzero`.
/// Candidate shifts come from coordinate 0; the others are checked by lookup.
pub fn matching_count(
    d: &[i64],
    alpha: &[i64],
    b: &[i64],
    nonzero: bool,
    budget: Budget,
) -> Result<TupleCount> {
    if d.is_empty() || alpha.is_empty() || alpha.len() != b.len() {
        return Err(Error::ParamOutOfRange(
            "need a nonempty set and equal-length alpha and b".into(),
        ));
    }
    if alpha.contains(&0) {
        return Err(Error::ParamOutOfRange(
            "alpha entries must be nonzero".into(),
        ));
    }
    let v = alpha.len() as u32;
    let size = d.len() as u128;
    let total = size.checked_pow(v).unwrap_or(u128::MAX);
    budget.check(total)?;
    let lookup = Lookup::new(d);
    let rest = v as usize - 1;
    let per_first: Vec<(u64, bool)> = d
        .par_iter()
        .map(|&a0| {
            let cands: Vec<i64> = d
                .iter()
                .filter_map(|&d0| {
                    let num = a0 - b[0] - d0;
                    (num % alpha[0] == 0).then_some(num / alpha[0])
                })
                .filter(|&n| !nonzero || n != 0)
                .collect();
            let mut idx = vec![0usize; rest];
            let mut matched = 0u64;
            let mut diagonal = false;
            loop {
                let ok = cands.iter().any(|&n| {
                    (0..rest).all(|t| lookup.contains(d[idx[t]] - b[t + 1] - alpha[t + 1] * n))
                });
                if ok {
                    matched += 1;
                    if idx.iter().all(|&i| d[i] == a0) {
                        diagonal = true;
                    }
                }
                // Advance the mixed-radix counter over coordinates 1..v.
                let mut t = 0;
                while t < rest {
                    idx[t] += 1;
                    if idx[t] < d.len() {
                        break;
                    }
                    idx[t] = 0;
                    t += 1;
                }
                if t == rest {
                    break;
                }
            }
            (matched, diagonal)
        })
        .collect();
    Ok(TupleCount {
        matched: per_first.iter().map(|p| p.0).sum(),
        total: total as u64,
        diagonal_matched: per_first.iter().filter(|p| p.1).count() as u64,
        diagonal_total: d.len() as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(d: &[i64], alpha: &[i64], b: &[i64], nonzero: bool) -> u64 {
        // Enumerate every complementary tuple explicitly.
        let v = alpha.len();
        let tuples: Vec<Vec<i64>> = (0..d.len().pow(v as u32))
            .map(|mut i| {
                (0..v)
                    .map(|_| {
                        let x = d[i % d.len()];
                        i /= d.len();
                        x
                    })
                    .collect()
            })
            .collect();
        tuples
            .iter()
            .filter(|a| {
                tuples.iter().any(|dd| {
                    let num = a[0] - dd[0] - b[0];
                    if num % alpha[0] != 0 {
                        return false;
                    }
                    let n = num / alpha[0];
                    (!nonzero || n != 0) && (0..v).all(|l| a[l] - dd[l] - b[l] == alpha[l] * n)
                })
            })
            .count() as u64
    }

    #[test]
    fn agrees_with_explicit_enumeration() {
        let d = [0, 2, 3, 9, 11, 12, 17, 19, 20];
        for (alpha, b) in [
            (vec![1, 1], vec![0, 0]),
            (vec![1, 2], vec![0, 0]),
            (vec![1, -1], vec![0, 1]),
            (vec![2, 3], vec![1, 0]),
            (vec![1, 1, 1], vec![0, 0, 2]),
        ] {
            for nonzero in [true, false] {
                let c = matching_count(&d, &alpha, &b, nonzero, Budget::default()).unwrap();
                assert_eq!(c.matched, brute(&d, &alpha, &b, nonzero), "{alpha:?} {b:?}");
            }
        }
    }

    #[test]
    fn single_power_always_matches() {
        let c = matching_count(&[0, 2, 3], &[1], &[0], true, Budget::default()).unwrap();
        assert_eq!(c.fraction(), Measure::one());
    }

    #[test]
    fn budget_is_enforced() {
        let d: Vec<i64> = (0..100).collect();
        assert!(matches!(
            matching_count(&d, &[1, 1, 1], &[0, 0, 0], true, Budget(1000)),
            Err(Error::BudgetExceeded { .. })
        ));
    }
}
