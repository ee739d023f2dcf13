//! Base-`k` sumsets `D(n)' = Σ_{ℓ<n} k^ℓ (A - A)` of a digit alphabet.
//!
//! Membership is decided by a digit dynamic program. Write the target as
//! `T = Σ c_ℓ k^ℓ` and let `R_ℓ = (T - Σ_{i<ℓ} c_i k^i) / k^ℓ`, so that
//! `R_{ℓ+1} = (R_ℓ - c_ℓ) / k` with `c_ℓ ≡ R_ℓ (mod k)`. The carry
//! `R_ℓ - ⌊T / k^ℓ⌋` stays within `±B`, `B = ⌈M / (k-1)⌉ + 1` for
//! `M = max |A - A| <= k - 1`: if `|carry| <= B` then the next carry is at most
//! `(k - 1 + B + M) / k <= B` in absolute value. Each layer therefore holds at
//! most `2B + 1` states and the program is linear in `n`.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DigitAlphabet {
    pub k: i64,
    pub a: Vec<i64>,
    /// Sorted `A - A`.
    pub diffs: Vec<i64>,
}

impl DigitAlphabet {
    /// Requires `0 ∈ A`, `max A = k - 1`, consecutive gaps in `{1, 2}`.
    pub fn new(k: i64, a: Vec<i64>) -> Result<Self> {
        let mut a = a;
        a.sort_unstable();
        a.dedup();
        if k < 2 {
            return Err(Error::PreconditionViolated(format!("base {k} is below 2")));
        }
        if a.len() < 2 || a[0] != 0 || *a.last().unwrap() != k - 1 {
            return Err(Error::PreconditionViolated(format!(
                "alphabet {a:?} must contain 0 and k - 1 = {} as extremes",
                k - 1
            )));
        }
        if let Some(w) = a.windows(2).find(|w| !(1..=2).contains(&(w[1] - w[0]))) {
            return Err(Error::PreconditionViolated(format!(
                "gap {} between {} and {} is not 1 or 2",
                w[1] - w[0],
                w[0],
                w[1]
            )));
        }
        let diffs: BTreeSet<i64> = a
            .iter()
            .flat_map(|x| a.iter().map(move |y| x - y))
            .collect();
        Ok(DigitAlphabet {
            k,
            a,
            diffs: diffs.into_iter().collect(),
        })
    }

    pub fn has_diff(&self, v: i64) -> bool {
        self.diffs.binary_search(&v).is_ok()
    }

    /// `g = |{0, ..., k-1} \ (A - A)|`.
    pub fn missing_digits(&self) -> u64 {
        (0..self.k).filter(|&v| !self.has_diff(v)).count() as u64
    }

    fn max_diff(&self) -> i64 {
        *self.diffs.last().unwrap()
    }

    /// Carry bound `B` from the module docs.
    pub fn carry_bound(&self) -> i64 {
        (self.max_diff() + self.k - 2) / (self.k - 1) + 1
    }
}

/// Every admissible alphabet for base `k`, in lexicographic order.
pub fn admissible_alphabets(k: i64) -> Vec<DigitAlphabet> {
    fn extend(k: i64, cur: &mut Vec<i64>, out: &mut Vec<DigitAlphabet>) {
        let last = *cur.last().unwrap();
        if last == k - 1 {
            if cur.len() >= 2 {
                out.push(DigitAlphabet::new(k, cur.clone()).expect("admissible by construction"));
            }
            return;
        }
        for step in 1..=2 {
            if last + step < k {
                cur.push(last + step);
                extend(k, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    if k >= 2 {
        extend(k, &mut vec![0], &mut out);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Membership {
    pub member: bool,
    /// Digits `c_0, ..., c_{n-1}` in `A - A`, least significant first.
    pub digits: Option<Vec<i64>>,
}

/// Decides `target ∈ D(n)'` and returns a digit expansion when it is.
pub fn sumset_membership(alpha: &DigitAlphabet, n: u32, target: i128) -> Result<Membership> {
    if n < 1 {
        return Err(Error::ParamOutOfRange("n must be at least 1".into()));
    }
    let k = alpha.k as i128;
    let step = |r: i128| -> [Option<(i128, i128)>; 2] {
        let c0 = r.rem_euclid(k);
        [c0, c0 - k].map(|c| alpha.has_diff(c as i64).then(|| (c, (r - c) / k)))
    };
    let mut layers: Vec<BTreeSet<i128>> = vec![BTreeSet::from([target])];
    for _ in 0..n {
        let next: BTreeSet<i128> = layers
            .last()
            .unwrap()
            .iter()
            .flat_map(|&r| step(r).into_iter().flatten().map(|(_, nr)| nr))
            .collect();
        layers.push(next);
    }
    // Backward pass: states from which 0 is reachable at layer n.
    let mut feasible: Vec<BTreeSet<i128>> = vec![BTreeSet::new(); n as usize + 1];
    if layers[n as usize].contains(&0) {
        feasible[n as usize].insert(0);
    }
    for l in (0..n as usize).rev() {
        let ok: BTreeSet<i128> = layers[l]
            .iter()
            .copied()
            .filter(|&r| {
                step(r)
                    .into_iter()
                    .flatten()
                    .any(|(_, nr)| feasible[l + 1].contains(&nr))
            })
            .collect();
        feasible[l] = ok;
    }
    if !feasible[0].contains(&target) {
        return Ok(Membership {
            member: false,
            digits: None,
        });
    }
    let mut digits = Vec::with_capacity(n as usize);
    let mut r = target;
    for l in 0..n as usize {
        let (c, nr) = step(r)
            .into_iter()
            .flatten()
            .find(|(_, nr)| feasible[l + 1].contains(nr))
            .expect("feasible state has a feasible successor");
        digits.push(c as i64);
        r = nr;
    }
    debug_assert_eq!(reconstruct(alpha.k, &digits), target);
    Ok(Membership {
        member: true,
        digits: Some(digits),
    })
}

/// `Σ c_ℓ k^ℓ`.
pub fn reconstruct(k: i64, digits: &[i64]) -> i128 {
    digits
        .iter()
        .rev()
        .fold(0i128, |acc, &c| acc * k as i128 + c as i128)
}

/// Largest `k^n` materialized by [`truncated_sumset`].
const ENUMERATION_LIMIT: i128 = 1 << 28;

/// `D(n)'` by explicit enumeration, as a sorted list.
pub fn truncated_sumset(alpha: &DigitAlphabet, n: u32) -> Result<Vec<i64>> {
    let top = (alpha.k as i128)
        .checked_pow(n)
        .filter(|&p| p <= ENUMERATION_LIMIT);
    let Some(top) = top else {
        return Err(Error::BudgetExceeded {
            required: (alpha.k as u128).saturating_pow(n),
            budget: ENUMERATION_LIMIT as u64,
        });
    };
    let top = top as i64;
    let offset = top - 1;
    let mut present = vec![false; 2 * top as usize - 1];
    present[offset as usize] = true;
    let mut scale = 1i64;
    for _ in 0..n {
        let current: Vec<i64> = present
            .iter()
            .enumerate()
            .filter(|(_, &p)| p)
            .map(|(i, _)| i as i64 - offset)
            .collect();
        let mut next = vec![false; present.len()];
        for &x in &current {
            for &c in &alpha.diffs {
                next[(x + c * scale + offset) as usize] = true;
            }
        }
        present = next;
        scale *= alpha.k;
    }
    Ok(present
        .iter()
        .enumerate()
        .filter(|(_, &p)| p)
        .map(|(i, _)| i as i64 - offset)
        .collect())
}

fn require_unit_difference(alpha: &DigitAlphabet) -> Result<()> {
    if alpha.has_diff(1) {
        Ok(())
    } else {
        Err(Error::PreconditionViolated(format!(
            "alphabet {:?} has no difference equal to 1",
            alpha.a
        )))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct GapCount {
    pub g: u64,
    /// `λ_1, ..., λ_n` from `λ_1 = g`, `λ_{m+1} = (2g + 1) λ_m + g`.
    pub recursion: Vec<u64>,
    /// `|{0, ..., k^m - 1} \ D(m)'|` for `m = 1..=n`.
    pub brute_force: Vec<u64>,
    /// Missing elements at the last stage, when there are at most 64.
    pub missing: Option<Vec<i64>>,
    pub agree: bool,
}

pub fn gap_count(alpha: &DigitAlphabet, n: u32) -> Result<GapCount> {
    require_unit_difference(alpha)?;
    if n < 1 {
        return Err(Error::ParamOutOfRange("n must be at least 1".into()));
    }
    let g = alpha.missing_digits();
    let mut recursion = vec![g];
    for _ in 1..n {
        let prev = *recursion.last().unwrap();
        recursion.push((2 * g + 1) * prev + g);
    }
    let mut brute_force = Vec::new();
    let mut missing = None;
    for m in 1..=n {
        let d = truncated_sumset(alpha, m)?;
        let top = alpha.k.pow(m);
        let lo = d.partition_point(|&x| x < 0);
        let hi = d.partition_point(|&x| x < top);
        let absent = top as u64 - (hi - lo) as u64;
        brute_force.push(absent);
        if m == n && absent <= 64 {
            let present = &d[lo..hi];
            missing = Some(
                (0..top)
                    .filter(|x| present.binary_search(x).is_err())
                    .collect(),
            );
        }
    }
    let agree = recursion == brute_force;
    Ok(GapCount {
        g,
        recursion,
        brute_force,
        missing,
        agree,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CoverageCheck {
    pub holds: bool,
    pub checked: u64,
    pub counterexample: Option<i64>,
}

impl CoverageCheck {
    fn over(candidates: impl Iterator<Item = i64>, member: impl Fn(i64) -> bool) -> Self {
        let mut checked = 0;
        for z in candidates {
            checked += 1;
            if !member(z) {
                return CoverageCheck {
                    holds: false,
                    checked,
                    counterexample: Some(z),
                };
            }
        }
        CoverageCheck {
            holds: true,
            checked,
            counterexample: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CoverageReport {
    /// `{0..⌈k/2⌉} ∪ {z ≡ k-1 (mod 2)} ⊆ A - A`; `None` when `1 ∉ A - A`.
    pub digit_coverage: Option<CoverageCheck>,
    /// `{0..⌈k/2⌉ k^{n-1}} ⊆ D(n)'`; `None` when `1 ∉ A - A`.
    pub lower_half: Option<CoverageCheck>,
    /// Every element of `{0..k^n - 1}` with the parity of `k - 1` lies in `D(n)'`.
    pub parity: CoverageCheck,
}

impl CoverageReport {
    pub fn all_hold(&self) -> bool {
        self.digit_coverage.as_ref().is_none_or(|c| c.holds)
            && self.lower_half.as_ref().is_none_or(|c| c.holds)
            && self.parity.holds
    }
}

pub fn coverage_checks(alpha: &DigitAlphabet, n: u32) -> Result<CoverageReport> {
    if n < 1 {
        return Err(Error::ParamOutOfRange("n must be at least 1".into()));
    }
    let k = alpha.k;
    let half = (k + 1) / 2;
    let unit = alpha.has_diff(1);
    let digit_coverage = unit.then(|| {
        let parity = (0..k).filter(|z| (z - (k - 1)) % 2 == 0);
        CoverageCheck::over((0..=half).chain(parity), |z| alpha.has_diff(z))
    });
    let d = truncated_sumset(alpha, n)?;
    let member = |z: i64| d.binary_search(&z).is_ok();
    let scale = k.pow(n - 1);
    let lower_half = unit.then(|| CoverageCheck::over(0..=half * scale, member));
    let parity = CoverageCheck::over(
        (0..k.pow(n)).filter(|z| (z - (k - 1)).rem_euclid(2) == 0),
        member,
    );
    Ok(CoverageReport {
        digit_coverage,
        lower_half,
        parity,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct GammaWitness {
    pub n: u32,
    pub m: u32,
    pub gamma: i64,
    /// `k^m - γ` with its digit expansion.
    pub base_check: (i128, Vec<i64>),
    /// `(β, k^n - γβ, digits)` for each `β`.
    pub beta_checks: Vec<(i64, i128, Vec<i64>)>,
}

/// Lexicographically least `(n, m, γ)` with `k^m - γ ∈ D(m)'` and
/// `k^n - γβ ∈ D(n)'` for every `β`, searching `n, m <= horizon`.
pub fn gamma_search(alpha: &DigitAlphabet, betas: &[i64], horizon: u32) -> Result<GammaWitness> {
    if alpha.k < 3 {
        return Err(Error::PreconditionViolated(format!(
            "base {} is below 3",
            alpha.k
        )));
    }
    require_unit_difference(alpha)?;
    if betas.is_empty() || betas.iter().any(|&b| b < 1) {
        return Err(Error::PreconditionViolated(
            "the multiplier set must be nonempty and positive".into(),
        ));
    }
    let k = alpha.k as i128;
    let max_beta = *betas.iter().max().unwrap() as i128;
    let digits_of = |m: u32, x: i128| -> Result<Option<Vec<i64>>> {
        Ok(sumset_membership(alpha, m, x)?.digits)
    };
    for n in 1..=horizon {
        let kn = k.pow(n);
        for m in 1..=horizon {
            let km = k.pow(m);
            // |D(m)'| elements lie in [-(k^m - 1), k^m - 1].
            let gamma_max = (2 * km - 1).min((2 * kn - 1) / max_beta);
            'gamma: for gamma in 1..=gamma_max {
                let Some(base_digits) = digits_of(m, km - gamma)? else {
                    continue;
                };
                let mut beta_checks = Vec::with_capacity(betas.len());
                for &b in betas {
                    let target = kn - gamma * b as i128;
                    match digits_of(n, target)? {
                        Some(ds) => beta_checks.push((b, target, ds)),
                        None => continue 'gamma,
                    }
                }
                return Ok(GammaWitness {
                    n,
                    m,
                    gamma: gamma as i64,
                    base_check: (km - gamma, base_digits),
                    beta_checks,
                });
            }
        }
    }
    Err(Error::HorizonExceeded(format!(
        "no (n, m, gamma) with n, m <= {horizon} for multipliers {betas:?}"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alpha(k: i64, a: &[i64]) -> DigitAlphabet {
        DigitAlphabet::new(k, a.to_vec()).unwrap()
    }

    #[test]
    fn rejects_inadmissible() {
        assert!(DigitAlphabet::new(5, vec![0, 3, 4]).is_err());
        assert!(DigitAlphabet::new(5, vec![1, 2, 4]).is_err());
        assert!(DigitAlphabet::new(5, vec![0, 2, 3]).is_err());
    }

    #[test]
    fn membership_examples() {
        let a = alpha(5, &[0, 1, 3, 4]);
        let m = sumset_membership(&a, 2, 19).unwrap();
        assert_eq!(m.digits, Some(vec![4, 3]));
        assert_eq!(
            sumset_membership(&a, 3, 0).unwrap().digits,
            Some(vec![0, 0, 0])
        );
        let b = alpha(9, &[0, 2, 3, 5, 6, 8]);
        assert!(!sumset_membership(&b, 2, 63).unwrap().member);
        assert!(!truncated_sumset(&b, 2).unwrap().contains(&63));
    }

    #[test]
    fn carry_bound_is_two_for_full_width() {
        assert_eq!(alpha(5, &[0, 1, 3, 4]).carry_bound(), 2);
    }

    #[test]
    fn gap_examples() {
        let b = alpha(9, &[0, 2, 3, 5, 6, 8]);
        let gc = gap_count(&b, 3).unwrap();
        assert_eq!(gc.recursion, vec![1, 4, 13]);
        assert!(gc.agree);
        let two = gap_count(&b, 2).unwrap();
        assert_eq!(two.missing, Some(vec![61, 63, 65, 79]));
        let full = gap_count(&alpha(5, &[0, 1, 2, 3, 4]), 3).unwrap();
        assert_eq!(full.brute_force, vec![0, 0, 0]);
        assert!(matches!(
            gap_count(&alpha(5, &[0, 2, 4]), 2),
            Err(Error::PreconditionViolated(_))
        ));
    }

    #[test]
    fn coverage_examples() {
        let a = alpha(5, &[0, 1, 3, 4]);
        let r = coverage_checks(&a, 2).unwrap();
        assert!(r.all_hold());
        assert_eq!(r.lower_half.unwrap().checked, 16);
        let r1 = coverage_checks(&a, 1).unwrap();
        assert_eq!(r1.lower_half.unwrap().checked, 4);
        assert!(coverage_checks(&alpha(5, &[0, 2, 4]), 2)
            .unwrap()
            .lower_half
            .is_none());
    }

    #[test]
    fn gamma_examples() {
        let a = alpha(5, &[0, 1, 3, 4]);
        for betas in [vec![2, 3], vec![1], vec![4]] {
            let w = gamma_search(&a, &betas, 4).unwrap();
            assert_eq!((w.n, w.m, w.gamma), (1, 1, 1));
        }
    }

    #[test]
    fn admissible_counts_follow_fibonacci() {
        let counts: Vec<usize> = (2..9).map(|k| admissible_alphabets(k).len()).collect();
        assert_eq!(counts, vec![1, 2, 3, 5, 8, 13, 21]);
    }
}
