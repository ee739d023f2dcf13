use num_integer::Integer;
use serde::Serialize;

use super::tuples::matching_count;
use super::{Budget, Certificate, CertificateKind, Verdict};
use crate::construction::{tower_for, LevelRef};
use crate::error::{Error, Result};
use crate::measure::Measure;
use crate::spec::RankOneSpec;
use crate::sumsets::{descendants_in, max_descendant};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct GrowthRow {
    pub n: usize,
    pub height: i64,
    pub max_descendant: i64,
    /// `h_n - max D(I_0, n) - 2`; nonnegative when the bound holds.
    pub slack: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct NecessaryRow {
    pub stage: usize,
    pub matched: u64,
    pub total: u64,
    pub fraction: Measure,
    /// `gcd(D - D)` at this stage.
    pub difference_gcd: i64,
    /// No `n` solves `α_ℓ n + b_ℓ ≡ 0 (mod gcd)` for all `ℓ`, so no tuple can match.
    pub congruence_obstruction: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct NonErgodicOutcome {
    pub alpha: Vec<i64>,
    pub b: Vec<i64>,
    pub base_stage: usize,
    pub vacuous: bool,
    pub growth: Vec<GrowthRow>,
    pub growth_holds: bool,
    pub stages: Vec<NecessaryRow>,
    /// `exact-structural` when a congruence obstruction explains every zero,
    /// `enumeration` when zeros were only observed, `none` otherwise.
    pub basis: &'static str,
    pub verdict: Verdict,
    #[serde(skip)]
    spec: RankOneSpec,
}

impl NonErgodicOutcome {
    pub fn certificate(&self) -> Certificate {
        Certificate::build(
            CertificateKind::NonErgodic,
            Some(&self.spec),
            serde_json::json!({
                "alpha": self.alpha,
                "b": self.b,
                "baseStage": self.base_stage,
                "stages": self.stages.iter().map(|s| s.stage).collect::<Vec<_>>(),
                "growthHorizon": self.growth.last().map(|g| g.n),
            }),
            self.verdict,
            self,
        )
    }
}

fn difference_gcd(d: &[i64]) -> i64 {
    d.iter().fold(0i64, |g, &x| g.gcd(&(x - d[0])))
}

fn obstructed(alpha: &[i64], b: &[i64], g: i64) -> bool {
    g > 1
        && !(0..g).any(|n| {
            alpha
                .iter()
                .zip(b)
                .all(|(&a, &bb)| (a * n + bb).rem_euclid(g) == 0)
        })
}

/// Tests the necessary matching condition for ergodicity of
/// `T^{α_0} × ... × T^{α_{v-1}}` (some `d` and integer `n` with
/// `a_ℓ = d_ℓ + b_ℓ + α_ℓ n`) on `D(I_i, j)` for `j` in `stages`, and the growth
/// bound `h_n >= max D(I_0, n) + 2` for `1 <= n <= growth_horizon`.
#[allow(clippy::too_many_arguments)]
pub fn non_ergodic_check(
    spec: &RankOneSpec,
    alpha: &[i64],
    b: &[i64],
    i: usize,
    stages: std::ops::RangeInclusive<usize>,
    growth_horizon: usize,
    budget: Budget,
) -> Result<NonErgodicOutcome> {
    if alpha.len() != b.len() || alpha.is_empty() {
        return Err(Error::ParamOutOfRange(
            "alpha and b must have equal nonzero length".into(),
        ));
    }
    let top = (*stages.end()).max(growth_horizon).max(i);
    let tower = tower_for(spec, LevelRef::new(i, 0), top)?;
    // Shifts are heights in the first evaluated column, where the sublevels live.
    let first = (*stages.start()).max(i + 1).min(top);
    let column = tower.height(first);
    if let Some(bb) = b.iter().find(|x| !(0..column).contains(*x)) {
        return Err(Error::ParamOutOfRange(format!(
            "shift {bb} outside 0..{column}"
        )));
    }
    let base0 = LevelRef::new(0, 0);
    let growth: Vec<GrowthRow> = (1..=growth_horizon)
        .map(|n| {
            let max_d = max_descendant(&tower, base0, n);
            GrowthRow {
                n,
                height: tower.height(n),
                max_descendant: max_d,
                slack: tower.height(n) - max_d - 2,
            }
        })
        .collect();
    let growth_holds = growth.iter().all(|g| g.slack >= 0);
    let vacuous = b.iter().all(|&x| x == b[0]);
    let mut rows = Vec::new();
    if !vacuous {
        for j in stages {
            if j <= i {
                continue;
            }
            let d = descendants_in(&tower, LevelRef::new(i, 0), j)?;
            let count = matching_count(&d, alpha, b, false, budget)?;
            let g = difference_gcd(&d);
            rows.push(NecessaryRow {
                stage: j,
                matched: count.matched,
                total: count.total,
                fraction: count.fraction(),
                difference_gcd: g,
                congruence_obstruction: obstructed(alpha, b, g),
            });
        }
    }
    let all_zero = !rows.is_empty() && rows.iter().all(|r| r.matched == 0);
    let basis = if all_zero && rows.iter().all(|r| r.congruence_obstruction) {
        "exact-structural"
    } else if all_zero {
        "enumeration"
    } else {
        "none"
    };
    Ok(NonErgodicOutcome {
        alpha: alpha.to_vec(),
        b: b.to_vec(),
        base_stage: i,
        vacuous,
        growth,
        growth_holds,
        stages: rows,
        basis,
        verdict: if all_zero {
            Verdict::Fails
        } else {
            Verdict::Inconclusive
        },
        spec: spec.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::make_tq;

    #[test]
    fn all_but_last_parity_obstruction() {
        let (spec, _) = make_tq(3, 2, vec![0, 1]).unwrap();
        let out =
            non_ergodic_check(&spec, &[1, 1], &[0, 1], 0, 1..=4, 12, Budget::default()).unwrap();
        assert_eq!(out.verdict, Verdict::Fails);
        assert_eq!(out.basis, "exact-structural");
        assert!(out.growth_holds);
        assert_eq!(out.growth[0].height, 6);
        assert_eq!(out.growth[0].max_descendant + 2, 6);
        assert!(out.stages.iter().all(|r| r.difference_gcd % 2 == 0));
    }

    #[test]
    fn equal_shifts_are_vacuous() {
        let (spec, _) = make_tq(3, 2, vec![0, 1]).unwrap();
        let out =
            non_ergodic_check(&spec, &[1, 1], &[0, 0], 0, 1..=3, 3, Budget::default()).unwrap();
        assert!(out.vacuous);
        assert_eq!(out.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn unit_gap_family_has_matches() {
        let (spec, _) = make_tq(4, 1, vec![1]).unwrap();
        let out =
            non_ergodic_check(&spec, &[1, 1], &[0, 1], 0, 1..=3, 4, Budget::default()).unwrap();
        assert_eq!(out.verdict, Verdict::Inconclusive);
        assert!(out.stages.iter().any(|r| r.matched > 0));
    }
}
