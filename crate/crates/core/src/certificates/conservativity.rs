use serde::Serialize;

use super::tuples::matching_count;
use super::{Budget, Certificate, CertificateKind, Verdict};
use crate::construction::{tower_for, LevelRef};
use crate::error::{Error, Result};
use crate::measure::Measure;
use crate::spec::RankOneSpec;
use crate::sumsets::descendants_in;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct StageFraction {
    pub stage: usize,
    pub matched: u64,
    pub total: u64,
    pub fraction: Measure,
    /// Fraction of diagonal tuples `(a, ..., a)` that are matched.
    pub diagonal_fraction: Measure,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ConservativityOutcome {
    pub alpha: Vec<i64>,
    pub base_stage: usize,
    pub epsilon: Measure,
    pub stages: Vec<StageFraction>,
    /// First stage whose fraction reaches `1 - ε`.
    pub reached_at: Option<usize>,
    pub verdict: Verdict,
    #[serde(skip)]
    spec: RankOneSpec,
}

impl ConservativityOutcome {
    pub fn fraction_at(&self, stage: usize) -> Option<&Measure> {
        self.stages
            .iter()
            .find(|s| s.stage == stage)
            .map(|s| &s.fraction)
    }

    pub fn certificate(&self) -> Certificate {
        Certificate::build(
            CertificateKind::ConservativeFraction,
            Some(&self.spec),
            serde_json::json!({
                "alpha": self.alpha,
                "baseStage": self.base_stage,
                "epsilon": self.epsilon,
                "stages": self.stages.iter().map(|s| s.stage).collect::<Vec<_>>(),
            }),
            self.verdict,
            self,
        )
    }
}

/// Fraction of `v`-tuples of `D(I, j)^v` (`I` the base of `C_i`) having a
/// complementary tuple with a common nonzero quotient `(a_ℓ - d_ℓ) / α_ℓ`, for
/// each `j` in `stages`. Reaching `1 - ε` at some stage is the finite witness
/// of the conservativity criterion; failing to reach it is inconclusive.
pub fn conservativity_fraction(
    spec: &RankOneSpec,
    alpha: &[i64],
    i: usize,
    stages: std::ops::RangeInclusive<usize>,
    epsilon: &Measure,
    budget: Budget,
) -> Result<ConservativityOutcome> {
    if alpha.is_empty() {
        return Err(Error::ParamOutOfRange("alpha must be nonempty".into()));
    }
    let level = LevelRef::new(i, 0);
    let top = *stages.end();
    let tower = tower_for(spec, level, top.max(i))?;
    let target = Measure::one()
        .checked_sub(epsilon)
        .ok_or_else(|| Error::ParamOutOfRange("epsilon exceeds 1".into()))?;
    let zeros = vec![0i64; alpha.len()];
    let mut rows = Vec::new();
    for j in stages {
        if j < i {
            return Err(Error::StageTooLow {
                requested: j,
                level_stage: i,
            });
        }
        let d = descendants_in(&tower, level, j)?;
        let count = matching_count(&d, alpha, &zeros, true, budget)?;
        rows.push(StageFraction {
            stage: j,
            matched: count.matched,
            total: count.total,
            fraction: count.fraction(),
            diagonal_fraction: count.diagonal_fraction(),
        });
    }
    let reached_at = rows.iter().find(|r| r.fraction >= target).map(|r| r.stage);
    Ok(ConservativityOutcome {
        alpha: alpha.to_vec(),
        base_stage: i,
        epsilon: epsilon.clone(),
        verdict: if reached_at.is_some() {
            Verdict::Holds
        } else {
            Verdict::Inconclusive
        },
        reached_at,
        stages: rows,
        spec: spec.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::make_inf_chacon;

    #[test]
    fn chacon_pair_fraction() {
        let spec = make_inf_chacon(3, 1, 6, 2).unwrap();
        let out = conservativity_fraction(
            &spec,
            &[1, 1],
            0,
            2..=3,
            &Measure::ratio(1, 10),
            Budget::default(),
        )
        .unwrap();
        assert_eq!(out.fraction_at(2), Some(&Measure::ratio(65, 81)));
        assert_eq!(out.fraction_at(3), Some(&Measure::ratio(227, 243)));
        assert_eq!(out.reached_at, Some(3));
        assert_eq!(out.stages[0].diagonal_fraction, Measure::one());
        assert_eq!(out.certificate().verdict, Verdict::Holds);
    }

    #[test]
    fn single_power_is_trivially_matched() {
        let spec = make_inf_chacon(3, 1, 6, 2).unwrap();
        let out =
            conservativity_fraction(&spec, &[1], 0, 1..=3, &Measure::zero(), Budget::default())
                .unwrap();
        assert!(out.stages.iter().all(|s| s.fraction == Measure::one()));
    }
}
