//! Statistic separating `T` from `T^{-1}`.
//!
//! For a stage `n` with column height `h`, compare
//! `μ(I ∩ T^{h+1} I ∩ T^{2h+1} I)` (the zero side) with
//! `μ(I ∩ T^{h} I ∩ T^{2h+1} I)` (the forward side, which is the zero side of
//! `T^{-1}` after translating by `2h + 1`). An isomorphism between `T` and its
//! inverse would make them equal.

use serde::Serialize;

use super::{Certificate, CertificateKind, Verdict};
use crate::construction::{intersection_in, tower_for, IntersectionMeasure, LevelRef};
use crate::error::{Error, Result};
use crate::measure::{Measure, MeasureInterval};
use crate::spec::RankOneSpec;
use crate::sumsets::descendants_in;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AdjacencyRow {
    pub stage: usize,
    /// `D(I, j) ∩ (D(I, j) + 1) = ∅`.
    pub separated: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AsymmetryOutcome {
    pub level: LevelRef,
    pub n: usize,
    pub eval_stage: usize,
    pub column_height: i64,
    pub height_set: Vec<i64>,
    /// `unit-gap-first` for `{0, h+1, 2h+1}`, `unit-gap-last` for `{0, h, 2h+1}`.
    pub height_set_shape: &'static str,
    pub zero_exponents: Vec<i64>,
    pub forward_exponents: Vec<i64>,
    /// Both sides relative to `μ(I)`.
    pub zero_side: MeasureInterval,
    pub forward_side: MeasureInterval,
    pub zero_raw: IntersectionMeasure,
    pub forward_raw: IntersectionMeasure,
    pub adjacency: Vec<AdjacencyRow>,
    pub adjacency_holds: bool,
    /// The zero side is exactly 0, by adjacency on a `{0, h+1, 2h+1}` stage.
    pub zero_exact: bool,
    pub verdict: Verdict,
    #[serde(skip)]
    spec: RankOneSpec,
}

impl AsymmetryOutcome {
    pub fn certificate(&self) -> Certificate {
        Certificate::build(
            CertificateKind::Asymmetry,
            Some(&self.spec),
            serde_json::json!({
                "level": self.level,
                "n": self.n,
                "evalStage": self.eval_stage,
            }),
            self.verdict,
            self,
        )
    }

    /// Upper bound on the zero side, after the adjacency upgrade.
    pub fn zero_upper(&self) -> Measure {
        if self.zero_exact {
            Measure::zero()
        } else {
            self.zero_side.upper()
        }
    }
}

pub fn asymmetry_statistic(
    spec: &RankOneSpec,
    level: LevelRef,
    n: usize,
    eval_stage: usize,
) -> Result<AsymmetryOutcome> {
    if level.stage < 1 {
        return Err(Error::PreconditionViolated(
            "the level must sit at stage 1 or later".into(),
        ));
    }
    if n < level.stage {
        return Err(Error::StageTooLow {
            requested: n,
            level_stage: level.stage,
        });
    }
    if eval_stage <= n {
        return Err(Error::StageTooLow {
            requested: eval_stage,
            level_stage: n + 1,
        });
    }
    let tower = tower_for(spec, level, eval_stage)?;
    let h = tower.height(n);
    let hs = tower.height_set(n).to_vec();
    let shape = if hs == [0, h + 1, 2 * h + 1] {
        "unit-gap-first"
    } else if hs == [0, h, 2 * h + 1] {
        "unit-gap-last"
    } else {
        "other"
    };
    let zero_exponents = vec![0, h + 1, 2 * h + 1];
    let forward_exponents = vec![0, h, 2 * h + 1];
    let zero_raw = intersection_in(&tower, level, &zero_exponents, eval_stage)?;
    let forward_raw = intersection_in(&tower, level, &forward_exponents, eval_stage)?;
    let adjacency = (level.stage..=eval_stage)
        .map(|j| {
            let d = descendants_in(&tower, level, j)?;
            let separated = d.windows(2).all(|w| w[1] - w[0] != 1);
            Ok(AdjacencyRow {
                stage: j,
                separated,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let adjacency_holds = adjacency.iter().all(|r| r.separated);
    let zero_side = zero_raw.relative();
    let forward_side = forward_raw.relative();
    let zero_exact = zero_side.confirmed.is_zero() && adjacency_holds && shape == "unit-gap-first";
    let zero_upper = if zero_exact {
        Measure::zero()
    } else {
        zero_side.upper()
    };
    let verdict = if zero_upper < forward_side.confirmed {
        Verdict::Holds
    } else {
        Verdict::Inconclusive
    };
    Ok(AsymmetryOutcome {
        level,
        n,
        eval_stage,
        column_height: h,
        height_set: hs,
        height_set_shape: shape,
        zero_exponents,
        forward_exponents,
        zero_side,
        forward_side,
        zero_raw,
        forward_raw,
        adjacency,
        adjacency_holds,
        zero_exact,
        verdict,
        spec: spec.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::make_inf_chacon;

    #[test]
    fn chacon_example() {
        let spec = make_inf_chacon(3, 1, 6, 2).unwrap();
        let out = asymmetry_statistic(&spec, LevelRef::new(1, 0), 1, 3).unwrap();
        assert_eq!(out.zero_side.confirmed, Measure::zero());
        assert_eq!(out.zero_side.upper(), Measure::ratio(2, 9));
        assert!(out.zero_exact);
        assert_eq!(out.forward_side.confirmed, Measure::ratio(1, 3));
        assert_eq!(out.forward_side.upper(), Measure::ratio(4, 9));
        assert_eq!(out.verdict, Verdict::Holds);
    }

    #[test]
    fn translated_exponents_agree() {
        let spec = make_inf_chacon(3, 1, 6, 2).unwrap();
        let tower = spec.tower(6).unwrap();
        let i = LevelRef::new(1, 0);
        let a = intersection_in(&tower, i, &[0, 9, 17], 6).unwrap();
        let b = intersection_in(&tower, i, &[1, 10, 18], 6).unwrap();
        assert_eq!(a.interval, b.interval);
    }

    #[test]
    fn preconditions() {
        let spec = make_inf_chacon(3, 1, 6, 2).unwrap();
        assert!(asymmetry_statistic(&spec, LevelRef::new(0, 0), 1, 3).is_err());
        assert!(asymmetry_statistic(&spec, LevelRef::new(1, 0), 2, 2).is_err());
    }
}
