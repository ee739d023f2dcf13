//! Columns, levels, and exact measures of images and finite intersections.
//!
//! Levels are never materialized as intervals. A level of `C_i` splits into
//! sublevels of `C_j` at the heights `D(I, j)`, all of width `Π_{q<j} 1/r_q`,
//! and every measure below is a count of such sublevels times that width.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{Measure, MeasureInterval};
use crate::spec::{RankOneSpec, Tower};
use crate::sumsets::descendants_in;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LevelRef {
    pub stage: usize,
    pub height: i64,
}

impl LevelRef {
    pub fn new(stage: usize, height: i64) -> Self {
        LevelRef { stage, height }
    }

    /// Confirms the height lies in `0..h_stage`.
    pub fn check(&self, tower: &Tower) -> Result<()> {
        let column_height = tower.height(self.stage);
        if !(0..column_height).contains(&self.height) {
            return Err(Error::LevelOutOfRange {
                stage: self.stage,
                height: self.height,
                column_height,
            });
        }
        Ok(())
    }
}

/// Builds enough of the tower to evaluate at stage `j` from a level at stage
/// `level.stage`, checking the level along the way.
pub fn tower_for(spec: &RankOneSpec, level: LevelRef, j: usize) -> Result<Tower> {
    if j < level.stage {
        return Err(Error::StageTooLow {
            requested: j,
            level_stage: level.stage,
        });
    }
    let tower = spec.tower(j)?;
    level.check(&tower)?;
    Ok(tower)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct HeightSet {
    pub stage: usize,
    pub column_height: i64,
    pub offsets: Vec<i64>,
}

pub fn height_set(spec: &RankOneSpec, n: usize) -> Result<HeightSet> {
    let tower = spec.tower(n + 1)?;
    Ok(HeightSet {
        stage: n,
        column_height: tower.height(n),
        offsets: tower.height_set(n).to_vec(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ColumnStats {
    pub height: i64,
    pub level_width: Measure,
    pub total_measure: Measure,
}

pub fn column_stats(spec: &RankOneSpec, n: usize) -> Result<ColumnStats> {
    let tower = spec.tower(n)?;
    let level_width = tower.level_width(n);
    let total_measure = &level_width * tower.height(n) as u64;
    Ok(ColumnStats {
        height: tower.height(n),
        level_width,
        total_measure,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LevelImage {
    pub stage: usize,
    pub shift: i64,
    /// Stage-`j` levels hit by `T^m` of a sublevel that stays in the column.
    pub resolved: Vec<LevelRef>,
    /// Stage-`j` sublevels of the source whose image leaves `C_j`.
    pub unresolved: Vec<LevelRef>,
    pub resolved_measure: Measure,
    pub unresolved_measure: Measure,
}

pub fn image_of_level(spec: &RankOneSpec, level: LevelRef, m: i64, j: usize) -> Result<LevelImage> {
    let tower = tower_for(spec, level, j)?;
    let d = descendants_in(&tower, level, j)?;
    let hj = tower.height(j);
    let mut resolved = Vec::new();
    let mut unresolved = Vec::new();
    for &e in &d {
        match e.checked_add(m) {
            Some(x) if (0..hj).contains(&x) => resolved.push(LevelRef::new(j, x)),
            _ => unresolved.push(LevelRef::new(j, e)),
        }
    }
    let width = tower.level_width(j);
    Ok(LevelImage {
        stage: j,
        shift: m,
        resolved_measure: &width * resolved.len() as u64,
        unresolved_measure: &width * unresolved.len() as u64,
        resolved,
        unresolved,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct IntersectionMeasure {
    pub stage: usize,
    pub interval: MeasureInterval,
    pub level_measure: Measure,
    pub confirmed_count: u64,
    pub unresolved_count: u64,
    pub sublevel_count: u64,
    /// `k * max_t |m_t - m_0| * width_j`, an a priori cap on the unresolved mass.
    pub unresolved_bound: Measure,
}

impl IntersectionMeasure {
    /// The interval divided by `μ(I)`.
    pub fn relative(&self) -> MeasureInterval {
        self.interval.relative_to(&self.level_measure)
    }
}

/// `μ(∩_t T^{m_t} I)` evaluated at stage `j`.
///
/// Since `T^{m_0}` preserves measure this equals `μ(∩_t T^{m_t - m_0} I)`: count
/// sublevels `d` of `I` with `d - (m_t - m_0) ∈ D(I, j)` for every `t`. A shift
/// leaving `[0, h_j)` cannot be decided at stage `j`; such sublevels are
/// unresolved unless another, in-range shift already rules them out.
pub fn intersection_measure(
    spec: &RankOneSpec,
    level: LevelRef,
    exponents: &[i64],
    j: usize,
) -> Result<IntersectionMeasure> {
    let tower = tower_for(spec, level, j)?;
    intersection_in(&tower, level, exponents, j)
}

pub fn intersection_in(
    tower: &Tower,
    level: LevelRef,
    exponents: &[i64],
    j: usize,
) -> Result<IntersectionMeasure> {
    let Some(&m0) = exponents.first() else {
        return Err(Error::ParamOutOfRange("exponent list is empty".into()));
    };
    let shifts: Vec<i64> = exponents
        .iter()
        .map(|&m| {
            m.checked_sub(m0)
                .ok_or(Error::Overflow("exponent difference"))
        })
        .collect::<Result<_>>()?;
    let d = descendants_in(tower, level, j)?;
    let hj = tower.height(j);
    let (mut confirmed, mut unresolved) = (0u64, 0u64);
    for &e in &d {
        let mut open = false;
        let mut failed = false;
        for &c in &shifts {
            match e.checked_sub(c) {
                Some(x) if (0..hj).contains(&x) => {
                    if d.binary_search(&x).is_err() {
                        failed = true;
                        break;
                    }
                }
                _ => open = true,
            }
        }
        if failed {
            continue;
        }
        if open {
            unresolved += 1;
        } else {
            confirmed += 1;
        }
    }
    let width = tower.level_width(j);
    let level_measure = tower.level_width(level.stage);
    let max_shift = shifts.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0);
    let cap = (shifts.len() as u64).saturating_mul(max_shift);
    Ok(IntersectionMeasure {
        stage: j,
        interval: MeasureInterval {
            confirmed: &width * confirmed,
            unresolved: &width * unresolved,
        },
        level_measure,
        confirmed_count: confirmed,
        unresolved_count: unresolved,
        sublevel_count: d.len() as u64,
        unresolved_bound: &width * cap,
    })
}
