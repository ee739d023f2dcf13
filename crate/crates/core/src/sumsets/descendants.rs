use serde::Serialize;

use crate::construction::{tower_for, LevelRef};
use crate::error::{Error, Result};
use crate::spec::{RankOneSpec, Tower};

/// Largest descendant set materialized in memory.
pub const DESCENDANT_LIMIT: u64 = 1 << 27;

/// Heights in `C_j` of the sublevels of a level of `C_i`:
/// `D(I, j) = H_{j-1} + ... + H_i + e`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DescendantSet {
    pub base: LevelRef,
    pub stage: usize,
    pub heights: Vec<i64>,
}

pub fn descendant_set(spec: &RankOneSpec, level: LevelRef, j: usize) -> Result<DescendantSet> {
    let tower = tower_for(spec, level, j)?;
    Ok(DescendantSet {
        base: level,
        stage: j,
        heights: descendants_in(&tower, level, j)?,
    })
}

/// Sorted `D(I, j)`. Copies of `C_q` inside `C_{q+1}` are disjoint and ordered,
/// so appending `D(I, q) + o` for increasing `o ∈ H_q` keeps the list sorted.
pub fn descendants_in(tower: &Tower, level: LevelRef, j: usize) -> Result<Vec<i64>> {
    if j < level.stage {
        return Err(Error::StageTooLow {
            requested: j,
            level_stage: level.stage,
        });
    }
    let count = tower.descendant_count(level.stage, j);
    if count > DESCENDANT_LIMIT as u128 {
        return Err(Error::BudgetExceeded {
            required: count,
            budget: DESCENDANT_LIMIT,
        });
    }
    let mut d = vec![level.height];
    for q in level.stage..j {
        let hs = tower.height_set(q);
        let mut next = Vec::with_capacity(d.len() * hs.len());
        for &o in hs {
            next.extend(d.iter().map(|&x| x + o));
        }
        d = next;
    }
    Ok(d)
}

/// `max D(I, j) = e + Σ_{q=i}^{j-1} max H_q`.
pub fn max_descendant(tower: &Tower, level: LevelRef, j: usize) -> i64 {
    (level.stage..j).fold(level.height, |acc, q| {
        acc + tower.height_set(q).last().copied().unwrap_or(0)
    })
}

/// Splits `x` into its summands `(o_i, ..., o_{j-1})` with `o_q ∈ H_q` and
/// `x = e + Σ o_q`, or `None` when `x ∉ D(I, j)`. The summand at stage `q` is
/// forced: it is the largest element of `H_q` not exceeding the remainder.
pub fn decompose(tower: &Tower, level: LevelRef, j: usize, x: i64) -> Option<Vec<i64>> {
    if j < level.stage || x < 0 || x >= tower.height(j) {
        return None;
    }
    let mut rest = x;
    let mut digits = vec![0; j - level.stage];
    for q in (level.stage..j).rev() {
        let hs = tower.height_set(q);
        let idx = hs.partition_point(|&o| o <= rest);
        let o = hs[idx.checked_sub(1)?];
        rest -= o;
        if rest >= tower.height(q) {
            return None;
        }
        digits[q - level.stage] = o;
    }
    (rest == level.height).then_some(digits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::make_inf_chacon;
    use crate::spec::{validate_spec, ExtensionRule, RawSpec, RawStage};

    #[test]
    fn chacon_and_dyadic_examples() {
        let spec = make_inf_chacon(3, 1, 6, 2).unwrap();
        let d = descendant_set(&spec, LevelRef::new(0, 0), 2).unwrap();
        assert_eq!(d.heights, vec![0, 2, 3, 9, 11, 12, 17, 19, 20]);
        let same = descendant_set(&spec, LevelRef::new(1, 5), 1).unwrap();
        assert_eq!(same.heights, vec![5]);
        let dyadic = validate_spec(&RawSpec {
            stages: vec![RawStage {
                r: 2,
                s: vec![0, 0],
            }],
            extension: ExtensionRule::RepeatLast,
            ..RawSpec::default()
        })
        .unwrap();
        let d = descendant_set(&dyadic, LevelRef::new(0, 0), 2).unwrap();
        assert_eq!(d.heights, vec![0, 1, 2, 3]);
    }

    #[test]
    fn decompose_matches_membership() {
        let spec = make_inf_chacon(3, 1, 6, 2).unwrap();
        let tower = spec.tower(4).unwrap();
        let level = LevelRef::new(1, 3);
        let d = descendants_in(&tower, level, 4).unwrap();
        for x in 0..tower.height(4) {
            let digits = decompose(&tower, level, 4, x);
            assert_eq!(digits.is_some(), d.binary_search(&x).is_ok(), "x = {x}");
            if let Some(ds) = digits {
                assert_eq!(ds.iter().sum::<i64>() + 3, x);
                for (q, o) in (1..4).zip(&ds) {
                    assert!(tower.height_set(q).contains(o));
                }
            }
        }
        assert_eq!(max_descendant(&tower, level, 4), *d.last().unwrap());
    }
}
