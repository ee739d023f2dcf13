//! Decay of `μ(T^m F ∩ F)` across one stage window.
//!
//! For `max D(F, n) <= m <= max D(F, n+1)` no copy of `D(F, n)` inside
//! `D(F, n+1)` meets its own translate, and the intersection is bounded by
//! `max{1/|H_n|, |S_n|/|H_n|} μ(F)`, where `R_n = H_n \ S_n` collects the
//! offsets `x` with `|x - z - y + z'| >= 2 h_n` for all `y != x`,
//! `(z, z') != (x, y)`. The bound needs at least `max H_n + h_n` right spacers,
//! which also makes stage `n+1` resolve every image exactly.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Certificate, CertificateKind, Verdict};
use crate::construction::{tower_for, LevelRef};
use crate::error::{Error, Result};
use crate::families::separation_check;
use crate::measure::{Measure, MeasureInterval};
use crate::spec::RankOneSpec;
use crate::sumsets::descendants_in;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MixingQuery {
    /// Levels of one column making up `F`.
    pub levels: Vec<LevelRef>,
    /// Window stage.
    pub n: usize,
    /// Explicit values of `m`; defaults to the whole window.
    pub samples: Option<Vec<i64>>,
    /// When the window is longer, it is sampled at this many evenly spaced points.
    pub max_samples: usize,
}

impl MixingQuery {
    pub fn new(levels: Vec<LevelRef>, n: usize) -> Self {
        MixingQuery {
            levels,
            n,
            samples: None,
            max_samples: 4096,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MixingRow {
    pub m: i64,
    pub in_window: bool,
    /// `μ(T^m F ∩ F) / μ(F)`.
    pub ratio: MeasureInterval,
    pub within_bound: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MixingOutcome {
    pub query: MixingQuery,
    pub eval_stage: usize,
    pub window: (i64, i64),
    pub height_set: Vec<i64>,
    /// Offsets failing the separation condition.
    pub s_n: Vec<i64>,
    pub delta: Measure,
    pub bound: Measure,
    pub top_spacers: i64,
    pub required_spacers: i64,
    pub hypothesis_holds: bool,
    pub rows: Vec<MixingRow>,
    /// Largest confirmed in-window ratio and the first `m` attaining it.
    pub max_ratio: Option<(i64, Measure)>,
    pub verdict: Verdict,
    #[serde(skip)]
    spec: RankOneSpec,
}

impl MixingOutcome {
    pub fn certificate(&self) -> Certificate {
        Certificate::build(
            CertificateKind::MixingDecay,
            Some(&self.spec),
            &self.query,
            self.verdict,
            self,
        )
    }
}

fn union_descendants(
    tower: &crate::spec::Tower,
    levels: &[LevelRef],
    j: usize,
) -> Result<Vec<i64>> {
    let mut d = Vec::new();
    for &l in levels {
        d.extend(descendants_in(tower, l, j)?);
    }
    d.sort_unstable();
    d.dedup();
    Ok(d)
}

fn evenly_spaced(lo: i64, hi: i64, count: usize) -> Vec<i64> {
    let span = (hi - lo) as u64;
    if count < 2 || span < count as u64 {
        return (lo..=hi).collect();
    }
    let steps = (count - 1) as u128;
    let mut out: Vec<i64> = (0..=steps)
        .map(|t| lo + (span as u128 * t / steps) as i64)
        .collect();
    out.dedup();
    out
}

pub fn mixing_decay(spec: &RankOneSpec, query: MixingQuery) -> Result<MixingOutcome> {
    let Some(first) = query.levels.first().copied() else {
        return Err(Error::ParamOutOfRange("F needs at least one level".into()));
    };
    if query.levels.iter().any(|l| l.stage != first.stage) {
        return Err(Error::ParamOutOfRange(
            "levels of F must share a stage".into(),
        ));
    }
    let n = query.n;
    let j = n + 1;
    let tower = tower_for(spec, LevelRef::new(first.stage, 0), j)?;
    if n < first.stage {
        return Err(Error::StageTooLow {
            requested: n,
            level_stage: first.stage,
        });
    }
    for l in &query.levels {
        l.check(&tower)?;
    }
    let d_n = union_descendants(&tower, &query.levels, n)?;
    let d = union_descendants(&tower, &query.levels, j)?;
    let lo = d_n[d_n.len() - 1] + i64::from(d_n[0] == 0);
    let hi = d[d.len() - 1];
    let h = tower.height(n);
    let hs = tower.height_set(n).to_vec();
    let s_n: Vec<i64> = hs
        .iter()
        .copied()
        .filter(|&x| !separation_check(&hs, h, 1, Some(&[x])).holds())
        .collect();
    let size = hs.len() as u64;
    let delta = Measure::ratio(s_n.len() as u64, size);
    let bound = std::cmp::max(Measure::ratio(1, size), delta.clone());
    let top_spacers = tower.stage(n).top_spacers();
    let required_spacers = hs[hs.len() - 1] + h;
    let hypothesis_holds = top_spacers >= required_spacers;
    let samples = query
        .samples
        .clone()
        .unwrap_or_else(|| evenly_spaced(lo, hi.max(lo), query.max_samples));
    let hj = tower.height(j);
    let total = d.len() as u64;
    let rows: Vec<MixingRow> = samples
        .par_iter()
        .map(|&m| {
            let (mut hit, mut open) = (0u64, 0u64);
            for &e in &d {
                match e.checked_add(m) {
                    Some(x) if (0..hj).contains(&x) => {
                        hit += u64::from(d.binary_search(&x).is_ok())
                    }
                    _ => open += 1,
                }
            }
            let ratio = MeasureInterval {
                confirmed: Measure::ratio(hit, total),
                unresolved: Measure::ratio(open, total),
            };
            let in_window = (lo..=hi).contains(&m);
            MixingRow {
                m,
                in_window,
                within_bound: ratio.upper() <= bound,
                ratio,
            }
        })
        .collect();
    let max_ratio = rows
        .iter()
        .filter(|r| r.in_window)
        .fold(None::<(i64, Measure)>, |best, r| match best {
            Some((_, ref v)) if *v >= r.ratio.confirmed => best,
            _ => Some((r.m, r.ratio.confirmed.clone())),
        });
    let in_window: Vec<&MixingRow> = rows.iter().filter(|r| r.in_window).collect();
    let verdict = if !hypothesis_holds || in_window.is_empty() {
        Verdict::Inconclusive
    } else if in_window.iter().all(|r| r.within_bound) {
        Verdict::Holds
    } else if in_window.iter().any(|r| r.ratio.confirmed > bound) {
        Verdict::Fails
    } else {
        Verdict::Inconclusive
    };
    Ok(MixingOutcome {
        query,
        eval_stage: j,
        window: (lo, hi),
        height_set: hs,
        s_n,
        delta,
        bound,
        top_spacers,
        required_spacers,
        hypothesis_holds,
        rows,
        max_ratio,
        verdict,
        spec: spec.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{make_asymm_construction, AsymmParams, ConservativeIndex};
    use crate::spec::{validate_spec, RawSpec};

    fn separated() -> RankOneSpec {
        let raw: RawSpec = serde_json::from_str(
            r#"{"stages":[{"r":3,"s":[9,29,41]}],"h0":1,"extension":"repeat-last"}"#,
        )
        .unwrap();
        validate_spec(&raw).unwrap()
    }

    #[test]
    fn attained_third_on_example() {
        let spec = separated();
        let mut q = MixingQuery::new(vec![LevelRef::new(0, 0)], 0);
        q.samples = Some(vec![0, 40]);
        let out = mixing_decay(&spec, q).unwrap();
        assert_eq!(out.height_set, vec![0, 10, 40]);
        assert!(out.s_n.is_empty());
        assert_eq!(out.bound, Measure::ratio(1, 3));
        assert!(!out.rows[0].in_window);
        assert_eq!(out.rows[0].ratio.confirmed, Measure::one());
        assert_eq!(
            out.rows[1].ratio,
            MeasureInterval::exact(Measure::ratio(1, 3))
        );
        assert_eq!(out.verdict, Verdict::Holds);
    }

    #[test]
    fn full_window_respects_bound() {
        let spec = separated();
        let out = mixing_decay(&spec, MixingQuery::new(vec![LevelRef::new(0, 0)], 0)).unwrap();
        assert_eq!(out.window, (1, 40));
        assert!(out
            .rows
            .iter()
            .all(|r| r.ratio.is_exact() && r.within_bound));
        assert_eq!(out.max_ratio, Some((10, Measure::ratio(1, 3))));
        let asymm =
            make_asymm_construction(AsymmParams::new(2, ConservativeIndex::Finite(3), 4)).unwrap();
        for n in 0..4 {
            let out = mixing_decay(&asymm, MixingQuery::new(vec![LevelRef::new(0, 0)], n)).unwrap();
            assert!(out.hypothesis_holds);
            assert!(
                out.rows
                    .iter()
                    .all(|r| r.ratio.is_exact() && r.within_bound),
                "stage {n}"
            );
            assert_eq!(out.verdict, Verdict::Holds);
        }
    }

    #[test]
    fn short_spacer_leaves_verdict_open() {
        let raw: RawSpec = serde_json::from_str(
            r#"{"stages":[{"r":3,"s":[9,29,5]}],"h0":1,"extension":"repeat-last"}"#,
        )
        .unwrap();
        let spec = validate_spec(&raw).unwrap();
        let out = mixing_decay(&spec, MixingQuery::new(vec![LevelRef::new(0, 0)], 0)).unwrap();
        assert!(!out.hypothesis_holds);
        assert_eq!(out.verdict, Verdict::Inconclusive);
    }
}
