//! Certificates against power conservativity.
//!
//! If `D(I_N, n) - D(I_N, n)` never contains `{x, 2x, ..., (κ+1)x}` with
//! `x > 0`, the product `T × T^2 × ... × T^{κ+1}` is not conservative. The
//! inductive argument rests on the working bound
//! `sup_{n >= N} max D(I_N, n+1) / (h_n - 2 max D(I_N, n)) < κ`; a direct
//! search over the difference sets serves as ground truth.

use serde::{Deserialize, Serialize};

use super::{Certificate, CertificateKind, Verdict};
use crate::construction::LevelRef;
use crate::error::{Error, Result};
use crate::measure::Fraction;
use crate::spec::{RankOneSpec, Tower};
use crate::sumsets::{ap_search, descendants_in, max_descendant, ApSearch};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NpcQuery {
    pub kappa: u32,
    /// Base stage `N` of the level `I_N`.
    pub n_base: usize,
    pub jmax: usize,
    pub growth: SpacerGrowthQuery,
}

/// Parameters of the two growth conditions: `h_{n+1} >= 2 h_n + 2 max H_n + K`
/// and `h_n / max H_{n+1} >= b`, for `n >= start`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SpacerGrowthQuery {
    pub k: i64,
    pub b: Fraction,
    pub start: usize,
}

impl Default for SpacerGrowthQuery {
    fn default() -> Self {
        SpacerGrowthQuery {
            k: 0,
            b: Fraction::new(1, 13),
            start: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RatioRow {
    pub n: usize,
    /// `None` when the denominator is not positive.
    pub value: Option<Fraction>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SpacerGrowthRow {
    pub n: usize,
    pub spacer_growth: bool,
    /// `h_n / max H_{n+1}`.
    pub height_ratio: Fraction,
    pub height_ratio_ok: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SpacerGrowthReport {
    pub query: SpacerGrowthQuery,
    pub rows: Vec<SpacerGrowthRow>,
    /// Both conditions at every tested `n >= start`.
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ApRow {
    pub stage: usize,
    pub longest: u32,
    pub witness: Vec<i64>,
}

/// Replay of the inductive step `n -> n+1` over every positive difference `x`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CaseReplay {
    pub n: usize,
    /// `(κ+1)x` already a difference at stage `n`.
    pub case1: u64,
    /// `x` a difference at stage `n`, `(κ+1)x` not.
    pub case2: u64,
    /// `x` new at stage `n+1`.
    pub case3: u64,
    /// Every case's numeric premise held, so the argument rules out a progression.
    pub premises_hold: bool,
    /// A full progression exists at stage `n+1` by direct search.
    pub brute_force_found: bool,
    pub agrees: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct NpcOutcome {
    pub query: NpcQuery,
    /// `(h_n - 2 max D(I_0, n)) / max D(I_0, n)` for `1 <= n <= jmax`.
    pub hineq_ratios: Vec<RatioRow>,
    /// The last statement-side ratio exceeds `1/κ`.
    pub hineq_threshold_met: bool,
    /// `max D(I_N, n+1) / (h_n - 2 max D(I_N, n))` for `N <= n < jmax`.
    pub proof_ratios: Vec<RatioRow>,
    pub proof_sup: Option<Fraction>,
    pub proof_bound_holds: bool,
    pub growth: SpacerGrowthReport,
    pub ap: Vec<ApRow>,
    pub ap_free: bool,
    pub replay: Vec<CaseReplay>,
    pub verdict: Verdict,
    #[serde(skip)]
    spec: RankOneSpec,
}

impl NpcOutcome {
    pub fn certificate(&self) -> Certificate {
        Certificate::build(
            CertificateKind::ApFree,
            Some(&self.spec),
            &self.query,
            self.verdict,
            self,
        )
    }
}

fn ratio(num: i64, den: i64) -> Option<Fraction> {
    (den > 0).then(|| Fraction::new(num, den))
}

fn replay_step(
    tower: &Tower,
    base: LevelRef,
    n: usize,
    kappa: u32,
    before: &ApSearch,
    after: &ApSearch,
) -> CaseReplay {
    let len = kappa as i64 + 1;
    let max_n = max_descendant(tower, base, n);
    let max_next = max_descendant(tower, base, n + 1);
    let gap = tower.height(n) - 2 * max_n;
    let known = |v: i64| before.table.binary_search_by_key(&v, |r| r.x).is_ok();
    let (mut case1, mut case2, mut case3) = (0u64, 0u64, 0u64);
    let mut premises_hold = true;
    for run in &after.table {
        let x = run.x;
        if known(len * x) {
            // Whole progression inside the previous stage, excluded by induction.
            case1 += 1;
            premises_hold &= before.length_at(x) < kappa + 1;
        } else if known(x) {
            // Steps below the gap above max D(I_N, n) cannot cross it; longer
            // steps overshoot max D(I_N, n+1) before reaching (κ+1)x.
            case2 += 1;
            premises_hold &= if x < gap {
                run.length == before.length_at(x)
            } else {
                len * x > max_next
            };
        } else {
            case3 += 1;
            premises_hold &= x >= tower.height(n) - max_n && len * x > max_next;
        }
    }
    let brute_force_found = after.longest > kappa;
    CaseReplay {
        n,
        case1,
        case2,
        case3,
        premises_hold,
        brute_force_found,
        agrees: !premises_hold || !brute_force_found,
    }
}

pub fn npc_certificate(spec: &RankOneSpec, query: NpcQuery) -> Result<NpcOutcome> {
    if query.kappa == 0 {
        return Err(Error::ParamOutOfRange("kappa must be positive".into()));
    }
    let big_n = query.n_base;
    if query.jmax < big_n {
        return Err(Error::StageTooLow {
            requested: query.jmax,
            level_stage: big_n,
        });
    }
    let tower = spec.tower(query.jmax)?;
    let base0 = LevelRef::new(0, 0);
    let base = LevelRef::new(big_n, 0);
    let hineq_ratios: Vec<RatioRow> = (1..=query.jmax)
        .map(|n| {
            let m = max_descendant(&tower, base0, n);
            RatioRow {
                n,
                value: ratio(tower.height(n) - 2 * m, m),
            }
        })
        .collect();
    let inverse_kappa = Fraction::new(1, query.kappa as i64);
    let hineq_threshold_met = hineq_ratios
        .last()
        .and_then(|r| r.value.as_ref())
        .is_some_and(|v| *v > inverse_kappa);
    let proof_ratios: Vec<RatioRow> = (big_n..query.jmax)
        .map(|n| RatioRow {
            n,
            value: ratio(
                max_descendant(&tower, base, n + 1),
                tower.height(n) - 2 * max_descendant(&tower, base, n),
            ),
        })
        .collect();
    let proof_sup = if proof_ratios.iter().all(|r| r.value.is_some()) {
        proof_ratios.iter().filter_map(|r| r.value.clone()).max()
    } else {
        None
    };
    let kappa = Fraction::from_integer(query.kappa as i64);
    let proof_bound_holds = proof_sup.as_ref().is_some_and(|s| *s < kappa);

    let cq = query.growth.clone();
    let rows: Vec<SpacerGrowthRow> = (0..query.jmax.saturating_sub(1))
        .map(|n| {
            let max_h = *tower.height_set(n).last().expect("nonempty height set");
            let max_next = *tower.height_set(n + 1).last().expect("nonempty height set");
            let height_ratio = Fraction::new(tower.height(n), max_next.max(1));
            SpacerGrowthRow {
                n,
                spacer_growth: tower.height(n + 1) >= 2 * tower.height(n) + 2 * max_h + cq.k,
                height_ratio_ok: height_ratio >= cq.b,
                height_ratio,
            }
        })
        .collect();
    let tested: Vec<&SpacerGrowthRow> = rows.iter().filter(|r| r.n >= cq.start).collect();
    let growth = SpacerGrowthReport {
        holds: !tested.is_empty() && tested.iter().all(|r| r.spacer_growth && r.height_ratio_ok),
        query: cq,
        rows,
    };

    let searches: Vec<ApSearch> = (big_n..=query.jmax)
        .map(|j| {
            Ok(ap_search(
                &descendants_in(&tower, base, j)?,
                query.kappa + 1,
            ))
        })
        .collect::<Result<_>>()?;
    let ap: Vec<ApRow> = searches
        .iter()
        .enumerate()
        .map(|(t, s)| ApRow {
            stage: big_n + t,
            longest: s.longest,
            witness: s.witness_progression(),
        })
        .collect();
    let ap_free = ap.iter().all(|r| r.longest <= query.kappa);
    let replay: Vec<CaseReplay> = searches
        .windows(2)
        .enumerate()
        .map(|(t, w)| replay_step(&tower, base, big_n + t, query.kappa, &w[0], &w[1]))
        .collect();
    let verdict = if !ap_free {
        Verdict::Fails
    } else if proof_bound_holds {
        Verdict::Holds
    } else {
        Verdict::Inconclusive
    };
    Ok(NpcOutcome {
        query,
        hineq_ratios,
        hineq_threshold_met,
        proof_ratios,
        proof_sup,
        proof_bound_holds,
        growth,
        ap,
        ap_free,
        replay,
        verdict,
        spec: spec.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::make_inf_chacon;

    fn query(kappa: u32, n_base: usize, jmax: usize) -> NpcQuery {
        NpcQuery {
            kappa,
            n_base,
            jmax,
            growth: SpacerGrowthQuery::default(),
        }
    }

    #[test]
    fn chacon_ratios() {
        let spec = make_inf_chacon(3, 1, 6, 2).unwrap();
        let out = npc_certificate(&spec, query(13, 0, 5)).unwrap();
        let hineq: Vec<Fraction> = out.hineq_ratios[..3]
            .iter()
            .map(|r| r.value.clone().unwrap())
            .collect();
        assert_eq!(
            hineq,
            vec![
                Fraction::new(2, 3),
                Fraction::new(1, 2),
                Fraction::new(60, 121)
            ]
        );
        assert_eq!(out.proof_ratios[2].value, Some(Fraction::new(121, 10)));
        assert_eq!(out.proof_sup, Some(Fraction::new(121, 10)));
        assert!(out.ap_free);
        assert!(out.replay.iter().all(|r| r.agrees));
        assert_eq!(out.verdict, Verdict::Holds);
        assert!(out.growth.holds);
        assert!(!out.growth.rows[0].height_ratio_ok);
    }

    #[test]
    fn short_progressions_are_found() {
        let spec = make_inf_chacon(3, 1, 6, 2).unwrap();
        let out = npc_certificate(&spec, query(1, 1, 3)).unwrap();
        assert_eq!(out.verdict, Verdict::Fails);
        assert!(out.ap.last().unwrap().longest >= 2);
    }
}
