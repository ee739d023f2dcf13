//! Certificates against independent oracles.

use ranklab::certificates::{
    asymmetry_statistic, conservativity_fraction, ergodic_matching, match_witness, matching_count,
    mixing_decay, non_ergodic_check, npc_certificate, pattern_measure, pwm_witness, Budget,
    MixingQuery, NpcQuery, PatternQuery, SpacerGrowthQuery, Verdict,
};
use ranklab::sumsets::{decompose, descendants_in};
use ranklab::{
    make_asymm_construction, make_inf_chacon, make_tq, separation_check, AsymmParams,
    ConservativeIndex, Fraction, LevelRef, Measure, TqParams,
};

/// Tuples `a ∈ D^v` with some `d ∈ D^v` and `n` (nonzero if asked) such that
/// `a_ℓ - d_ℓ - b_ℓ = α_ℓ n`, by trying every `d_0`.
fn oracle_matched(d: &[i64], alpha: &[i64], b: &[i64], nonzero: bool) -> u64 {
    let v = alpha.len();
    let mut count = 0;
    let mut idx = vec![0usize; v];
    loop {
        let a: Vec<i64> = idx.iter().map(|&t| d[t]).collect();
        let hit = d.iter().any(|&d0| {
            let diff = a[0] - d0 - b[0];
            if diff % alpha[0] != 0 {
                return false;
            }
            let n = diff / alpha[0];
            (!nonzero || n != 0) && (1..v).all(|l| d.contains(&(a[l] - b[l] - alpha[l] * n)))
        });
        count += u64::from(hit);
        let mut t = 0;
        loop {
            if t == v {
                return count;
            }
            idx[t] += 1;
            if idx[t] < d.len() {
                break;
            }
            idx[t] = 0;
            t += 1;
        }
    }
}

#[test]
fn conservativity_fraction_matches_oracle() {
    let spec = make_inf_chacon(3, 1, 6, 2).unwrap();
    let out = conservativity_fraction(
        &spec,
        &[1, 1],
        0,
        1..=3,
        &Measure::ratio(1, 10),
        Budget::default(),
    )
    .unwrap();
    let tower = spec.tower(3).unwrap();
    for row in &out.stages {
        let d = descendants_in(&tower, LevelRef::new(0, 0), row.stage).unwrap();
        assert_eq!(row.matched, oracle_matched(&d, &[1, 1], &[0, 0], true));
        assert_eq!(row.diagonal_fraction, Measure::one());
    }
    assert_eq!(out.fraction_at(2), Some(&Measure::ratio(65, 81)));
    let single = conservativity_fraction(
        &spec,
        &[1],
        0,
        1..=3,
        &Measure::ratio(1, 10),
        Budget::default(),
    )
    .unwrap();
    assert!(single.stages.iter().all(|r| r.fraction == Measure::one()));
}

#[test]
fn tuple_counts_match_oracle() {
    let (spec, _) = make_tq(4, 1, vec![1]).unwrap();
    let tower = spec.tower(2).unwrap();
    let d = descendants_in(&tower, LevelRef::new(0, 0), 2).unwrap();
    for (alpha, b) in [
        (vec![1, 2], vec![0, 0]),
        (vec![2, -3], vec![0, 1]),
        (vec![1, 1, 1], vec![0, 1, 2]),
        (vec![-1, 2, 3], vec![2, 0, 1]),
    ] {
        for nonzero in [false, true] {
            let got = matching_count(&d, &alpha, &b, nonzero, Budget::default()).unwrap();
            assert_eq!(
                got.matched,
                oracle_matched(&d, &alpha, &b, nonzero),
                "{alpha:?} {b:?}"
            );
        }
    }
}

#[test]
fn symmetric_matching_witnesses_verify() {
    let spec = make_inf_chacon(3, 1, 6, 2).unwrap();
    let level = LevelRef::new(1, 0);
    let check = |sig: &[i64], b: &[i64], j: usize, w: &ranklab::certificates::MatchWitness| {
        let tower = spec.tower(j).unwrap();
        for l in 0..sig.len() {
            assert_eq!(sig[l] * (w.a[l] - w.d[l] - b[l]), w.shift);
            assert_eq!(
                decompose(&tower, level, j, w.a[l]).as_ref(),
                Some(&w.a_summands[l])
            );
            assert_eq!(
                decompose(&tower, level, j, w.d[l]).as_ref(),
                Some(&w.d_summands[l])
            );
        }
    };
    for sig in [vec![1i64, -1], vec![-1, 1], vec![1, 1, -1]] {
        for b0 in 0..=2 {
            for b1 in 0..=2 {
                let mut b = vec![b0, b1];
                b.resize(sig.len(), 1);
                if sig.len() == 2 {
                    let out = ergodic_matching(&spec, &sig, &b, 1, 4, Budget::default()).unwrap();
                    assert_eq!(out.injective, Some(true), "{sig:?} {b:?}");
                    if let Some(w) = &out.witness {
                        check(&sig, &b, 4, w);
                    }
                }
                let gamma: i64 = (1..sig.len())
                    .map(|l| (b[0] - sig[0] * sig[l] * b[l]).abs())
                    .sum();
                let j = 2 + gamma.max(1) as usize;
                let w = match_witness(&spec, &sig, &b, 1, j).unwrap();
                check(&sig, &b, j, &w);
            }
        }
    }
}

#[test]
fn pattern_measure_agrees_with_enumeration() {
    let spec = make_inf_chacon(3, 1, 6, 2).unwrap();
    for (sig, b, j) in [
        (vec![1, 1], vec![0, 1], 2),
        (vec![1, 1], vec![0, 2], 3),
        (vec![1, -1], vec![1, 1], 4),
    ] {
        let m = ergodic_matching(&spec, &sig, &b, 1, j, Budget::default()).unwrap();
        let p = pattern_measure(
            &spec,
            PatternQuery {
                signature: sig,
                b,
                base_stage: 1,
                cutoff: j,
                dconst: None,
            },
        )
        .unwrap();
        assert_eq!(p.mu_w.confirmed, m.fraction);
        assert_eq!(p.verdict, Verdict::Holds);
    }
}

#[test]
fn all_but_last_never_matches() {
    let (spec, _) = make_tq(3, 2, vec![0, 1]).unwrap();
    let out = non_ergodic_check(&spec, &[1, 1], &[0, 1], 0, 1..=5, 12, Budget::default()).unwrap();
    assert!(out.growth_holds);
    assert!(out
        .stages
        .iter()
        .all(|r| r.matched == 0 && r.congruence_obstruction));
    assert_eq!(out.verdict, Verdict::Fails);
}

#[test]
fn npc_replay_agrees_with_search() {
    let spec = make_inf_chacon(3, 1, 6, 2).unwrap();
    for n_base in 0..=2 {
        let out = npc_certificate(
            &spec,
            NpcQuery {
                kappa: 13,
                n_base,
                jmax: n_base + 5,
                growth: SpacerGrowthQuery::default(),
            },
        )
        .unwrap();
        assert!(out.ap_free);
        assert!(out.replay.iter().all(|r| r.agrees && r.premises_hold));
        assert_eq!(out.verdict, Verdict::Holds);
    }
    let out = npc_certificate(
        &spec,
        NpcQuery {
            kappa: 13,
            n_base: 0,
            jmax: 3,
            growth: SpacerGrowthQuery {
                k: 0,
                b: Fraction::new(1, 13),
                start: 1,
            },
        },
    )
    .unwrap();
    assert_eq!(out.hineq_ratios[2].value, Some(Fraction::new(60, 121)));
}

#[test]
fn pwm_witness_sweep() {
    let params = TqParams::new(4, 1, vec![1]).unwrap();
    for alpha in [vec![2], vec![-3], vec![2, -3], vec![1, 2, 3]] {
        let v = alpha.len() + 1;
        for code in 0..3usize.pow(v as u32) {
            let b: Vec<i64> = (0..v)
                .map(|q| (code / 3usize.pow(q as u32) % 3) as i64)
                .collect();
            for n in 1..=2 {
                let w = pwm_witness(&params, &alpha, &b, n, 6).unwrap();
                let m = &w.witness;
                for q in 1..v {
                    assert_eq!(
                        m.a[q] - m.d[q],
                        alpha[q - 1] * (m.a[0] - m.d[0] - b[0]) + b[q]
                    );
                }
                assert!(w.plans.iter().skip(1).all(|p| p.r_value >= 1));
            }
        }
    }
}

#[test]
fn asymmetry_zero_side_vanishes() {
    let spec = make_inf_chacon(3, 1, 6, 2).unwrap();
    let mut prev = None;
    for j in 3..=7 {
        let out = asymmetry_statistic(&spec, LevelRef::new(1, 0), 1, j).unwrap();
        assert!(out.zero_exact);
        assert!(out.forward_side.confirmed >= Measure::ratio(1, 3));
        if let Some(p) = prev {
            assert!(out.zero_side.upper() <= p);
        }
        prev = Some(out.zero_side.upper());
    }
}

#[test]
fn mixing_bound_on_generated_spec() {
    let spec =
        make_asymm_construction(AsymmParams::new(2, ConservativeIndex::Finite(3), 6)).unwrap();
    let tower = spec.tower(6).unwrap();
    for n in (0..5).step_by(2) {
        assert!(separation_check(tower.height_set(n), tower.height(n), 1, None).holds());
        let out = mixing_decay(&spec, MixingQuery::new(vec![LevelRef::new(0, 0)], n)).unwrap();
        assert!(out.hypothesis_holds);
        assert!(out.rows.iter().all(|r| r.in_window && r.within_bound));
    }
}
