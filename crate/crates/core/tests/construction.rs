//! Tower bookkeeping against an explicit cut-and-stack simulation.

use proptest::prelude::*;
use ranklab::construction::intersection_in;
use ranklab::sumsets::{descendants_in, max_descendant};
use ranklab::{
    column_stats, height_set, image_of_level, intersection_measure, make_inf_chacon, make_tq,
    validate_spec, LevelRef, Measure, RankOneSpec, RawSpec,
};

/// Cuts a column of marked levels into `r` pieces, stacks them left to right
/// with the given spacer runs on top of each, and returns the new column.
fn cut_and_stack(column: &[bool], spacers: &[i64]) -> Vec<bool> {
    let mut next = Vec::new();
    for &s in spacers {
        next.extend_from_slice(column);
        next.extend(std::iter::repeat_n(false, s as usize));
    }
    next
}

/// Heights in `C_j` of the pieces of the level at `height` in `C_i`, found by
/// marking that level and restacking.
fn oracle_descendants(spec: &RankOneSpec, i: usize, height: i64, j: usize) -> Vec<i64> {
    let tower = spec.tower(j).unwrap();
    let mut marked: Vec<bool> = (0..tower.height(i)).map(|p| p == height).collect();
    for q in i..j {
        marked = cut_and_stack(&marked, tower.stage(q).spacers());
    }
    marked
        .iter()
        .enumerate()
        .filter(|(_, &m)| m)
        .map(|(p, _)| p as i64)
        .collect()
}

/// Column lengths `|C_0|, ..., |C_n|` by explicit stacking.
fn simulated_heights(spec: &RankOneSpec, n: usize) -> Vec<i64> {
    let tower = spec.tower(n).unwrap();
    let mut column = vec![false; spec.h0() as usize];
    let mut out = vec![column.len() as i64];
    for q in 0..n {
        column = cut_and_stack(&column, tower.stage(q).spacers());
        out.push(column.len() as i64);
    }
    out
}

fn specs() -> Vec<(&'static str, RankOneSpec)> {
    let dyadic: RawSpec =
        serde_json::from_str(r#"{"stages":[{"r":2,"s":[0,0]}],"extension":"repeat-last"}"#)
            .unwrap();
    vec![
        ("chacon", make_inf_chacon(3, 1, 6, 2).unwrap()),
        ("tq41", make_tq(4, 1, vec![1]).unwrap().0),
        ("dyadic", validate_spec(&dyadic).unwrap()),
        ("all-but-last", make_tq(3, 2, vec![0, 1]).unwrap().0),
    ]
}

#[test]
fn heights_match_simulation() {
    for (name, spec) in specs() {
        let depth = if name == "dyadic" { 8 } else { 5 };
        let tower = spec.tower(depth).unwrap();
        assert_eq!(simulated_heights(&spec, depth), tower.heights(), "{name}");
        for n in 0..depth {
            let st = tower.stage(n);
            let sum: i64 = st.spacers().iter().sum();
            assert_eq!(
                tower.height(n + 1),
                st.cuts() as i64 * tower.height(n) + sum
            );
            let hs = tower.height_set(n);
            assert_eq!(
                hs.last().unwrap() + tower.height(n) + st.top_spacers(),
                tower.height(n + 1)
            );
        }
    }
}

#[test]
fn height_recursion_to_stage_eight() {
    for (name, spec) in specs() {
        let tower = spec.tower(8).unwrap();
        for n in 0..8 {
            let st = tower.stage(n);
            let sum: i64 = st.spacers().iter().sum();
            assert_eq!(
                tower.height(n + 1),
                st.cuts() as i64 * tower.height(n) + sum,
                "{name}"
            );
            let hs = height_set(&spec, n).unwrap();
            assert_eq!(hs.offsets.len(), st.cuts(), "{name}");
        }
    }
}

#[test]
fn descendants_match_simulation() {
    for (name, spec) in specs() {
        let depth = if name == "dyadic" { 7 } else { 4 };
        let tower = spec.tower(depth).unwrap();
        for i in 0..depth {
            for height in [0, tower.height(i) - 1, tower.height(i) / 2] {
                let level = LevelRef::new(i, height);
                for j in i..=depth {
                    let got = descendants_in(&tower, level, j).unwrap();
                    let want = oracle_descendants(&spec, i, height, j);
                    assert_eq!(got, want, "{name} I=({i},{height}) j={j}");
                    assert_eq!(got.len() as u128, tower.descendant_count(i, j));
                    assert_eq!(max_descendant(&tower, level, j), *got.last().unwrap());
                }
            }
        }
    }
}

#[test]
fn sublevel_widths_add_up() {
    for (name, spec) in specs() {
        let tower = spec.tower(8).unwrap();
        for i in 0..3 {
            for j in i..=(i + 5).min(8) {
                let pieces = descendants_in(&tower, LevelRef::new(i, 0), j).unwrap();
                let total = &tower.level_width(j) * pieces.len() as u64;
                assert_eq!(total, tower.level_width(i), "{name} {i}->{j}");
            }
        }
        for n in 0..8 {
            let stats = column_stats(&spec, n).unwrap();
            let next = column_stats(&spec, n + 1).unwrap();
            let added: i64 = tower.stage(n).spacers().iter().sum();
            let spacer_mass = &next.level_width * added as u64;
            assert_eq!(
                next.total_measure,
                &stats.total_measure + &spacer_mass,
                "{name}"
            );
        }
    }
}

#[test]
fn images_preserve_width() {
    let spec = make_inf_chacon(3, 1, 6, 2).unwrap();
    for m in [-60, -9, 0, 1, 8, 9, 17, 40, 300] {
        for j in 1..5 {
            let img = image_of_level(&spec, LevelRef::new(1, 3), m, j).unwrap();
            let total = &img.resolved_measure + &img.unresolved_measure;
            assert_eq!(total, Measure::ratio(1, 3), "m={m} j={j}");
        }
    }
}

#[test]
fn refinement_is_monotone() {
    let spec = make_inf_chacon(3, 1, 6, 2).unwrap();
    let tower = spec.tower(7).unwrap();
    let lists: [&[i64]; 5] = [
        &[0, 9, 17],
        &[0, 8, 17],
        &[0, 1],
        &[0, 50, 100],
        &[3, -4, 20],
    ];
    for level in [
        LevelRef::new(1, 0),
        LevelRef::new(1, 5),
        LevelRef::new(2, 11),
    ] {
        for exps in lists {
            let mut prev = intersection_in(&tower, level, exps, level.stage).unwrap();
            for j in level.stage + 1..=7 {
                let cur = intersection_in(&tower, level, exps, j).unwrap();
                assert!(cur.interval.confirmed >= prev.interval.confirmed);
                assert!(cur.interval.unresolved <= prev.interval.unresolved);
                assert!(cur.interval.unresolved <= cur.unresolved_bound);
                prev = cur;
            }
        }
    }
}

#[test]
fn family_closed_forms() {
    for (t, q, m1, m0) in [(3, 1, 6, 2), (3, 2, 6, 2), (4, 1, 8, 1), (5, 3, 11, 4)] {
        let spec = make_inf_chacon(t, q, m1, m0).unwrap();
        let tower = spec.tower(9).unwrap();
        for n in 0..=8 {
            let h = tower.height(n);
            let want: Vec<i64> = (0..t).map(|x| x * h + i64::from(x >= q)).collect();
            assert_eq!(tower.height_set(n), want.as_slice());
            assert_eq!(tower.height(n + 1), m1 * h + m0);
        }
    }
    for (t, q, pos) in [(4, 1, vec![1]), (3, 2, vec![0, 1]), (5, 2, vec![0, 3])] {
        let (spec, params) = make_tq(t, q, pos).unwrap();
        let k = params.k();
        let tower = spec.tower(9).unwrap();
        for n in 0..=8 {
            let h: i64 = (0..=n as u32).map(|i| k.pow(i)).sum();
            assert_eq!(tower.height(n), h);
            assert_eq!(*tower.height_set(n).last().unwrap(), (k - 1) * h);
            let want: Vec<i64> = params.phi().iter().map(|p| p * h).collect();
            assert_eq!(tower.height_set(n), want.as_slice());
        }
    }
}

#[test]
fn top_offset_ratio_approaches_limit() {
    let (t, m1) = (3i64, 6i64);
    let spec = make_inf_chacon(t, 1, m1, 2).unwrap();
    let tower = spec.tower(10).unwrap();
    let ratio = *tower.height_set(9).last().unwrap() as f64 / tower.height(8) as f64;
    let limit = ((t - 1) * m1) as f64;
    assert!((ratio - limit).abs() / limit < 0.01, "{ratio}");
}

#[test]
fn all_but_last_differences_are_even() {
    let (spec, _) = make_tq(3, 2, vec![0, 1]).unwrap();
    let tower = spec.tower(6).unwrap();
    for j in 0..=6 {
        let d = descendants_in(&tower, LevelRef::new(0, 0), j).unwrap();
        assert!(d.iter().all(|x| (x - d[0]) % 2 == 0), "j={j}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn translation_invariance(
        exps in proptest::collection::vec(-30i64..30, 1..4),
        c in -20i64..20,
        height in 0i64..8,
    ) {
        let spec = make_inf_chacon(3, 1, 6, 2).unwrap();
        let level = LevelRef::new(1, height);
        let shifted: Vec<i64> = exps.iter().map(|m| m + c).collect();
        let a = intersection_measure(&spec, level, &exps, 5).unwrap();
        let b = intersection_measure(&spec, level, &shifted, 5).unwrap();
        prop_assert_eq!(a.interval, b.interval);
    }

    #[test]
    fn random_explicit_specs_match_simulation(
        stages in proptest::collection::vec(
            (2usize..4).prop_flat_map(|r| proptest::collection::vec(0i64..4, r)),
            1..4,
        ),
        h0 in 1i64..3,
    ) {
        let raw = serde_json::json!({
            "stages": stages.iter().map(|s| serde_json::json!({"r": s.len(), "s": s})).collect::<Vec<_>>(),
            "h0": h0,
        });
        let spec = validate_spec(&serde_json::from_value(raw).unwrap()).unwrap();
        let depth = stages.len();
        let tower = spec.tower(depth).unwrap();
        for i in 0..depth {
            for height in 0..tower.height(i) {
                let got = descendants_in(&tower, LevelRef::new(i, height), depth).unwrap();
                prop_assert_eq!(got, oracle_descendants(&spec, i, height, depth));
            }
        }
    }
}
