use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::measure::Measure;

/// Spans up to this size use a dense table instead of hashing.
const DENSE_SPAN: i64 = 1 << 26;

/// Multiplicities of `d0 - d1` over ordered pairs of `D`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DifferenceMultiset {
    pub counts: BTreeMap<i64, u64>,
}

impl DifferenceMultiset {
    pub fn count(&self, v: i64) -> u64 {
        self.counts.get(&v).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }
}

fn span(d: &[i64]) -> i64 {
    match (d.iter().min(), d.iter().max()) {
        (Some(lo), Some(hi)) => hi - lo,
        _ => 0,
    }
}

pub fn difference_multiset(d: &[i64]) -> DifferenceMultiset {
    let s = span(d);
    let mut counts = BTreeMap::new();
    if s <= DENSE_SPAN {
        let mut dense = vec![0u64; 2 * s as usize + 1];
        for &a in d {
            for &b in d {
                dense[(a - b + s) as usize] += 1;
            }
        }
        for (i, &c) in dense.iter().enumerate() {
            if c > 0 {
                counts.insert(i as i64 - s, c);
            }
        }
    } else {
        let mut map: HashMap<i64, u64> = HashMap::new();
        for &a in d {
            for &b in d {
                *map.entry(a - b).or_default() += 1;
            }
        }
        counts.extend(map);
    }
    DifferenceMultiset { counts }
}

/// Sorted distinct positive elements of `D - D`.
pub fn positive_differences(d: &[i64]) -> Vec<i64> {
    let s = span(d);
    if s <= DENSE_SPAN {
        let mut seen = vec![false; s as usize + 1];
        for &a in d {
            for &b in d {
                if a > b {
                    seen[(a - b) as usize] = true;
                }
            }
        }
        seen.iter()
            .enumerate()
            .filter(|(_, &v)| v)
            .map(|(i, _)| i as i64)
            .collect()
    } else {
        let mut out: Vec<i64> = d
            .iter()
            .flat_map(|&a| d.iter().filter(move |&&b| a > b).map(move |&b| a - b))
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PartnerSide {
    /// `x - z ∈ H`: members have a partner `z` below them.
    #[default]
    Lower,
    /// `x + z ∈ H`.
    Upper,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PartnerSet {
    pub z: i64,
    pub side: PartnerSide,
    pub members: Vec<i64>,
    pub delta: Measure,
}

/// `S(z) = {x ∈ H : x - z ∈ H}`.
pub fn partner_set(hs: &[i64], z: i64) -> PartnerSet {
    partner_set_with(hs, z, PartnerSide::Lower)
}

pub fn partner_set_with(hs: &[i64], z: i64, side: PartnerSide) -> PartnerSet {
    let partner = |x: i64| match side {
        PartnerSide::Lower => x.checked_sub(z),
        PartnerSide::Upper => x.checked_add(z),
    };
    let members: Vec<i64> = hs
        .iter()
        .copied()
        .filter(|&x| partner(x).is_some_and(|p| hs.binary_search(&p).is_ok()))
        .collect();
    let delta = Measure::ratio(members.len() as u64, hs.len().max(1) as u64);
    PartnerSet {
        z,
        side,
        members,
        delta,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ApRun {
    pub x: i64,
    pub length: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ApSearch {
    pub max_len: u32,
    /// Largest `ℓ <= max_len` with `{x, 2x, ..., ℓx} ⊆ D - D` for some `x > 0`.
    pub longest: u32,
    /// Smallest `x` attaining `longest`.
    pub witness: Option<i64>,
    /// Run length for every positive element of `D - D`.
    pub table: Vec<ApRun>,
}

impl ApSearch {
    pub fn length_at(&self, x: i64) -> u32 {
        self.table
            .binary_search_by_key(&x, |r| r.x)
            .map(|i| self.table[i].length)
            .unwrap_or(0)
    }

    pub fn witness_progression(&self) -> Vec<i64> {
        self.witness
            .map(|x| (1..=self.longest as i64).map(|i| i * x).collect())
            .unwrap_or_default()
    }
}

/// Progressions `{x, ..., ℓx}` inside `D - D`, exhaustive over positive differences.
pub fn ap_search(d: &[i64], max_len: u32) -> ApSearch {
    let pos = positive_differences(d);
    let top = pos.last().copied().unwrap_or(0);
    let mut member = vec![false; top as usize + 1];
    for &v in &pos {
        member[v as usize] = true;
    }
    let table: Vec<ApRun> = pos
        .iter()
        .map(|&x| {
            let mut length = 0u32;
            while length < max_len {
                let next = x * (length as i64 + 1);
                if next > top || !member[next as usize] {
                    break;
                }
                length += 1;
            }
            ApRun { x, length }
        })
        .collect();
    let longest = table.iter().map(|r| r.length).max().unwrap_or(0);
    let witness = table.iter().find(|r| r.length == longest).map(|r| r.x);
    ApSearch {
        max_len,
        longest,
        witness: witness.filter(|_| longest > 0),
        table,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_multiset() {
        let m = difference_multiset(&[0, 2, 3]);
        assert_eq!(m.count(0), 3);
        for v in 1..=3 {
            assert_eq!(m.count(v), 1);
            assert_eq!(m.count(-v), 1);
        }
        assert_eq!(m.total(), 9);
        assert_eq!(difference_multiset(&[7]).counts, BTreeMap::from([(0, 1)]));
    }

    #[test]
    fn partner_examples() {
        let h = [0, 9, 17];
        let s8 = partner_set(&h, 8);
        assert_eq!(s8.members, vec![17]);
        assert_eq!(s8.delta, Measure::ratio(1, 3));
        assert_eq!(partner_set(&h, 9).members, vec![9]);
        assert_eq!(partner_set(&h, 0).members, h.to_vec());
        assert_eq!(partner_set_with(&h, 9, PartnerSide::Upper).members, vec![0]);
    }

    #[test]
    fn ap_examples() {
        let none = ap_search(&[4], 5);
        assert_eq!(none.longest, 0);
        assert_eq!(none.witness, None);
        let dyadic = ap_search(&[0, 1, 2, 3], 14);
        assert_eq!((dyadic.longest, dyadic.witness), (3, Some(1)));
        let capped = ap_search(&[0, 1, 2, 3], 2);
        assert_eq!(capped.longest, 2);
        assert_eq!(capped.witness_progression(), vec![1, 2]);
    }
}
