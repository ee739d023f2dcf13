//! Symmetric-product matching built on partner stages.
//!
//! A partner stage `q` has a gap `z` with `S(z)` and `S(z+1)` nonempty and of
//! equal size (`S(z) = {x ∈ H_q : x - z ∈ H_q}`). For a signature `σ` (with
//! `σ_0 = +1` after a global flip) the target relation is
//! `a_0 - d_0 - b_0 = σ_ℓ (a_ℓ - d_ℓ - b_ℓ)`. Writing `e = a - d` per stage,
//! it suffices to make `Σ_q (e_{0,q} - σ_ℓ e_{ℓ,q}) = c_ℓ := b_0 - σ_ℓ b_ℓ`.
//! One move `(ℓ, +)` at a partner stage sets `e_0 = z + 1`, `e_ℓ = σ_ℓ z` and
//! `e_{ℓ'} = σ_{ℓ'} e_0` elsewhere, shifting `c_ℓ` by one and nothing else;
//! `(ℓ, -)` swaps the roles of `z` and `z + 1`. The pattern is `|c_ℓ|` moves
//! of sign `sgn c_ℓ` for `ℓ = 1, ..., k-1` in order. A tuple is matched when
//! its first `γ` hits of `F = (S(z) ∪ S(z+1) ∪ S(z)-z ∪ S(z+1)-z-1)^k` follow
//! the pattern; `d` differs from `a` only at those stages.

use std::collections::HashMap;

use serde::Serialize;

use super::{Budget, Certificate, CertificateKind, Verdict};
use crate::construction::{tower_for, LevelRef};
use crate::error::{Error, Result};
use crate::measure::{Measure, MeasureInterval};
use crate::spec::{RankOneSpec, Tower};
use crate::sumsets::{decompose, descendants_in, partner_set};

/// Injectivity of `a ↦ d` is checked when the tuple count is at most this.
const INJECTIVITY_LIMIT: u64 = 1 << 24;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PartnerStage {
    pub stage: usize,
    pub z: i64,
    pub lower: Vec<i64>,
    pub upper: Vec<i64>,
    /// `|S(z)| / |H|`.
    pub delta: Measure,
}

/// Smallest `z >= 1` with `S(z)` and `S(z+1)` nonempty and equally large.
pub fn partner_stage(hs: &[i64], stage: usize) -> Option<PartnerStage> {
    let mut diffs: Vec<i64> = hs
        .iter()
        .flat_map(|&x| hs.iter().filter(move |&&y| y < x).map(move |&y| x - y))
        .collect();
    diffs.sort_unstable();
    diffs.dedup();
    diffs.iter().find_map(|&z| {
        if diffs.binary_search(&(z + 1)).is_err() {
            return None;
        }
        let lower = partner_set(hs, z);
        let upper = partner_set(hs, z + 1);
        (lower.members.len() == upper.members.len()).then(|| PartnerStage {
            stage,
            z,
            delta: lower.delta.clone(),
            lower: lower.members,
            upper: upper.members,
        })
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Move {
    pub coordinate: usize,
    pub sign: i8,
}

/// Per-coordinate `e = a - d` of a move at gap `z`.
fn move_shifts(mv: Move, sigma: &[i64], z: i64) -> Vec<i64> {
    let (e0, el) = if mv.sign > 0 { (z + 1, z) } else { (z, z + 1) };
    (0..sigma.len())
        .map(|l| match l {
            0 => e0,
            l if l == mv.coordinate => sigma[l] * el,
            l => sigma[l] * e0,
        })
        .collect()
}

struct Normalized {
    sigma: Vec<i64>,
    pattern: Vec<Move>,
}

fn normalize(signature: &[i64], b: &[i64]) -> Result<Normalized> {
    if signature.is_empty() || signature.len() != b.len() {
        return Err(Error::ParamOutOfRange(
            "signature and b must have equal nonzero length".into(),
        ));
    }
    if signature.iter().any(|s| s.abs() != 1) {
        return Err(Error::ParamOutOfRange(
            "signature entries must be +1 or -1".into(),
        ));
    }
    let flip = signature[0];
    let sigma: Vec<i64> = signature.iter().map(|s| s * flip).collect();
    let mut pattern = Vec::new();
    for l in 1..sigma.len() {
        let c = b[0] - sigma[l] * b[l];
        let sign = if c > 0 { 1 } else { -1 };
        pattern.extend(std::iter::repeat_n(
            Move {
                coordinate: l,
                sign,
            },
            c.unsigned_abs() as usize,
        ));
    }
    Ok(Normalized { sigma, pattern })
}

struct StageSets {
    stage: usize,
    z: i64,
    hs: Vec<i64>,
    /// `S(z) ∪ S(z+1) ∪ S(z)-z ∪ S(z+1)-z-1`, sorted.
    union: Vec<i64>,
}

impl StageSets {
    fn new(tower: &Tower, p: &PartnerStage) -> Self {
        let z = p.z;
        let mut union: Vec<i64> = p
            .lower
            .iter()
            .chain(&p.upper)
            .copied()
            .chain(p.lower.iter().map(|x| x - z))
            .chain(p.upper.iter().map(|x| x - z - 1))
            .collect();
        union.sort_unstable();
        union.dedup();
        StageSets {
            stage: p.stage,
            z,
            hs: tower.height_set(p.stage).to_vec(),
            union,
        }
    }

    fn in_h(&self, x: i64) -> bool {
        self.hs.binary_search(&x).is_ok()
    }

    fn in_f(&self, x: &[i64]) -> bool {
        x.iter().all(|v| self.union.binary_search(v).is_ok())
    }

    /// Number of `x ∈ H^k` accepting the given shifts.
    fn e_size(&self, shifts: &[i64]) -> u64 {
        shifts
            .iter()
            .map(|&e| self.hs.iter().filter(|&&x| self.in_h(x - e)).count() as u64)
            .product()
    }

    fn f_size(&self, k: usize) -> u64 {
        (self.union.len() as u64).pow(k as u32)
    }
}

fn partner_stages(tower: &Tower, from: usize, to: usize) -> Vec<PartnerStage> {
    (from..to)
        .filter_map(|q| partner_stage(tower.height_set(q), q))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MatchWitness {
    pub a: Vec<i64>,
    pub d: Vec<i64>,
    /// Summands of each coordinate, stages `i..j`.
    pub a_summands: Vec<Vec<i64>>,
    pub d_summands: Vec<Vec<i64>>,
    /// `(stage, move)` for every stage where `d` differs from `a`.
    pub moves: Vec<(usize, Move)>,
    /// `(a_ℓ - d_ℓ - b_ℓ) / σ_ℓ`, all equal.
    pub residuals: Vec<i64>,
    /// The common residual `n` with `a_ℓ = d_ℓ + b_ℓ + α_ℓ n`.
    pub shift: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MatchOutcome {
    pub signature: Vec<i64>,
    pub b: Vec<i64>,
    pub base_stage: usize,
    pub stage: usize,
    pub partner_stages: Vec<PartnerStage>,
    pub pattern: Vec<Move>,
    pub gamma: usize,
    pub matched: u64,
    pub total: u64,
    pub fraction: Measure,
    /// `4^{-kγ}`, the fraction guaranteed in the limit.
    pub target_fraction: Measure,
    pub injective: Option<bool>,
    pub witness: Option<MatchWitness>,
    pub verdict: Verdict,
    #[serde(skip)]
    spec: RankOneSpec,
}

impl MatchOutcome {
    pub fn certificate(&self) -> Certificate {
        Certificate::build(
            CertificateKind::ErgodicFraction,
            Some(&self.spec),
            serde_json::json!({
                "signature": self.signature,
                "b": self.b,
                "baseStage": self.base_stage,
                "stage": self.stage,
            }),
            self.verdict,
            self,
        )
    }
}

fn check_shifts(tower: &Tower, i: usize, b: &[i64]) -> Result<()> {
    let h = tower.height(i);
    match b.iter().find(|x| !(0..h).contains(*x)) {
        Some(x) => Err(Error::ParamOutOfRange(format!("shift {x} outside 0..{h}"))),
        None => Ok(()),
    }
}

type Assigned = Vec<(usize, Move, Vec<i64>)>;

/// Scans partner stages in order; the first `γ` hits of `F` must follow the
/// pattern. `rows(pos)` gives the summands at stage `i + pos`.
fn assign(
    sets: &[StageSets],
    pattern: &[Move],
    sigma: &[i64],
    i: usize,
    rows: impl Fn(usize) -> Vec<i64>,
) -> Option<Assigned> {
    let mut moves = Vec::with_capacity(pattern.len());
    for set in sets {
        if moves.len() == pattern.len() {
            break;
        }
        let x = rows(set.stage - i);
        if !set.in_f(&x) {
            continue;
        }
        let mv = pattern[moves.len()];
        let e = move_shifts(mv, sigma, set.z);
        if !x.iter().zip(&e).all(|(&xv, &ev)| set.in_h(xv - ev)) {
            return None;
        }
        moves.push((set.stage, mv, e));
    }
    (moves.len() == pattern.len()).then_some(moves)
}

/// Builds `d` from `a` and re-checks the signed relation and that every
/// coordinate of `d` is a descendant.
#[allow(clippy::too_many_arguments)]
fn verify(
    tower: &Tower,
    level: LevelRef,
    j: usize,
    signature: &[i64],
    b: &[i64],
    a: Vec<i64>,
    a_summands: Vec<Vec<i64>>,
    moves: &Assigned,
) -> Result<MatchWitness> {
    let k = a.len();
    let mut d = a.clone();
    for (_, _, e) in moves {
        for l in 0..k {
            d[l] -= e[l];
        }
    }
    let residuals: Vec<i64> = (0..k)
        .map(|l| signature[l] * (a[l] - d[l] - b[l]))
        .collect();
    if residuals.iter().any(|&r| r != residuals[0]) {
        return Err(Error::InvalidWitness(format!(
            "a = {a:?}, d = {d:?}: residuals {residuals:?} differ"
        )));
    }
    let d_summands: Option<Vec<Vec<i64>>> =
        d.iter().map(|&x| decompose(tower, level, j, x)).collect();
    let Some(d_summands) = d_summands else {
        return Err(Error::InvalidWitness(format!(
            "d = {d:?} is not a descendant tuple"
        )));
    };
    Ok(MatchWitness {
        a,
        d,
        a_summands,
        d_summands,
        moves: moves.iter().map(|(q, mv, _)| (*q, *mv)).collect(),
        shift: residuals[0],
        residuals,
    })
}

/// Builds one matched tuple directly: at each of the first `γ` partner stages
/// pick, per coordinate, the smallest offset accepting the pattern's move, and
/// offset 0 everywhere else. Needs no enumeration, so it reaches deep patterns.
pub fn match_witness(
    spec: &RankOneSpec,
    signature: &[i64],
    b: &[i64],
    i: usize,
    j: usize,
) -> Result<MatchWitness> {
    let Normalized { sigma, pattern } = normalize(signature, b)?;
    let level = LevelRef::new(i, 0);
    let tower = tower_for(spec, level, j)?;
    check_shifts(&tower, i, b)?;
    let partners = partner_stages(&tower, i, j);
    if partners.len() < pattern.len() {
        return Err(Error::NoPartnerStages { from: i, to: j });
    }
    let sets: Vec<StageSets> = partners.iter().map(|p| StageSets::new(&tower, p)).collect();
    let k = sigma.len();
    let mut rows = vec![vec![0i64; k]; j - i];
    for (set, &mv) in sets.iter().zip(&pattern) {
        let e = move_shifts(mv, &sigma, set.z);
        for l in 0..k {
            rows[set.stage - i][l] = *set
                .hs
                .iter()
                .find(|&&x| set.in_h(x - e[l]))
                .expect("partner sets are nonempty");
        }
    }
    let moves = assign(&sets, &pattern, &sigma, i, |pos| rows[pos].clone())
        .ok_or_else(|| Error::InvalidWitness("constructed tuple left the pattern".into()))?;
    let a_summands: Vec<Vec<i64>> = (0..k)
        .map(|l| rows.iter().map(|r| r[l]).collect())
        .collect();
    let a: Vec<i64> = a_summands.iter().map(|s| s.iter().sum()).collect();
    verify(&tower, level, j, signature, b, a, a_summands, &moves)
}

/// Runs the constructive assignment over every tuple of `D(I, j)^k`, `I` the
/// base of `C_i`, verifying each produced `d` and checking injectivity.
pub fn ergodic_matching(
    spec: &RankOneSpec,
    signature: &[i64],
    b: &[i64],
    i: usize,
    j: usize,
    budget: Budget,
) -> Result<MatchOutcome> {
    let Normalized { sigma, pattern } = normalize(signature, b)?;
    let k = sigma.len();
    let level = LevelRef::new(i, 0);
    let tower = tower_for(spec, level, j)?;
    check_shifts(&tower, i, b)?;
    let partners = partner_stages(&tower, i, j);
    if partners.is_empty() && !pattern.is_empty() {
        return Err(Error::NoPartnerStages { from: i, to: j });
    }
    let sets: Vec<StageSets> = partners.iter().map(|p| StageSets::new(&tower, p)).collect();
    let d_set = descendants_in(&tower, level, j)?;
    let total = (d_set.len() as u128)
        .checked_pow(k as u32)
        .unwrap_or(u128::MAX);
    budget.check(total)?;
    let total = total as u64;
    let summands: Vec<Vec<i64>> = d_set
        .iter()
        .map(|&x| decompose(&tower, level, j, x).expect("descendant decomposes"))
        .collect();
    let check_injective = total <= INJECTIVITY_LIMIT;
    let mut images: HashMap<Vec<i64>, u32> = HashMap::new();
    let mut injective = true;
    let mut matched = 0u64;
    let mut witness = None;
    let mut idx = vec![0usize; k];
    'tuples: loop {
        let rows = |pos: usize| -> Vec<i64> { idx.iter().map(|&t| summands[t][pos]).collect() };
        if let Some(moves) = assign(&sets, &pattern, &sigma, i, rows) {
            let a: Vec<i64> = idx.iter().map(|&t| d_set[t]).collect();
            let a_summands = idx.iter().map(|&t| summands[t].clone()).collect();
            let w = verify(&tower, level, j, signature, b, a, a_summands, &moves)?;
            matched += 1;
            if check_injective && injective {
                let slot = images.entry(w.d.clone()).or_default();
                *slot += 1;
                injective = *slot == 1;
            }
            if witness.is_none() {
                witness = Some(w);
            }
        }
        let mut t = 0;
        loop {
            if t == k {
                break 'tuples;
            }
            idx[t] += 1;
            if idx[t] < d_set.len() {
                break;
            }
            idx[t] = 0;
            t += 1;
        }
    }
    let gamma = pattern.len();
    let fraction = Measure::ratio(matched, total);
    let target_fraction = Measure::ratio(1, 4).pow((k * gamma) as u32);
    let injective = check_injective.then_some(injective);
    let verdict = match injective {
        Some(false) => Verdict::Fails,
        Some(true) if fraction >= target_fraction => Verdict::Holds,
        _ => Verdict::Inconclusive,
    };
    Ok(MatchOutcome {
        signature: signature.to_vec(),
        b: b.to_vec(),
        base_stage: i,
        stage: j,
        partner_stages: partners,
        gamma,
        pattern,
        matched,
        total,
        fraction,
        target_fraction,
        injective,
        witness,
        verdict,
        spec: spec.clone(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PatternQuery {
    pub signature: Vec<i64>,
    pub b: Vec<i64>,
    pub base_stage: usize,
    /// Stages `base_stage..cutoff` are examined.
    pub cutoff: usize,
    /// Ratio constant `D` with `|F| <= D |E|`; defaults to `4^k`.
    pub dconst: Option<Measure>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PatternStage {
    pub stage: usize,
    pub z: i64,
    pub f_size: u64,
    pub e_sizes: Vec<u64>,
    pub h_power: u64,
    /// `|F| <= D |E|` for every move used.
    pub ratio_ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PatternOutcome {
    pub query: PatternQuery,
    pub gamma: usize,
    pub dconst: Measure,
    pub stages: Vec<PatternStage>,
    /// `μ(W_J) / μ(I^k)`: confirmed matched mass, and mass still undecided at the cutoff.
    pub mu_w: MeasureInterval,
    /// Relative mass of points with at least `γ` hits of `F` before the cutoff.
    pub hit_mass: Measure,
    /// `K = D^{-γ}`.
    pub bound: Measure,
    pub verdict: Verdict,
    #[serde(skip)]
    spec: RankOneSpec,
}

impl PatternOutcome {
    pub fn certificate(&self) -> Certificate {
        Certificate::build(
            CertificateKind::PatternBound,
            Some(&self.spec),
            &self.query,
            self.verdict,
            self,
        )
    }
}

/// Exact relative measure of the points whose first `γ` hits of `F` follow the
/// move pattern, by a stage-by-stage distribution over the hit count.
pub fn pattern_measure(spec: &RankOneSpec, query: PatternQuery) -> Result<PatternOutcome> {
    let Normalized { sigma, pattern } = normalize(&query.signature, &query.b)?;
    let k = sigma.len();
    let i = query.base_stage;
    let tower = tower_for(spec, LevelRef::new(i, 0), query.cutoff)?;
    check_shifts(&tower, i, &query.b)?;
    let partners = partner_stages(&tower, i, query.cutoff);
    let gamma = pattern.len();
    if partners.is_empty() && gamma > 0 {
        return Err(Error::NoPartnerStages {
            from: i,
            to: query.cutoff,
        });
    }
    let dconst = query
        .dconst
        .clone()
        .unwrap_or_else(|| Measure::from_integer(4u64.pow(k as u32)));
    // alive[h]: mass that has followed the pattern for h hits.
    let mut alive = vec![Measure::zero(); gamma + 1];
    alive[0] = Measure::one();
    // hits[h]: mass with h hits (capped at γ) regardless of pattern.
    let mut hits = alive.clone();
    let mut stages = Vec::new();
    for p in &partners {
        let set = StageSets::new(&tower, p);
        let hk = (set.hs.len() as u64).pow(k as u32);
        let f = set.f_size(k);
        let p_f = Measure::ratio(f, hk);
        let p_miss = Measure::one()
            .checked_sub(&p_f)
            .expect("F is a subset of H^k");
        let e_sizes: Vec<u64> = pattern
            .iter()
            .map(|&mv| set.e_size(&move_shifts(mv, &sigma, set.z)))
            .collect();
        let ratio_ok = e_sizes
            .iter()
            .all(|&e| Measure::from_integer(f) <= &dconst * e);
        let mut next = vec![Measure::zero(); gamma + 1];
        next[gamma] = alive[gamma].clone();
        for h in 0..gamma {
            next[h] = &next[h] + &(&alive[h] * &p_miss);
            next[h + 1] = &next[h + 1] + &(&alive[h] * &Measure::ratio(e_sizes[h], hk));
        }
        alive = next;
        let mut next_hits = vec![Measure::zero(); gamma + 1];
        next_hits[gamma] = hits[gamma].clone();
        for h in 0..gamma {
            next_hits[h] = &next_hits[h] + &(&hits[h] * &p_miss);
            next_hits[h + 1] = &next_hits[h + 1] + &(&hits[h] * &p_f);
        }
        hits = next_hits;
        stages.push(PatternStage {
            stage: p.stage,
            z: p.z,
            f_size: f,
            e_sizes,
            h_power: hk,
            ratio_ok,
        });
    }
    let confirmed = alive[gamma].clone();
    let undecided: Measure = alive[..gamma].iter().cloned().sum();
    let hit_mass = hits[gamma].clone();
    let bound = Measure::one().ratio_to(&dconst.pow(gamma as u32));
    let verdict = if !stages.iter().all(|s| s.ratio_ok) {
        Verdict::Inconclusive
    } else if confirmed >= &bound * &hit_mass {
        Verdict::Holds
    } else {
        Verdict::Fails
    };
    Ok(PatternOutcome {
        query,
        gamma,
        dconst,
        stages,
        mu_w: MeasureInterval {
            confirmed,
            unresolved: undecided,
        },
        hit_mass,
        bound,
        verdict,
        spec: spec.clone(),
    })
}
