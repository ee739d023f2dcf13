//! Named constructions: infinite Chacón type, (t,q)-Chacón, and the separated
//! hybrid used for mixing with prescribed ergodic and conservative indices.

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::Measure;
use crate::spec::{ExtensionRule, RankOneSpec, StageFormula, StageSpec};

/// `t` subcolumns, one extra spacer above subcolumn `q-1`, and the rest of the
/// `m1*h + m0` budget on the right, so that `h_{n+1} = m1*h_n + m0` and
/// `H_n = {j*h_n + [j >= q] : 0 <= j < t}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InfChaconParams {
    pub t: i64,
    pub q: i64,
    pub m1: i64,
    pub m0: i64,
}

impl InfChaconParams {
    pub fn validate(&self) -> Result<()> {
        let InfChaconParams { t, q, m1, m0 } = *self;
        if t < 2 {
            return Err(Error::ParamOutOfRange(format!(
                "t = {t} must be at least 2"
            )));
        }
        if !(1..t).contains(&q) {
            return Err(Error::ParamOutOfRange(format!(
                "q = {q} must lie in 1..={}",
                t - 1
            )));
        }
        if m1 < 2 * t {
            return Err(Error::ParamOutOfRange(format!(
                "m1 = {m1} is below 2t = {}",
                2 * t
            )));
        }
        if m0 < 1 {
            return Err(Error::ParamOutOfRange(format!(
                "m0 = {m0} must be positive"
            )));
        }
        Ok(())
    }

    pub(crate) fn stage(&self, h: i64) -> Result<StageSpec> {
        self.validate()?;
        let mut s = vec![0i64; self.t as usize];
        s[(self.q - 1) as usize] = 1;
        let right = (self.m1 - self.t)
            .checked_mul(h)
            .and_then(|x| x.checked_add(self.m0 - 1))
            .ok_or(Error::Overflow("right spacer"))?;
        s[(self.t - 1) as usize] = right;
        StageSpec::new(self.t, s)
    }

    /// The closed form `{j*h + [j >= q]}`.
    pub fn closed_form(&self, h: i64) -> Vec<i64> {
        (0..self.t)
            .map(|j| j * h + i64::from(j >= self.q))
            .collect()
    }
}

impl Default for InfChaconParams {
    fn default() -> Self {
        InfChaconParams {
            t: 3,
            q: 1,
            m1: 6,
            m0: 2,
        }
    }
}

pub fn make_inf_chacon(t: i64, q: i64, m1: i64, m0: i64) -> Result<RankOneSpec> {
    let params = InfChaconParams { t, q, m1, m0 };
    params.validate()?;
    Ok(RankOneSpec::from_parts(
        1,
        Vec::new(),
        ExtensionRule::Formula(StageFormula::InfChacon(params)),
        Some("inf_chacon".into()),
    ))
}

/// `t` subcolumns, full-height spacer blocks above the subcolumns listed in
/// `positions`, and one spacer on the right.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TqParams {
    pub t: i64,
    pub q: i64,
    pub positions: Vec<i64>,
}

impl TqParams {
    pub fn new(t: i64, q: i64, positions: Vec<i64>) -> Result<Self> {
        let mut positions = positions;
        positions.sort_unstable();
        let params = TqParams { t, q, positions };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.t < 3 {
            return Err(Error::ParamOutOfRange(format!(
                "t = {} must be at least 3",
                self.t
            )));
        }
        if self.q < 1 {
            return Err(Error::ParamOutOfRange(format!(
                "q = {} must be positive",
                self.q
            )));
        }
        if self.positions.len() as i64 != self.q {
            return Err(Error::ParamOutOfRange(format!(
                "{} spacer positions given for q = {}",
                self.positions.len(),
                self.q
            )));
        }
        if let Some(p) = self.positions.iter().find(|&&p| p < 0 || p > self.t - 2) {
            return Err(Error::ParamOutOfRange(format!(
                "spacer position {p} outside 0..={}",
                self.t - 2
            )));
        }
        if self.positions.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::ParamOutOfRange(
                "spacer positions must be distinct".into(),
            ));
        }
        Ok(())
    }

    /// `k = t + q`, the digit base.
    pub fn k(&self) -> i64 {
        self.t + self.q
    }

    /// `φ(i) = i + #{positions below i}`, so `H_n = {φ(i) h_n}`.
    pub fn phi(&self) -> Vec<i64> {
        (0..self.t)
            .map(|i| i + self.positions.iter().filter(|&&p| p < i).count() as i64)
            .collect()
    }

    /// Whether some consecutive coefficients differ by exactly 1.
    pub fn has_unit_gap(&self) -> bool {
        self.phi().windows(2).any(|w| w[1] - w[0] == 1)
    }

    pub(crate) fn stage(&self, h: i64) -> Result<StageSpec> {
        self.validate()?;
        let mut s = vec![0i64; self.t as usize];
        for &p in &self.positions {
            s[p as usize] = h;
        }
        s[(self.t - 1) as usize] = 1;
        StageSpec::new(self.t, s)
    }
}

pub fn make_tq(t: i64, q: i64, positions: Vec<i64>) -> Result<(RankOneSpec, TqParams)> {
    let params = TqParams::new(t, q, positions)?;
    let spec = RankOneSpec::from_parts(
        1,
        Vec::new(),
        ExtensionRule::Formula(StageFormula::Tq(params.clone())),
        Some("tq".into()),
    );
    Ok((spec, params))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConservativeIndex {
    Finite(u32),
    Unbounded,
}

/// Target partner density `δ_m` at the `m`-th odd stage.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeltaSchedule {
    /// `δ_m = m^{-1/k}`.
    #[default]
    PowerLaw,
    Constant {
        num: u64,
        den: u64,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CutSchedule {
    /// Grows with `n` according to the conservative index, never below `base`.
    Auto {
        base: i64,
    },
    Constant {
        r: i64,
    },
}

impl Default for CutSchedule {
    fn default() -> Self {
        CutSchedule::Auto { base: 3 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct AsymmParams {
    pub k: u32,
    pub p: ConservativeIndex,
    pub stages: usize,
    pub separation_factor: i64,
    #[serde(default)]
    pub delta_schedule: DeltaSchedule,
    #[serde(default)]
    pub cut_schedule: CutSchedule,
}

impl AsymmParams {
    pub fn new(k: u32, p: ConservativeIndex, stages: usize) -> Self {
        AsymmParams {
            k,
            p,
            stages,
            separation_factor: 2,
            delta_schedule: DeltaSchedule::default(),
            cut_schedule: CutSchedule::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::ParamOutOfRange("k must be at least 1".into()));
        }
        if let ConservativeIndex::Finite(p) = self.p {
            if p < self.k {
                return Err(Error::ParamOutOfRange(format!(
                    "conservative index {p} is below k = {}",
                    self.k
                )));
            }
        }
        if self.separation_factor < 2 {
            return Err(Error::ParamOutOfRange(format!(
                "separation factor {} is below 2",
                self.separation_factor
            )));
        }
        match self.cut_schedule {
            CutSchedule::Auto { base } | CutSchedule::Constant { r: base } if base < 2 => {
                return Err(Error::ParamOutOfRange(format!(
                    "cut count {base} is below 2"
                )))
            }
            _ => {}
        }
        if let DeltaSchedule::Constant { num, den } = self.delta_schedule {
            if den == 0 || num == 0 || num > den {
                return Err(Error::ParamOutOfRange(format!(
                    "constant density {num}/{den} must lie in (0, 1]"
                )));
            }
        }
        Ok(())
    }

    /// Scheduled cut count at stage `n`.
    pub fn cuts(&self, n: usize) -> i64 {
        match self.cut_schedule {
            CutSchedule::Constant { r } => r,
            CutSchedule::Auto { base } => match self.p {
                ConservativeIndex::Unbounded => base,
                // Σ r^{-1} < ∞ needs geometric growth.
                ConservativeIndex::Finite(1) => base.max(1i64 << n.min(62)),
                // Smallest r with r^{p-1} ≥ n+1: Σ r^{-(p-1)} = ∞, Σ r^{-p} < ∞.
                ConservativeIndex::Finite(p) => {
                    let mut r = 1i64;
                    while (r as u128).pow(p - 1) < (n as u128 + 1) {
                        r += 1;
                    }
                    base.max(r)
                }
            },
        }
    }

    /// How stage `n` is laid out when `C_n` has height `h`.
    pub fn plan(&self, n: usize, h: i64) -> Result<StagePlan> {
        self.validate()?;
        let r = self.cuts(n);
        let sep = 2i64
            .checked_mul(self.separation_factor)
            .and_then(|x| x.checked_mul(h))
            .ok_or(Error::Overflow("separation scale"))?;
        if n % 2 == 0 {
            return Ok(StagePlan::Separated { r, scale: sep });
        }
        if r < 3 {
            return Err(Error::ScheduleInfeasible(format!(
                "odd stage {n} needs at least 3 cuts for a partner triple, schedule gives {r}"
            )));
        }
        let m = (n as u64).div_ceil(2);
        let raw = match self.delta_schedule {
            DeltaSchedule::PowerLaw => nearest_power_law_count(m, self.k, r as u64),
            DeltaSchedule::Constant { num, den } => {
                (2 * num as u128 * r as u128 + den as u128) / (2 * den as u128)
            }
        };
        let triples = (raw as i64).clamp(1, r / 3);
        Ok(StagePlan::Partner {
            r,
            z: sep,
            triples,
            delta: Measure::ratio(triples as u64, r as u64),
            requested_count: raw as i64,
        })
    }

    pub(crate) fn stage(&self, n: usize, h: i64) -> Result<StageSpec> {
        let offsets = self.plan(n, h)?.offsets()?;
        let top = offsets
            .last()
            .unwrap()
            .checked_add(h)
            .ok_or(Error::Overflow("right spacer"))?;
        StageSpec::from_offsets(&offsets, h, top)
    }
}

/// Layout of one stage of the separated hybrid construction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum StagePlan {
    /// `{0} ∪ {scale * 4^i}`: all differences of differences are large.
    Separated { r: i64, scale: i64 },
    /// `triples` blocks `{b, b+z+1, b+2z+1}` giving `|S(z)| = |S(z+1)| = triples`,
    /// and the remaining elements far above them.
    #[serde(rename_all = "camelCase")]
    Partner {
        r: i64,
        z: i64,
        triples: i64,
        delta: Measure,
        requested_count: i64,
    },
}

impl StagePlan {
    pub fn cuts(&self) -> i64 {
        match self {
            StagePlan::Separated { r, .. } | StagePlan::Partner { r, .. } => *r,
        }
    }

    pub fn offsets(&self) -> Result<Vec<i64>> {
        let ovf = || Error::Overflow("height set");
        match *self {
            StagePlan::Separated { r, scale } => {
                let mut out = vec![0i64];
                let mut x = scale;
                for _ in 0..r - 1 {
                    out.push(x);
                    x = x.checked_mul(4).ok_or_else(ovf)?;
                }
                Ok(out)
            }
            StagePlan::Partner { r, z, triples, .. } => {
                let width = z
                    .checked_mul(2)
                    .and_then(|x| x.checked_add(1))
                    .ok_or_else(ovf)?;
                let spacing = width.checked_mul(4).ok_or_else(ovf)?;
                let mut out = Vec::with_capacity(r as usize);
                for i in 0..triples {
                    let b = spacing.checked_mul(i).ok_or_else(ovf)?;
                    out.extend([b, b + z + 1, b + width]);
                }
                let span = *out.last().unwrap();
                let mut x = span
                    .checked_add(z)
                    .and_then(|v| v.checked_mul(4))
                    .ok_or_else(ovf)?;
                for _ in 0..r - 3 * triples {
                    out.push(x);
                    x = x.checked_mul(4).ok_or_else(ovf)?;
                }
                Ok(out)
            }
        }
    }
}

/// The count `c` making `c/r` nearest to `m^{-1/k}`, decided with integer
/// comparisons only.
fn nearest_power_law_count(m: u64, k: u32, r: u64) -> u128 {
    let (m, r_pow) = (BigUint::from(m), BigUint::from(r).pow(k));
    // Largest c with (c/r)^k <= 1/m.
    let mut c = 0u64;
    while c < r && BigUint::from(c + 1).pow(k) * &m <= r_pow {
        c += 1;
    }
    if c == r {
        return r as u128;
    }
    // Round up when the target is at or above the midpoint (2c+1)/(2r).
    let mid = BigUint::from(2 * c + 1).pow(k) * &m;
    if mid <= BigUint::from(2 * r).pow(k) {
        (c + 1) as u128
    } else {
        c as u128
    }
}

pub fn make_asymm_construction(params: AsymmParams) -> Result<RankOneSpec> {
    params.validate()?;
    let spec = RankOneSpec::from_parts(
        1,
        Vec::new(),
        ExtensionRule::Formula(StageFormula::Asymm(params.clone())),
        Some("asymm".into()),
    );
    if params.stages == 0 {
        return Ok(spec);
    }
    let tower = spec.tower(params.stages)?;
    let factor = params.separation_factor;
    for n in 0..params.stages {
        let h = tower.height(n);
        let plan = params.plan(n, h)?;
        let hs = tower.height_set(n);
        let restricted = match &plan {
            StagePlan::Separated { .. } => None,
            StagePlan::Partner { triples, .. } => Some(&hs[3 * *triples as usize..]),
        };
        let verdict = separation_check(hs, h, factor, restricted);
        if let Some(v) = verdict.violation {
            return Err(Error::ScheduleInfeasible(format!(
                "stage {n} fails separation at factor {factor}: {:?}",
                v
            )));
        }
        if tower.stage(n).top_spacers() < hs.last().unwrap() + h {
            return Err(Error::ScheduleInfeasible(format!(
                "stage {n} right spacer below max H + h"
            )));
        }
    }
    Ok(RankOneSpec::from_parts(
        1,
        (0..params.stages).map(|n| tower.stage(n).clone()).collect(),
        ExtensionRule::Formula(StageFormula::Asymm(params)),
        Some("asymm".into()),
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Quadruple {
    pub x: i64,
    pub y: i64,
    pub z: i64,
    pub z_prime: i64,
    /// `x - z - y + z'`.
    pub value: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SeparationVerdict {
    pub threshold: i64,
    pub quadruples_checked: u128,
    /// Violation of smallest `|value|`, ties broken lexicographically on `(x, y, z, z')`.
    pub violation: Option<Quadruple>,
}

impl SeparationVerdict {
    pub fn holds(&self) -> bool {
        self.violation.is_none()
    }
}

/// Checks `|x - z - y + z'| >= 2*factor*h` for all `x` in `restricted` (default
/// all of `hs`) and `y, z, z'` in `hs` with `x != y`, `(z, z') != (x, y)`.
pub fn separation_check(
    hs: &[i64],
    h: i64,
    factor: i64,
    restricted: Option<&[i64]>,
) -> SeparationVerdict {
    let threshold = 2i128 * factor as i128 * h as i128;
    let xs = restricted.unwrap_or(hs);
    let mut best: Option<(i128, Quadruple)> = None;
    let mut checked = 0u128;
    for &x in xs {
        for &y in hs {
            if x == y {
                continue;
            }
            for &z in hs {
                for &zp in hs {
                    if (z, zp) == (x, y) {
                        continue;
                    }
                    checked += 1;
                    let value = x as i128 - z as i128 - y as i128 + zp as i128;
                    if value.abs() >= threshold {
                        continue;
                    }
                    let q = Quadruple {
                        x,
                        y,
                        z,
                        z_prime: zp,
                        value: value as i64,
                    };
                    let better = match &best {
                        None => true,
                        Some((b, bq)) => {
                            value.abs() < *b
                                || (value.abs() == *b
                                    && (x, y, z, zp) < (bq.x, bq.y, bq.z, bq.z_prime))
                        }
                    };
                    if better {
                        best = Some((value.abs(), q));
                    }
                }
            }
        }
    }
    SeparationVerdict {
        threshold: threshold.min(i64::MAX as i128) as i64,
        quadruples_checked: checked,
        violation: best.map(|(_, q)| q),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inf_chacon_height_sets() {
        let spec = make_inf_chacon(3, 1, 6, 2).unwrap();
        let tower = spec.tower(3).unwrap();
        assert_eq!(tower.heights(), &[1, 8, 50, 302]);
        assert_eq!(tower.height_set(0), &[0, 2, 3]);
        assert_eq!(tower.height_set(1), &[0, 9, 17]);
        let q2 = make_inf_chacon(3, 2, 6, 2).unwrap().tower(2).unwrap();
        assert_eq!(q2.height_set(1), &[0, 8, 17]);
        assert!(matches!(
            make_inf_chacon(3, 1, 5, 1),
            Err(Error::ParamOutOfRange(_))
        ));
        assert!(make_inf_chacon(3, 3, 6, 2).is_err());
    }

    #[test]
    fn tq_coefficients() {
        let (spec, p) = make_tq(4, 1, vec![1]).unwrap();
        assert_eq!(p.phi(), vec![0, 1, 3, 4]);
        assert_eq!(p.k(), 5);
        assert_eq!(spec.tower(2).unwrap().heights(), &[1, 6, 31]);
        let (spec, p) = make_tq(3, 2, vec![0, 1]).unwrap();
        assert_eq!(p.phi(), vec![0, 2, 4]);
        assert!(!p.has_unit_gap());
        let tower = spec.tower(2).unwrap();
        assert_eq!(tower.height_set(1), &[0, 12, 24]);
        assert!(make_tq(3, 1, vec![2]).is_err());
        assert!(make_tq(4, 2, vec![1, 1]).is_err());
    }

    #[test]
    fn separation_examples() {
        assert!(separation_check(&[0, 10, 40], 1, 2, None).holds());
        let v = separation_check(&[0, 2, 3], 1, 2, None);
        let q = v.violation.unwrap();
        assert_eq!(q.value.abs(), 1);
        assert!(separation_check(&[5], 1, 2, None).holds());
    }

    #[test]
    fn power_law_rounding() {
        // 1^{-1/2} = 1 → all of r.
        assert_eq!(nearest_power_law_count(1, 2, 9), 9);
        // 4^{-1/2} = 1/2 of 9 = 4.5 → rounds up to 5.
        assert_eq!(nearest_power_law_count(4, 2, 9), 5);
        // 9^{-1/2} = 1/3 of 9 = 3.
        assert_eq!(nearest_power_law_count(9, 2, 9), 3);
    }

    #[test]
    fn asymm_generates_separated_stages() {
        let spec =
            make_asymm_construction(AsymmParams::new(2, ConservativeIndex::Finite(3), 6)).unwrap();
        assert_eq!(spec.prefix().len(), 6);
        let tower = spec.tower(6).unwrap();
        for n in (0..6).step_by(2) {
            assert!(separation_check(tower.height_set(n), tower.height(n), 2, None).holds());
        }
        let empty =
            make_asymm_construction(AsymmParams::new(2, ConservativeIndex::Finite(3), 0)).unwrap();
        assert!(empty.prefix().is_empty());
        assert!(empty.tower(2).is_ok());
    }

    #[test]
    fn unbounded_index_keeps_cuts_constant() {
        let p = AsymmParams::new(2, ConservativeIndex::Unbounded, 0);
        assert!((0..50).all(|n| p.cuts(n) == 3));
        let finite = AsymmParams::new(2, ConservativeIndex::Finite(2), 0);
        assert_eq!(finite.cuts(99), 100);
    }

    #[test]
    fn odd_stage_with_two_cuts_is_infeasible() {
        let mut p = AsymmParams::new(2, ConservativeIndex::Unbounded, 3);
        p.cut_schedule = CutSchedule::Constant { r: 2 };
        assert!(matches!(
            make_asymm_construction(p),
            Err(Error::ScheduleInfeasible(_))
        ));
    }
}
