//! Cut-and-spacer specifications and their materialized towers.
//!
//! Heights follow the level-count convention: `h_n` is the number of levels of
//! `C_n` (heights `0..h_n`), `h_0` defaults to 1, and copy `j` of `C_n` sits at
//! offset `j * h_n + sum(s[..j])` inside `C_{n+1}`.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::families::{AsymmParams, InfChaconParams, TqParams};
use crate::measure::Measure;

/// One validated stage: cut into `r` subcolumns, `s[l]` spacers above subcolumn `l`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StageSpec {
    r: usize,
    s: Vec<i64>,
}

impl StageSpec {
    pub fn new(r: i64, s: Vec<i64>) -> Result<Self> {
        Self::checked(0, r, s)
    }

    fn checked(stage: usize, r: i64, s: Vec<i64>) -> Result<Self> {
        if r < 2 {
            return Err(Error::CutTooSmall { stage, r });
        }
        if s.len() as i64 != r {
            return Err(Error::LengthMismatch {
                stage,
                r,
                len: s.len(),
            });
        }
        if let Some((index, &value)) = s.iter().enumerate().find(|(_, v)| **v < 0) {
            return Err(Error::NegativeSpacer {
                stage,
                index,
                value,
            });
        }
        Ok(StageSpec { r: r as usize, s })
    }

    /// Builds the stage whose height set is exactly `offsets` (sorted, starting
    /// at 0, gaps at least `h`) with `top` spacers on the rightmost subcolumn.
    pub fn from_offsets(offsets: &[i64], h: i64, top: i64) -> Result<Self> {
        if offsets.first() != Some(&0) {
            return Err(Error::ParamOutOfRange("height set must start at 0".into()));
        }
        let mut s = Vec::with_capacity(offsets.len());
        for w in offsets.windows(2) {
            let gap = w[1] - w[0] - h;
            if gap < 0 {
                return Err(Error::ParamOutOfRange(format!(
                    "offsets {} and {} are closer than the column height {h}",
                    w[0], w[1]
                )));
            }
            s.push(gap);
        }
        s.push(top);
        StageSpec::new(offsets.len() as i64, s)
    }

    pub fn cuts(&self) -> usize {
        self.r
    }

    pub fn spacers(&self) -> &[i64] {
        &self.s
    }

    pub fn top_spacers(&self) -> i64 {
        self.s[self.r - 1]
    }

    /// Offsets of the `r` copies of a column of height `h`.
    pub fn offsets(&self, h: i64) -> Result<Vec<i64>> {
        let mut out = Vec::with_capacity(self.r);
        let mut acc: i64 = 0;
        for j in 0..self.r {
            out.push(acc);
            acc = acc
                .checked_add(h)
                .and_then(|a| a.checked_add(self.s[j]))
                .ok_or(Error::Overflow("height set"))?;
        }
        Ok(out)
    }

    /// `r * h + sum(s)`.
    pub fn next_height(&self, h: i64) -> Result<i64> {
        let spacers = self
            .s
            .iter()
            .try_fold(0i64, |a, &b| a.checked_add(b))
            .ok_or(Error::Overflow("spacer total"))?;
        (self.r as i64)
            .checked_mul(h)
            .and_then(|x| x.checked_add(spacers))
            .ok_or(Error::Overflow("column height"))
    }
}

/// A stage as written by a user, before validation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawStage {
    pub r: i64,
    pub s: Vec<i64>,
}

/// Family formulas producing stage `n` from `n` and `h_n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum StageFormula {
    InfChacon(InfChaconParams),
    Tq(TqParams),
    Asymm(AsymmParams),
}

impl StageFormula {
    fn stage(&self, n: usize, h: i64) -> Result<StageSpec> {
        match self {
            StageFormula::InfChacon(p) => p.stage(h),
            StageFormula::Tq(p) => p.stage(h),
            StageFormula::Asymm(p) => p.stage(n, h),
        }
    }
}

/// How stages past the explicit prefix are produced.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExtensionRule {
    #[default]
    Error,
    RepeatLast,
    Formula(StageFormula),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RawSpec {
    pub stages: Vec<RawStage>,
    pub h0: i64,
    pub extension: ExtensionRule,
}

impl Default for RawSpec {
    fn default() -> Self {
        RawSpec {
            stages: Vec::new(),
            h0: 1,
            extension: ExtensionRule::Error,
        }
    }
}

/// A validated rank-one construction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankOneSpec {
    h0: i64,
    prefix: Vec<StageSpec>,
    extension: ExtensionRule,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    family: Option<String>,
}

/// Checks every stage invariant and returns the normalized spec.
pub fn validate_spec(raw: &RawSpec) -> Result<RankOneSpec> {
    if raw.h0 < 1 {
        return Err(Error::InvalidBaseHeight(raw.h0));
    }
    let prefix = raw
        .stages
        .iter()
        .enumerate()
        .map(|(i, st)| StageSpec::checked(i, st.r, st.s.clone()))
        .collect::<Result<Vec<_>>>()?;
    if matches!(raw.extension, ExtensionRule::RepeatLast) && prefix.is_empty() {
        return Err(Error::ParamOutOfRange(
            "repeat-last extension needs at least one explicit stage".into(),
        ));
    }
    Ok(RankOneSpec {
        h0: raw.h0,
        prefix,
        extension: raw.extension.clone(),
        family: None,
    })
}

impl RankOneSpec {
    pub(crate) fn from_parts(
        h0: i64,
        prefix: Vec<StageSpec>,
        extension: ExtensionRule,
        family: Option<String>,
    ) -> Self {
        RankOneSpec {
            h0,
            prefix,
            extension,
            family,
        }
    }

    pub fn h0(&self) -> i64 {
        self.h0
    }

    pub fn prefix(&self) -> &[StageSpec] {
        &self.prefix
    }

    pub fn extension(&self) -> &ExtensionRule {
        &self.extension
    }

    pub fn family(&self) -> Option<&str> {
        self.family.as_deref()
    }

    /// Materializes stages `0..n` and heights `h_0..=h_n`.
    pub fn tower(&self, n: usize) -> Result<Tower> {
        let mut stages = Vec::with_capacity(n);
        let mut heights = Vec::with_capacity(n + 1);
        let mut height_sets = Vec::with_capacity(n);
        heights.push(self.h0);
        for q in 0..n {
            let h = heights[q];
            let stage = match self.prefix.get(q) {
                Some(st) => st.clone(),
                None => match &self.extension {
                    ExtensionRule::Error => return Err(Error::StageUnavailable(q)),
                    ExtensionRule::RepeatLast => self
                        .prefix
                        .last()
                        .cloned()
                        .ok_or(Error::StageUnavailable(q))?,
                    ExtensionRule::Formula(f) => {
                        let st = f.stage(q, h)?;
                        StageSpec::checked(q, st.r as i64, st.s)?
                    }
                },
            };
            height_sets.push(stage.offsets(h)?);
            heights.push(stage.next_height(h)?);
            stages.push(stage);
        }
        Ok(Tower {
            stages,
            heights,
            height_sets,
        })
    }

    /// SHA-256 of the canonical JSON of the normalized spec, hex encoded.
    pub fn fingerprint(&self) -> String {
        let value = serde_json::to_value(self).expect("spec serializes");
        let bytes = serde_json::to_vec(&value).expect("value serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}

/// Stages `0..n` of a construction with their heights and height sets.
#[derive(Clone, Debug)]
pub struct Tower {
    stages: Vec<StageSpec>,
    heights: Vec<i64>,
    height_sets: Vec<Vec<i64>>,
}

impl Tower {
    /// Number of stages materialized; heights are known through `h_{len}`.
    pub fn len(&self) -> usize {
        self.stages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stages.is_empty()
    }

    pub fn height(&self, n: usize) -> i64 {
        self.heights[n]
    }

    pub fn heights(&self) -> &[i64] {
        &self.heights
    }

    pub fn stage(&self, n: usize) -> &StageSpec {
        &self.stages[n]
    }

    pub fn height_set(&self, n: usize) -> &[i64] {
        &self.height_sets[n]
    }

    /// `Π_{q<n} 1/r_q`, the width of every level of `C_n`.
    pub fn level_width(&self, n: usize) -> Measure {
        let den: num_bigint::BigUint = self.stages[..n]
            .iter()
            .map(|st| num_bigint::BigUint::from(st.r))
            .product();
        Measure::new(1u32, den)
    }

    /// Number of stage-`j` sublevels of one stage-`i` level.
    pub fn descendant_count(&self, i: usize, j: usize) -> u128 {
        self.stages[i..j].iter().map(|st| st.r as u128).product()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(stages: &[(i64, &[i64])]) -> RawSpec {
        RawSpec {
            stages: stages
                .iter()
                .map(|(r, s)| RawStage {
                    r: *r,
                    s: s.to_vec(),
                })
                .collect(),
            ..RawSpec::default()
        }
    }

    #[test]
    fn accepts_three_cut_stage() {
        let spec = validate_spec(&raw(&[(3, &[0, 1, 4])])).unwrap();
        let tower = spec.tower(1).unwrap();
        assert_eq!(tower.height(1), 8);
        assert_eq!(tower.height_set(0), &[0, 1, 3]);
    }

    #[test]
    fn rejects_bad_stages() {
        assert_eq!(
            validate_spec(&raw(&[(1, &[0])])),
            Err(Error::CutTooSmall { stage: 0, r: 1 })
        );
        assert_eq!(
            validate_spec(&raw(&[(2, &[0, -1])])),
            Err(Error::NegativeSpacer {
                stage: 0,
                index: 1,
                value: -1
            })
        );
        assert_eq!(
            validate_spec(&raw(&[(2, &[0, 0]), (3, &[0, 0])])),
            Err(Error::LengthMismatch {
                stage: 1,
                r: 3,
                len: 2
            })
        );
    }

    #[test]
    fn prefix_without_extension_stops() {
        let spec = validate_spec(&raw(&[(2, &[0, 0])])).unwrap();
        assert!(spec.tower(1).is_ok());
        assert_eq!(spec.tower(2).unwrap_err(), Error::StageUnavailable(1));
    }

    #[test]
    fn repeat_last_extends() {
        let mut r = raw(&[(2, &[0, 0])]);
        r.extension = ExtensionRule::RepeatLast;
        let tower = validate_spec(&r).unwrap().tower(4).unwrap();
        assert_eq!(tower.heights(), &[1, 2, 4, 8, 16]);
        assert_eq!(tower.level_width(4), Measure::ratio(1, 16));
    }

    #[test]
    fn from_offsets_inverts_offsets() {
        let st = StageSpec::from_offsets(&[0, 10, 40], 1, 41).unwrap();
        assert_eq!(st.spacers(), &[9, 29, 41]);
        assert_eq!(st.offsets(1).unwrap(), vec![0, 10, 40]);
        assert_eq!(st.next_height(1).unwrap(), 82);
        assert!(StageSpec::from_offsets(&[0, 1], 2, 0).is_err());
    }

    #[test]
    fn fingerprint_is_stable_and_sensitive() {
        let a = validate_spec(&raw(&[(3, &[0, 1, 4])])).unwrap();
        let b = validate_spec(&raw(&[(3, &[0, 1, 4])])).unwrap();
        let c = validate_spec(&raw(&[(3, &[1, 0, 4])])).unwrap();
        assert_eq!(a.fingerprint(), b.fingerprint());
        assert_ne!(a.fingerprint(), c.fingerprint());
        assert_eq!(a.fingerprint().len(), 64);
    }
}
