//! Finite-stage checkers and witness builders. Every checker returns a typed
//! outcome that can be rendered as a self-describing [`Certificate`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spec::RankOneSpec;
use crate::TOOL_VERSION;

mod asymmetry;
mod conservativity;
mod matching;
mod mixing;
mod nonergodic;
mod npc;
mod pwm;
mod tuples;

pub use asymmetry::{asymmetry_statistic, AsymmetryOutcome};
pub use conservativity::{conservativity_fraction, ConservativityOutcome, StageFraction};
pub use matching::{
    ergodic_matching, match_witness, partner_stage, pattern_measure, MatchOutcome, MatchWitness,
    Move, PartnerStage, PatternOutcome, PatternQuery,
};
pub use mixing::{mixing_decay, MixingOutcome, MixingQuery, MixingRow};
pub use nonergodic::{non_ergodic_check, NonErgodicOutcome};
pub use npc::{
    npc_certificate, ApRow, CaseReplay, NpcOutcome, NpcQuery, RatioRow, SpacerGrowthQuery,
    SpacerGrowthReport, SpacerGrowthRow,
};
pub use pwm::{pwm_witness, PwmWitness};
pub use tuples::{matching_count, TupleCount};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertificateKind {
    ApFree,
    RatioBound,
    ErgodicFraction,
    ConservativeFraction,
    PwmWitness,
    NonErgodic,
    MixingDecay,
    Asymmetry,
    PatternBound,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
}

/// Verdict record: `holds`/`fails` only when the finite computation settles
/// the claim exactly, `inconclusive` with the obstruction in the evidence otherwise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Certificate {
    pub kind: CertificateKind,
    pub parameters: serde_json::Value,
    pub verdict: Verdict,
    pub evidence: serde_json::Value,
    pub spec_fingerprint: Option<String>,
    pub tool_version: String,
}

impl Certificate {
    pub(crate) fn build(
        kind: CertificateKind,
        spec: Option<&RankOneSpec>,
        parameters: impl Serialize,
        verdict: Verdict,
        evidence: impl Serialize,
    ) -> Certificate {
        Certificate {
            kind,
            parameters: serde_json::to_value(parameters).expect("parameters serialize"),
            verdict,
            evidence: serde_json::to_value(evidence).expect("evidence serializes"),
            spec_fingerprint: spec.map(RankOneSpec::fingerprint),
            tool_version: TOOL_VERSION.to_string(),
        }
    }
}

/// Cap on the number of tuples an exhaustive check may enumerate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget(pub u64);

impl Default for Budget {
    fn default() -> Self {
        Budget(1 << 30)
    }
}

impl Budget {
    pub fn check(&self, required: u128) -> Result<()> {
        if required > self.0 as u128 {
            Err(Error::BudgetExceeded {
                required,
                budget: self.0,
            })
        } else {
            Ok(())
        }
    }
}
