//! Spec files: a named family block or explicit stages.

use std::path::Path;

use ranklab::{
    make_asymm_construction, make_inf_chacon, make_tq, validate_spec, AsymmParams, ExtensionRule,
    RankOneSpec, RawSpec, RawStage, TqParams,
};
use serde::Deserialize;

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Eq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpecFile {
    InfChacon {
        #[serde(default = "three")]
        t: i64,
        #[serde(default = "one")]
        q: i64,
        #[serde(default = "six")]
        m1: i64,
        #[serde(default = "two")]
        m0: i64,
    },
    Tq {
        t: i64,
        q: i64,
        positions: Vec<i64>,
    },
    Asymm {
        params: AsymmParams,
    },
    Explicit {
        stages: Vec<RawStage>,
        #[serde(default = "one")]
        h0: i64,
        #[serde(default)]
        extension: ExtensionRule,
    },
}

fn one() -> i64 {
    1
}
fn two() -> i64 {
    2
}
fn three() -> i64 {
    3
}
fn six() -> i64 {
    6
}

/// A parsed spec plus the (t,q) parameters when the file names that family.
#[derive(Clone, Debug)]
pub struct LoadedSpec {
    pub spec: RankOneSpec,
    pub tq: Option<TqParams>,
}

impl SpecFile {
    pub fn parse(text: &str) -> Result<SpecFile, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Spec(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<SpecFile, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        SpecFile::parse(&text)
    }

    pub fn build(self) -> Result<LoadedSpec, CliError> {
        Ok(match self {
            SpecFile::InfChacon { t, q, m1, m0 } => LoadedSpec {
                spec: make_inf_chacon(t, q, m1, m0)?,
                tq: None,
            },
            SpecFile::Tq { t, q, positions } => {
                let (spec, params) = make_tq(t, q, positions)?;
                LoadedSpec {
                    spec,
                    tq: Some(params),
                }
            }
            SpecFile::Asymm { params } => LoadedSpec {
                spec: make_asymm_construction(params)?,
                tq: None,
            },
            SpecFile::Explicit {
                stages,
                h0,
                extension,
            } => LoadedSpec {
                spec: validate_spec(&RawSpec {
                    stages,
                    h0,
                    extension,
                })?,
                tq: None,
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn families_parse_with_defaults() {
        let chacon = SpecFile::parse(r#"{"kind":"inf_chacon"}"#)
            .unwrap()
            .build()
            .unwrap();
        assert_eq!(chacon.spec, make_inf_chacon(3, 1, 6, 2).unwrap());
        let tq = SpecFile::parse(r#"{"kind":"tq","t":4,"q":1,"positions":[1]}"#)
            .unwrap()
            .build()
            .unwrap();
        assert_eq!(tq.tq.unwrap().k(), 5);
        let explicit = SpecFile::parse(
            r#"{"kind":"explicit","stages":[{"r":2,"s":[0,0]}],"extension":"repeat-last"}"#,
        )
        .unwrap()
        .build()
        .unwrap();
        assert_eq!(explicit.spec.tower(3).unwrap().heights(), &[1, 2, 4, 8]);
        let asymm = SpecFile::parse(
            r#"{"kind":"asymm","params":{"k":2,"p":{"finite":3},"stages":4,"separationFactor":2}}"#,
        )
        .unwrap();
        assert!(asymm.build().is_ok());
    }

    #[test]
    fn unknown_fields_and_kinds_are_rejected() {
        assert!(SpecFile::parse(r#"{"kind":"inf_chacon","extra":1}"#).is_err());
        assert!(SpecFile::parse(r#"{"kind":"odometer"}"#).is_err());
        assert!(SpecFile::parse(r#"{"stages":[]}"#).is_err());
        let bad = SpecFile::parse(r#"{"kind":"explicit","stages":[{"r":1,"s":[0]}]}"#).unwrap();
        assert!(bad.build().is_err());
    }
}
