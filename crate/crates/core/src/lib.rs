//! Exact combinatorics for rank-one cutting-and-stacking transformations.
//!
//! A [`RankOneSpec`] fixes cut counts and spacers stage by stage. From it the
//! crate derives height sets, descendant sumsets, exact level measures, and
//! finite-stage certificates for ergodicity, conservativity, and mixing
//! criteria of products of powers.

pub mod certificates;
pub mod construction;
pub mod error;
pub mod families;
pub mod measure;
pub mod spec;
pub mod sumsets;

pub use construction::{
    column_stats, height_set, image_of_level, intersection_measure, ColumnStats, HeightSet,
    IntersectionMeasure, LevelImage, LevelRef,
};
pub use error::{Error, Result};
pub use families::{
    make_asymm_construction, make_inf_chacon, make_tq, separation_check, AsymmParams,
    ConservativeIndex, InfChaconParams, TqParams,
};
pub use measure::{Fraction, Measure, MeasureInterval};
pub use spec::{validate_spec, ExtensionRule, RankOneSpec, RawSpec, RawStage, StageSpec, Tower};

pub const TOOL_VERSION: &str = concat!("ranklab ", env!("CARGO_PKG_VERSION"));
