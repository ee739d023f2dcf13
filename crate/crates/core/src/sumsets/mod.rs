//! Descendant sets, difference sets, and base-`k` digit sumsets.

mod descendants;
mod diffs;
mod digits;

pub use descendants::{
    decompose, descendant_set, descendants_in, max_descendant, DescendantSet, DESCENDANT_LIMIT,
};
pub use diffs::{
    ap_search, difference_multiset, partner_set, partner_set_with, positive_differences, ApRun,
    ApSearch, DifferenceMultiset, PartnerSet, PartnerSide,
};
pub use digits::{
    admissible_alphabets, coverage_checks, gamma_search, gap_count, reconstruct, sumset_membership,
    truncated_sumset, CoverageCheck, CoverageReport, DigitAlphabet, GammaWitness, GapCount,
    Membership,
};
