//! Scalar polynomial curvature invariants: contraction schemes over ∇^(d)Ric
//! factors, point evaluation, and per-case counting of algebraically new
//! invariants.

mod builtin;
mod dedup;
mod evalv;
mod parse;
mod scheme;

pub use dedup::{
    census_closure, dedup_and_count, run_census, CensusRow, DedupOutcome, InvariantValueTable,
};
pub use evalv::{
    evaluate_invariant, evaluate_invariant_expr, evaluate_invariant_in, PointCurvature,
    DERIVATIVE_CAP,
};
pub use builtin::{builtin_basis, BasisKind};
pub use parse::{parse_invariant, parse_invariant_expr};
pub use scheme::{enumerate_schemes, ContractionScheme, InvariantExpr};
