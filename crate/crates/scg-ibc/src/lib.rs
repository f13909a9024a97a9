//! Identifiability by common backdoor in summary causal graphs of time
//! series.
//!
//! A summary causal graph (SCG) abstracts a family of full-time causal
//! graphs (FTCGs) by forgetting lags; cycles and self-loops are allowed.
//! Given interventions `do(x^i at t-gamma_i)` and effects, this crate
//! decides whether one adjustment set satisfies the backdoor criterion in
//! every candidate FTCG at once — with and without the assumption that
//! causal relations stay constant through time — and emits either a symbolic
//! adjustment set with its do-free formula, or a concrete witness: a
//! collider-free backdoor path that stays inside the cone of descendants.
//!
//! The [`oracle`] module provides exhaustive bounded-window ground truth for
//! every verdict at desk scale.
//!
//! All types are immutable after construction and all operations are pure
//! functions, so everything is freely shareable across threads.

pub mod access;
pub mod cone;
pub mod corpus;
pub mod decide;
pub mod error;
pub mod formats;
pub mod ftcg;
pub mod oracle;
pub mod query;
pub mod scg;
pub mod series;
pub mod verdict;

pub use access::{
    compute_accessibility, compute_accessibility_combined, fork_exists_free, is_nc_accessible,
    AccessibilityProfile, Anchor,
};
pub use cone::{compute_t_nc, compute_t_nc_query, NcProfile};
pub use decide::{
    cross_check_monovariate, cross_check_on, decide, directed_no_fork_test, fork_test_consistent,
    fork_test_free, monovariate_decide, preprocess, CrossCheckReport,
};
pub use error::{Error, Result};
pub use formats::{parse_scg, serialize_scg, Format};
pub use ftcg::{ArrowDir, Ftcg, TemporalPath};
pub use query::{intervention_release_times, CausalQuery, Intervention, InterventionSchedule};
pub use scg::Scg;
pub use series::{ExtTime, SeriesId, TemporalVertex};
pub use verdict::{
    emit_formula, AdjustmentKind, AdjustmentSet, Assumptions, DoFreeFormula, IbcVerdict, Witness,
    WitnessKind,
};
