//! Best proximity points of cyclic contractions on finite-dimensional `ℓ_p`
//! spaces, with a priori and a posteriori error bounds driven by the modulus
//! of convexity.
//!
//! - [`norms`]: `ℓ_p` spaces, the modulus of convexity and its power-type
//!   lower bound.
//! - [`cyclic`]: cyclic maps on `A ∪ B` and empirical audits of their
//!   declared contraction coefficient and set distance.
//! - [`solver`]: Picard iteration, error bounds and stopping rules.
//! - [`oracle`]: reference solutions, soundness audits and table
//!   regeneration.
//! - [`suite`]: named invariant suites.

// Negated comparisons such as `!(x > 0.0)` are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cyclic;
pub mod error;
pub mod norms;
pub mod oracle;
pub mod scalar;
pub mod solver;
pub mod suite;
pub mod table_io;

pub use cyclic::{
    apply_map, make_example1, sample_point, sample_points, verify_contraction, verify_cyclicity,
    CyclicMapSpec, Example1Params, SamplingBox, Side,
};
pub use error::{Error, Result};
pub use norms::{
    check_convexity_inequality, inverse_modulus_bound, lp_norm, modulus_of_convexity,
    power_type_constants, LpSpace, PowerTypeConstants, Vector,
};
pub use oracle::{
    audit_soundness, rederive_distance, reference_best_proximity, reproduce_table,
    reproduce_table_with, Arithmetic, ReferenceMethod, ReferenceSolution, TableKind, TableRequest,
    TableResult,
};
pub use scalar::{Extended, Scalar};
pub use solver::{
    aposteriori_bound, apriori_bound, apriori_steps_needed, picard_iterate, picard_iterate_with,
    run_with_stop, run_with_stop_mode, BoundParams, Displacement, ErrorBudget, IterationTrace,
    StopError, StopKind, StopOutcome, StopRule, TraceMode,
};
pub use suite::{run_suite, PropertyOutcome, Suite, SuiteConfig};
pub use table_io::Grid;
