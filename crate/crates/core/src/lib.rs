//! Numerical verification of weak contact metric geometry.
//!
//! Tensor fields are given by chart coefficients and evaluated as truncated
//! Taylor jets, so every derivative a curvature identity needs is exact up to
//! the jet order.

// `!(x > 0.0)` is used on purpose so that NaN fails positivity gates.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod contact;
pub mod error;
pub mod expr;
pub mod gallery;
pub mod jet;
pub mod linalg;
pub mod manifold;
pub mod oracle;
pub mod report;
pub mod riemann;
pub mod runner;
pub mod soliton;
pub mod tensor;

pub use contact::{
    classify, construct_from_killing, construct_from_killing_at, einstein_diagnostic, homothety, identity_suite,
    killing_equivalence, ntensor_suite, product_extension_check, verify_axioms, Classification, EinsteinDiagnostic,
    KillingEquivalence, LadderLevel, LocalStructure, SuiteLevel, Tolerances, WeakStructure,
};
pub use error::{Error, Result};
pub use expr::{parse_potential, Expr};
pub use gallery::{lookup, lookup_structure, GalleryEntry};
pub use jet::{seed_point, Jet};
pub use manifold::{sample_points, ChartManifold, Ctx, MetricSource, SamplePlan, TensorField};
pub use report::{CheckRecord, CheckReport, Format, RunMeta, Status};
pub use riemann::Geometry;
pub use runner::{run_suite, write_report, PartialConfig, RunConfig, SolitonConfig, Suite};
pub use soliton::{
    lemma_suite, soliton_residual, soliton_suite, theorem51_diagnostic, SolitonData, SolitonParams, Theorem51Outcome,
};
pub use tensor::{JTensor, Slot};
