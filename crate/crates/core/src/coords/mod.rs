//! Coordinate changes: affine linearization, ψ-privileged and ε-Carnot maps,
//! exact flows and canonical coordinates.

pub mod canonical;
pub mod change;
pub mod flow;
pub mod pipeline;

pub use canonical::{canonical_exact, canonical_numeric, CanonicalChart, CanonicalKind, NumericChart, NumericOptions};
pub use change::{AffineMap, CoordinateChange};
pub use flow::{exact_flow, exp_map, log_map, numeric_flow, F64Field, FlowResult};
pub use pipeline::{convert_nilpotent_approx, epsilon, epsilon_pipeline, linearize, psi_map, EpsilonPipeline};
