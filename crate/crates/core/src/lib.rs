pub mod catalog;
pub mod coords;
pub mod error;
pub mod graded;
pub mod group;
pub mod json;
pub mod linalg;
pub mod poly;
pub mod rational;
pub mod selftest;
pub mod triangular;
pub mod verify;
pub mod vfield;

pub use coords::{
    canonical_exact, canonical_numeric, convert_nilpotent_approx, epsilon, epsilon_pipeline, exact_flow, exp_map,
    linearize, log_map, numeric_flow, psi_map, AffineMap, CanonicalKind, CoordinateChange,
};
pub use error::{Error, Result};
pub use graded::{dilate, ow_class_poly, ow_scaling_test, pseudo_norm, MultiIndex, WeightVector};
pub use group::{
    dynkin_product, group_inverse, left_invariant_fields, validate_algebra, NilpotentGroup, StructureConstants,
};
pub use linalg::Matrix;
pub use poly::{PolyMap, RationalPoly};
pub use rational::Rational;
pub use triangular::{invert_perturbed_triangular, invert_triangular, TriangularMap};
pub use verify::{check_carnot, check_privileged, Verdict, VerificationReport};
pub use vfield::{Frame, Order, PolyVectorField};
