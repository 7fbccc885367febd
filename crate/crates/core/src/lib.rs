//! Nearest-neighbor recurrences, curvature identities and lattice operators
//! for Type II multiple orthogonal polynomials of two measures.
//!
//! Every numeric routine is generic over [`Real`], implemented for `f64` and
//! for the software double-double [`DoubleDouble`].

// Checks are written as `!(x <= tol)` so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod curvature;
pub mod dd;
pub mod error;
pub mod families;
pub mod grid;
pub mod io;
pub mod laxpair;
pub mod linalg;
pub mod moments;
pub mod mop_table;
pub mod operators;
pub mod par;
pub mod poly;
pub mod recurrence;
pub mod scalar;

pub use curvature::{
    check_curvature, check_symmetrizable, degeneracy_scan, reconstruct_cd, CurvatureReport, DegeneracyField,
    ReconstructOptions, Reconstruction, SymmetryReport,
};
pub use dd::DoubleDouble;
pub use error::{Error, Result};
pub use families::{family_field, family_moment_pair, FamilySpec};
pub use grid::{Grid, Window};
pub use laxpair::{
    build_l, build_m, propagate, zero_curvature_residual, LaxReport, PathPolicy, TransferMatrix, WaveTable,
};
pub use moments::{hermite_moments, laguerre_moments, meixner_moments, raw_moments, MomentPair, MomentSequence};
pub use mop_table::{determinantal_table, normality_scan, NormalityReport, PolyTable, TableOptions};
pub use operators::{
    apply, boundary_jacobi, boundary_moments, build_cross, build_delta, build_delta_s, build_h1, build_h2,
    build_symmetrizer, eigencheck, Axis, EigencheckReport, LatticeOperator, OperatorKind, Stencil, SymmetrizeOptions,
    Symmetrizer,
};
pub use par::Exec;
pub use recurrence::{extract_coeffs, generate_table, CoeffField, GenerationReport};
pub use scalar::{Precision, Real};
