//! Finite-field arithmetic and linear algebra.

mod linalg;
mod spec;

pub use linalg::{Echelon, FieldMatrix, FieldVector};
pub use spec::{FieldElement, FieldKind, FieldSpec, MAX_BINARY_DEGREE, MAX_PRIME};
