//! Curvature homogeneous neutral signature metrics `g_f` on `O × R^p`
//! built from a field `f(x1..xp)`: exact tensors from third-order jets,
//! admissible frames, the `α` invariant, algebraic curvature model spaces
//! and sampled spectral operators.

pub mod cli;
pub mod config;
pub mod error;
pub mod field;
pub mod frames;
pub mod geometry;
pub mod invariant;
pub mod linalg;
pub mod model;
pub mod spectral;
pub mod tensor;
pub mod verify;

pub use error::{Error, Result};
pub use field::{canonical_f, parse_field, FieldSpec};
pub use geometry::{LocalGeometry, Point};
