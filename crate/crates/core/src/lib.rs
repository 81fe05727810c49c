//! Infinitesimal rigidity of bar frameworks in Euclidean, spherical and
//! Minkowskian spaces, with point-group symmetry, coning transfers and
//! tensegrity tests.

pub mod coning;
pub mod document;
pub mod error;
pub mod exact;
pub mod framework;
pub mod graph;
pub mod linalg;
pub mod metric;
pub mod orbit;
pub mod rigidity;
pub mod svg;
pub mod symmetry;
pub mod tensegrity;

pub use error::{Error, Result};
pub use framework::{Configuration, Framework};
pub use graph::Graph;
pub use linalg::{NumericPolicy, Subspace};
pub use metric::{ConeKind, Signature};
