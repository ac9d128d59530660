//! Tripotents, Peirce algebras and natural cones of finite-dimensional
//! ternary rings of operators.

pub mod conelab;
pub mod error;
pub mod instance;
pub mod linalg;
pub mod peirce;
pub mod report;
pub mod subspace;
pub mod suite;
pub mod rng;
pub mod tripotent;
pub mod tro;

pub use error::{Error, Result};
pub use linalg::{CMatrix, TolerancePolicy, C64};
