//! Equivalence transformations, subclass classification and verification for
//! reduced Burgers–KdV equations with space-dependent coefficients.

pub mod classify;
pub mod cli;
pub mod error;
pub mod expr;
pub mod groups;
pub mod io;
pub mod model;
pub mod numeric;
pub mod report;
pub mod transform;
pub mod verify;

pub use error::{Error, Result};
pub use expr::{parse_expression, Expr, Var};
