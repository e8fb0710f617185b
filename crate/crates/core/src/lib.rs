//! R-function algebra over implicit functions, and analytical identification
//! of process design spaces built on it.
//!
//! Every numeric type is generic over [`Scalar`] (`f32` or `f64`); the
//! `*64` aliases below are the concrete types the CLI works with.

pub mod contour;
pub mod ds;
pub mod error;
pub mod expr;
pub mod geometry;
pub mod linalg;
pub mod ode;
pub mod polyfit;
pub mod qmc;
pub mod reactor;
mod scalar;

pub use error::{Error, ParseError, Result};
pub use expr::{compose, BoolTree, Expr, Region, SignClass, Variable};
pub use scalar::Scalar;

pub type Expr64 = Expr<f64>;
pub type Region64 = Region<f64>;
pub type BoolTree64 = BoolTree<f64>;
