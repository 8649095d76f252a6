//! Optimal investment and consumption with proportional transaction costs under
//! Epstein-Zin stochastic differential utility.

// `!(x > 0.0)` is used deliberately so that NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod error;
pub mod fbsolver;
pub mod interp;
pub mod model;
pub mod ode;
pub mod oracle;
pub mod policy;
pub mod quadrature;
pub mod roots;
pub mod series;
pub mod simulate;
pub mod statics;
pub mod wellposed;

pub use error::{Error, Result};
pub use model::{CostParams, ModelParams};
