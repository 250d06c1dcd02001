//! Space-time Petrov-Galerkin spectral solver for fractional PDEs with random
//! fractional orders and additive noise, plus Monte Carlo and sparse-grid
//! collocation drivers for the solution statistics.
//!
//! ```
//! use fracuq::fractional::BasisSpec;
//! use fracuq::pgsolver::{assemble, evaluate, manufactured_problem, solve_fast, ManufacturedCase};
//!
//! # fn main() -> Result<(), Box<dyn std::error::Error>> {
//! let alpha = 0.5;
//! let basis = BasisSpec::temporal_only(4, alpha / 2.0, 1.0)?;
//! let (problem, exact) = manufactured_problem(ManufacturedCase::IvpPower, alpha, None, 1.0, basis)?;
//! let solution = solve_fast(&assemble(&problem, 0)?)?;
//! let u = evaluate(&solution, 0.5, &[])?;
//! assert!((u - exact(0.5, &[])).abs() < 1e-10);
//! # Ok(())
//! # }
//! ```

// Validation uses `!(x > 0.0)` style checks so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod fractional;
pub mod noise;
pub mod orthopoly;
pub mod pgsolver;
pub mod randomspace;
pub mod special;
pub mod tensor;
pub mod uq;
