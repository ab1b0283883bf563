//! Exact p-adic and adelic analysis for quadratic Lagrangians: characters,
//! λ-functions, Gaussian integrals over Q_v, classical actions from
//! power-series solutions, and the v-adic propagator with its checks.

pub mod action;
pub mod adelic;
pub mod error;
pub mod integrals;
pub mod kernel;
pub mod lagrangian;
pub mod linalg;
pub mod number_theory;
pub mod padic;
pub mod phase;
pub mod rational;
pub mod residue;
pub mod series;

pub use error::{Error, Result};
pub use padic::{Order, Prime, Valuation};
pub use phase::{Amplitude, Sign, UnitPhase};
pub use rational::Rational;
