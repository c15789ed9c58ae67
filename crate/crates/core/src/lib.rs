//! Dynamic-programming solver for the continuous Bomber and Fighter
//! ammunition allocation problems, with checkers for the structural
//! properties of the value surfaces and optimal policies.
//!
//! The value surface is found as the fixed point of a monotone integral
//! operator on a uniform `(x, t)` grid ([`engine`]). The optimal spend is read
//! off the solution ([`policy`]), its shape is verified ([`props`]) and it is
//! cross-checked by Monte-Carlo rollouts ([`mc`]).

pub mod cli;
pub mod engine;
pub mod error;
pub mod grid;
pub mod mc;
pub mod model;
pub mod policy;
pub mod props;

pub use engine::{solve, Init, ModelKind, SolveOpts, SolveReport};
pub use error::{Error, Result};
pub use grid::{GridSpec, Scaling, ValueField};
pub use model::AmmoFunction;
