//! Exact last passage percolation over piecewise path environments, the melon
//! map and its inverse, finite-time RSK with Gelfand-Tsetlin patterns, lattice
//! RSK via multi-path last passage values, and Monte Carlo checks for
//! Bernoulli walks.

pub mod env;
pub mod figure;
pub mod generate;
pub mod gibbs;
pub mod json;
pub mod lattice;
pub mod lemon;
pub mod lpp;
pub mod pitman;
pub mod rational;
pub mod rsk;
pub mod suite;

pub use env::{EnvClass, EnvError, GridPoint, LineSpec, PathEnv, PathLine, Side};
pub use rational::Rational;
