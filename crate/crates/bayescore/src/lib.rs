//! Bayesian inference engine.
//!
//! The crate provides the building blocks of an inductive-inference
//! toolchain: a probability-distribution zoo ([`dist`]), the discrete
//! propositional probability calculus ([`prob`]), exact conjugate
//! posterior solvers ([`conjugate`]), MCMC samplers with convergence
//! diagnostics ([`sampler`]), a declarative builder for generalised
//! linear models ([`glm`]), prior/posterior predictive simulation
//! ([`predictive`]), model-comparison and maximum-entropy machinery
//! ([`evidence`]), and subjective-expected-utility decision evaluation
//! ([`decision`]).
//!
//! The crate is `no_std`-compatible (it requires `alloc`); all IO and
//! file formats live in the companion CLI crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;
#[cfg(all(feature = "std", not(test)))]
extern crate std;

pub mod conjugate;
pub mod decision;
pub mod dist;
pub mod error;
pub mod evidence;
pub mod glm;
pub mod linalg;
pub mod math;
pub mod predictive;
pub mod prob;
pub mod rng;
pub mod sampler;

pub use error::{Error, Result};
pub use rng::Rng;
