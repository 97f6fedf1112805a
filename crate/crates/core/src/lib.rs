//! Correntropy-loss multi-view learning.
//!
//! Two families of solvers live here:
//!
//! * **feature views** ([`features`]): a shared latent ("intact") space is
//!   learned from several feature matrices by half-quadratic alternation.
//!   [`features::cmv_fit`] weights whole instances, [`features::cemv_fit`]
//!   weights individual entries, and [`features::l2mv_fit`] /
//!   [`features::cauchymv_fit`] are the squared-error and Cauchy baselines.
//! * **dissimilarity views** ([`embedding`]): several squared dissimilarity
//!   matrices are fused into one Gram matrix by projected gradient ascent on
//!   a correntropy objective ([`embedding::ReeLoss::Correntropy`]) or by
//!   projected subgradient descent on the L1 objective
//!   ([`embedding::ReeLoss::L1`]).
//!
//! [`datagen`] reproduces the synthetic noise protocols, [`eval`] holds the
//! downstream scorers, and [`experiments`] wires them into end-to-end trials.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
// `num_traits::Float` goes unused whenever std is linked into the build.
#![allow(unused_imports)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod datagen;
pub mod embedding;
pub mod error;
pub mod eval;
pub mod experiments;
pub mod features;
pub mod linalg;
pub mod loss;
pub mod trace;

pub use error::{Error, Result};
pub use trace::{SolverTrace, StopReason};
