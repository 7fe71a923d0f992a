//! Numerical toolkit for freely infinitely divisible laws and free Lévy bases.
//!
//! The crate is organised around the characteristic-triplet representation
//! `(a, b, r)` of an infinitely divisible law: `a` is a drift, `b` a
//! semicircular (or Gaussian) variance and `r` a finitely parametrised Lévy
//! measure. On top of the triplet calculus it provides
//!
//! * non-crossing-partition combinatorics and moment/cumulant conversions
//!   ([`cumulants`]),
//! * evaluation of free cumulant transforms, R-transforms and Cauchy
//!   transforms, plus spectral-density recovery by Stieltjes inversion
//!   ([`transforms`]),
//! * free Lévy bases over a ring of interval unions, described by
//!   characteristic quadruplets ([`levy_basis`]),
//! * integration of deterministic functions against a basis ([`integration`]),
//! * Kingman and Lévy–Itô decompositions ([`decomposition`]),
//! * a random-matrix Monte Carlo oracle with an in-repo Hermitian
//!   eigensolver and counter-based RNG ([`rmt`], [`rng`]).
//!
//! Everything is pure and deterministic; the crate is `no_std`-compatible
//! (`alloc` required) when built without the `std` feature.

#![cfg_attr(not(feature = "std"), no_std)]
// Validation uses `!(x > 0.0)` so NaN fails the check as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod cumulants;
pub mod decomposition;
pub mod integration;
pub mod levy_basis;
pub mod quad;
pub mod rmt;
pub mod rng;
pub mod transforms;
pub mod triplets;

mod error;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;
