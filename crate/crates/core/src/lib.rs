//! Numerical laboratory for translation semigroups on weighted function
//! spaces over `[0, ∞)`.
//!
//! * [`weights`]: weight functions, admissibility and summability tests.
//! * [`gridfn`]: grid functions, the semigroup `T_t`, the section maps `S_t`
//!   and exact orbit integrals.
//! * [`density`]: lower densities and bounded-gap utilities.
//! * [`fhc`]: separated families, tail thresholds, the frequently
//!   hypercyclic vector, return verification and periodic points.
//! * [`classify`]: per-weight dynamical verdicts with evidence.
//! * [`cli`]: configuration, reports and the command-line front end.

pub mod classify;
pub mod cli;
pub mod density;
pub mod fhc;
pub mod gridfn;
pub mod quadrature;
pub mod weights;
