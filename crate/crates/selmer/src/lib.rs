//! Adjoint homological gamma-Selmer modules of SL2 knot-group
//! representations.
//!
//! The library computes, exactly over layered coefficient rings, the
//! elementary divisors and Fitting-ideal generators of the Selmer module
//! attached to a knot-group representation and a chosen element gamma, the
//! Porti-normalized generator for gamma = longitude, and the two-variable
//! order polynomial of the t-deformed complex together with its
//! factorization-consistency check.

pub mod error;
pub mod ring;

pub mod euclid;
pub mod factor;
pub mod local;

pub mod mat;
pub mod rep;
pub mod words;

pub mod selmer;
pub mod twovar;

pub mod fixtures;
pub mod job;
pub mod report;
