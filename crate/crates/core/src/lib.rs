//! Elaborating type checker for a small dependent type theory with
//! meta-variables.
//!
//! Terms are kept β-normal by hereditary substitution. Surface terms are
//! elaborated into well-typed terms plus heterogeneous constraints, which a
//! pattern unifier then solves, postponing what it cannot yet decide.

#![cfg_attr(not(test), no_std)]
// Errors carry the offending terms for diagnostics.
#![allow(clippy::result_large_err)]

extern crate alloc;

pub mod elaborate;
pub mod normalize;
pub mod pretty;
pub mod syntax;
pub mod typecheck;
pub mod unify;
