//! Numerical lab for common hypercyclicity of weighted backward shift families.
//!
//! The crate models finite truncations of `ℓ_p` / `c_0` sequences and the
//! weighted backward and forward shifts acting on them, builds coverings of
//! compact parameter sets together with integer time schedules, checks the
//! sufficient criteria for common hypercyclicity on those schedules,
//! synthesizes finite approximate common hypercyclic vectors, and probes the
//! negative (separation / gauge) side of the theory.
//!
//! All weight products are handled through their logarithms
//! `f_n(a) = Σ_{j≤n} log w_j(a)` so that schedules reaching large times never
//! overflow.
// `!(x < y)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constructor;
pub mod criteria;
pub mod error;
mod par;
pub mod paramsets;
pub mod probes;
pub mod schedule;
pub mod seqspace;

pub use error::{Error, Result};
