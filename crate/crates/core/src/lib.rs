//! Finite-element solver for variational problems with a uniform bound on
//! the gradient norm, using p-power penalties and the multiplier
//! `λ_p = |∇u_p|^{p−2}` as an approximate Lagrange multiplier.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod domains;
pub mod fem;
pub mod linalg;
pub mod mesh;
pub mod problem;
pub mod solver;
pub mod analytic;
pub mod diagnostics;
