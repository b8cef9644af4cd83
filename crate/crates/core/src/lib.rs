//! Explicit integral solution operators for the `∂̄`-equation on weighted
//! homogeneous varieties, with the numerical machinery needed to evaluate and
//! check them: singular planar quadrature, charts of the regular part,
//! `(0,q)`-forms with symbolic coefficients, and a verification harness.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod corpus;
pub mod forms;
pub mod kernel;
pub mod linalg;
pub mod solver;
pub mod variety;
pub mod verify;

pub type C64 = num_complex::Complex64;
