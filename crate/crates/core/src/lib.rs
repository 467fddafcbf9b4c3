//! Finite element solvers and convergence studies for frictionless
//! unilateral contact in two-dimensional linear elasticity.
//!
//! The crate solves the Signorini problem on the unit square two ways and
//! measures the distance between them:
//!
//! * [`contact`] — the penalty formulation: the contact inequality is
//!   replaced by the boundary condition σ_n = −(1/ε)[u_n]_+ and the
//!   resulting nonsmooth equation is solved with a semismooth Newton
//!   method using exact sub-edge integration of the clipped normal trace.
//! * [`vi`] — a primal-dual active-set solver for the constrained
//!   variational inequality, used as the reference in all error studies.
//!
//! [`norms`] supplies H¹/L²/energy errors between nested meshes and
//! discrete fractional Sobolev norms on the contact trace; [`study`]
//! drives the ε-, (h,ε)- and patch convergence studies behind the
//! `unicontact study` command line.

pub mod cases;
pub mod contact;
pub mod elasticity;
pub mod error;
pub mod mesh;
pub mod norms;
pub mod sparse;
pub mod study;
pub mod vi;

pub use error::{Error, Result};
