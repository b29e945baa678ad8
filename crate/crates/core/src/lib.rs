//! Z₂-valued degree map of framed circles in spin manifolds.
//!
//! The pieces, bottom up:
//!
//! * [`numkit`]: dense orthonormalization, minimum-norm solves, kernels.
//! * [`spinlift`]: the class of a loop in π₁(SO(m)) by lifting it through
//!   Spin(m) inside the Clifford algebra, plus a quaternion cross-check.
//! * [`framedlink`]: framed circles in a presented ambient manifold, their
//!   index, the degree map κ and Pontryagin's δ.
//! * [`tracer`]: framed links extracted from regular-value preimages of maps
//!   and from zero loci of bundle sections.
//! * [`scenarios`] and [`linkfile`]: the built-in example registry and the
//!   JSON link format consumed by the `fbk` command.

// NaN must fail every acceptance test, so `!(x < y)` is deliberate.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod framedlink;
pub mod linkfile;
pub mod numkit;
pub mod report;
pub mod scenarios;
pub mod spinlift;
pub mod tracer;
pub mod z2;

pub use error::{Error, ErrorKind, Result};
pub use numkit::{Matrix, Tolerances, Vector};
pub use z2::Z2;
