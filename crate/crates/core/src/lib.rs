//! Reflected differential equations driven by càdlàg paths of bounded
//! p-variation.
//!
//! The crate is organised bottom-up:
//!
//! * [`path`]: step paths, p-variation, running maxima, coarsening, CSV I/O.
//! * [`skorokhod`]: the one-sided Skorokhod map with a moving lower barrier
//!   and its Lipschitz estimates in variation and sup norms.
//! * [`young`]: Riemann–Stieltjes integrals of step integrands and the
//!   zeta-constant Young bound.
//! * [`drivers`]: fractional Brownian motion, integrated drivers and fixture
//!   builders for drift drivers and barriers.
//! * [`sde`]: Euler schemes (uniform and jump-adaptive) for the reflected
//!   equation, plus refinement-based convergence control.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod check;
pub mod drivers;
pub mod path;
pub mod sde;
pub mod skorokhod;
pub mod stats;
pub mod young;

pub use path::{Interval, MatrixStepPath, PathError, StepPath, TimeGrid};
pub use skorokhod::{solve_sp, Reflection};
