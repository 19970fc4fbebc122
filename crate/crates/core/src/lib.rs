//! Numerical core for entropy methods in functional inequalities.
//!
//! Everything in this crate is pure computation over `alloc` containers: no
//! file system, no threads, no clocks. The `entroflow` crate layers file
//! formats, the command line and parallel sweeps on top.
//!
//! Modules map onto the pieces of the machinery:
//!
//! * [`model`]: parameter algebra, radial grids, quadrature and the explicit
//!   Barenblatt / Aubin–Talenti profiles.
//! * [`constants`]: closed-form constants, exponents and regime classifiers.
//! * [`functionals`]: entropies, Fisher informations, deficits.
//! * [`flow`]: implicit time stepping of fast diffusion, its self-similar
//!   Fokker–Planck form and the linear heat / Ornstein–Uhlenbeck flows.
//! * [`spectra`]: weighted Sturm–Liouville eigenvalues and the κ₀ / κ₁
//!   constants of Ornstein–Uhlenbeck operators.
//! * [`sphere`]: pseudo-arclength continuation of zonal solutions on Sᵈ.
#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod constants;
pub mod error;
pub mod flow;
pub mod functionals;
pub mod linalg;
pub mod model;
pub mod quadrature;
pub mod special;
pub mod spectra;
pub mod sphere;

pub use error::{Error, Result};
