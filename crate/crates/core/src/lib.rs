//! Separated-variable reduced-order solvers for 2D advection–diffusion on a
//! rectangle: a Q1 finite-element reference, Hierarchical Model reduction
//! (HiMod), Proper Generalized Decomposition (PGD, optionally parametric in the
//! diffusivity) and the HiPOD snapshot reduction built on HiMod.

pub mod error;
pub mod exec;
pub mod experiments;
pub mod fe;
pub mod himod;
pub mod hipod;
pub mod linalg;
pub mod pgd;
pub mod pgd_param;
pub mod problem;
pub mod quadrature;
pub mod separated;

pub use error::{Error, Result};
pub use exec::Exec;
