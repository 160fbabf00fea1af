//! Free actions of finite abelian groups on finite-dimensional C*-algebras,
//! described through factor systems over a finite-dimensional base algebra.
//!
//! The crate is organized bottom-up: exact scalars, group and cohomology
//! machinery, bimodules over blockwise matrix algebras, factor systems, and
//! finally the assembled graded algebras with their freeness checks.

pub mod assemble;
pub mod bundles;
pub mod cohomology;
pub mod error;
pub mod factorsys;
pub mod fdcstar;
pub mod groups;
pub mod interval;
pub mod linalg;
pub mod scalars;
pub mod snf;
pub mod sysops;

pub use error::{Error, Result};
