//! Margolis homology over exterior algebras E(Q), windowed dual Steenrod
//! comodules, and truncated Tate page models, all over F_p.
//!
//! Every graded object is a finite window onto a possibly infinite-type
//! object. Operations carry along the sub-window on which their output is
//! exact; degrees outside it are never reported as facts.

pub mod error;
pub mod fplin;
pub mod graded;
pub mod monalg;
pub mod margolis;
pub mod qmod;
pub mod random;
pub mod resolution;
pub mod steenrod;
pub mod suite;
pub mod tate;

pub use error::{Error, Result};
