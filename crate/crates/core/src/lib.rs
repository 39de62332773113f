//! Numerics for W-invariant Dunkl kernels of type A.
//!
//! The spherical function of A_n is evaluated from its interlacing-integral
//! recursion; heat, Newton and stable kernels are built on top of it and each
//! kernel can be compared against its closed-form envelope over parameter grids.

pub mod asymlab;
pub mod certify;
pub mod chamber;
pub mod error;
pub mod heatkernel;
pub mod newton;
pub mod par;
pub mod quad;
pub mod rootsys;
pub mod selftest;
pub mod special;
pub mod spherical;
pub mod stable;
pub mod subordinator;

pub use error::{Error, Result};
pub use par::Execution;
pub use quad::KernelValue;
pub use rootsys::{ChamberPoint, Root, RootSystemA};
