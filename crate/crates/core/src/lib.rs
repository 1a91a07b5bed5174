//! Affine Weyl group symmetries of Fuchsian systems attached to star-shaped
//! affine Dynkin diagrams (D4, E6, E7, E8), on three levels: exact parameter
//! vectors, concrete residue matrices, and point configurations on a
//! cuspidal cubic.

pub mod dynkin;
pub mod error;
pub mod exact;
pub mod fuchsian;
pub mod io;
pub mod linalg;
pub mod quiver;
pub mod sakai;
pub mod scalar;
pub mod weylops;

pub use dynkin::{AffineType, CartanMatrix, ParamVector, RootVector, StarGraph};
pub use error::{Error, Result};
pub use scalar::{C64, CQ, Q};
