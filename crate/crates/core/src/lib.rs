//! Exact desk-scale analytics for intersecting and intersection-free
//! permutation families: symmetric-group Fourier analysis, a weak regularity
//! decomposition into juntas, combinatorial pseudorandomness checkers and
//! bootstrapping, matching surgery, and extremal search.

pub mod acceptance;
pub mod error;
pub mod extremal;
pub mod io;
pub mod perm;
pub mod pipeline;
pub mod pseudorandom;
pub mod regularity;
pub mod rep;
pub mod spectral;
pub mod surgery;

pub use error::{Error, Result};
