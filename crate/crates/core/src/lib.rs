//! Automorphisms of `C^3` (and `C^{k+1}`) tangent to the identity, built from
//! shears, together with the tools used to study them: truncated power series,
//! characteristic directions and directors, orbits, and basin rasters.

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod hakim;
pub mod jets;
pub mod maps;
pub mod verify;

pub use error::{Error, Result};
