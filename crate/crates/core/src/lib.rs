//! Workbench for binary cyclic codes with locality.
//!
//! The library is organised around the zero set of a cyclic code: which
//! discrete-Fourier-transform coefficients vanish on every codeword.  From the
//! zero set alone we derive repair locality (single parity checks, two-level
//! hierarchies, availability), coordinate orderings that expose that locality,
//! minimal trellises with predictable state complexity, and soft-decision
//! decoders that try cheap local decoding before falling back to ordered
//! statistics.

pub mod bits;
pub mod cyclic;
mod error;
pub mod galois;
pub mod locality;
pub mod locosd;
pub mod ordering;
pub mod osd;
pub mod sim;
pub mod trellis;

pub use error::{Error, Result};
