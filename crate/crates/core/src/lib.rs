//! Numerical Hilbert geometry on convex domains of the projective plane.
//!
//! Exact Hilbert distances, a finite-difference solver for the affine sphere
//! over a convex domain, the Blaschke metric it induces, and audits of the
//! comparison inequalities between the two metrics.

pub mod affine_sphere;
pub mod banded;
pub mod chord;
pub mod entropy;
pub mod error;
pub mod exact;
pub mod grid;
pub mod hilbert;
pub mod interp;
pub mod io;
pub mod par;
pub mod projective;
pub mod quad;
pub mod spectrum;
pub mod svg;

pub use error::{Error, Result};
