//! Arithmetic invariants of adelically metrized line bundles on the
//! projective line over the rationals.
//!
//! The crate computes, for `O(1)` on P¹ carrying a canonical (Weil) or
//! Fubini–Study metric plus an archimedean polynomial twist:
//!
//! * normalized heights of algebraic points and their Galois-orbit measures
//!   ([`heights`]);
//! * Arakelov degrees, slopes and maximal slopes of normed integer lattices,
//!   operator heights of linear maps, and the slope inequality ([`lattices`]);
//! * section lattices of tensor powers with certified sup norms, successive
//!   minima filtrations, effective-section counts, and the asymptotic
//!   measure with its slope invariants ([`asympt`]);
//! * a numerical equidistribution test for sequences of Galois orbits based
//!   on differentiability of the tail-liminf height functional along metric
//!   twists, together with an exact integer semigroup harness for the
//!   underlying sandwich criterion ([`equidist`]);
//! * finite atomic measures on the Riemann sphere and step measures on the
//!   line, with transport distances and moment reconstruction ([`measures`]);
//! * an experiment runner with a JSON configuration schema and CSV/JSON
//!   artifacts ([`experiments`]), exposed by the `arakelov` binary.

pub mod asympt;
pub mod equidist;
pub mod error;
pub mod experiments;
pub mod heights;
pub mod lattices;
pub mod measures;
pub mod polyalg;

pub use error::{Error, Result};
