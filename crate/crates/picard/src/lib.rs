//! Exact computation on Picard lattices of very general blowups of the plane.
//!
//! The crate provides:
//! - [`lattice`]: classes `dH - sum m_i E_i` with exact rational coordinates,
//!   the intersection pairing, canonical class, de Fernex sign test and the
//!   signature of the form on `K^perp`;
//! - [`cremona`]: the Cremona-Kantor group action and Cremona reduction;
//! - [`negcurves`]: enumeration and queries for `(-1)`-classes;
//! - [`kperp`]: the quadric cone of classes with `L^2 = K.L = 0`, rational
//!   point sampling, certified nefness tests and the three-way equivalence
//!   harness;
//! - [`uncollision`]: the uncollision map and good-ray certification;
//! - [`harness`]: drivers that build 10-dimensional subspaces whose quadric
//!   slice of the Mori cone boundary consists of certified good rays, search
//!   for de Fernex negative ones, and emit reports.

pub mod cremona;
pub mod error;
pub mod harness;
pub mod kperp;
pub mod lattice;
pub mod linalg;
pub mod negcurves;
pub mod uncollision;

pub use error::{Error, Result};
pub use lattice::{ClassVector, Rat, Ray, SignClass};
