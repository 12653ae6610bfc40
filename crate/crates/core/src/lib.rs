//! Exact deformation of the singular Sol structure on a pseudo-Anosov
//! mapping torus into half-pipe geometry.
//!
//! Given presentation data for the mapping torus of a pseudo-Anosov surface
//! map with orientable invariant foliations, this library computes, in exact
//! arithmetic over the dilatation's quadratic field:
//!
//! * the induced cohomology action and its eigenstructure,
//! * the twisted-cocycle deformation space at the metabelian holonomy,
//! * explicit half-pipe and Sol holonomy matrices with symbolic relation
//!   checks and rescaling limits,
//! * infinitesimal cone angles along the singular locus.

pub mod affine;
pub mod cohomology;
pub mod cone;
pub mod deformation;
pub mod error;
pub mod holonomy;
pub mod presentation;
pub mod qfield;
pub mod report;
pub mod words;

pub use error::Error;
pub use qfield::{QuadNum, SeriesQN};
pub use words::{Gen, GenClass, Letter, Word};
