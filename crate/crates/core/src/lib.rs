//! Exact geometry of sphere arrangements: Voronoi diagram of spheres,
//! quasi-triangulation, beta-complex, union-of-balls volume and area,
//! voids and channels, with grid and Monte-Carlo reference oracles.

pub mod awvd;
pub mod betacomplex;
pub mod channels;
pub mod quasitri;
pub mod error;
pub mod fixtures;
pub mod geometry;
pub mod model;
pub mod oracle_grid;
pub mod pdb_io;
pub mod pipeline;
pub mod predicates;
pub mod spatial;
pub mod surface;

pub use error::{Error, GeomError, IoError, Result};
pub use model::{Atom, Ball, Molecule, RadiusKind, RadiusModel, Vec3};
pub use predicates::{TangentSphere, Tolerances};
