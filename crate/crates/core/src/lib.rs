//! Realizing simplicial 2-spheres as underlying complexes of non-singular
//! complete fans in dimension three.

pub mod atlas;
pub mod canonical;
pub mod enumerate;
pub mod fan;
pub mod ops;
pub mod planar_io;
pub mod realize;
pub mod sphere;

pub use canonical::{CanonicalForm, CanonicalLabeling};
pub use sphere::{validate, DegreeProfile, Face, SphereError, Subgraph, Triangulation, VertexId};
