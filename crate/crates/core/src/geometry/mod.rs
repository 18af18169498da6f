//! Polyhedra, cones, subspaces and the angles and projections between them.

pub mod angle;
pub mod cone;
pub mod polyhedron;
pub mod pushover;
pub mod qp;
pub mod sphere;
pub mod subspace;

pub use angle::{angle_to_subspace, cone_angle};
pub use cone::{ConvexCone, GeneratorForm, HalfspaceForm};
pub use polyhedron::{Polyhedron, Projection};
pub use pushover::{pushover_cone, pushover_union, PushoverMember, UnionOfCones};
pub use subspace::{AffineSubspace, Subspace};
