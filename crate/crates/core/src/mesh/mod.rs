//! Nested structured triangulations of the unit square, node stars and
//! element patches.

mod hierarchy;
mod patch;
mod trimesh;

pub use hierarchy::{barycentric, refine_hierarchy, MeshHierarchy};
pub use patch::{element_patch, Patch};
pub use trimesh::{build_uniform_mesh, TriMesh};

pub(crate) use patch::grow_once;
