//! Obstacles, meshes, deformation fields and set distances.

pub mod deformation;
pub mod domain;
pub mod hausdorff;
pub mod io;
pub mod mesh;
pub mod mesher;
pub mod shape;
pub mod transport;

pub use deformation::{Cutoff, DeformationField, FieldKind, Mat2};
pub use domain::{Geometry, ObservationArc, OuterBoundary, SafetyRegion};
pub use hausdorff::hausdorff_distance;
pub use mesh::{BoundaryEdge, BoundaryTag, NodeKind, TriangleMesh};
pub use mesher::{adapt_mesh, build_mesh, move_obstacle};
pub use shape::ObstacleShape;
pub use transport::{transport_data, Differentiation, TransportData};
