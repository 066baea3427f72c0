//! Constant curvature −1 geometry: the half-plane, Möbius isometries, the
//! genus-two octagon group and closed-geodesic enumeration.

mod enumerate;
mod group;
mod plane;
mod word;

pub use enumerate::{enumerate_conjugacy_classes, enumerate_with_budget, ClosedGeodesic, Enumeration, OctagonArc};
pub use group::{build_genus2_group, FuchsianGroup};
pub use plane::{
    geodesic_frame, hyperbolic_distance, wrap_angle, BoundaryPoint, HPoint, IsometryMatrix,
};
pub use word::{GroupWord, Letter};

