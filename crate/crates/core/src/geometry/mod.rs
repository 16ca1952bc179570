//! Isoradial graphs, their bipartite duals and rhombus data.

mod builders;
mod graph;
pub mod io;
mod lozenge;
mod validate;

pub use builders::{
    build_from_triangles, build_lozenge_with_diagonals, build_square_lattice, build_triangular_lattice,
    flat_hexagon_centers, hexagon_centers, tri_nearest, tri_position, Triangle, TriangularRegion,
};
pub use graph::{Color, DualEdge, Face, IsoradialGraph, LatticeKind, Point2, Rhombus};
pub use lozenge::{Lozenge, LozengeTiling};
pub use validate::{validate_isoradial, ValidationReport, VALIDATION_TOLERANCE};

pub fn rhombus_of(g: &IsoradialGraph, e: usize) -> crate::Result<Rhombus> {
    g.rhombus_of(e)
}

pub fn rhombus_angle(g: &IsoradialGraph, e: usize) -> crate::Result<f64> {
    g.rhombus_angle(e)
}

pub fn critical_weight(g: &IsoradialGraph, e: usize) -> crate::Result<f64> {
    g.critical_weight(e)
}

pub fn dual_face_area(g: &IsoradialGraph, v: usize) -> crate::Result<f64> {
    g.dual_face_area(v)
}

pub fn scale(g: &IsoradialGraph, eps: f64) -> crate::Result<IsoradialGraph> {
    g.scale(eps)
}
