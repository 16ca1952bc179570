use serde::Serialize;

use super::graph::{IsoradialGraph, Point2};

/// Outcome of [`validate_isoradial`].
#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub passed: bool,
    /// Largest relative deviation of a face's vertex distances from `r * eps`.
    pub max_radius_deviation: f64,
    pub worst_face: Option<usize>,
    pub faces_with_bad_radius: Vec<usize>,
    /// Faces whose circumcenter falls outside the closed face.
    pub centers_outside: Vec<usize>,
    /// Primal edges separating two faces of the same colour.
    pub monochromatic_edges: Vec<usize>,
    /// Interior primal vertices of degree below 3.
    pub low_degree_vertices: Vec<usize>,
    pub tolerance: f64,
}

impl ValidationReport {
    pub fn summary(&self) -> String {
        if self.passed {
            return format!("ok (max radius deviation {:.3e})", self.max_radius_deviation);
        }
        let mut parts = Vec::new();
        if !self.faces_with_bad_radius.is_empty() {
            parts.push(format!(
                "circumradius off by {:.3e} at face {}",
                self.max_radius_deviation,
                self.worst_face.unwrap_or(0)
            ));
        }
        if let Some(f) = self.centers_outside.first() {
            parts.push(format!("circumcenter outside face {f}"));
        }
        if let Some(e) = self.monochromatic_edges.first() {
            parts.push(format!("non-bipartite dual adjacency across primal edge {e}"));
        }
        if let Some(v) = self.low_degree_vertices.first() {
            parts.push(format!("interior vertex {v} has degree below 3"));
        }
        parts.join("; ")
    }
}

pub const VALIDATION_TOLERANCE: f64 = 1e-9;

pub fn validate_isoradial(g: &IsoradialGraph) -> ValidationReport {
    let tol = VALIDATION_TOLERANCE;
    let r = g.unit();
    let mut max_dev = 0.0f64;
    let mut worst = None;
    let mut bad = Vec::new();
    let mut outside = Vec::new();
    for (f, face) in g.faces().iter().enumerate() {
        let mut dev = 0.0f64;
        for &v in &face.vertices {
            dev = dev.max((g.vertex(v).dist(face.center) - r).abs() / r);
        }
        if dev > max_dev {
            max_dev = dev;
            worst = Some(f);
        }
        if dev > tol {
            bad.push(f);
        }
        let pts: Vec<Point2> = face.vertices.iter().map(|&v| g.vertex(v)).collect();
        if !in_closed_polygon(face.center, &pts, tol * r) {
            outside.push(f);
        }
    }
    let low_degree = (0..g.vertices().len())
        .filter(|&v| g.is_interior_vertex(v) && g.vertex_edges(v).len() < 3)
        .collect::<Vec<_>>();
    let mono = g.monochromatic_edges().to_vec();
    ValidationReport {
        passed: bad.is_empty() && outside.is_empty() && mono.is_empty() && low_degree.is_empty(),
        max_radius_deviation: max_dev,
        worst_face: worst,
        faces_with_bad_radius: bad,
        centers_outside: outside,
        monochromatic_edges: mono,
        low_degree_vertices: low_degree,
        tolerance: tol,
    }
}

/// Point in a counterclockwise convex-or-not polygon, boundary included up to `slack`.
fn in_closed_polygon(p: Point2, poly: &[Point2], slack: f64) -> bool {
    let n = poly.len();
    (0..n).all(|i| {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        let len = a.dist(b);
        let cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
        cross / len >= -slack
    })
}
