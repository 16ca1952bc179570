use std::collections::HashMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of the plane, freely convertible to and from a complex number.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }

    pub fn dist(self, other: Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn scaled(self, s: f64) -> Self {
        Self::new(self.x * s, self.y * s)
    }

    pub fn midpoint(self, other: Point2) -> Self {
        Self::new(0.5 * (self.x + other.x), 0.5 * (self.y + other.y))
    }
}

impl From<Complex64> for Point2 {
    fn from(z: Complex64) -> Self {
        Self::new(z.re, z.im)
    }
}

impl From<Point2> for Complex64 {
    fn from(p: Point2) -> Self {
        p.to_complex()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    Black,
    White,
}

impl Color {
    pub fn opposite(self) -> Self {
        match self {
            Color::Black => Color::White,
            Color::White => Color::Black,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LatticeKind {
    Triangular,
    Square,
    LozengeDiagonals,
    Imported,
}

/// A bounded face of the primal graph, i.e. a vertex of the dual.
#[derive(Clone, Debug)]
pub struct Face {
    /// Primal vertices in counterclockwise order.
    pub vertices: Vec<usize>,
    pub center: Point2,
    pub color: Color,
}

/// Dual edge `wb` together with its primal edge oriented `tail -> head`
/// so that the black face lies on its left.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DualEdge {
    pub white: usize,
    pub black: usize,
    pub primal: usize,
    pub tail: usize,
    pub head: usize,
}

/// The rhombus `w, x, b, y` (counterclockwise) spanned by a dual edge and its primal edge.
#[derive(Clone, Copy, Debug)]
pub struct Rhombus {
    pub w: Point2,
    pub x: Point2,
    pub b: Point2,
    pub y: Point2,
    pub theta: f64,
}

#[derive(Clone, Debug)]
pub struct IsoradialGraph {
    pub(crate) kind: LatticeKind,
    pub(crate) radius: f64,
    pub(crate) mesh: f64,
    pub(crate) vertices: Vec<Point2>,
    pub(crate) lattice_coords: Option<Vec<[i64; 2]>>,
    /// Oriented `[tail, head]`: black face on the left when one exists.
    pub(crate) edges: Vec<[usize; 2]>,
    /// `[left, right]` faces of the oriented edge.
    pub(crate) edge_faces: Vec<[Option<usize>; 2]>,
    pub(crate) edge_dual: Vec<Option<usize>>,
    pub(crate) vertex_edges: Vec<Vec<usize>>,
    pub(crate) faces: Vec<Face>,
    pub(crate) face_edges: Vec<Vec<usize>>,
    pub(crate) dual_edges: Vec<DualEdge>,
    pub(crate) face_dual: Vec<Vec<usize>>,
    /// Primal edges whose two faces carry the same colour.
    pub(crate) monochromatic: Vec<usize>,
}

fn circumcenter(a: Point2, b: Point2, c: Point2) -> Point2 {
    let (bx, by) = (b.x - a.x, b.y - a.y);
    let (cx, cy) = (c.x - a.x, c.y - a.y);
    let d = 2.0 * (bx * cy - by * cx);
    let b2 = bx * bx + by * by;
    let c2 = cx * cx + cy * cy;
    Point2::new(a.x + (cy * b2 - by * c2) / d, a.y + (bx * c2 - cx * b2) / d)
}

fn signed_area(pts: &[Point2]) -> f64 {
    let n = pts.len();
    (0..n)
        .map(|i| {
            let (p, q) = (pts[i], pts[(i + 1) % n]);
            p.x * q.y - q.x * p.y
        })
        .sum::<f64>()
        * 0.5
}

impl IsoradialGraph {
    /// Assembles a graph from its bounded faces. Face vertex lists may be given
    /// in either orientation; they are stored counterclockwise.
    pub fn from_faces(
        kind: LatticeKind,
        radius: f64,
        mesh: f64,
        vertices: Vec<Point2>,
        faces: Vec<(Vec<usize>, Color)>,
        lattice_coords: Option<Vec<[i64; 2]>>,
    ) -> Result<Self> {
        if faces.is_empty() {
            return Err(Error::DegenerateExtent("region has no faces".into()));
        }
        if !(radius > 0.0 && mesh > 0.0) {
            return Err(Error::InvalidArgument("radius and mesh must be positive".into()));
        }
        let mut stored = Vec::with_capacity(faces.len());
        for (mut vs, color) in faces {
            if vs.len() < 3 || vs.iter().any(|&v| v >= vertices.len()) {
                return Err(Error::Invalid("face with fewer than 3 valid vertices".into()));
            }
            let pts: Vec<Point2> = vs.iter().map(|&v| vertices[v]).collect();
            if signed_area(&pts) < 0.0 {
                vs.reverse();
            }
            let center = circumcenter(vertices[vs[0]], vertices[vs[1]], vertices[vs[2]]);
            stored.push(Face { vertices: vs, center, color });
        }

        let mut edge_index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges: Vec<[usize; 2]> = Vec::new();
        let mut edge_faces: Vec<[Option<usize>; 2]> = Vec::new();
        let mut face_edges = vec![Vec::new(); stored.len()];
        let mut monochromatic = Vec::new();
        for (f, face) in stored.iter().enumerate() {
            let n = face.vertices.len();
            for k in 0..n {
                let (a, b) = (face.vertices[k], face.vertices[(k + 1) % n]);
                let key = (a.min(b), a.max(b));
                // the face lies on the left of a -> b
                let (oriented, side) = match face.color {
                    Color::Black => ([a, b], 0),
                    Color::White => ([b, a], 1),
                };
                let e = match edge_index.get(&key) {
                    Some(&e) => {
                        if edge_faces[e][side].is_some() {
                            monochromatic.push(e);
                            let other = 1 - side;
                            if edge_faces[e][other].is_none() {
                                edge_faces[e][other] = Some(f);
                            }
                        } else {
                            edge_faces[e][side] = Some(f);
                        }
                        e
                    }
                    None => {
                        let e = edges.len();
                        edges.push(oriented);
                        let mut sides = [None, None];
                        sides[side] = Some(f);
                        edge_faces.push(sides);
                        edge_index.insert(key, e);
                        e
                    }
                };
                face_edges[f].push(e);
            }
        }
        monochromatic.sort_unstable();
        monochromatic.dedup();

        let mut vertex_edges = vec![Vec::new(); vertices.len()];
        for (e, &[a, b]) in edges.iter().enumerate() {
            vertex_edges[a].push(e);
            vertex_edges[b].push(e);
        }

        let mut dual_edges = Vec::new();
        let mut edge_dual = vec![None; edges.len()];
        let mut face_dual = vec![Vec::new(); stored.len()];
        for (e, sides) in edge_faces.iter().enumerate() {
            if monochromatic.binary_search(&e).is_ok() {
                continue;
            }
            if let [Some(black), Some(white)] = *sides {
                let id = dual_edges.len();
                dual_edges.push(DualEdge { white, black, primal: e, tail: edges[e][0], head: edges[e][1] });
                edge_dual[e] = Some(id);
                face_dual[white].push(id);
                face_dual[black].push(id);
            }
        }

        Ok(Self {
            kind,
            radius,
            mesh,
            vertices,
            lattice_coords,
            edges,
            edge_faces,
            edge_dual,
            vertex_edges,
            faces: stored,
            face_edges,
            dual_edges,
            face_dual,
            monochromatic,
        })
    }

    pub fn kind(&self) -> LatticeKind {
        self.kind
    }

    /// Common circumradius at mesh 1.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn mesh(&self) -> f64 {
        self.mesh
    }

    /// Physical length of one rhombus side, `r * eps`.
    pub fn unit(&self) -> f64 {
        self.radius * self.mesh
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn vertex(&self, v: usize) -> Point2 {
        self.vertices[v]
    }

    pub fn lattice_coords(&self) -> Option<&[[i64; 2]]> {
        self.lattice_coords.as_deref()
    }

    pub fn vertex_at(&self, coord: [i64; 2]) -> Option<usize> {
        self.lattice_coords.as_ref()?.iter().position(|&c| c == coord)
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn edge_faces(&self, e: usize) -> [Option<usize>; 2] {
        self.edge_faces[e]
    }

    pub fn edge_dual(&self, e: usize) -> Option<usize> {
        self.edge_dual[e]
    }

    pub fn vertex_edges(&self, v: usize) -> &[usize] {
        &self.vertex_edges[v]
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn face(&self, f: usize) -> &Face {
        &self.faces[f]
    }

    pub fn face_edges(&self, f: usize) -> &[usize] {
        &self.face_edges[f]
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn dual_edges(&self) -> &[DualEdge] {
        &self.dual_edges
    }

    pub fn dual_edge(&self, e: usize) -> Result<&DualEdge> {
        self.dual_edges.get(e).ok_or(Error::UnknownEdge(e))
    }

    /// Dual edges incident to a dual vertex.
    pub fn face_dual(&self, f: usize) -> &[usize] {
        &self.face_dual[f]
    }

    pub fn monochromatic_edges(&self) -> &[usize] {
        &self.monochromatic
    }

    pub fn faces_of_color(&self, color: Color) -> Vec<usize> {
        (0..self.faces.len()).filter(|&f| self.faces[f].color == color).collect()
    }

    pub fn whites(&self) -> Vec<usize> {
        self.faces_of_color(Color::White)
    }

    pub fn blacks(&self) -> Vec<usize> {
        self.faces_of_color(Color::Black)
    }

    pub fn find_edge(&self, u: usize, v: usize) -> Option<usize> {
        self.vertex_edges[u].iter().copied().find(|&e| {
            let [a, b] = self.edges[e];
            (a == u && b == v) || (a == v && b == u)
        })
    }

    pub fn dual_edge_between(&self, a: usize, b: usize) -> Option<usize> {
        self.face_dual[a].iter().copied().find(|&e| {
            let d = &self.dual_edges[e];
            (d.white == a && d.black == b) || (d.white == b && d.black == a)
        })
    }

    pub fn rhombus_of(&self, e: usize) -> Result<Rhombus> {
        let d = self.dual_edge(e)?;
        let w = self.faces[d.white].center;
        let b = self.faces[d.black].center;
        let x = self.vertices[d.head];
        let y = self.vertices[d.tail];
        let (xw, yw) = (x.to_complex() - w.to_complex(), y.to_complex() - w.to_complex());
        let cross = xw.re * yw.im - xw.im * yw.re;
        let dot = xw.re * yw.re + xw.im * yw.im;
        let theta = 0.5 * cross.abs().atan2(dot);
        Ok(Rhombus { w, x, b, y, theta })
    }

    pub fn rhombus_angle(&self, e: usize) -> Result<f64> {
        Ok(self.rhombus_of(e)?.theta)
    }

    pub fn critical_weight(&self, e: usize) -> Result<f64> {
        Ok(2.0 * self.rhombus_angle(e)?.sin())
    }

    /// Half-angle of the rhombus of any primal edge, including boundary edges,
    /// as half the angle the edge subtends at the centre of an adjacent face.
    pub fn primal_theta(&self, e: usize) -> f64 {
        if let Some(d) = self.edge_dual[e] {
            return self.rhombus_angle(d).expect("dual edge exists");
        }
        let [a, b] = self.edges[e];
        let (p, q) = (self.vertices[a], self.vertices[b]);
        let Some(f) = self.edge_faces[e].iter().flatten().next() else {
            let s = p.dist(q) / (2.0 * self.unit());
            return s.clamp(-1.0, 1.0).asin();
        };
        let c = self.faces[*f].center;
        let (u, v) = ((p.x - c.x, p.y - c.y), (q.x - c.x, q.y - c.y));
        0.5 * (u.0 * v.1 - u.1 * v.0).abs().atan2(u.0 * v.0 + u.1 * v.1)
    }

    /// A vertex is interior when every incident edge separates two faces of the region.
    pub fn is_interior_vertex(&self, v: usize) -> bool {
        !self.vertex_edges[v].is_empty()
            && self.vertex_edges[v].iter().all(|&e| self.edge_faces[e].iter().all(Option::is_some))
    }

    /// Faces around an interior vertex.
    pub fn vertex_faces(&self, v: usize) -> Vec<usize> {
        let mut fs: Vec<usize> =
            self.vertex_edges[v].iter().flat_map(|&e| self.edge_faces[e].iter().flatten().copied()).collect();
        fs.sort_unstable();
        fs.dedup();
        fs
    }

    /// Area of the dual face `v*` (polygon through the circumcenters around `v`).
    pub fn dual_face_area(&self, v: usize) -> Result<f64> {
        if v >= self.vertices.len() {
            return Err(Error::InvalidArgument(format!("no vertex {v}")));
        }
        if !self.is_interior_vertex(v) {
            return Err(Error::BoundaryVertex(v));
        }
        let p = self.vertices[v];
        let mut pts: Vec<(f64, Point2)> = self
            .vertex_faces(v)
            .into_iter()
            .map(|f| {
                let c = self.faces[f].center;
                ((c.y - p.y).atan2(c.x - p.x), c)
            })
            .collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let poly: Vec<Point2> = pts.into_iter().map(|(_, c)| c).collect();
        Ok(signed_area(&poly).abs())
    }

    /// Copy with every coordinate multiplied by `eps`.
    pub fn scale(&self, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidArgument(format!("scale factor {eps} must be positive")));
        }
        let mut g = self.clone();
        g.mesh *= eps;
        for p in &mut g.vertices {
            *p = p.scaled(eps);
        }
        for f in &mut g.faces {
            f.center = f.center.scaled(eps);
        }
        Ok(g)
    }

    /// Lexicographically smallest primal vertex by position.
    pub fn reference_vertex(&self) -> usize {
        (0..self.vertices.len())
            .min_by(|&a, &b| {
                let (p, q) = (self.vertices[a], self.vertices[b]);
                p.x.total_cmp(&q.x).then(p.y.total_cmp(&q.y))
            })
            .unwrap_or(0)
    }

    /// Vertex closest to a point.
    pub fn nearest_vertex(&self, p: Point2) -> usize {
        (0..self.vertices.len())
            .min_by(|&a, &b| self.vertices[a].dist(p).total_cmp(&self.vertices[b].dist(p)))
            .unwrap_or(0)
    }

    /// Dual vertex position in rhombus units.
    pub fn face_z(&self, f: usize) -> Complex64 {
        self.faces[f].center.to_complex() / self.unit()
    }

    pub fn vertex_z(&self, v: usize) -> Complex64 {
        self.vertices[v].to_complex() / self.unit()
    }
}
