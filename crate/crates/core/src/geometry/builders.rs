use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::graph::{Color, IsoradialGraph, LatticeKind, Point2};
use super::lozenge::LozengeTiling;
use crate::error::{Error, Result};

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// A triangle of the triangular lattice: `up` triangles have vertices
/// `(i,j), (i+1,j), (i,j+1)`, down triangles `(i+1,j), (i+1,j+1), (i,j+1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Triangle {
    pub j: i64,
    pub i: i64,
    pub up: bool,
}

impl Triangle {
    pub const fn new(i: i64, j: i64, up: bool) -> Self {
        Self { j, i, up }
    }

    pub fn corners(self) -> [[i64; 2]; 3] {
        let (i, j) = (self.i, self.j);
        if self.up {
            [[i, j], [i + 1, j], [i, j + 1]]
        } else {
            [[i + 1, j], [i + 1, j + 1], [i, j + 1]]
        }
    }

    /// The six triangles around a lattice vertex.
    pub fn around(c: [i64; 2]) -> [Triangle; 6] {
        let [i, j] = c;
        [
            Triangle::new(i, j, true),
            Triangle::new(i - 1, j, true),
            Triangle::new(i, j - 1, true),
            Triangle::new(i - 1, j, false),
            Triangle::new(i - 1, j - 1, false),
            Triangle::new(i, j - 1, false),
        ]
    }
}

/// Position of the triangular-lattice point `(i, j)` for unit edge length.
pub fn tri_position(c: [i64; 2]) -> Point2 {
    Point2::new(c[0] as f64 + 0.5 * c[1] as f64, 0.5 * SQRT3 * c[1] as f64)
}

/// Lattice coordinates of the nearest triangular-lattice point.
pub fn tri_nearest(p: Point2) -> [i64; 2] {
    let jf = p.y / (0.5 * SQRT3);
    let ifl = p.x - 0.5 * jf;
    let mut best = [ifl.round() as i64, jf.round() as i64];
    let mut dist = f64::INFINITY;
    for di in -1..=1 {
        for dj in -1..=1 {
            let c = [ifl.floor() as i64 + di, jf.floor() as i64 + dj];
            let d = tri_position(c).dist(p);
            if d < dist {
                dist = d;
                best = c;
            }
        }
    }
    best
}

/// Regions of the triangular lattice.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case")]
pub enum TriangularRegion {
    /// All triangles with lattice coordinates in `[0,width) x [0,height)`.
    /// Such a region has a single lozenge tiling.
    Parallelogram { width: usize, height: usize },
    /// Union of unit hexagons centred on the index-3 sublattice, arranged in
    /// `cols` columns of `rows` hexagons. Always tileable, flat boundary height.
    Hexagons { cols: usize, rows: usize },
    /// Union of unit hexagons whose centres lie in a large hexagon with sides
    /// parallel to the lattice directions, `radius` centre rows from the middle
    /// hexagon to each side. Every side is of the same zigzag type, so the mean
    /// height is flat up to the lattice scale.
    FlatHexagon { radius: usize },
    /// An explicit set of triangles.
    Triangles(Vec<Triangle>),
}

impl TriangularRegion {
    pub fn triangles(&self) -> Result<Vec<Triangle>> {
        let set: BTreeSet<Triangle> = match self {
            TriangularRegion::Parallelogram { width, height } => {
                if *width == 0 || *height == 0 {
                    return Err(Error::DegenerateExtent(format!("parallelogram {width}x{height}")));
                }
                let mut s = BTreeSet::new();
                for j in 0..*height as i64 {
                    for i in 0..*width as i64 {
                        s.insert(Triangle::new(i, j, true));
                        s.insert(Triangle::new(i, j, false));
                    }
                }
                s
            }
            TriangularRegion::Hexagons { cols, rows } => {
                if *cols == 0 || *rows == 0 {
                    return Err(Error::DegenerateExtent(format!("hexagon array {cols}x{rows}")));
                }
                hexagon_centers(*cols, *rows).into_iter().flat_map(Triangle::around).collect()
            }
            TriangularRegion::FlatHexagon { radius } => {
                if *radius == 0 {
                    return Err(Error::DegenerateExtent("flat hexagon of radius 0".into()));
                }
                flat_hexagon_centers(*radius).into_iter().flat_map(Triangle::around).collect()
            }
            TriangularRegion::Triangles(ts) => {
                if ts.is_empty() {
                    return Err(Error::DegenerateExtent("empty triangle list".into()));
                }
                ts.iter().copied().collect()
            }
        };
        Ok(set.into_iter().collect())
    }
}

/// Centres of the hexagons in a `cols x rows` hexagon array. Column `k` sits at
/// `x = 1.5 k`, odd columns are shifted up by half a hexagon.
pub fn hexagon_centers(cols: usize, rows: usize) -> Vec<[i64; 2]> {
    let mut out = Vec::with_capacity(cols * rows);
    for k in 0..cols as i64 {
        for m in 0..rows as i64 {
            let odd = k & 1;
            let j = 2 * m + odd;
            // x = 1.5 k = i + j / 2
            let i = (3 * k - j) / 2;
            out.push([i, j]);
        }
    }
    out
}

/// Hexagon centres `[i, j]` (with `i = j mod 3`) whose distance to each of the
/// three lines through the origin along the lattice directions is at most
/// `radius` rows of centres.
pub fn flat_hexagon_centers(radius: usize) -> Vec<[i64; 2]> {
    let r = radius as i64;
    let mut out = Vec::new();
    for j in -r..=r {
        for i in -2 * r - 1..=2 * r + 1 {
            if (i - j).rem_euclid(3) != 0 {
                continue;
            }
            // distances in units of sqrt(3)/2: j, i + j and -i along the three normals
            if j.abs() <= r && (i + j).abs() <= r && i.abs() <= r {
                out.push([i, j]);
            }
        }
    }
    out
}

pub fn build_triangular_lattice(region: &TriangularRegion) -> Result<IsoradialGraph> {
    build_from_triangles(&region.triangles()?)
}

pub fn build_from_triangles(tris: &[Triangle]) -> Result<IsoradialGraph> {
    let mut index: HashMap<[i64; 2], usize> = HashMap::new();
    let mut coords: Vec<[i64; 2]> = tris.iter().flat_map(|t| t.corners()).collect();
    coords.sort_by_key(|c| (c[1], c[0]));
    coords.dedup();
    for (k, c) in coords.iter().enumerate() {
        index.insert(*c, k);
    }
    let vertices = coords.iter().map(|&c| tri_position(c)).collect();
    let faces = tris
        .iter()
        .map(|t| {
            let vs = t.corners().iter().map(|c| index[c]).collect();
            (vs, if t.up { Color::Black } else { Color::White })
        })
        .collect();
    IsoradialGraph::from_faces(LatticeKind::Triangular, 1.0 / SQRT3, 1.0, vertices, faces, Some(coords))
}

/// Square lattice with `width x height` unit square faces; face `(i, j)` is black when `i + j` is even.
pub fn build_square_lattice(width: usize, height: usize) -> Result<IsoradialGraph> {
    if width == 0 || height == 0 {
        return Err(Error::DegenerateExtent(format!("rectangle {width}x{height}")));
    }
    let (w, h) = (width as i64, height as i64);
    let mut coords = Vec::new();
    for j in 0..=h {
        for i in 0..=w {
            coords.push([i, j]);
        }
    }
    let id = |i: i64, j: i64| (j * (w + 1) + i) as usize;
    let vertices = coords.iter().map(|c| Point2::new(c[0] as f64, c[1] as f64)).collect();
    let mut faces = Vec::new();
    for j in 0..h {
        for i in 0..w {
            let vs = vec![id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)];
            let color = if (i + j) % 2 == 0 { Color::Black } else { Color::White };
            faces.push((vs, color));
        }
    }
    IsoradialGraph::from_faces(LatticeKind::Square, std::f64::consts::FRAC_1_SQRT_2, 1.0, vertices, faces, Some(coords))
}

/// Splits every lozenge by both diagonals into four right triangles. Vertices
/// keep the tiling's vertex numbering, lozenge centres are appended after them.
/// The natural circumradius 1/2 (relative to the lozenge side) is kept.
pub fn build_lozenge_with_diagonals(lz: &LozengeTiling) -> Result<IsoradialGraph> {
    lz.validate()?;
    let n0 = lz.vertices.len();
    let mut vertices = lz.vertices.clone();
    let mut tris: Vec<Vec<usize>> = Vec::with_capacity(4 * lz.lozenges.len());
    for (k, l) in lz.lozenges.iter().enumerate() {
        let c = n0 + k;
        let corners = l.corners;
        vertices.push(lz.vertices[corners[0]].midpoint(lz.vertices[corners[2]]));
        for t in 0..4 {
            tris.push(vec![c, corners[t], corners[(t + 1) % 4]]);
        }
    }
    let colors = two_color_faces(&tris)?;
    let faces = tris.into_iter().zip(colors).collect();
    IsoradialGraph::from_faces(LatticeKind::LozengeDiagonals, 0.5, lz.mesh, vertices, faces, None)
}

/// Proper 2-colouring of faces across shared edges, the first face black.
fn two_color_faces(faces: &[Vec<usize>]) -> Result<Vec<Color>> {
    let mut by_edge: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (f, vs) in faces.iter().enumerate() {
        for k in 0..vs.len() {
            let (a, b) = (vs[k], vs[(k + 1) % vs.len()]);
            by_edge.entry((a.min(b), a.max(b))).or_default().push(f);
        }
    }
    let mut adj = vec![Vec::new(); faces.len()];
    for fs in by_edge.values() {
        if fs.len() > 2 {
            return Err(Error::MalformedTiling("an edge is shared by more than two faces".into()));
        }
        if let [a, b] = fs[..] {
            adj[a].push(b);
            adj[b].push(a);
        }
    }
    let mut color: Vec<Option<Color>> = vec![None; faces.len()];
    for start in 0..faces.len() {
        if color[start].is_some() {
            continue;
        }
        color[start] = Some(Color::Black);
        let mut stack = vec![start];
        while let Some(f) = stack.pop() {
            let c = color[f].expect("coloured");
            for &g in &adj[f] {
                match color[g] {
                    None => {
                        color[g] = Some(c.opposite());
                        stack.push(g);
                    }
                    Some(cg) if cg == c => {
                        return Err(Error::MalformedTiling("dual graph is not bipartite".into()))
                    }
                    _ => {}
                }
            }
        }
    }
    Ok(color.into_iter().map(|c| c.expect("coloured")).collect())
}
