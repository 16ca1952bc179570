use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::graph::{IsoradialGraph, LatticeKind, Point2};
use crate::error::{Error, Result};
use crate::matching::DimerConfiguration;

/// One lozenge: two triangles glued along `short_diagonal`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lozenge {
    /// Corner vertices, counterclockwise.
    pub corners: [usize; 4],
    pub short_diagonal: [usize; 2],
}

/// A lozenge tiling, stored over the vertex set of the triangular region it tiles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LozengeTiling {
    pub vertices: Vec<Point2>,
    pub lozenges: Vec<Lozenge>,
    pub mesh: f64,
}

impl LozengeTiling {
    /// Reads a honeycomb dimer configuration as lozenges.
    pub fn from_matching(g: &IsoradialGraph, m: &DimerConfiguration) -> Result<Self> {
        if g.kind() != LatticeKind::Triangular {
            return Err(Error::MalformedTiling("lozenges come from triangular regions".into()));
        }
        m.validate(g)?;
        let lozenges = m
            .edges
            .iter()
            .map(|&e| {
                let d = g.dual_edges()[e];
                let apex = |f: usize| {
                    *g.face(f).vertices.iter().find(|&&v| v != d.tail && v != d.head).expect("triangle")
                };
                let mut corners = [d.tail, apex(d.white), d.head, apex(d.black)];
                sort_ccw(&mut corners, g.vertices());
                Lozenge { corners, short_diagonal: [d.tail, d.head] }
            })
            .collect();
        Ok(Self { vertices: g.vertices().to_vec(), lozenges, mesh: g.mesh() })
    }

    /// The honeycomb matching of `g` corresponding to this tiling.
    pub fn to_matching(&self, g: &IsoradialGraph) -> Result<DimerConfiguration> {
        let edges = self
            .lozenges
            .iter()
            .map(|l| {
                let [a, b] = l.short_diagonal;
                g.find_edge(a, b)
                    .and_then(|e| g.edge_dual(e))
                    .ok_or_else(|| Error::MalformedTiling("lozenge diagonal is not an interior edge".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        let m = DimerConfiguration::new(edges);
        m.validate(g)?;
        Ok(m)
    }

    /// Each lozenge must be a 60-degree rhombus of side `mesh`, and no two
    /// lozenges may overlap.
    pub fn validate(&self) -> Result<()> {
        let tol = 1e-9 * self.mesh;
        let mut triangles = HashSet::new();
        for (k, l) in self.lozenges.iter().enumerate() {
            if l.corners.iter().any(|&c| c >= self.vertices.len()) {
                return Err(Error::MalformedTiling(format!("lozenge {k} has an unknown corner")));
            }
            let p = l.corners.map(|c| self.vertices[c]);
            for t in 0..4 {
                if (p[t].dist(p[(t + 1) % 4]) - self.mesh).abs() > tol {
                    return Err(Error::MalformedTiling(format!("lozenge {k} has a side of wrong length")));
                }
            }
            let [a, b] = l.short_diagonal;
            if (self.vertices[a].dist(self.vertices[b]) - self.mesh).abs() > tol
                || !l.corners.contains(&a)
                || !l.corners.contains(&b)
            {
                return Err(Error::MalformedTiling(format!("lozenge {k} has a bad short diagonal")));
            }
            for apex in l.corners.iter().filter(|&&c| c != a && c != b) {
                let mut key = [a, b, *apex];
                key.sort_unstable();
                if !triangles.insert(key) {
                    return Err(Error::MalformedTiling(format!("lozenge {k} overlaps another lozenge")));
                }
            }
        }
        Ok(())
    }

    pub fn center(&self, k: usize) -> Point2 {
        let c = self.lozenges[k].corners;
        self.vertices[c[0]].midpoint(self.vertices[c[2]])
    }
}

fn sort_ccw(corners: &mut [usize; 4], pts: &[Point2]) {
    let cx = corners.iter().map(|&c| pts[c].x).sum::<f64>() / 4.0;
    let cy = corners.iter().map(|&c| pts[c].y).sum::<f64>() / 4.0;
    corners.sort_by(|&a, &b| {
        let ta = (pts[a].y - cy).atan2(pts[a].x - cx);
        let tb = (pts[b].y - cy).atan2(pts[b].x - cx);
        ta.total_cmp(&tb)
    });
}
