//! JSON import and export of graphs.

use serde::{Deserialize, Serialize};

use super::graph::{Color, IsoradialGraph, LatticeKind, Point2};
use crate::error::{Error, Result};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VertexRecord {
    pub id: usize,
    pub x: f64,
    pub y: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub id: usize,
    pub tail: usize,
    pub head: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DualVertexRecord {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    pub color: Color,
    /// Boundary of the face, counterclockwise.
    pub face: Vec<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DualEdgeRecord {
    pub id: usize,
    pub primal: usize,
    pub white: usize,
    pub black: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GraphDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub header: Option<serde_json::Value>,
    pub lattice: LatticeKind,
    pub mesh: f64,
    pub radius: f64,
    pub primal_vertices: Vec<VertexRecord>,
    pub primal_edges: Vec<EdgeRecord>,
    pub dual_vertices: Vec<DualVertexRecord>,
    pub dual_edges: Vec<DualEdgeRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice_coords: Option<Vec<[i64; 2]>>,
}

impl GraphDocument {
    pub fn from_graph(g: &IsoradialGraph) -> Self {
        Self {
            header: None,
            lattice: g.kind(),
            mesh: g.mesh(),
            radius: g.radius(),
            primal_vertices: g
                .vertices()
                .iter()
                .enumerate()
                .map(|(id, p)| VertexRecord { id, x: p.x, y: p.y })
                .collect(),
            primal_edges: g
                .edges()
                .iter()
                .enumerate()
                .map(|(id, &[tail, head])| EdgeRecord { id, tail, head })
                .collect(),
            dual_vertices: g
                .faces()
                .iter()
                .enumerate()
                .map(|(id, f)| DualVertexRecord {
                    id,
                    x: f.center.x,
                    y: f.center.y,
                    color: f.color,
                    face: f.vertices.clone(),
                })
                .collect(),
            dual_edges: g
                .dual_edges()
                .iter()
                .enumerate()
                .map(|(id, d)| DualEdgeRecord { id, primal: d.primal, white: d.white, black: d.black })
                .collect(),
            lattice_coords: g.lattice_coords().map(<[_]>::to_vec),
        }
    }

    /// Rebuilds the graph from the face lists; ids follow the document order.
    pub fn to_graph(&self) -> Result<IsoradialGraph> {
        for (k, v) in self.primal_vertices.iter().enumerate() {
            if v.id != k {
                return Err(Error::Invalid(format!("primal vertex ids must be 0..n, found {} at {k}", v.id)));
            }
        }
        for (k, f) in self.dual_vertices.iter().enumerate() {
            if f.id != k {
                return Err(Error::Invalid(format!("dual vertex ids must be 0..n, found {} at {k}", f.id)));
            }
        }
        let vertices = self.primal_vertices.iter().map(|v| Point2::new(v.x, v.y)).collect();
        let faces = self.dual_vertices.iter().map(|f| (f.face.clone(), f.color)).collect();
        IsoradialGraph::from_faces(self.lattice, self.radius, self.mesh, vertices, faces, self.lattice_coords.clone())
    }
}

pub fn to_json(g: &IsoradialGraph, header: Option<serde_json::Value>) -> Result<String> {
    let mut doc = GraphDocument::from_graph(g);
    doc.header = header;
    Ok(serde_json::to_string_pretty(&doc)?)
}

pub fn from_json(s: &str) -> Result<IsoradialGraph> {
    let doc: GraphDocument = serde_json::from_str(s)?;
    doc.to_graph()
}
