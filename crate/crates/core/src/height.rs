//! Reference flow, height functions of dimer configurations, and exact height
//! moments through kernel determinants.
//!
//! Primal edges are oriented with the black face on their left. Walking along
//! an edge in that direction the height changes by `omega0(e) - 1` when the
//! crossing dual edge is matched and by `omega0(e)` otherwise.

use std::collections::VecDeque;
use std::io::Write;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Color, IsoradialGraph};
use crate::gibbs::{edge_probability, truncated_correlation};
use crate::kernel::{DiracOperator, InfiniteKernel, InverseKernel};
use crate::matching::DimerConfiguration;

const HEIGHT_TOLERANCE: f64 = 1e-9;

/// `theta / pi` on every primal edge; on edges carrying a dual edge this is the
/// flow from the white to the black endpoint.
#[derive(Clone, Debug, Serialize)]
pub struct ReferenceFlow {
    values: Vec<f64>,
}

impl ReferenceFlow {
    pub fn new(g: &IsoradialGraph) -> Result<Self> {
        let values: Vec<f64> = (0..g.edges().len()).map(|e| g.primal_theta(e) / std::f64::consts::PI).collect();
        let flow = Self { values };
        let err = flow.max_divergence_error(g);
        if err > 1e-12 {
            return Err(Error::Invalid(format!("reference flow divergence off by {err:.3e}")));
        }
        Ok(flow)
    }

    /// Value on primal edge `e`.
    pub fn value(&self, e: usize) -> f64 {
        self.values[e]
    }

    /// Value on dual edge `d`.
    pub fn dual_value(&self, g: &IsoradialGraph, d: usize) -> f64 {
        self.values[g.dual_edges()[d].primal]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Outflow at a dual vertex: `+sum` at white, `-sum` at black.
    pub fn divergence(&self, g: &IsoradialGraph, f: usize) -> f64 {
        let s: f64 = g.face_dual(f).iter().map(|&d| self.dual_value(g, d)).sum();
        match g.face(f).color {
            Color::White => s,
            Color::Black => -s,
        }
    }

    /// Largest deviation from `+-1` over dual vertices with a complete neighbourhood.
    pub fn max_divergence_error(&self, g: &IsoradialGraph) -> f64 {
        (0..g.num_faces())
            .filter(|&f| g.face_dual(f).len() == g.face(f).vertices.len())
            .map(|f| {
                let target = if g.face(f).color == Color::White { 1.0 } else { -1.0 };
                (self.divergence(g, f) - target).abs()
            })
            .fold(0.0, f64::max)
    }
}

pub fn reference_flow(g: &IsoradialGraph) -> Result<ReferenceFlow> {
    ReferenceFlow::new(g)
}

/// Height on primal vertices, normalised by `h(reference) = 0`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HeightField {
    pub values: Vec<f64>,
    pub reference: usize,
}

impl HeightField {
    pub fn value(&self, v: usize) -> f64 {
        self.values[v]
    }

    pub fn increment(&self, u: usize, v: usize) -> f64 {
        self.values[v] - self.values[u]
    }

    /// Copy with `c` added everywhere (no longer normalised).
    pub fn shifted(&self, c: f64) -> Self {
        Self { values: self.values.iter().map(|h| h + c).collect(), reference: self.reference }
    }
}

/// Height of a perfect matching by breadth-first integration from `v0`.
pub fn height_from_matching(g: &IsoradialGraph, m: &DimerConfiguration, v0: usize) -> Result<HeightField> {
    let flow = ReferenceFlow::new(g)?;
    height_with_flow(g, &flow, m, v0)
}

pub fn height_with_flow(
    g: &IsoradialGraph,
    flow: &ReferenceFlow,
    m: &DimerConfiguration,
    v0: usize,
) -> Result<HeightField> {
    if v0 >= g.vertices().len() {
        return Err(Error::InvalidArgument(format!("no vertex {v0}")));
    }
    m.validate(g)?;
    let ind = m.indicator(g);
    let step = |e: usize| -> f64 {
        let matched = g.edge_dual(e).is_some_and(|d| ind[d]);
        flow.value(e) - if matched { 1.0 } else { 0.0 }
    };
    let mut h = vec![f64::NAN; g.vertices().len()];
    h[v0] = 0.0;
    let mut queue = VecDeque::from([v0]);
    while let Some(x) = queue.pop_front() {
        for &e in g.vertex_edges(x) {
            let [t, hd] = g.edges()[e];
            let (y, val) = if t == x { (hd, h[x] + step(e)) } else { (t, h[x] - step(e)) };
            if h[y].is_nan() {
                h[y] = val;
                queue.push_back(y);
            } else if (h[y] - val).abs() > HEIGHT_TOLERANCE {
                return Err(Error::Invalid("height is not path independent on this region".into()));
            }
        }
    }
    if h.iter().any(|x| x.is_nan()) {
        return Err(Error::Disconnected);
    }
    Ok(HeightField { values: h, reference: v0 })
}

/// Inverse of [`height_from_matching`]: every face must see exactly one edge
/// whose increment is `omega0 - 1`.
pub fn matching_from_height(g: &IsoradialGraph, h: &HeightField) -> Result<DimerConfiguration> {
    let flow = ReferenceFlow::new(g)?;
    if h.values.len() != g.vertices().len() {
        return Err(Error::InvalidArgument("height field does not match the graph".into()));
    }
    let mut edges = Vec::new();
    let mut count = vec![0usize; g.num_faces()];
    for (e, &[t, hd]) in g.edges().iter().enumerate() {
        let face = g.edge_faces(e).iter().flatten().copied().next().unwrap_or(0);
        let inc = h.values[hd] - h.values[t];
        let w = flow.value(e);
        if (inc - w).abs() <= HEIGHT_TOLERANCE {
            continue;
        }
        if (inc - (w - 1.0)).abs() > HEIGHT_TOLERANCE {
            return Err(Error::InvalidHeight { face, reason: format!("increment {inc} on edge {e}, expected {w} or {}", w - 1.0) });
        }
        let Some(d) = g.edge_dual(e) else {
            return Err(Error::InvalidHeight { face, reason: format!("boundary edge {e} marked as matched") });
        };
        let de = g.dual_edges()[d];
        count[de.white] += 1;
        count[de.black] += 1;
        edges.push(d);
    }
    if let Some(f) = count.iter().position(|&c| c != 1) {
        return Err(Error::InvalidHeight { face: f, reason: format!("{} edges with increment omega0 - 1", count[f]) });
    }
    Ok(DimerConfiguration::new(edges))
}

/// Dual edge crossed by a path step together with `theta / pi`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PathEdge {
    pub edge: usize,
    pub mu: f64,
}

/// `h(v) - h(u) = sum_e (1_e - mu_e) - sum_f (1_f - mu_f) + boundary`, where the
/// `e` edges are crossed with the white face on the left of the walk and the
/// `f` edges with the black face on the left. Boundary steps are deterministic.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct IncrementRepresentation {
    pub e_edges: Vec<PathEdge>,
    pub f_edges: Vec<PathEdge>,
    pub boundary: f64,
    pub boundary_steps: usize,
}

impl IncrementRepresentation {
    pub fn new(g: &IsoradialGraph, flow: &ReferenceFlow, path: &[usize]) -> Result<Self> {
        let mut r = Self::default();
        for p in path.windows(2) {
            let e = g.find_edge(p[0], p[1]).ok_or_else(|| {
                Error::InvalidArgument(format!("vertices {} and {} are not adjacent", p[0], p[1]))
            })?;
            let forward = g.edges()[e][0] == p[0];
            match g.edge_dual(e) {
                Some(d) => {
                    let pe = PathEdge { edge: d, mu: flow.value(e) };
                    if forward {
                        r.f_edges.push(pe);
                    } else {
                        r.e_edges.push(pe);
                    }
                }
                None => {
                    r.boundary += if forward { flow.value(e) } else { -flow.value(e) };
                    r.boundary_steps += 1;
                }
            }
        }
        Ok(r)
    }

    /// The increment for a matching given as an indicator over dual edges.
    pub fn evaluate(&self, indicator: &[bool]) -> f64 {
        let term = |p: &PathEdge| if indicator[p.edge] { 1.0 - p.mu } else { -p.mu };
        self.e_edges.iter().map(term).sum::<f64>() - self.f_edges.iter().map(term).sum::<f64>() + self.boundary
    }

    /// Mean of the increment when every edge has marginal `theta / pi`.
    pub fn expected(&self) -> f64 {
        self.boundary
    }

    /// All random terms as `(dual edge, sign)`.
    pub fn signed_edges(&self) -> Vec<(usize, i8)> {
        self.e_edges.iter().map(|p| (p.edge, 1)).chain(self.f_edges.iter().map(|p| (p.edge, -1))).collect()
    }
}

pub fn height_increment_representation(g: &IsoradialGraph, path: &[usize]) -> Result<IncrementRepresentation> {
    IncrementRepresentation::new(g, &ReferenceFlow::new(g)?, path)
}

/// Random walk of `steps` primal edges from `u`.
pub fn random_walk_path<R: Rng + ?Sized>(g: &IsoradialGraph, u: usize, steps: usize, rng: &mut R) -> Vec<usize> {
    let mut path = vec![u];
    let mut x = u;
    for _ in 0..steps {
        let es = g.vertex_edges(x);
        if es.is_empty() {
            break;
        }
        let [t, h] = g.edges()[es[rng.random_range(0..es.len())]];
        x = if t == x { h } else { t };
        path.push(x);
    }
    path
}

/// The two L-shaped lattice paths from `u` to `v`: first coordinate first, or second first.
pub fn lattice_paths(g: &IsoradialGraph, u: usize, v: usize) -> Result<[Vec<usize>; 2]> {
    let coords = g
        .lattice_coords()
        .ok_or_else(|| Error::InvalidArgument("lattice paths need lattice coordinates".into()))?;
    let (a, b) = (coords[u], coords[v]);
    let walk = |first: usize| -> Result<Vec<usize>> {
        let mut c = a;
        let mut path = vec![u];
        for axis in [first, 1 - first] {
            while c[axis] != b[axis] {
                c[axis] += (b[axis] - c[axis]).signum();
                path.push(g.vertex_at(c).ok_or(Error::Disconnected)?);
            }
        }
        Ok(path)
    };
    Ok([walk(0)?, walk(1)?])
}

/// Smallest distance between a vertex of `p` and a vertex of `q`.
pub fn path_separation(g: &IsoradialGraph, p: &[usize], q: &[usize]) -> f64 {
    p.iter()
        .flat_map(|&a| q.iter().map(move |&b| g.vertex(a).dist(g.vertex(b))))
        .fold(f64::INFINITY, f64::min)
}

/// L-shaped paths for `u1 -> v1` and `u2 -> v2` at least `2 * mesh` apart.
pub fn disjoint_lattice_paths(
    g: &IsoradialGraph,
    (u1, v1): (usize, usize),
    (u2, v2): (usize, usize),
) -> Result<(Vec<usize>, Vec<usize>)> {
    let (ps, qs) = (lattice_paths(g, u1, v1)?, lattice_paths(g, u2, v2)?);
    let min = 2.0 * g.mesh() * (1.0 - 1e-9);
    for p in &ps {
        for q in &qs {
            if path_separation(g, p, q) >= min {
                return Ok((p.clone(), q.clone()));
            }
        }
    }
    Err(Error::OverlappingPaths)
}

/// Mean of an increment under the measure of `kinv`.
pub fn height_mean_along(
    g: &IsoradialGraph,
    dirac: &DiracOperator,
    kinv: &dyn InverseKernel,
    r: &IncrementRepresentation,
) -> Result<f64> {
    let mut s = r.boundary;
    for (p, sign) in r.e_edges.iter().map(|p| (p, 1.0)).chain(r.f_edges.iter().map(|p| (p, -1.0))) {
        s += sign * (edge_probability(g, dirac, kinv, p.edge)? - p.mu);
    }
    Ok(s)
}

/// Covariance of two increments as a double sum of truncated pair correlations.
pub fn height_covariance_along(
    g: &IsoradialGraph,
    dirac: &DiracOperator,
    kinv: &dyn InverseKernel,
    r1: &IncrementRepresentation,
    r2: &IncrementRepresentation,
) -> Result<f64> {
    let (a, b) = (r1.signed_edges(), r2.signed_edges());
    if a.iter().any(|x| b.iter().any(|y| x.0 == y.0)) {
        return Err(Error::OverlappingPaths);
    }
    let rows = crate::mc::par_map(&a, |&(ea, sa)| -> Result<f64> {
        let mut s = 0.0;
        for &(eb, sb) in &b {
            s += truncated_correlation(g, dirac, kinv, &[ea, eb], &[sa, sb])?.value;
        }
        Ok(s)
    });
    rows.into_iter().sum()
}

/// `E[(h(v1) - h(u1)) (h(v2) - h(u2))]` under the infinite-volume measure,
/// along disjoint L-shaped lattice paths.
pub fn exact_height_covariance(kinv: &InfiniteKernel, u1: usize, v1: usize, u2: usize, v2: usize) -> Result<f64> {
    let g = kinv.graph();
    let (p, q) = disjoint_lattice_paths(g, (u1, v1), (u2, v2))?;
    covariance_on_paths(kinv, &p, &q)
}

/// As [`exact_height_covariance`] along explicit paths.
pub fn covariance_on_paths(kinv: &InfiniteKernel, p: &[usize], q: &[usize]) -> Result<f64> {
    let g = kinv.graph();
    let flow = ReferenceFlow::new(g)?;
    let (r1, r2) = (IncrementRepresentation::new(g, &flow, p)?, IncrementRepresentation::new(g, &flow, q)?);
    if r1.boundary_steps + r2.boundary_steps > 0 {
        return Err(Error::InvalidArgument("path runs along the boundary of the region".into()));
    }
    if p.iter().any(|x| q.contains(x)) {
        return Err(Error::OverlappingPaths);
    }
    height_covariance_along(g, kinv.dirac(), kinv, &r1, &r2)
}

/// CSV with columns `vertex_id,x,y,h`.
pub fn write_height_csv<W: Write>(out: &mut W, g: &IsoradialGraph, h: &HeightField) -> Result<()> {
    writeln!(out, "vertex_id,x,y,h")?;
    for (v, val) in h.values.iter().enumerate() {
        let p = g.vertex(v);
        writeln!(out, "{v},{:.17e},{:.17e},{:.17e}", p.x, p.y, val)?;
    }
    Ok(())
}
