use std::collections::VecDeque;
use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{Color, IsoradialGraph};

const ANGLE_TOL: f64 = 1e-9;

/// A vertex of the rhombus complex: a dual vertex (face) or a primal vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Node {
    Dual(usize),
    Primal(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepTag {
    AwayFromWhite,
    TowardBlack,
    TowardWhite,
    AwayFromBlack,
}

impl StepTag {
    /// Exponent contributed by the factor `(z - e^{i alpha})`.
    pub fn exponent(self) -> i32 {
        match self {
            StepTag::AwayFromWhite | StepTag::TowardBlack => -1,
            StepTag::TowardWhite | StepTag::AwayFromBlack => 1,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct RhombusStep {
    pub from: Node,
    pub to: Node,
    /// `e^{i alpha}`: primal minus white, or black minus primal.
    pub direction: Complex64,
    pub tag: StepTag,
}

#[derive(Clone, Debug, Default)]
pub struct RhombusPath {
    pub steps: Vec<RhombusStep>,
}

/// The rational function `prod_k (z - e^{i alpha_k})^{n_k}`.
#[derive(Clone, Debug, Default)]
pub struct DiscreteExponential {
    /// `(alpha in [0, 2 pi), n)` with distinct angles and nonzero exponents.
    pub factors: Vec<(f64, i32)>,
    pub path: Option<RhombusPath>,
}

fn normalize_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if TAU - r < ANGLE_TOL {
        0.0
    } else {
        r
    }
}

fn same_angle(a: f64, b: f64) -> bool {
    let d = (a - b).rem_euclid(TAU);
    d < ANGLE_TOL || TAU - d < ANGLE_TOL
}

impl DiscreteExponential {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn from_factors(raw: impl IntoIterator<Item = (f64, i32)>) -> Self {
        let mut factors: Vec<(f64, i32)> = Vec::new();
        for (a, n) in raw {
            let a = normalize_angle(a);
            match factors.iter_mut().find(|(b, _)| same_angle(a, *b)) {
                Some(slot) => slot.1 += n,
                None => factors.push((a, n)),
            }
        }
        factors.retain(|&(_, n)| n != 0);
        factors.sort_by(|x, y| x.0.total_cmp(&y.0));
        Self { factors, path: None }
    }

    pub fn from_path(path: RhombusPath) -> Self {
        let raw: Vec<(f64, i32)> =
            path.steps.iter().map(|s| (s.direction.arg(), s.tag.exponent())).collect();
        let mut f = Self::from_factors(raw);
        f.path = Some(path);
        f
    }

    pub fn is_identity(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn degree(&self) -> i32 {
        self.factors.iter().map(|f| f.1).sum()
    }

    pub fn zeros(&self) -> Vec<(f64, i32)> {
        self.factors.iter().copied().filter(|f| f.1 > 0).collect()
    }

    pub fn poles(&self) -> Vec<(f64, i32)> {
        self.factors.iter().copied().filter(|f| f.1 < 0).map(|(a, n)| (a, -n)).collect()
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let log: Complex64 =
            self.factors.iter().map(|&(a, n)| (z - Complex64::from_polar(1.0, a)).ln() * n as f64).sum();
        log.exp()
    }

    /// `f(0) = prod (-e^{i alpha})^n`, a unit complex number.
    pub fn at_zero(&self) -> Complex64 {
        let phase: f64 = self.factors.iter().map(|&(a, n)| n as f64 * (a + PI)).sum();
        Complex64::from_polar(1.0, phase.rem_euclid(TAU))
    }

    /// Displacement `v - w` in rhombus units implied by the factors.
    pub fn displacement(&self) -> Complex64 {
        -self.factors.iter().map(|&(a, n)| Complex64::from_polar(n as f64, a)).sum::<Complex64>()
    }

    pub fn same_function(&self, other: &Self) -> bool {
        self.factors.len() == other.factors.len()
            && self.factors.iter().zip(&other.factors).all(|(x, y)| same_angle(x.0, y.0) && x.1 == y.1)
    }
}

fn neighbors(g: &IsoradialGraph, n: Node) -> Vec<Node> {
    match n {
        Node::Dual(f) => g.face(f).vertices.iter().map(|&v| Node::Primal(v)).collect(),
        Node::Primal(v) => g.vertex_faces(v).into_iter().map(Node::Dual).collect(),
    }
}

/// One edge of the rhombus complex traversed `from -> to`.
pub fn rhombus_step(g: &IsoradialGraph, from: Node, to: Node) -> Result<RhombusStep> {
    let (dual, primal, from_dual) = match (from, to) {
        (Node::Dual(f), Node::Primal(v)) => (f, v, true),
        (Node::Primal(v), Node::Dual(f)) => (f, v, false),
        _ => return Err(Error::InvalidArgument("rhombus steps join a dual and a primal vertex".into())),
    };
    if !g.face(dual).vertices.contains(&primal) {
        return Err(Error::InvalidArgument("step endpoints are not incident".into()));
    }
    let d = g.face_z(dual);
    let p = g.vertex_z(primal);
    let color = g.face(dual).color;
    let raw = match color {
        Color::White => p - d,
        Color::Black => d - p,
    };
    let direction = raw / raw.norm();
    let tag = match (color, from_dual) {
        (Color::White, true) => StepTag::AwayFromWhite,
        (Color::White, false) => StepTag::TowardWhite,
        (Color::Black, true) => StepTag::AwayFromBlack,
        (Color::Black, false) => StepTag::TowardBlack,
    };
    Ok(RhombusStep { from, to, direction, tag })
}

fn bfs_path(g: &IsoradialGraph, from: Node, to: Node) -> Result<Vec<Node>> {
    if from == to {
        return Ok(vec![from]);
    }
    let nf = g.num_faces();
    let idx = |n: Node| match n {
        Node::Dual(f) => f,
        Node::Primal(v) => nf + v,
    };
    let mut prev: Vec<Option<Node>> = vec![None; nf + g.vertices().len()];
    let mut seen = vec![false; prev.len()];
    seen[idx(from)] = true;
    let mut queue = VecDeque::from([from]);
    while let Some(n) = queue.pop_front() {
        for m in neighbors(g, n) {
            if !seen[idx(m)] {
                seen[idx(m)] = true;
                prev[idx(m)] = Some(n);
                if m == to {
                    let mut path = vec![to];
                    let mut cur = to;
                    while let Some(p) = prev[idx(cur)] {
                        path.push(p);
                        cur = p;
                    }
                    path.reverse();
                    return Ok(path);
                }
                queue.push_back(m);
            }
        }
    }
    Err(Error::Disconnected)
}

fn path_from_nodes(g: &IsoradialGraph, nodes: &[Node]) -> Result<RhombusPath> {
    let steps = nodes.windows(2).map(|p| rhombus_step(g, p[0], p[1])).collect::<Result<Vec<_>>>()?;
    Ok(RhombusPath { steps })
}

/// Shortest rhombus path between two vertices of the rhombus complex.
pub fn rhombus_path(g: &IsoradialGraph, from: Node, to: Node) -> Result<RhombusPath> {
    path_from_nodes(g, &bfs_path(g, from, to)?)
}

/// A rhombus path routed through a random intermediate vertex.
pub fn random_rhombus_path<R: Rng>(g: &IsoradialGraph, from: Node, to: Node, rng: &mut R) -> Result<RhombusPath> {
    let via = if rng.random::<bool>() {
        Node::Dual(rng.random_range(0..g.num_faces()))
    } else {
        Node::Primal(rng.random_range(0..g.vertices().len()))
    };
    let mut nodes = bfs_path(g, from, via)?;
    let tail = bfs_path(g, via, to)?;
    nodes.extend_from_slice(&tail[1..]);
    path_from_nodes(g, &nodes)
}

/// `f_{wv}` built step by step along a rhombus path.
pub fn discrete_exponential(g: &IsoradialGraph, w: usize, v: Node) -> Result<DiscreteExponential> {
    if g.face(w).color != Color::White {
        return Err(Error::InvalidArgument(format!("dual vertex {w} is not white")));
    }
    Ok(DiscreteExponential::from_path(rhombus_path(g, Node::Dual(w), v)?))
}

/// Exponent vectors of `f_{root, v}` for every vertex of the rhombus complex,
/// so that `f_{wv}` is the difference of two stored vectors.
#[derive(Clone, Debug)]
pub struct ExponentialField {
    directions: Vec<Complex64>,
    exps: Vec<i32>,
    component: Vec<usize>,
    num_faces: usize,
}

impl ExponentialField {
    pub fn new(g: &IsoradialGraph) -> Result<Self> {
        let nf = g.num_faces();
        let n = nf + g.vertices().len();
        let mut directions: Vec<Complex64> = Vec::new();
        // incidence list: (face, vertex, direction id, exponent of the face -> vertex step)
        let mut incidences: Vec<(usize, usize, usize, i32)> = Vec::new();
        for (f, face) in g.faces().iter().enumerate() {
            for &v in &face.vertices {
                let step = rhombus_step(g, Node::Dual(f), Node::Primal(v))?;
                let id = match directions.iter().position(|d| (d - step.direction).norm() < 1e-8) {
                    Some(id) => id,
                    None => {
                        directions.push(step.direction);
                        directions.len() - 1
                    }
                };
                incidences.push((f, v, id, step.tag.exponent()));
            }
        }
        let dim = directions.len();
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (k, &(f, v, _, _)) in incidences.iter().enumerate() {
            adj[f].push(k);
            adj[nf + v].push(k);
        }
        let mut exps = vec![0i32; n * dim];
        let mut component = vec![usize::MAX; n];
        for start in 0..n {
            if component[start] != usize::MAX || adj[start].is_empty() {
                continue;
            }
            component[start] = start;
            let mut queue = VecDeque::from([start]);
            while let Some(a) = queue.pop_front() {
                for &k in &adj[a] {
                    let (f, v, id, e) = incidences[k];
                    let (b, sign) = if a == f { (nf + v, 1) } else { (f, -1) };
                    if component[b] != usize::MAX {
                        continue;
                    }
                    component[b] = start;
                    let (src, dst) = (a * dim, b * dim);
                    for d in 0..dim {
                        exps[dst + d] = exps[src + d];
                    }
                    exps[dst + id] += sign * e;
                    queue.push_back(b);
                }
            }
        }
        for &(f, v, id, e) in &incidences {
            let (a, b) = (f * dim, (nf + v) * dim);
            let consistent = (0..dim).all(|d| exps[b + d] - exps[a + d] == if d == id { e } else { 0 });
            if !consistent {
                return Err(Error::Invalid("discrete exponential is path dependent (graph not isoradial?)".into()));
            }
        }
        Ok(Self { directions, exps, component, num_faces: nf })
    }

    pub fn directions(&self) -> &[Complex64] {
        &self.directions
    }

    fn index(&self, n: Node) -> usize {
        match n {
            Node::Dual(f) => f,
            Node::Primal(v) => self.num_faces + v,
        }
    }

    /// Exponent vector of `f_{from, to}` over [`Self::directions`].
    pub fn exponents(&self, from: Node, to: Node) -> Result<Vec<i32>> {
        let dim = self.directions.len();
        let (a, b) = (self.index(from), self.index(to));
        if self.component[a] == usize::MAX || self.component[a] != self.component[b] {
            return Err(Error::Disconnected);
        }
        Ok((0..dim).map(|d| self.exps[b * dim + d] - self.exps[a * dim + d]).collect())
    }

    pub fn exponential(&self, from: Node, to: Node) -> Result<DiscreteExponential> {
        let ex = self.exponents(from, to)?;
        Ok(DiscreteExponential::from_factors(
            ex.iter().enumerate().map(|(d, &n)| (self.directions[d].arg(), n)),
        ))
    }
}
