use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::IsoradialGraph;

/// A perfect matching of a finite region's dual, as sorted dual-edge ids.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DimerConfiguration {
    pub edges: Vec<usize>,
}

impl DimerConfiguration {
    pub fn new(mut edges: Vec<usize>) -> Self {
        edges.sort_unstable();
        Self { edges }
    }

    pub fn contains(&self, e: usize) -> bool {
        self.edges.binary_search(&e).is_ok()
    }

    /// Indicator vector over all dual edges.
    pub fn indicator(&self, g: &IsoradialGraph) -> Vec<bool> {
        let mut ind = vec![false; g.dual_edges().len()];
        for &e in &self.edges {
            ind[e] = true;
        }
        ind
    }

    /// Partner of every dual vertex.
    pub fn partners(&self, g: &IsoradialGraph) -> Vec<Option<usize>> {
        let mut p = vec![None; g.num_faces()];
        for &e in &self.edges {
            let d = g.dual_edges()[e];
            p[d.white] = Some(d.black);
            p[d.black] = Some(d.white);
        }
        p
    }

    /// Checks that every dual vertex is covered exactly once.
    pub fn validate(&self, g: &IsoradialGraph) -> Result<()> {
        let mut covered = vec![0u8; g.num_faces()];
        for &e in &self.edges {
            let d = g.dual_edge(e)?;
            covered[d.white] += 1;
            covered[d.black] += 1;
        }
        match covered.iter().position(|&c| c != 1) {
            None => Ok(()),
            Some(f) => Err(Error::Invalid(format!("dual vertex {f} covered {} times", covered[f]))),
        }
    }

    /// Product of critical weights.
    pub fn weight(&self, g: &IsoradialGraph) -> Result<f64> {
        self.edges.iter().map(|&e| g.critical_weight(e)).product()
    }
}

/// Maximum matching of the dual graph by Hopcroft-Karp; `Some` when it is perfect.
pub fn find_perfect_matching(g: &IsoradialGraph) -> Option<DimerConfiguration> {
    let whites = g.whites();
    let blacks = g.blacks();
    if whites.len() != blacks.len() {
        return None;
    }
    let mut black_index = vec![usize::MAX; g.num_faces()];
    for (k, &b) in blacks.iter().enumerate() {
        black_index[b] = k;
    }
    let adj: Vec<Vec<usize>> = whites
        .iter()
        .map(|&w| g.face_dual(w).iter().map(|&e| black_index[g.dual_edges()[e].black]).collect())
        .collect();
    let n = whites.len();
    let mut match_w: Vec<Option<usize>> = vec![None; n];
    let mut match_b: Vec<Option<usize>> = vec![None; n];

    loop {
        // layered BFS from free whites
        let mut dist = vec![usize::MAX; n];
        let mut queue = VecDeque::new();
        for w in 0..n {
            if match_w[w].is_none() {
                dist[w] = 0;
                queue.push_back(w);
            }
        }
        let mut found = false;
        while let Some(w) = queue.pop_front() {
            for &b in &adj[w] {
                match match_b[b] {
                    None => found = true,
                    Some(w2) if dist[w2] == usize::MAX => {
                        dist[w2] = dist[w] + 1;
                        queue.push_back(w2);
                    }
                    _ => {}
                }
            }
        }
        if !found {
            break;
        }
        // iterative DFS along the layers
        let mut next = vec![0usize; n];
        let mut augmented = false;
        for root in 0..n {
            if match_w[root].is_some() {
                continue;
            }
            let mut stack = vec![root];
            while let Some(&w) = stack.last() {
                if next[w] >= adj[w].len() {
                    dist[w] = usize::MAX;
                    stack.pop();
                    continue;
                }
                let b = adj[w][next[w]];
                next[w] += 1;
                match match_b[b] {
                    None => {
                        // flip the path
                        let mut bb = b;
                        while let Some(wk) = stack.pop() {
                            let prev = match_w[wk];
                            match_w[wk] = Some(bb);
                            match_b[bb] = Some(wk);
                            if let Some(pb) = prev {
                                bb = pb;
                            }
                        }
                        augmented = true;
                        break;
                    }
                    Some(w2) if dist[w2] == dist[w] + 1 => stack.push(w2),
                    _ => {}
                }
            }
        }
        if !augmented {
            break;
        }
    }
    if match_w.iter().any(Option::is_none) {
        return None;
    }
    let edges = (0..n)
        .map(|w| {
            let b = blacks[match_w[w].expect("perfect")];
            g.dual_edge_between(whites[w], b).expect("adjacent")
        })
        .collect();
    let m = DimerConfiguration::new(edges);
    debug_assert!(m.validate(g).is_ok());
    Some(m)
}
