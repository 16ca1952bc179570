//! Local dimer statistics from the determinant formula, and an exhaustive
//! enumeration oracle for small regions.

use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::IsoradialGraph;
use crate::kernel::{Backend, DiracOperator, InverseKernel};
use crate::matching::DimerConfiguration;

pub const IMAGINARY_WARNING: f64 = 1e-8;
pub const MAX_EVENT_SIZE: usize = 64;
pub const ENUMERATION_BUDGET: usize = 1_000_000;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct LocalStatistic {
    /// Real part of the determinant formula, never clamped.
    pub value: f64,
    pub imag_residue: f64,
    pub backend: Backend,
}

impl LocalStatistic {
    pub fn warning(&self) -> bool {
        self.imag_residue.abs() > IMAGINARY_WARNING
    }
}

fn check_event(g: &IsoradialGraph, edges: &[usize]) -> Result<()> {
    if edges.len() > MAX_EVENT_SIZE {
        return Err(Error::InvalidArgument(format!("{} edges exceed the limit {MAX_EVENT_SIZE}", edges.len())));
    }
    for &e in edges {
        g.dual_edge(e)?;
    }
    Ok(())
}

/// `Re K(w, b) K^{-1}(b, w)`; equals `theta / pi` in infinite volume.
pub fn edge_probability(g: &IsoradialGraph, dirac: &DiracOperator, kinv: &dyn InverseKernel, e: usize) -> Result<f64> {
    let d = g.dual_edge(e)?;
    Ok((dirac.value(e) * kinv.inverse(d.black, d.white)?).re)
}

fn kernel_block(g: &IsoradialGraph, kinv: &dyn InverseKernel, edges: &[usize]) -> Result<DMatrix<Complex64>> {
    let k = edges.len();
    let mut m = DMatrix::zeros(k, k);
    for i in 0..k {
        let bi = g.dual_edges()[edges[i]].black;
        for j in 0..k {
            m[(i, j)] = kinv.inverse(bi, g.dual_edges()[edges[j]].white)?;
        }
    }
    Ok(m)
}

/// `(prod K(w_i, b_i)) det(K^{-1}(b_i, w_j))`, the probability that all edges are present.
pub fn local_statistic(
    g: &IsoradialGraph,
    dirac: &DiracOperator,
    kinv: &dyn InverseKernel,
    edges: &[usize],
) -> Result<LocalStatistic> {
    check_event(g, edges)?;
    if edges.is_empty() {
        return Ok(LocalStatistic { value: 1.0, imag_residue: 0.0, backend: kinv.backend() });
    }
    let m = kernel_block(g, kinv, edges)?;
    let prefactor: Complex64 = edges.iter().map(|&e| dirac.value(e)).product();
    let v = prefactor * m.determinant();
    Ok(LocalStatistic { value: v.re, imag_residue: v.im, backend: kinv.backend() })
}

/// `prod s_i * E[prod (1_i - mu_i)]` through the determinant with zero diagonal.
pub fn truncated_correlation(
    g: &IsoradialGraph,
    dirac: &DiracOperator,
    kinv: &dyn InverseKernel,
    edges: &[usize],
    signs: &[i8],
) -> Result<LocalStatistic> {
    check_event(g, edges)?;
    if edges.len() < 2 || signs.len() != edges.len() {
        return Err(Error::InvalidArgument("need k >= 2 edges with one sign each".into()));
    }
    let mut sorted = edges.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|p| p[0] == p[1]) {
        return Err(Error::InvalidArgument("edges must be distinct".into()));
    }
    let mut m = kernel_block(g, kinv, edges)?;
    m.fill_diagonal(Complex64::new(0.0, 0.0));
    let sign: f64 = signs.iter().map(|&s| f64::from(s.signum())).product();
    let prefactor: Complex64 = edges.iter().map(|&e| dirac.value(e)).product();
    let v = prefactor * m.determinant() * sign;
    Ok(LocalStatistic { value: v.re, imag_residue: v.im, backend: kinv.backend() })
}

/// Every perfect matching of a finite region with its Boltzmann weight.
#[derive(Clone, Debug, Serialize)]
pub struct BoltzmannTable {
    pub matchings: Vec<DimerConfiguration>,
    pub weights: Vec<f64>,
    pub partition_function: f64,
    pub probabilities: Vec<f64>,
}

impl BoltzmannTable {
    pub fn len(&self) -> usize {
        self.matchings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matchings.is_empty()
    }

    /// Probability that all `edges` are present.
    pub fn cylinder(&self, edges: &[usize]) -> f64 {
        self.matchings
            .iter()
            .zip(&self.probabilities)
            .filter(|(m, _)| edges.iter().all(|&e| m.contains(e)))
            .map(|(_, p)| p)
            .sum()
    }

    pub fn expectation<F: Fn(&DimerConfiguration) -> f64>(&self, f: F) -> f64 {
        self.matchings.iter().zip(&self.probabilities).map(|(m, p)| p * f(m)).sum()
    }

    pub fn probability_of(&self, m: &DimerConfiguration) -> f64 {
        self.matchings.iter().position(|x| x == m).map_or(0.0, |k| self.probabilities[k])
    }
}

struct Enumerator<'a> {
    g: &'a IsoradialGraph,
    active: Vec<bool>,
    used: Vec<bool>,
    stack: Vec<usize>,
    out: Vec<DimerConfiguration>,
    budget: usize,
}

impl Enumerator<'_> {
    fn free_edges(&self, f: usize) -> impl Iterator<Item = usize> + '_ {
        self.g.face_dual(f).iter().copied().filter(move |&e| {
            let d = self.g.dual_edges()[e];
            let other = if d.white == f { d.black } else { d.white };
            self.active[other] && !self.used[other]
        })
    }

    fn run(&mut self) -> Result<()> {
        // branch on the free vertex with the fewest options
        let mut best: Option<(usize, usize)> = None;
        for f in 0..self.active.len() {
            if self.active[f] && !self.used[f] {
                let n = self.free_edges(f).count();
                if n == 0 {
                    return Ok(());
                }
                if best.is_none_or(|(_, m)| n < m) {
                    best = Some((f, n));
                }
            }
        }
        let Some((f, _)) = best else {
            if self.out.len() >= self.budget {
                return Err(Error::EnumerationBudget(self.budget));
            }
            self.out.push(DimerConfiguration::new(self.stack.clone()));
            return Ok(());
        };
        let options: Vec<usize> = self.free_edges(f).collect();
        for e in options {
            let d = self.g.dual_edges()[e];
            self.used[d.white] = true;
            self.used[d.black] = true;
            self.stack.push(e);
            self.run()?;
            self.stack.pop();
            self.used[d.white] = false;
            self.used[d.black] = false;
        }
        Ok(())
    }
}

/// Exhaustive Boltzmann table of the sub-region spanned by `faces`.
pub fn brute_force_subregion(g: &IsoradialGraph, faces: &[usize], budget: usize) -> Result<BoltzmannTable> {
    let mut active = vec![false; g.num_faces()];
    for &f in faces {
        if f >= active.len() {
            return Err(Error::InvalidArgument(format!("no dual vertex {f}")));
        }
        active[f] = true;
    }
    let mut en = Enumerator {
        g,
        used: vec![false; active.len()],
        active,
        stack: Vec::new(),
        out: Vec::new(),
        budget,
    };
    en.run()?;
    let matchings = en.out;
    let weights = matchings.iter().map(|m| m.weight(g)).collect::<Result<Vec<f64>>>()?;
    let z: f64 = if faces.is_empty() { 1.0 } else { weights.iter().sum() };
    let probabilities = weights.iter().map(|w| w / z).collect();
    Ok(BoltzmannTable { matchings, weights, partition_function: z, probabilities })
}

pub fn brute_force_measure(g: &IsoradialGraph) -> Result<BoltzmannTable> {
    let all: Vec<usize> = (0..g.num_faces()).collect();
    brute_force_subregion(g, &all, ENUMERATION_BUDGET)
}

/// CSV rows `(event, probability, imag_residue, backend)`.
pub fn write_statistics_csv<W: Write>(out: &mut W, rows: &[(String, LocalStatistic)]) -> Result<()> {
    writeln!(out, "event,probability,imag_residue,backend")?;
    for (ev, s) in rows {
        let backend = match s.backend {
            Backend::Exact => "exact",
            Backend::Finite => "finite",
        };
        writeln!(out, "\"{ev}\",{:.17e},{:.3e},{backend}", s.value, s.imag_residue)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_square_lattice, build_triangular_lattice, TriangularRegion};

    #[test]
    fn hexagon_has_two_equal_matchings() {
        let g = build_triangular_lattice(&TriangularRegion::Hexagons { cols: 1, rows: 1 }).unwrap();
        let t = brute_force_measure(&g).unwrap();
        assert_eq!(t.len(), 2);
        assert!((t.partition_function - 2.0 * 3f64.sqrt().powi(3)).abs() < 1e-12);
        assert!(t.probabilities.iter().all(|p| (p - 0.5).abs() < 1e-12));
    }

    #[test]
    fn square_block_has_two_matchings() {
        let g = build_square_lattice(2, 2).unwrap();
        let t = brute_force_measure(&g).unwrap();
        assert_eq!(t.len(), 2);
        assert!(t.weights.iter().all(|w| (w - 2.0).abs() < 1e-12));
    }

    #[test]
    fn empty_region_has_unit_partition_function() {
        let g = build_square_lattice(2, 2).unwrap();
        let t = brute_force_subregion(&g, &[], 10).unwrap();
        assert_eq!(t.len(), 1);
        assert!(t.matchings[0].edges.is_empty());
        assert_eq!(t.partition_function, 1.0);
    }

    #[test]
    fn budget_is_enforced() {
        let g = build_square_lattice(4, 4).unwrap();
        let all: Vec<usize> = (0..g.num_faces()).collect();
        assert!(matches!(brute_force_subregion(&g, &all, 5), Err(Error::EnumerationBudget(5))));
    }
}
