use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use nalgebra::DVector;
use num_complex::Complex64;

use super::{Backend, DiracOperator, InverseKernel};
use crate::error::{Error, Result};
use crate::geometry::{Color, IsoradialGraph};
use crate::strips::{BlockSystem, CMat, StripMode};

/// Largest region, in dual vertices, accepted by the finite-volume solver.
pub const FINITE_REGION_CAP: usize = 20_000;

type Column = Arc<Vec<DVector<Complex64>>>;

/// Exact `K^{-1}` of a finite region via block-tridiagonal elimination.
pub struct FiniteKernel<'g> {
    graph: &'g IsoradialGraph,
    dirac: DiracOperator,
    system: BlockSystem,
    sl_inv: Vec<CMat>,
    gdiag: Vec<CMat>,
    columns: Mutex<HashMap<usize, Column>>,
}

impl<'g> FiniteKernel<'g> {
    pub fn new(graph: &'g IsoradialGraph) -> Result<Self> {
        Self::with_mode(graph, StripMode::Auto)
    }

    pub fn with_mode(graph: &'g IsoradialGraph, mode: StripMode) -> Result<Self> {
        let n = graph.num_faces();
        if n > FINITE_REGION_CAP {
            return Err(Error::RegionTooLarge(n, FINITE_REGION_CAP));
        }
        let dirac = DiracOperator::assemble(graph)?;
        let system = BlockSystem::new(graph, &dirac, mode)?;
        let sl_inv = system.left_inverses()?;
        let gdiag = system.diagonal_inverse(&sl_inv)?;
        Ok(Self { graph, dirac, system, sl_inv, gdiag, columns: Mutex::new(HashMap::new()) })
    }

    pub fn graph(&self) -> &IsoradialGraph {
        self.graph
    }

    pub fn dirac(&self) -> &DiracOperator {
        &self.dirac
    }

    pub fn num_strips(&self) -> usize {
        self.system.plan.len()
    }

    /// Column `K^{-1}[., w]`, stored per strip in the strip's black order.
    fn column(&self, w: usize) -> Result<Column> {
        if let Some(c) = self.columns.lock().expect("column lock").get(&w) {
            return Ok(c.clone());
        }
        let s = self.system.plan.len();
        let (j, pw) = self.system.plan.slot[w];
        let mut col: Vec<DVector<Complex64>> = vec![DVector::zeros(0); s];
        col[j] = self.gdiag[j].column(pw).into_owned();
        for i in j + 1..s {
            col[i] = -(&self.system.sr_inv[i] * (&self.system.klow[i - 1] * &col[i - 1]));
        }
        for i in (0..j).rev() {
            col[i] = -(&self.sl_inv[i] * (&self.system.kup[i] * &col[i + 1]));
        }
        let col = Arc::new(col);
        self.columns.lock().expect("column lock").insert(w, col.clone());
        Ok(col)
    }

    pub fn inverse(&self, b: usize, w: usize) -> Result<Complex64> {
        let n = self.graph.num_faces();
        if b >= n || w >= n || self.graph.face(b).color != Color::Black || self.graph.face(w).color != Color::White
        {
            return Err(Error::InvalidArgument(format!("expected black {b} and white {w}")));
        }
        let col = self.column(w)?;
        let (i, pb) = self.system.plan.slot[b];
        Ok(col[i][pb])
    }

    /// Dense `K^{-1}` with rows indexed by `blacks` and columns by `whites`.
    pub fn full_inverse(&self) -> Result<(Vec<usize>, Vec<usize>, CMat)> {
        let blacks = self.graph.blacks();
        let whites = self.graph.whites();
        let mut m = CMat::zeros(blacks.len(), whites.len());
        for (j, &w) in whites.iter().enumerate() {
            let col = self.column(w)?;
            for (i, &b) in blacks.iter().enumerate() {
                let (s, p) = self.system.plan.slot[b];
                m[(i, j)] = col[s][p];
            }
        }
        Ok((blacks, whites, m))
    }
}

impl InverseKernel for FiniteKernel<'_> {
    fn inverse(&self, b: usize, w: usize) -> Result<Complex64> {
        FiniteKernel::inverse(self, b, w)
    }

    fn backend(&self) -> Backend {
        Backend::Finite
    }
}

pub fn inverse_kernel_finite(g: &IsoradialGraph, b: usize, w: usize) -> Result<Complex64> {
    FiniteKernel::new(g)?.inverse(b, w)
}
