//! Dirac operator `K` and three routes to its inverse: the exact local
//! integral, a finite-volume solve and the large-distance asymptotics.

mod exact;
mod exponential;
mod finite;

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{validate_isoradial, IsoradialGraph};

pub use exact::{
    integrate_exponential, inverse_kernel_asymptotic, inverse_kernel_exact, InfiniteKernel, KernelTableRow,
    KERNEL_TOLERANCE,
};
pub use exponential::{
    discrete_exponential, random_rhombus_path, rhombus_path, rhombus_step, DiscreteExponential,
    ExponentialField, Node, RhombusPath, RhombusStep, StepTag,
};
pub use finite::{inverse_kernel_finite, FiniteKernel, FINITE_REGION_CAP};

/// Which computation produced a value of `K^{-1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Exact,
    Finite,
}

/// Anything that can evaluate `K^{-1}(b, w)`.
pub trait InverseKernel: Sync {
    fn inverse(&self, b: usize, w: usize) -> Result<Complex64>;
    fn backend(&self) -> Backend;
}

/// `K(w, b) = i (x - y) / (r eps)` on every dual edge; `K(b, w)` is its conjugate.
#[derive(Clone, Debug)]
pub struct DiracOperator {
    values: Vec<Complex64>,
}

impl DiracOperator {
    pub fn assemble(g: &IsoradialGraph) -> Result<Self> {
        let report = validate_isoradial(g);
        if !report.passed {
            return Err(Error::Invalid(report.summary()));
        }
        Ok(Self::assemble_unchecked(g))
    }

    pub(crate) fn assemble_unchecked(g: &IsoradialGraph) -> Self {
        let unit = g.unit();
        let values = g
            .dual_edges()
            .iter()
            .map(|d| {
                let x = g.vertex(d.head).to_complex();
                let y = g.vertex(d.tail).to_complex();
                Complex64::i() * (x - y) / unit
            })
            .collect();
        Self { values }
    }

    /// `K(w, b)` for dual edge `e`.
    pub fn value(&self, e: usize) -> Complex64 {
        self.values[e]
    }

    /// `K(b, w)` for dual edge `e`.
    pub fn value_bw(&self, e: usize) -> Complex64 {
        self.values[e].conj()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Matrix entry between two dual vertices, zero when they are not adjacent.
    pub fn entry(&self, g: &IsoradialGraph, a: usize, b: usize) -> Complex64 {
        match g.dual_edge_between(a, b) {
            Some(e) if g.dual_edges()[e].white == a => self.values[e],
            Some(e) => self.values[e].conj(),
            None => Complex64::new(0.0, 0.0),
        }
    }
}

pub fn assemble_dirac(g: &IsoradialGraph) -> Result<DiracOperator> {
    DiracOperator::assemble(g)
}

/// `(1 / 2 pi) (1 + 2 / sin^2 delta)`.
pub fn kernel_bound(delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta <= PI / 2.0 + 1e-15) {
        return Err(Error::InvalidArgument(format!("delta = {delta} outside (0, pi/2]")));
    }
    Ok((1.0 + 2.0 / delta.sin().powi(2)) / (2.0 * PI))
}

/// Smallest distance of a rhombus angle `2 theta` from 0 and pi over the
/// non-degenerate edges of `g`.
pub fn angle_margin(g: &IsoradialGraph) -> Result<f64> {
    let mut delta = f64::INFINITY;
    for e in 0..g.dual_edges().len() {
        let two_theta = 2.0 * g.rhombus_angle(e)?;
        if (PI - two_theta).abs() < 1e-9 {
            continue;
        }
        delta = delta.min(two_theta).min(PI - two_theta);
    }
    if delta.is_finite() {
        Ok(delta)
    } else {
        Err(Error::InvalidArgument("graph has only degenerate rhombi".into()))
    }
}

/// Writes kernel comparison rows as CSV.
pub fn write_kernel_csv<W: Write>(out: &mut W, rows: &[KernelTableRow]) -> Result<()> {
    writeln!(out, "b_id,w_id,distance,re_exact,im_exact,re_asym,im_asym,abs_err")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
            r.b, r.w, r.distance, r.exact.re, r.exact.im, r.asymptotic.re, r.asymptotic.im, r.abs_err
        )?;
    }
    Ok(())
}
