use std::collections::HashMap;
use std::f64::consts::{PI, TAU};
use std::sync::Mutex;

use num_complex::Complex64;

use super::exponential::{DiscreteExponential, ExponentialField, Node};
use super::{Backend, DiracOperator, InverseKernel};
use crate::error::{Error, Result};
use crate::geometry::{Color, IsoradialGraph};
use crate::quadrature::integrate;

/// Absolute accuracy requested for `K^{-1}` values.
pub const KERNEL_TOLERANCE: f64 = 1e-11;
const MAX_PIECES: usize = 6000;

/// Picks the rotation `theta0` so that the ray `e^{i(theta0 + pi)} [0, inf)`
/// runs through the middle of the gap between poles that contains the
/// direction opposite to `hint`.
fn rotation(poles: &[f64], hint: Option<f64>) -> f64 {
    if poles.is_empty() {
        return hint.unwrap_or(0.0);
    }
    let mut angles: Vec<f64> = poles.iter().map(|a| a.rem_euclid(TAU)).collect();
    angles.sort_by(f64::total_cmp);
    // gaps (start, width) going counterclockwise from each pole to the next
    let gaps: Vec<(f64, f64)> = (0..angles.len())
        .map(|k| {
            let a = angles[k];
            let next = if k + 1 < angles.len() { angles[k + 1] } else { angles[0] + TAU };
            (a, next - a)
        })
        .collect();
    let chosen = hint
        .and_then(|h| {
            let target = (h + PI).rem_euclid(TAU);
            gaps.iter().copied().find(|&(a, width)| {
                let off = (target - a).rem_euclid(TAU);
                off > 1e-12 && off < width - 1e-12
            })
        })
        .unwrap_or_else(|| gaps.iter().copied().max_by(|x, y| x.1.total_cmp(&y.1)).expect("nonempty"));
    chosen.0 + 0.5 * chosen.1 - PI
}

/// `(1 / 2 pi)` times the integral of `f` along the ray opposite to `e^{i theta0}`,
/// which equals `K^{-1}(b, w)` when `f = f_{wb}`.
pub fn integrate_exponential(f: &DiscreteExponential, hint: Option<f64>) -> Result<Complex64> {
    let poles: Vec<f64> = f.poles().iter().map(|p| p.0).collect();
    let theta0 = rotation(&poles, hint);
    let rotated: Vec<(Complex64, f64)> =
        f.factors.iter().map(|&(a, n)| (Complex64::from_polar(1.0, a - theta0), n as f64)).collect();
    let degree = f.degree() as f64;
    let integrand = |s: f64| {
        let t = 1.0 - 1.0 / s;
        let mut log = Complex64::new(-2.0 * s.ln(), 0.0);
        for &(e, n) in &rotated {
            log += (Complex64::new(t, 0.0) - e).ln() * n;
        }
        log.exp()
    };
    let r = integrate(integrand, 0.0, 1.0, TAU * KERNEL_TOLERANCE, 8, MAX_PIECES)?;
    // f(e^{i theta0} t) = e^{i theta0 deg} f~(t) and dz = e^{i theta0} dt
    let phase = Complex64::from_polar(1.0, theta0 * (degree + 1.0));
    Ok(phase * r.value / TAU)
}

/// Infinite-volume `K^{-1}` on an isoradial graph, evaluated by the local
/// real-axis integral of the discrete exponential. Values depend only on the
/// exponent vector of `f_{wb}`, so they are memoised per vector.
pub struct InfiniteKernel<'g> {
    graph: &'g IsoradialGraph,
    field: ExponentialField,
    dirac: DiracOperator,
    cache: Mutex<HashMap<(Vec<i32>, i64), Complex64>>,
}

#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct KernelTableRow {
    pub b: usize,
    pub w: usize,
    pub distance: f64,
    pub exact: Complex64,
    pub asymptotic: Complex64,
    pub abs_err: f64,
}

impl<'g> InfiniteKernel<'g> {
    pub fn new(graph: &'g IsoradialGraph) -> Result<Self> {
        let dirac = DiracOperator::assemble(graph)?;
        let field = ExponentialField::new(graph)?;
        Ok(Self { graph, field, dirac, cache: Mutex::new(HashMap::new()) })
    }

    pub fn graph(&self) -> &IsoradialGraph {
        self.graph
    }

    pub fn dirac(&self) -> &DiracOperator {
        &self.dirac
    }

    pub fn field(&self) -> &ExponentialField {
        &self.field
    }

    fn check_colors(&self, b: usize, w: usize) -> Result<()> {
        let n = self.graph.num_faces();
        if b >= n || w >= n {
            return Err(Error::InvalidArgument(format!("dual vertex out of range ({b}, {w})")));
        }
        if self.graph.face(b).color != Color::Black || self.graph.face(w).color != Color::White {
            return Err(Error::InvalidArgument(format!("expected black {b} and white {w}")));
        }
        Ok(())
    }

    /// `f_{wb}` from the precomputed field.
    pub fn exponential(&self, b: usize, w: usize) -> Result<DiscreteExponential> {
        self.field.exponential(Node::Dual(w), Node::Dual(b))
    }

    pub fn inverse(&self, b: usize, w: usize) -> Result<Complex64> {
        self.check_colors(b, w)?;
        let exps = self.field.exponents(Node::Dual(w), Node::Dual(b))?;
        let f = DiscreteExponential::from_factors(
            exps.iter().enumerate().map(|(d, &n)| (self.field.directions()[d].arg(), n)),
        );
        let disp = f.displacement();
        let hint = if disp.norm() > 1e-9 {
            Some(disp.arg())
        } else {
            self.graph.dual_edge_between(w, b).map(|e| self.dirac.value(e).arg())
        };
        let key = (exps, hint.map_or(i64::MIN, |h| (h.rem_euclid(TAU) * 1e6).round() as i64));
        if let Some(v) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(*v);
        }
        let v = integrate_exponential(&f, hint)?;
        self.cache.lock().expect("cache lock").insert(key, v);
        Ok(v)
    }

    /// Two-term large-distance expansion of `K^{-1}(b, w)`.
    pub fn asymptotic(&self, b: usize, w: usize) -> Result<Complex64> {
        self.check_colors(b, w)?;
        let d = self.graph.face_z(b) - self.graph.face_z(w);
        if d.norm() < 1e-12 {
            return Err(Error::CoincidentPositions);
        }
        let f0 = self.exponential(b, w)?.at_zero();
        Ok((d.inv() + f0 / d.conj()) / TAU)
    }

    /// Exact and asymptotic values on each pair. The asymptotic column is NaN
    /// where `b` and `w` share a position (degenerate rhombi).
    pub fn table(&self, pairs: &[(usize, usize)]) -> Result<Vec<KernelTableRow>> {
        crate::mc::par_map(pairs, |&(b, w)| {
            let exact = self.inverse(b, w)?;
            let asymptotic = match self.asymptotic(b, w) {
                Err(Error::CoincidentPositions) => Complex64::new(f64::NAN, f64::NAN),
                r => r?,
            };
            let distance = (self.graph.face_z(b) - self.graph.face_z(w)).norm();
            Ok(KernelTableRow { b, w, distance, exact, asymptotic, abs_err: (exact - asymptotic).norm() })
        })
        .into_iter()
        .collect()
    }

    pub fn cache_len(&self) -> usize {
        self.cache.lock().expect("cache lock").len()
    }
}

impl InverseKernel for InfiniteKernel<'_> {
    fn inverse(&self, b: usize, w: usize) -> Result<Complex64> {
        InfiniteKernel::inverse(self, b, w)
    }

    fn backend(&self) -> Backend {
        Backend::Exact
    }
}

/// One-off evaluation of the exact `K^{-1}(b, w)`.
pub fn inverse_kernel_exact(g: &IsoradialGraph, b: usize, w: usize) -> Result<Complex64> {
    InfiniteKernel::new(g)?.inverse(b, w)
}

pub fn inverse_kernel_asymptotic(g: &IsoradialGraph, b: usize, w: usize) -> Result<Complex64> {
    InfiniteKernel::new(g)?.asymptotic(b, w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_centres_cut_in_gap() {
        // poles at +-60 degrees around the positive axis; hint along the axis
        let t = rotation(&[PI / 3.0, -PI / 3.0], Some(0.0));
        assert!(t.rem_euclid(TAU).min(TAU - t.rem_euclid(TAU)) < 1e-12, "{t}");
    }

    #[test]
    fn adjacent_product_form() {
        // f = 1 / ((t - e^{i a})(t - e^{i b})) with a = -pi/3, b = pi/3
        let f = DiscreteExponential::from_factors([(-PI / 3.0, -1), (PI / 3.0, -1)]);
        let v = integrate_exponential(&f, Some(0.0)).unwrap();
        // int_{-inf}^0 dt / (t^2 - t + 1) = 2 pi / (3 sqrt 3)
        let expect = 1.0 / (3.0 * 3f64.sqrt());
        assert!((v.re - expect).abs() < 1e-11 && v.im.abs() < 1e-11, "{v}");
    }
}
