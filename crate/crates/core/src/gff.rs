//! Continuum side of the height fluctuation comparisons: the Green function
//! of the plane, Wick pairing sums, the Cauchy determinant with zero
//! diagonal, smooth mean-zero test functions and their Dirichlet energy, and
//! the discrete functional `H^eps phi`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{IsoradialGraph, Point2};
use crate::geometry::{build_triangular_lattice, TriangularRegion};
use crate::height::{
    exact_height_covariance, height_from_matching, height_increment_representation, lattice_paths, HeightField,
    IncrementRepresentation,
};
use crate::kernel::{FiniteKernel, InfiniteKernel};
use crate::mc::{batch_means, variance_estimate, Estimate};
use crate::sampler::Sampler;
use crate::quadrature::integrate;

/// `g(x, y) = -log|x - y| / (2 pi)`.
pub fn green(x: Point2, y: Point2) -> Result<f64> {
    let d = x.dist(y);
    if d == 0.0 {
        return Err(Error::CoincidentPositions);
    }
    Ok(-d.ln() / (2.0 * PI))
}

/// `g(v, v') + g(u, u') - g(v, u') - g(u, v')`.
pub fn four_point_g(u: Point2, v: Point2, up: Point2, vp: Point2) -> Result<f64> {
    let pts = [u, v, up, vp];
    for i in 0..4 {
        for j in i + 1..4 {
            if pts[i].dist(pts[j]) == 0.0 {
                return Err(Error::CoincidentPositions);
            }
        }
    }
    Ok(green(v, vp)? + green(u, up)? - green(v, up)? - green(u, vp)?)
}

/// A perfect pairing of `0..k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PairingSet(pub Vec<(usize, usize)>);

/// All `(k - 1)!!` pairings of `0..k`; empty for odd `k`.
pub fn pairings(k: usize) -> Vec<PairingSet> {
    fn rec(rest: &[usize], cur: &mut Vec<(usize, usize)>, out: &mut Vec<PairingSet>) {
        let Some((&first, tail)) = rest.split_first() else {
            out.push(PairingSet(cur.clone()));
            return;
        };
        for (i, &j) in tail.iter().enumerate() {
            let remaining: Vec<usize> = tail.iter().enumerate().filter(|&(t, _)| t != i).map(|(_, &x)| x).collect();
            cur.push((first, j));
            rec(&remaining, cur, out);
            cur.pop();
        }
    }
    if k % 2 == 1 {
        return Vec::new();
    }
    let idx: Vec<usize> = (0..k).collect();
    let mut out = Vec::new();
    rec(&idx, &mut Vec::new(), &mut out);
    out
}

/// Limit of `E[prod (h(v_i) - h(u_i))]` for the increments `(u_i, v_i)`:
/// zero for odd `k`, otherwise `pi^{-k/2}` times the pairing sum of `four_point_g`.
pub fn wick_moment(endpoints: &[(Point2, Point2)]) -> Result<f64> {
    let k = endpoints.len();
    if k == 0 {
        return Err(Error::InvalidArgument("need at least one increment".into()));
    }
    if k % 2 == 1 {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for p in pairings(k) {
        let mut prod = 1.0;
        for &(a, b) in &p.0 {
            let ((ua, va), (ub, vb)) = (endpoints[a], endpoints[b]);
            prod *= four_point_g(ua, va, ub, vb)? / PI;
        }
        total += prod;
    }
    Ok(total)
}

fn check_distinct(xs: &[Complex64]) -> Result<()> {
    for i in 0..xs.len() {
        for j in i + 1..xs.len() {
            if xs[i] == xs[j] {
                return Err(Error::CoincidentPositions);
            }
        }
    }
    Ok(())
}

/// `det M` with `m_ii = 0` and `m_ij = 1 / (x_i - x_j)`.
pub fn cauchy_zero_diag_det(xs: &[Complex64]) -> Result<Complex64> {
    check_distinct(xs)?;
    let k = xs.len();
    let m = DMatrix::from_fn(k, k, |i, j| if i == j { Complex64::new(0.0, 0.0) } else { (xs[i] - xs[j]).inv() });
    Ok(m.determinant())
}

/// `sum over pairings of prod 1 / (x_a - x_b)^2`; zero for odd `k`.
pub fn pairing_sum(xs: &[Complex64]) -> Result<Complex64> {
    check_distinct(xs)?;
    Ok(pairings(xs.len())
        .iter()
        .map(|p| p.0.iter().map(|&(a, b)| (xs[a] - xs[b]).powi(2).inv()).product::<Complex64>())
        .sum())
}

/// `exp(1 - 1 / (1 - s^2))` on `|s| < 1`, with value 1 at the centre.
pub fn bump_profile(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - s * s)).exp()
    }
}

fn integral(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    if b <= a {
        return Ok(0.0);
    }
    Ok(integrate(|x| Complex64::new(f(x), 0.0), a, b, tol, 4, 4000)?.value.re)
}

/// `F(u) = int_0^u s rho(s) ds`.
fn profile_moment(u: f64) -> Result<f64> {
    integral(|s| s * bump_profile(s), 0.0, u.min(1.0), 1e-13)
}

/// `J(u) = int_u^1 s rho(s) log s ds`.
fn profile_log_moment(u: f64) -> Result<f64> {
    integral(|s| if s > 0.0 { s * bump_profile(s) * s.ln() } else { 0.0 }, u.max(0.0), 1.0, 1e-13)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: Point2,
    pub radius: f64,
}

impl Bump {
    pub fn eval(&self, p: Point2) -> f64 {
        bump_profile(p.dist(self.center) / self.radius)
    }

    pub fn mass(&self) -> Result<f64> {
        Ok(2.0 * PI * self.radius.powi(2) * profile_moment(1.0)?)
    }

    /// `int g(x, y) rho(y) dy`, radial about the centre.
    fn potential(&self, x: Point2) -> Result<f64> {
        let r = self.radius;
        let d = x.dist(self.center);
        let u = d / r;
        let total = profile_moment(1.0)?;
        if u >= 1.0 {
            return Ok(-r * r * total * d.ln());
        }
        let inner = profile_moment(u)?;
        let log_term = if d > 0.0 { d.ln() * inner } else { 0.0 };
        Ok(-r * r * (log_term + profile_log_moment(u)? + r.ln() * (total - inner)))
    }

    /// Gradient of [`Bump::potential`], from the mass inside radius `|x - c|`.
    fn field(&self, x: Point2) -> Result<(f64, f64)> {
        let (dx, dy) = (x.x - self.center.x, x.y - self.center.y);
        let d2 = dx * dx + dy * dy;
        if d2 == 0.0 {
            return Ok((0.0, 0.0));
        }
        let m = self.radius.powi(2) * profile_moment(d2.sqrt() / self.radius)?;
        Ok((-m * dx / d2, -m * dy / d2))
    }
}

/// `a (rho_plus - w rho_minus)` for two bumps with disjoint supports, where `w`
/// balances the masses and `a` scales the maximum to 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub plus: Bump,
    pub minus: Bump,
}

impl TestFunction {
    pub fn new(plus: Bump, minus: Bump) -> Result<Self> {
        if !(plus.radius > 0.0 && minus.radius > 0.0) {
            return Err(Error::InvalidArgument("bump radii must be positive".into()));
        }
        if plus.center.dist(minus.center) < plus.radius + minus.radius {
            return Err(Error::InvalidArgument("bump supports overlap".into()));
        }
        Ok(Self { plus, minus })
    }

    /// Bumps of radius 1 centred at `(2, 0)` (positive) and `(-2, 0)`.
    pub fn standard() -> Self {
        Self {
            plus: Bump { center: Point2::new(2.0, 0.0), radius: 1.0 },
            minus: Bump { center: Point2::new(-2.0, 0.0), radius: 1.0 },
        }
    }

    /// Signed coefficients of the two bumps.
    pub fn coefficients(&self) -> (f64, f64) {
        let w = (self.plus.radius / self.minus.radius).powi(2);
        let a = 1.0 / w.max(1.0);
        (a, -a * w)
    }

    fn terms(&self) -> [(f64, Bump); 2] {
        let (cp, cm) = self.coefficients();
        [(cp, self.plus), (cm, self.minus)]
    }

    pub fn eval(&self, p: Point2) -> f64 {
        self.terms().iter().map(|(c, b)| c * b.eval(p)).sum()
    }

    /// `(min, max)` corners of the support's bounding box.
    pub fn support_box(&self) -> (Point2, Point2) {
        let (p, m) = (self.plus, self.minus);
        (
            Point2::new((p.center.x - p.radius).min(m.center.x - m.radius), (p.center.y - p.radius).min(m.center.y - m.radius)),
            Point2::new((p.center.x + p.radius).max(m.center.x + m.radius), (p.center.y + p.radius).max(m.center.y + m.radius)),
        )
    }

    /// `f = int g(., y) phi(y) dy`.
    pub fn potential(&self, x: Point2) -> Result<f64> {
        let mut s = 0.0;
        for (c, b) in self.terms() {
            s += c * b.potential(x)?;
        }
        Ok(s)
    }

    /// `grad f`.
    pub fn field(&self, x: Point2) -> Result<(f64, f64)> {
        let mut s = (0.0, 0.0);
        for (c, b) in self.terms() {
            let (fx, fy) = b.field(x)?;
            s = (s.0 + c * fx, s.1 + c * fy);
        }
        Ok(s)
    }
}

/// Resolution of the Dirichlet energy quadratures.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyOptions {
    pub tolerance: f64,
    pub angles: usize,
}

impl Default for EnergyOptions {
    fn default() -> Self {
        Self { tolerance: 1e-10, angles: 256 }
    }
}

impl EnergyOptions {
    pub fn refined(self) -> Self {
        Self { tolerance: self.tolerance / 16.0, angles: 2 * self.angles }
    }
}

/// `int int rho_a(x) g(x, y) rho_b(y) dx dy`.
fn bump_pair(a: &Bump, b: &Bump, opts: EnergyOptions) -> Result<f64> {
    let sep = a.center.dist(b.center);
    if sep >= a.radius + b.radius {
        // log|x - y| is harmonic on each disk, so only the masses matter
        return Ok(-a.mass()? * b.mass()? * sep.ln() / (2.0 * PI));
    }
    // polar coordinates about a's centre; the inner integral over y is the
    // radial potential of b, so the log singularity never reaches the quadrature
    let concentric = sep == 0.0;
    let n = if concentric { 1 } else { opts.angles };
    let ring = |t: f64| -> Result<f64> {
        let mut s = 0.0;
        for k in 0..n {
            let al = 2.0 * PI * k as f64 / n as f64;
            s += b.potential(Point2::new(a.center.x + t * al.cos(), a.center.y + t * al.sin()))?;
        }
        Ok(s * 2.0 * PI / n as f64)
    };
    let mut err = None;
    let v = integral(
        |t| match ring(t) {
            Ok(r) => t * bump_profile(t / a.radius) * r,
            Err(e) => {
                err.get_or_insert(e.to_string());
                0.0
            }
        },
        0.0,
        a.radius,
        opts.tolerance,
    )?;
    if let Some(e) = err {
        return Err(Error::InvalidArgument(e));
    }
    Ok(v)
}

/// `G(phi1, phi2) = int int g(x, y) phi1(x) phi2(y) dx dy`.
pub fn dirichlet_energy(phi1: &TestFunction, phi2: &TestFunction) -> Result<f64> {
    dirichlet_energy_with(phi1, phi2, EnergyOptions::default())
}

pub fn dirichlet_energy_with(phi1: &TestFunction, phi2: &TestFunction, opts: EnergyOptions) -> Result<f64> {
    let mut s = 0.0;
    for (ca, a) in phi1.terms() {
        for (cb, b) in phi2.terms() {
            s += ca * cb * bump_pair(&a, &b, opts)?;
        }
    }
    Ok(s)
}

/// `int grad f1 . grad f2 dx` over the plane on a polar grid about the centre
/// of the supports, with the tail beyond the supports mapped to a finite interval.
pub fn dirichlet_energy_gradient(phi1: &TestFunction, phi2: &TestFunction, opts: EnergyOptions) -> Result<f64> {
    let (lo1, hi1) = phi1.support_box();
    let (lo2, hi2) = phi2.support_box();
    let (lo, hi) = (
        Point2::new(lo1.x.min(lo2.x), lo1.y.min(lo2.y)),
        Point2::new(hi1.x.max(hi2.x), hi1.y.max(hi2.y)),
    );
    let o = lo.midpoint(hi);
    let r1 = lo.dist(hi) / 2.0 + 1.0;
    let n = opts.angles;
    let ring = |r: f64| -> Result<f64> {
        let mut s = 0.0;
        for k in 0..n {
            let al = 2.0 * PI * (k as f64 + 0.5) / n as f64;
            let p = Point2::new(o.x + r * al.cos(), o.y + r * al.sin());
            let (a, b) = (phi1.field(p)?, phi2.field(p)?);
            s += a.0 * b.0 + a.1 * b.1;
        }
        Ok(s * 2.0 * PI / n as f64)
    };
    let mut err = None;
    let mut guard = |v: Result<f64>| {
        v.unwrap_or_else(|e| {
            err.get_or_insert(e.to_string());
            0.0
        })
    };
    let inner = integral(|r| r * guard(ring(r)), 0.0, r1, opts.tolerance)?;
    let tail = integral(
        |u| {
            if u <= 0.0 {
                return 0.0;
            }
            let r = r1 / u;
            r * guard(ring(r)) * r1 / (u * u)
        },
        0.0,
        1.0,
        opts.tolerance,
    )?;
    if let Some(e) = err {
        return Err(Error::InvalidArgument(e));
    }
    Ok(inner + tail)
}

/// Placement of a lattice region in the plane: continuum point
/// `eps (x - origin)` for a lattice position `x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub origin: Point2,
    pub eps: f64,
}

impl Placement {
    pub fn continuum(&self, p: Point2) -> Point2 {
        Point2::new((p.x - self.origin.x) * self.eps, (p.y - self.origin.y) * self.eps)
    }

    pub fn lattice(&self, p: Point2) -> Point2 {
        Point2::new(self.origin.x + p.x / self.eps, self.origin.y + p.y / self.eps)
    }

    /// Vertex of `g` nearest to a continuum point.
    pub fn vertex(&self, g: &IsoradialGraph, p: Point2) -> usize {
        g.nearest_vertex(self.lattice(p))
    }
}

/// `phi` sampled on the primal vertices with dual-face area weights, corrected
/// so that the weights sum to zero.
#[derive(Clone, Debug, Serialize)]
pub struct DiscreteFunctional {
    pub vertices: Vec<usize>,
    pub weights: Vec<f64>,
    /// `eps^2 sum a(v*) phi(v)` before the correction.
    pub raw_mean: f64,
}

impl DiscreteFunctional {
    pub fn new(g: &IsoradialGraph, placement: Placement, phi: &TestFunction) -> Result<Self> {
        let mut vertices = Vec::new();
        let mut weights = Vec::new();
        let mut areas = Vec::new();
        let e2 = placement.eps * placement.eps;
        for v in 0..g.vertices().len() {
            let val = phi.eval(placement.continuum(g.vertex(v)));
            if val == 0.0 {
                continue;
            }
            if !g.is_interior_vertex(v) {
                return Err(Error::InvalidArgument(format!("test function is nonzero at boundary vertex {v}")));
            }
            let a = g.dual_face_area(v)? * e2;
            vertices.push(v);
            weights.push(a * val);
            areas.push(a);
        }
        let raw_mean: f64 = weights.iter().sum();
        let total: f64 = areas.iter().sum();
        if total > 0.0 {
            for (w, a) in weights.iter_mut().zip(&areas) {
                *w -= raw_mean * a / total;
            }
        }
        Ok(Self { vertices, weights, raw_mean })
    }

    /// `sum w_v h(v)` for heights indexed by vertex.
    pub fn apply(&self, h: &[f64]) -> f64 {
        self.vertices.iter().zip(&self.weights).map(|(&v, w)| w * h[v]).sum()
    }

    /// `sum w_v` after the correction.
    pub fn residual_mean(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// `Var(H^eps phi)` under the finite-volume measure of `kinv`. The functional
/// is written as `sum c_e 1_e` over the dual edges of a spanning tree rooted in
/// the support, and the covariance of edge indicators is read off `K^{-1}`.
pub fn exact_functional_variance(kinv: &FiniteKernel, f: &DiscreteFunctional) -> Result<f64> {
    let g = kinv.graph();
    let dirac = kinv.dirac();
    let Some(&root) = f.vertices.first() else {
        return Ok(0.0);
    };
    let n = g.vertices().len();
    let mut parent: Vec<Option<usize>> = vec![None; n];
    let mut order = vec![root];
    let mut seen = vec![false; n];
    seen[root] = true;
    let mut head = 0;
    while head < order.len() {
        let x = order[head];
        head += 1;
        for &e in g.vertex_edges(x) {
            let [a, b] = g.edges()[e];
            let y = if a == x { b } else { a };
            if !seen[y] {
                seen[y] = true;
                parent[y] = Some(e);
                order.push(y);
            }
        }
    }
    let mut below = vec![0.0; n];
    for (&v, &w) in f.vertices.iter().zip(&f.weights) {
        if !seen[v] {
            return Err(Error::Disconnected);
        }
        below[v] += w;
    }
    // h(child) - h(parent) carries -1_d on a forward step and +1_d on a backward one
    let mut coef: Vec<(usize, f64)> = Vec::new();
    for &y in order.iter().rev() {
        let Some(e) = parent[y] else { continue };
        let [a, b] = g.edges()[e];
        let x = if a == y { b } else { a };
        if below[y] != 0.0 {
            if let Some(d) = g.edge_dual(e) {
                coef.push((d, if a == x { -below[y] } else { below[y] }));
            }
        }
        below[x] += below[y];
    }
    let ends: Vec<(usize, usize)> = coef.iter().map(|&(d, _)| (g.dual_edges()[d].black, g.dual_edges()[d].white)).collect();
    let rows = crate::mc::par_map(&(0..coef.len()).collect::<Vec<_>>(), |&i| -> Result<f64> {
        let (di, ci) = coef[i];
        let (bi, wi) = ends[i];
        let ki = dirac.value(di);
        let p = (ki * kinv.inverse(bi, wi)?).re;
        let mut s = ci * ci * p * (1.0 - p);
        for j in 0..coef.len() {
            if j == i {
                continue;
            }
            let (dj, cj) = coef[j];
            let (bj, wj) = ends[j];
            let cov = -(ki * dirac.value(dj) * kinv.inverse(bi, wj)? * kinv.inverse(bj, wi)?).re;
            s += ci * cj * cov;
        }
        Ok(s)
    });
    rows.into_iter().sum()
}

/// `H^eps phi = eps^2 sum a(v*) phi(v) h(v)` with the mean-zero correction.
pub fn field_functional(h: &HeightField, phi: &TestFunction, g: &IsoradialGraph, placement: Placement) -> Result<f64> {
    Ok(DiscreteFunctional::new(g, placement, phi)?.apply(&h.values))
}

/// Continuum endpoints `(u1, v1, u2, v2)` of the standard four-point
/// configuration: two unit increments, one a distance `sqrt(3)/4` above the other.
pub fn standard_four_points() -> [Point2; 4] {
    let h = 3f64.sqrt() / 4.0;
    [Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(0.0, h), Point2::new(1.0, h)]
}

#[derive(Clone, Debug, Serialize)]
pub struct CovarianceRow {
    /// Lattice steps per unit length; the mesh is `1 / n`.
    pub n: usize,
    pub exact: f64,
    pub target: f64,
    pub abs_error: f64,
    pub rel_error: f64,
}

/// Infinite-volume covariance of the standard configuration on the honeycomb
/// dimers at each mesh `1 / n` (`n` a multiple of 4), against `four_point_g / pi`.
pub fn covariance_trend(meshes: &[usize]) -> Result<Vec<CovarianceRow>> {
    let mut out = Vec::with_capacity(meshes.len());
    for &n in meshes {
        if n == 0 || n % 4 != 0 {
            return Err(Error::InvalidArgument(format!("mesh denominator {n} is not a positive multiple of 4")));
        }
        let margin = 3;
        let (oi, oj) = (n / 4 + margin, margin);
        let region = TriangularRegion::Parallelogram { width: oi + n + margin + 1, height: n / 2 + 2 * margin + 1 };
        let g = build_triangular_lattice(&region)?;
        let at = |i: usize, j: usize| {
            g.vertex_at([i as i64, j as i64]).ok_or_else(|| Error::InvalidArgument(format!("no vertex at [{i}, {j}]")))
        };
        let (u1, v1) = (at(oi, oj)?, at(oi + n, oj)?);
        let (u2, v2) = (at(oi - n / 4, oj + n / 2)?, at(oi + 3 * n / 4, oj + n / 2)?);
        let kinv = InfiniteKernel::new(&g)?;
        let exact = exact_height_covariance(&kinv, u1, v1, u2, v2)?;
        let target = four_point_g(g.vertex(u1), g.vertex(v1), g.vertex(u2), g.vertex(v2))? / PI;
        out.push(CovarianceRow { n, exact, target, abs_error: (exact - target).abs(), rel_error: (exact - target) / target });
    }
    Ok(out)
}

/// An increment `h(v) - h(u)` read off a matching along a fixed path.
#[derive(Clone, Debug, Serialize)]
pub struct IncrementProbe {
    pub u: usize,
    pub v: usize,
    /// Continuum positions of `u` and `v`.
    pub endpoints: (Point2, Point2),
    pub representation: IncrementRepresentation,
}

impl IncrementProbe {
    pub fn new(g: &IsoradialGraph, placement: Placement, u: usize, v: usize) -> Result<Self> {
        let path = lattice_paths(g, u, v)?[0].clone();
        let representation = height_increment_representation(g, &path)?;
        let endpoints = (placement.continuum(g.vertex(u)), placement.continuum(g.vertex(v)));
        Ok(Self { u, v, endpoints, representation })
    }

    pub fn value(&self, indicator: &[bool]) -> f64 {
        self.representation.evaluate(indicator)
    }
}

/// `count` horizontal increments of continuum length `length`, centred on the
/// placement origin and stacked `spacing` apart.
pub fn stacked_increments(
    g: &IsoradialGraph,
    placement: Placement,
    length: f64,
    spacing: f64,
    count: usize,
) -> Result<Vec<IncrementProbe>> {
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        let y = (k as f64 - (count as f64 - 1.0) / 2.0) * spacing;
        let u = placement.vertex(g, Point2::new(-length / 2.0, y));
        let v = placement.vertex(g, Point2::new(length / 2.0, y));
        if u == v {
            return Err(Error::InvalidArgument("increment shorter than the mesh".into()));
        }
        out.push(IncrementProbe::new(g, placement, u, v)?);
    }
    for (a, p) in out.iter().enumerate() {
        for q in &out[a + 1..] {
            let (ep, eq) = (p.representation.signed_edges(), q.representation.signed_edges());
            if ep.iter().any(|x| eq.iter().any(|y| x.0 == y.0)) {
                return Err(Error::OverlappingPaths);
            }
        }
    }
    Ok(out)
}

/// Probe values for samples `0..n` of `seed`, one row per sample.
pub fn sample_increments(sampler: &Sampler, probes: &[IncrementProbe], seed: u64, n: usize) -> Result<Vec<Vec<f64>>> {
    let g = sampler.graph();
    let (rows, _) = sampler.map_samples(seed, n, |m| {
        let ind = m.indicator(g);
        Ok(probes.iter().map(|p| p.value(&ind)).collect())
    })?;
    Ok(rows)
}

#[derive(Clone, Debug, Serialize)]
pub struct MomentRow {
    pub k: usize,
    pub estimate: Estimate,
    pub target: f64,
    pub z: f64,
}

/// `E[prod_{i<k} Delta_i]` for `k = 2..=len` against [`wick_moment`] of the
/// first `k` increments.
pub fn increment_moments(values: &[Vec<f64>], endpoints: &[(Point2, Point2)], batches: usize) -> Result<Vec<MomentRow>> {
    let mut out = Vec::new();
    for k in 2..=endpoints.len() {
        let prods: Vec<f64> = values.iter().map(|row| row[..k].iter().product()).collect();
        let estimate = batch_means(&prods, batches)?;
        let target = wick_moment(&endpoints[..k])?;
        out.push(MomentRow { k, estimate, target, z: estimate.z_score(target) });
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct VarianceRow {
    pub eps: f64,
    /// Radius of the flat hexagon region in lattice units.
    pub radius: usize,
    pub continuum_radius: f64,
    pub faces: usize,
    pub estimate: Estimate,
    /// `Var(H^eps phi)` under the finite-volume measure, when computed.
    pub exact_finite: Option<f64>,
    pub target: f64,
    pub rel_error: f64,
}

/// Monte Carlo `Var(H^eps phi)` on a flat hexagon of the given lattice radius
/// centred at the continuum origin, against `G(phi, phi) / pi`.
pub fn functional_variance(
    phi: &TestFunction,
    eps: f64,
    radius: usize,
    seed: u64,
    samples: usize,
    batches: usize,
    exact: bool,
) -> Result<VarianceRow> {
    let g = build_triangular_lattice(&TriangularRegion::FlatHexagon { radius })?;
    let placement = Placement { origin: Point2::new(0.0, 0.0), eps };
    let f = DiscreteFunctional::new(&g, placement, phi)?;
    let v0 = g.reference_vertex();
    let sampler = Sampler::new(&g)?;
    let (xs, _) = sampler.map_samples(seed, samples, |m| Ok(f.apply(&height_from_matching(&g, m, v0)?.values)))?;
    let estimate = variance_estimate(&xs, batches)?;
    let exact_finite = if exact { Some(exact_functional_variance(&FiniteKernel::new(&g)?, &f)?) } else { None };
    let target = dirichlet_energy(phi, phi)? / PI;
    Ok(VarianceRow {
        eps,
        radius,
        continuum_radius: radius as f64 * eps,
        faces: g.num_faces(),
        estimate,
        exact_finite,
        target,
        rel_error: (estimate.mean - target) / target,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceMesh {
    pub eps: f64,
    pub radius: usize,
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MomentConfig {
    pub seed: u64,
    pub batches: usize,
    /// Denominators `n` of the meshes for the exact covariance trend.
    pub covariance_meshes: Vec<usize>,
    /// Flat hexagon radius, in lattice units, for the increment moments.
    pub increment_radius: usize,
    pub increment_eps: f64,
    pub increment_length: f64,
    pub increment_spacing: f64,
    pub increment_count: usize,
    pub increment_samples: usize,
    pub variance_meshes: Vec<VarianceMesh>,
    pub exact_finite: bool,
}

impl Default for MomentConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            batches: 20,
            covariance_meshes: vec![8, 16, 32, 64],
            increment_radius: 24,
            increment_eps: 1.0 / 32.0,
            increment_length: 0.25,
            increment_spacing: 3.0 * 3f64.sqrt() / 32.0,
            increment_count: 4,
            increment_samples: 20_000,
            variance_meshes: vec![
                VarianceMesh { eps: 0.25, radius: 24, samples: 4000 },
                VarianceMesh { eps: 0.2, radius: 48, samples: 2000 },
            ],
            exact_finite: true,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MomentReport {
    pub config: MomentConfig,
    pub covariance: Vec<CovarianceRow>,
    pub moments: Vec<MomentRow>,
    pub variance: Vec<VarianceRow>,
}

impl MomentReport {
    /// Whether the covariance error decreases strictly along the meshes.
    pub fn covariance_monotone(&self) -> bool {
        self.covariance.windows(2).all(|w| w[1].abs_error < w[0].abs_error)
    }

    /// Whether the variance error decreases strictly along the meshes.
    pub fn variance_trend(&self) -> bool {
        self.variance.windows(2).all(|w| w[1].rel_error.abs() < w[0].rel_error.abs())
    }

    /// CSV with columns `section,key,value,se,target,error`.
    pub fn write_csv<W: std::io::Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "section,key,value,se,target,error")?;
        for r in &self.covariance {
            writeln!(out, "covariance,n={},{},0,{},{}", r.n, r.exact, r.target, r.rel_error)?;
        }
        for r in &self.moments {
            writeln!(out, "moment,k={},{},{},{},{}", r.k, r.estimate.mean, r.estimate.se, r.target, r.z)?;
        }
        for r in &self.variance {
            writeln!(out, "variance,eps={},{},{},{},{}", r.eps, r.estimate.mean, r.estimate.se, r.target, r.rel_error)?;
            if let Some(x) = r.exact_finite {
                writeln!(out, "variance_finite,eps={},{},0,{},{}", r.eps, x, r.target, (x - r.target) / r.target)?;
            }
        }
        Ok(())
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        if !self.covariance.is_empty() {
            s += "exact covariance vs (1/pi) four_point_g\n";
            for r in &self.covariance {
                s += &format!("  mesh 1/{:<3} exact {:.6} target {:.6} rel error {:+.2e}\n", r.n, r.exact, r.target, r.rel_error);
            }
            s += &format!("  monotone: {}\n", self.covariance_monotone());
        }
        if !self.moments.is_empty() {
            s += "increment moments vs Wick pairing sums\n";
        }
        for r in &self.moments {
            s += &format!(
                "  k={} estimate {:.6} +- {:.6} target {:.6} z {:+.2}\n",
                r.k, r.estimate.mean, r.estimate.se, r.target, r.z
            );
        }
        if self.variance.is_empty() {
            return s;
        }
        s += "Var(H phi) vs G(phi, phi) / pi\n";
        for r in &self.variance {
            let fin = r.exact_finite.map(|x| format!(" finite-volume {x:.5}")).unwrap_or_default();
            s += &format!(
                "  eps {:.4} region radius {:.2} estimate {:.5} +- {:.5} target {:.5} rel error {:+.3}{}\n",
                r.eps, r.continuum_radius, r.estimate.mean, r.estimate.se, r.target, r.rel_error, fin
            );
        }
        s += &format!("  trend: {}\n", self.variance_trend());
        s
    }
}

/// Exact covariance trend, Monte Carlo increment moments and functional
/// variances for one configuration.
pub fn moment_comparison(config: &MomentConfig) -> Result<MomentReport> {
    if config.increment_count < 2 {
        return Err(Error::InvalidArgument("need at least two increments".into()));
    }
    let covariance = covariance_trend(&config.covariance_meshes)?;
    let moments = if config.increment_samples > 0 {
        let g = build_triangular_lattice(&TriangularRegion::FlatHexagon { radius: config.increment_radius })?;
        let placement = Placement { origin: Point2::new(0.0, 0.0), eps: config.increment_eps };
        let probes = stacked_increments(&g, placement, config.increment_length, config.increment_spacing, config.increment_count)?;
        let sampler = Sampler::new(&g)?;
        let values = sample_increments(&sampler, &probes, config.seed, config.increment_samples)?;
        let ends: Vec<(Point2, Point2)> = probes.iter().map(|p| p.endpoints).collect();
        increment_moments(&values, &ends, config.batches)?
    } else {
        Vec::new()
    };
    let phi = TestFunction::standard();
    let variance = config
        .variance_meshes
        .iter()
        .enumerate()
        .map(|(i, m)| {
            functional_variance(&phi, m.eps, m.radius, config.seed.wrapping_add(1 + i as u64), m.samples, config.batches, config.exact_finite)
        })
        .collect::<Result<_>>()?;
    Ok(MomentReport { config: config.clone(), covariance, moments, variance })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn green_values() {
        let o = Point2::new(0.0, 0.0);
        assert_eq!(green(o, Point2::new(1.0, 0.0)).unwrap(), 0.0);
        assert!((green(o, Point2::new(0.0, std::f64::consts::E)).unwrap() + 1.0 / (2.0 * PI)).abs() < 1e-15);
        assert!(green(o, o).is_err());
    }

    #[test]
    fn pairing_counts() {
        assert_eq!(pairings(2).len(), 1);
        assert_eq!(pairings(4).len(), 3);
        assert_eq!(pairings(6).len(), 15);
        assert!(pairings(3).is_empty());
    }

    #[test]
    fn two_point_cauchy() {
        let xs = [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
        assert!((cauchy_zero_diag_det(&xs).unwrap() - 1.0).norm() < 1e-15);
        assert!((pairing_sum(&xs).unwrap() - 1.0).norm() < 1e-15);
    }

    #[test]
    fn bump_potential_outside_is_point_mass() {
        let b = Bump { center: Point2::new(0.5, 0.0), radius: 0.7 };
        let x = Point2::new(3.0, 1.0);
        let m = b.mass().unwrap();
        assert!((b.potential(x).unwrap() * 2.0 * PI - (-m * x.dist(b.center).ln())).abs() < 1e-12);
    }
}
