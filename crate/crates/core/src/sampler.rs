//! Exact sampling of dimer configurations by sequential determinantal
//! conditioning.
//!
//! The region is swept strip by strip. For strip `c` the sampler keeps the
//! inverse of `K` restricted to strips `>= c`, on the rows and columns of the
//! strip and its neighbours in strip `c + 1`. Vertices already matched into
//! the strip are removed by a Schur complement, then every free vertex of the
//! strip draws its partner with probability `K(w, b) C(b, w)` followed by a
//! rank-1 update of `C`.

use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{build_triangular_lattice, IsoradialGraph, LozengeTiling, TriangularRegion};
use crate::kernel::{DiracOperator, FINITE_REGION_CAP};
use crate::matching::DimerConfiguration;
use crate::strips::{BlockSystem, CMat, StripMode};

const CLAMP: f64 = 1e-9;
const SUM_TOLERANCE: f64 = 1e-6;

/// A ChaCha8 generator addressed by `(seed, stream)`.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { seed, stream, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Worst numerical deviations seen while drawing.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct SampleDiagnostics {
    pub draws: usize,
    /// `max |sum of conditional probabilities - 1|`
    pub max_sum_deviation: f64,
    pub max_imaginary: f64,
    /// Most negative raw probability that was clamped to zero.
    pub min_probability: f64,
}

impl SampleDiagnostics {
    pub fn merge(&mut self, other: &Self) {
        self.draws += other.draws;
        self.max_sum_deviation = self.max_sum_deviation.max(other.max_sum_deviation);
        self.max_imaginary = self.max_imaginary.max(other.max_imaginary);
        self.min_probability = self.min_probability.min(other.min_probability);
    }
}

struct StripData {
    /// Row faces (blacks): own strip first, then neighbours in the next strip.
    blacks: Vec<usize>,
    /// Column faces (whites), same layout.
    whites: Vec<usize>,
    own_b: usize,
    own_w: usize,
    /// Row-major `blacks x whites` inverse on strips `>= c`.
    phi: Vec<Complex64>,
    /// Own faces of both colours in row-major order.
    order: Vec<usize>,
}

/// Precomputed sampler for one region.
pub struct Sampler<'g> {
    graph: &'g IsoradialGraph,
    dirac: DiracOperator,
    strips: Vec<StripData>,
    /// `(strip, local index)` of each face within its own strip.
    own: Vec<(usize, usize)>,
    /// Local index of each face inside the previous strip's extended block.
    ext: Vec<Option<usize>>,
}

fn to_row_major(m: &CMat) -> Vec<Complex64> {
    let (r, c) = m.shape();
    let mut out = Vec::with_capacity(r * c);
    for i in 0..r {
        for j in 0..c {
            out.push(m[(i, j)]);
        }
    }
    out
}

impl<'g> Sampler<'g> {
    pub fn new(graph: &'g IsoradialGraph) -> Result<Self> {
        Self::with_mode(graph, StripMode::Auto)
    }

    pub fn with_mode(graph: &'g IsoradialGraph, mode: StripMode) -> Result<Self> {
        let n = graph.num_faces();
        if n > FINITE_REGION_CAP {
            return Err(Error::RegionTooLarge(n, FINITE_REGION_CAP));
        }
        let dirac = DiracOperator::assemble(graph)?;
        let sys = BlockSystem::new(graph, &dirac, mode)?;
        let plan = &sys.plan;
        let s = plan.len();
        let mut ext = vec![None; n];
        let mut own = plan.slot.clone();
        let mut rank = vec![0; n];
        let mut strips = Vec::with_capacity(s);
        for c in 0..s {
            let strip = &plan.strips[c];
            let mut blacks = strip.blacks.clone();
            let mut whites = strip.whites.clone();
            let (own_b, own_w) = (blacks.len(), whites.len());
            let a = &sys.sr_inv[c];
            let phi = if c + 1 < s {
                let next = &plan.strips[c + 1];
                let mut eb = vec![false; next.blacks.len()];
                let mut ew = vec![false; next.whites.len()];
                for &f in strip.whites.iter().chain(&strip.blacks) {
                    for &e in graph.face_dual(f) {
                        let d = graph.dual_edges()[e];
                        let other = if d.white == f { d.black } else { d.white };
                        let (so, po) = plan.slot[other];
                        if so == c + 1 {
                            if other == d.black {
                                eb[po] = true;
                            } else {
                                ew[po] = true;
                            }
                        }
                    }
                }
                let sel_b: Vec<usize> = (0..eb.len()).filter(|&p| eb[p]).collect();
                let sel_w: Vec<usize> = (0..ew.len()).filter(|&p| ew[p]).collect();
                for (k, &p) in sel_b.iter().enumerate() {
                    ext[next.blacks[p]] = Some(own_b + k);
                    blacks.push(next.blacks[p]);
                }
                for (k, &p) in sel_w.iter().enumerate() {
                    ext[next.whites[p]] = Some(own_w + k);
                    whites.push(next.whites[p]);
                }
                let r = &sys.sr_inv[c + 1];
                let r_rows = r.select_rows(sel_b.iter());
                let r_cols = r.select_columns(sel_w.iter());
                let r_sub = r_rows.select_columns(sel_w.iter());
                let ll = -(&r_rows * (&sys.klow[c] * a));
                let ur = -((a * &sys.kup[c]) * &r_cols);
                let lr = r_sub - &ll * (&sys.kup[c] * &r_cols);
                let mut phi = CMat::zeros(blacks.len(), whites.len());
                phi.view_mut((0, 0), (own_b, own_w)).copy_from(a);
                phi.view_mut((own_b, 0), (sel_b.len(), own_w)).copy_from(&ll);
                phi.view_mut((0, own_w), (own_b, sel_w.len())).copy_from(&ur);
                phi.view_mut((own_b, own_w), (sel_b.len(), sel_w.len())).copy_from(&lr);
                to_row_major(&phi)
            } else {
                to_row_major(a)
            };
            let mut order: Vec<usize> = strip.whites.iter().chain(&strip.blacks).copied().collect();
            order.sort_by(|&x, &y| {
                let (p, q) = (graph.face(x).center, graph.face(y).center);
                p.y.total_cmp(&q.y).then(p.x.total_cmp(&q.x)).then(x.cmp(&y))
            });
            // store the strip's own rows and columns in sweep order, so that the
            // live part of the block shrinks towards the extension as draws proceed
            for (k, &f) in order.iter().enumerate() {
                rank[f] = k;
            }
            let mut pb: Vec<usize> = (0..blacks.len()).collect();
            let mut pw: Vec<usize> = (0..whites.len()).collect();
            pb[..own_b].sort_by_key(|&i| rank[blacks[i]]);
            pw[..own_w].sort_by_key(|&j| rank[whites[j]]);
            let nw = whites.len();
            let src = &phi;
            let phi: Vec<Complex64> = pb.iter().flat_map(|&i| pw.iter().map(move |&j| src[i * nw + j])).collect();
            let blacks: Vec<usize> = pb.iter().map(|&i| blacks[i]).collect();
            let whites: Vec<usize> = pw.iter().map(|&j| whites[j]).collect();
            for (k, &f) in blacks[..own_b].iter().chain(&whites[..own_w]).enumerate() {
                own[f] = (c, if k < own_b { k } else { k - own_b });
            }
            strips.push(StripData { blacks, whites, own_b, own_w, phi, order });
        }
        Ok(Self { graph, dirac, strips, own, ext })
    }

    pub fn graph(&self) -> &IsoradialGraph {
        self.graph
    }

    pub fn num_strips(&self) -> usize {
        self.strips.len()
    }

    fn local(&self, c: usize, f: usize) -> Option<usize> {
        let (s, p) = self.own[f];
        if s == c {
            Some(p)
        } else if s == c + 1 {
            self.ext[f]
        } else {
            None
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<DimerConfiguration> {
        let mut diag = SampleDiagnostics::default();
        self.sample_with(rng, &mut diag)
    }

    pub fn sample_with<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        diag: &mut SampleDiagnostics,
    ) -> Result<DimerConfiguration> {
        let g = self.graph;
        let mut matched = vec![false; g.num_faces()];
        let mut edges = Vec::with_capacity(g.num_faces() / 2);
        let mut cand: Vec<(usize, usize, usize, f64)> = Vec::new();
        for (c, sd) in self.strips.iter().enumerate() {
            let nw = sd.whites.len();
            let mut m = sd.phi.clone();
            let mut rows: Vec<usize> = (0..sd.blacks.len()).collect();
            let mut cols: Vec<usize> = (0..nw).collect();
            let mut xb: Vec<usize> = (0..sd.own_b).filter(|&i| matched[sd.blacks[i]]).collect();
            let mut xw: Vec<usize> = (0..sd.own_w).filter(|&j| matched[sd.whites[j]]).collect();
            if xb.len() != xw.len() {
                return Err(Error::Invalid("unbalanced forced vertices in a strip".into()));
            }
            while !xb.is_empty() {
                let mut best = (0, 0, -1.0);
                for (p, &i) in xb.iter().enumerate() {
                    for (q, &j) in xw.iter().enumerate() {
                        let v = m[i * nw + j].norm();
                        if v > best.2 {
                            best = (p, q, v);
                        }
                    }
                }
                if best.2 <= 0.0 {
                    return Err(Error::SingularKernel("forced vertices block is singular".into()));
                }
                let (i, j) = (xb.swap_remove(best.0), xw.swap_remove(best.1));
                eliminate(&mut m, nw, &mut rows, &mut cols, i, j);
            }
            for &f in &sd.order {
                if matched[f] {
                    continue;
                }
                cand.clear();
                let mut total = 0.0;
                for &e in g.face_dual(f) {
                    let d = g.dual_edges()[e];
                    let other = if d.white == f { d.black } else { d.white };
                    if matched[other] {
                        continue;
                    }
                    let (bi, wj) = match (self.local(c, d.black), self.local(c, d.white)) {
                        (Some(bi), Some(wj)) => (bi, wj),
                        _ => return Err(Error::Invalid("neighbour outside the strip window".into())),
                    };
                    let p = self.dirac.value(e) * m[bi * nw + wj];
                    diag.max_imaginary = diag.max_imaginary.max(p.im.abs());
                    let mut pr = p.re;
                    if pr < 0.0 {
                        if pr < -CLAMP {
                            return Err(Error::NegativeProbability { vertex: f, value: pr });
                        }
                        diag.min_probability = diag.min_probability.min(pr);
                        pr = 0.0;
                    }
                    total += pr;
                    cand.push((e, bi, wj, pr));
                }
                let dev = (total - 1.0).abs();
                diag.max_sum_deviation = diag.max_sum_deviation.max(dev);
                if dev > SUM_TOLERANCE || cand.is_empty() {
                    return Err(Error::InconsistentProbabilities { vertex: f, sum: total });
                }
                let u = rng.random::<f64>() * total;
                let mut acc = 0.0;
                let mut pick = cand.len() - 1;
                for (k, c) in cand.iter().enumerate() {
                    acc += c.3;
                    if u < acc && c.3 > 0.0 {
                        pick = k;
                        break;
                    }
                }
                while cand[pick].3 <= 0.0 && pick > 0 {
                    pick -= 1;
                }
                let (e, bi, wj, _) = cand[pick];
                let d = g.dual_edges()[e];
                matched[d.white] = true;
                matched[d.black] = true;
                edges.push(e);
                diag.draws += 1;
                eliminate(&mut m, nw, &mut rows, &mut cols, bi, wj);
            }
        }
        Ok(DimerConfiguration::new(edges))
    }

    /// `n` samples, sample `i` drawn from stream `i` of `seed`.
    pub fn sample_many(&self, seed: u64, n: usize) -> Result<(Vec<DimerConfiguration>, SampleDiagnostics)> {
        self.map_samples(seed, n, |m| Ok(m.clone()))
    }

    /// Applies `f` to samples `0..n` without keeping them; sample `i` comes from stream `i`.
    pub fn map_samples<U: Send, F: Fn(&DimerConfiguration) -> Result<U> + Sync + Send>(
        &self,
        seed: u64,
        n: usize,
        f: F,
    ) -> Result<(Vec<U>, SampleDiagnostics)> {
        let idx: Vec<u64> = (0..n as u64).collect();
        let out = crate::mc::par_map(&idx, |&i| {
            let mut rng = RngStream::new(seed, i);
            let mut d = SampleDiagnostics::default();
            let m = self.sample_with(&mut rng, &mut d)?;
            f(&m).map(|u| (u, d))
        });
        let mut diag = SampleDiagnostics::default();
        let mut values = Vec::with_capacity(n);
        for r in out {
            let (u, d) = r?;
            diag.merge(&d);
            values.push(u);
        }
        Ok((values, diag))
    }
}

/// Removes row `b` and column `w` by the Schur update `M -= M[:, w] M[b, :] / M[b, w]`.
fn eliminate(m: &mut [Complex64], nw: usize, rows: &mut Vec<usize>, cols: &mut Vec<usize>, b: usize, w: usize) {
    let piv = m[b * nw + w];
    let pivot_row: Vec<Complex64> = m[b * nw..(b + 1) * nw].to_vec();
    rows.retain(|&i| i != b);
    cols.retain(|&j| j != w);
    let (lo, hi) = match (cols.first(), cols.last()) {
        (Some(&lo), Some(&hi)) => (lo, hi + 1),
        _ => return,
    };
    for &i in rows.iter() {
        let f = m[i * nw + w] / piv;
        if f == Complex64::new(0.0, 0.0) {
            continue;
        }
        let row = &mut m[i * nw + lo..i * nw + hi];
        for (x, y) in row.iter_mut().zip(&pivot_row[lo..hi]) {
            *x -= f * y;
        }
    }
}

pub fn sample_matching<R: Rng + ?Sized>(g: &IsoradialGraph, rng: &mut R) -> Result<DimerConfiguration> {
    Sampler::new(g)?.sample(rng)
}

pub fn sample_lozenge_tiling<R: Rng + ?Sized>(region: &TriangularRegion, rng: &mut R) -> Result<LozengeTiling> {
    let g = build_triangular_lattice(region)?;
    let m = sample_matching(&g, rng)?;
    LozengeTiling::from_matching(&g, &m)
}

/// Writes one JSON array of dual-edge ids per line after a header line.
pub fn write_matchings<W: Write>(
    out: &mut W,
    header: &serde_json::Value,
    samples: &[DimerConfiguration],
) -> Result<()> {
    writeln!(out, "{}", serde_json::to_string(&serde_json::json!({ "header": header }))?)?;
    for m in samples {
        writeln!(out, "{}", serde_json::to_string(&m.edges)?)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let mut a = RngStream::new(7, 3);
        let mut b = RngStream::new(7, 3);
        let mut c = RngStream::new(7, 4);
        let (x, y, z) = (a.next_u64(), b.next_u64(), c.next_u64());
        assert_eq!(x, y);
        assert_ne!(x, z);
    }

    #[test]
    fn eliminate_matches_dense_inverse_of_minor() {
        // M = A^{-1}; removing row b / column w of M corresponds to deleting
        // row w / column b of A
        let a = CMat::from_fn(4, 4, |i, j| Complex64::new((i * 7 + j * 3) as f64 % 5.0 + if i == j { 6.0 } else { 0.0 }, (i as f64 - j as f64) * 0.3));
        let m_inv = a.clone().try_inverse().unwrap();
        let mut m = to_row_major(&m_inv);
        let (mut rows, mut cols) = ((0..4).collect(), (0..4).collect());
        eliminate(&mut m, 4, &mut rows, &mut cols, 1, 2);
        let minor = a.remove_row(2).remove_column(1);
        let minor_inv = minor.try_inverse().unwrap();
        let keep_r = [0, 2, 3];
        let keep_c = [0, 1, 3];
        for (p, &i) in keep_r.iter().enumerate() {
            for (q, &j) in keep_c.iter().enumerate() {
                assert!((m[i * 4 + j] - minor_inv[(p, q)]).norm() < 1e-12);
            }
        }
    }
}
