//! Vertical strip decomposition of a region and block Schur recursions for `K`.
//!
//! Balanced blocks (stars of a vertex class when they tile the region, matched
//! pairs of a reference perfect matching otherwise) are cut into vertical strips,
//! so every strip holds as many whites as blacks and `K` is block
//! tridiagonal. Every union of consecutive strips is a region with a perfect
//! matching, so all Schur complements below are invertible.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Color, IsoradialGraph, LatticeKind};
use crate::kernel::DiracOperator;
use crate::matching::find_perfect_matching;

pub(crate) type CMat = DMatrix<Complex64>;

/// How a region is cut into strips.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StripMode {
    /// One strip: plain dense elimination.
    Single,
    #[default]
    Auto,
}

#[derive(Clone, Debug, Default)]
pub(crate) struct Strip {
    pub whites: Vec<usize>,
    pub blacks: Vec<usize>,
}

#[derive(Clone, Debug)]
pub(crate) struct StripPlan {
    pub strips: Vec<Strip>,
    /// `(strip, position in that strip's list of its colour)` for every face.
    pub slot: Vec<(usize, usize)>,
}

fn row_major(g: &IsoradialGraph, fs: &mut [usize]) {
    fs.sort_by(|&a, &b| {
        let (p, q) = (g.face(a).center, g.face(b).center);
        p.y.total_cmp(&q.y).then(p.x.total_cmp(&q.x)).then(a.cmp(&b))
    });
}

/// Balanced stars of one class of primal vertices that tile the whole region,
/// when such a class exists (hexagons on T, 2x2 blocks on Z^2, lozenges on L).
fn star_partition(g: &IsoradialGraph) -> Option<Vec<Vec<usize>>> {
    let interior: Vec<usize> = (0..g.vertices().len()).filter(|&v| g.is_interior_vertex(v)).collect();
    let classes: Vec<Vec<usize>> = match (g.kind(), g.lattice_coords()) {
        (LatticeKind::Triangular, Some(c)) => (0..3)
            .map(|r| interior.iter().copied().filter(|&v| (c[v][0] - c[v][1]).rem_euclid(3) == r).collect())
            .collect(),
        (LatticeKind::Square, Some(c)) => (0..4)
            .map(|r| {
                interior.iter().copied().filter(|&v| c[v][0].rem_euclid(2) + 2 * c[v][1].rem_euclid(2) == r).collect()
            })
            .collect(),
        (LatticeKind::LozengeDiagonals, _) => {
            vec![interior.iter().copied().filter(|&v| g.vertex_faces(v).len() == 4).collect()]
        }
        _ => Vec::new(),
    };
    'class: for class in classes {
        let mut seen = vec![false; g.num_faces()];
        let mut stars = Vec::with_capacity(class.len());
        for v in class {
            let star = g.vertex_faces(v);
            let blacks = star.iter().filter(|&&f| g.face(f).color == Color::Black).count();
            if 2 * blacks != star.len() || star.iter().any(|&f| seen[f]) {
                continue 'class;
            }
            for &f in &star {
                seen[f] = true;
            }
            stars.push(star);
        }
        if seen.iter().all(|&s| s) {
            return Some(stars);
        }
    }
    None
}

impl StripPlan {
    pub fn new(g: &IsoradialGraph, mode: StripMode) -> Result<Self> {
        let m = find_perfect_matching(g).ok_or(Error::NoPerfectMatching)?;
        let n = g.num_faces();
        // blocks: flat-boundary clusters when available, else matched pairs
        let blocks: Vec<Vec<usize>> = star_partition(g)
            .unwrap_or_else(|| m.edges.iter().map(|&e| vec![g.dual_edges()[e].white, g.dual_edges()[e].black]).collect());
        let mut block_of = vec![usize::MAX; n];
        let mut xs = Vec::with_capacity(blocks.len());
        for (k, block) in blocks.iter().enumerate() {
            for &f in block {
                block_of[f] = k;
            }
            xs.push(block.iter().map(|&f| g.face(f).center.x).sum::<f64>() / block.len() as f64);
        }
        let mut width: f64 = 0.0;
        for d in g.dual_edges() {
            let (a, b) = (block_of[d.white], block_of[d.black]);
            if a != b {
                width = width.max((xs[a] - xs[b]).abs());
            }
        }
        let x0 = xs.iter().copied().fold(f64::INFINITY, f64::min);
        let bins: Vec<usize> = match mode {
            StripMode::Auto if width > 0.0 => {
                let w = width * (1.0 + 1e-9);
                xs.iter().map(|x| ((x - x0) / w).floor() as usize).collect()
            }
            _ => vec![0; xs.len()],
        };
        let mut used: Vec<usize> = bins.clone();
        used.sort_unstable();
        used.dedup();
        let mut strips = vec![Strip::default(); used.len()];
        for (k, block) in blocks.iter().enumerate() {
            let s = used.binary_search(&bins[k]).expect("bin present");
            for &f in block {
                match g.face(f).color {
                    Color::White => strips[s].whites.push(f),
                    Color::Black => strips[s].blacks.push(f),
                }
            }
        }
        let mut slot = vec![(0, 0); n];
        for (s, strip) in strips.iter_mut().enumerate() {
            row_major(g, &mut strip.whites);
            row_major(g, &mut strip.blacks);
            for (p, &f) in strip.whites.iter().enumerate() {
                slot[f] = (s, p);
            }
            for (p, &f) in strip.blacks.iter().enumerate() {
                slot[f] = (s, p);
            }
        }
        for d in g.dual_edges() {
            if slot[d.white].0.abs_diff(slot[d.black].0) > 1 {
                return Err(Error::Invalid("strip decomposition is not block tridiagonal".into()));
            }
        }
        Ok(Self { strips, slot })
    }

    pub fn len(&self) -> usize {
        self.strips.len()
    }
}

pub(crate) fn invert(m: &CMat, what: &str) -> Result<CMat> {
    if m.nrows() == 0 {
        return Ok(m.clone());
    }
    m.clone().lu().try_inverse().ok_or_else(|| Error::SingularKernel(what.to_string()))
}

/// `K` cut into strip blocks together with the right Schur inverses
/// `SR_c^{-1}`, where `SR_c` is `K` on strips `>= c` with strips `> c` eliminated.
pub(crate) struct BlockSystem {
    pub plan: StripPlan,
    /// `K[W_c, B_c]`
    pub kdiag: Vec<CMat>,
    /// `K[W_c, B_{c+1}]`
    pub kup: Vec<CMat>,
    /// `K[W_{c+1}, B_c]`
    pub klow: Vec<CMat>,
    pub sr_inv: Vec<CMat>,
}

impl BlockSystem {
    pub fn new(g: &IsoradialGraph, dirac: &DiracOperator, mode: StripMode) -> Result<Self> {
        let plan = StripPlan::new(g, mode)?;
        let s = plan.len();
        let size = |c: usize| plan.strips[c].whites.len();
        let mut kdiag: Vec<CMat> = (0..s).map(|c| CMat::zeros(size(c), size(c))).collect();
        let mut kup: Vec<CMat> = (0..s.saturating_sub(1)).map(|c| CMat::zeros(size(c), size(c + 1))).collect();
        let mut klow: Vec<CMat> = (0..s.saturating_sub(1)).map(|c| CMat::zeros(size(c + 1), size(c))).collect();
        for (e, d) in g.dual_edges().iter().enumerate() {
            let (cw, pw) = plan.slot[d.white];
            let (cb, pb) = plan.slot[d.black];
            let k = dirac.value(e);
            if cw == cb {
                kdiag[cw][(pw, pb)] = k;
            } else if cb == cw + 1 {
                kup[cw][(pw, pb)] = k;
            } else {
                klow[cb][(pw, pb)] = k;
            }
        }
        let mut sr_inv = vec![CMat::zeros(0, 0); s];
        for c in (0..s).rev() {
            let sr = if c + 1 < s { &kdiag[c] - &kup[c] * &sr_inv[c + 1] * &klow[c] } else { kdiag[c].clone() };
            sr_inv[c] = invert(&sr, &format!("right Schur complement of strip {c}"))?;
        }
        Ok(Self { plan, kdiag, kup, klow, sr_inv })
    }

    /// `SL_c^{-1}`, with `SL_c` the Schur complement of strips `<= c`.
    pub fn left_inverses(&self) -> Result<Vec<CMat>> {
        let s = self.plan.len();
        let mut sl_inv: Vec<CMat> = Vec::with_capacity(s);
        for c in 0..s {
            let sl = if c > 0 {
                &self.kdiag[c] - &self.klow[c - 1] * &sl_inv[c - 1] * &self.kup[c - 1]
            } else {
                self.kdiag[c].clone()
            };
            sl_inv.push(invert(&sl, &format!("left Schur complement of strip {c}"))?);
        }
        Ok(sl_inv)
    }

    /// Diagonal blocks `K^{-1}[B_c, W_c]`.
    pub fn diagonal_inverse(&self, sl_inv: &[CMat]) -> Result<Vec<CMat>> {
        let s = self.plan.len();
        (0..s)
            .map(|c| {
                let mut a = self.kdiag[c].clone();
                if c > 0 {
                    a -= &self.klow[c - 1] * &sl_inv[c - 1] * &self.kup[c - 1];
                }
                if c + 1 < s {
                    a -= &self.kup[c] * &self.sr_inv[c + 1] * &self.klow[c];
                }
                invert(&a, &format!("diagonal block {c}"))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_square_lattice, build_triangular_lattice, TriangularRegion};

    #[test]
    fn strips_are_balanced_and_cover_all_faces() {
        let g = build_triangular_lattice(&TriangularRegion::Hexagons { cols: 4, rows: 3 }).unwrap();
        let plan = StripPlan::new(&g, StripMode::Auto).unwrap();
        assert!(plan.len() > 1);
        let total: usize = plan.strips.iter().map(|s| s.whites.len() + s.blacks.len()).sum();
        assert_eq!(total, g.num_faces());
        for s in &plan.strips {
            assert_eq!(s.whites.len(), s.blacks.len());
        }
    }

    #[test]
    fn single_mode_gives_one_strip() {
        let g = build_square_lattice(4, 4).unwrap();
        let plan = StripPlan::new(&g, StripMode::Single).unwrap();
        assert_eq!(plan.len(), 1);
    }
}
