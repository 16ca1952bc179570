//! Triangular quadri-tilings as dimer configurations of lozenge-with-diagonals
//! graphs, sampled in two stages: a lozenge tiling of the triangular region,
//! then a dimer configuration on the dual of its diagonal refinement.

use std::f64::consts::PI;
use std::io::Write;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{build_lozenge_with_diagonals, IsoradialGraph, Lozenge, LozengeTiling};
use crate::height::{height_from_matching, HeightField};
use crate::matching::DimerConfiguration;
use crate::mc::{batch_means, correlation_estimate, Estimate, DEFAULT_BATCHES};
use crate::sampler::{RngStream, Sampler};

const TOL: f64 = 1e-9;
pub const MIN_INDEPENDENCE_SAMPLES: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum TileType {
    /// Glued along the short leg, rhombus angle `pi / 6`.
    I,
    /// Glued along the long leg, `pi / 3`.
    II,
    /// Glued along the hypotenuse into a rectangle, `pi / 2`.
    III,
    /// Glued along the hypotenuse into a kite, `pi / 2`.
    IV,
}

impl TileType {
    pub fn rhombus_angle(self) -> f64 {
        match self {
            TileType::I => PI / 6.0,
            TileType::II => PI / 3.0,
            TileType::III | TileType::IV => PI / 2.0,
        }
    }
}

/// Two right triangles of `L` joined across the primal edge of one dimer.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuadriTile {
    /// Dual edge of `L*`.
    pub edge: usize,
    /// `[white, black]` triangles.
    pub faces: [usize; 2],
    /// Counterclockwise corners.
    pub corners: [usize; 4],
    /// Right-angle corners (lozenge centres), coloured black.
    pub black: Vec<usize>,
    pub kind: TileType,
    /// Lozenges of the underlying tiling the tile lies in.
    pub lozenges: Vec<usize>,
}

/// Lozenge of a face of `L`; faces are built four per lozenge.
fn lozenge_of(face: usize) -> usize {
    face / 4
}

/// One draw of the two-stage measure on a triangular region.
#[derive(Clone, Debug)]
pub struct QuadriSample<'g> {
    /// The triangular region `T`.
    pub region: &'g IsoradialGraph,
    /// Stage 1: lozenge tiling and its dimer configuration on `T`.
    pub tiling: LozengeTiling,
    pub lozenge_matching: DimerConfiguration,
    /// Stage 2: the diagonal refinement `L` and a dimer configuration on `L*`.
    pub graph: IsoradialGraph,
    pub matching: DimerConfiguration,
}

impl QuadriSample<'_> {
    pub fn tiles(&self) -> Result<Vec<QuadriTile>> {
        let g = &self.graph;
        let n0 = self.tiling.vertices.len();
        self.matching
            .edges
            .iter()
            .map(|&e| {
                let d = g.dual_edge(e)?;
                let theta = g.rhombus_angle(e)?;
                let (lw, lb) = (lozenge_of(d.white), lozenge_of(d.black));
                let mut corners: Vec<usize> =
                    g.face(d.white).vertices.iter().chain(&g.face(d.black).vertices).copied().collect();
                corners.sort_unstable();
                corners.dedup();
                if corners.len() != 4 {
                    return Err(Error::Invalid(format!("tile of dual edge {e} does not have four corners")));
                }
                let mut corners: [usize; 4] = corners.try_into().expect("four corners");
                sort_ccw(&mut corners, g);
                let black: Vec<usize> = corners.iter().copied().filter(|&v| v >= n0).collect();
                let kind = if (theta - PI / 6.0).abs() < TOL {
                    TileType::I
                } else if (theta - PI / 3.0).abs() < TOL {
                    TileType::II
                } else if (theta - PI / 2.0).abs() < TOL && black.len() == 2 {
                    let (c1, c2) = (g.vertex(black[0]), g.vertex(black[1]));
                    let (x, y) = (g.vertex(d.tail), g.vertex(d.head));
                    let s = ((c1.x + c2.x - x.x - y.x).powi(2) + (c1.y + c2.y - x.y - y.y).powi(2)).sqrt();
                    if s < TOL * g.mesh() {
                        TileType::III
                    } else {
                        TileType::IV
                    }
                } else {
                    return Err(Error::Invalid(format!("dual edge {e} has rhombus angle {theta}")));
                };
                let lozenges = if lw == lb { vec![lw] } else { vec![lw.min(lb), lw.max(lb)] };
                Ok(QuadriTile { edge: e, faces: [d.white, d.black], corners, black, kind, lozenges })
            })
            .collect()
    }

    /// The lozenge tiling recovered from the tiles by erasing diagonals.
    pub fn underlying_tiling(&self) -> Result<LozengeTiling> {
        let n0 = self.tiling.vertices.len();
        let mut corners: Vec<Vec<usize>> = vec![Vec::new(); self.tiling.lozenges.len()];
        for t in self.tiles()? {
            for f in t.faces {
                corners[lozenge_of(f)].extend(self.graph.face(f).vertices.iter().copied().filter(|&v| v < n0));
            }
        }
        let lozenges = corners
            .into_iter()
            .enumerate()
            .map(|(k, mut c)| {
                c.sort_unstable();
                c.dedup();
                let mut cs: [usize; 4] = c
                    .try_into()
                    .map_err(|_| Error::MalformedTiling(format!("lozenge {k} is not covered by its four triangles")))?;
                sort_ccw(&mut cs, &self.graph);
                Ok(Lozenge { corners: cs, short_diagonal: self.tiling.lozenges[k].short_diagonal })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(LozengeTiling { vertices: self.tiling.vertices.clone(), lozenges, mesh: self.tiling.mesh })
    }
}

fn sort_ccw(c: &mut [usize; 4], g: &IsoradialGraph) {
    let cx = c.iter().map(|&v| g.vertex(v).x).sum::<f64>() / 4.0;
    let cy = c.iter().map(|&v| g.vertex(v).y).sum::<f64>() / 4.0;
    c.sort_by(|&a, &b| {
        let (p, q) = (g.vertex(a), g.vertex(b));
        (p.y - cy).atan2(p.x - cx).total_cmp(&(q.y - cy).atan2(q.x - cx))
    });
}

/// Checks the structure of a sampled quadri-tiling: a perfect matching of
/// `L*`, right angles at the black corners, types consistent with the glue,
/// and the underlying lozenge tiling equal to the stage-1 tiling.
pub fn validate_quadri(qs: &QuadriSample) -> Result<()> {
    qs.matching.validate(&qs.graph)?;
    let g = &qs.graph;
    for t in qs.tiles()? {
        let leg = t.lozenges.len() == 1;
        match (t.kind, leg) {
            (TileType::I | TileType::II, true) if t.black.len() == 1 => {}
            (TileType::III | TileType::IV, false) if t.black.len() == 2 => {}
            _ => return Err(Error::Invalid(format!("tile of dual edge {} has inconsistent glue", t.edge))),
        }
        for f in t.faces {
            let vs = &g.face(f).vertices;
            let c = *vs.iter().find(|v| t.black.contains(v)).ok_or_else(|| {
                Error::Invalid(format!("triangle {f} has no black corner"))
            })?;
            let others: Vec<usize> = vs.iter().copied().filter(|&v| v != c).collect();
            let (p, a, b) = (g.vertex(c), g.vertex(others[0]), g.vertex(others[1]));
            let dot = (a.x - p.x) * (b.x - p.x) + (a.y - p.y) * (b.y - p.y);
            if dot.abs() > TOL * g.mesh() * g.mesh() {
                return Err(Error::Invalid(format!("triangle {f} has no right angle at its black corner")));
            }
        }
    }
    let back = qs.underlying_tiling()?;
    for (a, b) in back.lozenges.iter().zip(&qs.tiling.lozenges) {
        let mut x = a.corners;
        let mut y = b.corners;
        x.sort_unstable();
        y.sort_unstable();
        if x != y {
            return Err(Error::Invalid("erasing diagonals does not recover the lozenge tiling".into()));
        }
    }
    Ok(())
}

/// Two-stage sampler over a fixed triangular region.
pub struct QuadriSampler<'g> {
    region: &'g IsoradialGraph,
    stage1: Sampler<'g>,
}

impl<'g> QuadriSampler<'g> {
    pub fn new(region: &'g IsoradialGraph) -> Result<Self> {
        Ok(Self { region, stage1: Sampler::new(region)? })
    }

    pub fn region(&self) -> &'g IsoradialGraph {
        self.region
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<QuadriSample<'g>> {
        let lozenge_matching = self.stage1.sample(rng)?;
        let tiling = LozengeTiling::from_matching(self.region, &lozenge_matching)?;
        let graph = build_lozenge_with_diagonals(&tiling)?;
        let matching = Sampler::new(&graph)?.sample(rng)?;
        Ok(QuadriSample { region: self.region, tiling, lozenge_matching, graph, matching })
    }

    /// Applies `f` to samples `0..n`, sample `i` drawn from stream `i` of `seed`.
    pub fn map_samples<U: Send, F: Fn(&QuadriSample) -> Result<U> + Sync + Send>(
        &self,
        seed: u64,
        n: usize,
        f: F,
    ) -> Result<Vec<U>> {
        let idx: Vec<u64> = (0..n as u64).collect();
        crate::mc::par_map(&idx, |&i| self.sample(&mut RngStream::new(seed, i)).and_then(|qs| f(&qs)))
            .into_iter()
            .collect()
    }
}

/// One two-stage draw on the triangular region `region`.
pub fn sample_quadri<'g, R: Rng + ?Sized>(region: &'g IsoradialGraph, rng: &mut R) -> Result<QuadriSample<'g>> {
    QuadriSampler::new(region)?.sample(rng)
}

/// First height: the height of the `L*` configuration.
pub fn height1(qs: &QuadriSample, v0: usize) -> Result<HeightField> {
    height_from_matching(&qs.graph, &qs.matching, v0)
}

/// Value of the second height at a lozenge centre from its four corners.
pub fn lozenge_center_height(corners: [f64; 4]) -> f64 {
    corners.iter().sum::<f64>() / 4.0
}

/// Second height: the lozenge tiling as a dimer configuration of `T`,
/// extended to lozenge centres by [`lozenge_center_height`]. Indexed by the
/// vertices of `L`.
pub fn height2(qs: &QuadriSample, v0: usize) -> Result<HeightField> {
    let base = height_from_matching(qs.region, &qs.lozenge_matching, v0)?;
    let mut values = base.values;
    for l in &qs.tiling.lozenges {
        values.push(lozenge_center_height(l.corners.map(|c| values[c])));
    }
    Ok(HeightField { values, reference: v0 })
}

/// Increments `h1(v) - h1(u)` and `h2(v') - h2(u')` of one sample.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct IncrementSpec {
    pub h1: (usize, usize),
    pub h2: (usize, usize),
}

pub fn increments(qs: &QuadriSample, spec: IncrementSpec, v0: usize) -> Result<(f64, f64)> {
    let (h1, h2) = (height1(qs, v0)?, height2(qs, v0)?);
    Ok((h1.increment(spec.h1.0, spec.h1.1), h2.increment(spec.h2.0, spec.h2.1)))
}

#[derive(Clone, Debug, Serialize)]
pub struct IndependenceReport {
    pub n: usize,
    pub correlation: Estimate,
    pub mean_dh1: Estimate,
    pub mean_dh2: Estimate,
}

/// Sample correlation of paired increments with a batch-means standard error.
pub fn empirical_independence(pairs: &[(f64, f64)]) -> Result<IndependenceReport> {
    if pairs.len() < MIN_INDEPENDENCE_SAMPLES {
        return Err(Error::InsufficientSamples(format!(
            "{} samples, at least {MIN_INDEPENDENCE_SAMPLES} needed",
            pairs.len()
        )));
    }
    let (x, y): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
    Ok(IndependenceReport {
        n: pairs.len(),
        correlation: correlation_estimate(&x, &y, DEFAULT_BATCHES)?,
        mean_dh1: batch_means(&x, DEFAULT_BATCHES)?,
        mean_dh2: batch_means(&y, DEFAULT_BATCHES)?,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct TileRecord {
    pub kind: TileType,
    pub corners: [usize; 4],
    pub edge: usize,
}

/// Serializable form of a sample: lozenges, typed tiles and both heights.
#[derive(Clone, Debug, Serialize)]
pub struct QuadriRecord {
    pub lozenges: Vec<Lozenge>,
    pub tiles: Vec<TileRecord>,
    pub h1: Vec<f64>,
    pub h2: Vec<f64>,
}

impl QuadriRecord {
    pub fn new(qs: &QuadriSample, v0: usize) -> Result<Self> {
        Ok(Self {
            lozenges: qs.tiling.lozenges.clone(),
            tiles: qs.tiles()?.into_iter().map(|t| TileRecord { kind: t.kind, corners: t.corners, edge: t.edge }).collect(),
            h1: height1(qs, v0)?.values,
            h2: height2(qs, v0)?.values,
        })
    }
}

/// One JSON document per line after a header line.
pub fn write_quadri_json<W: Write>(out: &mut W, header: &serde_json::Value, records: &[QuadriRecord]) -> Result<()> {
    writeln!(out, "{}", serde_json::to_string(&serde_json::json!({ "header": header }))?)?;
    for r in records {
        writeln!(out, "{}", serde_json::to_string(r)?)?;
    }
    Ok(())
}
